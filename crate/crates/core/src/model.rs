//! Physical parameters of a bosonic quantum dot and its two potentials.
//!
//! Everything is in atomic units: ħ = m = 1, the trap frequency is 1, lengths
//! are in bohr and energies in hartree.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Softening length of the soft-core interaction used by the presets.
pub const DEFAULT_SOFTENING: f64 = 1.0;
/// Screening constant of the `short_range` preset.
pub const SHORT_RANGE_SCREENING: f64 = 3.0;

/// System definition: `n_particles` identical bosons in a `dimension`-D
/// isotropic harmonic trap, interacting through
/// `exp(-screening·r) / sqrt(r² + softening²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub n_particles: usize,
    pub dimension: usize,
    /// Yukawa screening constant `a` (1/bohr), `a = 0` is the soft-core Coulomb limit.
    pub screening: f64,
    /// Soft-core length `b` (bohr), strictly positive.
    pub softening: f64,
    /// When false the pair interaction is switched off entirely.
    #[serde(default = "default_true")]
    pub interacting: bool,
}

fn default_true() -> bool {
    true
}

impl PhysicalParams {
    pub fn new(n_particles: usize, dimension: usize, screening: f64, softening: f64) -> Result<Self> {
        let params = Self {
            n_particles,
            dimension,
            screening,
            softening,
            interacting: true,
        };
        params.validate()?;
        Ok(params)
    }

    /// Soft-core Coulomb interaction, `a = 0`, `b = 1`.
    pub fn long_range(n_particles: usize, dimension: usize) -> Result<Self> {
        Self::new(n_particles, dimension, 0.0, DEFAULT_SOFTENING)
    }

    /// Screened interaction, `a = 3`, `b = 1`.
    pub fn short_range(n_particles: usize, dimension: usize) -> Result<Self> {
        Self::new(n_particles, dimension, SHORT_RANGE_SCREENING, DEFAULT_SOFTENING)
    }

    /// Same trap, no pair interaction.
    pub fn non_interacting(n_particles: usize, dimension: usize) -> Result<Self> {
        let mut params = Self::long_range(n_particles, dimension)?;
        params.interacting = false;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return Err(Error::Config("n_particles must be at least 1".into()));
        }
        if !(1..=2).contains(&self.dimension) {
            return Err(Error::Config(format!(
                "dimension must be 1 or 2, got {}",
                self.dimension
            )));
        }
        if !(self.screening >= 0.0 && self.screening.is_finite()) {
            return Err(Error::Config(format!(
                "screening must be finite and non-negative, got {}",
                self.screening
            )));
        }
        if !(self.softening > 0.0 && self.softening.is_finite()) {
            return Err(Error::Config(format!(
                "softening must be finite and strictly positive, got {}",
                self.softening
            )));
        }
        Ok(())
    }

    /// Pair interaction as a function of the separation `r ≥ 0`.
    #[inline]
    pub fn pair_energy(&self, r: f64) -> f64 {
        if !self.interacting {
            return 0.0;
        }
        yukawa_soft_core(r, self.screening, self.softening)
    }
}

/// `exp(-a r) / sqrt(r² + b²)`.
#[inline]
pub fn yukawa_soft_core(r: f64, screening: f64, softening: f64) -> f64 {
    let inv = 1.0 / (r * r + softening * softening).sqrt();
    if screening == 0.0 {
        inv
    } else {
        (-screening * r).exp() * inv
    }
}

/// Parabolic trap `|r|²/2`.
#[inline]
pub fn core_potential(position: &[f64]) -> f64 {
    0.5 * position.iter().map(|x| x * x).sum::<f64>()
}

#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Interaction energy between two particles at `r_i` and `r_j`.
#[inline]
pub fn pair_potential(r_i: &[f64], r_j: &[f64], params: &PhysicalParams) -> f64 {
    params.pair_energy(distance(r_i, r_j))
}

/// Linear-interpolation table of the pair interaction on `[0, r_max]`.
///
/// Used on hot paths where the same potential is evaluated millions of times
/// per step. The relative error is below 1e-6 for the default resolution.
#[derive(Clone, Debug)]
pub struct PairTable {
    inv_dr: f64,
    values: Vec<f64>,
    params: PhysicalParams,
}

impl PairTable {
    pub const DEFAULT_DR: f64 = 5e-4;

    pub fn new(params: &PhysicalParams, r_max: f64) -> Self {
        Self::with_resolution(params, r_max, Self::DEFAULT_DR)
    }

    pub fn with_resolution(params: &PhysicalParams, r_max: f64, dr: f64) -> Self {
        let count = (r_max / dr).ceil() as usize + 2;
        let values = (0..count).map(|i| params.pair_energy(i as f64 * dr)).collect();
        Self {
            inv_dr: 1.0 / dr,
            values,
            params: *params,
        }
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        let u = r * self.inv_dr;
        let i = u as usize;
        if i + 1 >= self.values.len() {
            return self.params.pair_energy(r);
        }
        let t = u - i as f64;
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }

    #[inline]
    pub fn eval_sq(&self, r2: f64) -> f64 {
        self.eval(r2.sqrt())
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trap_values() {
        assert_eq!(core_potential(&[0.0]), 0.0);
        assert_eq!(core_potential(&[1.0]), 0.5);
        assert_eq!(core_potential(&[3.0, 4.0]), 12.5);
    }

    #[test]
    fn pair_values() {
        let lr = PhysicalParams::long_range(2, 1).unwrap();
        let sr = PhysicalParams::short_range(2, 1).unwrap();
        assert_eq!(pair_potential(&[0.0], &[0.0], &lr), 1.0);
        assert_eq!(pair_potential(&[0.0], &[0.0], &sr), 1.0);
        assert!((pair_potential(&[3f64.sqrt()], &[0.0], &lr) - 0.5).abs() < 1e-15);
        let expected = (-3.0f64).exp() / 2f64.sqrt();
        assert!((pair_potential(&[1.0], &[0.0], &sr) - expected).abs() < 1e-15);
        assert!((expected - 0.035206).abs() < 5e-6);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(PhysicalParams::new(2, 3, 0.0, 1.0).is_err());
        assert!(PhysicalParams::new(2, 1, 0.0, 0.0).is_err());
        assert!(PhysicalParams::new(2, 1, -1.0, 1.0).is_err());
        assert!(PhysicalParams::new(0, 1, 0.0, 1.0).is_err());
    }

    #[test]
    fn non_interacting_has_zero_pair_energy() {
        let p = PhysicalParams::non_interacting(3, 2).unwrap();
        assert_eq!(pair_potential(&[0.0, 0.0], &[0.1, 0.0], &p), 0.0);
    }

    #[test]
    fn table_matches_direct() {
        for params in [
            PhysicalParams::long_range(2, 1).unwrap(),
            PhysicalParams::short_range(2, 1).unwrap(),
        ] {
            let table = PairTable::new(&params, 20.0);
            for i in 0..4000 {
                let r = i as f64 * 0.004_987;
                let exact = params.pair_energy(r);
                assert!((table.eval(r) - exact).abs() <= 1e-6 * exact.max(1e-3), "r = {r}");
            }
            // beyond the table it falls back to the closed form
            assert_eq!(table.eval(25.0), params.pair_energy(25.0));
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn pair_potential_symmetric_positive_decreasing(
                x1 in -5.0..5.0f64, y1 in -5.0..5.0f64,
                x2 in -5.0..5.0f64, y2 in -5.0..5.0f64,
                a in 0.0..5.0f64, b in 0.1..3.0f64,
                dr in 1e-3..2.0f64,
            ) {
                let p = PhysicalParams::new(2, 2, a, b).unwrap();
                let v12 = pair_potential(&[x1, y1], &[x2, y2], &p);
                let v21 = pair_potential(&[x2, y2], &[x1, y1], &p);
                prop_assert_eq!(v12, v21);
                prop_assert!(v12 > 0.0);
                let r = distance(&[x1, y1], &[x2, y2]);
                prop_assert!(p.pair_energy(r + dr) < p.pair_energy(r));
            }

            #[test]
            fn short_range_below_long_range(r in 0.0..20.0f64) {
                let lr = PhysicalParams::long_range(2, 1).unwrap();
                let sr = PhysicalParams::short_range(2, 1).unwrap();
                if r == 0.0 {
                    prop_assert_eq!(sr.pair_energy(r), lr.pair_energy(r));
                } else {
                    prop_assert!(sr.pair_energy(r) < lr.pair_energy(r));
                }
            }
        }
    }
}
