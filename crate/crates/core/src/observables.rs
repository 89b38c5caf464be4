//! One-body reduced density matrices, purity and linear entropy, and density
//! profiles of converged ensembles.

use ndarray::Array2;

use crate::ensemble::{GuideSet, WalkerCloud};
use crate::grid::{Grid, ScalarField};
use crate::{Error, Result};

/// Largest density matrix assembled without coarsening the grid.
pub const RDM_BUDGET_BYTES: usize = 256 << 20;

/// Tolerance on `‖φ‖² − 1` accepted as unit norm.
const NORM_TOLERANCE: f64 = 1e-8;

/// `ρ(r, r′)` on the nodes of `grid`, with `h^d` as the integration weight.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub grid: Grid,
    pub values: Array2<f64>,
    pub trace_weight: f64,
}

impl DensityMatrix {
    /// `h^d Σ_r ρ(r, r)`.
    pub fn trace(&self) -> f64 {
        self.trace_weight * self.values.diag().sum()
    }

    /// `Tr ρ² = h^{2d} Σ ρ(r, r′)²`.
    pub fn purity(&self) -> f64 {
        self.trace_weight * self.trace_weight * self.values.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.values.nrows();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in a + 1..n {
                worst = worst.max((self.values[[a, b]] - self.values[[b, a]]).abs());
            }
        }
        worst
    }

    /// The diagonal `ρ(r, r)` as a probability density.
    pub fn density(&self) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.diag().to_vec(),
        }
    }
}

fn check_normalized(guides: &GuideSet) -> Result<Grid> {
    let grid = guides
        .grid()
        .ok_or_else(|| Error::Invalid("guide set holds no waves".into()))?;
    for (k, wave) in guides.waves.iter().enumerate() {
        if wave.grid != grid {
            return Err(Error::Invalid(format!("guide wave {k} lives on a different grid")));
        }
        if !wave.is_normalized(NORM_TOLERANCE) {
            return Err(Error::Invalid(format!(
                "guide wave {k} has norm² {}",
                wave.norm_squared()
            )));
        }
    }
    Ok(grid)
}

/// Subsampling factor that brings an `n^d × n^d` matrix under the budget.
fn coarsening_factor(grid: &Grid) -> Result<usize> {
    let fits = |n: usize| n.pow(2 * grid.dimension as u32) * 8 <= RDM_BUDGET_BYTES;
    let cells = grid.points_per_axis - 1;
    (1..=cells)
        .filter(|c| cells.is_multiple_of(*c))
        .find(|c| fits(cells / c + 1))
        .ok_or_else(|| Error::MemoryBudget("density matrix does not fit on any coarsened grid".into()))
}

fn subsample(wave: &ScalarField, coarse: &Grid, factor: usize) -> ScalarField {
    let n = wave.grid.points_per_axis;
    let nc = coarse.points_per_axis;
    let values = match coarse.dimension {
        1 => (0..nc).map(|a| wave.values[a * factor]).collect(),
        _ => (0..nc * nc)
            .map(|f| wave.values[(f / nc) * factor * n + (f % nc) * factor])
            .collect(),
    };
    ScalarField {
        grid: *coarse,
        values,
    }
}

/// `ρ = (1/M) Σ_k φ^k ⊗ φ^k`.
///
/// When the full matrix would exceed [`RDM_BUDGET_BYTES`] the waves are
/// subsampled onto a coarser grid with the same extent and renormalized there.
pub fn reduced_density_matrix(guides: &GuideSet) -> Result<DensityMatrix> {
    let grid = check_normalized(guides)?;
    let factor = coarsening_factor(&grid)?;
    let (grid, rows) = if factor == 1 {
        (grid, guides.waves.iter().map(|w| w.values.clone()).collect::<Vec<_>>())
    } else {
        let coarse = Grid::new(grid.dimension, grid.half_extent, (grid.points_per_axis - 1) / factor + 1)?;
        let rows = guides
            .waves
            .iter()
            .map(|w| subsample(w, &coarse, factor).normalize().map(|f| f.values))
            .collect::<Result<Vec<_>>>()?;
        (coarse, rows)
    };
    let m = rows.len();
    let len = grid.len();
    let phi = Array2::from_shape_vec((m, len), rows.concat()).expect("rows have grid length");
    let values = phi.t().dot(&phi) / m as f64;
    Ok(DensityMatrix {
        grid,
        values,
        trace_weight: grid.cell_volume(),
    })
}

/// `S_L = 1 − Tr ρ²`.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    1.0 - rho.purity()
}

/// `Tr ρ² = (1/M²) Σ_{k,l} ⟨φ^k, φ^l⟩²`, without forming `ρ`.
pub fn streaming_purity(guides: &GuideSet) -> Result<f64> {
    let grid = check_normalized(guides)?;
    let m = guides.len();
    let len = grid.len();
    let mut phi = Array2::<f64>::zeros((m, len));
    for (k, wave) in guides.waves.iter().enumerate() {
        phi.row_mut(k)
            .as_slice_mut()
            .expect("standard layout")
            .copy_from_slice(&wave.values);
    }
    let gram = phi.dot(&phi.t());
    let h = grid.cell_volume();
    let sum: f64 = gram.iter().map(|g| (h * g) * (h * g)).sum();
    Ok(sum / (m * m) as f64)
}

/// Linear entropy via [`streaming_purity`].
pub fn streaming_linear_entropy(guides: &GuideSet) -> Result<f64> {
    Ok(1.0 - streaming_purity(guides)?)
}

/// `(1/M) Σ_k |φ^k|²`.
pub fn guide_density(guides: &GuideSet) -> Result<ScalarField> {
    let grid = check_normalized(guides)?;
    let mut values = vec![0.0; grid.len()];
    for wave in &guides.waves {
        for (acc, v) in values.iter_mut().zip(&wave.values) {
            *acc += v * v;
        }
    }
    let m = guides.len() as f64;
    values.iter_mut().for_each(|v| *v /= m);
    Ok(ScalarField { grid, values })
}

/// Walker histogram on `grid`, deposited with multilinear (cloud-in-cell)
/// weights and normalized to unit integral. Several clouds may be pooled.
pub fn walker_density(clouds: &[&WalkerCloud], grid: &Grid) -> Result<ScalarField> {
    let mut field = ScalarField::zeros(*grid);
    deposit_walkers(clouds, &mut field);
    let total: f64 = clouds.iter().map(|c| c.len()).sum::<usize>() as f64;
    if total == 0.0 {
        return Err(Error::Invalid("no walkers to histogram".into()));
    }
    let scale = 1.0 / (total * grid.cell_volume());
    field.values.iter_mut().for_each(|v| *v *= scale);
    Ok(field)
}

/// Add unit-weight cloud-in-cell deposits of every walker into `field`.
pub fn deposit_walkers(clouds: &[&WalkerCloud], field: &mut ScalarField) {
    for cloud in clouds {
        for k in 0..cloud.len() {
            for (flat, w) in field.grid.locate(cloud.position(k)).corners() {
                field.values[flat] += w;
            }
        }
    }
}

/// `h^d Σ |p − q|`.
pub fn l1_distance(p: &ScalarField, q: &ScalarField) -> Result<f64> {
    if p.grid != q.grid {
        return Err(Error::Invalid("densities live on different grids".into()));
    }
    Ok(p.grid.cell_volume() * p.values.iter().zip(&q.values).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn set(waves: Vec<ScalarField>) -> GuideSet {
        GuideSet {
            particle_index: 0,
            waves,
        }
    }

    /// Normalized harmonic eigenfunctions, mutually orthogonal on the grid up
    /// to discretization error; orthonormalized exactly by Gram–Schmidt.
    fn orthonormal(grid: Grid, count: usize) -> Vec<ScalarField> {
        let mut out: Vec<ScalarField> = Vec::new();
        for m in 0..count {
            let mut f = ScalarField::from_fn(grid, |r| r[0].powi(m as i32) * (-0.5 * r[0] * r[0]).exp());
            for g in &out {
                let c = f.inner(g);
                for (a, b) in f.values.iter_mut().zip(&g.values) {
                    *a -= c * b;
                }
            }
            out.push(f.normalize().unwrap());
        }
        out
    }

    #[test]
    fn pure_state() {
        let grid = Grid::new(1, 6.0, 64).unwrap();
        let phi = ScalarField::trap_ground_state(grid);
        let g = set(vec![phi.clone(); 5]);
        let rho = reduced_density_matrix(&g).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-10);
        assert!(linear_entropy(&rho).abs() < 1e-8);
        assert!(streaming_linear_entropy(&g).unwrap().abs() < 1e-8);
        let a = rho.values[[10, 30]];
        assert!((a - phi.values[10] * phi.values[30]).abs() < 1e-14);
    }

    #[test]
    fn mixtures_of_orthogonal_states() {
        let grid = Grid::new(1, 7.0, 96).unwrap();
        for m in 2..=4 {
            let g = set(orthonormal(grid, m));
            let rho = reduced_density_matrix(&g).unwrap();
            let expected = 1.0 - 1.0 / m as f64;
            assert!((linear_entropy(&rho) - expected).abs() < 1e-10);
            assert!((streaming_linear_entropy(&g).unwrap() - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_unnormalized_or_empty() {
        let grid = Grid::new(1, 6.0, 32).unwrap();
        let mut phi = ScalarField::trap_ground_state(grid);
        phi.values[10] *= 2.0;
        assert!(reduced_density_matrix(&set(vec![phi.clone()])).is_err());
        assert!(streaming_purity(&set(vec![phi])).is_err());
        assert!(reduced_density_matrix(&set(vec![])).is_err());
    }

    #[test]
    fn large_two_dimensional_matrix_is_coarsened() {
        let grid = Grid::new(2, 6.0, 127).unwrap();
        let phi = ScalarField::trap_ground_state(grid);
        let rho = reduced_density_matrix(&set(vec![phi; 2])).unwrap();
        assert!(rho.grid.points_per_axis < 127);
        assert!((rho.trace() - 1.0).abs() < 1e-10);
        assert!(linear_entropy(&rho).abs() < 1e-8);
    }

    #[test]
    fn guide_density_of_identical_waves() {
        let grid = Grid::new(2, 5.0, 24).unwrap();
        let phi = ScalarField::trap_ground_state(grid);
        let rho = guide_density(&set(vec![phi.clone(); 3])).unwrap();
        for (a, b) in rho.values.iter().zip(&phi.values) {
            assert!((a - b * b).abs() < 1e-14);
        }
    }

    #[test]
    fn histogram_of_gaussian_samples() {
        let grid = Grid::new(1, 6.0, 97).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let positions: Vec<f64> = (0..1_000_000)
            .map(|_| std::f64::consts::FRAC_1_SQRT_2 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let cloud = WalkerCloud::new(0, 1, positions).unwrap();
        let hist = walker_density(&[&cloud], &grid).unwrap();
        let exact = ScalarField::from_fn(grid, |r| (-r[0] * r[0]).exp() / std::f64::consts::PI.sqrt());
        let err = l1_distance(&hist, &exact).unwrap();
        assert!(err < 0.02, "L1 {err}");
        assert!(walker_density(&[], &grid).is_err());
    }

    mod props {
        use super::*;
        use proptest::collection::vec;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn rdm_identities(coeffs in vec(vec(-1.0..1.0f64, 4), 1..6)) {
                let grid = Grid::new(1, 6.0, 40).unwrap();
                let basis = orthonormal(grid, 4);
                let waves: Vec<ScalarField> = coeffs
                    .iter()
                    .filter(|c| c.iter().map(|x| x * x).sum::<f64>() > 1e-3)
                    .map(|c| {
                        let mut f = ScalarField::zeros(grid);
                        for (cb, b) in c.iter().zip(&basis) {
                            for (v, bv) in f.values.iter_mut().zip(&b.values) {
                                *v += cb * bv;
                            }
                        }
                        f.normalize().unwrap()
                    })
                    .collect();
                prop_assume!(!waves.is_empty());
                let g = set(waves);
                let rho = reduced_density_matrix(&g).unwrap();
                prop_assert!(rho.max_asymmetry() < 1e-10);
                prop_assert!((rho.trace() - 1.0).abs() < 1e-8);
                let s = linear_entropy(&rho);
                prop_assert!((0.0 - 1e-12..1.0).contains(&s));
                prop_assert!((s - streaming_linear_entropy(&g).unwrap()).abs() < 1e-8);
                // positive semidefinite: vᵀρv ≥ 0 for probe vectors
                for shift in 0..5 {
                    let v: Vec<f64> = (0..40).map(|a| ((a * 7 + shift * 13) as f64).sin()).collect();
                    let v = ndarray::Array1::from(v);
                    prop_assert!(v.dot(&rho.values.dot(&v)) >= -1e-12);
                }
            }
        }
    }
}
