//! Reference ground states from the full `N·d`-dimensional configuration-space
//! Schrödinger equation, with the same finite-difference stencil as the guide
//! waves. Feasible for a few particles in 1D and two in 2D.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::grid::{laplacian_cube, Grid, ScalarField};
use crate::model::{core_potential, PhysicalParams};
use crate::observables::DensityMatrix;
use crate::{Error, Result};

/// Largest configuration grid the oracle will allocate (nodes).
pub const MAX_CONFIG_POINTS: usize = 1 << 25;

/// Default stopping threshold on the per-step energy change.
pub const ENERGY_TOLERANCE: f64 = 1e-8;

/// Many-body wave function on the product grid `grid^N`, particle 0 slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigWave {
    pub grid: Grid,
    pub n_particles: usize,
    pub values: Vec<f64>,
    /// `h^(N·d)`.
    pub norm_weight: f64,
}

impl ConfigWave {
    /// `Π_i φ(r_i)`, symmetric by construction.
    pub fn product(one_body: &ScalarField, n_particles: usize) -> Result<Self> {
        let grid = one_body.grid;
        let len = config_len(&grid, n_particles)?;
        let block = grid.len();
        let values = (0..len)
            .map(|flat| {
                let mut rest = flat;
                let mut v = 1.0;
                for _ in 0..n_particles {
                    v *= one_body.values[rest % block];
                    rest /= block;
                }
                v
            })
            .collect();
        Ok(Self {
            grid,
            n_particles,
            values,
            norm_weight: grid.cell_volume().powi(n_particles as i32),
        })
    }

    pub fn axes(&self) -> usize {
        self.n_particles * self.grid.dimension
    }

    pub fn norm_squared(&self) -> f64 {
        self.norm_weight * dot(&self.values, &self.values)
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm2 = self.norm_squared();
        if !(norm2 > 0.0 && norm2.is_finite()) {
            return Err(Error::CollapsedWave(format!("configuration wave norm² = {norm2:e}")));
        }
        let scale = 1.0 / norm2.sqrt();
        self.values.iter_mut().for_each(|v| *v *= scale);
        Ok(())
    }

    /// `max |Ψ(…r_i…r_j…) − Ψ(…r_j…r_i…)|` over all particle pairs.
    pub fn exchange_asymmetry(&self) -> f64 {
        let block = self.grid.len();
        let n = self.n_particles;
        let mut worst = 0.0f64;
        let mut digits = vec![0usize; n];
        for (flat, v) in self.values.iter().enumerate() {
            let mut rest = flat;
            for slot in (0..n).rev() {
                digits[slot] = rest % block;
                rest /= block;
            }
            for i in 0..n {
                for j in i + 1..n {
                    if digits[i] >= digits[j] {
                        continue;
                    }
                    let swapped = flat - digits[i] * block.pow((n - 1 - i) as u32)
                        - digits[j] * block.pow((n - 1 - j) as u32)
                        + digits[j] * block.pow((n - 1 - i) as u32)
                        + digits[i] * block.pow((n - 1 - j) as u32);
                    worst = worst.max((v - self.values[swapped]).abs());
                }
            }
        }
        worst
    }
}

fn config_len(grid: &Grid, n_particles: usize) -> Result<usize> {
    if n_particles == 0 {
        return Err(Error::Config("oracle needs at least one particle".into()));
    }
    let axes = n_particles * grid.dimension;
    let len = (grid.points_per_axis as u128).pow(axes as u32);
    if len > MAX_CONFIG_POINTS as u128 {
        return Err(Error::MemoryBudget(format!(
            "{} nodes per axis over {axes} axes exceed {MAX_CONFIG_POINTS} configuration points",
            grid.points_per_axis
        )));
    }
    Ok(len as usize)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `Σ_i V_trap(r_i) + Σ_{i<j} V_ee(r_i, r_j)` on every configuration node.
pub fn configuration_potential(params: &PhysicalParams, grid: &Grid) -> Result<Vec<f64>> {
    let n = params.n_particles;
    let d = grid.dimension;
    let len = config_len(grid, n)?;
    let block = grid.len();
    let nodes: Vec<[f64; 2]> = (0..block).map(|f| grid.node_position(f)).collect();
    let trap: Vec<f64> = nodes.iter().map(|r| core_potential(&r[..d])).collect();
    let mut digits = vec![0usize; n];
    Ok((0..len)
        .map(|flat| {
            let mut rest = flat;
            for slot in (0..n).rev() {
                digits[slot] = rest % block;
                rest /= block;
            }
            let mut v = 0.0;
            for i in 0..n {
                v += trap[digits[i]];
                for j in 0..i {
                    let (a, b) = (&nodes[digits[i]], &nodes[digits[j]]);
                    let r2: f64 = (0..d).map(|c| (a[c] - b[c]) * (a[c] - b[c])).sum();
                    v += params.pair_energy(r2.sqrt());
                }
            }
            v
        })
        .collect())
}

/// `H Ψ` with the shared stencil.
fn apply_hamiltonian(values: &[f64], potential: &[f64], grid: &Grid, axes: usize, out: &mut [f64]) {
    laplacian_cube(values, grid.points_per_axis, axes, grid.spacing(), out);
    for ((o, v), p) in out.iter_mut().zip(values).zip(potential) {
        *o = -0.5 * *o + p * v;
    }
}

/// Upper bound on the spectrum of the discrete `H`.
fn spectral_bound(potential: &[f64], grid: &Grid, axes: usize) -> f64 {
    let h = grid.spacing();
    let vmax = potential.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    2.0 * axes as f64 / (h * h) + vmax
}

/// Outcome of an oracle relaxation.
#[derive(Clone, Debug)]
pub struct OracleRun {
    pub wave: ConfigWave,
    pub energy: f64,
    pub steps: usize,
    pub converged: bool,
    pub dt: f64,
}

/// Imaginary-time step that keeps explicit Euler stable and monotone for
/// every mode: `dτ = 1.9 / λ_max`.
pub fn stable_time_step(params: &PhysicalParams, grid: &Grid) -> Result<f64> {
    let potential = configuration_potential(params, grid)?;
    Ok(1.9 / spectral_bound(&potential, grid, params.n_particles * grid.dimension))
}

/// Relax `Ψ ← Ψ − dτ (H − E) Ψ` from the symmetric product of trap ground
/// states until the energy changes by less than [`ENERGY_TOLERANCE`] per step.
///
/// `dt = None` picks the largest stable step.
pub fn exact_ground_state(
    params: &PhysicalParams,
    grid: &Grid,
    dt: Option<f64>,
    max_steps: usize,
) -> Result<OracleRun> {
    params.validate()?;
    grid.validate()?;
    if params.dimension != grid.dimension {
        return Err(Error::Config("grid and system dimensions differ".into()));
    }
    let axes = params.n_particles * grid.dimension;
    let potential = configuration_potential(params, grid)?;
    let bound = spectral_bound(&potential, grid, axes);
    let dt = dt.unwrap_or(1.9 / bound);
    if !(dt > 0.0 && dt < 2.0 / bound) {
        return Err(Error::Config(format!(
            "oracle step {dt} outside the stable range (0, {})",
            2.0 / bound
        )));
    }
    let mut wave = ConfigWave::product(&ScalarField::trap_ground_state(*grid), params.n_particles)?;
    let mut h_psi = vec![0.0; wave.values.len()];
    let mut energy = f64::INFINITY;
    let mut converged = false;
    let mut steps = 0;
    while steps < max_steps {
        apply_hamiltonian(&wave.values, &potential, grid, axes, &mut h_psi);
        let next = wave.norm_weight * dot(&wave.values, &h_psi);
        if !next.is_finite() {
            return Err(Error::Numerical(format!("oracle energy diverged at step {steps}")));
        }
        if (energy - next).abs() < ENERGY_TOLERANCE {
            energy = next;
            converged = true;
            break;
        }
        energy = next;
        for (v, hv) in wave.values.iter_mut().zip(&h_psi) {
            *v -= dt * (hv - energy * *v);
        }
        wave.normalize()?;
        steps += 1;
    }
    let asym = wave.exchange_asymmetry();
    if asym > 1e-8 {
        return Err(Error::Numerical(format!("oracle ground state lost exchange symmetry ({asym:e})")));
    }
    Ok(OracleRun {
        wave,
        energy,
        steps,
        converged,
        dt,
    })
}

/// Rayleigh quotient `⟨Ψ|H|Ψ⟩/⟨Ψ|Ψ⟩` of the discrete Hamiltonian.
pub fn exact_energy(wave: &ConfigWave, params: &PhysicalParams) -> Result<f64> {
    if params.n_particles != wave.n_particles || params.dimension != wave.grid.dimension {
        return Err(Error::Invalid("wave and parameters describe different systems".into()));
    }
    let potential = configuration_potential(params, &wave.grid)?;
    let mut h_psi = vec![0.0; wave.values.len()];
    apply_hamiltonian(&wave.values, &potential, &wave.grid, wave.axes(), &mut h_psi);
    Ok(dot(&wave.values, &h_psi) / dot(&wave.values, &wave.values))
}

/// Ground-state energy by shifted power iteration on `c − H`, with its own
/// matrix-free Hamiltonian. Used to cross-check [`exact_ground_state`].
pub fn power_iteration_energy(
    params: &PhysicalParams,
    grid: &Grid,
    tolerance: f64,
    max_iterations: usize,
) -> Result<f64> {
    let axes = params.n_particles * grid.dimension;
    let potential = configuration_potential(params, grid)?;
    let shift = spectral_bound(&potential, grid, axes);
    let n = grid.points_per_axis;
    let len = potential.len();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let strides: Vec<usize> = (0..axes).map(|a| n.pow((axes - 1 - a) as u32)).collect();
    let mut x = vec![1.0; len];
    let mut y = vec![0.0; len];
    let mut estimate = f64::INFINITY;
    for _ in 0..max_iterations {
        let mut xx = 0.0;
        let mut xhx = 0.0;
        for p in 0..len {
            let mut neighbors = 0.0;
            for &stride in &strides {
                let coord = (p / stride) % n;
                if coord > 0 {
                    neighbors += x[p - stride];
                }
                if coord + 1 < n {
                    neighbors += x[p + stride];
                }
            }
            let hx = (axes as f64 * inv_h2 + potential[p]) * x[p] - 0.5 * inv_h2 * neighbors;
            xx += x[p] * x[p];
            xhx += x[p] * hx;
            y[p] = shift * x[p] - hx;
        }
        let next = xhx / xx;
        let norm = dot(&y, &y).sqrt();
        std::mem::swap(&mut x, &mut y);
        x.iter_mut().for_each(|v| *v /= norm);
        if (estimate - next).abs() < tolerance {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::Numerical(format!(
        "power iteration did not converge in {max_iterations} iterations (last estimate {estimate})"
    )))
}

/// `ρ(r, r′) = ∫ Ψ(r, rest) Ψ(r′, rest) d(rest)` for particle 0.
pub fn exact_one_body_rdm(wave: &ConfigWave) -> Result<DensityMatrix> {
    let block = wave.grid.len();
    let rest = wave.values.len() / block;
    let psi = ArrayView2::from_shape((block, rest), &wave.values)
        .map_err(|e| Error::Invalid(e.to_string()))?;
    let weight = wave.grid.cell_volume().powi(wave.n_particles as i32 - 1);
    let values = psi.dot(&psi.t()) * weight;
    Ok(DensityMatrix {
        grid: wave.grid,
        values,
        trace_weight: wave.grid.cell_volume(),
    })
}

/// Summary of a reference calculation, as persisted by the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub n_particles: usize,
    pub dimension: usize,
    pub screening: f64,
    pub softening: f64,
    pub points_per_axis: usize,
    pub half_extent: f64,
    pub energy: f64,
    pub linear_entropy: f64,
    pub steps: usize,
    pub converged: bool,
}

/// Ground state, energy and one-body linear entropy in one call.
pub fn reference(params: &PhysicalParams, grid: &Grid, max_steps: usize) -> Result<OracleSummary> {
    let run = exact_ground_state(params, grid, None, max_steps)?;
    let rho = exact_one_body_rdm(&run.wave)?;
    Ok(OracleSummary {
        n_particles: params.n_particles,
        dimension: params.dimension,
        screening: params.screening,
        softening: params.softening,
        points_per_axis: grid.points_per_axis,
        half_extent: grid.half_extent,
        energy: run.energy,
        linear_entropy: crate::observables::linear_entropy(&rho),
        steps: run.steps,
        converged: run.converged,
    })
}
