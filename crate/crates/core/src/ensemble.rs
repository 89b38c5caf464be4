//! Walker clouds, the kernel-weighted effective potential that couples the
//! guide waves of different particles, and the drift-diffusion walker move.

use ndarray::{Array2, ArrayView1};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::grid::{catmull_rom, probe_log_gradient, Grid, Probe, ScalarField};
use crate::model::{pair_potential, PairTable, PhysicalParams};
use crate::{Error, Result};

/// Positions `r_i^k` of the `M` walkers attached to particle `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkerCloud {
    pub particle_index: usize,
    pub dimension: usize,
    /// Row-major `M × d`.
    pub positions: Vec<f64>,
    /// Per-axis RMS spread about the centroid, `s_i`.
    pub sample_stddev: f64,
    /// Kernel width `σ_i`.
    pub nonlocal_length: f64,
}

impl WalkerCloud {
    pub fn new(particle_index: usize, dimension: usize, positions: Vec<f64>) -> Result<Self> {
        if dimension == 0 || !positions.len().is_multiple_of(dimension) {
            return Err(Error::Invalid(format!(
                "{} coordinates do not form {dimension}-vectors",
                positions.len()
            )));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("walker positions must be finite".into()));
        }
        let s = sample_stddev(&positions, dimension)?;
        Ok(Self {
            particle_index,
            dimension,
            positions,
            sample_stddev: s,
            nonlocal_length: s,
        })
    }

    /// `M` walkers drawn from `|φ₀|²` of the unit trap (variance ½ per axis).
    pub fn from_trap_ground_state<R: Rng + ?Sized>(
        particle_index: usize,
        dimension: usize,
        walkers: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        let positions = (0..walkers * dimension)
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Self::new(particle_index, dimension, positions)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.positions.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    #[inline]
    pub fn position(&self, k: usize) -> &[f64] {
        &self.positions[k * self.dimension..(k + 1) * self.dimension]
    }

    #[inline]
    pub fn position_mut(&mut self, k: usize) -> &mut [f64] {
        let d = self.dimension;
        &mut self.positions[k * d..(k + 1) * d]
    }

    /// Recompute `s` from the positions and set `σ = α·s`.
    pub fn refresh(&mut self, alpha: f64) -> Result<()> {
        self.sample_stddev = sample_stddev(&self.positions, self.dimension)?;
        self.nonlocal_length = alpha * self.sample_stddev;
        Ok(())
    }

    pub fn centroid(&self) -> [f64; 2] {
        let mut c = [0.0; 2];
        for k in 0..self.len() {
            for (a, x) in self.position(k).iter().enumerate() {
                c[a] += x;
            }
        }
        c.iter_mut().for_each(|x| *x /= self.len() as f64);
        c
    }
}

/// The guide waves `φ_i^k` of one particle, one per walker.
#[derive(Clone, Debug)]
pub struct GuideSet {
    pub particle_index: usize,
    pub waves: Vec<ScalarField>,
}

impl GuideSet {
    pub fn len(&self) -> usize {
        self.waves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waves.is_empty()
    }

    pub fn grid(&self) -> Option<Grid> {
        self.waves.first().map(|w| w.grid)
    }
}

/// Annealing of the walker noise, `A(τ) = A₀ (1 + τ/τ_c)^(−p)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    pub base_amplitude: f64,
    pub decay_exponent: f64,
    pub reference_time: f64,
}

impl Default for NoiseSchedule {
    fn default() -> Self {
        Self {
            base_amplitude: 1.0,
            decay_exponent: 0.2,
            reference_time: 1.0,
        }
    }
}

impl NoiseSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.base_amplitude >= 0.0 && self.base_amplitude.is_finite()) {
            return Err(Error::Config("noise base_amplitude must be non-negative".into()));
        }
        if !(self.decay_exponent >= 0.0 && self.decay_exponent.is_finite()) {
            return Err(Error::Config("noise decay_exponent must be non-negative".into()));
        }
        if !(self.reference_time > 0.0 && self.reference_time.is_finite()) {
            return Err(Error::Config("noise reference_time must be positive".into()));
        }
        Ok(())
    }
}

pub fn noise_amplitude(schedule: &NoiseSchedule, tau: f64) -> f64 {
    schedule.base_amplitude * (1.0 + tau / schedule.reference_time).powf(-schedule.decay_exponent)
}

/// How the guide waves of one particle see the walkers of the others.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Gaussian kernel of width `σ_j` around the paired walker.
    Kernel,
    /// `σ → 0`: only the paired walker `r_j^k` contributes.
    Local,
    /// `σ → ∞`: uniform weights over the whole cloud (mean field).
    Hartree,
}

/// `exp(−|r_l − r_k|² / 2σ²)`.
pub fn kernel_weight(r_l: &[f64], r_k: &[f64], sigma: f64) -> Result<f64> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::Invalid(format!("kernel width must be positive, got {sigma}")));
    }
    let d2: f64 = r_l.iter().zip(r_k).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((-d2 / (2.0 * sigma * sigma)).exp())
}

/// `Z_j^k = Σ_l K[r_j^l, r_j^k, σ_j]`.
pub fn partition_weight(cloud: &WalkerCloud, k: usize) -> Result<f64> {
    let center = cloud.position(k);
    (0..cloud.len())
        .map(|l| kernel_weight(cloud.position(l), center, cloud.nonlocal_length))
        .sum()
}

/// `sqrt( Σ_k |r^k − r̄|² / (M·d) )`.
pub fn sample_stddev(positions: &[f64], dimension: usize) -> Result<f64> {
    let m = positions.len() / dimension;
    if m < 2 {
        return Err(Error::Invalid(format!(
            "sample deviation needs at least 2 walkers, got {m}"
        )));
    }
    let mut mean = [0.0; 2];
    for r in positions.chunks_exact(dimension) {
        for (a, x) in r.iter().enumerate() {
            mean[a] += x;
        }
    }
    mean.iter_mut().for_each(|x| *x /= m as f64);
    let ss: f64 = positions
        .chunks_exact(dimension)
        .map(|r| r.iter().zip(&mean).map(|(x, c)| (x - c) * (x - c)).sum::<f64>())
        .sum();
    Ok((ss / (m * dimension) as f64).sqrt())
}

/// Effective potential seen by guide wave `k` of particle `i`, evaluated by
/// direct summation over every walker of every other particle.
///
/// This is the reference form. The solver uses [`PotentialSource`], which
/// produces the same field up to interpolation error at a fraction of the cost.
pub fn effective_potential_field(
    i: usize,
    k: usize,
    clouds: &[WalkerCloud],
    params: &PhysicalParams,
    grid: &Grid,
    coupling: Coupling,
) -> Result<ScalarField> {
    let m = clouds.first().map_or(0, WalkerCloud::len);
    if clouds.iter().any(|c| c.len() != m) {
        return Err(Error::Config("all walker clouds must hold the same number of walkers".into()));
    }
    if k >= m && clouds.len() > 1 {
        return Err(Error::Invalid(format!("walker {k} out of range (M = {m})")));
    }
    let d = grid.dimension;
    let mut field = ScalarField::zeros(*grid);
    for (j, cloud) in clouds.iter().enumerate() {
        if j == i {
            continue;
        }
        let weights: Vec<f64> = match coupling {
            Coupling::Local => {
                let mut w = vec![0.0; m];
                w[k] = 1.0;
                w
            }
            Coupling::Hartree => vec![1.0 / m as f64; m],
            Coupling::Kernel => {
                let sigma = cloud.nonlocal_length;
                let center = cloud.position(k);
                let raw = (0..m)
                    .map(|l| kernel_weight(cloud.position(l), center, sigma))
                    .collect::<Result<Vec<_>>>()?;
                let z: f64 = raw.iter().sum();
                raw.into_iter().map(|w| w / z).collect()
            }
        };
        for (node, value) in field.values.iter_mut().enumerate() {
            let x = grid.node_position(node);
            *value += weights
                .iter()
                .enumerate()
                .filter(|(_, w)| **w != 0.0)
                .map(|(l, w)| w * pair_potential(&x[..d], cloud.position(l), params))
                .sum::<f64>();
        }
    }
    Ok(field)
}

/// Drift `∇φ/φ` of a guide wave at a walker position (ħ = m = 1).
pub fn drift_velocity(wave: &ScalarField, position: &[f64]) -> Probe {
    probe_log_gradient(wave, position)
}

/// `r + v·dτ + A·η·sqrt(dτ)` with `η` a standard-normal vector.
pub fn diffuse_step<R: Rng + ?Sized>(
    position: &[f64],
    drift: &[f64],
    dt: f64,
    amplitude: f64,
    rng: &mut R,
) -> [f64; 2] {
    let mut next = [0.0; 2];
    let kick = amplitude * dt.sqrt();
    for (a, x) in position.iter().enumerate() {
        let eta: f64 = if amplitude > 0.0 {
            rng.sample(StandardNormal)
        } else {
            0.0
        };
        next[a] = x + drift[a] * dt + kick * eta;
    }
    next
}

/// Pair interaction with a fixed point `y`, added into `out` on every node with
/// weight `scale`.
pub(crate) fn add_pair_field(grid: &Grid, table: &PairTable, y: &[f64], scale: f64, out: &mut [f64]) {
    let n = grid.points_per_axis;
    let h = grid.spacing();
    let x0 = -grid.half_extent;
    match grid.dimension {
        1 => {
            for (a, o) in out.iter_mut().enumerate() {
                *o += scale * table.eval((x0 + a as f64 * h - y[0]).abs());
            }
        }
        _ => {
            let dy2: Vec<f64> = (0..n)
                .map(|b| {
                    let t = x0 + b as f64 * h - y[1];
                    t * t
                })
                .collect();
            for a in 0..n {
                let t = x0 + a as f64 * h - y[0];
                let dx2 = t * t;
                let row = &mut out[a * n..(a + 1) * n];
                for (o, d2) in row.iter_mut().zip(&dy2) {
                    *o += scale * table.eval_sq(dx2 + d2);
                }
            }
        }
    }
}

/// Lattice spacing of kernel centers as a fraction of `σ`.
const CENTERS_PER_SIGMA_1D: f64 = 5.0;
const CENTERS_PER_SIGMA_2D: f64 = 3.0;

/// Contribution of one particle's cloud to the effective potentials of the
/// guide waves of all other particles, precomputed once per step.
#[derive(Clone, Debug)]
pub enum PotentialSource {
    /// The particle does not interact.
    Silent,
    /// The same field for every walker.
    Uniform(Vec<f64>),
    /// `σ → 0`: the paired walker only.
    Local { positions: Vec<f64>, dimension: usize },
    /// Exact kernel sums, one field per walker (`M × n^d`).
    PerWalker(Array2<f64>),
    /// Kernel sums tabulated on a lattice of kernel centers and interpolated
    /// to the paired walker position with Catmull–Rom weights.
    CenterTable(CenterTable),
}

#[derive(Clone, Debug)]
pub struct CenterTable {
    origin: [f64; 2],
    spacing: f64,
    counts: [usize; 2],
    dimension: usize,
    /// `(Π counts) × n^d`.
    fields: Array2<f64>,
    /// Walker positions of the source particle, to locate the paired center.
    positions: Vec<f64>,
}

impl PotentialSource {
    pub fn build(
        cloud: &WalkerCloud,
        coupling: Coupling,
        params: &PhysicalParams,
        grid: &Grid,
        table: &PairTable,
    ) -> Result<Self> {
        if !params.interacting {
            return Ok(Self::Silent);
        }
        let m = cloud.len();
        let d = cloud.dimension;
        match coupling {
            Coupling::Local => Ok(Self::Local {
                positions: cloud.positions.clone(),
                dimension: d,
            }),
            Coupling::Hartree => {
                let mut field = vec![0.0; grid.len()];
                for l in 0..m {
                    add_pair_field(grid, table, cloud.position(l), 1.0 / m as f64, &mut field);
                }
                Ok(Self::Uniform(field))
            }
            Coupling::Kernel => {
                let sigma = cloud.nonlocal_length;
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::Invalid(format!(
                        "kernel width must be positive and finite, got {sigma}"
                    )));
                }
                let lattice = Lattice::covering(cloud, sigma);
                let n_centers = lattice.total();
                let n_x = grid.len();
                let direct_cost = m * m * n_x;
                let table_cost = n_centers * m * n_x + m * 4usize.pow(d as u32) * n_x;
                let sources = pair_matrix(cloud, grid, table);
                if direct_cost <= table_cost {
                    let weights = walker_weights(cloud, sigma);
                    Ok(Self::PerWalker(weights.dot(&sources)))
                } else {
                    let weights = lattice.weights(cloud, sigma);
                    Ok(Self::CenterTable(CenterTable {
                        origin: lattice.origin,
                        spacing: lattice.spacing,
                        counts: lattice.counts,
                        dimension: d,
                        fields: weights.dot(&sources),
                        positions: cloud.positions.clone(),
                    }))
                }
            }
        }
    }

    /// Add this source's potential for walker pair index `k` into `out`.
    pub fn accumulate(&self, k: usize, grid: &Grid, table: &PairTable, out: &mut [f64]) {
        match self {
            Self::Silent => {}
            Self::Uniform(field) => add_assign(out, field.iter().copied()),
            Self::Local { positions, dimension } => {
                let y = &positions[k * dimension..(k + 1) * dimension];
                add_pair_field(grid, table, y, 1.0, out);
            }
            Self::PerWalker(fields) => add_assign(out, fields.row(k).iter().copied()),
            Self::CenterTable(t) => t.accumulate(k, out),
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, Self::Silent | Self::Uniform(_))
    }
}

#[inline]
fn add_assign(out: &mut [f64], values: impl Iterator<Item = f64>) {
    for (o, v) in out.iter_mut().zip(values) {
        *o += v;
    }
}

fn add_scaled(out: &mut [f64], row: ArrayView1<f64>, w: f64) {
    if let Some(slice) = row.as_slice() {
        for (o, v) in out.iter_mut().zip(slice) {
            *o += w * v;
        }
    } else {
        for (o, v) in out.iter_mut().zip(row.iter()) {
            *o += w * v;
        }
    }
}

/// `V(x − r^l)` for every walker `l` (rows) and grid node `x` (columns).
fn pair_matrix(cloud: &WalkerCloud, grid: &Grid, table: &PairTable) -> Array2<f64> {
    let m = cloud.len();
    let mut out = Array2::<f64>::zeros((m, grid.len()));
    for (l, mut row) in out.rows_mut().into_iter().enumerate() {
        let slice = row.as_slice_mut().expect("standard layout");
        add_pair_field(grid, table, cloud.position(l), 1.0, slice);
    }
    out
}

/// Normalized kernel weights `K[r^l, r^k]/Z^k` (row `k`, column `l`).
fn walker_weights(cloud: &WalkerCloud, sigma: f64) -> Array2<f64> {
    let m = cloud.len();
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut w = Array2::<f64>::zeros((m, m));
    for k in 0..m {
        let rk = cloud.position(k);
        let mut row = w.row_mut(k);
        let mut z = 0.0;
        for l in 0..m {
            let d2: f64 = cloud
                .position(l)
                .iter()
                .zip(rk)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let g = (-d2 * inv).exp();
            row[l] = g;
            z += g;
        }
        row.mapv_inplace(|g| g / z);
    }
    w
}

/// Regular lattice of kernel centers enclosing a cloud with one spare node on
/// each side, as the cubic interpolation stencil needs.
struct Lattice {
    origin: [f64; 2],
    spacing: f64,
    counts: [usize; 2],
    dimension: usize,
}

impl Lattice {
    fn covering(cloud: &WalkerCloud, sigma: f64) -> Self {
        let d = cloud.dimension;
        let per_sigma = if d == 1 {
            CENTERS_PER_SIGMA_1D
        } else {
            CENTERS_PER_SIGMA_2D
        };
        let spacing = sigma / per_sigma;
        let mut origin = [0.0; 2];
        let mut counts = [1usize; 2];
        for axis in 0..d {
            let (lo, hi) = (0..cloud.len())
                .map(|k| cloud.position(k)[axis])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
            origin[axis] = lo - spacing;
            let span = ((hi - lo) / spacing).ceil() as usize;
            counts[axis] = span + 4;
        }
        Self {
            origin,
            spacing,
            counts,
            dimension: d,
        }
    }

    fn total(&self) -> usize {
        self.counts[..self.dimension].iter().product()
    }

    /// Kernel weights of every walker (columns) for every lattice center
    /// (rows), normalized per center.
    fn weights(&self, cloud: &WalkerCloud, sigma: f64) -> Array2<f64> {
        let d = self.dimension;
        let m = cloud.len();
        let beta = self.spacing * self.spacing / (2.0 * sigma * sigma);
        // per-axis Gaussian factors, axis-major: g[axis][l][c]
        let per_axis: Vec<Vec<Vec<f64>>> = (0..d)
            .map(|axis| {
                (0..m)
                    .map(|l| {
                        let u = (cloud.position(l)[axis] - self.origin[axis]) / self.spacing;
                        gaussian_row(u, beta, self.counts[axis])
                    })
                    .collect()
            })
            .collect();
        let total = self.total();
        let mut w = Array2::<f64>::zeros((total, m));
        for c in 0..total {
            let (c0, c1) = if d == 1 { (c, 0) } else { (c / self.counts[1], c % self.counts[1]) };
            let mut row = w.row_mut(c);
            let mut z = 0.0;
            for l in 0..m {
                let mut g = per_axis[0][l][c0];
                if d == 2 {
                    g *= per_axis[1][l][c1];
                }
                row[l] = g;
                z += g;
            }
            if z > f64::MIN_POSITIVE {
                row.mapv_inplace(|g| g / z);
            } else {
                // far corner no walker can reach; any convex weights will do
                row.fill(1.0 / m as f64);
            }
        }
        w
    }
}

/// `exp(−β (u − c)²)` for `c = 0..count`, by recurrence from the nearest node.
fn gaussian_row(u: f64, beta: f64, count: usize) -> Vec<f64> {
    let mut out = vec![0.0; count];
    let start = (u.round().max(0.0) as usize).min(count - 1);
    let q = (-2.0 * beta).exp();
    let offset = u - start as f64;
    out[start] = (-beta * offset * offset).exp();
    let mut up = (2.0 * beta * offset - beta).exp();
    for c in start + 1..count {
        out[c] = out[c - 1] * up;
        up *= q;
    }
    let mut down = (-2.0 * beta * offset - beta).exp();
    for c in (0..start).rev() {
        out[c] = out[c + 1] * down;
        down *= q;
    }
    out
}

impl CenterTable {
    fn stencil(&self, x: f64, axis: usize) -> (usize, [f64; 4]) {
        let u = (x - self.origin[axis]) / self.spacing;
        let base = (u.floor().max(1.0) as usize).min(self.counts[axis] - 3);
        let t = (u - base as f64).clamp(0.0, 1.0);
        (base - 1, catmull_rom(t))
    }

    fn accumulate(&self, k: usize, out: &mut [f64]) {
        let d = self.dimension;
        let y = &self.positions[k * d..(k + 1) * d];
        let (b0, w0) = self.stencil(y[0], 0);
        if d == 1 {
            for (i, w) in w0.iter().enumerate() {
                add_scaled(out, self.fields.row(b0 + i), *w);
            }
        } else {
            let (b1, w1) = self.stencil(y[1], 1);
            for (i, wa) in w0.iter().enumerate() {
                for (j, wb) in w1.iter().enumerate() {
                    let c = (b0 + i) * self.counts[1] + b1 + j;
                    add_scaled(out, self.fields.row(c), wa * wb);
                }
            }
        }
    }

    pub fn center_count(&self) -> usize {
        self.fields.nrows()
    }
}
