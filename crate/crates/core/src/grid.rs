//! Uniform grids, scalar fields on them, and the imaginary-time propagator
//! for a single one-body wave.
//!
//! Fields are stored row-major with the first axis slowest. Values outside
//! `[-L, L]^d` are taken to be zero (Dirichlet boundaries), both by the
//! Laplacian stencil and by the propagator.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Smallest admissible number of nodes per axis.
pub const MIN_POINTS_PER_AXIS: usize = 16;

/// Probes with `|φ|` below this report node proximity.
pub const NODE_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dimension: usize,
    pub half_extent: f64,
    pub points_per_axis: usize,
}

impl Grid {
    pub fn new(dimension: usize, half_extent: f64, points_per_axis: usize) -> Result<Self> {
        let grid = Self {
            dimension,
            half_extent,
            points_per_axis,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// `L = 8`, `n = 256` in 1D and `L = 6`, `n = 64` in 2D.
    pub fn default_for(dimension: usize) -> Result<Self> {
        match dimension {
            1 => Self::new(1, 8.0, 256),
            2 => Self::new(2, 6.0, 64),
            d => Err(Error::Config(format!("dimension must be 1 or 2, got {d}"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.dimension) {
            return Err(Error::Config(format!(
                "grid dimension must be 1 or 2, got {}",
                self.dimension
            )));
        }
        if self.points_per_axis < MIN_POINTS_PER_AXIS {
            return Err(Error::Config(format!(
                "points_per_axis must be at least {MIN_POINTS_PER_AXIS}, got {}",
                self.points_per_axis
            )));
        }
        if !(self.half_extent > 0.0 && self.half_extent.is_finite()) {
            return Err(Error::Config(format!(
                "half_extent must be positive, got {}",
                self.half_extent
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_extent / (self.points_per_axis - 1) as f64
    }

    /// Total number of nodes, `n^d`.
    #[inline]
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integration weight `h^d`.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dimension as i32)
    }

    #[inline]
    pub fn coordinate(&self, index: usize) -> f64 {
        -self.half_extent + index as f64 * self.spacing()
    }

    pub fn axis(&self) -> Vec<f64> {
        (0..self.points_per_axis).map(|i| self.coordinate(i)).collect()
    }

    /// Position of a node given its flat index. Unused trailing entries are zero.
    pub fn node_position(&self, flat: usize) -> [f64; 2] {
        let n = self.points_per_axis;
        match self.dimension {
            1 => [self.coordinate(flat), 0.0],
            _ => [self.coordinate(flat / n), self.coordinate(flat % n)],
        }
    }

    pub fn contains(&self, position: &[f64]) -> bool {
        position
            .iter()
            .all(|x| x.abs() <= self.half_extent && x.is_finite())
    }

    /// Cell containing `position` and the fractional offsets inside it.
    /// Positions outside the domain are clamped onto its boundary.
    pub fn locate(&self, position: &[f64]) -> Location {
        let n = self.points_per_axis;
        let h = self.spacing();
        let mut base = [0usize; 2];
        let mut frac = [0.0; 2];
        let mut clamped = false;
        for axis in 0..self.dimension {
            let mut u = (position[axis] + self.half_extent) / h;
            if u.is_nan() || u < 0.0 {
                u = 0.0;
                clamped = true;
            } else if u > (n - 1) as f64 {
                u = (n - 1) as f64;
                clamped = true;
            }
            let i = (u.floor() as usize).min(n - 2);
            base[axis] = i;
            frac[axis] = u - i as f64;
        }
        Location {
            base,
            frac,
            clamped,
            dimension: self.dimension,
            n,
        }
    }

    /// Clamp a position into the closed domain, returning whether it moved.
    pub fn clamp(&self, position: &mut [f64]) -> bool {
        let mut moved = false;
        for x in position.iter_mut() {
            if !x.is_finite() {
                *x = 0.0;
                moved = true;
            } else if *x > self.half_extent {
                *x = self.half_extent;
                moved = true;
            } else if *x < -self.half_extent {
                *x = -self.half_extent;
                moved = true;
            }
        }
        moved
    }
}

/// Multilinear interpolation stencil of a point inside a grid cell.
#[derive(Clone, Copy, Debug)]
pub struct Location {
    pub base: [usize; 2],
    pub frac: [f64; 2],
    pub clamped: bool,
    dimension: usize,
    n: usize,
}

impl Location {
    /// Corner nodes and their interpolation weights (2 in 1D, 4 in 2D).
    pub fn corners(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let count = 1usize << self.dimension;
        (0..count).map(move |c| {
            let mut flat = 0usize;
            let mut weight = 1.0;
            for axis in 0..self.dimension {
                let bit = (c >> (self.dimension - 1 - axis)) & 1;
                flat = flat * self.n + self.base[axis] + bit;
                weight *= if bit == 1 {
                    self.frac[axis]
                } else {
                    1.0 - self.frac[axis]
                };
            }
            (flat, weight)
        })
    }
}

/// A real field sampled on every node of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Invalid(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let d = grid.dimension;
        let values = (0..grid.len())
            .map(|i| f(&grid.node_position(i)[..d]))
            .collect();
        Self { grid, values }
    }

    /// Normalized `exp(-|r|²/2)`, the ground state of the unit trap.
    pub fn trap_ground_state(grid: Grid) -> Self {
        let field = Self::from_fn(grid, |r| (-0.5 * r.iter().map(|x| x * x).sum::<f64>()).exp());
        field.normalize().expect("gaussian has nonzero norm")
    }

    /// `h^d Σ φ²`.
    pub fn norm_squared(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn inner(&self, other: &ScalarField) -> f64 {
        self.grid.cell_volume()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }

    pub fn normalize(mut self) -> Result<Self> {
        self.normalize_in_place()?;
        Ok(self)
    }

    pub fn normalize_in_place(&mut self) -> Result<()> {
        let norm2 = self.norm_squared();
        if !(norm2 > 0.0 && norm2.is_finite()) {
            return Err(Error::CollapsedWave(format!(
                "field norm² = {norm2:e}; the step is too large or the potential blew up"
            )));
        }
        let scale = 1.0 / norm2.sqrt();
        self.values.iter_mut().for_each(|v| *v *= scale);
        Ok(())
    }

    pub fn is_normalized(&self, tolerance: f64) -> bool {
        (self.norm_squared() - 1.0).abs() <= tolerance
    }

    /// Multilinear interpolation of the field at an off-grid position.
    pub fn interpolate(&self, position: &[f64]) -> f64 {
        self.grid
            .locate(position)
            .corners()
            .map(|(i, w)| w * self.values[i])
            .sum()
    }
}

/// Second-order central-difference Laplacian of `values` viewed as an
/// `axes`-dimensional cube with `n` nodes per axis, zero outside.
/// Results are written into `out`.
pub fn laplacian_cube(values: &[f64], n: usize, axes: usize, h: f64, out: &mut [f64]) {
    debug_assert_eq!(values.len(), n.pow(axes as u32));
    debug_assert_eq!(out.len(), values.len());
    let inv_h2 = 1.0 / (h * h);
    let diag = -2.0 * axes as f64 * inv_h2;
    for (o, v) in out.iter_mut().zip(values) {
        *o = diag * v;
    }
    let total = values.len();
    for axis in 0..axes {
        let stride = n.pow((axes - 1 - axis) as u32);
        let block = stride * n;
        for start in (0..total).step_by(block) {
            for i in 0..n {
                let row = start + i * stride;
                if i > 0 {
                    let prev = row - stride;
                    for j in 0..stride {
                        out[row + j] += inv_h2 * values[prev + j];
                    }
                }
                if i + 1 < n {
                    let next = row + stride;
                    for j in 0..stride {
                        out[row + j] += inv_h2 * values[next + j];
                    }
                }
            }
        }
    }
}

pub fn laplacian_apply(field: &ScalarField) -> ScalarField {
    let grid = field.grid;
    let mut out = vec![0.0; grid.len()];
    laplacian_cube(
        &field.values,
        grid.points_per_axis,
        grid.dimension,
        grid.spacing(),
        &mut out,
    );
    ScalarField { grid, values: out }
}

/// Rayleigh quotient `⟨φ|−½∇² + V|φ⟩ / ⟨φ|φ⟩`.
pub fn rayleigh_energy(field: &ScalarField, potential: &ScalarField) -> f64 {
    let lap = laplacian_apply(field);
    let numerator: f64 = field
        .values
        .iter()
        .zip(&lap.values)
        .zip(&potential.values)
        .map(|((phi, l), v)| phi * (-0.5 * l + v * phi))
        .sum();
    let denominator: f64 = field.values.iter().map(|v| v * v).sum();
    numerator / denominator
}

/// Reusable Crank–Nicolson imaginary-time propagator.
///
/// One step solves `(1 + dτ H/2) φ' = (1 − dτ H/2) φ` with `H = −½∇² + V`
/// and renormalizes. Eigenvectors of the discrete `H` are exact fixed points,
/// and every mode is damped relative to the ground state for any `dτ > 0`.
/// The 1D system is tridiagonal and solved directly; in 2D the symmetric
/// positive-definite system is solved by conjugate gradients.
#[derive(Clone, Debug)]
pub struct Propagator {
    grid: Grid,
    dt: f64,
    rhs: Vec<f64>,
    work_a: Vec<f64>,
    work_b: Vec<f64>,
    work_c: Vec<f64>,
}

impl Propagator {
    const CG_TOLERANCE: f64 = 1e-13;
    const CG_MAX_ITERATIONS: usize = 200;

    pub fn new(grid: Grid, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("imaginary time step must be positive, got {dt}")));
        }
        let len = grid.len();
        Ok(Self {
            grid,
            dt,
            rhs: vec![0.0; len],
            work_a: vec![0.0; len],
            work_b: vec![0.0; len],
            work_c: vec![0.0; len],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advance `field` by one step in `potential` (node values) and renormalize.
    pub fn step(&mut self, field: &mut ScalarField, potential: &[f64]) -> Result<()> {
        debug_assert_eq!(field.grid, self.grid);
        debug_assert_eq!(potential.len(), self.grid.len());
        match self.grid.dimension {
            1 => self.step_tridiagonal(&mut field.values, potential),
            _ => self.step_conjugate_gradient(&mut field.values, potential)?,
        }
        field.normalize_in_place()
    }

    fn step_tridiagonal(&mut self, phi: &mut [f64], potential: &[f64]) {
        let n = phi.len();
        let h = self.grid.spacing();
        let half = 0.5 * self.dt;
        let kinetic_diag = 1.0 / (h * h);
        let off = -0.5 / (h * h);
        // rhs = (1 - dτ/2 H) φ
        for i in 0..n {
            let left = if i > 0 { phi[i - 1] } else { 0.0 };
            let right = if i + 1 < n { phi[i + 1] } else { 0.0 };
            let h_phi = (kinetic_diag + potential[i]) * phi[i] + off * (left + right);
            self.rhs[i] = phi[i] - half * h_phi;
        }
        // Thomas sweep for (1 + dτ/2 H) φ' = rhs with constant off-diagonals.
        let a = half * off;
        let c_prime = &mut self.work_a;
        let d_prime = &mut self.work_b;
        let mut inv = 1.0 / (1.0 + half * (kinetic_diag + potential[0]));
        c_prime[0] = a * inv;
        d_prime[0] = self.rhs[0] * inv;
        for i in 1..n {
            let m = 1.0 + half * (kinetic_diag + potential[i]) - a * c_prime[i - 1];
            inv = 1.0 / m;
            c_prime[i] = a * inv;
            d_prime[i] = (self.rhs[i] - a * d_prime[i - 1]) * inv;
        }
        phi[n - 1] = d_prime[n - 1];
        for i in (0..n - 1).rev() {
            phi[i] = d_prime[i] - c_prime[i] * phi[i + 1];
        }
    }

    /// `out = (1 + s H) x` for the 2D five-point stencil.
    fn apply_shifted(&self, x: &[f64], potential: &[f64], s: f64, out: &mut [f64]) {
        let n = self.grid.points_per_axis;
        let h = self.grid.spacing();
        let inv_h2 = 1.0 / (h * h);
        let diag = 1.0 + s * 2.0 * inv_h2;
        let off = -0.5 * s * inv_h2;
        let zeros = vec![0.0; n];
        for ix in 0..n {
            let row = ix * n..(ix + 1) * n;
            let up = if ix > 0 { &x[row.start - n..row.start] } else { &zeros[..] };
            let down = if ix + 1 < n { &x[row.end..row.end + n] } else { &zeros[..] };
            let xr = &x[row.clone()];
            let vr = &potential[row.clone()];
            let or = &mut out[row];
            // vertical neighbors and the diagonal vectorize; the row ends are patched below
            for iy in 1..n - 1 {
                or[iy] = (diag + s * vr[iy]) * xr[iy] + off * (up[iy] + down[iy] + xr[iy - 1] + xr[iy + 1]);
            }
            or[0] = (diag + s * vr[0]) * xr[0] + off * (up[0] + down[0] + xr[1]);
            or[n - 1] = (diag + s * vr[n - 1]) * xr[n - 1] + off * (up[n - 1] + down[n - 1] + xr[n - 2]);
        }
    }

    fn step_conjugate_gradient(&mut self, phi: &mut [f64], potential: &[f64]) -> Result<()> {
        let half = 0.5 * self.dt;
        let mut rhs = std::mem::take(&mut self.rhs);
        let mut r = std::mem::take(&mut self.work_a);
        let mut p = std::mem::take(&mut self.work_b);
        let mut ap = std::mem::take(&mut self.work_c);

        self.apply_shifted(phi, potential, -half, &mut rhs);
        // warm start φ − dτ Hφ = 2·rhs − φ
        for (x, b) in phi.iter_mut().zip(&rhs) {
            *x = 2.0 * b - *x;
        }
        self.apply_shifted(phi, potential, half, &mut ap);
        let mut rr = 0.0;
        let mut bb = 0.0;
        for i in 0..phi.len() {
            r[i] = rhs[i] - ap[i];
            p[i] = r[i];
            rr += r[i] * r[i];
            bb += rhs[i] * rhs[i];
        }
        let target = Self::CG_TOLERANCE * Self::CG_TOLERANCE * bb;
        let mut iterations = 0;
        while rr > target {
            if iterations == Self::CG_MAX_ITERATIONS {
                self.rhs = rhs;
                self.work_a = r;
                self.work_b = p;
                self.work_c = ap;
                return Err(Error::Numerical(format!(
                    "conjugate gradients did not converge (residual² {rr:e})"
                )));
            }
            self.apply_shifted(&p, potential, half, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            let alpha = rr / pap;
            let mut rr_next = 0.0;
            for (((x, ri), pi), api) in phi.iter_mut().zip(r.iter_mut()).zip(&p).zip(&ap) {
                *x += alpha * pi;
                *ri -= alpha * api;
                rr_next += *ri * *ri;
            }
            let beta = rr_next / rr;
            for (pi, ri) in p.iter_mut().zip(&r) {
                *pi = ri + beta * *pi;
            }
            rr = rr_next;
            iterations += 1;
        }
        self.rhs = rhs;
        self.work_a = r;
        self.work_b = p;
        self.work_c = ap;
        Ok(())
    }
}

/// One imaginary-time step of `field` in `potential`, renormalized.
pub fn imaginary_time_step(
    field: &ScalarField,
    potential: &ScalarField,
    dt: f64,
) -> Result<ScalarField> {
    if field.grid != potential.grid {
        return Err(Error::Invalid("field and potential live on different grids".into()));
    }
    let mut propagator = Propagator::new(field.grid, dt)?;
    let mut next = field.clone();
    propagator.step(&mut next, &potential.values)?;
    Ok(next)
}

/// Result of probing a guide wave at an off-grid position.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Probe {
    pub value: [f64; 2],
    /// The position lay outside the domain and was clamped onto it.
    pub clamped: bool,
    /// `|φ|` at the position was below [`NODE_THRESHOLD`]; `value` is zero.
    pub near_node: bool,
}

#[inline]
fn neighbor(values: &[f64], flat: usize, stride: usize, n: usize, coord: usize, forward: bool) -> f64 {
    if forward {
        if coord + 1 < n {
            values[flat + stride]
        } else {
            0.0
        }
    } else if coord > 0 {
        values[flat - stride]
    } else {
        0.0
    }
}

/// Central-difference `∂φ/∂x_axis` at a node, zero outside the domain.
#[inline]
fn node_gradient(field: &ScalarField, flat: usize, axis: usize) -> f64 {
    let grid = &field.grid;
    let n = grid.points_per_axis;
    let stride = n.pow((grid.dimension - 1 - axis) as u32);
    let coord = (flat / stride) % n;
    let fwd = neighbor(&field.values, flat, stride, n, coord, true);
    let bwd = neighbor(&field.values, flat, stride, n, coord, false);
    (fwd - bwd) / (2.0 * grid.spacing())
}

/// Stencil Laplacian at a single node.
#[inline]
pub(crate) fn node_laplacian(field: &ScalarField, flat: usize) -> f64 {
    let grid = &field.grid;
    let n = grid.points_per_axis;
    let h = grid.spacing();
    let mut acc = 0.0;
    for axis in 0..grid.dimension {
        let stride = n.pow((grid.dimension - 1 - axis) as u32);
        let coord = (flat / stride) % n;
        acc += neighbor(&field.values, flat, stride, n, coord, true)
            + neighbor(&field.values, flat, stride, n, coord, false)
            - 2.0 * field.values[flat];
    }
    acc / (h * h)
}

/// `∇φ/φ` at an off-grid position.
///
/// The ratio is formed on the corner nodes of the enclosing cell and then
/// interpolated multilinearly, which keeps the drift of a Gaussian accurate to
/// `O(h²)` anywhere in the cell.
pub fn probe_log_gradient(field: &ScalarField, position: &[f64]) -> Probe {
    let loc = field.grid.locate(position);
    let mut probe = Probe {
        clamped: loc.clamped,
        ..Probe::default()
    };
    let phi: f64 = loc.corners().map(|(i, w)| w * field.values[i]).sum();
    if phi.abs() < NODE_THRESHOLD {
        probe.near_node = true;
        return probe;
    }
    for (flat, w) in loc.corners() {
        let v = field.values[flat];
        if v.abs() < NODE_THRESHOLD || w == 0.0 {
            continue;
        }
        for axis in 0..field.grid.dimension {
            probe.value[axis] += w * node_gradient(field, flat, axis) / v;
        }
    }
    probe
}

/// Catmull–Rom weights for offset `t ∈ [0, 1]` from the second of four nodes.
#[inline]
pub(crate) fn catmull_rom(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

/// `−½ ∇²φ/φ` at an off-grid position.
///
/// The ratio is formed on the nodes and interpolated with Catmull–Rom
/// weights, which reproduce quadratics exactly: the local kinetic energy of a
/// harmonic eigenstate is recovered without interpolation bias. Cells next to
/// the boundary, or whose stencil touches a node of `φ`, fall back to the
/// multilinear form of [`probe_log_gradient`].
pub fn probe_local_kinetic(field: &ScalarField, position: &[f64]) -> Probe {
    let grid = &field.grid;
    let loc = grid.locate(position);
    let mut probe = Probe {
        clamped: loc.clamped,
        ..Probe::default()
    };
    let phi: f64 = loc.corners().map(|(i, w)| w * field.values[i]).sum();
    if phi.abs() < NODE_THRESHOLD {
        probe.near_node = true;
        return probe;
    }
    let n = grid.points_per_axis;
    let d = grid.dimension;
    let interior = (0..d).all(|a| loc.base[a] >= 1 && loc.base[a] + 2 < n);
    if interior {
        let w: Vec<[f64; 4]> = (0..d).map(|a| catmull_rom(loc.frac[a])).collect();
        let mut acc = 0.0;
        let mut ok = true;
        'stencil: for i in 0..4 {
            let row = loc.base[0] + i - 1;
            let inner = if d == 1 { 1 } else { 4 };
            for j in 0..inner {
                let (flat, weight) = if d == 1 {
                    (row, w[0][i])
                } else {
                    (row * n + loc.base[1] + j - 1, w[0][i] * w[1][j])
                };
                let v = field.values[flat];
                if v.abs() < NODE_THRESHOLD {
                    ok = false;
                    break 'stencil;
                }
                acc += weight * node_laplacian(field, flat) / v;
            }
        }
        if ok {
            probe.value[0] = -0.5 * acc;
            return probe;
        }
    }
    for (flat, w) in loc.corners() {
        let v = field.values[flat];
        if v.abs() < NODE_THRESHOLD || w == 0.0 {
            continue;
        }
        probe.value[0] += -0.5 * w * node_laplacian(field, flat) / v;
    }
    probe
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: Grid) -> ScalarField {
        ScalarField::from_fn(grid, |r| (-0.5 * r.iter().map(|x| x * x).sum::<f64>()).exp())
    }

    fn trap(grid: Grid) -> ScalarField {
        ScalarField::from_fn(grid, crate::model::core_potential)
    }

    #[test]
    fn grid_geometry() {
        let g = Grid::new(1, 8.0, 257).unwrap();
        assert!((g.spacing() - 1.0 / 16.0).abs() < 1e-15);
        assert_eq!(g.coordinate(0), -8.0);
        assert_eq!(g.coordinate(128), 0.0);
        assert_eq!(g.coordinate(256), 8.0);
        let g2 = Grid::new(2, 1.0, 21).unwrap();
        assert_eq!(g2.len(), 441);
        assert_eq!(g2.node_position(21 * 3 + 5), [g2.coordinate(3), g2.coordinate(5)]);
        assert!(Grid::new(1, 8.0, 8).is_err());
        assert!(Grid::new(3, 8.0, 32).is_err());
        assert!(Grid::new(1, 0.0, 32).is_err());
    }

    #[test]
    fn laplacian_of_constant_and_linear_vanishes_inside() {
        let grid = Grid::new(1, 4.0, 33).unwrap();
        let constant = ScalarField::from_fn(grid, |_| 3.0);
        let lap = laplacian_apply(&constant);
        for i in 1..32 {
            assert!(lap.values[i].abs() < 1e-12);
        }
        let linear = ScalarField::from_fn(grid, |r| r[0]);
        let lap = laplacian_apply(&linear);
        for i in 1..32 {
            assert!(lap.values[i].abs() < 1e-10);
        }
        let grid2 = Grid::new(2, 4.0, 17).unwrap();
        let constant2 = ScalarField::from_fn(grid2, |_| 1.5);
        let lap2 = laplacian_apply(&constant2);
        for ix in 1..16 {
            for iy in 1..16 {
                assert!(lap2.values[ix * 17 + iy].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn laplacian_of_gaussian_at_origin() {
        // ∇² e^{-x²/2} = (x² − 1) e^{-x²/2}, which is −1 at the origin.
        let grid = Grid::new(1, 10.0, 512).unwrap();
        let field = gaussian(grid);
        let lap = laplacian_apply(&field);
        let at_origin = lap.interpolate(&[0.0]);
        let closed_form = ScalarField::from_fn(grid, |r| (r[0] * r[0] - 1.0) * (-0.5 * r[0] * r[0]).exp())
            .interpolate(&[0.0]);
        assert!((at_origin - closed_form).abs() < 1e-3);
        assert!((at_origin + 1.0).abs() < 2e-3);
    }

    #[test]
    fn normalize_cases() {
        let grid = Grid::new(1, 8.0, 128).unwrap();
        let g = gaussian(grid).normalize().unwrap();
        let again = g.clone().normalize().unwrap();
        for (a, b) in g.values.iter().zip(&again.values) {
            assert!((a - b).abs() < 1e-12);
        }
        let mut scaled = gaussian(grid);
        scaled.values.iter_mut().for_each(|v| *v *= 7.0);
        let scaled = scaled.normalize().unwrap();
        for (a, b) in g.values.iter().zip(&scaled.values) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(g.is_normalized(1e-10));
        let err = ScalarField::zeros(grid).normalize().unwrap_err();
        assert!(matches!(err, Error::CollapsedWave(_)));
    }

    fn relax(grid: Grid, steps: usize, dt: f64) -> (ScalarField, f64) {
        let v = trap(grid);
        // lopsided positive start
        let mut phi = ScalarField::from_fn(grid, |r| {
            let s: f64 = r.iter().map(|x| (x - 0.7) * (x - 0.7)).sum();
            (-0.3 * s).exp()
        })
        .normalize()
        .unwrap();
        let mut prop = Propagator::new(grid, dt).unwrap();
        for _ in 0..steps {
            prop.step(&mut phi, &v.values).unwrap();
        }
        let e = rayleigh_energy(&phi, &v);
        (phi, e)
    }

    #[test]
    fn harmonic_relaxation_1d() {
        let (_, e) = relax(Grid::new(1, 8.0, 256).unwrap(), 2000, 0.01);
        assert!((e - 0.5).abs() < 1e-3, "E = {e}");
    }

    #[test]
    fn harmonic_relaxation_2d() {
        let (_, e) = relax(Grid::new(2, 8.0, 128).unwrap(), 2000, 0.01);
        assert!((e - 1.0).abs() < 2e-3, "E = {e}");
    }

    #[test]
    fn relaxation_is_monotone() {
        let grid = Grid::new(1, 6.0, 96).unwrap();
        let v = trap(grid);
        let mut phi = ScalarField::from_fn(grid, |r| (-(r[0] - 1.5).powi(2)).exp() + 0.2)
            .normalize()
            .unwrap();
        let mut prop = Propagator::new(grid, 0.02).unwrap();
        let mut last = rayleigh_energy(&phi, &v);
        for _ in 0..300 {
            prop.step(&mut phi, &v.values).unwrap();
            let e = rayleigh_energy(&phi, &v);
            assert!(e <= last + 1e-12, "{e} > {last}");
            last = e;
        }
    }

    #[test]
    fn eigenstate_is_a_fixed_point() {
        for grid in [Grid::new(1, 8.0, 256).unwrap(), Grid::new(2, 6.0, 48).unwrap()] {
            let v = trap(grid);
            // converge tightly first, then check one more step leaves it alone
            let (mut phi, _) = relax(grid, 6000, 0.05);
            let mut prop = Propagator::new(grid, 0.05).unwrap();
            for _ in 0..2000 {
                prop.step(&mut phi, &v.values).unwrap();
            }
            let before = phi.clone();
            let mut prop = Propagator::new(grid, 0.005).unwrap();
            prop.step(&mut phi, &v.values).unwrap();
            let diff = before
                .values
                .iter()
                .zip(&phi.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(diff < 1e-8, "d = {}, diff = {diff:e}", grid.dimension);
        }
    }

    #[test]
    fn log_gradient_of_gaussian() {
        let grid = Grid::new(1, 8.0, 256).unwrap();
        let g = gaussian(grid);
        let p = probe_log_gradient(&g, &[1.5]);
        assert!((p.value[0] + 1.5).abs() < 2e-2);
        assert!(!p.clamped && !p.near_node);
        let grid_odd = Grid::new(1, 8.0, 257).unwrap();
        let p0 = probe_log_gradient(&gaussian(grid_odd), &[0.0]);
        assert!(p0.value[0].abs() < 1e-6);
    }

    #[test]
    fn log_gradient_2d() {
        let grid = Grid::new(2, 6.0, 64).unwrap();
        let g = gaussian(grid);
        let p = probe_log_gradient(&g, &[0.5, -0.5]);
        assert!((p.value[0] + 0.5).abs() < 2e-2, "{:?}", p);
        assert!((p.value[1] - 0.5).abs() < 2e-2, "{:?}", p);
    }

    #[test]
    fn log_gradient_on_nodes_matches_difference_field() {
        let grid = Grid::new(1, 5.0, 101).unwrap();
        let f = ScalarField::from_fn(grid, |r| (-(r[0] - 0.3).powi(2)).exp() + 0.1);
        for i in 5..95 {
            let x = grid.coordinate(i);
            let fd = (f.values[i + 1] - f.values[i - 1]) / (2.0 * grid.spacing()) / f.values[i];
            let p = probe_log_gradient(&f, &[x]);
            assert!((p.value[0] - fd).abs() < 1e-9);
        }
    }

    #[test]
    fn probe_flags() {
        let grid = Grid::new(1, 4.0, 64).unwrap();
        let g = gaussian(grid);
        let p = probe_log_gradient(&g, &[9.0]);
        assert!(p.clamped);
        let zero = ScalarField::zeros(grid);
        let p = probe_log_gradient(&zero, &[0.1]);
        assert!(p.near_node);
        assert_eq!(p.value, [0.0, 0.0]);
    }

    #[test]
    fn local_kinetic_of_gaussian() {
        // −½ φ''/φ = (1 − x²)/2 for the unit Gaussian
        let grid = Grid::new(1, 8.0, 256).unwrap();
        let g = gaussian(grid);
        for x in [-2.0, -0.3, 0.0, 1.1] {
            let p = probe_local_kinetic(&g, &[x]);
            assert!((p.value[0] - 0.5 * (1.0 - x * x)).abs() < 5e-3, "x = {x}: {:?}", p);
        }
    }

    #[test]
    fn local_energy_of_discrete_eigenstate_is_flat() {
        // relax to the discrete ground state, then probe between nodes
        for (grid, e_exact) in [
            (Grid::new(1, 6.0, 96).unwrap(), 0.5),
            (Grid::new(2, 6.0, 64).unwrap(), 1.0),
        ] {
            let v = trap(grid);
            let mut phi = ScalarField::trap_ground_state(grid);
            let mut prop = Propagator::new(grid, 0.05).unwrap();
            for _ in 0..400 {
                prop.step(&mut phi, &v.values).unwrap();
            }
            let e_h = rayleigh_energy(&phi, &v);
            assert!((e_h - e_exact).abs() < 5e-3, "{e_h}");
            for x in [-1.73, -0.41, 0.0, 0.05, 0.77, 2.31] {
                let r = [x, 0.37 * x - 0.2];
                let r = &r[..grid.dimension];
                let local = probe_local_kinetic(&phi, r).value[0] + crate::model::core_potential(r);
                assert!((local - e_h).abs() < 1e-5, "{:?}: {local} vs {e_h}", r);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::collection::vec;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn laplacian_is_symmetric(f in vec(-1.0..1.0f64, 256), g in vec(-1.0..1.0f64, 256)) {
                let grid = Grid::new(2, 3.0, 16).unwrap();
                let f = ScalarField::from_values(grid, f).unwrap();
                let g = ScalarField::from_values(grid, g).unwrap();
                let lhs = f.inner(&laplacian_apply(&g));
                let rhs = laplacian_apply(&f).inner(&g);
                prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
            }

            #[test]
            fn laplacian_is_linear(f in vec(-1.0..1.0f64, 32), g in vec(-1.0..1.0f64, 32), c in -3.0..3.0f64) {
                let grid = Grid::new(1, 3.0, 32).unwrap();
                let f = ScalarField::from_values(grid, f).unwrap();
                let g = ScalarField::from_values(grid, g).unwrap();
                let combo = ScalarField::from_values(
                    grid,
                    f.values.iter().zip(&g.values).map(|(a, b)| a + c * b).collect(),
                ).unwrap();
                let lf = laplacian_apply(&f);
                let lg = laplacian_apply(&g);
                let lc = laplacian_apply(&combo);
                for i in 0..32 {
                    prop_assert!((lc.values[i] - lf.values[i] - c * lg.values[i]).abs() < 1e-9);
                }
            }
        }
    }
}
