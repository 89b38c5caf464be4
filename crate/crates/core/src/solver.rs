//! The imaginary-time relaxation loop, the ensemble energy estimator, the
//! variational scan over the nonlocality ratio `α = σ/s`, and the two
//! limiting regimes.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{
    diffuse_step, drift_velocity, noise_amplitude, Coupling, GuideSet, NoiseSchedule, PotentialSource,
    WalkerCloud,
};
use crate::grid::{probe_local_kinetic, Grid, Propagator, ScalarField};
use crate::model::{core_potential, pair_potential, PairTable, PhysicalParams};
use crate::observables::{deposit_walkers, streaming_linear_entropy};
use crate::{Error, Result};

/// Largest tolerated fraction of walker moves that left the domain.
pub const MAX_CLAMPED_FRACTION: f64 = 1e-3;
/// Largest tolerated fraction of walkers excluded from one energy average.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.1;
/// Number of batches for the batch-means error of the windowed energy.
const ERROR_BATCHES: usize = 10;

/// How the effective potential is formed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Regime {
    /// Kernel width `σ_j = α·s_j`, recomputed every step.
    Alpha { alpha: f64 },
    /// `σ → 0`: each guide wave sees only the paired walkers.
    Local,
    /// `σ → ∞`: one shared guide wave per particle in the mean field.
    Hartree,
}

impl Regime {
    pub fn coupling(&self) -> Coupling {
        match self {
            Regime::Alpha { .. } => Coupling::Kernel,
            Regime::Local => Coupling::Local,
            Regime::Hartree => Coupling::Hartree,
        }
    }

    /// `α`, with `0` and `∞` standing in for the limits.
    pub fn alpha(&self) -> f64 {
        match self {
            Regime::Alpha { alpha } => *alpha,
            Regime::Local => 0.0,
            Regime::Hartree => f64::INFINITY,
        }
    }
}

/// How the walker drift is weighted against the annealed noise amplitude `A`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftScaling {
    /// Drift multiplied by `A²`: walkers sample `|φ|²` at every noise level
    /// and annealing only slows them down.
    #[default]
    NoiseSquared,
    /// Drift used as is: the stationary walker density is `|φ|^(2/A²)`.
    Unit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: PhysicalParams,
    pub grid: Grid,
    pub walkers: usize,
    pub dt: f64,
    pub steps: usize,
    pub regime: Regime,
    #[serde(default)]
    pub schedule: NoiseSchedule,
    #[serde(default = "default_true")]
    pub drift_enabled: bool,
    #[serde(default)]
    pub drift_scaling: DriftScaling,
    #[serde(default)]
    pub seed: u64,
    /// Trailing steps averaged for the reported energy; 20% of the run by default.
    #[serde(default)]
    pub energy_window: Option<usize>,
}

fn default_true() -> bool {
    true
}

impl RunConfig {
    /// Desk-scale defaults: `M = 1000` in 1D and `500` in 2D, 4000 steps of
    /// `dτ = 0.005`, `α = 1`.
    pub fn desk_scale(params: PhysicalParams) -> Result<Self> {
        let grid = Grid::default_for(params.dimension)?;
        Ok(Self {
            params,
            grid,
            walkers: if params.dimension == 1 { 1000 } else { 500 },
            dt: 0.005,
            steps: 4000,
            regime: Regime::Alpha { alpha: 1.0 },
            schedule: NoiseSchedule::default(),
            drift_enabled: true,
            drift_scaling: DriftScaling::default(),
            seed: 0,
            energy_window: None,
        })
    }

    pub fn with_regime(&self, regime: Regime) -> Self {
        Self {
            regime,
            ..self.clone()
        }
    }

    pub fn window(&self) -> usize {
        self.energy_window.unwrap_or((self.steps / 5).max(2))
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.grid.validate()?;
        self.schedule.validate()?;
        if self.grid.dimension != self.params.dimension {
            return Err(Error::Config(format!(
                "grid is {}D but the system is {}D",
                self.grid.dimension, self.params.dimension
            )));
        }
        if self.walkers < 2 {
            return Err(Error::Config(format!("walkers must be at least 2, got {}", self.walkers)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if (self.steps as f64) * self.dt < 10.0 * self.schedule.reference_time {
            return Err(Error::Config(format!(
                "steps·dt = {} is shorter than 10 noise reference times ({})",
                self.steps as f64 * self.dt,
                10.0 * self.schedule.reference_time
            )));
        }
        if let Regime::Alpha { alpha } = self.regime {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::Config(format!("alpha must be positive and finite, got {alpha}")));
            }
        }
        let w = self.window();
        if w < 2 || w > self.steps {
            return Err(Error::Config(format!(
                "energy_window must lie in [2, steps], got {w}"
            )));
        }
        Ok(())
    }
}

/// One row of the energy trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub tau: f64,
    pub energy: f64,
    pub stderr: f64,
    /// Spread and kernel width of particle 0.
    pub s: f64,
    pub sigma: f64,
    /// Walker moves clamped onto the domain boundary in this step.
    pub clamped: usize,
    /// Walkers left out of this step's energy average.
    pub excluded: usize,
}

/// Ensemble average of the local energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub excluded: usize,
    /// More than [`MAX_EXCLUDED_FRACTION`] of the walkers sat on nodes.
    pub unreliable: bool,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub config: RunConfig,
    pub energy: f64,
    pub error: f64,
    pub trace: Vec<TraceRow>,
    pub clouds: Vec<WalkerCloud>,
    pub guides: Vec<GuideSet>,
    pub s: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Linear entropy of particle 0.
    pub linear_entropy: f64,
    pub entropy_per_particle: Vec<f64>,
    /// Time-averaged `(1/M) Σ_k |φ_i^k|²` over the energy window, per particle.
    pub guide_density: Vec<ScalarField>,
    /// Walker histogram pooled over the energy window, per particle.
    pub walker_density: Vec<ScalarField>,
    pub clamp_count: usize,
    pub moves: usize,
    pub excluded_count: usize,
    pub unreliable_steps: usize,
    pub wall_time: f64,
}

impl RunResult {
    pub fn clamped_fraction(&self) -> f64 {
        self.clamp_count as f64 / self.moves.max(1) as f64
    }
}

/// `Σ_i [−½∇²φ_i^k/φ_i^k + V_trap](r_i^k) + Σ_{i>j} V_ee(r_i^k, r_j^k)`, or
/// `None` when a walker sits on a node of its guide wave.
pub fn local_energy(
    k: usize,
    clouds: &[WalkerCloud],
    guides: &[GuideSet],
    params: &PhysicalParams,
) -> Option<f64> {
    let mut e = 0.0;
    for (cloud, set) in clouds.iter().zip(guides) {
        let r = cloud.position(k);
        let probe = probe_local_kinetic(set.wave(k), r);
        if probe.near_node {
            return None;
        }
        e += probe.value[0] + core_potential(r);
    }
    for i in 0..clouds.len() {
        for j in 0..i {
            e += pair_potential(clouds[i].position(k), clouds[j].position(k), params);
        }
    }
    Some(e)
}

/// Mean local energy over walkers and its standard error `sd/√M`.
pub fn total_energy(clouds: &[WalkerCloud], guides: &[GuideSet], params: &PhysicalParams) -> EnergyEstimate {
    let m = clouds.first().map_or(0, WalkerCloud::len);
    let values: Vec<Option<f64>> = (0..m)
        .into_par_iter()
        .map(|k| local_energy(k, clouds, guides, params))
        .collect();
    let kept: Vec<f64> = values.iter().flatten().copied().collect();
    let excluded = m - kept.len();
    let (mean, stderr) = mean_and_error(&kept);
    EnergyEstimate {
        mean,
        stderr,
        excluded,
        unreliable: excluded as f64 > MAX_EXCLUDED_FRACTION * m as f64,
    }
}

fn mean_and_error(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 || values.iter().all(|v| *v == values[0]) {
        return (values[0], 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Mean of the trailing window and its standard error, from batch means
/// (the trace is autocorrelated), floored by the per-step walker error.
fn windowed_energy(trace: &[TraceRow], window: usize) -> (f64, f64) {
    let tail = &trace[trace.len() - window..];
    let energies: Vec<f64> = tail.iter().map(|r| r.energy).collect();
    let mean = energies.iter().sum::<f64>() / window as f64;
    let batches = ERROR_BATCHES.min(window / 2).max(2);
    let size = window / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| {
            let chunk = &energies[window - (batches - b) * size..window - (batches - b - 1) * size];
            chunk.iter().sum::<f64>() / size as f64
        })
        .collect();
    let (_, batch_error) = mean_and_error(&means);
    let step_error = tail.iter().map(|r| r.stderr).sum::<f64>() / window as f64 / (batches as f64).sqrt();
    (mean, batch_error.max(step_error))
}

impl GuideSet {
    /// Guide wave of walker `k`; a set holding a single wave shares it.
    #[inline]
    pub fn wave(&self, k: usize) -> &ScalarField {
        if self.waves.len() == 1 {
            &self.waves[0]
        } else {
            &self.waves[k]
        }
    }

    pub fn is_shared(&self) -> bool {
        self.waves.len() == 1
    }
}

/// Whether all walkers of a particle can share one guide wave: every wave
/// then feels the same potential and stays identical to the others.
fn shared_waves(config: &RunConfig) -> bool {
    config.params.n_particles == 1 || !config.params.interacting || config.regime == Regime::Hartree
}

/// Walker `k` of particle `i` draws from stream `i·M + k` of the run seed, so
/// trajectories do not depend on the number of worker threads.
fn walker_rngs(config: &RunConfig) -> Vec<ChaCha8Rng> {
    let total = config.params.n_particles * config.walkers;
    (0..total)
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(s as u64);
            rng
        })
        .collect()
}

struct State {
    clouds: Vec<WalkerCloud>,
    guides: Vec<GuideSet>,
    rngs: Vec<ChaCha8Rng>,
}

fn initial_state(config: &RunConfig) -> Result<State> {
    let n = config.params.n_particles;
    let m = config.walkers;
    let d = config.params.dimension;
    let mut rngs = walker_rngs(config);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut clouds = Vec::with_capacity(n);
    for i in 0..n {
        let mut positions = Vec::with_capacity(m * d);
        for rng in &mut rngs[i * m..(i + 1) * m] {
            let mut r = [0.0; 2];
            for x in r.iter_mut().take(d) {
                *x = scale * rng.sample::<f64, _>(StandardNormal);
            }
            config.grid.clamp(&mut r[..d]);
            positions.extend_from_slice(&r[..d]);
        }
        clouds.push(WalkerCloud::new(i, d, positions)?);
    }
    let wave = ScalarField::trap_ground_state(config.grid);
    let per_particle = if shared_waves(config) { 1 } else { m };
    let guides = (0..n)
        .map(|i| GuideSet {
            particle_index: i,
            waves: vec![wave.clone(); per_particle],
        })
        .collect();
    Ok(State { clouds, guides, rngs })
}

/// Largest distance between a grid node and a point of the domain.
fn table_range(grid: &Grid) -> f64 {
    2.0 * grid.half_extent * (grid.dimension as f64).sqrt() + 1.0
}

/// A run that stopped early, with the energy trace up to the failure.
#[derive(Debug)]
pub struct Aborted {
    pub error: Error,
    pub trace: Vec<TraceRow>,
}

/// Relax walkers and guide waves toward the ground state and measure the energy.
pub fn relax_ground_state(config: &RunConfig) -> Result<RunResult> {
    relax_with_trace(config).map_err(|a| a.error)
}

/// Like [`relax_ground_state`], keeping the partial trace on failure.
pub fn relax_with_trace(config: &RunConfig) -> std::result::Result<RunResult, Aborted> {
    let mut trace = Vec::with_capacity(config.steps);
    relax(config, &mut trace).map_err(|error| Aborted { error, trace })
}

fn relax(config: &RunConfig, trace: &mut Vec<TraceRow>) -> Result<RunResult> {
    config.validate()?;
    let started = Instant::now();
    let params = config.params;
    let grid = config.grid;
    let n = params.n_particles;
    let m = config.walkers;
    let d = params.dimension;
    let coupling = config.regime.coupling();
    let alpha = config.regime.alpha();
    let window = config.window();
    let table = PairTable::new(&params, table_range(&grid));
    let trap: Vec<f64> = (0..grid.len())
        .map(|f| core_potential(&grid.node_position(f)[..d]))
        .collect();

    let mut state = initial_state(config)?;
    let mut clamp_count = 0;
    let mut excluded_count = 0;
    let mut unreliable_steps = 0;
    let mut guide_density = vec![ScalarField::zeros(grid); n];
    let mut walker_density = vec![ScalarField::zeros(grid); n];
    let mut sigma = vec![0.0; n];

    for step in 0..config.steps {
        let tau = step as f64 * config.dt;
        for (cloud, sig) in state.clouds.iter_mut().zip(sigma.iter_mut()) {
            cloud.refresh(if alpha.is_finite() { alpha } else { 1.0 })?;
            *sig = match config.regime {
                Regime::Alpha { .. } => cloud.nonlocal_length,
                Regime::Local => 0.0,
                Regime::Hartree => f64::INFINITY,
            };
        }

        let sources = if n > 1 {
            state
                .clouds
                .iter()
                .map(|c| PotentialSource::build(c, coupling, &params, &grid, &table))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };

        propagate_waves(&mut state.guides, &sources, &trap, &grid, &table, config.dt)?;

        let amplitude = noise_amplitude(&config.schedule, tau);
        let clamped = move_walkers(&mut state, config, amplitude);
        clamp_count += clamped;

        let estimate = total_energy(&state.clouds, &state.guides, &params);
        if !estimate.mean.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite energy at step {step} (τ = {tau}); {} walkers excluded",
                estimate.excluded
            )));
        }
        excluded_count += estimate.excluded;
        unreliable_steps += estimate.unreliable as usize;
        trace.push(TraceRow {
            step,
            tau: tau + config.dt,
            energy: estimate.mean,
            stderr: estimate.stderr,
            s: state.clouds[0].sample_stddev,
            sigma: sigma[0],
            clamped,
            excluded: estimate.excluded,
        });

        if step + window >= config.steps {
            for i in 0..n {
                deposit_walkers(&[&state.clouds[i]], &mut walker_density[i]);
                let set = &state.guides[i];
                let weight = if set.is_shared() { m as f64 } else { 1.0 };
                for wave in &set.waves {
                    for (acc, v) in guide_density[i].values.iter_mut().zip(&wave.values) {
                        *acc += weight * v * v;
                    }
                }
            }
        }
    }

    let moves = config.steps * n * m;
    if clamp_count as f64 > MAX_CLAMPED_FRACTION * moves as f64 {
        return Err(Error::Numerical(format!(
            "{clamp_count} of {moves} walker moves left the domain (limit {:.1}%); enlarge the grid",
            100.0 * MAX_CLAMPED_FRACTION
        )));
    }

    let samples = (window * m) as f64;
    for field in walker_density.iter_mut() {
        let scale = 1.0 / (samples * grid.cell_volume());
        field.values.iter_mut().for_each(|v| *v *= scale);
    }
    for field in guide_density.iter_mut() {
        field.values.iter_mut().for_each(|v| *v /= samples);
    }

    let entropy_per_particle = state
        .guides
        .iter()
        .map(streaming_linear_entropy)
        .collect::<Result<Vec<_>>>()?;
    let (energy, error) = windowed_energy(trace, window);
    let s = state.clouds.iter().map(|c| c.sample_stddev).collect();
    Ok(RunResult {
        config: config.clone(),
        energy,
        error,
        trace: std::mem::take(trace),
        clouds: state.clouds,
        guides: state.guides,
        s,
        sigma,
        linear_entropy: entropy_per_particle[0],
        entropy_per_particle,
        guide_density,
        walker_density,
        clamp_count,
        moves,
        excluded_count,
        unreliable_steps,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

fn propagate_waves(
    guides: &mut [GuideSet],
    sources: &[PotentialSource],
    trap: &[f64],
    grid: &Grid,
    table: &PairTable,
    dt: f64,
) -> Result<()> {
    let jobs: Vec<(usize, usize, &mut ScalarField)> = guides
        .iter_mut()
        .enumerate()
        .flat_map(|(i, set)| set.waves.iter_mut().enumerate().map(move |(k, w)| (i, k, w)))
        .collect();
    jobs.into_par_iter().try_for_each_init(
        || (Propagator::new(*grid, dt), vec![0.0; grid.len()]),
        |(propagator, potential), (i, k, wave)| {
            let propagator = propagator.as_mut().map_err(|e| Error::Config(e.to_string()))?;
            potential.copy_from_slice(trap);
            for (j, source) in sources.iter().enumerate() {
                if j != i {
                    source.accumulate(k, grid, table, potential);
                }
            }
            propagator.step(wave, potential)
        },
    )
}

/// Drift-diffuse every walker along its own guide wave; returns the number of
/// moves that had to be clamped onto the domain.
fn move_walkers(state: &mut State, config: &RunConfig, amplitude: f64) -> usize {
    let d = config.params.dimension;
    let m = config.walkers;
    let drift_weight = match (config.drift_enabled, config.drift_scaling) {
        (false, _) => 0.0,
        (true, DriftScaling::NoiseSquared) => amplitude * amplitude,
        (true, DriftScaling::Unit) => 1.0,
    };
    let grid = config.grid;
    let dt = config.dt;
    let mut clamped = 0;
    for ((cloud, set), rngs) in state
        .clouds
        .iter_mut()
        .zip(&state.guides)
        .zip(state.rngs.chunks_mut(m))
    {
        clamped += cloud
            .positions
            .par_chunks_mut(d)
            .zip(rngs.par_iter_mut())
            .enumerate()
            .map(|(k, (r, rng))| {
                let mut drift = [0.0; 2];
                if drift_weight > 0.0 {
                    let probe = drift_velocity(set.wave(k), r);
                    if !probe.near_node {
                        for (v, p) in drift.iter_mut().zip(&probe.value).take(d) {
                            *v = drift_weight * p;
                        }
                    }
                }
                let next = diffuse_step(r, &drift[..d], dt, amplitude, rng);
                r.copy_from_slice(&next[..d]);
                grid.clamp(r) as usize
            })
            .sum::<usize>();
    }
    clamped
}

/// Relaxation in the mean-field limit: one guide wave per particle in the
/// uniformly weighted potential of the other clouds.
pub fn hartree_limit_run(config: &RunConfig) -> Result<RunResult> {
    relax_ground_state(&config.with_regime(Regime::Hartree))
}

/// Relaxation in the ultra-correlated limit: each guide wave sees only the
/// walkers paired with its own.
pub fn local_limit_run(config: &RunConfig) -> Result<RunResult> {
    relax_ground_state(&config.with_regime(Regime::Local))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub alpha: f64,
    pub energy: f64,
    pub stderr: f64,
    pub entropy: f64,
    pub s: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaScan {
    pub rows: Vec<ScanRow>,
    pub alpha_opt: f64,
    /// Index of the optimum in `rows`.
    pub optimum: usize,
    /// No pair interaction enters the dynamics, so `α` has no effect.
    pub alpha_irrelevant: bool,
    /// Another local minimum lies lower than the optimum plus the combined errors.
    pub non_convex: bool,
}

impl AlphaScan {
    pub fn best(&self) -> &ScanRow {
        &self.rows[self.optimum]
    }

    pub fn from_rows(mut rows: Vec<ScanRow>, alpha_irrelevant: bool) -> Self {
        rows.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
        let mut optimum = 0;
        for (idx, row) in rows.iter().enumerate() {
            if row.energy < rows[optimum].energy {
                optimum = idx;
            }
        }
        let best = rows[optimum];
        let non_convex = (0..rows.len()).any(|idx| {
            let lower_left = idx == 0 || rows[idx - 1].energy > rows[idx].energy;
            let lower_right = idx + 1 == rows.len() || rows[idx + 1].energy > rows[idx].energy;
            if idx == optimum || !lower_left || !lower_right {
                return false;
            }
            let (lo, hi) = (idx.min(optimum), idx.max(optimum));
            rows[lo + 1..hi].iter().any(|barrier| {
                let noise = (barrier.stderr.powi(2) + rows[idx].stderr.powi(2)).sqrt();
                barrier.energy - rows[idx].energy > 2.0 * noise
            })
        });
        Self {
            alpha_opt: best.alpha,
            optimum,
            alpha_irrelevant,
            non_convex,
            rows,
        }
    }
}

/// Seeding of the runs of an α scan.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanSeeds {
    /// Every α reuses the run seed (common random numbers).
    #[default]
    Common,
    /// Run `i` of the scan uses `seed + i`, for independent error bars.
    Independent,
}

/// Relax at each `α` with the run seed shared across the scan (common random
/// numbers), and report the minimum-energy `α`. Ties go to the smaller `α`.
pub fn alpha_scan(config: &RunConfig, alphas: &[f64]) -> Result<AlphaScan> {
    alpha_scan_seeded(config, alphas, ScanSeeds::Common)
}

pub fn alpha_scan_seeded(config: &RunConfig, alphas: &[f64], seeds: ScanSeeds) -> Result<AlphaScan> {
    if alphas.is_empty() {
        return Err(Error::Config("alpha scan needs at least one alpha".into()));
    }
    if let Some(bad) = alphas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(Error::Config(format!("alphas must be positive and finite, got {bad}")));
    }
    let rows = alphas
        .iter()
        .enumerate()
        .map(|(idx, &alpha)| {
            let mut run = config.with_regime(Regime::Alpha { alpha });
            if seeds == ScanSeeds::Independent {
                run.seed = config.seed.wrapping_add(idx as u64);
            }
            let result = relax_ground_state(&run)?;
            Ok(scan_row(alpha, &result))
        })
        .collect::<Result<Vec<_>>>()?;
    let irrelevant = config.params.n_particles == 1 || !config.params.interacting;
    Ok(AlphaScan::from_rows(rows, irrelevant))
}

pub fn scan_row(alpha: f64, result: &RunResult) -> ScanRow {
    ScanRow {
        alpha,
        energy: result.energy,
        stderr: result.error,
        entropy: result.linear_entropy,
        s: result.s[0],
        sigma: result.sigma[0],
    }
}
