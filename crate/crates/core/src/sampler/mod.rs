//! Metropolis sampling of the isothermal–isobaric ensemble at fixed shape.
//!
//! Momenta are integrated out analytically: the chain samples positions and
//! volume with weight `V^N exp(-β U - β P V)` (positions in container
//! coordinates), and the kinetic contribution `d N / (2 β)` is added to the
//! reported total energy.

mod moves;
mod trajectory;

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Dimension, GeometryError, ScaledContainer, Shape};
use crate::interaction::{dist_sq, ConfigurationError, Interaction, ParticleConfiguration, HARD_CORE_SQ};
use crate::stats::EnergyEstimate;

pub use moves::{
    displacement_move, metropolis_accept, propose_displacement, propose_volume, volume_move, MoveOutcome,
    RejectReason,
};
pub use trajectory::{TrajectoryWriter, TRAJECTORY_COLUMNS, TRAJECTORY_SCHEMA_VERSION};

/// Drift between the cached and recomputed potential energy that is treated
/// as a bookkeeping failure.
pub const MAX_ENERGY_DRIFT: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("invalid ensemble parameters: {0}")]
    InvalidParams(String),
    #[error("invalid run schedule: {0}")]
    InvalidSchedule(String),
    #[error(
        "random insertion placed only {placed} of {requested} particles at volume {volume}; \
         increase the initial volume factor"
    )]
    InsertionFailed { placed: usize, requested: usize, volume: f64 },
    #[error("cached potential energy {cached} drifted from recomputed {recomputed}")]
    EnergyDrift { cached: f64, recomputed: f64 },
    #[error("configuration failed the admissibility scan: {0}")]
    Admissibility(#[from] ConfigurationError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub dimension: Dimension,
    pub particles: usize,
    /// Inverse temperature, with `k_B = 1`.
    pub beta: f64,
    pub pressure: f64,
    pub interaction: Interaction,
    /// Required when `pressure == 0`, where the volume integral diverges.
    pub volume_cap: Option<f64>,
}

impl EnsembleParams {
    pub fn new(dimension: Dimension, particles: usize, beta: f64, pressure: f64) -> Self {
        EnsembleParams { dimension, particles, beta, pressure, interaction: Interaction::SoftCore, volume_cap: None }
    }

    pub fn ideal(mut self) -> Self {
        self.interaction = Interaction::Ideal;
        self
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        let bad = |m: String| Err(SamplerError::InvalidParams(m));
        if self.particles == 0 {
            return bad("particle count must be at least 1".into());
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return bad(format!("beta must be positive and finite, got {}", self.beta));
        }
        if !(self.pressure >= 0.0) || !self.pressure.is_finite() {
            return bad(format!("pressure must be non-negative and finite, got {}", self.pressure));
        }
        match self.volume_cap {
            Some(cap) if !(cap > 0.0) || !cap.is_finite() => bad(format!("volume cap must be positive, got {cap}")),
            None if self.pressure == 0.0 => bad("pressure 0 requires a volume cap".into()),
            _ => Ok(()),
        }
    }

    /// `d N / (2 β)`: the exact mean kinetic energy.
    pub fn kinetic_energy(&self) -> f64 {
        self.dimension.as_f64() * self.particles as f64 / (2.0 * self.beta)
    }
}

/// Burn-in, measurement and step-size tuning plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSchedule {
    pub burn_in: u64,
    pub sweeps: u64,
    /// Record one sample every `thin` sweeps.
    pub thin: u64,
    /// A sweep is `N` displacement attempts followed by this many volume
    /// attempts.
    pub volume_moves_per_sweep: u32,
    pub blocks: usize,
    /// Acceptance window targeted by step-size tuning during burn-in.
    pub acceptance_window: [f64; 2],
    pub tune_interval: u64,
    /// Sweeps between full admissibility and energy-drift checks.
    pub check_interval: u64,
    /// Fraction of burn-in spent raising β geometrically from
    /// `anneal_start * β` to β. Measurement always runs at β.
    pub anneal_fraction: f64,
    pub anneal_start: f64,
}

impl Default for RunSchedule {
    fn default() -> Self {
        RunSchedule {
            burn_in: 2_000,
            sweeps: 10_000,
            thin: 10,
            volume_moves_per_sweep: 1,
            blocks: 16,
            acceptance_window: [0.3, 0.5],
            tune_interval: 50,
            check_interval: 10_000,
            anneal_fraction: 0.0,
            anneal_start: 1.0,
        }
    }
}

impl RunSchedule {
    pub fn validate(&self) -> Result<(), SamplerError> {
        let bad = |m: String| Err(SamplerError::InvalidSchedule(m));
        if self.blocks < 8 {
            return bad(format!("at least 8 blocks are required, got {}", self.blocks));
        }
        if self.thin == 0 || self.tune_interval == 0 || self.check_interval == 0 {
            return bad("thin, tune_interval and check_interval must be positive".into());
        }
        if self.sweeps / self.thin < self.blocks as u64 {
            return bad(format!(
                "{} sweeps thinned by {} give fewer samples than {} blocks",
                self.sweeps, self.thin, self.blocks
            ));
        }
        if !(0.0..=1.0).contains(&self.anneal_fraction) || !(self.anneal_start > 0.0 && self.anneal_start <= 1.0) {
            return bad("anneal_fraction must be in [0, 1] and anneal_start in (0, 1]".into());
        }
        let [lo, hi] = self.acceptance_window;
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return bad(format!("acceptance window [{lo}, {hi}] must satisfy 0 < lo < hi < 1"));
        }
        Ok(())
    }
}

/// How the initial configuration is built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitOptions {
    /// Initial volume in units of the close-packed volume of `N` particles.
    pub volume_factor: f64,
    /// Random insertion attempts per particle before giving up.
    pub attempts_per_particle: usize,
    pub displacement: f64,
    pub log_volume_step: f64,
}

impl Default for InitOptions {
    fn default() -> Self {
        InitOptions { volume_factor: 4.0, attempts_per_particle: 100_000, displacement: 0.5, log_volume_step: 0.05 }
    }
}

/// Close-packed volume per unit-diameter particle.
pub fn close_packed_volume_per_particle(dim: Dimension) -> f64 {
    match dim {
        Dimension::Two => 3f64.sqrt() / 2.0,
        Dimension::Three => 1.0 / 2f64.sqrt(),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MoveStats {
    pub attempted: u64,
    pub accepted: u64,
}

impl MoveStats {
    pub fn rate(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.accepted as f64 / self.attempted as f64
        }
    }

    fn record(&mut self, accepted: bool) {
        self.attempted += 1;
        self.accepted += u64::from(accepted);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSizes {
    /// Half-width of the uniform displacement cube.
    pub displacement: f64,
    /// Half-width of the uniform change in `ln V`.
    pub log_volume: f64,
}

/// Mutable state of one Markov chain.
#[derive(Clone, Debug)]
pub struct SimulationState {
    pub(crate) config: ParticleConfiguration,
    pub(crate) spare: ParticleConfiguration,
    pub(crate) energy: f64,
    pub(crate) rng: ChaCha8Rng,
    pub steps: StepSizes,
    pub displacement_stats: MoveStats,
    pub volume_stats: MoveStats,
    pub(crate) sweeps_done: u64,
}

impl SimulationState {
    /// Wraps an admissible configuration.
    pub fn from_configuration(
        config: ParticleConfiguration,
        seed: u64,
        steps: StepSizes,
    ) -> Result<Self, SamplerError> {
        config.admissibility_scan()?;
        let energy = config
            .total_potential_energy()
            .map_err(|o| SamplerError::Admissibility(o.into()))?;
        Ok(SimulationState {
            spare: config.clone(),
            config,
            energy,
            rng: ChaCha8Rng::seed_from_u64(seed),
            steps,
            displacement_stats: MoveStats::default(),
            volume_stats: MoveStats::default(),
            sweeps_done: 0,
        })
    }

    pub fn configuration(&self) -> &ParticleConfiguration {
        &self.config
    }

    /// Cached potential energy.
    pub fn potential_energy(&self) -> f64 {
        self.energy
    }

    pub fn volume(&self) -> f64 {
        self.config.container().volume()
    }

    pub fn sweeps_done(&self) -> u64 {
        self.sweeps_done
    }

    /// Recomputes the potential energy from scratch and returns
    /// `|cached - recomputed|`.
    pub fn energy_drift(&self) -> Result<f64, SamplerError> {
        let fresh = self
            .config
            .total_potential_energy()
            .map_err(|o| SamplerError::Admissibility(o.into()))?;
        Ok((fresh - self.energy).abs())
    }

    /// Re-seeds the chain, keeping its configuration and step sizes.
    pub fn reseed(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    pub fn reset_statistics(&mut self) {
        self.displacement_stats = MoveStats::default();
        self.volume_stats = MoveStats::default();
    }

    /// One sweep: `N` displacement attempts then the configured volume
    /// attempts.
    pub fn sweep(&mut self, params: &EnsembleParams, volume_moves: u32) {
        for _ in 0..self.config.len() {
            displacement_move(self, params);
        }
        for _ in 0..volume_moves {
            volume_move(self, params);
        }
        self.sweeps_done += 1;
    }
}

/// Random sequential insertion at an inflated volume.
pub fn initialize_state(
    shape: Arc<Shape>,
    params: &EnsembleParams,
    init: &InitOptions,
    seed: u64,
) -> Result<SimulationState, SamplerError> {
    params.validate()?;
    if shape.dimension() != params.dimension {
        return Err(SamplerError::InvalidParams(format!(
            "shape is {}-dimensional but the ensemble is {}-dimensional",
            shape.dimension(),
            params.dimension
        )));
    }
    if !(init.volume_factor > 0.0) || !(init.displacement > 0.0) || !(init.log_volume_step > 0.0) {
        return Err(SamplerError::InvalidParams("initial volume factor and step sizes must be positive".into()));
    }
    let n = params.particles;
    let mut volume = init.volume_factor * n as f64 * close_packed_volume_per_particle(params.dimension);
    if let Some(cap) = params.volume_cap {
        volume = volume.min(cap);
    }
    let container = ScaledContainer::new(shape, volume)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions: Vec<[f64; 3]> = Vec::with_capacity(n);
    for placed in 0..n {
        let mut ok = false;
        for _ in 0..init.attempts_per_particle {
            let p = container.sample_uniform_point(&mut rng);
            let clear = params.interaction == Interaction::Ideal
                || positions.iter().all(|q| dist_sq(&p, q) >= HARD_CORE_SQ);
            if clear {
                positions.push(p);
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(SamplerError::InsertionFailed { placed, requested: n, volume });
        }
    }
    let config = ParticleConfiguration::new(container, positions, params.interaction)?;
    let steps = StepSizes { displacement: init.displacement, log_volume: init.log_volume_step };
    let mut state = SimulationState::from_configuration(config, 0, steps)?;
    state.rng = rng;
    Ok(state)
}

/// One recorded measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub sweep: u64,
    pub potential_energy: f64,
    pub volume: f64,
    pub displacement_acceptance: f64,
    pub volume_acceptance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub samples: Vec<Sample>,
    pub potential_energy: EnergyEstimate,
    pub volume: EnergyEstimate,
    pub total_energy: EnergyEstimate,
    pub kinetic_energy: f64,
    pub displacement_acceptance: f64,
    pub volume_acceptance: f64,
    pub steps: StepSizes,
    pub max_energy_drift: f64,
}

fn check(state: &SimulationState, max_drift: &mut f64) -> Result<(), SamplerError> {
    state.config.admissibility_scan()?;
    let drift = state.energy_drift()?;
    *max_drift = max_drift.max(drift);
    if drift > MAX_ENERGY_DRIFT {
        let cached = state.energy;
        return Err(SamplerError::EnergyDrift { cached, recomputed: cached + drift });
    }
    Ok(())
}

fn tune(state: &mut SimulationState, window: [f64; 2], since: (MoveStats, MoveStats)) {
    let disp = MoveStats {
        attempted: state.displacement_stats.attempted - since.0.attempted,
        accepted: state.displacement_stats.accepted - since.0.accepted,
    };
    let vol = MoveStats {
        attempted: state.volume_stats.attempted - since.1.attempted,
        accepted: state.volume_stats.accepted - since.1.accepted,
    };
    // Outside the window, rescale by the ratio to the window centre, at most
    // a factor of two either way.
    let mid = 0.5 * (window[0] + window[1]);
    let adjust = |step: f64, stats: MoveStats, max: f64| {
        let rate = stats.rate();
        if stats.attempted == 0 || (window[0]..=window[1]).contains(&rate) {
            step
        } else {
            (step * (rate / mid).clamp(0.5, 2.0)).min(max)
        }
    };
    let max_disp = 2.0 * state.config.container().bounding_radius();
    state.steps.displacement = adjust(state.steps.displacement, disp, max_disp);
    state.steps.log_volume = adjust(state.steps.log_volume, vol, 2.0);
}

/// Runs burn-in (with step tuning) and measurement, returning block
/// estimates. Deterministic given the state's seed.
pub fn run(
    state: &mut SimulationState,
    params: &EnsembleParams,
    schedule: &RunSchedule,
) -> Result<RunOutput, SamplerError> {
    run_with(state, params, schedule, |_| {})
}

/// [`run`], calling `on_sample` for each recorded sample as it is taken.
pub fn run_with(
    state: &mut SimulationState,
    params: &EnsembleParams,
    schedule: &RunSchedule,
    mut on_sample: impl FnMut(&Sample),
) -> Result<RunOutput, SamplerError> {
    params.validate()?;
    schedule.validate()?;
    if state.config.len() != params.particles || state.config.dimension() != params.dimension {
        return Err(SamplerError::InvalidParams("state does not match the ensemble parameters".into()));
    }
    if state.config.interaction() != params.interaction {
        return Err(SamplerError::InvalidParams("state and parameters disagree on the interaction".into()));
    }
    let mut max_drift: f64 = 0.0;
    let vm = schedule.volume_moves_per_sweep;

    state.reset_statistics();
    let mut since = (state.displacement_stats, state.volume_stats);
    let anneal_sweeps = (schedule.anneal_fraction * schedule.burn_in as f64).round() as u64;
    for s in 1..=schedule.burn_in {
        if s <= anneal_sweeps {
            let t = s as f64 / anneal_sweeps as f64;
            let beta = params.beta * schedule.anneal_start.powf(1.0 - t);
            state.sweep(&EnsembleParams { beta, ..*params }, vm);
        } else {
            state.sweep(params, vm);
        }
        if s % schedule.tune_interval == 0 {
            tune(state, schedule.acceptance_window, since);
            since = (state.displacement_stats, state.volume_stats);
        }
        if s % schedule.check_interval == 0 {
            check(state, &mut max_drift)?;
        }
    }

    state.reset_statistics();
    let capacity = (schedule.sweeps / schedule.thin) as usize;
    let mut samples = Vec::with_capacity(capacity);
    for s in 1..=schedule.sweeps {
        state.sweep(params, vm);
        if s % schedule.thin == 0 {
            let sample = Sample {
                sweep: schedule.burn_in + s,
                potential_energy: state.energy,
                volume: state.volume(),
                displacement_acceptance: state.displacement_stats.rate(),
                volume_acceptance: state.volume_stats.rate(),
            };
            on_sample(&sample);
            samples.push(sample);
        }
        if s % schedule.check_interval == 0 {
            check(state, &mut max_drift)?;
        }
    }
    check(state, &mut max_drift)?;

    let u: Vec<f64> = samples.iter().map(|s| s.potential_energy).collect();
    let v: Vec<f64> = samples.iter().map(|s| s.volume).collect();
    let potential_energy = EnergyEstimate::from_samples("potential_energy", &u, schedule.blocks);
    let volume = EnergyEstimate::from_samples("volume", &v, schedule.blocks);
    let kinetic_energy = params.kinetic_energy();
    let total_energy = potential_energy.shifted("total_energy", kinetic_energy);
    Ok(RunOutput {
        samples,
        potential_energy,
        volume,
        total_energy,
        kinetic_energy,
        displacement_acceptance: state.displacement_stats.rate(),
        volume_acceptance: state.volume_stats.rate(),
        steps: state.steps,
        max_energy_drift: max_drift,
    })
}
