//! Per-shape energy estimation across replicas, statistical comparison of
//! shapes, pressure scans and local search over radial shapes.

mod lattice;
mod local;
mod scan;

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, Shape};
use crate::sampler::{initialize_state, run, EnsembleParams, InitOptions, RunSchedule, SamplerError, SimulationState};
use crate::stats::EnergyEstimate;

pub use lattice::{lattice_energy_oracle, minimize_lattice_energy, LatticeMinimum};
pub use local::{local_shape_search, project, SearchConfig, SearchStep, ShapeBasis, ShapeSearchState};
pub use scan::{pressure_scan, PairTrend, PressureScan, Trend};

/// Replica disagreement, in combined standard errors, treated as a failure
/// to equilibrate.
pub const REPLICA_TOLERANCE_Z: f64 = 5.0;

/// Default confidence multiplier for verdicts.
pub const DEFAULT_VERDICT_Z: f64 = 3.0;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("replicas disagree beyond {REPLICA_TOLERANCE_Z} combined standard errors for {label}:\n{diagnostics}")]
    Equilibration { label: String, diagnostics: String },
    #[error("{0}")]
    Usage(String),
}

/// Derives a seed from a base seed and a path of indices.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter().fold(base, |seed, &k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k.wrapping_add(1));
        rng.next_u64()
    })
}

/// Base seed and replica count; replica `r` of entry `s` uses
/// `derive_seed(base, [s, r])`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPlan {
    pub base: u64,
    pub replicas: usize,
}

impl SeedPlan {
    pub fn seeds_for(&self, entry: usize) -> Vec<u64> {
        (0..self.replicas as u64).map(|r| derive_seed(self.base, &[entry as u64, r])).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicaResult {
    pub seed: u64,
    pub total_energy: EnergyEstimate,
    pub potential_energy: EnergyEstimate,
    pub volume: EnergyEstimate,
    pub displacement_acceptance: f64,
    pub volume_acceptance: f64,
    pub max_energy_drift: f64,
}

/// Pooled estimates for one shape at one state point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeEstimate {
    pub total_energy: EnergyEstimate,
    pub potential_energy: EnergyEstimate,
    pub volume: EnergyEstimate,
    pub replicas: Vec<ReplicaResult>,
}

fn dedup_seeds(seeds: &[u64]) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(seeds.len());
    for &s in seeds {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

fn run_one(
    seed: u64,
    mut state: SimulationState,
    params: &EnsembleParams,
    schedule: &RunSchedule,
) -> Result<(ReplicaResult, SimulationState), SamplerError> {
    let out = run(&mut state, params, schedule)?;
    let result = ReplicaResult {
        seed,
        total_energy: out.total_energy,
        potential_energy: out.potential_energy,
        volume: out.volume,
        displacement_acceptance: out.displacement_acceptance,
        volume_acceptance: out.volume_acceptance,
        max_energy_drift: out.max_energy_drift,
    };
    Ok((result, state))
}

/// Checks pairwise replica agreement and pools.
fn pool(label: &str, replicas: Vec<ReplicaResult>) -> Result<ShapeEstimate, SearchError> {
    let mut failures = String::new();
    for i in 0..replicas.len() {
        for j in i + 1..replicas.len() {
            let (a, b) = (&replicas[i].total_energy, &replicas[j].total_energy);
            let se = a.std_error.hypot(b.std_error);
            let diff = (a.mean - b.mean).abs();
            if diff > REPLICA_TOLERANCE_Z * se || diff.is_nan() {
                let _ = writeln!(
                    failures,
                    "  seeds {} vs {}: {} ± {} vs {} ± {} ({:.2} SE)",
                    replicas[i].seed,
                    replicas[j].seed,
                    a.mean,
                    a.std_error,
                    b.mean,
                    b.std_error,
                    diff / se
                );
            }
        }
    }
    if !failures.is_empty() {
        for r in &replicas {
            let _ = writeln!(
                failures,
                "  seed {}: acceptance displacement {:.3}, volume {:.3}",
                r.seed, r.displacement_acceptance, r.volume_acceptance
            );
        }
        return Err(SearchError::Equilibration { label: label.to_string(), diagnostics: failures });
    }
    let pooled = |f: fn(&ReplicaResult) -> &EnergyEstimate, name: &str| {
        let parts: Vec<EnergyEstimate> = replicas.iter().map(|r| f(r).clone()).collect();
        EnergyEstimate::pooled(name, &parts)
    };
    Ok(ShapeEstimate {
        total_energy: pooled(|r| &r.total_energy, "total_energy"),
        potential_energy: pooled(|r| &r.potential_energy, "potential_energy"),
        volume: pooled(|r| &r.volume, "volume"),
        replicas,
    })
}

/// One chain to run: which entry it belongs to, its seed and start state.
pub(crate) struct Unit {
    pub entry: usize,
    pub seed: u64,
    pub state: SimulationState,
}

/// Runs all units concurrently and pools per entry. Returns the final
/// states in input order.
pub(crate) fn run_units(
    labels: &[String],
    units: Vec<Unit>,
    params: &EnsembleParams,
    schedule: &RunSchedule,
) -> Result<(Vec<ShapeEstimate>, Vec<SimulationState>), SearchError> {
    let results: Vec<Result<(usize, ReplicaResult, SimulationState), SamplerError>> = units
        .into_par_iter()
        .map(|u| run_one(u.seed, u.state, params, schedule).map(|(r, s)| (u.entry, r, s)))
        .collect();
    let mut grouped: Vec<Vec<ReplicaResult>> = vec![Vec::new(); labels.len()];
    let mut states = Vec::with_capacity(results.len());
    for r in results {
        let (entry, result, state) = r?;
        grouped[entry].push(result);
        states.push(state);
    }
    let estimates = labels
        .iter()
        .zip(grouped)
        .map(|(label, replicas)| pool(label, replicas))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((estimates, states))
}

pub(crate) fn fresh_units(
    shapes: &[Arc<Shape>],
    seeds: &[Vec<u64>],
    params: &EnsembleParams,
    init: &InitOptions,
) -> Result<Vec<Unit>, SearchError> {
    let jobs: Vec<(usize, u64)> =
        seeds.iter().enumerate().flat_map(|(e, s)| s.iter().map(move |&seed| (e, seed))).collect();
    jobs.into_par_iter()
        .map(|(entry, seed)| {
            let state = initialize_state(shapes[entry].clone(), params, init, seed)?;
            Ok(Unit { entry, seed, state })
        })
        .collect()
}

/// Pooled `<E>` over independent replicas. Duplicate seeds are run once.
pub fn estimate_mean_energy(
    shape: Arc<Shape>,
    params: &EnsembleParams,
    schedule: &RunSchedule,
    init: &InitOptions,
    seeds: &[u64],
) -> Result<ShapeEstimate, SearchError> {
    if seeds.is_empty() {
        return Err(SearchError::Usage("at least one replica seed is required".into()));
    }
    let seeds = vec![dedup_seeds(seeds)];
    let units = fresh_units(&[shape], &seeds, params, init)?;
    let (mut est, _) = run_units(&["shape".to_string()], units, params, schedule)?;
    Ok(est.remove(0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    /// The first shape has lower mean energy.
    Lower,
    Higher,
    Indistinguishable,
}

impl Verdict {
    pub fn from_difference(delta: f64, std_error: f64, z: f64) -> Self {
        if !(delta.abs() > z * std_error) {
            Verdict::Indistinguishable
        } else if delta < 0.0 {
            Verdict::Lower
        } else {
            Verdict::Higher
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Lower => "LOWER",
            Verdict::Higher => "HIGHER",
            Verdict::Indistinguishable => "INDISTINGUISHABLE",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedShape {
    pub label: String,
    pub shape: Arc<Shape>,
}

impl NamedShape {
    pub fn new(label: impl Into<String>, shape: Shape) -> Self {
        NamedShape { label: label.into(), shape: Arc::new(shape) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub label: String,
    pub shape: Shape,
    pub seeds: Vec<u64>,
    pub estimate: ShapeEstimate,
}

/// `delta = <E>(first) - <E>(second)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub first: String,
    pub second: String,
    pub delta: f64,
    pub std_error: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeComparison {
    pub params: EnsembleParams,
    pub schedule: RunSchedule,
    pub z: f64,
    pub entries: Vec<ComparisonEntry>,
    pub pairs: Vec<PairVerdict>,
    /// Lowest-mean entry and every entry indistinguishable from it.
    pub co_minimal: Vec<String>,
}

impl ShapeComparison {
    pub(crate) fn assemble(
        params: EnsembleParams,
        schedule: RunSchedule,
        z: f64,
        entries: Vec<ComparisonEntry>,
    ) -> Self {
        let pairs = pair_verdicts(&entries, z, |e| &e.estimate.total_energy);
        let best = entries
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.estimate.total_energy.mean.total_cmp(&b.1.estimate.total_energy.mean))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let b = &entries[best].estimate.total_energy;
        let co_minimal = entries
            .iter()
            .filter(|e| {
                let t = &e.estimate.total_energy;
                Verdict::from_difference(t.mean - b.mean, t.std_error.hypot(b.std_error), z)
                    == Verdict::Indistinguishable
            })
            .map(|e| e.label.clone())
            .collect();
        ShapeComparison { params, schedule, z, entries, pairs, co_minimal }
    }

    pub fn pair(&self, first: &str, second: &str) -> Option<&PairVerdict> {
        self.pairs.iter().find(|p| p.first == first && p.second == second)
    }
}

/// Verdicts for every ordered pair `i < j` of entries using the selected
/// estimate.
pub fn pair_verdicts(
    entries: &[ComparisonEntry],
    z: f64,
    pick: impl Fn(&ComparisonEntry) -> &EnergyEstimate,
) -> Vec<PairVerdict> {
    let mut pairs = Vec::new();
    for i in 0..entries.len() {
        for j in i + 1..entries.len() {
            let (a, b) = (pick(&entries[i]), pick(&entries[j]));
            let delta = a.mean - b.mean;
            let std_error = a.std_error.hypot(b.std_error);
            pairs.push(PairVerdict {
                first: entries[i].label.clone(),
                second: entries[j].label.clone(),
                delta,
                std_error,
                verdict: Verdict::from_difference(delta, std_error, z),
            });
        }
    }
    pairs
}

pub(crate) fn check_shapes(shapes: &[NamedShape], params: &EnsembleParams) -> Result<(), SearchError> {
    if shapes.len() < 2 {
        return Err(SearchError::Usage(format!("comparison needs at least 2 shapes, got {}", shapes.len())));
    }
    for (i, s) in shapes.iter().enumerate() {
        if shapes[..i].iter().any(|t| t.label == s.label) {
            return Err(SearchError::Usage(format!("duplicate shape label `{}`", s.label)));
        }
        if s.shape.dimension() != params.dimension {
            return Err(SearchError::Usage(format!(
                "shape `{}` is {}-dimensional, ensemble is {}-dimensional",
                s.label,
                s.shape.dimension(),
                params.dimension
            )));
        }
    }
    Ok(())
}

/// Estimates every shape with independent seeds and ranks them at `z`.
pub fn compare_shapes(
    shapes: &[NamedShape],
    params: &EnsembleParams,
    schedule: &RunSchedule,
    init: &InitOptions,
    seeds: SeedPlan,
    z: f64,
) -> Result<ShapeComparison, SearchError> {
    check_shapes(shapes, params)?;
    if seeds.replicas == 0 {
        return Err(SearchError::Usage("at least one replica is required".into()));
    }
    let arcs: Vec<Arc<Shape>> = shapes.iter().map(|s| s.shape.clone()).collect();
    let labels: Vec<String> = shapes.iter().map(|s| s.label.clone()).collect();
    let seed_lists: Vec<Vec<u64>> = (0..shapes.len()).map(|e| dedup_seeds(&seeds.seeds_for(e))).collect();
    let units = fresh_units(&arcs, &seed_lists, params, init)?;
    let (estimates, _) = run_units(&labels, units, params, schedule)?;
    let entries = shapes
        .iter()
        .zip(seed_lists)
        .zip(estimates)
        .map(|((s, seeds), estimate)| ComparisonEntry {
            label: s.label.clone(),
            shape: (*s.shape).clone(),
            seeds,
            estimate,
        })
        .collect();
    Ok(ShapeComparison::assemble(*params, schedule.clone(), z, entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_shape, Dimension, ShapeFamily};

    fn disk() -> Arc<Shape> {
        Arc::new(make_shape(&ShapeFamily::Ball, Dimension::Two).unwrap())
    }

    fn tiny() -> RunSchedule {
        RunSchedule { burn_in: 200, sweeps: 800, thin: 5, ..RunSchedule::default() }
    }

    #[test]
    fn verdict_rule() {
        assert_eq!(Verdict::from_difference(0.0, 0.0, 3.0), Verdict::Indistinguishable);
        assert_eq!(Verdict::from_difference(-3.1, 1.0, 3.0), Verdict::Lower);
        assert_eq!(Verdict::from_difference(3.1, 1.0, 3.0), Verdict::Higher);
        assert_eq!(Verdict::from_difference(2.9, 1.0, 3.0), Verdict::Indistinguishable);
        assert_eq!(Verdict::from_difference(f64::NAN, 1.0, 3.0), Verdict::Indistinguishable);
    }

    #[test]
    fn derived_seeds_differ() {
        let plan = SeedPlan { base: 1, replicas: 4 };
        let mut all: Vec<u64> = (0..3).flat_map(|e| plan.seeds_for(e)).collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 12);
        assert_eq!(derive_seed(9, &[1, 2]), derive_seed(9, &[1, 2]));
    }

    #[test]
    fn single_particle_estimate_is_exact() {
        let params = EnsembleParams::new(Dimension::Two, 1, 4.0, 1.0);
        let est = estimate_mean_energy(disk(), &params, &tiny(), &InitOptions::default(), &[1, 2, 3]).unwrap();
        assert_eq!(est.total_energy.mean, 2.0 / 8.0);
        assert_eq!(est.total_energy.std_error, 0.0);
    }

    #[test]
    fn duplicate_seeds_pool_degenerately() {
        let params = EnsembleParams::new(Dimension::Two, 6, 2.0, 1.0);
        let s = tiny();
        let one = estimate_mean_energy(disk(), &params, &s, &InitOptions::default(), &[7]).unwrap();
        let two = estimate_mean_energy(disk(), &params, &s, &InitOptions::default(), &[7, 7]).unwrap();
        assert_eq!(one.total_energy.mean, two.total_energy.mean);
        assert_eq!(one.total_energy.std_error, two.total_energy.std_error);
        assert_eq!(two.replicas.len(), 1);
    }

    #[test]
    fn one_shape_is_a_usage_error() {
        let params = EnsembleParams::new(Dimension::Two, 4, 2.0, 1.0);
        let shapes = [NamedShape { label: "disk".into(), shape: disk() }];
        let e = compare_shapes(&shapes, &params, &tiny(), &InitOptions::default(), SeedPlan { base: 0, replicas: 2 }, 3.0);
        assert!(matches!(e, Err(SearchError::Usage(_))));
    }

    #[test]
    fn inconsistent_replicas_are_reported() {
        let mk = |seed, mean| ReplicaResult {
            seed,
            total_energy: EnergyEstimate { observable: "e".into(), mean, std_error: 0.1, samples: 80, blocks: 16 },
            potential_energy: EnergyEstimate { observable: "u".into(), mean, std_error: 0.1, samples: 80, blocks: 16 },
            volume: EnergyEstimate { observable: "v".into(), mean: 1.0, std_error: 0.1, samples: 80, blocks: 16 },
            displacement_acceptance: 0.4,
            volume_acceptance: 0.4,
            max_energy_drift: 0.0,
        };
        assert!(pool("x", vec![mk(1, 0.0), mk(2, 0.5)]).is_ok());
        let e = pool("x", vec![mk(1, 0.0), mk(2, 1.0)]).unwrap_err();
        assert!(matches!(e, SearchError::Equilibration { .. }));
    }
}
