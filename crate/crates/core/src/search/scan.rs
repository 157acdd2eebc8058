use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::Shape;
use crate::sampler::{EnsembleParams, InitOptions, RunSchedule};

use super::{
    check_shapes, derive_seed, fresh_units, run_units, ComparisonEntry, NamedShape, SearchError, SeedPlan,
    ShapeComparison, Unit, Verdict,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Increasing,
    Decreasing,
    Constant,
    NonMonotonic,
}

impl Trend {
    fn of(values: &[f64]) -> Self {
        let steps: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        if steps.iter().all(|&s| s == 0.0) {
            Trend::Constant
        } else if steps.iter().all(|&s| s >= 0.0) {
            Trend::Increasing
        } else if steps.iter().all(|&s| s <= 0.0) {
            Trend::Decreasing
        } else {
            Trend::NonMonotonic
        }
    }
}

/// `delta(P) = <E>(first) - <E>(second)` across the scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairTrend {
    pub first: String,
    pub second: String,
    pub pressures: Vec<f64>,
    pub deltas: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub verdicts: Vec<Verdict>,
    /// Trend of the point estimates of `delta` with pressure.
    pub trend: Trend,
    /// Changes between `LOWER` and `HIGHER` among the decided verdicts.
    pub sign_changes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureScan {
    pub rows: Vec<ShapeComparison>,
    pub trends: Vec<PairTrend>,
}

fn summarize(rows: &[ShapeComparison]) -> Vec<PairTrend> {
    let Some(first) = rows.first() else { return Vec::new() };
    first
        .pairs
        .iter()
        .map(|p| {
            let mut t = PairTrend {
                first: p.first.clone(),
                second: p.second.clone(),
                pressures: Vec::new(),
                deltas: Vec::new(),
                std_errors: Vec::new(),
                verdicts: Vec::new(),
                trend: Trend::Constant,
                sign_changes: 0,
            };
            for row in rows {
                let q = row.pair(&p.first, &p.second).expect("same pairs in every row");
                t.pressures.push(row.params.pressure);
                t.deltas.push(q.delta);
                t.std_errors.push(q.std_error);
                t.verdicts.push(q.verdict);
            }
            t.trend = Trend::of(&t.deltas);
            let decided: Vec<Verdict> =
                t.verdicts.iter().copied().filter(|v| *v != Verdict::Indistinguishable).collect();
            t.sign_changes = decided.windows(2).filter(|w| w[0] != w[1]).count();
            t
        })
        .collect()
}

/// Compares `shapes` at each pressure in ascending order. Each chain starts
/// from its own final state at the previous pressure; the first pressure is
/// seeded exactly as [`super::compare_shapes`].
pub fn pressure_scan(
    shapes: &[NamedShape],
    params: &EnsembleParams,
    pressures: &[f64],
    schedule: &RunSchedule,
    init: &InitOptions,
    seeds: SeedPlan,
    z: f64,
) -> Result<PressureScan, SearchError> {
    check_shapes(shapes, params)?;
    if pressures.is_empty() {
        return Err(SearchError::Usage("pressure list is empty".into()));
    }
    if pressures.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(SearchError::Usage("pressures must be sorted ascending".into()));
    }
    if seeds.replicas == 0 {
        return Err(SearchError::Usage("at least one replica is required".into()));
    }
    let arcs: Vec<Arc<Shape>> = shapes.iter().map(|s| s.shape.clone()).collect();
    let labels: Vec<String> = shapes.iter().map(|s| s.label.clone()).collect();
    let seed_lists: Vec<Vec<u64>> = (0..shapes.len()).map(|e| seeds.seeds_for(e)).collect();

    let mut rows = Vec::with_capacity(pressures.len());
    let mut carried: Option<Vec<Unit>> = None;
    for (k, &pressure) in pressures.iter().enumerate() {
        let p = EnsembleParams { pressure, ..*params };
        let units = match carried.take() {
            None => fresh_units(&arcs, &seed_lists, &p, init)?,
            Some(prev) => prev
                .into_iter()
                .map(|mut u| {
                    let r = seed_lists[u.entry].iter().position(|&s| s == u.seed).unwrap_or(0) as u64;
                    u.state.reseed(derive_seed(seeds.base, &[u.entry as u64, r, k as u64]));
                    u
                })
                .collect(),
        };
        let keys: Vec<(usize, u64)> = units.iter().map(|u| (u.entry, u.seed)).collect();
        let (estimates, states) = run_units(&labels, units, &p, schedule)?;
        carried = Some(
            keys.into_iter().zip(states).map(|((entry, seed), state)| Unit { entry, seed, state }).collect(),
        );
        let entries = shapes
            .iter()
            .zip(&seed_lists)
            .zip(estimates)
            .map(|((s, seeds), estimate)| ComparisonEntry {
                label: s.label.clone(),
                shape: (*s.shape).clone(),
                seeds: seeds.clone(),
                estimate,
            })
            .collect();
        rows.push(ShapeComparison::assemble(p, schedule.clone(), z, entries));
    }
    let trends = summarize(&rows);
    Ok(PressureScan { rows, trends })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trend_classification() {
        assert_eq!(Trend::of(&[1.0]), Trend::Constant);
        assert_eq!(Trend::of(&[1.0, 2.0, 2.0]), Trend::Increasing);
        assert_eq!(Trend::of(&[3.0, 2.0, -1.0]), Trend::Decreasing);
        assert_eq!(Trend::of(&[1.0, 2.0, 1.5]), Trend::NonMonotonic);
    }
}
