use std::sync::Arc;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Dimension, Direction, GeometryError, GridLayout, RadialGrid, Shape};
use crate::sampler::{EnsembleParams, InitOptions, RunSchedule};

use super::{derive_seed, fresh_units, run_units, SearchError, ShapeEstimate};

/// Modulation basis over the start shape's radial profile.
///
/// Two dimensions: `cos mθ, sin mθ` for `m = 2..=order` (`m = 1` is a
/// translation to first order). Three dimensions: real quadrupole
/// (`order >= 2`), octupole (`order >= 3`) and the cubic hexadecapole
/// invariant (`order >= 4`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeBasis {
    Fourier { order: usize },
    Harmonic { order: usize },
}

impl ShapeBasis {
    pub fn for_dimension(dim: Dimension, order: usize) -> Self {
        match dim {
            Dimension::Two => ShapeBasis::Fourier { order },
            Dimension::Three => ShapeBasis::Harmonic { order },
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            ShapeBasis::Fourier { order } => 2 * order.saturating_sub(1),
            ShapeBasis::Harmonic { order } => {
                [(2, 5), (3, 7), (4, 1)].iter().filter(|(l, _)| order >= *l).map(|(_, n)| n).sum()
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Basis function `k` at unit direction `u`.
    pub fn eval(&self, k: usize, u: &Vector3<f64>) -> f64 {
        match self {
            ShapeBasis::Fourier { .. } => {
                let m = (2 + k / 2) as f64;
                let theta = u.y.atan2(u.x);
                if k % 2 == 0 {
                    (m * theta).cos()
                } else {
                    (m * theta).sin()
                }
            }
            ShapeBasis::Harmonic { .. } => {
                let (x, y, z) = (u.x, u.y, u.z);
                match k {
                    0 => x * y,
                    1 => y * z,
                    2 => x * z,
                    3 => x * x - y * y,
                    4 => 3.0 * z * z - 1.0,
                    5 => x * (x * x - 3.0 * y * y),
                    6 => y * (3.0 * x * x - y * y),
                    7 => z * (x * x - y * y),
                    8 => x * y * z,
                    9 => x * (5.0 * z * z - 1.0),
                    10 => y * (5.0 * z * z - 1.0),
                    11 => z * (5.0 * z * z - 3.0),
                    _ => x.powi(4) + y.powi(4) + z.powi(4) - 0.6,
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    pub order: usize,
    pub max_order: usize,
    /// Grid used for search iterates; defaults to the dimension's default.
    pub layout: Option<GridLayout>,
    pub iterations: usize,
    /// Initial half-width of a coefficient change.
    pub step: f64,
    /// Replicas per arm of each comparison; both arms share seeds.
    pub replicas: usize,
    /// Stop after this many consecutive iterations without acceptance.
    pub patience: usize,
    /// A proposal is accepted when its mean energy is below the current one
    /// by more than `z_accept` standard errors of the difference.
    pub z_accept: f64,
    /// Step halvings tried when a proposal violates `ρ >= 1`.
    pub max_retries: usize,
    /// Set by the caller; not part of the serialized configuration.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            order: 6,
            max_order: 8,
            layout: None,
            iterations: 20,
            step: 0.05,
            replicas: 4,
            patience: 6,
            z_accept: 1.0,
            max_retries: 8,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchStep {
    pub iteration: usize,
    pub coefficient: usize,
    pub change: f64,
    /// Step halvings needed to make the proposal feasible.
    pub retries: usize,
    pub feasible: bool,
    pub current_energy: f64,
    pub proposal_energy: f64,
    /// Mean paired difference, proposal minus current.
    pub delta: f64,
    pub std_error: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeSearchState {
    pub basis: ShapeBasis,
    pub coefficients: Vec<f64>,
    /// Best shape found: the start shape until a proposal is accepted.
    pub shape: Shape,
    /// Estimate of `shape` from the last iteration in which it was evaluated.
    pub estimate: Option<ShapeEstimate>,
    pub trace: Vec<SearchStep>,
    pub step: f64,
    /// No acceptance in the last `patience` iterations.
    pub converged: bool,
    /// Iteration budget ran out before convergence.
    pub budget_exhausted: bool,
}

/// Profile `base * (1 + Σ c_k φ_k)` projected onto volume 10 with canonical
/// placement. Fails if the profile is not positive or the floor `ρ >= 1` is
/// violated after normalization.
pub fn project(
    basis: &ShapeBasis,
    layout: GridLayout,
    directions: &[Vector3<f64>],
    base: &[f64],
    coefficients: &[f64],
) -> Result<Shape, GeometryError> {
    let values: Vec<f64> = directions
        .iter()
        .zip(base)
        .map(|(u, b)| {
            let m: f64 = coefficients.iter().enumerate().map(|(k, c)| c * basis.eval(k, u)).sum();
            b * (1.0 + m)
        })
        .collect();
    Shape::from_radial_grid(RadialGrid::new(layout, values)?)
}

fn evaluate(
    pair: [Arc<Shape>; 2],
    params: &EnsembleParams,
    schedule: &RunSchedule,
    init: &InitOptions,
    seeds: &[u64],
) -> Result<(ShapeEstimate, ShapeEstimate, f64, f64), SearchError> {
    let labels = ["current".to_string(), "proposal".to_string()];
    let units = fresh_units(&pair, &[seeds.to_vec(), seeds.to_vec()], params, init)?;
    let (mut est, _) = run_units(&labels, units, params, schedule)?;
    let prop = est.pop().expect("two arms");
    let cur = est.pop().expect("two arms");
    let diffs: Vec<f64> = prop
        .replicas
        .iter()
        .zip(&cur.replicas)
        .map(|(p, c)| p.total_energy.mean - c.total_energy.mean)
        .collect();
    let r = diffs.len() as f64;
    let delta = diffs.iter().sum::<f64>() / r;
    // Paired error needs a few replicas to be trusted; otherwise fall back
    // to the unpaired combination, which ignores the positive correlation.
    let std_error = if diffs.len() >= 4 {
        let var = diffs.iter().map(|d| (d - delta).powi(2)).sum::<f64>() / (r - 1.0);
        (var / r).sqrt()
    } else {
        prop.total_energy.std_error.hypot(cur.total_energy.std_error)
    };
    Ok((cur, prop, delta, std_error))
}

/// Stochastic coordinate search over basis coefficients with common random
/// numbers for both arms of each comparison.
pub fn local_shape_search(
    start: &Shape,
    params: &EnsembleParams,
    schedule: &RunSchedule,
    init: &InitOptions,
    config: &SearchConfig,
) -> Result<ShapeSearchState, SearchError> {
    if config.order > config.max_order {
        return Err(SearchError::Usage(format!(
            "basis order {} exceeds the cap {}",
            config.order, config.max_order
        )));
    }
    if start.dimension() != params.dimension {
        return Err(SearchError::Usage("start shape dimension differs from the ensemble".into()));
    }
    if config.replicas == 0 || !(config.step > 0.0) {
        return Err(SearchError::Usage("search needs at least one replica and a positive step".into()));
    }
    let dim = params.dimension;
    let basis = ShapeBasis::for_dimension(dim, config.order);
    let mut state = ShapeSearchState {
        basis,
        coefficients: vec![0.0; basis.len()],
        shape: start.clone(),
        estimate: None,
        trace: Vec::new(),
        step: config.step,
        converged: false,
        budget_exhausted: config.iterations == 0,
    };
    if config.iterations == 0 || basis.is_empty() {
        return Ok(state);
    }
    let layout = config.layout.unwrap_or_else(|| GridLayout::default_for(dim));
    let probe = RadialGrid::from_fn(layout, |_| 1.0)?;
    let directions = probe.directions().to_vec();
    let base: Vec<f64> = directions
        .iter()
        .map(|u| Direction::new([u.x, u.y, u.z], dim).map(|d| start.radius(&d)))
        .collect::<Result<_, _>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut current = Arc::new(start.clone());
    let mut idle = 0;
    for iteration in 0..config.iterations {
        let coefficient = rng.gen_range(0..basis.len());
        let unit: f64 = rng.gen_range(-1.0..=1.0);
        let mut retries = 0;
        let mut proposal = None;
        let mut change = 0.0;
        while retries <= config.max_retries {
            change = unit * state.step;
            let mut c = state.coefficients.clone();
            c[coefficient] += change;
            match project(&basis, layout, &directions, &base, &c) {
                Ok(shape) => {
                    proposal = Some((shape, c));
                    break;
                }
                Err(_) => {
                    state.step *= 0.5;
                    retries += 1;
                }
            }
        }
        let Some((shape, coefficients)) = proposal else {
            state.trace.push(SearchStep {
                iteration,
                coefficient,
                change,
                retries,
                feasible: false,
                current_energy: f64::NAN,
                proposal_energy: f64::NAN,
                delta: f64::NAN,
                std_error: f64::NAN,
                accepted: false,
            });
            idle += 1;
            if idle >= config.patience {
                state.converged = true;
                break;
            }
            continue;
        };
        let seeds: Vec<u64> =
            (0..config.replicas as u64).map(|r| derive_seed(config.seed, &[iteration as u64, r])).collect();
        let shape = Arc::new(shape);
        let (cur, prop, delta, std_error) = evaluate([current.clone(), shape.clone()], params, schedule, init, &seeds)?;
        let accepted = delta < 0.0 && delta < -config.z_accept * std_error;
        state.trace.push(SearchStep {
            iteration,
            coefficient,
            change,
            retries,
            feasible: true,
            current_energy: cur.total_energy.mean,
            proposal_energy: prop.total_energy.mean,
            delta,
            std_error,
            accepted,
        });
        if accepted {
            current = shape;
            state.coefficients = coefficients;
            state.shape = (*current).clone();
            state.estimate = Some(prop);
            idle = 0;
        } else {
            state.estimate = Some(cur);
            idle += 1;
        }
        if idle >= config.patience {
            state.converged = true;
            break;
        }
    }
    state.budget_exhausted = !state.converged;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_shape, ShapeFamily, TARGET_VOLUME};

    #[test]
    fn basis_sizes() {
        assert_eq!(ShapeBasis::Fourier { order: 8 }.len(), 14);
        assert_eq!(ShapeBasis::Fourier { order: 1 }.len(), 0);
        assert_eq!(ShapeBasis::Harmonic { order: 2 }.len(), 5);
        assert_eq!(ShapeBasis::Harmonic { order: 4 }.len(), 13);
    }

    #[test]
    fn projection_meets_constraints() {
        let disk = make_shape(&ShapeFamily::Ball, Dimension::Two).unwrap();
        let layout = GridLayout::Circle { nodes: 128 };
        let dirs = RadialGrid::from_fn(layout, |_| 1.0).unwrap().directions().to_vec();
        let base: Vec<f64> = dirs.iter().map(|u| disk.radius(&Direction::new([u.x, u.y, 0.0], Dimension::Two).unwrap())).collect();
        let basis = ShapeBasis::Fourier { order: 6 };
        let mut c = vec![0.0; basis.len()];
        c[0] = 0.05;
        c[5] = -0.03;
        let s = project(&basis, layout, &dirs, &base, &c).unwrap();
        assert!((s.volume() - TARGET_VOLUME).abs() < 1e-9);
        assert!(s.min_radius() >= 1.0);
        c[0] = 0.9;
        assert!(project(&basis, layout, &dirs, &base, &c).is_err());
    }

    #[test]
    fn zero_budget_returns_start() {
        let hex = make_shape(&ShapeFamily::RegularPolygon { sides: 6 }, Dimension::Two).unwrap();
        let params = EnsembleParams::new(Dimension::Two, 8, 5.0, 2.0);
        let cfg = SearchConfig { iterations: 0, ..SearchConfig::default() };
        let out = local_shape_search(&hex, &params, &RunSchedule::default(), &InitOptions::default(), &cfg).unwrap();
        assert_eq!(out.shape, hex);
        assert!(out.trace.is_empty());
        assert!(out.estimate.is_none());
    }

    #[test]
    fn order_cap_enforced() {
        let disk = make_shape(&ShapeFamily::Ball, Dimension::Two).unwrap();
        let params = EnsembleParams::new(Dimension::Two, 8, 5.0, 2.0);
        let cfg = SearchConfig { order: 9, ..SearchConfig::default() };
        let e = local_shape_search(&disk, &params, &RunSchedule::default(), &InitOptions::default(), &cfg);
        assert!(matches!(e, Err(SearchError::Usage(_))));
    }
}
