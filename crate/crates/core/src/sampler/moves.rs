use rand::Rng;

use crate::geometry::Dimension;
use crate::interaction::MoveError;

use super::{EnsembleParams, SimulationState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RejectReason {
    Metropolis,
    Outside,
    HardCore,
    VolumeCap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoveOutcome {
    Accepted,
    Rejected(RejectReason),
}

impl MoveOutcome {
    pub fn accepted(self) -> bool {
        self == MoveOutcome::Accepted
    }
}

/// Accepts with probability `min(1, exp(log_ratio))`. NaN never accepts.
pub fn metropolis_accept(log_ratio: f64, rng: &mut impl Rng) -> bool {
    if log_ratio >= 0.0 {
        return true;
    }
    if log_ratio.is_nan() {
        return false;
    }
    rng.gen::<f64>() < log_ratio.exp()
}

/// Attempts to move `particle` to `to`.
pub fn propose_displacement(
    state: &mut SimulationState,
    params: &EnsembleParams,
    particle: usize,
    to: [f64; 3],
) -> MoveOutcome {
    let outcome = match state.config.delta_energy_move(particle, &to) {
        Err(MoveError::Outside) => MoveOutcome::Rejected(RejectReason::Outside),
        Err(MoveError::Overlap(_)) => MoveOutcome::Rejected(RejectReason::HardCore),
        Ok(delta) => {
            if metropolis_accept(-params.beta * delta, &mut state.rng) {
                state.config.apply_move(particle, to);
                state.energy += delta;
                MoveOutcome::Accepted
            } else {
                MoveOutcome::Rejected(RejectReason::Metropolis)
            }
        }
    };
    state.displacement_stats.record(outcome.accepted());
    outcome
}

/// Uniform trial displacement of a uniformly chosen particle.
pub fn displacement_move(state: &mut SimulationState, params: &EnsembleParams) -> MoveOutcome {
    let n = state.config.len();
    let j = state.rng.gen_range(0..n);
    let h = state.steps.displacement;
    let mut to = state.config.positions()[j];
    let axes = match params.dimension {
        Dimension::Two => 2,
        Dimension::Three => 3,
    };
    for c in to.iter_mut().take(axes) {
        *c += state.rng.gen_range(-h..=h);
    }
    propose_displacement(state, params, j, to)
}

/// Attempts `V -> V exp(log_change)` with positions scaled about the origin.
pub fn propose_volume(state: &mut SimulationState, params: &EnsembleParams, log_change: f64) -> MoveOutcome {
    let old_volume = state.volume();
    let new_volume = old_volume * log_change.exp();
    let outcome = if params.volume_cap.is_some_and(|cap| new_volume > cap) {
        MoveOutcome::Rejected(RejectReason::VolumeCap)
    } else if state.config.rescale_into(new_volume, &mut state.spare).is_err() {
        MoveOutcome::Rejected(RejectReason::VolumeCap)
    } else {
        match state.spare.total_potential_energy() {
            Err(_) => MoveOutcome::Rejected(RejectReason::HardCore),
            Ok(new_energy) => {
                let n = state.config.len() as f64;
                let log_ratio = -params.beta * (new_energy - state.energy)
                    - params.beta * params.pressure * (new_volume - old_volume)
                    + (n + 1.0) * log_change;
                if metropolis_accept(log_ratio, &mut state.rng) {
                    std::mem::swap(&mut state.config, &mut state.spare);
                    state.energy = new_energy;
                    MoveOutcome::Accepted
                } else {
                    MoveOutcome::Rejected(RejectReason::Metropolis)
                }
            }
        }
    };
    state.volume_stats.record(outcome.accepted());
    outcome
}

/// Log-uniform trial volume change.
pub fn volume_move(state: &mut SimulationState, params: &EnsembleParams) -> MoveOutcome {
    let h = state.steps.log_volume;
    let delta = state.rng.gen_range(-h..=h);
    propose_volume(state, params, delta)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::geometry::{ScaledContainer, Shape, ShapeFamily};
    use crate::interaction::{Interaction, ParticleConfiguration};
    use crate::sampler::StepSizes;

    fn state(positions: Vec<[f64; 3]>, volume: f64) -> SimulationState {
        let disk = Arc::new(Shape::build(&ShapeFamily::Ball, Dimension::Two).unwrap());
        let c = ScaledContainer::new(disk, volume).unwrap();
        let cfg = ParticleConfiguration::new(c, positions, Interaction::SoftCore).unwrap();
        SimulationState::from_configuration(cfg, 5, StepSizes { displacement: 0.5, log_volume: 0.1 }).unwrap()
    }

    #[test]
    fn accept_rule_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(metropolis_accept(0.0, &mut rng));
        assert!(metropolis_accept(3.0, &mut rng));
        assert!(!metropolis_accept(f64::NEG_INFINITY, &mut rng));
        assert!(!metropolis_accept(f64::NAN, &mut rng));
        let hits = (0..20_000).filter(|_| metropolis_accept(-(2f64.ln()), &mut rng)).count();
        assert!((hits as f64 / 20_000.0 - 0.5).abs() < 0.02);
    }

    #[test]
    fn zero_volume_change_always_accepted() {
        let params = EnsembleParams::new(Dimension::Two, 2, 5.0, 3.0);
        let mut s = state(vec![[0.0; 3], [2.0, 0.0, 0.0]], 60.0);
        for _ in 0..50 {
            assert_eq!(propose_volume(&mut s, &params, 0.0), MoveOutcome::Accepted);
        }
        assert_eq!(s.volume(), 60.0);
    }

    #[test]
    fn compression_into_core_rejected() {
        let params = EnsembleParams::new(Dimension::Two, 2, 1.0, 1.0);
        let mut s = state(vec![[-0.505, 0.0, 0.0], [0.505, 0.0, 0.0]], 60.0);
        // Linear factor 0.98 brings the pair to 0.9898.
        let out = propose_volume(&mut s, &params, 2.0 * 0.98f64.ln());
        assert_eq!(out, MoveOutcome::Rejected(RejectReason::HardCore));
        assert_eq!(s.volume(), 60.0);
        assert_eq!(s.configuration().positions()[0][0], -0.505);
    }

    #[test]
    fn volume_cap_enforced() {
        let params = EnsembleParams { volume_cap: Some(61.0), ..EnsembleParams::new(Dimension::Two, 1, 1.0, 0.0) };
        let mut s = state(vec![[0.0; 3]], 60.0);
        assert_eq!(propose_volume(&mut s, &params, 0.1), MoveOutcome::Rejected(RejectReason::VolumeCap));
    }

    #[test]
    fn rejected_moves_leave_state_unchanged() {
        let params = EnsembleParams::new(Dimension::Two, 2, 1.0, 1.0);
        let mut s = state(vec![[0.0; 3], [2.0, 0.0, 0.0]], 60.0);
        let before = s.configuration().positions().to_vec();
        let e = s.potential_energy();
        assert_eq!(propose_displacement(&mut s, &params, 1, [0.5, 0.0, 0.0]), MoveOutcome::Rejected(RejectReason::HardCore));
        assert_eq!(propose_displacement(&mut s, &params, 1, [50.0, 0.0, 0.0]), MoveOutcome::Rejected(RejectReason::Outside));
        assert_eq!(s.configuration().positions(), &before[..]);
        assert_eq!(s.potential_energy(), e);
        assert_eq!(s.displacement_stats.attempted, 2);
        assert_eq!(s.displacement_stats.accepted, 0);
    }

    #[test]
    fn downhill_move_always_accepted() {
        let params = EnsembleParams::new(Dimension::Two, 2, 1.0, 1.0);
        let mut s = state(vec![[0.0; 3], [2.5, 0.0, 0.0]], 60.0);
        assert_eq!(propose_displacement(&mut s, &params, 1, [1.5, 0.0, 0.0]), MoveOutcome::Accepted);
        assert!((s.potential_energy() + 1.5).abs() < 1e-12);
        assert!(s.energy_drift().unwrap() < 1e-14);
    }
}
