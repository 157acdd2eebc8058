#![allow(dead_code)]

use wulff_mc::geometry::{make_shape, Dimension, Shape, ShapeFamily};

pub fn disk() -> Shape {
    make_shape(&ShapeFamily::Ball, Dimension::Two).unwrap()
}

pub fn hexagon() -> Shape {
    make_shape(&ShapeFamily::RegularPolygon { sides: 6 }, Dimension::Two).unwrap()
}

pub fn sphere() -> Shape {
    make_shape(&ShapeFamily::Ball, Dimension::Three).unwrap()
}

pub fn cuboctahedron() -> Shape {
    make_shape(&ShapeFamily::Cuboctahedron, Dimension::Three).unwrap()
}

/// Two-sided Kolmogorov–Smirnov statistic of `xs` against `cdf`.
pub fn ks_statistic(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic critical value of the KS statistic at significance `alpha`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-0.5 * (alpha / 2.0).ln() / n as f64).sqrt()
}

/// CDF of `Gamma(2, rate)`, the single-particle volume marginal.
pub fn gamma2_cdf(v: f64, rate: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    let x = rate * v;
    1.0 - (-x).exp() * (1.0 + x)
}

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use wulff_mc::geometry::Point;
use wulff_mc::interaction::{pair_energy, ParticleConfiguration};
use wulff_mc::sampler::{initialize_state, run, EnsembleParams, InitOptions, RunSchedule};

/// Single-particle chain: tuned burn-in, then `samples` states thinned by
/// `thin` sweeps. Returns container-unit positions `x / λ` and volumes.
pub fn single_particle_samples(
    shape: Shape,
    beta: f64,
    pressure: f64,
    samples: usize,
    thin: usize,
    seed: u64,
) -> (Vec<[f64; 3]>, Vec<f64>) {
    let params = EnsembleParams::new(shape.dimension(), 1, beta, pressure);
    let mut state = initialize_state(Arc::new(shape), &params, &InitOptions::default(), seed).unwrap();
    let tune = RunSchedule { burn_in: 2_000, sweeps: 80, thin: 10, blocks: 8, ..RunSchedule::default() };
    run(&mut state, &params, &tune).unwrap();
    let mut positions = Vec::with_capacity(samples);
    let mut volumes = Vec::with_capacity(samples);
    for _ in 0..samples {
        for _ in 0..thin {
            state.sweep(&params, 1);
        }
        let c = state.configuration();
        let lambda = c.container().scale();
        let p = c.positions()[0];
        positions.push([p[0] / lambda, p[1] / lambda, p[2] / lambda]);
        volumes.push(state.volume());
    }
    (positions, volumes)
}

/// Radius of the volume-10 ball in `d` dimensions.
pub fn ball_radius(d: usize) -> f64 {
    if d == 2 {
        (10.0 / std::f64::consts::PI).sqrt()
    } else {
        (30.0 / (4.0 * std::f64::consts::PI)).cbrt()
    }
}

pub fn brute_force(positions: &[Point]) -> f64 {
    let mut total = 0.0;
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            let r = (0..3).map(|k| (positions[i][k] - positions[j][k]).powi(2)).sum::<f64>().sqrt();
            total += pair_energy(r).expect("admissible");
        }
    }
    total
}

/// Random sequential insertion at a random density, then a few sweeps so
/// that some configurations are clustered.
pub fn random_configuration(shape: Shape, n: usize, rng: &mut ChaCha8Rng) -> ParticleConfiguration {
    let dim = shape.dimension();
    let params = EnsembleParams::new(dim, n, rng.gen_range(0.5..5.0), rng.gen_range(0.5..5.0));
    let init = InitOptions { volume_factor: rng.gen_range(2.0..10.0), ..InitOptions::default() };
    let mut state = initialize_state(Arc::new(shape), &params, &init, rng.gen()).unwrap();
    for _ in 0..rng.gen_range(0..20) {
        state.sweep(&params, 1);
    }
    state.configuration().clone()
}

