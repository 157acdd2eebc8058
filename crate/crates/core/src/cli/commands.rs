use std::io::Write as _;

use serde_json::json;

use crate::interaction::{Interaction, Snapshot};
use crate::sampler::{initialize_state, run_with, TrajectoryWriter};
use crate::search::{
    compare_shapes, derive_seed, local_shape_search, minimize_lattice_energy, pressure_scan, lattice_energy_oracle,
    NamedShape, PressureScan, SeedPlan, ShapeComparison,
};

use super::config::ExperimentConfig;
use super::output::{OutputDir, Provenance};
use super::{load_config, output_dir, svg, CliError, OracleArgs, RunArgs};

fn prepare(args: &RunArgs) -> Result<(ExperimentConfig, Vec<NamedShape>), CliError> {
    let mut config = load_config(&args.config, &args.overrides)?;
    config.resolve_seed();
    let base = args.config.parent().unwrap_or(std::path::Path::new("."));
    let shapes = config
        .build_shapes(base)
        .map_err(|source| CliError::Config { path: args.config.display().to_string(), source })?;
    Ok((config, shapes))
}

fn single_point(config: &ExperimentConfig, command: &str) -> Result<(usize, f64), CliError> {
    match (config.system.particles.as_slice(), config.system.pressure.as_slice()) {
        ([n], [p]) => Ok((*n, *p)),
        _ => Err(CliError::Usage(format!(
            "{command} needs a single particle count and a single pressure; use `scan` for lists"
        ))),
    }
}

fn seed_of(config: &ExperimentConfig) -> u64 {
    config.run.seed.expect("seed resolved before running")
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

pub fn simulate(args: &RunArgs) -> Result<(), CliError> {
    let (config, shapes) = prepare(args)?;
    let (n, pressure) = single_point(&config, "simulate")?;
    let [shape] = shapes.as_slice() else {
        return Err(CliError::Usage(format!("simulate needs exactly one shape, got {}", shapes.len())));
    };
    let seed = seed_of(&config);
    let params = config.ensemble(n, pressure);
    let out = OutputDir::create(output_dir(args, &config), Provenance::new("simulate", &config, vec![seed]))?;
    out.write_text("config.toml", "#", &config.to_toml())?;

    let mut state = initialize_state(shape.shape.clone(), &params, &config.init, seed)?;
    if config.output.snapshots {
        out.write_text("snapshot_initial.txt", "#", &Snapshot::of(state.configuration()).to_text())?;
    }
    let mut io_error = None;
    let result = if config.output.csv {
        let mut w = TrajectoryWriter::new(out.create_file("trajectory.csv")?, &out.provenance.lines())?;
        let r = run_with(&mut state, &params, &config.schedule, |s| {
            if io_error.is_none() {
                io_error = w.write(s).err();
            }
        });
        w.finish()?;
        r
    } else {
        run_with(&mut state, &params, &config.schedule, |_| {})
    };
    if let Some(e) = io_error {
        return Err(e.into());
    }
    if config.output.snapshots {
        out.write_text("snapshot_final.txt", "#", &Snapshot::of(state.configuration()).to_text())?;
    }
    let run = result?;
    let ideal_volume = (params.interaction == Interaction::Ideal && pressure > 0.0)
        .then(|| (n as f64 + 1.0) / (params.beta * pressure));
    if config.output.json {
        let summary = json!({
            "shape": shape.label,
            "params": params,
            "seed": seed,
            "schedule": config.schedule,
            "potential_energy": run.potential_energy,
            "volume": run.volume,
            "total_energy": run.total_energy,
            "kinetic_energy": run.kinetic_energy,
            "displacement_acceptance": run.displacement_acceptance,
            "volume_acceptance": run.volume_acceptance,
            "steps": run.steps,
            "max_energy_drift": run.max_energy_drift,
            "ideal_gas_volume": ideal_volume,
        });
        out.write_json("summary.json", "summary", &summary)?;
    }
    if config.output.svg {
        let c = state.configuration().container();
        out.write_svg("snapshot.svg", &svg::snapshot(&shape.shape, c.scale(), state.configuration().positions()))?;
        out.write_svg("shape.svg", &svg::shape_outlines(&[(shape.label.clone(), &shape.shape)]))?;
    }
    println!(
        "<U> = {} ± {}  <V> = {} ± {}  <E> = {} ± {}  acceptance {:.3}/{:.3}",
        run.potential_energy.mean,
        run.potential_energy.std_error,
        run.volume.mean,
        run.volume.std_error,
        run.total_energy.mean,
        run.total_energy.std_error,
        run.displacement_acceptance,
        run.volume_acceptance
    );
    println!("wrote {}", out.root().display());
    Ok(())
}

const ESTIMATE_COLUMNS: [&str; 12] = [
    "particles",
    "pressure",
    "shape",
    "total_energy",
    "total_energy_se",
    "potential_energy",
    "potential_energy_se",
    "volume",
    "volume_se",
    "replicas",
    "mean_displacement_acceptance",
    "mean_volume_acceptance",
];

const PAIR_COLUMNS: [&str; 8] = ["particles", "pressure", "first", "second", "delta", "delta_se", "z", "verdict"];

fn estimate_rows(c: &ShapeComparison) -> Vec<Vec<String>> {
    c.entries
        .iter()
        .map(|e| {
            let k = e.estimate.replicas.len() as f64;
            let da = e.estimate.replicas.iter().map(|r| r.displacement_acceptance).sum::<f64>() / k;
            let va = e.estimate.replicas.iter().map(|r| r.volume_acceptance).sum::<f64>() / k;
            let est = &e.estimate;
            vec![
                c.params.particles.to_string(),
                fmt(c.params.pressure),
                e.label.clone(),
                fmt(est.total_energy.mean),
                fmt(est.total_energy.std_error),
                fmt(est.potential_energy.mean),
                fmt(est.potential_energy.std_error),
                fmt(est.volume.mean),
                fmt(est.volume.std_error),
                est.replicas.len().to_string(),
                fmt(da),
                fmt(va),
            ]
        })
        .collect()
}

fn pair_rows(c: &ShapeComparison) -> Vec<Vec<String>> {
    c.pairs
        .iter()
        .map(|p| {
            vec![
                c.params.particles.to_string(),
                fmt(c.params.pressure),
                p.first.clone(),
                p.second.clone(),
                fmt(p.delta),
                fmt(p.std_error),
                fmt(c.z),
                p.verdict.as_str().to_string(),
            ]
        })
        .collect()
}

fn print_comparison(c: &ShapeComparison) {
    println!("N = {}, beta = {}, P = {}", c.params.particles, c.params.beta, c.params.pressure);
    for e in &c.entries {
        println!("  {:<16} <E> = {:.6} ± {:.6}", e.label, e.estimate.total_energy.mean, e.estimate.total_energy.std_error);
    }
    for p in &c.pairs {
        println!(
            "  {} - {} = {:.6} ± {:.6}  {}",
            p.first,
            p.second,
            p.delta,
            p.std_error,
            p.verdict.as_str()
        );
    }
    println!("  co-minimal: {}", c.co_minimal.join(", "));
}

fn shape_svg(shapes: &[NamedShape]) -> String {
    let list: Vec<(String, &crate::geometry::Shape)> = shapes.iter().map(|s| (s.label.clone(), &*s.shape)).collect();
    svg::shape_outlines(&list)
}

fn all_seeds(base: u64, replicas: usize, shapes: usize) -> Vec<u64> {
    let plan = SeedPlan { base, replicas };
    std::iter::once(base).chain((0..shapes).flat_map(|e| plan.seeds_for(e))).collect()
}

pub fn compare(args: &RunArgs) -> Result<(), CliError> {
    let (config, shapes) = prepare(args)?;
    if shapes.len() < 2 {
        return Err(CliError::Usage(format!("compare needs at least 2 shapes, got {}", shapes.len())));
    }
    let (n, pressure) = single_point(&config, "compare")?;
    let seed = seed_of(&config);
    let plan = SeedPlan { base: seed, replicas: config.run.replicas };
    let prov = Provenance::new("compare", &config, all_seeds(seed, plan.replicas, shapes.len()));
    let out = OutputDir::create(output_dir(args, &config), prov)?;
    out.write_text("config.toml", "#", &config.to_toml())?;
    if config.output.svg {
        out.write_svg("shapes.svg", &shape_svg(&shapes))?;
    }
    let params = config.ensemble(n, pressure);
    let c = compare_shapes(&shapes, &params, &config.schedule, &config.init, plan, config.run.z)?;
    if config.output.csv {
        out.write_csv("comparison_estimates.csv", &ESTIMATE_COLUMNS, &estimate_rows(&c))?;
        out.write_csv("comparison_pairs.csv", &PAIR_COLUMNS, &pair_rows(&c))?;
    }
    if config.output.json {
        out.write_json("comparison.json", "comparison", &c)?;
    }
    print_comparison(&c);
    println!("wrote {}", out.root().display());
    Ok(())
}

const TREND_COLUMNS: [&str; 6] = ["particles", "first", "second", "trend", "sign_changes", "verdicts"];

pub fn scan(args: &RunArgs) -> Result<(), CliError> {
    let (config, shapes) = prepare(args)?;
    if shapes.len() < 2 {
        return Err(CliError::Usage(format!("scan needs at least 2 shapes, got {}", shapes.len())));
    }
    let pressures = &config.system.pressure;
    if pressures.windows(2).any(|w| w[0] > w[1]) {
        return Err(CliError::Usage("pressures must be sorted ascending".into()));
    }
    let seed = seed_of(&config);
    let prov = Provenance::new("scan", &config, vec![seed]);
    let out = OutputDir::create(output_dir(args, &config), prov)?;
    out.write_text("config.toml", "#", &config.to_toml())?;
    if config.output.svg {
        out.write_svg("shapes.svg", &shape_svg(&shapes))?;
    }
    let mut done: Vec<(usize, PressureScan)> = Vec::new();
    for (k, &n) in config.system.particles.iter().enumerate() {
        let plan = SeedPlan { base: derive_seed(seed, &[k as u64]), replicas: config.run.replicas };
        let params = config.ensemble(n, pressures[0]);
        let result = pressure_scan(&shapes, &params, pressures, &config.schedule, &config.init, plan, config.run.z);
        let scan = match result {
            Ok(s) => s,
            Err(e) => {
                eprintln!("scan at N = {n} failed; results for completed particle counts are on disk");
                return Err(e.into());
            }
        };
        for row in &scan.rows {
            print_comparison(row);
        }
        done.push((n, scan));
        write_scan(&out, &config, &done)?;
    }
    println!("wrote {}", out.root().display());
    Ok(())
}

fn write_scan(out: &OutputDir, config: &ExperimentConfig, done: &[(usize, PressureScan)]) -> Result<(), CliError> {
    if config.output.csv {
        let rows: Vec<ShapeComparison> = done.iter().flat_map(|(_, s)| s.rows.iter().cloned()).collect();
        out.write_csv("scan_estimates.csv", &ESTIMATE_COLUMNS, &rows.iter().flat_map(estimate_rows).collect::<Vec<_>>())?;
        out.write_csv("scan_pairs.csv", &PAIR_COLUMNS, &rows.iter().flat_map(pair_rows).collect::<Vec<_>>())?;
        let trends: Vec<Vec<String>> = done
            .iter()
            .flat_map(|(n, s)| {
                s.trends.iter().map(move |t| {
                    let v: Vec<&str> = t.verdicts.iter().map(|v| v.as_str()).collect();
                    vec![
                        n.to_string(),
                        t.first.clone(),
                        t.second.clone(),
                        serde_json::to_value(t.trend).expect("trend").as_str().unwrap_or_default().to_string(),
                        t.sign_changes.to_string(),
                        v.join(" "),
                    ]
                })
            })
            .collect();
        out.write_csv("scan_trends.csv", &TREND_COLUMNS, &trends)?;
    }
    if config.output.json {
        let doc: Vec<serde_json::Value> =
            done.iter().map(|(n, s)| json!({ "particles": n, "rows": s.rows, "trends": s.trends })).collect();
        out.write_json("scan.json", "scan", &doc)?;
    }
    if config.output.svg {
        let series: Vec<(String, &crate::search::PairTrend)> = done
            .iter()
            .flat_map(|(n, s)| s.trends.iter().map(move |t| (format!("N={n}: {} - {}", t.first, t.second), t)))
            .collect();
        out.write_svg("delta_vs_pressure.svg", &svg::delta_curves(&series))?;
    }
    Ok(())
}

const TRACE_COLUMNS: [&str; 11] = [
    "iteration",
    "coefficient",
    "change",
    "retries",
    "feasible",
    "current_energy",
    "proposal_energy",
    "delta",
    "delta_se",
    "accepted",
    "step",
];

pub fn search(args: &RunArgs) -> Result<(), CliError> {
    let (mut config, shapes) = prepare(args)?;
    let [start] = shapes.as_slice() else {
        return Err(CliError::Usage(format!("search needs exactly one start shape, got {}", shapes.len())));
    };
    let (n, pressure) = single_point(&config, "search")?;
    let seed = seed_of(&config);
    config.search.seed = seed;
    let out = OutputDir::create(output_dir(args, &config), Provenance::new("search", &config, vec![seed]))?;
    out.write_text("config.toml", "#", &config.to_toml())?;
    let params = config.ensemble(n, pressure);
    let state = local_shape_search(&start.shape, &params, &config.schedule, &config.init, &config.search)?;
    if config.output.csv {
        let rows: Vec<Vec<String>> = state
            .trace
            .iter()
            .map(|s| {
                vec![
                    s.iteration.to_string(),
                    s.coefficient.to_string(),
                    fmt(s.change),
                    s.retries.to_string(),
                    s.feasible.to_string(),
                    fmt(s.current_energy),
                    fmt(s.proposal_energy),
                    fmt(s.delta),
                    fmt(s.std_error),
                    s.accepted.to_string(),
                    fmt(state.step),
                ]
            })
            .collect();
        out.write_csv("search_trace.csv", &TRACE_COLUMNS, &rows)?;
    }
    if config.output.json {
        out.write_json("search.json", "search", &state)?;
    }
    let mut record = serde_json::to_string_pretty(&state.shape).expect("shape serializes");
    record.push('\n');
    std::fs::File::create(out.path("best_shape.json"))?.write_all(record.as_bytes())?;
    if config.output.svg {
        let list = [(start.label.clone(), &*start.shape), ("best".to_string(), &state.shape)];
        out.write_svg("best_shape.svg", &svg::shape_outlines(&list))?;
    }
    let accepted = state.trace.iter().filter(|s| s.accepted).count();
    println!(
        "{} iterations, {} accepted, converged: {}, budget exhausted: {}",
        state.trace.len(),
        accepted,
        state.converged,
        state.budget_exhausted
    );
    println!("wrote {}", out.root().display());
    Ok(())
}

pub fn oracle(args: &OracleArgs) -> Result<(), CliError> {
    let mut config = match &args.config {
        Some(path) => Some(load_config(path, &Default::default())?),
        None => None,
    };
    let mut section = config.as_ref().map(|c| c.oracle.clone()).unwrap_or_default();
    if let Some(s) = &args.spacing {
        section.spacing = s.clone();
    }
    if let Some(g) = args.grid_points {
        section.grid_points = g;
    }
    if let Some(c) = config.as_mut() {
        c.oracle = section.clone();
    }
    let mut rows = Vec::new();
    for &a in &section.spacing {
        let e = lattice_energy_oracle(a).map_err(|e| CliError::Usage(format!("spacing {a}: {e}")))?;
        println!("{a} {e}");
        rows.push(vec![fmt(a), fmt(e)]);
    }
    let best = minimize_lattice_energy(section.grid_points);
    println!("minimum over [1, 3] on {} points: spacing {} energy {}", best.grid_points, best.spacing, best.energy);
    let dir = match (&args.output_dir, &config) {
        (Some(d), _) => Some(d.clone()),
        (None, Some(c)) => c.output.directory.clone(),
        (None, None) => None,
    };
    if let Some(dir) = dir {
        let c = config.unwrap_or_else(|| {
            let mut c = ExperimentConfig::minimal(crate::geometry::Dimension::Two, 1, 1.0, 1.0, Vec::new());
            c.oracle = section.clone();
            c
        });
        let out = OutputDir::create(dir, Provenance::new("oracle", &c, Vec::new()))?;
        out.write_csv("oracle.csv", &["spacing", "energy_per_particle"], &rows)?;
        let values: Vec<serde_json::Value> =
            rows.iter().map(|r| json!({ "spacing": r[0].parse::<f64>().ok(), "energy_per_particle": r[1].parse::<f64>().ok() })).collect();
        out.write_json("oracle.json", "oracle", &json!({ "values": values, "minimum": best }))?;
    }
    Ok(())
}
