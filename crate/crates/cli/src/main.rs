use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use curvflow::diagnostics::DiagRecord;
use curvflow::export::{export_snapshot, export_timeseries};
use curvflow::shapes::catalog;
use curvflow::verify::verify_suite;
use curvflow::{make_shape, parse_config, render, volumes, FlowConfig, Outcome, SphereGrid, Trajectory};

#[derive(Parser)]
#[command(name = "curvflow", version, about = "Constrained curvature flows of convex bodies")]
struct Cli {
    /// Output directory (overrides `out_dir` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the random reflection directions (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Only print the final summary.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one flow described by a config file.
    Run { config: PathBuf },
    /// List the built-in shapes with their quermassintegrals.
    Shapes,
    /// Run the self-check suite on small grids.
    Verify,
    /// Run the product of parameter lists, e.g. `--param k=1,2 --param alpha=0.5,1`.
    Sweep {
        config: PathBuf,
        #[arg(long = "param", value_name = "KEY=V1,V2,...", required = true)]
        params: Vec<String>,
    },
}

fn load(path: &Path, cli: &Cli) -> anyhow::Result<FlowConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg = parse_config(&text).with_context(|| format!("in {}", path.display()))?;
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn snapshot_name(n: usize, stem: &str) -> String {
    format!("{stem}.{}", if n == 1 { "svg" } else { "obj" })
}

fn progress(rec: &DiagRecord) {
    println!(
        "step {:>9}  t {:>11.5e}  V_last {:.10e}  I {:.8}  phi {:.5e}  d_ball {:.3e}",
        rec.step,
        rec.t,
        rec.volumes.last().copied().unwrap_or(f64::NAN),
        rec.iso,
        rec.phi,
        rec.d_ball
    );
}

/// Runs `cfg` and writes the time series, the rendered config and the
/// initial and final snapshots into `cfg.out_dir`.
fn execute(cfg: &FlowConfig, quiet: bool) -> anyhow::Result<Trajectory> {
    let traj = curvflow::run::run_with(cfg, |rec| {
        if !quiet {
            progress(rec);
        }
    })?;
    let out = &cfg.out_dir;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("config.txt"), render(cfg)).with_context(|| format!("writing into {}", out.display()))?;
    export_timeseries(&traj, &out.join("timeseries.csv"))?;
    let grid = traj.engine.grid();
    export_snapshot(grid, &make_shape(&cfg.shape, grid)?, &out.join(snapshot_name(cfg.n, "initial")))?;
    export_snapshot(grid, &traj.final_state.s, &out.join(snapshot_name(cfg.n, "final")))?;
    Ok(traj)
}

fn summary(label: &str, traj: &Trajectory) {
    let outcome = match &traj.outcome {
        Outcome::Converged { r_hat, residual } => format!("converged to r = {r_hat:.8} (constraint residual {residual:.2e})"),
        Outcome::TimeLimit => "reached t_max".into(),
        Outcome::StepLimit => "hit the step cap".into(),
        Outcome::MonitorTrip { monitor, t, detail } => format!("monitor `{monitor}` tripped at t = {t}: {detail}"),
    };
    let a = &traj.audit;
    println!("{label}{outcome}");
    println!(
        "  {} steps in {:.2?}; max |dV| {:.2e}, constraint drift {:.2e}, quadrature error {:.2e}",
        a.steps,
        traj.wall_time,
        a.max_volume_change,
        a.constraint_drift,
        traj.quadrature_error.relative.iter().copied().fold(0.0, f64::max)
    );
    if let Some(probe) = &traj.probe {
        for w in &probe.warnings {
            println!("  speed profile warning: {w}");
        }
    }
}

fn cmd_run(path: &Path, cli: &Cli) -> anyhow::Result<bool> {
    let cfg = load(path, cli)?;
    let traj = execute(&cfg, cli.quiet)?;
    summary("", &traj);
    println!("  output in {}", cfg.out_dir.display());
    Ok(traj.monitors_pass())
}

fn cmd_shapes(cli: &Cli) -> anyhow::Result<bool> {
    for (n, res) in [(1, 256), (2, 48)] {
        let grid = SphereGrid::new(n, res)?;
        println!("n = {n}");
        for (name, spec) in catalog(n) {
            let s = make_shape(&spec, &grid)?;
            let v = volumes::quermassintegrals(&grid, &s)?;
            let vs: Vec<String> = v.as_slice().iter().map(|x| format!("{x:.6}")).collect();
            println!("  {name:<17} {:<36} V = [{}]", spec.to_string(), vs.join(", "));
            if let Some(out) = &cli.out {
                export_snapshot(&grid, &s, &out.join(snapshot_name(n, &format!("n{n}-{name}"))))?;
            }
        }
    }
    Ok(true)
}

fn cmd_verify() -> bool {
    let checks = verify_suite(|c, took| {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{status} {:<42} {:>9.2?}  {}", c.name, took, c.detail.join("; "));
    });
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed", checks.len());
    failed == 0
}

/// Replaces the values of `keys` in a rendered config.
fn with_overrides(base: &str, overrides: &[(String, String)]) -> String {
    let mut out: String = base
        .lines()
        .filter(|line| {
            let key = line.split('=').next().unwrap_or("").trim();
            !overrides.iter().any(|(k, _)| k == key)
        })
        .map(|line| format!("{line}\n"))
        .collect();
    for (k, v) in overrides {
        out.push_str(&format!("{k} = {v}\n"));
    }
    out
}

fn cmd_sweep(path: &Path, params: &[String], cli: &Cli) -> anyhow::Result<bool> {
    let base = load(path, cli)?;
    let mut axes: Vec<(String, Vec<String>)> = Vec::new();
    for p in params {
        let Some((key, values)) = p.split_once('=') else {
            bail!("parameter `{p}` is not of the form key=v1,v2");
        };
        axes.push((key.trim().to_string(), values.split(',').map(|v| v.trim().to_string()).collect()));
    }

    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (key, values) in &axes {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push((key.clone(), v.clone()));
                    c
                })
            })
            .collect();
    }

    let base_text = render(&base);
    let mut configs = Vec::new();
    for combo in &combos {
        let label: Vec<String> = combo.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let label = label.join("_");
        let mut cfg = parse_config(&with_overrides(&base_text, combo)).with_context(|| format!("sweep point {label}"))?;
        cfg.out_dir = base.out_dir.join(&label);
        configs.push((label, cfg));
    }

    let results: Vec<(String, anyhow::Result<Trajectory>)> = thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|(label, cfg)| (label.clone(), scope.spawn(move || execute(cfg, true))))
            .collect();
        handles
            .into_iter()
            .map(|(label, h)| (label, h.join().unwrap_or_else(|_| Err(anyhow::anyhow!("run panicked")))))
            .collect()
    });

    let mut all = true;
    for (label, result) in &results {
        match result {
            Ok(traj) => {
                summary(&format!("{label}: "), traj);
                all &= traj.monitors_pass();
            }
            Err(e) => {
                println!("{label}: error: {e:#}");
                all = false;
            }
        }
    }
    Ok(all)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => cmd_run(config, &cli),
        Command::Shapes => cmd_shapes(&cli),
        Command::Verify => Ok(cmd_verify()),
        Command::Sweep { config, params } => cmd_sweep(config, params, &cli),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
