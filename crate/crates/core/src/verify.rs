//! Quick self-check on small grids: the same properties the full acceptance
//! run establishes, at resolutions that finish in a few seconds.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{parse_config, render, ConstraintChoice, FlowConfig, MuChoice, SpeedChoice};
use crate::error::Result;
use crate::export::{timeseries_csv, timeseries_row};
use crate::flow::{ConstraintSpec, FlowEngine, SpeedSpec};
use crate::geometry::embed_boundary;
use crate::grid::SphereGrid;
use crate::run::{run, Trajectory};
use crate::shapes::{catalog, make_shape, random_shape, ShapeSpec};
use crate::volumes::{self, af_audit, QuadratureError};

/// Outcome of one named check.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: Vec<String>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check {
            name,
            passed: true,
            detail: Vec::new(),
        }
    }

    fn expect(&mut self, ok: bool, what: String) {
        self.passed &= ok;
        self.detail.push(if ok { what } else { format!("FAILED {what}") });
    }

    fn run_failed(mut self, e: impl std::fmt::Display) -> Self {
        self.expect(false, format!("run error: {e}"));
        self
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn small_n1(speed: SpeedChoice, constraint: ConstraintChoice) -> FlowConfig {
    let mut cfg = FlowConfig::new(1, 1, speed, constraint);
    cfg.resolution = 64;
    cfg.shape = ShapeSpec::ellipsoid(&[2.0, 1.0]);
    cfg.snapshot_every = 20;
    cfg
}

fn fixed_point() -> Check {
    let mut c = Check::new("ball is a fixed point");
    for (n, k, res) in [(1, 1, 64), (2, 1, 12), (2, 2, 12)] {
        let dev = (|| -> Result<f64> {
            let grid = SphereGrid::new(n, res)?;
            let len = grid.len();
            let engine = FlowEngine::new(grid, SpeedSpec::Homogeneous { k, alpha: 1.0 }, ConstraintSpec::PreserveVolume, true)?;
            let mut state = engine.initial_state(vec![1.3; len])?;
            for _ in 0..100 {
                let dt = engine.stable_dt(&state, 0.2);
                engine.step_in_place(&mut state, dt)?;
            }
            Ok(state.s.iter().map(|s| (s - 1.3).abs()).fold(0.0, f64::max))
        })();
        match dev {
            Ok(d) => c.expect(d < 1e-12, format!("n={n} k={k}: {d:.1e}")),
            Err(e) => c.expect(false, format!("n={n} k={k}: {e}")),
        }
    }
    c
}

fn monotone(c: &mut Check, traj: &Trajectory) {
    let a = &traj.audit;
    c.expect(a.max_volume_change <= 1e-12, format!("|dV2| {:.1e}", a.max_volume_change));
    c.expect(a.quermass_increase.value <= 1e-10, format!("dV1 {:.1e}", a.quermass_increase.value));
    c.expect(a.ratio_increase.value <= 1e-10, format!("dI1 {:.1e}", a.ratio_increase.value));
}

fn limit(c: &mut Check, traj: &Trajectory, want: f64, tol: f64) {
    match traj.r_hat() {
        Some(r) => c.expect(rel(r, want) < tol, format!("r = {r:.6}, want {want:.6}")),
        None => c.expect(false, format!("{:?}", traj.outcome)),
    }
}

fn reflection(c: &mut Check, traj: &Trajectory) {
    let recs: Vec<_> = traj.records.iter().filter(|r| !r.lambda_plus.is_empty()).collect();
    let mut worst: f64 = 0.0;
    for w in recs.windows(2) {
        let tol = w[0].tol_contain.max(w[1].tol_contain);
        for d in 0..w[0].lambda_plus.len() {
            worst = worst.max(w[1].lambda_plus[d] - w[0].lambda_plus[d] - tol);
            worst = worst.max(w[0].lambda_minus[d] - w[1].lambda_minus[d] - tol);
        }
    }
    c.expect(worst <= 0.0, format!("reflection excess {worst:.1e} over {} evaluations", recs.len()));
}

fn volume_preserving() -> Check {
    let mut c = Check::new("volume-preserving ellipse (n = 1)");
    let mut cfg = small_n1(SpeedChoice::Alpha(1.0), ConstraintChoice::Volume);
    cfg.tol_conv = 1e-7;
    let traj = match run(&cfg) {
        Ok(t) => t,
        Err(e) => return c.run_failed(e),
    };
    monotone(&mut c, &traj);
    limit(&mut c, &traj, 2f64.sqrt(), 1e-3);
    reflection(&mut c, &traj);
    let last = traj.records.last().expect("runs always record");
    c.expect(
        last.stability.abs() < 1e-6 && last.d_steiner_ball < 1e-6,
        format!("S {:.1e}, d_H {:.1e}", last.stability, last.d_steiner_ball),
    );
    c
}

fn quermass_preserving() -> Check {
    let mut c = Check::new("quermass-preserving ellipse (n = 1)");
    let traj = match run(&small_n1(SpeedChoice::Alpha(1.0), ConstraintChoice::Quermass)) {
        Ok(t) => t,
        Err(e) => return c.run_failed(e),
    };
    // perimeter from a fine grid
    let fine = SphereGrid::new(1, 4096).and_then(|g| {
        let s = make_shape(&ShapeSpec::ellipsoid(&[2.0, 1.0]), &g)?;
        volumes::quermassintegrals(&g, &s)
    });
    match fine {
        Ok(v) => limit(&mut c, &traj, v.get(1) / std::f64::consts::TAU, 1e-3),
        Err(e) => c.expect(false, e.to_string()),
    }
    c
}

fn gauss_curvature() -> Check {
    let mut c = Check::new("Gauss curvature flow (n = 2, k = 2)");
    let mut cfg = FlowConfig::new(2, 2, SpeedChoice::Alpha(1.0), ConstraintChoice::Volume);
    cfg.resolution = 12;
    cfg.shape = ShapeSpec::ellipsoid(&[1.5, 1.2, 1.0]);
    cfg.snapshot_every = 200;
    cfg.reflection_every = 5;
    let traj = match run(&cfg) {
        Ok(t) => t,
        Err(e) => return c.run_failed(e),
    };
    c.expect(traj.audit.constraint_drift < 1e-10, format!("V3 drift {:.1e}", traj.audit.constraint_drift));
    c.expect(
        traj.audit.quermass_increase.exceed == 0,
        format!("dV1 {:.1e}", traj.audit.quermass_increase.value),
    );
    limit(&mut c, &traj, 1.8f64.cbrt(), 1e-2);
    reflection(&mut c, &traj);
    c
}

fn nonhomogeneous() -> Check {
    let mut c = Check::new("speed z + z^3");
    let traj = match run(&small_n1(SpeedChoice::Mu(MuChoice::LinearPlusCubic), ConstraintChoice::Volume)) {
        Ok(t) => t,
        Err(e) => return c.run_failed(e),
    };
    let probe = traj.probe.as_ref().is_some_and(|p| p.passes());
    c.expect(probe, "admissibility probe".into());
    monotone(&mut c, &traj);
    limit(&mut c, &traj, 2f64.sqrt(), 1e-3);
    c
}

fn external() -> Check {
    let mut c = Check::new("volume non-decreasing mode");
    let mut cfg = small_n1(SpeedChoice::Alpha(1.0), ConstraintChoice::ExternalScaled(1.05));
    cfg.shape = ShapeSpec::PerturbedBall {
        r: 1.0,
        harmonic: 2,
        amplitude: 0.15,
    };
    cfg.reflection_every = 0;
    let traj = match run(&cfg) {
        Ok(t) => t,
        Err(e) => return c.run_failed(e),
    };
    let a = &traj.audit;
    c.expect(a.volume_decrease.value <= 0.0, format!("V2 decrease {:.1e}", a.volume_decrease.value));
    c.expect(a.ratio_increase.value <= 0.0, format!("I1 increase {:.1e}", a.ratio_increase.value));
    let t_end = traj.records.last().map_or(0.0, |r| r.t);
    let tail: Vec<f64> = traj
        .records
        .iter()
        .filter(|r| r.t >= 0.25 * t_end)
        .map(|r| r.rescaled_residual)
        .collect();
    let rises = tail.windows(2).filter(|w| w[1] > w[0]).count();
    c.expect(rises == 0, format!("rescaled residual rises {rises} times"));
    c
}

fn alexandrov_fenchel() -> Check {
    let mut c = Check::new("Alexandrov-Fenchel audit of the catalog");
    for (dim, res) in [(1, 64), (2, 24)] {
        let audit = (|| -> Result<usize> {
            let fine_grid = SphereGrid::new(dim, res)?;
            let coarse_grid = SphereGrid::new(dim, res / 2)?;
            let mut bad = 0;
            for (_, spec) in catalog(dim) {
                let fine = volumes::quermassintegrals(&fine_grid, &make_shape(&spec, &fine_grid)?)?;
                let coarse = volumes::quermassintegrals(&coarse_grid, &make_shape(&spec, &coarse_grid)?)?;
                bad += usize::from(!af_audit(&fine, &QuadratureError::richardson(&fine, &coarse)).holds());
            }
            Ok(bad)
        })();
        match audit {
            Ok(bad) => c.expect(bad == 0, format!("n={dim}: {bad} violations")),
            Err(e) => c.expect(false, format!("n={dim}: {e}")),
        }
    }
    c
}

fn polygon_oracle() -> Check {
    let mut c = Check::new("polygon area and perimeter (n = 1)");
    let Ok(grid) = SphereGrid::new(1, 2000) else {
        return c.run_failed("grid");
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let spec = random_shape(1, &mut rng);
        let Ok(s) = make_shape(&spec, &grid) else {
            c.expect(false, format!("{spec} rejected"));
            continue;
        };
        let Ok(v) = volumes::quermassintegrals(&grid, &s) else { continue };
        let pts = embed_boundary(&grid, &s);
        let (mut area, mut perim) = (0.0, 0.0);
        for (i, p) in pts.iter().enumerate() {
            let q = &pts[(i + 1) % pts.len()];
            area += 0.5 * (p[0] * q[1] - q[0] * p[1]);
            perim += (q[0] - p[0]).hypot(q[1] - p[1]);
        }
        worst = worst.max(rel(area, v.get(2) / 2.0)).max(rel(perim, v.get(1)));
    }
    c.expect(worst < 1e-5, format!("worst relative error {worst:.1e}"));
    c
}

fn round_trips() -> Check {
    let mut c = Check::new("config and CSV round trips");
    let mut cfgs = vec![
        small_n1(SpeedChoice::Alpha(0.5), ConstraintChoice::Mixed(0.25)),
        small_n1(SpeedChoice::Mu(MuChoice::Power(2.0)), ConstraintChoice::ExternalTable(vec![(0.0, 1.0), (2.0, 1.5)])),
    ];
    let mut n2 = FlowConfig::new(2, 1, SpeedChoice::Alpha(1.5), ConstraintChoice::Quermass);
    n2.shape = ShapeSpec::MinkowskiSum(vec![ShapeSpec::ellipsoid(&[1.0, 0.5, 0.7]), ShapeSpec::ball(0.2)]);
    cfgs.push(n2);
    let ok = cfgs.iter().all(|cfg| parse_config(&render(cfg)).is_ok_and(|p| &p == cfg));
    c.expect(ok, format!("{} configurations", cfgs.len()));

    let mut cfg = small_n1(SpeedChoice::Alpha(1.0), ConstraintChoice::Volume);
    cfg.t_max = 0.05;
    match run(&cfg).and_then(|t| Ok((timeseries_csv(&t.records)?, t))) {
        Ok((csv, traj)) => {
            let exact = csv.lines().skip(1).zip(&traj.records).all(|(line, rec)| {
                let parsed: Vec<f64> = line.split(',').filter_map(|x| x.parse().ok()).collect();
                let want = timeseries_row(rec);
                parsed.len() == want.len() && parsed.iter().zip(&want).all(|(a, b)| a.to_bits() == b.to_bits())
            });
            c.expect(exact, format!("{} CSV rows", traj.records.len()));
        }
        Err(e) => c.expect(false, e.to_string()),
    }
    c
}

/// Runs every check in order, calling `report` after each.
pub fn verify_suite(mut report: impl FnMut(&Check, std::time::Duration)) -> Vec<Check> {
    let checks: [fn() -> Check; 10] = [
        fixed_point,
        volume_preserving,
        quermass_preserving,
        gauss_curvature,
        nonhomogeneous,
        external,
        alexandrov_fenchel,
        polygon_oracle,
        round_trips,
        catalog_convexity,
    ];
    checks
        .iter()
        .map(|check| {
            let start = Instant::now();
            let c = check();
            report(&c, start.elapsed());
            c
        })
        .collect()
}

fn catalog_convexity() -> Check {
    let mut c = Check::new("catalog shapes are strictly convex");
    for (dim, res) in [(1, 256), (2, 48)] {
        let Ok(grid) = SphereGrid::new(dim, res) else { continue };
        for (name, spec) in catalog(dim) {
            if let Err(e) = make_shape(&spec, &grid) {
                c.expect(false, format!("n={dim} {name}: {e}"));
            }
        }
    }
    c.expect(true, "12 shapes".into());
    c
}
