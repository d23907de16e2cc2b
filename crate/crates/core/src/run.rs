//! Driving a flow to convergence while auditing every step.

use std::time::{Duration, Instant};

use crate::config::FlowConfig;
use crate::diagnostics::{self, DiagRecord};
use crate::error::Result;
use crate::flow::{admissibility_probe, FlowEngine, FlowState, ProbeReport, SpeedSpec};
use crate::grid::{dot, Point, SphereGrid, MIN_CIRCLE_NODES, MIN_LATITUDES};
use crate::shapes::make_shape;
use crate::volumes::{self, QuadratureError};

/// Safety cap on the number of steps of one run.
pub const MAX_STEPS: u64 = 50_000_000;
/// Random directions added to the axis directions for reflection monitoring.
pub const RANDOM_DIRECTIONS: usize = 8;
/// Allowed relative drift of the constraint with projection on.
pub const CONSTRAINT_DRIFT_LIMIT: f64 = 1e-12;
/// Allowed relative excess of `φ` over its sandwich bounds.
pub const SANDWICH_LIMIT: f64 = 1e-10;

/// Worst value of one audited per-step change.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Worst {
    pub value: f64,
    pub t: f64,
    /// Steps on which the change exceeded its per-step tolerance.
    pub exceed: u64,
}

impl Worst {
    fn update(&mut self, value: f64, t: f64, tol: f64) {
        if value > self.value {
            self.value = value;
            self.t = t;
        }
        if value > tol {
            self.exceed += 1;
        }
    }
}

/// Per-step audit of the monotone and conserved quantities.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepAudit {
    pub steps: u64,
    /// Largest `|ΔV_{n+1}|`.
    pub max_volume_change: f64,
    /// Largest decrease of `V_{n+1}`.
    pub volume_decrease: Worst,
    /// Largest increase of `V_{n+1-k}`.
    pub quermass_increase: Worst,
    /// Largest increase of `I_{n+1-k}`.
    pub ratio_increase: Worst,
    /// Largest increase of `V_1² - V_0 V_2`.
    pub stability_increase: Worst,
    pub constraint_drift: f64,
    pub sandwich: f64,
    /// Largest per-step tolerance `10 dt² (max ψ)² ω_n` used.
    pub max_step_tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Converged {
        r_hat: f64,
        /// `|G(r̂, r̂) - c₀| / |c₀|` (`NaN` for a prescribed global term).
        residual: f64,
    },
    TimeLimit,
    StepLimit,
    MonitorTrip {
        monitor: String,
        t: f64,
        detail: String,
    },
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub config: FlowConfig,
    pub engine: FlowEngine,
    pub records: Vec<DiagRecord>,
    pub audit: StepAudit,
    pub outcome: Outcome,
    /// Relative quadrature error of each `V_j` at `t = 0` (working vs half-resolution grid).
    pub quadrature_error: QuadratureError,
    pub directions: Vec<Point>,
    pub final_state: FlowState,
    pub probe: Option<ProbeReport>,
    pub wall_time: Duration,
}

impl Trajectory {
    pub fn converged(&self) -> bool {
        matches!(self.outcome, Outcome::Converged { .. })
    }

    pub fn r_hat(&self) -> Option<f64> {
        match self.outcome {
            Outcome::Converged { r_hat, .. } => Some(r_hat),
            _ => None,
        }
    }

    /// Whether every enabled monitor passed.
    pub fn monitors_pass(&self) -> bool {
        !matches!(self.outcome, Outcome::MonitorTrip { .. }) && self.probe.as_ref().is_none_or(ProbeReport::passes)
    }
}

/// Best-fit ball `(r̂, d_ball)` about the Steiner point.
fn ball_fit(grid: &SphereGrid, state: &FlowState) -> (f64, f64) {
    let p = &state.steiner;
    let mut mean = 0.0;
    for ((z, v), w) in grid.nodes().iter().zip(&state.s).zip(grid.weights()) {
        mean += (v - dot(p, z)) * w;
    }
    let r = mean / grid.omega();
    let d = grid
        .nodes()
        .iter()
        .zip(&state.s)
        .map(|(z, v)| (v - r - dot(p, z)).abs())
        .fold(0.0, f64::max);
    (r, d)
}

fn half_resolution(cfg: &FlowConfig) -> usize {
    let min = if cfg.n == 1 { MIN_CIRCLE_NODES } else { MIN_LATITUDES };
    (cfg.resolution / 2).max(min)
}

/// Runs the flow described by `cfg`.
pub fn run(cfg: &FlowConfig) -> Result<Trajectory> {
    run_with(cfg, |_| {})
}

/// Like [`run`], calling `observe` on every diagnostic record as it is produced.
pub fn run_with(cfg: &FlowConfig, mut observe: impl FnMut(&DiagRecord)) -> Result<Trajectory> {
    cfg.validate()?;
    let started = Instant::now();
    let grid = SphereGrid::new(cfg.n, cfg.resolution)?;
    let s0 = make_shape(&cfg.shape, &grid)?;

    let coarse_grid = SphereGrid::new(cfg.n, half_resolution(cfg))?;
    let coarse = volumes::quermassintegrals(&coarse_grid, &make_shape(&cfg.shape, &coarse_grid)?)?;
    let fine = volumes::quermassintegrals(&grid, &s0)?;
    let quadrature_error = QuadratureError::richardson(&fine, &coarse);

    let speed = cfg.speed_spec();
    let probe = match &speed {
        SpeedSpec::Nonhomogeneous { profile, .. } => Some(admissibility_probe(profile.as_ref())),
        SpeedSpec::Homogeneous { .. } => None,
    };
    let engine = FlowEngine::new(grid, speed, cfg.constraint_spec(), cfg.projection)?;
    let mut state = engine.initial_state(s0)?;
    let directions = diagnostics::direction_sample(cfg.n, RANDOM_DIRECTIONS, cfg.seed);

    let grid = engine.grid().clone();
    let n = cfg.n;
    let k = cfg.k;
    let omega = grid.omega();
    let check_every: u64 = if n == 1 { 1 } else { 10 };

    let mut records = Vec::new();
    let mut audit = StepAudit::default();
    let mut step: u64 = 0;
    let mut record_count: usize = 0;

    let mut take = |state: &FlowState, step: u64, force_reflection: bool, records: &mut Vec<DiagRecord>| {
        let reflect = cfg.reflection_every > 0 && (force_reflection || record_count.is_multiple_of(cfg.reflection_every));
        let rec = diagnostics::snapshot(&engine, state, step, reflect.then_some(directions.as_slice()));
        record_count += 1;
        observe(&rec);
        records.push(rec);
    };

    let outcome = loop {
        let (r_hat, d_ball) = if step.is_multiple_of(check_every) { ball_fit(&grid, &state) } else { (1.0, f64::INFINITY) };
        if d_ball < cfg.tol_conv * r_hat {
            let residual = match (state.target, engine.constraint().value(r_hat, r_hat)) {
                (Some(c0), Some(g)) => (g - c0).abs() / c0.abs(),
                _ => f64::NAN,
            };
            break Outcome::Converged { r_hat, residual };
        }
        if state.t >= cfg.t_max {
            break Outcome::TimeLimit;
        }
        if step >= MAX_STEPS {
            break Outcome::StepLimit;
        }
        if step.is_multiple_of(cfg.snapshot_every as u64) {
            take(&state, step, false, &mut records);
        }

        let dt = engine.stable_dt(&state, cfg.cfl).min(cfg.t_max - state.t);
        let max_speed = state.speed.max_speed();
        let tol_step = 10.0 * dt * dt * max_speed * max_speed * omega;
        let before = state.volumes.clone();
        let iso_before = volumes::isoperimetric_ratio(&before, n + 1 - k);
        engine.step_in_place(&mut state, dt)?;
        step += 1;

        let v = &state.volumes;
        let rounding = 64.0 * f64::EPSILON;
        let tol_v = tol_step + rounding * v.get(n + 1);
        let tol_q = tol_step + rounding * v.get(n + 1 - k);
        let d_vol = v.get(n + 1) - before.get(n + 1);
        audit.steps = step;
        audit.max_step_tolerance = audit.max_step_tolerance.max(tol_step);
        audit.max_volume_change = audit.max_volume_change.max(d_vol.abs());
        audit.volume_decrease.update(-d_vol, state.t, tol_v);
        if !engine.constraint().is_external() {
            audit.quermass_increase.update(v.get(n + 1 - k) - before.get(n + 1 - k), state.t, tol_q);
        }
        let iso = volumes::isoperimetric_ratio(v, n + 1 - k);
        audit.ratio_increase.update(iso - iso_before, state.t, tol_step + rounding * iso);
        let stab = |m: &volumes::MixedVolumes| m.get(1).powi(2) - m.get(0) * m.get(2);
        let s_scale = v.get(1).powi(2);
        audit
            .stability_increase
            .update(stab(v) - stab(&before), state.t, tol_step + rounding * s_scale);
        let sandwich = if engine.constraint().is_external() { 0.0 } else { state.global.sandwich_violation() };
        audit.sandwich = audit.sandwich.max(sandwich);
        if engine.projects() {
            if let (Some(c0), Some(c)) = (state.target, engine.constraint_value(v)) {
                audit.constraint_drift = audit.constraint_drift.max((c - c0).abs() / c0.abs());
            }
        }

        let trip = |monitor: &str, detail: String| Outcome::MonitorTrip {
            monitor: monitor.into(),
            t: state.t,
            detail,
        };
        if sandwich > SANDWICH_LIMIT {
            break trip("sandwich", format!("phi outside its bounds by {sandwich:.3e} (relative)"));
        }
        if audit.constraint_drift > CONSTRAINT_DRIFT_LIMIT {
            break trip("constraint", format!("relative drift {:.3e}", audit.constraint_drift));
        }
        if audit.volume_decrease.exceed > 0 {
            break trip("volume", format!("V_{} decreased by {:.3e}", n + 1, audit.volume_decrease.value));
        }
        if audit.quermass_increase.exceed > 0 {
            break trip("quermass", format!("V_{} increased by {:.3e}", n + 1 - k, audit.quermass_increase.value));
        }
        if audit.ratio_increase.exceed > 0 {
            break trip("isoperimetric", format!("I_{} increased by {:.3e}", n + 1 - k, audit.ratio_increase.value));
        }
    };

    take(&state, step, true, &mut records);

    Ok(Trajectory {
        config: cfg.clone(),
        engine,
        records,
        audit,
        outcome,
        quadrature_error,
        directions,
        final_state: state,
        probe,
        wall_time: started.elapsed(),
    })
}
