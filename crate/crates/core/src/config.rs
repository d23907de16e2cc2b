//! Flat `key = value` run configuration.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use crate::error::{FlowError, Result};
use crate::flow::{
    ConstraintSpec, ExpMinusOne, GeometricMean, LinearPlusCubic, PhiTable, Power, ScaledMeanSpeed, SpeedProfile,
    SpeedSpec,
};
use crate::grid::{MIN_CIRCLE_NODES, MIN_LATITUDES};
use crate::shapes::ShapeSpec;

/// Built-in profiles for the nonhomogeneous speed `μ(E_k^{1/k})`.
#[derive(Clone, Debug, PartialEq)]
pub enum MuChoice {
    LinearPlusCubic,
    ExpMinusOne,
    Power(f64),
}

impl MuChoice {
    pub fn profile(&self) -> Arc<dyn SpeedProfile> {
        match self {
            MuChoice::LinearPlusCubic => Arc::new(LinearPlusCubic),
            MuChoice::ExpMinusOne => Arc::new(ExpMinusOne),
            MuChoice::Power(alpha) => Arc::new(Power { alpha: *alpha }),
        }
    }

    fn parse(text: &str) -> Option<Self> {
        match text {
            "z+z^3" => Some(MuChoice::LinearPlusCubic),
            "exp-1" => Some(MuChoice::ExpMinusOne),
            _ => text
                .strip_prefix("power:")
                .and_then(|a| a.parse().ok())
                .map(MuChoice::Power),
        }
    }

    fn render(&self) -> String {
        match self {
            MuChoice::LinearPlusCubic => "z+z^3".into(),
            MuChoice::ExpMinusOne => "exp-1".into(),
            MuChoice::Power(a) => format!("power:{a}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpeedChoice {
    Alpha(f64),
    Mu(MuChoice),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConstraintChoice {
    Volume,
    Quermass,
    /// `G(a, b) = a^θ b^{1-θ}`.
    Mixed(f64),
    /// `φ = factor × mean speed`.
    ExternalScaled(f64),
    /// Piecewise-linear `φ(t)`.
    ExternalTable(Vec<(f64, f64)>),
}

impl ConstraintChoice {
    pub fn spec(&self) -> ConstraintSpec {
        match self {
            ConstraintChoice::Volume => ConstraintSpec::PreserveVolume,
            ConstraintChoice::Quermass => ConstraintSpec::PreserveQuermass,
            ConstraintChoice::Mixed(theta) => ConstraintSpec::General(Arc::new(GeometricMean { theta: *theta })),
            ConstraintChoice::ExternalScaled(f) => ConstraintSpec::ExternalPhi(Arc::new(ScaledMeanSpeed { factor: *f })),
            ConstraintChoice::ExternalTable(knots) => {
                ConstraintSpec::ExternalPhi(Arc::new(PhiTable { knots: knots.clone() }))
            }
        }
    }

    fn parse(text: &str) -> Option<Self> {
        match text {
            "volume" => return Some(ConstraintChoice::Volume),
            "quermass" => return Some(ConstraintChoice::Quermass),
            _ => {}
        }
        let (kind, arg) = text.split_once(':')?;
        match kind {
            "mixed" => arg.parse().ok().map(ConstraintChoice::Mixed),
            "external-scaled" => arg.parse().ok().map(ConstraintChoice::ExternalScaled),
            "external-table" => {
                let knots = arg
                    .split(',')
                    .map(|pair| {
                        let (t, p) = pair.split_once(':')?;
                        Some((t.trim().parse().ok()?, p.trim().parse().ok()?))
                    })
                    .collect::<Option<Vec<(f64, f64)>>>()?;
                Some(ConstraintChoice::ExternalTable(knots))
            }
            _ => None,
        }
    }

    fn render(&self) -> String {
        match self {
            ConstraintChoice::Volume => "volume".into(),
            ConstraintChoice::Quermass => "quermass".into(),
            ConstraintChoice::Mixed(t) => format!("mixed:{t}"),
            ConstraintChoice::ExternalScaled(f) => format!("external-scaled:{f}"),
            ConstraintChoice::ExternalTable(k) => {
                let parts: Vec<String> = k.iter().map(|(t, p)| format!("{t}:{p}")).collect();
                format!("external-table:{}", parts.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowConfig {
    pub n: usize,
    pub k: usize,
    pub speed: SpeedChoice,
    pub constraint: ConstraintChoice,
    /// Node count (n = 1) or latitude count (n = 2).
    pub resolution: usize,
    pub cfl: f64,
    pub projection: bool,
    pub tol_conv: f64,
    pub t_max: f64,
    /// Steps between diagnostic records.
    pub snapshot_every: usize,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub shape: ShapeSpec,
    /// Records between reflection evaluations; 0 disables them.
    pub reflection_every: usize,
}

pub const DEFAULT_CFL: f64 = 0.2;
pub const DEFAULT_TOL_CONV: f64 = 1e-4;
pub const DEFAULT_SNAPSHOT_EVERY: usize = 50;
pub const DEFAULT_T_MAX: f64 = 100.0;

impl FlowConfig {
    /// A configuration with defaults for everything except the model choices.
    pub fn new(n: usize, k: usize, speed: SpeedChoice, constraint: ConstraintChoice) -> Self {
        FlowConfig {
            n,
            k,
            speed,
            constraint,
            resolution: default_resolution(n),
            cfl: DEFAULT_CFL,
            projection: true,
            tol_conv: DEFAULT_TOL_CONV,
            t_max: DEFAULT_T_MAX,
            snapshot_every: DEFAULT_SNAPSHOT_EVERY,
            out_dir: PathBuf::from("out"),
            seed: 0,
            shape: default_shape(n),
            reflection_every: 1,
        }
    }

    pub fn speed_spec(&self) -> SpeedSpec {
        match &self.speed {
            SpeedChoice::Alpha(alpha) => SpeedSpec::Homogeneous { k: self.k, alpha: *alpha },
            SpeedChoice::Mu(mu) => SpeedSpec::Nonhomogeneous {
                k: self.k,
                profile: mu.profile(),
            },
        }
    }

    pub fn constraint_spec(&self) -> ConstraintSpec {
        self.constraint.spec()
    }

    /// Checks the cross-field invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: String| {
            Err(FlowError::InvalidConfig {
                line: None,
                key: Some(key.into()),
                message,
            })
        };
        if !(1..=2).contains(&self.n) {
            return bad("n", format!("n = {} must be 1 or 2", self.n));
        }
        if !(1..=self.n).contains(&self.k) {
            return bad("k", format!("k = {} must lie in 1..={}", self.k, self.n));
        }
        match &self.speed {
            SpeedChoice::Alpha(a) if !(*a > 0.0 && a.is_finite()) => {
                return bad("alpha", format!("alpha = {a} must be positive"))
            }
            SpeedChoice::Mu(MuChoice::Power(a)) if !(*a > 0.0 && a.is_finite()) => {
                return bad("mu", format!("power exponent {a} must be positive"))
            }
            _ => {}
        }
        match &self.constraint {
            ConstraintChoice::Mixed(t) if !(0.0..=1.0).contains(t) => {
                return bad("constraint", format!("theta = {t} must lie in [0, 1]"))
            }
            ConstraintChoice::ExternalScaled(f) if !(*f > 0.0 && f.is_finite()) => {
                return bad("constraint", format!("factor {f} must be positive"))
            }
            ConstraintChoice::ExternalTable(k) if k.is_empty() || k.windows(2).any(|w| w[1].0 <= w[0].0) => {
                return bad("constraint", "table times must be non-empty and increasing".into())
            }
            _ => {}
        }
        let min = if self.n == 1 { MIN_CIRCLE_NODES } else { MIN_LATITUDES };
        if self.resolution < min {
            return bad("resolution", format!("resolution {} is below {min}", self.resolution));
        }
        if !(self.cfl > 0.0 && self.cfl.is_finite()) {
            return bad("cfl", format!("cfl = {} must be positive", self.cfl));
        }
        if !(self.tol_conv > 0.0) {
            return bad("tol_conv", format!("tol_conv = {} must be positive", self.tol_conv));
        }
        if !(self.t_max > 0.0) {
            return bad("t_max", format!("t_max = {} must be positive", self.t_max));
        }
        if self.snapshot_every == 0 {
            return bad("snapshot_every", "snapshot_every must be at least 1".into());
        }
        if let Err(e) = self.shape.validate(self.n) {
            return bad("shape", e.to_string());
        }
        Ok(())
    }
}

fn default_resolution(n: usize) -> usize {
    if n == 2 {
        48
    } else {
        256
    }
}

fn default_shape(n: usize) -> ShapeSpec {
    if n == 2 {
        ShapeSpec::ellipsoid(&[1.5, 1.2, 1.0])
    } else {
        ShapeSpec::ellipsoid(&[2.0, 1.0])
    }
}

const KEYS: &[&str] = &[
    "n",
    "k",
    "alpha",
    "mu",
    "constraint",
    "resolution",
    "cfl",
    "projection",
    "tol_conv",
    "t_max",
    "snapshot_every",
    "out_dir",
    "seed",
    "shape",
    "reflection_every",
];

/// Parses `key = value` lines; `#` starts a comment. `n`, `k`, one of
/// `alpha`/`mu`, and `constraint` are required.
pub fn parse_config(text: &str) -> Result<FlowConfig> {
    let mut entries: Vec<(usize, &str, &str)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |key: Option<&str>, message: String| FlowError::InvalidConfig {
            line: Some(line),
            key: key.map(str::to_string),
            message,
        };
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| err(None, format!("expected `key = value`, got `{body}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(err(Some(key), "unknown key".into()));
        }
        if entries.iter().any(|(_, k, _)| *k == key) {
            return Err(err(Some(key), "duplicate key".into()));
        }
        entries.push((line, key, value));
    }

    let fail = |key: &str, line: Option<usize>, message: String| FlowError::InvalidConfig {
        line,
        key: Some(key.into()),
        message,
    };
    let lookup = |key: &str| -> Option<(usize, String)> {
        entries.iter().find(|(_, k, _)| *k == key).map(|&(l, _, v)| (l, v.to_string()))
    };
    let parse_num = |key: &str| -> Result<Option<f64>> {
        match lookup(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| fail(key, Some(line), format!("cannot parse `{v}` as a number"))),
        }
    };
    let parse_int = |key: &str| -> Result<Option<u64>> {
        match lookup(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| fail(key, Some(line), format!("cannot parse `{v}` as a whole number"))),
        }
    };
    let line_of = |key: &str| lookup(key).map(|(l, _)| l);
    let required = |key: &str| fail(key, None, "missing required key".into());

    let n = parse_int("n")?.ok_or_else(|| required("n"))? as usize;
    let k = parse_int("k")?.ok_or_else(|| required("k"))? as usize;
    let speed = match (lookup("alpha"), lookup("mu")) {
        (Some(_), Some((line, _))) => return Err(fail("mu", Some(line), "give either alpha or mu, not both".into())),
        (Some(_), None) => SpeedChoice::Alpha(parse_num("alpha")?.unwrap()),
        (None, Some((line, v))) => SpeedChoice::Mu(
            MuChoice::parse(&v).ok_or_else(|| fail("mu", Some(line), format!("unknown profile `{v}`")))?,
        ),
        (None, None) => return Err(required("alpha")),
    };
    let constraint = match lookup("constraint") {
        Some((line, v)) => ConstraintChoice::parse(&v)
            .ok_or_else(|| fail("constraint", Some(line), format!("unknown constraint `{v}`")))?,
        None => return Err(required("constraint")),
    };

    let mut cfg = FlowConfig::new(n, k, speed, constraint);
    if let Some(r) = parse_int("resolution")? {
        cfg.resolution = r as usize;
    } else {
        cfg.resolution = default_resolution(n);
    }
    if let Some(v) = parse_num("cfl")? {
        cfg.cfl = v;
    }
    if let Some((line, v)) = lookup("projection") {
        cfg.projection = match v.as_str() {
            "on" | "true" | "yes" | "1" => true,
            "off" | "false" | "no" | "0" => false,
            _ => return Err(fail("projection", Some(line), format!("expected on/off, got `{v}`"))),
        };
    }
    if let Some(v) = parse_num("tol_conv")? {
        cfg.tol_conv = v;
    }
    if let Some(v) = parse_num("t_max")? {
        cfg.t_max = v;
    }
    if let Some(v) = parse_int("snapshot_every")? {
        cfg.snapshot_every = v as usize;
    }
    if let Some((_, v)) = lookup("out_dir") {
        cfg.out_dir = PathBuf::from(v);
    }
    if let Some(v) = parse_int("seed")? {
        cfg.seed = v;
    }
    if let Some((line, v)) = lookup("shape") {
        cfg.shape = v.parse().map_err(|e: FlowError| fail("shape", Some(line), e.to_string()))?;
    } else {
        cfg.shape = default_shape(n);
    }
    if let Some(v) = parse_int("reflection_every")? {
        cfg.reflection_every = v as usize;
    }

    cfg.validate().map_err(|e| match e {
        FlowError::InvalidConfig { key, message, .. } => FlowError::InvalidConfig {
            line: key.as_deref().and_then(line_of),
            key,
            message,
        },
        other => other,
    })?;
    Ok(cfg)
}

/// Inverse of [`parse_config`].
pub fn render(cfg: &FlowConfig) -> String {
    let mut out = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    put("n", cfg.n.to_string());
    put("k", cfg.k.to_string());
    match &cfg.speed {
        SpeedChoice::Alpha(a) => put("alpha", a.to_string()),
        SpeedChoice::Mu(m) => put("mu", m.render()),
    }
    put("constraint", cfg.constraint.render());
    put("shape", cfg.shape.to_string());
    put("resolution", cfg.resolution.to_string());
    put("cfl", cfg.cfl.to_string());
    put("projection", if cfg.projection { "on" } else { "off" }.into());
    put("tol_conv", cfg.tol_conv.to_string());
    put("t_max", cfg.t_max.to_string());
    put("snapshot_every", cfg.snapshot_every.to_string());
    put("reflection_every", cfg.reflection_every.to_string());
    put("out_dir", cfg.out_dir.display().to_string());
    put("seed", cfg.seed.to_string());
    out
}
