use std::fmt;
use std::sync::Arc;

/// A constraint `G(a, b)` on `(r_{n+1-k}, r_{n+1})`, non-decreasing in both arguments.
pub trait ConstraintFunction: Send + Sync + fmt::Debug {
    fn value(&self, a: f64, b: f64) -> f64;
    /// `(G_a, G_b)`.
    fn partials(&self, a: f64, b: f64) -> (f64, f64);
}

/// `G(a, b) = a^θ b^{1-θ}`, `θ ∈ [0, 1]`; `θ = 0` preserves volume, `θ = 1`
/// preserves `V_{n+1-k}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometricMean {
    pub theta: f64,
}

impl ConstraintFunction for GeometricMean {
    fn value(&self, a: f64, b: f64) -> f64 {
        a.powf(self.theta) * b.powf(1.0 - self.theta)
    }

    fn partials(&self, a: f64, b: f64) -> (f64, f64) {
        let g = self.value(a, b);
        (self.theta * g / a, (1.0 - self.theta) * g / b)
    }
}

/// A prescribed global term, given the time and the area-weighted mean speed
/// `(1/V_n) ∫ μ dμ_t` of the current body.
pub trait PhiSchedule: Send + Sync + fmt::Debug {
    fn phi(&self, t: f64, mean_speed: f64) -> f64;
}

/// `φ = factor × mean speed`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledMeanSpeed {
    pub factor: f64,
}

impl PhiSchedule for ScaledMeanSpeed {
    fn phi(&self, _t: f64, mean_speed: f64) -> f64 {
        self.factor * mean_speed
    }
}

/// Piecewise-linear `φ(t)` through `(t, φ)` knots, constant beyond the ends.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiTable {
    pub knots: Vec<(f64, f64)>,
}

impl PhiSchedule for PhiTable {
    fn phi(&self, t: f64, _mean_speed: f64) -> f64 {
        let k = &self.knots;
        if k.is_empty() {
            return 0.0;
        }
        if t <= k[0].0 {
            return k[0].1;
        }
        for w in k.windows(2) {
            let ((t0, p0), (t1, p1)) = (w[0], w[1]);
            if t <= t1 {
                return p0 + (p1 - p0) * (t - t0) / (t1 - t0);
            }
        }
        k[k.len() - 1].1
    }
}

#[derive(Clone, Debug)]
pub enum ConstraintSpec {
    /// `G(a, b) = b`.
    PreserveVolume,
    /// `G(a, b) = a`.
    PreserveQuermass,
    General(Arc<dyn ConstraintFunction>),
    ExternalPhi(Arc<dyn PhiSchedule>),
}

impl ConstraintSpec {
    /// `G(a, b)`, or `None` for a prescribed global term.
    pub fn value(&self, a: f64, b: f64) -> Option<f64> {
        match self {
            ConstraintSpec::PreserveVolume => Some(b),
            ConstraintSpec::PreserveQuermass => Some(a),
            ConstraintSpec::General(g) => Some(g.value(a, b)),
            ConstraintSpec::ExternalPhi(_) => None,
        }
    }

    pub fn partials(&self, a: f64, b: f64) -> Option<(f64, f64)> {
        match self {
            ConstraintSpec::PreserveVolume => Some((0.0, 1.0)),
            ConstraintSpec::PreserveQuermass => Some((1.0, 0.0)),
            ConstraintSpec::General(g) => Some(g.partials(a, b)),
            ConstraintSpec::ExternalPhi(_) => None,
        }
    }

    pub fn is_external(&self) -> bool {
        matches!(self, ConstraintSpec::ExternalPhi(_))
    }
}
