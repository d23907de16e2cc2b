use std::fmt;
use std::sync::Arc;

/// A scalar speed profile `μ` applied to `F = E_k^{1/k}`.
pub trait SpeedProfile: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    fn value(&self, z: f64) -> f64;
    fn derivative(&self, z: f64) -> f64;
    fn second_derivative(&self, z: f64) -> f64;
}

/// `μ(z) = z^α`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Power {
    pub alpha: f64,
}

impl SpeedProfile for Power {
    fn name(&self) -> String {
        format!("power:{}", self.alpha)
    }
    fn value(&self, z: f64) -> f64 {
        z.powf(self.alpha)
    }
    fn derivative(&self, z: f64) -> f64 {
        self.alpha * z.powf(self.alpha - 1.0)
    }
    fn second_derivative(&self, z: f64) -> f64 {
        self.alpha * (self.alpha - 1.0) * z.powf(self.alpha - 2.0)
    }
}

/// `μ(z) = z + z³`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearPlusCubic;

impl SpeedProfile for LinearPlusCubic {
    fn name(&self) -> String {
        "z+z^3".into()
    }
    fn value(&self, z: f64) -> f64 {
        z + z * z * z
    }
    fn derivative(&self, z: f64) -> f64 {
        1.0 + 3.0 * z * z
    }
    fn second_derivative(&self, z: f64) -> f64 {
        6.0 * z
    }
}

/// `μ(z) = e^z - 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpMinusOne;

impl SpeedProfile for ExpMinusOne {
    fn name(&self) -> String {
        "exp-1".into()
    }
    fn value(&self, z: f64) -> f64 {
        z.exp_m1()
    }
    fn derivative(&self, z: f64) -> f64 {
        z.exp()
    }
    fn second_derivative(&self, z: f64) -> f64 {
        z.exp()
    }
}

#[derive(Clone, Debug)]
pub enum SpeedSpec {
    /// Speed `E_k^{α/k}`.
    Homogeneous { k: usize, alpha: f64 },
    /// Speed `μ(E_k^{1/k})`.
    Nonhomogeneous { k: usize, profile: Arc<dyn SpeedProfile> },
}

impl SpeedSpec {
    pub fn k(&self) -> usize {
        match self {
            SpeedSpec::Homogeneous { k, .. } | SpeedSpec::Nonhomogeneous { k, .. } => *k,
        }
    }

    /// Homogeneity degree of the speed in the curvatures, if any.
    pub fn alpha(&self) -> Option<f64> {
        match self {
            SpeedSpec::Homogeneous { alpha, .. } => Some(*alpha),
            SpeedSpec::Nonhomogeneous { .. } => None,
        }
    }

    /// `(μ(F), μ'(F))` at `F = E_k^{1/k}`, given `E_k`.
    #[inline]
    pub fn eval(&self, ek: f64) -> (f64, f64) {
        match self {
            SpeedSpec::Homogeneous { k, alpha } => {
                let psi = if *k == 1 { ek.powf(*alpha) } else { ek.powf(alpha / *k as f64) };
                // μ'(F) = α F^{α-1} = α ψ / F
                let f = if *k == 1 { ek } else { ek.powf(1.0 / *k as f64) };
                (psi, alpha * psi / f)
            }
            SpeedSpec::Nonhomogeneous { k, profile } => {
                let f = if *k == 1 { ek } else { ek.powf(1.0 / *k as f64) };
                (profile.value(f), profile.derivative(f))
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SpeedSpec::Homogeneous { k, alpha } => format!("E_{k}^({alpha}/{k})"),
            SpeedSpec::Nonhomogeneous { k, profile } => format!("mu(E_{k}^(1/{k})), mu = {}", profile.name()),
        }
    }
}

/// Outcome of the numerical admissibility probe for a nonhomogeneous profile.
#[derive(Clone, Debug, Default)]
pub struct ProbeReport {
    pub warnings: Vec<String>,
}

impl ProbeReport {
    pub fn passes(&self) -> bool {
        self.warnings.is_empty()
    }
}

const PROBE_LO: f64 = 1e-4;
const PROBE_HI: f64 = 1e4;
const PROBE_PER_DECADE: usize = 20;
/// Lower bound on `μ' z² / μ` at the right end taken to mean "large".
const PROBE_RIGHT_RATIO: f64 = 100.0;
/// Upper bound on `z μ' / μ` over the left-most two decades.
const PROBE_LEFT_BOUND: f64 = 1e3;

/// Samples the structural conditions on `μ` under which the flow is known to converge
/// on a log grid `z ∈ [1e-4, 1e4]`: positivity and monotonicity of `μ`,
/// convexity of `ξ ↦ μ(1/ξ)` (`z μ'' + 2μ' ≥ 0`), `μ' z² / μ` increasing and
/// large at the right end, and `z μ' / μ` bounded at the left end. Failures
/// are warnings; the conditions are sufficient, not necessary.
pub fn admissibility_probe(profile: &dyn SpeedProfile) -> ProbeReport {
    let decades = (PROBE_HI / PROBE_LO).log10().round() as usize;
    let count = decades * PROBE_PER_DECADE + 1;
    let zs: Vec<f64> = (0..count)
        .map(|i| PROBE_LO * 10f64.powf(i as f64 / PROBE_PER_DECADE as f64))
        .collect();

    let mut report = ProbeReport::default();
    let mut warn = |msg: String| {
        if !report.warnings.contains(&msg) {
            report.warnings.push(msg);
        }
    };

    let mut right_ratio = Vec::with_capacity(count);
    for &z in &zs {
        let (m, d, dd) = (profile.value(z), profile.derivative(z), profile.second_derivative(z));
        if !(m.is_finite() && d.is_finite() && dd.is_finite()) {
            warn(format!("non-finite evaluation of mu at z = {z:.1e}"));
            right_ratio.push(f64::NAN);
            continue;
        }
        if m <= 0.0 {
            warn(format!("mu(z) <= 0 at z = {z:.1e}"));
        }
        if d <= 0.0 {
            warn(format!("mu'(z) <= 0 at z = {z:.1e}"));
        }
        if z * dd + 2.0 * d < -1e-12 * d.abs() {
            warn(format!("mu(1/xi) not convex (z mu'' + 2 mu' < 0) at z = {z:.1e}"));
        }
        right_ratio.push(d * z * z / m);
    }

    for w in right_ratio.windows(2) {
        if w[0].is_finite() && w[1].is_finite() && w[1] < w[0] * (1.0 - 1e-9) {
            warn("mu' z^2 / mu is not increasing".into());
            break;
        }
    }
    match right_ratio.last() {
        Some(r) if r.is_finite() && *r >= PROBE_RIGHT_RATIO => {}
        Some(r) => warn(format!("mu' z^2 / mu = {r:.3e} at z = {PROBE_HI:.0e} is not large")),
        None => {}
    }

    let left: Vec<f64> = zs
        .iter()
        .take(2 * PROBE_PER_DECADE + 1)
        .map(|&z| z * profile.derivative(z) / profile.value(z))
        .collect();
    if left.iter().any(|r| !r.is_finite() || *r > PROBE_LEFT_BOUND) || left[0] > 2.0 * left[left.len() - 1] {
        warn("z mu' / mu is not bounded as z -> 0".into());
    }

    report
}
