//! Quermassintegrals and the quantities built from them.
//!
//! With principal radii `r(z)` the surface measure pulls back to
//! `σ_n(r) dσ` and `E_j(κ) σ_n(r) = E_{n-j}(r)`, so every quermassintegral is
//! a plain sphere integral:
//!
//! ```text
//! V_m     = ∫ E_m(r) dσ                 m = 0..=n
//! V_{n+1} = ∫ (s - p·z) σ_n(r) dσ       p = Steiner point
//! ```
//!
//! Centring `V_{n+1}` at the Steiner point changes nothing in the continuum
//! (`∫ z σ_n(r) dσ = 0`) and makes the discrete value exactly translation
//! invariant.

use crate::error::{FlowError, Result};
use crate::geometry::{self, elementary_symmetric, normalized_symmetric, Phase, RadiiField};
use crate::grid::{dot, omega, Point, SphereGrid};

#[derive(Clone, Debug, PartialEq)]
pub struct MixedVolumes {
    values: Vec<f64>,
}

impl MixedVolumes {
    pub fn new(values: Vec<f64>) -> Self {
        assert!(values.len() == 3 || values.len() == 4, "need n + 2 values for n = 1, 2");
        MixedVolumes { values }
    }

    /// Dimension `n` of the hypersurface.
    pub fn dim(&self) -> usize {
        self.values.len() - 2
    }

    pub fn get(&self, j: usize) -> f64 {
        self.values[j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn omega(&self) -> f64 {
        omega(self.dim())
    }
}

pub fn steiner_point(grid: &SphereGrid, s: &[f64]) -> Point {
    let n = grid.dim();
    let c = (n + 1) as f64 / grid.omega();
    let mut p = [0.0; 3];
    for ((z, &v), &w) in grid.nodes().iter().zip(s).zip(grid.weights()) {
        for k in 0..3 {
            p[k] += v * z[k] * w;
        }
    }
    p.map(|x| c * x)
}

pub fn quermass_from_radii(grid: &SphereGrid, s: &[f64], radii: &RadiiField, steiner: &Point) -> MixedVolumes {
    let n = grid.dim();
    let mut v = vec![0.0; n + 2];
    for (i, (z, &w)) in grid.nodes().iter().zip(grid.weights()).enumerate() {
        let r = radii.at(i);
        for (m, slot) in v.iter_mut().enumerate().take(n + 1) {
            *slot += normalized_symmetric(r, m) * w;
        }
        v[n + 1] += (s[i] - dot(steiner, z)) * elementary_symmetric(r, n) * w;
    }
    MixedVolumes::new(v)
}

/// Quermassintegrals of a strictly convex body.
pub fn quermassintegrals(grid: &SphereGrid, s: &[f64]) -> Result<MixedVolumes> {
    let tau = geometry::tau_field(grid, s);
    let radii = geometry::radii_unchecked(&tau);
    geometry::check_floor(&radii, geometry::convexity_floor(grid, s), Phase::Evolving { t: f64::NAN })?;
    Ok(quermass_from_radii(grid, s, &radii, &steiner_point(grid, s)))
}

/// Radius of the ball sharing `V_j`.
pub fn j_radius(v: &MixedVolumes, j: usize) -> f64 {
    assert!((1..=v.dim() + 1).contains(&j));
    (v.get(j) / v.omega()).powf(1.0 / j as f64)
}

pub fn all_radii(v: &MixedVolumes) -> Vec<f64> {
    (1..=v.dim() + 1).map(|j| j_radius(v, j)).collect()
}

/// `I_ℓ = V_ℓ^{n+1} / (V_{n+1}^ℓ V_0^{n+1-ℓ})`, evaluated in logs.
pub fn isoperimetric_ratio(v: &MixedVolumes, l: usize) -> f64 {
    let n = v.dim();
    assert!((1..=n).contains(&l));
    let (nf, lf) = ((n + 1) as f64, l as f64);
    (nf * v.get(l).ln() - lf * v.get(n + 1).ln() - (nf - lf) * v.get(0).ln()).exp()
}

/// `Ē_k = V_{n-k} / V_n`, the area-weighted mean of `E_k`.
pub fn mixed_ratio(v: &MixedVolumes, k: usize) -> f64 {
    let n = v.dim();
    v.get(n - k) / v.get(n)
}

/// Relative quadrature error per `V_j`, from comparing a working grid with a
/// half-resolution one.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureError {
    pub relative: Vec<f64>,
}

impl QuadratureError {
    pub fn richardson(fine: &MixedVolumes, coarse: &MixedVolumes) -> Self {
        let relative = fine
            .as_slice()
            .iter()
            .zip(coarse.as_slice())
            .map(|(f, c)| ((f - c) / f).abs())
            .collect();
        QuadratureError { relative }
    }

    pub fn zero(n: usize) -> Self {
        QuadratureError {
            relative: vec![0.0; n + 2],
        }
    }
}

#[derive(Clone, Debug)]
pub struct Residual {
    pub label: String,
    pub value: f64,
    pub tolerance: f64,
}

impl Residual {
    pub fn holds(&self) -> bool {
        self.value >= -self.tolerance
    }
}

#[derive(Clone, Debug)]
pub struct AfReport {
    /// `V_{n+1-j}² - V_{n-j} V_{n+2-j}`, `j = 1..=n`.
    pub log_concavity: Vec<Residual>,
    /// `V_{n+1-j}^{n+1-i} - ω^{j-i} V_{n+1-i}^{n+1-j}`, `0 ≤ i < j < n+1`.
    pub radius_ordering: Vec<Residual>,
    /// `V_1² - V_0 V_2`.
    pub stability: f64,
}

impl AfReport {
    pub fn holds(&self) -> bool {
        self.log_concavity.iter().chain(&self.radius_ordering).all(Residual::holds)
    }

    pub fn worst(&self) -> Option<&Residual> {
        self.log_concavity
            .iter()
            .chain(&self.radius_ordering)
            .min_by(|a, b| (a.value + a.tolerance).total_cmp(&(b.value + b.tolerance)))
    }
}

/// Safety factor applied to the estimated quadrature error.
pub const AF_SAFETY: f64 = 10.0;
const AF_FLOOR: f64 = 1e-12;

pub fn af_audit(v: &MixedVolumes, err: &QuadratureError) -> AfReport {
    let n = v.dim();
    let om = v.omega();
    let rel = |j: usize| err.relative[j];

    let log_concavity = (1..=n)
        .map(|j| {
            let (a, b, c) = (n + 1 - j, n - j, n + 2 - j);
            let scale = v.get(a).powi(2);
            Residual {
                label: format!("V{a}^2 - V{b} V{c}"),
                value: v.get(a).powi(2) - v.get(b) * v.get(c),
                tolerance: (AF_SAFETY * (2.0 * rel(a) + rel(b) + rel(c)) + AF_FLOOR) * scale,
            }
        })
        .collect();

    let mut radius_ordering = Vec::new();
    for j in 1..=n {
        for i in 0..j {
            let (a, b) = (n + 1 - j, n + 1 - i);
            let (pa, pb) = ((n + 1 - i) as i32, (n + 1 - j) as i32);
            let lhs = v.get(a).powi(pa);
            let rhs = om.powi((j - i) as i32) * v.get(b).powi(pb);
            let scale = lhs.abs().max(rhs.abs());
            radius_ordering.push(Residual {
                label: format!("V{a}^{pa} - w^{} V{b}^{pb}", j - i),
                value: lhs - rhs,
                tolerance: (AF_SAFETY * (pa as f64 * rel(a) + pb as f64 * rel(b)) + AF_FLOOR) * scale,
            });
        }
    }

    AfReport {
        log_concavity,
        radius_ordering,
        stability: v.get(1).powi(2) - v.get(0) * v.get(2),
    }
}

/// Inner and (upper estimate of the) outer radius.
#[derive(Clone, Copy, Debug)]
pub struct InOutRadii {
    pub rho_minus: f64,
    pub rho_plus: f64,
    pub center: Point,
}

fn min_gap(grid: &SphereGrid, s: &[f64], p: &Point) -> f64 {
    grid.nodes()
        .iter()
        .zip(s)
        .map(|(z, v)| v - dot(p, z))
        .fold(f64::INFINITY, f64::min)
}

const INBALL_ITERATIONS: usize = 200;

/// Chebyshev centre by damped ascent on the concave `p ↦ min_z (s(z) - p·z)`,
/// started at the Steiner point. The ascent direction is minus the mean of the
/// normals within `step` of the current minimum; the step halves whenever the
/// objective does not improve.
pub fn inball(grid: &SphereGrid, s: &[f64]) -> (f64, Point) {
    let mut p = steiner_point(grid, s);
    let mut f = min_gap(grid, s, &p);
    let scale = grid.integrate(s) / grid.omega();
    let mut step = 0.1 * scale;
    let stop = 1e-12 * scale;

    for _ in 0..INBALL_ITERATIONS {
        if step < stop {
            break;
        }
        let mut d = [0.0; 3];
        let mut count = 0usize;
        for (z, v) in grid.nodes().iter().zip(s) {
            if v - dot(&p, z) <= f + step {
                for k in 0..3 {
                    d[k] -= z[k];
                }
                count += 1;
            }
        }
        let norm = dot(&d, &d).sqrt();
        if count == 0 || norm <= 1e-12 * count as f64 {
            // zero lies in the hull of the near-active normals; shrink the band
            step *= 0.5;
            continue;
        }
        let trial = [
            p[0] + step * d[0] / norm,
            p[1] + step * d[1] / norm,
            p[2] + step * d[2] / norm,
        ];
        let ft = min_gap(grid, s, &trial);
        if ft > f {
            p = trial;
            f = ft;
        } else {
            step *= 0.5;
        }
    }
    (f, p)
}

pub fn inradius_outradius(grid: &SphereGrid, s: &[f64]) -> InOutRadii {
    let (rho_minus, center) = inball(grid, s);
    let boundary = geometry::embed_boundary(grid, s);
    let reach = |p: &Point| {
        boundary
            .iter()
            .map(|x| ((x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2) + (x[2] - p[2]).powi(2)).sqrt())
            .fold(0.0, f64::max)
    };
    let rho_plus = reach(&steiner_point(grid, s)).min(reach(&center));
    InOutRadii {
        rho_minus,
        rho_plus,
        center,
    }
}

/// Hausdorff distance of two bodies sampled on the same grid: the sup-norm of
/// the difference of their support functions.
pub fn hausdorff_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(FlowError::GridMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// Lower bound on the inradius from the Diskant inequality,
/// `r_{n+1} (σ - (σ^{n+1} - 1)^{1/(n+1)})` with `σ = r_n / r_{n+1}`.
pub fn diskant_bound(v: &MixedVolumes) -> f64 {
    let n = v.dim();
    let (rn, rn1) = (j_radius(v, n), j_radius(v, n + 1));
    let sigma = rn / rn1;
    let e = (n + 1) as f64;
    rn1 * (sigma - (sigma.powf(e) - 1.0).max(0.0).powf(1.0 / e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    // Perimeter of the (2, 1) ellipse, adaptive quadrature (30 digits).
    const ELLIPSE_PERIMETER: f64 = 9.688448220547676;

    fn support(grid: &SphereGrid, f: impl Fn(&Point) -> f64) -> Vec<f64> {
        grid.nodes().iter().map(f).collect()
    }

    fn ellipsoid(axes: [f64; 3]) -> impl Fn(&Point) -> f64 {
        move |z| ((axes[0] * z[0]).powi(2) + (axes[1] * z[1]).powi(2) + (axes[2] * z[2]).powi(2)).sqrt()
    }

    #[test]
    fn ball_quermassintegrals() {
        let g = SphereGrid::new(2, 12).unwrap();
        let v = quermassintegrals(&g, &vec![2.0; g.len()]).unwrap();
        let expect = [4.0 * PI, 8.0 * PI, 16.0 * PI, 32.0 * PI];
        for (a, b) in v.as_slice().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12 * b);
        }
        for j in 1..=3 {
            assert!((j_radius(&v, j) - 2.0).abs() < 1e-13);
        }
        for l in 1..=2 {
            assert!((isoperimetric_ratio(&v, l) - 1.0).abs() < 1e-12);
        }
        assert!((mixed_ratio(&v, 1) - 0.5).abs() < 1e-14);
        assert!((mixed_ratio(&v, 2) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn ellipse_quermassintegrals() {
        let g = SphereGrid::new(1, 1024).unwrap();
        let s = support(&g, ellipsoid([2.0, 1.0, 0.0]));
        let v = quermassintegrals(&g, &s).unwrap();
        assert!((v.get(0) - 2.0 * PI).abs() < 1e-12);
        assert!((v.get(1) - ELLIPSE_PERIMETER).abs() < 1e-10);
        assert!((v.get(2) - 4.0 * PI).abs() < 1e-4);
        assert!((j_radius(&v, 1) - ELLIPSE_PERIMETER / (2.0 * PI)).abs() < 1e-10);
        assert!((j_radius(&v, 2) - 2f64.sqrt()).abs() < 1e-5);
        let i1 = ELLIPSE_PERIMETER.powi(2) / (4.0 * PI * 2.0 * PI);
        assert!((isoperimetric_ratio(&v, 1) - i1).abs() < 1e-5);
        assert!((mixed_ratio(&v, 1) - 2.0 * PI / ELLIPSE_PERIMETER).abs() < 1e-10);
        let af = af_audit(&v, &QuadratureError::zero(1));
        assert!(af.holds());
        assert!((af.log_concavity[0].value - (ELLIPSE_PERIMETER.powi(2) - 8.0 * PI * PI)).abs() < 1e-3);
    }

    #[test]
    fn ellipsoid_radii_are_ordered_and_af_holds() {
        let g = SphereGrid::new(2, 32).unwrap();
        let s = support(&g, ellipsoid([1.5, 1.2, 1.0]));
        let v = quermassintegrals(&g, &s).unwrap();
        let r = all_radii(&v);
        assert!(r[0] >= r[1] && r[1] >= r[2], "{r:?}");
        let af = af_audit(&v, &QuadratureError::zero(2));
        assert!(af.holds(), "{:?}", af.worst());
        assert!(af.stability > 0.0);
        // volume of the ellipsoid: V_3 = 3 · (4π/3) abc
        assert!((v.get(3) - 4.0 * PI * 1.8).abs() < 1e-3 * v.get(3));
    }

    #[test]
    fn ball_af_residuals_vanish() {
        let g = SphereGrid::new(2, 12).unwrap();
        let v = quermassintegrals(&g, &vec![1.3; g.len()]).unwrap();
        let af = af_audit(&v, &QuadratureError::zero(2));
        for r in af.log_concavity.iter().chain(&af.radius_ordering) {
            let scale = r.tolerance / 1e-12;
            assert!(r.value.abs() < 1e-10 * scale, "{}: {}", r.label, r.value);
        }
    }

    #[test]
    fn steiner_point_is_equivariant() {
        let g = SphereGrid::new(1, 256).unwrap();
        let s = support(&g, |z| ellipsoid([2.0, 1.0, 0.0])(z) + 0.3 * z[0] - 0.2 * z[1]);
        let p = steiner_point(&g, &s);
        assert!((p[0] - 0.3).abs() < 1e-10 && (p[1] + 0.2).abs() < 1e-10);

        let g = SphereGrid::new(2, 12).unwrap();
        let q = [0.5, -0.25, 1.0];
        let ball = support(&g, |z| 0.8 + dot(&q, z));
        let p = steiner_point(&g, &ball);
        for k in 0..3 {
            assert!((p[k] - q[k]).abs() < 1e-12);
        }
        let centred = steiner_point(&g, &vec![0.8; g.len()]);
        assert!(centred.iter().all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn inradius_and_outradius() {
        let g = SphereGrid::new(2, 16).unwrap();
        let q = [0.2, 0.1, -0.3];
        let io = inradius_outradius(&g, &support(&g, |z| 1.1 + dot(&q, z)));
        assert!((io.rho_minus - 1.1).abs() < 1e-9 && (io.rho_plus - 1.1).abs() < 1e-9);
        for k in 0..3 {
            assert!((io.center[k] - q[k]).abs() < 1e-9);
        }

        let g = SphereGrid::new(1, 256).unwrap();
        let io = inradius_outradius(&g, &support(&g, ellipsoid([2.0, 1.0, 0.0])));
        assert!((io.rho_minus - 1.0).abs() < 1e-9);
        assert!((io.rho_plus - 2.0).abs() < 1e-9);
    }

    #[test]
    fn inball_moves_off_centre_for_asymmetric_bodies() {
        // ball of radius 1 plus a segment: the Steiner point is not the Chebyshev centre
        let g = SphereGrid::new(1, 512).unwrap();
        let s = support(&g, |z| 1.0 + 1.5 * z[0].max(0.0) + 0.05 * z[1] * z[1]);
        let (rho, c) = inball(&g, &s);
        let p = steiner_point(&g, &s);
        assert!(rho >= min_gap(&g, &s, &p));
        assert!(rho <= 1.05 + 1e-9 && rho > 1.0);
        assert!(c[0] > 0.0);
    }

    #[test]
    fn radii_bracket_for_ellipsoids() {
        let g = SphereGrid::new(2, 24).unwrap();
        for axes in [[1.5, 1.2, 1.0], [2.0, 1.0, 1.0], [1.1, 0.9, 0.6]] {
            let s = support(&g, ellipsoid(axes));
            let v = quermassintegrals(&g, &s).unwrap();
            let io = inradius_outradius(&g, &s);
            let r = all_radii(&v);
            assert!(io.rho_minus <= r[2] && r[2] <= r[0] && r[0] <= io.rho_plus, "{axes:?}");
            assert!(io.rho_minus >= diskant_bound(&v) - 1e-9, "{axes:?}");
        }
    }

    #[test]
    fn hausdorff_distances() {
        let g = SphereGrid::new(1, 256).unwrap();
        let a = vec![1.0; g.len()];
        let b = vec![1.25; g.len()];
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), 0.25);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        let e = support(&g, ellipsoid([2.0, 1.0, 0.0]));
        let d = hausdorff_distance(&e, &vec![2f64.sqrt(); g.len()]).unwrap();
        assert!((d - (2.0 - 2f64.sqrt())).abs() < 1e-14);
        assert!(matches!(hausdorff_distance(&a, &b[1..]), Err(FlowError::GridMismatch { .. })));
    }

    #[test]
    fn rigid_motion_and_scaling() {
        let g = SphereGrid::new(2, 16).unwrap();
        let s = support(&g, ellipsoid([1.4, 1.1, 0.9]));
        let moved: Vec<f64> = s.iter().zip(g.nodes()).map(|(v, z)| v + 0.3 * z[0] - 0.5 * z[2]).collect();
        let scaled: Vec<f64> = s.iter().map(|v| 1.7 * v).collect();
        let (a, b, c) = (
            quermassintegrals(&g, &s).unwrap(),
            quermassintegrals(&g, &moved).unwrap(),
            quermassintegrals(&g, &scaled).unwrap(),
        );
        for j in 0..4 {
            assert!((a.get(j) - b.get(j)).abs() < 1e-10 * a.get(j));
            assert!((c.get(j) - 1.7f64.powi(j as i32) * a.get(j)).abs() < 1e-10 * c.get(j));
        }
        for l in 1..=2 {
            assert!((isoperimetric_ratio(&a, l) - isoperimetric_ratio(&c, l)).abs() < 1e-10);
        }
        let (ia, ib) = (inradius_outradius(&g, &s), inradius_outradius(&g, &moved));
        assert!((ia.rho_minus - ib.rho_minus).abs() < 1e-9);
    }

    #[test]
    fn minkowski_sum_of_balls() {
        let g = SphereGrid::new(2, 12).unwrap();
        let q = [0.1, 0.0, 0.2];
        let sum: Vec<f64> = g.nodes().iter().map(|z| 0.5 + (0.75 + dot(&q, z))).collect();
        let v = quermassintegrals(&g, &sum).unwrap();
        for j in 0..4 {
            let exact = 4.0 * PI * 1.25f64.powi(j as i32);
            assert!((v.get(j) - exact).abs() < 1e-12 * exact);
        }
    }

    #[test]
    fn mixed_ratio_is_lipschitz_in_hausdorff_distance() {
        let g = SphereGrid::new(2, 24).unwrap();
        let base = support(&g, ellipsoid([1.5, 1.2, 1.0]));
        let v0 = quermassintegrals(&g, &base).unwrap();
        for eps in [1e-2, 1e-3, 1e-4] {
            let near = support(&g, ellipsoid([1.5 + eps, 1.2, 1.0 - eps]));
            let v1 = quermassintegrals(&g, &near).unwrap();
            let d = hausdorff_distance(&base, &near).unwrap();
            for k in 1..=2 {
                let q = (mixed_ratio(&v1, k) - mixed_ratio(&v0, k)).abs() / d;
                assert!(q < 5.0, "k = {k}, eps = {eps}: {q}");
            }
        }
    }
}
