//! Convex-body geometry read off a sampled support function.

use crate::error::{FlowError, Result};
use crate::grid::{Point, SphereGrid, Sym2, SymTensorField};

/// `τ_ij = ∇̄_i∇̄_j s + ḡ_ij s` per node, orthonormal frame.
pub type TauField = SymTensorField;

/// Sorted principal radii per node (`r_1 ≤ r_2`; only the first is used when `n = 1`).
#[derive(Clone, Debug)]
pub struct RadiiField {
    pub dim: usize,
    pub radii: Vec<[f64; 2]>,
}

impl RadiiField {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn at(&self, i: usize) -> &[f64] {
        &self.radii[i][..self.dim]
    }

    /// Principal curvatures `κ = 1/r`, sorted decreasing.
    pub fn curvatures(&self, i: usize) -> [f64; 2] {
        let r = self.radii[i];
        [1.0 / r[0], 1.0 / r[1]]
    }

    pub fn min(&self) -> f64 {
        self.radii.iter().map(|r| r[0]).fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        let hi = if self.dim == 2 { 1 } else { 0 };
        self.radii.iter().map(|r| r[hi]).fold(f64::NEG_INFINITY, f64::max)
    }

    /// All radii shifted by `delta` (the radii of `s + delta`).
    pub fn shifted(&self, delta: f64) -> RadiiField {
        RadiiField {
            dim: self.dim,
            radii: self.radii.iter().map(|r| [r[0] + delta, r[1] + delta]).collect(),
        }
    }
}

/// `(min r, max r)` over the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiiBounds {
    pub min: f64,
    pub max: f64,
}

/// Whether a convexity failure is reported for the initial data or mid-run.
#[derive(Clone, Copy, Debug)]
pub enum Phase {
    Initial,
    Evolving { t: f64 },
}

pub fn tau_field(grid: &SphereGrid, s: &[f64]) -> TauField {
    let mut data = Vec::new();
    grid.tau_into(s, &mut data);
    SymTensorField {
        dim: grid.dim(),
        data,
    }
}

/// Eigenvalues of a symmetric 2×2 tensor, ascending.
#[inline]
pub fn eigen2(t: &Sym2) -> [f64; 2] {
    let m = 0.5 * (t.xx + t.yy);
    let h = 0.5 * (t.xx - t.yy);
    let d = h.hypot(t.xy);
    [m - d, m + d]
}

/// Principal radii; unlike [`principal_radii`] this never fails.
pub fn radii_unchecked(tau: &TauField) -> RadiiField {
    let radii = if tau.dim == 1 {
        tau.data.iter().map(|t| [t.xx, t.xx]).collect()
    } else {
        tau.data.iter().map(eigen2).collect()
    };
    RadiiField { dim: tau.dim, radii }
}

pub fn principal_radii(tau: &TauField, floor: f64) -> Result<RadiiField> {
    let radii = radii_unchecked(tau);
    check_floor(&radii, floor, Phase::Evolving { t: f64::NAN })?;
    Ok(radii)
}

pub(crate) fn check_floor(radii: &RadiiField, floor: f64, phase: Phase) -> Result<()> {
    let (node, min_radius) = radii
        .radii
        .iter()
        .enumerate()
        .map(|(i, r)| (i, r[0]))
        .fold((0, f64::INFINITY), |acc, (i, r)| if r < acc.1 || r.is_nan() { (i, r) } else { acc });
    if min_radius > floor {
        return Ok(());
    }
    Err(match phase {
        Phase::Initial => FlowError::NonConvexInput {
            node,
            min_radius,
            floor,
        },
        Phase::Evolving { t } => FlowError::LossOfConvexity {
            t,
            node,
            min_radius,
            floor,
        },
    })
}

/// Elementary symmetric polynomial `σ_m` of up to two values.
#[inline]
pub fn elementary_symmetric(values: &[f64], m: usize) -> f64 {
    match (values.len(), m) {
        (_, 0) => 1.0,
        (1, 1) => values[0],
        (2, 1) => values[0] + values[1],
        (2, 2) => values[0] * values[1],
        _ => elementary_symmetric_general(values, m),
    }
}

fn elementary_symmetric_general(values: &[f64], m: usize) -> f64 {
    let mut e = vec![0.0; m + 1];
    e[0] = 1.0;
    for &v in values {
        for j in (1..=m).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e[m]
}

pub fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `E_m = C(n, m)^{-1} σ_m(values)` with `n = values.len()`.
pub fn normalized_symmetric(values: &[f64], m: usize) -> f64 {
    assert!(m <= values.len(), "order {m} exceeds {} values", values.len());
    elementary_symmetric(values, m) / binomial(values.len(), m)
}

/// Boundary points `X(z) = s(z) z + ∇̄s(z)`.
pub fn embed_boundary(grid: &SphereGrid, s: &[f64]) -> Vec<Point> {
    let d = grid.covariant_hessian(s);
    grid.nodes()
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let g = grid.lift(i, d.grad[i]);
            [s[i] * z[0] + g[0], s[i] * z[1] + g[1], s[i] * z[2] + g[2]]
        })
        .collect()
}

/// Default degeneracy floor `1e-8 × mean(s)`. The mean of a support function
/// is half the mean width, hence positive and translation invariant.
pub fn convexity_floor(grid: &SphereGrid, s: &[f64]) -> f64 {
    1e-8 * grid.integrate(s) / grid.omega()
}

pub fn validate_strict_convexity(
    grid: &SphereGrid,
    s: &[f64],
    floor: f64,
    phase: Phase,
) -> Result<RadiiBounds> {
    let radii = radii_unchecked(&tau_field(grid, s));
    check_floor(&radii, floor, phase)?;
    Ok(RadiiBounds {
        min: radii.min(),
        max: radii.max(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ellipse(grid: &SphereGrid, a: f64, b: f64) -> Vec<f64> {
        grid.nodes()
            .iter()
            .map(|z| (a * a * z[0] * z[0] + b * b * z[1] * z[1]).sqrt())
            .collect()
    }

    #[test]
    fn ball_has_constant_tau() {
        for g in [SphereGrid::new(1, 32).unwrap(), SphereGrid::new(2, 12).unwrap()] {
            let tau = tau_field(&g, &vec![1.7; g.len()]);
            for t in &tau.data {
                assert!((t.xx - 1.7).abs() < 1e-14);
                if g.dim() == 2 {
                    assert!((t.yy - 1.7).abs() < 1e-14 && t.xy.abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn translated_ball_has_same_tau() {
        let g = SphereGrid::new(2, 16).unwrap();
        let p = [0.3, -0.7, 0.45];
        let s: Vec<f64> = g.nodes().iter().map(|z| 1.2 + p[0] * z[0] + p[1] * z[1] + p[2] * z[2]).collect();
        for t in &tau_field(&g, &s).data {
            assert!((t.xx - 1.2).abs() < 1e-10);
            assert!((t.yy - 1.2).abs() < 1e-10);
            assert!(t.xy.abs() < 1e-10);
        }
    }

    #[test]
    fn ellipse_radius_of_curvature() {
        // ρ(θ) = a²b²/s(θ)³ at normal angle θ.
        let g = SphereGrid::new(1, 2048).unwrap();
        let s = ellipse(&g, 2.0, 1.0);
        let tau = tau_field(&g, &s);
        for (t, v) in tau.data.iter().zip(&s) {
            let exact = 4.0 / v.powi(3);
            assert!((t.xx - exact).abs() < 1e-4 * exact.max(1.0), "{} vs {exact}", t.xx);
        }
        assert!((tau.data[0].xx - 0.5).abs() < 1e-5);
    }

    #[test]
    fn radii_and_symmetric_functions() {
        let tau = SymTensorField {
            dim: 2,
            data: vec![Sym2::diag(2.0, 3.0), Sym2::diag(3.0, 2.0)],
        };
        let r = principal_radii(&tau, 1e-8).unwrap();
        assert_eq!(r.at(0), &[2.0, 3.0]);
        assert_eq!(r.at(1), &[2.0, 3.0]);
        let k = r.curvatures(0);
        assert_eq!(k, [0.5, 1.0 / 3.0]);

        assert_eq!(normalized_symmetric(&[2.0, 3.0], 1), 2.5);
        assert_eq!(normalized_symmetric(&[2.0, 3.0], 2), 6.0);
        assert_eq!(normalized_symmetric(&[7.0, -3.0], 0), 1.0);
        assert_eq!(normalized_symmetric(&[1.0, 1.0, 1.0], 2), 1.0);
        assert_eq!(normalized_symmetric(&[1.0, 2.0, 3.0, 4.0], 2), 35.0 / 6.0);
    }

    #[test]
    fn zero_eigenvalue_is_loss_of_convexity() {
        let tau = SymTensorField {
            dim: 2,
            data: vec![Sym2::diag(1.0, 1.0), Sym2::diag(0.0, 1.0)],
        };
        match principal_radii(&tau, 1e-8) {
            Err(FlowError::LossOfConvexity { node, .. }) => assert_eq!(node, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn eigen_product_is_determinant() {
        let t = Sym2 { xx: 1.3, xy: 0.4, yy: 0.9 };
        let [a, b] = eigen2(&t);
        assert!((a * b - t.det()).abs() < 1e-12);
        assert!(a <= b);
    }

    #[test]
    fn embedding_of_balls_and_ellipse() {
        let g = SphereGrid::new(2, 12).unwrap();
        let p = [0.1, 0.2, -0.3];
        let s: Vec<f64> = g.nodes().iter().map(|z| 2.0 + p[0] * z[0] + p[1] * z[1] + p[2] * z[2]).collect();
        for (x, z) in embed_boundary(&g, &s).iter().zip(g.nodes()) {
            for c in 0..3 {
                assert!((x[c] - p[c] - 2.0 * z[c]).abs() < 1e-12);
            }
        }

        let g = SphereGrid::new(1, 4096).unwrap();
        let s = ellipse(&g, 2.0, 1.0);
        for x in embed_boundary(&g, &s) {
            let res = (x[0] / 2.0).powi(2) + x[1] * x[1] - 1.0;
            assert!(res.abs() < 1e-10, "{res}");
        }
    }

    #[test]
    fn convexity_validation() {
        let g = SphereGrid::new(1, 128).unwrap();
        let ball = vec![1.0; g.len()];
        let b = validate_strict_convexity(&g, &ball, 1e-8, Phase::Initial).unwrap();
        assert_eq!((b.min, b.max), (1.0, 1.0));

        let bad: Vec<f64> = g.nodes().iter().map(|z| 1.0 + 0.9 * (2.0 * z[1].atan2(z[0])).cos()).collect();
        assert!(matches!(
            validate_strict_convexity(&g, &bad, 1e-8, Phase::Initial),
            Err(FlowError::NonConvexInput { node: 0, .. })
        ));

        let g = SphereGrid::new(2, 24).unwrap();
        let s: Vec<f64> = g
            .nodes()
            .iter()
            .map(|z| (2.25 * z[0] * z[0] + 1.44 * z[1] * z[1] + z[2] * z[2]).sqrt())
            .collect();
        let b = validate_strict_convexity(&g, &s, 1e-8, Phase::Initial).unwrap();
        // principal radii of an ellipsoid lie in [c²/a, a²/c]
        assert!(b.min > 1.0 / 1.5 * 0.99 && b.max < 2.25 * 1.01, "{b:?}");
    }

    #[test]
    fn scaling_covariance() {
        let g = SphereGrid::new(2, 12).unwrap();
        let s: Vec<f64> = g.nodes().iter().map(|z| (2.0 * z[0] * z[0] + z[1] * z[1] + 1.5 * z[2] * z[2]).sqrt()).collect();
        let scaled: Vec<f64> = s.iter().map(|v| 3.0 * v).collect();
        let (a, b) = (radii_unchecked(&tau_field(&g, &s)), radii_unchecked(&tau_field(&g, &scaled)));
        for i in 0..g.len() {
            for c in 0..2 {
                assert!((b.radii[i][c] - 3.0 * a.radii[i][c]).abs() < 1e-12 * b.radii[i][c].abs().max(1.0));
            }
            let (ea, eb) = (normalized_symmetric(&a.curvatures(i), 2), normalized_symmetric(&b.curvatures(i), 2));
            assert!((eb - ea / 9.0).abs() < 1e-12 * ea);
        }
    }
}
