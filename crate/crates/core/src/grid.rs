//! Discretisation of the unit sphere `S^n` for `n = 1, 2`.
//!
//! * `n = 1`: `N` uniformly spaced angles, trapezoidal weights `2π/N`.
//! * `n = 2`: `L` Gauss–Legendre latitudes (in `cos θ`, no pole nodes) times
//!   `2L` uniform longitudes.
//!
//! Derivatives use three-point stencils whose weights are fitted to the span
//! `{1, cos x, sin x}` instead of `{1, x, x²}`. They are still second order,
//! but they differentiate constants and first spherical harmonics exactly, so
//! `∇̄∇̄s + ḡ s` annihilates the support functions of points (translations)
//! to rounding. The two rows next to a pole use a four-point θ-stencil fitted
//! to `{1, cos x, sin x, sin 2x}`. Tensors are stored in the orthonormal frame
//! `(e_θ, e_φ)`.

use std::f64::consts::PI;

use crate::error::{FlowError, Result};

pub type Point = [f64; 3];

/// One value per grid node.
pub type ScalarField = Vec<f64>;

pub const MIN_CIRCLE_NODES: usize = 16;
pub const MIN_LATITUDES: usize = 12;

/// Symmetric 2×2 tensor `[[xx, xy], [xy, yy]]`. For `n = 1` only `xx` is used.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub fn diag(a: f64, b: f64) -> Self {
        Sym2 { xx: a, xy: 0.0, yy: b }
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }
}

#[derive(Clone, Debug)]
pub struct SymTensorField {
    pub dim: usize,
    pub data: Vec<Sym2>,
}

impl SymTensorField {
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Gradient (orthonormal frame components) and covariant Hessian of a field.
#[derive(Clone, Debug)]
pub struct Derivatives {
    pub grad: Vec<[f64; 2]>,
    pub hess: SymTensorField,
}

/// Three-point weights `(minus, centre, plus)`.
type Stencil = [f64; 3];

/// Weights `(a, b, c)` at offsets `(d1, 0, d2)` reproducing `f'(0)` (or
/// `f''(0)` when `second` is set) exactly for `f ∈ {1, cos x, sin x}`.
fn trig_stencil(d1: f64, d2: f64, second: bool) -> Stencil {
    let (r2, r3) = if second { (-1.0, 0.0) } else { (0.0, 1.0) };
    // cos d - 1 written without cancellation
    let c1 = -2.0 * (0.5 * d1).sin().powi(2);
    let c2 = -2.0 * (0.5 * d2).sin().powi(2);
    let (s1, s2) = (d1.sin(), d2.sin());
    let det = c1 * s2 - c2 * s1;
    let a = (r2 * s2 - c2 * r3) / det;
    let c = (c1 * r3 - s1 * r2) / det;
    [a, -a - c, c]
}

#[derive(Clone, Copy, Debug)]
struct Neighbour {
    lat: usize,
    /// Longitude offset (0 or `M/2` when the stencil crosses a pole).
    shift: usize,
}

/// Four-point weights; interior rows leave the last one zero.
type Stencil4 = [f64; 4];

/// Weights at offsets `xs` reproducing `f'(0)` (or `f''(0)`) exactly for
/// `f ∈ {1, cos x, sin x, sin 2x}`, which locally spans the cubics.
#[allow(clippy::needless_range_loop)]
fn trig_stencil4(xs: [f64; 4], second: bool) -> Stencil4 {
    let mut a = [[0.0; 5]; 4];
    for (p, &x) in xs.iter().enumerate() {
        a[0][p] = 1.0;
        a[1][p] = -2.0 * (0.5 * x).sin().powi(2);
        a[2][p] = x.sin();
        a[3][p] = (2.0 * x).sin();
    }
    let rhs = if second { [0.0, -1.0, 0.0, 0.0] } else { [0.0, 0.0, 1.0, 2.0] };
    for (row, r) in a.iter_mut().zip(rhs) {
        row[4] = r;
    }
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        for row in 0..4 {
            if row != col {
                let f = a[row][col] / a[col][col];
                for c in col..5 {
                    a[row][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut w: Stencil4 = std::array::from_fn(|p| a[p][4] / a[p][p]);
    // Annihilate constants exactly: offset 0 is the centre tap.
    let centre = xs.iter().position(|&x| x == 0.0).expect("centre tap");
    w[centre] = -w.iter().enumerate().filter(|&(p, _)| p != centre).map(|(_, v)| v).sum::<f64>();
    w
}

#[derive(Clone, Debug)]
struct Latitude {
    theta: f64,
    sin: f64,
    cos: f64,
    /// θ-stencil taps: north, self, south, and a second southern (or
    /// northern) row on the two rows next to a pole.
    taps: [Neighbour; 4],
    d1: Stencil4,
    d2: Stencil4,
    spacing: f64,
}

#[derive(Clone, Debug)]
enum Layout {
    Circle {
        step: f64,
        d1: Stencil,
        d2: Stencil,
    },
    LatLon {
        lats: Vec<Latitude>,
        lon_count: usize,
        dphi: f64,
        d1: Stencil,
        d2: Stencil,
    },
}

#[derive(Clone, Debug)]
pub struct SphereGrid {
    dim: usize,
    resolution: usize,
    nodes: Vec<Point>,
    weights: Vec<f64>,
    layout: Layout,
}

/// Gauss–Legendre abscissae (descending) and weights on `[-1, 1]`.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::with_capacity(count);
    let mut ws = Vec::with_capacity(count);
    let nf = count as f64;
    for j in 0..count {
        let mut x = (PI * (j as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(count, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(count, x);
        if d.is_finite() {
            dp = d;
        }
        xs.push(x);
        ws.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (xs, ws)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

impl SphereGrid {
    /// Builds the grid. `resolution` is the node count `N` for `n = 1` and the
    /// latitude count `L` for `n = 2`.
    pub fn new(dim: usize, resolution: usize) -> Result<Self> {
        match dim {
            1 if resolution >= MIN_CIRCLE_NODES => Ok(Self::circle(resolution)),
            1 => Err(FlowError::config(format!(
                "n = 1 grid needs at least {MIN_CIRCLE_NODES} nodes, got {resolution}"
            ))),
            2 if resolution >= MIN_LATITUDES => Ok(Self::lat_lon(resolution)),
            2 => Err(FlowError::config(format!(
                "n = 2 grid needs at least {MIN_LATITUDES} latitudes, got {resolution}"
            ))),
            _ => Err(FlowError::config(format!("unsupported sphere dimension {dim}"))),
        }
    }

    fn circle(count: usize) -> Self {
        let step = 2.0 * PI / count as f64;
        let nodes = (0..count)
            .map(|i| {
                let th = step * i as f64;
                [th.cos(), th.sin(), 0.0]
            })
            .collect();
        SphereGrid {
            dim: 1,
            resolution: count,
            nodes,
            weights: vec![step; count],
            layout: Layout::Circle {
                step,
                d1: trig_stencil(-step, step, false),
                d2: trig_stencil(-step, step, true),
            },
        }
    }

    fn lat_lon(lat_count: usize) -> Self {
        let lon_count = 2 * lat_count;
        let half = lat_count; // lon_count / 2
        let dphi = 2.0 * PI / lon_count as f64;
        let (xs, ws) = gauss_legendre(lat_count);
        let thetas: Vec<f64> = xs.iter().map(|x| x.acos()).collect();

        let mut lats = Vec::with_capacity(lat_count);
        for j in 0..lat_count {
            let th = thetas[j];
            // Across a pole the neighbour is the same latitude on the opposite meridian,
            // seen at colatitude -θ (north) or 2π - θ (south).
            let (north, th_n) = if j == 0 {
                (Neighbour { lat: 0, shift: half }, -th)
            } else {
                (Neighbour { lat: j - 1, shift: 0 }, thetas[j - 1])
            };
            let (south, th_s) = if j + 1 == lat_count {
                (Neighbour { lat: j, shift: half }, 2.0 * PI - th)
            } else {
                (Neighbour { lat: j + 1, shift: 0 }, thetas[j + 1])
            };
            let (d_n, d_s) = (th_n - th, th_s - th);
            let me = Neighbour { lat: j, shift: 0 };
            // Rows beside a pole see a jump in spacing through the ghost node, which
            // would make a three-point stencil first order; add the next row inward.
            let (taps, d1, d2) = if j == 0 || j + 1 == lat_count {
                let (far, d_f) = if j == 0 {
                    (Neighbour { lat: 2, shift: 0 }, thetas[2] - th)
                } else {
                    (Neighbour { lat: j - 2, shift: 0 }, thetas[j - 2] - th)
                };
                let xs = [d_n, 0.0, d_s, d_f];
                ([north, me, south, far], trig_stencil4(xs, false), trig_stencil4(xs, true))
            } else {
                let (a, b) = (trig_stencil(d_n, d_s, false), trig_stencil(d_n, d_s, true));
                ([north, me, south, me], [a[0], a[1], a[2], 0.0], [b[0], b[1], b[2], 0.0])
            };
            lats.push(Latitude {
                theta: th,
                sin: th.sin(),
                cos: xs[j],
                taps,
                d1,
                d2,
                spacing: d_n.abs().min(d_s.abs()),
            });
        }

        let mut nodes = Vec::with_capacity(lat_count * lon_count);
        let mut weights = Vec::with_capacity(lat_count * lon_count);
        for (j, lat) in lats.iter().enumerate() {
            for i in 0..lon_count {
                let ph = dphi * i as f64;
                nodes.push([lat.sin * ph.cos(), lat.sin * ph.sin(), lat.cos]);
                weights.push(ws[j] * dphi);
            }
        }

        SphereGrid {
            dim: 2,
            resolution: lat_count,
            nodes,
            weights,
            layout: Layout::LatLon {
                lats,
                lon_count,
                dphi,
                d1: trig_stencil(-dphi, dphi, false),
                d2: trig_stencil(-dphi, dphi, true),
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Area `ω_n` of the unit sphere.
    pub fn omega(&self) -> f64 {
        omega(self.dim)
    }

    /// `(latitudes, longitudes)` for `n = 2`, `None` for the circle.
    pub fn lat_lon_shape(&self) -> Option<(usize, usize)> {
        match &self.layout {
            Layout::LatLon { lats, lon_count, .. } => Some((lats.len(), *lon_count)),
            Layout::Circle { .. } => None,
        }
    }

    /// Colatitude / angle of each node's chart coordinate.
    pub fn angle(&self, i: usize) -> f64 {
        match &self.layout {
            Layout::Circle { step, .. } => step * i as f64,
            Layout::LatLon { lats, lon_count, .. } => lats[i / lon_count].theta,
        }
    }

    /// Orthonormal tangent frame `(e_θ, e_φ)` at node `i` (for `n = 1` the
    /// second vector is zero).
    pub fn frame(&self, i: usize) -> (Point, Point) {
        match &self.layout {
            Layout::Circle { step, .. } => {
                let th = step * i as f64;
                ([-th.sin(), th.cos(), 0.0], [0.0; 3])
            }
            Layout::LatLon { lats, lon_count, dphi, .. } => {
                let lat = &lats[i / lon_count];
                let ph = dphi * (i % lon_count) as f64;
                let (sp, cp) = ph.sin_cos();
                ([lat.cos * cp, lat.cos * sp, -lat.sin], [-sp, cp, 0.0])
            }
        }
    }

    /// Local grid spacing used by the explicit time-step bound.
    pub fn spacing(&self, i: usize) -> f64 {
        match &self.layout {
            Layout::Circle { step, .. } => *step,
            Layout::LatLon { lats, lon_count, dphi, .. } => {
                let lat = &lats[i / lon_count];
                lat.spacing.min(lat.sin * dphi)
            }
        }
    }

    /// Largest distance to a neighbouring node: the diagonal of the local cell.
    pub fn cell_diagonal(&self, i: usize) -> f64 {
        match &self.layout {
            Layout::Circle { step, .. } => *step,
            Layout::LatLon { lats, lon_count, dphi, .. } => {
                let lat = &lats[i / lon_count];
                lat.spacing.hypot(lat.sin * dphi)
            }
        }
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        f.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// Gradient and covariant Hessian of the round metric.
    pub fn covariant_hessian(&self, s: &[f64]) -> Derivatives {
        let mut grad = vec![[0.0; 2]; self.len()];
        let mut hess = vec![Sym2::default(); self.len()];
        self.derivatives_into(s, Some(&mut grad), &mut hess);
        Derivatives {
            grad,
            hess: SymTensorField {
                dim: self.dim,
                data: hess,
            },
        }
    }

    /// Writes `∇̄∇̄s + ḡ s` into `out`.
    pub fn tau_into(&self, s: &[f64], out: &mut Vec<Sym2>) {
        out.resize(self.len(), Sym2::default());
        self.derivatives_into(s, None, out);
        for (t, &v) in out.iter_mut().zip(s) {
            t.xx += v;
            if self.dim == 2 {
                t.yy += v;
            }
        }
    }

    fn derivatives_into(&self, s: &[f64], mut grad: Option<&mut [[f64; 2]]>, hess: &mut [Sym2]) {
        assert_eq!(s.len(), self.len(), "field length does not match grid");
        match &self.layout {
            Layout::Circle { d1, d2, .. } => {
                let n = s.len();
                for i in 0..n {
                    let m = s[(i + n - 1) % n];
                    let p = s[(i + 1) % n];
                    let c = s[i];
                    hess[i] = Sym2 {
                        xx: d2[0] * m + d2[1] * c + d2[2] * p,
                        xy: 0.0,
                        yy: 0.0,
                    };
                    if let Some(g) = grad.as_deref_mut() {
                        g[i] = [d1[0] * m + d1[1] * c + d1[2] * p, 0.0];
                    }
                }
            }
            Layout::LatLon {
                lats,
                lon_count,
                d1: p1,
                d2: p2,
                ..
            } => {
                let m = *lon_count;
                // ∂φ s everywhere first: the mixed derivative differentiates it in θ.
                let mut s_phi = vec![0.0; s.len()];
                for j in 0..lats.len() {
                    let row = &s[j * m..(j + 1) * m];
                    let out = &mut s_phi[j * m..(j + 1) * m];
                    for i in 0..m {
                        let a = row[(i + m - 1) % m];
                        let c = row[(i + 1) % m];
                        out[i] = p1[0] * a + p1[1] * row[i] + p1[2] * c;
                    }
                }
                for (j, lat) in lats.iter().enumerate() {
                    let cot = lat.cos / lat.sin;
                    let inv_sin = 1.0 / lat.sin;
                    for i in 0..m {
                        let idx = j * m + i;
                        let mut s_t = 0.0;
                        let mut s_tt = 0.0;
                        let mut s_tp = 0.0;
                        for ((tap, w1), w2) in lat.taps.iter().zip(&lat.d1).zip(&lat.d2) {
                            let mut col = i + tap.shift;
                            if col >= m {
                                col -= m;
                            }
                            let t_idx = tap.lat * m + col;
                            s_t += w1 * s[t_idx];
                            s_tt += w2 * s[t_idx];
                            s_tp += w1 * s_phi[t_idx];
                        }
                        let sc = s[idx];
                        let s_p = s_phi[idx];
                        let row = &s[j * m..(j + 1) * m];
                        let s_pp = p2[0] * row[(i + m - 1) % m] + p2[1] * sc + p2[2] * row[(i + 1) % m];
                        hess[idx] = Sym2 {
                            xx: s_tt,
                            xy: (s_tp - cot * s_p) * inv_sin,
                            yy: s_pp * inv_sin * inv_sin + cot * s_t,
                        };
                        if let Some(g) = grad.as_deref_mut() {
                            g[idx] = [s_t, s_p * inv_sin];
                        }
                    }
                }
            }
        }
    }

    /// Lifts frame components of a tangent vector at node `i` to `R^{n+1}`.
    pub fn lift(&self, i: usize, v: [f64; 2]) -> Point {
        let (e1, e2) = self.frame(i);
        [
            v[0] * e1[0] + v[1] * e2[0],
            v[0] * e1[1] + v[1] * e2[1],
            v[0] * e1[2] + v[1] * e2[2],
        ]
    }

    /// Node index of the rotation by `shift` grid steps (n = 1) or longitudes (n = 2).
    pub fn rotate_index(&self, i: usize, shift: usize) -> usize {
        match &self.layout {
            Layout::Circle { .. } => (i + shift) % self.len(),
            Layout::LatLon { lon_count, .. } => {
                let (j, k) = (i / lon_count, i % lon_count);
                j * lon_count + (k + shift) % lon_count
            }
        }
    }
}

pub fn omega(dim: usize) -> f64 {
    match dim {
        1 => 2.0 * PI,
        2 => 4.0 * PI,
        _ => panic!("unsupported sphere dimension {dim}"),
    }
}

#[inline]
pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(grid: &SphereGrid, f: impl Fn(&Point) -> f64) -> Vec<f64> {
        grid.nodes().iter().map(f).collect()
    }

    #[test]
    fn circle_grid_has_uniform_weights() {
        let g = SphereGrid::new(1, 256).unwrap();
        assert_eq!(g.len(), 256);
        for &w in g.weights() {
            assert_eq!(w, 2.0 * PI / 256.0);
        }
    }

    #[test]
    fn lat_lon_weights_sum_to_four_pi() {
        let g = SphereGrid::new(2, 24).unwrap();
        assert_eq!(g.len(), 24 * 48);
        let total: f64 = g.weights().iter().sum();
        assert!((total - 4.0 * PI).abs() < 1e-12 * 4.0 * PI);
        for z in g.nodes() {
            assert!((dot(z, z).sqrt() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_coarse_resolutions() {
        assert!(matches!(SphereGrid::new(1, 8), Err(FlowError::InvalidConfig { .. })));
        assert!(SphereGrid::new(2, 11).is_err());
        assert!(SphereGrid::new(3, 32).is_err());
    }

    #[test]
    fn quadrature_moments() {
        let g2 = SphereGrid::new(2, 16).unwrap();
        let one = vec![1.0; g2.len()];
        assert!((g2.integrate(&one) - 4.0 * PI).abs() < 1e-12);
        let z3sq = field(&g2, |z| z[2] * z[2]);
        assert!((g2.integrate(&z3sq) - 4.0 * PI / 3.0).abs() < 1e-10);

        let g1 = SphereGrid::new(1, 64).unwrap();
        let cos2 = field(&g1, |z| z[0] * z[0]);
        assert!((g1.integrate(&cos2) - PI).abs() < 1e-12);
    }

    #[test]
    fn quadrature_kills_low_harmonics() {
        let g = SphereGrid::new(2, 12).unwrap();
        let harmonics: Vec<Box<dyn Fn(&Point) -> f64>> = vec![
            Box::new(|z| z[0]),
            Box::new(|z| z[1] * z[2]),
            Box::new(|z| 3.0 * z[2] * z[2] - 1.0),
            Box::new(|z| z[0] * z[0] - z[1] * z[1]),
            Box::new(|z| z[0] * (5.0 * z[2] * z[2] - 1.0)),
            Box::new(|z| 35.0 * z[2].powi(4) - 30.0 * z[2] * z[2] + 3.0),
            Box::new(|z| z[0] * z[1] * (z[0] * z[0] - z[1] * z[1])),
        ];
        for h in &harmonics {
            assert!(g.integrate(&field(&g, h)).abs() < 1e-10);
        }
        let g1 = SphereGrid::new(1, 16).unwrap();
        for m in 1..6 {
            let f = field(&g1, |z| (m as f64 * z[1].atan2(z[0])).cos());
            assert!(g1.integrate(&f).abs() < 1e-12);
        }
    }

    #[test]
    fn constants_have_zero_derivatives() {
        for g in [SphereGrid::new(1, 32).unwrap(), SphereGrid::new(2, 12).unwrap()] {
            let d = g.covariant_hessian(&vec![2.5; g.len()]);
            for (gr, h) in d.grad.iter().zip(&d.hess.data) {
                assert!(gr[0].abs() < 1e-12 && gr[1].abs() < 1e-12);
                assert!(h.xx.abs() < 1e-12 && h.xy.abs() < 1e-12 && h.yy.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn first_harmonics_are_annihilated() {
        let g1 = SphereGrid::new(1, 40).unwrap();
        let d = g1.covariant_hessian(&field(&g1, |z| z[0]));
        for (h, z) in d.hess.data.iter().zip(g1.nodes()) {
            assert!((h.xx + z[0]).abs() < 1e-12);
        }

        let g2 = SphereGrid::new(2, 14).unwrap();
        for k in 0..3 {
            let s = field(&g2, |z| z[k]);
            let d = g2.covariant_hessian(&s);
            for (h, v) in d.hess.data.iter().zip(&s) {
                assert!((h.xx + v).abs() < 1e-11, "{h:?}");
                assert!(h.xy.abs() < 1e-11);
                assert!((h.yy + v).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn gradient_of_height_function() {
        // s = z3 = cos θ has frame gradient (-sin θ, 0).
        let g = SphereGrid::new(2, 16).unwrap();
        let d = g.covariant_hessian(&field(&g, |z| z[2]));
        for (i, gr) in d.grad.iter().enumerate() {
            let th = g.angle(i);
            assert!((gr[0] + th.sin()).abs() < 1e-12);
            assert!(gr[1].abs() < 1e-12);
        }
    }

    #[test]
    fn index_shift_commutes_with_hessian() {
        let g = SphereGrid::new(1, 64).unwrap();
        let s = field(&g, |z| (z[1] * 1.3).exp() + z[0] * z[0] * z[1]);
        let shift = 11;
        let rotated: Vec<f64> = (0..g.len()).map(|i| s[g.rotate_index(i, shift)]).collect();
        let a = g.covariant_hessian(&s);
        let b = g.covariant_hessian(&rotated);
        for i in 0..g.len() {
            let j = g.rotate_index(i, shift);
            assert!((b.hess.data[i].xx - a.hess.data[j].xx).abs() < 1e-12);
        }
    }

    fn exp_sin_hessian_error(count: usize) -> f64 {
        // s = e^{sin θ}: s'' = (cos²θ - sin θ) e^{sin θ}
        let g = SphereGrid::new(1, count).unwrap();
        let s = field(&g, |z| z[1].exp());
        let d = g.covariant_hessian(&s);
        d.hess
            .data
            .iter()
            .zip(g.nodes())
            .map(|(h, z)| (h.xx - (z[0] * z[0] - z[1]) * z[1].exp()).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn hessian_is_second_order() {
        let e1 = exp_sin_hessian_error(64);
        let e2 = exp_sin_hessian_error(128);
        let rate = (e1 / e2).log2();
        assert!(rate >= 1.9, "rate {rate}");
    }

    /// `(max, weighted L2)` error of the Hessian of `e^{z1}`; the exact value is the
    /// ambient Hessian `e^{z1} e1 e1ᵀ` restricted to the tangent plane minus `z1 e^{z1} ḡ`.
    fn sphere_hessian_error(lats: usize) -> (f64, f64) {
        let g = SphereGrid::new(2, lats).unwrap();
        let s = field(&g, |z| z[0].exp());
        let d = g.covariant_hessian(&s);
        let (mut worst, mut l2): (f64, f64) = (0.0, 0.0);
        for (i, h) in d.hess.data.iter().enumerate() {
            let z = g.nodes()[i];
            let (et, ep) = g.frame(i);
            let e = z[0].exp();
            let errs = [
                h.xx - (e * et[0] * et[0] - z[0] * e),
                h.xy - e * et[0] * ep[0],
                h.yy - (e * ep[0] * ep[0] - z[0] * e),
            ];
            for v in errs {
                worst = worst.max(v.abs());
                l2 += v * v * g.weights()[i];
            }
        }
        (worst, l2.sqrt())
    }

    #[test]
    fn sphere_hessian_converges() {
        let (m1, l1) = sphere_hessian_error(16);
        let (m2, l2) = sphere_hessian_error(32);
        let (m3, l3) = sphere_hessian_error(64);
        // second order in the mean; the chart factors 1/sin θ leave the rows next
        // to a pole first order in the max norm
        assert!((l1 / l2).log2() > 1.8 && (l2 / l3).log2() > 1.8, "{l1} {l2} {l3}");
        assert!((m2 / m3).log2() > 0.9, "{m1} {m2} {m3}");
        assert!(m3 < 1e-2);
    }

    #[test]
    fn legendre_rule_is_exact_for_high_degree() {
        let (xs, ws) = gauss_legendre(10);
        let m: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(18)).sum();
        assert!((m - 2.0 / 19.0).abs() < 1e-14);
    }
}
