//! Monitors evaluated on snapshots of a flow. None of them mutates flow state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::flow::{FlowEngine, FlowState, SpeedSpec};
use crate::geometry::{self, normalized_symmetric};
use crate::grid::{dot, Point, SphereGrid};
use crate::volumes::{self, MixedVolumes};

/// One row of the diagnostic time series.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagRecord {
    pub t: f64,
    pub step: u64,
    /// `V_0..V_{n+1}`.
    pub volumes: Vec<f64>,
    /// `r_1..r_{n+1}`.
    pub radii: Vec<f64>,
    /// `I_{n+1-k}`.
    pub iso: f64,
    /// `I_1`.
    pub iso1: f64,
    pub phi: f64,
    pub ek_min: f64,
    pub ek_max: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub rho_minus: f64,
    pub rho_plus: f64,
    pub steiner: Point,
    pub d_ball: f64,
    pub r_hat: f64,
    pub tso_w: f64,
    /// The two candidate bounds on the Tso quantity (`NaN` when not applicable).
    pub tso_bounds: [f64; 2],
    /// `λ+(z)` per sampled direction; empty when not evaluated at this snapshot.
    pub lambda_plus: Vec<f64>,
    /// `λ-(z) = -λ+(-z)` per sampled direction.
    pub lambda_minus: Vec<f64>,
    pub tol_contain: f64,
    pub ek_flatness: f64,
    /// `V_1² - V_0 V_2`.
    pub stability: f64,
    /// Hausdorff distance to the ball with the Steiner point as centre and `r_1` as radius.
    pub d_steiner_ball: f64,
    /// `|G - c₀| / |c₀|` (0 for a prescribed global term).
    pub constraint_drift: f64,
    /// `max |(s - p·z) / r_{n+1} - 1|`: distance of the rescaled body to the unit ball.
    pub rescaled_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceResiduals {
    pub d_ball: f64,
    pub r_hat: f64,
    pub ek_flatness: f64,
}

/// Distance to the best-fit ball (Steiner point, mean of the centred support
/// function) and the sup-deviation of `E_k` from its area-weighted mean.
pub fn convergence_residuals(grid: &SphereGrid, s: &[f64], state: &FlowState, k: usize) -> ConvergenceResiduals {
    let n = grid.dim();
    let r_hat = centred_mean(grid, s, &state.steiner);
    let d_ball = ball_distance(grid, s, &state.steiner, r_hat);
    let mean = volumes::mixed_ratio(&state.volumes, k);
    let ek_flatness = state
        .radii
        .radii
        .iter()
        .map(|r| {
            let kappa = [1.0 / r[0], 1.0 / r[1]];
            (normalized_symmetric(&kappa[..n], k) - mean).abs()
        })
        .fold(0.0, f64::max);
    ConvergenceResiduals {
        d_ball,
        r_hat,
        ek_flatness,
    }
}

fn centred_mean(grid: &SphereGrid, s: &[f64], p: &Point) -> f64 {
    grid.nodes()
        .iter()
        .zip(s)
        .zip(grid.weights())
        .map(|((z, v), w)| (v - dot(p, z)) * w)
        .sum::<f64>()
        / grid.omega()
}

fn ball_distance(grid: &SphereGrid, s: &[f64], center: &Point, r: f64) -> f64 {
    grid.nodes()
        .iter()
        .zip(s)
        .map(|(z, v)| (v - r - dot(center, z)).abs())
        .fold(0.0, f64::max)
}

/// `(S, d_H)`: `S = V_1² - V_0 V_2` and the Hausdorff distance to the ball of
/// radius `r_1` centred at the Steiner point.
pub fn stability_pair(v: &MixedVolumes, s: &[f64], grid: &SphereGrid) -> (f64, f64) {
    let stab = v.get(1).powi(2) - v.get(0) * v.get(2);
    let p = volumes::steiner_point(grid, s);
    (stab, ball_distance(grid, s, &p, volumes::j_radius(v, 1)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TsoReport {
    pub w_max: f64,
    /// `min (u - c)`; at least `3ρ₋/4`.
    pub min_denominator: f64,
    pub bounds: [f64; 2],
}

/// `max ψ / (u - c)` with `u` the support function about the inball centre and
/// `c = ρ₋/4`.
pub fn tso_monitor(grid: &SphereGrid, state: &FlowState, speed: &SpeedSpec, inball: &volumes::InOutRadii) -> TsoReport {
    let c = 0.25 * inball.rho_minus;
    let mut w_max: f64 = 0.0;
    let mut min_den = f64::INFINITY;
    for ((z, v), psi) in grid.nodes().iter().zip(&state.s).zip(&state.speed.psi) {
        let den = v - dot(&inball.center, z) - c;
        min_den = min_den.min(den);
        w_max = w_max.max(psi / den);
    }
    debug_assert!(min_den >= 0.75 * inball.rho_minus * (1.0 - 1e-9));
    let bounds = match speed.alpha() {
        Some(a) => [
            (2.0 * (1.0 + a) / a).powf(a) * c.powf(-(a + 1.0)),
            (2.0 / (1.0 + a)).powf(a / (1.0 + a)) / c * state.t.powf(-a / (1.0 + a)),
        ],
        None => [f64::NAN; 2],
    };
    TsoReport {
        w_max,
        min_denominator: min_den,
        bounds,
    }
}

/// `2(n+1)` signed axis directions followed by `extra` fixed-seed random unit vectors.
pub fn direction_sample(dim: usize, extra: usize, seed: u64) -> Vec<Point> {
    let mut dirs = Vec::new();
    for a in 0..=dim {
        for sign in [1.0, -1.0] {
            let mut z = [0.0; 3];
            z[a] = sign;
            dirs.push(z);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while dirs.len() < 2 * (dim + 1) + extra {
        let mut z = [0.0; 3];
        for c in z.iter_mut().take(dim + 1) {
            *c = rng.gen_range(-1.0..1.0);
        }
        let r2 = dot(&z, &z);
        if r2 > 1e-4 && r2 <= 1.0 {
            dirs.push(z.map(|c| c / r2.sqrt()));
        }
    }
    dirs
}

/// Reflection containment tests against a sampled support function.
pub struct ReflectionProbe<'a> {
    boundary: &'a [Point],
    normals: &'a [Point],
    s: &'a [f64],
    tol: f64,
}

impl<'a> ReflectionProbe<'a> {
    pub fn new(grid: &'a SphereGrid, s: &'a [f64], boundary: &'a [Point], tol: f64) -> Self {
        ReflectionProbe {
            boundary,
            normals: grid.nodes(),
            s,
            tol,
        }
    }

    /// Largest `y·w - s(w)` over the grid normals.
    pub fn excess(&self, y: &Point) -> f64 {
        self.normals
            .iter()
            .zip(self.s)
            .map(|(w, s)| dot(y, w) - s)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `λ+(z)`: the lowest `λ ≥ floor` such that for every `λ' ≥ λ` the cap
    /// `{x·z > λ'}` reflected across `{x·z = λ'}` stays in the body.
    ///
    /// Reflecting `x` (height `h = x·z`) across `λ` moves it by `2(h - λ)z`, so
    /// its containment `y·w ≤ s(w) + tol` is linear in `λ`. Only normals with
    /// `z·w < 0` bind; each gives `λ ≥ h - (s(w) + tol - x·w) / (2|z·w|)`. With
    /// `M(x)` the largest of these bounds and the cap points sorted by height,
    /// `λ` is admissible in `[h_{i+1}, h_i)` iff `λ ≥ max_{j ≤ i} M(x_j)`.
    pub fn halfwidth(&self, z: &Point, floor: f64) -> f64 {
        let mut pts: Vec<(f64, usize)> = self.boundary.iter().map(|x| dot(x, z)).zip(0..).collect();
        pts.sort_by(|a, b| b.0.total_cmp(&a.0));
        let facing: Vec<(f64, &Point, f64)> = self
            .normals
            .iter()
            .zip(self.s)
            .filter_map(|(w, &s)| {
                let c = dot(z, w);
                (c < 0.0).then_some((-2.0 * c, w, s + self.tol))
            })
            .collect();

        let mut bound = f64::NEG_INFINITY;
        for (i, &(h, idx)) in pts.iter().enumerate() {
            if h <= floor {
                break;
            }
            let x = &self.boundary[idx];
            let slack = facing
                .iter()
                .map(|(c2, w, s)| (s - dot(x, w)) / c2)
                .fold(f64::INFINITY, f64::min);
            bound = bound.max(h - slack);
            let next = pts.get(i + 1).map_or(f64::NEG_INFINITY, |p| p.0);
            if bound > next {
                return bound.min(h).max(floor);
            }
        }
        bound.max(floor)
    }
}

/// Five times the interpolation error of the sampled support function: the
/// polytope cut out by the sampled half-spaces overshoots the body by about
/// `r d² / 8` over a cell of diagonal `d` where the largest principal radius is
/// `r`. Never below the largest excess of an embedded boundary point over
/// that polytope, nor below `1e-12 × mean(s)`.
pub fn containment_tolerance(grid: &SphereGrid, s: &[f64], boundary: &[Point]) -> f64 {
    let probe = ReflectionProbe::new(grid, s, boundary, 0.0);
    let excess = boundary.iter().map(|x| probe.excess(x)).fold(0.0, f64::max);
    let radii = geometry::radii_unchecked(&geometry::tau_field(grid, s));
    let interp = (0..grid.len())
        .map(|i| {
            let r = radii.at(i).iter().copied().fold(0.0, f64::max);
            r * grid.cell_diagonal(i).powi(2) / 8.0
        })
        .fold(0.0, f64::max);
    let scale = grid.integrate(s) / grid.omega();
    5.0 * interp.max(excess).max(1e-12 * scale)
}

/// `λ+(z)` for one direction over `[p·z, max x·z]`, `p` the Steiner point,
/// with the containment tolerance computed from `s`.
pub fn reflection_halfwidth(grid: &SphereGrid, s: &[f64], z: &Point) -> f64 {
    let boundary = geometry::embed_boundary(grid, s);
    let tol = containment_tolerance(grid, s, &boundary);
    let p = volumes::steiner_point(grid, s);
    ReflectionProbe::new(grid, s, &boundary, tol).halfwidth(z, dot(&p, z))
}

/// `(λ+(z), λ-(z), tol_contain)` for every direction.
pub fn reflection_sample(grid: &SphereGrid, s: &[f64], dirs: &[Point], steiner: &Point) -> (Vec<f64>, Vec<f64>, f64) {
    let boundary = geometry::embed_boundary(grid, s);
    let tol = containment_tolerance(grid, s, &boundary);
    let probe = ReflectionProbe::new(grid, s, &boundary, tol);
    let plus = dirs.iter().map(|z| probe.halfwidth(z, dot(steiner, z))).collect();
    let minus = dirs
        .iter()
        .map(|z| -probe.halfwidth(&z.map(|c| -c), -dot(steiner, z)))
        .collect();
    (plus, minus, tol)
}

/// Builds the diagnostic record for `state`; reflection half-widths are
/// computed only when `dirs` is given.
pub fn snapshot(engine: &FlowEngine, state: &FlowState, step: u64, dirs: Option<&[Point]>) -> DiagRecord {
    let grid = engine.grid();
    let n = grid.dim();
    let k = engine.k();
    let v = &state.volumes;
    let radii = volumes::all_radii(v);
    let conv = convergence_residuals(grid, &state.s, state, k);
    let io = volumes::inradius_outradius(grid, &state.s);
    let tso = tso_monitor(grid, state, engine.speed(), &io);
    let (stability, d_steiner_ball) = stability_pair(v, &state.s, grid);
    let (lambda_plus, lambda_minus, tol_contain) = match dirs {
        Some(d) => reflection_sample(grid, &state.s, d, &state.steiner),
        None => (Vec::new(), Vec::new(), f64::NAN),
    };
    let constraint_drift = match (state.target, engine.constraint_value(v)) {
        (Some(c0), Some(c)) => (c - c0).abs() / c0.abs(),
        _ => 0.0,
    };
    let r_vol = radii[n];
    let rescaled_residual = grid
        .nodes()
        .iter()
        .zip(&state.s)
        .map(|(z, s)| ((s - dot(&state.steiner, z)) / r_vol - 1.0).abs())
        .fold(0.0, f64::max);
    let (ek_min, ek_max) = state
        .speed
        .ek
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &e| (a.min(e), b.max(e)));

    DiagRecord {
        t: state.t,
        step,
        volumes: v.as_slice().to_vec(),
        radii,
        iso: volumes::isoperimetric_ratio(v, n + 1 - k),
        iso1: volumes::isoperimetric_ratio(v, 1),
        phi: state.global.phi,
        ek_min,
        ek_max,
        r_min: state.radii.min(),
        r_max: state.radii.max(),
        rho_minus: io.rho_minus,
        rho_plus: io.rho_plus,
        steiner: state.steiner,
        d_ball: conv.d_ball,
        r_hat: conv.r_hat,
        tso_w: tso.w_max,
        tso_bounds: tso.bounds,
        lambda_plus,
        lambda_minus,
        tol_contain,
        ek_flatness: conv.ek_flatness,
        stability,
        d_steiner_ball,
        constraint_drift,
        rescaled_residual,
    }
}

/// Worst per-interval changes of the monotone quantities.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MonotonicityReport {
    /// Largest decrease of `V_{n+1}` and its time.
    pub volume_decrease: (f64, f64),
    /// Largest increase of `V_{n+1-k}` and its time.
    pub quermass_increase: (f64, f64),
    /// Largest increase of `I_{n+1-k}` and its time.
    pub ratio_increase: (f64, f64),
    pub tolerance: f64,
}

impl MonotonicityReport {
    pub fn holds(&self) -> bool {
        self.volume_decrease.0 <= self.tolerance
            && self.quermass_increase.0 <= self.tolerance
            && self.ratio_increase.0 <= self.tolerance
    }
}

/// Scans consecutive records; `check_quermass` is off for a prescribed global
/// term, where only the volume and the ratio are monotone.
pub fn monotonicity_report(records: &[DiagRecord], k: usize, tolerance: f64, check_quermass: bool) -> MonotonicityReport {
    let mut rep = MonotonicityReport {
        tolerance,
        ..Default::default()
    };
    let worse = |slot: &mut (f64, f64), value: f64, t: f64| {
        if value > slot.0 {
            *slot = (value, t);
        }
    };
    for w in records.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let n = a.volumes.len() - 2;
        worse(&mut rep.volume_decrease, a.volumes[n + 1] - b.volumes[n + 1], b.t);
        if check_quermass {
            worse(&mut rep.quermass_increase, b.volumes[n + 1 - k] - a.volumes[n + 1 - k], b.t);
        }
        worse(&mut rep.ratio_increase, b.iso - a.iso, b.t);
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::ConstraintSpec;
    use crate::shapes::{make_shape, ShapeSpec};

    fn engine(dim: usize, res: usize) -> FlowEngine {
        FlowEngine::new(
            SphereGrid::new(dim, res).unwrap(),
            SpeedSpec::Homogeneous { k: 1, alpha: 1.0 },
            ConstraintSpec::PreserveVolume,
            true,
        )
        .unwrap()
    }

    #[test]
    fn ball_residuals() {
        let e = engine(1, 128);
        let st = e.initial_state(vec![1.3; 128]).unwrap();
        let c = convergence_residuals(e.grid(), &st.s, &st, 1);
        assert!(c.d_ball < 1e-14 && (c.r_hat - 1.3).abs() < 1e-14 && c.ek_flatness < 1e-12);
        let (stab, d) = stability_pair(&st.volumes, &st.s, e.grid());
        assert!(stab.abs() < 1e-12 && d < 1e-14);
    }

    #[test]
    fn ellipse_residuals_at_start() {
        let e = engine(1, 512);
        let s = make_shape(&ShapeSpec::ellipsoid(&[2.0, 1.0]), e.grid()).unwrap();
        let st = e.initial_state(s).unwrap();
        let c = convergence_residuals(e.grid(), &st.s, &st, 1);
        // best-fit radius is half the mean width L / 2π, not √2
        let r1 = 9.688448220547676 / (2.0 * std::f64::consts::PI);
        assert!((c.r_hat - r1).abs() < 1e-12);
        assert!((c.d_ball - (2.0 - r1).max(r1 - 1.0)).abs() < 1e-12);
        assert!(c.ek_flatness > 0.1);
        // against the √2 ball the distance is 2 - √2
        let ball = vec![2f64.sqrt(); 512];
        let d = volumes::hausdorff_distance(&st.s, &ball).unwrap();
        assert!((d - (2.0 - 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn tso_on_ball() {
        for alpha in [0.5, 1.0, 2.0] {
            let grid = SphereGrid::new(1, 64).unwrap();
            let spec = SpeedSpec::Homogeneous { k: 1, alpha };
            let e = FlowEngine::new(grid, spec.clone(), ConstraintSpec::PreserveVolume, true).unwrap();
            let st = e.initial_state(vec![1.3; 64]).unwrap();
            let io = volumes::inradius_outradius(e.grid(), &st.s);
            let rep = tso_monitor(e.grid(), &st, &spec, &io);
            let want = 4.0 / 3.0 * 1.3f64.powf(-alpha - 1.0);
            assert!((rep.w_max - want).abs() < 1e-12, "{} vs {want}", rep.w_max);
            assert!(rep.min_denominator >= 0.75 * io.rho_minus * (1.0 - 1e-12));
        }
    }

    #[test]
    fn reflection_of_centred_ball_and_ellipse() {
        for dim in [1, 2] {
            let g = SphereGrid::new(dim, if dim == 1 { 128 } else { 16 }).unwrap();
            let c = [0.3, -0.2, if dim == 2 { 0.1 } else { 0.0 }];
            let s = make_shape(&ShapeSpec::Ball { r: 1.0, center: c }, &g).unwrap();
            let dirs = direction_sample(dim, 8, 1);
            let (plus, minus, _) = reflection_sample(&g, &s, &dirs, &volumes::steiner_point(&g, &s));
            for (z, (lp, lm)) in dirs.iter().zip(plus.iter().zip(&minus)) {
                let pz = dot(&c, z);
                assert!((lp - pz).abs() < 1e-12, "{lp} vs {pz}");
                assert!((lm - pz).abs() < 1e-12, "{lm} vs {pz}");
            }
        }
        let g = SphereGrid::new(1, 256).unwrap();
        let s = make_shape(&ShapeSpec::ellipsoid(&[2.0, 1.0]), &g).unwrap();
        let lp = reflection_halfwidth(&g, &s, &[1.0, 0.0, 0.0]);
        assert!(lp.abs() < 1e-6, "{lp}");
    }

    #[test]
    fn containment_tolerance_is_second_order() {
        let tol = |n: usize| {
            let g = SphereGrid::new(1, n).unwrap();
            let s = make_shape(&ShapeSpec::ellipsoid(&[2.0, 1.0]), &g).unwrap();
            containment_tolerance(&g, &s, &geometry::embed_boundary(&g, &s))
        };
        // largest radius of the ellipse is a²/b = 4
        let h = std::f64::consts::TAU / 256.0;
        assert!((tol(256) - 5.0 * 4.0 * h * h / 8.0).abs() < 1e-2 * tol(256));
        assert!((tol(128) / tol(256) - 4.0).abs() < 0.05);
    }

    #[test]
    fn reflection_of_asymmetric_body_exceeds_centre() {
        // egg: the reflection across the Steiner plane is not admissible
        let g = SphereGrid::new(1, 256).unwrap();
        let s = make_shape(
            &ShapeSpec::PerturbedBall {
                r: 1.0,
                harmonic: 3,
                amplitude: 0.05,
            },
            &g,
        )
        .unwrap();
        let lp = reflection_halfwidth(&g, &s, &[1.0, 0.0, 0.0]);
        assert!(lp > 1e-3);
    }

    #[test]
    fn direction_sample_is_unit_and_reproducible() {
        let a = direction_sample(2, 8, 42);
        assert_eq!(a.len(), 14);
        assert_eq!(a, direction_sample(2, 8, 42));
        for z in &a {
            assert!((dot(z, z) - 1.0).abs() < 1e-14);
        }
        for z in direction_sample(1, 8, 42) {
            assert_eq!(z[2], 0.0);
        }
    }
}
