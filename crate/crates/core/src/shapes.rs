//! Library of initial bodies, given by their support functions.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{FlowError, Result};
use crate::geometry::{self, Phase};
use crate::grid::{dot, Point, ScalarField, SphereGrid};

#[derive(Clone, Debug, PartialEq)]
pub enum ShapeSpec {
    Ball { r: f64, center: Point },
    /// Semi-axes `a_1..a_{n+1}`.
    Ellipsoid { axes: Vec<f64>, center: Point },
    /// `{x : ‖x‖_p ≤ scale}`, `p ≥ 4`.
    SmoothCube { p: f64, scale: f64 },
    MinkowskiSum(Vec<ShapeSpec>),
    /// `s = r (1 + a Y_m)` with `Y_m = cos mθ` (n = 1) or the zonal Legendre
    /// polynomial `P_m(z_3)` (n = 2).
    PerturbedBall { r: f64, harmonic: usize, amplitude: f64 },
}

impl ShapeSpec {
    pub fn ball(r: f64) -> Self {
        ShapeSpec::Ball { r, center: [0.0; 3] }
    }

    pub fn ellipsoid(axes: &[f64]) -> Self {
        ShapeSpec::Ellipsoid {
            axes: axes.to_vec(),
            center: [0.0; 3],
        }
    }

    /// Checks parameters that do not depend on the grid.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |m: String| Err(FlowError::config(m));
        match self {
            ShapeSpec::Ball { r, .. } if !(*r > 0.0) => bad(format!("ball radius {r} must be positive")),
            ShapeSpec::Ellipsoid { axes, .. } if axes.len() != dim + 1 => {
                bad(format!("ellipsoid needs {} semi-axes for n = {dim}, got {}", dim + 1, axes.len()))
            }
            ShapeSpec::Ellipsoid { axes, .. } if axes.iter().any(|a| !(*a > 0.0)) => {
                bad("ellipsoid semi-axes must be positive".into())
            }
            ShapeSpec::SmoothCube { p, scale } if !(*p >= 4.0 && *scale > 0.0) => {
                bad(format!("smooth cube needs p >= 4 and scale > 0, got p = {p}, scale = {scale}"))
            }
            ShapeSpec::MinkowskiSum(parts) if parts.is_empty() => bad("empty Minkowski sum".into()),
            ShapeSpec::MinkowskiSum(parts) => parts.iter().try_for_each(|p| p.validate(dim)),
            ShapeSpec::PerturbedBall { r, .. } if !(*r > 0.0) => bad(format!("radius {r} must be positive")),
            _ => Ok(()),
        }
    }

    /// Support function at a unit vector.
    pub fn support(&self, dim: usize, z: &Point) -> f64 {
        match self {
            ShapeSpec::Ball { r, center } => r + dot(center, z),
            ShapeSpec::Ellipsoid { axes, center } => {
                let q: f64 = axes.iter().zip(z).map(|(a, c)| (a * c).powi(2)).sum();
                q.sqrt() + dot(center, z)
            }
            ShapeSpec::SmoothCube { p, scale } => {
                let q = p / (p - 1.0);
                let sum: f64 = z[..=dim].iter().map(|c| c.abs().powf(q)).sum();
                scale * sum.powf(1.0 / q)
            }
            ShapeSpec::MinkowskiSum(parts) => parts.iter().map(|p| p.support(dim, z)).sum(),
            ShapeSpec::PerturbedBall { r, harmonic, amplitude } => {
                let y = if dim == 1 {
                    (*harmonic as f64 * z[1].atan2(z[0])).cos()
                } else {
                    legendre(*harmonic, z[2])
                };
                r * (1.0 + amplitude * y)
            }
        }
    }
}

fn legendre(m: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return 1.0;
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Samples the support function of `spec` and checks strict convexity.
pub fn make_shape(spec: &ShapeSpec, grid: &SphereGrid) -> Result<ScalarField> {
    spec.validate(grid.dim())?;
    let s: ScalarField = grid.nodes().iter().map(|z| spec.support(grid.dim(), z)).collect();
    geometry::validate_strict_convexity(grid, &s, geometry::convexity_floor(grid, &s), Phase::Initial)?;
    Ok(s)
}

/// Named shapes shipped with the library for dimension `dim`.
pub fn catalog(dim: usize) -> Vec<(&'static str, ShapeSpec)> {
    if dim == 1 {
        vec![
            ("ball", ShapeSpec::ball(1.3)),
            ("ellipse", ShapeSpec::ellipsoid(&[2.0, 1.0])),
            (
                "ellipse-offset",
                ShapeSpec::Ellipsoid {
                    axes: vec![1.5, 0.7],
                    center: [0.4, -0.3, 0.0],
                },
            ),
            ("smooth-square", ShapeSpec::SmoothCube { p: 4.0, scale: 1.0 }),
            (
                "perturbed",
                ShapeSpec::PerturbedBall {
                    r: 1.0,
                    harmonic: 3,
                    amplitude: 0.1,
                },
            ),
            (
                "sum",
                ShapeSpec::MinkowskiSum(vec![ShapeSpec::ellipsoid(&[2.0, 0.5]), ShapeSpec::ball(0.3)]),
            ),
        ]
    } else {
        vec![
            ("ball", ShapeSpec::ball(1.3)),
            ("ellipsoid", ShapeSpec::ellipsoid(&[1.5, 1.2, 1.0])),
            (
                "ellipsoid-offset",
                ShapeSpec::Ellipsoid {
                    axes: vec![1.2, 0.8, 1.0],
                    center: [0.2, 0.1, -0.3],
                },
            ),
            ("smooth-cube", ShapeSpec::SmoothCube { p: 4.0, scale: 1.0 }),
            (
                "perturbed",
                ShapeSpec::PerturbedBall {
                    r: 1.0,
                    harmonic: 2,
                    amplitude: 0.1,
                },
            ),
            (
                "sum",
                ShapeSpec::MinkowskiSum(vec![ShapeSpec::ellipsoid(&[1.4, 0.6, 0.9]), ShapeSpec::ball(0.3)]),
            ),
        ]
    }
}

/// A random strictly convex shape: an offset ball, ellipsoid, perturbed ball,
/// or a Minkowski sum of an ellipsoid and a ball.
pub fn random_shape<R: Rng>(dim: usize, rng: &mut R) -> ShapeSpec {
    let mut center = [0.0; 3];
    for c in center.iter_mut().take(dim + 1) {
        *c = rng.gen_range(-0.5..0.5);
    }
    let axes = |rng: &mut R| (0..=dim).map(|_| rng.gen_range(0.5..2.0)).collect::<Vec<_>>();
    match rng.gen_range(0..4) {
        0 => ShapeSpec::Ball {
            r: rng.gen_range(0.5..2.0),
            center,
        },
        1 => ShapeSpec::Ellipsoid { axes: axes(rng), center },
        2 => {
            let harmonic = rng.gen_range(2..6usize);
            // τ ∝ 1 + a (1 - m²) cos mθ for n = 1: keep well inside convexity
            let limit = 0.5 / ((harmonic * harmonic) as f64 - 1.0);
            ShapeSpec::PerturbedBall {
                r: rng.gen_range(0.5..2.0),
                harmonic,
                amplitude: rng.gen_range(-limit..limit),
            }
        }
        _ => ShapeSpec::MinkowskiSum(vec![
            ShapeSpec::Ellipsoid { axes: axes(rng), center },
            ShapeSpec::ball(rng.gen_range(0.1..1.0)),
        ]),
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn fmt_center(c: &Point) -> String {
    if c.iter().all(|&x| x == 0.0) {
        String::new()
    } else {
        let dim = if c[2] == 0.0 { 2 } else { 3 };
        format!("@{}", join(&c[..dim]))
    }
}

/// Text form used in configuration files, e.g. `ball:1.3@0.2,0`,
/// `ellipsoid:2,1`, `pcube:4,1`, `perturbed:1,2,0.1`, `sum:ellipsoid:2,1+ball:0.5`.
impl fmt::Display for ShapeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeSpec::Ball { r, center } => write!(f, "ball:{r}{}", fmt_center(center)),
            ShapeSpec::Ellipsoid { axes, center } => write!(f, "ellipsoid:{}{}", join(axes), fmt_center(center)),
            ShapeSpec::SmoothCube { p, scale } => write!(f, "pcube:{p},{scale}"),
            ShapeSpec::MinkowskiSum(parts) => {
                let parts: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "sum:{}", parts.join("+"))
            }
            ShapeSpec::PerturbedBall { r, harmonic, amplitude } => write!(f, "perturbed:{r},{harmonic},{amplitude}"),
        }
    }
}

fn numbers(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| FlowError::config(format!("`{t}` is not a number")))
        })
        .collect()
}

impl FromStr for ShapeSpec {
    type Err = FlowError;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let (kind, rest) = text
            .split_once(':')
            .ok_or_else(|| FlowError::config(format!("shape `{text}` lacks a `kind:` prefix")))?;
        if kind == "sum" {
            let parts = rest.split('+').map(str::parse).collect::<Result<Vec<_>>>()?;
            return Ok(ShapeSpec::MinkowskiSum(parts));
        }
        let (args, center) = match rest.split_once('@') {
            Some((a, c)) => {
                let c = numbers(c)?;
                if !(2..=3).contains(&c.len()) {
                    return Err(FlowError::config(format!("centre `{rest}` needs 2 or 3 coordinates")));
                }
                let mut p = [0.0; 3];
                p[..c.len()].copy_from_slice(&c);
                (a, p)
            }
            None => (rest, [0.0; 3]),
        };
        let v = numbers(args)?;
        let arity = |n: usize| {
            if v.len() == n {
                Ok(())
            } else {
                Err(FlowError::config(format!("`{kind}` takes {n} parameters, got {}", v.len())))
            }
        };
        match kind {
            "ball" => {
                arity(1)?;
                Ok(ShapeSpec::Ball { r: v[0], center })
            }
            "ellipsoid" => Ok(ShapeSpec::Ellipsoid { axes: v, center }),
            "pcube" => {
                arity(2)?;
                Ok(ShapeSpec::SmoothCube { p: v[0], scale: v[1] })
            }
            "perturbed" => {
                arity(3)?;
                if v[1] < 0.0 || v[1].fract() != 0.0 {
                    return Err(FlowError::config(format!("harmonic index {} must be a whole number", v[1])));
                }
                Ok(ShapeSpec::PerturbedBall {
                    r: v[0],
                    harmonic: v[1] as usize,
                    amplitude: v[2],
                })
            }
            other => Err(FlowError::config(format!("unknown shape kind `{other}`"))),
        }
    }
}
