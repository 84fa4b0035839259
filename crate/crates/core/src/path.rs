//! Oriented integration paths.
//!
//! A path is broken into pieces that are each smooth in their own parameter
//! `s ∈ [0, 1]`: straight segments for vertex-based paths and quarter-turn
//! arcs for circles. Circles are parametrized exactly, not polygonized.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::fields::{all_finite, Vec3};

/// Closed paths must return to their start within this distance.
pub const CLOSURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PathSpec {
    /// Positive winding is counterclockwise seen from the tip of `normal`.
    Circle {
        center: Vec3,
        radius: f64,
        normal: Vec3,
        winding: i32,
    },
    /// With `closed`, an edge from the last vertex back to the first is added
    /// unless they already coincide.
    Polygon {
        vertices: Vec<Vec3>,
        closed: bool,
    },
    Polyline {
        vertices: Vec<Vec3>,
    },
    /// Densely sampled curve, joined by straight segments.
    Parametric {
        samples: Vec<Vec3>,
        closed: bool,
    },
}

/// One smooth piece of a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    Line {
        a: Vec3,
        b: Vec3,
    },
    Arc {
        center: Vec3,
        u: Vec3,
        w: Vec3,
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
}

impl Piece {
    /// Position and tangent `dr/ds` at `s ∈ [0, 1]`.
    pub fn point_and_tangent(&self, s: f64) -> (Vec3, Vec3) {
        match *self {
            Piece::Line { a, b } => (a + s * (b - a), b - a),
            Piece::Arc {
                center,
                u,
                w,
                radius,
                theta0,
                theta1,
            } => {
                let span = theta1 - theta0;
                let th = theta0 + s * span;
                let (sin, cos) = th.sin_cos();
                (
                    center + radius * (cos * u + sin * w),
                    span * radius * (-sin * u + cos * w),
                )
            }
        }
    }

    pub fn start(&self) -> Vec3 {
        self.point_and_tangent(0.0).0
    }

    pub fn end(&self) -> Vec3 {
        self.point_and_tangent(1.0).0
    }
}

/// Unit vectors `(u, w)` with `u × w = n̂`. For `n̂ = ẑ` this is `(x̂, ŷ)`.
pub fn plane_basis(normal: &Vec3) -> (Vec3, Vec3) {
    let n = normal.normalize();
    let helper = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
        Vec3::x()
    } else if n.y.abs() <= n.z.abs() {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let u = (helper - n * n.dot(&helper)).normalize();
    let w = n.cross(&u);
    (u, w)
}

fn distinct_count(points: &[Vec3]) -> usize {
    let mut distinct: Vec<&Vec3> = Vec::new();
    for p in points {
        if !distinct.iter().any(|q| (*q - p).norm() <= CLOSURE_TOL) {
            distinct.push(p);
        }
    }
    distinct.len()
}

fn line_pieces(points: &[Vec3], closed: bool) -> Vec<Piece> {
    let mut pieces: Vec<Piece> = points
        .windows(2)
        .filter(|w| w[0] != w[1])
        .map(|w| Piece::Line { a: w[0], b: w[1] })
        .collect();
    if closed {
        let (first, last) = (points[0], points[points.len() - 1]);
        if (first - last).norm() > CLOSURE_TOL {
            pieces.push(Piece::Line { a: last, b: first });
        }
    }
    pieces
}

impl PathSpec {
    pub fn circle(center: Vec3, radius: f64, winding: i32) -> Self {
        PathSpec::Circle {
            center,
            radius,
            normal: Vec3::z(),
            winding,
        }
    }

    /// Closed polygon through `(cx ± s/2, cy ± s/2, z)`, counterclockwise.
    pub fn square(center: Vec3, side: f64) -> Self {
        let h = 0.5 * side;
        let vertices = [(-h, -h), (h, -h), (h, h), (-h, h)]
            .iter()
            .map(|&(x, y)| center + Vec3::new(x, y, 0.0))
            .collect();
        PathSpec::Polygon { vertices, closed: true }
    }

    /// Closed curve in the x–y plane sampled at `n` points, counterclockwise.
    pub fn ellipse(center: Vec3, semi_x: f64, semi_y: f64, n: usize) -> Self {
        let samples = (0..n)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                center + Vec3::new(semi_x * th.cos(), semi_y * th.sin(), 0.0)
            })
            .collect();
        PathSpec::Parametric { samples, closed: true }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            PathSpec::Circle { .. } => true,
            PathSpec::Polygon { closed, .. } | PathSpec::Parametric { closed, .. } => *closed,
            PathSpec::Polyline { .. } => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PathSpec::Circle {
                center,
                radius,
                normal,
                winding,
            } => {
                if !all_finite(center) || !all_finite(normal) {
                    return Err(EngineError::InvalidGeometry(
                        "circle center/normal must be finite".into(),
                    ));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(EngineError::InvalidGeometry("circle radius must be > 0".into()));
                }
                if normal.norm() == 0.0 {
                    return Err(EngineError::InvalidGeometry("circle normal must be nonzero".into()));
                }
                if *winding == 0 {
                    return Err(EngineError::InvalidGeometry("circle winding must be nonzero".into()));
                }
                Ok(())
            }
            PathSpec::Polygon { vertices: pts, .. }
            | PathSpec::Polyline { vertices: pts }
            | PathSpec::Parametric { samples: pts, .. } => {
                if !pts.iter().all(all_finite) {
                    return Err(EngineError::InvalidGeometry("path vertices must be finite".into()));
                }
                if distinct_count(pts) < 2 {
                    return Err(EngineError::InvalidGeometry(
                        "path needs at least 2 distinct vertices".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Same curve traversed in the opposite direction.
    pub fn reversed(&self) -> Self {
        match self.clone() {
            PathSpec::Circle {
                center,
                radius,
                normal,
                winding,
            } => PathSpec::Circle {
                center,
                radius,
                normal,
                winding: -winding,
            },
            PathSpec::Polygon { mut vertices, closed } => {
                vertices.reverse();
                PathSpec::Polygon { vertices, closed }
            }
            PathSpec::Polyline { mut vertices } => {
                vertices.reverse();
                PathSpec::Polyline { vertices }
            }
            PathSpec::Parametric { mut samples, closed } => {
                samples.reverse();
                PathSpec::Parametric { samples, closed }
            }
        }
    }

    pub fn start(&self) -> Result<Vec3> {
        Ok(self.pieces()?[0].start())
    }

    pub fn end(&self) -> Result<Vec3> {
        let pieces = self.pieces()?;
        Ok(pieces[pieces.len() - 1].end())
    }

    /// Smooth pieces in traversal order.
    pub fn pieces(&self) -> Result<Vec<Piece>> {
        self.validate()?;
        Ok(match self {
            PathSpec::Circle {
                center,
                radius,
                normal,
                winding,
            } => {
                let (u, w) = plane_basis(normal);
                let sign = f64::from(winding.signum());
                let quarters = 4 * winding.unsigned_abs();
                (0..quarters)
                    .map(|k| Piece::Arc {
                        center: *center,
                        u,
                        w,
                        radius: *radius,
                        theta0: sign * FRAC_PI_2 * k as f64,
                        theta1: sign * FRAC_PI_2 * (k + 1) as f64,
                    })
                    .collect()
            }
            PathSpec::Polygon { vertices, closed } => line_pieces(vertices, *closed),
            PathSpec::Polyline { vertices } => line_pieces(vertices, false),
            PathSpec::Parametric { samples, closed } => line_pieces(samples, *closed),
        })
    }
}
