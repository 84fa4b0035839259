//! Static electromagnetic field configurations.
//!
//! Line sources (`RadialLine`, `TkachukWire`) sit on the z-axis and produce
//! fields `(λ/ρ) ê_ρ`; they are singular on the axis, so every evaluation
//! closer than `core_radius` to the axis is rejected. `UniformBlock` is a
//! constant field inside an axis-aligned box and zero outside.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};

pub type Vec3 = Vector3<f64>;

/// Field Jacobian: entry `(i, j)` is `∂_j` of component `i`.
pub type Mat3 = Matrix3<f64>;

pub const DEFAULT_CORE_RADIUS: f64 = 1e-3;

/// Distance from a block face inside which Jacobians are refused.
pub const DELTA_EDGE: f64 = 1e-9;

/// Axis-aligned box `[min, max]` (closed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Result<Self> {
        let b = Aabb { min, max };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !all_finite(&self.min) || !all_finite(&self.max) {
            return Err(EngineError::InvalidConfig("block corners must be finite".into()));
        }
        for k in 0..3 {
            if self.max[k] <= self.min[k] {
                return Err(EngineError::InvalidConfig(format!(
                    "block extent along axis {k} must be strictly positive"
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, r: &Vec3) -> bool {
        (0..3).all(|k| r[k] >= self.min[k] && r[k] <= self.max[k])
    }

    /// Euclidean distance from `r` to the surface of the box.
    pub fn distance_to_surface(&self, r: &Vec3) -> f64 {
        if self.contains(r) {
            (0..3)
                .map(|k| (r[k] - self.min[k]).min(self.max[k] - r[k]))
                .fold(f64::INFINITY, f64::min)
        } else {
            let outside: Vec3 = Vec3::from_fn(|k, _| (self.min[k] - r[k]).max(0.0).max(r[k] - self.max[k]));
            outside.norm()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FieldConfig {
    /// `E = (λₑ/ρ) ê_ρ`, `B = (λₘ/ρ) ê_ρ` about the z-axis.
    RadialLine {
        lambda_e: f64,
        lambda_m: f64,
        core_radius: f64,
    },
    /// Charged ferromagnetic wire along z: `B = (2λₘ/ρ) ê_ρ`, `E = (λ/ρ) ê_ρ`.
    TkachukWire {
        lambda: f64,
        lambda_m: f64,
        core_radius: f64,
    },
    UniformBlock {
        e0: Vec3,
        b0: Vec3,
        region: Aabb,
    },
    Superposition {
        members: Vec<FieldConfig>,
    },
}

/// Electric and magnetic field at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub e: Vec3,
    pub b: Vec3,
}

impl FieldSample {
    pub fn zero() -> Self {
        FieldSample {
            e: Vec3::zeros(),
            b: Vec3::zeros(),
        }
    }
}

/// Jacobians of `E` and `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldJacobians {
    pub de: Mat3,
    pub db: Mat3,
}

impl FieldJacobians {
    pub fn zero() -> Self {
        FieldJacobians {
            de: Mat3::zeros(),
            db: Mat3::zeros(),
        }
    }
}

pub(crate) fn all_finite(v: &Vec3) -> bool {
    v.iter().all(|c| c.is_finite())
}

pub fn cylindrical_radius(r: &Vec3) -> f64 {
    r.x.hypot(r.y)
}

/// `λ (x, y, 0) / ρ²`.
fn line_field(strength: f64, r: &Vec3) -> Vec3 {
    let rho2 = r.x * r.x + r.y * r.y;
    Vec3::new(strength * r.x / rho2, strength * r.y / rho2, 0.0)
}

fn line_jacobian(strength: f64, r: &Vec3) -> Mat3 {
    let (x, y) = (r.x, r.y);
    let rho2 = x * x + y * y;
    let rho4 = rho2 * rho2;
    let dxx = strength * (y * y - x * x) / rho4;
    let dxy = -2.0 * strength * x * y / rho4;
    let dyy = strength * (x * x - y * y) / rho4;
    Mat3::new(dxx, dxy, 0.0, dxy, dyy, 0.0, 0.0, 0.0, 0.0)
}

fn check_core(r: &Vec3, core_radius: f64) -> Result<()> {
    let rho = cylindrical_radius(r);
    if rho < core_radius || !rho.is_finite() {
        return Err(EngineError::SingularityViolation { rho, core_radius });
    }
    Ok(())
}

/// Smallest cylindrical radius reached by the straight segment `a → b`.
pub fn segment_min_rho(a: &Vec3, b: &Vec3) -> f64 {
    let (ax, ay) = (a.x, a.y);
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (-(ax * dx + ay * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (ax + t * dx).hypot(ay + t * dy)
}

impl FieldConfig {
    pub fn radial_line(lambda_e: f64, lambda_m: f64) -> Self {
        FieldConfig::RadialLine {
            lambda_e,
            lambda_m,
            core_radius: DEFAULT_CORE_RADIUS,
        }
    }

    pub fn tkachuk_wire(lambda: f64, lambda_m: f64) -> Self {
        FieldConfig::TkachukWire {
            lambda,
            lambda_m,
            core_radius: DEFAULT_CORE_RADIUS,
        }
    }

    pub fn uniform_block(e0: Vec3, b0: Vec3, region: Aabb) -> Self {
        FieldConfig::UniformBlock { e0, b0, region }
    }

    pub fn superposition(members: Vec<FieldConfig>) -> Result<Self> {
        let c = FieldConfig::Superposition { members };
        c.validate()?;
        Ok(c)
    }

    /// Checks every structural invariant, recursively.
    pub fn validate(&self) -> Result<()> {
        match self {
            FieldConfig::RadialLine {
                lambda_e: a,
                lambda_m: b,
                core_radius,
            }
            | FieldConfig::TkachukWire {
                lambda: a,
                lambda_m: b,
                core_radius,
            } => {
                if !a.is_finite() || !b.is_finite() {
                    return Err(EngineError::InvalidConfig("line densities must be finite".into()));
                }
                if !(core_radius.is_finite() && *core_radius > 0.0) {
                    return Err(EngineError::InvalidConfig("core_radius must be > 0".into()));
                }
                Ok(())
            }
            FieldConfig::UniformBlock { e0, b0, region } => {
                if !all_finite(e0) || !all_finite(b0) {
                    return Err(EngineError::InvalidConfig("block fields must be finite".into()));
                }
                region.validate()
            }
            FieldConfig::Superposition { members } => {
                if members.is_empty() {
                    return Err(EngineError::InvalidConfig("superposition must be non-empty".into()));
                }
                members.iter().try_for_each(FieldConfig::validate)
            }
        }
    }

    /// True for the singular line-source variants.
    pub fn is_line_source(&self) -> bool {
        matches!(self, FieldConfig::RadialLine { .. } | FieldConfig::TkachukWire { .. })
    }

    /// Largest core radius among line sources in this configuration.
    pub fn max_core_radius(&self) -> Option<f64> {
        match self {
            FieldConfig::RadialLine { core_radius, .. } | FieldConfig::TkachukWire { core_radius, .. } => {
                Some(*core_radius)
            }
            FieldConfig::UniformBlock { .. } => None,
            FieldConfig::Superposition { members } => {
                members.iter().filter_map(FieldConfig::max_core_radius).reduce(f64::max)
            }
        }
    }

    /// Fails if `r` is inside any line-source core.
    pub fn check_point(&self, r: &Vec3) -> Result<()> {
        match self.max_core_radius() {
            Some(core) => check_core(r, core),
            None => Ok(()),
        }
    }

    /// Fails if the straight segment `a → b` passes through any line-source core.
    pub fn check_segment(&self, a: &Vec3, b: &Vec3) -> Result<()> {
        match self.max_core_radius() {
            Some(core) => {
                let rho = segment_min_rho(a, b);
                if rho < core {
                    Err(EngineError::SingularityViolation { rho, core_radius: core })
                } else {
                    Ok(())
                }
            }
            None => Ok(()),
        }
    }

    /// Parameters `t ∈ (0, 1)` where `a + t (b − a)` crosses a block face plane,
    /// sorted and deduplicated. Integrands are only piecewise smooth across these.
    pub fn segment_breakpoints(&self, a: &Vec3, b: &Vec3) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_breakpoints(a, b, &mut out);
        out.sort_by(f64::total_cmp);
        out.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
        out
    }

    fn collect_breakpoints(&self, a: &Vec3, b: &Vec3, out: &mut Vec<f64>) {
        match self {
            FieldConfig::UniformBlock { region, .. } => {
                let d = b - a;
                for k in 0..3 {
                    if d[k] == 0.0 {
                        continue;
                    }
                    for face in [region.min[k], region.max[k]] {
                        let t = (face - a[k]) / d[k];
                        if t > 0.0 && t < 1.0 {
                            out.push(t);
                        }
                    }
                }
            }
            FieldConfig::Superposition { members } => {
                for m in members {
                    m.collect_breakpoints(a, b, out);
                }
            }
            _ => {}
        }
    }

    pub fn eval_fields(&self, r: &Vec3) -> Result<FieldSample> {
        match self {
            FieldConfig::RadialLine {
                lambda_e,
                lambda_m,
                core_radius,
            } => {
                check_core(r, *core_radius)?;
                Ok(FieldSample {
                    e: line_field(*lambda_e, r),
                    b: line_field(*lambda_m, r),
                })
            }
            FieldConfig::TkachukWire {
                lambda,
                lambda_m,
                core_radius,
            } => {
                check_core(r, *core_radius)?;
                Ok(FieldSample {
                    e: line_field(*lambda, r),
                    b: line_field(2.0 * lambda_m, r),
                })
            }
            FieldConfig::UniformBlock { e0, b0, region } => {
                if region.contains(r) {
                    Ok(FieldSample { e: *e0, b: *b0 })
                } else {
                    Ok(FieldSample::zero())
                }
            }
            FieldConfig::Superposition { members } => {
                let mut acc = FieldSample::zero();
                for m in members {
                    let s = m.eval_fields(r)?;
                    acc.e += s.e;
                    acc.b += s.b;
                }
                Ok(acc)
            }
        }
    }

    pub fn eval_jacobians(&self, r: &Vec3) -> Result<FieldJacobians> {
        match self {
            FieldConfig::RadialLine {
                lambda_e,
                lambda_m,
                core_radius,
            } => {
                check_core(r, *core_radius)?;
                Ok(FieldJacobians {
                    de: line_jacobian(*lambda_e, r),
                    db: line_jacobian(*lambda_m, r),
                })
            }
            FieldConfig::TkachukWire {
                lambda,
                lambda_m,
                core_radius,
            } => {
                check_core(r, *core_radius)?;
                Ok(FieldJacobians {
                    de: line_jacobian(*lambda, r),
                    db: line_jacobian(2.0 * lambda_m, r),
                })
            }
            FieldConfig::UniformBlock { region, .. } => {
                let distance = region.distance_to_surface(r);
                if distance < DELTA_EDGE {
                    return Err(EngineError::BoundaryEvaluation {
                        distance,
                        delta_edge: DELTA_EDGE,
                    });
                }
                Ok(FieldJacobians::zero())
            }
            FieldConfig::Superposition { members } => {
                let mut acc = FieldJacobians::zero();
                for m in members {
                    let j = m.eval_jacobians(r)?;
                    acc.de += j.de;
                    acc.db += j.db;
                }
                Ok(acc)
            }
        }
    }

    /// Central-difference Jacobians with step `h`, O(h²). Independent of
    /// [`FieldConfig::eval_jacobians`]; only [`FieldConfig::eval_fields`] is used.
    pub fn finite_difference_jacobians(&self, r: &Vec3, h: f64) -> Result<FieldJacobians> {
        if !(h.is_finite() && h > 0.0) {
            return Err(EngineError::InvalidConfig("finite-difference step must be > 0".into()));
        }
        let mut out = FieldJacobians::zero();
        for j in 0..3 {
            let mut step = Vec3::zeros();
            step[j] = h;
            let plus = self.eval_fields(&(r + step))?;
            let minus = self.eval_fields(&(r - step))?;
            out.de.set_column(j, &((plus.e - minus.e) / (2.0 * h)));
            out.db.set_column(j, &((plus.b - minus.b) / (2.0 * h)));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn block() -> FieldConfig {
        FieldConfig::uniform_block(
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 0.0, 2.0),
            Aabb::new(Vec3::new(-1.0, -1.0, -1.0), Vec3::new(1.0, 1.0, 1.0)).unwrap(),
        )
    }

    #[test]
    fn radial_line_magnetic_field() {
        let c = FieldConfig::RadialLine {
            lambda_e: 0.0,
            lambda_m: 1.0,
            core_radius: 0.01,
        };
        let s = c.eval_fields(&Vec3::new(2.0, 0.0, 0.0)).unwrap();
        assert_eq!(s.e, Vec3::zeros());
        assert_abs_diff_eq!(s.b, Vec3::new(0.5, 0.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn tkachuk_doubles_magnetic_density() {
        let c = FieldConfig::TkachukWire {
            lambda: 0.0,
            lambda_m: 1.0,
            core_radius: 0.01,
        };
        let s = c.eval_fields(&Vec3::new(4.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(s.b, Vec3::new(0.5, 0.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn uniform_block_inside_and_outside() {
        let s = block().eval_fields(&Vec3::new(0.2, 0.1, 0.0)).unwrap();
        assert_eq!(s.e, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(s.b, Vec3::new(0.0, 0.0, 2.0));
        let s = block().eval_fields(&Vec3::new(3.0, 0.0, 0.0)).unwrap();
        assert_eq!(s, FieldSample::zero());
    }

    #[test]
    fn superposition_adds_members() {
        let c = FieldConfig::superposition(vec![
            FieldConfig::radial_line(1.0, 0.0),
            FieldConfig::radial_line(1.0, 0.0),
        ])
        .unwrap();
        let s = c.eval_fields(&Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(s.e, Vec3::new(2.0, 0.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn core_is_rejected() {
        let c = FieldConfig::RadialLine {
            lambda_e: 1.0,
            lambda_m: 1.0,
            core_radius: 0.1,
        };
        let err = c.eval_fields(&Vec3::new(0.05, 0.0, 3.0)).unwrap_err();
        assert!(matches!(err, EngineError::SingularityViolation { .. }));
        assert!(c.eval_jacobians(&Vec3::new(0.0, 0.0, 0.0)).is_err());
        // stencil of the finite-difference oracle enters the core
        assert!(c.finite_difference_jacobians(&Vec3::new(0.1, 0.0, 0.0), 1e-3).is_err());
    }

    #[test]
    fn invalid_configs() {
        assert!(FieldConfig::superposition(vec![]).is_err());
        assert!(Aabb::new(Vec3::zeros(), Vec3::new(1.0, 0.0, 1.0)).is_err());
        let c = FieldConfig::RadialLine {
            lambda_e: 1.0,
            lambda_m: 0.0,
            core_radius: 0.0,
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn radial_jacobian_values() {
        let c = FieldConfig::RadialLine {
            lambda_e: 1.0,
            lambda_m: 0.0,
            core_radius: 0.01,
        };
        let j = c.eval_jacobians(&Vec3::new(1.0, 0.0, 0.0)).unwrap();
        let expected = Mat3::new(-1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0);
        assert_abs_diff_eq!(j.de, expected, epsilon = 1e-15);
        assert_eq!(j.db, Mat3::zeros());

        let lambda = 3.0;
        let c = FieldConfig::radial_line(lambda, 0.0);
        let j = c.eval_jacobians(&Vec3::new(0.0, 2.0, 0.0)).unwrap();
        assert_abs_diff_eq!(j.de[(1, 1)], -lambda / 4.0, epsilon = 1e-15);

        let fd = c.finite_difference_jacobians(&Vec3::new(0.0, 2.0, 0.0), 1e-5).unwrap();
        assert_abs_diff_eq!(fd.de, j.de, epsilon = 1e-9);
    }

    #[test]
    fn block_jacobians() {
        let j = block().eval_jacobians(&Vec3::new(0.3, 0.0, 0.0)).unwrap();
        assert_eq!(j, FieldJacobians::zero());
        let fd = block()
            .finite_difference_jacobians(&Vec3::new(0.3, 0.0, 0.0), 1e-5)
            .unwrap();
        assert!(fd.de.abs().max() <= 1e-12 && fd.db.abs().max() <= 1e-12);

        let err = block().eval_jacobians(&Vec3::new(1.0 - 1e-10, 0.0, 0.0)).unwrap_err();
        assert!(matches!(err, EngineError::BoundaryEvaluation { .. }));
        let err = block().eval_jacobians(&Vec3::new(1.0 + 5e-10, 0.0, 0.0)).unwrap_err();
        assert!(matches!(err, EngineError::BoundaryEvaluation { .. }));
        assert!(block().eval_jacobians(&Vec3::new(1.0 + 1e-6, 0.0, 0.0)).is_ok());
    }

    #[test]
    fn breakpoints_on_segment() {
        let a = Vec3::new(-3.0, 0.0, 0.0);
        let b = Vec3::new(3.0, 0.0, 0.0);
        let t = block().segment_breakpoints(&a, &b);
        assert_eq!(t.len(), 2);
        assert_abs_diff_eq!(t[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t[1], 2.0 / 3.0, epsilon = 1e-15);
        assert!(FieldConfig::radial_line(1.0, 1.0)
            .segment_breakpoints(&a, &b)
            .is_empty());
    }

    #[test]
    fn segment_clearance() {
        let c = FieldConfig::radial_line(1.0, 1.0);
        let a = Vec3::new(-1.0, 0.0, 0.0);
        let b = Vec3::new(1.0, 0.0, 0.0);
        assert!(c.check_segment(&a, &b).is_err());
        let a = Vec3::new(-1.0, 0.5, 0.0);
        let b = Vec3::new(1.0, 0.5, 0.0);
        assert!(c.check_segment(&a, &b).is_ok());
        assert_abs_diff_eq!(segment_min_rho(&a, &b), 0.5, epsilon = 1e-15);
    }
}
