//! Two-arm interferometer built from uniform field blocks.
//!
//! Both arms start and end at the same points; the phase difference is the
//! geometric phase of the closed circuit formed by arm 1 and reversed arm 2.
//! Dynamical phases are assumed equal on both arms and cancel.

use serde::{Deserialize, Serialize};

use crate::dynamics::DipoleParticle;
use crate::error::{EngineError, Result};
use crate::fields::{Aabb, FieldConfig, Vec3};
use crate::holonomy::{phase_line_integral_with, PhaseResult};
use crate::path::{PathSpec, CLOSURE_TOL};
use crate::quadrature::QuadOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSpec {
    pub path: PathSpec,
    pub fields: FieldConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferometerSpec {
    pub arm1: ArmSpec,
    pub arm2: ArmSpec,
    pub particle: DipoleParticle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeResult {
    /// `γ_arm1 − γ_arm2`
    pub delta_gamma: f64,
    /// `(1 + cos Δγ) / 2`
    pub intensity: f64,
}

impl FringeResult {
    pub fn from_phase(delta_gamma: f64) -> Self {
        FringeResult {
            delta_gamma,
            intensity: 0.5 * (1.0 + delta_gamma.cos()),
        }
    }
}

/// Geometry of the two-block setup: blocks of length `a` along +y, arms `w`
/// apart in x, joined to the common start and end by field-free leads that
/// extend `lead` along y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CasellaGeometry {
    pub a: f64,
    pub w: f64,
    pub lead: f64,
}

impl CasellaGeometry {
    pub fn new(a: f64, w: f64) -> Self {
        CasellaGeometry { a, w, lead: w }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("w", self.w), ("lead", self.lead)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(EngineError::InvalidGeometry(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Field block of one arm, centred on the arm's straight section.
    pub fn block(&self, x: f64) -> Aabb {
        let half = 0.25 * self.w;
        Aabb {
            min: Vec3::new(x - half, self.lead, -half),
            max: Vec3::new(x + half, self.lead + self.a, half),
        }
    }

    pub fn arm_path(&self, x: f64) -> PathSpec {
        let (l, a) = (self.lead, self.a);
        PathSpec::Polyline {
            vertices: vec![
                Vec3::zeros(),
                Vec3::new(x, l, 0.0),
                Vec3::new(x, l + a, 0.0),
                Vec3::new(0.0, 2.0 * l + a, 0.0),
            ],
        }
    }
}

/// Builds the two-arm setup: electric dipole `d x̂`, magnetic dipole `mu ẑ`;
/// arm 1 through `E = E0 x̂`, `B = B0 ẑ`, arm 2 through the reversed fields.
pub fn build_casella(d: f64, mu: f64, b0: f64, e0: f64, a: f64, w: f64) -> Result<InterferometerSpec> {
    build_casella_with(d, mu, b0, e0, &CasellaGeometry::new(a, w))
}

pub fn build_casella_with(d: f64, mu: f64, b0: f64, e0: f64, geom: &CasellaGeometry) -> Result<InterferometerSpec> {
    geom.validate()?;
    let particle = DipoleParticle::new(1.0, Vec3::new(d, 0.0, 0.0), Vec3::new(0.0, 0.0, mu))?;
    let e = Vec3::new(e0, 0.0, 0.0);
    let b = Vec3::new(0.0, 0.0, b0);
    let (x1, x2) = (-0.5 * geom.w, 0.5 * geom.w);
    let arm1 = ArmSpec {
        path: geom.arm_path(x1),
        fields: FieldConfig::uniform_block(e, b, geom.block(x1)),
    };
    let arm2 = ArmSpec {
        path: geom.arm_path(x2),
        fields: FieldConfig::uniform_block(-e, -b, geom.block(x2)),
    };
    let spec = InterferometerSpec { arm1, arm2, particle };
    spec.validate()?;
    Ok(spec)
}

impl InterferometerSpec {
    pub fn validate(&self) -> Result<()> {
        self.particle.validate()?;
        for arm in [&self.arm1, &self.arm2] {
            if arm.path.is_closed() {
                return Err(EngineError::InvalidGeometry(
                    "interferometer arms must be open paths".into(),
                ));
            }
            arm.fields.validate()?;
        }
        let gap_start = (self.arm1.path.start()? - self.arm2.path.start()?).norm();
        let gap_end = (self.arm1.path.end()? - self.arm2.path.end()?).norm();
        if gap_start > CLOSURE_TOL || gap_end > CLOSURE_TOL {
            return Err(EngineError::InvalidGeometry(
                "arms must share start and end points".into(),
            ));
        }
        Ok(())
    }
}

pub fn arm_phase_result(arm: &ArmSpec, particle: &DipoleParticle, opts: &QuadOptions) -> Result<PhaseResult> {
    phase_line_integral_with(particle, &arm.fields, &arm.path, opts)
}

/// Open-path geometric phase along one arm.
pub fn arm_phase(arm: &ArmSpec, particle: &DipoleParticle) -> Result<f64> {
    Ok(arm_phase_result(arm, particle, &QuadOptions::default())?.gamma_total)
}

pub fn phase_difference(spec: &InterferometerSpec) -> Result<FringeResult> {
    phase_difference_with(spec, &QuadOptions::default())
}

pub fn phase_difference_with(spec: &InterferometerSpec, opts: &QuadOptions) -> Result<FringeResult> {
    spec.validate()?;
    let g1 = arm_phase_result(&spec.arm1, &spec.particle, opts)?.gamma_total;
    let g2 = arm_phase_result(&spec.arm2, &spec.particle, opts)?.gamma_total;
    Ok(FringeResult::from_phase(g1 - g2))
}
