//! Classical motion of a particle with constant electric and magnetic dipole
//! moments in static fields.
//!
//! With `ḋ = μ̇ = 0` the equation of motion is
//!
//! ```text
//! m r̈ = (d·∇)E + (μ·∇)B + v × ∇×(μ×E − d×B)
//! ```
//!
//! Every derivative comes from [`FieldConfig::eval_jacobians`]. For constant
//! `a`, `∇×(a×X) = a (∇·X) − (a·∇)X`, and `(a·∇)X` is the Jacobian of `X`
//! applied to `a`.

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::fields::{all_finite, FieldConfig, Mat3, Vec3};

pub const DEFAULT_DT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleParticle {
    pub mass: f64,
    /// Permanent electric dipole moment.
    pub d: Vec3,
    /// Permanent magnetic dipole moment.
    pub mu: Vec3,
}

impl DipoleParticle {
    pub fn new(mass: f64, d: Vec3, mu: Vec3) -> Result<Self> {
        let p = DipoleParticle { mass, d, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(EngineError::InvalidConfig("mass must be finite and > 0".into()));
        }
        if !all_finite(&self.d) || !all_finite(&self.mu) {
            return Err(EngineError::InvalidConfig("dipole moments must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicState {
    pub r: Vec3,
    pub v: Vec3,
    pub t: f64,
}

impl KinematicState {
    pub fn new(r: Vec3, v: Vec3) -> Self {
        KinematicState { r, v, t: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Rk4,
}

impl Integrator {
    pub fn name(&self) -> &'static str {
        match self {
            Integrator::Rk4 => "rk4",
        }
    }
}

/// States at uniform spacing `dt`. When the run was cut short, `error` holds
/// the reason and `states` the part computed before it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<KinematicState>,
    pub dt: f64,
    pub method: Integrator,
    pub error: Option<EngineError>,
}

impl Trajectory {
    pub fn is_complete(&self) -> bool {
        self.error.is_none()
    }

    pub fn last(&self) -> Option<&KinematicState> {
        self.states.last()
    }
}

/// `∇×(a×X)` for constant `a`, from the Jacobian of `X`.
fn curl_of_cross(a: &Vec3, jac: &Mat3) -> Vec3 {
    a * jac.trace() - jac * a
}

pub fn force(particle: &DipoleParticle, state: &KinematicState, config: &FieldConfig) -> Result<Vec3> {
    let j = config.eval_jacobians(&state.r)?;
    let gradient = j.de * particle.d + j.db * particle.mu;
    let curl = curl_of_cross(&particle.mu, &j.de) - curl_of_cross(&particle.d, &j.db);
    Ok(gradient + state.v.cross(&curl))
}

/// `τ = d×(E + v×B) + μ×(B − v×E)`: each moment crossed with the field it
/// couples to in the interaction Lagrangian.
pub fn torque(particle: &DipoleParticle, state: &KinematicState, config: &FieldConfig) -> Result<Vec3> {
    let f = config.eval_fields(&state.r)?;
    let v = state.v;
    Ok(particle.d.cross(&(f.e + v.cross(&f.b))) + particle.mu.cross(&(f.b - v.cross(&f.e))))
}

/// `P = m v − μ×E + d×B`.
pub fn canonical_momentum(particle: &DipoleParticle, state: &KinematicState, config: &FieldConfig) -> Result<Vec3> {
    let f = config.eval_fields(&state.r)?;
    Ok(particle.mass * state.v - particle.mu.cross(&f.e) + particle.d.cross(&f.b))
}

/// `U = −μ·B − d·E`.
pub fn potential_energy(particle: &DipoleParticle, state: &KinematicState, config: &FieldConfig) -> Result<f64> {
    let f = config.eval_fields(&state.r)?;
    Ok(-particle.mu.dot(&f.b) - particle.d.dot(&f.e))
}

fn acceleration(particle: &DipoleParticle, config: &FieldConfig, r: Vec3, v: Vec3, t: f64) -> Result<Vec3> {
    Ok(force(particle, &KinematicState { r, v, t }, config)? / particle.mass)
}

fn rk4_step(particle: &DipoleParticle, config: &FieldConfig, s: &KinematicState, dt: f64) -> Result<(Vec3, Vec3)> {
    let h = 0.5 * dt;
    let k1r = s.v;
    let k1v = acceleration(particle, config, s.r, s.v, s.t)?;
    let k2r = s.v + h * k1v;
    let k2v = acceleration(particle, config, s.r + h * k1r, k2r, s.t + h)?;
    let k3r = s.v + h * k2v;
    let k3v = acceleration(particle, config, s.r + h * k2r, k3r, s.t + h)?;
    let k4r = s.v + dt * k3v;
    let k4v = acceleration(particle, config, s.r + dt * k3r, k4r, s.t + dt)?;
    let r = s.r + dt / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
    let v = s.v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    Ok((r, v))
}

/// Fixed-step integration of `ṙ = v`, `v̇ = F/m`.
///
/// Invalid inputs are returned as `Err`; a failure part-way through (the
/// particle entering a line core, say) is reported in [`Trajectory::error`].
pub fn integrate_trajectory(
    particle: &DipoleParticle,
    initial: &KinematicState,
    config: &FieldConfig,
    dt: f64,
    steps: usize,
    method: Integrator,
) -> Result<Trajectory> {
    particle.validate()?;
    config.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(EngineError::InvalidConfig("dt must be finite and > 0".into()));
    }
    if !all_finite(&initial.r) || !all_finite(&initial.v) || !initial.t.is_finite() {
        return Err(EngineError::InvalidConfig("initial state must be finite".into()));
    }
    config.eval_jacobians(&initial.r)?;

    let mut states = Vec::with_capacity(steps + 1);
    states.push(*initial);
    let mut error = None;
    let mut current = *initial;
    for n in 1..=steps {
        let step = match method {
            Integrator::Rk4 => rk4_step(particle, config, &current, dt),
        };
        let (r, v) = match step.and_then(|(r, v)| config.check_point(&r).map(|_| (r, v))) {
            Ok(rv) => rv,
            Err(e) => {
                error = Some(e);
                break;
            }
        };
        // times from the step index keep the spacing uniform
        current = KinematicState {
            r,
            v,
            t: initial.t + n as f64 * dt,
        };
        states.push(current);
    }
    Ok(Trajectory {
        states,
        dt,
        method,
        error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Aabb;
    use approx::assert_abs_diff_eq;

    fn particle(d: Vec3, mu: Vec3) -> DipoleParticle {
        DipoleParticle::new(1.0, d, mu).unwrap()
    }

    #[test]
    fn radial_null_force_with_z_moments() {
        let c = FieldConfig::radial_line(1.3, -0.7);
        let p = particle(Vec3::new(0.0, 0.0, 2.0), Vec3::new(0.0, 0.0, 0.5));
        let s = KinematicState::new(Vec3::new(1.2, -0.4, 0.0), Vec3::new(0.3, 0.9, 0.0));
        assert!(force(&p, &s, &c).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn tilted_dipole_force_matches_jacobian() {
        let c = FieldConfig::RadialLine {
            lambda_e: 1.0,
            lambda_m: 0.0,
            core_radius: 0.01,
        };
        let p = particle(Vec3::new(1.0, 0.0, 0.0), Vec3::zeros());
        let s = KinematicState::new(Vec3::new(1.0, 0.0, 0.0), Vec3::zeros());
        assert_abs_diff_eq!(force(&p, &s, &c).unwrap(), Vec3::new(-1.0, 0.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn block_interior_has_no_force() {
        let c = FieldConfig::uniform_block(
            Vec3::new(1.0, 2.0, 3.0),
            Vec3::new(-1.0, 0.5, 2.0),
            Aabb::new(Vec3::repeat(-1.0), Vec3::repeat(1.0)).unwrap(),
        );
        let p = particle(Vec3::new(0.3, 1.0, -2.0), Vec3::new(1.0, 1.0, 1.0));
        let s = KinematicState::new(Vec3::new(0.1, 0.2, 0.3), Vec3::new(5.0, -1.0, 0.2));
        assert_eq!(force(&p, &s, &c).unwrap(), Vec3::zeros());
    }

    #[test]
    fn torque_cases() {
        let c = FieldConfig::uniform_block(
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::zeros(),
            Aabb::new(Vec3::repeat(-1.0), Vec3::repeat(1.0)).unwrap(),
        );
        let p = particle(Vec3::new(0.0, 1.0, 0.0), Vec3::zeros());
        let s = KinematicState::new(Vec3::zeros(), Vec3::zeros());
        assert_eq!(torque(&p, &s, &c).unwrap(), Vec3::new(0.0, 0.0, -1.0));

        // outside the block: no fields, no torque
        let s = KinematicState::new(Vec3::new(5.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 0.0));
        assert_eq!(torque(&p, &s, &c).unwrap(), Vec3::zeros());
    }

    #[test]
    fn radial_torque_velocity_terms_cancel() {
        // with z moments and in-plane r, v the motional terms vanish and what
        // is left is the static part (dλₑ + μλₘ)/ρ ê_φ
        let (le, lm, d, mu) = (0.8, 1.5, 0.4, -0.3);
        let c = FieldConfig::radial_line(le, lm);
        let p = particle(Vec3::new(0.0, 0.0, d), Vec3::new(0.0, 0.0, mu));
        let r = Vec3::new(1.0, 2.0, 0.0);
        let rho = r.norm();
        let e_phi = Vec3::new(-r.y, r.x, 0.0) / rho;
        let expected = e_phi * (d * le + mu * lm) / rho;
        for v in [Vec3::zeros(), Vec3::new(0.7, -1.1, 0.0)] {
            let t = torque(&p, &KinematicState::new(r, v), &c).unwrap();
            assert_abs_diff_eq!(t, expected, epsilon = 1e-15);
        }
        // pure Aharonov-Casher and pure HMW setups are torque free
        let ac = particle(Vec3::zeros(), Vec3::new(0.0, 0.0, mu));
        let t = torque(
            &ac,
            &KinematicState::new(r, Vec3::zeros()),
            &FieldConfig::radial_line(le, 0.0),
        )
        .unwrap();
        assert_eq!(t.norm(), 0.0);
        let hmw = particle(Vec3::new(0.0, 0.0, d), Vec3::zeros());
        let t = torque(
            &hmw,
            &KinematicState::new(r, Vec3::zeros()),
            &FieldConfig::radial_line(0.0, lm),
        )
        .unwrap();
        assert_eq!(t.norm(), 0.0);
    }

    #[test]
    fn canonical_momentum_cases() {
        let c = FieldConfig::RadialLine {
            lambda_e: 1.0,
            lambda_m: 0.0,
            core_radius: 0.01,
        };
        let p = particle(Vec3::zeros(), Vec3::new(0.0, 0.0, 1.0));
        let s = KinematicState::new(Vec3::new(1.0, 0.0, 0.0), Vec3::zeros());
        assert_abs_diff_eq!(
            canonical_momentum(&p, &s, &c).unwrap(),
            Vec3::new(0.0, -1.0, 0.0),
            epsilon = 1e-15
        );

        let zero = FieldConfig::radial_line(0.0, 0.0);
        let p = DipoleParticle::new(2.0, Vec3::new(1.0, 2.0, 3.0), Vec3::new(3.0, 2.0, 1.0)).unwrap();
        let s = KinematicState::new(Vec3::new(1.0, 1.0, 0.0), Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(canonical_momentum(&p, &s, &zero).unwrap(), Vec3::new(2.0, 0.0, 0.0));
    }

    #[test]
    fn potential_energy_cases() {
        let c = FieldConfig::uniform_block(
            Vec3::zeros(),
            Vec3::new(0.0, 0.0, 2.0),
            Aabb::new(Vec3::repeat(-1.0), Vec3::repeat(1.0)).unwrap(),
        );
        let p = particle(Vec3::zeros(), Vec3::new(0.0, 0.0, 3.0));
        let s = KinematicState::new(Vec3::zeros(), Vec3::zeros());
        assert_eq!(potential_energy(&p, &s, &c).unwrap(), -6.0);

        let radial = FieldConfig::radial_line(2.0, 3.0);
        let p = particle(Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, 1.0));
        let s = KinematicState::new(Vec3::new(0.5, 0.7, 0.0), Vec3::zeros());
        assert_eq!(potential_energy(&p, &s, &radial).unwrap(), 0.0);
    }

    #[test]
    fn invalid_particle() {
        assert!(DipoleParticle::new(0.0, Vec3::zeros(), Vec3::zeros()).is_err());
        assert!(DipoleParticle::new(1.0, Vec3::new(f64::NAN, 0.0, 0.0), Vec3::zeros()).is_err());
    }

    #[test]
    fn trajectory_in_zero_field_is_straight() {
        let c = FieldConfig::radial_line(0.0, 0.0);
        let p = particle(Vec3::new(0.3, 0.1, 0.0), Vec3::new(0.0, 1.0, 0.0));
        let s0 = KinematicState::new(Vec3::new(2.0, 0.0, 0.0), Vec3::new(0.1, 0.4, 0.2));
        let tr = integrate_trajectory(&p, &s0, &c, 0.01, 200, Integrator::Rk4).unwrap();
        assert!(tr.is_complete());
        assert_eq!(tr.states.len(), 201);
        for s in &tr.states {
            let exact = s0.r + s0.v * s.t;
            assert!((s.r - exact).norm() <= 1e-13);
        }
        for w in tr.states.windows(2) {
            assert!(w[1].t > w[0].t);
            assert!((w[1].t - w[0].t - 0.01).abs() <= 1e-12);
        }
    }

    #[test]
    fn trajectory_into_core_stops_with_partial_result() {
        let c = FieldConfig::RadialLine {
            lambda_e: 0.0,
            lambda_m: 0.0,
            core_radius: 0.1,
        };
        let p = particle(Vec3::zeros(), Vec3::zeros());
        let s0 = KinematicState::new(Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0));
        let tr = integrate_trajectory(&p, &s0, &c, 0.01, 500, Integrator::Rk4).unwrap();
        assert!(matches!(tr.error, Some(EngineError::SingularityViolation { .. })));
        assert!(tr.states.len() > 1 && tr.states.len() < 501);
        assert!(tr.states.iter().all(|s| c.check_point(&s.r).is_ok()));
    }

    #[test]
    fn trajectory_rejects_bad_inputs() {
        let c = FieldConfig::radial_line(1.0, 1.0);
        let p = particle(Vec3::zeros(), Vec3::zeros());
        let s0 = KinematicState::new(Vec3::new(1.0, 0.0, 0.0), Vec3::zeros());
        assert!(integrate_trajectory(&p, &s0, &c, 0.0, 10, Integrator::Rk4).is_err());
        let inside = KinematicState::new(Vec3::zeros(), Vec3::zeros());
        assert!(integrate_trajectory(&p, &inside, &c, 0.1, 10, Integrator::Rk4).is_err());
    }
}
