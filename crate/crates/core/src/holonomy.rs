//! Geometric phase of the dipole-carrying particle.
//!
//! The connection is `A = d×B − μ×E` and the phase along an oriented path is
//! `γ = ∫ A·dR`. The `d×B` part is the He-McKellar-Wilkens contribution and the
//! `−μ×E` part the Aharonov-Casher one; both are integrated on the same nodes.
//!
//! Sign convention: `γ` is exactly `∫ (d×B − μ×E)·dR` with counterclockwise
//! (about +z) as positive orientation. For z-aligned moments around a radial
//! line source this gives `2π n (d λₘ − μ λₑ)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::DipoleParticle;
use crate::error::Result;
use crate::fields::{Aabb, FieldConfig, Vec3};
use crate::path::{PathSpec, Piece};
use crate::quadrature::{self, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseResult {
    pub gamma_total: f64,
    /// `∫ (d×B)·dR`
    pub gamma_hmw: f64,
    /// `−∫ (μ×E)·dR`
    pub gamma_ac: f64,
    pub quad_error: f64,
    pub n_evals: usize,
}

/// The two parts `(d×B, −μ×E)` of the connection.
pub fn connection_parts(particle: &DipoleParticle, config: &FieldConfig, r: &Vec3) -> Result<(Vec3, Vec3)> {
    let f = config.eval_fields(r)?;
    Ok((particle.d.cross(&f.b), -particle.mu.cross(&f.e)))
}

/// `d×B(r) − μ×E(r)`.
pub fn connection(particle: &DipoleParticle, config: &FieldConfig, r: &Vec3) -> Result<Vec3> {
    let (hmw, ac) = connection_parts(particle, config, r)?;
    Ok(hmw + ac)
}

fn block_regions<'a>(config: &'a FieldConfig, out: &mut Vec<&'a Aabb>) {
    match config {
        FieldConfig::UniformBlock { region, .. } => out.push(region),
        FieldConfig::Superposition { members } => members.iter().for_each(|m| block_regions(m, out)),
        _ => {}
    }
}

/// Parameters in (0, 1) where an arc crosses a block face plane.
fn arc_breakpoints(regions: &[&Aabb], piece: &Piece) -> Vec<f64> {
    let Piece::Arc {
        center,
        u,
        w,
        radius,
        theta0,
        theta1,
    } = *piece
    else {
        return Vec::new();
    };
    let (lo, hi) = (theta0.min(theta1), theta0.max(theta1));
    let mut out = Vec::new();
    for region in regions {
        for k in 0..3 {
            // R (u_k cos θ + w_k sin θ) = face − c_k
            let (a, b) = (radius * u[k], radius * w[k]);
            let amp = a.hypot(b);
            if amp == 0.0 {
                continue;
            }
            for face in [region.min[k], region.max[k]] {
                let c = (face - center[k]) / amp;
                if c.abs() > 1.0 {
                    continue;
                }
                let phase = b.atan2(a);
                for base in [phase + c.acos(), phase - c.acos()] {
                    let mut th = base + TAU * ((lo - base) / TAU).ceil();
                    while th <= hi {
                        let s = (th - theta0) / (theta1 - theta0);
                        if s > 0.0 && s < 1.0 {
                            out.push(s);
                        }
                        th += TAU;
                    }
                }
            }
        }
    }
    out
}

fn check_clearance(config: &FieldConfig, piece: &Piece) -> Result<()> {
    match piece {
        Piece::Line { a, b } => config.check_segment(a, b),
        Piece::Arc { .. } => (0..=64).try_for_each(|i| config.check_point(&piece.point_and_tangent(i as f64 / 64.0).0)),
    }
}

pub fn phase_line_integral(particle: &DipoleParticle, config: &FieldConfig, path: &PathSpec) -> Result<PhaseResult> {
    phase_line_integral_with(particle, config, path, &QuadOptions::default())
}

/// Line integral of the connection along `path` (open or closed).
///
/// Each smooth piece is split where it crosses a uniform-block face, then
/// integrated adaptively. Pieces are summed in path order.
pub fn phase_line_integral_with(
    particle: &DipoleParticle,
    config: &FieldConfig,
    path: &PathSpec,
    opts: &QuadOptions,
) -> Result<PhaseResult> {
    particle.validate()?;
    config.validate()?;
    opts.validate()?;
    let pieces = path.pieces()?;
    let mut regions = Vec::new();
    block_regions(config, &mut regions);

    let mut result = PhaseResult {
        gamma_total: 0.0,
        gamma_hmw: 0.0,
        gamma_ac: 0.0,
        quad_error: 0.0,
        n_evals: 0,
    };
    for piece in &pieces {
        check_clearance(config, piece)?;
        let mut cuts = match piece {
            Piece::Line { a, b } => config.segment_breakpoints(a, b),
            Piece::Arc { .. } => arc_breakpoints(&regions, piece),
        };
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
        let mut knots = Vec::with_capacity(cuts.len() + 2);
        knots.push(0.0);
        knots.extend(cuts);
        knots.push(1.0);

        for span in knots.windows(2) {
            let est = quadrature::integrate(
                |s| {
                    let (r, tangent) = piece.point_and_tangent(s);
                    let (hmw, ac) = connection_parts(particle, config, &r)?;
                    Ok([hmw.dot(&tangent), ac.dot(&tangent)])
                },
                span[0],
                span[1],
                opts,
            )?;
            result.gamma_hmw += est.value[0];
            result.gamma_ac += est.value[1];
            result.quad_error += est.error;
            result.n_evals += est.n_evals;
        }
    }
    result.gamma_total = result.gamma_hmw + result.gamma_ac;
    Ok(result)
}

/// `exp(−iγ)` for the path's total phase.
pub fn dirac_phase_factor(particle: &DipoleParticle, config: &FieldConfig, path: &PathSpec) -> Result<Complex64> {
    let phase = phase_line_integral(particle, config, path)?;
    Ok(Complex64::from_polar(1.0, -phase.gamma_total))
}

/// Closed-form phases for the standard configurations, with `mu` and `d` the
/// z-components of the moments and `winding` the loop's winding number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ClosedForm {
    Radial {
        mu: f64,
        lambda_e: f64,
        d: f64,
        lambda_m: f64,
        winding: i32,
    },
    Tkachuk {
        mu: f64,
        lambda_e: f64,
        d: f64,
        lambda_m: f64,
        winding: i32,
    },
    /// Two-arm interferometer through uniform blocks of length `a`.
    Casella { d: f64, b0: f64, mu: f64, e0: f64, a: f64 },
}

pub fn closed_form_phase(kind: &ClosedForm) -> f64 {
    match *kind {
        ClosedForm::Radial {
            mu,
            lambda_e,
            d,
            lambda_m,
            winding,
        } => f64::from(winding) * 2.0 * PI * (d * lambda_m - mu * lambda_e),
        ClosedForm::Tkachuk {
            mu,
            lambda_e,
            d,
            lambda_m,
            winding,
        } => f64::from(winding) * 2.0 * PI * (2.0 * d * lambda_m - mu * lambda_e),
        ClosedForm::Casella { d, b0, mu, e0, a } => 2.0 * d * b0 * a + 2.0 * mu * e0 * a,
    }
}

fn dual_config(config: &FieldConfig) -> FieldConfig {
    match config {
        FieldConfig::RadialLine {
            lambda_e,
            lambda_m,
            core_radius,
        } => FieldConfig::RadialLine {
            lambda_e: -lambda_m,
            lambda_m: *lambda_e,
            core_radius: *core_radius,
        },
        // E = λ/ρ, B = 2λₘ/ρ: B' = E needs λₘ' = λ/2, E' = −B needs λ' = −2λₘ
        FieldConfig::TkachukWire {
            lambda,
            lambda_m,
            core_radius,
        } => FieldConfig::TkachukWire {
            lambda: -2.0 * lambda_m,
            lambda_m: 0.5 * lambda,
            core_radius: *core_radius,
        },
        FieldConfig::UniformBlock { e0, b0, region } => FieldConfig::UniformBlock {
            e0: -b0,
            b0: *e0,
            region: *region,
        },
        FieldConfig::Superposition { members } => FieldConfig::Superposition {
            members: members.iter().map(dual_config).collect(),
        },
    }
}

/// Maxwell duality: `μ' = d`, `d' = −μ`, `B' = E`, `E' = −B`.
/// The connection `d×B − μ×E` is unchanged.
pub fn duality_transform(particle: &DipoleParticle, config: &FieldConfig) -> (DipoleParticle, FieldConfig) {
    let dual = DipoleParticle {
        mass: particle.mass,
        d: -particle.mu,
        mu: particle.d,
    };
    (dual, dual_config(config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn zp(d: f64, mu: f64) -> DipoleParticle {
        DipoleParticle::new(1.0, Vec3::new(0.0, 0.0, d), Vec3::new(0.0, 0.0, mu)).unwrap()
    }

    #[test]
    fn connection_cases() {
        let c = FieldConfig::radial_line(0.0, 1.0);
        let a = connection(&zp(1.0, 0.0), &c, &Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(a, Vec3::new(0.0, 1.0, 0.0), epsilon = 1e-15);

        let c = FieldConfig::radial_line(1.0, 0.0);
        let a = connection(&zp(0.0, 1.0), &c, &Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(a, Vec3::new(0.0, -1.0, 0.0), epsilon = 1e-15);

        let a = connection(&zp(0.0, 0.0), &c, &Vec3::new(0.3, 2.0, 1.0)).unwrap();
        assert_eq!(a, Vec3::zeros());
    }

    #[test]
    fn radial_circle_phase() {
        let (le, lm, d, mu) = (0.7, 1.9, 1.3, 0.4);
        let c = FieldConfig::radial_line(le, lm);
        let r = phase_line_integral(&zp(d, mu), &c, &PathSpec::circle(Vec3::zeros(), 2.0, 1)).unwrap();
        assert_abs_diff_eq!(r.gamma_total, 2.0 * PI * (d * lm - mu * le), epsilon = 1e-10);
        assert_abs_diff_eq!(r.gamma_hmw, 2.0 * PI * d * lm, epsilon = 1e-10);
        assert_abs_diff_eq!(r.gamma_ac, -2.0 * PI * mu * le, epsilon = 1e-10);
        assert_eq!(r.gamma_total, r.gamma_hmw + r.gamma_ac);
        assert!(r.quad_error >= 0.0);
    }

    #[test]
    fn tkachuk_circle_phase() {
        let (l, lm, d, mu) = (1.1, 0.6, 0.9, 1.7);
        let c = FieldConfig::tkachuk_wire(l, lm);
        let r = phase_line_integral(&zp(d, mu), &c, &PathSpec::circle(Vec3::zeros(), 2.0, 1)).unwrap();
        assert_abs_diff_eq!(r.gamma_total, 2.0 * PI * (2.0 * d * lm - mu * l), epsilon = 1e-10);
    }

    #[test]
    fn zero_moments_give_zero_phase() {
        let c = FieldConfig::radial_line(3.0, 2.0);
        let r = phase_line_integral(&zp(0.0, 0.0), &c, &PathSpec::square(Vec3::zeros(), 3.0)).unwrap();
        assert_eq!(r.gamma_total, 0.0);
    }

    #[test]
    fn path_through_core_is_rejected() {
        let c = FieldConfig::radial_line(1.0, 1.0);
        let path = PathSpec::Polyline {
            vertices: vec![Vec3::new(-1.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)],
        };
        assert!(matches!(
            phase_line_integral(&zp(1.0, 1.0), &c, &path),
            Err(crate::EngineError::SingularityViolation { .. })
        ));
        let hugging = PathSpec::circle(Vec3::new(0.5, 0.0, 0.0), 0.5, 1);
        assert!(phase_line_integral(&zp(1.0, 1.0), &c, &hugging).is_err());
    }

    #[test]
    fn closed_forms() {
        let radial = ClosedForm::Radial {
            mu: 1.0,
            lambda_e: 1.0,
            d: 0.0,
            lambda_m: 0.0,
            winding: 1,
        };
        assert_abs_diff_eq!(closed_form_phase(&radial), -2.0 * PI, epsilon = 1e-15);
        let casella = ClosedForm::Casella {
            d: 0.5,
            b0: 2.0,
            mu: 0.0,
            e0: 0.0,
            a: 1.0,
        };
        assert_eq!(closed_form_phase(&casella), 2.0);
        let tk = ClosedForm::Tkachuk {
            mu: 0.0,
            lambda_e: 0.0,
            d: 1.0,
            lambda_m: 1.0,
            winding: 1,
        };
        assert_abs_diff_eq!(closed_form_phase(&tk), 4.0 * PI, epsilon = 1e-15);
        let zero = ClosedForm::Casella {
            d: 0.0,
            b0: 0.0,
            mu: 0.0,
            e0: 0.0,
            a: 0.0,
        };
        assert_eq!(closed_form_phase(&zero), 0.0);
    }

    #[test]
    fn dirac_factor() {
        let c = FieldConfig::radial_line(1.0, 1.0);
        let one = dirac_phase_factor(&zp(0.0, 0.0), &c, &PathSpec::circle(Vec3::zeros(), 1.0, 1)).unwrap();
        assert_eq!(one, Complex64::new(1.0, 0.0));

        // γ = 2π(d λₘ − μ λₑ) = 2π · 1/2 = π
        let c = FieldConfig::radial_line(0.0, 0.5);
        let z = dirac_phase_factor(&zp(1.0, 0.0), &c, &PathSpec::circle(Vec3::zeros(), 1.0, 1)).unwrap();
        assert_abs_diff_eq!(z.re, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(z.norm(), 1.0, epsilon = 1e-12);

        let (le, lm, d, mu) = (0.3, 0.45, 1.2, 0.8);
        let c = FieldConfig::radial_line(le, lm);
        let z = dirac_phase_factor(&zp(d, mu), &c, &PathSpec::circle(Vec3::zeros(), 3.0, 1)).unwrap();
        let expected = Complex64::from_polar(1.0, -2.0 * PI * (d * lm - mu * le));
        assert_abs_diff_eq!(z.re, expected.re, epsilon = 1e-10);
        assert_abs_diff_eq!(z.im, expected.im, epsilon = 1e-10);
    }

    #[test]
    fn duality_examples() {
        let p = zp(1.0, 0.0);
        let c = FieldConfig::radial_line(0.0, 1.0);
        let (p2, c2) = duality_transform(&p, &c);
        assert_eq!(p2.mu, Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(p2.d, Vec3::zeros());
        let r = Vec3::new(1.5, -0.5, 0.2);
        assert_eq!(connection(&p, &c, &r).unwrap(), connection(&p2, &c2, &r).unwrap());

        // applying twice negates moments and fields, connection unchanged
        let p = DipoleParticle::new(1.0, Vec3::new(0.2, -1.0, 0.5), Vec3::new(1.0, 0.3, -0.1)).unwrap();
        let c = FieldConfig::tkachuk_wire(0.8, -0.3);
        let (p1, c1) = duality_transform(&p, &c);
        let (p2, c2) = duality_transform(&p1, &c1);
        assert_eq!(p2.d, -p.d);
        assert_eq!(p2.mu, -p.mu);
        let f = c.eval_fields(&r).unwrap();
        let f2 = c2.eval_fields(&r).unwrap();
        assert_eq!(f2.e, -f.e);
        assert_eq!(f2.b, -f.b);
        assert_abs_diff_eq!(
            connection(&p2, &c2, &r).unwrap(),
            connection(&p, &c, &r).unwrap(),
            epsilon = 1e-15
        );

        let zero = zp(0.0, 0.0);
        let (z2, _) = duality_transform(&zero, &c);
        assert_eq!(z2.d, Vec3::zeros());
        assert_eq!(z2.mu, Vec3::zeros());
    }

    #[test]
    fn arc_crossing_block_is_split() {
        // circle of radius 2 through a slab 0 ≤ x ≤ 1 with constant B along z
        let region = Aabb::new(Vec3::new(0.0, -5.0, -1.0), Vec3::new(1.0, 5.0, 1.0)).unwrap();
        let c = FieldConfig::uniform_block(Vec3::zeros(), Vec3::new(0.0, 0.0, 1.0), region);
        let p = DipoleParticle::new(1.0, Vec3::new(1.0, 0.0, 0.0), Vec3::zeros()).unwrap();
        // d×B = x̂×ẑ = −ŷ, so γ = −(Δy across each crossing chord)
        let r = phase_line_integral(&p, &c, &PathSpec::circle(Vec3::zeros(), 2.0, 1)).unwrap();
        // inside arcs: x ∈ [0,1] on both upper and lower halves; upper arc runs
        // from x=1 to x=0 (y from √3 to 2), lower from x=0 to x=1 (y from −2 to −√3)
        let expected = -((2.0 - 3f64.sqrt()) + (-3f64.sqrt() + 2.0));
        assert_abs_diff_eq!(r.gamma_total, expected, epsilon = 1e-12);
    }
}
