use dipole_phase::fields::{Aabb, FieldConfig, Vec3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn line_configs() -> Vec<FieldConfig> {
    vec![
        FieldConfig::radial_line(1.7, -0.6),
        FieldConfig::tkachuk_wire(-0.9, 2.3),
    ]
}

fn block() -> FieldConfig {
    FieldConfig::uniform_block(
        Vec3::new(0.4, -1.0, 2.0),
        Vec3::new(1.5, 0.2, -0.7),
        Aabb::new(Vec3::new(-2.0, -1.0, -1.0), Vec3::new(3.0, 2.0, 1.5)).unwrap(),
    )
}

fn rotate_z(v: &Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    Vec3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
}

fn rel_err(a: &dipole_phase::Mat3, b: &dipole_phase::Mat3) -> f64 {
    (a - b).amax() / a.amax().max(f64::MIN_POSITIVE)
}

proptest! {
    #[test]
    fn superposition_is_linear(
        x in -5.0..5.0f64, y in -5.0..5.0f64, z in -2.0..2.0f64,
        le in -3.0..3.0f64, lm in -3.0..3.0f64, l in -3.0..3.0f64,
    ) {
        let r = Vec3::new(x, y, z);
        prop_assume!(x.hypot(y) > 0.01);
        let a = FieldConfig::radial_line(le, lm);
        let b = FieldConfig::tkachuk_wire(l, lm);
        let sum = FieldConfig::superposition(vec![a.clone(), b.clone(), block()]).unwrap();
        let (fa, fb, fc) = (a.eval_fields(&r).unwrap(), b.eval_fields(&r).unwrap(), block().eval_fields(&r).unwrap());
        let fs = sum.eval_fields(&r).unwrap();
        prop_assert!((fs.e - (fa.e + fb.e + fc.e)).amax() <= 1e-14);
        prop_assert!((fs.b - (fa.b + fb.b + fc.b)).amax() <= 1e-14);
    }

    #[test]
    fn line_fields_halve_at_double_radius(x in -5.0..5.0f64, y in -5.0..5.0f64, z in -2.0..2.0f64) {
        prop_assume!(x.hypot(y) > 0.01);
        let r = Vec3::new(x, y, z);
        let far = Vec3::new(2.0 * x, 2.0 * y, z);
        for c in line_configs() {
            let (near, far) = (c.eval_fields(&r).unwrap(), c.eval_fields(&far).unwrap());
            prop_assert!((far.e * 2.0 - near.e).amax() <= 1e-14 * near.e.amax().max(1.0));
            prop_assert!((far.b * 2.0 - near.b).amax() <= 1e-14 * near.b.amax().max(1.0));
        }
    }
}

#[test]
fn line_fields_rotate_with_position() {
    let r = Vec3::new(1.3, 0.4, 0.7);
    for c in line_configs() {
        let base = c.eval_fields(&r).unwrap();
        for k in 0..100 {
            let angle = 0.0628 * k as f64 + 0.01;
            let rotated = c.eval_fields(&rotate_z(&r, angle)).unwrap();
            assert!((rotated.e - rotate_z(&base.e, angle)).amax() <= 1e-12);
            assert!((rotated.b - rotate_z(&base.b, angle)).amax() <= 1e-12);
            assert!((rotated.e.norm() - base.e.norm()).abs() <= 1e-12);
        }
    }
}

#[test]
fn analytic_and_finite_difference_jacobians_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for c in line_configs() {
        for _ in 0..100 {
            let rho = rng.gen_range(0.1..10.0);
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            let z = rng.gen_range(-3.0..3.0);
            let r = Vec3::new(rho * phi.cos(), rho * phi.sin(), z);
            let a = c.eval_jacobians(&r).unwrap();
            let fd = c.finite_difference_jacobians(&r, 1e-5).unwrap();
            assert!(rel_err(&a.de, &fd.de) <= 1e-6, "dE at {r:?}");
            assert!(rel_err(&a.db, &fd.db) <= 1e-6, "dB at {r:?}");
        }
    }
}

#[test]
fn block_jacobians_vanish_inside() {
    let c = block();
    for r in [
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(2.5, 1.5, 1.0),
        Vec3::new(-1.9, -0.9, -0.9),
    ] {
        let a = c.eval_jacobians(&r).unwrap();
        let fd = c.finite_difference_jacobians(&r, 1e-5).unwrap();
        assert_eq!(a.de.amax(), 0.0);
        assert!(fd.de.amax() <= 1e-12 && fd.db.amax() <= 1e-12);
    }
}

#[test]
fn superposition_jacobian_is_sum() {
    let members = vec![
        FieldConfig::radial_line(1.0, 2.0),
        FieldConfig::tkachuk_wire(-0.5, 0.3),
        block(),
    ];
    let sum = FieldConfig::superposition(members.clone()).unwrap();
    let r = Vec3::new(0.7, -0.3, 0.2);
    let total = sum.eval_jacobians(&r).unwrap();
    let mut de = dipole_phase::Mat3::zeros();
    let mut db = dipole_phase::Mat3::zeros();
    for m in &members {
        let j = m.eval_jacobians(&r).unwrap();
        de += j.de;
        db += j.db;
    }
    assert!((total.de - de).amax() <= 1e-12);
    assert!((total.db - db).amax() <= 1e-12);

    let fd = sum.finite_difference_jacobians(&r, 1e-5).unwrap();
    assert!(rel_err(&total.de, &fd.de) <= 1e-6);
}
