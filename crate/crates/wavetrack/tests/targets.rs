//! Frozen values and boundary compatibility of the built-in targets.

mod common;

use common::hierarchy_at;
use wavetrack::optcontrol::{default_quadrature, quadrature_norm};
use wavetrack::quadrature::degree8;
use wavetrack::targets::{eval_target, TargetFunction, TargetKind};

#[test]
fn names_roundtrip() {
    for kind in [
        TargetKind::U1Smooth,
        TargetKind::U2PiecewiseConst,
        TargetKind::U3BilinearHat,
        TargetKind::U4Sine,
    ] {
        assert_eq!(TargetKind::parse(kind.name()), Some(kind));
    }
    assert_eq!(TargetKind::parse("u5"), None);
}

#[test]
fn u1_frozen_point_values() {
    // On the strip centre s = 6t - 3x in [0,2] the default u1 equals
    // (4x(1-x))^3 * s^3 (2-s)^3 / 2. The values below are dyadic rationals.
    assert_eq!(eval_target(TargetKind::U1Smooth, 0.5, 0.5), 27.0 / 128.0);
    assert_eq!(
        eval_target(TargetKind::U1Smooth, 0.25, 0.25),
        91125.0 / 524288.0
    );
    // Peak value 1/2 at x = 1/2, s = 1 (t = 5/12 is not dyadic, hence the
    // tolerance).
    let peak = eval_target(TargetKind::U1Smooth, 0.5, 5.0 / 12.0);
    assert!((peak - 0.5).abs() < 1e-13);
    // Outside the strip.
    assert_eq!(eval_target(TargetKind::U1Smooth, 0.5, 0.8), 0.0);
    assert_eq!(eval_target(TargetKind::U1Smooth, 0.8, 0.1), 0.0);
}

#[test]
fn u1_vanishes_on_all_essential_boundaries() {
    for i in 0..=200 {
        let s = i as f64 / 200.0;
        assert_eq!(eval_target(TargetKind::U1Smooth, 0.0, s), 0.0, "x=0, t={s}");
        assert_eq!(eval_target(TargetKind::U1Smooth, 1.0, s), 0.0, "x=1, t={s}");
        assert_eq!(eval_target(TargetKind::U1Smooth, s, 0.0), 0.0, "t=0, x={s}");
    }
}

#[test]
fn u1_is_continuous_across_the_strip_edges() {
    // Third-order zeros at s = 0 and s = 2: values just inside are tiny.
    let eps = 1e-6;
    for i in 1..20 {
        let x = i as f64 / 20.0;
        let t_lower = x / 2.0 + eps; // s slightly above 0
        let t_upper = x / 2.0 + 1.0 / 3.0 - eps; // s slightly below 2
        assert!(eval_target(TargetKind::U1Smooth, x, t_lower).abs() < 1e-14);
        assert!(eval_target(TargetKind::U1Smooth, x, t_upper).abs() < 1e-14);
    }
}

#[test]
fn u1_verbatim_variant_keeps_the_raw_bump() {
    let verbatim = TargetFunction::new(TargetKind::U1Smooth).with_u1_verbatim(true);
    // Raw value at (1/2, 3/4): (6t-3x-2)^3 (3x-6t)^3 / 2 = -27/2.
    assert_eq!(verbatim.eval(0.5, 0.75), -13.5);
    // The raw case x <= t keeps a nonzero lateral trace, the reason this
    // variant cannot converge to the trial space at a useful rate.
    assert!(verbatim.eval(0.0, 0.25) != 0.0);
    // Default variant is unaffected by the flag on other targets.
    let u2 = TargetFunction::new(TargetKind::U2PiecewiseConst).with_u1_verbatim(true);
    assert_eq!(u2.eval(0.5, 0.5), 1.0);
}

#[test]
fn u2_is_the_indicator_of_the_centre_square() {
    assert_eq!(eval_target(TargetKind::U2PiecewiseConst, 0.5, 0.5), 1.0);
    assert_eq!(eval_target(TargetKind::U2PiecewiseConst, 0.26, 0.74), 1.0);
    assert_eq!(eval_target(TargetKind::U2PiecewiseConst, 0.25, 0.5), 0.0);
    assert_eq!(eval_target(TargetKind::U2PiecewiseConst, 0.5, 0.75), 0.0);
    assert_eq!(eval_target(TargetKind::U2PiecewiseConst, 0.1, 0.9), 0.0);
}

#[test]
fn u3_hat_product_values() {
    assert_eq!(eval_target(TargetKind::U3BilinearHat, 0.5, 0.5), 1.0);
    assert_eq!(eval_target(TargetKind::U3BilinearHat, 0.375, 0.5), 0.5);
    assert_eq!(eval_target(TargetKind::U3BilinearHat, 0.375, 0.375), 0.25);
    assert_eq!(eval_target(TargetKind::U3BilinearHat, 0.25, 0.5), 0.0);
    assert_eq!(eval_target(TargetKind::U3BilinearHat, 0.75, 0.5), 0.0);
    assert_eq!(eval_target(TargetKind::U3BilinearHat, 0.2, 0.2), 0.0);
}

#[test]
fn u4_separable_sine_values() {
    let u4 = |x: f64, t: f64| eval_target(TargetKind::U4Sine, x, t);
    assert!((u4(0.5, 0.5) - 0.5).abs() < 1e-15);
    assert_eq!(u4(0.0, 0.5), 0.0);
    assert!(u4(0.5, 0.0).abs() < 1e-15);
    // t sin(pi t) has a nonzero slope history: check one interior value.
    let want = 0.25 * (std::f64::consts::PI * 0.25).sin() * (std::f64::consts::PI * 0.5).sin();
    assert!((u4(0.5, 0.25) - want).abs() < 1e-15);
}

/// L2 norms over the unit square, against closed forms:
/// ||u2|| = 1/2, ||u3|| = 1/6, ||u4||^2 = 1/12 - 1/(8 pi^2),
/// ||u1||^2 = 262144/27054027 (symbolic integration of the piecewise
/// polynomial).
#[test]
fn target_norms_match_closed_forms() {
    let hierarchy = hierarchy_at(4, 3);
    let mesh = hierarchy.finest();
    let quad = default_quadrature();

    // u3 is piecewise quadratic on this mesh (its kinks lie on mesh
    // lines from level 0 on), so the degree-4 rule is exact.
    let n3 = quadrature_norm(
        mesh,
        |x, t| eval_target(TargetKind::U3BilinearHat, x, t),
        &quad,
    )
    .unwrap();
    assert!((n3 - 1.0 / 6.0).abs() < 1e-14, "u3 norm {n3}");

    // u4 is smooth; a degree-8 rule on a fine mesh nails the norm.
    let n4 = quadrature_norm(
        mesh,
        |x, t| eval_target(TargetKind::U4Sine, x, t),
        &degree8(),
    )
    .unwrap();
    let want4 = (1.0 / 12.0 - 1.0 / (8.0 * std::f64::consts::PI.powi(2))).sqrt();
    assert!((n4 - want4).abs() < 1e-10, "u4 norm {n4} vs {want4}");

    // u1 is piecewise C^2 with strip edges crossing elements; quadrature
    // converges but is not exact at finite depth.
    let n1 = quadrature_norm(
        mesh,
        |x, t| eval_target(TargetKind::U1Smooth, x, t),
        &degree8(),
    )
    .unwrap();
    let want1 = (262144.0 / 27054027.0_f64).sqrt();
    assert!((n1 - want1).abs() < 1e-6, "u1 norm {n1} vs {want1}");

    // u2 is discontinuous: the quadrature norm converges to 1/2 slowly;
    // at this depth it agrees to about a percent.
    let n2 = quadrature_norm(
        mesh,
        |x, t| eval_target(TargetKind::U2PiecewiseConst, x, t),
        &quad,
    )
    .unwrap();
    assert!((n2 - 0.5).abs() < 6e-3, "u2 norm {n2}");
}
