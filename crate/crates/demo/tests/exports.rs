use zml_demo::{error_term_values, z1_values, zeta_curve_values, MAX_POINTS};

#[test]
fn zeta_curve_is_interleaved_and_dips_at_first_zero() {
    let v = zeta_curve_values(14.0, 14.3, 31).unwrap();
    assert_eq!(v.len(), 62);
    assert_eq!(v[0], 14.0);
    let min = v.chunks(2).map(|p| p[1]).fold(f64::INFINITY, f64::min);
    assert!(min < 1e-4, "{min}");
}

#[test]
fn curve_arguments_are_checked() {
    assert!(zeta_curve_values(1.0, 0.0, 10).is_err());
    assert!(zeta_curve_values(0.0, 1.0, MAX_POINTS + 1).is_err());
    assert!(error_term_values(1.0, 10).is_err());
    assert!(error_term_values(1e5, 10).is_err());
}

#[test]
fn error_term_is_small_against_the_main_term() {
    let v = error_term_values(500.0, 50).unwrap();
    for p in v.chunks(2) {
        let t: f64 = p[0];
        assert!(p[1].abs() < 10.0 * t.powf(1.0 / 3.0), "E_1({t}) = {}", p[1]);
    }
}

#[test]
fn z1_methods_agree_where_both_apply() {
    let v = z1_values(2.0, 1.0).unwrap();
    assert_eq!(v.len(), 6);
    assert!((v[0] - v[3]).hypot(v[1] - v[4]) <= v[2] + v[5]);
    let left = z1_values(0.6, 3.0).unwrap();
    assert!(left[0].is_nan() && left[3].is_finite());
    assert!(z1_values(0.1, 0.0).is_err());
}
