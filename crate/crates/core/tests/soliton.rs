use approx::assert_relative_eq;
use nlsdelta::numeric::adaptive_simpson;
use nlsdelta::soliton::*;
use nlsdelta::SolitonParams;
use proptest::prelude::*;

fn focusing(p: f64, omega: f64) -> SolitonParams {
    SolitonParams::focusing(-1.0, p, omega).unwrap()
}

// mpmath, 30 digits: (7/2)^{1/5} cosh(artanh(1/√2))^{−2/5}.
const Q0_P5_W1: f64 = 1.118_426_914_720_144_7;
// mpmath quadrature of 2∫₀^∞ Q² at q=−1, p=5.
const MASS_P5_W1: f64 = 0.967_776_515_862_727_7;
const MASS_P5_W149171: f64 = 1.088_913_233_834_256_8;
const DMASS_P5_W1: f64 = 0.403_573_853_841_895_9;
// mpmath findroot of dM/dω at q=−1, p=5.
const OMEGA_CRIT_P5: f64 = 5.851_632_622_132_802;

#[test]
fn profile_at_origin_matches_extended_precision() {
    assert_relative_eq!(soliton_profile(&focusing(5.0, 1.0), 0.0), Q0_P5_W1, max_relative = 1e-14);
}

#[test]
fn vanishing_coupling_limit_at_origin() {
    for (p, w) in [(5.0, 1.0), (3.0, 0.7), (6.5, 2.0)] {
        let sp = SolitonParams::focusing(-1e-12, p, w).unwrap();
        let expected = ((p + 2.0) * w / 2.0_f64).powf(1.0 / p);
        assert_relative_eq!(soliton_profile(&sp, 0.0), expected, max_relative = 1e-10);
    }
}

#[test]
fn jump_condition_in_one_sided_derivatives() {
    for sp in [focusing(5.0, 1.0), focusing(4.4, 3.0), SolitonParams::defocusing(-1.3, 5.0, 0.4).unwrap()] {
        let jump = soliton_dx(&sp, 0.0) - soliton_dx_left_at_origin(&sp);
        assert!((jump - 2.0 * sp.q * soliton_profile(&sp, 0.0)).abs() < 1e-10);
    }
}

#[test]
fn regime_violations_are_parameter_errors() {
    assert!(SolitonParams::focusing(-1.0, 5.0, 0.4).is_err());
    assert!(SolitonParams::defocusing(-1.0, 5.0, 0.6).is_err());
    assert!(SolitonParams::focusing(0.5, 5.0, 1.0).is_err());
}

#[test]
fn mass_matches_quadrature_oracle() {
    assert_relative_eq!(soliton_mass(&focusing(5.0, 1.0)), MASS_P5_W1, max_relative = 1e-9);
    assert_relative_eq!(soliton_mass(&focusing(5.0, 1.49171)), MASS_P5_W149171, max_relative = 1e-9);
    assert_relative_eq!(mass_derivative(&focusing(5.0, 1.0)), DMASS_P5_W1, max_relative = 1e-7);
}

#[test]
fn mass_at_tabulated_resonances() {
    for (p, w, m) in [(5.0, 1.49171, 1.089), (4.2, 2.278, 1.286), (6.0, 1.116, 0.989)] {
        let mass = soliton_mass(&focusing(p, w));
        assert!((mass - m).abs() / m < 0.02, "p={p}: {mass} vs {m}");
    }
}

#[test]
fn mass_halves_agree() {
    let sp = focusing(5.0, 1.3);
    let x = sp.truncation_radius(1e-12);
    let right = adaptive_simpson(|x| soliton_profile(&sp, x).powi(2), 0.0, x, 1e-14);
    let left = adaptive_simpson(|x| soliton_profile(&sp, x).powi(2), -x, 0.0, 1e-14);
    assert!((right - left).abs() < 1e-10);
}

#[test]
fn inner_product_signs() {
    let d = SolitonParams::defocusing(-1.0, 5.0, 0.25).unwrap();
    assert!(q_dq_inner(&d) < 0.0);
    for w in [0.55, 1.0, 3.0, 5.5] {
        assert!(q_dq_inner(&focusing(5.0, w)) > 0.0, "omega = {w}");
    }
    assert!(q_dq_inner(&focusing(5.0, 6.5)) < 0.0);
}

#[test]
fn critical_frequency_matches_oracle_and_is_a_root() {
    let w = critical_frequency(-1.0, 5.0).unwrap();
    assert!((w - OMEGA_CRIT_P5).abs() < 1e-9);
    assert!(w > 1.50);
    let sp = focusing(5.0, w);
    assert!(q_dq_inner(&sp).abs() < 1e-8 * soliton_mass(&sp));
    assert!(omega_identity_residual(-1.0, 5.0, w).abs() < 1e-8);
}

#[test]
fn critical_frequency_trend() {
    let ws: Vec<f64> = [5.0, 6.0, 8.0, 12.0].iter().map(|&p| critical_frequency(-1.0, p).unwrap()).collect();
    assert!(ws.windows(2).all(|w| w[1] < w[0]), "{ws:?}");
    assert!(ws.iter().all(|&w| w > 0.5));
    assert!(critical_frequency(-1.0, 4.05).unwrap() > ws[0]);
    assert!(critical_frequency(-1.0, 3.5).is_err());
}

#[test]
fn zero_frequency_profile_values() {
    assert_relative_eq!(zero_frequency_profile(-1.0, 2.0, 0.0), 1.0, max_relative = 1e-15);
    // p = 3: Q₀² ~ x^{−4/3}; increments over successive decades shrink
    // geometrically by 10^{1/3}, so the integral converges.
    let m = |a: f64, b: f64| adaptive_simpson(|s| zero_frequency_profile(-1.0, 3.0, s).powi(2), a, b, 1e-12);
    let (d1, d2) = (m(1e4, 1e5), m(1e5, 1e6));
    assert!(((d1 / d2).log10() - 1.0 / 3.0).abs() < 0.01, "{d1} {d2}");
    // p = 5: ∫₀^X Q₀² grows like X^{1−4/p}.
    let m5 = |x: f64| adaptive_simpson(|s| zero_frequency_profile(-1.0, 5.0, s).powi(2), 0.0, x, 1e-10);
    let ratio = m5(1e6) / m5(1e5);
    assert!((ratio.log10() - 0.2).abs() < 0.02, "ratio {ratio}");
}

/// `max |−½Q″ + ωQ + σQ^{p+1}|` over interior nodes of `(0, 10]`.
fn half_line_residual(sp: &SolitonParams, h: f64) -> f64 {
    let n = (10.0 / h).round() as usize;
    (1..n)
        .map(|j| {
            let x = j as f64 * h;
            let (a, b, c) = (soliton_profile(sp, x - h), soliton_profile(sp, x), soliton_profile(sp, x + h));
            let lap = (a - 2.0 * b + c) / (h * h);
            (-0.5 * lap + sp.omega * b + sp.sigma() * b.powf(sp.p + 1.0)).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn profile_solves_the_half_line_equation_to_second_order() {
    for sp in [focusing(5.0, 1.0), SolitonParams::defocusing(-1.0, 5.0, 0.25).unwrap()] {
        let r1 = half_line_residual(&sp, 0.02);
        let r2 = half_line_residual(&sp, 0.01);
        let order = (r1 / r2).log2();
        assert!((order - 2.0).abs() < 0.2, "order {order}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn domega_matches_central_difference(p in 2.5f64..7.0, w in 0.6f64..4.0, x in -6.0f64..6.0) {
        let sp = focusing(p, w);
        let d = 1e-4;
        let f = |w: f64| soliton_profile(&focusing(p, w), x);
        // Fourth-order central difference; the second-order one is biased near ½q².
        let fd = (8.0 * (f(w + d) - f(w - d)) - (f(w + 2.0 * d) - f(w - 2.0 * d))) / (12.0 * d);
        let an = soliton_domega(&sp, x);
        prop_assert!((an - fd).abs() <= 1e-6 * an.abs().max(1e-3), "{an} vs {fd}");
    }

    #[test]
    fn defocusing_domega_matches_central_difference(p in 2.5f64..7.0, w in 0.05f64..0.45, x in -6.0f64..6.0) {
        let at = |w: f64| SolitonParams::defocusing(-1.0, p, w).unwrap();
        let d = 1e-5;
        let fd = (soliton_profile(&at(w + d), x) - soliton_profile(&at(w - d), x)) / (2.0 * d);
        let an = soliton_domega(&at(w), x);
        prop_assert!((an - fd).abs() <= 1e-6 * an.abs().max(1e-3), "{an} vs {fd}");
    }

    #[test]
    fn profile_is_even_and_positive(p in 1.0f64..8.0, w in 0.51f64..10.0, x in 0.0f64..20.0) {
        let sp = focusing(p, w);
        let (a, b) = (soliton_profile(&sp, x), soliton_profile(&sp, -x));
        prop_assert!(a > 0.0);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn one_sign_change_of_inner_product(p in 4.3f64..9.0) {
        let wc = critical_frequency(-1.0, p).unwrap();
        prop_assert!(wc > 0.5);
        prop_assert!(q_dq_inner(&focusing(p, 0.5 + 0.5 * (wc - 0.5))) > 0.0);
        prop_assert!(q_dq_inner(&focusing(p, 1.5 * wc)) < 0.0);
    }
}
