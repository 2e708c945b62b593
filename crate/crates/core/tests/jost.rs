use nlsdelta::jost::*;
use nlsdelta::SolitonParams;
use num_complex::Complex64;

fn problem(omega: f64) -> JostProblem<f64> {
    JostProblem::new(&SolitonParams::focusing(-1.0, 5.0, omega).unwrap())
}

fn cfg() -> JostConfig<f64> {
    JostConfig::default()
}

#[test]
fn wronskians_are_exact() {
    let pr = problem(1.0);
    for xi in [0.5, 2.0, 10.0, 50.0] {
        let s = scattering_data(&pr, xi, &cfg()).unwrap();
        let (mu, w) = (pr.mu(xi), s.wronskians);
        assert!((w.w12 - Complex64::new(0.0, 2.0 * xi)).norm() / (2.0 * xi) < 1e-7, "xi={xi}");
        assert!((w.w34 + 2.0 * mu).norm() / (2.0 * mu) < 1e-7, "xi={xi}");
        assert!(w.w13.norm() < 1e-7 && w.w23.norm() < 1e-7, "xi={xi}");
    }
}

#[test]
fn wronskian_is_constant_along_the_line() {
    let set = solve_jost_backward(&problem(1.0), 2.0, &cfg()).unwrap();
    let [f1, f2, _, _] = &set.solutions;
    assert!(f1.x[0] < 0.0, "record reaches the left half-line");
    for i in 0..f1.x.len() {
        let w = wronskian(&f1.value(i), &f2.value(i));
        assert!((w - Complex64::new(0.0, 4.0)).norm() < 1e-7, "x={} W={w}", f1.x[i]);
    }
}

#[test]
fn f2_is_the_conjugate_of_f1() {
    let set = solve_jost_backward(&problem(1.3), 1.5, &cfg()).unwrap();
    let [f1, f2, _, _] = &set.solutions;
    for i in 0..f1.x.len() {
        let (a, b) = (f1.value(i), f2.value(i));
        let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for k in 0..4 {
            assert!((a[k].conj() - b[k]).norm() < 1e-8 * scale, "x={} k={k}", f1.x[i]);
        }
    }
}

#[test]
fn reflection_in_xi_conjugates_the_scattering_data() {
    let pr = problem(1.2);
    for xi in [0.7, 3.0] {
        let (p, m) = (scattering_data(&pr, xi, &cfg()).unwrap(), scattering_data(&pr, -xi, &cfg()).unwrap());
        assert!((p.det_d.conj() - m.det_d).norm() < 1e-8 * p.det_d.norm());
        let (a, b) = (p.a.unwrap(), m.a.unwrap());
        for i in 0..2 {
            for j in 0..2 {
                assert!((a[i][j].conj() - b[i][j]).norm() < 1e-8, "xi={xi} A[{i}][{j}]");
            }
        }
    }
}

#[test]
fn high_frequency_limit() {
    let pr = problem(1.0);
    let xi = 50.0;
    let s = scattering_data(&pr, xi, &cfg()).unwrap();
    let mu = pr.mu(xi);
    let ratio = s.det_d / Complex64::new(0.0, -4.0 * xi * mu);
    assert!((ratio - 1.0).norm() < 0.1, "{ratio}");
    let a = s.a.unwrap();
    let dist = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| (a[i][j] - if i == j { 1.0 } else { 0.0 }).norm())
        .fold(0.0, f64::max);
    assert!(dist < 0.1, "{a:?}");
}

#[test]
fn d_factors_through_a() {
    let pr = problem(1.0);
    for xi in [0.5, 2.0, 10.0] {
        let s = scattering_data(&pr, xi, &cfg()).unwrap();
        let a = s.a.unwrap();
        let diag = [Complex64::new(0.0, 2.0 * xi), Complex64::from(-2.0 * pr.mu(xi))];
        for i in 0..2 {
            for j in 0..2 {
                assert!((s.d[i][j] - diag[i] * a[i][j]).norm() < 1e-10 * s.det_d.norm().sqrt().max(1.0));
            }
        }
    }
}

#[test]
fn delta_defect_alone_has_closed_form_data() {
    let free = JostProblem::free(-1.0, 1.0).unwrap();
    for xi in [1e-6, 0.5, 2.0, 10.0, 50.0] {
        let s = scattering_data(&free, xi, &cfg()).unwrap();
        let exact = free_delta_det(-1.0, 1.0, xi);
        assert!((s.det_d - exact).norm() < 1e-6 * exact.norm(), "xi={xi}");
        let r = free_delta_reflection(-1.0, xi);
        assert!((s.r_tilde.unwrap() - r).norm() < 1e-6, "xi={xi}");
        assert!((r - Complex64::from(-1.0) / Complex64::new(1.0, xi)).norm() < 1e-15);
    }
}

#[test]
fn volterra_oracle_agrees_with_backward_integration() {
    let pr = problem(1.0);
    let set = solve_jost_backward(&pr, 2.0, &cfg()).unwrap();
    let v = solve_f3_volterra(&pr, 2.0, pr.start(&cfg()), &VolterraConfig::default()).unwrap();
    let o = set.origin[2];
    assert!((v.scaled[0][0] - o[0].re).abs() < 1e-8 && o[0].im.abs() < 1e-12);
    assert!((v.scaled[0][1] - o[1].re).abs() < 1e-8 && o[1].im.abs() < 1e-12);
}

#[test]
fn volterra_free_problem_is_trivial() {
    let free = JostProblem::free(-1.0, 1.0).unwrap();
    let v = solve_f3_volterra(&free, 2.0, 10.0, &VolterraConfig::default()).unwrap();
    assert!(v.scaled.iter().all(|u| u[0] == 0.0 && u[1] == 1.0));
}

#[test]
fn volterra_correction_shrinks_like_one_over_mu() {
    let pr = problem(1.0);
    let dev = |xi: f64| {
        let v = solve_f3_volterra(&pr, xi, pr.start(&cfg()), &VolterraConfig::default()).unwrap();
        v.scaled.iter().map(|u| u[0].abs().max((u[1] - 1.0).abs())).fold(0.0, f64::max) * pr.mu(xi)
    };
    let (a, b) = (dev(10.0), dev(40.0));
    assert!(b < 2.0 * a && b > 0.2 * a, "mu-weighted deviations {a} {b}");
}

#[test]
fn threshold_is_regular_below_the_resonance() {
    assert!(threshold_indicator(&problem(1.0), &cfg()).unwrap() > 0.1);
}

#[test]
fn threshold_root_at_the_resonance() {
    let base = SolitonParams::focusing(-1.0, 5.0, 1.5).unwrap();
    let omegas: Vec<f64> = (0..5).map(|k| 1.45 + 0.025 * k as f64).collect();
    let s = threshold_sweep(&base, &omegas, &cfg()).unwrap();
    assert_eq!(s.roots.len(), 1, "{:?}", s.roots);
    assert!((s.roots[0] - 1.49168).abs() < 1e-4, "{}", s.roots[0]);
}

#[test]
fn defocusing_threshold_has_no_root() {
    let base = SolitonParams::defocusing(-1.0, 5.0, 0.25).unwrap();
    let omegas: Vec<f64> = (1..=12).map(|k| 0.04 * k as f64).collect();
    let s = threshold_sweep(&base, &omegas, &cfg()).unwrap();
    assert!(s.roots.is_empty(), "{:?}", s.roots);
    assert!(s.det_d0.iter().all(|v| v.abs() > 1e-3));
}

#[test]
fn no_embedded_eigenvalues() {
    let grid: Vec<f64> = (1..=40).map(|k| 0.5 * k as f64).collect();
    let e = embedded_eigenvalue_scan(&problem(1.0), &grid, &cfg()).unwrap();
    assert!(e.min_rel > 0.05, "{e:?}");
}

#[test]
fn small_soliton_approaches_the_bare_defect() {
    let w = 0.5 + 1e-3;
    let d = threshold_det(&problem(w), &cfg()).unwrap();
    let bare = free_delta_det(-1.0, w, 0.0).re;
    assert!((d - bare).abs() < 0.05 * bare.abs(), "{d} vs {bare}");
}
