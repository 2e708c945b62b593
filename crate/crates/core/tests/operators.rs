use nlsdelta::fields::TwoComponentField;
use nlsdelta::operators::*;
use nlsdelta::spectrum::{discrete_spectrum, lowest_eigenpairs, Window};
use nlsdelta::{Grid, SolitonParams};
use num_complex::Complex64;
use proptest::prelude::*;

fn grid(h: f64, x: f64) -> Grid {
    Grid::with_half_width(h, x).unwrap()
}

fn focusing(omega: f64) -> SolitonParams {
    SolitonParams::focusing(-1.0, 5.0, omega).unwrap()
}

#[test]
fn hamiltonian_bound_state() {
    let g = grid(0.02, 40.0);
    let h = build_hamiltonian(g, -1.0);
    let pairs = lowest_eigenpairs(&h, 2).unwrap();
    let (lam, v) = &pairs[0];
    assert!((lam + 0.5).abs() < 1e-2, "lambda = {lam}");
    assert!(pairs[1].0 > -1e-3);
    let phi: Vec<f64> = g.points().iter().map(|x| (-x.abs()).exp()).collect();
    let dot: f64 = v.iter().zip(&phi).map(|(a, b)| a * b).sum();
    let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let np: f64 = phi.iter().map(|a| a * a).sum::<f64>().sqrt();
    assert!(dot / (nv * np) > 0.999);
}

#[test]
fn bound_state_converges_at_first_order_or_better() {
    let e = |h: f64| lowest_eigenpairs(&build_hamiltonian(grid(h, 30.0), -1.0), 1).unwrap()[0].0 + 0.5;
    let (a, b, c) = (e(0.04), e(0.02), e(0.01));
    assert!((a / b).log2() >= 1.0 && (b / c).log2() >= 1.0, "{a} {b} {c}");
}

#[test]
fn repulsive_defect_has_no_bound_state() {
    let h = build_hamiltonian(grid(0.02, 40.0), 1.0);
    assert!(lowest_eigenpairs(&h, 1).unwrap()[0].0 > -1e-3);
}

#[test]
fn free_stencil_and_symmetry() {
    let g = grid(0.1, 3.0);
    let h0 = build_hamiltonian(g, 0.0);
    let h = build_hamiltonian(g, -1.0);
    let n = g.len();
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j {
                1.0 / (g.h * g.h)
            } else if i.abs_diff(j) == 1 {
                -0.5 / (g.h * g.h)
            } else {
                0.0
            };
            assert_eq!(h0.matrix.get(i, j), expected);
            assert_eq!(h.matrix.get(i, j), h.matrix.get(j, i));
        }
    }
    let o = g.origin();
    assert_eq!(h.matrix.get(o, o), 1.0 / (g.h * g.h) - 1.0 / g.h);
}

/// Sup-norm residuals of the kernel relations away from the origin and at it.
fn kernel_residuals(h: f64) -> (f64, f64) {
    let g = grid(h, 20.0);
    let lin = build_linearized(g, &focusing(1.0)).unwrap();
    let r1 = lin.apply(&lin.kernel_vector());
    let mut r2 = lin.apply(&lin.generalized_kernel_vector());
    r2.axpy(-1.0, &lin.kernel_vector());
    let o = g.origin();
    let mut away: f64 = 0.0;
    let mut at: f64 = 0.0;
    for r in [&r1, &r2] {
        for i in 1..g.len() - 1 {
            let v = r.comp1[i].abs().max(r.comp2[i].abs());
            if i == o {
                at = at.max(v);
            } else {
                away = away.max(v);
            }
        }
    }
    (away, at)
}

#[test]
fn kernel_relations_are_second_order() {
    let (a1, o1) = kernel_residuals(0.04);
    let (a2, o2) = kernel_residuals(0.02);
    let (a3, _) = kernel_residuals(0.01);
    for (x, y) in [(a1, a2), (a2, a3)] {
        assert!((x / y).log2() > 1.8, "away from the origin: {x:e} -> {y:e}");
    }
    // The origin row carries the defect and converges at first order.
    assert!((o1 / o2).log2() > 0.9, "origin: {o1:e} -> {o2:e}");
}

#[test]
fn discrete_profile_kernel_is_exact() {
    let g = grid(0.05, 20.0);
    let lin = build_linearized_discrete(g, &focusing(1.0)).unwrap();
    let r1 = lin.apply(&lin.kernel_vector());
    let mut r2 = lin.apply(&lin.generalized_kernel_vector());
    r2.axpy(-1.0, &lin.kernel_vector());
    assert!(r1.l2() < 1e-9 && r2.l2() < 1e-9, "{} {}", r1.l2(), r2.l2());
}

fn spectrum(omega: f64) -> nlsdelta::spectrum::SpectrumReport<f64> {
    let lin = build_linearized_discrete(grid(0.05, 20.0), &focusing(omega)).unwrap();
    discrete_spectrum(&lin.l, Window::everything()).unwrap()
}

/// Eigenvalues outside the kernel cluster inside the gap `|Im λ| < ω`.
fn gap_eigenvalues(rep: &nlsdelta::spectrum::SpectrumReport<f64>, omega: f64) -> Vec<Complex64> {
    rep.eigenvalues.iter().copied().filter(|z| z.norm() >= rep.threshold && z.im.abs() < omega).collect()
}

#[test]
fn spectrum_below_the_resonance() {
    let rep = spectrum(1.0);
    assert_eq!(rep.near_zero, 2);
    assert!(gap_eigenvalues(&rep, 1.0).is_empty(), "{:?}", gap_eigenvalues(&rep, 1.0));
    for z in &rep.eigenvalues {
        if z.im.abs() >= 1.0 {
            assert!(z.re.abs() < 1e-6, "{z}");
        }
    }
    let mut neg: Vec<Complex64> = rep.eigenvalues.iter().map(|z| -z).collect();
    for z in &rep.eigenvalues {
        let k = neg
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - z).norm().total_cmp(&(b.1 - z).norm()))
            .map(|(k, _)| k)
            .unwrap();
        assert!((neg[k] - z).norm() < 1e-8 * z.norm().max(1.0), "{z} unpaired");
        neg.swap_remove(k);
    }
}

#[test]
fn spectrum_above_the_resonance() {
    let omega = 1.6;
    let rep = spectrum(omega);
    assert_eq!(rep.near_zero, 2);
    let gap = gap_eigenvalues(&rep, omega);
    assert_eq!(gap.len(), 2, "{gap:?}");
    for z in &gap {
        assert!(z.re.abs() < 1e-6 && z.im.abs() > 0.5 * omega, "{z}");
    }
    assert!((gap[0] + gap[1]).norm() < 1e-8);
}

#[test]
fn projection_annihilates_generalized_kernel() {
    let sp = focusing(1.0);
    let g = grid(0.05, 20.0);
    let lin = build_linearized(g, &sp).unwrap();
    let pc = lin.projector().unwrap();
    assert!(pc.apply(&lin.generalized_kernel_vector()).l2() < 1e-10);
    assert!(pc.apply(&lin.kernel_vector()).l2() < 1e-10);
}

#[test]
fn projection_rejects_critical_frequency() {
    let w = nlsdelta::soliton::critical_frequency(-1.0, 5.0).unwrap();
    assert!(Projector::new(grid(0.05, 20.0), &focusing(w)).is_err());
}

fn field_strategy(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (prop::collection::vec(-1.0f64..1.0, n), prop::collection::vec(-1.0f64..1.0, n))
}

const N_SMALL: usize = 2 * 100 + 1;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn projection_is_idempotent((a, b) in field_strategy(N_SMALL)) {
        let g = Grid::new(0.1, 100).unwrap();
        let pc = Projector::new(g, &focusing(1.3)).unwrap();
        let f = TwoComponentField::new(g, a, b);
        let once = pc.apply(&f);
        let mut twice = pc.apply(&once);
        twice.axpy(-1.0, &once);
        prop_assert!(twice.l2() < 1e-10 * f.l2().max(1.0));
    }

    #[test]
    fn conjugation_identity((a, b) in field_strategy(N_SMALL), (c, d) in field_strategy(N_SMALL)) {
        let g = Grid::new(0.1, 100).unwrap();
        let lin = build_linearized(g, &focusing(1.3)).unwrap();
        let w1: Vec<Complex64> = a.iter().zip(&b).map(|(&x, &y)| Complex64::new(x, y)).collect();
        let w2: Vec<Complex64> = c.iter().zip(&d).map(|(&x, &y)| Complex64::new(x, y)).collect();
        let (p1, p2) = lin.apply_conjugated_l(&w1, &w2);
        let (h1, h2) = lin.apply_hcal(&w1, &w2);
        let scale = h1.iter().chain(&h2).map(|z| z.norm()).fold(0.0, f64::max);
        let err = p1.iter().zip(&h1).chain(p2.iter().zip(&h2)).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-12 * scale, "{err:e} vs {scale:e}");
    }
}
