use nlsdelta::error::Error;
use nlsdelta::fields::TwoComponentField;
use nlsdelta::nls::*;
use nlsdelta::operators::{build_hamiltonian, Projector};
use nlsdelta::profile::discrete_profile;
use nlsdelta::spectrum::lowest_eigenpairs;
use nlsdelta::{Grid, SolitonParams};
use num_complex::Complex64;

fn grid(h: f64, x: f64) -> Grid {
    Grid::with_half_width(h, x).unwrap()
}

fn sp(omega: f64) -> SolitonParams {
    SolitonParams::focusing(-1.0, 5.0, omega).unwrap()
}

fn config(h: f64, x: f64, dt: f64, t_max: f64) -> EvolutionConfig<f64> {
    let mut c = EvolutionConfig::new(sp(1.0), grid(h, x));
    c.dt = dt;
    c.t_max = t_max;
    c
}

fn perturbed(eta: f64) -> EvolutionConfig<f64> {
    let mut c = config(0.05, 40.0, 0.01, 10.0);
    c.perturbation = Perturbation { eta, shape: Shape::Projected, center: 2.0, ..Default::default() };
    c
}

#[test]
fn soliton_is_stationary_in_modulus() {
    let c = config(0.05, 20.0, 0.01, 20.0);
    let tr = evolve(&c).unwrap();
    let q = discrete_profile(c.grid, &c.params).unwrap().q;
    let last = tr.samples.last().unwrap();
    let err = last.iter().zip(&q).map(|(u, q)| (u.norm() - q).abs()).fold(0.0, f64::max);
    assert!(err < 1e-3, "{err:e}");
    assert_eq!(*tr.times.last().unwrap(), 20.0);
}

#[test]
fn mass_and_energy_are_conserved() {
    let tr = evolve(&perturbed(0.05)).unwrap();
    assert!(tr.mass_drift() < 1e-10, "mass {:e}", tr.mass_drift());
    assert!(tr.energy_drift() < 1e-4, "energy {:e}", tr.energy_drift());
}

#[test]
fn virial_bound_holds() {
    let tr = evolve(&perturbed(0.05)).unwrap();
    let v = virial_check(&tr);
    assert!(v.holds, "margin {}", v.min_margin);
    assert!(v.growth_within_envelope());
    assert!(v.relative_variation() < 0.5);
}

/// Sup error at `t = 1` against the exact solution `Q e^{iωt}` of the
/// semi-discrete equation.
fn soliton_phase_error(dt: f64) -> f64 {
    let c = config(0.05, 20.0, dt, 1.0);
    let q = discrete_profile(c.grid, &c.params).unwrap().q;
    let tr = evolve(&c).unwrap();
    let phase = Complex64::new(0.0, c.params.omega * 1.0).exp();
    tr.samples.last().unwrap().iter().zip(&q).map(|(u, &q)| (u - phase * q).norm()).fold(0.0, f64::max)
}

#[test]
fn strang_splitting_is_second_order() {
    let e: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&dt| soliton_phase_error(dt)).collect();
    for w in e.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.2, "{e:?}");
    }
}

#[test]
fn linear_bound_state_phase() {
    let g = grid(0.05, 30.0);
    let (e, phi) = lowest_eigenpairs(&build_hamiltonian(g, -1.0), 1).unwrap().remove(0);
    assert!((e + 0.5).abs() < g.h, "E_h = {e}");
    let dt = 0.01;
    let step = SplitStep::new(g, -1.0, 0.0, 5.0, dt).unwrap();
    let mut u: Vec<Complex64> = phi.iter().map(|&v| Complex64::from(v)).collect();
    let n = 1000;
    step.advance(&mut u, n);
    let theta = n as f64 * 2.0 * (e * dt / 2.0).atan();
    let rot = Complex64::new(0.0, -theta).exp();
    let err = u.iter().zip(&phi).map(|(z, &v)| (z - rot * v).norm()).fold(0.0, f64::max);
    assert!(err < 1e-10, "{err:e}");
}

#[test]
fn sup_norm_growth_aborts() {
    let mut c = perturbed(0.2);
    c.blowup_factor = 1.0 + 1e-9;
    match evolve(&c) {
        Err(Error::Aborted { t, .. }) => assert!(t > 0.0),
        other => panic!("expected abort, got {:?}", other.map(|t| t.len())),
    }
}

#[test]
fn rejects_bad_steps() {
    let g = grid(0.1, 5.0);
    assert!(SplitStep::new(g, -1.0, -1.0, 5.0, 0.0).is_err());
    assert!(SplitStep::new(g, -1.0, -1.0, 5.0, -0.1).is_err());
    let mut c = config(0.1, 5.0, 0.01, 1.0);
    c.sample_every = 0;
    assert!(evolve(&c).is_err());
}

#[test]
fn perturbation_is_scaled_to_eta() {
    let g = grid(0.05, 20.0);
    let prof = discrete_profile(g, &sp(1.0)).unwrap();
    for shape in [Shape::Even, Shape::Odd, Shape::Projected] {
        let p = Perturbation { shape, eta: 0.03, center: 1.0, ..Default::default() };
        let v = p.sample(&g, &prof.q, &prof.dq).unwrap();
        assert!((data_norm(&v, &g, p.alpha) - 0.03).abs() < 1e-12, "{shape}");
        assert_eq!(shape.to_string().parse::<Shape>().unwrap(), shape);
    }
    let p = Perturbation { shape: Shape::Projected, eta: 0.03, ..Default::default() };
    let v = p.sample(&g, &prof.q, &prof.dq).unwrap();
    let f = TwoComponentField::new(g, v.iter().map(|z| z.re).collect(), v.iter().map(|z| z.im).collect());
    let (a, b) = Projector::from_profiles(g, prof.q.clone(), prof.dq.clone()).unwrap().coefficients(&f);
    assert!(a.abs() < 1e-12 && b.abs() < 1e-12);
    assert!(Perturbation { eta: -1.0, ..p }.sample(&g, &prof.q, &prof.dq).is_err());
}

#[test]
fn accuracy_number() {
    let c = config(0.05, 10.0, 0.01, 1.0);
    let k = std::f64::consts::PI / 0.05;
    assert!((c.accuracy_number() - 0.01 * k * k / 2.0).abs() < 1e-12);
    assert_eq!(c.steps(), 100);
}
