//! Modulation parameters `(θ, ω)` and the remainder `v` of
//! `u(t) = e^{iΦ(t)}(Q_{ω(t)} + v(t))`, `Φ = θ + ∫₀ᵗω`.
//!
//! Inner products are `⟨f, g⟩ = ∫ f ḡ`. The orthogonality conditions are
//! `Re⟨v, Q_ω⟩ = 0` and `Re⟨v, i∂_ωQ_ω⟩ = 0`.

use crate::error::{Error, Result};
use crate::fields;
use crate::grid::Grid;
use crate::nls::Trajectory;
use crate::numeric::{fit_line, LineFit};
use crate::profile::{ProfileSample, ProfileSource};
use crate::scalar::{c, Real};
use num_complex::Complex;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecomposeConfig<T> {
    pub max_iter: usize,
    /// Converged when `|F| < tol·‖Q‖²`.
    pub tol: T,
}

impl<T: Real> Default for DecomposeConfig<T> {
    fn default() -> Self {
        Self { max_iter: 50, tol: c(1e-12) }
    }
}

/// Result of [`decompose`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationState<T> {
    /// Total phase `Φ` with `u = e^{iΦ}(Q_ω + v)`; equals `θ` for a single
    /// decomposition.
    pub phase: T,
    pub omega: T,
    pub v: Vec<Complex<T>>,
    pub profile: ProfileSample<T>,
    /// `|F|/‖Q‖²` at the returned point.
    pub residual: T,
    pub iterations: usize,
}

impl<T: Real> ModulationState<T> {
    /// `(Re⟨v, Q⟩, Re⟨v, i∂_ωQ⟩)`.
    pub fn orthogonality(&self) -> (T, T) {
        orthogonality(&self.v, &self.profile)
    }

    /// Tolerance of the orthogonality invariant: `1e−10‖Q‖‖v‖ + 1e−14`.
    pub fn orthogonality_tolerance(&self) -> T {
        let h = self.profile.grid.h;
        c::<T>(1e-10) * self.profile.q_norm_sq().sqrt() * fields::l2(&self.v, h) + c(1e-14)
    }
}

fn orthogonality<T: Real>(v: &[Complex<T>], prof: &ProfileSample<T>) -> (T, T) {
    let h = prof.grid.h;
    let a: T = v.iter().zip(&prof.q).map(|(z, &q)| z.re * q).sum::<T>() * h;
    let b: T = v.iter().zip(&prof.dq).map(|(z, &d)| z.im * d).sum::<T>() * h;
    (a, b)
}

/// Rotates `u` by `e^{−iφ}`.
fn rotate<T: Real>(u: &[Complex<T>], phase: T) -> Vec<Complex<T>> {
    let r = Complex::new(phase.cos(), -phase.sin());
    u.iter().map(|&z| z * r).collect()
}

/// Newton iteration for `F(θ, ω) = [Re⟨e^{−iθ}u − Q_ω, Q_ω⟩, Re⟨e^{−iθ}u − Q_ω, i∂_ωQ_ω⟩] = 0`.
pub fn decompose<T: Real>(
    u: &[Complex<T>],
    guess: (T, T),
    source: &dyn ProfileSource<T>,
    cfg: &DecomposeConfig<T>,
) -> Result<ModulationState<T>> {
    let h = source.grid().h;
    if u.len() != source.grid().len() {
        return Err(Error::Parameter(format!("field has {} samples, grid has {}", u.len(), source.grid().len())));
    }
    let (mut theta, mut omega) = guess;
    let mut last_res = f64::INFINITY;
    // One Newton step is taken past the tolerance; the returned point is
    // whichever of the two has the smaller residual.
    let mut best: Option<ModulationState<T>> = None;
    for it in 0..=cfg.max_iter {
        let prof = source.sample(omega)?;
        let w = rotate(u, theta);
        let qq = prof.q_norm_sq();
        let qdq = prof.q_dq();
        let mut re_q = T::zero();
        let mut im_q = T::zero();
        let mut re_dq = T::zero();
        let mut im_dq = T::zero();
        let mut im_d2q = T::zero();
        for (i, z) in w.iter().enumerate() {
            re_q += z.re * prof.q[i];
            im_q += z.im * prof.q[i];
            re_dq += z.re * prof.dq[i];
            im_dq += z.im * prof.dq[i];
            im_d2q += z.im * prof.d2q[i];
        }
        let (re_q, im_q, re_dq, im_dq, im_d2q) = (re_q * h, im_q * h, re_dq * h, im_dq * h, im_d2q * h);
        let f1 = re_q - qq;
        let f2 = im_dq;
        let res = (f1 * f1 + f2 * f2).sqrt() / qq;
        last_res = res.to_f64().unwrap_or(f64::NAN);
        if best.as_ref().is_some_and(|b| b.residual <= res) {
            return Ok(best.take().expect("checked"));
        }
        if res < cfg.tol {
            let v: Vec<Complex<T>> = w.iter().zip(&prof.q).map(|(&z, &q)| z - Complex::new(q, T::zero())).collect();
            let st = ModulationState { phase: theta, omega, v, profile: prof, residual: res, iterations: it };
            if best.is_some() || res == T::zero() {
                return Ok(st);
            }
            best = Some(st);
        } else if best.is_some() {
            return Ok(best.take().expect("checked"));
        }
        if it == cfg.max_iter {
            break;
        }
        // Jacobian [[∂θF₁, ∂ωF₁], [∂θF₂, ∂ωF₂]].
        let j11 = im_q;
        let j12 = re_dq - c::<T>(2.0) * qdq;
        let j21 = -re_dq;
        let j22 = im_d2q;
        let det = j11 * j22 - j12 * j21;
        if !(det.abs() > T::min_positive_value()) || !det.is_finite() {
            break;
        }
        let dtheta = (j22 * f1 - j12 * f2) / det;
        let domega = (j11 * f2 - j21 * f1) / det;
        theta -= dtheta;
        omega -= domega;
        if !omega.is_finite() || !theta.is_finite() {
            break;
        }
    }
    match best {
        Some(b) => Ok(b),
        None => Err(Error::Decomposition { iterations: cfg.max_iter, residual: last_res }),
    }
}

/// `A[ω̇; θ̇] − [Im⟨𝒩, Q⟩; −Re⟨𝒩, ∂_ωQ⟩]`, normalized by
/// `‖Q‖²(|ω̇| + |θ̇| + 1e−300)`, together with the raw right-hand side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeResidual<T> {
    pub residual: [T; 2],
    pub normalized: T,
    pub rhs: [T; 2],
    pub det_a: T,
}

/// `𝒩 = f(Q + v) − f(Q) − σ(p+2)/2·Q^p v − σp/2·Q^p v̄` with `f(u) = σ|u|^p u`.
pub fn nonlinear_remainder<T: Real>(state: &ModulationState<T>) -> Vec<Complex<T>> {
    let sp = &state.profile.params;
    let (sigma, p) = (sp.sigma(), sp.p);
    let two = c::<T>(2.0);
    state
        .v
        .iter()
        .zip(&state.profile.q)
        .map(|(&v, &q)| {
            let u = v + Complex::new(q, T::zero());
            let qp = q.abs().powf(p);
            let fu = u * (sigma * u.norm().powf(p));
            let fq = sigma * qp * q;
            fu - Complex::new(fq, T::zero()) - v * (sigma * (p + two) / two * qp) - v.conj() * (sigma * p / two * qp)
        })
        .collect()
}

pub fn ode_residual<T: Real>(state: &ModulationState<T>, thetadot: T, omegadot: T) -> OdeResidual<T> {
    let prof = &state.profile;
    let h = prof.grid.h;
    let nn = nonlinear_remainder(state);
    let qdq = prof.q_dq();
    let mut re_v_dq = T::zero();
    let mut im_v_q = T::zero();
    let mut im_v_d2q = T::zero();
    let mut im_n_q = T::zero();
    let mut re_n_dq = T::zero();
    for i in 0..prof.q.len() {
        let v = state.v[i];
        re_v_dq += v.re * prof.dq[i];
        im_v_q += v.im * prof.q[i];
        im_v_d2q += v.im * prof.d2q[i];
        im_n_q += nn[i].im * prof.q[i];
        re_n_dq += nn[i].re * prof.dq[i];
    }
    let (re_v_dq, im_v_q, im_v_d2q, im_n_q, re_n_dq) = (re_v_dq * h, im_v_q * h, im_v_d2q * h, im_n_q * h, re_n_dq * h);
    let a = [[qdq - re_v_dq, -im_v_q], [-im_v_d2q, qdq + re_v_dq]];
    let rhs = [im_n_q, -re_n_dq];
    let r0 = a[0][0] * omegadot + a[0][1] * thetadot - rhs[0];
    let r1 = a[1][0] * omegadot + a[1][1] * thetadot - rhs[1];
    let scale = prof.q_norm_sq() * (omegadot.abs() + thetadot.abs() + c(1e-300));
    OdeResidual {
        residual: [r0, r1],
        normalized: (r0 * r0 + r1 * r1).sqrt() / scale,
        rhs,
        det_a: a[0][0] * a[1][1] - a[0][1] * a[1][0],
    }
}

/// Norm parameters for tracking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackConfig<T> {
    pub alpha: T,
    pub r: T,
    pub decompose: DecomposeConfig<T>,
}

impl<T: Real> Default for TrackConfig<T> {
    fn default() -> Self {
        Self { alpha: c(1.2), r: c(12.0), decompose: DecomposeConfig::default() }
    }
}

/// Exponents at which `‖v‖_{L^r}` is always recorded.
pub const REPORTED_R: [f64; 3] = [6.0, 12.0, 24.0];

/// Per-sample modulation data.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationSeries<T> {
    pub t: Vec<T>,
    /// `θ = Φ − ∫₀ᵗω` (trapezoidal rule over the samples).
    pub theta: Vec<T>,
    pub phase: Vec<T>,
    pub omega: Vec<T>,
    /// Centered differences; one-sided at the ends.
    pub thetadot: Vec<T>,
    pub omegadot: Vec<T>,
    pub v_h1: Vec<T>,
    pub v_lr: Vec<T>,
    pub v_l2w: Vec<T>,
    /// `‖v‖_{L^r}` for each `r` in [`REPORTED_R`].
    pub v_lr_reported: [Vec<T>; 3],
    pub ode_residual: Vec<T>,
    /// `‖A [ω̇; θ̇]‖` and `‖RHS‖` of the modulation equations.
    pub rhs_norm: Vec<T>,
    pub det_a: Vec<T>,
    /// `max(|Re⟨v,Q⟩|, |Re⟨v,i∂_ωQ⟩|)` and its tolerance.
    pub orthogonality: Vec<T>,
    pub orthogonality_tol: Vec<T>,
    /// Samples where Newton was restarted from `(Φ_prev, ω₀)`.
    pub reseeded: Vec<usize>,
    /// Index of the first sample that could not be decomposed.
    pub failure: Option<(usize, Error)>,
    /// `θ̇`, `ω̇` are relative to a reference run.
    pub reference_corrected: bool,
}

impl<T: Real> ModulationSeries<T> {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Largest ratio of an orthogonality residual to its tolerance.
    pub fn worst_orthogonality(&self) -> T {
        self.orthogonality.iter().zip(&self.orthogonality_tol).map(|(&a, &b)| a / b).fold(T::zero(), T::max)
    }

    /// Largest normalized ODE residual at interior samples with `t ≥ t_min`.
    pub fn max_interior_residual(&self, t_min: T) -> T {
        let n = self.len();
        (1..n.saturating_sub(1)).filter(|&i| self.t[i] >= t_min).map(|i| self.ode_residual[i]).fold(T::zero(), T::max)
    }
}

/// Decomposes every sample, continuing the Newton guess from the previous one.
pub fn track<T: Real>(traj: &Trajectory<T>, source: &dyn ProfileSource<T>, cfg: &TrackConfig<T>) -> ModulationSeries<T> {
    track_with_reference(traj, source, cfg, None)
}

/// As [`track`], with `θ̇`, `ω̇` taken relative to an unperturbed reference
/// run sampled at the same times. The time discretization turns `e^{iω₀t}Q`
/// into a solution with a slightly shifted frequency; the reference run
/// carries exactly that shift, so the difference isolates the modulation.
pub fn track_with_reference<T: Real>(
    traj: &Trajectory<T>,
    source: &dyn ProfileSource<T>,
    cfg: &TrackConfig<T>,
    reference: Option<&ModulationSeries<T>>,
) -> ModulationSeries<T> {
    let grid: Grid<T> = traj.grid;
    let omega0 = traj.params.omega;
    let mut states: Vec<ModulationState<T>> = Vec::with_capacity(traj.len());
    let mut reseeded = vec![];
    let mut failure = None;
    let mut guess = (T::zero(), omega0);
    for (i, u) in traj.samples.iter().enumerate() {
        if let Some(prev) = states.last() {
            let dt = traj.times[i] - traj.times[i - 1];
            guess = (prev.phase + prev.omega * dt, prev.omega);
        }
        let st = match decompose(u, guess, source, &cfg.decompose) {
            Ok(s) => Ok(s),
            Err(_) if i > 0 => {
                reseeded.push(i);
                decompose(u, (guess.0, omega0), source, &cfg.decompose)
            }
            Err(e) => Err(e),
        };
        match st {
            Ok(s) => states.push(s),
            Err(e) => {
                failure = Some((i, e));
                break;
            }
        }
    }
    let n = states.len();
    let t: Vec<T> = traj.times[..n].to_vec();
    let phase: Vec<T> = states.iter().map(|s| s.phase).collect();
    let omega: Vec<T> = states.iter().map(|s| s.omega).collect();
    let mut theta = Vec::with_capacity(n);
    let mut integral = T::zero();
    for i in 0..n {
        if i > 0 {
            integral += (omega[i] + omega[i - 1]) * (t[i] - t[i - 1]) * c(0.5);
        }
        theta.push(phase[i] - integral);
    }
    let mut thetadot = derivative(&t, &theta);
    let mut omegadot = derivative(&t, &omega);
    let corrected = match reference {
        Some(r) if r.len() >= n && r.t[..n] == t[..] => {
            for i in 0..n {
                thetadot[i] -= r.thetadot[i];
                omegadot[i] -= r.omegadot[i];
            }
            true
        }
        _ => false,
    };
    let h = grid.h;
    let mut series = ModulationSeries {
        t,
        theta,
        phase,
        omega,
        thetadot,
        omegadot,
        v_h1: vec![],
        v_lr: vec![],
        v_l2w: vec![],
        v_lr_reported: Default::default(),
        ode_residual: vec![],
        rhs_norm: vec![],
        det_a: vec![],
        orthogonality: vec![],
        orthogonality_tol: vec![],
        reseeded,
        failure,
        reference_corrected: corrected,
    };
    for (i, s) in states.iter().enumerate() {
        series.v_h1.push(fields::h1(&s.v, h));
        series.v_lr.push(fields::lr(&s.v, h, cfg.r));
        series.v_l2w.push(fields::weighted_l2(&s.v, &grid, cfg.alpha));
        for (k, &r) in REPORTED_R.iter().enumerate() {
            series.v_lr_reported[k].push(fields::lr(&s.v, h, c(r)));
        }
        let od = ode_residual(s, series.thetadot[i], series.omegadot[i]);
        series.ode_residual.push(od.normalized);
        series.rhs_norm.push((od.rhs[0] * od.rhs[0] + od.rhs[1] * od.rhs[1]).sqrt());
        series.det_a.push(od.det_a);
        let (a, b) = s.orthogonality();
        series.orthogonality.push(a.abs().max(b.abs()));
        series.orthogonality_tol.push(s.orthogonality_tolerance());
    }
    series
}

fn derivative<T: Real>(t: &[T], y: &[T]) -> Vec<T> {
    let n = y.len();
    if n < 2 {
        return vec![T::zero(); n];
    }
    (0..n)
        .map(|i| {
            let (a, b) = if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            (y[b] - y[a]) / (t[b] - t[a])
        })
        .collect()
}

/// `ω(t_end)` of `series` minus that of an unperturbed reference run with
/// the same numerics.
pub fn omega_shift<T: Real>(series: &ModulationSeries<T>, reference: &ModulationSeries<T>) -> Option<T> {
    let a = series.omega.last()?;
    let b = reference.omega.last()?;
    Some(*a - *b)
}

/// Fitted decay of the remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayVerdict<T> {
    pub alpha: T,
    pub r: T,
    pub lr_fit: LineFit<T>,
    pub lr_expected: T,
    pub l2w_fit: LineFit<T>,
    pub l2w_expected: T,
    /// `sup_t ‖v(t)‖_{H¹} / η`.
    pub h1_over_eta: T,
    pub lr_ok: bool,
    pub l2w_ok: bool,
}

impl<T: Real> DecayVerdict<T> {
    pub fn passed(&self) -> bool {
        self.lr_ok && self.l2w_ok
    }
}

/// Log-log slopes of `‖v‖_{L^r}` and `‖⟨x⟩^{−α}v‖_{L²}` over `window`,
/// judged against `−(1/2 − 1/r) ± 0.15` and `−α ± 0.3`.
pub fn decay_report<T: Real>(series: &ModulationSeries<T>, eta: T, window: (T, T)) -> Result<DecayVerdict<T>> {
    decay_report_with(series, c(1.2), c(12.0), eta, window)
}

pub fn decay_report_with<T: Real>(series: &ModulationSeries<T>, alpha: T, r: T, eta: T, window: (T, T)) -> Result<DecayVerdict<T>> {
    let idx: Vec<usize> = (0..series.len()).filter(|&i| series.t[i] >= window.0 && series.t[i] <= window.1 && series.t[i] > T::zero()).collect();
    if idx.len() < 20 {
        return Err(Error::Fit(format!("{} samples in window [{}, {}], need at least 20", idx.len(), window.0, window.1)));
    }
    let lt: Vec<T> = idx.iter().map(|&i| series.t[i].ln()).collect();
    let fit = |vals: &[T]| -> Result<LineFit<T>> {
        let ys: Vec<T> = idx.iter().map(|&i| vals[i].max(T::min_positive_value()).ln()).collect();
        fit_line(&lt, &ys)
    };
    let lr_fit = fit(&series.v_lr)?;
    let l2w_fit = fit(&series.v_l2w)?;
    let lr_expected = -(c::<T>(0.5) - T::one() / r);
    let l2w_expected = -alpha;
    let sup_h1 = series.v_h1.iter().copied().fold(T::zero(), T::max);
    Ok(DecayVerdict {
        alpha,
        r,
        lr_ok: (lr_fit.slope - lr_expected).abs() <= c(0.15),
        l2w_ok: (l2w_fit.slope - l2w_expected).abs() <= c(0.3),
        lr_fit,
        lr_expected,
        l2w_fit,
        l2w_expected,
        h1_over_eta: if eta > T::zero() { sup_h1 / eta } else { T::infinity() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_is_exact_on_quadratics() {
        let t: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|&s| s * s).collect();
        let d = derivative(&t, &y);
        for i in 1..10 {
            assert!((d[i] - 2.0 * t[i]).abs() < 1e-12);
        }
    }
}
