//! Jost solutions of `𝓗f = (½ξ² + ω)f` and the scattering matrices built
//! from them.
//!
//! On each half-line the problem is the first-order system for
//! `y = (f⁽¹⁾, f⁽²⁾, f⁽¹⁾′, f⁽²⁾′)` with
//! `f″ = diag(−ξ², μ²) f + 2[[V₁, V₂], [V₂, V₁]] f`, `μ = √(ξ² + 4ω)`,
//! `V₁ = σ(p+2)/2·Q^p`, `V₂ = σp/2·Q^p`, and the jump
//! `f′(0+) − f′(0−) = 2q f(0)`. The Wronskian `W[f, g] = f′ᵗg − fᵗg′` is
//! constant in `x`, including across the origin.
//!
//! Solutions are integrated backward from `x_max` with the three-stage
//! Gauss–Legendre method, which preserves `W` exactly up to rounding. `f₃`
//! dominates backward integration, so `f₁`, `f₂` and `f̃₄` are kept free of
//! it by subtracting the multiple of `f₃` that makes
//! `(f⁽²⁾)′ − μf⁽²⁾ = 0`. This fixes the representative modulo `f₃`, which
//! leaves `det D`, `T̃`, and the listed Wronskians unchanged. `f̃₄` decays
//! backward, so for `|ξ| ≥ 0.1` its `f₁`, `f₂` parts are removed as well,
//! i.e. `f̃₄ = f₄`; the normalization `e^{−μx}f̃₄ → [0,1]ᵗ` is unaffected.

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::scalar::{c, cu, Real};
use crate::soliton::{soliton_profile, SolitonParams};
use num_complex::Complex;
use rayon::prelude::*;

/// `(f⁽¹⁾, f⁽²⁾, f⁽¹⁾′, f⁽²⁾′)` at one point.
pub type State<T> = [Complex<T>; 4];

/// 2×2 complex matrix, row-major.
pub type Mat2<T> = [[Complex<T>; 2]; 2];

/// Potential and defect defining the generalized eigenvalue problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JostProblem<T> {
    pub q: T,
    pub omega: T,
    /// Solitary wave generating the potential; `None` for `V ≡ 0`.
    pub soliton: Option<SolitonParams<T>>,
}

impl<T: Real> JostProblem<T> {
    pub fn new(params: &SolitonParams<T>) -> Self {
        Self { q: params.q, omega: params.omega, soliton: Some(*params) }
    }

    /// Delta defect only, `V ≡ 0`.
    pub fn free(q: T, omega: T) -> Result<Self> {
        if !(omega > T::zero()) {
            return Err(Error::Parameter(format!("omega must be positive, got {omega}")));
        }
        Ok(Self { q, omega, soliton: None })
    }

    /// `(V₁, V₂)` at `x`.
    pub fn potential(&self, x: T) -> (T, T) {
        match &self.soliton {
            None => (T::zero(), T::zero()),
            Some(sp) => {
                let qp = soliton_profile(sp, x.abs()).abs().powf(sp.p);
                let s = sp.sigma() * qp * c(0.5);
                (s * (sp.p + c(2.0)), s * sp.p)
            }
        }
    }

    pub fn mu(&self, xi: T) -> T {
        (xi * xi + c::<T>(4.0) * self.omega).sqrt()
    }

    /// Starting point of backward integration: where `Q^p` drops below
    /// `decay_tol`, capped at `x_max`.
    pub fn start(&self, cfg: &JostConfig<T>) -> T {
        match &self.soliton {
            None => T::one().min(cfg.x_max),
            Some(sp) => {
                let peak = soliton_profile(sp, T::zero()).powf(sp.p);
                let x = sp.truncation_radius((cfg.decay_tol / peak.max(T::one())).powf(T::one() / sp.p));
                x.max(T::one()).min(cfg.x_max)
            }
        }
    }
}

/// Integration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JostConfig<T> {
    pub x_max: T,
    /// Largest step; the actual step also resolves `1/μ` and `1/|ξ|`.
    pub step: T,
    /// Steps per unit of `max(μ, |ξ|)·h`.
    pub resolution: T,
    /// Extent of the recorded left half-line.
    pub x_left: T,
    pub record_every: usize,
    pub decay_tol: T,
}

impl<T: Real> Default for JostConfig<T> {
    fn default() -> Self {
        Self {
            x_max: c(40.0),
            step: c(0.02),
            resolution: c(0.2),
            x_left: c(2.0),
            record_every: 10,
            decay_tol: c(1e-16),
        }
    }
}

/// Names of the solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JostLabel {
    F1,
    F2,
    F3,
    F4Tilde,
    F4,
    G1,
    G2,
    G3,
    G4,
}

/// A recorded solution; the value at `x[i]` is `exp(log_scale[i])·states[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JostSolution<T> {
    pub label: JostLabel,
    pub xi: T,
    pub mu: T,
    pub x: Vec<T>,
    pub states: Vec<State<T>>,
    pub log_scale: Vec<T>,
}

impl<T: Real> JostSolution<T> {
    pub fn value(&self, i: usize) -> State<T> {
        let s = Complex::from(self.log_scale[i].exp());
        self.states[i].map(|v| v * s)
    }

    /// Index of the right limit at the origin.
    pub fn origin_index(&self) -> usize {
        self.x.iter().position(|&x| x == T::zero()).map(|i| i + 1).unwrap_or(0).min(self.x.len() - 1)
    }
}

/// `f₁, f₂, f₃, f̃₄` at one `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct JostSet<T> {
    pub xi: T,
    pub mu: T,
    pub q: T,
    pub solutions: [JostSolution<T>; 4],
    /// States at `0+` in the order `f₁, f₂, f₃, f̃₄`.
    pub origin: [State<T>; 4],
}

/// `W[f, g] = f′ᵗg − fᵗg′`.
pub fn wronskian<T: Real>(f: &State<T>, g: &State<T>) -> Complex<T> {
    f[2] * g[0] + f[3] * g[1] - f[0] * g[2] - f[1] * g[3]
}

/// `|f′||g| + |f||g′|`, the natural size of `W[f, g]`.
pub fn wronskian_scale<T: Real>(f: &State<T>, g: &State<T>) -> T {
    let n = |a: Complex<T>, b: Complex<T>| (a.norm_sqr() + b.norm_sqr()).sqrt();
    n(f[2], f[3]) * n(g[0], g[1]) + n(f[0], f[1]) * n(g[2], g[3])
}

/// Reflection `g(x) = f(−x)` evaluated at `0+` from the state of `f` at `0+`.
pub fn reflect_at_origin<T: Real>(f: &State<T>, q: T) -> State<T> {
    let two_q = Complex::from(c::<T>(2.0) * q);
    [f[0], f[1], -(f[2] - two_q * f[0]), -(f[3] - two_q * f[1])]
}

const GL_SQRT15: f64 = 3.872_983_346_207_417;

fn gl3<T: Real>() -> ([T; 3], [[T; 3]; 3], [T; 3]) {
    let s = GL_SQRT15;
    let cs = [0.5 - s / 10.0, 0.5, 0.5 + s / 10.0];
    let a = [
        [5.0 / 36.0, 2.0 / 9.0 - s / 15.0, 5.0 / 36.0 - s / 30.0],
        [5.0 / 36.0 + s / 24.0, 2.0 / 9.0, 5.0 / 36.0 - s / 24.0],
        [5.0 / 36.0 + s / 30.0, 2.0 / 9.0 + s / 15.0, 5.0 / 36.0],
    ];
    let b = [5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0];
    (cs.map(c), a.map(|r| r.map(c)), b.map(c))
}

/// System matrix of `y′ = A y` at `x`.
fn system<T: Real>(problem: &JostProblem<T>, xi: T, mu: T, x: T) -> [[T; 4]; 4] {
    let (v1, v2) = problem.potential(x);
    let two = c::<T>(2.0);
    let (z, o) = (T::zero(), T::one());
    [
        [z, z, o, z],
        [z, z, z, o],
        [-xi * xi + two * v1, two * v2, z, z],
        [two * v2, mu * mu + two * v1, z, z],
    ]
}

/// One Gauss–Legendre step from `x` to `x + h` as a 4×4 transfer matrix.
fn transfer<T: Real>(problem: &JostProblem<T>, xi: T, mu: T, x: T, h: T) -> Result<[[T; 4]; 4]> {
    let (cs, a, b) = gl3::<T>();
    let mats: Vec<[[T; 4]; 4]> = cs.iter().map(|&ci| system(problem, xi, mu, x + ci * h)).collect();
    let mut m = BandedMatrix::<T>::zeros(12, 11, 11);
    for i in 0..3 {
        for j in 0..3 {
            for r in 0..4 {
                for s in 0..4 {
                    let id = if i == j && r == s { T::one() } else { T::zero() };
                    m.set(4 * i + r, 4 * j + s, id - h * a[i][j] * mats[j][r][s]);
                }
            }
        }
    }
    let lu = m.factor()?;
    let mut out = [[T::zero(); 4]; 4];
    for k in 0..4 {
        let mut rhs = vec![T::zero(); 12];
        for i in 0..3 {
            rhs[4 * i + k] = T::one();
        }
        let y = lu.solve(&rhs);
        for r in 0..4 {
            let mut acc = if r == k { T::one() } else { T::zero() };
            for j in 0..3 {
                for s in 0..4 {
                    acc += h * b[j] * mats[j][r][s] * y[4 * j + s];
                }
            }
            out[r][k] = acc;
        }
    }
    Ok(out)
}

fn apply<T: Real>(m: &[[T; 4]; 4], y: &State<T>) -> State<T> {
    let mut out = [Complex::new(T::zero(), T::zero()); 4];
    for (r, o) in out.iter_mut().enumerate() {
        for (s, &v) in y.iter().enumerate() {
            *o += v * m[r][s];
        }
    }
    out
}

fn norm<T: Real>(y: &State<T>) -> T {
    y.iter().map(|v| v.norm_sqr()).sum::<T>().sqrt()
}

/// Scaled state `exp(log)·state`.
#[derive(Debug, Clone, Copy)]
struct Scaled<T> {
    state: State<T>,
    log: T,
}

impl<T: Real> Scaled<T> {
    fn new(state: State<T>, log: T) -> Self {
        let mut s = Self { state, log };
        s.renormalize();
        s
    }

    fn renormalize(&mut self) {
        let n = norm(&self.state);
        if n > T::zero() && n.is_finite() {
            self.state = self.state.map(|v| v / n);
            self.log += n.ln();
        }
    }

    fn actual(&self) -> State<T> {
        let s = Complex::from(self.log.exp());
        self.state.map(|v| v * s)
    }
}

/// Removes the `f₃` part of `f` so that `(f⁽²⁾)′ − μf⁽²⁾ = 0`.
fn strip_f3<T: Real>(f: &mut Scaled<T>, f3: &Scaled<T>, mu: T) {
    let m = Complex::from(mu);
    let den = f3.state[3] - m * f3.state[1];
    if den.norm() == T::zero() {
        return;
    }
    let num = f.state[3] - m * f.state[1];
    let k = num / den;
    for i in 0..4 {
        f.state[i] -= k * f3.state[i];
    }
    f.renormalize();
}

/// Removes the `f₁`, `f₂` parts of `f` so that `W[f₁, f] = W[f₂, f] = 0`.
fn strip_oscillatory<T: Real>(f: &mut Scaled<T>, f1: &Scaled<T>, f2: &Scaled<T>) {
    let w12 = wronskian(&f1.state, &f2.state);
    if w12.norm() == T::zero() {
        return;
    }
    let a = wronskian(&f2.state, &f.state) / -w12;
    let b = wronskian(&f1.state, &f.state) / w12;
    for i in 0..4 {
        f.state[i] -= a * f1.state[i] + b * f2.state[i];
    }
    f.renormalize();
}

/// Below this `|ξ|` the oscillatory parts of `f̃₄` are left in place.
pub const OSCILLATORY_STRIP_MIN_XI: f64 = 0.1;

fn jump_left<T: Real>(f: &State<T>, q: T) -> State<T> {
    let two_q = Complex::from(c::<T>(2.0) * q);
    [f[0], f[1], f[2] - two_q * f[0], f[3] - two_q * f[1]]
}

/// Integrates `f₁, f₂, f₃, f̃₄` from the far field down to `0+`, across the
/// jump, and on to `−x_left`. With `record == false` only the origin states
/// are kept.
fn integrate<T: Real>(problem: &JostProblem<T>, xi: T, cfg: &JostConfig<T>, record: bool) -> Result<JostSet<T>> {
    let mu = problem.mu(xi);
    let x0 = problem.start(cfg);
    let kmax = mu.max(xi.abs()).max(T::one());
    let hmax = cfg.step.min(cfg.resolution / kmax);
    let n = (x0 / hmax).ceil().to_usize().unwrap_or(1).max(1);
    let h = x0 / cu(n);
    let z = T::zero();
    let cz = Complex::new(z, z);
    let i = Complex::new(z, T::one());
    let ph = Complex::new(z, xi * x0).exp();
    let mut sol = [
        Scaled::new([ph, cz, i * Complex::from(xi) * ph, cz], z),
        Scaled::new([ph.conj(), cz, -i * Complex::from(xi) * ph.conj(), cz], z),
        Scaled::new([cz, Complex::from(T::one()), cz, Complex::from(-mu)], -mu * x0),
        Scaled::new([cz, Complex::from(T::one()), cz, Complex::from(mu)], mu * x0),
    ];
    let labels = [JostLabel::F1, JostLabel::F2, JostLabel::F3, JostLabel::F4Tilde];
    let mut xs = Vec::new();
    let mut rec: [Vec<Scaled<T>>; 4] = Default::default();
    let push = |xs: &mut Vec<T>, rec: &mut [Vec<Scaled<T>>; 4], x: T, sol: &[Scaled<T>; 4]| {
        xs.push(x);
        for k in 0..4 {
            rec[k].push(sol[k]);
        }
    };
    if record {
        push(&mut xs, &mut rec, x0, &sol);
    }
    for step in 0..n {
        let x = x0 - cu::<T>(step) * h;
        let m = transfer(problem, xi, mu, x, -h)?;
        for s in sol.iter_mut() {
            s.state = apply(&m, &s.state);
            s.renormalize();
        }
        let f3 = sol[2];
        for k in [0, 1, 3] {
            strip_f3(&mut sol[k], &f3, mu);
        }
        if xi.abs() >= c(OSCILLATORY_STRIP_MIN_XI) {
            let (f1, f2) = (sol[0], sol[1]);
            strip_oscillatory(&mut sol[3], &f1, &f2);
        }
        if record && ((step + 1) % cfg.record_every.max(1) == 0 || step + 1 == n) {
            push(&mut xs, &mut rec, x0 - cu::<T>(step + 1) * h, &sol);
        }
    }
    if let Some(x) = xs.last_mut() {
        *x = T::zero();
    }
    let origin = [sol[0].actual(), sol[1].actual(), sol[2].actual(), sol[3].actual()];
    if origin.iter().flatten().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Numerical(format!("non-finite Jost data at xi = {xi}")));
    }
    if record && cfg.x_left > T::zero() {
        for s in sol.iter_mut() {
            s.state = jump_left(&s.state, problem.q);
            s.renormalize();
        }
        push(&mut xs, &mut rec, T::zero(), &sol);
        let nl = (cfg.x_left / h).ceil().to_usize().unwrap_or(1).max(1);
        for step in 0..nl {
            let x = -cu::<T>(step) * h;
            let m = transfer(problem, xi, mu, x, -h)?;
            for s in sol.iter_mut() {
                s.state = apply(&m, &s.state);
                s.renormalize();
            }
            if (step + 1) % cfg.record_every.max(1) == 0 || step + 1 == nl {
                push(&mut xs, &mut rec, -cu::<T>(step + 1) * h, &sol);
            }
        }
    }
    // Ascending order; the right limit at the origin follows the left one.
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.reverse();
    if let Some(p) = order.iter().position(|&k| xs[k] == T::zero()) {
        if p + 1 < order.len() && xs[order[p + 1]] == T::zero() {
            order.swap(p, p + 1);
        }
    }
    let solutions = std::array::from_fn(|k| JostSolution {
        label: labels[k],
        xi,
        mu,
        x: order.iter().map(|&j| xs[j]).collect(),
        states: order.iter().map(|&j| rec[k][j].state).collect(),
        log_scale: order.iter().map(|&j| rec[k][j].log).collect(),
    });
    Ok(JostSet { xi, mu, q: problem.q, solutions, origin })
}

/// Backward construction of `f₁, f₂, f₃, f̃₄` on `[−x_left, x_start]`.
pub fn solve_jost_backward<T: Real>(problem: &JostProblem<T>, xi: T, cfg: &JostConfig<T>) -> Result<JostSet<T>> {
    integrate(problem, xi, cfg, true)
}

/// Wronskians among the Jost solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wronskians<T> {
    pub w12: Complex<T>,
    pub w34: Complex<T>,
    pub w13: Complex<T>,
    pub w23: Complex<T>,
    pub w14: Complex<T>,
    pub w24: Complex<T>,
}

/// Scattering quantities at one `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringData<T> {
    pub xi: T,
    pub mu: T,
    pub d: Mat2<T>,
    pub det_d: Complex<T>,
    /// `None` at `ξ = 0`, where `f₄` is undefined.
    pub a: Option<Mat2<T>>,
    pub b: Option<Mat2<T>>,
    pub t_tilde: Complex<T>,
    pub r_tilde: Option<Complex<T>>,
    pub wronskians: Wronskians<T>,
    /// `|det D|` below `1e−12`.
    pub threshold_singular: bool,
}

fn det2<T: Real>(m: &Mat2<T>) -> Complex<T> {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn inv2<T: Real>(m: &Mat2<T>) -> Mat2<T> {
    let d = det2(m);
    [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]
}

fn mul2<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

/// `D = 𝒲[F₁, G₂]` from the states at `0+`.
pub fn d_matrix<T: Real>(origin: &[State<T>; 4], q: T) -> Mat2<T> {
    let g1 = reflect_at_origin(&origin[0], q);
    let g3 = reflect_at_origin(&origin[2], q);
    [
        [wronskian(&origin[0], &g1), wronskian(&origin[0], &g3)],
        [wronskian(&origin[2], &g1), wronskian(&origin[2], &g3)],
    ]
}

/// `det D(ξ)` without recording the solutions.
pub fn det_d<T: Real>(problem: &JostProblem<T>, xi: T, cfg: &JostConfig<T>) -> Result<Complex<T>> {
    let set = integrate(problem, xi, cfg, false)?;
    Ok(det2(&d_matrix(&set.origin, problem.q)))
}

/// Solves a complex linear system by Gaussian elimination with pivoting.
fn solve_dense<T: Real>(mut a: Vec<Vec<Complex<T>>>, mut b: Vec<Vec<Complex<T>>>) -> Result<Vec<Vec<Complex<T>>>> {
    let n = a.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].norm().total_cmp(&a[j][k].norm())).unwrap_or(k);
        if a[p][k].norm() == T::zero() {
            return Err(Error::Numerical("singular Jost basis".into()));
        }
        a.swap(k, p);
        b.swap(k, p);
        for r in k + 1..n {
            let f = a[r][k] / a[k][k];
            for j in k..n {
                let v = a[k][j];
                a[r][j] -= f * v;
            }
            for j in 0..b[r].len() {
                let v = b[k][j];
                b[r][j] -= f * v;
            }
        }
    }
    for k in (0..n).rev() {
        for j in 0..b[k].len() {
            let mut s = b[k][j];
            for m in k + 1..n {
                s -= a[k][m] * b[m][j];
            }
            b[k][j] = s / a[k][k];
        }
    }
    Ok(b)
}

/// Assembles `D`, `A`, `B`, `T̃`, `R̃` and the Wronskians at `ξ`.
pub fn scattering_data<T: Real>(problem: &JostProblem<T>, xi: T, cfg: &JostConfig<T>) -> Result<ScatteringData<T>> {
    let set = integrate(problem, xi, cfg, false)?;
    scattering_from_origin(&set.origin, problem.q, xi, set.mu)
}

/// As [`scattering_data`] from precomputed states at `0+`.
pub fn scattering_from_origin<T: Real>(origin: &[State<T>; 4], q: T, xi: T, mu: T) -> Result<ScatteringData<T>> {
    let [f1, f2, f3, f4t] = origin;
    let d = d_matrix(origin, q);
    let det = det2(&d);
    let wr = Wronskians {
        w12: wronskian(f1, f2),
        w34: wronskian(f3, f4t),
        w13: wronskian(f1, f3),
        w23: wronskian(f2, f3),
        w14: wronskian(f1, f4t),
        w24: wronskian(f2, f4t),
    };
    let two_i_xi = Complex::new(T::zero(), c::<T>(2.0) * xi);
    let dinv = inv2(&d);
    let t_tilde = two_i_xi * dinv[0][0];
    let (a, b, r_tilde) = if xi == T::zero() {
        (None, None, None)
    } else {
        let c1 = -wr.w24 / two_i_xi;
        let c2 = wr.w14 / two_i_xi;
        let f4: State<T> = std::array::from_fn(|k| f4t[k] - c1 * f1[k] - c2 * f2[k]);
        let g: Vec<State<T>> = [f2, &f4, f1, f3].iter().map(|f| reflect_at_origin(f, q)).collect();
        // [g₂ g₄ g₁ g₃]·[A; B] = [f₁ f₃]
        let mat: Vec<Vec<Complex<T>>> = (0..4).map(|r| (0..4).map(|col| g[col][r]).collect()).collect();
        let rhs: Vec<Vec<Complex<T>>> = (0..4).map(|r| vec![f1[r], f3[r]]).collect();
        let sol = solve_dense(mat, rhs)?;
        let a = [[sol[0][0], sol[0][1]], [sol[1][0], sol[1][1]]];
        let b = [[sol[2][0], sol[2][1]], [sol[3][0], sol[3][1]]];
        let bd = mul2(&b, &dinv);
        (Some(a), Some(b), Some(two_i_xi * bd[0][0]))
    };
    Ok(ScatteringData {
        xi,
        mu,
        d,
        det_d: det,
        a,
        b,
        t_tilde,
        r_tilde,
        wronskians: wr,
        threshold_singular: det.norm() < c(1e-12),
    })
}

/// `det D` of the delta defect alone: `−4(iξ − q)(μ + q)`.
pub fn free_delta_det<T: Real>(q: T, omega: T, xi: T) -> Complex<T> {
    let mu = (xi * xi + c::<T>(4.0) * omega).sqrt();
    Complex::new(-q, xi) * Complex::from(mu + q) * Complex::from(-c::<T>(4.0))
}

/// Reflection coefficient `q/(iξ − q)` of the delta defect.
pub fn free_delta_reflection<T: Real>(q: T, xi: T) -> Complex<T> {
    Complex::from(q) / Complex::new(-q, xi)
}

/// Offset used to sample `ξ = 0` by continuity.
pub const THRESHOLD_OFFSET: f64 = 1e-6;

/// `det D(0)`, real by symmetry: the mean of `det D(±ε)`.
pub fn threshold_det<T: Real>(problem: &JostProblem<T>, cfg: &JostConfig<T>) -> Result<T> {
    let e = c::<T>(THRESHOLD_OFFSET);
    let (a, b) = (det_d(problem, e, cfg)?, det_d(problem, -e, cfg)?);
    Ok(((a + b) * c::<T>(0.5)).re)
}

/// `|det D(0)|`; zero exactly at threshold resonances or eigenvalues.
pub fn threshold_indicator<T: Real>(problem: &JostProblem<T>, cfg: &JostConfig<T>) -> Result<T> {
    Ok(threshold_det(problem, cfg)?.abs())
}

/// `det D(0)` sampled in `ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSweep<T> {
    pub omegas: Vec<T>,
    pub det_d0: Vec<T>,
    /// Roots located by bisection on sign changes.
    pub roots: Vec<T>,
}

/// Sweeps `ω ↦ det D(0)` over `omegas` and bisects every sign change.
pub fn threshold_sweep<T: Real>(base: &SolitonParams<T>, omegas: &[T], cfg: &JostConfig<T>) -> Result<ThresholdSweep<T>> {
    let eval = |w: T| -> Result<T> { threshold_det(&JostProblem::new(&base.with_omega(w)?), cfg) };
    let vals: Vec<T> = omegas.par_iter().map(|&w| eval(w)).collect::<Result<_>>()?;
    let mut roots = Vec::new();
    for k in 1..omegas.len() {
        if vals[k - 1].signum() != vals[k].signum() {
            let tol = c::<T>(1e-10).max((omegas[k] - omegas[k - 1]) * c(1e-9));
            roots.push(bisect_result(eval, omegas[k - 1], omegas[k], tol)?);
        }
    }
    Ok(ThresholdSweep { omegas: omegas.to_vec(), det_d0: vals, roots })
}

fn bisect_result<T: Real>(f: impl Fn(T) -> Result<T>, mut a: T, mut b: T, tol: T) -> Result<T> {
    let mut fa = f(a)?;
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let m = (a + b) * c(0.5);
        let fm = f(m)?;
        if fm == T::zero() {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok((a + b) * c(0.5))
}

/// Minimum of `|det D|` over a `ξ` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddedScan<T> {
    pub min_abs: T,
    pub argmin_abs: T,
    /// Minimum of `|det D(ξ)|/(4|ξ|μ)`.
    pub min_rel: T,
    pub argmin_rel: T,
}

/// Scans `|det D(ξ)|` for zeros signalling embedded eigenvalues.
pub fn embedded_eigenvalue_scan<T: Real>(problem: &JostProblem<T>, xi_grid: &[T], cfg: &JostConfig<T>) -> Result<EmbeddedScan<T>> {
    let vals: Vec<T> = xi_grid.par_iter().map(|&xi| det_d(problem, xi, cfg).map(|d| d.norm())).collect::<Result<_>>()?;
    let mut out = EmbeddedScan { min_abs: T::infinity(), argmin_abs: T::nan(), min_rel: T::infinity(), argmin_rel: T::nan() };
    for (&xi, &v) in xi_grid.iter().zip(&vals) {
        if v < out.min_abs {
            out.min_abs = v;
            out.argmin_abs = xi;
        }
        let rel = v / (c::<T>(4.0) * xi.abs() * problem.mu(xi));
        if rel < out.min_rel {
            out.min_rel = rel;
            out.argmin_rel = xi;
        }
    }
    Ok(out)
}

/// Settings of the `f₃` Volterra oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolterraConfig<T> {
    pub h: T,
    pub tol: T,
    pub max_iter: usize,
    pub max_refinements: usize,
}

impl<T: Real> Default for VolterraConfig<T> {
    fn default() -> Self {
        Self { h: c(0.005), tol: c(1e-12), max_iter: 500, max_refinements: 4 }
    }
}

/// `e^{μx} f₃(x)` on `[0, x_max]` from the Volterra equation.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraF3<T> {
    pub x: Vec<T>,
    pub scaled: Vec<[T; 2]>,
    pub iterations: usize,
    pub h: T,
}

/// Quadrature weights on `n + 1` equispaced nodes, exact for cubics:
/// composite Simpson, with a 3/8 panel at the start when `n` is odd.
fn simpson_weights<T: Real>(n: usize, h: T) -> Vec<T> {
    let mut w = vec![T::zero(); n + 1];
    if n == 0 {
        return w;
    }
    if n == 1 {
        w[0] = h * c(0.5);
        w[1] = h * c(0.5);
        return w;
    }
    let mut start = 0;
    if n % 2 == 1 {
        let k = h * c(3.0 / 8.0);
        w[0] += k;
        w[1] += k * c(3.0);
        w[2] += k * c(3.0);
        w[3] += k;
        start = 3;
    }
    let k = h / c(3.0);
    let mut i = start;
    while i + 2 <= n {
        w[i] += k;
        w[i + 1] += k * c(4.0);
        w[i + 2] += k;
        i += 2;
    }
    w
}

/// Fixed-point iteration of
/// `e^{μx}f₃(x) = [0,1]ᵗ + 2∫ₓ^∞ e^{−μ(y−x)} D_ξ(y−x) S(y) e^{μy}f₃(y) dy`
/// with `D_ξ(z) = diag(sin ξz/ξ, sinh μz/μ)` and `S = [[V₁, V₂], [V₂, V₁]]`.
/// The quadrature step halves whenever the iteration stops contracting.
pub fn solve_f3_volterra<T: Real>(problem: &JostProblem<T>, xi: T, x_max: T, cfg: &VolterraConfig<T>) -> Result<VolterraF3<T>> {
    let mu = problem.mu(xi);
    let mut h = cfg.h;
    for _ in 0..=cfg.max_refinements {
        let n = (x_max / h).ceil().to_usize().unwrap_or(1).max(1);
        let hh = x_max / cu(n);
        let xs: Vec<T> = (0..=n).map(|j| cu::<T>(j) * hh).collect();
        let pot: Vec<(T, T)> = xs.iter().map(|&x| problem.potential(x)).collect();
        let kern = |z: T| -> (T, T) {
            let s = if xi == T::zero() { z } else { (xi * z).sin() / xi };
            let e = (-mu * z).exp();
            (e * s, (T::one() - (-c::<T>(2.0) * mu * z).exp()) / (c::<T>(2.0) * mu))
        };
        let kvals: Vec<(T, T)> = (0..=n).map(|j| kern(cu::<T>(j) * hh)).collect();
        let weights: Vec<Vec<T>> = (0..=n).map(|i| simpson_weights(n - i, hh)).collect();
        let mut u = vec![[T::zero(), T::one()]; n + 1];
        let mut last = T::infinity();
        let mut growth = 0;
        let mut iterations = 0;
        let mut contracted = false;
        for it in 0..cfg.max_iter {
            let next: Vec<[T; 2]> = (0..=n)
                .into_par_iter()
                .map(|i| {
                    let w = &weights[i];
                    let mut acc = [T::zero(), T::zero()];
                    for (k, j) in (i..=n).enumerate() {
                        let (v1, v2) = pot[j];
                        let s0 = v1 * u[j][0] + v2 * u[j][1];
                        let s1 = v2 * u[j][0] + v1 * u[j][1];
                        let (k0, k1) = kvals[j - i];
                        acc[0] += w[k] * k0 * s0;
                        acc[1] += w[k] * k1 * s1;
                    }
                    [c::<T>(2.0) * acc[0], T::one() + c::<T>(2.0) * acc[1]]
                })
                .collect();
            let dist = next
                .iter()
                .zip(&u)
                .fold(T::zero(), |m, (a, b)| m.max((a[0] - b[0]).abs()).max((a[1] - b[1]).abs()));
            u = next;
            iterations = it + 1;
            if dist < cfg.tol {
                contracted = true;
                break;
            }
            if dist > last {
                growth += 1;
                if growth >= 3 {
                    break;
                }
            } else {
                growth = 0;
            }
            last = dist;
        }
        if contracted {
            return Ok(VolterraF3 { x: xs, scaled: u, iterations, h: hh });
        }
        h = h * c(0.5);
    }
    Err(Error::Numerical(format!("Volterra iteration for f3 did not contract at xi = {xi}")))
}
