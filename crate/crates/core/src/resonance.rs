//! Edge resonances of the linearized operator by a shooting method in `ω`.
//!
//! For `λ = iω` the eigenvalue problem splits into the real system
//! `L₋g₁ = −ωf₂`, `L₋g₂ = ωf₁`, `L₊f₁ = ωg₂`, `L₊f₂ = −ωg₁` on `[0, x₀]`.
//! Even solutions satisfy `u′(0) = q·u(0)` and odd ones `u(0) = 0`. The far
//! field is pinned by `f₁(x₀) = 1`, `f₁′(x₀) = 0`, `f₁ = g₁` and `f₂ = −g₂`
//! at `x₀`. A resonance is a frequency at which the solution is
//! asymptotically flat.

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::scalar::{c, cu, Real};
use crate::soliton::{critical_frequency, soliton_mass, soliton_profile, Regime, SolitonParams};
use rayon::prelude::*;

/// Reflection symmetry of the sought solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            other => Err(Error::Parameter(format!("unknown parity '{other}' (expected even|odd)"))),
        }
    }
}

/// Boundary rows imposed at `x₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FarField {
    /// `f₁ = 1`, `f₁′ = 0`, `f₁ = g₁`, `f₂ = −g₂`.
    #[default]
    Normalized,
    /// `u′(x₀) = 0` for all four unknowns. Homogeneous, so the discrete
    /// solution is zero whenever the system is nonsingular.
    AllFlat,
}

/// Discretization of the boundary-value problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShooterConfig<T> {
    pub x0: T,
    pub h: T,
    pub window_frac: T,
    pub far_field: FarField,
}

impl<T: Real> Default for ShooterConfig<T> {
    fn default() -> Self {
        Self { x0: c(50.0), h: c(0.01), window_frac: c(0.1), far_field: FarField::Normalized }
    }
}

impl<T: Real> ShooterConfig<T> {
    /// Number of intervals on `[0, x₀]`.
    pub fn intervals(&self) -> usize {
        (self.x0 / self.h).round().to_usize().unwrap_or(0)
    }
}

/// Assembled collocation system; unknown `4j + k` is component `k` of
/// `(f₁, f₂, g₁, g₂)` at node `j`.
#[derive(Debug, Clone)]
pub struct BvpSystem<T> {
    pub matrix: BandedMatrix<T>,
    pub rhs: Vec<T>,
    pub params: SolitonParams<T>,
    pub parity: Parity,
    pub h: T,
    pub n: usize,
}

/// Solution of the boundary-value problem on `[0, x₀]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BvpSolution<T> {
    pub x: Vec<T>,
    pub f1: Vec<T>,
    pub f2: Vec<T>,
    pub g1: Vec<T>,
    pub g2: Vec<T>,
    pub parity: Parity,
    pub omega: T,
}

/// Flatness sampled over a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceScan<T> {
    pub omegas: Vec<T>,
    /// `NaN` where the solve failed.
    pub flatness: Vec<T>,
    pub minima: Vec<(T, T)>,
}

/// `u″ = F u` coefficient at `x` for `u = (f₁, f₂, g₁, g₂)`.
fn coefficient<T: Real>(params: &SolitonParams<T>, x: T) -> [[T; 4]; 4] {
    let (w, sigma, p) = (params.omega, params.sigma(), params.p);
    let qp = soliton_profile(params, x).abs().powf(p);
    let two = c::<T>(2.0);
    let vp = two * (w + sigma * (p + T::one()) * qp);
    let vm = two * (w + sigma * qp);
    let (z, cw) = (T::zero(), two * w);
    [[vp, z, z, -cw], [z, vp, cw, z], [z, cw, vm, z], [-cw, z, z, vm]]
}

/// Fourth-order one-sided first-derivative weights (times `12h`).
const ONE_SIDED: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];

/// Builds the banded system for given `ω`, parity and discretization.
///
/// Interior rows use the Numerov scheme
/// `(I − h²F₊/12)u₊ − 2(I + 5h²F/12)u + (I − h²F₋/12)u₋ = 0`, and the
/// derivative boundary rows use fourth-order one-sided differences.
pub fn assemble_bvp<T: Real>(params: &SolitonParams<T>, parity: Parity, cfg: &ShooterConfig<T>) -> Result<BvpSystem<T>> {
    let n = cfg.intervals();
    if n < 8 {
        return Err(Error::Parameter(format!("x0 / h = {n} intervals is too few")));
    }
    let h = cfg.x0 / cu(n);
    let q = params.q;
    let dim = 4 * (n + 1);
    let mut a = BandedMatrix::zeros(dim, 17, 16);
    let mut rhs = vec![T::zero(); dim];
    let h2 = h * h;
    let inv_h2 = T::one() / h2;
    let twelfth = h2 / c::<T>(12.0);
    let coeffs: Vec<[[T; 4]; 4]> = (0..=n).map(|j| coefficient(params, cu::<T>(j) * h)).collect();
    for j in 1..n {
        for k in 0..4 {
            let r = 4 * j + k;
            for m in 0..4 {
                let id = if k == m { T::one() } else { T::zero() };
                let lo = (id - twelfth * coeffs[j - 1][k][m]) * inv_h2;
                let mid = -c::<T>(2.0) * (id + c::<T>(5.0) * twelfth * coeffs[j][k][m]) * inv_h2;
                let hi = (id - twelfth * coeffs[j + 1][k][m]) * inv_h2;
                a.set(r, 4 * (j - 1) + m, lo);
                a.set(r, 4 * j + m, mid);
                a.set(r, 4 * (j + 1) + m, hi);
            }
        }
    }
    let inv12h = T::one() / (c::<T>(12.0) * h);
    for k in 0..4 {
        match parity {
            Parity::Even => {
                for (i, &wgt) in ONE_SIDED.iter().enumerate() {
                    a.set(k, k + 4 * i, c::<T>(wgt) * inv12h);
                }
                a.add(k, k, -q);
            }
            Parity::Odd => a.set(k, k, T::one()),
        }
    }
    let e = 4 * n;
    let far_derivative = |a: &mut BandedMatrix<T>, row: usize, col: usize| {
        for (i, &wgt) in ONE_SIDED.iter().enumerate() {
            a.set(row, col - 4 * i, -c::<T>(wgt) * inv12h);
        }
    };
    match cfg.far_field {
        FarField::Normalized => {
            a.set(e, e, T::one());
            rhs[e] = T::one();
            far_derivative(&mut a, e + 1, e);
            a.set(e + 2, e, T::one());
            a.set(e + 2, e + 2, -T::one());
            a.set(e + 3, e + 1, T::one());
            a.set(e + 3, e + 3, T::one());
        }
        FarField::AllFlat => {
            for k in 0..4 {
                far_derivative(&mut a, e + k, e + k);
            }
        }
    }
    Ok(BvpSystem { matrix: a, rhs, params: *params, parity, h, n })
}

impl<T: Real> BvpSystem<T> {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    /// Direct banded solve.
    pub fn solve(&self) -> Result<BvpSolution<T>> {
        let lu = self.matrix.factor()?;
        let u = lu.solve(&self.rhs);
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite BVP solution at omega = {}", self.params.omega)));
        }
        Ok(self.unpack(&u))
    }

    /// Max-norm residual `‖A u − b‖∞` of an interleaved vector.
    pub fn residual(&self, u: &[T]) -> T {
        self.matrix.matvec(u).iter().zip(&self.rhs).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    fn unpack(&self, u: &[T]) -> BvpSolution<T> {
        let comp = |k: usize| (0..=self.n).map(|j| u[4 * j + k]).collect::<Vec<_>>();
        BvpSolution {
            x: (0..=self.n).map(|j| cu::<T>(j) * self.h).collect(),
            f1: comp(0),
            f2: comp(1),
            g1: comp(2),
            g2: comp(3),
            parity: self.parity,
            omega: self.params.omega,
        }
    }
}

impl<T: Real> BvpSolution<T> {
    /// Interleaved unknown vector, inverse of the solver's layout.
    pub fn interleaved(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(4 * self.x.len());
        for j in 0..self.x.len() {
            out.extend_from_slice(&[self.f1[j], self.f2[j], self.g1[j], self.g2[j]]);
        }
        out
    }
}

/// Assembles and solves in one step.
pub fn solve_bvp<T: Real>(params: &SolitonParams<T>, parity: Parity, cfg: &ShooterConfig<T>) -> Result<BvpSolution<T>> {
    assemble_bvp(params, parity, cfg)?.solve()
}

/// Root-mean-square of `f₁′, f₂′, g₁′, g₂′` over the trailing `window_frac`
/// of the domain.
pub fn flatness<T: Real>(sol: &BvpSolution<T>, window_frac: T) -> T {
    let m = sol.x.len();
    if m < 3 {
        return T::zero();
    }
    let h = sol.x[1] - sol.x[0];
    let start = ((T::one() - window_frac) * cu::<T>(m - 1)).floor().to_usize().unwrap_or(0).min(m - 2);
    let mut sum = T::zero();
    let mut count = 0usize;
    for u in [&sol.f1, &sol.f2, &sol.g1, &sol.g2] {
        for j in start..m {
            let d = if j == 0 {
                (u[1] - u[0]) / h
            } else if j + 1 == m {
                (c::<T>(3.0) * u[j] - c::<T>(4.0) * u[j - 1] + u[j - 2]) / (c::<T>(2.0) * h)
            } else {
                (u[j + 1] - u[j - 1]) / (c::<T>(2.0) * h)
            };
            sum += d * d;
            count += 1;
        }
    }
    (sum / cu(count)).sqrt()
}

fn flatness_at<T: Real>(base: &SolitonParams<T>, parity: Parity, omega: T, cfg: &ShooterConfig<T>) -> Result<T> {
    let sp = base.with_omega(omega)?;
    Ok(flatness(&solve_bvp(&sp, parity, cfg)?, cfg.window_frac))
}

/// `n` points spaced uniformly in `log ω`; 200 per decade is the default density.
pub fn log_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    if n < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * cu::<T>(i) / cu::<T>(n - 1)).exp()).collect()
}

/// Sample count giving `per_decade` points per decade on `[lo, hi]`.
pub fn samples_per_decade<T: Real>(lo: T, hi: T, per_decade: usize) -> usize {
    ((hi / lo).log10() * cu::<T>(per_decade)).ceil().to_usize().unwrap_or(2).max(2) + 1
}

/// Interior local minima of a sampled curve, skipping `NaN` gaps.
pub fn local_minima<T: Real>(xs: &[T], ys: &[T]) -> Vec<(T, T)> {
    let mut out = Vec::new();
    for i in 1..ys.len().saturating_sub(1) {
        let (a, b, d) = (ys[i - 1], ys[i], ys[i + 1]);
        if a.is_finite() && b.is_finite() && d.is_finite() && b < a && b <= d {
            out.push((xs[i], b));
        }
    }
    out
}

fn build_scan<T: Real>(base: &SolitonParams<T>, parity: Parity, omegas: Vec<T>, cfg: &ShooterConfig<T>) -> ResonanceScan<T> {
    let flatness: Vec<T> =
        omegas.par_iter().map(|&w| flatness_at(base, parity, w, cfg).unwrap_or_else(|_| T::nan())).collect();
    let minima = local_minima(&omegas, &flatness);
    ResonanceScan { omegas, flatness, minima }
}

/// Flatness on a uniform `ω` grid of `n_samples` points.
pub fn scan<T: Real>(
    base: &SolitonParams<T>,
    parity: Parity,
    omega_lo: T,
    omega_hi: T,
    n_samples: usize,
    cfg: &ShooterConfig<T>,
) -> Result<ResonanceScan<T>> {
    check_range(base, omega_lo, omega_hi)?;
    let n = n_samples.max(2);
    let omegas = (0..n).map(|i| omega_lo + (omega_hi - omega_lo) * cu::<T>(i) / cu::<T>(n - 1)).collect();
    Ok(build_scan(base, parity, omegas, cfg))
}

/// Flatness on a logarithmic `ω` grid with `per_decade` points per decade.
pub fn scan_log<T: Real>(
    base: &SolitonParams<T>,
    parity: Parity,
    omega_lo: T,
    omega_hi: T,
    per_decade: usize,
    cfg: &ShooterConfig<T>,
) -> Result<ResonanceScan<T>> {
    check_range(base, omega_lo, omega_hi)?;
    let n = samples_per_decade(omega_lo, omega_hi, per_decade);
    Ok(build_scan(base, parity, log_grid(omega_lo, omega_hi, n), cfg))
}

fn check_range<T: Real>(base: &SolitonParams<T>, lo: T, hi: T) -> Result<()> {
    if !(lo < hi) {
        return Err(Error::Parameter(format!("empty omega range [{lo}, {hi}]")));
    }
    base.with_omega(lo)?;
    base.with_omega(hi)?;
    Ok(())
}

/// Deepest minimum of a scan, with the bracket formed by its neighbours.
pub fn deepest_minimum<T: Real>(s: &ResonanceScan<T>) -> Option<(T, T, (T, T))> {
    let (w, f) = s.minima.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1))?;
    let i = s.omegas.iter().position(|&v| v == w)?;
    Some((w, f, (s.omegas[i - 1], s.omegas[i + 1])))
}

const REFINE_POINTS: usize = 21;

/// Iterated grid refinement of a flatness minimum: each round samples the
/// bracket at 21 points and shrinks it tenfold around the best sample, until
/// the bracket is narrower than `width_tol`.
pub fn refine<T: Real>(
    base: &SolitonParams<T>,
    parity: Parity,
    bracket: (T, T),
    width_tol: T,
    cfg: &ShooterConfig<T>,
) -> Result<T> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) {
        return Err(Error::Parameter(format!("empty bracket [{lo}, {hi}]")));
    }
    let mut best = (lo + hi) * c(0.5);
    for _ in 0..60 {
        if hi - lo < width_tol {
            return Ok(best);
        }
        let step = (hi - lo) / cu(REFINE_POINTS - 1);
        let omegas: Vec<T> = (0..REFINE_POINTS).map(|i| lo + step * cu::<T>(i)).collect();
        let vals: Vec<T> =
            omegas.par_iter().map(|&w| flatness_at(base, parity, w, cfg).unwrap_or_else(|_| T::nan())).collect();
        let (i, _) = vals
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .min_by(|a, b| a.1.total_cmp(b.1))
            .ok_or_else(|| Error::Search(format!("all solves failed in [{lo}, {hi}]")))?;
        if i == 0 || i == REFINE_POINTS - 1 {
            return Err(Error::Search(format!(
                "flatness minimum escapes bracket [{lo}, {hi}] for {parity} parity at p = {}",
                base.p
            )));
        }
        best = omegas[i];
        lo = best - step;
        hi = best + step;
    }
    Ok(best)
}

/// Scans on a logarithmic grid and refines the deepest minimum.
pub fn find_resonance<T: Real>(
    base: &SolitonParams<T>,
    parity: Parity,
    omega_lo: T,
    omega_hi: T,
    per_decade: usize,
    cfg: &ShooterConfig<T>,
) -> Result<T> {
    let s = scan_log(base, parity, omega_lo, omega_hi, per_decade, cfg)?;
    let (_, _, bracket) = deepest_minimum(&s)
        .ok_or_else(|| Error::Search(format!("no flatness minimum on [{omega_lo}, {omega_hi}]")))?;
    refine(base, parity, bracket, c(1e-5), cfg)
}

/// One row of the resonance table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceRow<T> {
    pub p: T,
    pub omega1: Result<T>,
    pub mass: Result<T>,
    pub omega2: Option<Result<T>>,
    pub omega_crit: Result<T>,
}

/// Search ranges and densities for the table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableConfig<T> {
    pub shooter: ShooterConfig<T>,
    pub per_decade: usize,
    /// Upper end of the even scan; the lower end sits just above `½q²`.
    pub even_hi: T,
    /// Odd scan range.
    pub odd_range: (T, T),
    /// Smallest `p` for which the odd resonance is sought.
    pub odd_min_p: T,
}

impl<T: Real> Default for TableConfig<T> {
    fn default() -> Self {
        Self {
            shooter: ShooterConfig::default(),
            per_decade: 200,
            even_hi: c(4.0),
            odd_range: (c(2.0), c(200.0)),
            odd_min_p: c(4.2),
        }
    }
}

/// Even resonance `ω₁(p)` for the focusing problem.
pub fn even_resonance<T: Real>(q: T, p: T, cfg: &TableConfig<T>) -> Result<T> {
    let threshold = c::<T>(0.5) * q * q;
    let lo = threshold * c(1.02);
    let base = SolitonParams::new(q, Regime::Focusing, p, cfg.even_hi)?;
    find_resonance(&base, Parity::Even, lo, cfg.even_hi, cfg.per_decade, &cfg.shooter)
}

/// Odd resonance `ω₂(p)` for the focusing problem.
pub fn odd_resonance<T: Real>(q: T, p: T, cfg: &TableConfig<T>) -> Result<T> {
    let (lo, hi) = cfg.odd_range;
    let base = SolitonParams::new(q, Regime::Focusing, p, hi)?;
    find_resonance(&base, Parity::Odd, lo, hi, cfg.per_decade, &cfg.shooter)
}

/// Rows `(p, ω₁, M(Q_{ω₁}), ω₂, Ω)`; failures are recorded per entry.
pub fn resonance_table<T: Real>(q: T, p_list: &[T], cfg: &TableConfig<T>) -> Vec<ResonanceRow<T>> {
    p_list
        .iter()
        .map(|&p| {
            let omega1 = even_resonance(q, p, cfg);
            let mass = match &omega1 {
                Ok(w) => SolitonParams::focusing(q, p, *w).map(|sp| soliton_mass(&sp)),
                Err(e) => Err(e.clone()),
            };
            let omega2 = (p >= cfg.odd_min_p).then(|| odd_resonance(q, p, cfg));
            ResonanceRow { p, omega1, mass, omega2, omega_crit: critical_frequency(q, p) }
        })
        .collect()
}

/// Power `p₀` at which `ω₂(p) = Ω(p)`, by bisection on `[p_lo, p_hi]`.
pub fn odd_crossing<T: Real>(q: T, p_lo: T, p_hi: T, tol: T, cfg: &TableConfig<T>) -> Result<T> {
    let gap = |p: T| -> Result<T> { Ok(odd_resonance(q, p, cfg)? - critical_frequency(q, p)?) };
    let (mut a, mut b) = (p_lo, p_hi);
    let (mut fa, fb) = (gap(a)?, gap(b)?);
    if fa.signum() == fb.signum() {
        return Err(Error::Search(format!("omega2 - Omega does not change sign on [{p_lo}, {p_hi}]")));
    }
    while b - a > tol {
        let m = (a + b) * c(0.5);
        let fm = gap(m)?;
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok((a + b) * c(0.5))
}
