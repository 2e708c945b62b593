//! The linearized flow `e^{tL}P_c` and fits of its dispersive decay.
//!
//! `∂ₜz = Lz` is advanced with the implicit midpoint rule
//! `(I − ½Δt L) z⁺ = (I + ½Δt L) z`. With `z = (f, g)` and `a = ½Δt` the
//! implicit system reduces to `(I + a²L₋L₊) f⁺ = r₁ + aL₋r₂`,
//! `g⁺ = r₂ − aL₊f⁺`; the pentadiagonal factor is computed once.
//! `L` is built around the grid-exact profile, so the range of `P_c` is
//! invariant under the discrete flow; re-projection only removes rounding.

use crate::banded::{BandedLu, BandedMatrix};
use crate::error::{Error, Result};
use crate::fields::{self, TwoComponentField};
use crate::grid::Grid;
use crate::jost::{threshold_indicator, JostConfig, JostProblem};
use crate::numeric::{self, fit_line, LineFit};
use crate::operators::{build_linearized_discrete, build_linearized_from_profile, Linearized, Projector};
use crate::scalar::{c, cu, Real};
use crate::soliton::SolitonParams;
use num_complex::Complex;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorConfig<T> {
    /// Time step; negative values run the flow backward.
    pub dt: T,
    /// Steps between re-applications of `P_c`.
    pub reproject_every: usize,
    /// Refuse `ω` with `|det D(0)|` below `spectral_tol`.
    pub check_spectral: bool,
    pub spectral_tol: T,
    pub jost: JostConfig<T>,
}

impl<T: Real> Default for PropagatorConfig<T> {
    fn default() -> Self {
        Self {
            dt: c(0.01),
            reproject_every: 100,
            check_spectral: true,
            spectral_tol: c(1e-3),
            jost: JostConfig::default(),
        }
    }
}

/// Factored implicit-midpoint stepper for `∂ₜz = Lz`.
#[derive(Debug, Clone)]
pub struct Propagator<T> {
    pub linearized: Linearized<T>,
    projector: Option<Projector<T>>,
    lu: BandedLu<T>,
    pub config: PropagatorConfig<T>,
    /// `|det D(0)|` when the spectral check ran.
    pub threshold_indicator: Option<T>,
}

impl<T: Real> Propagator<T> {
    /// Propagator around `Q_ω`; checks the threshold part of the spectral
    /// condition unless disabled.
    pub fn new(grid: Grid<T>, params: &SolitonParams<T>, config: PropagatorConfig<T>) -> Result<Self> {
        let mut indicator = None;
        if config.check_spectral {
            let d = threshold_indicator(&JostProblem::new(params), &config.jost)?;
            if !(d > config.spectral_tol) {
                return Err(Error::Parameter(format!(
                    "spectral condition fails at omega = {}: |det D(0)| = {d:e} <= {:e} (threshold resonance)",
                    params.omega, config.spectral_tol
                )));
            }
            indicator = Some(d);
        }
        let lin = build_linearized_discrete(grid, params)?;
        let projector = Some(lin.projector()?);
        Self::assemble(lin, projector, config, indicator)
    }

    /// `Q ≡ 0`: `L = [[0, H+ω], [−(H+ω), 0]]` with no projection.
    pub fn free(grid: Grid<T>, q: T, omega: T, config: PropagatorConfig<T>) -> Result<Self> {
        let sp = SolitonParams::focusing(q, c(5.0), omega)?;
        let zeros = vec![T::zero(); grid.len()];
        let lin = build_linearized_from_profile(grid, &sp, zeros.clone(), zeros);
        Self::assemble(lin, None, config, None)
    }

    fn assemble(
        lin: Linearized<T>,
        projector: Option<Projector<T>>,
        config: PropagatorConfig<T>,
        indicator: Option<T>,
    ) -> Result<Self> {
        if !(config.dt != T::zero() && config.dt.is_finite()) {
            return Err(Error::Parameter(format!("dt must be finite and nonzero, got {}", config.dt)));
        }
        let a = config.dt * c(0.5);
        let n = lin.grid.len();
        let (lm, lp) = (&lin.l_minus.matrix, &lin.l_plus.matrix);
        let mut schur = BandedMatrix::zeros(n, 2, 2);
        for i in 0..n {
            for k in i.saturating_sub(1)..(i + 2).min(n) {
                let mik = lm.get(i, k);
                for j in k.saturating_sub(1)..(k + 2).min(n) {
                    schur.add(i, j, a * a * mik * lp.get(k, j));
                }
            }
        }
        schur.shift_diagonal(T::one());
        let lu = schur.factor()?;
        Ok(Self { linearized: lin, projector, lu, config, threshold_indicator: indicator })
    }

    pub fn grid(&self) -> Grid<T> {
        self.linearized.grid
    }

    /// `P_c f`, or `f` in the free case.
    pub fn project(&self, f: &TwoComponentField<T>) -> TwoComponentField<T> {
        match &self.projector {
            Some(p) => p.apply(f),
            None => f.clone(),
        }
    }

    /// One step of `(f, g)`.
    pub fn step(&self, f: &mut Vec<T>, g: &mut Vec<T>) {
        let a = self.config.dt * c(0.5);
        let lm = &self.linearized.l_minus.matrix;
        let lp = &self.linearized.l_plus.matrix;
        let lmg = lm.matvec(g);
        let lpf = lp.matvec(f);
        let r2: Vec<T> = g.iter().zip(&lpf).map(|(&x, &y)| x - a * y).collect();
        let lmr2 = lm.matvec(&r2);
        let mut rhs: Vec<T> = (0..f.len()).map(|i| f[i] + a * lmg[i] + a * lmr2[i]).collect();
        self.lu.solve_in_place(&mut rhs);
        let lpf1 = lp.matvec(&rhs);
        for i in 0..g.len() {
            g[i] = r2[i] - a * lpf1[i];
        }
        *f = rhs;
        numeric::flush_subnormals(f);
        numeric::flush_subnormals(g);
    }

    /// Advances `n` steps, re-projecting on the configured cadence.
    /// `counter` is the global step index, used for the cadence.
    fn advance(&self, f: &mut Vec<T>, g: &mut Vec<T>, n: usize, counter: &mut usize) {
        for _ in 0..n {
            self.step(f, g);
            *counter += 1;
            if self.config.reproject_every > 0 && *counter % self.config.reproject_every == 0 {
                if let Some(p) = &self.projector {
                    p.apply_split(f, g);
                }
            }
        }
    }

    /// Number of steps reaching `t` (rounded to the nearest multiple of `|dt|`).
    pub fn steps_to(&self, t: T) -> usize {
        (t / self.config.dt.abs()).round().to_usize().unwrap_or(0)
    }

    /// `e^{tL}P_c v₀` at each time of the increasing `t_grid` (starting at or
    /// after 0). Times are rounded to whole steps.
    pub fn propagate(&self, v0: &TwoComponentField<T>, t_grid: &[T]) -> Result<Vec<TwoComponentField<T>>> {
        check_times(t_grid)?;
        let grid = self.grid();
        let p0 = self.project(v0);
        let (mut f, mut g) = (p0.comp1, p0.comp2);
        let mut done = 0usize;
        let mut counter = 0usize;
        let mut out = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            let target = self.steps_to(t);
            self.advance(&mut f, &mut g, target - done, &mut counter);
            done = target;
            out.push(TwoComponentField::new(grid, f.clone(), g.clone()));
        }
        Ok(out)
    }

    /// Evolves to `t_max`, recording the decay norms every `sample_every` steps.
    pub fn decay_series(&self, v0: &TwoComponentField<T>, t_max: T, sample_every: usize, norms: DecayNorms<T>) -> Result<DecaySeries<T>> {
        if sample_every == 0 {
            return Err(Error::Parameter("sample_every must be positive".into()));
        }
        let grid = self.grid();
        let p0 = self.project(v0);
        let (mut f, mut g) = (p0.comp1, p0.comp2);
        let total = self.steps_to(t_max);
        let mut series = DecaySeries::new(norms);
        let mut done = 0usize;
        let mut counter = 0usize;
        while done + sample_every <= total {
            self.advance(&mut f, &mut g, sample_every, &mut counter);
            done += sample_every;
            let t = cu::<T>(done) * self.config.dt.abs();
            let u: Vec<Complex<T>> = f.iter().zip(&g).map(|(&a, &b)| Complex::new(a, b)).collect();
            series.push_complex(t, &grid, &u);
        }
        Ok(series)
    }
}

fn check_times<T: Real>(t_grid: &[T]) -> Result<()> {
    if t_grid.iter().any(|&t| !(t >= T::zero())) {
        return Err(Error::Parameter("times must be nonnegative".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::Parameter("times must be nondecreasing".into()));
    }
    Ok(())
}

/// Parameters of the norms recorded in a [`DecaySeries`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayNorms<T> {
    /// Weight exponent of `‖⟨x⟩^{−α}z‖_{L²}`.
    pub alpha: T,
    /// Exponent of `‖z‖_{L^r}`.
    pub r: T,
    /// Weight exponent of the localized sup norm `‖⟨x⟩^{−β}z‖_{L∞}`.
    pub beta: T,
}

impl<T: Real> Default for DecayNorms<T> {
    fn default() -> Self {
        Self { alpha: c(1.2), r: c(12.0), beta: T::one() }
    }
}

/// Norm selector for [`fit_decay`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormKey {
    Linf,
    L2,
    L2Weighted,
    Lr,
    LinfWeighted,
}

impl NormKey {
    pub const ALL: [NormKey; 5] = [NormKey::Linf, NormKey::L2, NormKey::L2Weighted, NormKey::Lr, NormKey::LinfWeighted];

    pub fn name(self) -> &'static str {
        match self {
            NormKey::Linf => "linf",
            NormKey::L2 => "l2",
            NormKey::L2Weighted => "l2w",
            NormKey::Lr => "lr",
            NormKey::LinfWeighted => "linfw",
        }
    }
}

impl fmt::Display for NormKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NormKey {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        NormKey::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown norm '{s}' (expected linf, l2, l2w, lr or linfw)")))
    }
}

/// Norms of `e^{tL}P_c v₀` at sampled times. The pointwise modulus of a
/// two-component field is `(z₁² + z₂²)^{1/2}`, which the unitary
/// conjugation to `e^{it𝓗}` preserves.
#[derive(Debug, Clone, PartialEq)]
pub struct DecaySeries<T> {
    pub norms: DecayNorms<T>,
    pub times: Vec<T>,
    pub linf: Vec<T>,
    pub l2: Vec<T>,
    pub l2w: Vec<T>,
    pub lr: Vec<T>,
    pub linfw: Vec<T>,
}

impl<T: Real> DecaySeries<T> {
    pub fn new(norms: DecayNorms<T>) -> Self {
        Self { norms, times: vec![], linf: vec![], l2: vec![], l2w: vec![], lr: vec![], linfw: vec![] }
    }

    /// Appends the norms of `z₁ + iz₂` at time `t`.
    pub fn push_complex(&mut self, t: T, grid: &Grid<T>, u: &[Complex<T>]) {
        self.times.push(t);
        self.linf.push(fields::linf(u));
        self.l2.push(fields::l2(u, grid.h));
        self.l2w.push(fields::weighted_l2(u, grid, self.norms.alpha));
        self.lr.push(fields::lr(u, grid.h, self.norms.r));
        self.linfw.push(fields::weighted_linf(u, grid, self.norms.beta));
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn get(&self, key: NormKey) -> &[T] {
        match key {
            NormKey::Linf => &self.linf,
            NormKey::L2 => &self.l2,
            NormKey::L2Weighted => &self.l2w,
            NormKey::Lr => &self.lr,
            NormKey::LinfWeighted => &self.linfw,
        }
    }
}

/// Least-squares slope of `log‖·‖` against `log t` over `t ∈ [a, b]`.
pub fn fit_decay<T: Real>(series: &DecaySeries<T>, key: NormKey, window: (T, T)) -> Result<LineFit<T>> {
    let (a, b) = window;
    if !(a > T::zero() && b > a) {
        return Err(Error::Fit(format!("invalid window [{a}, {b}]")));
    }
    let vals = series.get(key);
    let (xs, ys): (Vec<T>, Vec<T>) = series
        .times
        .iter()
        .zip(vals)
        .filter(|(&t, &v)| t >= a && t <= b && v > T::zero())
        .map(|(&t, &v)| (t.ln(), v.ln()))
        .unzip();
    if xs.len() < 10 {
        return Err(Error::Fit(format!("only {} samples in window [{a}, {b}], need at least 10", xs.len())));
    }
    fit_line(&xs, &ys)
}

/// Largest lattice group speed `sin(kh)/h` carrying more than `tail` of the
/// discrete Fourier power of `f`.
pub fn max_group_speed<T: Real>(f: &TwoComponentField<T>, tail: T) -> T {
    let grid = f.grid;
    let h = grid.h;
    let nk = 512usize;
    let kmax = T::PI() / h;
    let power: Vec<T> = (0..=nk)
        .map(|j| {
            let k = kmax * cu::<T>(j) / cu::<T>(nk);
            let mut acc = [Complex::new(T::zero(), T::zero()); 2];
            for i in 0..grid.len() {
                let ph = Complex::new(T::zero(), -k * grid.x(i)).exp();
                acc[0] += ph * f.comp1[i];
                acc[1] += ph * f.comp2[i];
            }
            acc[0].norm_sqr() + acc[1].norm_sqr()
        })
        .collect();
    let total: T = power.iter().copied().sum();
    if !(total > T::zero()) {
        return T::zero();
    }
    let mut acc = T::zero();
    let mut cut = 0;
    for j in (0..=nk).rev() {
        acc += power[j];
        if acc > tail * total {
            cut = j;
            break;
        }
    }
    let kc = kmax * cu::<T>(cut) / cu::<T>(nk);
    // The lattice group speed peaks at k = π/(2h).
    let k_eff = kc.min(kmax * c(0.5));
    (k_eff * h).sin() / h
}

/// `X / (2 v_max)`: the end of the pre-reflection era.
pub fn reflection_time<T: Real>(half_width: T, max_speed: T) -> T {
    half_width / (c::<T>(2.0) * max_speed.max(T::epsilon()))
}

/// `x(1+it)^{−3/2} e^{−x²/(2(1+it))}`: the free evolution of `x e^{−x²/2}`
/// under `i∂ₜu = −½u″`, which the delta does not see.
pub fn free_odd_gaussian<T: Real>(x: T, t: T) -> Complex<T> {
    let one = Complex::new(T::one(), t);
    let e = (-Complex::new(x * x, T::zero()) / (one * c::<T>(2.0))).exp();
    e * x / one.powf(c(1.5))
}
