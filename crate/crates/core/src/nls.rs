//! Time evolution of `i∂ₜu = Hu + σ|u|^p u` by Strang splitting.
//!
//! Each step is a half step of the pointwise phase rotation
//! `u ↦ e^{−iσ|u|^p Δt/2}u`, a Crank–Nicolson step for `i∂ₜu = H_h u`, and
//! another half rotation. Both substeps are unitary in the discrete `L²`
//! norm, so mass is conserved to rounding.

use crate::banded::{BandedLu, BandedMatrix};
use crate::error::{Error, Result};
use crate::fields::{self, ComplexField, TwoComponentField};
use crate::grid::Grid;
use crate::numeric::{self, fit_line};
use crate::operators::{build_hamiltonian, Projector};
use crate::profile::discrete_profile;
use crate::scalar::{c, cu, Real};
use crate::soliton::SolitonParams;
use num_complex::Complex;
use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;

/// One Strang step of the semi-discrete equation.
#[derive(Debug, Clone)]
pub struct SplitStep<T> {
    pub grid: Grid<T>,
    pub q: T,
    pub sigma: T,
    pub p: T,
    pub dt: T,
    hamiltonian: BandedMatrix<T>,
    lu: BandedLu<Complex<T>>,
    explicit: BandedMatrix<Complex<T>>,
}

impl<T: Real> SplitStep<T> {
    /// `sigma = 0` gives the linear flow `e^{−itH_h}` (Crank–Nicolson only).
    pub fn new(grid: Grid<T>, q: T, sigma: T, p: T, dt: T) -> Result<Self> {
        if !(dt > T::zero()) {
            return Err(Error::Parameter(format!("dt must be positive, got {dt}")));
        }
        let hamiltonian = build_hamiltonian(grid, q).matrix;
        let half = Complex::new(T::zero(), dt * c(0.5));
        let hc = hamiltonian.map(|v| Complex::new(v, T::zero()));
        let mut implicit = hc.clone();
        implicit.scale(half);
        implicit.shift_diagonal(Complex::new(T::one(), T::zero()));
        let mut explicit = hc;
        explicit.scale(-half);
        explicit.shift_diagonal(Complex::new(T::one(), T::zero()));
        let lu = implicit.factor()?;
        Ok(Self { grid, q, sigma, p, dt, hamiltonian, lu, explicit })
    }

    fn rotate(&self, u: &mut [Complex<T>], tau: T) {
        if self.sigma == T::zero() {
            return;
        }
        for z in u.iter_mut() {
            let phase = -self.sigma * z.norm_sqr().powf(self.p * c(0.5)) * tau;
            *z *= Complex::new(phase.cos(), phase.sin());
        }
    }

    fn linear(&self, u: &mut Vec<Complex<T>>) {
        let mut rhs = self.explicit.matvec(u);
        self.lu.solve_in_place(&mut rhs);
        numeric::flush_subnormals_complex(&mut rhs);
        *u = rhs;
    }

    pub fn step(&self, u: &mut Vec<Complex<T>>) {
        self.advance(u, 1);
    }

    /// `n` steps; the half rotations between consecutive steps are fused.
    pub fn advance(&self, u: &mut Vec<Complex<T>>, n: usize) {
        if n == 0 {
            return;
        }
        let half = self.dt * c(0.5);
        self.rotate(u, half);
        for k in 0..n {
            self.linear(u);
            self.rotate(u, if k + 1 == n { half } else { self.dt });
        }
    }

    /// `∫|u|²`.
    pub fn mass(&self, u: &[Complex<T>]) -> T {
        u.iter().map(|z| z.norm_sqr()).sum::<T>() * self.grid.h
    }

    /// `½⟨u, H_h u⟩ + σ/(p+2)∫|u|^{p+2}`, the quantity conserved by the
    /// semi-discrete flow.
    pub fn energy(&self, u: &[Complex<T>]) -> T {
        let re: Vec<T> = u.iter().map(|z| z.re).collect();
        let im: Vec<T> = u.iter().map(|z| z.im).collect();
        let hr = self.hamiltonian.matvec(&re);
        let hi = self.hamiltonian.matvec(&im);
        let h = self.grid.h;
        let quad: T = re.iter().zip(&hr).map(|(&a, &b)| a * b).sum::<T>() + im.iter().zip(&hi).map(|(&a, &b)| a * b).sum::<T>();
        let pot: T = u.iter().map(|z| z.norm().powf(self.p + c(2.0))).sum();
        (quad * c::<T>(0.5) + self.sigma / (self.p + c(2.0)) * pot) * h
    }
}

/// Initial perturbation shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Shape {
    /// `e^{−x²/w²}`.
    #[default]
    Even,
    /// `x e^{−x²/w²}`.
    Odd,
    /// `P_c(ω₀)` applied to the even Gaussian (real part) and the even
    /// Gaussian (imaginary part).
    Projected,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Even => "even",
            Shape::Odd => "odd",
            Shape::Projected => "projected",
        })
    }
}

impl FromStr for Shape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" => Ok(Shape::Even),
            "odd" => Ok(Shape::Odd),
            "projected" => Ok(Shape::Projected),
            _ => Err(Error::Parameter(format!("unknown shape '{s}' (expected even, odd or projected)"))),
        }
    }
}

/// Perturbation `ṽ₀`, scaled so that `‖ṽ₀‖_{H¹} + ‖⟨x⟩^α ṽ₀‖_{L²} = η`.
/// The Gaussian is `e^{−(x−c)²/w²}` with centre `c`; parities refer to `c = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation<T> {
    pub shape: Shape,
    pub eta: T,
    pub width: T,
    pub center: T,
    pub alpha: T,
}

impl<T: Real> Default for Perturbation<T> {
    fn default() -> Self {
        Self { shape: Shape::Even, eta: T::zero(), width: T::one(), center: T::zero(), alpha: c(1.2) }
    }
}

/// `‖f‖_{H¹} + ‖⟨x⟩^α f‖_{L²}`.
pub fn data_norm<T: Real>(f: &[Complex<T>], grid: &Grid<T>, alpha: T) -> T {
    fields::h1(f, grid.h) + fields::weighted_l2(f, grid, -alpha)
}

impl<T: Real> Perturbation<T> {
    /// Samples `ṽ₀`; `q0`, `dq0` are the profile and its ω-derivative used
    /// by the projected shape.
    pub fn sample(&self, grid: &Grid<T>, q0: &[T], dq0: &[T]) -> Result<Vec<Complex<T>>> {
        if !(self.eta >= T::zero()) {
            return Err(Error::Parameter(format!("eta must be nonnegative, got {}", self.eta)));
        }
        if !(self.width > T::zero()) {
            return Err(Error::Parameter(format!("width must be positive, got {}", self.width)));
        }
        let w2 = self.width * self.width;
        let gauss: Vec<T> = (0..grid.len())
            .map(|i| {
                let y = grid.x(i) - self.center;
                (-y * y / w2).exp()
            })
            .collect();
        let raw: Vec<Complex<T>> = match self.shape {
            Shape::Even => gauss.iter().map(|&g| Complex::new(g, T::zero())).collect(),
            Shape::Odd => gauss
                .iter()
                .enumerate()
                .map(|(i, &g)| Complex::new((grid.x(i) - self.center) * g, T::zero()))
                .collect(),
            Shape::Projected => {
                let proj = Projector::from_profiles(*grid, q0.to_vec(), dq0.to_vec())?;
                let f = proj.apply(&TwoComponentField::new(*grid, gauss.clone(), gauss));
                f.comp1.iter().zip(&f.comp2).map(|(&a, &b)| Complex::new(a, b)).collect()
            }
        };
        let n = data_norm(&raw, grid, self.alpha);
        if self.eta == T::zero() || n == T::zero() {
            return Ok(vec![Complex::new(T::zero(), T::zero()); grid.len()]);
        }
        let s = self.eta / n;
        Ok(raw.into_iter().map(|z| z * s).collect())
    }
}

/// Everything that determines a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig<T> {
    /// Soliton at `t = 0` (frequency `ω₀`).
    pub params: SolitonParams<T>,
    pub grid: Grid<T>,
    pub dt: T,
    pub t_max: T,
    pub perturbation: Perturbation<T>,
    /// Steps between stored samples.
    pub sample_every: usize,
    /// Abort when `‖u‖_∞` exceeds this multiple of its initial value.
    pub blowup_factor: T,
}

impl<T: Real> EvolutionConfig<T> {
    pub fn new(params: SolitonParams<T>, grid: Grid<T>) -> Self {
        Self {
            params,
            grid,
            dt: c(0.01),
            t_max: c(20.0),
            perturbation: Perturbation::default(),
            sample_every: 10,
            blowup_factor: c(100.0),
        }
    }

    /// `Δt(π/h)²/2`: the phase the fastest grid mode turns per step.
    pub fn accuracy_number(&self) -> T {
        let k = T::PI() / self.grid.h;
        self.dt * k * k * c(0.5)
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round().to_usize().unwrap_or(0)
    }

    /// `Q_{ω₀} + ṽ₀` with the grid-exact profile.
    pub fn initial_data(&self) -> Result<Vec<Complex<T>>> {
        let prof = discrete_profile(self.grid, &self.params)?;
        let v = self.perturbation.sample(&self.grid, &prof.q, &prof.dq)?;
        Ok(prof.q.iter().zip(v).map(|(&a, b)| b + Complex::new(a, T::zero())).collect())
    }
}

/// Sampled solution `u(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub params: SolitonParams<T>,
    pub grid: Grid<T>,
    pub dt: T,
    pub times: Vec<T>,
    pub samples: Vec<Vec<Complex<T>>>,
    pub mass: Vec<T>,
    pub energy: Vec<T>,
    pub x_moment: Vec<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn field(&self, i: usize) -> ComplexField<T> {
        ComplexField { grid: self.grid, values: self.samples[i].clone() }
    }

    /// Largest relative deviation of the mass from its initial value.
    pub fn mass_drift(&self) -> T {
        relative_drift(&self.mass)
    }

    pub fn energy_drift(&self) -> T {
        relative_drift(&self.energy)
    }
}

fn relative_drift<T: Real>(v: &[T]) -> T {
    match v.first() {
        None => T::zero(),
        Some(&v0) => v.iter().map(|&x| (x - v0).abs()).fold(T::zero(), T::max) / v0.abs().max(T::min_positive_value()),
    }
}

/// Runs the evolution, handing each sample (including `t = 0`) to `visit`.
/// Returns the number of steps taken.
pub fn evolve_with<T: Real>(
    config: &EvolutionConfig<T>,
    u0: Vec<Complex<T>>,
    mut visit: impl FnMut(T, &[Complex<T>]) -> ControlFlow<()>,
) -> Result<usize> {
    if config.sample_every == 0 {
        return Err(Error::Parameter("sample_every must be positive".into()));
    }
    let sp = &config.params;
    let stepper = SplitStep::new(config.grid, sp.q, sp.sigma(), sp.p, config.dt)?;
    let mut u = u0;
    let sup0 = fields::linf(&u);
    let limit = sup0 * config.blowup_factor;
    if visit(T::zero(), &u).is_break() {
        return Ok(0);
    }
    let total = config.steps();
    let mut n = 0;
    while n < total {
        let chunk = (config.sample_every - n % config.sample_every).min(total - n);
        stepper.advance(&mut u, chunk);
        n += chunk;
        {
            let t = cu::<T>(n) * config.dt;
            let sup = fields::linf(&u);
            if !(sup <= limit) {
                return Err(Error::Aborted {
                    t: t.to_f64().unwrap_or(f64::NAN),
                    reason: format!("sup norm grew from {sup0:e} to {sup:e}"),
                });
            }
            if visit(t, &u).is_break() {
                return Ok(n);
            }
        }
    }
    Ok(total)
}

/// Runs the evolution from `Q_{ω₀} + ṽ₀` and stores every sample.
pub fn evolve<T: Real>(config: &EvolutionConfig<T>) -> Result<Trajectory<T>> {
    let u0 = config.initial_data()?;
    evolve_from(config, u0)
}

/// Runs the evolution from given data.
pub fn evolve_from<T: Real>(config: &EvolutionConfig<T>, u0: Vec<Complex<T>>) -> Result<Trajectory<T>> {
    let sp = &config.params;
    let meter = SplitStep::new(config.grid, sp.q, sp.sigma(), sp.p, config.dt)?;
    let mut traj = Trajectory {
        params: *sp,
        grid: config.grid,
        dt: config.dt,
        times: vec![],
        samples: vec![],
        mass: vec![],
        energy: vec![],
        x_moment: vec![],
    };
    evolve_with(config, u0, |t, u| {
        traj.times.push(t);
        traj.mass.push(meter.mass(u));
        traj.energy.push(meter.energy(u));
        traj.x_moment.push(fields::x_moment(u, &config.grid));
        traj.samples.push(u.to_vec());
        ControlFlow::Continue(())
    })?;
    Ok(traj)
}

/// Pointwise check of `‖xu(t)‖ ≤ ‖xu₀‖ + 2t·sup_{s≤t}‖∂ₓu(s)‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct VirialReport<T> {
    pub times: Vec<T>,
    pub x_moment: Vec<T>,
    pub bound: Vec<T>,
    /// `min(bound − ‖xu‖)` over samples with `t > 0`.
    pub min_margin: T,
    pub holds: bool,
    /// Least-squares slope of `‖xu(t)‖` against `t`.
    pub growth: T,
    /// `2·sup_t‖∂ₓu(t)‖`.
    pub envelope_rate: T,
}

impl<T: Real> VirialReport<T> {
    /// Fitted growth within 5% of the envelope rate.
    pub fn growth_within_envelope(&self) -> bool {
        self.growth <= self.envelope_rate * c(1.05)
    }

    /// `max |‖xu(t)‖ − ‖xu₀‖| / ‖xu₀‖`.
    pub fn relative_variation(&self) -> T {
        relative_drift(&self.x_moment)
    }
}

pub fn virial_check<T: Real>(traj: &Trajectory<T>) -> VirialReport<T> {
    let h = traj.grid.h;
    let mut sup_dx = T::zero();
    let mut bound = Vec::with_capacity(traj.len());
    let xm: Vec<T> = traj.samples.iter().map(|u| fields::x_moment(u, &traj.grid)).collect();
    let x0 = xm.first().copied().unwrap_or(T::zero());
    for (u, &t) in traj.samples.iter().zip(&traj.times) {
        sup_dx = sup_dx.max(fields::dx_l2(u, h));
        bound.push(x0 + c::<T>(2.0) * t * sup_dx);
    }
    let min_margin = bound
        .iter()
        .zip(&xm)
        .zip(&traj.times)
        .filter(|(_, &t)| t > T::zero())
        .map(|((&b, &m), _)| b - m)
        .fold(T::infinity(), T::min);
    let growth = fit_line(&traj.times, &xm).map(|f| f.slope).unwrap_or(T::zero());
    VirialReport {
        times: traj.times.clone(),
        x_moment: xm,
        bound,
        min_margin,
        holds: min_margin >= T::zero(),
        growth,
        envelope_rate: c::<T>(2.0) * sup_dx,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_round_trip() {
        for s in [Shape::Even, Shape::Odd, Shape::Projected] {
            assert_eq!(s.to_string().parse::<Shape>().unwrap(), s);
        }
        assert!("gaussian".parse::<Shape>().is_err());
    }

    #[test]
    fn perturbation_has_requested_size() {
        let grid = Grid::<f64>::new(0.05, 400).unwrap();
        let z = vec![0.0; grid.len()];
        let pert = Perturbation { shape: Shape::Odd, eta: 1e-2, ..Default::default() };
        let v = pert.sample(&grid, &z, &z).unwrap();
        assert!((data_norm(&v, &grid, 1.2) - 1e-2).abs() < 1e-15);
    }
}
