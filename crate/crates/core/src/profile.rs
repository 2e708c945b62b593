//! Sampled solitary-wave profiles: the closed form, or the exact stationary
//! state of the finite-difference equation `(H_h + ω)Q + σQ^{p+1} = 0`.
//!
//! The grid-exact profile satisfies `L₋Q = 0` and `L₊∂_ωQ = −Q` to rounding,
//! so the discrete generalized kernel is exactly two-dimensional and
//! `e^{iωt}Q` is an exact solution of the semi-discrete flow.

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::operators::build_hamiltonian;
use crate::scalar::{c, Real};
use crate::soliton::{evaluate, SolitonParams};

/// `Q_ω`, `∂_ωQ_ω`, `∂²_ωQ_ω` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSample<T> {
    pub params: SolitonParams<T>,
    pub grid: Grid<T>,
    pub q: Vec<T>,
    pub dq: Vec<T>,
    pub d2q: Vec<T>,
}

impl<T: Real> ProfileSample<T> {
    /// `⟨Q, ∂_ωQ⟩` on the grid.
    pub fn q_dq(&self) -> T {
        self.q.iter().zip(&self.dq).map(|(&a, &b)| a * b).sum::<T>() * self.grid.h
    }

    pub fn q_norm_sq(&self) -> T {
        self.q.iter().map(|&a| a * a).sum::<T>() * self.grid.h
    }
}

/// Source of profiles at arbitrary `ω`.
pub trait ProfileSource<T: Real>: Sync {
    fn sample(&self, omega: T) -> Result<ProfileSample<T>>;
    fn grid(&self) -> Grid<T>;
    fn base(&self) -> SolitonParams<T>;
}

/// Closed-form profiles.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticProfile<T> {
    pub grid: Grid<T>,
    pub params: SolitonParams<T>,
}

impl<T: Real> ProfileSource<T> for AnalyticProfile<T> {
    fn sample(&self, omega: T) -> Result<ProfileSample<T>> {
        let sp = self.params.with_omega(omega)?;
        let pts: Vec<_> = (0..self.grid.len()).map(|i| evaluate(&sp, self.grid.x(i))).collect();
        Ok(ProfileSample {
            params: sp,
            grid: self.grid,
            q: pts.iter().map(|e| e.q).collect(),
            dq: pts.iter().map(|e| e.domega).collect(),
            d2q: pts.iter().map(|e| e.domega2).collect(),
        })
    }

    fn grid(&self) -> Grid<T> {
        self.grid
    }

    fn base(&self) -> SolitonParams<T> {
        self.params
    }
}

/// Grid-exact profiles obtained by Newton's method from the closed form.
#[derive(Debug, Clone, Copy)]
pub struct DiscreteProfile<T> {
    pub grid: Grid<T>,
    pub params: SolitonParams<T>,
}

impl<T: Real> ProfileSource<T> for DiscreteProfile<T> {
    fn sample(&self, omega: T) -> Result<ProfileSample<T>> {
        discrete_profile(self.grid, &self.params.with_omega(omega)?)
    }

    fn grid(&self) -> Grid<T> {
        self.grid
    }

    fn base(&self) -> SolitonParams<T> {
        self.params
    }
}

/// Grid-exact profiles with Newton warm-started from the last sample,
/// `Q(ω') + (ω − ω')∂_ωQ(ω') + ½(ω − ω')²∂²_ωQ(ω')`. Suited to tracking,
/// where consecutive requests differ by tiny frequency changes.
#[derive(Debug)]
pub struct CachedDiscreteProfile<T> {
    pub grid: Grid<T>,
    pub params: SolitonParams<T>,
    last: std::sync::Mutex<Option<ProfileSample<T>>>,
}

impl<T: Real> CachedDiscreteProfile<T> {
    pub fn new(grid: Grid<T>, params: SolitonParams<T>) -> Self {
        Self { grid, params, last: std::sync::Mutex::new(None) }
    }
}

impl<T: Real> ProfileSource<T> for CachedDiscreteProfile<T> {
    fn sample(&self, omega: T) -> Result<ProfileSample<T>> {
        let sp = self.params.with_omega(omega)?;
        let mut last = self.last.lock().unwrap_or_else(|e| e.into_inner());
        let out = match last.as_ref() {
            Some(prev) if prev.params.omega == omega => return Ok(prev.clone()),
            Some(prev) => {
                let d = omega - prev.params.omega;
                let half = c::<T>(0.5) * d * d;
                let guess = (0..prev.q.len()).map(|i| prev.q[i] + d * prev.dq[i] + half * prev.d2q[i]).collect();
                discrete_profile_from(self.grid, &sp, guess).or_else(|_| discrete_profile(self.grid, &sp))?
            }
            None => discrete_profile(self.grid, &sp)?,
        };
        *last = Some(out.clone());
        Ok(out)
    }

    fn grid(&self) -> Grid<T> {
        self.grid
    }

    fn base(&self) -> SolitonParams<T> {
        self.params
    }
}

fn l_plus<T: Real>(hmat: &BandedMatrix<T>, omega: T, sigma: T, p: T, q: &[T]) -> BandedMatrix<T> {
    let mut m = hmat.clone();
    for (i, &v) in q.iter().enumerate() {
        m.add(i, i, omega + sigma * (p + T::one()) * v.abs().powf(p));
    }
    m
}

/// Solves `(H_h + ω)Q + σ|Q|^pQ = 0` and the two ω-derivative equations.
pub fn discrete_profile<T: Real>(grid: Grid<T>, params: &SolitonParams<T>) -> Result<ProfileSample<T>> {
    let q: Vec<T> = (0..grid.len()).map(|i| evaluate(params, grid.x(i)).q).collect();
    discrete_profile_from(grid, params, q)
}

/// As [`discrete_profile`], with Newton started from `initial`.
pub fn discrete_profile_from<T: Real>(grid: Grid<T>, params: &SolitonParams<T>, initial: Vec<T>) -> Result<ProfileSample<T>> {
    let (sigma, p, w) = (params.sigma(), params.p, params.omega);
    let hmat = build_hamiltonian(grid, params.q).matrix;
    let mut q = initial;
    let scale = q.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    let tol = T::epsilon() * c(64.0) * scale;
    let mut converged = false;
    for _ in 0..30 {
        let hq = hmat.matvec(&q);
        let mut r: Vec<T> = hq
            .iter()
            .zip(&q)
            .map(|(&a, &v)| a + w * v + sigma * v.abs().powf(p) * v)
            .collect();
        let lu = l_plus(&hmat, w, sigma, p, &q).factor()?;
        lu.solve_in_place(&mut r);
        let step = r.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
        for (v, d) in q.iter_mut().zip(&r) {
            *v -= *d;
        }
        if step <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "grid-exact profile did not converge for omega = {w}, h = {}",
            grid.h
        )));
    }
    let lu = l_plus(&hmat, w, sigma, p, &q).factor()?;
    let dq = lu.solve(&q.iter().map(|&v| -v).collect::<Vec<_>>());
    let rhs: Vec<T> = q
        .iter()
        .zip(&dq)
        .map(|(&v, &d)| -c::<T>(2.0) * d - sigma * p * (p + T::one()) * v.abs().powf(p - T::one()) * d * d)
        .collect();
    let d2q = lu.solve(&rhs);
    Ok(ProfileSample { params: *params, grid, q, dq, d2q })
}
