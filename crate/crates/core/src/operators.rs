//! Finite-difference realizations of `H`, `L±`, `L(ω)` and the conjugated
//! operator `𝓗`, plus the projection onto the continuous spectrum.
//!
//! Two-component operators act on the interleaved layout
//! `[f₁(x₀), f₂(x₀), f₁(x₁), …]`.

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::fields::TwoComponentField;
use crate::grid::Grid;
use crate::scalar::{c, Real};
use crate::soliton::{critical_frequency, evaluate, Regime, SolitonParams};
use num_complex::Complex;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Hamiltonian,
    LPlus,
    LMinus,
    Linearized,
    Conjugated,
}

/// A banded real matrix tagged with the operator it represents.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T> {
    pub kind: OperatorKind,
    pub grid: Grid<T>,
    pub matrix: BandedMatrix<T>,
}

impl<T: Real> OperatorMatrix<T> {
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        self.matrix.matvec(x)
    }

    pub fn dim(&self) -> usize {
        self.matrix.n()
    }

    pub fn is_two_component(&self) -> bool {
        matches!(self.kind, OperatorKind::Linearized | OperatorKind::Conjugated)
    }
}

/// `H = −½∂ₓ² + qδ` with the three-point stencil and `q/h` on the origin node.
///
/// `q` is not sign-restricted here so that repulsive and free stencils can be
/// compared against the attractive one.
pub fn build_hamiltonian<T: Real>(grid: Grid<T>, q: T) -> OperatorMatrix<T> {
    let n = grid.len();
    let h2 = grid.h * grid.h;
    let mut m = BandedMatrix::zeros(n, 1, 1);
    for i in 0..n {
        m.set(i, i, T::one() / h2);
        if i > 0 {
            m.set(i, i - 1, -T::one() / (c::<T>(2.0) * h2));
        }
        if i + 1 < n {
            m.set(i, i + 1, -T::one() / (c::<T>(2.0) * h2));
        }
    }
    m.add(grid.origin(), grid.origin(), q / grid.h);
    OperatorMatrix { kind: OperatorKind::Hamiltonian, grid, matrix: m }
}

/// `H + ω + w(x)` for a potential sampled on the grid.
fn shifted<T: Real>(hmat: &OperatorMatrix<T>, omega: T, w: &[T], kind: OperatorKind) -> OperatorMatrix<T> {
    let mut m = hmat.matrix.clone();
    for (i, &wi) in w.iter().enumerate() {
        m.add(i, i, omega + wi);
    }
    OperatorMatrix { kind, grid: hmat.grid, matrix: m }
}

/// `L(ω)` together with its blocks, `𝓗`, and the sampled profiles.
#[derive(Debug, Clone)]
pub struct Linearized<T> {
    pub params: SolitonParams<T>,
    pub grid: Grid<T>,
    pub profile: Vec<T>,
    pub profile_domega: Vec<T>,
    pub hamiltonian: OperatorMatrix<T>,
    pub l_plus: OperatorMatrix<T>,
    pub l_minus: OperatorMatrix<T>,
    pub l: OperatorMatrix<T>,
    pub hcal: OperatorMatrix<T>,
}

/// Builds `L(ω) = [[0, L₋], [−L₊, 0]]` from the closed-form profile.
pub fn build_linearized<T: Real>(grid: Grid<T>, params: &SolitonParams<T>) -> Result<Linearized<T>> {
    let sp = SolitonParams::new(params.q, params.regime, params.p, params.omega)?;
    let pts: Vec<_> = (0..grid.len()).map(|i| evaluate(&sp, grid.x(i))).collect();
    let profile: Vec<T> = pts.iter().map(|e| e.q).collect();
    let dq: Vec<T> = pts.iter().map(|e| e.domega).collect();
    Ok(build_linearized_from_profile(grid, &sp, profile, dq))
}

/// Builds `L(ω)` for an arbitrary sampled profile (e.g. a grid-exact one).
pub fn build_linearized_from_profile<T: Real>(
    grid: Grid<T>,
    params: &SolitonParams<T>,
    profile: Vec<T>,
    profile_domega: Vec<T>,
) -> Linearized<T> {
    let sigma = params.sigma();
    let p = params.p;
    let qp: Vec<T> = profile.iter().map(|&q| q.powf(p)).collect();
    let hmat = build_hamiltonian(grid, params.q);
    let wm: Vec<T> = qp.iter().map(|&v| sigma * v).collect();
    let wp: Vec<T> = qp.iter().map(|&v| sigma * (p + T::one()) * v).collect();
    let l_minus = shifted(&hmat, params.omega, &wm, OperatorKind::LMinus);
    let l_plus = shifted(&hmat, params.omega, &wp, OperatorKind::LPlus);
    let n = grid.len();
    let mut l = BandedMatrix::zeros(2 * n, 3, 3);
    for i in 0..n {
        for j in i.saturating_sub(1)..(i + 2).min(n) {
            let a = l_minus.matrix.get(i, j);
            let b = l_plus.matrix.get(i, j);
            l.set(2 * i, 2 * j + 1, a);
            l.set(2 * i + 1, 2 * j, -b);
        }
    }
    let mut hc = BandedMatrix::zeros(2 * n, 2, 2);
    let two = c::<T>(2.0);
    for i in 0..n {
        for j in i.saturating_sub(1)..(i + 2).min(n) {
            let hij = hmat.matrix.get(i, j);
            hc.set(2 * i, 2 * j, hij);
            hc.set(2 * i + 1, 2 * j + 1, -hij);
        }
        let v = sigma * qp[i];
        hc.add(2 * i, 2 * i, params.omega + v * (p + two) / two);
        hc.set(2 * i, 2 * i + 1, v * p / two);
        hc.set(2 * i + 1, 2 * i, -v * p / two);
        hc.add(2 * i + 1, 2 * i + 1, -params.omega - v * (p + two) / two);
    }
    Linearized {
        params: *params,
        grid,
        profile,
        profile_domega,
        hamiltonian: hmat,
        l_plus,
        l_minus,
        l: OperatorMatrix { kind: OperatorKind::Linearized, grid, matrix: l },
        hcal: OperatorMatrix { kind: OperatorKind::Conjugated, grid, matrix: hc },
    }
}

impl<T: Real> Linearized<T> {
    /// `L f` for a two-component field.
    pub fn apply(&self, f: &TwoComponentField<T>) -> TwoComponentField<T> {
        TwoComponentField::from_interleaved(self.grid, &self.l.apply(&f.interleaved()))
    }

    /// `𝓗 w` for a complex two-component field `w = (w₁, w₂)`.
    pub fn apply_hcal(&self, w1: &[Complex<T>], w2: &[Complex<T>]) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
        let z = interleave(w1, w2);
        let cm = self.hcal.matrix.map(|v| Complex::new(v, T::zero()));
        deinterleave(&cm.matvec(&z))
    }

    /// `U*(−iL)U w` evaluated with the discrete `L`.
    pub fn apply_conjugated_l(&self, w1: &[Complex<T>], w2: &[Complex<T>]) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
        let s = T::one() / c::<T>(2.0).sqrt();
        let i = Complex::new(T::zero(), T::one());
        let a: Vec<_> = w1.iter().zip(w2).map(|(&x, &y)| (x + y) * s).collect();
        let b: Vec<_> = w1.iter().zip(w2).map(|(&x, &y)| (x - y) * i * s).collect();
        let cm = self.l.matrix.map(|v| Complex::new(v, T::zero()));
        let (la, lb) = deinterleave(&cm.matvec(&interleave(&a, &b)));
        let r1 = la.iter().zip(&lb).map(|(&x, &y)| (x - i * y) * s * (-i)).collect();
        let r2 = la.iter().zip(&lb).map(|(&x, &y)| (x + i * y) * s * (-i)).collect();
        (r1, r2)
    }

    pub fn kernel_vector(&self) -> TwoComponentField<T> {
        TwoComponentField::new(self.grid, vec![T::zero(); self.grid.len()], self.profile.clone())
    }

    pub fn generalized_kernel_vector(&self) -> TwoComponentField<T> {
        TwoComponentField::new(self.grid, self.profile_domega.clone(), vec![T::zero(); self.grid.len()])
    }

    pub fn projector(&self) -> Result<Projector<T>> {
        Projector::from_profiles(self.grid, self.profile.clone(), self.profile_domega.clone())
    }
}

fn interleave<T: Copy>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).flat_map(|(&x, &y)| [x, y]).collect()
}

fn deinterleave<T: Copy>(z: &[T]) -> (Vec<T>, Vec<T>) {
    (z.iter().step_by(2).copied().collect(), z.iter().skip(1).step_by(2).copied().collect())
}

/// `P_c = I − (rank-two projection onto span{∂_ωQ, iQ})`.
#[derive(Debug, Clone)]
pub struct Projector<T> {
    grid: Grid<T>,
    q: Vec<T>,
    dq: Vec<T>,
    denom: T,
}

impl<T: Real> Projector<T> {
    pub fn from_profiles(grid: Grid<T>, q: Vec<T>, dq: Vec<T>) -> Result<Self> {
        let denom: T = q.iter().zip(&dq).map(|(&a, &b)| a * b).sum::<T>() * grid.h;
        let scale: T = q.iter().map(|&a| a * a).sum::<T>().sqrt() * dq.iter().map(|&a| a * a).sum::<T>().sqrt() * grid.h;
        if !(denom.abs() > c::<T>(1e-6) * scale) {
            return Err(Error::Parameter(format!(
                "<Q, dQ/domega> = {denom} is degenerate (omega too close to the critical frequency)"
            )));
        }
        Ok(Self { grid, q, dq, denom })
    }

    /// Closed-form projector; rejects `ω` within `1e−6` of `Ω`.
    pub fn new(grid: Grid<T>, params: &SolitonParams<T>) -> Result<Self> {
        if params.regime == Regime::Focusing && params.p > c(4.0) {
            let w = critical_frequency(params.q, params.p)?;
            if (params.omega - w).abs() < c(1e-6) {
                return Err(Error::Parameter(format!(
                    "omega = {} lies within 1e-6 of the critical frequency {w}",
                    params.omega
                )));
            }
        }
        let pts: Vec<_> = (0..grid.len()).map(|i| evaluate(params, grid.x(i))).collect();
        Self::from_profiles(grid, pts.iter().map(|e| e.q).collect(), pts.iter().map(|e| e.domega).collect())
    }

    /// Coefficients `(a₁, a₂)` with `(I − P_c) f = a₁∂_ωQ + a₂ iQ`.
    pub fn coefficients(&self, f: &TwoComponentField<T>) -> (T, T) {
        let h = self.grid.h;
        let a1: T = f.comp1.iter().zip(&self.q).map(|(&a, &b)| a * b).sum::<T>() * h / self.denom;
        let a2: T = f.comp2.iter().zip(&self.dq).map(|(&a, &b)| a * b).sum::<T>() * h / self.denom;
        (a1, a2)
    }

    pub fn apply(&self, f: &TwoComponentField<T>) -> TwoComponentField<T> {
        let (a1, a2) = self.coefficients(f);
        let mut out = f.clone();
        for (y, &d) in out.comp1.iter_mut().zip(&self.dq) {
            *y -= a1 * d;
        }
        for (y, &q) in out.comp2.iter_mut().zip(&self.q) {
            *y -= a2 * q;
        }
        out
    }

    /// Applies `P_c` to interleaved storage in place.
    pub fn apply_interleaved(&self, z: &mut [T]) {
        let h = self.grid.h;
        let mut s1 = T::zero();
        let mut s2 = T::zero();
        for (i, (&q, &d)) in self.q.iter().zip(&self.dq).enumerate() {
            s1 += z[2 * i] * q;
            s2 += z[2 * i + 1] * d;
        }
        let a1 = s1 * h / self.denom;
        let a2 = s2 * h / self.denom;
        for (i, (&q, &d)) in self.q.iter().zip(&self.dq).enumerate() {
            z[2 * i] -= a1 * d;
            z[2 * i + 1] -= a2 * q;
        }
    }

    /// Applies `P_c` to separately stored components in place.
    pub fn apply_split(&self, f: &mut [T], g: &mut [T]) {
        let h = self.grid.h;
        let a1 = f.iter().zip(&self.q).map(|(&a, &b)| a * b).sum::<T>() * h / self.denom;
        let a2 = g.iter().zip(&self.dq).map(|(&a, &b)| a * b).sum::<T>() * h / self.denom;
        for (y, &d) in f.iter_mut().zip(&self.dq) {
            *y -= a1 * d;
        }
        for (y, &q) in g.iter_mut().zip(&self.q) {
            *y -= a2 * q;
        }
    }

    pub fn denominator(&self) -> T {
        self.denom
    }
}

/// `P_c f` with the closed-form profile at `params`.
pub fn project_continuous<T: Real>(f: &TwoComponentField<T>, params: &SolitonParams<T>) -> Result<TwoComponentField<T>> {
    Ok(Projector::new(f.grid, params)?.apply(f))
}

/// Builds `L(ω)` around the grid-exact profile, for which `L[0, Q]ᵗ = 0` and
/// `L[∂_ωQ, 0]ᵗ = [0, Q]ᵗ` hold to rounding.
pub fn build_linearized_discrete<T: Real>(grid: Grid<T>, params: &SolitonParams<T>) -> Result<Linearized<T>> {
    let s = crate::profile::discrete_profile(grid, params)?;
    Ok(build_linearized_from_profile(grid, params, s.q, s.dq))
}
