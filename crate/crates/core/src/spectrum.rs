//! Eigenvalues of the discretized operators.
//!
//! Scalar operators (`H`, `L±`) are symmetric tridiagonal and handled by
//! Sturm bisection. For `L(ω)` the identity `L² = diag(−L₋L₊, −L₊L₋)` reduces
//! the problem to the eigenvalues `μ` of the `N×N` product `−L₋L₊`, with
//! `λ = ±√μ`; larger grids use shift-invert Arnoldi on `L` itself.

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::operators::{OperatorKind, OperatorMatrix};
use crate::scalar::{c, Real};
use nalgebra::{DMatrix, Schur};
use num_complex::Complex;

/// Rectangle `re_min ≤ Re λ ≤ re_max`, `im_min ≤ Im λ ≤ im_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window<T> {
    pub re_min: T,
    pub re_max: T,
    pub im_min: T,
    pub im_max: T,
}

impl<T: Real> Window<T> {
    pub fn new(re_min: T, re_max: T, im_min: T, im_max: T) -> Self {
        Self { re_min, re_max, im_min, im_max }
    }

    pub fn everything() -> Self {
        let b = T::max_value();
        Self::new(-b, b, -b, b)
    }

    pub fn contains(&self, z: Complex<T>) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }
}

/// Eigenvalues in a window plus the near-zero cluster summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport<T> {
    /// Sorted by modulus.
    pub eigenvalues: Vec<Complex<T>>,
    /// Number of eigenvalues (with algebraic multiplicity) in the cluster at 0.
    pub near_zero: usize,
    /// Cluster radius used.
    pub threshold: T,
    /// Ratio of the smallest modulus outside the cluster to the largest inside.
    pub cluster_gap: T,
}

/// Number of eigenvalues of the symmetric tridiagonal matrix `(d, e)` below `x`.
pub fn sturm_count<T: Real>(d: &[T], e: &[T], x: T) -> usize {
    let tiny = T::min_positive_value().sqrt();
    let mut count = 0;
    let mut piv = T::one();
    for i in 0..d.len() {
        let off = if i == 0 { T::zero() } else { e[i - 1] * e[i - 1] };
        piv = d[i] - x - off / piv;
        if piv.abs() < tiny {
            piv = -tiny;
        }
        if piv < T::zero() {
            count += 1;
        }
    }
    count
}

/// All eigenvalues of the symmetric tridiagonal matrix in `[lo, hi]`.
pub fn tridiagonal_eigenvalues_in<T: Real>(d: &[T], e: &[T], lo: T, hi: T, tol: T) -> Vec<T> {
    let n_lo = sturm_count(d, e, lo);
    let n_hi = sturm_count(d, e, hi);
    (n_lo..n_hi)
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            while b - a > tol * (T::one() + a.abs().max(b.abs())) {
                let m = (a + b) / c(2.0);
                if sturm_count(d, e, m) > k {
                    b = m;
                } else {
                    a = m;
                }
            }
            (a + b) / c(2.0)
        })
        .collect()
}

fn tridiagonal_parts<T: Real>(m: &BandedMatrix<T>) -> (Vec<T>, Vec<T>) {
    let n = m.n();
    let d = (0..n).map(|i| m.get(i, i)).collect();
    let e = (0..n.saturating_sub(1)).map(|i| m.get(i, i + 1)).collect();
    (d, e)
}

/// Gershgorin bounds of a tridiagonal matrix.
fn gershgorin<T: Real>(d: &[T], e: &[T]) -> (T, T) {
    let mut lo = T::max_value();
    let mut hi = -T::max_value();
    for i in 0..d.len() {
        let r = if i > 0 { e[i - 1].abs() } else { T::zero() } + if i < e.len() { e[i].abs() } else { T::zero() };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    (lo, hi)
}

/// The `k` smallest eigenpairs of a scalar (tridiagonal symmetric) operator;
/// eigenvectors are normalized in the discrete `L²` norm and positive at the origin.
pub fn lowest_eigenpairs<T: Real>(op: &OperatorMatrix<T>, k: usize) -> Result<Vec<(T, Vec<T>)>> {
    if op.is_two_component() {
        return Err(Error::Parameter("lowest_eigenpairs expects a scalar operator".into()));
    }
    let (d, e) = tridiagonal_parts(&op.matrix);
    let (glo, ghi) = gershgorin(&d, &e);
    let n = d.len();
    let k = k.min(n);
    let tol = T::epsilon() * c(4.0);
    let mut out = Vec::with_capacity(k);
    for idx in 0..k {
        let (mut a, mut b) = (glo, ghi);
        for _ in 0..200 {
            if b - a <= tol * (T::one() + a.abs().max(b.abs())) {
                break;
            }
            let m = (a + b) / c(2.0);
            if sturm_count(&d, &e, m) > idx {
                b = m;
            } else {
                a = m;
            }
        }
        let lam = (a + b) / c(2.0);
        let shift = lam + (ghi - glo) * c(1e-10);
        let mut m = op.matrix.clone();
        m.shift_diagonal(-shift);
        let lu = m.factor()?;
        let mut v: Vec<T> = (0..n).map(|i| T::one() + c::<T>(1e-3) * c(((i * 7919) % 13) as f64)).collect();
        for _ in 0..4 {
            lu.solve_in_place(&mut v);
            let nrm = (v.iter().map(|&x| x * x).sum::<T>() * op.grid.h).sqrt();
            for x in &mut v {
                *x /= nrm;
            }
        }
        if v[op.grid.origin()] < T::zero() {
            for x in &mut v {
                *x = -*x;
            }
        }
        out.push((lam, v));
    }
    Ok(out)
}

/// Largest dimension of `L(ω)` handled by the dense path.
pub const DENSE_LIMIT: usize = 8002;

/// Eigenvalues of `op` inside `window`.
pub fn discrete_spectrum<T: Real>(op: &OperatorMatrix<T>, window: Window<T>) -> Result<SpectrumReport<T>> {
    let h = op.grid.h;
    let mut eig: Vec<Complex<T>> = match op.kind {
        OperatorKind::Hamiltonian | OperatorKind::LPlus | OperatorKind::LMinus => {
            if window.im_min > T::zero() || window.im_max < T::zero() {
                Vec::new()
            } else {
                let (d, e) = tridiagonal_parts(&op.matrix);
                let (glo, ghi) = gershgorin(&d, &e);
                let lo = window.re_min.max(glo);
                let hi = window.re_max.min(ghi);
                tridiagonal_eigenvalues_in(&d, &e, lo, hi, T::epsilon() * c(4.0))
                    .into_iter()
                    .map(|x| Complex::new(x, T::zero()))
                    .collect()
            }
        }
        OperatorKind::Linearized | OperatorKind::Conjugated => {
            let lam = if op.dim() <= DENSE_LIMIT {
                linearized_dense(&linearized_blocks(op)?)?
            } else {
                let centre = Complex::new(
                    (window.re_min.max(-c::<T>(1e6)) + window.re_max.min(c(1e6))) / c(2.0),
                    (window.im_min.max(-c::<T>(1e6)) + window.im_max.min(c(1e6))) / c(2.0),
                );
                let l = linearized_matrix(op);
                shift_invert_arnoldi(&l, centre, 24)?
            };
            if op.kind == OperatorKind::Conjugated {
                // 𝓗 = −iU*LU has eigenvalues −iλ.
                lam.into_iter().map(|z| Complex::new(z.im, -z.re)).collect()
            } else {
                lam
            }
        }
    };
    eig.retain(|z| window.contains(*z));
    eig.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let threshold = c::<T>(10.0) * h * h;
    let near_zero = eig.iter().filter(|z| z.norm() < threshold).count();
    let inside = eig.iter().filter(|z| z.norm() < threshold).map(|z| z.norm()).fold(T::zero(), T::max);
    let outside = eig.iter().filter(|z| z.norm() >= threshold).map(|z| z.norm()).fold(T::max_value(), T::min);
    let cluster_gap = if inside > T::zero() { outside / inside } else { T::infinity() };
    Ok(SpectrumReport { eigenvalues: eig, near_zero, threshold, cluster_gap })
}

/// Recovers the `L₋`, `L₊` blocks from the interleaved `L`.
fn linearized_blocks<T: Real>(op: &OperatorMatrix<T>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let l = linearized_matrix(op);
    let n = l.n() / 2;
    let mut lm = DMatrix::<f64>::zeros(n, n);
    let mut lp = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i.saturating_sub(1)..(i + 2).min(n) {
            lm[(i, j)] = l.get(2 * i, 2 * j + 1).to_f64().unwrap_or(f64::NAN);
            lp[(i, j)] = -l.get(2 * i + 1, 2 * j).to_f64().unwrap_or(f64::NAN);
        }
    }
    Ok((lm, lp))
}

/// Interleaved `L` from either `L` or `𝓗` (`L = iU𝓗U*` is not formed; `𝓗`
/// inputs are converted back through its blocks).
fn linearized_matrix<T: Real>(op: &OperatorMatrix<T>) -> BandedMatrix<T> {
    match op.kind {
        OperatorKind::Conjugated => {
            // 𝓗 = [[A + V₁, V₂], [−V₂, −A − V₁]] with A = H + ω;
            // L₋ = A + V₁ − V₂ and L₊ = A + V₁ + V₂.
            let m = &op.matrix;
            let n = m.n() / 2;
            let mut l = BandedMatrix::zeros(2 * n, 3, 3);
            for i in 0..n {
                for j in i.saturating_sub(1)..(i + 2).min(n) {
                    let a = m.get(2 * i, 2 * j);
                    let v2 = if i == j { m.get(2 * i, 2 * i + 1) } else { T::zero() };
                    l.set(2 * i, 2 * j + 1, a - v2);
                    l.set(2 * i + 1, 2 * j, -(a + v2));
                }
            }
            l
        }
        _ => op.matrix.clone(),
    }
}

fn linearized_dense<T: Real>((lm, lp): &(DMatrix<f64>, DMatrix<f64>)) -> Result<Vec<Complex<T>>> {
    let prod = -(lm * lp);
    let n = prod.nrows();
    let schur = Schur::try_new(prod, f64::EPSILON, 100 * n.max(10))
        .ok_or_else(|| Error::Numerical(format!("Schur iteration failed to converge for a {n}x{n} matrix")))?;
    let mu = schur.complex_eigenvalues();
    let mut out = Vec::with_capacity(2 * n);
    for m in mu.iter() {
        // Eigenvalues of −L₋L₊ are real in exact arithmetic.
        let r = Complex::new(m.re, 0.0).sqrt();
        let r = Complex::new(c::<T>(r.re), c::<T>(r.im));
        out.push(r);
        out.push(-r);
    }
    Ok(out)
}

/// Eigenvalues of a real banded matrix closest to `shift` by Arnoldi
/// iteration on `(A − shift)⁻¹`.
pub fn shift_invert_arnoldi<T: Real>(a: &BandedMatrix<T>, shift: Complex<T>, k: usize) -> Result<Vec<Complex<T>>> {
    let n = a.n();
    let m = (2 * k + 20).min(n);
    let mut shifted = a.map(|v| Complex::new(v.to_f64().unwrap_or(f64::NAN), 0.0));
    let s = Complex::new(shift.re.to_f64().unwrap_or(0.0), shift.im.to_f64().unwrap_or(0.0));
    shifted.shift_diagonal(-s);
    let lu = shifted.factor()?;
    let mut start: Vec<Complex<f64>> = (0..n).map(|i| Complex::new(1.0 + ((i * 31) % 17) as f64 * 0.01, 0.0)).collect();
    let mut theta: Vec<Complex<f64>> = Vec::new();
    for _cycle in 0..6 {
        let nrm = start.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut basis: Vec<Vec<Complex<f64>>> = vec![start.iter().map(|z| z / nrm).collect()];
        let mut hess = nalgebra::DMatrix::<Complex<f64>>::zeros(m, m);
        let mut dim = m;
        for j in 0..m {
            let mut w = lu.solve(&basis[j]);
            for _pass in 0..2 {
                for (i, b) in basis.iter().enumerate() {
                    let hij: Complex<f64> = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                    hess[(i, j)] += hij;
                    for (wv, bv) in w.iter_mut().zip(b) {
                        *wv -= hij * bv;
                    }
                }
            }
            let beta = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if j + 1 < m {
                if beta < 1e-14 {
                    dim = j + 1;
                    break;
                }
                hess[(j + 1, j)] = Complex::new(beta, 0.0);
                basis.push(w.iter().map(|z| z / beta).collect());
            }
        }
        let hsub = hess.view((0, 0), (dim, dim)).into_owned();
        let schur = Schur::try_new(hsub.clone(), 1e-14, 1000 * dim)
            .ok_or_else(|| Error::Numerical("Schur iteration failed on the Arnoldi matrix".into()))?;
        let ev = schur.eigenvalues().ok_or_else(|| Error::Numerical("Arnoldi Ritz values unavailable".into()))?;
        let mut ritz: Vec<Complex<f64>> = ev.iter().copied().collect();
        ritz.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
        let converged = theta.len() == ritz.len().min(k)
            && theta.iter().zip(&ritz).all(|(a, b)| (a - b).norm() <= 1e-10 * b.norm().max(1e-300));
        theta = ritz.into_iter().take(k).collect();
        if converged {
            break;
        }
        // Restart with the sum of the basis weighted by the last column.
        let mut next = vec![Complex::new(0.0, 0.0); n];
        for (j, b) in basis.iter().enumerate().take(dim) {
            let wgt = hess[(j, dim - 1)].norm() + 1.0 / (1.0 + j as f64);
            for (x, y) in next.iter_mut().zip(b) {
                *x += y * wgt;
            }
        }
        start = next;
    }
    Ok(theta
        .into_iter()
        .filter(|t| t.norm() > 0.0)
        .map(|t| {
            let l = s + Complex::new(1.0, 0.0) / t;
            Complex::new(c::<T>(l.re), c::<T>(l.im))
        })
        .collect())
}
