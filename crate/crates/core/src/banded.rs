//! Banded matrices and LU factorization with partial pivoting.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use num_traits::{Float, Zero};

/// Square matrix with `kl` sub- and `ku` super-diagonals.
///
/// Row `i` stores columns `i − kl ..= i + ku + kl`; the extra `kl` columns
/// absorb fill-in from row interchanges during factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix<S> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<S>,
}

impl<S: Scalar> BandedMatrix<S> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![S::zero(); n * width] }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.n || j >= self.n || j + self.kl < i || j > i + self.ku + self.kl {
            None
        } else {
            Some(i * self.width + (j + self.kl - i))
        }
    }

    #[inline]
    fn in_pattern(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        match self.slot(i, j) {
            Some(k) => self.data[k],
            None => S::zero(),
        }
    }

    /// Sets entry `(i, j)`; panics outside the declared band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        assert!(self.in_pattern(i, j), "entry ({i}, {j}) outside band ({}, {})", self.kl, self.ku);
        let k = self.slot(i, j).expect("in band");
        self.data[k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: S) {
        assert!(self.in_pattern(i, j), "entry ({i}, {j}) outside band ({}, {})", self.kl, self.ku);
        let k = self.slot(i, j).expect("in band");
        self.data[k] += v;
    }

    /// Column range of row `i` inside the declared band.
    #[inline]
    fn cols(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.kl)..(i + self.ku + 1).min(self.n)
    }

    pub fn matvec(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let cols = self.cols(i);
                let row = &self.data[i * self.width..(i + 1) * self.width];
                let off = cols.start + self.kl - i;
                row[off..off + cols.len()].iter().zip(&x[cols]).fold(S::zero(), |s, (&a, &b)| s + a * b)
            })
            .collect()
    }

    /// `self + a·other`, both with identical shape.
    pub fn add_scaled(&self, a: S, other: &Self) -> Self {
        assert_eq!((self.n, self.kl, self.ku), (other.n, other.kl, other.ku));
        let mut out = self.clone();
        for (y, &x) in out.data.iter_mut().zip(&other.data) {
            *y += a * x;
        }
        out
    }

    /// Adds `a` to every diagonal entry.
    pub fn shift_diagonal(&mut self, a: S) {
        for i in 0..self.n {
            self.add(i, i, a);
        }
    }

    pub fn scale(&mut self, a: S) {
        for v in &mut self.data {
            *v *= a;
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<S>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn map<R: Scalar>(&self, f: impl Fn(S) -> R) -> BandedMatrix<R> {
        BandedMatrix {
            n: self.n,
            kl: self.kl,
            ku: self.ku,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// LU factorization with partial pivoting restricted to the band.
    pub fn factor(&self) -> Result<BandedLu<S>> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut a = self.clone();
        let mut lower = vec![S::zero(); n * kl.max(1)];
        let mut piv = vec![0usize; n];
        let mut scale = S::Re::zero();
        for v in &self.data {
            scale = scale.max(v.modulus());
        }
        let tiny = scale * S::Re::epsilon() * S::Re::epsilon();
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = a.get(k, k).modulus();
            for r in k + 1..=last {
                let m = a.get(r, k).modulus();
                if m > best {
                    best = m;
                    p = r;
                }
            }
            if !(best > tiny) {
                return Err(Error::Numerical(format!(
                    "banded LU: zero pivot in column {k} (matrix singular to working precision)"
                )));
            }
            piv[k] = p;
            let hi = (k + ku + kl + 1).min(n);
            if p != k {
                for j in k..hi {
                    let (sk, sp) = (a.slot(k, j), a.slot(p, j));
                    match (sk, sp) {
                        (Some(ik), Some(ip)) => a.data.swap(ik, ip),
                        (Some(ik), None) => a.data[ik] = S::zero(),
                        (None, Some(ip)) => a.data[ip] = S::zero(),
                        (None, None) => {}
                    }
                }
            }
            let pivot = a.get(k, k);
            for r in k + 1..=last {
                let ir = a.slot(r, k).expect("sub-diagonal in storage");
                let m = a.data[ir] / pivot;
                a.data[ir] = S::zero();
                lower[k * kl.max(1) + (r - k - 1)] = m;
                if m.modulus() == S::Re::zero() {
                    continue;
                }
                for j in k + 1..hi {
                    let kj = a.slot(k, j).expect("pivot row in storage");
                    let rj = a.slot(r, j).expect("fill-in in storage");
                    let v = a.data[kj];
                    a.data[rj] -= m * v;
                }
            }
        }
        Ok(BandedLu { u: a, lower, piv })
    }
}

/// Factors `P·A = L·U` of a banded matrix.
#[derive(Debug, Clone)]
pub struct BandedLu<S> {
    u: BandedMatrix<S>,
    lower: Vec<S>,
    piv: Vec<usize>,
}

impl<S: Scalar> BandedLu<S> {
    pub fn n(&self) -> usize {
        self.u.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [S]) {
        let (n, kl, ku) = (self.u.n, self.u.kl, self.u.ku);
        assert_eq!(b.len(), n);
        let lw = kl.max(1);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            let last = (k + kl).min(n - 1);
            for (y, &m) in b[k + 1..=last].iter_mut().zip(&self.lower[k * lw..]) {
                *y -= m * bk;
            }
        }
        let w = self.u.width;
        for k in (0..n).rev() {
            let hi = (k + ku + kl + 1).min(n);
            // Row k of U starts at column k, offset kl in storage.
            let row = &self.u.data[k * w + kl..k * w + kl + (hi - k)];
            let s = row[1..].iter().zip(&b[k + 1..hi]).fold(b[k], |s, (&a, &x)| s - a * x);
            b[k] = s / row[0];
        }
    }

    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Natural log of the absolute determinant.
    pub fn log_abs_det(&self) -> S::Re {
        let mut s = S::Re::zero();
        for k in 0..self.u.n {
            s = s + self.u.get(k, k).modulus().ln();
        }
        s
    }
}
