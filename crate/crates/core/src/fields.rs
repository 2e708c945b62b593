//! Grid functions: complex scalars and real two-component pairs.

use crate::grid::Grid;
use crate::scalar::{c, Real};
use num_complex::Complex;

/// Complex values on a grid, e.g. `u`, `v`, `φ₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField<T> {
    pub grid: Grid<T>,
    pub values: Vec<Complex<T>>,
}

/// Real pair `(f₁, f₂)` identified with `f₁ + i f₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoComponentField<T> {
    pub grid: Grid<T>,
    pub comp1: Vec<T>,
    pub comp2: Vec<T>,
}

impl<T: Real> ComplexField<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        Self { grid, values: vec![Complex::new(T::zero(), T::zero()); grid.len()] }
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn(T) -> Complex<T>) -> Self {
        Self { grid, values: (0..grid.len()).map(|i| f(grid.x(i))).collect() }
    }

    pub fn from_real(grid: Grid<T>, re: &[T]) -> Self {
        Self { grid, values: re.iter().map(|&r| Complex::new(r, T::zero())).collect() }
    }

    pub fn to_two_component(&self) -> TwoComponentField<T> {
        TwoComponentField {
            grid: self.grid,
            comp1: self.values.iter().map(|z| z.re).collect(),
            comp2: self.values.iter().map(|z| z.im).collect(),
        }
    }

    /// `∫ f ḡ dx` on the grid (rectangle rule; the ends carry Dirichlet zeros).
    pub fn inner(&self, other: &Self) -> Complex<T> {
        inner(&self.values, &other.values, self.grid.h)
    }

    pub fn l2(&self) -> T {
        l2(&self.values, self.grid.h)
    }

    pub fn linf(&self) -> T {
        linf(&self.values)
    }

    pub fn mass(&self) -> T {
        let n = self.l2();
        n * n
    }
}

impl<T: Real> TwoComponentField<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        Self { grid, comp1: vec![T::zero(); grid.len()], comp2: vec![T::zero(); grid.len()] }
    }

    pub fn new(grid: Grid<T>, comp1: Vec<T>, comp2: Vec<T>) -> Self {
        assert_eq!(comp1.len(), grid.len());
        assert_eq!(comp2.len(), grid.len());
        Self { grid, comp1, comp2 }
    }

    pub fn to_complex(&self) -> ComplexField<T> {
        ComplexField {
            grid: self.grid,
            values: self.comp1.iter().zip(&self.comp2).map(|(&a, &b)| Complex::new(a, b)).collect(),
        }
    }

    /// Real inner product `Re ∫ f̄ g`.
    pub fn dot(&self, other: &Self) -> T {
        let s: T = self
            .comp1
            .iter()
            .zip(&other.comp1)
            .chain(self.comp2.iter().zip(&other.comp2))
            .map(|(&a, &b)| a * b)
            .sum();
        s * self.grid.h
    }

    pub fn l2(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn axpy(&mut self, a: T, x: &Self) {
        for (y, &v) in self.comp1.iter_mut().zip(&x.comp1) {
            *y += a * v;
        }
        for (y, &v) in self.comp2.iter_mut().zip(&x.comp2) {
            *y += a * v;
        }
    }

    /// Interleaved layout `[f₁(x₀), f₂(x₀), f₁(x₁), …]` used by the block operators.
    pub fn interleaved(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(2 * self.comp1.len());
        for (&a, &b) in self.comp1.iter().zip(&self.comp2) {
            out.push(a);
            out.push(b);
        }
        out
    }

    pub fn from_interleaved(grid: Grid<T>, z: &[T]) -> Self {
        assert_eq!(z.len(), 2 * grid.len());
        Self {
            grid,
            comp1: z.iter().step_by(2).copied().collect(),
            comp2: z.iter().skip(1).step_by(2).copied().collect(),
        }
    }
}

/// `∫ f ḡ dx` with the rectangle rule.
pub fn inner<T: Real>(f: &[Complex<T>], g: &[Complex<T>], h: T) -> Complex<T> {
    let mut s = Complex::new(T::zero(), T::zero());
    for (a, b) in f.iter().zip(g) {
        s += a * b.conj();
    }
    s * h
}

/// `∫ f g dx` for a complex `f` and a real `g`.
pub fn inner_real<T: Real>(f: &[Complex<T>], g: &[T], h: T) -> Complex<T> {
    let mut s = Complex::new(T::zero(), T::zero());
    for (a, &b) in f.iter().zip(g) {
        s += a * b;
    }
    s * h
}

pub fn l2<T: Real>(f: &[Complex<T>], h: T) -> T {
    let s: T = f.iter().map(|z| z.norm_sqr()).sum();
    (s * h).sqrt()
}

pub fn linf<T: Real>(f: &[Complex<T>]) -> T {
    f.iter().map(|z| z.norm()).fold(T::zero(), T::max)
}

/// `‖f‖_{L^r}` with the rectangle rule.
pub fn lr<T: Real>(f: &[Complex<T>], h: T, r: T) -> T {
    let m = linf(f);
    if m == T::zero() {
        return T::zero();
    }
    let s: T = f.iter().map(|z| (z.norm() / m).powf(r)).sum();
    m * (s * h).powf(T::one() / r)
}

/// `‖⟨x⟩^{−α} f‖_{L²}`.
pub fn weighted_l2<T: Real>(f: &[Complex<T>], grid: &Grid<T>, alpha: T) -> T {
    let s: T = f
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let x = grid.x(i);
            z.norm_sqr() * (T::one() + x * x).powf(-alpha)
        })
        .sum();
    (s * grid.h).sqrt()
}

/// `sup |⟨x⟩^{−α} f|`.
pub fn weighted_linf<T: Real>(f: &[Complex<T>], grid: &Grid<T>, alpha: T) -> T {
    f.iter()
        .enumerate()
        .map(|(i, z)| {
            let x = grid.x(i);
            z.norm() * (T::one() + x * x).powf(-alpha / c(2.0))
        })
        .fold(T::zero(), T::max)
}

/// Forward-difference derivative `‖∂ₓ f‖_{L²}`.
pub fn dx_l2<T: Real>(f: &[Complex<T>], h: T) -> T {
    let s: T = f.windows(2).map(|w| ((w[1] - w[0]) / h).norm_sqr()).sum();
    (s * h).sqrt()
}

/// `‖f‖_{H¹} = (‖f‖² + ‖∂ₓf‖²)^{1/2}`.
pub fn h1<T: Real>(f: &[Complex<T>], h: T) -> T {
    let a = l2(f, h);
    let b = dx_l2(f, h);
    (a * a + b * b).sqrt()
}

/// `‖x f‖_{L²}`.
pub fn x_moment<T: Real>(f: &[Complex<T>], grid: &Grid<T>) -> T {
    let s: T = f
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let x = grid.x(i);
            x * x * z.norm_sqr()
        })
        .sum();
    (s * grid.h).sqrt()
}
