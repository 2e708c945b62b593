//! Uniform symmetric mesh with a node at the origin.

use crate::error::{Error, Result};
use crate::scalar::{cu, Real};

/// Nodes `x_j = j·h` for `j = −n_half … n_half`, stored left to right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    pub h: T,
    pub n_half: usize,
}

impl<T: Real> Grid<T> {
    pub fn new(h: T, n_half: usize) -> Result<Self> {
        if !(h > T::zero()) || !h.is_finite() {
            return Err(Error::Parameter(format!("grid spacing must be positive, got {h}")));
        }
        if n_half == 0 {
            return Err(Error::Parameter("grid needs at least one node per half-line".into()));
        }
        Ok(Self { h, n_half })
    }

    /// Grid covering `[−half_width, half_width]` with spacing close to `h`.
    pub fn with_half_width(h: T, half_width: T) -> Result<Self> {
        if !(half_width > T::zero()) {
            return Err(Error::Parameter(format!("half-width must be positive, got {half_width}")));
        }
        let n = (half_width / h).round().to_usize().unwrap_or(0);
        Self::new(h, n)
    }

    #[inline]
    pub fn len(&self) -> usize {
        2 * self.n_half + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Storage index of the node at `x = 0`.
    #[inline]
    pub fn origin(&self) -> usize {
        self.n_half
    }

    #[inline]
    pub fn x(&self, idx: usize) -> T {
        (cu::<T>(idx) - cu::<T>(self.n_half)) * self.h
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    pub fn half_width(&self) -> T {
        cu::<T>(self.n_half) * self.h
    }
}
