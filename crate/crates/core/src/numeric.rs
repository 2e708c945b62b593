//! Quadrature, root bracketing and least-squares helpers.

use crate::error::{Error, Result};
use crate::scalar::{c, cu, Real};
use num_complex::Complex;

/// Adaptive composite Simpson rule on `[a, b]` with absolute tolerance `tol`.
pub fn adaptive_simpson<T: Real>(f: impl Fn(T) -> T, a: T, b: T, tol: T) -> T {
    fn simpson<T: Real>(fa: T, fm: T, fb: T, a: T, b: T) -> T {
        (b - a) / c(6.0) * (fa + c::<T>(4.0) * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec<T: Real>(
        f: &impl Fn(T) -> T,
        a: T,
        b: T,
        fa: T,
        fm: T,
        fb: T,
        whole: T,
        tol: T,
        depth: usize,
    ) -> T {
        let m = (a + b) / c(2.0);
        let lm = (a + m) / c(2.0);
        let rm = (m + b) / c(2.0);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        let floor = T::epsilon() * c::<T>(16.0) * (left.abs() + right.abs());
        if depth == 0 || delta.abs() <= c::<T>(15.0) * tol || delta.abs() <= floor {
            left + right + delta / c(15.0)
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / c(2.0), depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / c(2.0), depth - 1)
        }
    }
    // Split into panels first so narrow features are not missed.
    let panels = 64usize;
    let w = (b - a) / cu(panels);
    let mut total = T::zero();
    for k in 0..panels {
        let lo = a + w * cu(k);
        let hi = lo + w;
        let (fa, fb) = (f(lo), f(hi));
        let fm = f((lo + hi) / c(2.0));
        let whole = simpson(fa, fm, fb, lo, hi);
        total += rec(&f, lo, hi, fa, fm, fb, whole, tol / cu(panels), 30);
    }
    total
}

/// Bisection for a sign change of `f` in `[lo, hi]` down to width `tol`.
pub fn bisect<T: Real>(f: impl Fn(T) -> T, mut lo: T, mut hi: T, tol: T) -> Result<T> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Search(format!(
            "no sign change in bracket [{lo}, {hi}] (f = {flo:e}, {fhi:e})"
        )));
    }
    for _ in 0..200 {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mid = (lo + hi) / c(2.0);
        let fm = f(mid);
        if fm == T::zero() {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / c(2.0))
}

/// Straight-line least-squares fit `y ≈ a + b·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit<T> {
    pub intercept: T,
    pub slope: T,
    /// Half-width of an approximate 95% confidence interval for the slope.
    pub slope_halfwidth: T,
    pub samples: usize,
}

pub fn fit_line<T: Real>(xs: &[T], ys: &[T]) -> Result<LineFit<T>> {
    let n = xs.len();
    if n < 3 || ys.len() != n {
        return Err(Error::Fit(format!("need at least 3 paired samples, got {n}")));
    }
    let nn = cu::<T>(n);
    let mx = xs.iter().copied().sum::<T>() / nn;
    let my = ys.iter().copied().sum::<T>() / nn;
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    if !(sxx > T::zero()) {
        return Err(Error::Fit("degenerate abscissae".into()));
    }
    let sxy: T = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: T = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let se = (rss / cu::<T>(n - 2) / sxx).sqrt();
    Ok(LineFit { intercept, slope, slope_halfwidth: c::<T>(1.96) * se, samples: n })
}


/// Zeroes subnormal entries. Implicit solves spread values far below the
/// rounding level across the whole box, and subnormal arithmetic is slow.
pub fn flush_subnormals<T: Real>(v: &mut [T]) {
    let tiny = T::min_positive_value();
    for x in v.iter_mut().filter(|x| x.abs() < tiny) {
        *x = T::zero();
    }
}

/// [`flush_subnormals`] applied to real and imaginary parts.
pub fn flush_subnormals_complex<T: Real>(v: &mut [Complex<T>]) {
    let tiny = T::min_positive_value();
    for z in v.iter_mut() {
        if z.re.abs() < tiny {
            z.re = T::zero();
        }
        if z.im.abs() < tiny {
            z.im = T::zero();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_exponential() {
        let v = adaptive_simpson(|x: f64| (-x).exp(), 0.0, 30.0, 1e-12);
        assert!((v - (1.0 - (-30.0f64).exp())).abs() < 1e-11);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x: f64| x * x + 1.0, 0.0, 2.0, 1e-10).is_err());
    }

    #[test]
    fn line_fit_recovers_slope() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.5 - 0.5 * x).collect();
        let f = fit_line(&xs, &ys).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!((f.intercept - 1.5).abs() < 1e-12);
    }
    #[test]
    fn flush_touches_only_subnormals() {
        let tiny = f64::MIN_POSITIVE;
        let mut v = vec![tiny, tiny / 4.0, -tiny / 4.0, 1.0, 0.0];
        flush_subnormals(&mut v);
        assert_eq!(v, vec![tiny, 0.0, 0.0, 1.0, 0.0]);
        let mut z = vec![Complex::new(tiny / 2.0, 1.0), Complex::new(-2.0, -tiny / 8.0)];
        flush_subnormals_complex(&mut z);
        assert_eq!(z, vec![Complex::new(0.0, 1.0), Complex::new(-2.0, 0.0)]);
    }
}
