//! Closed-form solitary waves `Q_ω`, their ω-derivatives, masses and the
//! critical frequency `Ω`.
//!
//! The profile is `Q = A·G(s)^{−2/p}` with `A = [(p+2)ω/2]^{1/p}`,
//! `s = p√(ω/2)|x| + artanh(r)`, where `G = cosh`, `r = |q|/√(2ω)` in the
//! focusing case and `G = sinh`, `r = √(2ω)/|q|` in the defocusing case.

use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, bisect};
use crate::scalar::{c, Real};

/// Sign of the nonlinearity `f(u) = σ|u|^p u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `σ = +1`, `0 < ω < ½q²`.
    Defocusing,
    /// `σ = −1`, `ω > ½q²`.
    Focusing,
}

impl Regime {
    pub fn from_sigma(sigma: f64) -> Result<Self> {
        if sigma == 1.0 {
            Ok(Regime::Defocusing)
        } else if sigma == -1.0 {
            Ok(Regime::Focusing)
        } else {
            Err(Error::Parameter(format!("sigma must be +1 or -1, got {sigma}")))
        }
    }

    pub fn sigma<T: Real>(self) -> T {
        match self {
            Regime::Defocusing => T::one(),
            Regime::Focusing => -T::one(),
        }
    }
}

/// The quadruple `(q, σ, p, ω)` of a solitary wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonParams<T> {
    pub q: T,
    pub regime: Regime,
    pub p: T,
    pub omega: T,
}

impl<T: Real> SolitonParams<T> {
    pub fn new(q: T, regime: Regime, p: T, omega: T) -> Result<Self> {
        check_qp(q, p)?;
        let edge = q * q / c(2.0);
        let ok = match regime {
            Regime::Defocusing => omega > T::zero() && omega < edge,
            Regime::Focusing => omega > edge && omega.is_finite(),
        };
        if !ok {
            let range = match regime {
                Regime::Defocusing => format!("(0, {edge})"),
                Regime::Focusing => format!("({edge}, inf)"),
            };
            return Err(Error::Parameter(format!(
                "omega = {omega} outside the {regime:?} interval {range} for q = {q}"
            )));
        }
        Ok(Self { q, regime, p, omega })
    }

    pub fn focusing(q: T, p: T, omega: T) -> Result<Self> {
        Self::new(q, Regime::Focusing, p, omega)
    }

    pub fn defocusing(q: T, p: T, omega: T) -> Result<Self> {
        Self::new(q, Regime::Defocusing, p, omega)
    }

    pub fn with_omega(&self, omega: T) -> Result<Self> {
        Self::new(self.q, self.regime, self.p, omega)
    }

    #[inline]
    pub fn sigma(&self) -> T {
        self.regime.sigma()
    }

    /// Spatial decay rate `p√(ω/2)` of `s`.
    #[inline]
    pub fn kappa(&self) -> T {
        self.p * (self.omega / c(2.0)).sqrt()
    }

    /// Radius beyond which `Q_ω(x) < rel·Q_ω(0)`.
    pub fn truncation_radius(&self, rel: T) -> T {
        (self.p / c(2.0) * (T::one() / rel).ln() + T::LN_2()) / self.kappa()
    }
}

fn check_qp<T: Real>(q: T, p: T) -> Result<()> {
    if !(q < T::zero()) || !q.is_finite() {
        return Err(Error::Parameter(format!("q must be negative (attractive delta), got {q}")));
    }
    if !(p > T::zero()) || !p.is_finite() {
        return Err(Error::Parameter(format!("p must be positive, got {p}")));
    }
    Ok(())
}

/// Profile, one-sided x-derivatives and ω-derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint<T> {
    pub q: T,
    /// `∂ₓQ` (right derivative at `x = 0`).
    pub dx: T,
    /// `∂ₓ²Q` (right limit at `x = 0`).
    pub dxx: T,
    pub domega: T,
    pub domega2: T,
}

/// `ln cosh s` and `ln sinh s` without overflow.
fn ln_g<T: Real>(regime: Regime, s: T) -> T {
    let e = (c::<T>(-2.0) * s).exp();
    match regime {
        Regime::Focusing => s + e.ln_1p() - T::LN_2(),
        Regime::Defocusing => s + (-e).ln_1p() - T::LN_2(),
    }
}

/// Full evaluation: the single place where the closed form lives.
pub fn evaluate<T: Real>(params: &SolitonParams<T>, x: T) -> ProfilePoint<T> {
    let SolitonParams { q, regime, p, omega: w } = *params;
    let aq = q.abs();
    let two = c::<T>(2.0);
    let two_w = two * w;
    let (r, r1, r2) = match regime {
        Regime::Focusing => (
            aq / two_w.sqrt(),
            -aq * two_w.powf(c(-1.5)),
            c::<T>(3.0) * aq * two_w.powf(c(-2.5)),
        ),
        Regime::Defocusing => (
            two_w.sqrt() / aq,
            two_w.powf(c(-0.5)) / aq,
            -two_w.powf(c(-1.5)) / aq,
        ),
    };
    let one_m = T::one() - r * r;
    let s0 = r.atanh();
    let s0_1 = r1 / one_m;
    let s0_2 = r2 / one_m + two * r * r1 * r1 / (one_m * one_m);
    let half_w = w / two;
    let kappa = p * half_w.sqrt();
    let kappa_1 = p / (c::<T>(4.0) * half_w.sqrt());
    let kappa_2 = -p / (c::<T>(16.0) * half_w.powf(c(1.5)));
    let ax = x.abs();
    let s = kappa * ax + s0;
    let s_w = kappa_1 * ax + s0_1;
    let s_ww = kappa_2 * ax + s0_2;
    let t = match regime {
        Regime::Focusing => s.tanh(),
        Regime::Defocusing => T::one() / s.tanh(),
    };
    let ln_q = ((p + two) * w / two).ln() / p - two / p * ln_g(regime, s);
    let qv = ln_q.exp();
    let l1 = T::one() / (p * w) - two / p * t * s_w;
    let l2 = -T::one() / (p * w * w) - two / p * ((T::one() - t * t) * s_w * s_w + t * s_ww);
    let sgn = if x < T::zero() { -T::one() } else { T::one() };
    let dx = -two * half_w.sqrt() * t * sgn * qv;
    let k2 = kappa * kappa;
    let a = two / p;
    let dxx = qv * (a * a * t * t * k2 - a * (T::one() - t * t) * k2);
    ProfilePoint { q: qv, dx, dxx, domega: qv * l1, domega2: qv * (l1 * l1 + l2) }
}

/// `Q_ω(x)`.
pub fn soliton_profile<T: Real>(params: &SolitonParams<T>, x: T) -> T {
    evaluate(params, x).q
}

/// `∂_ω Q_ω(x)` from the differentiated closed form.
pub fn soliton_domega<T: Real>(params: &SolitonParams<T>, x: T) -> T {
    evaluate(params, x).domega
}

/// `∂²_ω Q_ω(x)`.
pub fn soliton_domega2<T: Real>(params: &SolitonParams<T>, x: T) -> T {
    evaluate(params, x).domega2
}

/// One-sided `∂ₓQ_ω` at `x`; at `x = 0` the right derivative.
pub fn soliton_dx<T: Real>(params: &SolitonParams<T>, x: T) -> T {
    evaluate(params, x).dx
}

/// Left derivative `∂ₓQ_ω(0−)`.
pub fn soliton_dx_left_at_origin<T: Real>(params: &SolitonParams<T>) -> T {
    -evaluate(params, T::zero()).dx
}

fn half_line_integral<T: Real>(params: &SolitonParams<T>, f: impl Fn(T) -> T) -> T {
    let x_max = params.truncation_radius(c(1e-12));
    let scale = soliton_profile(params, T::zero()).powi(2) / params.kappa();
    let tol = (scale * c(1e-13)).max(T::min_positive_value());
    adaptive_simpson(f, T::zero(), x_max, tol)
}

/// `M = ∫ Q_ω² dx`, computed as `2∫₀^∞`.
pub fn soliton_mass<T: Real>(params: &SolitonParams<T>) -> T {
    c::<T>(2.0) * half_line_integral(params, |x| soliton_profile(params, x).powi(2))
}

/// `⟨Q_ω, ∂_ωQ_ω⟩ = ½ dM/dω`.
pub fn q_dq_inner<T: Real>(params: &SolitonParams<T>) -> T {
    c::<T>(2.0)
        * half_line_integral(params, |x| {
            let e = evaluate(params, x);
            e.q * e.domega
        })
}

/// `dM/dω = 2⟨Q_ω, ∂_ωQ_ω⟩`.
pub fn mass_derivative<T: Real>(params: &SolitonParams<T>) -> T {
    c::<T>(2.0) * q_dq_inner(params)
}

/// The focusing frequency `Ω` at which `⟨Q_ω, ∂_ωQ_ω⟩` changes sign.
pub fn critical_frequency<T: Real>(q: T, p: T) -> Result<T> {
    check_qp(q, p)?;
    if !(p > c(4.0)) {
        return Err(Error::Parameter(format!("critical frequency requires p > 4, got {p}")));
    }
    let edge = q * q / c(2.0);
    let g = |w: T| -> T {
        match SolitonParams::focusing(q, p, w) {
            Ok(sp) => q_dq_inner(&sp),
            Err(_) => T::nan(),
        }
    };
    let lo = edge * c(1.0 + 1e-3);
    if !(g(lo) > T::zero()) {
        return Err(Error::Search(format!("<Q, dQ> not positive at the lower end omega = {lo}")));
    }
    let mut a = lo;
    let mut b = edge * c(1.5);
    let mut tries = 0;
    while !(g(b) < T::zero()) {
        a = b;
        b = b * c(2.0);
        tries += 1;
        if tries > 60 {
            return Err(Error::Search(format!("no sign change of <Q, dQ> in [{lo}, {b}]")));
        }
    }
    let tol = c::<T>(1e-10).max(b * T::epsilon() * c(8.0));
    bisect(g, a, b, tol)
}

/// `(p−4)/p ∫_{artanh(|q|/√(2ω))}^∞ sech^{4/p} − (|q|/√(2ω))(1 − q²/(2ω))^{2/p−1}`;
/// vanishes exactly at `Ω`.
pub fn omega_identity_residual<T: Real>(q: T, p: T, omega: T) -> T {
    let r = q.abs() / (c::<T>(2.0) * omega).sqrt();
    let a = r.atanh();
    let e = c::<T>(4.0) / p;
    let upper = a + T::LN_2() + c::<T>(40.0) / e;
    let tol = c::<T>(1e-14).max(T::epsilon() * c(64.0));
    let integral = adaptive_simpson(|s: T| (T::one() / s.cosh()).powf(e), a, upper, tol);
    (p - c(4.0)) / p * integral - r * (T::one() - r * r).powf(c::<T>(2.0) / p - T::one())
}

/// `Q₀(x) = [(p+2)q²/(p|q||x|+2)²]^{1/p}`.
pub fn zero_frequency_profile<T: Real>(q: T, p: T, x: T) -> T {
    let two = c::<T>(2.0);
    ((p + two) * q * q / (p * q.abs() * x.abs() + two).powi(2)).powf(T::one() / p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regime_is_validated() {
        assert!(SolitonParams::focusing(-1.0, 5.0, 0.4).is_err());
        assert!(SolitonParams::defocusing(-1.0, 5.0, 0.6).is_err());
        assert!(SolitonParams::focusing(0.5, 5.0, 1.0).is_err());
        assert!(SolitonParams::focusing(-1.0, 5.0, 1.0).is_ok());
    }

    #[test]
    fn jump_condition_from_one_sided_derivatives() {
        for sp in [
            SolitonParams::focusing(-1.0, 5.0, 1.3).unwrap(),
            SolitonParams::defocusing(-1.0, 5.0, 0.2).unwrap(),
            SolitonParams::focusing(-2.0, 4.4, 7.0).unwrap(),
        ] {
            let q0: f64 = soliton_profile(&sp, 0.0);
            let jump = soliton_dx(&sp, 0.0) - soliton_dx_left_at_origin(&sp);
            assert!((jump - 2.0 * sp.q * q0).abs() < 1e-10 * q0.max(1.0));
        }
    }
}
