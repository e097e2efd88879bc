//! Scalar abstraction shared by every numerical module.

use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::{Debug, Display};

/// Floating-point type usable by the geometry kernels (`f32` or `f64`).
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` literal, panicking only if the type cannot hold it at all.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    /// Lossy view as `f64` for reports and error payloads.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `arccosh` in log form with a cancellation-free branch near 1.
pub fn acosh<T: Real>(x: T) -> T {
    let t = x - T::one();
    if t < T::lit(0.5) {
        // acosh(1 + t) = log1p(t + sqrt(t (2 + t)))
        let t = t.max(T::zero());
        (t + (t * (T::lit(2.0) + t)).sqrt()).ln_1p()
    } else {
        (x + (x * x - T::one()).sqrt()).ln()
    }
}

/// `arcsinh` that keeps relative accuracy for tiny and huge arguments.
pub fn asinh<T: Real>(x: T) -> T {
    let a = x.abs();
    let r = if a > T::lit(1e150) {
        a.ln() + T::LN_2()
    } else {
        let a2 = a * a;
        (a + a2 / (T::one() + (T::one() + a2).sqrt())).ln_1p()
    };
    r.copysign(x)
}

/// `arctanh` via `log1p`; infinite at ±1.
pub fn atanh<T: Real>(x: T) -> T {
    let two = T::lit(2.0);
    (two * x / (T::one() - x)).ln_1p() / two
}

/// Hyperbolic cotangent.
#[inline]
pub fn coth<T: Real>(x: T) -> T {
    T::one() / x.tanh()
}

/// Relative discrepancy `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_err<T: Real>(a: T, b: T, floor: T) -> T {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_hyperbolics_round_trip() {
        for &x in &[1e-8, 1e-3, 0.3, 1.0, 4.0, 30.0] {
            let x: f64 = x;
            if x >= 0.3 {
                assert!((acosh(x.cosh()) - x).abs() <= 1e-12 * x);
            }
            assert!((asinh(x.sinh()) - x).abs() <= 1e-14 * x.max(1.0));
            if x < 10.0 {
                assert!((atanh(x.tanh()) - x).abs() <= 1e-12 * x.max(1.0));
            }
        }
    }

    #[test]
    fn acosh_near_one_keeps_digits() {
        // acosh(1 + t) ~ sqrt(2t) for small t
        let t = 1e-14_f64;
        let v = acosh(1.0 + t);
        let exact = (2.0 * ((1.0 + t) - 1.0)).sqrt();
        assert!((v - exact).abs() / exact < 1e-6);
    }

    #[test]
    fn single_precision_instantiates() {
        let v: f32 = acosh(2.0f32);
        assert!((v - 1.316_958).abs() < 1e-5);
    }
}
