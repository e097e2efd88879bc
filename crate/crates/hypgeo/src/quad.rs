//! Simpson quadrature helpers.

use crate::scalar::Real;

/// Composite Simpson rule on `n` panels (`n` rounded up to even).
pub fn simpson<T: Real>(f: impl Fn(T) -> T, a: T, b: T, n: usize) -> T {
    let n = (n.max(2) + 1) & !1;
    let h = (b - a) / T::lit(n as f64);
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
        s = s + w * f(a + h * T::lit(i as f64));
    }
    s * h / T::lit(3.0)
}

/// Adaptive Simpson rule with absolute tolerance `tol`.
pub fn adaptive_simpson<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, tol: T) -> T {
    let m = (a + b) / T::lit(2.0);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, fa: T, fm: T, fb: T, whole: T, tol: T, depth: u32) -> T {
    let two = T::lit(2.0);
    let m = (a + b) / two;
    let (lm, rm) = ((a + m) / two, (m + b) / two);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / T::lit(6.0) * (fa + T::lit(4.0) * flm + fm);
    let right = (b - m) / T::lit(6.0) * (fm + T::lit(4.0) * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= T::lit(15.0) * tol {
        return left + right + diff / T::lit(15.0);
    }
    recurse(f, a, m, fa, flm, fm, left, tol / two, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, tol / two, depth - 1)
}

/// Simpson rule on uniformly spaced samples; an odd panel count falls back
/// to a trapezoid on the last panel.
pub fn simpson_samples<T: Real>(values: &[T], h: T) -> T {
    let n = values.len();
    if n < 2 {
        return T::zero();
    }
    let panels = n - 1;
    let even = panels - panels % 2;
    let mut s = T::zero();
    let mut i = 0;
    while i < even {
        s = s + (values[i] + T::lit(4.0) * values[i + 1] + values[i + 2]) * h / T::lit(3.0);
        i += 2;
    }
    if even < panels {
        s = s + (values[panels - 1] + values[panels]) * h / T::lit(2.0);
    }
    s
}
