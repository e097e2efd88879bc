//! Dormand–Prince 5(4) integrator for small fixed-size systems.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Step-size control settings.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances<T> {
    pub atol: T,
    pub rtol: T,
    pub max_steps: usize,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances { atol: T::lit(1e-10), rtol: T::lit(1e-10), max_steps: 2_000_000 }
    }
}

const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

fn axpy<T: Real, const N: usize>(y: &[T; N], h: T, ks: &[&[T; N]], coef: &[f64]) -> [T; N] {
    let mut out = *y;
    for (k, &c) in ks.iter().zip(coef) {
        if c == 0.0 {
            continue;
        }
        let hc = h * T::lit(c);
        for i in 0..N {
            out[i] = out[i] + hc * k[i];
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
///
/// `on_step(t, y)` runs after every accepted step and may rescale `y` in
/// place; it returns `true` when it changed `y`.
pub fn dopri5<T, const N: usize>(
    mut f: impl FnMut(T, &[T; N]) -> [T; N],
    t0: T,
    y0: [T; N],
    t1: T,
    tol: &Tolerances<T>,
    mut on_step: impl FnMut(T, &mut [T; N]) -> bool,
) -> Result<[T; N]>
where
    T: Real,
{
    let span = t1 - t0;
    if span == T::zero() {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(&mut f, t, &y, &k1, dir, span.abs(), tol);
    let h_floor = T::epsilon() * T::lit(16.0);
    let mut steps = 0usize;
    while (t1 - t) * dir > T::zero() {
        steps += 1;
        if steps > tol.max_steps {
            return Err(Error::IntegrationFailure(format!("step budget exhausted at t = {}", t.as_f64())));
        }
        let remaining = (t1 - t).abs();
        let last = h.abs() >= remaining;
        if last {
            h = dir * remaining;
        }
        if h.abs() <= h_floor * t.abs().max(T::one()) {
            return Err(Error::IntegrationFailure(format!("step size underflow at t = {}", t.as_f64())));
        }
        let k2 = f(t + T::lit(C[0]) * h, &axpy(&y, h, &[&k1], &A2));
        let k3 = f(t + T::lit(C[1]) * h, &axpy(&y, h, &[&k1, &k2], &A3));
        let k4 = f(t + T::lit(C[2]) * h, &axpy(&y, h, &[&k1, &k2, &k3], &A4));
        let k5 = f(t + T::lit(C[3]) * h, &axpy(&y, h, &[&k1, &k2, &k3, &k4], &A5));
        let k6 = f(t + T::lit(C[4]) * h, &axpy(&y, h, &[&k1, &k2, &k3, &k4, &k5], &A6));
        let y_new = axpy(&y, h, &[&k1, &k2, &k3, &k4, &k5, &k6], &B);
        let t_new = if last { t1 } else { t + h };
        let k7 = f(t_new, &y_new);
        let err_vec = axpy(&[T::zero(); N], h, &[&k1, &k2, &k3, &k4, &k5, &k6, &k7], &E);
        let mut acc = T::zero();
        for i in 0..N {
            let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            let r = err_vec[i] / sc;
            acc = acc + r * r;
        }
        let err = (acc / T::lit(N as f64)).sqrt();
        if !err.is_finite() {
            h = h * T::lit(0.1);
            continue;
        }
        let factor = if err == T::zero() {
            T::lit(5.0)
        } else {
            (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2)).min(T::lit(5.0))
        };
        if err <= T::one() {
            t = t_new;
            y = y_new;
            k1 = k7;
            if on_step(t, &mut y) {
                k1 = f(t, &y);
            }
            h = h * factor;
        } else {
            h = h * factor.min(T::one());
        }
    }
    Ok(y)
}

fn initial_step<T: Real, const N: usize>(
    f: &mut impl FnMut(T, &[T; N]) -> [T; N],
    t: T,
    y: &[T; N],
    k1: &[T; N],
    dir: T,
    span: T,
    tol: &Tolerances<T>,
) -> T {
    let norm = |v: &[T; N]| {
        let mut s = T::zero();
        for i in 0..N {
            let sc = tol.atol + tol.rtol * y[i].abs();
            s = s + (v[i] / sc).powi(2);
        }
        (s / T::lit(N as f64)).sqrt()
    };
    let (d0, d1) = (norm(y), norm(k1));
    let small = T::lit(1e-5);
    let mut h0 = if d0 < small || d1 < small { T::lit(1e-6) } else { T::lit(0.01) * d0 / d1 };
    h0 = h0.min(span);
    let y1 = axpy(y, dir * h0, &[k1], &[1.0]);
    let k2 = f(t + dir * h0, &y1);
    let mut diff = [T::zero(); N];
    for i in 0..N {
        diff[i] = k2[i] - k1[i];
    }
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / d1.max(d2)).powf(T::lit(0.2))
    };
    dir * (T::lit(100.0) * h0).min(h1).min(span)
}
