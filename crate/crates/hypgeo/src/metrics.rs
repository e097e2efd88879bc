//! Rotationally symmetric metrics `h(rho)^2 (drho^2 + sinh^2 rho dtheta^2)`:
//! the Poincaré densities of the punctured disk and of round annuli, and the
//! curvature-pinched blend between them.

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use crate::scalar::{atanh, Real};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::sync::Arc;

/// Density together with its first two derivatives in `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jet<T> {
    pub h: T,
    pub dh: T,
    pub d2h: T,
}

impl<T: Real> Jet<T> {
    fn from_reciprocal(big_h: T, d1: T, d2: T) -> Self {
        let two = T::lit(2.0);
        Jet {
            h: T::one() / big_h,
            dh: -d1 / (big_h * big_h),
            d2h: (two * d1 * d1 - big_h * d2) / (big_h * big_h * big_h),
        }
    }
}

/// Round annulus `R1 < |z| < R2` (with `R2 = 1` the punctured-disk end).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSpec<T> {
    pub r1: T,
    pub r2: T,
}

impl<T: Real> AnnulusSpec<T> {
    pub fn new(r1: T, r2: T) -> Result<Self> {
        if !(r1 > T::zero() && r1 < r2 && r2 <= T::one()) {
            return Err(Error::Domain(format!("annulus needs 0 < R1 < R2 <= 1, got ({r1}, {r2})")));
        }
        Ok(AnnulusSpec { r1, r2 })
    }

    /// `log(R2 / R1)`.
    pub fn modulus(&self) -> T {
        (self.r2 / self.r1).ln()
    }

    /// Length `2 pi^2 / log(R2 / R1)` of the core geodesic.
    pub fn core_length(&self) -> T {
        T::lit(2.0) * T::PI() * T::PI() / self.modulus()
    }

    /// Radius of the core geodesic, `tanh(rho / 2) = sqrt(R1 R2)`.
    pub fn core_rho(&self) -> T {
        T::lit(2.0) * atanh((self.r1 * self.r2).sqrt())
    }

    /// Open `rho` interval covered by the annulus.
    pub fn rho_range(&self) -> (T, T) {
        let hi = if self.r2 >= T::one() { T::infinity() } else { T::lit(2.0) * atanh(self.r2) };
        (T::lit(2.0) * atanh(self.r1), hi)
    }
}

/// `log tanh(rho / 2)` without cancellation for large `rho`.
fn log_tanh_half<T: Real>(rho: T) -> T {
    if rho < T::one() {
        (rho / T::lit(2.0)).tanh().ln()
    } else {
        (-T::lit(2.0) / (rho.exp() + T::one())).ln_1p()
    }
}

// ---------------------------------------------------------------------------
// Closed-form densities
// ---------------------------------------------------------------------------

/// Jet of the punctured-disk density `1 / (sinh rho log coth(rho/2))`.
pub fn punctured_disk_jet<T: Real>(rho: T) -> Result<Jet<T>> {
    if !(rho > T::zero()) {
        return Err(Error::Domain(format!("punctured-disk density needs rho > 0, got {rho}")));
    }
    if rho >= T::lit(2.0) {
        return Ok(punctured_disk_jet_series(rho));
    }
    let l = -log_tanh_half(rho);
    let (s, c) = (rho.sinh(), rho.cosh());
    let big_h = s * l;
    let d1 = c * l - T::one();
    let d2 = s * l - c / s;
    Ok(Jet::from_reciprocal(big_h, d1, d2))
}

/// Far from the puncture, `H = sinh rho log coth(rho/2)` and its derivatives
/// are expanded in `x = exp(-rho)` so that `H - 1`, `H'` and `H''` keep full
/// relative accuracy:
/// `H = 1 - sum 2 x^2k / (4k^2 - 1)`, `H' = sum 4k x^2k / (4k^2 - 1)`,
/// `H'' = -sum 8k^2 x^2k / (4k^2 - 1)`.
fn punctured_disk_jet_series<T: Real>(rho: T) -> Jet<T> {
    let x2 = (-T::lit(2.0) * rho).exp();
    let (mut s0, mut s1, mut s2) = (T::zero(), T::zero(), T::zero());
    let mut p = x2;
    for k in 1..60 {
        let kf = T::lit(k as f64);
        let q = T::lit(4.0) * kf * kf - T::one();
        s0 = s0 + T::lit(2.0) * p / q;
        s1 = s1 + T::lit(4.0) * kf * p / q;
        s2 = s2 + T::lit(8.0) * kf * kf * p / q;
        p = p * x2;
        if p < T::epsilon() * T::epsilon() * x2 {
            break;
        }
    }
    Jet::from_reciprocal(T::one() - s0, s1, -s2)
}

pub fn density_punctured_disk<T: Real>(rho: T) -> Result<T> {
    punctured_disk_jet(rho).map(|j| j.h)
}

/// Jet of the annulus density.
pub fn annulus_jet<T: Real>(spec: &AnnulusSpec<T>, rho: T) -> Result<Jet<T>> {
    let (lo, hi) = spec.rho_range();
    if !(rho > lo && rho < hi) {
        return Err(Error::Domain(format!("rho = {rho} outside annulus range ({lo}, {hi})")));
    }
    let k = T::PI() / spec.modulus();
    let theta = k * (spec.r2.ln() - log_tanh_half(rho));
    let (s, c) = (rho.sinh(), rho.cosh());
    let (st, ct) = (theta.sin(), theta.cos());
    let big_h = s * st / k;
    let d1 = (c * st - k * ct) / k;
    let d2 = (s * st - k * c * ct / s - k * k * st / s) / k;
    Ok(Jet::from_reciprocal(big_h, d1, d2))
}

pub fn density_annulus<T: Real>(spec: &AnnulusSpec<T>, rho: T) -> Result<T> {
    annulus_jet(spec, rho).map(|j| j.h)
}

// ---------------------------------------------------------------------------
// Cut-off
// ---------------------------------------------------------------------------

fn sigma_jet<T: Real>(x: T) -> (T, T, T) {
    if x <= T::zero() {
        return (T::zero(), T::zero(), T::zero());
    }
    let s = (-T::one() / x).exp();
    let x2 = x * x;
    (s, s / x2, s * (T::one() - T::lit(2.0) * x) / (x2 * x2))
}

/// Smooth cut-off `sigma(x) / (sigma(x) + sigma(1 - x))` with
/// `sigma(x) = exp(-1/x)`, together with two derivatives.
pub fn chi0_jet<T: Real>(x: T) -> (T, T, T) {
    if x <= T::zero() {
        return (T::zero(), T::zero(), T::zero());
    }
    if x >= T::one() {
        return (T::one(), T::zero(), T::zero());
    }
    let (a, a1, a2) = sigma_jet(x);
    let (b, b1, b2) = sigma_jet(T::one() - x);
    let (b1, b2) = (-b1, b2);
    let s = a + b;
    let n = a1 * b - a * b1;
    let n1 = a2 * b - a * b2;
    let d = s * s;
    let d1 = T::lit(2.0) * s * (a1 + b1);
    (a / s, n / d, (n1 * d - n * d1) / (d * d))
}

pub fn chi0<T: Real>(x: T) -> T {
    chi0_jet(x).0
}

/// Measured `(max |chi0'|, max |chi0''|)` over `[0, 1]`.
pub fn cutoff_constants<T: Real>() -> (T, T) {
    let n = 20_000;
    (0..=n).fold((T::zero(), T::zero()), |(m1, m2), i| {
        let (_, d1, d2) = chi0_jet(T::lit(i as f64 / n as f64));
        (m1.max(d1.abs()), m2.max(d2.abs()))
    })
}

// ---------------------------------------------------------------------------
// Radial metrics
// ---------------------------------------------------------------------------

/// Data of the blended metric: annulus density for `rho <= rho0`,
/// punctured-disk density for `rho >= rho0 + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntermediateMetricSpec<T> {
    pub r1: T,
    pub r2: T,
    pub rho0: T,
    pub delta: T,
}

/// Density-only closure for user supplied metrics.
pub type DensityFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Clone)]
pub enum MetricKind<T> {
    PuncturedDisk,
    Annulus(AnnulusSpec<T>),
    Intermediate(IntermediateMetricSpec<T>),
    Custom(DensityFn<T>),
}

impl<T: fmt::Debug> fmt::Debug for MetricKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricKind::PuncturedDisk => write!(f, "PuncturedDisk"),
            MetricKind::Annulus(s) => write!(f, "Annulus({s:?})"),
            MetricKind::Intermediate(s) => write!(f, "Intermediate({s:?})"),
            MetricKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Metric `h(rho)^2 (drho^2 + sinh^2 rho dtheta^2)` on an open `rho` interval.
#[derive(Debug, Clone)]
pub struct RadialMetric<T> {
    pub lo: T,
    pub hi: T,
    pub kind: MetricKind<T>,
}

/// Finite-difference step for metrics without closed-form derivatives.
pub const FD_STEP: f64 = 1e-5;

impl<T: Real> RadialMetric<T> {
    pub fn punctured_disk() -> Self {
        RadialMetric { lo: T::zero(), hi: T::infinity(), kind: MetricKind::PuncturedDisk }
    }

    pub fn annulus(spec: AnnulusSpec<T>) -> Self {
        let (lo, hi) = spec.rho_range();
        RadialMetric { lo, hi, kind: MetricKind::Annulus(spec) }
    }

    pub fn custom(lo: T, hi: T, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        RadialMetric { lo, hi, kind: MetricKind::Custom(Arc::new(f)) }
    }

    pub fn contains(&self, rho: T) -> bool {
        rho > self.lo && rho < self.hi
    }

    pub fn density(&self, rho: T) -> Result<T> {
        match &self.kind {
            MetricKind::Custom(f) => {
                self.check(rho)?;
                Ok(f(rho))
            }
            _ => self.jet(rho).map(|j| j.h),
        }
    }

    fn check(&self, rho: T) -> Result<()> {
        if self.contains(rho) {
            Ok(())
        } else {
            Err(Error::Domain(format!("rho = {rho} outside ({}, {})", self.lo, self.hi)))
        }
    }

    /// Density and two derivatives: closed form where available, Richardson
    /// refined central differences otherwise.
    pub fn jet(&self, rho: T) -> Result<Jet<T>> {
        self.check(rho)?;
        match &self.kind {
            MetricKind::PuncturedDisk => punctured_disk_jet(rho),
            MetricKind::Annulus(s) => annulus_jet(s, rho),
            MetricKind::Intermediate(s) => intermediate_jet(s, rho),
            MetricKind::Custom(f) => {
                let h = T::lit(FD_STEP);
                if !(self.contains(rho - h) && self.contains(rho + h)) {
                    return Err(Error::Domain(format!("rho = {rho} too close to the boundary")));
                }
                Ok(fd_jet(|x| f(x), rho, h))
            }
        }
    }
}

/// Central differences with one Richardson step (`h` and `h/2`).
pub fn fd_jet<T: Real>(f: impl Fn(T) -> T, x: T, h: T) -> Jet<T> {
    let two = T::lit(2.0);
    let d1 = |s: T| (f(x + s) - f(x - s)) / (two * s);
    let d2 = |s: T| (f(x + s) - two * f(x) + f(x - s)) / (s * s);
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    Jet { h: f(x), dh: (four * d1(h / two) - d1(h)) / three, d2h: (four * d2(h / two) - d2(h)) / three }
}

fn intermediate_jet<T: Real>(s: &IntermediateMetricSpec<T>, rho: T) -> Result<Jet<T>> {
    let ann = AnnulusSpec { r1: s.r1, r2: s.r2 };
    if rho <= s.rho0 {
        return annulus_jet(&ann, rho);
    }
    if rho >= s.rho0 + T::one() {
        return punctured_disk_jet(rho);
    }
    let r = annulus_jet(&ann, rho)?;
    let o = punctured_disk_jet(rho)?;
    let (c, c1, c2) = chi0_jet(rho - s.rho0);
    let two = T::lit(2.0);
    let one = T::one();
    Ok(Jet {
        h: (one - c) * r.h + c * o.h,
        dh: (one - c) * r.dh + c * o.dh + c1 * (o.h - r.h),
        d2h: (one - c) * r.d2h + c * o.d2h + two * c1 * (o.dh - r.dh) + c2 * (o.h - r.h),
    })
}

/// Gaussian curvature `-(1/h^2)((log h)'' + (log h)' coth rho + 1)` from a jet.
pub fn curvature_from_jet<T: Real>(j: &Jet<T>, rho: T) -> T {
    let l1 = j.dh / j.h;
    let l2 = j.d2h / j.h - l1 * l1;
    -(l2 + l1 / rho.tanh() + T::one()) / (j.h * j.h)
}

pub fn gaussian_curvature<T: Real>(metric: &RadialMetric<T>, rho: T) -> Result<T> {
    let j = metric.jet(rho)?;
    Ok(curvature_from_jet(&j, rho))
}

/// Radial distance `int_a^b h(rho) drho`.
pub fn radial_distance<T: Real>(metric: &RadialMetric<T>, a: T, b: T) -> Result<T> {
    metric.check(a.min(b))?;
    metric.check(a.max(b))?;
    let f = |x: T| metric.density(x).unwrap_or_else(|_| T::nan());
    let d = adaptive_simpson(&f, a.min(b), a.max(b), T::lit(1e-12));
    if d.is_finite() {
        Ok(d)
    } else {
        Err(Error::Domain("density undefined inside the interval".into()))
    }
}

// ---------------------------------------------------------------------------
// Transition radius
// ---------------------------------------------------------------------------

/// Outcome of the transition search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition<T> {
    pub rho0: T,
    /// `R(rho0) = 1 - t0^3` with `t0 = 1 - tanh(rho0 / 2)`.
    pub r_of_rho0: T,
    /// Max of `|h_R - 1|, |h_R'|, |h_R''|` over `[rho0, rho0 + 1]` and sampled `R2`.
    pub annulus_max: T,
    /// Max of `h - 1, |h' coth rho|, |h''|` for the blended density.
    pub blend_max: T,
}

/// Grid of candidate transition radii `2, 3, 4.5, ...` up to the cap.
pub fn transition_grid<T: Real>(cap: T) -> Vec<T> {
    let mut v = Vec::new();
    let mut r = T::lit(2.0);
    while r <= cap {
        v.push(r);
        r = r * T::lit(1.5);
    }
    v
}

pub const TRANSITION_CAP: f64 = 60.0;
const TRANSITION_SAMPLES: usize = 401;
const R2_SAMPLES: usize = 5;

/// `1 - tanh(x / 2)` without cancellation.
fn one_minus_tanh_half<T: Real>(x: T) -> T {
    T::lit(2.0) / (x.exp() + T::one())
}

/// Smallest grid radius at which the annulus density is `delta`-close to 1
/// with its derivatives on `[rho0, rho0 + 1]` for every sampled
/// `R2 in [R(rho0), 1]`, and at which the blended density meets the
/// `delta / 6` bounds that pin its curvature to `[-1 - delta, -1 + delta]`.
pub fn choose_transition<T: Real>(r1: T, delta: T) -> Result<Transition<T>> {
    choose_transition_capped(r1, delta, T::lit(TRANSITION_CAP))
}

/// [`choose_transition`] with an explicit search cap.
pub fn choose_transition_capped<T: Real>(r1: T, delta: T, cap: T) -> Result<Transition<T>> {
    if !(r1 > T::zero() && r1 < T::one()) {
        return Err(Error::Domain(format!("R1 must lie in (0, 1), got {r1}")));
    }
    if !(delta > T::zero() && delta < T::one()) {
        return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    for rho0 in transition_grid(cap) {
        if let Some(t) = try_transition(r1, delta, rho0) {
            return Ok(t);
        }
    }
    Err(Error::SearchExhausted(format!("no transition radius below {cap} for delta = {delta}")))
}

/// Evaluates the transition conditions at one radius.
pub fn try_transition<T: Real>(r1: T, delta: T, rho0: T) -> Option<Transition<T>> {
    let t0 = one_minus_tanh_half(rho0);
    let t0_cubed = t0 * t0 * t0;
    if one_minus_tanh_half(rho0 + T::one()) <= t0_cubed {
        return None;
    }
    if T::lit(2.0) * atanh(r1) >= rho0 {
        return None;
    }
    let big_r = T::one() - t0_cubed;
    let six = T::lit(6.0);
    let mut annulus_max = T::zero();
    let mut blend_max = T::zero();
    for k in 0..R2_SAMPLES {
        let r2 = big_r + (T::one() - big_r) * T::lit(k as f64 / (R2_SAMPLES - 1) as f64);
        let r2 = r2.min(T::one());
        let ann = AnnulusSpec { r1, r2 };
        let spec = IntermediateMetricSpec { r1, r2, rho0, delta };
        for i in 0..TRANSITION_SAMPLES {
            let rho = rho0 + T::lit(i as f64 / (TRANSITION_SAMPLES - 1) as f64);
            let a = annulus_jet(&ann, rho).ok()?;
            annulus_max = annulus_max.max((a.h - T::one()).abs()).max(a.dh.abs()).max(a.d2h.abs());
            let b = intermediate_jet(&spec, rho).ok()?;
            blend_max = blend_max.max(b.h - T::one()).max((b.dh / rho.tanh()).abs()).max(b.d2h.abs());
        }
    }
    (annulus_max <= delta && blend_max <= delta / six).then_some(Transition {
        rho0,
        r_of_rho0: big_r,
        annulus_max,
        blend_max,
    })
}

// ---------------------------------------------------------------------------
// Intermediate metric with curvature certificate
// ---------------------------------------------------------------------------

/// Evidence that the blended metric is curvature-pinched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureCertificate<T> {
    pub k_min: T,
    pub k_max: T,
    pub points: usize,
    /// Measured `max |chi0'|`.
    pub c1: T,
    /// Measured `max |chi0''|`.
    pub c2: T,
    /// Smallest `h_R - h_delta` and `h_delta - h_O` seen (both must be >= 0).
    pub sandwich_margin: T,
}

pub const BLEND_POINTS: usize = 2000;
pub const PLATEAU_POINTS: usize = 200;

/// Verification grid: the blend zone plus a plateau on each side.
pub fn certification_grid<T: Real>(s: &IntermediateMetricSpec<T>, lo: T, hi: T) -> Vec<T> {
    let mut g = Vec::with_capacity(BLEND_POINTS + 2 * PLATEAU_POINTS);
    let inner = (s.rho0 - T::one()).max((lo + s.rho0) / T::lit(2.0));
    let outer = (s.rho0 + T::lit(2.0)).min((s.rho0 + T::one() + hi) / T::lit(2.0));
    for i in 0..PLATEAU_POINTS {
        g.push(inner + (s.rho0 - inner) * T::lit(i as f64 / PLATEAU_POINTS as f64));
    }
    for i in 0..BLEND_POINTS {
        g.push(s.rho0 + T::lit(i as f64 / (BLEND_POINTS - 1) as f64));
    }
    for i in 1..=PLATEAU_POINTS {
        let t = T::lit(i as f64 / PLATEAU_POINTS as f64);
        g.push(s.rho0 + T::one() + (outer - s.rho0 - T::one()) * t);
    }
    g
}

/// Builds the blended metric and certifies its curvature band on the grid.
pub fn intermediate_metric<T: Real>(
    spec: IntermediateMetricSpec<T>,
) -> Result<(RadialMetric<T>, CurvatureCertificate<T>)> {
    let ann = AnnulusSpec::new(spec.r1, spec.r2)?;
    let (lo, hi) = ann.rho_range();
    if !(spec.rho0 > lo) {
        return Err(Error::Domain(format!("rho0 = {} must exceed the inner radius {lo}", spec.rho0)));
    }
    if one_minus_tanh_half(spec.rho0 + T::one()) <= T::one() - spec.r2 {
        return Err(Error::Domain("transition zone must sit inside the annulus".into()));
    }
    let metric = RadialMetric { lo, hi, kind: MetricKind::Intermediate(spec) };
    let grid = certification_grid(&spec, lo, hi);
    let rows: Vec<Result<(T, T, T)>> = grid
        .par_iter()
        .map(|&rho| {
            let j = intermediate_jet(&spec, rho)?;
            let r = annulus_jet(&ann, rho)?.h;
            let o = punctured_disk_jet(rho)?.h;
            Ok((rho, curvature_from_jet(&j, rho), (r - j.h).min(j.h - o)))
        })
        .collect();
    let (lo_band, hi_band) = (-T::one() - spec.delta, -T::one() + spec.delta);
    let (c1, c2) = cutoff_constants();
    let mut cert = CurvatureCertificate {
        k_min: T::infinity(),
        k_max: T::neg_infinity(),
        points: grid.len(),
        c1,
        c2,
        sandwich_margin: T::infinity(),
    };
    for row in rows {
        let (rho, k, margin) = row?;
        if !(k >= lo_band && k <= hi_band) {
            return Err(Error::CurvatureOutOfBand {
                rho: rho.as_f64(),
                curvature: k.as_f64(),
                lo: lo_band.as_f64(),
                hi: hi_band.as_f64(),
            });
        }
        cert.k_min = cert.k_min.min(k);
        cert.k_max = cert.k_max.max(k);
        cert.sandwich_margin = cert.sandwich_margin.min(margin);
    }
    if cert.sandwich_margin < -T::lit(1e-12) {
        return Err(Error::GeometryInconsistent(format!(
            "blend leaves the band between the two densities (margin {})",
            cert.sandwich_margin
        )));
    }
    Ok((metric, cert))
}

// ---------------------------------------------------------------------------
// Cusps and horocycles
// ---------------------------------------------------------------------------

/// Euclidean radius `exp(-2 pi / l)` of the horocycle of length `l`.
pub fn cusp_radius<T: Real>(l: T) -> T {
    (-T::lit(2.0) * T::PI() / l).exp()
}

/// Distance `|log(l1 / l2)|` between horocycles of lengths `l1`, `l2`.
pub fn horocycle_distance<T: Real>(l1: T, l2: T) -> T {
    (l1 / l2).ln().abs()
}

/// Effective half-collar width `(1 - delta)(log l - log(2 pi eps0) - 2 pi eps0)`
/// around a cusp of length `l`.
pub fn large_cusp_collar_width<T: Real>(l: T, delta: T, eps0: T) -> Result<T> {
    let two_pi_eps = T::lit(2.0) * T::PI() * eps0;
    if !(eps0 > T::zero()) || l < two_pi_eps {
        return Err(Error::Domain(format!("need l >= 2 pi eps0 = {two_pi_eps}, got l = {l}")));
    }
    if !(delta >= T::zero() && delta < T::one() / T::lit(3.0)) {
        return Err(Error::Domain(format!("delta must lie in [0, 1/3), got {delta}")));
    }
    Ok((T::one() - delta) * (l.ln() - two_pi_eps.ln() - two_pi_eps))
}

/// Smallest `l` with positive effective width, found by bisection.
pub fn large_cusp_positivity_threshold<T: Real>(eps0: T) -> Result<T> {
    let mut lo = T::lit(2.0) * T::PI() * eps0;
    let f = |l: T| large_cusp_collar_width(l, T::zero(), eps0);
    let mut hi = lo;
    while f(hi)? <= T::zero() {
        hi = hi * T::lit(2.0);
    }
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if f(mid)? > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Core length of the annulus `R1 = r(eps0)`, `R2 = r(4 eps0 / delta)` with
/// the bracket `[pi eps0, (1 + delta/3) pi eps0]` it must fall in.
pub fn core_length_bracket<T: Real>(eps0: T, delta: T) -> Result<(T, T, T)> {
    let spec = AnnulusSpec::new(cusp_radius(eps0), cusp_radius(T::lit(4.0) * eps0 / delta))?;
    let base = T::PI() * eps0;
    Ok((spec.core_length(), base, (T::one() + delta / T::lit(3.0)) * base))
}

/// Distance in the annulus metric from the core geodesic to the horocycle of
/// length `l` of the punctured disk.
pub fn core_to_horocycle_distance<T: Real>(spec: &AnnulusSpec<T>, l: T) -> Result<T> {
    let rho = T::lit(2.0) * atanh(cusp_radius(l));
    radial_distance(&RadialMetric::annulus(*spec), spec.core_rho(), rho)
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

/// Writes `rho, h, dh, d2h, K` rows on a uniform grid of `n` interior points.
pub fn write_profile_csv<T: Real, W: Write>(metric: &RadialMetric<T>, a: T, b: T, n: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rho", "h", "dh", "d2h", "K"])?;
    for i in 0..n {
        let rho = a + (b - a) * T::lit((i as f64 + 0.5) / n as f64);
        let j = metric.jet(rho)?;
        let k = curvature_from_jet(&j, rho);
        w.write_record([rho, j.h, j.dh, j.d2h, k].map(|x| format!("{:.12e}", x.as_f64())))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_densities() {
        let one = RadialMetric::custom(0.0, 10.0, |_| 1.0_f64);
        assert!((gaussian_curvature(&one, 1.0).unwrap() + 1.0).abs() < 1e-6);
        let two = RadialMetric::custom(0.0, 10.0, |_| 2.0_f64);
        assert!((gaussian_curvature(&two, 1.0).unwrap() + 0.25).abs() < 1e-6);
    }

    #[test]
    fn chi0_derivatives_match_finite_differences() {
        for &x in &[0.1, 0.3, 0.5, 0.77, 0.95] {
            let (_, d1, d2) = chi0_jet(x);
            let fd = fd_jet(chi0::<f64>, x, 1e-4);
            assert!((d1 - fd.dh).abs() < 1e-7, "{x}");
            assert!((d2 - fd.d2h).abs() < 1e-5, "{x}");
        }
        assert_eq!(chi0(0.0_f64), 0.0);
        assert_eq!(chi0(1.0_f64), 1.0);
        assert!((chi0(0.5_f64) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn annulus_core_symmetry() {
        let spec = AnnulusSpec::new((-2.0 * std::f64::consts::PI).exp(), 0.9).unwrap();
        let rc = spec.core_rho();
        let expected = std::f64::consts::PI / spec.modulus() / rc.sinh();
        assert!((density_annulus(&spec, rc).unwrap() - expected).abs() < 1e-13);
    }

    #[test]
    fn domain_errors() {
        assert!(density_punctured_disk(0.0_f64).is_err());
        let spec = AnnulusSpec::new(0.2_f64, 0.5).unwrap();
        assert!(density_annulus(&spec, 0.1).is_err());
        assert!(large_cusp_collar_width(0.1_f64, 0.1, 1.0).is_err());
    }

    #[test]
    fn cusp_helpers() {
        let two_pi = 2.0 * std::f64::consts::PI;
        assert!((cusp_radius(two_pi) - (-1.0_f64).exp()).abs() < 1e-15);
        assert!((horocycle_distance(two_pi * std::f64::consts::E, two_pi) - 1.0).abs() < 1e-15);
        let eps0 = 1.0 / two_pi;
        let l = 7.3_f64;
        assert!((large_cusp_collar_width(l, 0.0, eps0).unwrap() - (l.ln() - 1.0)).abs() < 1e-14);
    }
}
