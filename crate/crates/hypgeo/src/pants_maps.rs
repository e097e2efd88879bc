//! Boundary-length perturbation maps between right-angled pentagons,
//! hexagons and pairs of pants, with grid certification of their distortion.
//!
//! A pentagon with consecutive sides `alpha, b, gamma, d, c` is described in
//! Fermi coordinates `(u, v)` along `d`: `u` runs from the corner with `c`
//! (`u = 0`) to the corner with `gamma` (`u = d`) and `v >= 0` is the distance
//! from `d`, so the metric is `cosh^2 v du^2 + dv^2`. The altitude `h(u)` meets
//! `alpha` for `u <= u0` and `b` beyond.

use crate::error::{Error, Result};
use crate::hyptrig::hexagon_solve;
use crate::scalar::{acosh, asinh, atanh, coth, rel_err, Real};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default grid resolution per pentagon.
pub const DEFAULT_GRID: usize = 200;
/// Default number of samples along the preserved boundary side.
pub const BOUNDARY_SAMPLES: usize = 1000;
/// Slack allowed on every certified inequality.
pub const CERT_TOL: f64 = 1e-10;
const IDENTITY_TOL: f64 = 1e-8;
const TRACE_TOL: f64 = 1e-10;
const FD_STEP: f64 = 1e-5;

/// Which altitude formula applies; at `u = u0` both are valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `tanh h = cosh u tanh c`, on `[0, u0]`.
    Left,
    /// `tanh h = cosh(d - u) tanh gamma`, on `[u0, d]`.
    Right,
}

/// Right-angled pentagon in Fermi coordinates along `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FermiPentagon<T> {
    pub alpha: T,
    pub b: T,
    pub gamma: T,
    pub d: T,
    pub c: T,
    /// Foot of the altitude through the corner between `alpha` and `b`.
    pub u0: T,
    /// Maximal altitude `h(u0)`.
    pub h0: T,
}

fn positive<T: Real>(name: &str, x: T) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {}", x.as_f64())))
    }
}

/// Pentagon with consecutive sides `alpha, b, gamma, d, c`, checked against
/// the right-angled pentagon identities.
pub fn fermi_pentagon<T: Real>(alpha: T, d: T, c: T, gamma: T) -> Result<FermiPentagon<T>> {
    positive("alpha", alpha)?;
    positive("d", d)?;
    positive("c", c)?;
    positive("gamma", gamma)?;
    let checks = [
        ("cosh c = coth alpha coth d", c.cosh(), coth(alpha) * coth(d)),
        ("cosh gamma = sinh alpha sinh c", gamma.cosh(), alpha.sinh() * c.sinh()),
        ("cosh alpha = sinh gamma sinh d", alpha.cosh(), gamma.sinh() * d.sinh()),
    ];
    for (name, lhs, rhs) in checks {
        let e = rel_err(lhs, rhs, T::min_positive_value());
        if !(e <= T::lit(IDENTITY_TOL)) {
            return Err(Error::GeometryInconsistent(format!("{name}: relative residual {:e}", e.as_f64())));
        }
    }
    Ok(FermiPentagon::assemble(alpha, d, c, gamma))
}

impl<T: Real> FermiPentagon<T> {
    /// The pentagon is determined by `alpha` and `d`.
    pub fn from_alpha_d(alpha: T, d: T) -> Result<Self> {
        positive("alpha", alpha)?;
        positive("d", d)?;
        let c = acosh(coth(alpha) * coth(d));
        // sinh gamma = cosh alpha / sinh d avoids the cancellation in acosh near 1.
        let gamma = asinh(alpha.cosh() / d.sinh());
        Ok(Self::assemble(alpha, d, c, gamma))
    }

    fn assemble(alpha: T, d: T, c: T, gamma: T) -> Self {
        let b = asinh(d.cosh() / alpha.sinh());
        let ta = alpha.tanh();
        let u0 = atanh(ta * ta * d.tanh());
        let h0 = atanh(u0.cosh() * c.tanh());
        FermiPentagon { alpha, b, gamma, d, c, u0, h0 }
    }

    /// Same `alpha`, with `sinh d` scaled by `1 + delta`.
    pub fn perturbed(&self, delta: T) -> Result<Self> {
        if !(delta > -T::one()) {
            return Err(Error::Domain(format!("perturbation {} must exceed -1", delta.as_f64())));
        }
        Self::from_alpha_d(self.alpha, asinh(self.d.sinh() * (T::one() + delta)))
    }

    pub fn sides(&self) -> [T; 5] {
        [self.alpha, self.b, self.gamma, self.d, self.c]
    }

    /// Branch used at `u`; ties go left.
    pub fn branch(&self, u: T) -> Branch {
        if u <= self.u0 {
            Branch::Left
        } else {
            Branch::Right
        }
    }

    /// `tanh h(u)` from the given branch formula.
    pub fn tanh_altitude_on(&self, u: T, branch: Branch) -> T {
        match branch {
            Branch::Left => u.cosh() * self.c.tanh(),
            Branch::Right => (self.d - u).cosh() * self.gamma.tanh(),
        }
    }

    /// Logarithmic derivative of `tanh h` along `u` on the given branch.
    fn log_slope(&self, u: T, branch: Branch) -> T {
        match branch {
            Branch::Left => u.tanh(),
            Branch::Right => -(self.d - u).tanh(),
        }
    }

    pub fn altitude_on(&self, u: T, branch: Branch) -> T {
        atanh(self.tanh_altitude_on(u, branch))
    }

    /// Altitude `h(u)` over `(u, 0)`.
    pub fn altitude(&self, u: T) -> T {
        self.altitude_on(u, self.branch(u))
    }

    /// Distance along `alpha` from its corner with `c` to the foot over `u`,
    /// for `u` in `[0, u0]`.
    pub fn alpha_arclength(&self, u: T) -> T {
        atanh(self.c.cosh() * u.tanh())
    }

    /// Residuals of the pentagon identities (relative errors).
    pub fn residuals(&self) -> Vec<(String, T)> {
        let (al, b, g, d, c) = (self.alpha, self.b, self.gamma, self.d, self.c);
        let ta = al.tanh();
        let mut out = vec![
            ("cosh c = coth alpha coth d", c.cosh(), coth(al) * coth(d)),
            ("cosh gamma = sinh alpha sinh c", g.cosh(), al.sinh() * c.sinh()),
            ("cosh alpha = sinh gamma sinh d", al.cosh(), g.sinh() * d.sinh()),
            ("cosh d = sinh alpha sinh b", d.cosh(), al.sinh() * b.sinh()),
            ("cosh b = coth alpha coth gamma", b.cosh(), coth(al) * coth(g)),
            ("tanh u0 = tanh^2 alpha tanh d", self.u0.tanh(), ta * ta * d.tanh()),
        ]
        .into_iter()
        .map(|(n, l, r)| (n.to_string(), rel_err(l, r, T::min_positive_value())))
        .collect::<Vec<_>>();
        let left = self.tanh_altitude_on(self.u0, Branch::Left);
        let right = self.tanh_altitude_on(self.u0, Branch::Right);
        out.push(("altitude continuous at u0".to_string(), rel_err(left, right, T::min_positive_value())));
        out
    }
}

/// `|sinh d' / sinh d - 1|`.
pub fn delta_d<T: Real>(src: &FermiPentagon<T>, dst: &FermiPentagon<T>) -> T {
    (dst.d.sinh() / src.d.sinh() - T::one()).abs()
}

/// `max(h0, h0')`.
pub fn h_bar<T: Real>(src: &FermiPentagon<T>, dst: &FermiPentagon<T>) -> T {
    src.h0.max(dst.h0)
}

/// Certified distortion constant `54 e^{2 h_bar} sqrt(delta_d)`.
pub fn pentagon_delta0<T: Real>(src: &FermiPentagon<T>, dst: &FermiPentagon<T>) -> T {
    T::lit(54.0) * (T::lit(2.0) * h_bar(src, dst)).exp() * delta_d(src, dst).sqrt()
}

/// Fermi metric coefficients `(g_uu, g_vv)` at height `v`; `g_uv = 0`.
pub fn fermi_metric<T: Real>(v: T) -> (T, T) {
    let c = v.cosh();
    (c * c, T::one())
}

/// Partial derivatives of the pentagon map; `du'/dv` vanishes identically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jacobian<T> {
    pub du_du: T,
    pub dv_du: T,
    pub dv_dv: T,
}

impl<T: Real> Jacobian<T> {
    fn matrix(&self) -> [[T; 2]; 2] {
        [[self.du_du, T::zero()], [self.dv_du, self.dv_dv]]
    }
}

/// Eigenvalues `(min, max)` of the symmetric 2x2 matrix `[[a, b], [b, c]]`.
fn sym_eig<T: Real>(a: T, b: T, c: T) -> (T, T) {
    let two = T::lit(2.0);
    let mid = (a + c) / two;
    let rad = (((a - c) / two).powi(2) + b * b).sqrt();
    (mid - rad, mid + rad)
}

/// Extremes `(min, max)` of `mu^*(ds'^2) / ds^2` for a map with Jacobian
/// `j` (rows `u'`, `v'`) from Fermi height `v` to Fermi height `v1`.
pub fn metric_ratio_extremes<T: Real>(j: [[T; 2]; 2], v: T, v1: T) -> (T, T) {
    let (g1, _) = fermi_metric(v1);
    let cv = v.cosh();
    // B = J^T diag(g1, 1) J, then A^{-1/2} B A^{-1/2} with A = diag(cosh^2 v, 1).
    let b11 = j[0][0] * j[0][0] * g1 + j[1][0] * j[1][0];
    let b12 = j[0][0] * j[0][1] * g1 + j[1][0] * j[1][1];
    let b22 = j[0][1] * j[0][1] * g1 + j[1][1] * j[1][1];
    sym_eig(b11 / (cv * cv), b12 / cv, b22)
}

/// The map `mu` between two pentagons with the same `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PentagonMap<T> {
    pub src: FermiPentagon<T>,
    pub dst: FermiPentagon<T>,
    scale: T,
    /// Source and target coincide; the map is then the identity exactly.
    identity: bool,
}

impl<T: Real> PentagonMap<T> {
    pub fn new(src: FermiPentagon<T>, dst: FermiPentagon<T>) -> Result<Self> {
        if rel_err(src.alpha, dst.alpha, T::min_positive_value()) > T::lit(1e-12) {
            return Err(Error::PreconditionUnmet(format!(
                "pentagon map needs equal alpha, got {} and {}",
                src.alpha.as_f64(),
                dst.alpha.as_f64()
            )));
        }
        Ok(PentagonMap { src, dst, scale: dst.d.tanh() / src.d.tanh(), identity: src == dst })
    }

    fn check_domain(&self, u: T, v: T) -> Result<(T, T)> {
        let tol = T::lit(1e-12);
        let d = self.src.d;
        if !(u >= -tol * d && u <= d * (T::one() + tol)) {
            return Err(Error::Domain(format!("u = {} outside [0, {}]", u.as_f64(), d.as_f64())));
        }
        let u = u.max(T::zero()).min(d);
        let h = self.src.altitude(u);
        if !(v >= -tol && v <= h * (T::one() + tol) + tol) {
            return Err(Error::Domain(format!("v = {} outside [0, h(u) = {}]", v.as_f64(), h.as_f64())));
        }
        Ok((u, v.max(T::zero()).min(h)))
    }

    /// Image of `(u, v)`.
    pub fn apply(&self, u: T, v: T) -> Result<(T, T)> {
        let (u, v) = self.check_domain(u, v)?;
        Ok(self.apply_on(u, v, self.src.branch(u)))
    }

    /// The closed-form map on one branch, without domain checks. The formula
    /// extends analytically a little past the pentagon, which finite
    /// differences rely on.
    pub fn apply_on(&self, u: T, v: T, branch: Branch) -> (T, T) {
        if self.identity {
            return (u, v);
        }
        let u1 = atanh(u.tanh() * self.scale);
        let r = self.dst.tanh_altitude_on(u1, branch) / self.src.tanh_altitude_on(u, branch);
        (u1, atanh(v.tanh() * r))
    }

    /// Analytic partial derivatives at `(u, v)` on the given branch.
    pub fn jacobian(&self, u: T, v: T, branch: Branch) -> Jacobian<T> {
        if self.identity {
            return Jacobian { du_du: T::one(), dv_du: T::zero(), dv_dv: T::one() };
        }
        let (u1, v1) = self.apply_on(u, v, branch);
        let (cu, cu1, cv, cv1) = (u.cosh(), u1.cosh(), v.cosh(), v1.cosh());
        let du_du = self.scale * cu1 * cu1 / (cu * cu);
        let r = self.dst.tanh_altitude_on(u1, branch) / self.src.tanh_altitude_on(u, branch);
        let dr = r * (self.dst.log_slope(u1, branch) * du_du - self.src.log_slope(u, branch));
        Jacobian { du_du, dv_du: dr * v.tanh() * cv1 * cv1, dv_dv: r * cv1 * cv1 / (cv * cv) }
    }

    /// Central-difference Jacobian on one branch.
    pub fn jacobian_fd(&self, u: T, v: T, branch: Branch, step: T) -> Jacobian<T> {
        let two = T::lit(2.0);
        let (up, vp) = self.apply_on(u + step, v, branch);
        let (um, vm) = self.apply_on(u - step, v, branch);
        let (_, vvp) = self.apply_on(u, v + step, branch);
        let (_, vvm) = self.apply_on(u, v - step, branch);
        Jacobian { du_du: (up - um) / (two * step), dv_du: (vp - vm) / (two * step), dv_dv: (vvp - vvm) / (two * step) }
    }
}

/// Image of `(u, v)` under the pentagon map from `src` to `dst`.
pub fn pentagon_map<T: Real>(src: &FermiPentagon<T>, dst: &FermiPentagon<T>, u: T, v: T) -> Result<(T, T)> {
    PentagonMap::new(*src, *dst)?.apply(u, v)
}

/// Result of comparing arclength along `alpha` before and after the map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTraceReport<T> {
    pub holds: bool,
    pub samples: usize,
    /// Largest `|tanh a(u) tanh alpha - tanh a'(u') tanh alpha'|`.
    pub identity_residual: T,
    /// Largest `|a(u) - a'(u')|`.
    pub arclength_error: T,
}

/// Checks that the map restricted to `alpha` preserves arclength.
pub fn boundary_trace_check<T: Real>(src: &FermiPentagon<T>, dst: &FermiPentagon<T>) -> BoundaryTraceReport<T> {
    boundary_trace_check_n(src, dst, BOUNDARY_SAMPLES)
}

pub fn boundary_trace_check_n<T: Real>(
    src: &FermiPentagon<T>,
    dst: &FermiPentagon<T>,
    samples: usize,
) -> BoundaryTraceReport<T> {
    let samples = samples.max(2);
    let scale = dst.d.tanh() / src.d.tanh();
    let mut identity = T::zero();
    let mut arc = T::zero();
    let mut finite = true;
    for k in 0..samples {
        let u = src.u0 * T::lit(k as f64 / (samples - 1) as f64);
        let u1 = atanh(u.tanh() * scale);
        let ta = src.c.cosh() * u.tanh();
        let ta1 = dst.c.cosh() * u1.tanh();
        let (a, a1) = (atanh(ta), atanh(ta1));
        finite &= a.is_finite() && a1.is_finite();
        identity = identity.max((ta * src.alpha.tanh() - ta1 * dst.alpha.tanh()).abs());
        arc = arc.max((a - a1).abs());
    }
    let tol = T::lit(TRACE_TOL);
    let holds = finite && identity <= tol && arc <= tol * src.alpha.max(T::one());
    BoundaryTraceReport { holds, samples, identity_residual: identity, arclength_error: arc }
}

/// Grid point where a certified bound is tightest or violated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstPoint<T> {
    pub u: T,
    pub v: T,
    pub what: String,
    pub margin: T,
}

/// Distortion of a pentagon map measured on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport<T> {
    /// Largest eigenvalue of `mu^*(ds'^2)` relative to `ds^2`.
    pub ratio_max: T,
    pub ratio_min: T,
    /// Largest `|dv'/du|`.
    pub cross_max: T,
    pub delta_d: T,
    pub h_bar: T,
    /// `54 e^{2 h_bar} sqrt(delta_d)`.
    pub bound: T,
    /// Smallest slack in each of the four target inequalities, in the order
    /// `(du'/du)^2`, `(dv'/dv)^2`, `(dv'/du)^2`, `cosh^2 v' / cosh^2 v`.
    pub inequality_margins: [T; 4],
    /// Largest jump of `dv'/du` across `u = u0` (one-sided derivatives).
    pub kink_jump: T,
    /// Largest discrepancy between analytic and finite-difference
    /// Jacobians, relative to the Jacobian's size.
    pub fd_rel_err: T,
    pub grid_n: usize,
    pub points: usize,
    pub admissible: bool,
    pub certified: bool,
    pub worst: Option<WorstPoint<T>>,
}

#[derive(Clone, Copy)]
struct PointEval<T> {
    u: T,
    v: T,
    ratio: (T, T),
    cross: T,
    margins: [T; 4],
    fd_err: T,
}

fn evaluate_point<T: Real>(map: &PentagonMap<T>, u: T, v: T, branch: Branch, target: T) -> PointEval<T> {
    let j = map.jacobian(u, v, branch);
    let (_, v1) = map.apply_on(u, v, branch);
    let ratio = metric_ratio_extremes(j.matrix(), v, v1);
    let cosh_ratio = (v1.cosh() / v.cosh()).powi(2);
    let margins = [
        target - (j.du_du * j.du_du - T::one()).abs(),
        target - (j.dv_dv * j.dv_dv - T::one()).abs(),
        target - j.dv_du * j.dv_du,
        target - (cosh_ratio - T::one()).abs(),
    ];
    let fd = map.jacobian_fd(u, v, branch, T::lit(FD_STEP));
    let size = j.du_du.abs().max(j.dv_dv.abs()).max(j.dv_du.abs()).max(T::one());
    let fd_err = (fd.du_du - j.du_du).abs().max((fd.dv_du - j.dv_du).abs()).max((fd.dv_dv - j.dv_dv).abs()) / size;
    PointEval { u, v, ratio, cross: j.dv_du.abs(), margins, fd_err }
}

/// Grid columns `(u, branch)`: uniform in `u`, plus both sides of `u0`.
fn grid_columns<T: Real>(p: &FermiPentagon<T>, n: usize) -> Vec<(T, Branch)> {
    let mut cols: Vec<(T, Branch)> =
        (0..n).map(|i| p.d * T::lit(i as f64 / (n - 1) as f64)).map(|u| (u, p.branch(u))).collect();
    cols.push((p.u0, Branch::Left));
    cols.push((p.u0, Branch::Right));
    cols
}

/// Evaluates the four target inequalities, the quadratic-form distortion and
/// the finite-difference cross-check on an `n x n` grid. Never fails on a
/// violated bound; the outcome is in `certified`.
pub fn evaluate_pentagon_map<T: Real>(
    src: &FermiPentagon<T>,
    dst: &FermiPentagon<T>,
    grid_n: usize,
) -> Result<DistortionReport<T>> {
    let map = PentagonMap::new(*src, *dst)?;
    let n = grid_n.max(2);
    let dd = delta_d(src, dst);
    let hb = h_bar(src, dst);
    let bound = pentagon_delta0(src, dst);
    let target = bound * bound / T::lit(9.0);
    let cols = grid_columns(src, n);
    let evals: Vec<PointEval<T>> = cols
        .par_iter()
        .flat_map_iter(|&(u, branch)| {
            let h = src.altitude_on(u, branch);
            (0..n).map(move |j| (u, h * T::lit(j as f64 / (n - 1) as f64), branch))
        })
        .map(|(u, v, branch)| evaluate_point(&map, u, v, branch, target))
        .collect();

    let tol = T::lit(CERT_TOL);
    let mut ratio_max = T::neg_infinity();
    let mut ratio_min = T::infinity();
    let mut cross_max = T::zero();
    let mut fd_rel_err = T::zero();
    let mut margins = [T::infinity(); 4];
    let mut worst: Option<WorstPoint<T>> = None;
    let names = ["(du'/du)^2", "(dv'/dv)^2", "(dv'/du)^2", "cosh^2 v'/cosh^2 v"];
    let mut consider = |u: T, v: T, what: &str, margin: T| {
        if worst.as_ref().is_none_or(|w| margin < w.margin) {
            worst = Some(WorstPoint { u, v, what: what.to_string(), margin });
        }
    };
    for e in &evals {
        ratio_max = ratio_max.max(e.ratio.1);
        ratio_min = ratio_min.min(e.ratio.0);
        cross_max = cross_max.max(e.cross);
        fd_rel_err = fd_rel_err.max(e.fd_err);
        for k in 0..4 {
            margins[k] = margins[k].min(e.margins[k]);
            consider(e.u, e.v, names[k], e.margins[k]);
        }
        consider(e.u, e.v, "ratio_max <= 1 + delta0", T::one() + bound - e.ratio.1);
        consider(e.u, e.v, "ratio_min >= 1 - delta0", e.ratio.0 - (T::one() - bound));
        consider(e.u, e.v, "|dv'/du| <= delta0/3", bound / T::lit(3.0) - e.cross);
    }
    // The last two columns sit on either side of u0.
    let left = &evals[n * n..n * n + n];
    let right = &evals[n * n + n..];
    let mut kink_jump = T::zero();
    for (l, r) in left.iter().zip(right) {
        let jl = map.jacobian(l.u, l.v, Branch::Left).dv_du;
        let jr = map.jacobian(r.u, r.v, Branch::Right).dv_du;
        kink_jump = kink_jump.max((jl - jr).abs());
    }
    let admissible = bound <= T::one();
    let certified = admissible && worst.as_ref().is_none_or(|w| w.margin >= -tol);
    Ok(DistortionReport {
        ratio_max,
        ratio_min,
        cross_max,
        delta_d: dd,
        h_bar: hb,
        bound,
        inequality_margins: margins,
        kink_jump,
        fd_rel_err,
        grid_n: n,
        points: evals.len(),
        admissible,
        certified,
        worst,
    })
}

/// Certifies the pentagon map on an `n x n` grid.
pub fn certify_pentagon_map<T: Real>(
    src: &FermiPentagon<T>,
    dst: &FermiPentagon<T>,
    grid_n: usize,
) -> Result<DistortionReport<T>> {
    let bound = pentagon_delta0(src, dst);
    if !(bound <= T::one()) {
        return Err(Error::AdmissibilityFailed(format!(
            "54 e^(2 h_bar) sqrt(delta_d) = {} exceeds 1 (delta_d = {:e}, h_bar = {})",
            bound.as_f64(),
            delta_d(src, dst).as_f64(),
            h_bar(src, dst).as_f64()
        )));
    }
    let report = evaluate_pentagon_map(src, dst, grid_n)?;
    if !report.certified {
        let w = report.worst.clone().expect("a grid has points");
        return Err(Error::CertificationFailed {
            u: w.u.as_f64(),
            v: w.v.as_f64(),
            what: w.what,
            margin: w.margin.as_f64(),
        });
    }
    Ok(report)
}

/// Heatmap samples `(u, v, largest metric ratio)` over the pentagon grid.
pub fn distortion_samples<T: Real>(
    src: &FermiPentagon<T>,
    dst: &FermiPentagon<T>,
    grid_n: usize,
) -> Result<Vec<(T, T, T)>> {
    let map = PentagonMap::new(*src, *dst)?;
    let n = grid_n.max(2);
    Ok((0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let u = src.d * T::lit(i as f64 / (n - 1) as f64);
            let branch = src.branch(u);
            let h = src.altitude_on(u, branch);
            (0..n).map(move |j| {
                let v = h * T::lit(j as f64 / (n - 1) as f64);
                let (_, v1) = map.apply_on(u, v, branch);
                (u, v, metric_ratio_extremes(map.jacobian(u, v, branch).matrix(), v, v1).1)
            })
        })
        .collect())
}

/// One intermediate inequality `lo <= observed <= hi` checked over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck<T> {
    pub name: String,
    /// Largest `delta_d` for which the inequality is asserted.
    pub delta_max: T,
    pub applicable: bool,
    pub lo: T,
    pub hi: T,
    pub observed_min: T,
    pub observed_max: T,
    pub holds: bool,
}

struct Range<T> {
    min: T,
    max: T,
}

impl<T: Real> Range<T> {
    fn new() -> Self {
        Range { min: T::infinity(), max: T::neg_infinity() }
    }
    fn add(&mut self, x: T) {
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }
}

/// The intermediate ratio bounds that the distortion estimate is built
/// from, each evaluated on a grid and marked applicable when `delta_d` meets
/// its own threshold. Inapplicable checks are still evaluated and reported.
pub fn intermediate_bounds<T: Real>(
    src: &FermiPentagon<T>,
    dst: &FermiPentagon<T>,
    grid_n: usize,
) -> Result<Vec<BoundCheck<T>>> {
    let map = PentagonMap::new(*src, *dst)?;
    let n = grid_n.max(2);
    let dd = delta_d(src, dst);
    let one = T::one();
    let lit = T::lit;

    let mut cosh_u = Range::new();
    let mut tanh_rest = Range::new();
    let mut cosh_rest = Range::new();
    let mut tanh_h = Range::new();
    let mut cosh_h = Range::new();
    let mut cosh_v = Range::new();
    let mut du2 = Range::new();
    let mut dv2 = Range::new();
    let mut cross = Range::new();
    let mut cosh2_v = Range::new();
    for (u, branch) in grid_columns(src, n) {
        let (u1, _) = map.apply_on(u, T::zero(), branch);
        cosh_u.add(u1.cosh() / u.cosh());
        if u < src.d {
            tanh_rest.add((dst.d - u1).tanh() / (src.d - u).tanh());
        }
        cosh_rest.add((dst.d - u1).cosh() / (src.d - u).cosh());
        let (h, h1) = (src.altitude_on(u, branch), dst.altitude_on(u1, branch));
        tanh_h.add(h1.tanh() / h.tanh());
        cosh_h.add(h1.cosh() / h.cosh());
        for j in 0..n {
            let v = h * lit(j as f64 / (n - 1) as f64);
            let (_, v1) = map.apply_on(u, v, branch);
            let jac = map.jacobian(u, v, branch);
            cosh_v.add(v1.cosh() / v.cosh());
            du2.add(jac.du_du * jac.du_du);
            dv2.add(jac.dv_dv * jac.dv_dv);
            cross.add(jac.dv_du.abs());
            cosh2_v.add((v1.cosh() / v.cosh()).powi(2));
        }
    }
    let e2h = (lit(2.0) * h_bar(src, dst)).exp();
    let sq = |k: f64| k * k / 9.0;
    let make = |name: &str, delta_max: f64, lo: T, hi: T, r: &Range<T>| {
        let applicable = dd <= lit(delta_max);
        BoundCheck {
            name: name.to_string(),
            delta_max: lit(delta_max),
            applicable,
            lo,
            hi,
            observed_min: r.min,
            observed_max: r.max,
            holds: r.min >= lo - lit(CERT_TOL) && r.max <= hi + lit(CERT_TOL),
        }
    };
    let single = |x: T| Range { min: x, max: x };
    let inf = f64::INFINITY;
    Ok(vec![
        make("tanh d'/tanh d", inf, one - dd, one + dd, &single(dst.d.tanh() / src.d.tanh())),
        make("cosh d'/cosh d", inf, one - dd, one + dd, &single(dst.d.cosh() / src.d.cosh())),
        make("cosh u'/cosh u", 1.0, one - dd, one + dd, &cosh_u),
        make("tanh(d'-u')/tanh(d-u)", 1.0, one - lit(2.0) * dd, one + lit(3.0) * dd, &tanh_rest),
        make("cosh(d'-u')/cosh(d-u)", 1.0, one - dd, one + dd, &cosh_rest),
        make("sinh c'/sinh c", 0.5, one - dd, one + lit(2.0) * dd, &single(dst.c.sinh() / src.c.sinh())),
        make(
            "sinh gamma'/sinh gamma",
            0.5,
            one - dd,
            one + lit(2.0) * dd,
            &single(dst.gamma.sinh() / src.gamma.sinh()),
        ),
        make("tanh h'/tanh h", 0.5, one - lit(2.0) * dd, one + lit(4.0) * dd, &tanh_h),
        make("cosh h'/cosh h", 0.2, one - lit(3.0) * dd, one + lit(7.0) * dd, &cosh_h),
        make("cosh v'/cosh v", 0.2, one - lit(3.0) * dd, one + lit(7.0) * dd, &cosh_v),
        make(
            "(du'/du)^2 with delta0 = 10 sqrt(delta_d)",
            1.0 / 15.0,
            one - lit(sq(10.0)) * dd,
            one + lit(sq(10.0)) * dd,
            &du2,
        ),
        make(
            "(dv'/dv)^2 with delta0 = 21 sqrt(delta_d)",
            1.0 / 735.0,
            one - lit(sq(21.0)) * dd,
            one + lit(sq(21.0)) * dd,
            &dv2,
        ),
        make("|dv'/du| <= 18 e^(2 h_bar) delta_d", 1.0 / 15.0, T::zero(), lit(18.0) * e2h * dd, &cross),
        make(
            "cosh^2 v'/cosh^2 v with delta0 = 12 sqrt(delta_d)",
            1.0 / 49.0,
            one - lit(sq(12.0)) * dd,
            one + lit(sq(12.0)) * dd,
            &cosh2_v,
        ),
    ])
}

/// Random pentagon pair with `delta_d` exactly `delta` (either sign of the
/// perturbation) and both maximal altitudes at most `h_max`.
pub fn sample_pentagon_pair<R: rand::Rng>(
    rng: &mut R,
    delta: f64,
    h_max: f64,
) -> Result<(FermiPentagon<f64>, FermiPentagon<f64>)> {
    for _ in 0..10_000 {
        let alpha = rng.gen_range(0.8..3.0);
        let d = alpha + rng.gen_range(0.3..3.0);
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let p = FermiPentagon::from_alpha_d(alpha, d)?;
        let q = p.perturbed(sign * delta)?;
        if h_bar(&p, &q) <= h_max {
            return Ok((p, q));
        }
    }
    Err(Error::SearchExhausted(format!("no pentagon pair with h_bar <= {h_max}")))
}

// ---------------------------------------------------------------------------
// Hexagons
// ---------------------------------------------------------------------------

/// Right-angled hexagon with alternating sides `alpha, beta, gamma`, split by
/// the perpendicular `d` from `gamma` to the opposite side into two pentagons.
///
/// Points use a single Fermi chart along `d`: `u` from the far side
/// (`u = 0`) to `gamma` (`u = d`), `v > 0` towards `alpha`, `v < 0` towards
/// `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FermiHexagon<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub d: T,
    pub half_alpha: FermiPentagon<T>,
    pub half_beta: FermiPentagon<T>,
}

/// Hexagon with alternating sides `alpha, beta, gamma`.
pub fn fermi_hexagon<T: Real>(alpha: T, beta: T, gamma: T) -> Result<FermiHexagon<T>> {
    let hex = hexagon_solve(alpha, beta, gamma)?;
    let d = hex.d;
    let half_alpha = FermiPentagon::from_alpha_d(alpha, d)?;
    let half_beta = FermiPentagon::from_alpha_d(beta, d)?;
    let tol = T::lit(1e-9);
    // The pentagon pieces of gamma and of the opposite side must add up.
    if rel_err(half_alpha.gamma + half_beta.gamma, gamma, T::one()) > tol
        || rel_err(half_alpha.c + half_beta.c, hex.gamma, T::one()) > tol
    {
        return Err(Error::GeometryInconsistent(format!(
            "pentagon halves do not tile the hexagon ({}, {}, {})",
            alpha.as_f64(),
            beta.as_f64(),
            gamma.as_f64()
        )));
    }
    Ok(FermiHexagon { alpha, beta, gamma, d, half_alpha, half_beta })
}

impl<T: Real> FermiHexagon<T> {
    /// Whether `(u, v)` lies in the hexagon.
    pub fn contains(&self, u: T, v: T) -> bool {
        if !(u >= T::zero() && u <= self.d) {
            return false;
        }
        let half = if v >= T::zero() { &self.half_alpha } else { &self.half_beta };
        v.abs() <= half.altitude(u)
    }
}

/// Admissibility data of a hexagon map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HexagonAdmissibility<T> {
    pub ell: T,
    /// `|gamma / gamma' - 1|`.
    pub delta_gamma: T,
    pub delta_d: T,
    /// `1350 e^{5 ell} sqrt(delta_gamma)`.
    pub constant: T,
}

/// The map between two hexagons with the same `alpha` and `beta`, defined
/// piecewise by the pentagon maps on the two halves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HexagonMap<T> {
    pub src: FermiHexagon<T>,
    pub dst: FermiHexagon<T>,
    pub alpha_map: PentagonMap<T>,
    pub beta_map: PentagonMap<T>,
}

impl<T: Real> HexagonMap<T> {
    /// Builds the map without any admissibility check beyond equal `alpha`
    /// and `beta`.
    pub fn unchecked(src: FermiHexagon<T>, dst: FermiHexagon<T>) -> Result<Self> {
        if rel_err(src.beta, dst.beta, T::min_positive_value()) > T::lit(1e-12) {
            return Err(Error::PreconditionUnmet("hexagon map needs equal beta".into()));
        }
        Ok(HexagonMap {
            src,
            dst,
            alpha_map: PentagonMap::new(src.half_alpha, dst.half_alpha)?,
            beta_map: PentagonMap::new(src.half_beta, dst.half_beta)?,
        })
    }

    /// Builds the map after checking `alpha, beta >= arcsinh 1`,
    /// `gamma, gamma' <= ell` and `1350 e^{5 ell} sqrt(delta_gamma) <= 1`.
    pub fn new(src: FermiHexagon<T>, dst: FermiHexagon<T>, ell: T) -> Result<Self> {
        let map = Self::unchecked(src, dst)?;
        let adm = map.admissibility(ell);
        let floor = asinh(T::one()) * (T::one() - T::lit(1e-12));
        if src.alpha < floor || src.beta < floor {
            return Err(Error::AdmissibilityFailed(format!(
                "alpha = {}, beta = {} must be at least arcsinh 1",
                src.alpha.as_f64(),
                src.beta.as_f64()
            )));
        }
        if src.gamma > ell || dst.gamma > ell {
            return Err(Error::AdmissibilityFailed(format!(
                "gamma = {}, gamma' = {} exceed ell = {}",
                src.gamma.as_f64(),
                dst.gamma.as_f64(),
                ell.as_f64()
            )));
        }
        if !(adm.constant <= T::one()) {
            return Err(Error::AdmissibilityFailed(format!(
                "1350 e^(5 ell) sqrt(delta_gamma) = {} exceeds 1",
                adm.constant.as_f64()
            )));
        }
        Ok(map)
    }

    pub fn admissibility(&self, ell: T) -> HexagonAdmissibility<T> {
        let delta_gamma = (self.src.gamma / self.dst.gamma - T::one()).abs();
        HexagonAdmissibility {
            ell,
            delta_gamma,
            delta_d: (self.dst.d.sinh() / self.src.d.sinh() - T::one()).abs(),
            constant: T::lit(1350.0) * (T::lit(5.0) * ell).exp() * delta_gamma.sqrt(),
        }
    }

    /// Image of `(u, v)` in the signed chart.
    pub fn apply(&self, u: T, v: T) -> Result<(T, T)> {
        if v >= T::zero() {
            self.alpha_map.apply(u, v)
        } else {
            let (u1, v1) = self.beta_map.apply(u, -v)?;
            Ok((u1, -v1))
        }
    }

    /// Distortion reports for the `alpha` and `beta` halves.
    pub fn distortion(&self, grid_n: usize) -> Result<[DistortionReport<T>; 2]> {
        Ok([
            evaluate_pentagon_map(&self.src.half_alpha, &self.dst.half_alpha, grid_n)?,
            evaluate_pentagon_map(&self.src.half_beta, &self.dst.half_beta, grid_n)?,
        ])
    }
}

/// Image of `(u, v)` under the admissible hexagon map from `src` to `dst`.
pub fn hexagon_map<T: Real>(src: &FermiHexagon<T>, dst: &FermiHexagon<T>, ell: T, u: T, v: T) -> Result<(T, T)> {
    HexagonMap::new(*src, *dst, ell)?.apply(u, v)
}

// ---------------------------------------------------------------------------
// Pants
// ---------------------------------------------------------------------------

/// Pair of pants given by its three boundary lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pants<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
}

impl<T: Real> Pants<T> {
    pub fn new(alpha: T, beta: T, gamma: T) -> Result<Self> {
        positive("alpha", alpha)?;
        positive("beta", beta)?;
        positive("gamma", gamma)?;
        Ok(Pants { alpha, beta, gamma })
    }

    /// Either of the two isometric hexagons cut out by the seams.
    pub fn hexagon(&self) -> Result<FermiHexagon<T>> {
        let two = T::lit(2.0);
        fermi_hexagon(self.alpha / two, self.beta / two, self.gamma / two)
    }
}

/// Point of a pants: which of the two hexagons, and signed Fermi coordinates
/// in it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PantsPoint<T> {
    pub sheet: u8,
    pub u: T,
    pub v: T,
}

/// Distortion of a pants map over both pentagon types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PantsDistortion<T> {
    pub delta: T,
    pub ratio_max: T,
    pub ratio_min: T,
    /// `max(ratio_max - 1, 1 - ratio_min) / sqrt(delta)`.
    pub measured_constant: T,
    /// Largest `54 e^{2 h_bar} sqrt(delta_d) / sqrt(delta)` over the halves.
    pub certified_constant: T,
    /// `450 e^{5 ell}`.
    pub admissibility_constant: T,
    pub halves: [DistortionReport<T>; 2],
}

/// The map between two pants with equal `alpha` and `beta` boundaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PantsMap<T> {
    pub src: Pants<T>,
    pub dst: Pants<T>,
    pub ell: T,
    pub delta: T,
    pub hexagons: HexagonMap<T>,
}

impl<T: Real> PantsMap<T> {
    /// Checks `alpha, beta >= 2 arcsinh 1`, `gamma, gamma' <= ell`,
    /// `450 e^{5 ell} sqrt(delta) <= 1`, and that every pentagon piece
    /// satisfies `54 e^{2 h_bar} sqrt(delta_d) <= 1`.
    pub fn new(src: Pants<T>, dst: Pants<T>, ell: T) -> Result<Self> {
        let tol = T::lit(1e-12);
        if rel_err(src.alpha, dst.alpha, T::min_positive_value()) > tol
            || rel_err(src.beta, dst.beta, T::min_positive_value()) > tol
        {
            return Err(Error::PreconditionUnmet("pants map needs equal alpha and beta".into()));
        }
        let floor = T::lit(2.0) * asinh(T::one()) * (T::one() - tol);
        if src.alpha < floor || src.beta < floor {
            return Err(Error::AdmissibilityFailed(format!(
                "alpha = {}, beta = {} must be at least 2 arcsinh 1",
                src.alpha.as_f64(),
                src.beta.as_f64()
            )));
        }
        if src.gamma > ell || dst.gamma > ell {
            return Err(Error::AdmissibilityFailed(format!(
                "gamma = {}, gamma' = {} exceed ell = {}",
                src.gamma.as_f64(),
                dst.gamma.as_f64(),
                ell.as_f64()
            )));
        }
        let delta = (src.gamma / dst.gamma - T::one()).abs();
        let constant = T::lit(450.0) * (T::lit(5.0) * ell).exp() * delta.sqrt();
        if !(constant <= T::one()) {
            return Err(Error::AdmissibilityFailed(format!(
                "450 e^(5 ell) sqrt(delta) = {} exceeds 1",
                constant.as_f64()
            )));
        }
        let hexagons = HexagonMap::unchecked(src.hexagon()?, dst.hexagon()?)?;
        for (name, m) in [("alpha", &hexagons.alpha_map), ("beta", &hexagons.beta_map)] {
            let b = pentagon_delta0(&m.src, &m.dst);
            if !(b <= T::one()) {
                return Err(Error::AdmissibilityFailed(format!(
                    "{name} pentagon: 54 e^(2 h_bar) sqrt(delta_d) = {} exceeds 1",
                    b.as_f64()
                )));
            }
        }
        Ok(PantsMap { src, dst, ell, delta, hexagons })
    }

    pub fn apply(&self, p: PantsPoint<T>) -> Result<PantsPoint<T>> {
        if p.sheet > 1 {
            return Err(Error::Domain(format!("sheet {} is not 0 or 1", p.sheet)));
        }
        let (u, v) = self.hexagons.apply(p.u, p.v)?;
        Ok(PantsPoint { sheet: p.sheet, u, v })
    }

    /// Largest change of arclength along the `alpha` and `beta` boundaries
    /// over `samples` points per side and sheet, with the largest distance of
    /// the images from the target boundary.
    pub fn boundary_identity_error(&self, samples: usize) -> Result<T> {
        let samples = samples.max(2);
        let mut worst = T::zero();
        for sheet in 0..2u8 {
            for (sign, src, dst) in [
                (T::one(), &self.hexagons.src.half_alpha, &self.hexagons.dst.half_alpha),
                (-T::one(), &self.hexagons.src.half_beta, &self.hexagons.dst.half_beta),
            ] {
                for k in 0..samples {
                    let u = src.u0 * T::lit(k as f64 / (samples - 1) as f64);
                    let v = sign * src.altitude_on(u, Branch::Left);
                    let q = self.apply(PantsPoint { sheet, u, v })?;
                    let on_side = (q.v.abs() - dst.altitude_on(q.u, Branch::Left)).abs();
                    let arc = (dst.alpha_arclength(q.u) - src.alpha_arclength(u)).abs();
                    worst = worst.max(arc).max(on_side);
                }
            }
        }
        Ok(worst)
    }

    pub fn distortion(&self, grid_n: usize) -> Result<PantsDistortion<T>> {
        let halves = self.hexagons.distortion(grid_n)?;
        let ratio_max = halves[0].ratio_max.max(halves[1].ratio_max);
        let ratio_min = halves[0].ratio_min.min(halves[1].ratio_min);
        let root = self.delta.sqrt();
        let per = |x: T| if root > T::zero() { x / root } else { T::zero() };
        Ok(PantsDistortion {
            delta: self.delta,
            ratio_max,
            ratio_min,
            measured_constant: per((ratio_max - T::one()).max(T::one() - ratio_min)),
            certified_constant: per(halves[0].bound.max(halves[1].bound)),
            admissibility_constant: T::lit(450.0) * (T::lit(5.0) * self.ell).exp(),
            halves,
        })
    }
}

/// Image of a point under the admissible pants map from `src` to `dst`.
pub fn pants_map<T: Real>(src: &Pants<T>, dst: &Pants<T>, ell: T, p: PantsPoint<T>) -> Result<PantsPoint<T>> {
    PantsMap::new(*src, *dst, ell)?.apply(p)
}

// ---------------------------------------------------------------------------
// Bi-Lipschitz estimates
// ---------------------------------------------------------------------------

/// Region of a Fermi chart sampled by [`lipschitz_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FermiDomain<T> {
    Strip { u: (T, T), v: (T, T) },
    Pentagon(FermiPentagon<T>),
}

/// Extremes of the singular values of a map's differential, measured in the
/// Fermi metric on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate<T> {
    pub k_upper: T,
    pub k_lower: T,
    /// Largest change of either singular value between neighbouring grid
    /// points; the true extremes lie within this of the grid extremes.
    pub mesh_modulus: T,
    pub grid_n: usize,
}

impl<T: Real> LipschitzEstimate<T> {
    pub fn upper_bound(&self) -> T {
        self.k_upper + self.mesh_modulus
    }
    pub fn lower_bound(&self) -> T {
        self.k_lower - self.mesh_modulus
    }
}

/// Singular-value extremes of `map` over the domain, using central finite
/// differences with step `1e-5`. The map is evaluated slightly outside the
/// domain and should extend smoothly there.
pub fn lipschitz_estimate<T, F>(map: F, domain: &FermiDomain<T>, grid_n: usize) -> LipschitzEstimate<T>
where
    T: Real,
    F: Fn(T, T) -> (T, T) + Sync,
{
    let h = T::lit(FD_STEP);
    let two = T::lit(2.0);
    lipschitz_estimate_with(
        |u, v| {
            let (up, vp) = map(u + h, v);
            let (um, vm) = map(u - h, v);
            let (uvp, vvp) = map(u, v + h);
            let (uvm, vvm) = map(u, v - h);
            let j =
                [[(up - um) / (two * h), (uvp - uvm) / (two * h)], [(vp - vm) / (two * h), (vvp - vvm) / (two * h)]];
            (j, map(u, v).1)
        },
        domain,
        grid_n,
    )
}

/// As [`lipschitz_estimate`], with the Jacobian (rows `u'`, `v'`) and the
/// image height `v'` supplied by the caller.
pub fn lipschitz_estimate_with<T, F>(jac: F, domain: &FermiDomain<T>, grid_n: usize) -> LipschitzEstimate<T>
where
    T: Real,
    F: Fn(T, T) -> ([[T; 2]; 2], T) + Sync,
{
    let n = grid_n.max(2);
    let frac = |k: usize| T::lit(k as f64 / (n - 1) as f64);
    let point = |i: usize, j: usize| -> (T, T) {
        match domain {
            FermiDomain::Strip { u, v } => (u.0 + (u.1 - u.0) * frac(i), v.0 + (v.1 - v.0) * frac(j)),
            FermiDomain::Pentagon(p) => {
                let u = p.d * frac(i);
                (u, p.altitude(u) * frac(j))
            }
        }
    };
    let sv: Vec<(T, T)> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (u, v) = point(k / n, k % n);
            let (j, v1) = jac(u, v);
            let (lo, hi) = metric_ratio_extremes(j, v, v1);
            (lo.max(T::zero()).sqrt(), hi.sqrt())
        })
        .collect();
    let mut k_upper = T::neg_infinity();
    let mut k_lower = T::infinity();
    let mut modulus = T::zero();
    for i in 0..n {
        for j in 0..n {
            let (lo, hi) = sv[i * n + j];
            k_upper = k_upper.max(hi);
            k_lower = k_lower.min(lo);
            for (a, b) in [(i + 1, j), (i, j + 1)] {
                if a < n && b < n {
                    let (lo2, hi2) = sv[a * n + b];
                    modulus = modulus.max((hi2 - hi).abs()).max((lo2 - lo).abs());
                }
            }
        }
    }
    LipschitzEstimate { k_upper, k_lower, mesh_modulus: modulus, grid_n: n }
}
