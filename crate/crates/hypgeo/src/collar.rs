//! Fourier-mode analysis of Laplace eigenfunctions on collars.
//!
//! In collar coordinates the metric is `dρ² + ℓ² cosh²ρ dt²`. The `j`-th
//! Fourier coefficient of an eigenfunction with eigenvalue `λ`, multiplied by
//! `√cosh ρ`, solves `u'' = q(ρ) u` with
//! `q(ρ) = 1/4 − λ + (1/4 + 4π²j²/ℓ²) / cosh²ρ`.
//! The odd solution `φ` (φ(0) = 0, φ'(0) = 1) and the even solution `ψ`
//! (ψ(0) = 1, ψ'(0) = 0) span the solution space.
//!
//! Solutions grow roughly like `exp(∫√q)`, which overflows `f64` for high
//! modes on thin collars, so each solution is stored with its own running log
//! scale and all masses are accumulated in log space.

use crate::error::{Error, Result};
use crate::ode::{dopri5, Tolerances};
use crate::quad::adaptive_simpson;
use crate::scalar::Real;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Tolerance on the relative Wronskian drift accepted by [`solve_mode`].
pub const WRONSKIAN_TOL: f64 = 1e-8;
/// Slack allowed when comparing a measured mass ratio with its bound.
pub const BOUND_SLACK: f64 = 1e-8;
const RESCALE: f64 = 1e64;
const QUAD_AGREEMENT: f64 = 1e-9;

/// Boundary behaviour of the collar's core geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    /// The geodesic is interior; the collar is two-sided.
    Interior,
    Neumann,
    Dirichlet,
}

/// Which member of the fundamental pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fundamental {
    Phi,
    Psi,
}

impl Fundamental {
    fn slot(self) -> usize {
        match self {
            Fundamental::Phi => 0,
            Fundamental::Psi => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeOdeParams<T> {
    pub lambda: T,
    pub j: u32,
    pub ell: T,
}

impl<T: Real> ModeOdeParams<T> {
    pub fn new(lambda: T, j: u32, ell: T) -> Result<Self> {
        if !(ell > T::zero() && ell.is_finite()) {
            return Err(Error::Domain(format!("collar length must be positive, got {ell}")));
        }
        if !(lambda >= T::zero() && lambda.is_finite()) {
            return Err(Error::Domain(format!("eigenvalue must be non-negative, got {lambda}")));
        }
        Ok(ModeOdeParams { lambda, j, ell })
    }

    /// Angular term `4π²j²/ℓ²`.
    pub fn angular(&self) -> T {
        let j = T::lit(self.j as f64);
        T::lit(4.0) * T::PI() * T::PI() * j * j / (self.ell * self.ell)
    }

    /// `q(ρ)` in `u'' = q u`.
    pub fn potential(&self, rho: T) -> T {
        let c = rho.cosh();
        T::lit(0.25) - self.lambda + (T::lit(0.25) + self.angular()) / (c * c)
    }
}

/// One accepted integrator step: scaled `(φ, φ', ψ, ψ')` and the log scale of
/// each solution, so that `φ = state[0] * exp(log_scale[0])`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeNode<T> {
    pub rho: T,
    pub state: [T; 4],
    pub log_scale: [T; 2],
}

/// Fundamental pair on `[0, w_max]` (or `[w_max, 0]` when integrated
/// backwards), with quintic Hermite dense output between nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSolutionPair<T> {
    pub params: ModeOdeParams<T>,
    /// Signed end of the integration range.
    pub w_max: T,
    pub nodes: Vec<ModeNode<T>>,
    /// Largest relative deviation of the Wronskian from −1 over the nodes.
    pub wronskian_drift: T,
}

/// Solves for `(φ_j, ψ_j)` on `[0, w_max]`. For `λ ≤ 1/4` both solutions
/// are checked to stay positive.
pub fn solve_mode<T: Real>(params: &ModeOdeParams<T>, w_max: T) -> Result<ModeSolutionPair<T>> {
    if !(w_max > T::zero() && w_max.is_finite()) {
        return Err(Error::Domain(format!("horizon must be positive, got {w_max}")));
    }
    solve_mode_towards(params, w_max)
}

/// Like [`solve_mode`] but `end` may be negative, integrating towards `-∞`.
pub fn solve_mode_towards<T: Real>(params: &ModeOdeParams<T>, end: T) -> Result<ModeSolutionPair<T>> {
    if !end.is_finite() || end == T::zero() {
        return Err(Error::Domain(format!("integration end must be finite and nonzero, got {end}")));
    }
    let p = *params;
    let y0 = [T::zero(), T::one(), T::one(), T::zero()];
    let mut nodes = vec![ModeNode { rho: T::zero(), state: y0, log_scale: [T::zero(); 2] }];
    let mut ls = [T::zero(); 2];
    let rescale = T::lit(RESCALE);
    dopri5(
        |rho, y: &[T; 4]| {
            let q = p.potential(rho);
            [y[1], q * y[0], y[3], q * y[2]]
        },
        T::zero(),
        y0,
        end,
        &Tolerances::default(),
        |rho, y| {
            let mut changed = false;
            for s in 0..2 {
                let m = y[2 * s].abs().max(y[2 * s + 1].abs());
                if m > rescale {
                    y[2 * s] = y[2 * s] / m;
                    y[2 * s + 1] = y[2 * s + 1] / m;
                    ls[s] = ls[s] + m.ln();
                    changed = true;
                }
            }
            nodes.push(ModeNode { rho, state: *y, log_scale: ls });
            changed
        },
    )?;

    let sign = end.signum();
    // With lambda <= 1/4 the potential is positive, so neither solution can
    // turn over; above that the solutions oscillate.
    let check_sign = p.lambda <= T::lit(0.25);
    let mut drift = T::zero();
    for n in &nodes[1..] {
        if check_sign && !(n.state[0] * sign > T::zero() && n.state[2] > T::zero()) {
            return Err(Error::IntegrationFailure(format!(
                "fundamental solution lost its sign at rho = {}",
                n.rho.as_f64()
            )));
        }
        drift = drift.max(node_drift(n));
    }
    if drift > T::lit(WRONSKIAN_TOL) {
        return Err(Error::IntegrationFailure(format!("Wronskian drift {} exceeds {WRONSKIAN_TOL}", drift.as_f64())));
    }
    Ok(ModeSolutionPair { params: p, w_max: end, nodes, wronskian_drift: drift })
}

/// `|W + 1|` relative to the size of the two products forming `W`.
fn node_drift<T: Real>(n: &ModeNode<T>) -> T {
    let [p, dp, s, ds] = n.state;
    let e = (-(n.log_scale[0] + n.log_scale[1])).exp();
    let w = p * ds - s * dp;
    (w + e).abs() / e.max((p * ds).abs() + (s * dp).abs())
}

/// Solves many modes in parallel.
pub fn solve_modes<T: Real>(params: &[ModeOdeParams<T>], w_max: T) -> Vec<Result<ModeSolutionPair<T>>> {
    params.par_iter().map(|p| solve_mode(p, w_max)).collect()
}

/// Quintic Hermite interpolation from values and first two derivatives at
/// both ends of a step of signed length `h`. Returns value and derivative.
#[allow(clippy::too_many_arguments)]
fn hermite5<T: Real>(h: T, t: T, p0: T, d0: T, s0: T, p1: T, d1: T, s1: T) -> (T, T) {
    let l = T::lit;
    let (t2, t3, t4, t5) = (t * t, t * t * t, t * t * t * t, t * t * t * t * t);
    let h0 = T::one() - l(10.0) * t3 + l(15.0) * t4 - l(6.0) * t5;
    let h1 = t - l(6.0) * t3 + l(8.0) * t4 - l(3.0) * t5;
    let h2 = (t2 - l(3.0) * t3 + l(3.0) * t4 - t5) / l(2.0);
    let h3 = (t3 - l(2.0) * t4 + t5) / l(2.0);
    let h4 = -l(4.0) * t3 + l(7.0) * t4 - l(3.0) * t5;
    let h5 = l(10.0) * t3 - l(15.0) * t4 + l(6.0) * t5;
    let g0 = -l(30.0) * t2 + l(60.0) * t3 - l(30.0) * t4;
    let g1 = T::one() - l(18.0) * t2 + l(32.0) * t3 - l(15.0) * t4;
    let g2 = (l(2.0) * t - l(9.0) * t2 + l(12.0) * t3 - l(5.0) * t4) / l(2.0);
    let g3 = (l(3.0) * t2 - l(8.0) * t3 + l(5.0) * t4) / l(2.0);
    let g4 = -l(12.0) * t2 + l(28.0) * t3 - l(15.0) * t4;
    let g5 = -g0;
    let hh = h * h;
    let v = h0 * p0 + h * h1 * d0 + hh * h2 * s0 + hh * h3 * s1 + h * h4 * d1 + h5 * p1;
    let dv = (g0 * p0 + h * g1 * d0 + hh * g2 * s0 + hh * g3 * s1 + h * g4 * d1 + g5 * p1) / h;
    (v, dv)
}

/// Running sum of `m * exp(ls)` terms without overflow.
#[derive(Debug, Clone, Copy)]
struct LogSum<T> {
    m: T,
    ls: T,
}

impl<T: Real> LogSum<T> {
    fn new() -> Self {
        LogSum { m: T::zero(), ls: T::neg_infinity() }
    }

    fn add(&mut self, m: T, ls: T) {
        if m == T::zero() {
            return;
        }
        if self.m == T::zero() {
            *self = LogSum { m, ls };
        } else if ls > self.ls {
            self.m = self.m * (self.ls - ls).exp() + m;
            self.ls = ls;
        } else {
            self.m = self.m + m * (ls - self.ls).exp();
        }
    }

    fn ln(&self) -> T {
        self.m.ln() + self.ls
    }
}

impl<T: Real> ModeSolutionPair<T> {
    /// Absolute horizon.
    pub fn horizon(&self) -> T {
        self.w_max.abs()
    }

    fn check_reach(&self, rho: T) -> Result<()> {
        let inside = if self.w_max > T::zero() {
            rho >= T::zero() && rho <= self.w_max
        } else {
            rho <= T::zero() && rho >= self.w_max
        };
        if inside {
            Ok(())
        } else {
            Err(Error::HorizonTooShort { needed: rho.as_f64(), have: self.w_max.as_f64() })
        }
    }

    /// Index `k` of the step `[nodes[k], nodes[k+1]]` containing `rho`.
    fn step_index(&self, rho: T) -> usize {
        let a = rho.abs();
        let k = self.nodes.partition_point(|n| n.rho.abs() <= a);
        k.saturating_sub(1).min(self.nodes.len().saturating_sub(2))
    }

    /// Scaled value and derivative of `which` at `rho` inside step `k`,
    /// expressed in the log scale of `nodes[k]`.
    fn scaled_in_step(&self, which: Fundamental, k: usize, rho: T) -> (T, T, T) {
        let s = which.slot();
        let (a, b) = (&self.nodes[k], &self.nodes[k + 1]);
        let h = b.rho - a.rho;
        let ls = a.log_scale[s];
        let f = (b.log_scale[s] - ls).exp();
        let (p0, d0) = (a.state[2 * s], a.state[2 * s + 1]);
        let (p1, d1) = (b.state[2 * s] * f, b.state[2 * s + 1] * f);
        let (qa, qb) = (self.params.potential(a.rho), self.params.potential(b.rho));
        let t = (rho - a.rho) / h;
        let (v, dv) = hermite5(h, t, p0, d0, qa * p0, p1, d1, qb * p1);
        (v, dv, ls)
    }

    /// Value, derivative and log scale of `which` at `rho`; the true value is
    /// `value * exp(log_scale)`.
    pub fn scaled(&self, which: Fundamental, rho: T) -> Result<(T, T, T)> {
        self.check_reach(rho)?;
        Ok(self.scaled_in_step(which, self.step_index(rho), rho))
    }

    /// `(φ, φ', ψ, ψ')` at `rho`. Overflows to infinity for very large values;
    /// use [`ModeSolutionPair::scaled`] there.
    pub fn eval(&self, rho: T) -> Result<[T; 4]> {
        let (p, dp, lp) = self.scaled(Fundamental::Phi, rho)?;
        let (s, ds, lq) = self.scaled(Fundamental::Psi, rho)?;
        let (ep, eq) = (lp.exp(), lq.exp());
        Ok([p * ep, dp * ep, s * eq, ds * eq])
    }

    /// Relative Wronskian drift at `rho`, from the dense output.
    pub fn wronskian_drift_at(&self, rho: T) -> Result<T> {
        let (p, dp, lp) = self.scaled(Fundamental::Phi, rho)?;
        let (s, ds, lq) = self.scaled(Fundamental::Psi, rho)?;
        Ok(node_drift(&ModeNode { rho, state: [p, dp, s, ds], log_scale: [lp, lq] }))
    }

    /// `ln ∫₀^w u²` by composite Simpson with `panels` panels per step.
    pub fn log_mass_panels(&self, which: Fundamental, w: T, panels: usize) -> Result<T> {
        self.check_reach(w)?;
        let panels = (panels.max(2) + 1) & !1;
        let mut acc = LogSum::new();
        let end = w.abs();
        for k in 0..self.nodes.len() - 1 {
            let a = self.nodes[k].rho;
            if a.abs() >= end {
                break;
            }
            let b = if self.nodes[k + 1].rho.abs() > end { w } else { self.nodes[k + 1].rho };
            let h = (b - a) / T::lit(panels as f64);
            let mut sum = T::zero();
            for i in 0..=panels {
                let x = a + h * T::lit(i as f64);
                let (v, _, _) = self.scaled_in_step(which, k, x);
                let wgt = if i == 0 || i == panels {
                    T::one()
                } else if i % 2 == 1 {
                    T::lit(4.0)
                } else {
                    T::lit(2.0)
                };
                sum = sum + wgt * v * v;
            }
            let ls = self.nodes[k].log_scale[which.slot()];
            acc.add(sum * h.abs() / T::lit(3.0), ls + ls);
        }
        Ok(acc.ln())
    }

    /// `ln ∫₀^w u²`, doubling the panel count until two levels agree.
    pub fn log_mass(&self, which: Fundamental, w: T) -> Result<T> {
        let mut panels = 2;
        let mut prev = self.log_mass_panels(which, w, panels)?;
        while panels < 1024 {
            panels *= 2;
            let cur = self.log_mass_panels(which, w, panels)?;
            if (cur - prev).abs() <= T::lit(QUAD_AGREEMENT) || cur == prev {
                return Ok(cur);
            }
            prev = cur;
        }
        Err(Error::IntegrationFailure(format!("mass quadrature did not settle at w = {}", w.as_f64())))
    }

    /// `∫₀^{w1} u² / ∫₀^{w2} u²`.
    pub fn mass_ratio(&self, which: Fundamental, w1: T, w2: T) -> Result<T> {
        Ok((self.log_mass(which, w1)? - self.log_mass(which, w2)?).exp())
    }

    /// Simpson integral of `g(φ, φ', ψ, ψ')` over `[0, w]` using unscaled
    /// values. Meant for moderate growth only.
    pub fn integrate_unscaled(&self, w: T, panels: usize, g: impl Fn([T; 4]) -> T) -> Result<T> {
        self.check_reach(w)?;
        let panels = (panels.max(2) + 1) & !1;
        let end = w.abs();
        let mut total = T::zero();
        for k in 0..self.nodes.len() - 1 {
            let a = self.nodes[k].rho;
            if a.abs() >= end {
                break;
            }
            let b = if self.nodes[k + 1].rho.abs() > end { w } else { self.nodes[k + 1].rho };
            let h = (b - a) / T::lit(panels as f64);
            let mut sum = T::zero();
            for i in 0..=panels {
                let x = a + h * T::lit(i as f64);
                let (p, dp, lp) = self.scaled_in_step(Fundamental::Phi, k, x);
                let (s, ds, lq) = self.scaled_in_step(Fundamental::Psi, k, x);
                let (ep, eq) = (lp.exp(), lq.exp());
                let wgt = if i == 0 || i == panels {
                    T::one()
                } else if i % 2 == 1 {
                    T::lit(4.0)
                } else {
                    T::lit(2.0)
                };
                sum = sum + wgt * g([p * ep, dp * ep, s * eq, ds * eq]);
            }
            total = total + sum * h / T::lit(3.0);
        }
        Ok(total)
    }

    /// Writes `samples + 1` evenly spaced rows `rho,phi,dphi,psi,dpsi`.
    pub fn write_csv<W: Write>(&self, out: W, samples: usize) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["rho", "phi", "dphi", "psi", "dpsi"])?;
        let n = samples.max(1);
        for i in 0..=n {
            let rho = self.w_max * T::lit(i as f64 / n as f64);
            let v = self.eval(rho)?;
            wtr.write_record([rho, v[0], v[1], v[2], v[3]].iter().map(|x| format!("{:.17e}", x.as_f64())))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Coefficients of one Fourier mode of a collar function in the fundamental
/// pair: `√cosh ρ · α_j = a1 φ_j + a2 ψ_j`, `√cosh ρ · β_j = b1 φ_j + b2 ψ_j`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModeCoefficients<T> {
    pub a1: T,
    pub a2: T,
    pub b1: T,
    pub b2: T,
}

/// Squared `L²` norm over the collar of width `w` of the function whose
/// `j`-th mode has coefficients `coeffs[j]`, using `pairs[j]`.
///
/// Interior collars are two-sided. On a boundary geodesic, a Neumann
/// condition kills the `φ` terms and a Dirichlet condition kills the `ψ`
/// terms; the corresponding coefficients are ignored.
pub fn collar_norm<T: Real>(
    coeffs: &[ModeCoefficients<T>],
    pairs: &[ModeSolutionPair<T>],
    ell: T,
    w: T,
    bc: BoundaryCondition,
) -> Result<T> {
    if coeffs.len() != pairs.len() {
        return Err(Error::ArityMismatch { expected: coeffs.len(), got: pairs.len() });
    }
    let mut total = T::zero();
    for (j, (c, pair)) in coeffs.iter().zip(pairs).enumerate() {
        if pair.params.j as usize != j {
            return Err(Error::Domain(format!("pair {j} solves mode {}", pair.params.j)));
        }
        if (pair.params.ell - ell).abs() > T::lit(1e-12) * ell {
            return Err(Error::Domain(format!("pair {j} has collar length {}, expected {ell}", pair.params.ell)));
        }
        if pair.w_max < w {
            return Err(Error::HorizonTooShort { needed: w.as_f64(), have: pair.w_max.as_f64() });
        }
        let (c1, c2) = if j == 0 {
            (c.a1 * c.a1, c.a2 * c.a2)
        } else {
            let half = T::lit(0.5);
            (half * (c.a1 * c.a1 + c.b1 * c.b1), half * (c.a2 * c.a2 + c.b2 * c.b2))
        };
        let (use_phi, use_psi, factor) = match bc {
            BoundaryCondition::Interior => (true, true, T::lit(2.0) * ell),
            BoundaryCondition::Neumann => (false, true, ell),
            BoundaryCondition::Dirichlet => (true, false, ell),
        };
        if use_phi && c1 > T::zero() {
            total = total + factor * c1 * pair.log_mass(Fundamental::Phi, w)?.exp();
        }
        if use_psi && c2 > T::zero() {
            total = total + factor * c2 * pair.log_mass(Fundamental::Psi, w)?.exp();
        }
    }
    Ok(total)
}

/// The mass-concentration bound for eigenvalues `λ ≤ 1/4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassRatioBound<T> {
    /// `δ = √(1/4 − λ)`.
    pub delta: T,
    /// `w1/w2` when `δ = 0`, else `(4δw1 + sinh 2δw1)/(4δw2 + sinh 2δw2)`.
    pub bound: T,
    /// The tighter `(2δw1 + sinh 2δw1)/(2δw2 + sinh 2δw2)`, the exact mass
    /// ratio of the comparison function `cosh δρ`.
    pub sharp: T,
    /// Large-width form `2 exp(−2δ(w2 − w1))`; absent when `δ = 0`.
    pub asymptotic: Option<T>,
}

/// `ln(c·y + sinh y)` for `y ≥ 0`, stable for large `y`.
fn ln_mass_profile<T: Real>(c: T, y: T) -> T {
    if y > T::lit(40.0) {
        let e = (-y).exp();
        y - T::LN_2() + (T::lit(2.0) * c * y * e - e * e).ln_1p()
    } else {
        (c * y + y.sinh()).ln()
    }
}

pub fn mass_ratio_bound<T: Real>(lambda: T, w1: T, w2: T) -> Result<MassRatioBound<T>> {
    let quarter = T::lit(0.25);
    if !(lambda <= quarter) || !lambda.is_finite() {
        return Err(Error::Domain(format!("mass bound needs lambda <= 1/4, got {lambda}")));
    }
    if !(w1 > T::zero() && w1 <= w2 && w2.is_finite()) {
        return Err(Error::Domain(format!("mass bound needs 0 < w1 <= w2, got ({w1}, {w2})")));
    }
    let delta = (quarter - lambda).sqrt();
    if delta == T::zero() {
        let r = w1 / w2;
        return Ok(MassRatioBound { delta, bound: r, sharp: r, asymptotic: None });
    }
    let two = T::lit(2.0);
    let (y1, y2) = (two * delta * w1, two * delta * w2);
    let bound = (ln_mass_profile(two, y1) - ln_mass_profile(two, y2)).exp();
    let sharp = (ln_mass_profile(T::one(), y1) - ln_mass_profile(T::one(), y2)).exp();
    let asymptotic = Some(two * (-two * delta * (w2 - w1)).exp());
    Ok(MassRatioBound { delta, bound, sharp, asymptotic })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassRatioReport<T> {
    pub params: ModeOdeParams<T>,
    pub w1: T,
    pub w2: T,
    /// Largest of the per-solution ratios that the boundary condition keeps.
    pub ratio: T,
    pub ratio_phi: Option<T>,
    pub ratio_psi: Option<T>,
    pub bound: T,
    pub sharp_bound: T,
    pub boundary_condition: BoundaryCondition,
    pub wronskian_drift: T,
}

/// Measures the per-mode mass ratios and checks them against
/// [`mass_ratio_bound`].
pub fn verify_mass_distribution<T: Real>(
    params: &ModeOdeParams<T>,
    w1: T,
    w2: T,
    bc: BoundaryCondition,
) -> Result<MassRatioReport<T>> {
    let b = mass_ratio_bound(params.lambda, w1, w2)?;
    let pair = solve_mode(params, w2)?;
    let want_phi = bc != BoundaryCondition::Neumann;
    let want_psi = bc != BoundaryCondition::Dirichlet;
    let ratio_phi = if want_phi { Some(pair.mass_ratio(Fundamental::Phi, w1, w2)?) } else { None };
    let ratio_psi = if want_psi { Some(pair.mass_ratio(Fundamental::Psi, w1, w2)?) } else { None };
    let limit = b.bound + T::lit(BOUND_SLACK);
    for (name, r) in [("phi", ratio_phi), ("psi", ratio_psi)] {
        if let Some(r) = r {
            if !(r <= limit) {
                return Err(Error::BoundViolated {
                    mode: format!("j = {} {name}", params.j),
                    ratio: r.as_f64(),
                    bound: b.bound.as_f64(),
                });
            }
        }
    }
    let ratio = ratio_phi.unwrap_or(T::zero()).max(ratio_psi.unwrap_or(T::zero()));
    Ok(MassRatioReport {
        params: *params,
        w1,
        w2,
        ratio,
        ratio_phi,
        ratio_psi,
        bound: b.bound,
        sharp_bound: b.sharp,
        boundary_condition: bc,
        wronskian_drift: pair.wronskian_drift,
    })
}

/// Points used to test the hypotheses of [`integral_monotonicity_check`].
pub const MONOTONICITY_GRID: usize = 2000;

/// Compares normalized masses of two positive functions given as jets
/// `ρ ↦ [u, u', u'']`: if `u2'' u1 − u2 u1'' ≥ 0` and the Wronskian
/// `u2' u1 − u2 u1'` is non-negative at 0, the mass of `u2` is pushed further
/// out than that of `u1`, so
/// `∫₀^{w1} u2² / ∫₀^{w2} u2² ≤ ∫₀^{w1} u1² / ∫₀^{w2} u1²`.
/// The hypotheses are checked on a grid; failure rejects the input.
pub fn integral_monotonicity_check<T: Real>(
    u1: impl Fn(T) -> [T; 3],
    u2: impl Fn(T) -> [T; 3],
    w1: T,
    w2: T,
) -> Result<bool> {
    if !(w1 > T::zero() && w1 <= w2 && w2.is_finite()) {
        return Err(Error::Domain(format!("need 0 < w1 <= w2, got ({w1}, {w2})")));
    }
    let slack = T::lit(1e-12);
    let [a0, da0, _] = u1(T::zero());
    let [b0, db0, _] = u2(T::zero());
    let w0 = db0 * a0 - b0 * da0;
    if w0 < -slack * ((db0 * a0).abs() + (b0 * da0).abs()) {
        return Err(Error::PreconditionUnmet(format!("initial Wronskian is negative: {w0}")));
    }
    for i in 1..=MONOTONICITY_GRID {
        let rho = w2 * T::lit(i as f64 / MONOTONICITY_GRID as f64);
        let [a, _, dda] = u1(rho);
        let [b, _, ddb] = u2(rho);
        if !(a > T::zero() && b > T::zero()) {
            return Err(Error::PreconditionUnmet(format!("functions not positive at rho = {rho}")));
        }
        let d = ddb * a - b * dda;
        if d < -slack * ((ddb * a).abs() + (b * dda).abs()) {
            return Err(Error::PreconditionUnmet(format!("u2'' u1 - u2 u1'' = {d} < 0 at rho = {rho}")));
        }
    }
    let mass = |u: &dyn Fn(T) -> [T; 3], w: T| {
        let scale = u(w)[0] * u(w)[0] * w;
        adaptive_simpson(&|x| u(x)[0] * u(x)[0], T::zero(), w, scale * T::lit(1e-13))
    };
    let r1 = mass(&u1, w1) / mass(&u1, w2);
    let r2 = mass(&u2, w1) / mass(&u2, w2);
    Ok(r2 <= r1 * (T::one() + T::lit(1e-10)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_mode_matches_closed_form() {
        // j = 0, lambda = 1/4 - 1 would be out of range; use the lambda = 0,
        // j = 0 case where u = sqrt(cosh) times a solution of the original
        // equation: psi = sqrt(cosh rho).
        let p = ModeOdeParams::new(0.0_f64, 0, 1.0).unwrap();
        let pair = solve_mode(&p, 3.0).unwrap();
        for rho in [0.5, 1.0, 2.5] {
            let v = pair.eval(rho).unwrap();
            assert!((v[2] - rho.cosh().sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn bound_edge_cases() {
        let b = mass_ratio_bound(0.25_f64, 1.0, 2.0).unwrap();
        assert_eq!(b.bound, 0.5);
        assert!(b.asymptotic.is_none());
        let b = mass_ratio_bound(0.1_f64, 2.0, 2.0).unwrap();
        assert!((b.bound - 1.0).abs() < 1e-15);
        assert!(mass_ratio_bound(0.3_f64, 1.0, 2.0).is_err());
        assert!(mass_ratio_bound(0.1_f64, 3.0, 2.0).is_err());
    }

    #[test]
    fn large_width_bound_does_not_overflow() {
        // delta = 1/2, so 2 delta w = w; at w ~ 100 the linear terms are negligible.
        let b = mass_ratio_bound(0.0_f64, 100.0, 110.0).unwrap();
        assert!((b.bound / (-10.0_f64).exp() - 1.0).abs() < 1e-12);
        let b = mass_ratio_bound(0.0_f64, 500.0, 2000.0).unwrap();
        assert!(b.bound.is_finite() && b.bound >= 0.0 && b.bound < 1e-300);
    }

    #[test]
    fn log_sum_handles_disparate_scales() {
        let mut s = LogSum::new();
        s.add(1.0_f64, 1000.0);
        s.add(1.0, 0.0);
        s.add(2.0, 1000.0);
        assert!((s.ln() - (1000.0 + 3.0_f64.ln())).abs() < 1e-12);
    }
}
