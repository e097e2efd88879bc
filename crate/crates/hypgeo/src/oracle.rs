//! Independent numerical checks: a finite-difference Sturm–Liouville solver
//! for collar modes, a shooting solver, finite-difference curvature and
//! density comparisons.
//!
//! The collar problem for Fourier mode `j` is
//! `−(1/cosh ρ)(cosh ρ φ')' + (4π²j²/ℓ²)/cosh²ρ · φ = λ φ`
//! on `[0, w]` or `[−w, w]`, self-adjoint for the weight `cosh ρ`.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collar::{verify_mass_distribution, BoundaryCondition, ModeOdeParams};
use crate::error::{Error, Result};
use crate::metrics::RadialMetric;
use crate::ode::{dopri5, Tolerances};
use crate::scalar::Real;

/// Default interval count; Richardson pairs it with twice as many.
pub const DEFAULT_INTERVALS: usize = 2048;
pub const MIN_NODES: usize = 16;
/// Agreement required between the two solvers, relative to `max(1, |λ|)`.
pub const AGREEMENT_TOL: f64 = 1e-5;
const INVERSE_ITERATIONS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndCondition {
    Neumann,
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SturmLiouvilleProblem<T> {
    pub ell: T,
    pub w: T,
    pub j: u32,
    /// Domain is `[−w, w]` instead of `[0, w]`.
    pub two_sided: bool,
    pub bc_inner: EndCondition,
    pub bc_outer: EndCondition,
}

impl<T: Real> SturmLiouvilleProblem<T> {
    /// One-sided collar half `[0, w]` with Neumann conditions at both ends.
    pub fn neumann(ell: T, w: T, j: u32) -> Self {
        SturmLiouvilleProblem {
            ell,
            w,
            j,
            two_sided: false,
            bc_inner: EndCondition::Neumann,
            bc_outer: EndCondition::Neumann,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ell > T::zero() && self.ell.is_finite()) {
            return Err(Error::Domain(format!("collar length must be positive, got {}", self.ell)));
        }
        if !(self.w > T::zero() && self.w.is_finite()) {
            return Err(Error::Domain(format!("half-width must be positive, got {}", self.w)));
        }
        Ok(())
    }

    pub fn start(&self) -> T {
        if self.two_sided {
            -self.w
        } else {
            T::zero()
        }
    }

    /// `4π²j²/ℓ²`.
    pub fn angular(&self) -> T {
        let j = T::lit(self.j as f64);
        T::lit(4.0) * T::PI() * T::PI() * j * j / (self.ell * self.ell)
    }

    pub fn potential(&self, rho: T) -> T {
        let c = rho.cosh();
        self.angular() / (c * c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid1D {
    pub nodes: usize,
}

impl Grid1D {
    pub fn new(nodes: usize) -> Result<Grid1D> {
        if nodes < MIN_NODES {
            return Err(Error::PreconditionUnmet(format!("grid needs at least {MIN_NODES} nodes, got {nodes}")));
        }
        Ok(Grid1D { nodes })
    }

    pub fn with_intervals(intervals: usize) -> Result<Grid1D> {
        Grid1D::new(intervals + 1)
    }

    pub fn intervals(&self) -> usize {
        self.nodes - 1
    }

    pub fn spacing<T: Real>(&self, p: &SturmLiouvilleProblem<T>) -> T {
        (p.w - p.start()) / T::lit(self.intervals() as f64)
    }

    pub fn refined(&self) -> Grid1D {
        Grid1D { nodes: 2 * self.intervals() + 1 }
    }
}

/// Symmetric tridiagonal form of the discretization after scaling by the
/// lumped mass, plus what is needed to undo the scaling.
struct Discretization<T> {
    rho: Vec<T>,
    diag: Vec<T>,
    off: Vec<T>,
    mass: Vec<T>,
    /// Flux weights `cosh ρ_{i+1/2} / h` between consecutive unknowns, and to
    /// a Dirichlet neighbour on either side.
    flux: Vec<T>,
    flux_in: T,
    flux_out: T,
    pot_mass: Vec<T>,
}

fn discretize<T: Real>(p: &SturmLiouvilleProblem<T>, g: &Grid1D) -> Result<Discretization<T>> {
    p.validate()?;
    let n = g.nodes;
    let h = g.spacing(p);
    let a = p.start();
    let half = T::lit(0.5);
    let node = |i: usize| a + h * T::lit(i as f64);
    let cmid = |i: usize| (a + h * (T::lit(i as f64) + half)).cosh() / h;
    let first = usize::from(p.bc_inner == EndCondition::Dirichlet);
    let last = if p.bc_outer == EndCondition::Dirichlet { n - 2 } else { n - 1 };
    let mut rho = Vec::new();
    let mut mass = Vec::new();
    let mut pot_mass = Vec::new();
    let mut stiff_diag = Vec::new();
    for i in first..=last {
        let x = node(i);
        let c = x.cosh();
        let boundary_half = (i == 0 || i == n - 1) && !(i == 0 && first == 1) && !(i == n - 1 && last == n - 2);
        let vol = if boundary_half { h * half * c } else { h * c };
        let left = if i > 0 { cmid(i - 1) } else { T::zero() };
        let right = if i < n - 1 { cmid(i) } else { T::zero() };
        rho.push(x);
        mass.push(vol);
        pot_mass.push(vol * p.potential(x));
        stiff_diag.push(left + right + vol * p.potential(x));
    }
    let flux: Vec<T> = (first..last).map(cmid).collect();
    let diag: Vec<T> = stiff_diag.iter().zip(&mass).map(|(&d, &m)| d / m).collect();
    let off: Vec<T> = flux.iter().enumerate().map(|(k, &f)| -f / (mass[k] * mass[k + 1]).sqrt()).collect();
    let flux_in = if first == 1 { cmid(0) } else { T::zero() };
    let flux_out = if last == n - 2 { cmid(n - 2) } else { T::zero() };
    Ok(Discretization { rho, diag, off, mass, flux, flux_in, flux_out, pot_mass })
}

/// Number of eigenvalues of the tridiagonal matrix below `x`.
fn sturm_count<T: Real>(diag: &[T], off: &[T], x: T) -> usize {
    let tiny = T::min_positive_value().sqrt();
    let mut count = 0;
    let mut d = T::one();
    for i in 0..diag.len() {
        let e2 = if i == 0 { T::zero() } else { off[i - 1] * off[i - 1] };
        d = diag[i] - x - if i == 0 { T::zero() } else { e2 / d };
        if d == T::zero() {
            d = -tiny;
        }
        if d < T::zero() {
            count += 1;
        }
    }
    count
}

fn gershgorin<T: Real>(diag: &[T], off: &[T]) -> (T, T) {
    let n = diag.len();
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { T::zero() } + if i + 1 < n { off[i].abs() } else { T::zero() };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// Solves `(T − σ) x = y` by Gaussian elimination with partial pivoting.
fn tridiag_solve<T: Real>(diag: &[T], off: &[T], sigma: T, y: &[T]) -> Vec<T> {
    let n = diag.len();
    let mut d: Vec<T> = diag.iter().map(|&v| v - sigma).collect();
    let dl = off.to_vec();
    let mut du = off.to_vec();
    let mut du2 = vec![T::zero(); n];
    let mut b = y.to_vec();
    let tiny = T::epsilon() * (diag.iter().fold(T::zero(), |m, &v| m.max(v.abs())) + sigma.abs() + T::one());
    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == T::zero() {
                d[i] = tiny;
            }
            let fact = dl[i] / d[i];
            d[i + 1] = d[i + 1] - fact * du[i];
            b[i + 1] = b[i + 1] - fact * b[i];
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = temp - fact * d[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du[i + 1];
            }
            b.swap(i, i + 1);
            b[i + 1] = b[i + 1] - fact * b[i];
        }
    }
    if d[n - 1] == T::zero() {
        d[n - 1] = tiny;
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s = s - du[i] * x[i + 1];
        }
        if i + 2 < n {
            s = s - du2[i] * x[i + 2];
        }
        x[i] = s / d[i];
    }
    x
}

fn normalize<T: Real>(x: &mut [T]) -> T {
    let n = x.iter().fold(T::zero(), |s, &v| s + v * v).sqrt();
    x.iter_mut().for_each(|v| *v = *v / n);
    n
}

/// A discrete eigenpair with `φ` on the grid nodes (boundary values included).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdEigenpair<T> {
    pub lambda: T,
    pub rho: Vec<T>,
    pub phi: Vec<T>,
}

impl<T: Real> FdEigenpair<T> {
    /// `∫_{start}^{w1} cosh ρ φ² / ∫_{start}^{w2} cosh ρ φ²` by the trapezoid rule.
    pub fn mass_ratio(&self, w1: T, w2: T) -> T {
        let mass = |upto: T| -> T {
            let mut s = T::zero();
            for k in 0..self.rho.len() - 1 {
                let (a, b) = (self.rho[k], self.rho[k + 1]);
                if a >= upto {
                    break;
                }
                let b_cut = b.min(upto);
                let t = (b_cut - a) / (b - a);
                let fa = a.cosh() * self.phi[k] * self.phi[k];
                let phib = self.phi[k] + t * (self.phi[k + 1] - self.phi[k]);
                let fb = b_cut.cosh() * phib * phib;
                s = s + (fa + fb) * (b_cut - a) / T::lit(2.0);
            }
            s
        };
        mass(w1) / mass(w2)
    }
}

fn eigenvector<T: Real>(d: &Discretization<T>, lambda: T) -> Result<(Vec<T>, T)> {
    let n = d.diag.len();
    let scale = gershgorin(&d.diag, &d.off).1.abs().max(T::one());
    let sigma = lambda - scale * T::lit(1e-13);
    let mut x: Vec<T> = (0..n).map(|i| T::one() + T::lit(((i * 7919) % 113) as f64 * 1e-3)).collect();
    normalize(&mut x);
    let mut rq = lambda;
    for it in 0..INVERSE_ITERATIONS {
        let mut y = tridiag_solve(&d.diag, &d.off, sigma, &x);
        normalize(&mut y);
        let r = residual(d, &y, &mut rq);
        x = y;
        // convergence is geometric and fast; a few sweeps reach roundoff
        if it >= 3 && r <= T::lit(1e-10) * scale {
            return Ok((x, rq));
        }
    }
    Err(Error::SolverFailure(format!("inverse iteration stagnated near lambda = {lambda}")))
}

/// Energy-form Rayleigh quotient of `y` (in scaled variables) and the
/// residual norm `|B y − rq y|`.
fn residual<T: Real>(d: &Discretization<T>, y: &[T], rq: &mut T) -> T {
    let n = y.len();
    let phi: Vec<T> = y.iter().zip(&d.mass).map(|(&v, &m)| v / m.sqrt()).collect();
    let mut num = T::zero();
    for k in 0..n - 1 {
        let g = phi[k + 1] - phi[k];
        num = num + d.flux[k] * g * g;
    }
    num = num + d.flux_in * phi[0] * phi[0] + d.flux_out * phi[n - 1] * phi[n - 1];
    let mut den = T::zero();
    for ((&f, &q), &m) in phi.iter().zip(&d.pot_mass).zip(&d.mass) {
        num = num + q * f * f;
        den = den + m * f * f;
    }
    *rq = num / den;
    let mut r2 = T::zero();
    for i in 0..n {
        let mut by = d.diag[i] * y[i];
        if i > 0 {
            by = by + d.off[i - 1] * y[i - 1];
        }
        if i + 1 < n {
            by = by + d.off[i] * y[i + 1];
        }
        let e = by - *rq * y[i];
        r2 = r2 + e * e;
    }
    r2.sqrt()
}

/// Lowest `count` eigenpairs of the discretized problem.
pub fn collar_fd_eigenpairs<T: Real>(
    p: &SturmLiouvilleProblem<T>,
    grid: &Grid1D,
    count: usize,
) -> Result<Vec<FdEigenpair<T>>> {
    if count == 0 || count > grid.nodes / 4 {
        return Err(Error::PreconditionUnmet(format!("count must be in 1..={}, got {count}", grid.nodes / 4)));
    }
    let d = discretize(p, grid)?;
    let (glo, ghi) = gershgorin(&d.diag, &d.off);
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let (mut lo, mut hi) = (glo, ghi);
        for _ in 0..200 {
            let mid = (lo + hi) / T::lit(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(&d.diag, &d.off, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let (y, rq) = eigenvector(&d, (lo + hi) / T::lit(2.0))?;
        let mut phi: Vec<T> = y.iter().zip(&d.mass).map(|(&v, &m)| v / m.sqrt()).collect();
        let mut rho = d.rho.clone();
        if p.bc_inner == EndCondition::Dirichlet {
            rho.insert(0, p.start());
            phi.insert(0, T::zero());
        }
        if p.bc_outer == EndCondition::Dirichlet {
            rho.push(p.w);
            phi.push(T::zero());
        }
        // sign convention: positive where |φ| is largest
        let big = phi.iter().fold(T::zero(), |m, &v| if v.abs() > m.abs() { v } else { m });
        if big < T::zero() {
            phi.iter_mut().for_each(|v| *v = -*v);
        }
        out.push(FdEigenpair { lambda: rq, rho, phi });
    }
    Ok(out)
}

pub fn collar_fd_spectrum<T: Real>(p: &SturmLiouvilleProblem<T>, grid: &Grid1D, count: usize) -> Result<Vec<T>> {
    Ok(collar_fd_eigenpairs(p, grid, count)?.into_iter().map(|e| e.lambda).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RichardsonEstimate<T> {
    pub coarse: T,
    pub fine: T,
    /// `(4·fine − coarse)/3`.
    pub extrapolated: T,
}

/// Eigenvalues on `grid` and its refinement, with Richardson extrapolation.
pub fn collar_fd_richardson<T: Real>(
    p: &SturmLiouvilleProblem<T>,
    grid: &Grid1D,
    count: usize,
) -> Result<Vec<RichardsonEstimate<T>>> {
    let c = collar_fd_spectrum(p, grid, count)?;
    let f = collar_fd_spectrum(p, &grid.refined(), count)?;
    Ok(c.into_iter()
        .zip(f)
        .map(|(coarse, fine)| RichardsonEstimate {
            coarse,
            fine,
            extrapolated: (T::lit(4.0) * fine - coarse) / T::lit(3.0),
        })
        .collect())
}

/// Which dependent variable the shooting method integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    /// `φ'' = −tanh ρ φ' + (V − λ) φ`.
    Phi,
    /// `u = √cosh ρ · φ`, `u'' = (1/4 − λ + (1/4 + 4π²j²/ℓ²)/cosh²ρ) u`;
    /// Neumann for `φ` reads `u' = (tanh ρ / 2) u`.
    Weighted,
}

fn shoot_tolerances<T: Real>() -> Tolerances<T> {
    Tolerances { atol: T::lit(1e-13), rtol: T::lit(1e-12), max_steps: 2_000_000 }
}

fn initial_state<T: Real>(p: &SturmLiouvilleProblem<T>, f: Formulation) -> [T; 2] {
    let a = p.start();
    let half = T::lit(0.5);
    match (f, p.bc_inner) {
        (Formulation::Phi, EndCondition::Neumann) => [T::one(), T::zero()],
        (Formulation::Phi, EndCondition::Dirichlet) => [T::zero(), T::one()],
        (Formulation::Weighted, EndCondition::Neumann) => {
            let u = a.cosh().sqrt();
            [u, half * a.tanh() * u]
        }
        (Formulation::Weighted, EndCondition::Dirichlet) => [T::zero(), a.cosh().sqrt()],
    }
}

fn rhs<T: Real>(p: &SturmLiouvilleProblem<T>, f: Formulation, lambda: T, rho: T, y: &[T; 2]) -> [T; 2] {
    let c = rho.cosh();
    let c2 = c * c;
    match f {
        Formulation::Phi => [y[1], -rho.tanh() * y[1] + (p.angular() / c2 - lambda) * y[0]],
        Formulation::Weighted => {
            let q = T::lit(0.25) - lambda + (T::lit(0.25) + p.angular()) / c2;
            [y[1], q * y[0]]
        }
    }
}

fn integrate<T: Real>(
    p: &SturmLiouvilleProblem<T>,
    f: Formulation,
    lambda: T,
    from: T,
    y: [T; 2],
    to: T,
) -> Result<[T; 2]> {
    dopri5(|r, y| rhs(p, f, lambda, r, y), from, y, to, &shoot_tolerances(), |_, _| false)
}

/// Boundary mismatch at `ρ = w` of the solution satisfying the inner condition.
pub fn shooting_mismatch<T: Real>(p: &SturmLiouvilleProblem<T>, f: Formulation, lambda: T) -> Result<T> {
    let y = integrate(p, f, lambda, p.start(), initial_state(p, f), p.w)?;
    Ok(match (f, p.bc_outer) {
        (_, EndCondition::Dirichlet) => y[0],
        (Formulation::Phi, EndCondition::Neumann) => y[1],
        (Formulation::Weighted, EndCondition::Neumann) => y[1] - T::lit(0.5) * p.w.tanh() * y[0],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingResult<T> {
    pub lambda: T,
    pub iterations: usize,
    pub bracket_width: T,
}

/// Root of the boundary mismatch inside `bracket`: bisection to `1e-10`
/// relative width, then one secant step on the final bracket.
pub fn shooting_eigen<T: Real>(
    p: &SturmLiouvilleProblem<T>,
    f: Formulation,
    bracket: (T, T),
) -> Result<ShootingResult<T>> {
    p.validate()?;
    let (mut lo, mut hi) = (bracket.0.min(bracket.1), bracket.0.max(bracket.1));
    let mut flo = shooting_mismatch(p, f, lo)?;
    let fhi = shooting_mismatch(p, f, hi)?;
    if flo == T::zero() {
        return Ok(ShootingResult { lambda: lo, iterations: 0, bracket_width: T::zero() });
    }
    if fhi == T::zero() {
        return Ok(ShootingResult { lambda: hi, iterations: 0, bracket_width: T::zero() });
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoSignChange { lo: lo.as_f64(), hi: hi.as_f64() });
    }
    let mut fhi = fhi;
    let tol = T::lit(1e-10);
    let mut it = 0;
    while hi - lo > tol * T::one().max(lo.abs().max(hi.abs())) && it < 200 {
        it += 1;
        let mid = (lo + hi) / T::lit(2.0);
        let fm = shooting_mismatch(p, f, mid)?;
        if fm == T::zero() {
            return Ok(ShootingResult { lambda: mid, iterations: it, bracket_width: T::zero() });
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    let secant = lo - flo * (hi - lo) / (fhi - flo);
    let lambda = if secant > lo && secant < hi { secant } else { (lo + hi) / T::lit(2.0) };
    Ok(ShootingResult { lambda, iterations: it, bracket_width: hi - lo })
}

/// One-sided Neumann collar half `[0, w]`, integrating `φ` directly.
pub fn shooting_neumann_eigen<T: Real>(ell: T, w: T, j: u32, bracket: (T, T)) -> Result<T> {
    shooting_eigen(&SturmLiouvilleProblem::neumann(ell, w, j), Formulation::Phi, bracket).map(|r| r.lambda)
}

/// `φ` sampled at `samples + 1` uniform points, normalized to `φ(start) = 1`
/// for a Neumann start.
pub fn shooting_eigenfunction<T: Real>(p: &SturmLiouvilleProblem<T>, lambda: T, samples: usize) -> Result<Vec<(T, T)>> {
    let a = p.start();
    let h = (p.w - a) / T::lit(samples.max(1) as f64);
    let mut y = initial_state(p, Formulation::Phi);
    let mut out = vec![(a, y[0])];
    for i in 1..=samples.max(1) {
        let from = a + h * T::lit((i - 1) as f64);
        let to = a + h * T::lit(i as f64);
        y = integrate(p, Formulation::Phi, lambda, from, y, to)?;
        out.push((to, y[0]));
    }
    Ok(out)
}

/// One FD-versus-shooting comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck<T> {
    pub problem: SturmLiouvilleProblem<T>,
    pub index: usize,
    pub fd: RichardsonEstimate<T>,
    pub shooting: T,
    /// Same root found through the weighted formulation.
    pub shooting_weighted: T,
    pub rel_err: T,
    pub agree: bool,
    /// Mass-concentration checks for `λ ≤ 1/4` on one-sided Neumann problems.
    pub mass: Vec<MassCheck<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassCheck<T> {
    pub w1: T,
    /// Ratio for the collar-module solution `ψ_j` at the shooting eigenvalue.
    pub ratio: T,
    /// Same ratio from the FD eigenvector.
    pub fd_ratio: T,
    pub bound: T,
    pub holds: bool,
}

/// Fractions of `w` at which the mass ratio is checked.
pub const MASS_FRACTIONS: [f64; 4] = [0.2, 0.4, 0.6, 0.8];

/// Cross-validates the lowest `count` eigenvalues of `p`.
pub fn cross_validate<T: Real>(
    p: &SturmLiouvilleProblem<T>,
    grid: &Grid1D,
    count: usize,
) -> Result<Vec<CrossCheck<T>>> {
    let fd = collar_fd_richardson(p, grid, count + 1)?;
    let fine_pairs = collar_fd_eigenpairs(p, &grid.refined(), count)?;
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let lam = fd[k].extrapolated;
        let scale = T::one().max(lam.abs());
        let mut gap = fd[k + 1].extrapolated - lam;
        if k > 0 {
            gap = gap.min(lam - fd[k - 1].extrapolated);
        }
        let r = (T::lit(1e-3) * scale).min(gap / T::lit(3.0));
        let bracket = (lam - r, lam + r);
        let s = shooting_eigen(p, Formulation::Phi, bracket)?.lambda;
        let sw = shooting_eigen(p, Formulation::Weighted, bracket)?.lambda;
        let rel_err = (lam - s).abs() / T::one().max(s.abs());
        let mut mass = Vec::new();
        let one_sided_neumann =
            !p.two_sided && p.bc_inner == EndCondition::Neumann && p.bc_outer == EndCondition::Neumann;
        if one_sided_neumann && s <= T::lit(0.25) {
            let params = ModeOdeParams::new(s.max(T::zero()), p.j, p.ell)?;
            for frac in MASS_FRACTIONS {
                let w1 = p.w * T::lit(frac);
                let (ratio, bound, holds) = match verify_mass_distribution(&params, w1, p.w, BoundaryCondition::Neumann)
                {
                    Ok(rep) => (rep.ratio, rep.bound, true),
                    Err(Error::BoundViolated { ratio, bound, .. }) => (T::lit(ratio), T::lit(bound), false),
                    Err(e) => return Err(e),
                };
                mass.push(MassCheck { w1, ratio, fd_ratio: fine_pairs[k].mass_ratio(w1, p.w), bound, holds });
            }
        }
        out.push(CrossCheck {
            problem: *p,
            index: k,
            fd: fd[k],
            shooting: s,
            shooting_weighted: sw,
            rel_err,
            agree: rel_err <= T::lit(AGREEMENT_TOL),
            mass,
        });
    }
    Ok(out)
}

/// Random one-sided Neumann instances in the range the cross-validation
/// suite uses: `ℓ ∈ [1, 10]`, `w ∈ [0.5, 4]`, `j ≤ 2`.
pub fn random_problem<R: Rng + ?Sized>(rng: &mut R) -> SturmLiouvilleProblem<f64> {
    SturmLiouvilleProblem::neumann(rng.gen_range(1.0..10.0), rng.gen_range(0.5..4.0), rng.gen_range(0..=2))
}

pub fn cross_validate_batch<T: Real>(
    problems: &[SturmLiouvilleProblem<T>],
    grid: &Grid1D,
    count: usize,
) -> Vec<Result<Vec<CrossCheck<T>>>> {
    problems.par_iter().map(|p| cross_validate(p, grid, count)).collect()
}

/// Eigenvalue table: one row per cross-check.
pub fn write_eigen_table_csv<T: Real, W: Write>(checks: &[CrossCheck<T>], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["ell", "w", "j", "index", "fd_coarse", "fd_fine", "fd_extrapolated", "shooting", "rel_err"])?;
    for c in checks {
        wtr.write_record([
            c.problem.ell.to_string(),
            c.problem.w.to_string(),
            c.problem.j.to_string(),
            c.index.to_string(),
            c.fd.coarse.to_string(),
            c.fd.fine.to_string(),
            c.fd.extrapolated.to_string(),
            c.shooting.to_string(),
            c.rel_err.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_eigenfunction_csv<T: Real, W: Write>(pair: &FdEigenpair<T>, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["rho", "phi"])?;
    for (r, v) in pair.rho.iter().zip(&pair.phi) {
        wtr.write_record([r.to_string(), v.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Curvature from samples
// ---------------------------------------------------------------------------

/// Uniform samples `values[i] = h(start + i·spacing)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledDensity<T> {
    pub start: T,
    pub spacing: T,
    pub values: Vec<T>,
}

/// Largest spacing accepted by [`curvature_fd`].
pub const MAX_SPACING: f64 = 1e-3;
const STENCIL: usize = 7;

impl<T: Real> SampledDensity<T> {
    pub fn from_fn(f: impl Fn(T) -> T, start: T, end: T, intervals: usize) -> Self {
        let spacing = (end - start) / T::lit(intervals as f64);
        let values = (0..=intervals).map(|i| f(start + spacing * T::lit(i as f64))).collect();
        SampledDensity { start, spacing, values }
    }

    pub fn from_metric(m: &RadialMetric<T>, start: T, end: T, intervals: usize) -> Result<Self> {
        let spacing = (end - start) / T::lit(intervals as f64);
        let values =
            (0..=intervals).map(|i| m.density(start + spacing * T::lit(i as f64))).collect::<Result<Vec<T>>>()?;
        Ok(SampledDensity { start, spacing, values })
    }

    pub fn end(&self) -> T {
        self.start + self.spacing * T::lit((self.values.len() - 1) as f64)
    }
}

/// Fornberg weights for derivatives 0..=2 at `x` from nodes `xs`.
fn fornberg<T: Real>(x: T, xs: &[T]) -> Vec<[T; 3]> {
    let n = xs.len();
    let mut c = vec![[T::zero(); 3]; n];
    let mut c1 = T::one();
    let mut c4 = xs[0] - x;
    c[0][0] = T::one();
    for i in 1..n {
        let mn = i.min(2);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = xs[i] - x;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 = c2 * c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (T::lit(k as f64) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - T::lit(k as f64) * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c
}

/// Curvature of `h²(dρ² + sinh²ρ dθ²)` at `rho` from sampled `h`, using a
/// seven-point polynomial fit of `log h` around `rho`.
pub fn curvature_fd<T: Real>(samples: &SampledDensity<T>, rho: T) -> Result<T> {
    if !(samples.spacing > T::zero() && samples.spacing <= T::lit(MAX_SPACING) * T::lit(1.0 + 1e-12)) {
        return Err(Error::PreconditionUnmet(format!("sample spacing {} exceeds {MAX_SPACING}", samples.spacing)));
    }
    let pos = (rho - samples.start) / samples.spacing;
    let centre = pos.round().to_i64().unwrap_or(-1);
    let half = (STENCIL / 2) as i64;
    if centre - half < 0 || centre + half >= samples.values.len() as i64 || !(rho > T::zero()) {
        return Err(Error::BoundaryTooClose(rho.as_f64()));
    }
    let idx: Vec<usize> = ((centre - half)..=(centre + half)).map(|i| i as usize).collect();
    // local coordinate in units of spacing keeps the weights well scaled
    let xs: Vec<T> = idx.iter().map(|&i| T::lit(i as f64) - pos).collect();
    let wts = fornberg(T::zero(), &xs);
    let (mut l0, mut l1, mut l2) = (T::zero(), T::zero(), T::zero());
    for (k, &i) in idx.iter().enumerate() {
        let v = samples.values[i];
        if !(v > T::zero()) {
            return Err(Error::Domain(format!("density not positive at sample {i}")));
        }
        let lv = v.ln();
        l0 = l0 + wts[k][0] * lv;
        l1 = l1 + wts[k][1] * lv;
        l2 = l2 + wts[k][2] * lv;
    }
    let s = samples.spacing;
    let (l1, l2) = (l1 / s, l2 / (s * s));
    let h2 = (T::lit(2.0) * l0).exp();
    Ok(-(l2 + l1 / rho.tanh() + T::one()) / h2)
}

/// Extremes of `h2/h1` on `grid_n + 1` uniform points of `[a, b]`.
pub fn metric_compare<T: Real>(
    h1: &RadialMetric<T>,
    h2: &RadialMetric<T>,
    interval: (T, T),
    grid_n: usize,
) -> Result<(T, T)> {
    let (a, b) = interval;
    let n = grid_n.max(1);
    let ratios = (0..=n)
        .into_par_iter()
        .map(|i| {
            let rho = a + (b - a) * T::lit(i as f64 / n as f64);
            Ok(h2.density(rho)? / h1.density(rho)?)
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(ratios.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &r| (lo.min(r), hi.max(r))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sturm_count_on_diagonal() {
        let d = [1.0, 2.0, 3.0];
        let o = [0.0, 0.0];
        assert_eq!(sturm_count(&d, &o, 2.5), 2);
        assert_eq!(sturm_count(&d, &o, 0.5), 0);
    }

    #[test]
    fn tridiagonal_solve_matches_product() {
        let d = [4.0, -1.0, 3.0, 2.0, 0.5];
        let o = [1.0, 2.0, -1.0, 0.7];
        let x = [1.0_f64, 2.0, -3.0, 0.5, 4.0];
        let mut y = [0.0; 5];
        for i in 0..5 {
            y[i] = (d[i] - 0.3) * x[i];
            if i > 0 {
                y[i] += o[i - 1] * x[i - 1];
            }
            if i < 4 {
                y[i] += o[i] * x[i + 1];
            }
        }
        let got = tridiag_solve(&d, &o, 0.3, &y);
        for i in 0..5 {
            assert!((got[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn fornberg_on_quadratic() {
        let xs = [-1.0_f64, -0.25, 0.5, 1.5];
        let w = fornberg(0.1, &xs);
        let f = |x: f64| 3.0 * x * x - x + 2.0;
        let d: [f64; 3] = [0, 1, 2].map(|k| xs.iter().zip(&w).map(|(&x, c)| c[k] * f(x)).sum());
        assert!((d[0] - f(0.1)).abs() < 1e-13);
        assert!((d[1] - (6.0 * 0.1 - 1.0)).abs() < 1e-12);
        assert!((d[2] - 6.0).abs() < 1e-11);
    }
}
