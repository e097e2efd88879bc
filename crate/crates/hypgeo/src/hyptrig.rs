//! Right-angled hyperbolic polygons and collar formulas.
//!
//! Side conventions: a trirectangle has consecutive sides `a, b, alpha, beta`
//! with the acute angle between `alpha` and `beta`; a right-angled pentagon has
//! consecutive sides `a, b, alpha, c, beta`; a right-angled hexagon has
//! consecutive sides `a, gamma, b, alpha, c, beta`.

use crate::error::{Error, Result};
use crate::scalar::{acosh, asinh, atanh, coth, rel_err, Real};
use serde::{Deserialize, Serialize};

/// Quadrilateral with three right angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trirectangle<T> {
    pub a: T,
    pub b: T,
    pub alpha: T,
    pub beta: T,
}

/// Right-angled pentagon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pentagon<T> {
    pub a: T,
    pub b: T,
    pub alpha: T,
    pub c: T,
    pub beta: T,
}

/// Right-angled hexagon together with the perpendicular `d` between `c` and
/// `gamma` and the maximal altitude `h_alpha` of the pentagon cut off by `d`
/// on the side of `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hexagon<T> {
    pub a: T,
    pub gamma: T,
    pub b: T,
    pub alpha: T,
    pub c: T,
    pub beta: T,
    pub d: T,
    pub h_alpha: T,
}

/// Standard collar around a closed geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Collar<T> {
    pub ell: T,
    pub w: T,
    /// True for the one-sided collar of a boundary geodesic.
    pub half: bool,
}

/// A named identity residual (relative error).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub identity: String,
    pub value: f64,
}

fn residual<T: Real>(name: &str, lhs: T, rhs: T) -> Residual {
    Residual { identity: name.to_string(), value: rel_err(lhs, rhs, T::min_positive_value()).as_f64() }
}

/// Largest entry of a residual list.
pub fn max_residual(rs: &[Residual]) -> f64 {
    rs.iter().map(|r| r.value).fold(0.0, f64::max)
}

fn positive<T: Real>(name: &str, x: T) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {x}")))
    }
}

// ---------------------------------------------------------------------------
// Trirectangles
// ---------------------------------------------------------------------------

/// Solves the trirectangle with right-angle sides `a`, `b`.
pub fn trirectangle_solve<T: Real>(a: T, b: T) -> Result<Trirectangle<T>> {
    positive("a", a)?;
    positive("b", b)?;
    let ta = b.cosh() * a.tanh();
    let tb = a.cosh() * b.tanh();
    if ta >= T::one() || tb >= T::one() {
        return Err(Error::GeometryInfeasible(format!(
            "no trirectangle with a = {a}, b = {b}: cosh b tanh a = {ta}, cosh a tanh b = {tb}"
        )));
    }
    let alpha = atanh(ta);
    let beta = acosh(alpha.sinh() / a.sinh());
    Ok(Trirectangle { a, b, alpha, beta })
}

impl<T: Real> Trirectangle<T> {
    pub fn residuals(&self) -> Vec<Residual> {
        vec![
            residual("tanh alpha = cosh b tanh a", self.alpha.tanh(), self.b.cosh() * self.a.tanh()),
            residual("tanh beta = cosh a tanh b", self.beta.tanh(), self.a.cosh() * self.b.tanh()),
            residual("sinh alpha = cosh beta sinh a", self.alpha.sinh(), self.beta.cosh() * self.a.sinh()),
        ]
    }
}

// ---------------------------------------------------------------------------
// Pentagons
// ---------------------------------------------------------------------------

/// Right-angled pentagon from the two sides adjacent to the vertex opposite `c`.
pub fn pentagon_from_legs<T: Real>(a: T, b: T) -> Result<Pentagon<T>> {
    positive("a", a)?;
    positive("b", b)?;
    let p = a.sinh() * b.sinh();
    if p <= T::one() {
        return Err(Error::GeometryInfeasible(format!(
            "no right-angled pentagon with legs {a}, {b}: sinh a sinh b = {p} <= 1"
        )));
    }
    let c = acosh(p);
    let sc = c.sinh();
    Ok(Pentagon { a, b, alpha: asinh(a.cosh() / sc), c, beta: asinh(b.cosh() / sc) })
}

impl<T: Real> Pentagon<T> {
    /// Sides in cyclic order.
    pub fn sides(&self) -> [T; 5] {
        [self.a, self.b, self.alpha, self.c, self.beta]
    }

    pub fn residuals(&self) -> Vec<Residual> {
        let (a, b, al, c, be) = (self.a, self.b, self.alpha, self.c, self.beta);
        let s2 = |x: T| x.sinh() * x.sinh();
        let t2 = |x: T| x.tanh() * x.tanh();
        vec![
            residual("cosh c = sinh a sinh b", c.cosh(), a.sinh() * b.sinh()),
            residual("cosh c = coth alpha coth beta", c.cosh(), coth(al) * coth(be)),
            residual(
                "sinh^2 c = 1/sinh^2 beta + 1/(sinh^2 alpha tanh^2 beta)",
                s2(c),
                T::one() / s2(be) + T::one() / (s2(al) * t2(be)),
            ),
            residual("tanh^2 c = 1 - tanh^2 alpha tanh^2 beta", t2(c), T::one() - t2(al) * t2(be)),
            residual("cosh a = sinh alpha sinh c", a.cosh(), al.sinh() * c.sinh()),
            residual("cosh b = sinh beta sinh c", b.cosh(), be.sinh() * c.sinh()),
        ]
    }
}

/// Side of the regular right-angled pentagon, `arccosh` of the golden ratio.
pub fn regular_pentagon_side<T: Real>() -> T {
    acosh((T::one() + T::lit(5.0).sqrt()) / T::lit(2.0))
}

// ---------------------------------------------------------------------------
// Hexagons
// ---------------------------------------------------------------------------

/// Side opposite `z` between `x` and `y` in a right-angled hexagon with
/// alternating sides `x, y, z`.
fn hexagon_opposite<T: Real>(x: T, y: T, z: T) -> T {
    acosh((z.cosh() + x.cosh() * y.cosh()) / (x.sinh() * y.sinh()))
}

/// Right-angled hexagon from the alternating sides `a, b, c`.
pub fn hexagon_solve<T: Real>(a: T, b: T, c: T) -> Result<Hexagon<T>> {
    positive("a", a)?;
    positive("b", b)?;
    positive("c", c)?;
    let gamma = hexagon_opposite(a, b, c);
    let alpha = hexagon_opposite(b, c, a);
    let beta = hexagon_opposite(c, a, b);
    let d = asinh(perpendicular_sinh_sq(alpha, beta, gamma).sqrt());
    let h_alpha = asinh(T::one() / (alpha.tanh() * b.tanh() * d.tanh()));
    Ok(Hexagon { a, gamma, b, alpha, c, beta, d, h_alpha })
}

/// `sinh^2` of the perpendicular between `c` and `gamma`.
fn perpendicular_sinh_sq<T: Real>(alpha: T, beta: T, gamma: T) -> T {
    let (ca, cb, cg) = (alpha.cosh(), beta.cosh(), gamma.cosh());
    let sg = gamma.sinh();
    (ca * ca + cb * cb + T::lit(2.0) * ca * cb * cg) / (sg * sg)
}

impl<T: Real> Hexagon<T> {
    /// Sides in cyclic order.
    pub fn sides(&self) -> [T; 6] {
        [self.a, self.gamma, self.b, self.alpha, self.c, self.beta]
    }

    /// The same hexagon solved from the other alternating triple, so that
    /// `gamma, alpha, beta` play the role of `a, b, c`.
    pub fn rotated(&self) -> Result<Hexagon<T>> {
        hexagon_solve(self.gamma, self.alpha, self.beta)
    }

    /// Upper bound `cosh^2 gamma / tanh alpha` on `sinh h_alpha`.
    pub fn altitude_bound(&self) -> T {
        let cg = self.gamma.cosh();
        cg * cg / self.alpha.tanh()
    }

    pub fn residuals(&self) -> Vec<Residual> {
        let h = self;
        let s2 = |x: T| x.sinh() * x.sinh();
        vec![
            residual("cosh gamma", h.gamma.cosh(), (h.c.cosh() + h.a.cosh() * h.b.cosh()) / (h.a.sinh() * h.b.sinh())),
            residual("cosh alpha", h.alpha.cosh(), (h.a.cosh() + h.b.cosh() * h.c.cosh()) / (h.b.sinh() * h.c.sinh())),
            residual("cosh beta", h.beta.cosh(), (h.b.cosh() + h.c.cosh() * h.a.cosh()) / (h.c.sinh() * h.a.sinh())),
            residual("sinh^2 d = sinh^2 alpha sinh^2 b - 1", s2(h.d), s2(h.alpha) * s2(h.b) - T::one()),
            residual("sinh^2 d = sinh^2 beta sinh^2 a - 1", s2(h.d), s2(h.beta) * s2(h.a) - T::one()),
            residual(
                "sinh h_alpha = 1/(tanh alpha tanh b tanh d)",
                h.h_alpha.sinh(),
                T::one() / (h.alpha.tanh() * h.b.tanh() * h.d.tanh()),
            ),
        ]
    }

    /// Whether `sinh h_alpha <= cosh^2 gamma / tanh alpha` holds up to `tol`.
    pub fn altitude_bound_holds(&self, tol: T) -> bool {
        self.h_alpha.sinh() <= self.altitude_bound() + tol
    }
}

/// Side of the regular right-angled hexagon, `arccosh 2`.
pub fn regular_hexagon_side<T: Real>() -> T {
    acosh(T::lit(2.0))
}

/// The three seams of the pants with boundary lengths `l_alpha, l_beta,
/// l_gamma`, returned as (between alpha and beta, between beta and gamma,
/// between gamma and alpha).
pub fn pants_perpendiculars<T: Real>(l_alpha: T, l_beta: T, l_gamma: T) -> Result<(T, T, T)> {
    let two = T::lit(2.0);
    let h = hexagon_solve(l_alpha / two, l_beta / two, l_gamma / two)?;
    Ok((h.gamma, h.alpha, h.beta))
}

// ---------------------------------------------------------------------------
// Collars
// ---------------------------------------------------------------------------

/// Standard collar half-width `arcsinh(1 / sinh(ell / 2))`.
pub fn collar_width<T: Real>(ell: T) -> T {
    asinh(T::one() / (ell / T::lit(2.0)).sinh())
}

/// Lower bound on the length of any closed geodesic crossing a geodesic of
/// length `ell`.
pub fn crossing_length_bound<T: Real>(ell: T) -> T {
    T::lit(2.0) * collar_width(ell)
}

impl<T: Real> Collar<T> {
    /// Standard collar of a geodesic of length `ell`.
    pub fn standard(ell: T, half: bool) -> Result<Self> {
        positive("ell", ell)?;
        Ok(Collar { ell, w: collar_width(ell), half })
    }

    /// Area `2 ell sinh w`, halved for a one-sided collar.
    pub fn area(&self) -> T {
        let full = T::lit(2.0) * self.ell * self.w.sinh();
        if self.half {
            full / T::lit(2.0)
        } else {
            full
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trirectangle_reference_value() {
        let t = trirectangle_solve(0.3_f64, 0.4).unwrap();
        // 50-digit reference: atanh(cosh 0.4 tanh 0.3)
        assert!((t.alpha - 0.326_008_862_965_847_5).abs() < 1e-14);
        assert!(max_residual(&t.residuals()) < 1e-13);
    }

    #[test]
    fn trirectangle_symmetric_and_infeasible() {
        let t = trirectangle_solve(0.5_f64, 0.5).unwrap();
        assert!((t.alpha - t.beta).abs() < 1e-12);
        assert!(matches!(trirectangle_solve(1.0_f64, 1.0), Err(Error::GeometryInfeasible(_))));
    }

    #[test]
    fn pentagon_degenerate_legs_rejected() {
        let s = asinh(1.0_f64);
        assert!(matches!(pentagon_from_legs(s, s), Err(Error::GeometryInfeasible(_))));
    }

    #[test]
    fn hexagon_gamma_symmetric_in_a_b() {
        let h1 = hexagon_solve(0.7_f64, 1.9, 1.1).unwrap();
        let h2 = hexagon_solve(1.9_f64, 0.7, 1.1).unwrap();
        assert!((h1.gamma - h2.gamma).abs() < 1e-14);
    }

    #[test]
    fn collar_special_values() {
        let s = asinh(1.0_f64);
        assert!((collar_width(2.0 * s) - s).abs() < 1e-14);
        assert!((crossing_length_bound(2.0 * s) - 2.0 * s).abs() < 1e-14);
        for &l in &[0.01, 0.1, 1.0, 10.0] {
            assert!(Collar::standard(l, false).unwrap().area() <= 4.0 + 1e-12);
        }
    }

    #[test]
    fn half_collar_area_is_half() {
        let full = Collar::standard(2.0_f64, false).unwrap();
        let half = Collar::standard(2.0_f64, true).unwrap();
        assert!((full.area() - 2.0 * half.area()).abs() < 1e-14);
    }

    #[test]
    fn single_precision_regular_polygons() {
        let s: f32 = regular_hexagon_side();
        let h = hexagon_solve(s, s, s).unwrap();
        assert!((h.gamma - s).abs() < 1e-4);
        let p: f32 = regular_pentagon_side();
        let pent = pentagon_from_legs(p, p).unwrap();
        assert!((pent.c - p).abs() < 1e-4);
    }
}
