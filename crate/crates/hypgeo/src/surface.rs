//! Pants complexes (Fenchel–Nielsen data), the chain gluing of two-boundary
//! pieces, test-function eigenvalue bounds and Cheng-type ball bounds.
//!
//! Twists are bookkeeping only: they are stored modulo the curve length and
//! never enter a metric computation.

use crate::error::{Error, Result};
use crate::hyptrig::{collar_width, Collar};
use crate::pants_maps::{Pants, PantsMap};
use crate::scalar::{acosh, asinh, Real};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Interior curve length used by [`glue_chain`] when none is given.
pub const DEFAULT_INTERIOR_LENGTH: f64 = 2.0;
const LENGTH_TOL: f64 = 1e-12;

/// Smallest allowed interior curve length in a pants that holds a boundary.
pub fn boundary_pants_floor() -> f64 {
    2.0 * asinh(1.0)
}

/// A boundary slot of a pants node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Slot {
    pub pants: usize,
    pub index: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PantsNode {
    pub lengths: [f64; 3],
    pub labels: [String; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gluing {
    pub a: Slot,
    pub b: Slot,
    pub twist: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PantsComplex {
    pub pants: Vec<PantsNode>,
    pub gluings: Vec<Gluing>,
    pub free_boundary: Vec<Slot>,
}

fn slots_of(p: usize) -> [Slot; 3] {
    [0u8, 1, 2].map(|index| Slot { pants: p, index })
}

impl PantsComplex {
    pub fn length(&self, s: Slot) -> f64 {
        self.pants[s.pants].lengths[s.index as usize]
    }

    pub fn label(&self, s: Slot) -> &str {
        &self.pants[s.pants].labels[s.index as usize]
    }

    pub fn euler_characteristic(&self) -> i64 {
        -(self.pants.len() as i64)
    }

    pub fn interior_curves(&self) -> usize {
        self.gluings.len()
    }

    pub fn boundary_count(&self) -> usize {
        self.free_boundary.len()
    }

    /// Genus of the (connected, orientable) surface.
    pub fn genus(&self) -> usize {
        (2 + self.pants.len() - self.free_boundary.len()) / 2
    }

    pub fn is_closed(&self) -> bool {
        self.free_boundary.is_empty()
    }

    /// Index of the gluing with this label.
    pub fn curve(&self, label: &str) -> Option<usize> {
        self.gluings.iter().position(|g| g.label == label)
    }

    /// Indices of gluings whose label starts with `prefix`.
    pub fn curves_with_prefix(&self, prefix: &str) -> Vec<usize> {
        (0..self.gluings.len()).filter(|&i| self.gluings[i].label.starts_with(prefix)).collect()
    }

    /// Number of free slots in each pants.
    pub fn boundary_per_pants(&self) -> Vec<usize> {
        let mut out = vec![0; self.pants.len()];
        for s in &self.free_boundary {
            out[s.pants] += 1;
        }
        out
    }

    /// Pants holding at least one free slot.
    pub fn boundary_pants(&self) -> Vec<usize> {
        self.boundary_per_pants().iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, _)| i).collect()
    }

    /// Checks slot bookkeeping, matching lengths and connectivity.
    pub fn validate(&self) -> Result<()> {
        let mut seen: BTreeMap<Slot, usize> = BTreeMap::new();
        let mut mark = |s: Slot| -> Result<()> {
            if s.pants >= self.pants.len() || s.index > 2 {
                return Err(Error::PatternMismatch(format!("slot {s:?} does not exist")));
            }
            *seen.entry(s).or_default() += 1;
            Ok(())
        };
        for g in &self.gluings {
            mark(g.a)?;
            mark(g.b)?;
        }
        for &s in &self.free_boundary {
            mark(s)?;
        }
        for p in 0..self.pants.len() {
            for s in slots_of(p) {
                match seen.get(&s).copied().unwrap_or(0) {
                    1 => {}
                    c => return Err(Error::PatternMismatch(format!("slot {s:?} used {c} times"))),
                }
            }
            for &l in &self.pants[p].lengths {
                if !(l > 0.0 && l.is_finite()) {
                    return Err(Error::LengthConstraintViolated(format!("pants {p} has length {l}")));
                }
            }
        }
        for g in &self.gluings {
            let (la, lb) = (self.length(g.a), self.length(g.b));
            if (la - lb).abs() > LENGTH_TOL * la.max(1.0) {
                return Err(Error::LengthConstraintViolated(format!("gluing {} joins lengths {la} and {lb}", g.label)));
            }
        }
        if self.components(&[]).len() > 1 {
            return Err(Error::PatternMismatch("complex is disconnected".into()));
        }
        Ok(())
    }

    /// Connected components of the pants graph with the listed gluings cut.
    pub fn components(&self, cut: &[usize]) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.pants.len()).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            let mut y = x;
            while parent[y] != r {
                let next = parent[y];
                parent[y] = r;
                y = next;
            }
            r
        }
        for (i, g) in self.gluings.iter().enumerate() {
            if cut.contains(&i) {
                continue;
            }
            let (a, b) = (find(&mut parent, g.a.pants), find(&mut parent, g.b.pants));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for p in 0..self.pants.len() {
            let r = find(&mut parent, p);
            groups.entry(r).or_default().push(p);
        }
        groups.into_values().collect()
    }

    /// Checks that every pants has at most one free slot and that the other
    /// two curves of each boundary pants are at least `2 arcsinh 1`.
    pub fn check_boundary_pants(&self) -> Result<()> {
        let floor = boundary_pants_floor() - LENGTH_TOL;
        for (p, &count) in self.boundary_per_pants().iter().enumerate() {
            if count > 1 {
                return Err(Error::PatternMismatch(format!("pants {p} holds {count} boundary components")));
            }
            if count == 1 {
                for s in slots_of(p) {
                    if !self.free_boundary.contains(&s) && self.length(s) < floor {
                        return Err(Error::LengthConstraintViolated(format!(
                            "boundary pants {p} has interior curve {} of length {} < 2 arcsinh 1",
                            self.label(s),
                            self.length(s)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Lengths for [`build_decomposition`]: boundary lengths in order, one
/// default interior length, and per-label overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthAssignment {
    pub boundary: Vec<f64>,
    pub interior: f64,
    #[serde(default)]
    pub overrides: BTreeMap<String, f64>,
}

impl LengthAssignment {
    pub fn uniform(n: usize, boundary: f64, interior: f64) -> Self {
        LengthAssignment { boundary: vec![boundary; n], interior, overrides: BTreeMap::new() }
    }

    fn interior_length(&self, label: &str) -> f64 {
        self.overrides.get(label).copied().unwrap_or(self.interior)
    }
}

/// Pants decomposition of a genus-`g` surface with `n` boundary components
/// in which each pants holds at most one boundary.
///
/// Boundary `i` sits in pants `P_i = (gamma_i, alpha_{i-1}, alpha_i)`; the
/// `P_i` form a chain. For `g = 1` the chain closes up (`alpha_n = alpha_0`).
/// For `g >= 2` the chain ends are joined by a genus `g - 1` core made of
/// two-pants handles `(c_{j-1}, m_j, n_j)`, `(m_j, n_j, c_j)` with
/// `c_0 = alpha_0` and `c_{g-1} = alpha_n`.
pub fn build_decomposition(g: usize, n: usize, lengths: &LengthAssignment) -> Result<PantsComplex> {
    if g == 0 {
        return Err(Error::Domain("genus must be at least 1".into()));
    }
    if g == 1 && n == 0 {
        return Err(Error::Domain("a closed torus carries no hyperbolic metric".into()));
    }
    if lengths.boundary.len() != n {
        return Err(Error::ArityMismatch { expected: n, got: lengths.boundary.len() });
    }
    let alpha = |i: usize| -> String {
        let i = if g == 1 { i % n } else { i };
        format!("alpha{i}")
    };
    let mut labels: Vec<[String; 3]> = Vec::new();
    if g >= 2 {
        let h = g - 1;
        let c = |j: usize| -> String {
            if j == 0 {
                alpha(0)
            } else if j == h {
                alpha(n)
            } else {
                format!("c{j}")
            }
        };
        for j in 1..=h {
            labels.push([c(j - 1), format!("m{j}"), format!("n{j}")]);
            labels.push([format!("m{j}"), format!("n{j}"), c(j)]);
        }
    }
    let mut free_labels = Vec::new();
    for i in 1..=n {
        let gamma = format!("gamma{i}");
        free_labels.push(gamma.clone());
        labels.push([gamma, alpha(i - 1), alpha(i)]);
    }
    let mut pants = Vec::with_capacity(labels.len());
    let mut free_boundary = Vec::new();
    let mut open: BTreeMap<String, Slot> = BTreeMap::new();
    let mut order: Vec<(String, Slot, Slot)> = Vec::new();
    for (p, ls) in labels.into_iter().enumerate() {
        let mut lens = [0.0; 3];
        for (k, label) in ls.iter().enumerate() {
            let slot = Slot { pants: p, index: k as u8 };
            if let Some(i) = free_labels.iter().position(|f| f == label) {
                lens[k] = lengths.boundary[i];
                free_boundary.push(slot);
            } else {
                lens[k] = lengths.interior_length(label);
                match open.remove(label) {
                    Some(first) => order.push((label.clone(), first, slot)),
                    None => {
                        open.insert(label.clone(), slot);
                    }
                }
            }
        }
        pants.push(PantsNode { lengths: lens, labels: ls });
    }
    debug_assert!(open.is_empty());
    let gluings = order.into_iter().map(|(label, a, b)| Gluing { a, b, twist: 0.0, label }).collect();
    let complex = PantsComplex { pants, gluings, free_boundary };
    complex.validate()?;
    complex.check_boundary_pants()?;
    Ok(complex)
}

/// Whitehead move on an interior curve separating two distinct pants
/// `P = (alpha, x1, x2)` and `Q = (alpha, y1, y2)`: the new curve of length
/// `new_length` bounds `(x1, y2)` on one side and `(y1, x2)` on the other.
/// Applying the move twice (with the old length) restores the complex.
pub fn whitehead_move(complex: &PantsComplex, curve: usize, new_length: f64) -> Result<PantsComplex> {
    let g = complex.gluings.get(curve).ok_or_else(|| Error::PatternMismatch(format!("no interior curve {curve}")))?;
    if g.a.pants == g.b.pants {
        return Err(Error::PatternMismatch(format!("curve {} bounds a single pants on both sides", g.label)));
    }
    if !(new_length >= boundary_pants_floor() - LENGTH_TOL) || !new_length.is_finite() {
        return Err(Error::LengthConstraintViolated(format!("new curve length {new_length} is below 2 arcsinh 1")));
    }
    let others = |s: Slot| -> [Slot; 2] {
        let [a, b, c] = slots_of(s.pants);
        match s.index {
            0 => [b, c],
            1 => [a, c],
            _ => [a, b],
        }
    };
    let (x2, y2) = (others(g.a)[1], others(g.b)[1]);
    let swap = |s: Slot| -> Slot {
        if s == x2 {
            y2
        } else if s == y2 {
            x2
        } else {
            s
        }
    };
    let mut out = complex.clone();
    let (px, ix) = (x2.pants, x2.index as usize);
    let (py, iy) = (y2.pants, y2.index as usize);
    let (lx, tx) = (complex.pants[px].lengths[ix], complex.pants[px].labels[ix].clone());
    let (ly, ty) = (complex.pants[py].lengths[iy], complex.pants[py].labels[iy].clone());
    out.pants[px].lengths[ix] = ly;
    out.pants[px].labels[ix] = ty;
    out.pants[py].lengths[iy] = lx;
    out.pants[py].labels[iy] = tx;
    for gl in out.gluings.iter_mut() {
        gl.a = swap(gl.a);
        gl.b = swap(gl.b);
    }
    for s in out.free_boundary.iter_mut() {
        *s = swap(*s);
    }
    let (a, b) = (out.gluings[curve].a, out.gluings[curve].b);
    out.pants[a.pants].lengths[a.index as usize] = new_length;
    out.pants[b.pants].lengths[b.index as usize] = new_length;
    out.gluings[curve].twist = out.gluings[curve].twist.rem_euclid(new_length);
    if out.boundary_per_pants().iter().any(|&c| c > 1) {
        return Err(Error::PatternMismatch(format!(
            "move on {} would put two boundary components in one pants",
            g.label
        )));
    }
    out.validate()?;
    Ok(out)
}

/// How [`perturb_boundaries`] treats the pants-map admissibility condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Admissibility {
    /// Every changed boundary pants must admit the distortion-controlled
    /// map, with `ell` the larger of the old and new boundary lengths.
    Enforce,
    /// Lengths are changed as bookkeeping, without the map.
    Skip,
}

/// Replaces boundary length `l_i` by `(1 + delta_i) l_i`, leaving every
/// other length and every twist unchanged.
pub fn perturb_boundaries(y: &PantsComplex, deltas: &[f64], mode: Admissibility) -> Result<PantsComplex> {
    if deltas.len() != y.free_boundary.len() {
        return Err(Error::ArityMismatch { expected: y.free_boundary.len(), got: deltas.len() });
    }
    if y.boundary_per_pants().iter().any(|&c| c > 1) {
        return Err(Error::PatternMismatch("a pants holds more than one boundary".into()));
    }
    let mut out = y.clone();
    for (&s, &delta) in y.free_boundary.iter().zip(deltas) {
        if !(delta > -1.0) || !delta.is_finite() {
            return Err(Error::Domain(format!("boundary change {delta} must exceed -1")));
        }
        if delta == 0.0 {
            continue;
        }
        let old = y.length(s);
        let new = old * (1.0 + delta);
        if mode == Admissibility::Enforce {
            let [o1, o2] = {
                let [a, b, c] = slots_of(s.pants);
                match s.index {
                    0 => [b, c],
                    1 => [a, c],
                    _ => [a, b],
                }
            };
            let (la, lb) = (y.length(o1), y.length(o2));
            PantsMap::new(Pants::new(la, lb, old)?, Pants::new(la, lb, new)?, old.max(new))?;
        }
        out.pants[s.pants].lengths[s.index as usize] = new;
    }
    Ok(out)
}

/// Changes that make every boundary of `y` have length `eps`.
pub fn equalizing_deltas(y: &PantsComplex, eps: f64) -> Vec<f64> {
    y.free_boundary.iter().map(|&s| eps / y.length(s) - 1.0).collect()
}

/// Split `g - 1 = i_g k + r_g` of the genus into `k` pieces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenusPartition {
    pub g: usize,
    pub k: usize,
    pub i_g: usize,
    pub r_g: usize,
    /// `k - r_g` copies of `i_g` followed by `r_g` copies of `i_g + 1`.
    pub pieces: Vec<usize>,
}

impl GenusPartition {
    pub fn new(g: usize, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("piece count must be positive".into()));
        }
        if g < k + 1 {
            return Err(Error::Domain(format!("genus {g} is too small for {k} pieces of genus >= 1")));
        }
        let (i_g, r_g) = ((g - 1) / k, (g - 1) % k);
        let mut pieces = vec![i_g; k - r_g];
        pieces.extend(std::iter::repeat_n(i_g + 1, r_g));
        Ok(GenusPartition { g, k, i_g, r_g, pieces })
    }
}

/// Closed genus-`g` surface built as a cycle of `k` two-boundary pieces
/// `Y_{g_i, 2}`, all gluing curves of length `eps`; gluing `chain{i}` joins
/// piece `i` to piece `i + 1 (mod k)`.
pub fn glue_chain(partition: &GenusPartition, eps: f64, twists: &[f64]) -> Result<PantsComplex> {
    glue_chain_with(partition, eps, twists, DEFAULT_INTERIOR_LENGTH)
}

pub fn glue_chain_with(partition: &GenusPartition, eps: f64, twists: &[f64], interior: f64) -> Result<PantsComplex> {
    let k = partition.k;
    if twists.len() != k {
        return Err(Error::ArityMismatch { expected: k, got: twists.len() });
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("boundary length {eps} must be positive")));
    }
    let mut pants = Vec::new();
    let mut gluings = Vec::new();
    // (first, second) boundary slot of each piece
    let mut ends = Vec::with_capacity(k);
    for (i, &gi) in partition.pieces.iter().enumerate() {
        let piece = build_decomposition(gi, 2, &LengthAssignment::uniform(2, eps, interior))?;
        let offset = pants.len();
        let shift = |s: Slot| Slot { pants: s.pants + offset, index: s.index };
        for mut node in piece.pants {
            for l in node.labels.iter_mut() {
                *l = format!("piece{i}/{l}");
            }
            pants.push(node);
        }
        for gl in piece.gluings {
            gluings.push(Gluing {
                a: shift(gl.a),
                b: shift(gl.b),
                twist: gl.twist,
                label: format!("piece{i}/{}", gl.label),
            });
        }
        ends.push((shift(piece.free_boundary[0]), shift(piece.free_boundary[1])));
    }
    for i in 0..k {
        let (a, b) = (ends[i].1, ends[(i + 1) % k].0);
        let label = format!("chain{i}");
        pants[a.pants].labels[a.index as usize] = label.clone();
        pants[b.pants].labels[b.index as usize] = label.clone();
        gluings.push(Gluing { a, b, twist: twists[i].rem_euclid(eps), label });
    }
    let z = PantsComplex { pants, gluings, free_boundary: Vec::new() };
    z.validate()?;
    if z.pants.len() != 2 * partition.g - 2 {
        return Err(Error::PatternMismatch(format!(
            "chain has {} pants, expected {}",
            z.pants.len(),
            2 * partition.g - 2
        )));
    }
    Ok(z)
}

/// Per-piece data of the test-function bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceQuotient {
    pub pants: Vec<usize>,
    /// `2 pi |chi|` by Gauss–Bonnet.
    pub area: f64,
    /// Lengths of the two chain curves bounding the piece.
    pub lengths: [f64; 2],
    pub widths: [f64; 2],
    /// Half-collar areas `l sinh w(l)`.
    pub collar_areas: [f64; 2],
    pub quotient: f64,
}

/// Upper bound on `lambda_{k-1}`: the largest per-piece quotient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionBound {
    pub pieces: Vec<PieceQuotient>,
    pub bound: f64,
}

/// Rayleigh quotient bound of the piecewise-linear collar test functions,
/// `(A_1 / w_1^2 + A_2 / w_2^2) / (area - 4)` per piece.
pub fn rayleigh_upper_bound(z: &PantsComplex, chain_curves: &[usize]) -> Result<TestFunctionBound> {
    if chain_curves.iter().any(|&c| c >= z.gluings.len()) {
        return Err(Error::PatternMismatch("chain curve index out of range".into()));
    }
    let comps = z.components(chain_curves);
    if comps.len() != chain_curves.len() {
        return Err(Error::PatternMismatch(format!(
            "{} chain curves cut the surface into {} pieces",
            chain_curves.len(),
            comps.len()
        )));
    }
    let pieces: Vec<Result<PieceQuotient>> = comps
        .par_iter()
        .enumerate()
        .map(|(idx, comp)| {
            let mut lengths = Vec::new();
            for &c in chain_curves {
                let g = &z.gluings[c];
                for s in [g.a, g.b] {
                    if comp.contains(&s.pants) {
                        lengths.push(z.length(s));
                    }
                }
            }
            if lengths.len() != 2 {
                return Err(Error::PatternMismatch(format!("piece {idx} meets {} chain sides", lengths.len())));
            }
            let area = 2.0 * PI * comp.len() as f64;
            if area <= 4.0 {
                return Err(Error::DegenerateArea { piece: idx, area });
            }
            let widths = [collar_width(lengths[0]), collar_width(lengths[1])];
            let collar_areas = [Collar::standard(lengths[0], true)?.area(), Collar::standard(lengths[1], true)?.area()];
            let quotient =
                (collar_areas[0] / (widths[0] * widths[0]) + collar_areas[1] / (widths[1] * widths[1])) / (area - 4.0);
            Ok(PieceQuotient {
                pants: comp.clone(),
                area,
                lengths: [lengths[0], lengths[1]],
                widths,
                collar_areas,
                quotient,
            })
        })
        .collect();
    let pieces = pieces.into_iter().collect::<Result<Vec<_>>>()?;
    let bound = pieces.iter().map(|p| p.quotient).fold(f64::NEG_INFINITY, f64::max);
    Ok(TestFunctionBound { pieces, bound })
}

/// Quotient of one `Y_{g_i, 2}` piece with boundary lengths `l1, l2`.
pub fn piece_quotient<T: Real>(genus: usize, l1: T, l2: T) -> Result<T> {
    let area = T::lit(4.0 * PI * genus as f64);
    if area <= T::lit(4.0) {
        return Err(Error::DegenerateArea { piece: 0, area: area.as_f64() });
    }
    let term = |l: T| {
        let w = collar_width(l);
        l * w.sinh() / (w * w)
    };
    Ok((term(l1) + term(l2)) / (area - T::lit(4.0)))
}

// ---------------------------------------------------------------------------
// Ball bounds
// ---------------------------------------------------------------------------

/// Area `2 pi (cosh r - 1)` of a hyperbolic disk.
pub fn ball_area<T: Real>(r: T) -> Result<T> {
    if !(r >= T::zero()) {
        return Err(Error::Domain(format!("radius {} must be non-negative", r.as_f64())));
    }
    // 2 pi (cosh r - 1) = 4 pi sinh^2(r/2), free of cancellation at small r
    let s = (r / T::lit(2.0)).sinh();
    Ok(T::lit(4.0) * T::PI() * s * s)
}

/// First Dirichlet eigenvalue bound `1/4 + (2 pi / r)^2` on a disk of radius `r`.
pub fn cheng_ball_bound<T: Real>(r: T) -> Result<T> {
    if !(r > T::zero()) {
        return Err(Error::Domain(format!("radius {} must be positive", r.as_f64())));
    }
    let q = T::lit(2.0) * T::PI() / r;
    Ok(T::lit(0.25) + q * q)
}

/// Radius `arccosh(1 + 2(g - 1)/(k + 1))` that packs `k + 1` disjoint disks
/// of radius `r/2` in a genus `g` surface.
pub fn cheng_radius<T: Real>(g: usize, k: usize) -> Result<T> {
    if g < 2 || k < 1 {
        return Err(Error::Domain(format!("need g >= 2 and k >= 1, got g = {g}, k = {k}")));
    }
    Ok(acosh(T::one() + T::lit(2.0 * (g - 1) as f64 / (k + 1) as f64)))
}

/// Upper bound `1/4 + (4 pi / r(g))^2` on `lambda_k` of any genus `g` surface.
pub fn cheng_bound<T: Real>(g: usize, k: usize) -> Result<T> {
    let r: T = cheng_radius(g, k)?;
    let q = T::lit(4.0) * T::PI() / r;
    Ok(T::lit(0.25) + q * q)
}

/// Lower bound `4 pi (g - 1) / area(B(r))` on the size of a maximal `r`-net.
pub fn net_size_lower_bound(g: usize, k: usize) -> Result<f64> {
    let r: f64 = cheng_radius(g, k)?;
    Ok(4.0 * PI * (g - 1) as f64 / ball_area(r)?)
}
