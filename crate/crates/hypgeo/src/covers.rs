//! Random degree-n covers of the three-punctured sphere.
//!
//! The fundamental group is taken to be Γ(2), free on
//! `A = [[1,2],[0,1]]` and `B = [[1,0],[2,1]]`. A cover is a pair of
//! permutations; lifts of a closed geodesic correspond to cycles of the
//! permutation its word evaluates to.
//!
//! Permutations act on the right, on `{0, .., n-1}`: `eval(uv)` applies
//! `eval(u)` first.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default word-length cap for geodesic enumeration.
pub const DEFAULT_MAX_WORD_LEN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    A,
    AInv,
    B,
    BInv,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::A, Letter::AInv, Letter::B, Letter::BInv];

    pub fn inverse(self) -> Letter {
        match self {
            Letter::A => Letter::AInv,
            Letter::AInv => Letter::A,
            Letter::B => Letter::BInv,
            Letter::BInv => Letter::B,
        }
    }

    fn symbol(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::AInv => 'A',
            Letter::B => 'b',
            Letter::BInv => 'B',
        }
    }

    /// Generator matrix in Γ(2).
    pub fn matrix(self) -> Mat {
        match self {
            Letter::A => [[1, 2], [0, 1]],
            Letter::AInv => [[1, -2], [0, 1]],
            Letter::B => [[1, 0], [2, 1]],
            Letter::BInv => [[1, 0], [-2, 1]],
        }
    }
}

/// Integer 2×2 matrix.
pub type Mat = [[i128; 2]; 2];

const IDENTITY: Mat = [[1, 0], [0, 1]];

fn mat_mul(x: &Mat, y: &Mat) -> Option<Mat> {
    let e = |i: usize, j: usize| -> Option<i128> {
        x[i][0].checked_mul(y[0][j])?.checked_add(x[i][1].checked_mul(y[1][j])?)
    };
    Some([[e(0, 0)?, e(0, 1)?], [e(1, 0)?, e(1, 1)?]])
}

/// A freely reduced word in `a, b` and their inverses.
///
/// Written with capitals for inverses: `aB` is `a b⁻¹`. Parsing also
/// accepts `a^-1`, and ignores spaces, `*` and `·`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FreeWord {
    letters: Vec<Letter>,
}

impl FreeWord {
    /// Freely reduces the letters.
    pub fn new(letters: impl IntoIterator<Item = Letter>) -> FreeWord {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        FreeWord { letters: out }
    }

    pub fn identity() -> FreeWord {
        FreeWord::default()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord { letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }

    pub fn concat(&self, other: &FreeWord) -> FreeWord {
        FreeWord::new(self.letters.iter().chain(other.letters.iter()).copied())
    }

    /// `self^d`; negative exponents invert.
    pub fn pow(&self, d: i32) -> FreeWord {
        let base = if d < 0 { self.inverse() } else { self.clone() };
        FreeWord::new((0..d.unsigned_abs()).flat_map(|_| base.letters.iter().copied()))
    }

    /// `g self g⁻¹`.
    pub fn conjugate_by(&self, g: &FreeWord) -> FreeWord {
        g.concat(self).concat(&g.inverse())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(f), Some(l)) => self.letters.len() == 1 || *f != l.inverse(),
            _ => true,
        }
    }

    /// Strips matching inverse pairs from the two ends.
    pub fn cyclically_reduced(&self) -> FreeWord {
        let s = &self.letters;
        let (mut i, mut j) = (0, s.len());
        while j - i >= 2 && s[i] == s[j - 1].inverse() {
            i += 1;
            j -= 1;
        }
        FreeWord { letters: s[i..j].to_vec() }
    }

    /// `(v, d)` with the cyclic reduction equal to `v^d` and `v` not a proper power.
    /// The identity decomposes as `(identity, 0)`.
    pub fn power_decomposition(&self) -> (FreeWord, u32) {
        let c = self.cyclically_reduced();
        let n = c.len();
        if n == 0 {
            return (c, 0);
        }
        let p = smallest_period(&c.letters);
        if n.is_multiple_of(p) {
            (FreeWord { letters: c.letters[..p].to_vec() }, (n / p) as u32)
        } else {
            (c, 1)
        }
    }

    /// Not a proper power after cyclic reduction.
    pub fn is_primitive(&self) -> bool {
        !self.is_empty() && self.power_decomposition().1 == 1
    }

    /// Lexicographically least cyclic rotation among the word and its inverse.
    /// Words are conjugate or inverse-conjugate exactly when these agree.
    pub fn class_representative(&self) -> FreeWord {
        let c = self.cyclically_reduced();
        let r1 = least_rotation(&c.letters);
        let r2 = least_rotation(&c.inverse().letters);
        FreeWord { letters: r1.min(r2) }
    }
}

fn smallest_period(s: &[Letter]) -> usize {
    // KMP failure function
    let n = s.len();
    let mut fail = vec![0usize; n];
    let mut k = 0;
    for i in 1..n {
        while k > 0 && s[i] != s[k] {
            k = fail[k - 1];
        }
        if s[i] == s[k] {
            k += 1;
        }
        fail[i] = k;
    }
    n - fail[n - 1]
}

fn least_rotation(s: &[Letter]) -> Vec<Letter> {
    (0..s.len().max(1))
        .map(|r| s[r.min(s.len())..].iter().chain(s[..r.min(s.len())].iter()).copied().collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        for l in &self.letters {
            write!(f, "{}", l.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for FreeWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<FreeWord> {
        let mut letters = Vec::new();
        let mut chars = s.chars().peekable();
        while let Some(c) = chars.next() {
            let l = match c {
                'a' => Letter::A,
                'A' => Letter::AInv,
                'b' => Letter::B,
                'B' => Letter::BInv,
                '1' if s.trim() == "1" => continue,
                ' ' | '*' | '·' => continue,
                _ => return Err(Error::Domain(format!("bad letter {c:?} in word {s:?}"))),
            };
            if chars.peek() == Some(&'^') {
                chars.next();
                let tail: String = chars.by_ref().take(2).collect();
                if tail != "-1" {
                    return Err(Error::Domain(format!("only ^-1 is accepted after a letter in {s:?}")));
                }
                letters.push(l.inverse());
            } else {
                letters.push(l);
            }
        }
        Ok(FreeWord::new(letters))
    }
}

impl TryFrom<String> for FreeWord {
    type Error = Error;

    fn try_from(s: String) -> Result<FreeWord> {
        s.parse()
    }
}

impl From<FreeWord> for String {
    fn from(w: FreeWord) -> String {
        w.to_string()
    }
}

/// Product of the generator matrices. Exact; fails only on `i128` overflow.
pub fn word_matrix(word: &FreeWord) -> Result<Mat> {
    word.letters
        .iter()
        .try_fold(IDENTITY, |m, l| mat_mul(&m, &l.matrix()).ok_or_else(|| Error::Overflow(format!("word {word}"))))
}

/// Length of the closed geodesic with this absolute trace (`|tr| > 2`).
pub fn trace_length(trace: i128) -> f64 {
    2.0 * (trace.unsigned_abs() as f64 / 2.0).acosh()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicClass {
    pub word: FreeWord,
    pub trace: i128,
    pub length: f64,
}

impl GeodesicClass {
    /// `None` for the identity and parabolic words.
    pub fn of(word: &FreeWord) -> Result<Option<GeodesicClass>> {
        let rep = word.class_representative();
        if rep.is_empty() {
            return Ok(None);
        }
        let m = word_matrix(&rep)?;
        let trace = (m[0][0] + m[1][1]).abs();
        if trace <= 2 {
            return Ok(None);
        }
        Ok(Some(GeodesicClass { word: rep, trace, length: trace_length(trace) }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicEnumeration {
    pub eps: f64,
    pub max_word_len: usize,
    pub classes: Vec<GeodesicClass>,
    /// Shortest hyperbolic length seen among words of each letter length.
    pub min_length_by_word_len: Vec<Option<f64>>,
    /// Words of the maximal length still produced classes shorter than `eps`.
    pub may_truncate: bool,
}

/// Primitive hyperbolic classes shorter than `eps`, up to rotation and inversion,
/// sorted by length then word.
pub fn enumerate_short_geodesics(eps: f64, max_word_len: usize) -> Result<GeodesicEnumeration> {
    if !(eps > 0.0) {
        return Err(Error::PreconditionUnmet(format!("eps = {eps} must be positive")));
    }
    let mut found: HashMap<FreeWord, GeodesicClass> = HashMap::new();
    let mut min_len = vec![None::<f64>; max_word_len + 1];
    let mut stack: Vec<(Vec<Letter>, Mat)> = Letter::ALL.iter().map(|&l| (vec![l], l.matrix())).collect();
    while let Some((w, m)) = stack.pop() {
        let n = w.len();
        let cyclic = n == 1 || w[0] != w[n - 1].inverse();
        let trace = (m[0][0] + m[1][1]).abs();
        if cyclic && trace > 2 {
            let length = trace_length(trace);
            let slot = &mut min_len[n];
            *slot = Some(slot.map_or(length, |x: f64| x.min(length)));
            if length < eps {
                let word = FreeWord { letters: w.clone() };
                if word.is_primitive() {
                    let rep = word.class_representative();
                    found.entry(rep.clone()).or_insert(GeodesicClass { word: rep, trace, length });
                }
            }
        }
        if n < max_word_len {
            for l in Letter::ALL {
                if l != w[n - 1].inverse() {
                    let next = mat_mul(&m, &l.matrix()).ok_or_else(|| Error::Overflow("enumeration".into()))?;
                    let mut nw = w.clone();
                    nw.push(l);
                    stack.push((nw, next));
                }
            }
        }
    }
    let mut classes: Vec<GeodesicClass> = found.into_values().collect();
    classes.sort_by(|x, y| x.length.total_cmp(&y.length).then_with(|| x.word.cmp(&y.word)));
    let may_truncate = min_len.get(max_word_len).copied().flatten().is_some_and(|l| l < eps);
    Ok(GeodesicEnumeration { eps, max_word_len, classes, min_length_by_word_len: min_len, may_truncate })
}

/// Shortest closed geodesic of the base surface.
pub fn base_systole() -> f64 {
    trace_length(6)
}

/// A homomorphism from the free group to `S_n`, given by the images of `a` and `b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermRep {
    pub n: usize,
    pub sigma_a: Vec<u32>,
    pub sigma_b: Vec<u32>,
}

impl PermRep {
    pub fn new(sigma_a: Vec<u32>, sigma_b: Vec<u32>) -> Result<PermRep> {
        let n = sigma_a.len();
        if sigma_b.len() != n {
            return Err(Error::ArityMismatch { expected: n, got: sigma_b.len() });
        }
        for p in [&sigma_a, &sigma_b] {
            if !is_permutation(p) {
                return Err(Error::Domain("not a bijection of 0..n".into()));
            }
        }
        Ok(PermRep { n, sigma_a, sigma_b })
    }

    fn tables(&self) -> [Vec<u32>; 4] {
        [self.sigma_a.clone(), inverse_perm(&self.sigma_a), self.sigma_b.clone(), inverse_perm(&self.sigma_b)]
    }

    /// Image of `i` under the word.
    pub fn act(&self, word: &FreeWord, i: u32) -> u32 {
        let t = self.tables();
        act_with(&t, word, i)
    }
}

fn letter_index(l: Letter) -> usize {
    match l {
        Letter::A => 0,
        Letter::AInv => 1,
        Letter::B => 2,
        Letter::BInv => 3,
    }
}

fn act_with(t: &[Vec<u32>; 4], word: &FreeWord, i: u32) -> u32 {
    word.letters.iter().fold(i, |x, &l| t[letter_index(l)][x as usize])
}

pub fn is_permutation(p: &[u32]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&x| (x as usize) < p.len() && !std::mem::replace(&mut seen[x as usize], true))
}

pub fn inverse_perm(p: &[u32]) -> Vec<u32> {
    let mut inv = vec![0u32; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x as usize] = i as u32;
    }
    inv
}

/// `p` then `q`.
pub fn compose(p: &[u32], q: &[u32]) -> Vec<u32> {
    p.iter().map(|&x| q[x as usize]).collect()
}

/// Uniform pair of permutations by Fisher–Yates.
pub fn sample_rep_with<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PermRep {
    let mut a: Vec<u32> = (0..n as u32).collect();
    let mut b = a.clone();
    a.shuffle(rng);
    b.shuffle(rng);
    PermRep { n, sigma_a: a, sigma_b: b }
}

pub fn sample_rep(n: usize, seed: u64) -> Result<PermRep> {
    if n == 0 {
        return Err(Error::PreconditionUnmet("degree must be at least 1".into()));
    }
    Ok(sample_rep_with(&mut Xoshiro256PlusPlus::seed_from_u64(seed), n))
}

/// Generator for trial `t` of a run seeded with `seed`. Independent of thread
/// count and of what the trial computes, so conjugate words see the same covers.
pub fn trial_rng(seed: u64, t: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed ^ (t.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn eval_word(rep: &PermRep, word: &FreeWord) -> Vec<u32> {
    let t = rep.tables();
    (0..rep.n as u32).map(|i| act_with(&t, word, i)).collect()
}

pub fn fixed_points(p: &[u32]) -> usize {
    p.iter().enumerate().filter(|(i, &x)| *i as u32 == x).count()
}

/// Cycle lengths, ascending; fixed points count as 1-cycles.
pub fn cycle_type(p: &[u32]) -> Vec<usize> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let (mut k, mut x) = (0, s);
        while !seen[x] {
            seen[x] = true;
            x = p[x] as usize;
            k += 1;
        }
        out.push(k);
    }
    out.sort_unstable();
    out
}

fn divisor_sum(d: u64) -> u64 {
    let mut s = 0;
    let mut h = 1;
    while h * h <= d {
        if d.is_multiple_of(h) {
            s += h;
            if h * h != d {
                s += d / h;
            }
        }
        h += 1;
    }
    s
}

/// Limiting probability that a `d`-th power has no fixed points: `exp(-σ(d)/d)`.
pub fn nica_limit(d: u64) -> Result<f64> {
    if d == 0 {
        return Err(Error::PreconditionUnmet("exponent must be at least 1".into()));
    }
    Ok((-(divisor_sum(d) as f64) / d as f64).exp())
}

fn primes_up_to(m: u64) -> Vec<u64> {
    (2..=m).filter(|&p| (2..).take_while(|q| q * q <= p).all(|q| p % q != 0)).collect()
}

/// `nica_limit(m!)` without forming `m!`, through Legendre's formula:
/// `σ(d)/d = Π_p (1 − p^{−(e+1)}) / (1 − 1/p)`.
pub fn nica_limit_factorial(m: u64) -> Result<f64> {
    if m == 0 {
        return nica_limit(1);
    }
    let mut log_ratio = 0.0f64;
    for p in primes_up_to(m) {
        let (mut e, mut q) = (0u64, p);
        while q <= m {
            e += m / q;
            q = match q.checked_mul(p) {
                Some(v) => v,
                None => break,
            };
        }
        let pf = p as f64;
        log_ratio += (-(-(e as f64 + 1.0) * pf.ln()).exp()).ln_1p() - (-1.0 / pf).ln_1p();
    }
    Ok((-log_ratio.exp()).exp())
}

/// `c | m!`, using `m! mod c`.
pub fn divides_factorial(c: u64, m: u64) -> bool {
    if c <= 1 || m >= c {
        return true;
    }
    let mut r = 1u64 % c;
    for k in 2..=m {
        r = ((r as u128 * k as u128) % c as u128) as u64;
        if r == 0 {
            return true;
        }
    }
    r == 0
}

/// Monte-Carlo proportion with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub hits: u64,
    pub trials: u64,
    pub estimate: f64,
    pub stderr: f64,
}

impl McEstimate {
    pub fn from_counts(hits: u64, trials: u64) -> McEstimate {
        let p = hits as f64 / trials as f64;
        McEstimate { hits, trials, estimate: p, stderr: (p * (1.0 - p) / trials as f64).sqrt() }
    }

    /// Distance to `target` in standard errors. A zero stderr counts as exact.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = self.estimate - target;
        if self.stderr > 0.0 {
            d / self.stderr
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(d)
        }
    }

    pub fn within(&self, target: f64, k: f64) -> bool {
        self.z_score(target).abs() <= k
    }
}

fn check_run(n: usize, trials: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::PreconditionUnmet("degree must be at least 1".into()));
    }
    if trials == 0 {
        return Err(Error::PreconditionUnmet("trials must be at least 1".into()));
    }
    Ok(())
}

fn count_trials(n: usize, trials: u64, seed: u64, hit: impl Fn(&PermRep) -> bool + Sync) -> u64 {
    (0..trials).into_par_iter().map(|t| hit(&sample_rep_with(&mut trial_rng(seed, t), n)) as u64).sum()
}

fn has_fixed_point(t: &[Vec<u32>; 4], word: &FreeWord, n: usize) -> bool {
    (0..n as u32).any(|i| act_with(t, word, i) == i)
}

pub fn fixed_point_free_prob(word: &FreeWord, n: usize, trials: u64, seed: u64) -> Result<McEstimate> {
    check_run(n, trials)?;
    let hits = count_trials(n, trials, seed, |rep| !has_fixed_point(&rep.tables(), word, n));
    Ok(McEstimate::from_counts(hits, trials))
}

/// Joint and marginal fixed-point-free frequencies of two words on the same covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointEstimate {
    pub first: McEstimate,
    pub second: McEstimate,
    pub joint: McEstimate,
    /// `joint − first·second`.
    pub dependence: f64,
    /// Delta-method standard error of `dependence` under the multinomial model.
    pub dependence_stderr: f64,
    /// Product of the two limiting probabilities.
    pub limit_product: f64,
}

impl JointEstimate {
    pub fn factorizes(&self, k: f64) -> bool {
        self.dependence.abs() <= k * self.dependence_stderr
    }
}

pub fn joint_fixed_point_free(w1: &FreeWord, w2: &FreeWord, n: usize, trials: u64, seed: u64) -> Result<JointEstimate> {
    check_run(n, trials)?;
    let counts = (0..trials)
        .into_par_iter()
        .map(|t| {
            let rep = sample_rep_with(&mut trial_rng(seed, t), n);
            let tb = rep.tables();
            let f1 = !has_fixed_point(&tb, w1, n);
            let f2 = !has_fixed_point(&tb, w2, n);
            [(f1 && f2) as u64, (f1 && !f2) as u64, (!f1 && f2) as u64]
        })
        .reduce(|| [0; 3], |x, y| [x[0] + y[0], x[1] + y[1], x[2] + y[2]]);
    let nt = trials as f64;
    let (p11, p10, p01) = (counts[0] as f64 / nt, counts[1] as f64 / nt, counts[2] as f64 / nt);
    let (p1, p2) = (p11 + p10, p11 + p01);
    let g = [1.0 - p1 - p2, -p2, -p1];
    let ps = [p11, p10, p01];
    let mean: f64 = g.iter().zip(ps).map(|(gi, pi)| gi * pi).sum();
    let second: f64 = g.iter().zip(ps).map(|(gi, pi)| gi * gi * pi).sum();
    let limit = |w: &FreeWord| -> Result<f64> { nica_limit(w.power_decomposition().1.max(1) as u64) };
    Ok(JointEstimate {
        first: McEstimate::from_counts(counts[0] + counts[1], trials),
        second: McEstimate::from_counts(counts[0] + counts[2], trials),
        joint: McEstimate::from_counts(counts[0], trials),
        dependence: p11 - p1 * p2,
        dependence_stderr: ((second - mean * mean).max(0.0) / nt).sqrt(),
        limit_product: limit(w1)? * limit(w2)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordDiagnostic {
    pub word: FreeWord,
    pub length: f64,
    /// Cycles shorter than this are forbidden: `k·length < eps`.
    pub forbidden_below: u64,
    /// Frequency of covers in which this word alone breaks the systole bound.
    pub violation: McEstimate,
    /// Frequency with which `φ(word)^d` has a fixed point, `d = m!`.
    pub factorial_violation: McEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystoleEstimate {
    pub eps: f64,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub max_word_len: usize,
    pub may_truncate: bool,
    /// No lift of a listed class is shorter than `eps`.
    pub systole: McEstimate,
    /// `m = ⌊eps / systole(base)⌋`; the weaker event uses `d = m!`.
    pub factorial_m: u64,
    /// Every `φ(w)^{m!}` is fixed-point free.
    pub factorial_event: McEstimate,
    /// Product of `nica_limit(m!)` over the listed classes.
    pub limit_product: f64,
    pub per_word: Vec<WordDiagnostic>,
}

/// Probability that the random cover has systole at least `eps`.
pub fn systole_prob(eps: f64, n: usize, trials: u64, seed: u64) -> Result<SystoleEstimate> {
    systole_prob_with(eps, n, trials, seed, DEFAULT_MAX_WORD_LEN)
}

pub fn systole_prob_with(eps: f64, n: usize, trials: u64, seed: u64, max_word_len: usize) -> Result<SystoleEstimate> {
    check_run(n, trials)?;
    let en = enumerate_short_geodesics(eps, max_word_len)?;
    let classes = en.classes;
    let m = (eps / base_systole()).floor() as u64;
    let forbidden: Vec<u64> = classes.iter().map(|c| (eps / c.length).ceil() as u64).collect();
    let k = classes.len();
    // per trial: [systole ok, factorial ok, per word tight violation.., per word factorial violation..]
    let zero = || vec![0u64; 2 + 2 * k];
    let counts = (0..trials)
        .into_par_iter()
        .map(|t| {
            let rep = sample_rep_with(&mut trial_rng(seed, t), n);
            let mut c = zero();
            let (mut ok, mut fok) = (true, true);
            for (i, class) in classes.iter().enumerate() {
                let cyc = cycle_type(&eval_word(&rep, &class.word));
                let bad = cyc.iter().any(|&len| (len as u64) < forbidden[i]);
                let fbad = cyc.iter().any(|&len| divides_factorial(len as u64, m));
                c[2 + i] += bad as u64;
                c[2 + k + i] += fbad as u64;
                ok &= !bad;
                fok &= !fbad;
            }
            c[0] += ok as u64;
            c[1] += fok as u64;
            c
        })
        .reduce(zero, |mut x, y| {
            x.iter_mut().zip(y).for_each(|(a, b)| *a += b);
            x
        });
    let limit = nica_limit_factorial(m)?;
    let per_word = classes
        .iter()
        .enumerate()
        .map(|(i, c)| WordDiagnostic {
            word: c.word.clone(),
            length: c.length,
            forbidden_below: forbidden[i],
            violation: McEstimate::from_counts(counts[2 + i], trials),
            factorial_violation: McEstimate::from_counts(counts[2 + k + i], trials),
        })
        .collect();
    Ok(SystoleEstimate {
        eps,
        n,
        trials,
        seed,
        max_word_len,
        may_truncate: en.may_truncate,
        systole: McEstimate::from_counts(counts[0], trials),
        factorial_m: m,
        factorial_event: McEstimate::from_counts(counts[1], trials),
        limit_product: limit.powi(k as i32),
        per_word,
    })
}

/// The image group acts transitively, i.e. the cover is connected.
pub fn is_transitive(rep: &PermRep) -> bool {
    let n = rep.n;
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut reached = 1;
    while let Some(x) = stack.pop() {
        for y in [rep.sigma_a[x] as usize, rep.sigma_b[x] as usize] {
            if !seen[y] {
                seen[y] = true;
                reached += 1;
                stack.push(y);
            }
        }
    }
    reached == n
}

pub fn transitivity_fraction(n: usize, trials: u64, seed: u64) -> Result<McEstimate> {
    check_run(n, trials)?;
    Ok(McEstimate::from_counts(count_trials(n, trials, seed, is_transitive), trials))
}

/// Fixed-point counts and cycle-length tallies of `φ(word)` over many covers.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CycleHistogram {
    pub word: FreeWord,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    /// Number of covers with exactly `k` fixed points.
    pub fixed_points: BTreeMap<usize, u64>,
    /// Total number of `k`-cycles seen.
    pub cycle_lengths: BTreeMap<usize, u64>,
}

pub fn cycle_histogram(word: &FreeWord, n: usize, trials: u64, seed: u64) -> Result<CycleHistogram> {
    check_run(n, trials)?;
    let (fixed, cycles) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let rep = sample_rep_with(&mut trial_rng(seed, t), n);
            let cyc = cycle_type(&eval_word(&rep, word));
            let mut fp = BTreeMap::new();
            fp.insert(cyc.iter().filter(|&&c| c == 1).count(), 1u64);
            let mut cl = BTreeMap::new();
            for c in cyc {
                *cl.entry(c).or_insert(0u64) += 1;
            }
            (fp, cl)
        })
        .reduce(
            || (BTreeMap::new(), BTreeMap::new()),
            |(mut f1, mut c1), (f2, c2)| {
                f2.into_iter().for_each(|(k, v)| *f1.entry(k).or_insert(0) += v);
                c2.into_iter().for_each(|(k, v)| *c1.entry(k).or_insert(0) += v);
                (f1, c1)
            },
        );
    Ok(CycleHistogram { word: word.clone(), n, trials, seed, fixed_points: fixed, cycle_lengths: cycles })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> FreeWord {
        s.parse().unwrap()
    }

    #[test]
    fn parse_display_round_trip() {
        assert_eq!(w("a b^-1 a").to_string(), "aBa");
        assert_eq!(w("aA").to_string(), "1");
        assert!("ac".parse::<FreeWord>().is_err());
    }

    #[test]
    fn power_decomposition_is_maximal() {
        assert_eq!(w("abab").power_decomposition(), (w("ab"), 2));
        assert_eq!(w("Babab").power_decomposition(), (w("aba"), 1));
        assert_eq!(w("aaa").power_decomposition(), (w("a"), 3));
    }

    #[test]
    fn divides_factorial_matches_direct() {
        for m in 0..=10u64 {
            let f: u64 = (1..=m).product();
            for c in 1..=40u64 {
                assert_eq!(divides_factorial(c, m), f.is_multiple_of(c), "c={c} m={m}");
            }
        }
    }

    #[test]
    fn factorial_limit_matches_divisor_sum() {
        for m in 1..=8u64 {
            let f: u64 = (1..=m).product();
            let direct = nica_limit(f).unwrap();
            assert!((nica_limit_factorial(m).unwrap() - direct).abs() < 1e-14, "m={m}");
        }
    }
}
