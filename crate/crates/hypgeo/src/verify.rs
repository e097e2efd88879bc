//! Property suites behind `hypgeo verify-all` and the acceptance tests.
//!
//! Every suite draws its random inputs sequentially from a generator seeded
//! by the run seed, evaluates them in parallel and folds the results in
//! input order, so a report depends on the seed and nothing else. Timings
//! are left to the caller and never enter a report.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collar::{verify_mass_distribution, BoundaryCondition, ModeOdeParams};
use crate::covers::{fixed_point_free_prob, joint_fixed_point_free, nica_limit, FreeWord};
use crate::error::{Error, Result};
use crate::hyptrig::{hexagon_solve, max_residual, pentagon_from_legs, regular_hexagon_side, regular_pentagon_side};
use crate::metrics::{
    choose_transition, gaussian_curvature, intermediate_metric, AnnulusSpec, IntermediateMetricSpec, RadialMetric,
};
use crate::oracle::{cross_validate_batch, random_problem, Grid1D, DEFAULT_INTERVALS};
use crate::pants_maps::{certify_pentagon_map, intermediate_bounds, sample_pentagon_pair, FermiPentagon};
use crate::surface::{cheng_ball_bound, cheng_bound, cheng_radius, glue_chain, rayleigh_upper_bound, GenusPartition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Polygons,
    Curvature,
    Mass,
    PantsMaps,
    Oracle,
    Covers,
    Surface,
    Cheng,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Polygons,
        Suite::Curvature,
        Suite::Mass,
        Suite::PantsMaps,
        Suite::Oracle,
        Suite::Covers,
        Suite::Surface,
        Suite::Cheng,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Polygons => "polygons",
            Suite::Curvature => "curvature",
            Suite::Mass => "mass",
            Suite::PantsMaps => "pants-maps",
            Suite::Oracle => "oracle",
            Suite::Covers => "covers",
            Suite::Surface => "surface",
            Suite::Cheng => "cheng",
        }
    }

    /// Default sample count, overridden by `VerifyConfig::trials`.
    pub fn default_trials(self) -> u64 {
        match self {
            Suite::Polygons => 10_000,
            Suite::Curvature => 2000,
            Suite::Mass => 1000,
            Suite::PantsMaps => 200,
            Suite::Oracle => 20,
            Suite::Covers => 10_000,
            Suite::Surface | Suite::Cheng => 1,
        }
    }

    /// Wall-clock budget in seconds.
    pub fn budget_secs(self) -> f64 {
        match self {
            Suite::Polygons | Suite::Surface => 5.0,
            Suite::Curvature => 10.0,
            Suite::Mass | Suite::Oracle => 60.0,
            Suite::PantsMaps | Suite::Covers => 120.0,
            Suite::Cheng => 1.0,
        }
    }

    fn index(self) -> u64 {
        Suite::ALL.iter().position(|&s| s == self).unwrap_or(0) as u64
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| Error::Domain(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Empty means every suite.
    pub suites: Vec<Suite>,
    /// Perturbation size for the pants-map suite.
    pub delta: f64,
    pub trials: Option<u64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 42, suites: Vec::new(), delta: 1e-6, trials: None }
    }
}

impl VerifyConfig {
    pub fn selected(&self) -> Vec<Suite> {
        if self.suites.is_empty() {
            Suite::ALL.to_vec()
        } else {
            let mut s = self.suites.clone();
            s.sort();
            s.dedup();
            s
        }
    }

    fn trials(&self, s: Suite) -> u64 {
        self.trials.unwrap_or_else(|| s.default_trials()).max(1)
    }

    fn rng(&self, s: Suite) -> Xoshiro256PlusPlus {
        Xoshiro256PlusPlus::seed_from_u64(self.seed ^ (s.index() + 1).wrapping_mul(0xD1B5_4A32_D192_ED03))
    }

    fn sub_seed(&self, s: Suite, k: u64) -> u64 {
        self.seed.wrapping_add((s.index() << 32) | k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub values: BTreeMap<String, f64>,
}

fn check(name: &str, passed: bool, values: &[(&str, f64)]) -> Check {
    Check { name: name.to_string(), passed, values: values.iter().map(|(k, v)| (k.to_string(), *v)).collect() }
}

fn failed(name: &str, e: &Error) -> Check {
    Check { name: format!("{name}: {e}"), passed: false, values: BTreeMap::new() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub trials: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

pub fn run_suite(s: Suite, cfg: &VerifyConfig) -> SuiteReport {
    let checks = match s {
        Suite::Polygons => polygons(cfg),
        Suite::Curvature => curvature(cfg),
        Suite::Mass => mass(cfg),
        Suite::PantsMaps => pants_maps(cfg),
        Suite::Oracle => oracle(cfg),
        Suite::Covers => covers(cfg),
        Suite::Surface => surface(),
        Suite::Cheng => cheng(),
    };
    SuiteReport { suite: s, trials: cfg.trials(s), passed: checks.iter().all(|c| c.passed), checks }
}

/// Runs the selected suites in order.
pub fn run_all(cfg: &VerifyConfig) -> VerifyReport {
    let suites: Vec<SuiteReport> = cfg.selected().into_iter().map(|s| run_suite(s, cfg)).collect();
    VerifyReport { config: cfg.clone(), passed: suites.iter().all(|s| s.passed), suites }
}

/// Root of `f` on `[lo, hi]` by bisection; used for reference values.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == flo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn polygons(cfg: &VerifyConfig) -> Vec<Check> {
    let n = cfg.trials(Suite::Polygons) as usize;
    let mut rng = cfg.rng(Suite::Polygons);
    let mut legs = Vec::with_capacity(n);
    while legs.len() < n {
        let (a, b): (f64, f64) = (rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0));
        if a.sinh() * b.sinh() > 1.0 {
            legs.push((a, b));
        }
    }
    let triples: Vec<(f64, f64, f64)> =
        (0..n).map(|_| (rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0))).collect();
    let pent: Vec<Result<f64>> =
        legs.par_iter().map(|&(a, b)| pentagon_from_legs(a, b).map(|p| max_residual(&p.residuals()))).collect();
    let hex: Vec<Result<(f64, bool)>> = triples
        .par_iter()
        .map(|&(a, b, c)| hexagon_solve(a, b, c).map(|h| (max_residual(&h.residuals()), h.altitude_bound_holds(1e-12))))
        .collect();
    let mut out = Vec::new();
    match pent.into_iter().collect::<Result<Vec<f64>>>() {
        Ok(r) => {
            let worst = r.iter().copied().fold(0.0, f64::max);
            out.push(check("pentagon identities", worst <= 1e-10, &[("cases", n as f64), ("max_rel_residual", worst)]));
        }
        Err(e) => out.push(failed("pentagon identities", &e)),
    }
    match hex.into_iter().collect::<Result<Vec<(f64, bool)>>>() {
        Ok(r) => {
            let worst = r.iter().map(|x| x.0).fold(0.0, f64::max);
            let alt = r.iter().all(|x| x.1);
            out.push(check(
                "hexagon identities",
                worst <= 1e-10 && alt,
                &[("cases", n as f64), ("max_rel_residual", worst), ("altitude_bound", alt as u8 as f64)],
            ));
        }
        Err(e) => out.push(failed("hexagon identities", &e)),
    }
    let golden = bisect(|x| x * x - x - 1.0, 1.0, 2.0);
    let ps = regular_pentagon_side::<f64>();
    let pent_err = match pentagon_from_legs(ps, ps) {
        Ok(p) => p.sides().iter().map(|s| (s - ps).abs()).fold((ps.cosh() - golden).abs(), f64::max),
        Err(_) => f64::INFINITY,
    };
    out.push(check("regular pentagon side", pent_err <= 1e-12, &[("side", ps), ("error", pent_err)]));
    let two = bisect(|x| x * x - x - 2.0, 1.0, 3.0);
    let hs = regular_hexagon_side::<f64>();
    let hex_err = match hexagon_solve(hs, hs, hs) {
        Ok(h) => h.sides().iter().map(|s| (s - hs).abs()).fold((hs.cosh() - two).abs(), f64::max),
        Err(_) => f64::INFINITY,
    };
    out.push(check("regular hexagon side", hex_err <= 1e-12, &[("side", hs), ("error", hex_err)]));
    out
}

fn curvature_band(m: &RadialMetric<f64>, grid: &[f64]) -> Result<(f64, f64)> {
    let ks = grid.par_iter().map(|&r| gaussian_curvature(m, r)).collect::<Result<Vec<f64>>>()?;
    Ok(ks.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &k| (lo.min(k), hi.max(k))))
}

fn curvature(cfg: &VerifyConfig) -> Vec<Check> {
    let n = cfg.trials(Suite::Curvature) as usize;
    let r1 = (-2.0 * PI).exp();
    let mut out = Vec::new();
    let disk = RadialMetric::<f64>::punctured_disk();
    let grid: Vec<f64> = (1..=n).map(|i| 0.05 + 9.95 * i as f64 / (n + 1) as f64).collect();
    match curvature_band(&disk, &grid) {
        Ok((lo, hi)) => out.push(check(
            "punctured disk curvature",
            (lo + 1.0).abs() <= 1e-6 && (hi + 1.0).abs() <= 1e-6,
            &[("points", n as f64), ("k_min", lo), ("k_max", hi)],
        )),
        Err(e) => out.push(failed("punctured disk curvature", &e)),
    }
    for r2 in [0.5, 0.9] {
        let name = format!("annulus curvature (R2 = {r2})");
        let res = AnnulusSpec::new(r1, r2).and_then(|spec| {
            let (lo, hi) = spec.rho_range();
            let g: Vec<f64> = (1..=n).map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64).collect();
            curvature_band(&RadialMetric::annulus(spec), &g)
        });
        match res {
            Ok((lo, hi)) => out.push(check(
                &name,
                (lo + 1.0).abs() <= 1e-6 && (hi + 1.0).abs() <= 1e-6,
                &[("points", n as f64), ("k_min", lo), ("k_max", hi)],
            )),
            Err(e) => out.push(failed(&name, &e)),
        }
    }
    let delta = 0.1;
    let res = choose_transition(r1, delta).and_then(|t| {
        let (m, c) = intermediate_metric(IntermediateMetricSpec { r1, r2: t.r_of_rho0, rho0: t.rho0, delta })?;
        let (a, b) = (m.lo, m.hi);
        let g: Vec<f64> = (1..=2000).map(|i| a + (b - a) * i as f64 / 2001.0).collect();
        Ok((t, c, curvature_band(&m, &g)?))
    });
    match res {
        Ok((t, c, (lo, hi))) => out.push(check(
            "intermediate metric band",
            lo >= -1.0 - delta
                && hi <= -1.0 + delta
                && c.k_min >= -1.0 - delta
                && c.k_max <= -1.0 + delta
                && c.sandwich_margin >= 0.0,
            &[
                ("delta", delta),
                ("rho0", t.rho0),
                ("points", 2000.0),
                ("k_min", lo),
                ("k_max", hi),
                ("certificate_points", c.points as f64),
                ("certificate_k_min", c.k_min),
                ("certificate_k_max", c.k_max),
                ("sandwich_margin", c.sandwich_margin),
            ],
        )),
        Err(e) => out.push(failed("intermediate metric band", &e)),
    }
    out
}

fn mass(cfg: &VerifyConfig) -> Vec<Check> {
    let n = cfg.trials(Suite::Mass) as usize;
    let mut rng = cfg.rng(Suite::Mass);
    let cases: Vec<(f64, u32, f64, f64, f64)> = (0..n)
        .map(|_| {
            let lambda = if rng.gen_bool(0.2) { 0.25 } else { rng.gen_range(0.0..0.25) };
            let j = rng.gen_range(0..=8);
            let ell = rng.gen_range(0.1..10.0);
            let w2 = rng.gen_range(0.1..20.0);
            let w1 = rng.gen_range(0.05..=w2);
            (lambda, j, ell, w1, w2)
        })
        .collect();
    let reports: Vec<Result<(f64, f64)>> = cases
        .par_iter()
        .map(|&(lambda, j, ell, w1, w2)| {
            let p = ModeOdeParams::new(lambda, j, ell)?;
            let r = verify_mass_distribution(&p, w1, w2, BoundaryCondition::Interior)?;
            Ok((r.ratio - r.bound, r.wronskian_drift))
        })
        .collect();
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_drift: f64 = 0.0;
    let mut first_err = None;
    for r in reports {
        match r {
            Ok((ex, dr)) => {
                worst_excess = worst_excess.max(ex);
                worst_drift = worst_drift.max(dr);
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    if let Some(e) = first_err {
        return vec![failed("mass ratios", &e)];
    }
    vec![
        check(
            "mass ratios within bound",
            worst_excess <= 1e-8,
            &[("cases", n as f64), ("max_ratio_minus_bound", worst_excess)],
        ),
        check("wronskian drift", worst_drift < 1e-8, &[("cases", n as f64), ("max_drift", worst_drift)]),
    ]
}

/// Perturbation sizes for the intermediate-bound sweep and pentagons per size.
pub const BOUND_SWEEP: [f64; 8] = [1e-6, 1e-4, 1.0 / 800.0, 0.01, 0.04, 0.15, 0.4, 0.9];
const SWEEP_PER_DELTA: usize = 15;

fn pants_maps(cfg: &VerifyConfig) -> Vec<Check> {
    let n = cfg.trials(Suite::PantsMaps) as usize;
    let mut rng = cfg.rng(Suite::PantsMaps);
    let mut out = Vec::new();
    let pairs: Result<Vec<(FermiPentagon<f64>, FermiPentagon<f64>)>> =
        (0..n).map(|_| sample_pentagon_pair(&mut rng, cfg.delta, 1.0)).collect();
    let pairs = match pairs {
        Ok(p) => p,
        Err(e) => return vec![failed("pentagon pairs", &e)],
    };
    let reps: Vec<Result<_>> = pairs.par_iter().map(|(p, q)| certify_pentagon_map(p, q, 200)).collect();
    let mut worst_margin = f64::INFINITY;
    let mut worst_ratio: f64 = 0.0;
    let mut worst_adm: f64 = 0.0;
    let mut points = 0usize;
    let mut bad = None;
    for r in reps {
        match r {
            Ok(rep) => {
                worst_margin = rep.inequality_margins.iter().copied().fold(worst_margin, f64::min);
                worst_ratio = worst_ratio.max(rep.ratio_max - 1.0).max(1.0 - rep.ratio_min);
                worst_adm = worst_adm.max(rep.bound);
                points = points.max(rep.points);
            }
            Err(e) => {
                bad.get_or_insert(e);
            }
        }
    }
    match bad {
        Some(e) => out.push(failed("pentagon map certification", &e)),
        None => out.push(check(
            "pentagon map certification",
            worst_margin > 0.0 && worst_adm <= 1.0,
            &[
                ("pairs", n as f64),
                ("delta_d", cfg.delta),
                ("points_per_pair", points as f64),
                ("min_inequality_margin", worst_margin),
                ("max_distortion_minus_one", worst_ratio),
                ("max_admissibility_constant", worst_adm),
            ],
        )),
    }

    let mut sweep = Vec::new();
    for &delta in &BOUND_SWEEP {
        for _ in 0..SWEEP_PER_DELTA {
            let p = FermiPentagon::from_alpha_d(rng.gen_range(0.1..4.0), rng.gen_range(0.1..4.0));
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            sweep.push((p, sign * delta));
        }
    }
    let results: Vec<Result<(usize, usize)>> = sweep
        .par_iter()
        .map(|(p, d)| {
            let p = p.clone()?;
            let q = p.perturbed(*d)?;
            let checks = intermediate_bounds(&p, &q, 60)?;
            let applicable = checks.iter().filter(|c| c.applicable).count();
            let holding = checks.iter().filter(|c| c.applicable && c.holds).count();
            Ok((applicable, holding))
        })
        .collect();
    match results.into_iter().collect::<Result<Vec<(usize, usize)>>>() {
        Ok(r) => {
            let applicable: usize = r.iter().map(|x| x.0).sum();
            let holding: usize = r.iter().map(|x| x.1).sum();
            out.push(check(
                "intermediate bounds",
                applicable == holding && applicable > 0,
                &[("cases", r.len() as f64), ("applicable", applicable as f64), ("holding", holding as f64)],
            ));
        }
        Err(e) => out.push(failed("intermediate bounds", &e)),
    }

    let ident: Result<Vec<(f64, f64)>> = [(1.3, 2.1), (0.4, 0.9), (2.5, 3.7)]
        .iter()
        .map(|&(a, d)| {
            let p = FermiPentagon::from_alpha_d(a, d)?;
            let rep = certify_pentagon_map(&p, &p, 200)?;
            Ok((rep.ratio_max, rep.ratio_min))
        })
        .collect();
    match ident {
        Ok(r) => out.push(check(
            "identity map distortion",
            r.iter().all(|&(a, b)| a == 1.0 && b == 1.0),
            &[
                ("ratio_max", r.iter().map(|x| x.0).fold(0.0, f64::max)),
                ("ratio_min", r.iter().map(|x| x.1).fold(2.0, f64::min)),
            ],
        )),
        Err(e) => out.push(failed("identity map distortion", &e)),
    }
    out
}

fn oracle(cfg: &VerifyConfig) -> Vec<Check> {
    let n = cfg.trials(Suite::Oracle) as usize;
    let mut rng = cfg.rng(Suite::Oracle);
    let problems: Vec<_> = (0..n).map(|_| random_problem(&mut rng)).collect();
    let grid = match Grid1D::with_intervals(DEFAULT_INTERVALS) {
        Ok(g) => g,
        Err(e) => return vec![failed("grid", &e)],
    };
    let mut worst_rel: f64 = 0.0;
    let mut worst_form: f64 = 0.0;
    let mut mass_cases = 0usize;
    let mut mass_ok = true;
    let mut worst_mass_excess = f64::NEG_INFINITY;
    let mut all_agree = true;
    let mut count = 0usize;
    for res in cross_validate_batch(&problems, &grid, 3) {
        match res {
            Ok(checks) => {
                for c in checks {
                    count += 1;
                    all_agree &= c.agree;
                    worst_rel = worst_rel.max(c.rel_err);
                    worst_form = worst_form.max((c.shooting - c.shooting_weighted).abs() / c.shooting.abs().max(1.0));
                    for m in &c.mass {
                        mass_cases += 1;
                        mass_ok &= m.holds;
                        worst_mass_excess = worst_mass_excess.max(m.ratio - m.bound);
                    }
                }
            }
            Err(e) => return vec![failed("fd versus shooting", &e)],
        }
    }
    vec![
        check(
            "fd versus shooting",
            all_agree && worst_rel <= 1e-5,
            &[("instances", n as f64), ("eigenvalues", count as f64), ("max_rel_err", worst_rel)],
        ),
        check("shooting formulations", worst_form <= 1e-9, &[("max_rel_diff", worst_form)]),
        check(
            "eigenfunction mass bound",
            mass_ok && mass_cases > 0,
            &[("cases", mass_cases as f64), ("max_ratio_minus_bound", worst_mass_excess)],
        ),
    ]
}

fn covers(cfg: &VerifyConfig) -> Vec<Check> {
    let trials = cfg.trials(Suite::Covers);
    let n = 500;
    let mut out = Vec::new();
    let words: [(&str, u64); 2] = [("a", 1), ("aa", 2)];
    for (k, (w, d)) in words.iter().enumerate() {
        let name = format!("P(Fix({w}) = 0)");
        let res = w.parse::<FreeWord>().and_then(|word| {
            let e = fixed_point_free_prob(&word, n, trials, cfg.sub_seed(Suite::Covers, k as u64))?;
            Ok((e, nica_limit(*d)?))
        });
        match res {
            Ok((e, lim)) => out.push(check(
                &name,
                e.within(lim, 3.0),
                &[
                    ("n", n as f64),
                    ("trials", trials as f64),
                    ("estimate", e.estimate),
                    ("stderr", e.stderr),
                    ("limit", lim),
                ],
            )),
            Err(e) => out.push(failed(&name, &e)),
        }
    }
    let res = "a".parse::<FreeWord>().and_then(|a| {
        let ab: FreeWord = "ab".parse()?;
        joint_fixed_point_free(&a, &ab, n, trials, cfg.sub_seed(Suite::Covers, 2))
    });
    match res {
        Ok(j) => out.push(check(
            "joint factorization (a, ab)",
            j.factorizes(3.0),
            &[
                ("joint", j.joint.estimate),
                ("product", j.first.estimate * j.second.estimate),
                ("dependence", j.dependence),
                ("stderr", j.dependence_stderr),
                ("limit_product", j.limit_product),
            ],
        )),
        Err(e) => out.push(failed("joint factorization (a, ab)", &e)),
    }
    out
}

fn chain_bound(g: usize, k: usize) -> Result<f64> {
    let z = glue_chain(&GenusPartition::new(g, k)?, 1.0, &vec![0.0; k])?;
    Ok(rayleigh_upper_bound(&z, &z.curves_with_prefix("chain"))?.bound)
}

fn surface() -> Vec<Check> {
    let mut out = Vec::new();
    for (g, k, want) in [(9usize, 4usize, vec![2usize, 2, 2, 2]), (10, 4, vec![2, 2, 2, 3])] {
        let name = format!("glue_chain({g}, {k})");
        let res = GenusPartition::new(g, k).and_then(|p| {
            let z = glue_chain(&p, 1.0, &vec![0.0; k])?;
            Ok((p.pieces.clone(), z.euler_characteristic(), z.genus(), z.is_closed()))
        });
        match res {
            Ok((pieces, chi, genus, closed)) => out.push(check(
                &name,
                pieces == want && -chi == 2 * g as i64 - 2 && genus == g && closed,
                &[("euler_characteristic", chi as f64), ("genus", genus as f64), ("pieces", pieces.len() as f64)],
            )),
            Err(e) => out.push(failed(&name, &e)),
        }
    }
    let res: Result<Vec<f64>> = [1usize, 2, 4, 8, 16].iter().map(|&gi| chain_bound(3 * gi + 1, 3)).collect();
    match res {
        Ok(b) => {
            let ratios: Vec<f64> = b.windows(2).map(|w| w[1] / w[0]).collect();
            let decreasing = b.windows(2).all(|w| w[1] < w[0]);
            let in_band = ratios.iter().all(|r| (0.4..=0.6).contains(r));
            out.push(check(
                "rayleigh bound under doubling",
                decreasing && in_band,
                &[
                    ("bound_min_genus_1", b[0]),
                    ("bound_min_genus_16", b[4]),
                    ("ratio_min", ratios.iter().copied().fold(f64::INFINITY, f64::min)),
                    ("ratio_max", ratios.iter().copied().fold(0.0, f64::max)),
                ],
            ));
        }
        Err(e) => out.push(failed("rayleigh bound under doubling", &e)),
    }
    out
}

/// `1/4 + (4π / arccosh 2)²` to 40 digits.
pub const CHENG_2_1_REFERENCE: f64 = 91.299_160_624_495_964_289_328_948_736_068_210_594_1;

fn cheng() -> Vec<Check> {
    let mut out = Vec::new();
    match cheng_bound::<f64>(2, 1) {
        Ok(b) => out.push(check(
            "cheng(2, 1)",
            (b - CHENG_2_1_REFERENCE).abs() <= 1e-9,
            &[("value", b), ("error", (b - CHENG_2_1_REFERENCE).abs())],
        )),
        Err(e) => out.push(failed("cheng(2, 1)", &e)),
    }
    let res: Result<Vec<f64>> = [2usize, 10, 100, 10_000].iter().map(|&g| cheng_bound::<f64>(g, 1)).collect();
    match res {
        Ok(b) => {
            let ok = b.windows(2).all(|w| w[1] < w[0]) && b.iter().all(|&x| x > 0.25);
            out.push(check(
                "cheng monotone towards 1/4",
                ok,
                &[("g2", b[0]), ("g10", b[1]), ("g100", b[2]), ("g10000", b[3])],
            ));
        }
        Err(e) => out.push(failed("cheng monotone towards 1/4", &e)),
    }
    let mut worst: f64 = 0.0;
    for g in [2usize, 3, 10, 100, 10_000] {
        for k in [1usize, 2, 5] {
            let r: Result<f64> = cheng_radius(g, k)
                .and_then(|r: f64| Ok((cheng_bound::<f64>(g, k)? - cheng_ball_bound(r / 2.0)?).abs()));
            match r {
                Ok(d) => worst = worst.max(d),
                Err(_) => worst = f64::INFINITY,
            }
        }
    }
    out.push(check("cheng equals ball bound at half radius", worst <= 1e-12, &[("max_abs_diff", worst)]));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            assert_eq!(serde_json::to_value(s).unwrap(), s.name());
        }
        assert!("pants_maps".parse::<Suite>().is_err());
    }

    #[test]
    fn selection_is_sorted_and_deduplicated() {
        let cfg = VerifyConfig { suites: vec![Suite::Cheng, Suite::Polygons, Suite::Cheng], ..Default::default() };
        assert_eq!(cfg.selected(), vec![Suite::Polygons, Suite::Cheng]);
        assert_eq!(VerifyConfig::default().selected().len(), 8);
    }

    #[test]
    fn reports_depend_only_on_the_seed() {
        let cfg =
            VerifyConfig { suites: vec![Suite::Polygons, Suite::Covers], trials: Some(500), ..Default::default() };
        let a = serde_json::to_string(&run_all(&cfg)).unwrap();
        assert_eq!(a, serde_json::to_string(&run_all(&cfg)).unwrap());
        let other = VerifyConfig { seed: 7, ..cfg };
        assert_ne!(a, serde_json::to_string(&run_all(&other)).unwrap());
    }

    #[test]
    fn reference_value() {
        let exact = 0.25 + (4.0 * PI / 2.0_f64.acosh()).powi(2);
        assert!((exact - CHENG_2_1_REFERENCE).abs() < 1e-12);
    }
}
