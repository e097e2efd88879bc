use std::f64::consts::PI;

use hypgeo::collar::{verify_mass_distribution, BoundaryCondition, ModeOdeParams};
use hypgeo::covers::{cycle_histogram, fixed_point_free_prob, nica_limit, systole_prob_with, FreeWord};
use hypgeo::hyptrig::{
    hexagon_solve, max_residual, pentagon_from_legs, regular_hexagon_side, trirectangle_solve, Residual,
};
use hypgeo::metrics::{
    choose_transition, gaussian_curvature, intermediate_metric, AnnulusSpec, IntermediateMetricSpec, RadialMetric,
};
use hypgeo::oracle::SturmLiouvilleProblem;
use hypgeo::oracle::{collar_fd_eigenpairs, cross_validate, shooting_eigenfunction, write_eigen_table_csv, Grid1D};
use hypgeo::pants_maps::{distortion_samples, evaluate_pentagon_map, intermediate_bounds, FermiPentagon};
use hypgeo::surface::{cheng_bound, glue_chain, rayleigh_upper_bound, GenusPartition};
use hypgeo::verify::{run_all, VerifyConfig};
use hypgeo::{Error, Result};
use serde::Serialize;
use serde_json::json;

use crate::output::{num, Output};
use crate::svg::Figure;
use crate::*;

/// Residual tolerance for `polygon` commands.
pub const POLYGON_TOL: f64 = 1e-10;

/// Runs one command; `Ok(false)` means a verification failed.
pub fn run(cmd: Command, out: &mut Output) -> Result<bool> {
    match cmd {
        Command::Polygon { shape } => polygon(shape, out),
        Command::VerifyAll(a) => verify_all(a, out),
        Command::Covers { cmd } => covers(cmd, out),
        Command::Metrics { cmd: MetricsCmd::Profile(a) } => profile(a, out),
        Command::Maps { cmd: MapsCmd::Distortion(a) } => distortion(a, out),
        Command::Maps { cmd: MapsCmd::Bounds(a) } => map_bounds(a, out),
        Command::Collar { cmd: CollarCmd::Mass(a) } => mass(a, out),
        Command::Oracle { cmd: OracleCmd::Spectrum(a) } => spectrum(a, out),
        Command::Surface { cmd: SurfaceCmd::Glue(a) } => glue(a, out),
        Command::Surface { cmd: SurfaceCmd::Bounds(a) } => surface_bounds(a, out),
    }
}

fn emit<T: Serialize>(out: &mut Output, result: &T) -> Result<()> {
    say!("{}", serde_json::to_string_pretty(result)?);
    out.json(result)
}

fn residual_rows(rs: &[Residual]) -> Vec<Vec<String>> {
    rs.iter().map(|r| vec![r.identity.clone(), num(r.value)]).collect()
}

fn polygon(shape: Shape, out: &mut Output) -> Result<bool> {
    let (polygon, sides, residuals) = match shape {
        Shape::Pentagon(a) => {
            let p = pentagon_from_legs(a.a, a.b)?;
            (serde_json::to_value(p)?, p.sides().to_vec(), p.residuals())
        }
        Shape::Hexagon(a) => {
            let (x, y, z) = if a.regular {
                let s = regular_hexagon_side::<f64>();
                (s, s, s)
            } else {
                match (a.a, a.b, a.c) {
                    (Some(x), Some(y), Some(z)) => (x, y, z),
                    _ => return Err(Error::Domain("hexagon needs --a, --b and --c or --regular".into())),
                }
            };
            let h = hexagon_solve(x, y, z)?;
            (serde_json::to_value(h)?, h.sides().to_vec(), h.residuals())
        }
        Shape::Trirectangle(a) => {
            let t = trirectangle_solve(a.a, a.b)?;
            (serde_json::to_value(t)?, vec![t.a, t.b, t.alpha, t.beta], t.residuals())
        }
    };
    let worst = max_residual(&residuals);
    let passed = worst <= POLYGON_TOL;
    out.csv("residuals", &["identity", "relative_residual"], residual_rows(&residuals))?;
    emit(
        out,
        &json!({
            "polygon": polygon,
            "sides": sides,
            "residuals": residuals,
            "max_residual": worst,
            "tolerance": POLYGON_TOL,
            "passed": passed,
        }),
    )?;
    Ok(passed)
}

fn verify_all(a: VerifyArgs, out: &mut Output) -> Result<bool> {
    if !(a.delta > 0.0 && a.delta.is_finite()) {
        return Err(Error::Domain(format!("--delta must be positive, got {}", a.delta)));
    }
    let cfg = VerifyConfig { seed: out.run.seed, suites: a.suite, delta: a.delta, trials: a.trials };
    let report = run_all(&cfg);
    say!("{:<12} {:<6} check", "suite", "result");
    for s in &report.suites {
        for c in &s.checks {
            say!("{:<12} {:<6} {}", s.suite.name(), if c.passed { "PASS" } else { "FAIL" }, c.name);
        }
    }
    let rows = report
        .suites
        .iter()
        .flat_map(|s| {
            s.checks.iter().map(move |c| vec![s.suite.name().to_string(), c.name.clone(), c.passed.to_string()])
        })
        .collect();
    out.csv("checks", &["suite", "check", "passed"], rows)?;
    out.json(&report)?;
    let failing: Vec<&str> = report.suites.iter().filter(|s| !s.passed).map(|s| s.suite.name()).collect();
    if failing.is_empty() {
        say!("all {} suites passed", report.suites.len());
    } else {
        say!("failing suites: {}", failing.join(", "));
    }
    Ok(report.passed)
}

fn histogram_figure(title: &str, x_label: &str, counts: &std::collections::BTreeMap<usize, u64>, total: f64) -> Figure {
    Figure::new(title, x_label, "frequency").bars(counts.iter().map(|(&k, &c)| (k as f64, c as f64 / total)).collect())
}

fn covers(cmd: CoversCmd, out: &mut Output) -> Result<bool> {
    let seed = out.run.seed;
    match cmd {
        CoversCmd::Fixfree(a) => {
            let word: FreeWord = a.word.parse()?;
            let est = fixed_point_free_prob(&word, a.n, a.trials, seed)?;
            let (root, d) = word.power_decomposition();
            let limit = if d == 0 { 0.0 } else { nica_limit(d as u64)? };
            if out.wants(Format::Svg) || out.wants(Format::Csv) {
                let h = cycle_histogram(&word, a.n, a.trials, seed)?;
                let rows = h.fixed_points.iter().map(|(k, c)| vec![k.to_string(), c.to_string()]).collect();
                out.csv("fixed_points", &["fixed_points", "covers"], rows)?;
                let title = format!("fixed points of {word}, n = {}", a.n);
                out.svg("fixed_points", histogram_figure(&title, "fixed points", &h.fixed_points, a.trials as f64))?;
            }
            emit(
                out,
                &json!({
                    "word": word,
                    "root": root,
                    "exponent": d,
                    "n": a.n,
                    "trials": a.trials,
                    "seed": seed,
                    "estimate": est.estimate,
                    "stderr": est.stderr,
                    "limit": limit,
                    "z_score": est.z_score(limit),
                    "within_3_stderr": est.within(limit, 3.0),
                }),
            )?;
            Ok(true)
        }
        CoversCmd::Systole(a) => {
            let est = systole_prob_with(a.eps, a.n, a.trials, seed, a.max_word_len)?;
            let rows = est
                .per_word
                .iter()
                .map(|w| {
                    vec![
                        w.word.to_string(),
                        num(w.length),
                        w.forbidden_below.to_string(),
                        num(w.violation.estimate),
                        num(w.factorial_violation.estimate),
                    ]
                })
                .collect();
            out.csv("systole_words", &["word", "length", "forbidden_below", "violation", "factorial_violation"], rows)?;
            let bars: Vec<(f64, f64)> =
                est.per_word.iter().enumerate().map(|(i, w)| (i as f64, w.violation.estimate)).collect();
            let fig =
                Figure::new(&format!("per-class violation, eps = {}", a.eps), "class index", "frequency").bars(bars);
            out.svg("systole_words", fig)?;
            emit(out, &est)?;
            Ok(true)
        }
        CoversCmd::Histogram(a) => {
            let word: FreeWord = a.word.parse()?;
            let h = cycle_histogram(&word, a.n, a.trials, seed)?;
            let rows = h.cycle_lengths.iter().map(|(k, c)| vec![k.to_string(), c.to_string()]).collect();
            out.csv("cycle_lengths", &["length", "cycles"], rows)?;
            let rows = h.fixed_points.iter().map(|(k, c)| vec![k.to_string(), c.to_string()]).collect();
            out.csv("fixed_points", &["fixed_points", "covers"], rows)?;
            let short: std::collections::BTreeMap<usize, u64> =
                h.cycle_lengths.iter().filter(|(&k, _)| k <= 40).map(|(&k, &c)| (k, c)).collect();
            let title = format!("cycles of {word} per cover, n = {}", a.n);
            out.svg("cycle_lengths", histogram_figure(&title, "cycle length", &short, a.trials as f64))?;
            let title = format!("fixed points of {word}, n = {}", a.n);
            out.svg("fixed_points", histogram_figure(&title, "fixed points", &h.fixed_points, a.trials as f64))?;
            emit(out, &h)?;
            Ok(true)
        }
    }
}

fn profile(a: ProfileArgs, out: &mut Output) -> Result<bool> {
    let r1 = a.r1.unwrap_or((-2.0 * PI).exp());
    let n = a.points.max(2);
    let t = choose_transition(r1, a.delta)?;
    let spec = IntermediateMetricSpec { r1, r2: t.r_of_rho0, rho0: t.rho0, delta: a.delta };
    let (mid, cert) = intermediate_metric(spec)?;
    let disk = RadialMetric::<f64>::punctured_disk();
    let ann = RadialMetric::annulus(AnnulusSpec::new(r1, t.r_of_rho0)?);
    let rho: Vec<f64> = (1..=n).map(|i| mid.lo + (mid.hi - mid.lo) * i as f64 / (n + 1) as f64).collect();
    let mut rows = Vec::with_capacity(n);
    let (mut kmin, mut kmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut d_o, mut d_a, mut d_m, mut k_m) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for &r in &rho {
        let (ho, ha, hm) = (disk.density(r)?, ann.density(r)?, mid.density(r)?);
        let k = gaussian_curvature(&mid, r)?;
        kmin = kmin.min(k);
        kmax = kmax.max(k);
        d_o.push((r, ho));
        d_a.push((r, ha));
        d_m.push((r, hm));
        k_m.push((r, k));
        rows.push(vec![num(r), num(ho), num(ha), num(hm), num(k)]);
    }
    out.csv("profile", &["rho", "h_punctured_disk", "h_annulus", "h_intermediate", "curvature_intermediate"], rows)?;
    out.svg(
        "densities",
        Figure::new("collar densities", "rho", "density")
            .log_y()
            .line("punctured disk", d_o)
            .line("annulus", d_a)
            .line("intermediate", d_m),
    )?;
    out.svg(
        "curvature",
        Figure::new(&format!("curvature of the intermediate metric, delta = {}", a.delta), "rho", "K")
            .band("allowed band", -1.0 - a.delta, -1.0 + a.delta)
            .line("K", k_m),
    )?;
    let passed = kmin >= -1.0 - a.delta && kmax <= -1.0 + a.delta;
    emit(
        out,
        &json!({
            "r1": r1,
            "delta": a.delta,
            "transition": t,
            "certificate": cert,
            "points": n,
            "rho_range": [mid.lo, mid.hi],
            "k_min": kmin,
            "k_max": kmax,
            "within_band": passed,
        }),
    )?;
    Ok(passed)
}

fn pentagon_pair(a: &DistortionArgs) -> Result<(FermiPentagon<f64>, FermiPentagon<f64>)> {
    let p = FermiPentagon::from_alpha_d(a.alpha, a.d)?;
    let q = p.perturbed(a.delta)?;
    Ok((p, q))
}

fn distortion(a: DistortionArgs, out: &mut Output) -> Result<bool> {
    let (p, q) = pentagon_pair(&a)?;
    let rep = evaluate_pentagon_map(&p, &q, a.grid)?;
    if out.wants(Format::Svg) || out.wants(Format::Csv) {
        let m = a.heatmap.max(2);
        let samples = distortion_samples(&p, &q, m)?;
        let rows = samples.iter().map(|&(u, v, r)| vec![num(u), num(v), num(r)]).collect();
        out.csv("distortion", &["u", "v", "ratio_max"], rows)?;
        // samples run over u outer, v / h(u) inner
        let grid: Vec<Vec<f64>> = (0..m).map(|j| (0..m).map(|i| samples[i * m + j].2 - 1.0).collect()).collect();
        let fig = Figure::new("distortion minus one", "u", "v / h(u)").heatmap((0.0, p.d), (0.0, 1.0), grid);
        out.svg("distortion", fig)?;
    }
    let passed = rep.certified;
    emit(out, &json!({ "source": p, "target": q, "report": rep }))?;
    Ok(passed)
}

fn map_bounds(a: DistortionArgs, out: &mut Output) -> Result<bool> {
    let (p, q) = pentagon_pair(&a)?;
    let checks = intermediate_bounds(&p, &q, a.grid)?;
    let rows = checks
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                c.applicable.to_string(),
                num(c.lo),
                num(c.observed_min),
                num(c.observed_max),
                num(c.hi),
                c.holds.to_string(),
            ]
        })
        .collect();
    out.csv("bounds", &["inequality", "applicable", "lo", "observed_min", "observed_max", "hi", "holds"], rows)?;
    let passed = checks.iter().all(|c| !c.applicable || c.holds);
    emit(out, &json!({ "source": p, "target": q, "checks": checks, "passed": passed }))?;
    Ok(passed)
}

fn mass(a: MassArgs, out: &mut Output) -> Result<bool> {
    let bc = match a.boundary.as_str() {
        "neumann" => BoundaryCondition::Neumann,
        "dirichlet" => BoundaryCondition::Dirichlet,
        _ => BoundaryCondition::Interior,
    };
    let p = ModeOdeParams::new(a.lambda, a.j, a.ell)?;
    let rep = verify_mass_distribution(&p, a.w1, a.w2, bc)?;
    let passed = rep.ratio <= rep.bound + 1e-8;
    out.csv(
        "mass",
        &["lambda", "j", "ell", "w1", "w2", "ratio", "bound", "sharp_bound", "wronskian_drift"],
        vec![vec![
            num(a.lambda),
            a.j.to_string(),
            num(a.ell),
            num(a.w1),
            num(a.w2),
            num(rep.ratio),
            num(rep.bound),
            num(rep.sharp_bound),
            num(rep.wronskian_drift),
        ]],
    )?;
    emit(out, &json!({ "report": rep, "within_bound": passed }))?;
    Ok(passed)
}

fn spectrum(a: SpectrumArgs, out: &mut Output) -> Result<bool> {
    let p = SturmLiouvilleProblem { two_sided: a.two_sided, ..SturmLiouvilleProblem::neumann(a.ell, a.w, a.j) };
    let grid = Grid1D::with_intervals(a.intervals)?;
    let checks = cross_validate(&p, &grid, a.count)?;
    out.csv_with("eigenvalues", |w| write_eigen_table_csv(&checks, w))?;
    if out.wants(Format::Csv) {
        let pairs = collar_fd_eigenpairs(&p, &grid, a.count)?;
        for (k, pair) in pairs.iter().enumerate() {
            out.csv_with(&format!("eigenfunction_{k}"), |w| hypgeo::oracle::write_eigenfunction_csv(pair, w))?;
        }
    }
    if out.wants(Format::Svg) {
        let mut fig = Figure::new(&format!("eigenfunctions, ell = {}, w = {}, j = {}", a.ell, a.w, a.j), "rho", "phi");
        for (k, c) in checks.iter().enumerate() {
            let f = shooting_eigenfunction(&p, c.shooting, 200)?;
            fig = fig.line(&format!("lambda_{k} = {:.6}", c.shooting), f);
        }
        out.svg("eigenfunctions", fig)?;
    }
    let passed = checks.iter().all(|c| c.agree && c.mass.iter().all(|m| m.holds));
    emit(out, &json!({ "problem": p, "intervals": a.intervals, "checks": checks, "passed": passed }))?;
    Ok(passed)
}

fn glue(a: GlueArgs, out: &mut Output) -> Result<bool> {
    let part = GenusPartition::new(a.g, a.k)?;
    let z = glue_chain(&part, a.eps, &vec![0.0; a.k])?;
    let rayleigh = rayleigh_upper_bound(&z, &z.curves_with_prefix("chain"))?;
    let cheng = cheng_bound::<f64>(a.g, a.k)?;
    let chi = z.euler_characteristic();
    let passed = z.is_closed() && z.genus() == a.g && -chi == 2 * a.g as i64 - 2;
    emit(
        out,
        &json!({
            "partition": part,
            "euler_characteristic": chi,
            "genus": z.genus(),
            "closed": z.is_closed(),
            "pants": z.pants.len(),
            "curves": z.gluings.len(),
            "rayleigh": rayleigh,
            "cheng_bound": cheng,
            "passed": passed,
        }),
    )?;
    Ok(passed)
}

fn surface_bounds(a: BoundsArgs, out: &mut Output) -> Result<bool> {
    if a.k == 0 || a.max_piece_genus == 0 {
        return Err(Error::Domain("--k and --max-piece-genus must be positive".into()));
    }
    let mut rows = Vec::new();
    let (mut ray, mut che) = (Vec::new(), Vec::new());
    let mut gi = 1;
    while gi <= a.max_piece_genus {
        let g = a.k * gi + 1;
        let z = glue_chain(&GenusPartition::new(g, a.k)?, 1.0, &vec![0.0; a.k])?;
        let r = rayleigh_upper_bound(&z, &z.curves_with_prefix("chain"))?.bound;
        let c = cheng_bound::<f64>(g, a.k)?;
        ray.push((g as f64, r));
        che.push((g as f64, c));
        rows.push(vec![g.to_string(), gi.to_string(), num(r), num(c)]);
        gi *= 2;
    }
    out.csv("bounds", &["genus", "piece_genus", "rayleigh", "cheng"], rows)?;
    out.svg(
        "bounds",
        Figure::new(&format!("eigenvalue bounds, k = {}", a.k), "genus", "bound")
            .log_y()
            .scatter_line("rayleigh upper bound", ray.clone())
            .scatter_line("cheng bound", che.clone()),
    )?;
    let ratios: Vec<f64> = ray.windows(2).map(|w| w[1].1 / w[0].1).collect();
    emit(
        out,
        &json!({
            "k": a.k,
            "genus": ray.iter().map(|x| x.0).collect::<Vec<_>>(),
            "rayleigh": ray.iter().map(|x| x.1).collect::<Vec<_>>(),
            "cheng": che.iter().map(|x| x.1).collect::<Vec<_>>(),
            "doubling_ratios": ratios,
        }),
    )?;
    Ok(true)
}
