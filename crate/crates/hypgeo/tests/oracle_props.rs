use std::f64::consts::PI;
use std::time::Instant;

use hypgeo::metrics::*;
use hypgeo::oracle::*;
use hypgeo::Error;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

type Problem = SturmLiouvilleProblem<f64>;

fn grid() -> Grid1D {
    Grid1D::with_intervals(DEFAULT_INTERVALS).unwrap()
}

fn r1_std() -> f64 {
    (-2.0 * PI).exp()
}

#[test]
fn constants_are_neumann_harmonic() {
    let p = Problem::neumann(3.0, 2.0, 0);
    let pairs = collar_fd_eigenpairs(&p, &grid(), 2).unwrap();
    assert!(pairs[0].lambda.abs() < 1e-10, "{}", pairs[0].lambda);
    let mean = pairs[0].phi.iter().sum::<f64>() / pairs[0].phi.len() as f64;
    for v in &pairs[0].phi {
        assert!((v / mean - 1.0).abs() < 1e-8, "{}", v / mean - 1.0);
    }
    let s = shooting_neumann_eigen(3.0_f64, 2.0, 0, (-0.1, 0.1)).unwrap();
    assert!(s.abs() < 1e-10);
}

#[test]
fn second_order_convergence() {
    for p in [Problem::neumann(2.0, 1.5, 1), Problem::neumann(6.0, 3.0, 0), Problem::neumann(4.0, 2.0, 2)] {
        let g = Grid1D::with_intervals(256).unwrap();
        let l: Vec<f64> =
            [g, g.refined(), g.refined().refined()].iter().map(|g| collar_fd_spectrum(&p, g, 2).unwrap()[1]).collect();
        let ratio = (l[0] - l[1]) / (l[1] - l[2]);
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio} for {p:?}");
    }
}

#[test]
fn fd_and_shooting_agree_on_random_collars() {
    let start = Instant::now();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(2024);
    let problems: Vec<Problem> = (0..20).map(|_| random_problem(&mut rng)).collect();
    let mut checked = 0;
    let mut mass_checked = 0;
    for res in cross_validate_batch(&problems, &grid(), 3) {
        for c in res.unwrap() {
            assert!(c.agree, "{c:?}");
            assert!((c.shooting - c.shooting_weighted).abs() <= 1e-9 * c.shooting.abs().max(1.0), "{c:?}");
            for m in &c.mass {
                assert!(m.holds && m.ratio <= m.bound + 1e-8, "{m:?}");
                assert!(m.fd_ratio <= m.bound + 1e-5, "{m:?}");
                mass_checked += 1;
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 60);
    assert!(mass_checked > 0);
    assert!(start.elapsed().as_secs_f64() < 60.0);
}

#[test]
fn low_eigenfunctions_obey_mass_bound() {
    // long collars have j = 1, 2 modes below 1/4
    for (ell, w, j) in [(10.0, 4.0, 1), (9.0, 3.0, 1), (10.0, 4.0, 2), (5.0, 2.5, 0)] {
        let checks = cross_validate(&Problem::neumann(ell, w, j), &grid(), 1).unwrap();
        assert!(checks[0].shooting <= 0.25);
        assert_eq!(checks[0].mass.len(), MASS_FRACTIONS.len());
        for m in &checks[0].mass {
            assert!(m.holds, "{m:?}");
        }
    }
}

#[test]
fn thin_collars_push_the_eigenvalue_up() {
    let ell = 2.0;
    let angular = 4.0 * PI * PI / (ell * ell);
    let mut prev = 0.0;
    for w in [1.0, 0.5, 0.25, 0.1, 0.05] {
        let p = Problem::neumann(ell, w, 1);
        let fd = collar_fd_spectrum(&p, &grid(), 1).unwrap()[0];
        let s = shooting_neumann_eigen(ell, w, 1, (fd * 0.999, fd * 1.001)).unwrap();
        assert!(s > prev, "w = {w}");
        assert!(s < angular);
        prev = s;
    }
    assert!(prev > 0.99 * angular);
}

#[test]
fn formulations_agree() {
    for p in [Problem::neumann(1.5, 2.0, 1), Problem::neumann(7.0, 3.5, 2), Problem::neumann(3.0, 1.0, 0)] {
        let fd = collar_fd_spectrum(&p, &grid(), 2).unwrap()[1];
        let b = (fd * 0.999, fd * 1.001);
        let a = shooting_eigen(&p, Formulation::Phi, b).unwrap().lambda;
        let c = shooting_eigen(&p, Formulation::Weighted, b).unwrap().lambda;
        assert!((a - c).abs() < 1e-9 * a.max(1.0), "{a} vs {c}");
    }
}

#[test]
fn two_sided_spectrum_splits_by_parity() {
    let half_n = Problem::neumann(3.0, 1.5, 1);
    let half_d = Problem { bc_inner: EndCondition::Dirichlet, ..half_n };
    let full = Problem { two_sided: true, ..half_n };
    let g = grid();
    let mut parts: Vec<f64> = collar_fd_richardson(&half_n, &g, 3)
        .unwrap()
        .into_iter()
        .chain(collar_fd_richardson(&half_d, &g, 3).unwrap())
        .map(|r| r.extrapolated)
        .collect();
    parts.sort_by(f64::total_cmp);
    let whole: Vec<f64> =
        collar_fd_richardson(&full, &g.refined(), 4).unwrap().iter().map(|r| r.extrapolated).collect();
    for k in 0..4 {
        assert!((parts[k] - whole[k]).abs() < 1e-6 * parts[k].max(1.0), "{k}: {} vs {}", parts[k], whole[k]);
    }
}

#[test]
fn solver_preconditions() {
    let p = Problem::neumann(2.0, 1.0, 1);
    assert!(matches!(shooting_neumann_eigen(2.0, 1.0, 1, (100.0, 100.5)), Err(Error::NoSignChange { .. })));
    assert!(Grid1D::new(8).is_err());
    assert!(collar_fd_spectrum(&p, &Grid1D::new(16).unwrap(), 5).is_err());
    assert!(collar_fd_spectrum(&Problem::neumann(-1.0, 1.0, 0), &grid(), 1).is_err());
}

#[test]
fn eigenfunction_matches_fd_vector() {
    let p = Problem::neumann(4.0, 2.0, 1);
    let pair = &collar_fd_eigenpairs(&p, &grid(), 2).unwrap()[1];
    let lam = shooting_eigen(&p, Formulation::Phi, (pair.lambda * 0.999, pair.lambda * 1.001)).unwrap().lambda;
    let samples = shooting_eigenfunction(&p, lam, 64).unwrap();
    let scale = pair.phi[0];
    for (rho, v) in samples {
        let i = ((rho / p.w) * DEFAULT_INTERVALS as f64).round() as usize;
        assert!((pair.phi[i] / scale - v).abs() < 1e-5, "rho = {rho}");
    }
}

#[test]
fn csv_tables() {
    let p = Problem::neumann(3.0, 1.0, 1);
    let checks = cross_validate(&p, &Grid1D::with_intervals(512).unwrap(), 2).unwrap();
    let mut buf = Vec::new();
    write_eigen_table_csv(&checks, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 3);
    let pair = &collar_fd_eigenpairs(&p, &Grid1D::new(64).unwrap(), 1).unwrap()[0];
    let mut buf = Vec::new();
    write_eigenfunction_csv(pair, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 65);
}

#[test]
fn curvature_of_constant_density() {
    let s = SampledDensity::from_fn(|_| 1.0_f64, 0.5, 1.5, 1000);
    for rho in [0.6, 1.0, 1.4] {
        assert!((curvature_fd(&s, rho).unwrap() + 1.0).abs() < 1e-10);
    }
}

#[test]
fn curvature_of_punctured_disk() {
    let s = SampledDensity::from_fn(|x: f64| density_punctured_disk(x).unwrap(), 1.5, 2.5, 1000);
    assert!((curvature_fd(&s, 2.0).unwrap() + 1.0).abs() < 1e-5);
    assert!((curvature_fd(&s, 2.0004).unwrap() + 1.0).abs() < 1e-5);
}

#[test]
fn curvature_matches_closed_form() {
    let spec = AnnulusSpec::new(0.01_f64, 0.9).unwrap();
    let m = RadialMetric::annulus(spec);
    let (lo, hi) = spec.rho_range();
    let (a, b) = (lo + 0.05, hi - 0.05);
    let s = SampledDensity::from_metric(&m, a, b, ((b - a) / 1e-3).ceil() as usize).unwrap();
    for i in 1..200 {
        let rho = a + 0.01 + (b - a - 0.02) * i as f64 / 200.0;
        let k = curvature_fd(&s, rho).unwrap();
        let exact = gaussian_curvature(&m, rho).unwrap();
        assert!((k - exact).abs() < 1e-5, "rho = {rho}: {k} vs {exact}");
    }
}

#[test]
fn curvature_of_intermediate_metric_stays_pinched() {
    let delta = 0.1;
    let t = choose_transition(r1_std(), delta).unwrap();
    let spec = IntermediateMetricSpec { r1: r1_std(), r2: t.r_of_rho0, rho0: t.rho0, delta };
    let (m, _) = intermediate_metric(spec).unwrap();
    let (a, b) = (t.rho0 - 0.5, t.rho0 + 1.5);
    let s = SampledDensity::from_metric(&m, a, b, 4000).unwrap();
    for i in 0..2000 {
        let rho = t.rho0 - 0.2 + 1.4 * i as f64 / 1999.0;
        let k = curvature_fd(&s, rho).unwrap();
        assert!((-1.0 - delta..=-1.0 + delta).contains(&k), "rho = {rho}: {k}");
        let exact = gaussian_curvature(&m, rho).unwrap();
        assert!((k - exact).abs() < 1e-5, "rho = {rho}: {k} vs {exact}");
    }
}

#[test]
fn curvature_rejects_bad_samples() {
    let s = SampledDensity::from_fn(|_| 1.0_f64, 0.5, 1.5, 1000);
    assert!(matches!(curvature_fd(&s, 0.501), Err(Error::BoundaryTooClose(_))));
    let coarse = SampledDensity::from_fn(|_| 1.0, 0.5, 1.5, 100);
    assert!(curvature_fd(&coarse, 1.0).is_err());
}

#[test]
fn metric_comparisons() {
    let o = RadialMetric::<f64>::punctured_disk();
    let (min, max) = metric_compare(&o, &o, (0.5, 5.0), 500).unwrap();
    assert_eq!((min, max), (1.0, 1.0));

    let spec = AnnulusSpec::new(r1_std(), 0.9).unwrap();
    let ann = RadialMetric::annulus(spec);
    let (lo, hi) = spec.rho_range();
    let (min, _) = metric_compare(&o, &ann, (lo + 1e-3, hi - 1e-3), 2000).unwrap();
    assert!(min > 1.0);

    let delta = 0.1;
    let t = choose_transition(r1_std(), delta).unwrap();
    let ispec = IntermediateMetricSpec { r1: r1_std(), r2: t.r_of_rho0, rho0: t.rho0, delta };
    let (mid, _) = intermediate_metric(ispec).unwrap();
    let ann = RadialMetric::annulus(AnnulusSpec::new(ispec.r1, ispec.r2).unwrap());
    let (lo, hi) = (mid.lo + 1e-3, mid.hi - 1e-3);
    let (rmin, rmax) = metric_compare(&o, &mid, (lo, hi), 2000).unwrap();
    let (_, cap) = metric_compare(&o, &ann, (lo, hi), 2000).unwrap();
    assert!(rmin >= 1.0 - 1e-12 && rmax <= cap + 1e-12, "{rmin} {rmax} {cap}");
}
