use hypgeo::collar::*;
use hypgeo::quad::adaptive_simpson;
use hypgeo::ModeOdeParams;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

fn gd(x: f64) -> f64 {
    2.0 * (x / 2.0).tanh().atan()
}

#[test]
fn free_mode_closed_forms() {
    // j = 0, lambda = 0: the original equation f'' + tanh f' = 0 has the
    // solutions 1 and gd(rho), so psi = sqrt(cosh) and phi = sqrt(cosh) gd.
    let pair = solve_mode(&ModeOdeParams::new(0.0, 0, 2.0).unwrap(), 6.0).unwrap();
    for i in 1..=60 {
        let rho = 0.1 * i as f64;
        let v = pair.eval(rho).unwrap();
        let s = rho.cosh().sqrt();
        assert!((v[0] / (s * gd(rho)) - 1.0).abs() < 1e-9, "phi at {rho}");
        assert!((v[2] / s - 1.0).abs() < 1e-9, "psi at {rho}");
        let ds = 0.5 * rho.tanh() * s;
        assert!((v[3] - ds).abs() < 1e-8 * ds.max(1.0));
    }
}

#[test]
fn wronskian_is_constant() {
    for (lambda, j, ell) in [(0.0, 0, 1.0), (0.2, 1, 0.7), (0.25, 4, 2.0), (0.1, 8, 0.1), (3.0, 2, 1.5)] {
        let pair = solve_mode(&ModeOdeParams::new(lambda, j, ell).unwrap(), 6.0).unwrap();
        for rho in [0.5, 1.0, 5.0] {
            let d = pair.wronskian_drift_at(rho).unwrap();
            assert!(d < 1e-8, "drift {d} at {rho} for {lambda} {j} {ell}");
        }
        assert!(pair.wronskian_drift < 1e-8);
    }
}

#[test]
fn unscaled_wronskian_is_minus_one_for_moderate_growth() {
    let pair = solve_mode(&ModeOdeParams::new(0.2, 1, 3.0).unwrap(), 5.0).unwrap();
    for rho in [0.5, 1.0, 5.0] {
        let [p, dp, s, ds] = pair.eval(rho).unwrap();
        assert!((p * ds - s * dp + 1.0).abs() < 1e-8 * (p * ds).abs().max(1.0));
    }
}

#[test]
fn solutions_stay_positive() {
    for (lambda, j, ell) in [(0.25, 0, 1.0), (0.05, 2, 0.3), (0.25, 8, 10.0)] {
        let pair = solve_mode(&ModeOdeParams::new(lambda, j, ell).unwrap(), 10.0).unwrap();
        for i in 1..=1000 {
            let rho = 0.01 * i as f64;
            let (p, _, _) = pair.scaled(Fundamental::Phi, rho).unwrap();
            let (s, _, _) = pair.scaled(Fundamental::Psi, rho).unwrap();
            assert!(p > 0.0 && s > 0.0);
        }
    }
}

#[test]
fn psi_outgrows_comparison_cosh() {
    // lambda = 1/4 - 0.09: psi_0 / cosh(0.3 rho) is non-decreasing.
    let pair = solve_mode(&ModeOdeParams::new(0.25 - 0.09, 0, 1.0).unwrap(), 15.0).unwrap();
    let mut prev = 0.0;
    for i in 0..=1500 {
        let rho = 0.01 * i as f64;
        let r = pair.eval(rho).unwrap()[2] / (0.3 * rho).cosh();
        assert!(r >= prev * (1.0 - 1e-12), "at {rho}");
        prev = r;
    }
}

#[test]
fn parity_from_backward_integration() {
    let p = ModeOdeParams::new(0.15, 2, 1.3).unwrap();
    let fwd = solve_mode(&p, 3.0).unwrap();
    let bwd = solve_mode_towards(&p, -3.0).unwrap();
    for i in 1..=30 {
        let rho = 0.1 * i as f64;
        let a = fwd.eval(rho).unwrap();
        let b = bwd.eval(-rho).unwrap();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-8 * x.abs().max(1.0);
        assert!(close(a[0], -b[0]) && close(a[1], b[1]) && close(a[2], b[2]) && close(a[3], -b[3]));
    }
    // The cross term of the collar norm vanishes over [-w, w].
    let w = 2.5;
    let right = fwd.integrate_unscaled(w, 16, |v| v[0] * v[2]).unwrap();
    let left = bwd.integrate_unscaled(-w, 16, |v| v[0] * v[2]).unwrap();
    assert!(right > 1.0);
    assert!((right - left).abs() < 1e-8 * right);
}

#[test]
fn collar_norm_closed_forms() {
    let (ell, w) = (1.7, 3.0);
    let pair = solve_mode(&ModeOdeParams::new(0.0, 0, ell).unwrap(), w).unwrap();
    let c = ModeCoefficients { a2: 1.0, ..Default::default() };
    // int_0^w cosh = sinh w
    let n = collar_norm(&[c], std::slice::from_ref(&pair), ell, w, BoundaryCondition::Neumann).unwrap();
    assert!((n - ell * w.sinh()).abs() < 1e-9 * n);
    let n2 = collar_norm(&[c], std::slice::from_ref(&pair), ell, w, BoundaryCondition::Interior).unwrap();
    assert!((n2 - 2.0 * n).abs() < 1e-12 * n2);
    // Dirichlet keeps only phi: int_0^w cosh gd^2.
    let c = ModeCoefficients { a1: 2.0, a2: 5.0, ..Default::default() };
    let n3 = collar_norm(&[c], std::slice::from_ref(&pair), ell, w, BoundaryCondition::Dirichlet).unwrap();
    let want = 4.0 * ell * adaptive_simpson(&|x: f64| x.cosh() * gd(x).powi(2), 0.0, w, 1e-13);
    assert!((n3 - want).abs() < 1e-8 * want);
}

#[test]
fn collar_norm_higher_modes_and_zero() {
    let ell = 0.9;
    let pairs: Vec<_> = (0..3).map(|j| solve_mode(&ModeOdeParams::new(0.2, j, ell).unwrap(), 2.0).unwrap()).collect();
    let zero = vec![ModeCoefficients::default(); 3];
    assert_eq!(collar_norm(&zero, &pairs, ell, 2.0, BoundaryCondition::Interior).unwrap(), 0.0);
    let mut cs = zero.clone();
    cs[2] = ModeCoefficients { a1: 1.0, a2: 0.0, b1: 1.0, b2: 2.0 };
    let n = collar_norm(&cs, &pairs, ell, 1.5, BoundaryCondition::Interior).unwrap();
    let phi = pairs[2].log_mass(Fundamental::Phi, 1.5).unwrap().exp();
    let psi = pairs[2].log_mass(Fundamental::Psi, 1.5).unwrap().exp();
    assert!((n - ell * (2.0 * phi + 4.0 * psi)).abs() < 1e-12 * n);
    assert!(matches!(
        collar_norm(&cs, &pairs, ell, 2.5, BoundaryCondition::Interior),
        Err(hypgeo::Error::HorizonTooShort { .. })
    ));
    assert!(matches!(
        collar_norm(&cs[..2], &pairs, ell, 1.0, BoundaryCondition::Interior),
        Err(hypgeo::Error::ArityMismatch { .. })
    ));
}

#[test]
fn mass_bound_reference_values() {
    assert_eq!(mass_ratio_bound(0.25_f64, 1.0, 2.0).unwrap().bound, 0.5);
    // (1.2 + sinh 0.6)/(3.6 + sinh 1.8), 40-digit reference
    let b = mass_ratio_bound(0.16_f64, 1.0, 3.0).unwrap();
    assert!((b.bound - 0.280_740_546_073_538_1).abs() < 1e-13);
    assert!((b.delta - 0.3).abs() < 1e-15);
    assert!(b.sharp < b.bound);
    assert!((b.asymptotic.unwrap() - 2.0 * (-1.2_f64).exp()).abs() < 1e-15);
    for lambda in [0.0_f64, 0.1, 0.2, 0.25] {
        assert!((mass_ratio_bound(lambda, 2.0, 2.0).unwrap().bound - 1.0).abs() < 1e-15);
    }
}

#[test]
fn mass_ratio_matches_closed_form() {
    // lambda = 0, j = 0: psi^2 = cosh, so the ratio is sinh w1 / sinh w2.
    let pair = solve_mode(&ModeOdeParams::new(0.0, 0, 1.0).unwrap(), 8.0).unwrap();
    for (w1, w2) in [(1.0, 2.0), (0.3, 8.0), (5.0, 7.5)] {
        let r: f64 = pair.mass_ratio(Fundamental::Psi, w1, w2).unwrap();
        let want = f64::sinh(w1) / f64::sinh(w2);
        assert!((r / want - 1.0).abs() < 1e-9);
    }
}

#[test]
fn spec_examples_for_mass_distribution() {
    let r = verify_mass_distribution(&ModeOdeParams::new(0.2, 0, 1.0).unwrap(), 1.0, 2.0, BoundaryCondition::Interior)
        .unwrap();
    assert!(r.ratio_phi.unwrap() <= r.bound && r.ratio_psi.unwrap() <= r.bound);
    let r = verify_mass_distribution(&ModeOdeParams::new(0.25, 3, 0.5).unwrap(), 0.5, 4.0, BoundaryCondition::Interior)
        .unwrap();
    assert_eq!(r.bound, 0.125);
    assert!(r.ratio <= 0.125);
    let r = verify_mass_distribution(&ModeOdeParams::new(0.1, 1, 2.0).unwrap(), 3.0, 3.0, BoundaryCondition::Neumann)
        .unwrap();
    assert_eq!(r.ratio, 1.0);
    assert!((r.bound - 1.0).abs() < 1e-15);
    assert!(r.ratio_phi.is_none());
    let r = verify_mass_distribution(&ModeOdeParams::new(0.1, 1, 2.0).unwrap(), 1.0, 3.0, BoundaryCondition::Dirichlet)
        .unwrap();
    assert!(r.ratio_psi.is_none() && r.ratio_phi.is_some());
    assert!(verify_mass_distribution(&ModeOdeParams::new(0.3, 0, 1.0).unwrap(), 1.0, 2.0, BoundaryCondition::Interior)
        .is_err());
}

#[test]
fn thin_collar_high_mode_survives_overflow() {
    let p = ModeOdeParams::new(0.0, 8, 0.1).unwrap();
    let pair = solve_mode(&p, 20.0).unwrap();
    assert!(pair.nodes.last().unwrap().log_scale[0] > 700.0);
    assert!(pair.wronskian_drift < 1e-8);
    let r = verify_mass_distribution(&p, 10.0, 20.0, BoundaryCondition::Interior).unwrap();
    assert!(r.ratio.is_finite() && r.ratio <= r.sharp_bound + 1e-8);
}

#[test]
fn quadrature_refinement_converges() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
    for _ in 0..20 {
        let p = ModeOdeParams::new(rng.gen_range(0.0..0.25), rng.gen_range(0..=8), rng.gen_range(0.1..10.0)).unwrap();
        let w2 = rng.gen_range(1.0..20.0);
        let w1 = rng.gen_range(0.1..w2);
        let pair = solve_mode(&p, w2).unwrap();
        for which in [Fundamental::Phi, Fundamental::Psi] {
            let r =
                |m| (pair.log_mass_panels(which, w1, m).unwrap() - pair.log_mass_panels(which, w2, m).unwrap()).exp();
            let (a, b) = (r(16), r(32));
            assert!((a - b).abs() < 1e-6 * b.max(1e-300));
        }
    }
}

#[test]
fn randomized_mass_suite() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
    for _ in 0..200 {
        let lambda = if rng.gen_bool(0.2) { 0.25 } else { rng.gen_range(0.0..0.25) };
        let p = ModeOdeParams::new(lambda, rng.gen_range(0..=8), rng.gen_range(0.1..10.0)).unwrap();
        let w2 = rng.gen_range(0.1..20.0);
        let w1 = rng.gen_range(0.05..=w2);
        let r = verify_mass_distribution(&p, w1, w2, BoundaryCondition::Interior).unwrap();
        assert!(r.ratio <= r.sharp_bound + 1e-8, "{r:?}");
        assert!(r.wronskian_drift < 1e-8);
    }
}

#[test]
fn integral_monotonicity_examples() {
    let jet = |a: f64| move |x: f64| [(a * x).cosh(), a * (a * x).sinh(), a * a * (a * x).cosh()];
    assert!(integral_monotonicity_check(jet(0.3), jet(0.5), 1.0, 3.0).unwrap());
    assert!(integral_monotonicity_check(jet(0.3), jet(0.3), 1.0, 3.0).unwrap());
    assert!(matches!(
        integral_monotonicity_check(jet(0.5), jet(0.3), 1.0, 3.0),
        Err(hypgeo::Error::PreconditionUnmet(_))
    ));
}

#[test]
fn csv_export() {
    let pair = solve_mode(&ModeOdeParams::new(0.1, 1, 1.0).unwrap(), 2.0).unwrap();
    let mut buf = Vec::new();
    pair.write_csv(&mut buf, 10).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("rho,phi,dphi,psi,dpsi\n"));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn batch_matches_serial() {
    let ps: Vec<_> = (0..6).map(|j| ModeOdeParams::new(0.1, j, 1.0).unwrap()).collect();
    let batch = solve_modes(&ps, 3.0);
    for (p, b) in ps.iter().zip(batch) {
        assert_eq!(b.unwrap(), solve_mode(p, 3.0).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn measured_ratio_below_sharp_and_stated_bound(
        lambda in 0.0f64..=0.25, j in 0u32..=8, ell in 0.1f64..10.0, w2 in 0.2f64..20.0, f in 0.01f64..=1.0,
    ) {
        let w1 = f * w2;
        let r = verify_mass_distribution(&ModeOdeParams::new(lambda, j, ell).unwrap(), w1, w2, BoundaryCondition::Interior).unwrap();
        prop_assert!(r.ratio <= r.sharp_bound + 1e-8);
        prop_assert!(r.sharp_bound <= r.bound + 1e-15);
    }
}
