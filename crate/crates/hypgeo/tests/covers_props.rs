use std::collections::BTreeSet;

use hypgeo::covers::*;
use hypgeo::Error;
use proptest::prelude::*;

fn w(s: &str) -> FreeWord {
    s.parse().unwrap()
}

#[test]
fn cancellation_before_evaluation() {
    assert!(w("aA").is_empty());
    assert_eq!(word_matrix(&w("aA")).unwrap(), [[1, 0], [0, 1]]);
}

#[test]
fn ab_matrix_trace_and_length() {
    let m = word_matrix(&w("ab")).unwrap();
    assert_eq!(m, [[5, 2], [2, 1]]);
    assert_eq!(m[0][0] * m[1][1] - m[0][1] * m[1][0], 1);
    let c = GeodesicClass::of(&w("ab")).unwrap().unwrap();
    assert_eq!(c.trace, 6);
    // 2 arccosh 3 = 2 ln(3 + 2√2)
    let oracle = 2.0 * (3.0 + 8f64.sqrt()).ln();
    assert!((c.length - oracle).abs() < 1e-14);
    assert!((c.length - 3.525494348078172).abs() < 1e-12);
}

#[test]
fn parabolic_words_are_not_geodesics() {
    for s in ["a", "b", "aB", "Ab", "aaa"] {
        assert_eq!(GeodesicClass::of(&w(s)).unwrap(), None, "{s}");
    }
}

#[test]
fn overflow_is_reported() {
    let big = w("ab").pow(80);
    assert!(matches!(word_matrix(&big), Err(Error::Overflow(_))));
}

fn float_trace(letters: &[u8]) -> f64 {
    let gens: [[[f64; 2]; 2]; 4] =
        [[[1.0, 2.0], [0.0, 1.0]], [[1.0, -2.0], [0.0, 1.0]], [[1.0, 0.0], [2.0, 1.0]], [[1.0, 0.0], [-2.0, 1.0]]];
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    for &l in letters {
        let g = gens[l as usize];
        m = [
            [m[0][0] * g[0][0] + m[0][1] * g[1][0], m[0][0] * g[0][1] + m[0][1] * g[1][1]],
            [m[1][0] * g[0][0] + m[1][1] * g[1][0], m[1][0] * g[0][1] + m[1][1] * g[1][1]],
        ];
    }
    m[0][0] + m[1][1]
}

/// Every cyclically reduced, non-power word of length ≤ 6, reduced to its
/// set of rotations and inverse rotations, written with letters 0..4 where
/// `x ^ 1` is the inverse of `x`.
fn brute_force_classes(eps: f64) -> BTreeSet<String> {
    let sym = ['a', 'A', 'b', 'B'];
    let mut out = BTreeSet::new();
    for len in 1..=6u32 {
        for code in 0..4usize.pow(len) {
            let s: Vec<u8> = (0..len).map(|i| ((code >> (2 * i)) & 3) as u8).collect();
            let n = s.len();
            let reduced = (0..n).all(|i| s[(i + 1) % n] != s[i] ^ 1 || n == 1);
            if !reduced {
                continue;
            }
            let power = (1..n).any(|p| n.is_multiple_of(p) && (0..n).all(|i| s[i] == s[i % p]));
            if power {
                continue;
            }
            let tr = float_trace(&s).abs();
            if tr <= 2.0 + 1e-9 || 2.0 * (tr / 2.0).acosh() >= eps {
                continue;
            }
            let inv: Vec<u8> = s.iter().rev().map(|x| x ^ 1).collect();
            let key = [s.clone(), inv]
                .iter()
                .flat_map(|v| (0..n).map(move |r| v[r..].iter().chain(&v[..r]).copied().collect::<Vec<u8>>()))
                .min()
                .unwrap();
            out.insert(key.iter().map(|&x| sym[x as usize]).collect());
        }
    }
    out
}

#[test]
fn enumeration_matches_brute_force() {
    for eps in [3.0, 4.0, 5.0, 6.0] {
        let got: BTreeSet<String> =
            enumerate_short_geodesics(eps, 6).unwrap().classes.iter().map(|c| c.word.to_string()).collect();
        assert_eq!(got, brute_force_classes(eps), "eps = {eps}");
    }
}

#[test]
fn short_classes_at_four() {
    let en = enumerate_short_geodesics(4.0, 6).unwrap();
    let words: Vec<String> = en.classes.iter().map(|c| c.word.to_string()).collect();
    // three figure-eights, one around each pair of cusps; a b^-1 is itself a cusp
    assert_eq!(words.len(), 3);
    assert!(words.contains(&w("ab").class_representative().to_string()));
    assert!(!words.contains(&w("aB").class_representative().to_string()));
    for c in &en.classes {
        assert_eq!(c.trace, 6);
    }
}

#[test]
fn below_systole_is_empty() {
    let en = enumerate_short_geodesics(3.5, 8).unwrap();
    assert!(en.classes.is_empty());
    assert!(!en.may_truncate);
    assert!(enumerate_short_geodesics(0.0, 4).is_err());
}

#[test]
fn rotation_and_inverse_collapse() {
    assert_eq!(w("ab").class_representative(), w("ba").class_representative());
    assert_eq!(w("ab").class_representative(), w("BA").class_representative());
    assert_eq!(w("aab").class_representative(), w("Bab aA ab").class_representative());
}

#[test]
fn long_words_can_be_short_geodesics() {
    // a^k b has trace 2 + 4k, so the cap binds for moderate eps
    let en = enumerate_short_geodesics(6.0, 5).unwrap();
    assert!(en.may_truncate);
}

#[test]
fn sample_rep_basics() {
    let r = sample_rep(1, 9).unwrap();
    assert_eq!((r.sigma_a.clone(), r.sigma_b.clone()), (vec![0], vec![0]));
    assert_eq!(sample_rep(50, 3).unwrap(), sample_rep(50, 3).unwrap());
    assert_ne!(sample_rep(50, 3).unwrap(), sample_rep(50, 4).unwrap());
    assert!(sample_rep(0, 1).is_err());
    assert!(PermRep::new(vec![0, 0], vec![0, 1]).is_err());
}

#[test]
fn sample_rep_uniform_at_three() {
    let perms: Vec<Vec<u32>> =
        vec![vec![0, 1, 2], vec![0, 2, 1], vec![1, 0, 2], vec![1, 2, 0], vec![2, 0, 1], vec![2, 1, 0]];
    let idx = |p: &Vec<u32>| perms.iter().position(|q| q == p).unwrap();
    let trials = 100_000u64;
    let mut counts = [0u64; 36];
    for t in 0..trials {
        let r = sample_rep(3, t).unwrap();
        counts[6 * idx(&r.sigma_a) + idx(&r.sigma_b)] += 1;
    }
    for c in counts {
        let f = c as f64 / trials as f64;
        assert!((f - 1.0 / 36.0).abs() < 0.005, "{f}");
    }
}

#[test]
fn eval_basics() {
    let r = sample_rep(30, 1).unwrap();
    let id: Vec<u32> = (0..30).collect();
    assert_eq!(eval_word(&r, &FreeWord::identity()), id);
    let p = eval_word(&r, &w("aBBa"));
    let fp = fixed_points(&p);
    assert_eq!(fp, cycle_type(&p).iter().filter(|&&c| c == 1).count());
    assert_eq!(cycle_type(&p).iter().sum::<usize>(), 30);
}

fn word_strategy() -> impl Strategy<Value = FreeWord> {
    prop::collection::vec(0usize..4, 0..12).prop_map(|v| FreeWord::new(v.into_iter().map(|i| Letter::ALL[i])))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn eval_is_a_homomorphism(u in word_strategy(), v in word_strategy(), seed in 0u64..1000) {
        let r = sample_rep(12, seed).unwrap();
        prop_assert_eq!(eval_word(&r, &u.concat(&v)), compose(&eval_word(&r, &u), &eval_word(&r, &v)));
        prop_assert_eq!(eval_word(&r, &u.inverse()), inverse_perm(&eval_word(&r, &u)));
    }

    #[test]
    fn eval_of_power(u in word_strategy(), d in 1i32..=5, seed in 0u64..1000) {
        let r = sample_rep(9, seed).unwrap();
        let p = eval_word(&r, &u);
        let mut q: Vec<u32> = (0..9).collect();
        for _ in 0..d {
            q = compose(&q, &p);
        }
        prop_assert_eq!(eval_word(&r, &u.pow(d)), q);
    }

    #[test]
    fn power_decomposition_rebuilds(u in word_strategy(), d in 1i32..=4) {
        prop_assume!(!u.is_empty());
        let c = u.cyclically_reduced();
        let (v, e) = c.pow(d).power_decomposition();
        prop_assert!(v.is_primitive());
        prop_assert_eq!(v.pow(e as i32), c.pow(d).cyclically_reduced());
    }
}

/// Lifting a closed path through the cover by hand: walk the word letter by
/// letter from each sheet until the lift closes.
fn lifts_by_path_lifting(r: &PermRep, word: &FreeWord) -> Vec<usize> {
    let step = |sheet: u32| -> u32 {
        let mut s = sheet;
        for l in word.letters() {
            s = match l {
                Letter::A => r.sigma_a[s as usize],
                Letter::B => r.sigma_b[s as usize],
                Letter::AInv => r.sigma_a.iter().position(|&x| x == s).unwrap() as u32,
                Letter::BInv => r.sigma_b.iter().position(|&x| x == s).unwrap() as u32,
            };
        }
        s
    };
    let mut used = vec![false; r.n];
    let mut out = Vec::new();
    for start in 0..r.n as u32 {
        if used[start as usize] {
            continue;
        }
        let mut k = 0;
        let mut s = start;
        loop {
            used[s as usize] = true;
            s = step(s);
            k += 1;
            if s == start {
                break;
            }
        }
        out.push(k);
    }
    out.sort_unstable();
    out
}

#[test]
fn cycles_are_lifts() {
    for n in 1..=6 {
        for seed in 0..40 {
            let r = sample_rep(n, seed).unwrap();
            for s in ["ab", "aaB", "aBB", "abAB", "ab^-1ab"] {
                let word = w(s);
                assert_eq!(cycle_type(&eval_word(&r, &word)), lifts_by_path_lifting(&r, &word));
            }
        }
    }
}

#[test]
fn nica_values() {
    let e = std::f64::consts::E;
    assert!((nica_limit(1).unwrap() - 1.0 / e).abs() < 1e-15);
    assert!((nica_limit(2).unwrap() - (-1.5f64).exp()).abs() < 1e-15);
    assert!((nica_limit(6).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
    assert!(nica_limit(0).is_err());
    for d in 2..=2000 {
        let v = nica_limit(d).unwrap();
        assert!(v > 0.0 && v < 1.0 / e, "d = {d}");
    }
}

#[test]
fn fixed_point_free_single_letter() {
    let e = fixed_point_free_prob(&w("a"), 500, 10_000, 42).unwrap();
    assert!(e.within(nica_limit(1).unwrap(), 3.0), "{e:?}");
    let e2 = fixed_point_free_prob(&w("aa"), 500, 10_000, 42).unwrap();
    assert!(e2.within(nica_limit(2).unwrap(), 3.0), "{e2:?}");
    let one = fixed_point_free_prob(&w("ab"), 1, 100, 1).unwrap();
    assert_eq!(one.estimate, 0.0);
}

#[test]
fn conjugates_give_identical_estimates() {
    let u = w("aaBab");
    let g = w("bA");
    let x = fixed_point_free_prob(&u, 40, 2000, 5).unwrap();
    let y = fixed_point_free_prob(&u.conjugate_by(&g), 40, 2000, 5).unwrap();
    assert_eq!(x, y);
}

#[test]
fn joint_probability_factorizes() {
    let j = joint_fixed_point_free(&w("a"), &w("ab"), 500, 10_000, 42).unwrap();
    assert!(j.factorizes(3.0), "{j:?}");
    assert!((j.limit_product - (-2.0f64).exp()).abs() < 1e-15);
    assert!(j.joint.within(j.limit_product, 3.0), "{j:?}");
}

#[test]
fn systole_trivial_and_product_bound() {
    let s = systole_prob(3.5, 50, 200, 1).unwrap();
    assert_eq!(s.systole.estimate, 1.0);
    assert!(s.per_word.is_empty());

    let s = systole_prob(4.0, 500, 4000, 3).unwrap();
    assert_eq!(s.per_word.len(), 3);
    assert_eq!(s.factorial_m, 1);
    assert!((s.limit_product - (-3.0f64).exp()).abs() < 1e-15);
    assert!(s.systole.estimate >= s.factorial_event.estimate);
    assert!(s.systole.estimate >= s.limit_product - 3.0 * s.systole.stderr, "{s:?}");
}

#[test]
fn factorial_event_is_weaker_than_tight_event() {
    let s = systole_prob(7.5, 60, 500, 9).unwrap();
    assert_eq!(s.factorial_m, 2);
    assert!(s.systole.hits >= s.factorial_event.hits);
    for d in &s.per_word {
        assert!(d.violation.hits <= d.factorial_violation.hits, "{}", d.word);
    }
}

#[test]
fn transitivity() {
    assert_eq!(transitivity_fraction(1, 10, 0).unwrap().estimate, 1.0);
    let t2 = transitivity_fraction(2, 20_000, 1).unwrap();
    assert!(t2.within(0.75, 3.0), "{t2:?}");
    assert!(transitivity_fraction(100, 1000, 2).unwrap().estimate >= 0.95);
}

#[test]
fn histogram_totals() {
    let h = cycle_histogram(&w("ab"), 20, 300, 4).unwrap();
    assert_eq!(h.fixed_points.values().sum::<u64>(), 300);
    let points: u64 = h.cycle_lengths.iter().map(|(k, v)| *k as u64 * v).sum();
    assert_eq!(points, 20 * 300);
}

#[test]
fn systole_json_round_trip() {
    let s = systole_prob(4.0, 20, 50, 2).unwrap();
    let back: SystoleEstimate = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
    assert_eq!(back, s);
}
