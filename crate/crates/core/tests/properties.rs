use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kochenlab_core::arith::mpoly::parse_poly;
use kochenlab_core::arith::rat::Rat;
use kochenlab_core::arith::valuation::val_p_unchecked;
use kochenlab_core::brauer::{hilbert_symbol, Place};
use kochenlab_core::dioph::{eval_over_fq, weil_fiber, weil_oracle, weil_restrict, AlgebraPoint, DiophFamily};
use kochenlab_core::exec::Exec;
use kochenlab_core::kochen::{gamma_case_rational, gamma_eval, KochenParams};
use kochenlab_core::numberfield::{primes_above, val_at_prime, NumberField, PrimeSummary};
use kochenlab_core::verify::{brute_force_points, random_family};
use kochenlab_core::Error;

const BUDGET: u64 = 1 << 24;

fn rat(a: i64, b: i64) -> Rat {
    Rat::new(a, b).unwrap()
}

fn big(x: &Rat) -> BigRational {
    BigRational::new(x.numer().clone(), x.denom().clone())
}

fn val(x: &BigRational, p: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let count = |mut n: BigInt| {
        let mut k = 0;
        while (&n % &p).is_zero() {
            n /= &p;
            k += 1;
        }
        k
    };
    Some(count(x.numer().abs()) - count(x.denom().abs()))
}

/// `(1/t)·((x^Q − x)/((x^Q − x)² − 1))^e` straight from the definition.
fn gamma_oracle(p: u64, e: u32, f: u32, negative: bool, x: &BigRational) -> Option<BigRational> {
    let q = p.pow(f) as usize;
    let y = num_traits::pow(x.clone(), q) - x;
    let den = &y * &y - BigRational::one();
    if den.is_zero() {
        return None;
    }
    let t = BigRational::from_integer(BigInt::from(p)) * if negative { -BigRational::one() } else { BigRational::one() };
    Some(num_traits::pow(y / den, e as usize) / t)
}

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 7, 11])
}

fn sorted(v: Vec<Vec<usize>>) -> BTreeSet<Vec<usize>> {
    v.into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gamma_matches_definition_and_case_formula(
        p in prime(), e in 1u32..=2, f in 1u32..=2, negative in any::<bool>(),
        a in -400i64..=400, b in 1i64..=400,
    ) {
        prop_assume!(p.pow(f) <= 25);
        let params = KochenParams::new(p, e, f, negative).unwrap();
        let x = rat(a, b);
        let got = gamma_eval(&params, &x);
        let want = gamma_oracle(p, e, f, negative, &big(&x));
        prop_assert_eq!(got.as_ref().map(big), want.clone());
        let predicted = gamma_case_rational(&params, &x).valuation;
        let direct = got.map(|g| val_p_unchecked(&g, p));
        prop_assert_eq!(predicted, direct);
        if let Some(w) = want {
            prop_assert_eq!(direct.and_then(|v| v.finite()), val(&w, p));
        }
    }

    #[test]
    fn combinators_agree_with_full_enumeration(seed in any::<u64>(), q in prop::sample::select(vec![3u64, 5, 7])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_family(&mut rng, 1);
        let b = random_family(&mut rng, 1);
        let (Ok(pa), Ok(pb)) = (brute_force_points(&a, q), brute_force_points(&b, q)) else {
            return Ok(());
        };
        let union = brute_force_points(&a.union(&b).unwrap(), q).unwrap();
        prop_assert_eq!(union, pa.union(&pb).cloned().collect::<BTreeSet<_>>());
        let inter = brute_force_points(&a.intersect(&b).unwrap(), q).unwrap();
        prop_assert_eq!(inter, pa.intersection(&pb).cloned().collect::<BTreeSet<_>>());
        let prod = brute_force_points(&a.product(&b), q).unwrap();
        let want: BTreeSet<Vec<usize>> = pa
            .iter()
            .flat_map(|x| pb.iter().map(move |y| [x.clone(), y.clone()].concat()))
            .collect();
        prop_assert_eq!(prod, want);
    }

    #[test]
    fn search_matches_full_enumeration(seed in any::<u64>(), q in prop::sample::select(vec![4u64, 5, 9])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_family(&mut rng, 2);
        let Ok(oracle) = brute_force_points(&d, q) else { return Ok(()) };
        let seq = sorted(eval_over_fq(&d, q, BUDGET, Exec::Sequential).unwrap());
        let par = sorted(eval_over_fq(&d, q, BUDGET, Exec::Parallel).unwrap());
        prop_assert_eq!(&seq, &oracle);
        prop_assert_eq!(&par, &oracle);
    }

    #[test]
    fn prime_field_points_sit_inside_the_extension(seed in any::<u64>()) {
        // F_3 is the prime subfield of F_9 and its elements keep their codes.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_family(&mut rng, 1);
        let (Ok(small), Ok(large)) = (brute_force_points(&d, 3), brute_force_points(&d, 9)) else {
            return Ok(());
        };
        prop_assert!(small.is_subset(&large), "{:?} not in {:?}", small, large);
    }

    #[test]
    fn weil_fibers_match_algebra_arithmetic(seed in any::<u64>(), z0 in 0usize..3, z1 in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_family(&mut rng, 1);
        prop_assume!(d.m == 0);
        let z = AlgebraPoint { z: vec![z0, z1] };
        let Ok(oracle) = weil_oracle(&d, 3, &z, BUDGET) else { return Ok(()) };
        let w = weil_restrict(&d, 2).unwrap();
        let fiber = weil_fiber(&w, 3, &z, BUDGET, Exec::default()).unwrap();
        prop_assert_eq!(sorted(fiber), sorted(oracle));
    }

    #[test]
    fn hilbert_reciprocity_and_symmetry(a in -300i64..300, b in -300i64..300) {
        prop_assume!(a != 0 && b != 0);
        let (x, y) = (Rat::from(a), Rat::from(b));
        let mut places = vec![Place::Real];
        for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
                  101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193,
                  197, 199, 211, 223, 227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293] {
            places.push(Place::Finite(p));
        }
        let mut product = 1;
        for &v in &places {
            let s = hilbert_symbol(&x, &y, v).unwrap();
            prop_assert_eq!(s, hilbert_symbol(&y, &x, v).unwrap());
            prop_assert_eq!(hilbert_symbol(&x, &(-&x), v).unwrap(), 1);
            product *= s;
        }
        prop_assert_eq!(product, 1);
    }

    #[test]
    fn quadratic_fields_split_with_full_degree(d in -30i64..30, p in prime()) {
        prop_assume!(d != 0 && d != 1 && d != 4 && d != 9 && d != 16 && d != 25);
        let l = NumberField::parse(&format!("T^2 - ({d})")).unwrap();
        let primes = match primes_above(&l, p) {
            Ok(primes) => primes,
            Err(Error::Unsupported(_)) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let total: u32 = primes.iter().map(PrimeSummary::from).map(|s| s.e * s.f).sum();
        prop_assert_eq!(total, 2);
        // A rational element has valuation e·v_p at each prime above p.
        let x = l.from_rat(&rat(p as i64 * 3, 7));
        for pr in &primes {
            let e = i64::from(PrimeSummary::from(pr).e);
            let v = val_at_prime(pr, &x).unwrap().finite().unwrap();
            let base = if p == 3 || p == 7 { val(&big(&rat(p as i64 * 3, 7)), p).unwrap() } else { 1 };
            prop_assert_eq!(v, e * base);
        }
    }
}

#[test]
fn section_recovers_a_factor() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let a = random_family(&mut rng, 1);
    let sq = DiophFamily::zero_set(1, vec![parse_poly("X1^2 - 4", &["X1"]).unwrap()]).unwrap();
    let prod = a.product(&sq);
    let sec = prod.section(&[Rat::from(2i64)], 1).unwrap();
    assert_eq!(brute_force_points(&sec, 5).unwrap(), brute_force_points(&a, 5).unwrap());
    let off = prod.section(&[Rat::from(1i64)], 1).unwrap();
    assert!(brute_force_points(&off, 5).unwrap().is_empty());
}

#[test]
fn random_families_are_mostly_evaluable() {
    // Guards the early returns above against becoming vacuous.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let ok = (0..100)
        .filter(|_| brute_force_points(&random_family(&mut rng, 1), 5).is_ok())
        .count();
    assert!(ok >= 80, "only {ok} of 100 families evaluate over F_5");
    let with_points = (0..100)
        .filter(|_| brute_force_points(&random_family(&mut rng, 2), 5).is_ok_and(|s| !s.is_empty()))
        .count();
    assert!(with_points >= 20, "{with_points}");
}
