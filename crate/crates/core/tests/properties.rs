//! Property tests for the invariants of the exact kernels.

mod common;

use badlab::badness::{subspace_badness, vector_badness, SubspaceBadness};
use badlab::exactnum::{int, rat, rat_cmp_power, HpInterval, Rat, Value, DEFAULT_MAX_BITS};
use badlab::experiment::{constructive_member, u_t_member, ExperimentConfig};
use badlab::geometry::{cheb_distance, lift, line_distance, sup_norm, AffineSubspace, LiftedSpan, RatVec};
use badlab::lattice::{count_slab, enumerate_slab, zeta_count, SlabSpec, Thickness};
use badlab::rates::RateFunction;
use badlab::series::{accumulate, series_terms, SeriesInstance};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

const MB: u32 = DEFAULT_MAX_BITS;

fn small_rat() -> impl Strategy<Value = Rat> {
    (-40i64..=40, 1i64..=12).prop_map(|(p, q)| rat(p, q))
}

fn nonzero_rat() -> impl Strategy<Value = Rat> {
    small_rat().prop_filter("nonzero", |x| !x.is_zero())
}

/// A random 64-bit dyadic in `[0, 1)`, a stand-in for a generic real.
fn generic_unit() -> impl Strategy<Value = Rat> {
    any::<u64>().prop_map(|n| Rat::new(BigInt::from(n), BigInt::one() << 64u32))
}

/// `(ambient, span)` with ambient ≤ 4 and span dim ≤ 2, lifted from an affine subspace.
fn span_strategy() -> impl Strategy<Value = LiftedSpan> {
    (1usize..=3)
        .prop_flat_map(|d| {
            let k = 0..=d.min(1);
            (Just(d), k, prop::collection::vec(small_rat(), d), prop::collection::vec(small_rat(), d))
        })
        .prop_filter_map("degenerate direction", |(d, k, base, dir)| {
            let dirs = if k == 1 { vec![dir] } else { vec![] };
            let a = AffineSubspace::new(base, dirs).ok()?;
            let s = lift(&a).ok()?;
            (s.ambient() == d + 1).then_some(s)
        })
}

fn rate_strategy() -> impl Strategy<Value = RateFunction> {
    let c = prop_oneof![Just(rat(1, 2)), Just(int(1)), Just(int(2))];
    let alpha = prop_oneof![Just(int(0)), Just(rat(1, 3)), Just(rat(1, 2)), Just(int(1))];
    let delta = prop_oneof![Just(int(0)), Just(rat(1, 2)), Just(int(2))];
    (c, alpha, delta).prop_map(|(c, a, d)| {
        if d.is_zero() {
            RateFunction::power_law(c, a).unwrap()
        } else {
            RateFunction::power_log(c, a, d, int(2)).unwrap()
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn rationals_form_a_field(a in small_rat(), b in small_rat(), c in nonzero_rat()) {
        for x in [&a + &b, &a * &b, &a - &b, &a / &c] {
            prop_assert!(x.denom().is_positive());
            prop_assert!(num_integer::Integer::gcd(x.numer(), x.denom()).is_one());
        }
        prop_assert_eq!(&(&a + &b) * &c, &a * &c + &b * &c);
        prop_assert_eq!(&(&a - &b) + &b, a.clone());
        prop_assert_eq!(&(&a / &c) * &c, a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn power_comparison_matches_intervals(x in 1i64..200, xd in 1i64..50, y in 1i64..200, yd in 1i64..50, p in -4i64..=4, q in 1u32..=4) {
        let (x, y) = (rat(x, xd), rat(y, yd));
        let exact = rat_cmp_power(&x, &y, p, q as u64).unwrap();
        let iv = HpInterval::from_rat(&y, 200).pow_frac(p, q).unwrap();
        if let Some(o) = iv.cmp_rat(&x) {
            prop_assert_eq!(o.reverse(), exact);
        }
    }

    #[test]
    fn refinement_nests(f in rate_strategy(), t in 2i64..5000, td in 1i64..4) {
        let t = rat(t, td).max(int(2));
        let coarse = f.interval(&t, 64).unwrap();
        let fine = f.interval(&t, 128).unwrap();
        prop_assert!(fine.width() <= coarse.width());
        prop_assert!(coarse.lo() <= fine.lo() && fine.hi() <= coarse.hi());
        let approx = f.approx(common::to_f64(&t));
        prop_assert!((common::to_f64(&fine.lo()) - approx).abs() <= 1e-12 * approx.max(1e-300));
    }

    #[test]
    fn rates_are_non_increasing(f in rate_strategy(), a in 2i64..10_000, b in 1i64..10_000, den in 1i64..8) {
        let t1 = rat(a, den).max(int(2));
        let t2 = &t1 + rat(b, den);
        // 1/f(T1) ≤ 1/f(T2)  ⇔  f(T1) ≥ f(T2)
        let o = f.cmp_ratios(&int(1), &t1, &int(1), &t2, MB).unwrap().ordering();
        prop_assert!(o.is_some_and(|o| o.is_le()), "{o:?}");
    }

    #[test]
    fn distance_homogeneity_and_symmetry(s in span_strategy(), c in small_rat(), seed in any::<u64>()) {
        let x = pseudo_point(s.ambient(), seed);
        let d = cheb_distance(&x, &s);
        let cx: RatVec = x.iter().map(|v| v * &c).collect();
        prop_assert_eq!(cheb_distance(&cx, &s), &d * c.abs());
        let neg: RatVec = x.iter().map(|v| -v).collect();
        prop_assert_eq!(cheb_distance(&neg, &s), d);
    }

    #[test]
    fn distance_translation_and_lipschitz(s in span_strategy(), t in prop::collection::vec(small_rat(), 2), seed in any::<u64>(), seed2 in any::<u64>()) {
        let n = s.ambient();
        let x = pseudo_point(n, seed);
        let y = pseudo_point(n, seed2);
        let shift = s.combine(&t[..s.dim()]);
        let xs: RatVec = x.iter().zip(&shift).map(|(a, b)| a + b).collect();
        let dx = cheb_distance(&x, &s);
        prop_assert_eq!(cheb_distance(&xs, &s), dx.clone());
        let dy = cheb_distance(&y, &s);
        let diff: RatVec = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        prop_assert!((dx - dy).abs() <= sup_norm(&diff));
    }

    #[test]
    fn distance_matches_elimination_oracle(s in span_strategy(), seed in any::<u64>()) {
        let x = pseudo_point(s.ambient(), seed);
        let fm = common::FmDistance::new(&s);
        prop_assert_eq!(cheb_distance(&x, &s), fm.dist(&x));
    }

    #[test]
    fn line_distance_sandwich(w in prop::collection::vec(small_rat(), 1..=3), x in prop::collection::vec(-30i64..=30, 4)) {
        let x: RatVec = x[..=w.len()].iter().map(|v| int(*v)).collect();
        let lifted: RatVec = std::iter::once(int(1)).chain(w.iter().cloned()).collect();
        let m = w.iter().enumerate().map(|(j, wj)| (&x[j + 1] - &x[0] * wj).abs()).max().unwrap();
        let (d, _) = line_distance(&x, &lifted);
        let s = LiftedSpan::from_basis(w.len() + 1, vec![lifted]).unwrap();
        prop_assert_eq!(&d, &cheb_distance(&x, &s));
        prop_assert!(&m / (int(1) + sup_norm(&w)) <= d && d <= m);
    }

    #[test]
    fn partial_sums_regroup(terms in prop::collection::vec(small_rat(), 1..60), split in 0usize..60) {
        let vals: Vec<Value> = terms.iter().map(|t| Value::Exact(t.abs())).collect();
        let k = split.min(vals.len());
        let whole = accumulate(&vals).last().cloned().unwrap();
        let left = accumulate(&vals[..k]).last().cloned().unwrap_or_else(Value::zero);
        let right = accumulate(&vals[k..]).last().cloned().unwrap_or_else(Value::zero);
        prop_assert_eq!(whole, left.add(&right));
    }
}

/// Deterministic rational point from a seed, so strategies stay small.
fn pseudo_point(n: usize, seed: u64) -> RatVec {
    let mut s = seed;
    (0..n)
        .map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let p = ((s >> 33) % 81) as i64 - 40;
            let q = ((s >> 20) % 7) as i64 + 1;
            rat(p, q)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumeration_is_sound_and_layers_add_up(s in span_strategy(), t in 1u64..=8, thick in 1i64..=6) {
        let spec = SlabSpec { t, r: int(1), target: s.clone(), thickness: Thickness::Fixed(rat(thick, 4)), z0_range: (0, t as i64) };
        let pts = enumerate_slab(&spec, MB).unwrap();
        let fm = common::FmDistance::new(&s);
        for p in &pts {
            prop_assert!(spec.contains(p, MB).unwrap());
            prop_assert!(fm.dist_int(p) <= rat(thick, 4));
        }
        let layers: u128 = (0..=t as i64)
            .map(|j| count_slab(&SlabSpec { z0_range: (j, j), ..spec.clone() }, MB).unwrap())
            .sum();
        prop_assert_eq!(layers, pts.len() as u128);
        // boundary audit: points just outside the thickness are rejected
        let outside = common::naive_slab(&SlabSpec { thickness: Thickness::Fixed(rat(thick, 4) + int(1)), ..spec.clone() }, MB);
        for p in outside.iter().filter(|p| !pts.contains(p)) {
            prop_assert!(fm.dist_int(p) > rat(thick, 4));
        }
    }

    #[test]
    fn badness_is_monotone_in_height(w in prop::collection::vec(generic_unit(), 1..=2), x1 in 10u64..400, extra in 1u64..400) {
        let psi = RateFunction::classical(w.len());
        let a = vector_badness(&w, &psi, x1, MB).unwrap();
        let b = vector_badness(&w, &psi, x1 + extra, MB).unwrap();
        prop_assert!(b.argmin >= a.argmin);
        let o = psi.cmp_ratios(&b.m, &int(b.argmin as i64), &a.m, &int(a.argmin as i64), MB).unwrap().ordering();
        prop_assert!(o.is_some_and(|o| o.is_le()), "{o:?}");
    }

    #[test]
    fn scaling_the_rate_scales_gamma(w in prop::collection::vec(generic_unit(), 1..=2), c in 1i64..=9, cd in 1i64..=9) {
        let c = rat(c, cd);
        let psi = RateFunction::power_law(int(1), rat(1, w.len() as i64)).unwrap();
        let a = vector_badness(&w, &psi, 300, MB).unwrap();
        let b = vector_badness(&w, &psi.scaled(&c), 300, MB).unwrap();
        prop_assert_eq!(a.argmin, b.argmin);
        prop_assert_eq!(&a.m, &b.m);
        let ga = a.gamma.mul_rat(&(Rat::one() / &c));
        prop_assert!(ga.lo() <= b.gamma.hi() && b.gamma.lo() <= ga.hi());
    }

    #[test]
    fn subspace_and_vector_badness_sandwich(w in prop::collection::vec(generic_unit(), 1..=2), h in 5u64..60) {
        // |w| < 1 puts the rounded lift of q at height q, so matching X = H compares like with like
        let psi = RateFunction::power_law(int(1), int(1)).unwrap();
        let b = lift(&AffineSubspace::point(w.clone()).unwrap()).unwrap();
        let SubspaceBadness::Certificate(cert) = subspace_badness(&b, &psi, h, MB).unwrap() else {
            return Err(TestCaseError::fail("zero hit on a generic point"));
        };
        let v = vector_badness(&w, &psi, h, MB).unwrap();
        let sub = cert.ratio().unwrap();
        prop_assert!(sub.lo() <= v.gamma.hi());
        prop_assert!(v.gamma.lo() <= sub.hi() * (int(1) + sup_norm(&w)));
        // certificates only get smaller with height
        let SubspaceBadness::Certificate(higher) = subspace_badness(&b, &psi, 2 * h, MB).unwrap() else { unreachable!() };
        prop_assert!(higher.gamma <= cert.gamma);
    }

    #[test]
    fn rational_vectors_hit_zero(p in prop::collection::vec(0i64..30, 1..=3), q in prop::collection::vec(1i64..=30, 3)) {
        let w: RatVec = p.iter().zip(&q).map(|(a, b)| rat(*a, *b)).collect();
        let l = w.iter().fold(BigInt::one(), |acc, x| num_integer::Integer::lcm(&acc, x.denom()));
        let x: u64 = (l.clone() * 2u32).try_into().unwrap();
        let g = vector_badness(&w, &RateFunction::classical(w.len()), x.max(1), MB).unwrap();
        prop_assert_eq!(g.gamma, Value::zero());
        prop_assert_eq!(BigInt::from(g.argmin), l);
    }

    #[test]
    fn lambda_positive_mu_increasing(psi in rate_strategy(), a in 1usize..=3, b in 0usize..3, r in 1i64..=3) {
        prop_assume!(b < a);
        let inst = SeriesInstance::new(psi.clone(), psi, int(r), a, b).unwrap();
        let terms = series_terms(&inst, 300).unwrap();
        for w in terms.windows(2) {
            prop_assert!(w[0].lambda.is_certainly_positive());
            prop_assert!(w[1].mu.lo() > w[0].mu.hi());
        }
    }
}

const LINE: &str = "d = 2\nA.base = cubic-pair\nA.directions = 1, 1\nB.base = cubic-pair\n\
    psi.alpha = 1/2\nphi.kind = powerlog\nphi.alpha = 1/2\nphi.delta = 2\nR = 2\nT.max = 40\n";

fn line_config() -> &'static ExperimentConfig {
    static CFG: std::sync::OnceLock<ExperimentConfig> = std::sync::OnceLock::new();
    CFG.get_or_init(|| ExperimentConfig::parse(LINE).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn constructive_points_are_members(index in 0u64..10_000, t in 2u64..=40) {
        let cfg = line_config();
        let w = badlab::experiment::sample_one(cfg, index).unwrap().w;
        let member = u_t_member(&w, t, cfg).unwrap();
        if constructive_member(&w, t, &cfg.phi, &cfg.r, MB).unwrap() {
            prop_assert!(member.is_some());
        }
        if let Some(m) = member {
            // the witness gives an integer q with ||q w_j|| ≤ (1 + |w|) φ(RT)
            let tt = int(t as i64);
            let worst = w.iter().zip(&m.z[1..]).map(|(wj, zj)| (wj * &tt - int(*zj)).abs()).max().unwrap();
            let bound = cfg.phi.eval_at(&(&cfg.r * &tt)).unwrap().mul_rat(&(int(1) + sup_norm(&w)));
            prop_assert!(worst <= bound.hi());
        }
    }
}

#[test]
fn cumulative_layer_counts_match_naive_layers() {
    let cfg = line_config();
    let mut total = 0u128;
    for j in 1..=12u64 {
        let z = zeta_count(j, &cfg.r, &cfg.a_span, &cfg.phi, MB).unwrap();
        let naive = common::naive_slab(&SlabSpec::layer(&cfg.a_span, &cfg.phi, &cfg.r, j), MB).len() as u128;
        assert_eq!(z, naive, "T = {j}");
        total += z;
    }
    let union: u128 = (1..=12u64)
        .flat_map(|j| enumerate_slab(&SlabSpec::layer(&cfg.a_span, &cfg.phi, &cfg.r, j), MB).unwrap())
        .collect::<std::collections::BTreeSet<_>>()
        .len() as u128;
    assert_eq!(total, union);
}
