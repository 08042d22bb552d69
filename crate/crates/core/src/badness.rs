//! Empirical badness constants and height-limited certificates.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::json;

use crate::error::{Error, Result};
use crate::exactnum::{fmt_rat, int, round_int, to_f64, Rat, Value};
use crate::geometry::{line_distance, nearest_int_dist, sup_norm, Circuits, LiftedSpan, RatVec};
use crate::lattice::{enumerate_region, IntPoint, Region, Thickness};
use crate::rates::RateFunction;

const RATIO_BITS: u32 = 128;

/// Where the rate is evaluated for height `s`: below the domain start the
/// first admissible value is used.
pub fn rate_point(f: &RateFunction, s: u64) -> Rat {
    int(s.max(f.first_integer()) as i64)
}

fn rate_point_f64(f: &RateFunction, s: u64) -> f64 {
    s.max(f.first_integer()) as f64
}

fn cmp_ratio(f: &RateFunction, x1: &Rat, s1: u64, x2: &Rat, s2: u64, max_bits: u32) -> Result<Ordering> {
    f.cmp_ratios(x1, &rate_point(f, s1), x2, &rate_point(f, s2), max_bits)?
        .require(|| format!("ratio {}/f({s1}) against {}/f({s2})", fmt_rat(x1), fmt_rat(x2)))
}

/// `x / f(s)` as a value.
pub fn ratio_value(f: &RateFunction, x: &Rat, s: u64) -> Result<Value> {
    if x.is_zero() {
        return Ok(Value::zero());
    }
    Value::Exact(x.clone()).div(&f.eval_bits(&rate_point(f, s), RATIO_BITS)?)
}

/// Verified lower bound for the badness infimum of a subspace up to a height.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BadnessCertificate {
    pub subspace: LiftedSpan,
    pub rate: RateFunction,
    /// Minimum ratio when rational, otherwise a rational lower bound of it.
    pub gamma: Rat,
    pub gamma_exact: bool,
    pub height: u64,
    pub witness: IntPoint,
    pub witness_distance: Rat,
}

impl BadnessCertificate {
    /// The minimum ratio as a value (exact or enclosed).
    pub fn ratio(&self) -> Result<Value> {
        ratio_value(&self.rate, &self.witness_distance, witness_height(&self.witness))
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "gamma": fmt_rat(&self.gamma),
            "gamma_exact": self.gamma_exact,
            "witness": self.witness,
            "witness_distance": fmt_rat(&self.witness_distance),
            "height": self.height,
            "rate": self.rate.to_string(),
        })
    }
}

fn witness_height(p: &[i64]) -> u64 {
    p.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubspaceBadness {
    Certificate(BadnessCertificate),
    /// A nonzero integer point on the span: not badly approximable for any rate.
    ZeroHit { witness: IntPoint, height: u64 },
}

impl SubspaceBadness {
    pub fn certificate(&self) -> Option<&BadnessCertificate> {
        match self {
            SubspaceBadness::Certificate(c) => Some(c),
            SubspaceBadness::ZeroHit { .. } => None,
        }
    }
}

/// First nonzero coordinate positive.
fn canonical(p: &[i64]) -> bool {
    p.iter().find(|v| **v != 0).is_some_and(|v| *v > 0)
}

struct Best {
    dist: Rat,
    height: u64,
    point: IntPoint,
}

/// Scans all nonzero integer points with `|x| ≤ H` (one of each `±x`) shell by
/// shell and returns the minimum of `dist(x, 𝔅)/ψ(|x|)`.
pub fn subspace_badness(b_span: &LiftedSpan, psi: &RateFunction, height: u64, max_bits: u32) -> Result<SubspaceBadness> {
    if height == 0 {
        return Err(Error::invalid("height must be >= 1"));
    }
    let n = b_span.ambient();
    let circuits = Circuits::new(b_span);
    let mut best: Option<Best> = None;
    let first = psi.first_integer().clamp(1, height);
    let mut s = first;
    while s <= height {
        let thickness = match &best {
            None => Thickness::Fixed(int(s as i64)),
            Some(b) => {
                let r = ratio_value(psi, &b.dist, b.height)?;
                Thickness::rate(r.hi(), psi, rate_point(psi, s))
            }
        };
        let region = Region {
            center: vec![Rat::zero(); n],
            z0_lo: Rat::zero(),
            z0_hi: int(s as i64),
            half_width: int(s as i64),
            target: b_span.clone(),
            thickness,
        };
        let inner = if s == first { 1 } else { s };
        for p in enumerate_region(&region, max_bits)? {
            let h = witness_height(&p);
            if h < inner || !canonical(&p) {
                continue;
            }
            let x: RatVec = p.iter().map(|v| int(*v)).collect();
            let d = circuits.distance(&x);
            if d.is_zero() {
                return Ok(SubspaceBadness::ZeroHit { witness: p, height: h });
            }
            let better = match &best {
                None => true,
                Some(b) => cmp_ratio(psi, &d, h, &b.dist, b.height, max_bits)? == Ordering::Less,
            };
            if better {
                best = Some(Best { dist: d, height: h, point: p });
            }
        }
        s += 1;
    }
    let b = best.ok_or_else(|| Error::invalid("no lattice points scanned"))?;
    let r = ratio_value(psi, &b.dist, b.height)?;
    Ok(SubspaceBadness::Certificate(BadnessCertificate {
        subspace: b_span.clone(),
        rate: psi.clone(),
        gamma_exact: r.is_exact(),
        gamma: r.lo(),
        height,
        witness: b.point,
        witness_distance: b.dist,
    }))
}

/// Result of a vector badness scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorBadness {
    /// `min_q M(q)/ψ(q)`.
    pub gamma: Value,
    pub argmin: u64,
    /// `M(argmin) = max_j ||argmin · w_j||`.
    pub m: Rat,
}

/// Little-endian fixed-width unsigned integer.
type Limbs = Vec<u64>;

fn to_limbs(x: &BigInt, n: usize) -> Limbs {
    let mut v = x.to_u64_digits().1;
    v.resize(n, 0);
    v
}

fn from_limbs(x: &[u64]) -> BigInt {
    let mut bytes = Vec::with_capacity(x.len() * 8);
    for l in x {
        bytes.extend_from_slice(&l.to_le_bytes());
    }
    BigInt::from_bytes_le(num_bigint::Sign::Plus, &bytes)
}

fn limbs_f64(x: &[u64]) -> f64 {
    x.iter().rev().fold(0.0, |acc, l| acc * 18446744073709551616.0 + *l as f64)
}

fn limbs_lt(a: &[u64], b: &[u64]) -> bool {
    for (x, y) in a.iter().rev().zip(b.iter().rev()) {
        if x != y {
            return x < y;
        }
    }
    false
}

fn limbs_add(a: &mut [u64], b: &[u64]) {
    let mut carry = false;
    for (x, y) in a.iter_mut().zip(b) {
        let (s1, c1) = x.overflowing_add(*y);
        let (s2, c2) = s1.overflowing_add(carry as u64);
        *x = s2;
        carry = c1 || c2;
    }
}

fn limbs_sub(a: &mut [u64], b: &[u64]) {
    let mut borrow = false;
    for (x, y) in a.iter_mut().zip(b) {
        let (d1, b1) = x.overflowing_sub(*y);
        let (d2, b2) = d1.overflowing_sub(borrow as u64);
        *x = d2;
        borrow = b1 || b2;
    }
}

/// `q·w_j mod 1` as integers modulo the common denominator, updated incrementally.
/// One spare limb keeps `cur + step` from overflowing.
struct Residues {
    den: BigInt,
    den_l: Limbs,
    step: Vec<Limbs>,
    cur: Vec<Limbs>,
}

impl Residues {
    fn new(w: &[Rat], q0: u64) -> Self {
        let den = w.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let n = den.to_u64_digits().1.len() + 1;
        let step: Vec<BigInt> = w
            .iter()
            .map(|x| (x.numer() * (&den / x.denom())).mod_floor(&den))
            .collect();
        let cur = step.iter().map(|s| to_limbs(&(s * BigInt::from(q0)).mod_floor(&den), n)).collect();
        Residues { den_l: to_limbs(&den, n), step: step.iter().map(|s| to_limbs(s, n)).collect(), cur, den }
    }

    fn advance(&mut self) {
        for (c, s) in self.cur.iter_mut().zip(&self.step) {
            limbs_add(c, s);
            if !limbs_lt(c, &self.den_l) {
                limbs_sub(c, &self.den_l);
            }
        }
    }

    /// True when every coordinate is strictly closer than `thr/den` to an
    /// integer; `hi = den − thr`.
    fn all_within(&self, thr: &[u64], hi: &[u64]) -> bool {
        self.cur.iter().all(|r| limbs_lt(r, thr) || limbs_lt(hi, r))
    }

    /// Float approximation of the largest distance to an integer.
    fn max_dist_f64(&self, den_f: f64) -> f64 {
        let mut m = 0f64;
        let mut o = vec![0u64; self.den_l.len()];
        for r in &self.cur {
            o.copy_from_slice(&self.den_l);
            limbs_sub(&mut o, r);
            let near = if limbs_lt(r, &o) { r } else { &o };
            m = m.max(limbs_f64(near) / den_f);
        }
        m
    }

    fn max_dist(&self) -> Rat {
        let m = self
            .cur
            .iter()
            .map(|r| {
                let r = from_limbs(r);
                let o = &self.den - &r;
                r.min(o)
            })
            .max()
            .unwrap_or_else(BigInt::zero);
        Rat::new(m, self.den.clone())
    }
}

/// `min_{1 ≤ q ≤ X} max_j ||q w_j|| / ψ(q)` with the minimizing `q`.
pub fn vector_badness(w: &[Rat], psi: &RateFunction, x: u64, max_bits: u32) -> Result<VectorBadness> {
    vector_badness_range(w, psi, 1, x, max_bits)
}

/// As [`vector_badness`] restricted to `q_lo ≤ q ≤ q_hi`. Ties keep the smaller `q`.
pub fn vector_badness_range(w: &[Rat], psi: &RateFunction, q_lo: u64, q_hi: u64, max_bits: u32) -> Result<VectorBadness> {
    if q_lo == 0 || q_hi < q_lo {
        return Err(Error::invalid(format!("empty range [{q_lo}, {q_hi}]")));
    }
    let mut res = Residues::new(w, q_lo);
    let n = res.den_l.len();
    let den_f = limbs_f64(&res.den_l);
    let mut best_m = res.max_dist();
    let mut best_q = q_lo;
    let mut q = q_lo;
    while q < q_hi && !best_m.is_zero() {
        // candidates need M(q) < M(best): ψ is non-increasing, so anything else loses
        let thr = crate::exactnum::ceil_int(&(&best_m * Rat::from_integer(res.den.clone())));
        let hi = to_limbs(&(&res.den - &thr), n);
        let thr = to_limbs(&thr, n);
        let best_f = to_f64(&best_m) / psi.approx(rate_point_f64(psi, best_q));
        let mut improved = false;
        while q < q_hi {
            q += 1;
            res.advance();
            if res.all_within(&thr, &hi) {
                // float screen with a generous margin before the exact comparison
                let ratio = res.max_dist_f64(den_f) / psi.approx(rate_point_f64(psi, q));
                if ratio > best_f * (1.0 + 1e-9) {
                    continue;
                }
                let m = res.max_dist();
                if cmp_ratio(psi, &m, q, &best_m, best_q, max_bits)? == Ordering::Less {
                    best_m = m;
                    best_q = q;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            break;
        }
    }
    let gamma = ratio_value(psi, &best_m, best_q)?;
    Ok(VectorBadness { gamma, argmin: best_q, m: best_m })
}

/// `max_j ||q w_j||`.
pub fn max_nearest_int_dist(w: &[Rat], q: u64) -> Rat {
    let qq = int(q as i64);
    w.iter().map(|x| nearest_int_dist(&(x * &qq))).max().unwrap_or_else(Rat::zero)
}

/// Outcome of comparing the lifted-line distance with the nearest-integer defect.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Def1Report {
    pub checked: u64,
    /// Points where the sandwich fails (should be empty).
    pub violations: Vec<IntPoint>,
    /// Extremal `D/M` over points with `M > 0`.
    pub min_ratio: Option<Rat>,
    pub max_ratio: Option<Rat>,
    /// Points on the line (`D = M = 0`).
    pub zero_points: u64,
    /// `min D(x)/ψ(x_0)` with its `x_0`, when some `D > 0`.
    pub min_normalized: Option<(Value, u64)>,
}

/// For `x = (x_0, round(x_0 w))`, checks `M/(1+|w|) ≤ D ≤ M` exactly where
/// `D = min_t |x − t(1, w)|` and `M = max_j ||x_0 w_j||`.
pub fn def1_equivalence_audit(w: &[Rat], psi: &RateFunction, x_max: u64, max_bits: u32) -> Result<Def1Report> {
    let lifted: RatVec = std::iter::once(Rat::one()).chain(w.iter().cloned()).collect();
    let scale = Rat::one() + sup_norm(w);
    let mut rep = Def1Report {
        checked: 0,
        violations: Vec::new(),
        min_ratio: None,
        max_ratio: None,
        zero_points: 0,
        min_normalized: None,
    };
    let mut best: Option<(Rat, u64)> = None;
    for x0 in 1..=x_max {
        let q = int(x0 as i64);
        let mut x: RatVec = vec![q.clone()];
        let mut pt: IntPoint = vec![x0 as i64];
        for wj in w {
            let r = round_int(&(wj * &q));
            pt.push(r.to_i64().ok_or_else(|| Error::invalid("coordinate overflow"))?);
            x.push(Rat::from_integer(r));
        }
        let (d, _) = line_distance(&x, &lifted);
        let m = max_nearest_int_dist(w, x0);
        rep.checked += 1;
        if !(&m / &scale <= d && d <= m) {
            rep.violations.push(pt);
            continue;
        }
        if m.is_zero() {
            rep.zero_points += 1;
            continue;
        }
        let ratio = &d / &m;
        if rep.min_ratio.as_ref().is_none_or(|r| ratio < *r) {
            rep.min_ratio = Some(ratio.clone());
        }
        if rep.max_ratio.as_ref().is_none_or(|r| ratio > *r) {
            rep.max_ratio = Some(ratio);
        }
        let better = match &best {
            None => true,
            Some((bd, bq)) => cmp_ratio(psi, &d, x0, bd, *bq, max_bits)? == Ordering::Less,
        };
        if better {
            best = Some((d, x0));
        }
    }
    if let Some((d, q)) = best {
        rep.min_normalized = Some((ratio_value(psi, &d, q)?, q));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::preset;
    use crate::exactnum::{rat, to_f64, DEFAULT_MAX_BITS};
    use crate::geometry::{lift, AffineSubspace};

    const MB: u32 = DEFAULT_MAX_BITS;

    fn inv_t() -> RateFunction {
        RateFunction::power_law(int(1), int(1)).unwrap()
    }

    fn golden() -> Rat {
        preset("golden").unwrap()[0].clone()
    }

    #[test]
    fn zero_hits() {
        let b = lift(&AffineSubspace::point(vec![rat(1, 2)]).unwrap()).unwrap();
        assert_eq!(
            subspace_badness(&b, &inv_t(), 4, MB).unwrap(),
            SubspaceBadness::ZeroHit { witness: vec![2, 1], height: 2 }
        );
        let z = lift(&AffineSubspace::point(vec![int(0), int(0)]).unwrap()).unwrap();
        assert_eq!(
            subspace_badness(&z, &inv_t(), 3, MB).unwrap(),
            SubspaceBadness::ZeroHit { witness: vec![1, 0, 0], height: 1 }
        );
    }

    #[test]
    fn golden_subspace() {
        let b = lift(&AffineSubspace::point(vec![golden()]).unwrap()).unwrap();
        let cert = subspace_badness(&b, &inv_t(), 200, MB).unwrap();
        let cert = cert.certificate().unwrap();
        assert!(cert.gamma_exact);
        assert_eq!(cert.witness, vec![1, 1]);
        assert!((to_f64(&cert.gamma) - (5f64.sqrt() - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn vector_examples() {
        let r = vector_badness(&[rat(1, 2)], &inv_t(), 4, MB).unwrap();
        assert_eq!((r.gamma, r.argmin), (Value::zero(), 2));
        let r = vector_badness(&[int(0), int(0)], &inv_t(), 5, MB).unwrap();
        assert_eq!((r.gamma, r.argmin), (Value::zero(), 1));
        let g = vector_badness(&[golden()], &inv_t(), 2000, MB).unwrap();
        assert_eq!(g.argmin, 1);
        assert!((to_f64(&g.gamma.lo()) - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-12);
        let g = vector_badness_range(&[golden()], &inv_t(), 100, 2000, MB).unwrap();
        let v = to_f64(&g.gamma.lo());
        assert!(v > 0.4469 && v < 0.4475, "{v}");
    }

    #[test]
    fn small_and_big_residues_agree() {
        let w = vec![rat(355, 113), rat(-22, 7)];
        let f = RateFunction::power_log(int(1), rat(1, 2), int(1), int(2)).unwrap();
        let a = vector_badness(&w, &f, 500, MB).unwrap();
        // brute force
        let mut best: Option<(Rat, u64)> = None;
        for q in 1..=500u64 {
            let m = max_nearest_int_dist(&w, q);
            let better = match &best {
                None => true,
                Some((bm, bq)) => cmp_ratio(&f, &m, q, bm, *bq, MB).unwrap() == Ordering::Less,
            };
            if better {
                best = Some((m, q));
            }
        }
        assert_eq!(a.argmin, best.unwrap().1);
    }

    #[test]
    fn wide_denominators_agree_with_brute_force() {
        let big = BigInt::one() << 200u32;
        let w = vec![
            Rat::new(BigInt::from(3u8) * &big / BigInt::from(7u8) + 1, big.clone()),
            Rat::new(-(&big * BigInt::from(5u8) / BigInt::from(11u8)), big.clone()),
        ];
        let f = inv_t();
        let a = vector_badness(&w, &f, 300, MB).unwrap();
        let mut best: Option<(Rat, u64)> = None;
        for q in 1..=300u64 {
            let m = max_nearest_int_dist(&w, q);
            if best.as_ref().is_none_or(|(bm, bq)| cmp_ratio(&f, &m, q, bm, *bq, MB).unwrap() == Ordering::Less) {
                best = Some((m, q));
            }
        }
        assert_eq!(a.argmin, best.unwrap().1);
    }

    #[test]
    fn def1_examples() {
        let rep = def1_equivalence_audit(&[golden()], &inv_t(), 1, MB).unwrap();
        let g = golden();
        assert_eq!(rep.min_ratio, Some((Rat::one() + &g).recip()));
        assert!(rep.violations.is_empty());
        let rep = def1_equivalence_audit(&[rat(1, 3)], &inv_t(), 9, MB).unwrap();
        assert_eq!(rep.zero_points, 3);
        let rep = def1_equivalence_audit(&[int(0)], &inv_t(), 5, MB).unwrap();
        assert_eq!(rep.zero_points, 5);
    }
}
