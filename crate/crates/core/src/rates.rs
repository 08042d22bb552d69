//! The decreasing rate functions ψ and φ.
//!
//! Two variants only: `c·T^(-α)` and `c·T^(-α)·(log T)^(-δ)`. Closing the
//! family keeps monotonicity and `φ ≤ ψ` decidable.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{
    cmp_by_refinement, exact_root, fmt_rat, int, pow_rat, rat, rat_cmp_power, Decision, HpInterval,
    Rat, Value, START_BITS, to_f64,
};

const GUARD: u32 = 24;

/// Precision used by [`RateFunction::eval_at`] when the value is irrational.
pub const EVAL_BITS: u32 = 128;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RateFunction {
    /// `c · T^(-alpha)` for `T >= 1`.
    PowerLaw { c: Rat, alpha: Rat },
    /// `c · T^(-alpha) · (log T)^(-delta)` for `T >= t0`.
    PowerLog { c: Rat, alpha: Rat, delta: Rat, t0: Rat },
}

impl RateFunction {
    pub fn power_law(c: Rat, alpha: Rat) -> Result<Self> {
        let f = RateFunction::PowerLaw { c, alpha };
        f.validate()?;
        Ok(f)
    }

    pub fn power_log(c: Rat, alpha: Rat, delta: Rat, t0: Rat) -> Result<Self> {
        let f = RateFunction::PowerLog { c, alpha, delta, t0 };
        f.validate()?;
        Ok(f)
    }

    /// `T^(-1/d)`, the classical specialization.
    pub fn classical(d: usize) -> Self {
        RateFunction::PowerLaw { c: int(1), alpha: rat(1, d as i64) }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.c().is_positive() {
            return Err(Error::InvalidRate(format!("c = {} must be > 0", fmt_rat(self.c()))));
        }
        if self.alpha().is_negative() {
            return Err(Error::InvalidRate(format!("alpha = {} must be >= 0", fmt_rat(self.alpha()))));
        }
        if let RateFunction::PowerLog { delta, t0, .. } = self {
            if delta.is_negative() {
                return Err(Error::InvalidRate(format!("delta = {} must be >= 0", fmt_rat(delta))));
            }
            if *t0 < int(2) {
                return Err(Error::InvalidRate(format!("T0 = {} must be >= 2", fmt_rat(t0))));
            }
        }
        for r in [self.alpha(), self.delta()] {
            if r.numer().to_i64().is_none() || r.denom().to_u32().is_none() {
                return Err(Error::InvalidRate(format!("exponent {} is too large", fmt_rat(r))));
            }
        }
        Ok(())
    }

    pub fn c(&self) -> &Rat {
        match self {
            RateFunction::PowerLaw { c, .. } | RateFunction::PowerLog { c, .. } => c,
        }
    }

    pub fn alpha(&self) -> &Rat {
        match self {
            RateFunction::PowerLaw { alpha, .. } | RateFunction::PowerLog { alpha, .. } => alpha,
        }
    }

    /// Log exponent, zero for the power law.
    pub fn delta(&self) -> &Rat {
        static ZERO: std::sync::OnceLock<Rat> = std::sync::OnceLock::new();
        match self {
            RateFunction::PowerLaw { .. } => ZERO.get_or_init(Rat::zero),
            RateFunction::PowerLog { delta, .. } => delta,
        }
    }

    pub fn domain_start(&self) -> Rat {
        match self {
            RateFunction::PowerLaw { .. } => int(1),
            RateFunction::PowerLog { t0, .. } => t0.clone(),
        }
    }

    /// Smallest integer in the domain.
    pub fn first_integer(&self) -> u64 {
        let s = self.domain_start();
        crate::exactnum::ceil_int(&s).to_u64().unwrap_or(u64::MAX).max(1)
    }

    pub fn check_domain(&self, t: &Rat) -> Result<()> {
        let start = self.domain_start();
        if *t < start {
            return Err(Error::Domain { value: t.clone(), start });
        }
        Ok(())
    }

    /// `lim f(T) = 0`.
    pub fn tends_to_zero(&self) -> bool {
        self.alpha().is_positive() || self.delta().is_positive()
    }

    /// `(c, p, q)` with `f(T) = c · T^(-p/q)` when no log factor is present.
    pub fn power_law_form(&self) -> Option<(&Rat, i64, u64)> {
        if !self.delta().is_zero() {
            return None;
        }
        let a = self.alpha();
        Some((self.c(), a.numer().to_i64()?, a.denom().to_u64()?))
    }

    /// The same function multiplied by `k > 0`.
    pub fn scaled(&self, k: &Rat) -> RateFunction {
        let mut f = self.clone();
        match &mut f {
            RateFunction::PowerLaw { c, .. } | RateFunction::PowerLog { c, .. } => *c = &*c * k,
        }
        f
    }

    fn exponent_parts(r: &Rat) -> (i64, u32) {
        (r.numer().to_i64().expect("validated"), r.denom().to_u32().expect("validated"))
    }

    /// Enclosure of `f(T)` with `bits` fractional bits.
    pub fn interval(&self, t: &Rat, bits: u32) -> Result<HpInterval> {
        self.check_domain(t)?;
        if let Some(v) = self.exact_value(t) {
            return Ok(HpInterval::from_rat(&v, bits));
        }
        let work = bits + GUARD;
        let (ap, aq) = Self::exponent_parts(self.alpha());
        let tpow = match exact_root(&pow_rat(t, -ap), aq) {
            Some(r) => HpInterval::from_rat(&r, work),
            None => HpInterval::from_rat(t, work).pow_frac(-ap, aq)?,
        };
        let mut acc = tpow.mul_rat(self.c());
        if !self.delta().is_zero() {
            let (dp, dq) = Self::exponent_parts(self.delta());
            let lg = HpInterval::ln(t, work)?.pow_frac(-dp, dq)?;
            acc = acc.mul(&lg);
        }
        Ok(acc.with_bits(bits))
    }

    /// The exact value, when it is rational and cheap to see.
    pub fn exact_value(&self, t: &Rat) -> Option<Rat> {
        let (c, p, q) = self.power_law_form()?;
        if t.is_zero() {
            return None;
        }
        let r = exact_root(&pow_rat(t, -p), q.try_into().ok()?)?;
        Some(c * r)
    }

    /// `f(T)`, exact when rational and an interval otherwise.
    pub fn eval_at(&self, t: &Rat) -> Result<Value> {
        self.eval_bits(t, EVAL_BITS)
    }

    pub fn eval_bits(&self, t: &Rat, bits: u32) -> Result<Value> {
        self.check_domain(t)?;
        Ok(match self.exact_value(t) {
            Some(v) => Value::Exact(v),
            None => Value::Approx(self.interval(t, bits)?),
        })
    }

    /// Float evaluation, only for prefilters that keep a relative margin.
    pub fn approx(&self, t: f64) -> f64 {
        let c = to_f64(self.c());
        let a = to_f64(self.alpha());
        let v = c * t.powf(-a);
        if self.delta().is_zero() {
            v
        } else {
            v * t.ln().powf(-to_f64(self.delta()))
        }
    }

    /// Orders `x1 / f(T1)` against `x2 / f(T2)` for `x1, x2 >= 0`.
    pub fn cmp_ratios(&self, x1: &Rat, t1: &Rat, x2: &Rat, t2: &Rat, max_bits: u32) -> Result<Decision> {
        self.check_domain(t1)?;
        self.check_domain(t2)?;
        match (x1.is_zero(), x2.is_zero()) {
            (true, true) => return Ok(Decision::Decided(Ordering::Equal)),
            (true, false) => return Ok(Decision::Decided(Ordering::Less)),
            (false, true) => return Ok(Decision::Decided(Ordering::Greater)),
            _ => {}
        }
        if t1 == t2 {
            return Ok(Decision::Decided(x1.cmp(x2)));
        }
        if let Some((_, p, q)) = self.power_law_form() {
            // x1 T1^α vs x2 T2^α  <=>  x1/x2 vs (T2/T1)^α
            return Ok(Decision::Decided(rat_cmp_power(&(x1 / x2), &(t2 / t1), p, q)?));
        }
        cmp_by_refinement(
            |bits| {
                let a = Value::Exact(x1.clone()).div(&self.eval_bits(t1, bits)?)?;
                let b = Value::Exact(x2.clone()).div(&self.eval_bits(t2, bits)?)?;
                Ok((a, b))
            },
            max_bits,
        )
    }

    /// Orders `self(T)` against `other(T)`.
    pub fn cmp_at(&self, other: &RateFunction, t: &Rat, max_bits: u32) -> Result<Decision> {
        self.check_domain(t)?;
        other.check_domain(t)?;
        if self.delta() == other.delta() {
            // logs cancel: c1 T^(-a1) vs c2 T^(-a2)  <=>  c1/c2 vs T^(a1 - a2)
            let e = self.alpha() - other.alpha();
            let (p, q) = (e.numer().to_i64(), e.denom().to_u64());
            if let (Some(p), Some(q)) = (p, q) {
                return Ok(Decision::Decided(rat_cmp_power(&(self.c() / other.c()), t, p, q)?));
            }
        }
        cmp_by_refinement(|bits| Ok((self.eval_bits(t, bits)?, other.eval_bits(t, bits)?)), max_bits)
    }

    /// Samples the analytic monotonicity on a grid; used as a sanity net.
    pub fn spot_check_monotone(&self, t_max: &Rat, max_bits: u32) -> Result<Option<(Rat, Rat)>> {
        let grid = geometric_grid(&self.domain_start(), t_max);
        for w in grid.windows(2) {
            let d = cmp_by_refinement(
                |bits| Ok((self.eval_bits(&w[0], bits)?, self.eval_bits(&w[1], bits)?)),
                max_bits,
            )?;
            if d == Decision::Decided(Ordering::Less) {
                return Ok(Some((w[0].clone(), w[1].clone())));
            }
        }
        Ok(None)
    }
}

impl fmt::Display for RateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateFunction::PowerLaw { c, alpha } => {
                write!(f, "PowerLaw(c={}, alpha={})", fmt_rat(c), fmt_rat(alpha))
            }
            RateFunction::PowerLog { c, alpha, delta, t0 } => write!(
                f,
                "PowerLog(c={}, alpha={}, delta={}, T0={})",
                fmt_rat(c),
                fmt_rat(alpha),
                fmt_rat(delta),
                fmt_rat(t0)
            ),
        }
    }
}

/// Consecutive integers near the start, then ratio 9/8 steps, ending at `t_max`.
pub fn geometric_grid(start: &Rat, t_max: &Rat) -> Vec<Rat> {
    let mut out = vec![start.clone()];
    let mut t = crate::exactnum::floor_int(start) + BigInt::one();
    let dense_end = &t + BigInt::from(64);
    while Rat::from_integer(t.clone()) <= *t_max {
        out.push(Rat::from_integer(t.clone()));
        if t < dense_end {
            t += 1;
        } else {
            t = (&t * 9) / 8 + 1;
        }
    }
    if out.last() != Some(t_max) && t_max > start {
        out.push(t_max.clone());
    }
    out
}

/// Outcome of the `φ ≤ ψ` check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Admissibility {
    /// `φ ≤ ψ` holds on the checked grid from `from` onwards (`from` is the
    /// common domain start unless the inequality only sets in later).
    Ok { from: Rat, grid_points: usize },
    /// Fails; `witness` is the first grid point where `φ(T) > ψ(T)`.
    Violation { witness: Option<Rat> },
}

/// Analytic test: is `φ ≤ ψ` true for all large `T`?
///
/// Compares decay exponents first, then log exponents, then constants.
pub fn eventually_below(psi: &RateFunction, phi: &RateFunction) -> bool {
    match phi.alpha().cmp(psi.alpha()) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => match phi.delta().cmp(psi.delta()) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => phi.c() <= psi.c(),
        },
    }
}

/// Checks `φ(T) ≤ ψ(T)` analytically and on a grid up to `t_max`.
pub fn admissible_pair(psi: &RateFunction, phi: &RateFunction, t_max: &Rat, max_bits: u32) -> Result<Admissibility> {
    let start = psi.domain_start().max(phi.domain_start());
    let grid = geometric_grid(&start, &t_max.clone().max(start.clone()));
    let mut first_bad: Option<Rat> = None;
    let mut last_bad: Option<usize> = None;
    for (i, t) in grid.iter().enumerate() {
        let d = phi.cmp_at(psi, t, max_bits)?;
        let o = d.require(|| format!("phi vs psi at T = {}", fmt_rat(t)))?;
        if o == Ordering::Greater {
            first_bad.get_or_insert_with(|| t.clone());
            last_bad = Some(i);
        }
    }
    if !eventually_below(psi, phi) {
        if first_bad.is_none() {
            // search further out for a concrete witness
            let mut t = t_max.clone().max(start.clone());
            for _ in 0..64 {
                t = &t * int(16);
                if phi.cmp_at(psi, &t, max_bits)?.ordering() == Some(Ordering::Greater) {
                    first_bad = Some(t);
                    break;
                }
            }
        }
        return Ok(Admissibility::Violation { witness: first_bad });
    }
    let (from, grid_points) = match last_bad {
        None => (start, grid.len()),
        Some(i) if i + 1 < grid.len() => (grid[i + 1].clone(), grid.len() - i - 1),
        Some(_) => return Ok(Admissibility::Violation { witness: first_bad }),
    };
    Ok(Admissibility::Ok { from, grid_points })
}

/// Lifts [`admissible_pair`] into a hard requirement.
pub fn require_admissible(psi: &RateFunction, phi: &RateFunction, t_max: &Rat, max_bits: u32) -> Result<Rat> {
    if !psi.tends_to_zero() {
        return Err(Error::Hypothesis {
            what: format!("psi = {psi} does not tend to 0"),
            cites: "lim ψ(T) = 0",
        });
    }
    match admissible_pair(psi, phi, t_max, max_bits)? {
        Admissibility::Ok { from, .. } => Ok(from),
        Admissibility::Violation { witness } => Err(Error::Hypothesis {
            what: match witness {
                Some(t) => format!("phi > psi at T = {}", fmt_rat(&t)),
                None => "phi > psi for all large T".into(),
            },
            cites: "φ(T) ⩽ ψ(T)",
        }),
    }
}

/// Default precision start for callers that refine manually.
pub const fn start_bits() -> u32 {
    START_BITS
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{cmp_refine, to_f64, DEFAULT_MAX_BITS};

    fn pl(c: Rat, a: Rat) -> RateFunction {
        RateFunction::power_law(c, a).unwrap()
    }

    fn plog(c: Rat, a: Rat, d: Rat) -> RateFunction {
        RateFunction::power_log(c, a, d, int(2)).unwrap()
    }

    #[test]
    fn exact_evaluations() {
        assert_eq!(pl(int(1), int(1)).interval(&int(4), 64).unwrap().lo(), rat(1, 4));
        assert!(pl(int(1), int(1)).interval(&int(4), 64).unwrap().is_point());
        assert_eq!(pl(int(1), rat(1, 2)).eval_at(&int(9)).unwrap(), Value::Exact(rat(1, 3)));
        assert_eq!(pl(int(1), rat(1, 2)).eval_at(&int(16)).unwrap(), Value::Exact(rat(1, 4)));
        assert_eq!(pl(int(3), int(1)).eval_at(&int(7)).unwrap(), Value::Exact(rat(3, 7)));
    }

    #[test]
    fn log_evaluations() {
        let f = plog(int(1), int(0), int(1));
        let iv = f.interval(&int(10), 64).unwrap();
        let want = 1.0 / 10f64.ln();
        assert!(to_f64(&iv.lo()) <= want + 1e-15 && to_f64(&iv.hi()) >= want - 1e-15);
        assert!(iv.width() < Rat::new(1.into(), BigInt::one() << 40));
        let g = plog(int(1), rat(1, 2), int(1));
        let v = g.eval_at(&int(10)).unwrap();
        assert!(!v.is_exact());
        let want = 10f64.powf(-0.5) / 10f64.ln();
        assert!((to_f64(&v.lo()) - want).abs() < 1e-12);
    }

    #[test]
    fn refine_examples() {
        let f = pl(int(1), rat(1, 2));
        assert_eq!(cmp_refine(&rat(1, 2), &f, &int(4), 256).unwrap(), Decision::Decided(Ordering::Equal));
        let g = plog(int(1), int(0), int(1));
        assert_eq!(cmp_refine(&rat(2, 5), &g, &int(10), 256).unwrap(), Decision::Decided(Ordering::Less));
        let h = pl(int(1), int(1));
        assert_eq!(cmp_refine(&int(1), &h, &int(1), 256).unwrap(), Decision::Decided(Ordering::Equal));
        assert!(matches!(cmp_refine(&int(1), &g, &int(1), 256), Err(Error::Domain { .. })));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(RateFunction::power_law(int(0), int(1)).is_err());
        assert!(RateFunction::power_law(int(1), int(-1)).is_err());
        assert!(RateFunction::power_log(int(1), int(1), int(-1), int(2)).is_err());
        assert!(RateFunction::power_log(int(1), int(1), int(1), rat(3, 2)).is_err());
    }

    #[test]
    fn admissibility_examples() {
        let m = DEFAULT_MAX_BITS;
        let psi = pl(int(1), rat(1, 2));
        let phi = plog(int(1), rat(1, 2), int(2));
        match admissible_pair(&psi, &phi, &int(1000), m).unwrap() {
            Admissibility::Ok { from, .. } => assert!(from <= int(3), "from = {from}"),
            v => panic!("{v:?}"),
        }
        let v = admissible_pair(&pl(int(1), int(1)), &pl(int(2), int(1)), &int(100), m).unwrap();
        assert_eq!(v, Admissibility::Violation { witness: Some(int(1)) });
        let v = admissible_pair(&pl(int(1), rat(1, 2)), &pl(int(1), rat(1, 3)), &int(100), m).unwrap();
        assert_eq!(v, Admissibility::Violation { witness: Some(int(2)) });
        assert!(require_admissible(&psi, &psi, &int(10), m).is_ok());
    }

    #[test]
    fn ratio_comparison() {
        let f = pl(int(1), int(1));
        // 1/(1/3) = 3 vs 1/(1/2) = 2
        let d = f.cmp_ratios(&int(1), &int(3), &int(1), &int(2), 256).unwrap();
        assert_eq!(d, Decision::Decided(Ordering::Greater));
        let g = plog(int(1), int(1), int(1));
        let d = g.cmp_ratios(&int(1), &int(3), &int(1), &int(2), 256).unwrap();
        assert_eq!(d, Decision::Decided(Ordering::Greater));
        let d = g.cmp_ratios(&int(0), &int(3), &int(1), &int(2), 256).unwrap();
        assert_eq!(d, Decision::Decided(Ordering::Less));
    }

    #[test]
    fn classical_matches_perfect_powers() {
        for d in 1..=4usize {
            let f = RateFunction::classical(d);
            for k in 1..=6i64 {
                let t = int(k.pow(d as u32));
                assert_eq!(f.eval_at(&t).unwrap(), Value::Exact(rat(1, k)));
            }
        }
    }
}
