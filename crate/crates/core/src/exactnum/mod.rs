//! Exact rationals plus a refinement engine for comparisons against
//! irrational rate values.
//!
//! Every inequality that decides set membership goes through this module.
//! Power-law thresholds are decided exactly by integer cross powers; anything
//! involving a logarithm is bracketed by [`HpInterval`]s whose precision is
//! doubled until the comparison separates or the bit cap is reached.

mod interval;
mod value;

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use interval::HpInterval;
pub use value::Value;

use crate::error::{Error, Result};
use crate::rates::RateFunction;

/// Exact rational scalar. Canonical (reduced, positive denominator) after every operation.
pub type Rat = BigRational;

/// Default cap for interval refinement; overridable through `BADLAB_PRECISION_BITS`.
pub const DEFAULT_MAX_BITS: u32 = 256;

/// Starting precision for refinement loops.
pub const START_BITS: u32 = 64;

pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn from_bigint(n: BigInt) -> Rat {
    Rat::from_integer(n)
}

pub fn floor_int(x: &Rat) -> BigInt {
    x.numer().div_floor(x.denom())
}

pub fn ceil_int(x: &Rat) -> BigInt {
    -((-x.numer()).div_floor(x.denom()))
}

pub(crate) fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

pub(crate) fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

/// Nearest integer, ties rounded up.
pub fn round_int(x: &Rat) -> BigInt {
    floor_int(&(x + rat(1, 2)))
}

/// `max_bits` from `BADLAB_PRECISION_BITS`, falling back to the default.
pub fn precision_from_env() -> u32 {
    std::env::var("BADLAB_PRECISION_BITS")
        .ok()
        .and_then(|s| s.trim().parse::<u32>().ok())
        .filter(|&b| b >= START_BITS)
        .unwrap_or(DEFAULT_MAX_BITS)
}

/// Renders `p/q`, or just `p` for integers.
pub fn fmt_rat(x: &Rat) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `p/q` or `p`. Decimal and exponent notation are rejected so no
/// floating-point literal can leak into an exact comparison.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("expected a rational literal \"p/q\", got {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    if num.is_empty() || den.is_empty() {
        return Err(bad());
    }
    let num: BigInt = num.parse().map_err(|_| bad())?;
    // dyadic shorthand "p/2^k"
    let den: BigInt = if let Some(k) = den.strip_prefix("2^") {
        let k: u32 = k.parse().map_err(|_| bad())?;
        BigInt::one() << k
    } else {
        den.parse().map_err(|_| bad())?
    };
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rat::new(num, den))
}

/// If the denominator is a power of two, returns `(numerator, k)` with value `numerator / 2^k`.
pub fn dyadic_parts(x: &Rat) -> Option<(BigInt, u64)> {
    let d = x.denom();
    let k = d.bits() - 1;
    if *d == BigInt::one() << k {
        Some((x.numer().clone(), k))
    } else {
        None
    }
}

/// `p/2^k` for dyadic values, `p/q` otherwise.
pub fn fmt_dyadic(x: &Rat) -> String {
    match dyadic_parts(x) {
        Some((n, 0)) => n.to_string(),
        Some((n, k)) => format!("{n}/2^{k}"),
        None => fmt_rat(x),
    }
}

/// Exact `q`-th root of a positive rational, when it exists.
pub fn exact_root(x: &Rat, q: u32) -> Option<Rat> {
    if q == 1 {
        return Some(x.clone());
    }
    if !x.is_positive() {
        return None;
    }
    let rn = x.numer().nth_root(q);
    let rd = x.denom().nth_root(q);
    if num_traits::pow(rn.clone(), q as usize) == *x.numer()
        && num_traits::pow(rd.clone(), q as usize) == *x.denom()
    {
        Some(Rat::new(rn, rd))
    } else {
        None
    }
}

/// `x^e` for a rational and a signed integer exponent (`x != 0` when `e < 0`).
pub fn pow_rat(x: &Rat, e: i64) -> Rat {
    let mag = num_traits::pow(x.clone(), e.unsigned_abs() as usize);
    if e < 0 {
        mag.recip()
    } else {
        mag
    }
}

/// Exact ordering of `x` against `y^(p/q)`, decided by comparing `x^q` with `y^p`.
pub fn rat_cmp_power(x: &Rat, y: &Rat, p: i64, q: u64) -> Result<Ordering> {
    if !x.is_positive() {
        return Err(Error::NonPositive(format!("base x = {}", fmt_rat(x))));
    }
    if !y.is_positive() {
        return Err(Error::NonPositive(format!("base y = {}", fmt_rat(y))));
    }
    if q == 0 {
        return Err(Error::invalid("root index q must be >= 1"));
    }
    let lhs = pow_rat(x, q as i64);
    let rhs = pow_rat(y, p);
    Ok(lhs.cmp(&rhs))
}

/// Outcome of a refinement comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Decided(Ordering),
    Undecidable { bits: u32 },
}

impl Decision {
    pub fn ordering(self) -> Option<Ordering> {
        match self {
            Decision::Decided(o) => Some(o),
            Decision::Undecidable { .. } => None,
        }
    }

    /// Converts the undecidable marker into an error carrying `context`.
    pub fn require(self, context: impl FnOnce() -> String) -> Result<Ordering> {
        match self {
            Decision::Decided(o) => Ok(o),
            Decision::Undecidable { bits } => Err(Error::Undecidable { bits, context: context() }),
        }
    }
}

/// Guaranteed enclosure of `f(T)` at `bits` fractional bits.
pub fn interval_eval(f: &RateFunction, t: &Rat, bits: u32) -> Result<HpInterval> {
    f.interval(t, bits)
}

/// Orders `x` against `f(T)`.
///
/// Power-law values (including power-log with zero log exponent) are decided
/// exactly. Otherwise the enclosure of `f(T)` is refined from [`START_BITS`]
/// up to `max_bits`; a log-bearing value is transcendental, so equality never
/// happens and only genuine precision exhaustion yields `Undecidable`.
pub fn cmp_refine(x: &Rat, f: &RateFunction, t: &Rat, max_bits: u32) -> Result<Decision> {
    f.check_domain(t)?;
    if !x.is_positive() {
        // f(T) > 0 on its domain
        return Ok(Decision::Decided(Ordering::Less));
    }
    if let Some((c, p, q)) = f.power_law_form() {
        // x vs c * T^(-p/q)  <=>  x/c vs T^(-p/q)
        let ord = rat_cmp_power(&(x / c), t, -p, q)?;
        return Ok(Decision::Decided(ord));
    }
    let mut bits = START_BITS.min(max_bits);
    loop {
        let iv = f.interval(t, bits)?;
        if let Some(o) = iv.cmp_rat(x) {
            return Ok(Decision::Decided(o.reverse()));
        }
        if bits >= max_bits {
            return Ok(Decision::Undecidable { bits });
        }
        bits = (bits * 2).min(max_bits);
    }
}

/// Orders two values that may be intervals, refining with `refine(bits)` when
/// the enclosures overlap. `refine` must return enclosures of the same pair.
pub fn cmp_by_refinement<F>(mut refine: F, max_bits: u32) -> Result<Decision>
where
    F: FnMut(u32) -> Result<(Value, Value)>,
{
    let mut bits = START_BITS.min(max_bits);
    loop {
        let (a, b) = refine(bits)?;
        if let (Value::Exact(x), Value::Exact(y)) = (&a, &b) {
            return Ok(Decision::Decided(x.cmp(y)));
        }
        if a.hi() < b.lo() {
            return Ok(Decision::Decided(Ordering::Less));
        }
        if a.lo() > b.hi() {
            return Ok(Decision::Decided(Ordering::Greater));
        }
        if bits >= max_bits {
            return Ok(Decision::Undecidable { bits });
        }
        bits = (bits * 2).min(max_bits);
    }
}

/// Lossy conversion for human-readable summaries only.
pub fn to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn abs(x: &Rat) -> Rat {
    x.abs()
}
