use std::cmp::Ordering;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{ceil_div, floor_div, fmt_rat, Rat};
use crate::error::{Error, Result};

/// Closed interval `[lo / 2^bits, hi / 2^bits]` with dyadic endpoints.
///
/// Every operation rounds outward, so the true value of the computed
/// quantity stays inside the result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HpInterval {
    lo: BigInt,
    hi: BigInt,
    bits: u32,
}

const GUARD: u32 = 32;
const LN2_CACHE_BITS: u32 = 2048;

fn shr_floor(x: &BigInt, k: u32) -> BigInt {
    // arithmetic shift on BigInt already floors for negatives
    x >> k
}

fn shr_ceil(x: &BigInt, k: u32) -> BigInt {
    -((-x) >> k)
}

impl HpInterval {
    /// Builds from scaled endpoints. `lo <= hi` is required.
    pub fn from_scaled(lo: BigInt, hi: BigInt, bits: u32) -> Self {
        debug_assert!(lo <= hi, "inverted interval");
        HpInterval { lo, hi, bits }
    }

    pub fn from_rat(x: &Rat, bits: u32) -> Self {
        let scaled_num = x.numer() << bits;
        HpInterval {
            lo: floor_div(&scaled_num, x.denom()),
            hi: ceil_div(&scaled_num, x.denom()),
            bits,
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn lo(&self) -> Rat {
        Rat::new(self.lo.clone(), BigInt::one() << self.bits)
    }

    pub fn hi(&self) -> Rat {
        Rat::new(self.hi.clone(), BigInt::one() << self.bits)
    }

    pub fn scaled_lo(&self) -> &BigInt {
        &self.lo
    }

    pub fn scaled_hi(&self) -> &BigInt {
        &self.hi
    }

    pub fn width(&self) -> Rat {
        self.hi() - self.lo()
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rat) -> bool {
        let scaled = x * Rat::from_integer(BigInt::one() << self.bits);
        scaled >= Rat::from_integer(self.lo.clone()) && scaled <= Rat::from_integer(self.hi.clone())
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    /// `Some(ordering of the interval relative to x)` when `x` lies strictly
    /// outside; `None` when `x` is inside (including endpoints).
    pub fn cmp_rat(&self, x: &Rat) -> Option<Ordering> {
        let scaled = x * Rat::from_integer(BigInt::one() << self.bits);
        if Rat::from_integer(self.hi.clone()) < scaled {
            Some(Ordering::Less)
        } else if Rat::from_integer(self.lo.clone()) > scaled {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    /// Intervals compare only when disjoint.
    pub fn cmp_interval(&self, other: &HpInterval) -> Option<Ordering> {
        let (a, b) = align(self, other);
        if a.hi < b.lo {
            Some(Ordering::Less)
        } else if a.lo > b.hi {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    /// Re-expresses at another precision, rounding outward.
    pub fn with_bits(&self, bits: u32) -> HpInterval {
        match bits.cmp(&self.bits) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let k = bits - self.bits;
                HpInterval { lo: &self.lo << k, hi: &self.hi << k, bits }
            }
            Ordering::Less => {
                let k = self.bits - bits;
                HpInterval { lo: shr_floor(&self.lo, k), hi: shr_ceil(&self.hi, k), bits }
            }
        }
    }

    pub fn neg(&self) -> HpInterval {
        HpInterval { lo: -&self.hi, hi: -&self.lo, bits: self.bits }
    }

    pub fn add(&self, other: &HpInterval) -> HpInterval {
        let (a, b) = align(self, other);
        HpInterval { lo: &a.lo + &b.lo, hi: &a.hi + &b.hi, bits: a.bits }
    }

    pub fn sub(&self, other: &HpInterval) -> HpInterval {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &HpInterval) -> HpInterval {
        let (a, b) = align(self, other);
        let bits = a.bits;
        let prods = [&a.lo * &b.lo, &a.lo * &b.hi, &a.hi * &b.lo, &a.hi * &b.hi];
        let min = prods.iter().min().unwrap();
        let max = prods.iter().max().unwrap();
        HpInterval { lo: shr_floor(min, bits), hi: shr_ceil(max, bits), bits }
    }

    pub fn mul_rat(&self, r: &Rat) -> HpInterval {
        let (x, y) = (r.numer(), r.denom());
        let a = floor_div(&(&self.lo * x), y);
        let b = ceil_div(&(&self.lo * x), y);
        let c = floor_div(&(&self.hi * x), y);
        let d = ceil_div(&(&self.hi * x), y);
        HpInterval { lo: a.min(c), hi: b.max(d), bits: self.bits }
    }

    pub fn add_rat(&self, r: &Rat) -> HpInterval {
        self.add(&HpInterval::from_rat(r, self.bits))
    }

    /// `1/x`, for intervals that exclude zero.
    pub fn recip(&self) -> Result<HpInterval> {
        if !(self.lo.is_positive() || self.hi.is_negative()) {
            return Err(Error::NonPositive("reciprocal of an interval containing 0".into()));
        }
        let one = BigInt::one() << (2 * self.bits);
        // 1/x is decreasing on each sign branch
        let lo = floor_div(&one, &self.hi);
        let hi = ceil_div(&one, &self.lo);
        Ok(HpInterval { lo, hi, bits: self.bits })
    }

    pub fn div(&self, other: &HpInterval) -> Result<HpInterval> {
        let (a, b) = align(self, other);
        Ok(a.mul(&b.recip()?))
    }

    /// Integer power of a non-negative interval.
    pub fn powi(&self, n: u32) -> HpInterval {
        debug_assert!(!self.lo.is_negative());
        let mut acc = HpInterval::from_rat(&Rat::one(), self.bits);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Principal `q`-th root of a non-negative interval.
    pub fn root(&self, q: u32) -> Result<HpInterval> {
        if self.lo.is_negative() {
            return Err(Error::NonPositive("root of a negative interval".into()));
        }
        if q == 1 {
            return Ok(self.clone());
        }
        let shift = self.bits * (q - 1);
        let lo = (&self.lo << shift).nth_root(q);
        let hn = &self.hi << shift;
        let mut hi = hn.nth_root(q);
        if num_traits::pow(hi.clone(), q as usize) < hn {
            hi += 1;
        }
        Ok(HpInterval { lo, hi, bits: self.bits })
    }

    /// `x^(p/q)` for a positive interval.
    pub fn pow_frac(&self, p: i64, q: u32) -> Result<HpInterval> {
        if !self.lo.is_positive() && p < 0 {
            return Err(Error::NonPositive("negative power of an interval touching 0".into()));
        }
        let work = self.with_bits(self.bits + GUARD);
        let powered = work.powi(p.unsigned_abs() as u32).root(q)?;
        let r = if p < 0 { powered.recip()? } else { powered };
        Ok(r.with_bits(self.bits))
    }

    /// Natural logarithm of a positive rational.
    pub fn ln(x: &Rat, bits: u32) -> Result<HpInterval> {
        if !x.is_positive() {
            return Err(Error::NonPositive(format!("log of {}", fmt_rat(x))));
        }
        if *x < Rat::one() {
            return Ok(HpInterval::ln(&x.recip(), bits)?.neg());
        }
        // x = y * 2^k with y in [1, 2)
        let mut k = x.numer().bits() as i64 - x.denom().bits() as i64;
        let two_k = |k: i64| -> Rat {
            if k >= 0 {
                Rat::from_integer(BigInt::one() << k as u64)
            } else {
                Rat::new(BigInt::one(), BigInt::one() << (-k) as u64)
            }
        };
        let mut y = x / two_k(k);
        while y >= Rat::from_integer(BigInt::from(2)) {
            k += 1;
            y = x / two_k(k);
        }
        while y < Rat::one() {
            k -= 1;
            y = x / two_k(k);
        }
        let kk = k.unsigned_abs();
        let work = bits + GUARD + 64 - kk.leading_zeros();
        let z = (&y - Rat::one()) / (&y + Rat::one());
        let (al, ah) = atanh_fixed(&z, work);
        let (l2l, l2h) = ln2_fixed(work);
        let kb = BigInt::from(k);
        let (lo, hi) = if k >= 0 {
            (&kb * &l2l + (al << 1), &kb * &l2h + (ah << 1))
        } else {
            (&kb * &l2h + (al << 1), &kb * &l2l + (ah << 1))
        };
        let k = work - bits;
        Ok(HpInterval { lo: shr_floor(&lo, k), hi: shr_ceil(&hi, k), bits })
    }

    /// `ln(1 + x)` for `0 <= x <= 1`; cheap when `x` is small.
    pub fn ln1p(x: &Rat, bits: u32) -> Result<HpInterval> {
        if x.is_negative() || *x > Rat::one() {
            return Err(Error::invalid("ln1p argument outside [0, 1]"));
        }
        let work = bits + GUARD;
        let z = x / (Rat::from_integer(BigInt::from(2)) + x);
        let (al, ah) = atanh_fixed(&z, work);
        Ok(HpInterval { lo: shr_floor(&(al << 1), GUARD), hi: shr_ceil(&(ah << 1), GUARD), bits })
    }
}

impl fmt::Display for HpInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", fmt_rat(&self.lo()), fmt_rat(&self.hi()))
    }
}

fn align(a: &HpInterval, b: &HpInterval) -> (HpInterval, HpInterval) {
    if a.bits == b.bits {
        (a.clone(), b.clone())
    } else {
        let bits = a.bits.max(b.bits);
        (a.with_bits(bits), b.with_bits(bits))
    }
}

/// Bounds `(lo, hi)` on `atanh(z) * 2^w` for rational `0 <= z <= 1/2`.
fn atanh_fixed(z: &Rat, w: u32) -> (BigInt, BigInt) {
    debug_assert!(!z.is_negative() && *z <= Rat::new(1.into(), 2.into()));
    let scaled = z.numer() << w;
    let zl = floor_div(&scaled, z.denom());
    let zh = ceil_div(&scaled, z.denom());
    if zh.is_zero() {
        return (BigInt::zero(), BigInt::zero());
    }
    let z2l = shr_floor(&(&zl * &zl), w);
    let z2h = shr_ceil(&(&zh * &zh), w);
    let (mut pl, mut ph) = (zl, zh);
    let (mut sl, mut sh) = (BigInt::zero(), BigInt::zero());
    let one = BigInt::one();
    let mut k: u64 = 0;
    loop {
        let den = BigInt::from(2 * k + 1);
        sl += floor_div(&pl, &den);
        sh += ceil_div(&ph, &den);
        pl = shr_floor(&(&pl * &z2l), w);
        ph = shr_ceil(&(&ph * &z2h), w);
        k += 1;
        if ph <= one {
            // remaining tail <= z^(2k+1) / (1 - z^2) <= (4/3) * ph
            sh += 2;
            break;
        }
    }
    (sl, sh)
}

/// Bounds on `ln 2 * 2^w`.
fn ln2_fixed(w: u32) -> (BigInt, BigInt) {
    static CACHE: OnceLock<(BigInt, BigInt)> = OnceLock::new();
    let compute = |w: u32| {
        let (l, h) = atanh_fixed(&Rat::new(1.into(), 3.into()), w);
        (l << 1, h << 1)
    };
    if w > LN2_CACHE_BITS {
        return compute(w);
    }
    let (l, h) = CACHE.get_or_init(|| compute(LN2_CACHE_BITS));
    let k = LN2_CACHE_BITS - w;
    (shr_floor(l, k), shr_ceil(h, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rat, to_f64};

    fn iv_f64(i: &HpInterval) -> (f64, f64) {
        (to_f64(&i.lo()), to_f64(&i.hi()))
    }

    #[test]
    fn ln_brackets_known_values() {
        let l10 = HpInterval::ln(&rat(10, 1), 64).unwrap();
        let (lo, hi) = iv_f64(&l10);
        assert!(lo <= std::f64::consts::LN_10 + 1e-15 && hi >= std::f64::consts::LN_10 - 1e-15);
        assert!(l10.width() < rat(1, 1 << 60));
        let l2 = HpInterval::ln(&rat(2, 1), 128).unwrap();
        assert!(to_f64(&l2.lo()) <= std::f64::consts::LN_2 + 1e-16);
        let half = HpInterval::ln(&rat(1, 2), 64).unwrap();
        assert!(half.contains(&(-l2.with_bits(64).lo())) || half.cmp_interval(&l2.neg()).is_none());
    }

    #[test]
    fn ln1p_agrees_with_ln() {
        let a = HpInterval::ln1p(&rat(1, 1000), 96).unwrap();
        let b = HpInterval::ln(&rat(1001, 1000), 96).unwrap();
        assert!(a.cmp_interval(&b).is_none());
    }

    #[test]
    fn refinement_never_widens() {
        let x = rat(7, 3);
        let mut prev = HpInterval::ln(&x, 32).unwrap();
        for bits in [64, 128, 256, 512] {
            let next = HpInterval::ln(&x, bits).unwrap();
            assert!(next.lo() >= prev.lo() && next.hi() <= prev.hi(), "bits={bits}");
            prev = next;
        }
    }

    #[test]
    fn roots_and_powers() {
        let two = HpInterval::from_rat(&rat(2, 1), 80);
        let s = two.root(2).unwrap();
        assert!(s.mul(&s).contains(&rat(2, 1)));
        let nine = HpInterval::from_rat(&rat(9, 1), 40);
        assert!(nine.root(2).unwrap().is_point());
        let p = HpInterval::from_rat(&rat(4, 1), 64).pow_frac(-3, 2).unwrap();
        assert!(p.contains(&rat(1, 8)));
    }

    #[test]
    fn arithmetic_is_outward() {
        let third = HpInterval::from_rat(&rat(1, 3), 20);
        assert!(third.contains(&rat(1, 3)));
        let prod = third.mul(&third);
        assert!(prod.contains(&rat(1, 9)));
        let q = third.div(&HpInterval::from_rat(&rat(3, 1), 20)).unwrap();
        assert!(q.contains(&rat(1, 9)));
        let neg = HpInterval::from_rat(&rat(-5, 7), 20);
        assert!(neg.mul(&third).contains(&rat(-5, 21)));
        assert!(neg.recip().unwrap().contains(&rat(-7, 5)));
    }
}
