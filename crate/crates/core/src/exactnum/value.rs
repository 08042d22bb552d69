use std::fmt;

use num_traits::{One, Signed, Zero};

use super::{fmt_rat, HpInterval, Rat};
use crate::error::Result;

/// A quantity that is either known exactly or enclosed by an interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Exact(Rat),
    Approx(HpInterval),
}

impl Value {
    pub fn zero() -> Self {
        Value::Exact(Rat::zero())
    }

    pub fn one() -> Self {
        Value::Exact(Rat::one())
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }

    pub fn exact(&self) -> Option<&Rat> {
        match self {
            Value::Exact(x) => Some(x),
            Value::Approx(_) => None,
        }
    }

    pub fn lo(&self) -> Rat {
        match self {
            Value::Exact(x) => x.clone(),
            Value::Approx(i) => i.lo(),
        }
    }

    pub fn hi(&self) -> Rat {
        match self {
            Value::Exact(x) => x.clone(),
            Value::Approx(i) => i.hi(),
        }
    }

    pub fn width(&self) -> Rat {
        match self {
            Value::Exact(_) => Rat::zero(),
            Value::Approx(i) => i.width(),
        }
    }

    pub fn contains(&self, x: &Rat) -> bool {
        match self {
            Value::Exact(v) => v == x,
            Value::Approx(i) => i.contains(x),
        }
    }

    /// Strictly positive, decided from the enclosure alone.
    pub fn is_certainly_positive(&self) -> bool {
        self.lo().is_positive()
    }

    pub fn to_interval(&self, bits: u32) -> HpInterval {
        match self {
            Value::Exact(x) => HpInterval::from_rat(x, bits),
            Value::Approx(i) => i.clone(),
        }
    }

    fn bits_hint(&self, other: &Value) -> u32 {
        match (self, other) {
            (Value::Approx(a), Value::Approx(b)) => a.bits().max(b.bits()),
            (Value::Approx(a), _) | (_, Value::Approx(a)) => a.bits(),
            _ => 0,
        }
    }

    pub fn add(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a + b),
            _ => {
                let bits = self.bits_hint(other);
                Value::Approx(self.to_interval(bits).add(&other.to_interval(bits)))
            }
        }
    }

    pub fn sub(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a - b),
            _ => {
                let bits = self.bits_hint(other);
                Value::Approx(self.to_interval(bits).sub(&other.to_interval(bits)))
            }
        }
    }

    pub fn mul(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a * b),
            (Value::Exact(a), Value::Approx(i)) | (Value::Approx(i), Value::Exact(a)) => {
                Value::Approx(i.mul_rat(a))
            }
            (Value::Approx(a), Value::Approx(b)) => Value::Approx(a.mul(b)),
        }
    }

    pub fn mul_rat(&self, r: &Rat) -> Value {
        self.mul(&Value::Exact(r.clone()))
    }

    pub fn div(&self, other: &Value) -> Result<Value> {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => {
                if b.is_zero() {
                    return Err(crate::error::Error::NonPositive("division by zero".into()));
                }
                Ok(Value::Exact(a / b))
            }
            (_, Value::Exact(b)) if !b.is_zero() => Ok(self.mul_rat(&b.recip())),
            _ => {
                let bits = self.bits_hint(other);
                Ok(Value::Approx(self.to_interval(bits).div(&other.to_interval(bits))?))
            }
        }
    }

    pub fn recip(&self) -> Result<Value> {
        Value::one().div(self)
    }

    /// Integer power for non-negative values.
    pub fn powi(&self, n: u32) -> Value {
        match self {
            Value::Exact(x) => Value::Exact(num_traits::pow(x.clone(), n as usize)),
            Value::Approx(i) => Value::Approx(i.powi(n)),
        }
    }

    /// Entry-wise min of enclosures, used for clamping upper bounds.
    pub fn min_rat(&self, cap: &Rat) -> Value {
        match self {
            Value::Exact(x) => Value::Exact(if x < cap { x.clone() } else { cap.clone() }),
            Value::Approx(i) => {
                if i.lo() >= *cap {
                    Value::Exact(cap.clone())
                } else if i.hi() <= *cap {
                    self.clone()
                } else {
                    Value::Approx(HpInterval::from_scaled(
                        i.scaled_lo().clone(),
                        HpInterval::from_rat(cap, i.bits()).scaled_hi().clone(),
                        i.bits(),
                    ))
                }
            }
        }
    }

    /// Reduces interval precision (no-op for exact values).
    pub fn with_bits(&self, bits: u32) -> Value {
        match self {
            Value::Exact(x) => Value::Exact(x.clone()),
            Value::Approx(i) => Value::Approx(i.with_bits(bits)),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(x) => f.write_str(&fmt_rat(x)),
            Value::Approx(i) => write!(f, "{i}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    #[test]
    fn exact_stays_exact() {
        let a = Value::Exact(rat(1, 3));
        let b = Value::Exact(rat(1, 6));
        assert_eq!(a.add(&b), Value::Exact(rat(1, 2)));
        assert_eq!(a.mul(&b).to_string(), "1/18");
        assert_eq!(a.div(&b).unwrap(), Value::Exact(rat(2, 1)));
    }

    #[test]
    fn mixed_becomes_interval() {
        let a = Value::Exact(rat(1, 3));
        let i = Value::Approx(HpInterval::from_rat(&rat(2, 7), 40));
        let s = a.add(&i);
        assert!(!s.is_exact());
        assert!(s.contains(&(rat(1, 3) + rat(2, 7))));
        assert!(s.to_string().starts_with('['));
    }

    #[test]
    fn clamp() {
        let i = Value::Approx(HpInterval::from_rat(&rat(5, 3), 10));
        assert_eq!(i.min_rat(&rat(1, 1)), Value::Exact(rat(1, 1)));
        assert_eq!(Value::Exact(rat(1, 2)).min_rat(&rat(1, 1)), Value::Exact(rat(1, 2)));
    }
}
