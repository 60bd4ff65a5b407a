use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Reduced exact rational with positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        ExactRational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_u128(numer: u128, denom: u128) -> Self {
        Self::new(BigInt::from(numer), BigInt::from(denom))
    }

    pub fn zero() -> Self {
        ExactRational(BigRational::zero())
    }

    pub fn integer(n: i64) -> Self {
        Self::new(n, 1)
    }

    /// `digits` decimal places, e.g. `from_decimal(20749, 4)` is 2.0749.
    pub fn from_decimal(scaled: i64, digits: u32) -> Self {
        Self::new(scaled, BigInt::from(10u32).pow(digits))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn abs_diff(&self, other: &Self) -> Self {
        ExactRational((&self.0 - &other.0).abs())
    }

    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        (!other.is_zero()).then(|| ExactRational(&self.0 / &other.0))
    }

    pub fn half(&self) -> Self {
        ExactRational(&self.0 / BigInt::from(2))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal string with exactly `digits` fractional digits, rounded half to even.
    pub fn to_decimal(&self, digits: u32) -> String {
        let neg = self.0.is_negative();
        let n = self.0.numer().abs();
        let d = self.0.denom();
        let pow = BigInt::from(10u32).pow(digits);
        let (mut q, r) = (n * &pow).div_rem(d);
        let twice: BigInt = &r * 2;
        match twice.cmp(d) {
            Ordering::Greater => q += 1,
            Ordering::Equal if q.is_odd() => q += 1,
            _ => {}
        }
        let (int_part, frac) = q.div_rem(&pow);
        let sign = if neg && !q.is_zero() { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int_part}")
        } else {
            let frac = frac.to_str_radix(10);
            format!("{sign}{int_part}.{frac:0>width$}", width = digits as usize)
        }
    }
}

impl From<u128> for ExactRational {
    fn from(n: u128) -> Self {
        Self::new(BigInt::from(n), BigInt::one())
    }
}

impl std::ops::Add for &ExactRational {
    type Output = ExactRational;
    fn add(self, rhs: Self) -> ExactRational {
        ExactRational(&self.0 + &rhs.0)
    }
}

impl std::ops::Sub for &ExactRational {
    type Output = ExactRational;
    fn sub(self, rhs: Self) -> ExactRational {
        ExactRational(&self.0 - &rhs.0)
    }
}

impl std::ops::Mul for &ExactRational {
    type Output = ExactRational;
    fn mul(self, rhs: Self) -> ExactRational {
        ExactRational(&self.0 * &rhs.0)
    }
}

/// Renders as `numerator / denominator`.
impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} / {}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for ExactRational {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let n: BigInt = n.parse().map_err(|_| format!("bad numerator `{n}`"))?;
        let d: BigInt = d.parse().map_err(|_| format!("bad denominator `{d}`"))?;
        if d.sign() != Sign::Plus {
            return Err(format!("denominator must be positive, got {d}"));
        }
        Ok(ExactRational::new(n, d))
    }
}
