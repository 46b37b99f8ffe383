use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::int::Int;
use super::GeometryError;

/// Exact rational number kept in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational {
    num: Int,
    den: Int,
}

impl Rational {
    pub fn zero() -> Rational {
        Rational {
            num: Int::ZERO,
            den: Int::ONE,
        }
    }

    pub fn one() -> Rational {
        Rational {
            num: Int::ONE,
            den: Int::ONE,
        }
    }

    pub fn new(num: Int, den: Int) -> Result<Rational, GeometryError> {
        if den.is_zero() {
            return Err(GeometryError::DivisionByZero);
        }
        Ok(Rational::normalized(num, den))
    }

    fn normalized(mut num: Int, mut den: Int) -> Rational {
        if den.is_negative() {
            num = -&num;
            den = -&den;
        }
        let g = num.gcd(&den);
        if !g.is_one() && !g.is_zero() {
            num = num.div_exact(&g);
            den = den.div_exact(&g);
        }
        if num.is_zero() {
            den = Int::ONE;
        }
        Rational { num, den }
    }

    pub fn from_int(v: i64) -> Rational {
        Rational {
            num: Int::from(v),
            den: Int::ONE,
        }
    }

    pub fn from_frac(num: i64, den: i64) -> Rational {
        assert!(den != 0, "zero denominator");
        Rational::normalized(Int::from(num), Int::from(den))
    }

    pub fn numer(&self) -> &Int {
        &self.num
    }

    pub fn denom(&self) -> &Int {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.den.is_one()
    }

    pub fn signum(&self) -> i32 {
        self.num.signum()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn abs(&self) -> Rational {
        Rational {
            num: self.num.abs(),
            den: self.den.clone(),
        }
    }

    pub fn floor(&self) -> Int {
        self.num.div_mod_floor(&self.den).0
    }

    pub fn to_f64(&self) -> f64 {
        self.num.to_f64() / self.den.to_f64()
    }

    pub fn recip(&self) -> Result<Rational, GeometryError> {
        Rational::new(self.den.clone(), self.num.clone())
    }

    pub fn min(self, other: Rational) -> Rational {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Rational) -> Rational {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Midpoint, handy for sampling between two bounds.
    pub fn midpoint(&self, other: &Rational) -> Rational {
        &(self + other) * &Rational::from_frac(1, 2)
    }
}

impl Default for Rational {
    fn default() -> Rational {
        Rational::zero()
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Rational {
        Rational::from_int(v)
    }
}

impl From<Int> for Rational {
    fn from(v: Int) -> Rational {
        Rational {
            num: v,
            den: Int::ONE,
        }
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Rational) -> Ordering {
        if self.den == other.den {
            return self.num.cmp(&other.num);
        }
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Rational) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        if self.den == rhs.den {
            return Rational::normalized(&self.num + &rhs.num, self.den.clone());
        }
        Rational::normalized(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Sub for &Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        self + &(-rhs)
    }
}

impl Mul for &Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        Rational::normalized(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Div for &Rational {
    type Output = Rational;
    /// Panics on division by zero; use [`Rational::recip`] for a checked path.
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        Rational::normalized(&self.num * &rhs.den, &self.den * &rhs.num)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

macro_rules! owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                (&self).$m(&rhs)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);
owned_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `7`, `-3`, `0.25`, `1/2` and `-1.5/3`.
impl FromStr for Rational {
    type Err = GeometryError;
    fn from_str(s: &str) -> Result<Rational, GeometryError> {
        let bad = || GeometryError::ParseRational(s.to_string());
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: Rational = n.parse().map_err(|_| bad())?;
            let d: Rational = d.parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(GeometryError::DivisionByZero);
            }
            return Ok(&n / &d);
        }
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        if body.is_empty() || !body.chars().all(|c| c.is_ascii_digit() || c == '.') {
            return Err(bad());
        }
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if frac_part.contains('.') || (int_part.is_empty() && frac_part.is_empty()) {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_part}");
        let num: Int = if digits.is_empty() {
            Int::ZERO
        } else {
            digits.parse().map_err(|_| bad())?
        };
        let den = Int::pow10(frac_part.len() as u32);
        let r = Rational::normalized(num, den);
        Ok(if neg { -r } else { r })
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn parses_all_literal_forms() {
        assert_eq!(q("0.5"), q("1/2"));
        assert_eq!(q("-1.25"), Rational::from_frac(-5, 4));
        assert_eq!(q("6/4"), Rational::from_frac(3, 2));
        assert_eq!(q("3"), Rational::from_int(3));
        assert_eq!(q(".5"), q("1/2"));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("abc".parse::<Rational>().is_err());
        assert!("1.2.3".parse::<Rational>().is_err());
    }

    #[test]
    fn canonical_form() {
        let r = Rational::new(Int::from(4), Int::from(-6)).unwrap();
        assert_eq!(r.numer(), &Int::from(-2));
        assert_eq!(r.denom(), &Int::from(3));
        assert_eq!(r.to_string(), "-2/3");
        assert_eq!(
            Rational::new(Int::ZERO, Int::from(-5)).unwrap().denom(),
            &Int::ONE
        );
    }

    #[test]
    fn arithmetic_and_order() {
        let a = q("1/3");
        let b = q("1/6");
        assert_eq!(&a + &b, q("1/2"));
        assert_eq!(&a - &b, q("1/6"));
        assert_eq!(&a * &b, q("1/18"));
        assert_eq!(&a / &b, q("2"));
        assert!(b < a);
        assert_eq!(q("-7/2").floor(), Int::from(-4));
    }
}
