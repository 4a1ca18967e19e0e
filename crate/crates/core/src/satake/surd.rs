use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::Rational;

/// `a + b sqrt(p)` with rational `a`, `b`. The prime lives with the owning
/// polynomial, so multiplication takes it explicitly.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Surd {
    pub rational: Rational,
    pub radical: Rational,
}

impl Surd {
    pub fn new(rational: Rational, radical: Rational) -> Self {
        Surd { rational, radical }
    }

    pub fn from_integer(a: i128) -> Self {
        Surd::new(Rational::from_integer(a), Rational::zero())
    }

    pub fn zero() -> Self {
        Surd::new(Rational::zero(), Rational::zero())
    }

    pub fn one() -> Self {
        Surd::from_integer(1)
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.radical.is_zero()
    }

    /// `p^{k/2}` for any integer `k`.
    pub fn half_power(p: u64, k: i64) -> Self {
        let pr = Rational::from_integer(p as i128);
        let whole = k.div_euclid(2);
        let base = if whole >= 0 {
            pr.pow(whole as i32)
        } else {
            Rational::one() / pr.pow((-whole) as i32)
        };
        if k.rem_euclid(2) == 0 {
            Surd::new(base, Rational::zero())
        } else {
            Surd::new(Rational::zero(), base)
        }
    }

    pub fn mul(&self, other: &Surd, p: u64) -> Surd {
        let pr = Rational::from_integer(p as i128);
        Surd::new(
            self.rational * other.rational + pr * self.radical * other.radical,
            self.rational * other.radical + self.radical * other.rational,
        )
    }

    pub fn scale(&self, c: Rational) -> Surd {
        Surd::new(self.rational * c, self.radical * c)
    }

    pub fn to_f64(&self, p: u64) -> f64 {
        let r = |x: Rational| *x.numer() as f64 / *x.denom() as f64;
        r(self.rational) + r(self.radical) * (p as f64).sqrt()
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(self, o: Surd) -> Surd {
        Surd::new(self.rational + o.rational, self.radical + o.radical)
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, o: Surd) -> Surd {
        Surd::new(self.rational - o.rational, self.radical - o.radical)
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd::new(-self.rational, -self.radical)
    }
}

impl fmt::Debug for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.rational.is_zero(), self.radical.is_zero()) {
            (true, true) => write!(f, "0"),
            (false, true) => write!(f, "{}", self.rational),
            (true, false) => write!(f, "{}*t", self.radical),
            (false, false) => {
                let sign = if self.radical.is_negative() { "-" } else { "+" };
                write!(f, "{} {} {}*t", self.rational, sign, self.radical.abs())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_powers() {
        let p = 3;
        assert_eq!(Surd::half_power(p, 0), Surd::one());
        assert_eq!(Surd::half_power(p, 2), Surd::from_integer(3));
        assert_eq!(Surd::half_power(p, 1), Surd::new(Rational::zero(), Rational::one()));
        // p^{-1/2} = sqrt(p) / p
        let inv = Surd::half_power(p, -1);
        assert_eq!(inv.radical, Rational::new(1, 3));
        assert_eq!(inv.mul(&Surd::half_power(p, 1), p), Surd::one());
        assert!((Surd::half_power(5, -3).to_f64(5) - 5f64.powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn ring_ops() {
        let p = 2;
        let a = Surd::new(Rational::from_integer(1), Rational::from_integer(1));
        // (1 + t)^2 = 3 + 2t when t^2 = 2
        assert_eq!(a.mul(&a, p), Surd::new(Rational::from_integer(3), Rational::from_integer(2)));
        assert!((a - a).is_zero());
    }
}
