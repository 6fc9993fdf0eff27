//! Exact rational scalars.
//!
//! All symbolic computations in this crate run over arbitrary-precision
//! rationals; `Rat` is the single coefficient type used by the exact paths.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rint(n: i64) -> Rat {
    BigRational::from(BigInt::from(n))
}

pub fn rzero() -> Rat {
    BigRational::zero()
}

pub fn rone() -> Rat {
    BigRational::one()
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back to a quotient of truncated floats for huge numerators.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// n! as an exact rational.
pub fn factorial(n: u32) -> Rat {
    let mut acc = BigInt::one();
    for k in 2..=n as u64 {
        acc *= k;
    }
    BigRational::from(acc)
}

/// Binomial coefficient C(n, k) as an exact rational.
pub fn binomial(n: u32, k: u32) -> Rat {
    if k > n {
        return rzero();
    }
    let mut acc = BigInt::one();
    for i in 0..k as u64 {
        acc = acc * (n as u64 - i) / (i + 1);
    }
    BigRational::from(acc)
}

pub fn is_negative(r: &Rat) -> bool {
    r.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_and_binomial() {
        assert_eq!(factorial(0), rint(1));
        assert_eq!(factorial(5), rint(120));
        assert_eq!(binomial(4, 2), rint(6));
        assert_eq!(binomial(3, 5), rint(0));
    }

    #[test]
    fn rational_literals_reduce() {
        assert_eq!(rat(2, 4), rat(1, 2));
        assert_eq!(rat(1, -2), rat(-1, 2));
    }
}
