//! Coefficient abstraction: exact rationals for the symbolic paths,
//! `f64` for the numeric flow mode.

use num_traits::{One, Zero};

use crate::rat::{to_f64, Rat};

pub trait Scalar: Clone + PartialEq + std::fmt::Debug + std::fmt::Display {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_rat(r: &Rat) -> Self;

    fn from_int(i: i64) -> Self {
        Self::from_rat(&Rat::from(num_bigint::BigInt::from(i)))
    }
}

impl Scalar for Rat {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_rat(r: &Rat) -> Self {
        to_f64(r)
    }
}
