use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arithmetic the tableau needs. Floating-point implementations compare
/// against the supplied tolerance; exact ones ignore it.
pub trait Scalar: Clone + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// `self -= a * b`
    fn sub_mul_assign(&mut self, a: &Self, b: &Self);
    fn is_exact_zero(&self) -> bool;
    fn greater_than(&self, tol: f64) -> bool;
    fn less_than_neg(&self, tol: f64) -> bool;
    fn lt(&self, other: &Self) -> bool;
    /// `self < other − tol`.
    fn lt_tol(&self, other: &Self, tol: f64) -> bool;
    /// Replace round-off residue below `tol` by an exact zero.
    fn snap(&mut self, tol: f64);
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
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
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    #[inline]
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }
    fn is_exact_zero(&self) -> bool {
        *self == 0.0
    }
    fn greater_than(&self, tol: f64) -> bool {
        *self > tol
    }
    fn less_than_neg(&self, tol: f64) -> bool {
        *self < -tol
    }
    fn lt(&self, other: &Self) -> bool {
        self < other
    }
    fn lt_tol(&self, other: &Self, tol: f64) -> bool {
        *self < other - tol
    }
    #[inline]
    fn snap(&mut self, tol: f64) {
        if self.abs() < tol {
            *self = 0.0;
        }
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_f64(v: f64) -> Self {
        // every finite double is a dyadic rational
        BigRational::from_float(v).unwrap_or_else(|| BigRational::from_integer(BigInt::zero()))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
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
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        if !a.is_zero() && !b.is_zero() {
            *self -= a * b;
        }
    }
    fn is_exact_zero(&self) -> bool {
        self.is_zero()
    }
    fn greater_than(&self, _tol: f64) -> bool {
        self.is_positive()
    }
    fn less_than_neg(&self, _tol: f64) -> bool {
        self.is_negative()
    }
    fn lt(&self, other: &Self) -> bool {
        self < other
    }
    fn lt_tol(&self, other: &Self, _tol: f64) -> bool {
        self < other
    }
    fn snap(&mut self, _tol: f64) {}
}
