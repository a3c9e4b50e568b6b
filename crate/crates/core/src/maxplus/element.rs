use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use num_traits::{One, Zero};

use crate::scalar::Scalar;

/// Element of the max-plus semiring: either the null element ε or a finite value.
///
/// `+` is ⊕ (maximum) and `*` is ⊗ (ordinary addition). ε is ordered below
/// every finite value, so the derived ordering is the natural one.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub enum MaxPlus<T> {
    #[default]
    Epsilon,
    Finite(T),
}

pub use MaxPlus::{Epsilon, Finite};

impl<T: Scalar> MaxPlus<T> {
    /// The multiplicative identity `0`.
    pub fn e() -> Self {
        Finite(T::zero())
    }

    pub fn is_epsilon(&self) -> bool {
        matches!(self, Epsilon)
    }

    pub fn finite(&self) -> Option<T> {
        match *self {
            Epsilon => None,
            Finite(x) => Some(x),
        }
    }

    /// x ⊕ y = max(x, y).
    pub fn oplus(self, rhs: Self) -> Self {
        match (self, rhs) {
            (Epsilon, y) => y,
            (x, Epsilon) => x,
            (Finite(x), Finite(y)) => {
                if y > x {
                    Finite(y)
                } else {
                    Finite(x)
                }
            }
        }
    }

    /// x ⊗ y = x + y, absorbing at ε.
    pub fn otimes(self, rhs: Self) -> Self {
        match (self, rhs) {
            (Finite(x), Finite(y)) => Finite(x + y),
            _ => Epsilon,
        }
    }

    /// Max-plus power x^q, i.e. q·x for finite x. x^0 = 0 for every x.
    pub fn pow(self, q: usize) -> Self {
        let mut acc = Self::e();
        for _ in 0..q {
            acc = acc.otimes(self);
        }
        acc
    }

    /// Entry comparison used for matrix inequalities.
    pub fn le(&self, other: &Self) -> bool {
        matches!(
            self.partial_cmp(other),
            Some(Ordering::Less) | Some(Ordering::Equal)
        )
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Epsilon => f64::NEG_INFINITY,
            Finite(x) => x.as_f64(),
        }
    }
}

impl<T: Scalar> From<T> for MaxPlus<T> {
    fn from(x: T) -> Self {
        Finite(x)
    }
}

impl<T: Scalar> Add for MaxPlus<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.oplus(rhs)
    }
}

impl<T: Scalar> Mul for MaxPlus<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.otimes(rhs)
    }
}

impl<T: Scalar> Zero for MaxPlus<T> {
    fn zero() -> Self {
        Epsilon
    }
    fn is_zero(&self) -> bool {
        self.is_epsilon()
    }
}

impl<T: Scalar> One for MaxPlus<T> {
    fn one() -> Self {
        Self::e()
    }
}

impl<T: Scalar> std::iter::Sum for MaxPlus<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Epsilon, MaxPlus::oplus)
    }
}

impl<T: Scalar> std::iter::Product for MaxPlus<T> {
    fn product<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::e(), MaxPlus::otimes)
    }
}

/// ε renders as `.`, finite values with six decimals.
impl<T: Scalar> fmt::Display for MaxPlus<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Epsilon => f.pad("."),
            Finite(x) => f.pad(&format!("{:.6}", x.as_f64())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;
    use proptest::prelude::*;

    type S = MaxPlus<f64>;

    #[test]
    fn null_element_and_absorption() {
        assert_eq!(S::Epsilon + Finite(3.0), Finite(3.0));
        assert_eq!(Finite(2.0) * Finite(3.0), Finite(5.0));
        assert_eq!(S::Epsilon * Finite(7.0), Epsilon);
        assert_eq!(S::e() * Finite(-4.5), Finite(-4.5));
    }

    #[test]
    fn power_is_repeated_sum() {
        assert_eq!(Finite(1.5).pow(4), Finite(6.0));
        assert_eq!(S::Epsilon.pow(0), S::e());
        assert_eq!(S::Epsilon.pow(2), Epsilon);
    }

    #[test]
    fn display_uses_dot_for_epsilon() {
        assert_eq!(S::Epsilon.to_string(), ".");
        assert_eq!(Finite(2.5f64).to_string(), "2.500000");
        assert_eq!(MaxPlus::Finite(Rational64::new(1, 4)).to_string(), "0.250000");
    }

    fn exact() -> impl Strategy<Value = MaxPlus<Rational64>> {
        prop_oneof![
            1 => Just(Epsilon),
            4 => (-50i64..50, 1i64..8).prop_map(|(n, d)| Finite(Rational64::new(n, d))),
        ]
    }

    proptest! {
        #[test]
        fn semiring_axioms(x in exact(), y in exact(), z in exact()) {
            prop_assert_eq!((x + y) + z, x + (y + z));
            prop_assert_eq!((x * y) * z, x * (y * z));
            prop_assert_eq!(x + y, y + x);
            prop_assert_eq!(x * y, y * x);
            prop_assert_eq!(x * (y + z), x * y + x * z);
            prop_assert_eq!(x + x, x);
            prop_assert_eq!(x + MaxPlus::Epsilon, x);
            prop_assert_eq!(x * MaxPlus::e(), x);
        }
    }
}
