//! Exact rotation angles of the form `s·π/2^m`.
//!
//! Every rotation in the construction is a dyadic multiple of π, so angles are
//! stored as an odd numerator over a power of two and all arithmetic, threshold
//! comparisons and gate classification stay in integers. Only
//! [`DyadicAngle::to_radians`] touches floating point.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Largest supported denominator exponent. Keeps `2^(m+1)` inside `i64`.
pub const MAX_DENOM_POW: u32 = 60;

/// An angle `num·π/2^denom_pow`, normalized and reduced into `(−2π, 2π)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicAngle {
    #[serde(rename = "num")]
    numerator: i64,
    #[serde(rename = "den_pow2")]
    denom_pow: u32,
}

/// Single-qubit Clifford+T class of an `Rz` rotation, decided exactly mod 2π.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum RzClass {
    Identity,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    NonClifford,
}

impl DyadicAngle {
    pub const ZERO: DyadicAngle = DyadicAngle {
        numerator: 0,
        denom_pow: 0,
    };
    pub const PI: DyadicAngle = DyadicAngle {
        numerator: 1,
        denom_pow: 0,
    };

    /// Builds `numerator·π/2^denom_pow`, normalizing and reducing mod 2π.
    ///
    /// Panics if `denom_pow` exceeds [`MAX_DENOM_POW`].
    pub fn new(numerator: i64, denom_pow: u32) -> Self {
        assert!(
            denom_pow <= MAX_DENOM_POW,
            "dyadic angle denominator 2^{denom_pow} out of range"
        );
        let mut num = numerator;
        let mut pow = denom_pow;
        // Reduce into (−2π, 2π) keeping the sign of the input: |num| < 2^(pow+1).
        num %= 1i64 << (pow + 1);
        if num == 0 {
            return Self::ZERO;
        }
        while num % 2 == 0 && pow > 0 {
            num /= 2;
            pow -= 1;
        }
        if pow == 0 {
            // Multiples of π: only ±π survive the reduction.
            num %= 2;
            if num == 0 {
                return Self::ZERO;
            }
        }
        DyadicAngle {
            numerator: num,
            denom_pow: pow,
        }
    }

    /// `π/2^k`.
    pub fn pi_over_pow2(k: u32) -> Self {
        Self::new(1, k)
    }

    /// `−π/2^k`.
    pub fn neg_pi_over_pow2(k: u32) -> Self {
        Self::new(-1, k)
    }

    pub fn numerator(self) -> i64 {
        self.numerator
    }

    pub fn denom_pow(self) -> u32 {
        self.denom_pow
    }

    pub fn is_zero(self) -> bool {
        self.numerator == 0
    }

    pub fn to_radians(self) -> f64 {
        self.numerator as f64 * std::f64::consts::PI / (1u64 << self.denom_pow) as f64
    }

    /// Representative in `[0, 2π)` as a numerator over `2^denom_pow`.
    fn euclid_numerator(self) -> i64 {
        self.numerator.rem_euclid(1i64 << (self.denom_pow + 1))
    }

    /// Compares `|self mod 2π|` (distance to 0 on the circle) with `π/2^k`.
    ///
    /// This is the exact test behind pruning: an angle is "smaller than π/2^k"
    /// when this returns [`Ordering::Less`].
    pub fn cmp_magnitude_to_pi_over_pow2(self, k: u32) -> Ordering {
        if self.is_zero() {
            return Ordering::Less;
        }
        let full = 1i64 << (self.denom_pow + 1);
        let r = self.euclid_numerator();
        let mag = r.min(full - r); // in units of π/2^denom_pow, at least 1
        // mag·π/2^m  vs  π/2^k   ⇔   mag·2^k  vs  2^m
        let m = self.denom_pow;
        if k >= m {
            if k == m && mag == 1 {
                Ordering::Equal
            } else {
                Ordering::Greater
            }
        } else {
            mag.cmp(&(1i64 << (m - k)))
        }
    }

    /// Exact classification of `Rz(self)` up to global phase.
    pub fn classify(self) -> RzClass {
        match (self.denom_pow, self.euclid_numerator()) {
            (0, 0) => RzClass::Identity,
            (0, 1) => RzClass::Z,
            (1, 1) => RzClass::S,
            (1, 3) => RzClass::Sdg,
            (2, 1) => RzClass::T,
            (2, 7) => RzClass::Tdg,
            _ => RzClass::NonClifford,
        }
    }

    /// Returns `k` when the angle is exactly `−π/2^k` (mod 2π).
    pub fn as_neg_pi_over_pow2(self) -> Option<u32> {
        (self.euclid_numerator() == (1i64 << (self.denom_pow + 1)) - 1).then_some(self.denom_pow)
    }

    /// Returns `k` when the angle is exactly `(2^(k−1) − 1)·π/2^k` for some `k ≥ 1`.
    pub fn as_split_form(self) -> Option<u32> {
        if self.is_zero() {
            return Some(1);
        }
        let k = self.denom_pow;
        if k >= 2 && self.euclid_numerator() == (1i64 << (k - 1)) - 1 {
            Some(k)
        } else {
            None
        }
    }
}

impl Add for DyadicAngle {
    type Output = DyadicAngle;

    fn add(self, rhs: DyadicAngle) -> DyadicAngle {
        let pow = self.denom_pow.max(rhs.denom_pow);
        let a = self.numerator << (pow - self.denom_pow);
        let b = rhs.numerator << (pow - rhs.denom_pow);
        DyadicAngle::new(a + b, pow)
    }
}

impl Neg for DyadicAngle {
    type Output = DyadicAngle;

    fn neg(self) -> DyadicAngle {
        DyadicAngle::new(-self.numerator, self.denom_pow)
    }
}

impl Sub for DyadicAngle {
    type Output = DyadicAngle;

    fn sub(self, rhs: DyadicAngle) -> DyadicAngle {
        self + (-rhs)
    }
}

impl fmt::Display for DyadicAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.numerator, self.denom_pow) {
            (0, _) => write!(f, "0"),
            (1, 0) => write!(f, "π"),
            (-1, 0) => write!(f, "-π"),
            (s, 0) => write!(f, "{s}π"),
            (1, m) => write!(f, "π/{}", 1u64 << m),
            (-1, m) => write!(f, "-π/{}", 1u64 << m),
            (s, m) => write!(f, "{s}π/{}", 1u64 << m),
        }
    }
}

/// Free-function form of `a + b`.
pub fn angle_add(a: DyadicAngle, b: DyadicAngle) -> DyadicAngle {
    a + b
}

/// Free-function form of [`DyadicAngle::classify`].
pub fn classify_rz(a: DyadicAngle) -> RzClass {
    a.classify()
}
