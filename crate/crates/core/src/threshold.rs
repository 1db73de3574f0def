//! Exact comparisons against fractional powers.
//!
//! A [`Threshold`] is `coeff * base^(exp_num / denom)`. An integer `v` is at
//! most the threshold iff `v^denom <= coeff^denom * base^exp_num`, which is
//! decided in arbitrary precision. Nothing here touches floating point.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Threshold {
    pub coeff: u64,
    pub base: u64,
    pub exp_num: u32,
    pub denom: u32,
}

impl Threshold {
    pub fn new(coeff: u64, base: u64, exp_num: u32, denom: u32) -> Self {
        assert!(denom >= 1, "threshold denominator must be positive");
        Self {
            coeff,
            base,
            exp_num,
            denom,
        }
    }

    /// `n^(h + (1 - s)(h - 1)/g)`, the cap on `R_s` for a strong set of size `n`.
    pub fn strong_condition(n: u64, h: usize, g: usize, s: usize) -> Self {
        assert!(h >= 2 && g >= 1, "need h >= 2 and g >= 1");
        assert!((1..=g).contains(&s), "s must lie in 1..=g, got {s}");
        let exp_num = h * g - (s - 1) * (h - 1);
        Self::new(1, n, to_u32(exp_num), to_u32(g))
    }

    /// `2g * n^(h + (h - 1)/g)`, the growth bound for the strong greedy.
    pub fn growth_bound(n: u64, h: usize, g: usize) -> Self {
        assert!(h >= 2 && g >= 1, "need h >= 2 and g >= 1");
        Self::new(2 * g as u64, n, to_u32(h * g + h - 1), to_u32(g))
    }

    /// `2 * n^(2h - 1)`, the growth bound for the classic Sidon-type greedy.
    pub fn classic_bound(n: u64, h: usize) -> Self {
        assert!(h >= 2, "need h >= 2");
        Self::new(2, n, to_u32(2 * h - 1), 1)
    }

    /// `coeff^denom * base^exp_num`, the right side after raising to `denom`.
    pub fn raised(&self) -> BigUint {
        BigUint::from(self.coeff).pow(self.denom) * BigUint::from(self.base).pow(self.exp_num)
    }

    /// `true` iff `value <= self`.
    pub fn admits(&self, value: u64) -> bool {
        self.admits_big(&BigUint::from(value))
    }

    pub fn admits_big(&self, value: &BigUint) -> bool {
        value.pow(self.denom) <= self.raised()
    }

    /// Largest integer not exceeding the threshold.
    pub fn floor(&self) -> BigUint {
        self.raised().nth_root(self.denom)
    }

    /// [`floor`](Self::floor) if it fits in a `u64`.
    pub fn floor_u64(&self) -> Option<u64> {
        self.floor().to_u64()
    }

    /// `value^denom / raised()` as a float, for reporting only.
    pub fn ratio(&self, value: u64) -> f64 {
        let lhs = BigUint::from(value).pow(self.denom);
        big_ratio(&lhs, &self.raised())
    }
}

impl std::fmt::Display for Threshold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeff != 1 {
            write!(f, "{}*", self.coeff)?;
        }
        if self.denom == 1 {
            write!(f, "{}^{}", self.base, self.exp_num)
        } else {
            write!(f, "{}^({}/{})", self.base, self.exp_num, self.denom)
        }
    }
}

/// `count <= n^(h + (1 - s)(h - 1)/g)`, decided exactly.
pub fn threshold_leq(count: u64, n: u64, h: usize, g: usize, s: usize) -> bool {
    Threshold::strong_condition(n, h, g, s).admits(count)
}

/// The growth bound `2g * n^(h + (h - 1)/g)` for the `n`-th strong greedy term.
pub fn greedy_bound(n: u64, h: usize, g: usize) -> Threshold {
    Threshold::growth_bound(n, h, g)
}

fn to_u32(v: usize) -> u32 {
    u32::try_from(v).expect("exponent does not fit in u32")
}

fn big_ratio(num: &BigUint, den: &BigUint) -> f64 {
    let shift = num.bits().max(den.bits()).saturating_sub(1000);
    let n = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let d = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    n / d
}
