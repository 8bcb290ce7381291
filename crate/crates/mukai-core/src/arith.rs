//! Small exact-arithmetic helpers shared by every module.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Arbitrary precision integer used for every lattice coordinate.
pub type Int = BigInt;

/// Exact rational.
pub type Rat = BigRational;

pub fn int(n: i64) -> Int {
    Int::from(n)
}

/// Non-negative gcd of a slice; zero for an all-zero slice.
pub fn content<'a, I>(values: I) -> Int
where
    I: IntoIterator<Item = &'a Int>,
{
    values
        .into_iter()
        .fold(Int::zero(), |acc, x| acc.gcd(x))
}

pub fn gcd(a: &Int, b: &Int) -> Int {
    a.gcd(b)
}

/// Floor of a / b for b != 0.
pub fn div_floor(a: &Int, b: &Int) -> Int {
    a.div_floor(b)
}

/// Ceiling of a / b for b != 0.
pub fn div_ceil(a: &Int, b: &Int) -> Int {
    -((-a).div_floor(b))
}

/// Floor of a non-negative rational.
pub fn rat_floor(r: &Rat) -> Int {
    r.numer().div_floor(r.denom())
}

/// Floor square root of a non-negative integer.
pub fn isqrt(n: &Int) -> Int {
    assert!(!n.is_negative(), "isqrt of a negative integer");
    n.sqrt()
}

pub fn rat(n: &Int) -> Rat {
    Rat::from_integer(n.clone())
}

pub fn is_unit(n: &Int) -> bool {
    n.abs().is_one()
}

/// Smallest integer in the closed range [lo, hi] with `pred` true, where `pred`
/// is monotone false-then-true on the range.
pub fn first_true(lo: &Int, hi: &Int, pred: impl Fn(&Int) -> bool) -> Option<Int> {
    if lo > hi || !pred(hi) {
        return None;
    }
    let mut lo = lo.clone();
    let mut hi = hi.clone();
    while lo < hi {
        let mid = (&lo + &hi).div_floor(&int(2));
        if pred(&mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Some(lo)
}

/// Largest integer in [lo, hi] with `pred` true, where `pred` is monotone
/// true-then-false on the range.
pub fn last_true(lo: &Int, hi: &Int, pred: impl Fn(&Int) -> bool) -> Option<Int> {
    if lo > hi || !pred(lo) {
        return None;
    }
    let mut lo = lo.clone();
    let mut hi = hi.clone();
    while lo < hi {
        let mid = (&lo + &hi + int(1)).div_floor(&int(2));
        if pred(&mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Some(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_and_ceil_follow_sign() {
        assert_eq!(div_floor(&int(-7), &int(2)), int(-4));
        assert_eq!(div_ceil(&int(-7), &int(2)), int(-3));
        assert_eq!(div_ceil(&int(7), &int(2)), int(4));
        assert_eq!(div_floor(&int(7), &int(-2)), int(-4));
    }

    #[test]
    fn content_ignores_sign_and_zero() {
        let v = [int(0), int(-6), int(4)];
        assert_eq!(content(v.iter()), int(2));
        assert_eq!(content([int(0)].iter()), int(0));
    }

    #[test]
    fn binary_searches_find_boundaries() {
        let f = first_true(&int(-10), &int(10), |x| x * x >= int(17) && x > &int(0));
        assert_eq!(f, Some(int(5)));
        let l = last_true(&int(-10), &int(10), |x| x < &int(3));
        assert_eq!(l, Some(int(2)));
        assert_eq!(first_true(&int(0), &int(3), |_| false), None);
    }

    #[test]
    fn isqrt_is_floor() {
        assert_eq!(isqrt(&int(24)), int(4));
        assert_eq!(isqrt(&int(25)), int(5));
    }
}
