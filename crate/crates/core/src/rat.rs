//! Exact rational arithmetic helpers shared by every module.
//!
//! All probabilities, measures and Fourier coefficients in this crate are
//! `BigRational` values; no floating point enters any verified inequality.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

pub type Rational = BigRational;

/// `a / b` as an exact rational.
pub fn rat(a: i64, b: i64) -> Rational {
    Rational::new(BigInt::from(a), BigInt::from(b))
}

pub fn rat_int(a: i64) -> Rational {
    Rational::from(BigInt::from(a))
}

pub fn rat_u128(a: u128, b: u128) -> Rational {
    Rational::new(BigInt::from(a), BigInt::from(b))
}

/// `num/2^k`, the dyadic rationals produced by transforms over dim-k cosets.
pub fn dyadic(num: i64, k: usize) -> Rational {
    Rational::new(BigInt::from(num), BigInt::one() << k)
}

/// Canonical `"num/den"` text form used in all JSON/CSV reports.
pub fn rat_to_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"num/den"` or a plain integer.
pub fn rat_from_str(s: &str) -> Option<Rational> {
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => {
            let n: BigInt = s.trim().parse().ok()?;
            Some(Rational::from(n))
        }
    }
}

/// Parses a decimal literal like `"0.25"` into an exact rational (1/4).
pub fn rat_from_decimal(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('.') {
        None => rat_from_str(s),
        Some((int, frac)) => {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            let neg = int.starts_with('-');
            let int_part: BigInt = if int.is_empty() || int == "-" {
                BigInt::zero()
            } else {
                int.parse().ok()?
            };
            let frac_num: BigInt = frac.parse().ok()?;
            let den = num::pow::pow(BigInt::from(10), frac.len());
            let frac_rat = Rational::new(frac_num, den);
            let whole = Rational::from(int_part.abs());
            let total = whole + frac_rat;
            Some(if neg { -total } else { total })
        }
    }
}

/// Exact comparison `x <= sqrt(y)` for `x` rational and `y >= 0` rational.
pub fn leq_sqrt(x: &Rational, y: &Rational) -> bool {
    if x.is_negative() {
        return true;
    }
    x * x <= *y
}
