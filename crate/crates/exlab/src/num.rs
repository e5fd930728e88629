//! Exact rational arithmetic helpers.
//!
//! Every bias, inner product and probability in this crate is an exact
//! `BigRational`. Quantities of the form `coeff * 2^e` show up as thresholds
//! everywhere (extractor error levels, min-entropy cutoffs); when `e` is an
//! integer the comparison against them is exact, and when `e` is fractional
//! the threshold is irrational so a rational value can never tie with it and
//! a log-domain comparison is safe.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

pub type Q = BigRational;

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Exact 2^e for integer e (negative exponents allowed).
pub fn q_pow2(e: i32) -> Q {
    if e >= 0 {
        Q::from_integer(BigInt::one() << e as usize)
    } else {
        Q::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

pub fn q_to_f64(v: &Q) -> f64 {
    // Direct conversion can overflow for huge numerators; go through log2
    // only when needed.
    if let (Some(n), Some(d)) = (v.numer().to_f64(), v.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    if v.is_zero() {
        return 0.0;
    }
    let sign = if v.is_negative() { -1.0 } else { 1.0 };
    sign * log2_q(&v.abs()).exp2()
}

fn log2_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 53 {
        return (x.to_u64().unwrap() as f64).log2();
    }
    // Take the top 53 bits as a mantissa and add back the shifted-out bits.
    let shift = bits - 53;
    let top = (x >> shift).to_u64().unwrap();
    (top as f64).log2() + shift as f64
}

/// log2 of a positive rational, accurate to ~1e-15 relative.
pub fn log2_q(v: &Q) -> f64 {
    assert!(v.is_positive(), "log2 of non-positive rational");
    let (ns, nm) = v.numer().clone().into_parts();
    debug_assert_eq!(ns, Sign::Plus);
    let (_, dm) = v.denom().clone().into_parts();
    log2_biguint(&nm) - log2_biguint(&dm)
}

/// Compare a rational against 2^e. Exact when e is an integer; otherwise 2^e
/// is irrational, no tie is possible, and the log-domain comparison decides.
pub fn cmp_q_pow2(v: &Q, e: f64) -> Ordering {
    if !v.is_positive() {
        return Ordering::Less;
    }
    if e.fract() == 0.0 && e.abs() < i32::MAX as f64 {
        return v.cmp(&q_pow2(e as i32));
    }
    log2_q(v).partial_cmp(&e).unwrap()
}

/// Compare a rational against coeff * 2^e with coeff > 0.
pub fn cmp_q_scaled_pow2(v: &Q, coeff: &Q, e: f64) -> Ordering {
    assert!(coeff.is_positive());
    if !v.is_positive() {
        return if e == f64::NEG_INFINITY && v.is_zero() {
            Ordering::Equal
        } else {
            Ordering::Less
        };
    }
    if e.fract() == 0.0 && e.abs() < i32::MAX as f64 {
        return v.cmp(&(coeff * q_pow2(e as i32)));
    }
    (log2_q(v) - log2_q(coeff)).partial_cmp(&e).unwrap()
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// C(n,0) + C(n,1) + ... + C(n,d)
pub fn binomial_sum(n: u64, d: u64) -> BigInt {
    (0..=d.min(n)).map(|k| binomial(n, k)).sum()
}

/// Parse "3", "-1/4", "0.25", "2^-8" into an exact rational.
pub fn parse_rational(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("2^") {
        let e: i32 = rest.parse().ok()?;
        return Some(q_pow2(e));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Q::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().ok()?
        };
        if !frac.chars().all(|c| c.is_ascii_digit()) || frac.is_empty() {
            return None;
        }
        let num: BigInt = frac.parse().ok()?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part = Q::new(num, den);
        let int_part = Q::from_integer(int);
        return Some(if neg { int_part - frac_part } else { int_part + frac_part });
    }
    let n: BigInt = s.parse().ok()?;
    Some(Q::from_integer(n))
}

/// Render a rational as "num/den" (or just "num" for integers).
pub fn q_string(v: &Q) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow2_exact() {
        assert_eq!(q_pow2(0), q_int(1));
        assert_eq!(q_pow2(3), q_int(8));
        assert_eq!(q_pow2(-2), q(1, 4));
    }

    #[test]
    fn cmp_integer_exponent_is_exact() {
        assert_eq!(cmp_q_pow2(&q(1, 2), -1.0), Ordering::Equal);
        assert_eq!(cmp_q_pow2(&q(1, 2), -2.0), Ordering::Greater);
        assert_eq!(cmp_q_pow2(&q(1, 2), 0.0), Ordering::Less);
        assert_eq!(cmp_q_pow2(&q_int(0), -4.0), Ordering::Less);
    }

    #[test]
    fn cmp_fractional_exponent() {
        // 2^-0.5 ~ 0.7071
        assert_eq!(cmp_q_pow2(&q(7, 10), -0.5), Ordering::Less);
        assert_eq!(cmp_q_pow2(&q(71, 100), -0.5), Ordering::Greater);
    }

    #[test]
    fn scaled_cmp() {
        // 3 vs 16 * 2^-2 = 4
        assert_eq!(cmp_q_scaled_pow2(&q_int(3), &q_int(16), -2.0), Ordering::Less);
        assert_eq!(cmp_q_scaled_pow2(&q_int(4), &q_int(16), -2.0), Ordering::Equal);
        assert_eq!(cmp_q_scaled_pow2(&q_int(5), &q_int(16), -2.0), Ordering::Greater);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), BigInt::from(6));
        assert_eq!(binomial(14, 3), BigInt::from(364));
        assert_eq!(binomial_sum(4, 2), BigInt::from(11));
        assert_eq!(binomial_sum(2, 2), BigInt::from(4));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("1/4"), Some(q(1, 4)));
        assert_eq!(parse_rational("0.25"), Some(q(1, 4)));
        assert_eq!(parse_rational("2^-8"), Some(q_pow2(-8)));
        assert_eq!(parse_rational("-0.5"), Some(q(-1, 2)));
        assert_eq!(parse_rational("3"), Some(q_int(3)));
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn log2_large_values() {
        let big = Q::from_integer(BigInt::one() << 200usize);
        assert!((log2_q(&big) - 200.0).abs() < 1e-9);
        assert!((q_to_f64(&q(1, 3)) - 1.0 / 3.0).abs() < 1e-15);
    }
}
