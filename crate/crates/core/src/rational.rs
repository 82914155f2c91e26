//! Exact integer and rational helpers shared by the tree-count formulas and
//! the enumeration oracle.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Parses `"a/b"` or an integer literal. Decimal points are refused so that
/// exact modes never see a rounded probability.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.contains('.') || s.contains('e') || s.contains('E') {
        return Err(Error::invalid(format!(
            "exact mode needs a rational like 1/2, got decimal {s:?}"
        )));
    }
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::invalid(format!("bad rational numerator in {s:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::invalid(format!("bad rational denominator in {s:?}")))?;
    if den.is_zero() {
        return Err(Error::invalid("rational with zero denominator"));
    }
    Ok(Rational::new(num, den))
}

/// Checks `0 <= p <= 1`.
pub fn check_probability(p: &Rational) -> Result<()> {
    if p.is_negative() || *p > Rational::one() {
        return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

pub fn to_f64(r: &Rational) -> f64 {
    // numer/denom may individually overflow f64; divide in log space then.
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() && b != 0.0 => a / b,
        _ => {
            let sign = if r.is_negative() { -1.0 } else { 1.0 };
            let ln = ln_big(&r.numer().abs()) - ln_big(r.denom());
            sign * ln.exp()
        }
    }
}

fn ln_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn big(x: u64) -> BigInt {
    BigInt::from(x)
}

/// Product of the integers `lo..=hi` (empty product is 1).
pub fn range_product(lo: u64, hi: u64) -> BigInt {
    if lo > hi {
        return BigInt::one();
    }
    // Balanced split keeps the operand sizes even.
    if hi - lo < 16 {
        return (lo..=hi).fold(BigInt::one(), |acc, v| acc * v);
    }
    let mid = lo + (hi - lo) / 2;
    range_product(lo, mid) * range_product(mid + 1, hi)
}

pub fn factorial(n: u64) -> BigInt {
    range_product(1, n)
}

/// `m!!` for odd or even `m`; `(-1)!! = 0!! = 1`.
pub fn double_factorial(m: i64) -> BigInt {
    if m <= 0 {
        return BigInt::one();
    }
    let mut acc = BigInt::one();
    let mut v = m as u64;
    while v > 1 {
        acc *= v;
        v -= 2;
    }
    acc
}

/// Product of the odd integers in `[lo, hi]`.
pub fn odd_product(lo: u64, hi: u64) -> BigInt {
    let mut acc = BigInt::one();
    let mut v = if lo % 2 == 1 { lo } else { lo + 1 };
    while v <= hi {
        acc *= v;
        v += 2;
    }
    acc
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    // C(n, k) = prod_{i=1..k} (n - k + i) / i, exact at every step.
    let mut acc = BigInt::one();
    for i in 1..=k {
        acc = acc * (n - k + i) / i;
    }
    acc
}

pub fn pow(r: &Rational, e: u64) -> Rational {
    num_traits::pow(r.clone(), e as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(
            parse_rational("1/2").unwrap(),
            Rational::new(big(1).into(), big(2).into())
        );
        assert_eq!(
            parse_rational(" 3 / 6 ").unwrap(),
            parse_rational("1/2").unwrap()
        );
        assert_eq!(parse_rational("1").unwrap(), Rational::one());
    }

    #[test]
    fn refuses_decimals_and_zero_denominator() {
        assert!(parse_rational("0.5").unwrap_err().is_validation());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn combinatorial_values() {
        assert_eq!(double_factorial(5), big(15));
        assert_eq!(double_factorial(11), big(10395));
        assert_eq!(double_factorial(-1), big(1));
        assert_eq!(factorial(10), big(3628800));
        assert_eq!(range_product(5, 4), big(1));
        assert_eq!(range_product(1, 40), factorial(40));
        assert_eq!(binomial(10, 3), big(120));
        assert_eq!(binomial(3, 5), big(0));
        assert_eq!(odd_product(4, 9), big(5 * 7 * 9));
    }

    #[test]
    fn huge_rational_to_f64() {
        let a = Rational::new(factorial(400), factorial(399));
        assert!((to_f64(&a) - 400.0).abs() < 1e-9);
    }
}
