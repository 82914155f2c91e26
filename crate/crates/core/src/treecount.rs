//! Expected numbers of tree components in the percolated pairing multigraph:
//! exact values in rational arithmetic and the small-`k` asymptotics.
//!
//! For `[k]` to span a tree component, its open pairs must form a spanning
//! tree, `2D` further points of `[k]` must be paired among themselves by
//! closed pairs, and the remaining `theta = kd - 2(k - 1) - 2D` points must
//! be paired with outside points by closed pairs.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::rational::{
    binomial, check_probability, double_factorial, factorial, odd_product, pow, range_product,
    to_f64, Rational,
};

/// An exact expected count together with the inputs that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactCount {
    pub value: Rational,
    pub n: u64,
    pub d: u64,
    pub k: u64,
    pub p: Rational,
}

impl ExactCount {
    pub fn to_f64(&self) -> f64 {
        to_f64(&self.value)
    }
}

fn check_nd(n: u64, d: u64) -> Result<()> {
    if d < 3 {
        return Err(Error::invalid(format!("degree {d} < 3")));
    }
    if n == 0 || (n * d) % 2 != 0 {
        return Err(Error::invalid(format!(
            "n d = {} must be positive and even",
            n * d
        )));
    }
    Ok(())
}

fn check_k(n: u64, k: u64) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} outside [1, {n}]")));
    }
    Ok(())
}

/// Largest admissible `D` for a `k`-vertex tree: `2D <= kd - 2(k - 1)`.
pub fn max_d(d: u64, k: u64) -> u64 {
    (k * d - 2 * (k - 1)) / 2
}

/// Probability that `[k]` spans a tree component with exactly `2D` internal
/// points matched by closed pairs.
pub fn exact_p2d(n: u64, d: u64, k: u64, dd: u64, p: &Rational) -> Result<Rational> {
    check_nd(n, d)?;
    check_k(n, k)?;
    check_probability(p)?;
    if 2 * dd > k * d - 2 * (k - 1) {
        return Err(Error::invalid(format!(
            "2D = {} exceeds kd - 2(k - 1) = {}",
            2 * dd,
            k * d - 2 * (k - 1)
        )));
    }
    let q = Rational::one() - p;
    let total = n * d;
    let outside = (n - k) * d;
    let theta = k * d - 2 * (k - 1) - 2 * dd;
    if theta > outside {
        return Ok(Rational::zero());
    }
    // C(M, theta) theta! (M - theta - 1)!! / (N - 1)!! with M = outside points:
    // the outward partners in order, then a perfect matching of the rest.
    let outward = range_product(outside - theta + 1, outside);
    let matching_ratio = odd_product(outside - theta + 1, total - 1);

    if k == 1 {
        // Isolated vertex: choose the 2D loop points and pair them.
        let ways = binomial(d, 2 * dd) * double_factorial(2 * dd as i64 - 1) * outward;
        return Ok(Rational::new(ways, matching_ratio) * pow(&q, dd + theta));
    }
    // Tree-induced subpairings summed over all degree splits of [k]:
    // d^k (k(d - 1))! / ((2D)! theta!), times (2D - 1)!! internal matchings.
    let trees = BigInt::from(d).pow(k as u32) * factorial(k * (d - 1));
    let internal = double_factorial(2 * dd as i64 - 1);
    let denom = factorial(2 * dd) * factorial(theta);
    Ok(
        Rational::new(trees * internal * outward, denom * matching_ratio)
            * pow(p, k - 1)
            * pow(&q, dd + theta),
    )
}

/// `E_k = C(n, k) sum_D P(2D)`, exactly.
pub fn exact_e_k(n: u64, d: u64, k: u64, p: &Rational) -> Result<ExactCount> {
    check_nd(n, d)?;
    check_k(n, k)?;
    check_probability(p)?;
    let mut pk = Rational::zero();
    for dd in 0..=max_d(d, k) {
        pk += exact_p2d(n, d, k, dd, p)?;
    }
    Ok(ExactCount {
        value: Rational::from_integer(binomial(n, k)) * pk,
        n,
        d,
        k,
        p: p.clone(),
    })
}

/// Coefficient of `k^2 / n` in the exponent of the asymptotic formula:
/// `(d - 1)(d - 2) / (2 d q) (p - p*)`. Zero at `p = p*`.
pub fn window_coefficient(d: u64, p: f64) -> f64 {
    let df = d as f64;
    let p_star = 1.0 / (df - 1.0);
    (df - 1.0) * (df - 2.0) / (2.0 * df * (1.0 - p)) * (p - p_star)
}

fn check_float_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

fn ln_pow(base: f64, e: u64) -> f64 {
    if e == 0 {
        0.0
    } else {
        e as f64 * base.ln()
    }
}

/// `nd p^(k-1) q^(kd-2(k-1)) (k(d-1))! / (k! (kd-2(k-1))!) exp(c k^2 / n)`,
/// evaluated in log space.
pub fn asymptotic_e_k(n: u64, d: u64, k: u64, p: f64) -> Result<f64> {
    check_nd(n, d)?;
    check_k(n, k)?;
    check_float_p(p)?;
    let q = 1.0 - p;
    let (nf, kf) = (n as f64, k as f64);
    let free = k * d - 2 * (k - 1);
    let exponent = kf * kf / nf;
    let growth = if q > 0.0 {
        window_coefficient(d, p) * exponent
    } else {
        0.0
    };
    let ln = (nf * d as f64).ln()
        + ln_pow(p, k - 1)
        + ln_pow(q, free)
        + ln_gamma((k * (d - 1)) as f64 + 1.0)
        - ln_gamma(kf + 1.0)
        - ln_gamma(free as f64 + 1.0)
        + growth;
    Ok(ln.exp())
}

/// `E_{k1,k2} / (E_{k1} E_{k2}) ~ 1 + c (k^2 - k1^2 - k2^2) / n`, `k = k1 + k2`.
pub fn asymptotic_pair_ratio(n: u64, d: u64, k1: u64, k2: u64, p: f64) -> Result<f64> {
    check_nd(n, d)?;
    if k1 == 0 || k2 == 0 {
        return Err(Error::invalid("component sizes must be at least 1"));
    }
    check_float_p(p)?;
    let k = (k1 + k2) as f64;
    let spread = k * k - (k1 * k1) as f64 - (k2 * k2) as f64;
    Ok(1.0 + window_coefficient(d, p) * spread / n as f64)
}

/// Poisson mean bounding the internal closed pairs of a `k`-tree:
/// `(kd - 2(k - 1))^2 / (4 q (nd/2 - kd + k - 1))`.
pub fn lambda_k(n: u64, d: u64, k: u64, p: f64) -> Result<f64> {
    check_nd(n, d)?;
    check_k(n, k)?;
    check_float_p(p)?;
    let free = (k * d - 2 * (k - 1)) as f64;
    let rest = (n * d) as f64 / 2.0 - (k * d) as f64 + k as f64 - 1.0;
    if rest <= 0.0 {
        return Err(Error::invalid("k too large for the Poisson bound"));
    }
    Ok(free * free / (4.0 * (1.0 - p) * rest))
}
