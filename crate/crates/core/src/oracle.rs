//! Exhaustive ground truth for tiny instances.
//!
//! Every pairing of the point set is visited once and, for each, every
//! open/closed mask. Outcomes are tallied by the number of open pairs, so a
//! statistic's law is an exact polynomial in `p`; evaluating it at a rational
//! `p` gives exact probabilities. Component labelling here is deliberately
//! self-contained so the oracle shares no code with the census.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::config_model::{DegreeSpec, Pairing};
use crate::error::{Error, Result};
use crate::rational::{check_probability, double_factorial, pow, Rational};

/// Largest point count the oracle accepts (`13!! = 135135` pairings).
pub const MAX_ORACLE_POINTS: usize = 14;

fn check_cap(spec: &DegreeSpec) -> Result<usize> {
    spec.validate()?;
    let points = spec.total_points();
    if points > MAX_ORACLE_POINTS {
        return Err(Error::OracleCap {
            points,
            cap: MAX_ORACLE_POINTS,
        });
    }
    Ok(points)
}

/// Yields every perfect matching of the spec's points exactly once.
///
/// Matching number `r` is decoded in mixed radix: at each level the smallest
/// unmatched point is paired with the `(r mod choices)`-th other unmatched
/// point.
pub struct PairingEnumerator {
    spec: DegreeSpec,
    points: usize,
    next: u64,
    total: u64,
}

pub fn enumerate_pairings(spec: &DegreeSpec) -> Result<PairingEnumerator> {
    let points = check_cap(spec)?;
    let total: u64 = (1..points as u64).step_by(2).product();
    Ok(PairingEnumerator {
        spec: spec.clone(),
        points,
        next: 0,
        total,
    })
}

fn decode(points: usize, mut index: u64) -> Vec<(u32, u32)> {
    let mut free: Vec<u32> = (1..=points as u32).collect();
    let mut pairs = Vec::with_capacity(points / 2);
    while !free.is_empty() {
        let first = free.remove(0);
        let choices = free.len() as u64;
        let pick = (index % choices) as usize;
        index /= choices;
        pairs.push((first, free.remove(pick)));
    }
    pairs
}

impl Iterator for PairingEnumerator {
    type Item = Pairing;

    fn next(&mut self) -> Option<Pairing> {
        if self.next >= self.total {
            return None;
        }
        let pairs = decode(self.points, self.next);
        self.next += 1;
        Some(Pairing::from_labeled_pairs(&self.spec, &pairs).expect("decoded matching is valid"))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.next) as usize;
        (left, Some(left))
    }
}

/// Exact law of an integer statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    pub support: BTreeMap<usize, Rational>,
}

impl ExactDistribution {
    pub fn total(&self) -> Rational {
        self.support.values().fold(Rational::zero(), |a, b| a + b)
    }

    pub fn prob(&self, value: usize) -> Rational {
        self.support
            .get(&value)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// `P(X <= value)`.
    pub fn cdf(&self, value: usize) -> Rational {
        self.support
            .range(..=value)
            .fold(Rational::zero(), |a, (_, b)| a + b)
    }

    pub fn mean(&self) -> Rational {
        self.support.iter().fold(Rational::zero(), |a, (&v, pr)| {
            a + pr * Rational::from_integer(BigInt::from(v))
        })
    }
}

/// Integer counts indexed by the number of open pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenCountPolynomial {
    /// `coeffs[j]`: weight of outcomes with exactly `j` open pairs.
    pub coeffs: Vec<u64>,
    pub num_pairs: usize,
    pub num_pairings: u64,
}

impl OpenCountPolynomial {
    fn new(num_pairs: usize, num_pairings: u64) -> Self {
        OpenCountPolynomial {
            coeffs: vec![0; num_pairs + 1],
            num_pairs,
            num_pairings,
        }
    }

    /// `sum_j coeffs[j] p^j q^(P - j) / (#pairings)`.
    pub fn eval(&self, p: &Rational) -> Rational {
        let q = Rational::one() - p;
        let mut acc = Rational::zero();
        for (j, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                acc += Rational::from_integer(BigInt::from(c))
                    * pow(p, j as u64)
                    * pow(&q, (self.num_pairs - j) as u64);
            }
        }
        acc / Rational::from_integer(BigInt::from(self.num_pairings))
    }
}

/// Statistics the oracle knows how to tally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    LargestComponent,
    /// Size of the component of a 1-based vertex.
    ComponentOf(usize),
}

/// Components of one (pairing, mask) outcome.
struct Outcome {
    label: Vec<usize>,
    size: Vec<usize>,
    edges: Vec<usize>,
}

fn components(n: usize, edges: &[(usize, usize)], mask: u32) -> Outcome {
    let mut label: Vec<usize> = (0..n).collect();
    // Relabel until stable; n is tiny.
    loop {
        let mut changed = false;
        for (k, &(u, v)) in edges.iter().enumerate() {
            if mask >> k & 1 == 1 {
                let m = label[u].min(label[v]);
                if label[u] != m || label[v] != m {
                    label[u] = m;
                    label[v] = m;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut size = vec![0; n];
    let mut count = vec![0; n];
    for &l in &label {
        size[l] += 1;
    }
    for (k, &(u, _)) in edges.iter().enumerate() {
        if mask >> k & 1 == 1 {
            count[label[u]] += 1;
        }
    }
    Outcome {
        label,
        size,
        edges: count,
    }
}

/// Visits every (pairing, mask) outcome with its open-pair count.
fn for_each_outcome(
    spec: &DegreeSpec,
    mut visit: impl FnMut(&Outcome, usize),
) -> Result<(usize, u64)> {
    let points = check_cap(spec)?;
    let n = spec.n();
    let mut owner = Vec::with_capacity(points + 1);
    owner.push(usize::MAX);
    for v in 0..n {
        for _ in 0..spec.degree(v) {
            owner.push(v);
        }
    }
    let num_pairs = points / 2;
    let mut pairings = 0u64;
    for pairing in enumerate_pairings(spec)? {
        pairings += 1;
        let edges: Vec<(usize, usize)> = pairing
            .labeled_pairs()
            .map(|(s, t)| (owner[s as usize], owner[t as usize]))
            .collect();
        for mask in 0..(1u32 << num_pairs) {
            let out = components(n, &edges, mask);
            visit(&out, mask.count_ones() as usize);
        }
    }
    Ok((num_pairs, pairings))
}

/// Exact polynomial tallies of a statistic, keyed by statistic value.
pub fn statistic_polynomials(
    spec: &DegreeSpec,
    stat: Statistic,
) -> Result<BTreeMap<usize, OpenCountPolynomial>> {
    if let Statistic::ComponentOf(v) = stat {
        if v == 0 || v > spec.n() {
            return Err(Error::invalid(format!(
                "vertex {v} outside [1, {}]",
                spec.n()
            )));
        }
    }
    let mut raw: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    let num_pairs = spec.total_points() / 2;
    let (num_pairs, pairings) = for_each_outcome(spec, |out, open| {
        let value = match stat {
            Statistic::LargestComponent => *out.size.iter().max().unwrap(),
            Statistic::ComponentOf(v) => out.size[out.label[v - 1]],
        };
        raw.entry(value).or_insert_with(|| vec![0; num_pairs + 1])[open] += 1;
    })?;
    Ok(raw
        .into_iter()
        .map(|(v, coeffs)| {
            (
                v,
                OpenCountPolynomial {
                    coeffs,
                    num_pairs,
                    num_pairings: pairings,
                },
            )
        })
        .collect())
}

pub fn exact_distribution(
    spec: &DegreeSpec,
    p: &Rational,
    stat: Statistic,
) -> Result<ExactDistribution> {
    check_probability(p)?;
    let polys = statistic_polynomials(spec, stat)?;
    Ok(ExactDistribution {
        support: polys
            .into_iter()
            .map(|(v, poly)| (v, poly.eval(p)))
            .filter(|(_, pr)| !pr.is_zero())
            .collect(),
    })
}

/// Exact law of the largest component size `L1`.
pub fn exact_l1_distribution(spec: &DegreeSpec, p: &Rational) -> Result<ExactDistribution> {
    exact_distribution(spec, p, Statistic::LargestComponent)
}

/// Exact expected number of tree components of each size `1..=n`, as
/// polynomials in `p` (index `k - 1` holds size `k`).
pub fn tree_count_polynomials(spec: &DegreeSpec) -> Result<Vec<OpenCountPolynomial>> {
    let n = spec.n();
    let num_pairs = spec.total_points() / 2;
    let mut polys = vec![OpenCountPolynomial::new(num_pairs, 0); n];
    let (_, pairings) = for_each_outcome(spec, |out, open| {
        for root in 0..n {
            let size = out.size[root];
            if size > 0 && out.label[root] == root && out.edges[root] + 1 == size {
                polys[size - 1].coeffs[open] += 1;
            }
        }
    })?;
    for poly in &mut polys {
        poly.num_pairings = pairings;
    }
    Ok(polys)
}

/// Exact `E_k` by enumeration.
pub fn exact_tree_component_expectation(
    spec: &DegreeSpec,
    p: &Rational,
    k: usize,
) -> Result<Rational> {
    check_probability(p)?;
    check_cap(spec)?;
    if k == 0 {
        return Err(Error::invalid("component size k must be at least 1"));
    }
    if k > spec.n() {
        return Ok(Rational::zero());
    }
    Ok(tree_count_polynomials(spec)?[k - 1].eval(p))
}

/// `(N - 1)!!`, for cross-checking the enumerator.
pub fn pairing_count(spec: &DegreeSpec) -> BigInt {
    double_factorial(spec.total_points() as i64 - 1)
}
