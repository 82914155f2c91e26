//! Uniform pairings on the point set of a degree specification and the
//! multigraphs they induce.
//!
//! Points are laid out in contiguous per-vertex blocks: vertex `i` owns the
//! points `offset_i .. offset_i + d_i` (0-based internally, 1-based in every
//! text format).

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rational::double_factorial;

/// Smallest admissible vertex degree.
pub const MIN_DEGREE: u32 = 3;

/// Default attempt budget for [`sample_simple`].
pub const DEFAULT_MAX_ATTEMPTS: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DegreeSpec {
    Regular { n: usize, d: u32 },
    Sequence(Vec<u32>),
}

impl DegreeSpec {
    pub fn regular(n: usize, d: u32) -> Result<Self> {
        let s = DegreeSpec::Regular { n, d };
        s.validate()?;
        Ok(s)
    }

    pub fn sequence(degrees: Vec<u32>) -> Result<Self> {
        let s = DegreeSpec::Sequence(degrees);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n() == 0 {
            return Err(Error::invalid("degree spec has no vertices"));
        }
        match self {
            DegreeSpec::Regular { d, .. } if *d < MIN_DEGREE => {
                return Err(Error::invalid(format!("degree {d} < {MIN_DEGREE}")));
            }
            DegreeSpec::Sequence(ds) => {
                if let Some((i, d)) = ds.iter().enumerate().find(|(_, &d)| d < MIN_DEGREE) {
                    return Err(Error::invalid(format!(
                        "vertex {} has degree {d} < {MIN_DEGREE}",
                        i + 1
                    )));
                }
            }
            _ => {}
        }
        let total = self.total_points();
        if total % 2 != 0 {
            return Err(Error::invalid(format!("total point count {total} is odd")));
        }
        if total > u32::MAX as usize {
            return Err(Error::invalid(format!(
                "total point count {total} too large"
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        match self {
            DegreeSpec::Regular { n, .. } => *n,
            DegreeSpec::Sequence(ds) => ds.len(),
        }
    }

    pub fn degree(&self, v: usize) -> u32 {
        match self {
            DegreeSpec::Regular { d, .. } => *d,
            DegreeSpec::Sequence(ds) => ds[v],
        }
    }

    pub fn max_degree(&self) -> u32 {
        match self {
            DegreeSpec::Regular { d, .. } => *d,
            DegreeSpec::Sequence(ds) => ds.iter().copied().max().unwrap_or(0),
        }
    }

    /// `N = sum_i d_i`.
    pub fn total_points(&self) -> usize {
        match self {
            DegreeSpec::Regular { n, d } => n * *d as usize,
            DegreeSpec::Sequence(ds) => ds.iter().map(|&d| d as usize).sum(),
        }
    }

    pub fn num_pairs(&self) -> usize {
        self.total_points() / 2
    }

    fn layout(&self) -> Layout {
        match self {
            DegreeSpec::Regular { d, .. } => Layout::Regular(*d),
            DegreeSpec::Sequence(ds) => {
                let mut offsets = Vec::with_capacity(ds.len() + 1);
                let mut acc = 0u32;
                offsets.push(0);
                for &d in ds {
                    acc += d;
                    offsets.push(acc);
                }
                Layout::Blocks(offsets)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Layout {
    Regular(u32),
    /// `offsets[i]..offsets[i + 1]` are the points of vertex `i`.
    Blocks(Vec<u32>),
}

impl Layout {
    #[inline]
    fn owner(&self, point: u32) -> u32 {
        match self {
            Layout::Regular(d) => point / d,
            Layout::Blocks(off) => (off.partition_point(|&o| o <= point) - 1) as u32,
        }
    }
}

/// A perfect matching on the `N` points of a [`DegreeSpec`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pairing {
    /// Pairs in sampling order; the index of a pair is its identity for
    /// percolation masks and multigraph edges.
    pairs: Vec<[u32; 2]>,
    partner: Vec<u32>,
    layout: Layout,
}

impl Pairing {
    /// Builds a pairing from explicit 1-based point pairs.
    pub fn from_labeled_pairs(spec: &DegreeSpec, pairs: &[(u32, u32)]) -> Result<Self> {
        spec.validate()?;
        let total = spec.total_points();
        if pairs.len() * 2 != total {
            return Err(Error::invalid(format!(
                "{} pairs cannot cover {total} points",
                pairs.len()
            )));
        }
        let mut partner = vec![u32::MAX; total];
        let mut out = Vec::with_capacity(pairs.len());
        for &(s, t) in pairs {
            if s == 0 || t == 0 || s as usize > total || t as usize > total || s == t {
                return Err(Error::invalid(format!("bad pair ({s}, {t})")));
            }
            let (a, b) = (s - 1, t - 1);
            if partner[a as usize] != u32::MAX || partner[b as usize] != u32::MAX {
                return Err(Error::invalid(format!("point repeated in pair ({s}, {t})")));
            }
            partner[a as usize] = b;
            partner[b as usize] = a;
            out.push([a, b]);
        }
        Ok(Pairing {
            pairs: out,
            partner,
            layout: spec.layout(),
        })
    }

    fn from_sequence(spec: &DegreeSpec, points: &[u32]) -> Self {
        let mut partner = vec![0u32; points.len()];
        let pairs: Vec<[u32; 2]> = points
            .chunks_exact(2)
            .map(|c| {
                partner[c[0] as usize] = c[1];
                partner[c[1] as usize] = c[0];
                [c[0], c[1]]
            })
            .collect();
        Pairing {
            pairs,
            partner,
            layout: spec.layout(),
        }
    }

    pub fn num_points(&self) -> usize {
        self.partner.len()
    }

    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// 1-based partner of 1-based point `s`.
    pub fn partner(&self, s: u32) -> u32 {
        self.partner[(s - 1) as usize] + 1
    }

    /// 0-based owning vertex of 1-based point `s`.
    pub fn owner(&self, s: u32) -> usize {
        self.layout.owner(s - 1) as usize
    }

    /// Pairs as 1-based labels, in pair-index order.
    pub fn labeled_pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.pairs.iter().map(|&[a, b]| (a + 1, b + 1))
    }

    /// Involution without fixed points, covering every point once.
    pub fn is_valid_matching(&self) -> bool {
        let n = self.partner.len();
        let mut seen = vec![false; n];
        for &[a, b] in &self.pairs {
            let (a, b) = (a as usize, b as usize);
            if a == b || a >= n || b >= n || seen[a] || seen[b] {
                return false;
            }
            seen[a] = true;
            seen[b] = true;
        }
        seen.iter().all(|&s| s)
            && (0..n).all(|s| {
                let t = self.partner[s] as usize;
                t != s && self.partner[t] as usize == s
            })
    }
}

/// A multigraph on `[n]`; loops and parallel edges allowed. Edge `k` comes
/// from pair `k` of the pairing that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multigraph {
    n: usize,
    edges: Vec<(u32, u32)>,
}

impl Multigraph {
    pub fn from_edges(n: usize, edges: Vec<(u32, u32)>) -> Result<Self> {
        if let Some(&(u, v)) = edges
            .iter()
            .find(|&&(u, v)| u as usize >= n || v as usize >= n)
        {
            return Err(Error::invalid(format!(
                "edge ({}, {}) out of range for n = {n}",
                u + 1,
                v + 1
            )));
        }
        Ok(Multigraph { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// 0-based edges; the index of an edge is its pair index.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Degrees with loops counted twice.
    pub fn degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.n];
        for &(u, v) in &self.edges {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        deg
    }

    /// One line `u v` per edge, 1-based; loops as `u u`.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut buf = String::with_capacity(self.edges.len() * 12);
        for &(u, v) in &self.edges {
            let _ = writeln!(buf, "{} {}", u + 1, v + 1);
        }
        w.write_all(buf.as_bytes())
    }

    pub fn read_edge_list<R: BufRead>(n: usize, r: R) -> Result<Self> {
        let mut edges = Vec::new();
        for (idx, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let mut next = || -> Result<u32> {
                let tok = it.next().ok_or_else(|| Error::Parse {
                    line: idx + 1,
                    msg: "expected two vertices".into(),
                })?;
                let v: u32 = tok.parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    msg: format!("bad vertex {tok:?}"),
                })?;
                if v == 0 {
                    return Err(Error::Parse {
                        line: idx + 1,
                        msg: "vertices are 1-based".into(),
                    });
                }
                Ok(v - 1)
            };
            let u = next()?;
            let v = next()?;
            edges.push((u, v));
        }
        Multigraph::from_edges(n, edges)
    }
}

/// Uniform perfect matching: a uniform permutation of the points, read off in
/// consecutive pairs.
pub fn sample_pairing<R: Rng + ?Sized>(spec: &DegreeSpec, rng: &mut R) -> Result<Pairing> {
    spec.validate()?;
    let mut points: Vec<u32> = (0..spec.total_points() as u32).collect();
    points.shuffle(rng);
    Ok(Pairing::from_sequence(spec, &points))
}

pub fn pairing_to_multigraph(pairing: &Pairing, spec: &DegreeSpec) -> Result<Multigraph> {
    if pairing.num_points() != spec.total_points() || pairing.layout != spec.layout() {
        return Err(Error::invalid("pairing does not match degree spec"));
    }
    let edges = pairing
        .pairs
        .iter()
        .map(|&[a, b]| {
            let (u, v) = (pairing.layout.owner(a), pairing.layout.owner(b));
            (u.min(v), u.max(v))
        })
        .collect();
    Ok(Multigraph { n: spec.n(), edges })
}

/// True iff `g` has neither loops nor parallel edges.
pub fn is_simple(g: &Multigraph) -> bool {
    let mut keys = Vec::with_capacity(g.edges.len());
    for &(u, v) in &g.edges {
        if u == v {
            return false;
        }
        let (a, b) = (u.min(v) as u64, u.max(v) as u64);
        keys.push((a << 32) | b);
    }
    keys.sort_unstable();
    keys.windows(2).all(|w| w[0] != w[1])
}

/// Rejection sampling: draw pairings until one is graph-induced.
pub fn sample_simple<R: Rng + ?Sized>(
    spec: &DegreeSpec,
    rng: &mut R,
    max_attempts: usize,
) -> Result<Multigraph> {
    if max_attempts == 0 {
        return Err(Error::invalid("max_attempts must be at least 1"));
    }
    spec.validate()?;
    for _ in 0..max_attempts {
        let g = pairing_to_multigraph(&sample_pairing(spec, rng)?, spec)?;
        if is_simple(&g) {
            return Ok(g);
        }
    }
    Err(Error::AttemptsExhausted {
        attempts: max_attempts,
    })
}

/// `(N - 1)!!`, the number of perfect matchings on the spec's points.
pub fn count_pairings(spec: &DegreeSpec) -> Result<BigInt> {
    let total = spec.total_points();
    if total % 2 != 0 {
        return Err(Error::invalid(format!("total point count {total} is odd")));
    }
    Ok(double_factorial(total as i64 - 1))
}
