//! Bond percolation on a pairing multigraph and its component census.

use rand::Rng;

use crate::config_model::{Multigraph, Pairing};
use crate::error::{Error, Result};
use crate::union_find::UnionFind;

/// Open/closed indicator for every pair of a pairing.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenMask {
    open: Vec<bool>,
    p: f64,
}

impl OpenMask {
    pub fn from_bits(open: Vec<bool>, p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(OpenMask { open, p })
    }

    pub fn all(num_pairs: usize, open: bool) -> Self {
        OpenMask {
            open: vec![open; num_pairs],
            p: if open { 1.0 } else { 0.0 },
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.open.len()
    }

    pub fn is_empty(&self) -> bool {
        self.open.is_empty()
    }

    #[inline]
    pub fn is_open(&self, pair: usize) -> bool {
        self.open[pair]
    }

    pub fn num_open(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }

    /// True when every pair open here is also open in `other`.
    pub fn is_subset_of(&self, other: &OpenMask) -> bool {
        self.open.len() == other.open.len()
            && self.open.iter().zip(&other.open).all(|(&a, &b)| !a || b)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// One uniform in `[0, 1)` per pair. Thresholding the same draws at several
/// `p` values gives nested masks.
pub fn uniform_draws<R: Rng + ?Sized>(num_pairs: usize, rng: &mut R) -> Vec<f64> {
    (0..num_pairs).map(|_| rng.gen::<f64>()).collect()
}

/// Pair `k` is open iff `uniforms[k] < p`.
pub fn percolate_shared(uniforms: &[f64], p: f64) -> Result<OpenMask> {
    check_p(p)?;
    Ok(OpenMask {
        open: uniforms.iter().map(|&u| u < p).collect(),
        p,
    })
}

/// Opens each of `num_pairs` pairs independently with probability `p`.
pub fn percolate_pairs<R: Rng + ?Sized>(num_pairs: usize, p: f64, rng: &mut R) -> Result<OpenMask> {
    check_p(p)?;
    Ok(OpenMask {
        open: (0..num_pairs).map(|_| rng.gen::<f64>() < p).collect(),
        p,
    })
}

pub fn percolate<R: Rng + ?Sized>(pairing: &Pairing, p: f64, rng: &mut R) -> Result<OpenMask> {
    percolate_pairs(pairing.num_pairs(), p, rng)
}

/// Components of the open subgraph.
///
/// Component ids follow the order of `sizes`: largest first, ties broken by
/// the smallest vertex in the component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentCensus {
    n: usize,
    sizes: Vec<usize>,
    open_edges: Vec<usize>,
    component_of: Vec<u32>,
}

impl ComponentCensus {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Component sizes, non-increasing.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn l1(&self) -> usize {
        self.sizes.first().copied().unwrap_or(0)
    }

    /// Second largest size; 0 if there is a single component.
    pub fn l2(&self) -> usize {
        self.sizes.get(1).copied().unwrap_or(0)
    }

    pub fn num_components(&self) -> usize {
        self.sizes.len()
    }

    /// Component id of 0-based vertex `v`.
    pub fn component_of(&self, v: usize) -> usize {
        self.component_of[v] as usize
    }

    /// Open pairs inside component `id`, loops included.
    pub fn open_edges(&self, id: usize) -> usize {
        self.open_edges[id]
    }

    /// A tree component has exactly `size - 1` open edges; an open loop
    /// always breaks this.
    pub fn is_tree(&self, id: usize) -> bool {
        self.open_edges[id] + 1 == self.sizes[id]
    }

    pub fn num_tree_components(&self) -> usize {
        (0..self.sizes.len()).filter(|&c| self.is_tree(c)).count()
    }

    /// CSV row `seed,n,d,p,L1,L2,num_components,num_tree_components`.
    pub fn csv_row(&self, seed: u64, d: u32, p: f64) -> String {
        format!(
            "{seed},{},{d},{p},{},{},{},{}",
            self.n,
            self.l1(),
            self.l2(),
            self.num_components(),
            self.num_tree_components()
        )
    }
}

pub const CENSUS_CSV_HEADER: &str = "seed,n,d,p,L1,L2,num_components,num_tree_components";

pub fn census(g: &Multigraph, mask: &OpenMask) -> Result<ComponentCensus> {
    if mask.len() != g.num_edges() {
        return Err(Error::invalid(format!(
            "mask has {} indicators for {} pairs",
            mask.len(),
            g.num_edges()
        )));
    }
    let n = g.n();
    let mut uf = UnionFind::new(n);
    for (k, &(u, v)) in g.edges().iter().enumerate() {
        if mask.is_open(k) {
            uf.union(u, v);
        }
    }

    // Roots are visited in increasing vertex order, so the first vertex seen
    // for a root is the component's smallest vertex.
    const NONE: u32 = u32::MAX;
    let mut slot = vec![NONE; n];
    let mut sizes: Vec<usize> = Vec::new();
    let mut first_vertex: Vec<u32> = Vec::new();
    let mut root_of = vec![0u32; n];
    for v in 0..n as u32 {
        let r = uf.find(v);
        root_of[v as usize] = r;
        if slot[r as usize] == NONE {
            slot[r as usize] = sizes.len() as u32;
            sizes.push(0);
            first_vertex.push(v);
        }
        sizes[slot[r as usize] as usize] += 1;
    }
    let mut edges = vec![0usize; sizes.len()];
    for (k, &(u, _)) in g.edges().iter().enumerate() {
        if mask.is_open(k) {
            edges[slot[root_of[u as usize] as usize] as usize] += 1;
        }
    }

    let mut order: Vec<u32> = (0..sizes.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        sizes[b as usize]
            .cmp(&sizes[a as usize])
            .then(first_vertex[a as usize].cmp(&first_vertex[b as usize]))
    });
    let mut rank = vec![0u32; sizes.len()];
    for (id, &s) in order.iter().enumerate() {
        rank[s as usize] = id as u32;
    }
    let component_of = root_of
        .iter()
        .map(|&r| rank[slot[r as usize] as usize])
        .collect();

    Ok(ComponentCensus {
        n,
        sizes: order.iter().map(|&s| sizes[s as usize]).collect(),
        open_edges: order.iter().map(|&s| edges[s as usize]).collect(),
        component_of,
    })
}

/// Number of tree components with size in `[k_lo, k_hi]`.
pub fn tree_component_count(c: &ComponentCensus, k_lo: usize, k_hi: usize) -> Result<usize> {
    if k_lo == 0 || k_lo > k_hi {
        return Err(Error::invalid(format!(
            "need 1 <= k_lo <= k_hi, got [{k_lo}, {k_hi}]"
        )));
    }
    Ok((0..c.num_components())
        .filter(|&id| c.is_tree(id) && (k_lo..=k_hi).contains(&c.sizes[id]))
        .count())
}

/// Size of the open component holding 1-based vertex `v`.
pub fn component_of(g: &Multigraph, mask: &OpenMask, v: usize) -> Result<usize> {
    if v == 0 || v > g.n() {
        return Err(Error::invalid(format!("vertex {v} outside [1, {}]", g.n())));
    }
    if mask.len() != g.num_edges() {
        return Err(Error::invalid("mask does not match multigraph"));
    }
    let mut uf = UnionFind::new(g.n());
    for (k, &(a, b)) in g.edges().iter().enumerate() {
        if mask.is_open(k) {
            uf.union(a, b);
        }
    }
    let root = uf.find(v as u32 - 1);
    Ok((0..g.n() as u32).filter(|&w| uf.find(w) == root).count())
}
