//! Deterministic side of the model: critical probability, extinction
//! probability, giant fraction, the closed-form ODE trajectory of the
//! exploration chain, its transfer matrix and its conserved integrals.

use serde::Serialize;

use crate::config_model::DegreeSpec;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-12;

/// Size-biased degree weights `lambda_j = (sum_{i: d_i = j} d_i) / sum_i d_i`
/// together with the plain degree frequencies `n_j / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeWeights {
    /// `(j, lambda_j, n_j / n)` for every degree present, increasing in `j`.
    pub classes: Vec<(u32, f64, f64)>,
}

impl DegreeWeights {
    pub fn new(spec: &DegreeSpec) -> Self {
        match spec {
            DegreeSpec::Regular { d, .. } => DegreeWeights {
                classes: vec![(*d, 1.0, 1.0)],
            },
            DegreeSpec::Sequence(ds) => {
                let mut counts = std::collections::BTreeMap::new();
                for &d in ds {
                    *counts.entry(d).or_insert(0u64) += 1;
                }
                let total: f64 = ds.iter().map(|&d| d as f64).sum();
                let n = ds.len() as f64;
                DegreeWeights {
                    classes: counts
                        .into_iter()
                        .map(|(j, c)| (j, j as f64 * c as f64 / total, c as f64 / n))
                        .collect(),
                }
            }
        }
    }

    fn regular(d: u32) -> Self {
        DegreeWeights {
            classes: vec![(d, 1.0, 1.0)],
        }
    }

    /// `sum_j j * lambda_j`.
    fn mean_size_biased(&self) -> f64 {
        self.classes.iter().map(|&(j, l, _)| j as f64 * l).sum()
    }

    /// `G(s) = sum_j lambda_j s^(j-1)`.
    fn g(&self, s: f64) -> f64 {
        self.classes
            .iter()
            .map(|&(j, l, _)| l * s.powi(j as i32 - 1))
            .sum()
    }

    /// `k(z) = (y - G(py + q)) / (1 - y)` at `y = 1 - z`, expanded so that the
    /// trivial root `y = 1` is divided out exactly.
    fn deflated(&self, p: f64, z: f64) -> f64 {
        let b = 1.0 - p * z;
        let mut acc = 0.0;
        for &(j, l, _) in &self.classes {
            let mut term = 0.0;
            let mut pw = 1.0;
            for _ in 0..j.saturating_sub(1) {
                term += pw;
                pw *= b;
            }
            acc += l * term;
        }
        p * acc - 1.0
    }
}

/// `p* = 1 / (sum_j j lambda_j - 1)`; `1 / (d - 1)` in the regular case.
pub fn p_star(spec: &DegreeSpec) -> f64 {
    p_star_of(&DegreeWeights::new(spec))
}

fn p_star_of(w: &DegreeWeights) -> f64 {
    1.0 / (w.mean_size_biased() - 1.0)
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchingSolution {
    pub p_star: f64,
    /// Extinction probability; exactly 1 at or below `p_star`.
    pub pi: f64,
    /// Asymptotic fraction of vertices in the giant component.
    pub alpha: f64,
    pub tol: f64,
}

/// Bisection on `[lo, hi]` for a function positive at `lo` and non-positive
/// at `hi`.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn solve_pi(w: &DegreeWeights, p: f64, tol: f64) -> Result<f64> {
    check_p(p)?;
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    if p <= p_star_of(w) {
        return Ok(1.0);
    }
    // k(0) = p / p* - 1 > 0 and k(1) = -G(0) <= 0, and k is decreasing.
    let z = bisect(0.0, 1.0, |z| w.deflated(p, z));
    let pi = 1.0 - z;
    let residual = (pi - w.g(p * pi + 1.0 - p)).abs();
    if residual > tol {
        return Err(Error::Numerical {
            what: format!("extinction fixed point at p = {p}"),
            residual,
        });
    }
    Ok(pi)
}

/// Smallest root of `pi = G(p pi + q)`: 1 for `p <= p*`, otherwise the
/// unique root in `[0, 1)`.
pub fn extinction_pi(spec: &DegreeSpec, p: f64, tol: f64) -> Result<f64> {
    solve_pi(&DegreeWeights::new(spec), p, tol)
}

/// Fraction of vertices in the giant component,
/// `1 - sum_j (n_j / n) (p pi + q)^j`. For a regular spec this is
/// `1 - (p pi + q)^d`.
pub fn alpha(spec: &DegreeSpec, p: f64) -> Result<f64> {
    Ok(solve_branching(spec, p, DEFAULT_TOL)?.alpha)
}

/// Fraction of points (half-edges) whose vertex lies in the giant component,
/// `1 - sum_j lambda_j (p pi + q)^j`. Equal to [`alpha`] for regular specs.
pub fn point_alpha(spec: &DegreeSpec, p: f64) -> Result<f64> {
    let w = DegreeWeights::new(spec);
    let pi = solve_pi(&w, p, DEFAULT_TOL)?;
    let s = p * pi + 1.0 - p;
    Ok(1.0
        - w.classes
            .iter()
            .map(|&(j, l, _)| l * s.powi(j as i32))
            .sum::<f64>())
}

pub fn solve_branching(spec: &DegreeSpec, p: f64, tol: f64) -> Result<BranchingSolution> {
    let w = DegreeWeights::new(spec);
    let pi = solve_pi(&w, p, tol)?;
    let s = p * pi + 1.0 - p;
    let alpha = if pi == 1.0 {
        0.0
    } else {
        1.0 - w
            .classes
            .iter()
            .map(|&(j, _, f)| f * s.powi(j as i32))
            .sum::<f64>()
    };
    Ok(BranchingSolution {
        p_star: p_star_of(&w),
        pi,
        alpha,
        tol,
    })
}

/// Root `y_hat` of `f(y) = y - (p y + q)^(d-1) (1 - m/n)` in `(0, 1)` and the
/// matching extinction time `tau_hat = (d/2)(1 - y_hat^2)`.
///
/// With `m_over_n = 0` the degenerate root `y = 1` is divided out, so a root
/// exists only above `p*`. With `m_over_n > 0`, `f(1) = m/n > 0` and the root
/// always exists.
pub fn y_hat_tau_hat(d: u32, p: f64, m_over_n: f64) -> Result<(f64, f64)> {
    check_p(p)?;
    if d < 2 {
        return Err(Error::invalid("degree must be at least 2"));
    }
    if !(0.0..1.0).contains(&m_over_n) {
        return Err(Error::invalid(format!("m/n = {m_over_n} outside [0, 1)")));
    }
    let w = DegreeWeights::regular(d);
    let q = 1.0 - p;
    let z = if m_over_n == 0.0 {
        if p <= p_star_of(&w) {
            return Err(Error::NoRoot);
        }
        bisect(0.0, 1.0, |z| w.deflated(p, z))
    } else {
        // f = z k(z) + (m/n) G(1 - p z), positive at z = 0, <= 0 at z = 1.
        bisect(0.0, 1.0, |z| {
            z * w.deflated(p, z) + m_over_n * (1.0 - p * z).powi(d as i32 - 1)
        })
    };
    let y = 1.0 - z;
    let residual = (y - (p * y + q).powi(d as i32 - 1) * (1.0 - m_over_n)).abs();
    if residual > 1e-10 {
        return Err(Error::Numerical {
            what: "y_hat root".into(),
            residual,
        });
    }
    // (1 - y^2) = z (2 - z) avoids cancellation near y = 1.
    Ok((y, 0.5 * d as f64 * z * (2.0 - z)))
}

/// Point `x(tau)` on the closed-form solution of the scaled ODE started from
/// `a(0) = d m/n`, `i_d(0) = 1 - m/n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub tau: f64,
    pub y: f64,
    /// Active point density.
    pub a: f64,
    /// Inactive vertex densities `i_0..i_d`.
    pub i: Vec<f64>,
    pub m_over_n: f64,
}

impl TrajectoryPoint {
    /// `(a, i_0, .., i_d)`.
    pub fn state(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.i.len() + 1);
        x.push(self.a);
        x.extend_from_slice(&self.i);
        x
    }
}

pub fn trajectory(tau: f64, d: u32, p: f64, m_over_n: f64) -> Result<TrajectoryPoint> {
    check_p(p)?;
    let df = d as f64;
    if !(tau >= 0.0 && tau < df / 2.0) {
        return Err(Error::invalid(format!(
            "tau = {tau} outside [0, {})",
            df / 2.0
        )));
    }
    let q = 1.0 - p;
    let id0 = 1.0 - m_over_n;
    let y = (1.0 - 2.0 * tau / df).sqrt();
    let qy = q * (1.0 - y);
    let i = (0..=d)
        .map(|j| binom_f64(d, j) * y.powi(j as i32) * qy.powi((d - j) as i32) * id0)
        .collect();
    let a = df * y * (y - (p * y + q).powi(d as i32 - 1) * id0);
    Ok(TrajectoryPoint {
        tau,
        y,
        a,
        i,
        m_over_n,
    })
}

fn binom_f64(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, t| acc * (n - t) as f64 / (t + 1) as f64)
}

/// Inactive point density `sum_j j i_j` of a scaled state `(a, i_0..i_d)`.
fn inactive_mass(x: &[f64]) -> f64 {
    x[1..].iter().enumerate().map(|(j, &v)| j as f64 * v).sum()
}

fn check_state(x: &[f64]) -> Result<()> {
    if x.len() < 3 {
        return Err(Error::invalid("state needs a and at least i_0, i_1"));
    }
    Ok(())
}

/// Right-hand side `R_0(x)` of the scaled ODE, `x = (a, i_0..i_d)`.
pub fn ode_rhs(x: &[f64], p: f64) -> Result<Vec<f64>> {
    check_state(x)?;
    let q = 1.0 - p;
    let a = x[0];
    let i = &x[1..];
    let mass = inactive_mass(x);
    let s = a + mass;
    if !(s > 0.0) {
        return Err(Error::Numerical {
            what: "ODE right-hand side singular (a + i = 0)".into(),
            residual: s,
        });
    }
    let weighted: f64 = i
        .iter()
        .enumerate()
        .map(|(j, &v)| j as f64 * v * (j as f64 - 2.0))
        .sum();
    let mut out = Vec::with_capacity(x.len());
    out.push((-2.0 * a + p * weighted - q * mass) / s);
    let d = i.len() - 1;
    for j in 0..=d {
        let up = if j < d {
            q * (j + 1) as f64 * i[j + 1]
        } else {
            0.0
        };
        out.push((up - j as f64 * i[j]) / s);
    }
    Ok(out)
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for k in 0..dim {
            data[k * dim + k] = 1.0;
        }
        SquareMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.dim + c]
    }

    pub fn mul(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut data = vec![0.0; n * n];
        for r in 0..n {
            for k in 0..n {
                let v = self.data[r * n + k];
                if v != 0.0 {
                    for c in 0..n {
                        data[r * n + c] += v * other.data[k * n + c];
                    }
                }
            }
        }
        SquareMatrix { dim: n, data }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|r| {
                (0..self.dim)
                    .map(|c| self.data[r * self.dim + c] * v[c])
                    .sum()
            })
            .collect()
    }

    pub fn max_abs_diff(&self, other: &SquareMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `M_jr(u) = e^{-ju} q^{r-j} C(r, j) (1 - e^{-u})^{r-j}` for `r >= j`, zero
/// below the diagonal; dimension `(d + 1) x (d + 1)`.
///
/// `M(0) = I`, `M(u + v) = M(u) M(v)` and `M(-u) = M(u)^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub u: f64,
    pub q: f64,
    pub matrix: SquareMatrix,
}

pub fn transfer_matrix(u: f64, d: u32, q: f64) -> TransferMatrix {
    let dim = d as usize + 1;
    let e = (-u).exp();
    let one_minus = -(-u).exp_m1();
    let mut m = SquareMatrix {
        dim,
        data: vec![0.0; dim * dim],
    };
    for j in 0..dim {
        for r in j..dim {
            let gap = (r - j) as i32;
            m.data[j * dim + r] = e.powi(j as i32)
                * q.powi(gap)
                * binom_f64(r as u32, j as u32)
                * one_minus.powi(gap);
        }
    }
    TransferMatrix { u, q, matrix: m }
}

/// Conserved integrals `F(x) = M(ln sqrt((a + i) / d)) i` of the scaled ODE.
///
/// The `(a + i)` argument is normalized by its initial value `d`, so that
/// `F(x(tau)) = i(0)` along every trajectory started with all vertices at
/// full degree.
pub fn integrals_f(x: &[f64], p: f64) -> Result<Vec<f64>> {
    check_state(x)?;
    let d = (x.len() - 2) as u32;
    let s = x[0] + inactive_mass(x);
    if !(s > 0.0) {
        return Err(Error::invalid(format!(
            "integrals undefined at a + i = {s}"
        )));
    }
    let u = 0.5 * (s / d as f64).ln();
    Ok(transfer_matrix(u, d, 1.0 - p).matrix.apply(&x[1..]))
}

/// Everything the `theory` command prints.
#[derive(Debug, Clone, Serialize)]
pub struct TheorySummary {
    pub d: u32,
    pub p: f64,
    pub p_star: f64,
    pub pi: f64,
    pub alpha: f64,
    pub m_over_n: f64,
    pub y_hat: Option<f64>,
    pub tau_hat: Option<f64>,
}

pub fn summary(d: u32, p: f64, m_over_n: f64) -> Result<TheorySummary> {
    // n is irrelevant to the regular formulas; any even total will do.
    let spec = DegreeSpec::Regular { n: 2, d };
    if d < 3 {
        return Err(Error::invalid(format!("degree {d} < 3")));
    }
    let b = solve_branching(&spec, p, DEFAULT_TOL)?;
    let (y_hat, tau_hat) = match y_hat_tau_hat(d, p, m_over_n) {
        Ok((y, t)) => (Some(y), Some(t)),
        Err(Error::NoRoot) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(TheorySummary {
        d,
        p,
        p_star: b.p_star,
        pi: b.pi,
        alpha: b.alpha,
        m_over_n,
        y_hat,
        tau_hat,
    })
}
