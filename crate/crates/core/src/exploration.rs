//! The cluster-growth Markov chain `X(t) = (A(t), I_0(t), .., I_d(t))`.
//!
//! `A` counts active points and `I_j` counts inactive vertices with `j`
//! unexplored points left. Each step takes one active point and pairs it
//! with a uniformly chosen point among the other `A - 1 + I` unpaired points,
//! where `I = sum_j j I_j`. Only counts are tracked; no graph is built.

use rand::Rng;

use crate::config_model::DegreeSpec;
use crate::error::{Error, Result};
use crate::theory;

/// Target number of stored states in a decimated trace.
pub const TRACE_TARGET: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainState {
    n: u64,
    t: u64,
    a: u64,
    i: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    /// The partner was itself active.
    ActiveHit,
    /// Open pair to an inactive vertex with `j` points left; the vertex activates.
    OpenInactive(u32),
    /// Closed pair to an inactive vertex with `j` points left.
    ClosedInactive(u32),
}

/// Initial state with `m` active vertices: `A = m d`, `I_d = n - m`.
pub fn init_chain(spec: &DegreeSpec, m: u64) -> Result<ChainState> {
    let (n, d) = match spec {
        DegreeSpec::Regular { n, d } => (*n as u64, *d),
        DegreeSpec::Sequence(_) => {
            return Err(Error::invalid("the exploration chain needs a regular spec"))
        }
    };
    spec.validate()?;
    if m == 0 || m > n {
        return Err(Error::invalid(format!("m = {m} outside [1, {n}]")));
    }
    let mut i = vec![0u64; d as usize + 1];
    i[d as usize] = n - m;
    Ok(ChainState {
        n,
        t: 0,
        a: m * d as u64,
        i,
    })
}

impl ChainState {
    /// Arbitrary state; checks that the vertex counts fit in `n`.
    pub fn from_counts(n: u64, t: u64, a: u64, i: Vec<u64>) -> Result<Self> {
        if i.len() < 2 {
            return Err(Error::invalid("need counts I_0..I_d with d >= 1"));
        }
        if i.iter().sum::<u64>() > n {
            return Err(Error::invalid("more inactive vertices than n"));
        }
        Ok(ChainState { n, t, a, i })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Active point count `A`.
    pub fn active_points(&self) -> u64 {
        self.a
    }

    /// `I_0..I_d`.
    pub fn inactive(&self) -> &[u64] {
        &self.i
    }

    pub fn d(&self) -> u32 {
        (self.i.len() - 1) as u32
    }

    /// `I = sum_j j I_j`.
    pub fn inactive_points(&self) -> u64 {
        self.i.iter().enumerate().map(|(j, &c)| j as u64 * c).sum()
    }

    pub fn inactive_vertices(&self) -> u64 {
        self.i.iter().sum()
    }

    /// Vertices activated so far, `n - sum_j I_j`.
    pub fn activated(&self) -> u64 {
        self.n - self.inactive_vertices()
    }

    pub fn is_absorbed(&self) -> bool {
        self.a == 0
    }

    /// `X / n` as `(a, i_0, .., i_d)`.
    pub fn scaled(&self) -> Vec<f64> {
        let n = self.n as f64;
        std::iter::once(self.a as f64 / n)
            .chain(self.i.iter().map(|&c| c as f64 / n))
            .collect()
    }

    fn denominator(&self) -> Result<u64> {
        if self.a == 0 {
            return Err(Error::Absorbed);
        }
        let w = self.a - 1 + self.inactive_points();
        if w == 0 {
            // A = 1 and I = 0 has an odd number of unpaired points.
            return Err(Error::invalid("state with a single unpaired point"));
        }
        Ok(w)
    }

    /// Transition probabilities in the fixed order: active hit, open
    /// inactive `j = 1..d`, closed inactive `j = 1..d`.
    pub fn transitions(&self, p: f64) -> Result<Vec<(Event, f64)>> {
        let w = self.denominator()? as f64;
        let q = 1.0 - p;
        let d = self.d();
        let mut out = Vec::with_capacity(2 * d as usize + 1);
        out.push((Event::ActiveHit, (self.a - 1) as f64 / w));
        for j in 1..=d {
            out.push((
                Event::OpenInactive(j),
                j as f64 * self.i[j as usize] as f64 * p / w,
            ));
        }
        for j in 1..=d {
            out.push((
                Event::ClosedInactive(j),
                j as f64 * self.i[j as usize] as f64 * q / w,
            ));
        }
        Ok(out)
    }

    /// Samples one transition from a single uniform draw and applies it.
    pub fn step<R: Rng + ?Sized>(&mut self, p: f64, rng: &mut R) -> Result<Event> {
        let w = self.denominator()? as f64;
        let q = 1.0 - p;
        let d = self.d();
        let mut u = rng.gen::<f64>() * w;

        let hit = (self.a - 1) as f64;
        let event = 'pick: {
            if u < hit {
                break 'pick Event::ActiveHit;
            }
            u -= hit;
            let mut last = Event::ActiveHit;
            for (open, prob) in [(true, p), (false, q)] {
                for j in 1..=d {
                    let wt = j as f64 * self.i[j as usize] as f64 * prob;
                    if wt <= 0.0 {
                        continue;
                    }
                    let ev = if open {
                        Event::OpenInactive(j)
                    } else {
                        Event::ClosedInactive(j)
                    };
                    if u < wt {
                        break 'pick ev;
                    }
                    u -= wt;
                    last = ev;
                }
            }
            // Rounding pushed u past the total: take the last live branch.
            last
        };
        self.apply(event);
        Ok(event)
    }

    fn apply(&mut self, event: Event) {
        match event {
            Event::ActiveHit => self.a -= 2,
            Event::OpenInactive(j) => {
                self.a = self.a + j as u64 - 2;
                self.i[j as usize] -= 1;
            }
            Event::ClosedInactive(j) => {
                self.a -= 1;
                self.i[j as usize] -= 1;
                self.i[j as usize - 1] += 1;
            }
        }
        self.t += 1;
    }

    /// Exact one-step expected change `E[X(t+1) | X(t)] - X(t)` as
    /// `(dA, dI_0, .., dI_d)`.
    pub fn drift(&self, p: f64) -> Result<Vec<f64>> {
        let w = self.denominator()? as f64;
        let q = 1.0 - p;
        let d = self.d() as usize;
        let i: Vec<f64> = self.i.iter().map(|&c| c as f64).collect();
        let mass: f64 = i.iter().enumerate().map(|(j, v)| j as f64 * v).sum();
        let weighted: f64 = i
            .iter()
            .enumerate()
            .map(|(j, v)| j as f64 * v * (j as f64 - 2.0))
            .sum();
        let mut out = Vec::with_capacity(d + 2);
        out.push((-2.0 * (self.a - 1) as f64 + p * weighted - q * mass) / w);
        for j in 0..=d {
            let up = if j < d {
                q * (j + 1) as f64 * i[j + 1]
            } else {
                0.0
            };
            out.push((up - j as f64 * i[j]) / w);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StopPolicy {
    /// Also stop once `I(t) < n q^d / 2`.
    pub inactive_floor: bool,
    pub max_steps: Option<u64>,
    /// Keep a decimated trace of visited states.
    pub trace: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Extinct,
    InactiveFloor,
    StepCap,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Extinct => "extinct",
            StopReason::InactiveFloor => "inactive_floor",
            StopReason::StepCap => "step_cap",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainRun {
    pub final_state: ChainState,
    pub stop_reason: StopReason,
    /// Decimated states, first and last included; `None` unless requested.
    pub trace: Option<Vec<ChainState>>,
}

impl ChainRun {
    /// Stopping step `T`.
    pub fn steps(&self) -> u64 {
        self.final_state.t
    }

    /// `C_n = n - sum_j I_j(T)`.
    pub fn component_size(&self) -> u64 {
        self.final_state.activated()
    }

    /// CSV row `seed,n,d,p,m,T,C_n,stop_reason`.
    pub fn csv_row(&self, seed: u64, p: f64, m: u64) -> String {
        format!(
            "{seed},{},{},{p},{m},{},{},{}",
            self.final_state.n,
            self.final_state.d(),
            self.steps(),
            self.component_size(),
            self.stop_reason.as_str()
        )
    }
}

pub const CHAIN_CSV_HEADER: &str = "seed,n,d,p,m,T,C_n,stop_reason";

/// Keeps states at multiples of a power-of-two stride, doubling the stride
/// whenever the buffer reaches twice the target.
struct TraceBuffer {
    stride: u64,
    states: Vec<ChainState>,
}

impl TraceBuffer {
    fn new() -> Self {
        TraceBuffer {
            stride: 1,
            states: Vec::with_capacity(2 * TRACE_TARGET + 1),
        }
    }

    fn offer(&mut self, s: &ChainState) {
        if s.t % self.stride != 0 {
            return;
        }
        self.states.push(s.clone());
        if self.states.len() >= 2 * TRACE_TARGET {
            self.stride *= 2;
            let stride = self.stride;
            self.states.retain(|x| x.t % stride == 0);
        }
    }

    fn finish(mut self, last: &ChainState) -> Vec<ChainState> {
        if self.states.last().map(|s| s.t) != Some(last.t) {
            self.states.push(last.clone());
        }
        self.states
    }
}

/// Steps the chain until the stop policy triggers. Default stop: `A = 0`.
pub fn run<R: Rng + ?Sized>(
    mut state: ChainState,
    p: f64,
    rng: &mut R,
    policy: StopPolicy,
) -> Result<ChainRun> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
    }
    let floor = state.n as f64 * (1.0 - p).powi(state.d() as i32) / 2.0;
    let mut trace = policy.trace.then(TraceBuffer::new);
    let reason = loop {
        if let Some(tr) = trace.as_mut() {
            tr.offer(&state);
        }
        if state.a == 0 {
            break StopReason::Extinct;
        }
        if policy.inactive_floor && (state.inactive_points() as f64) < floor {
            break StopReason::InactiveFloor;
        }
        if policy.max_steps.is_some_and(|cap| state.t >= cap) {
            break StopReason::StepCap;
        }
        state.step(p, rng)?;
    };
    let trace = trace.map(|tr| tr.finish(&state));
    Ok(ChainRun {
        final_state: state,
        stop_reason: reason,
        trace,
    })
}

/// Trace as CSV `t,A,I_0,..,I_d`.
pub fn trace_csv(trace: &[ChainState]) -> String {
    let mut out = String::from("t,A");
    if let Some(first) = trace.first() {
        for j in 0..first.i.len() {
            out.push_str(&format!(",I_{j}"));
        }
    }
    out.push('\n');
    for s in trace {
        out.push_str(&format!("{},{}", s.t, s.a));
        for c in &s.i {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
    }
    out
}

/// Largest sup-norm gap between `X(t)/n` and the closed-form trajectory
/// `x(t/n)` over the given states.
pub fn max_trajectory_deviation(trace: &[ChainState], p: f64, m: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for s in trace {
        let d = s.d();
        let tau = s.t as f64 / s.n as f64;
        if tau >= d as f64 / 2.0 {
            continue;
        }
        let x = theory::trajectory(tau, d, p, m as f64 / s.n as f64)?.state();
        let gap = s
            .scaled()
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(gap);
    }
    Ok(worst)
}

/// Largest change `|F_j(X(t)/n) - F_j(X(0)/n)|` over the given states and
/// all `j`.
pub fn max_integral_drift(trace: &[ChainState], p: f64) -> Result<f64> {
    let Some(first) = trace.first() else {
        return Ok(0.0);
    };
    let f0 = theory::integrals_f(&first.scaled(), p)?;
    let mut worst = 0.0f64;
    for s in trace {
        let x = s.scaled();
        if x[0]
            + x[1..]
                .iter()
                .enumerate()
                .map(|(j, v)| j as f64 * v)
                .sum::<f64>()
            <= 0.0
        {
            continue;
        }
        let f = theory::integrals_f(&x, p)?;
        worst = f
            .iter()
            .zip(&f0)
            .map(|(a, b)| (a - b).abs())
            .fold(worst, f64::max);
    }
    Ok(worst)
}
