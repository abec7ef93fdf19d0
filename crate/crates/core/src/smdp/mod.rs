//! Single-site semi-Markov decision model for server allocation and its
//! solution by policy iteration.

mod linalg;
pub mod solver;
mod table;

use std::fmt;

pub use solver::{DecisionModel, Evaluation, PiOutcome, DEFAULT_MAX_ITERS};
pub use table::PolicyTable;

use crate::error::{invalid, unstable, Error, Result};
use crate::model::{Metrics, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SmdpState {
    pub n: u32,
    pub m: u32,
    pub a: u32,
}

impl SmdpState {
    pub const fn new(n: u32, m: u32, a: u32) -> Self {
        SmdpState { n, m, a }
    }
}

impl fmt::Display for SmdpState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.n, self.m, self.a)
    }
}

/// Allocation decision taken on entering a state. Declaration order is the
/// tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    /// Initiate a server allocation.
    IA,
    /// Cancel an allocation in progress.
    CA,
    /// Deallocate an allocated server.
    D,
    /// No change.
    NC,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::IA, Action::CA, Action::D, Action::NC];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::IA => "IA",
            Action::CA => "CA",
            Action::D => "D",
            Action::NC => "NC",
        }
    }

    pub fn parse(s: &str) -> Option<Action> {
        Action::ALL.into_iter().find(|a| a.name() == s)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Truncation of the state space: requests, allocated-plus-pending servers,
/// and optionally pending allocations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Caps {
    pub n: u32,
    pub total: u32,
    pub a: Option<u32>,
}

impl Caps {
    pub fn new(n: u32, total: u32, a: Option<u32>) -> Result<Self> {
        if n < 1 || total < 1 {
            return invalid(format!("caps must be positive, got cap_n={n} cap_total={total}"));
        }
        if a == Some(0) {
            return invalid("cap_a must be positive when set");
        }
        Ok(Caps { n, total, a })
    }

    /// Bound on m + a actually in force.
    pub fn servers(&self) -> u32 {
        self.total.min(self.n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub caps: Caps,
    pub states: Vec<SmdpState>,
    index: Vec<u32>,
}

const NO_STATE: u32 = u32::MAX;

impl StateSpace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    fn slot(&self, s: SmdpState) -> Option<usize> {
        let t = self.caps.servers() as usize + 1;
        if s.n > self.caps.n || s.m as usize >= t || s.a as usize >= t {
            return None;
        }
        Some((s.n as usize * t + s.m as usize) * t + s.a as usize)
    }

    pub fn index_of(&self, s: SmdpState) -> Option<usize> {
        let i = self.index[self.slot(s)?];
        (i != NO_STATE).then_some(i as usize)
    }
}

/// Enumerate the capped state space. Within each request count, states are
/// ordered by m + a and then by decreasing m.
pub fn build_state_space(caps: Caps) -> Result<StateSpace> {
    let caps = Caps::new(caps.n, caps.total, caps.a)?;
    let t = caps.servers();
    let amax = caps.a.unwrap_or(t).min(t);
    let width = t as usize + 1;
    let mut index = vec![NO_STATE; (caps.n as usize + 1) * width * width];
    let mut states = Vec::new();
    for n in 0..=caps.n {
        for sum in 0..=t {
            for a in 0..=sum.min(amax) {
                let m = sum - a;
                let slot = (n as usize * width + m as usize) * width + a as usize;
                index[slot] = states.len() as u32;
                states.push(SmdpState { n, m, a });
            }
        }
    }
    Ok(StateSpace { caps, states, index })
}

/// Outcome of applying an action: servers allocated and pending while the
/// state is occupied.
fn effective(s: SmdpState, act: Action, caps: &Caps) -> Option<(u32, u32)> {
    match act {
        Action::IA => {
            let a_ok = caps.a.is_none_or(|ca| s.a < ca);
            (s.m + s.a < caps.servers() && a_ok).then_some((s.m, s.a + 1))
        }
        Action::CA => (s.a > 0).then(|| (s.m, s.a - 1)),
        Action::D => (s.m > 0 && s.a == 0).then(|| (s.m - 1, 0)),
        Action::NC => Some((s.m, s.a)),
    }
}

/// Transition rates and reward rate for `act` in `s`, or an error if the
/// action is not allowed there.
pub fn transitions(s: SmdpState, act: Action, p: &SystemParams, caps: &Caps) -> Result<(Vec<(SmdpState, f64)>, f64)> {
    let mut out = Vec::with_capacity(3);
    match raw_transitions(s, act, p, caps, &mut out) {
        Some(r) => Ok((out, r)),
        None => invalid(format!("action {act} not allowed in state {s}")),
    }
}

fn raw_transitions(s: SmdpState, act: Action, p: &SystemParams, caps: &Caps, out: &mut Vec<(SmdpState, f64)>) -> Option<f64> {
    let (m, a) = effective(s, act, caps)?;
    if s.n < caps.n {
        out.push((SmdpState::new(s.n + 1, m, a), p.lambda));
    }
    let busy = s.n.min(m);
    if busy > 0 {
        out.push((SmdpState::new(s.n - 1, m, a), busy as f64 * p.mu));
    }
    if a > 0 {
        out.push((SmdpState::new(s.n, m + 1, a - 1), a as f64 / p.delta));
    }
    if out.is_empty() {
        return None;
    }
    Some(-(p.omega * s.n as f64 + (m + a) as f64 * p.mu))
}

/// Single-site decision model over a fixed state space.
pub struct SiteModel<'a> {
    pub params: SystemParams,
    pub space: &'a StateSpace,
}

impl DecisionModel for SiteModel<'_> {
    fn num_states(&self) -> usize {
        self.space.len()
    }

    fn num_actions(&self) -> usize {
        4
    }

    fn reference(&self) -> usize {
        0
    }

    fn transitions(&self, s: usize, a: usize, out: &mut Vec<(usize, f64)>) -> Option<f64> {
        let mut tmp = Vec::with_capacity(3);
        let r = raw_transitions(self.space.states[s], Action::ALL[a], &self.params, &self.space.caps, &mut tmp)?;
        out.extend(tmp.into_iter().map(|(t, q)| (self.space.index_of(t).expect("target inside space"), q)));
        Some(r)
    }

    fn initial_action(&self, s: usize) -> usize {
        initial_action(self.space.states[s], &self.params, &self.space.caps).index()
    }
}

fn allowed(s: SmdpState, act: Action, p: &SystemParams, caps: &Caps) -> bool {
    let mut tmp = Vec::new();
    raw_transitions(s, act, p, caps, &mut tmp).is_some()
}

/// Keep allocated-plus-pending servers at min(n, cap).
fn initial_action(s: SmdpState, p: &SystemParams, caps: &Caps) -> Action {
    let target = s.n.min(caps.servers());
    let want = if s.m + s.a < target {
        Action::IA
    } else if s.m + s.a > s.n && s.a > 0 {
        Action::CA
    } else if s.m > s.n && s.a == 0 {
        Action::D
    } else {
        Action::NC
    };
    [want, Action::NC, Action::IA, Action::CA, Action::D]
        .into_iter()
        .find(|&a| allowed(s, a, p, caps))
        .expect("some action is always allowed")
}

fn check_params(p: &SystemParams) -> Result<()> {
    p.validate()?;
    if p.delta <= 0.0 {
        return invalid("the decision model needs a positive setup delay");
    }
    Ok(())
}

/// Average reward and relative values of a fixed policy.
pub fn value_determination(table: &PolicyTable, p: &SystemParams) -> Result<Evaluation> {
    check_params(p)?;
    let space = build_state_space(table.caps)?;
    let model = SiteModel { params: *p, space: &space };
    let policy = table.indices();
    Ok(solver::evaluate(&model, &policy)?.eval)
}

/// One improvement step from the given values.
pub fn policy_improvement(eval: &Evaluation, p: &SystemParams, current: &PolicyTable) -> Result<PolicyTable> {
    check_params(p)?;
    let space = build_state_space(current.caps)?;
    let model = SiteModel { params: *p, space: &space };
    let (next, _) = solver::improve(&model, &current.indices(), eval);
    Ok(PolicyTable::from_indices(current.caps, *p, &next))
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub policy: PolicyTable,
    pub avg_reward: f64,
    pub values: Vec<f64>,
    pub iterations: usize,
    /// Average reward after each value determination of the final run.
    pub history: Vec<f64>,
    /// Time-stationary probabilities aligned with the policy's state order.
    pub stationary: Option<Vec<f64>>,
    pub residual: f64,
}

impl SolveResult {
    pub fn objective(&self) -> f64 {
        -self.avg_reward
    }

    /// R and C of the final policy from its stationary distribution.
    pub fn metrics(&self) -> Result<Metrics> {
        let pi = self.stationary.as_ref().ok_or_else(|| Error::Invalid("no stationary distribution".into()))?;
        Ok(metrics_from_stationary(&self.policy, pi))
    }
}

fn metrics_from_stationary(table: &PolicyTable, pi: &[f64]) -> Metrics {
    let p = table.params;
    let (mut en, mut eservers) = (0.0, 0.0);
    for ((s, act), w) in table.entries().zip(pi) {
        let (m, a) = effective(s, act, &table.caps).expect("table holds allowed actions");
        en += w * s.n as f64;
        eservers += w * (m + a) as f64;
    }
    Metrics::new(en / p.lambda, p.mu * eservers)
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Fixed request cap; `None` starts from a load-based guess and doubles
    /// until the objective settles.
    pub cap_n: Option<u32>,
    pub cap_total: u32,
    pub cap_a: Option<u32>,
    pub max_iters: usize,
    /// Relative objective change that ends cap doubling.
    pub cap_tolerance: f64,
}

impl SolveOptions {
    pub fn servers(cap_total: u32) -> Self {
        SolveOptions { cap_n: None, cap_total, cap_a: None, max_iters: DEFAULT_MAX_ITERS, cap_tolerance: 1e-6 }
    }

    pub fn with_cap_a(mut self, cap_a: Option<u32>) -> Self {
        self.cap_a = cap_a;
        self
    }

    pub fn with_cap_n(mut self, cap_n: u32) -> Self {
        self.cap_n = Some(cap_n);
        self
    }
}

/// Starting request cap for adaptive truncation.
pub fn initial_cap_n(p: &SystemParams, cap_total: u32) -> u32 {
    let rho = p.lambda / (cap_total as f64 * p.mu);
    let guess = if rho < 1.0 { (10.0 / (1.0 - rho)).ceil() } else { 20.0 };
    guess.clamp(20.0, 1e6) as u32
}

/// Policy iteration on a fixed state space, optionally warm-started.
pub fn solve_fixed(p: &SystemParams, caps: Caps, max_iters: usize, warm: Option<&PolicyTable>) -> Result<SolveResult> {
    check_params(p)?;
    let space = build_state_space(caps)?;
    let model = SiteModel { params: *p, space: &space };
    let initial = match warm {
        Some(w) => space
            .states
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let guess = w.get(SmdpState { n: s.n.min(w.caps.n), ..s });
                match guess {
                    Some(act) if allowed(s, act, p, &caps) => act.index(),
                    _ => model.initial_action(i),
                }
            })
            .collect(),
        None => solver::default_policy(&model),
    };
    let out = solver::policy_iteration(&model, initial, max_iters)?;
    Ok(SolveResult {
        policy: PolicyTable::from_indices(caps, *p, &out.policy),
        avg_reward: out.eval.gain,
        values: out.eval.values,
        iterations: out.iterations,
        history: out.history,
        stationary: Some(out.stationary),
        residual: out.eval.residual,
    })
}

/// Optimal policy for one site. With no request cap given, the cap is doubled
/// (warm-starting each solve) until the objective changes by less than the
/// tolerance; the result at the largest cap is returned.
pub fn solve_optimal(p: &SystemParams, opts: SolveOptions) -> Result<SolveResult> {
    check_params(p)?;
    if opts.cap_total == 0 {
        return invalid("cap_total must be at least 1");
    }
    if opts.cap_n.is_none() && p.lambda >= opts.cap_total as f64 * p.mu {
        return unstable(format!("lambda={} >= {}*mu", p.lambda, opts.cap_total));
    }
    if let Some(n) = opts.cap_n {
        return solve_fixed(p, Caps::new(n, opts.cap_total, opts.cap_a)?, opts.max_iters, None);
    }
    let mut n = initial_cap_n(p, opts.cap_total);
    let mut prev = solve_fixed(p, Caps::new(n, opts.cap_total, opts.cap_a)?, opts.max_iters, None)?;
    loop {
        n = n.checked_mul(2).ok_or(Error::NonConvergence(opts.max_iters))?;
        let next = solve_fixed(p, Caps::new(n, opts.cap_total, opts.cap_a)?, opts.max_iters, Some(&prev.policy))?;
        let change = (next.objective() - prev.objective()).abs() / next.objective().abs().max(1e-300);
        if change < opts.cap_tolerance {
            return Ok(next);
        }
        if n > 1 << 20 {
            return Err(Error::NonConvergence(opts.max_iters));
        }
        prev = next;
    }
}

/// R and C of a policy table from its stationary distribution.
pub fn stationary_metrics(table: &PolicyTable, p: &SystemParams) -> Result<Metrics> {
    check_params(p)?;
    let space = build_state_space(table.caps)?;
    let model = SiteModel { params: *p, space: &space };
    let ev = solver::evaluate(&model, &table.indices())?;
    let pi = ev.stationary(0, space.len())?;
    let mut t = table.clone();
    t.params = *p;
    Ok(metrics_from_stationary(&t, &pi))
}
