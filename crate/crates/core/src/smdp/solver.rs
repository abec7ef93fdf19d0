//! Average-reward policy iteration over any finite decision model with
//! exponential holding times.

use faer::sparse::Triplet;

use super::linalg::SparseSystem;
use crate::error::{Error, Result};

/// A finite continuous-time decision model. Actions are numbered in their
/// tie-break order.
pub trait DecisionModel: Sync {
    fn num_states(&self) -> usize;
    fn num_actions(&self) -> usize;
    /// State whose relative value is pinned to zero.
    fn reference(&self) -> usize;
    /// Fills `out` with `(target, rate)` pairs and returns the reward rate, or
    /// `None` if the action is not allowed in this state.
    fn transitions(&self, s: usize, a: usize, out: &mut Vec<(usize, f64)>) -> Option<f64>;
    fn initial_action(&self, s: usize) -> usize;
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    /// Long-run average reward.
    pub gain: f64,
    /// Relative values with the reference state at zero.
    pub values: Vec<f64>,
    /// Largest absolute residual over the value equations.
    pub residual: f64,
}

pub(crate) struct Evaluated {
    pub eval: Evaluation,
    system: SparseSystem,
}

/// Solve `g - sum_j q_ij (v_j - v_i) = R_i` with `v_ref = 0`.
///
/// Unknown `g` takes the slot of `v_ref`, so the matrix is the negated
/// generator with the reference column replaced by ones.
pub(crate) fn evaluate<M: DecisionModel + ?Sized>(model: &M, policy: &[usize]) -> Result<Evaluated> {
    let n = model.num_states();
    let r0 = model.reference();
    let mut trip = Vec::with_capacity(n * 5);
    let mut rhs = vec![0.0; n];
    let mut buf = Vec::new();
    for s in 0..n {
        buf.clear();
        let reward = model
            .transitions(s, policy[s], &mut buf)
            .ok_or_else(|| Error::Invalid(format!("action {} not allowed in state {s}", policy[s])))?;
        rhs[s] = reward;
        trip.push(Triplet::new(s, r0, 1.0));
        let mut out = 0.0;
        for &(t, q) in &buf {
            if t == s {
                continue;
            }
            out += q;
            if t != r0 {
                trip.push(Triplet::new(s, t, -q));
            }
        }
        if s != r0 {
            trip.push(Triplet::new(s, s, out));
        }
    }
    let system = SparseSystem::factor(n, trip)?;
    let (mut x, residual) = system.solve(&rhs, false)?;
    let gain = x[r0];
    x[r0] = 0.0;
    Ok(Evaluated { eval: Evaluation { gain, values: x, residual }, system })
}

impl Evaluated {
    /// Stationary distribution of the evaluated policy (zero on transient states).
    pub fn stationary(&self, reference: usize, n: usize) -> Result<Vec<f64>> {
        let mut e = vec![0.0; n];
        e[reference] = 1.0;
        let (mut pi, _) = self.system.solve(&e, true)?;
        for v in pi.iter_mut() {
            if *v < 0.0 && *v > -1e-13 {
                *v = 0.0;
            }
        }
        if pi.iter().any(|v| *v < -1e-9) {
            return Err(Error::Singular("stationary solve produced negative mass".into()));
        }
        Ok(pi)
    }
}

/// Greedy improvement step. Keeps the current action when it is a maximizer
/// up to rounding, otherwise the lowest-numbered maximizer.
pub(crate) fn improve<M: DecisionModel + ?Sized>(model: &M, policy: &[usize], eval: &Evaluation) -> (Vec<usize>, usize) {
    let mut next = policy.to_vec();
    let mut changed = 0;
    let mut buf = Vec::new();
    for s in 0..model.num_states() {
        let mut best: Option<(usize, f64, f64)> = None;
        let mut current = None;
        for a in 0..model.num_actions() {
            buf.clear();
            let Some(reward) = model.transitions(s, a, &mut buf) else { continue };
            let (mut num, mut scale, mut nu) = (reward - eval.gain, reward.abs() + eval.gain.abs(), 0.0);
            for &(t, q) in &buf {
                if t == s {
                    continue;
                }
                num += q * eval.values[t];
                scale += q * eval.values[t].abs();
                nu += q;
            }
            let test = num / nu;
            let tol = 1e-10 * scale / nu;
            if a == policy[s] {
                current = Some((test, tol));
            }
            if best.is_none_or(|(_, b, _)| test > b) {
                best = Some((a, test, tol));
            }
        }
        let (a_best, v_best, tol_best) = best.expect("every state has an allowed action");
        let keep = match current {
            Some((v, tol)) => v >= v_best - tol.max(tol_best),
            None => false,
        };
        if !keep && a_best != policy[s] {
            next[s] = a_best;
            changed += 1;
        }
    }
    (next, changed)
}

#[derive(Debug, Clone)]
pub struct PiOutcome {
    pub policy: Vec<usize>,
    pub eval: Evaluation,
    pub iterations: usize,
    /// Average reward after each value determination.
    pub history: Vec<f64>,
    pub stationary: Vec<f64>,
}

pub const DEFAULT_MAX_ITERS: usize = 1000;

pub fn policy_iteration<M: DecisionModel + ?Sized>(model: &M, initial: Vec<usize>, max_iters: usize) -> Result<PiOutcome> {
    let n = model.num_states();
    let mut policy = initial;
    let mut history = Vec::new();
    for it in 1..=max_iters {
        let ev = evaluate(model, &policy)?;
        history.push(ev.eval.gain);
        let (next, changed) = improve(model, &policy, &ev.eval);
        if changed == 0 {
            let stationary = ev.stationary(model.reference(), n)?;
            return Ok(PiOutcome { policy, eval: ev.eval, iterations: it, history, stationary });
        }
        policy = next;
    }
    Err(Error::NonConvergence(max_iters))
}

/// Initial policy from the model's own suggestion.
pub fn default_policy<M: DecisionModel + ?Sized>(model: &M) -> Vec<usize> {
    (0..model.num_states()).map(|s| model.initial_action(s)).collect()
}
