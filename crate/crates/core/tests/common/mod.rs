//! Reference chains built directly from each policy's transition rules and
//! solved with a dense LU, independent of the library's closed forms and of
//! its sparse solver.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use dynalloc::analytic::StateLabel;
use dynalloc::Metrics;
use nalgebra::{DMatrix, DVector};

pub struct Chain<S> {
    pub states: Vec<S>,
    pub index: HashMap<S, usize>,
    /// (from, to, rate)
    pub rates: Vec<(usize, usize, f64)>,
}

impl<S: Hash + Eq + Clone> Chain<S> {
    /// Breadth-first exploration from `start`; transitions into states that
    /// fail `keep` are dropped, which truncates the chain.
    pub fn explore(start: S, next: impl Fn(&S) -> Vec<(S, f64)>, keep: impl Fn(&S) -> bool) -> Self {
        let mut states = vec![start.clone()];
        let mut index = HashMap::from([(start, 0usize)]);
        let mut rates = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let s = states[i].clone();
            for (t, q) in next(&s) {
                if q <= 0.0 || !keep(&t) {
                    continue;
                }
                let j = *index.entry(t.clone()).or_insert_with(|| {
                    states.push(t.clone());
                    queue.push_back(states.len() - 1);
                    states.len() - 1
                });
                if j != i {
                    rates.push((i, j, q));
                }
            }
        }
        Chain { states, index, rates }
    }

    pub fn stationary(&self) -> Vec<f64> {
        let n = self.states.len();
        let mut a = DMatrix::<f64>::zeros(n, n);
        for &(i, j, q) in &self.rates {
            a[(j, i)] += q;
            a[(i, i)] -= q;
        }
        for c in 0..n {
            a[(0, c)] = 1.0;
        }
        let mut b = DVector::<f64>::zeros(n);
        b[0] = 1.0;
        let x = a.lu().solve(&b).expect("reference chain is irreducible");
        x.iter().copied().collect()
    }

    pub fn expect(&self, pi: &[f64], f: impl Fn(&S) -> f64) -> f64 {
        self.states.iter().zip(pi).map(|(s, p)| f(s) * p).sum()
    }

    /// Largest `|inflow - outflow|` over states whose outgoing transitions were
    /// not truncated, given probabilities from elsewhere.
    pub fn balance_residual(&self, probs: &HashMap<S, f64>, interior: impl Fn(&S) -> bool) -> f64 {
        let n = self.states.len();
        let mut net = vec![0.0; n];
        let p: Vec<f64> = self.states.iter().map(|s| probs.get(s).copied().unwrap_or(0.0)).collect();
        for &(i, j, q) in &self.rates {
            net[i] -= p[i] * q;
            net[j] += p[i] * q;
        }
        self.states.iter().zip(&net).filter(|(s, _)| interior(s)).map(|(_, r)| r.abs()).fold(0.0, f64::max)
    }
}

use StateLabel::*;

pub fn level(s: &StateLabel) -> u32 {
    match *s {
        Idle | Holding(_) => 0,
        Waiting(i) | Setup(i) | Active(i) | Base(i) | BasePlus(i) | Extra(i) => i,
        Pair(i, k) => i + k,
    }
}

/// Single dynamically allocated server with service rate `rates[min(n,c)-1]`,
/// an Erlang hold of `stages` stages and mean `t` (no hold when `t == 0`), and
/// allocation triggered once `b` requests are present.
pub fn single_chain(lambda: f64, delta: f64, rates: &[f64], b: u32, stages: u32, t: f64, cap: u32) -> Chain<StateLabel> {
    let rate = |n: u32| rates[(n as usize).min(rates.len()) - 1];
    let after_empty = if t > 0.0 { Holding(1) } else if b > 1 { Waiting(0) } else { Idle };
    let start = if b > 1 { Waiting(0) } else { Idle };
    let arrive_off = |n: u32| {
        if n + 1 < b {
            Waiting(n + 1)
        } else if delta > 0.0 {
            Setup(n + 1)
        } else {
            Active(n + 1)
        }
    };
    Chain::explore(
        start,
        |s| match *s {
            Idle => vec![(arrive_off(0), lambda)],
            Waiting(n) => vec![(arrive_off(n), lambda)],
            Holding(j) => {
                let next = if j == stages { if b > 1 { Waiting(0) } else { Idle } } else { Holding(j + 1) };
                vec![(Active(1), lambda), (next, stages as f64 / t)]
            }
            Setup(n) => vec![(Setup(n + 1), lambda), (Active(n), 1.0 / delta)],
            Active(n) => {
                let down = if n == 1 { after_empty } else { Active(n - 1) };
                vec![(Active(n + 1), lambda), (down, rate(n))]
            }
            _ => unreachable!(),
        },
        |s| level(s) <= cap,
    )
}

pub fn single_metrics(chain: &Chain<StateLabel>, lambda: f64, top_rate: f64) -> Metrics {
    let pi = chain.stationary();
    let en = chain.expect(&pi, |s| level(s) as f64);
    let on = chain.expect(&pi, |s| if matches!(s, Idle | Waiting(_)) { 0.0 } else { 1.0 });
    Metrics::new(en / lambda, top_rate * on)
}

/// One server (rate `mu1`) always on; extra capacity (total rate `mu2`)
/// requested at `h` requests and released below `l`.
pub fn one_always_chain(lambda: f64, delta: f64, mu1: f64, mu2: f64, l: u32, h: u32, cap: u32) -> Chain<StateLabel> {
    Chain::explore(
        Base(0),
        |s| match *s {
            Base(i) => {
                let up = if i + 1 >= h { if delta > 0.0 { BasePlus(i + 1) } else { Extra(i + 1) } } else { Base(i + 1) };
                let mut v = vec![(up, lambda)];
                if i > 0 {
                    v.push((Base(i - 1), mu1));
                }
                v
            }
            BasePlus(i) => {
                let down = if i > l { BasePlus(i - 1) } else { Base(i - 1) };
                vec![(BasePlus(i + 1), lambda), (down, mu1), (Extra(i), 1.0 / delta)]
            }
            Extra(i) => {
                let down = if i > l { Extra(i - 1) } else { Base(i - 1) };
                vec![(Extra(i + 1), lambda), (down, mu2)]
            }
            _ => unreachable!(),
        },
        |s| level(s) <= cap,
    )
}

pub fn one_always_metrics(chain: &Chain<StateLabel>, lambda: f64, mu1: f64, mu2: f64) -> Metrics {
    let pi = chain.stationary();
    let en = chain.expect(&pi, |s| level(s) as f64);
    let c = chain.expect(&pi, |s| if matches!(s, Base(_)) { mu1 } else { mu2 });
    Metrics::new(en / lambda, c)
}

/// Two servers, each allocated exactly while it would be busy.
pub fn both_dynamic_chain(lambda: f64, mu: f64, delta: f64, cap: u32) -> Chain<StateLabel> {
    Chain::explore(
        Idle,
        |s| match *s {
            Idle => vec![(Setup(1), lambda)],
            Setup(i) => {
                let setups = i.min(2) as f64;
                vec![(Setup(i + 1), lambda), (Base(i), setups / delta)]
            }
            Base(i) => {
                let down = if i == 1 { Idle } else { Base(i - 1) };
                let mut v = vec![(Base(i + 1), lambda), (down, mu)];
                if i >= 2 {
                    v.push((Extra(i), 1.0 / delta));
                }
                v
            }
            Extra(i) => {
                let down = if i == 2 { Base(1) } else { Extra(i - 1) };
                vec![(Extra(i + 1), lambda), (down, 2.0 * mu)]
            }
            _ => unreachable!(),
        },
        |s| level(s) <= cap,
    )
}

pub fn both_dynamic_metrics(chain: &Chain<StateLabel>, lambda: f64, mu: f64) -> Metrics {
    let pi = chain.stationary();
    let en = chain.expect(&pi, |s| level(s) as f64);
    let servers = chain.expect(&pi, |s| match s {
        Idle => 0.0,
        _ => level(s).min(2) as f64,
    });
    Metrics::new(en / lambda, mu * servers)
}

/// Reactive unlimited servers, states `(waiting, in service)`.
pub fn reactive_chain(lambda: f64, mu: f64, delta: f64, s_max: u32, cap_i: u32, cap_k: u32) -> Chain<StateLabel> {
    Chain::explore(
        Pair(0, 0),
        |st| {
            let Pair(i, k) = *st else { unreachable!() };
            let mut v = vec![(Pair(i + 1, k), lambda)];
            if i > 0 {
                v.push((Pair(i - 1, k + 1), i.min(s_max) as f64 / delta));
                if k > 0 {
                    // freed server picks up a waiting request
                    v.push((Pair(i - 1, k), k as f64 * mu));
                }
            } else if k > 0 {
                v.push((Pair(0, k - 1), k as f64 * mu));
            }
            v
        },
        |st| matches!(*st, Pair(i, k) if i <= cap_i && k <= cap_k),
    )
}

pub fn reactive_metrics(chain: &Chain<StateLabel>, lambda: f64, mu: f64, s_max: u32) -> Metrics {
    let pi = chain.stationary();
    let en = chain.expect(&pi, |s| level(s) as f64);
    let servers = chain.expect(&pi, |s| match *s {
        Pair(i, k) => (k + i.min(s_max)) as f64,
        _ => unreachable!(),
    });
    Metrics::new(en / lambda, mu * servers)
}

/// Proactive unlimited servers: `Pair(i, k)` has `k + 1` active servers and
/// `k + i` requests; a setup is in flight whenever `i > 0`.
pub fn proactive_chain(lambda: f64, mu: f64, delta: f64, cap_i: u32, cap_k: u32) -> Chain<StateLabel> {
    Chain::explore(
        Pair(0, 0),
        |st| {
            let Pair(i, k) = *st else { unreachable!() };
            let mut v = vec![(Pair(i + 1, k), lambda)];
            if i > 0 {
                v.push((Pair(i - 1, k + 1), 1.0 / delta));
                v.push((Pair(i - 1, k), (k + 1) as f64 * mu));
            } else if k > 0 {
                v.push((Pair(0, k - 1), k as f64 * mu));
            }
            v
        },
        |st| matches!(*st, Pair(i, k) if i <= cap_i && k <= cap_k),
    )
}

pub fn proactive_metrics(chain: &Chain<StateLabel>, lambda: f64, mu: f64) -> Metrics {
    let pi = chain.stationary();
    let en = chain.expect(&pi, |s| level(s) as f64);
    let servers = chain.expect(&pi, |s| match *s {
        Pair(i, k) => (k + 1 + u32::from(i > 0)) as f64,
        _ => unreachable!(),
    });
    Metrics::new(en / lambda, mu * servers)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[track_caller]
pub fn assert_close(a: f64, b: f64, tol: f64) {
    assert!(rel(a, b) <= tol, "{a} vs {b}: rel err {} > {tol}", rel(a, b));
}
