//! Truncated per-state probabilities from the closed forms, for diagnostics
//! and balance checks.

use super::dual::{BothDynamicSums, OneAlwaysMasses};
use super::single::statedep_weights;
use super::unlimited::reactive_weights;
use super::dual::char_roots;
use crate::error::{invalid, unstable, Result};
use crate::model::{HoldTimer, PolicySpec, SystemParams};

pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-9;

const MAX_LEVELS: u32 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateLabel {
    /// No requests, no server.
    Idle,
    /// No requests, server held; stage index for Erlang holding (0 = lumped).
    Holding(u32),
    /// Requests accumulating before a batch triggers allocation.
    Waiting(u32),
    /// Requests present, allocation in progress, nothing serving.
    Setup(u32),
    /// Single server active.
    Active(u32),
    /// One server active (dual systems).
    Base(u32),
    /// One server active and the second one being allocated.
    BasePlus(u32),
    /// Both servers active.
    Extra(u32),
    /// (waiting, in service) for the unlimited policies; the proactive policy
    /// uses (requests beyond busy servers, busy servers).
    Pair(u32, u32),
}

#[derive(Debug, Clone)]
pub struct StateProbVector {
    pub entries: Vec<(StateLabel, f64)>,
    pub tail_tolerance: f64,
}

impl StateProbVector {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    pub fn get(&self, label: StateLabel) -> Option<f64> {
        self.entries.iter().find(|(l, _)| *l == label).map(|(_, p)| *p)
    }

    pub fn to_map(&self) -> std::collections::HashMap<StateLabel, f64> {
        self.entries.iter().copied().collect()
    }
}

/// Truncated stationary distribution of an analytically solved policy.
pub fn state_probabilities(policy: &PolicySpec, p: &SystemParams, eps: f64) -> Result<StateProbVector> {
    p.validate()?;
    policy.validate()?;
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("tail tolerance must lie in (0,1), got {eps}"));
    }
    let entries = match policy {
        PolicySpec::HoldOn { k, t } => {
            single_levels(p, &[p.mu], *k, *t, eps)?
        }
        PolicySpec::StateDepRates { rates, k, t, .. } => single_levels(p, rates, *k, *t, eps)?,
        PolicySpec::Batching { b } => batching_levels(p, *b, eps)?,
        PolicySpec::DualOneAlways { l, h, mu1, mu2 } => one_always_levels(p, *mu1, *mu2, *l, *h, eps)?,
        PolicySpec::DualBothDynamic => both_dynamic_levels(p, eps)?,
        PolicySpec::ReactiveUnlimited { s } => reactive_pairs(p, *s, eps)?,
        PolicySpec::ProactiveUnlimited => proactive_pairs(p, eps)?,
        other => return invalid(format!("no per-state closed form for {other:?}")),
    };
    Ok(StateProbVector { entries, tail_tolerance: eps })
}

fn single_levels(p: &SystemParams, rates: &[f64], k: HoldTimer, t: f64, eps: f64) -> Result<Vec<(StateLabel, f64)>> {
    let top = *rates.last().unwrap();
    if p.lambda >= top {
        return unstable(format!("lambda={} >= {top}", p.lambda));
    }
    if t.is_infinite() {
        return invalid("per-state output needs a finite holding time");
    }
    let w = statedep_weights(p, rates, k, t);
    let p0 = 1.0 / (w.head.iter().sum::<f64>() + w.tail_sum);
    let lam = p.lambda;
    let mut out = vec![(StateLabel::Idle, p0)];
    if t > 0.0 {
        match k {
            HoldTimer::Erlang(stages) => {
                let kt = stages as f64 / t;
                let grow = (lam + kt) / kt;
                let mut v = p0 * lam / kt;
                for j in (1..=stages).rev() {
                    out.push((StateLabel::Holding(j), v));
                    v *= grow;
                }
            }
            HoldTimer::Deterministic => out.push((StateLabel::Holding(0), (w.x - 1.0) * p0)),
        }
    }
    let mut cum: f64 = out.iter().map(|e| e.1).sum();
    let mut level = w.x * p0;
    let mut sp = 1.0;
    for i in 1..MAX_LEVELS {
        let rate = rates[(i as usize).min(rates.len()) - 1];
        let active = lam * level / rate;
        sp *= w.sigma;
        let setup = p0 * sp;
        if setup > 0.0 {
            out.push((StateLabel::Setup(i), setup));
        }
        out.push((StateLabel::Active(i), active));
        level = setup + active;
        cum += level;
        if 1.0 - cum < eps {
            break;
        }
    }
    Ok(out)
}

fn batching_levels(p: &SystemParams, b: u32, eps: f64) -> Result<Vec<(StateLabel, f64)>> {
    if p.lambda >= p.mu {
        return unstable(format!("lambda={} >= mu={}", p.lambda, p.mu));
    }
    let ld = p.lambda * p.delta;
    let sigma = ld / (ld + 1.0);
    let rho = p.lambda / p.mu;
    let w = (1.0 - rho) / (b as f64 + ld);
    let mut out = vec![(StateLabel::Waiting(0), w)];
    let mut cum = w;
    let mut level = w;
    let mut setup = 0.0;
    for i in 1..MAX_LEVELS {
        let active = rho * level;
        let waiting = if i < b { w } else { 0.0 };
        if waiting > 0.0 {
            out.push((StateLabel::Waiting(i), waiting));
        }
        if i >= b && p.delta > 0.0 {
            setup = if i == b { w * sigma } else { setup * sigma };
            out.push((StateLabel::Setup(i), setup));
        }
        let s = if i >= b { setup } else { 0.0 };
        out.push((StateLabel::Active(i), active));
        level = waiting + s + active;
        cum += level;
        if i >= b && 1.0 - cum < eps {
            break;
        }
    }
    Ok(out)
}

fn one_always_levels(p: &SystemParams, mu1: f64, mu2: f64, l: u32, h: u32, eps: f64) -> Result<Vec<(StateLabel, f64)>> {
    super::dual::dual_one_always(p, mu1, mu2, l, h)?;
    let m = OneAlwaysMasses::solve(p, mu1, mu2, l, h);
    let (total, _, _) = m.totals(p);
    let norm = 1.0 / total;
    let (lu, hu) = (l as usize, h as usize);
    let mut out = Vec::new();
    let mut cum = 0.0;
    for (i, v) in m.base.iter().enumerate() {
        out.push((StateLabel::Base(i as u32), v * norm));
        cum += v * norm;
    }
    let instant = p.delta == 0.0;
    for idx in 0..=(hu - lu) {
        let i = (lu + idx) as u32;
        if !instant {
            out.push((StateLabel::BasePlus(i), m.setup[idx] * norm));
            cum += m.setup[idx] * norm;
        }
        out.push((StateLabel::Extra(i), m.extra[idx] * norm));
        cum += m.extra[idx] * norm;
    }
    let mut setup = m.setup[hu - lu];
    let mut extra = m.extra[hu - lu];
    for i in (h + 1)..MAX_LEVELS {
        if instant {
            extra *= m.rho2;
        } else {
            setup *= m.r1;
            extra = m.rho2 * extra + m.kappa * m.r1.powi((i - h) as i32);
            out.push((StateLabel::BasePlus(i), setup * norm));
            cum += setup * norm;
        }
        out.push((StateLabel::Extra(i), extra * norm));
        cum += extra * norm;
        if 1.0 - cum < eps {
            break;
        }
    }
    Ok(out)
}

fn both_dynamic_levels(p: &SystemParams, eps: f64) -> Result<Vec<(StateLabel, f64)>> {
    super::dual::dual_both_dynamic(p)?;
    if p.delta == 0.0 {
        return invalid("per-state output needs a positive setup delay");
    }
    let s = BothDynamicSums::new(p);
    let p0 = 1.0 / (1.0 + s.sd + s.sb + s.se);
    let (lam, mu) = (p.lambda, p.mu);
    let mut out = vec![(StateLabel::Idle, p0)];
    let mut cum = p0;
    let mut prev = (0.0, 0.0, 0.0);
    for i in 1..MAX_LEVELS {
        let d = p0 * s.sigma * s.q.powi(i as i32 - 1);
        let b = p0 * s.one_active(p, i);
        let e = if i >= 2 { ((lam * (prev.0 + prev.1 + prev.2) - mu * b) / (2.0 * mu)).max(0.0) } else { 0.0 };
        out.push((StateLabel::Setup(i), d));
        out.push((StateLabel::Base(i), b));
        if i >= 2 {
            out.push((StateLabel::Extra(i), e));
        }
        prev = (d, b, e);
        cum += d + b + e;
        if 1.0 - cum < eps {
            break;
        }
    }
    Ok(out)
}

fn poisson_terms(mean: f64, eps: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut term = (-mean).exp();
    let mut cum = 0.0;
    let mut k = 0.0;
    loop {
        v.push(term);
        cum += term;
        k += 1.0;
        if 1.0 - cum < eps && k > mean {
            break;
        }
        term *= mean / k;
    }
    v
}

fn pairs(waiting: &[f64], service: &[f64]) -> Vec<(StateLabel, f64)> {
    let mut out = Vec::with_capacity(waiting.len() * service.len());
    for (i, pi) in waiting.iter().enumerate() {
        for (k, pk) in service.iter().enumerate() {
            out.push((StateLabel::Pair(i as u32, k as u32), pi * pk));
        }
    }
    out
}

fn reactive_pairs(p: &SystemParams, s: u32, eps: f64) -> Result<Vec<(StateLabel, f64)>> {
    if p.delta == 0.0 {
        return Ok(pairs(&[1.0], &poisson_terms(p.lambda / p.mu, eps / 2.0)));
    }
    let (w, ws, ratio) = reactive_weights(p, s);
    let total: f64 = w.iter().sum::<f64>() + ws / (1.0 - ratio);
    let mut waiting: Vec<f64> = w.iter().map(|v| v / total).collect();
    let mut cum: f64 = waiting.iter().sum();
    let mut v = ws / total;
    while 1.0 - cum >= eps / 2.0 && waiting.len() < MAX_LEVELS as usize {
        waiting.push(v);
        cum += v;
        v *= ratio;
    }
    Ok(pairs(&waiting, &poisson_terms(p.lambda / p.mu, eps / 2.0)))
}

fn proactive_pairs(p: &SystemParams, eps: f64) -> Result<Vec<(StateLabel, f64)>> {
    if p.delta == 0.0 {
        return invalid("per-state output needs a positive setup delay");
    }
    let r = char_roots(p.lambda, p.mu, p.delta).r1;
    let mut waiting = Vec::new();
    let mut v = 1.0 - r;
    let mut cum = 0.0;
    while 1.0 - cum >= eps / 2.0 && waiting.len() < MAX_LEVELS as usize {
        waiting.push(v);
        cum += v;
        v *= r;
    }
    let mean = r / (p.delta * p.mu * (1.0 - r));
    Ok(pairs(&waiting, &poisson_terms(mean, eps / 2.0)))
}
