//! Two sites where site 1 may forward requests to site 2: the best fixed
//! split of site-1 traffic, and the jointly optimal state-dependent
//! provisioning and routing policy.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use rayon::prelude::*;

use crate::error::{invalid, unstable, Error, Result};
use crate::model::{Metrics, SystemParams};
use crate::smdp::solver::{self, DecisionModel};
use crate::smdp::{self, SolveOptions, DEFAULT_MAX_ITERS};

pub const DEFAULT_TWO_SITE_CAP: u32 = 60;
pub const DEFAULT_GRANULARITY: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSiteParams {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Mean time to return a response from site 2 to site 1.
    pub d_r: f64,
    pub mu: f64,
    pub delta: f64,
    pub omega: f64,
    pub servers1: u32,
    pub servers2: u32,
}

impl TwoSiteParams {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v >= 0.0 && v.is_finite();
        if !(ok(self.lambda1) && ok(self.lambda2)) || self.lambda1 + self.lambda2 <= 0.0 {
            return invalid("arrival rates must be nonnegative with a positive total");
        }
        if !(self.mu > 0.0 && self.mu.is_finite() && self.delta > 0.0 && self.delta.is_finite()) {
            return invalid("mu and delta must be positive and finite");
        }
        if !(ok(self.omega) && ok(self.d_r)) {
            return invalid("omega and d_r must be nonnegative and finite");
        }
        if self.servers1 + self.servers2 == 0 {
            return invalid("at least one site needs servers");
        }
        let cap = (self.servers1 + self.servers2) as f64 * self.mu;
        if self.lambda1 + self.lambda2 >= cap {
            return unstable(format!("total arrival rate {} >= capacity {cap}", self.lambda1 + self.lambda2));
        }
        Ok(())
    }

    /// Single-site parameters at the given arrival rate.
    pub fn site(&self, lambda: f64) -> SystemParams {
        SystemParams { lambda, mu: self.mu, delta: self.delta, omega: self.omega }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TwoSiteState {
    pub n1: u32,
    pub m1: u32,
    pub a1: u32,
    pub n2: u32,
    pub m2: u32,
    pub a2: u32,
}

impl fmt::Display for TwoSiteState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{},{},{})", self.n1, self.m1, self.a1, self.n2, self.m2, self.a2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SiteAct {
    Ia,
    Ca,
    D,
    Nc,
}

/// Provisioning part of a two-site action, in tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provision {
    Ia1,
    Ia2,
    Ia1Ia2,
    Ca1,
    Ca2,
    Ca1Ca2,
    D1,
    D2,
    Ia1Ca2,
    Ia2Ca1,
    Ia1D2,
    Ia2D1,
    Nc,
}

impl Provision {
    pub const ALL: [Provision; 13] = [
        Provision::Ia1,
        Provision::Ia2,
        Provision::Ia1Ia2,
        Provision::Ca1,
        Provision::Ca2,
        Provision::Ca1Ca2,
        Provision::D1,
        Provision::D2,
        Provision::Ia1Ca2,
        Provision::Ia2Ca1,
        Provision::Ia1D2,
        Provision::Ia2D1,
        Provision::Nc,
    ];

    fn parts(self) -> (SiteAct, SiteAct) {
        use SiteAct::*;
        match self {
            Provision::Ia1 => (Ia, Nc),
            Provision::Ia2 => (Nc, Ia),
            Provision::Ia1Ia2 => (Ia, Ia),
            Provision::Ca1 => (Ca, Nc),
            Provision::Ca2 => (Nc, Ca),
            Provision::Ca1Ca2 => (Ca, Ca),
            Provision::D1 => (D, Nc),
            Provision::D2 => (Nc, D),
            Provision::Ia1Ca2 => (Ia, Ca),
            Provision::Ia2Ca1 => (Ca, Ia),
            Provision::Ia1D2 => (Ia, D),
            Provision::Ia2D1 => (D, Ia),
            Provision::Nc => (Nc, Nc),
        }
    }

    fn from_parts(parts: (SiteAct, SiteAct)) -> Option<Provision> {
        Provision::ALL.into_iter().find(|p| p.parts() == parts)
    }

    pub fn name(self) -> &'static str {
        match self {
            Provision::Ia1 => "IA1",
            Provision::Ia2 => "IA2",
            Provision::Ia1Ia2 => "IA1/IA2",
            Provision::Ca1 => "CA1",
            Provision::Ca2 => "CA2",
            Provision::Ca1Ca2 => "CA1/CA2",
            Provision::D1 => "D1",
            Provision::D2 => "D2",
            Provision::Ia1Ca2 => "IA1/CA2",
            Provision::Ia2Ca1 => "IA2/CA1",
            Provision::Ia1D2 => "IA1/D2",
            Provision::Ia2D1 => "IA2/D1",
            Provision::Nc => "NC",
        }
    }

    pub fn parse(s: &str) -> Option<Provision> {
        Provision::ALL.into_iter().find(|p| p.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Route {
    /// Site-1 arrivals stay local.
    Local,
    /// Site-1 arrivals are sent to site 2.
    ToSite2,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Local => "RL",
            Route::ToSite2 => "R12",
        }
    }

    pub fn parse(s: &str) -> Option<Route> {
        match s {
            "RL" => Some(Route::Local),
            "R12" => Some(Route::ToSite2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TwoSiteAction {
    pub provision: Provision,
    pub route: Route,
}

impl TwoSiteAction {
    pub const COUNT: usize = 26;

    pub fn from_index(i: usize) -> Self {
        let route = if i % 2 == 0 { Route::Local } else { Route::ToSite2 };
        TwoSiteAction { provision: Provision::ALL[i / 2], route }
    }

    pub fn index(self) -> usize {
        self.provision as usize * 2 + self.route as usize
    }
}

impl fmt::Display for TwoSiteAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}", self.provision.name(), self.route.name())
    }
}

/// Apply one site's sub-action; `None` if not allowed.
fn site_effect(m: u32, a: u32, servers: u32, act: SiteAct) -> Option<(u32, u32)> {
    match act {
        SiteAct::Ia => (a == 0 && m < servers).then_some((m, 1)),
        SiteAct::Ca => (a == 1).then_some((m, 0)),
        SiteAct::D => (m > 0 && a == 0).then(|| (m - 1, 0)),
        SiteAct::Nc => Some((m, a)),
    }
}

fn site_configs(servers: u32) -> Vec<(u32, u32)> {
    let mut v = Vec::new();
    for sum in 0..=servers {
        for a in 0..=sum.min(1) {
            v.push((sum - a, a));
        }
    }
    v
}

/// Capped two-site state space with dense indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSiteSpace {
    pub cap: u32,
    pub servers: (u32, u32),
    pub states: Vec<TwoSiteState>,
    configs: (Vec<(u32, u32)>, Vec<(u32, u32)>),
    row_start: Vec<usize>,
}

impl TwoSiteSpace {
    pub fn new(cap: u32, servers1: u32, servers2: u32) -> Result<Self> {
        if cap < 1 {
            return invalid("two-site cap must be positive");
        }
        let c1 = site_configs(servers1);
        let c2 = site_configs(servers2);
        let block = c1.len() * c2.len();
        let n1max = if servers1 == 0 { 0 } else { cap };
        let mut states = Vec::new();
        let mut row_start = Vec::new();
        for n1 in 0..=n1max {
            row_start.push(states.len());
            let n2max = if servers2 == 0 { 0 } else { cap - n1 };
            for n2 in 0..=n2max {
                for &(m1, a1) in &c1 {
                    for &(m2, a2) in &c2 {
                        states.push(TwoSiteState { n1, m1, a1, n2, m2, a2 });
                    }
                }
            }
        }
        debug_assert_eq!(states.len() % block, 0);
        Ok(TwoSiteSpace { cap, servers: (servers1, servers2), states, configs: (c1, c2), row_start })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, s: TwoSiteState) -> Option<usize> {
        let (k1, k2) = self.servers;
        if s.n1 as usize >= self.row_start.len() || s.n1 + s.n2 > self.cap || (k2 == 0 && s.n2 > 0) {
            return None;
        }
        let c1 = self.configs.0.iter().position(|&c| c == (s.m1, s.a1))?;
        let c2 = self.configs.1.iter().position(|&c| c == (s.m2, s.a2))?;
        let _ = k1;
        let block = self.configs.0.len() * self.configs.1.len();
        Some(self.row_start[s.n1 as usize] + s.n2 as usize * block + c1 * self.configs.1.len() + c2)
    }
}

pub struct TwoSiteModel<'a> {
    pub params: TwoSiteParams,
    pub space: &'a TwoSiteSpace,
}

/// Effective allocation after the action plus the transition list and reward.
fn raw_transitions(
    s: TwoSiteState,
    act: TwoSiteAction,
    tp: &TwoSiteParams,
    cap: u32,
    out: &mut Vec<(TwoSiteState, f64)>,
) -> Option<f64> {
    let (p1, p2) = act.provision.parts();
    let (m1, a1) = site_effect(s.m1, s.a1, tp.servers1, p1)?;
    let (m2, a2) = site_effect(s.m2, s.a2, tp.servers2, p2)?;
    let base = TwoSiteState { m1, a1, m2, a2, ..s };
    if s.n1 + s.n2 < cap {
        if tp.lambda1 > 0.0 {
            let t = match act.route {
                Route::Local => TwoSiteState { n1: s.n1 + 1, ..base },
                Route::ToSite2 => TwoSiteState { n2: s.n2 + 1, ..base },
            };
            out.push((t, tp.lambda1));
        }
        if tp.lambda2 > 0.0 {
            out.push((TwoSiteState { n2: s.n2 + 1, ..base }, tp.lambda2));
        }
    }
    let b1 = s.n1.min(m1);
    if b1 > 0 {
        out.push((TwoSiteState { n1: s.n1 - 1, ..base }, b1 as f64 * tp.mu));
    }
    let b2 = s.n2.min(m2);
    if b2 > 0 {
        out.push((TwoSiteState { n2: s.n2 - 1, ..base }, b2 as f64 * tp.mu));
    }
    if a1 > 0 {
        out.push((TwoSiteState { m1: m1 + 1, a1: 0, ..base }, 1.0 / tp.delta));
    }
    if a2 > 0 {
        out.push((TwoSiteState { m2: m2 + 1, a2: 0, ..base }, 1.0 / tp.delta));
    }
    if out.is_empty() {
        return None;
    }
    let mut reward = -(tp.omega * (s.n1 + s.n2) as f64 + (m1 + a1 + m2 + a2) as f64 * tp.mu);
    if act.route == Route::ToSite2 {
        reward -= tp.omega * tp.lambda1 * tp.d_r;
    }
    Some(reward)
}

/// Transition rates and reward rate for a two-site action.
pub fn two_site_transitions(
    s: TwoSiteState,
    act: TwoSiteAction,
    tp: &TwoSiteParams,
    space: &TwoSiteSpace,
) -> Result<(Vec<(TwoSiteState, f64)>, f64)> {
    let mut out = Vec::new();
    match raw_transitions(s, act, tp, space.cap, &mut out) {
        Some(r) if out.iter().all(|(t, _)| space.index_of(*t).is_some()) => Ok((out, r)),
        _ => invalid(format!("action {act} not allowed in state {s}")),
    }
}

impl DecisionModel for TwoSiteModel<'_> {
    fn num_states(&self) -> usize {
        self.space.len()
    }

    fn num_actions(&self) -> usize {
        TwoSiteAction::COUNT
    }

    fn reference(&self) -> usize {
        0
    }

    fn transitions(&self, s: usize, a: usize, out: &mut Vec<(usize, f64)>) -> Option<f64> {
        let mut tmp = Vec::with_capacity(6);
        let r = raw_transitions(self.space.states[s], TwoSiteAction::from_index(a), &self.params, self.space.cap, &mut tmp)?;
        for (t, q) in tmp {
            out.push((self.space.index_of(t)?, q));
        }
        Some(r)
    }

    fn initial_action(&self, s: usize) -> usize {
        let st = self.space.states[s];
        let want = |n: u32, m: u32, a: u32, k: u32| {
            if m + a < n.min(k) && a == 0 {
                SiteAct::Ia
            } else if m + a > n && a > 0 {
                SiteAct::Ca
            } else if m > n && a == 0 {
                SiteAct::D
            } else {
                SiteAct::Nc
            }
        };
        let w1 = want(st.n1, st.m1, st.a1, self.params.servers1);
        let w2 = want(st.n2, st.m2, st.a2, self.params.servers2);
        let route = if self.params.servers1 == 0 { Route::ToSite2 } else { Route::Local };
        let mut candidates = Vec::new();
        for prov in [
            Provision::from_parts((w1, w2)),
            Provision::from_parts((w1, SiteAct::Nc)),
            Provision::from_parts((SiteAct::Nc, w2)),
        ]
        .into_iter()
        .flatten()
        {
            candidates.push(TwoSiteAction { provision: prov, route });
        }
        let mut buf = Vec::new();
        for c in candidates {
            buf.clear();
            if self.transitions(s, c.index(), &mut buf).is_some() {
                return c.index();
            }
        }
        (0..TwoSiteAction::COUNT)
            .find(|&a| {
                buf.clear();
                self.transitions(s, a, &mut buf).is_some()
            })
            .expect("some action is always allowed")
    }
}

/// Two-site policy: one action per state of the capped space.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSiteTable {
    pub params: TwoSiteParams,
    pub space: TwoSiteSpace,
    pub actions: Vec<TwoSiteAction>,
}

impl TwoSiteTable {
    pub fn get(&self, s: TwoSiteState) -> Option<TwoSiteAction> {
        self.space.index_of(s).map(|i| self.actions[i])
    }

    pub fn from_fn(
        params: TwoSiteParams,
        cap: u32,
        mut rule: impl FnMut(TwoSiteState) -> TwoSiteAction,
    ) -> Result<Self> {
        let space = TwoSiteSpace::new(cap, params.servers1, params.servers2)?;
        let model = TwoSiteModel { params, space: &space };
        let mut actions = Vec::with_capacity(space.len());
        let mut buf = Vec::new();
        for (i, &s) in space.states.iter().enumerate() {
            let act = rule(s);
            buf.clear();
            if model.transitions(i, act.index(), &mut buf).is_none() {
                return invalid(format!("action {act} not allowed in state {s}"));
            }
            actions.push(act);
        }
        Ok(TwoSiteTable { params, space, actions })
    }

    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        let _ = writeln!(out, "# two-site policy table");
        let _ = writeln!(
            out,
            "# lambda1={:?} lambda2={:?} d_r={:?} mu={:?} delta={:?} omega={:?}",
            p.lambda1, p.lambda2, p.d_r, p.mu, p.delta, p.omega
        );
        let _ = writeln!(out, "# servers1={} servers2={} cap={}", p.servers1, p.servers2, self.space.cap);
        let _ = writeln!(out, "# n1 m1 a1 n2 m2 a2 provisioning routing");
        for (s, act) in self.space.states.iter().zip(&self.actions) {
            let _ = writeln!(
                out,
                "{} {} {} {} {} {} {} {}",
                s.n1,
                s.m1,
                s.a1,
                s.n2,
                s.m2,
                s.a2,
                act.provision.name(),
                act.route.name()
            );
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct TwoSiteResult {
    pub table: TwoSiteTable,
    pub avg_reward: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
    pub metrics: Metrics,
}

impl TwoSiteResult {
    pub fn objective(&self) -> f64 {
        -self.avg_reward
    }
}

fn solve_two_site_fixed(tp: &TwoSiteParams, cap: u32, warm: Option<&TwoSiteTable>, max_iters: usize) -> Result<TwoSiteResult> {
    let space = TwoSiteSpace::new(cap, tp.servers1, tp.servers2)?;
    let model = TwoSiteModel { params: *tp, space: &space };
    let mut buf = Vec::new();
    let initial: Vec<usize> = (0..space.len())
        .map(|i| {
            let s = space.states[i];
            if let Some(w) = warm {
                let total = s.n1 + s.n2;
                let prior = if total <= w.space.cap { w.get(s) } else { None };
                if let Some(act) = prior {
                    buf.clear();
                    if model.transitions(i, act.index(), &mut buf).is_some() {
                        return act.index();
                    }
                }
            }
            model.initial_action(i)
        })
        .collect();
    let out = solver::policy_iteration(&model, initial, max_iters)?;
    let actions: Vec<TwoSiteAction> = out.policy.iter().map(|&a| TwoSiteAction::from_index(a)).collect();
    let (mut en, mut servers, mut forwarding) = (0.0, 0.0, 0.0);
    for ((s, act), w) in space.states.iter().zip(&actions).zip(&out.stationary) {
        let (p1, p2) = act.provision.parts();
        let (m1, a1) = site_effect(s.m1, s.a1, tp.servers1, p1).expect("allowed");
        let (m2, a2) = site_effect(s.m2, s.a2, tp.servers2, p2).expect("allowed");
        en += w * (s.n1 + s.n2) as f64;
        servers += w * (m1 + a1 + m2 + a2) as f64;
        if act.route == Route::ToSite2 {
            forwarding += w;
        }
    }
    let q = en + tp.lambda1 * tp.d_r * forwarding;
    let total = tp.lambda1 + tp.lambda2;
    let metrics = Metrics { r: q / total, c: tp.mu * servers, q: Some(q) };
    Ok(TwoSiteResult {
        table: TwoSiteTable { params: *tp, space, actions },
        avg_reward: out.eval.gain,
        iterations: out.iterations,
        history: out.history,
        metrics,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSiteOptions {
    /// Fixed cap on n1 + n2; `None` starts at the default and doubles.
    pub cap: Option<u32>,
    pub start_cap: u32,
    pub cap_tolerance: f64,
    pub max_iters: usize,
}

impl Default for TwoSiteOptions {
    fn default() -> Self {
        TwoSiteOptions { cap: None, start_cap: DEFAULT_TWO_SITE_CAP, cap_tolerance: 1e-6, max_iters: DEFAULT_MAX_ITERS }
    }
}

/// Jointly optimal provisioning and routing.
pub fn solve_state_dependent(tp: &TwoSiteParams, opts: TwoSiteOptions) -> Result<TwoSiteResult> {
    tp.validate()?;
    if let Some(cap) = opts.cap {
        return solve_two_site_fixed(tp, cap, None, opts.max_iters);
    }
    let mut cap = opts.start_cap.max(1);
    let mut prev = solve_two_site_fixed(tp, cap, None, opts.max_iters)?;
    loop {
        cap = cap.checked_mul(2).ok_or(Error::NonConvergence(opts.max_iters))?;
        let next = solve_two_site_fixed(tp, cap, Some(&prev.table), opts.max_iters)?;
        let change = (next.objective() - prev.objective()).abs() / next.objective().abs().max(1e-300);
        if change < opts.cap_tolerance {
            return Ok(next);
        }
        if cap > 1 << 14 {
            return Err(Error::NonConvergence(opts.max_iters));
        }
        prev = next;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteOptimum {
    pub objective: f64,
    pub metrics: Metrics,
}

/// Memoized single-site optima keyed by arrival rate bits.
#[derive(Debug, Default)]
pub struct SiteCache {
    map: std::sync::Mutex<HashMap<(u32, u64), Option<SiteOptimum>>>,
}

impl SiteCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Optimal single-site objective at `rate` with `servers` servers and at
    /// most one allocation in flight; `None` if the site would be overloaded.
    pub fn site_optimum(&self, tp: &TwoSiteParams, servers: u32, rate: f64) -> Result<Option<SiteOptimum>> {
        let key = (servers, rate.to_bits());
        if let Some(v) = self.map.lock().unwrap().get(&key) {
            return Ok(*v);
        }
        let v = if rate <= 0.0 {
            Some(SiteOptimum { objective: 0.0, metrics: Metrics::new(0.0, 0.0) })
        } else if servers == 0 || rate >= servers as f64 * tp.mu {
            None
        } else {
            let res = smdp::solve_optimal(&tp.site(rate), SolveOptions::servers(servers).with_cap_a(Some(1)))?;
            Some(SiteOptimum { objective: res.objective(), metrics: res.metrics()? })
        };
        self.map.lock().unwrap().insert(key, v);
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitResult {
    /// Fraction of site-1 traffic sent to site 2.
    pub fraction: f64,
    pub objective: f64,
    pub site1: Metrics,
    pub site2: Metrics,
}

/// Objective of a fixed split, or `None` if a site would be overloaded.
pub fn split_objective(tp: &TwoSiteParams, f: f64, cache: &SiteCache) -> Result<Option<SplitResult>> {
    let r1 = tp.lambda1 * (1.0 - f);
    let r2 = tp.lambda2 + tp.lambda1 * f;
    let (Some(s1), Some(s2)) = (cache.site_optimum(tp, tp.servers1, r1)?, cache.site_optimum(tp, tp.servers2, r2)?)
    else {
        return Ok(None);
    };
    let objective = s1.objective + s2.objective + tp.omega * tp.lambda1 * f * tp.d_r;
    Ok(Some(SplitResult { fraction: f, objective, site1: s1.metrics, site2: s2.metrics }))
}

/// Split that equalizes per-server load across the sites, clamped to [0, 1].
pub fn balanced_fraction(tp: &TwoSiteParams) -> f64 {
    if tp.lambda1 <= 0.0 {
        return 0.0;
    }
    let (k1, k2) = (tp.servers1 as f64, tp.servers2 as f64);
    ((k2 * tp.lambda1 - k1 * tp.lambda2) / (tp.lambda1 * (k1 + k2))).clamp(0.0, 1.0)
}

/// Best fixed split over the grid `{0, g, 2g, ..., 1}`, plus the balanced split.
pub fn oblivious_optimal(tp: &TwoSiteParams, granularity: f64, cache: &SiteCache) -> Result<SplitResult> {
    tp.validate()?;
    if !(granularity > 0.0 && granularity <= 1.0) {
        return invalid(format!("granularity must lie in (0,1], got {granularity}"));
    }
    let steps = (1.0 / granularity).round() as usize;
    let mut splits: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
    splits.push(balanced_fraction(tp));
    let results: Vec<Result<Option<SplitResult>>> = splits.par_iter().map(|&f| split_objective(tp, f, cache)).collect();
    let mut best: Option<SplitResult> = None;
    for r in results {
        if let Some(cand) = r? {
            if best.is_none_or(|b| cand.objective < b.objective) {
                best = Some(cand);
            }
        }
    }
    best.ok_or_else(|| Error::Unstable("every split overloads a site".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    LocalOnly,
    AllToSite2,
    Balanced,
}

impl Baseline {
    pub fn fraction(self, tp: &TwoSiteParams) -> f64 {
        match self {
            Baseline::LocalOnly => 0.0,
            Baseline::AllToSite2 => 1.0,
            Baseline::Balanced => balanced_fraction(tp),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Baseline::LocalOnly => "local_only",
            Baseline::AllToSite2 => "all_to_site2",
            Baseline::Balanced => "balanced",
        }
    }
}

/// Objective of a fixed routing baseline; unstable if it overloads a site.
pub fn baseline_routing(tp: &TwoSiteParams, mode: Baseline, cache: &SiteCache) -> Result<SplitResult> {
    tp.validate()?;
    split_objective(tp, mode.fraction(tp), cache)?
        .ok_or_else(|| Error::Unstable(format!("{} overloads a site", mode.name())))
}
