//! Discrete-event simulation of every policy, used as an independent check
//! on the closed forms and on policy tables from the decision model.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};

use rand::SeedableRng;
use rand_distr::{Distribution, Exp1};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{invalid, unstable, Error, Result};
use crate::model::{HoldTimer, Metrics, PolicySpec, SystemParams};
use crate::routing::{Route, TwoSiteAction, TwoSiteState, TwoSiteTable};
use crate::smdp::{Action, PolicyTable, SmdpState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub warmup: f64,
    pub horizon: f64,
    pub replications: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { seed: 1, warmup: 1e4, horizon: 1e5, replications: 20 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.warmup >= 0.0 && self.horizon > self.warmup && self.horizon.is_finite()) {
            return invalid(format!("need horizon > warmup >= 0, got warmup={} horizon={}", self.warmup, self.horizon));
        }
        if self.replications < 2 {
            return invalid("at least 2 replications are needed for a confidence interval");
        }
        Ok(())
    }
}

/// Raw output of one replication over the measurement window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Replication {
    pub r: f64,
    pub c: f64,
    pub objective: f64,
    /// Time-average number of requests in the system.
    pub mean_n: f64,
    /// Completed requests per unit time.
    pub throughput: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsEstimate {
    pub r_mean: f64,
    pub r_ci_halfwidth: f64,
    pub c_mean: f64,
    pub c_ci_halfwidth: f64,
    pub objective_mean: f64,
    pub objective_ci_halfwidth: f64,
    pub replications: Vec<Replication>,
}

impl MetricsEstimate {
    fn from_replications(reps: Vec<Replication>) -> Self {
        let n = reps.len() as f64;
        let t = StudentsT::new(0.0, 1.0, n - 1.0).expect("n >= 2").inverse_cdf(0.975);
        let stat = |f: fn(&Replication) -> f64| {
            let mean = reps.iter().map(f).sum::<f64>() / n;
            let var = reps.iter().map(|r| (f(r) - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (mean, t * (var / n).sqrt())
        };
        let (r_mean, r_ci_halfwidth) = stat(|r| r.r);
        let (c_mean, c_ci_halfwidth) = stat(|r| r.c);
        let (objective_mean, objective_ci_halfwidth) = stat(|r| r.objective);
        MetricsEstimate { r_mean, r_ci_halfwidth, c_mean, c_ci_halfwidth, objective_mean, objective_ci_halfwidth, replications: reps }
    }

    pub fn r_std_error(&self) -> f64 {
        std_error(&self.replications, |r| r.r)
    }

    pub fn c_std_error(&self) -> f64 {
        std_error(&self.replications, |r| r.c)
    }

    /// Per-replication rows as CSV with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("replication,R,C,objective\n");
        for (i, r) in self.replications.iter().enumerate() {
            out.push_str(&format!("{i},{:?},{:?},{:?}\n", r.r, r.c, r.objective));
        }
        out
    }
}

fn std_error(reps: &[Replication], f: fn(&Replication) -> f64) -> f64 {
    let n = reps.len() as f64;
    let mean = reps.iter().map(f).sum::<f64>() / n;
    let var = reps.iter().map(|r| (f(r) - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

/// Independent generator per replication, taken from consecutive jumps of
/// the seeded base stream.
fn streams(seed: u64, count: usize) -> Vec<Xoshiro256PlusPlus> {
    let mut base = Xoshiro256PlusPlus::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let s = base.clone();
            base.jump();
            s
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    slot: usize,
    version: u64,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then(self.slot.cmp(&other.slot)).then(self.version.cmp(&other.version))
    }
}

/// Running sums over the measurement window.
struct Recorder {
    warmup: f64,
    sojourn_sum: f64,
    completed: u64,
}

impl Recorder {
    fn depart(&mut self, entered: f64, now: f64) {
        if now > self.warmup {
            self.sojourn_sum += now - entered;
            self.completed += 1;
        }
    }
}

/// A simulated system: a set of exponential clocks whose rates depend on
/// the state, plus at most one fixed-time deadline.
trait Process {
    fn slots(&self) -> usize;
    fn rate(&self, slot: usize) -> f64;
    fn deadline(&self) -> Option<f64> {
        None
    }
    fn fire(&mut self, slot: usize, now: f64, rec: &mut Recorder) -> Result<()>;
    /// Fired when the deadline passes; reported as slot `slots()`.
    fn expire(&mut self, _now: f64) -> Result<()> {
        Ok(())
    }
    fn cost_rate(&self) -> f64;
    fn population(&self) -> usize;
}

fn run<P: Process>(mut proc: P, cfg: &SimConfig, rng: &mut Xoshiro256PlusPlus) -> Result<(f64, f64, f64, u64)> {
    let k = proc.slots();
    let deadline_slot = k;
    let mut heap = BinaryHeap::new();
    let mut versions = vec![0u64; k + 1];
    let mut rates = vec![0.0; k];
    let mut deadline = None;
    let mut rec = Recorder { warmup: cfg.warmup, sojourn_sum: 0.0, completed: 0 };
    let (mut cost_area, mut n_area) = (0.0, 0.0);
    let mut now = 0.0;
    let mut fired = usize::MAX;
    loop {
        for s in 0..k {
            let r = proc.rate(s);
            if s == fired || r != rates[s] {
                versions[s] += 1;
                rates[s] = r;
                if r > 0.0 {
                    let dt: f64 = Exp1.sample(rng);
                    heap.push(Reverse(Event { time: now + dt / r, slot: s, version: versions[s] }));
                }
            }
        }
        let d = proc.deadline();
        if d != deadline || fired == deadline_slot {
            versions[deadline_slot] += 1;
            deadline = d;
            if let Some(t) = d {
                heap.push(Reverse(Event { time: t, slot: deadline_slot, version: versions[deadline_slot] }));
            }
        }
        let ev = loop {
            let Reverse(ev) = heap.pop().ok_or_else(|| Error::Invalid("simulation has no pending events".into()))?;
            if ev.version == versions[ev.slot] {
                break ev;
            }
        };
        let next = ev.time.min(cfg.horizon);
        let span = next - now.max(cfg.warmup);
        if span > 0.0 {
            cost_area += proc.cost_rate() * span;
            n_area += proc.population() as f64 * span;
        }
        if ev.time >= cfg.horizon {
            break;
        }
        now = ev.time;
        if ev.slot == deadline_slot {
            proc.expire(now)?;
        } else {
            proc.fire(ev.slot, now, &mut rec)?;
        }
        fired = ev.slot;
    }
    let window = cfg.horizon - cfg.warmup;
    let r = if rec.completed > 0 { rec.sojourn_sum / rec.completed as f64 } else { 0.0 };
    Ok((r, cost_area / window, n_area / window, rec.completed))
}

fn replicate<P: Process + Send>(
    cfg: &SimConfig,
    make: impl Fn() -> P + Sync,
    objective: impl Fn(f64, f64) -> f64 + Sync,
) -> Result<MetricsEstimate> {
    cfg.validate()?;
    let window = cfg.horizon - cfg.warmup;
    let reps: Vec<Result<Replication>> = streams(cfg.seed, cfg.replications)
        .into_par_iter()
        .map(|mut rng| {
            let (r, c, mean_n, done) = run(make(), cfg, &mut rng)?;
            Ok(Replication { r, c, objective: objective(r, c), mean_n, throughput: done as f64 / window })
        })
        .collect();
    Ok(MetricsEstimate::from_replications(reps.into_iter().collect::<Result<_>>()?))
}

const ARRIVE: usize = 0;
const DEPART: usize = 1;
const SETUP: usize = 2;
const STAGE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Unit {
    Off,
    Setup,
    On,
    /// Idle and held, in the given Erlang stage (1-based).
    Held(u32),
    /// Idle and held until the given time.
    HeldUntil(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Base,
    BasePlus,
    Extra,
}

/// Per-policy control state.
enum Ctl {
    AlwaysOn { servers: u32 },
    /// One server unit with a hold timer and a batch trigger; its service
    /// rate depends on the number of requests.
    Unit { rates: Vec<f64>, b: u32, hold: HoldTimer, t: f64, state: Unit },
    OneAlways { l: u32, h: u32, mu1: f64, mu2: f64, mode: Mode },
    /// `active` servers serving, `pending` setups, sized to `min(n, 2)`.
    BothDynamic { active: u32, pending: u32 },
    PerRequest { active: u32, pending: u32 },
    Reactive { s: u32, active: u32, pending: u32 },
    Proactive { active: u32, pending: u32 },
    Table { table: PolicyTable, m: u32, a: u32 },
}

struct Single {
    p: SystemParams,
    queue: VecDeque<f64>,
    ctl: Ctl,
}

impl Single {
    fn new(policy: &PolicySpec, p: &SystemParams) -> Result<Self> {
        let ctl = match policy {
            PolicySpec::AlwaysOn { servers } => Ctl::AlwaysOn { servers: *servers },
            PolicySpec::HoldOn { k, t } => Ctl::Unit { rates: vec![p.mu], b: 1, hold: *k, t: *t, state: Unit::Off },
            PolicySpec::Batching { b } => {
                Ctl::Unit { rates: vec![p.mu], b: *b, hold: HoldTimer::Erlang(1), t: 0.0, state: Unit::Off }
            }
            PolicySpec::StateDepRates { rates, k, t, .. } => {
                Ctl::Unit { rates: rates.clone(), b: 1, hold: *k, t: *t, state: Unit::Off }
            }
            PolicySpec::DualOneAlways { l, h, mu1, mu2 } => {
                Ctl::OneAlways { l: *l, h: *h, mu1: *mu1, mu2: *mu2, mode: Mode::Base }
            }
            PolicySpec::DualBothDynamic => Ctl::BothDynamic { active: 0, pending: 0 },
            PolicySpec::ServerPerRequest => Ctl::PerRequest { active: 0, pending: 0 },
            PolicySpec::ReactiveUnlimited { s } => Ctl::Reactive { s: *s, active: 0, pending: 0 },
            PolicySpec::ProactiveUnlimited => Ctl::Proactive { active: 1, pending: 0 },
            PolicySpec::SmdpTable(table) => Ctl::Table { table: table.clone(), m: 0, a: 0 },
        };
        let mut sys = Single { p: *p, queue: VecDeque::new(), ctl };
        sys.settle()?;
        Ok(sys)
    }

    fn n(&self) -> u32 {
        self.queue.len() as u32
    }

    /// Restore the policy's invariants after an event, and take the table
    /// decision for the state just entered.
    fn settle(&mut self) -> Result<()> {
        let n = self.n();
        let instant = self.p.delta == 0.0;
        match &mut self.ctl {
            Ctl::BothDynamic { active, pending } => {
                let target = n.min(2);
                while *active + *pending > target {
                    if *pending > 0 {
                        *pending -= 1;
                    } else {
                        *active -= 1;
                    }
                }
                *pending = target - *active;
                if instant {
                    *active += std::mem::take(pending);
                }
            }
            Ctl::PerRequest { active, pending } if instant => *active += std::mem::take(pending),
            Ctl::Reactive { s, active, pending } => {
                let waiting = n - *active;
                *pending = waiting.min(*s);
                if instant {
                    *active = n;
                    *pending = 0;
                }
            }
            Ctl::Proactive { active, pending } => {
                if instant {
                    *active = n + 1;
                    *pending = 0;
                } else {
                    *active = (*active).min(n + 1).max(1);
                    *pending = u32::from(n >= *active);
                }
            }
            Ctl::Unit { state, .. } if instant && *state == Unit::Setup => *state = Unit::On,
            Ctl::OneAlways { mode, .. } if instant && *mode == Mode::BasePlus => *mode = Mode::Extra,
            Ctl::Table { table, m, a } => {
                let s = SmdpState::new(n, *m, *a);
                let act = table.get(s).ok_or_else(|| Error::MissingState(s.to_string()))?;
                match act {
                    Action::IA => *a += 1,
                    Action::CA => *a -= 1,
                    Action::D => *m -= 1,
                    Action::NC => {}
                }
            }
            _ => {}
        }
        Ok(())
    }
}

impl Process for Single {
    fn slots(&self) -> usize {
        4
    }

    fn rate(&self, slot: usize) -> f64 {
        let n = self.n();
        let (mu, setup) = (self.p.mu, 1.0 / self.p.delta);
        match slot {
            ARRIVE => match &self.ctl {
                Ctl::Table { table, .. } if n >= table.caps.n => 0.0,
                _ => self.p.lambda,
            },
            DEPART => {
                if n == 0 {
                    return 0.0;
                }
                match &self.ctl {
                    Ctl::AlwaysOn { servers } => n.min(*servers) as f64 * mu,
                    Ctl::Unit { rates, state, .. } => match state {
                        Unit::On => rates[(n as usize).min(rates.len()) - 1],
                        _ => 0.0,
                    },
                    Ctl::OneAlways { mu1, mu2, mode, .. } => match mode {
                        Mode::Extra => *mu2,
                        _ => *mu1,
                    },
                    Ctl::BothDynamic { active, .. } => n.min(*active) as f64 * mu,
                    Ctl::PerRequest { active, .. } | Ctl::Reactive { active, .. } => *active as f64 * mu,
                    Ctl::Proactive { active, .. } => n.min(*active) as f64 * mu,
                    Ctl::Table { m, .. } => n.min(*m) as f64 * mu,
                }
            }
            SETUP => match &self.ctl {
                Ctl::Unit { state: Unit::Setup, .. } => setup,
                Ctl::OneAlways { mode: Mode::BasePlus, .. } => setup,
                Ctl::BothDynamic { pending, .. }
                | Ctl::PerRequest { pending, .. }
                | Ctl::Reactive { pending, .. }
                | Ctl::Proactive { pending, .. } => *pending as f64 * setup,
                Ctl::Table { a, .. } => *a as f64 * setup,
                _ => 0.0,
            },
            STAGE => match &self.ctl {
                Ctl::Unit { state: Unit::Held(_), hold: HoldTimer::Erlang(k), t, .. } => *k as f64 / t,
                _ => 0.0,
            },
            _ => unreachable!(),
        }
    }

    fn deadline(&self) -> Option<f64> {
        match self.ctl {
            Ctl::Unit { state: Unit::HeldUntil(t), .. } => Some(t),
            _ => None,
        }
    }

    fn fire(&mut self, slot: usize, now: f64, rec: &mut Recorder) -> Result<()> {
        match slot {
            ARRIVE => {
                self.queue.push_back(now);
                let n = self.n();
                match &mut self.ctl {
                    Ctl::Unit { b, state, .. } => match *state {
                        Unit::Off if n >= *b => *state = Unit::Setup,
                        Unit::Held(_) | Unit::HeldUntil(_) => *state = Unit::On,
                        _ => {}
                    },
                    Ctl::OneAlways { h, mode, .. } if *mode == Mode::Base && n >= *h => *mode = Mode::BasePlus,
                    Ctl::PerRequest { pending, .. } => *pending += 1,
                    _ => {}
                }
            }
            DEPART => {
                let entered = self.queue.pop_front().expect("departure from an empty system");
                rec.depart(entered, now);
                let n = self.n();
                match &mut self.ctl {
                    Ctl::Unit { hold, t, state, .. } if n == 0 => {
                        *state = if *t == 0.0 {
                            Unit::Off
                        } else if t.is_infinite() {
                            Unit::On
                        } else {
                            match hold {
                                HoldTimer::Erlang(_) => Unit::Held(1),
                                HoldTimer::Deterministic => Unit::HeldUntil(now + *t),
                            }
                        };
                    }
                    Ctl::OneAlways { l, mode, .. } if *mode != Mode::Base && n < *l => *mode = Mode::Base,
                    Ctl::PerRequest { active, .. } => *active -= 1,
                    Ctl::Reactive { active, .. } => {
                        // a freed server takes a waiting request if there is one
                        if n < *active {
                            *active -= 1;
                        }
                    }
                    _ => {}
                }
            }
            SETUP => match &mut self.ctl {
                Ctl::Unit { state, .. } => *state = Unit::On,
                Ctl::OneAlways { mode, .. } => *mode = Mode::Extra,
                Ctl::BothDynamic { active, pending }
                | Ctl::PerRequest { active, pending }
                | Ctl::Reactive { active, pending, .. }
                | Ctl::Proactive { active, pending } => {
                    *pending -= 1;
                    *active += 1;
                }
                Ctl::Table { m, a, .. } => {
                    *a -= 1;
                    *m += 1;
                }
                Ctl::AlwaysOn { .. } => unreachable!(),
            },
            STAGE => {
                if let Ctl::Unit { state, hold: HoldTimer::Erlang(k), .. } = &mut self.ctl {
                    if let Unit::Held(j) = *state {
                        *state = if j == *k { Unit::Off } else { Unit::Held(j + 1) };
                    }
                }
            }
            _ => unreachable!(),
        }
        self.settle()
    }

    fn expire(&mut self, _now: f64) -> Result<()> {
        if let Ctl::Unit { state, .. } = &mut self.ctl {
            *state = Unit::Off;
        }
        Ok(())
    }

    fn cost_rate(&self) -> f64 {
        let mu = self.p.mu;
        match &self.ctl {
            Ctl::AlwaysOn { servers } => *servers as f64 * mu,
            Ctl::Unit { rates, state, .. } => match state {
                Unit::Off => 0.0,
                _ => *rates.last().unwrap(),
            },
            Ctl::OneAlways { mu1, mu2, mode, .. } => match mode {
                Mode::Base => *mu1,
                _ => *mu2,
            },
            Ctl::BothDynamic { active, pending }
            | Ctl::PerRequest { active, pending }
            | Ctl::Reactive { active, pending, .. }
            | Ctl::Proactive { active, pending } => (*active + *pending) as f64 * mu,
            Ctl::Table { m, a, .. } => (*m + *a) as f64 * mu,
        }
    }

    fn population(&self) -> usize {
        self.queue.len()
    }
}

fn check_stable(policy: &PolicySpec, p: &SystemParams) -> Result<()> {
    let limit = match policy {
        PolicySpec::AlwaysOn { servers } => *servers as f64 * p.mu,
        PolicySpec::HoldOn { .. } | PolicySpec::Batching { .. } => p.mu,
        PolicySpec::DualOneAlways { mu2, .. } => *mu2,
        PolicySpec::DualBothDynamic => 2.0 * p.mu,
        PolicySpec::StateDepRates { rates, .. } => *rates.last().unwrap(),
        _ => f64::INFINITY,
    };
    if p.lambda >= limit {
        return unstable(format!("lambda={} >= capacity {limit}", p.lambda));
    }
    Ok(())
}

/// Simulate a policy and estimate R, C and the objective with 95% confidence
/// intervals across independent replications.
pub fn simulate(policy: &PolicySpec, p: &SystemParams, cfg: &SimConfig) -> Result<MetricsEstimate> {
    p.validate()?;
    policy.validate()?;
    check_stable(policy, p)?;
    if let PolicySpec::SmdpTable(_) = policy {
        if p.delta == 0.0 {
            return invalid("table replay needs a positive setup delay");
        }
    }
    Single::new(policy, p)?;
    let p = *p;
    replicate(cfg, || Single::new(policy, &p).expect("checked above"), |r, c| Metrics::new(r, c).objective(&p))
}

/// Replay a single-site policy table.
pub fn simulate_policy_table(table: &PolicyTable, p: &SystemParams, cfg: &SimConfig) -> Result<MetricsEstimate> {
    simulate(&PolicySpec::SmdpTable(table.clone()), p, cfg)
}

const ARRIVE1: usize = 0;
const ARRIVE2: usize = 1;
const DEPART1: usize = 2;
const DEPART2: usize = 3;
const SETUP1: usize = 4;
const SETUP2: usize = 5;

struct TwoSites<'a> {
    table: &'a TwoSiteTable,
    q1: VecDeque<f64>,
    q2: VecDeque<f64>,
    m: [u32; 2],
    a: [u32; 2],
    route: Route,
}

impl<'a> TwoSites<'a> {
    fn new(table: &'a TwoSiteTable) -> Result<Self> {
        let mut sys = TwoSites { table, q1: VecDeque::new(), q2: VecDeque::new(), m: [0; 2], a: [0; 2], route: Route::Local };
        sys.decide()?;
        Ok(sys)
    }

    fn state(&self) -> TwoSiteState {
        TwoSiteState {
            n1: self.q1.len() as u32,
            m1: self.m[0],
            a1: self.a[0],
            n2: self.q2.len() as u32,
            m2: self.m[1],
            a2: self.a[1],
        }
    }

    fn decide(&mut self) -> Result<()> {
        use crate::routing::Provision::*;
        let s = self.state();
        let act: TwoSiteAction = self.table.get(s).ok_or_else(|| Error::MissingState(s.to_string()))?;
        let mut apply = |site: usize, what: Action| match what {
            Action::IA => self.a[site] += 1,
            Action::CA => self.a[site] -= 1,
            Action::D => self.m[site] -= 1,
            Action::NC => {}
        };
        let (x, y) = match act.provision {
            Ia1 => (Action::IA, Action::NC),
            Ia2 => (Action::NC, Action::IA),
            Ia1Ia2 => (Action::IA, Action::IA),
            Ca1 => (Action::CA, Action::NC),
            Ca2 => (Action::NC, Action::CA),
            Ca1Ca2 => (Action::CA, Action::CA),
            D1 => (Action::D, Action::NC),
            D2 => (Action::NC, Action::D),
            Ia1Ca2 => (Action::IA, Action::CA),
            Ia2Ca1 => (Action::CA, Action::IA),
            Ia1D2 => (Action::IA, Action::D),
            Ia2D1 => (Action::D, Action::IA),
            Nc => (Action::NC, Action::NC),
        };
        apply(0, x);
        apply(1, y);
        self.route = act.route;
        Ok(())
    }
}

impl Process for TwoSites<'_> {
    fn slots(&self) -> usize {
        6
    }

    fn rate(&self, slot: usize) -> f64 {
        let tp = &self.table.params;
        let full = (self.q1.len() + self.q2.len()) as u32 >= self.table.space.cap;
        match slot {
            ARRIVE1 if !full => tp.lambda1,
            ARRIVE2 if !full => tp.lambda2,
            ARRIVE1 | ARRIVE2 => 0.0,
            DEPART1 => (self.q1.len() as u32).min(self.m[0]) as f64 * tp.mu,
            DEPART2 => (self.q2.len() as u32).min(self.m[1]) as f64 * tp.mu,
            SETUP1 => self.a[0] as f64 / tp.delta,
            SETUP2 => self.a[1] as f64 / tp.delta,
            _ => unreachable!(),
        }
    }

    fn fire(&mut self, slot: usize, now: f64, rec: &mut Recorder) -> Result<()> {
        match slot {
            ARRIVE1 => match self.route {
                Route::Local => self.q1.push_back(now),
                // the response transfer back to site 1 counts toward the response time
                Route::ToSite2 => self.q2.push_back(now - self.table.params.d_r),
            },
            ARRIVE2 => self.q2.push_back(now),
            DEPART1 => rec.depart(self.q1.pop_front().expect("nonempty"), now),
            DEPART2 => rec.depart(self.q2.pop_front().expect("nonempty"), now),
            SETUP1 | SETUP2 => {
                let site = slot - SETUP1;
                self.a[site] -= 1;
                self.m[site] += 1;
            }
            _ => unreachable!(),
        }
        self.decide()
    }

    fn cost_rate(&self) -> f64 {
        (self.m[0] + self.a[0] + self.m[1] + self.a[1]) as f64 * self.table.params.mu
    }

    fn population(&self) -> usize {
        self.q1.len() + self.q2.len()
    }
}

/// Replay a two-site policy table. `q` in the result's objective is the
/// total arrival rate times the mean response time, transfer time included.
pub fn simulate_two_site(table: &TwoSiteTable, cfg: &SimConfig) -> Result<MetricsEstimate> {
    table.params.validate()?;
    TwoSites::new(table)?;
    let tp = table.params;
    let total = tp.lambda1 + tp.lambda2;
    replicate(cfg, || TwoSites::new(table).expect("checked above"), |r, c| tp.omega * total * r + c)
}
