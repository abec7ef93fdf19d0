//! Experiment configuration, policy naming, performance-ratio sweeps,
//! routing sweeps and the figure presets built on them.
//!
//! Config files are flat `key = value` lines; `#` starts a comment and blank
//! lines are ignored. Every key may also be given as an override.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::analytic::evaluate;
use crate::error::{invalid, Error, Result};
use crate::model::{HoldTimer, PolicySpec, SystemParams};
use crate::routing::{
    baseline_routing, oblivious_optimal, solve_state_dependent, Baseline, SiteCache, TwoSiteOptions, TwoSiteParams,
    DEFAULT_GRANULARITY,
};
use crate::sim::SimConfig;
use crate::smdp::{solve_optimal, SolveOptions, SolveResult};

/// Raw key-value pairs from a config file plus overrides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    map: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = KeyValues::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value, got {raw:?}", no + 1)))?;
            let key = k.trim().to_string();
            if kv.map.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Parse(format!("line {}: duplicate key {key}", no + 1)));
            }
        }
        Ok(kv)
    }

    /// Apply an override of the form `key=value`.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got {assignment:?}")))?;
        self.map.insert(k.trim().to_string(), v.trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn num(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| parse_f64(key, v)).transpose()
    }

    fn num_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.num(key)?.unwrap_or(default))
    }

    fn required(&self, key: &str) -> Result<f64> {
        self.num(key)?.ok_or_else(|| Error::Invalid(format!("missing key {key}")))
    }

    fn int_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::Parse(format!("{key}: expected an integer, got {v:?}"))),
        }
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.map.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::Parse(format!("unknown key {k}"))),
            None => Ok(()),
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    match v {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => v.parse().map_err(|_| Error::Parse(format!("{key}: expected a number, got {v:?}"))),
    }
}

/// A named policy as written in configs and on the command line, e.g.
/// `holdon:k=det:T=4` or `reactive:s=2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRef {
    pub label: String,
    pub kind: PolicyKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolicyKind {
    Fixed(PolicySpec),
    /// Dual one-always with rates mu and 2mu taken from the parameters.
    OneAlways { l: u32, h: u32 },
    /// Both servers switched together: rates mu and 2mu, released when idle.
    BothTogether,
    /// The optimum from the decision model with the given server cap.
    Optimal { servers: Servers, cap_a: Option<u32> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Servers {
    Limited(u32),
    Unlimited,
}

impl Servers {
    fn parse(v: &str) -> Result<Self> {
        match v {
            "unlimited" | "inf" => Ok(Servers::Unlimited),
            _ => match v.parse() {
                Ok(k) if k > 0 => Ok(Servers::Limited(k)),
                _ => Err(Error::Parse(format!("servers: expected a positive integer or unlimited, got {v:?}"))),
            },
        }
    }

    /// Largest arrival rate the server pool can carry.
    pub fn capacity(self, mu: f64) -> f64 {
        match self {
            Servers::Limited(k) => k as f64 * mu,
            Servers::Unlimited => f64::INFINITY,
        }
    }
}

/// Server cap used in place of "unlimited" when solving for the optimum.
/// Past this many servers the optimum changes by well under 1e-6 relative.
pub fn unlimited_server_cap(p: &SystemParams) -> u32 {
    let load = p.lambda / p.mu;
    (load + 5.0 * (load * (1.0 + p.mu * p.delta)).sqrt() + 5.0).ceil() as u32
}

/// Solver options for the optimum over `servers`.
pub fn optimal_options(p: &SystemParams, servers: Servers, cap_a: Option<u32>) -> SolveOptions {
    let k = match servers {
        Servers::Limited(k) => k,
        Servers::Unlimited => unlimited_server_cap(p),
    };
    SolveOptions::servers(k).with_cap_a(cap_a)
}

pub fn solve_reference(p: &SystemParams, servers: Servers, cap_a: Option<u32>) -> Result<SolveResult> {
    solve_optimal(p, optimal_options(p, servers, cap_a))
}

fn hold_timer(v: &str) -> Result<HoldTimer> {
    match v {
        "det" | "inf" | "deterministic" => Ok(HoldTimer::Deterministic),
        _ => match v.parse() {
            Ok(k) if k > 0 => Ok(HoldTimer::Erlang(k)),
            _ => Err(Error::Parse(format!("k: expected a positive integer or det, got {v:?}"))),
        },
    }
}

impl PolicyRef {
    /// Parse `name` followed by `:key=value` options.
    pub fn parse(text: &str) -> Result<Self> {
        let mut parts = text.trim().split(':');
        let name = parts.next().unwrap_or("");
        let mut opts = Vec::new();
        for part in parts {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("policy option {part:?} in {text:?} is not key=value")))?;
            opts.push((k.to_string(), v.to_string()));
        }
        Self::from_parts(name, &opts).map(|kind| PolicyRef { label: text.trim().to_string(), kind })
    }

    /// Build from a policy name and its options.
    pub fn from_parts(name: &str, opts: &[(String, String)]) -> Result<PolicyKind> {
        let allowed: &[&str] = match name {
            "mmk" => &["servers"],
            "holdon" => &["k", "T"],
            "batching" => &["b"],
            "one-always" => &["l", "h", "mu1", "mu2"],
            "both-dynamic" | "both-together" | "per-request" | "proactive" => &[],
            "statedep" => &["rates", "k", "T"],
            "reactive" => &["s"],
            "optimal" => &["servers", "cap_a"],
            _ => return Err(Error::Parse(format!("unknown policy {name:?}"))),
        };
        if let Some((k, _)) = opts.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(Error::Parse(format!("policy {name} has no option {k}")));
        }
        if let Some((k, _)) = opts.iter().enumerate().find_map(|(i, o)| opts[..i].iter().find(|p| p.0 == o.0)) {
            return Err(Error::Parse(format!("policy {name} sets {k} twice")));
        }
        let get = |key: &str| opts.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let int = |key: &str, default: u32| -> Result<u32> {
            match get(key) {
                None => Ok(default),
                Some(v) => v.parse().map_err(|_| Error::Parse(format!("{key}: expected an integer, got {v:?}"))),
            }
        };
        let num = |key: &str, default: f64| get(key).map_or(Ok(default), |v| parse_f64(key, v));
        let timer = || get("k").map_or(Ok(HoldTimer::Erlang(1)), hold_timer);
        let kind = match name {
            "mmk" => PolicyKind::Fixed(PolicySpec::AlwaysOn { servers: int("servers", 1)? }),
            "holdon" => PolicyKind::Fixed(PolicySpec::HoldOn { k: timer()?, t: num("T", 0.0)? }),
            "batching" => PolicyKind::Fixed(PolicySpec::Batching { b: int("b", 1)? }),
            "one-always" => {
                let (l, h) = (int("l", 2)?, int("h", 2)?);
                match (get("mu1"), get("mu2")) {
                    (None, None) => PolicyKind::OneAlways { l, h },
                    _ => PolicyKind::Fixed(PolicySpec::DualOneAlways { l, h, mu1: num("mu1", 1.0)?, mu2: num("mu2", 2.0)? }),
                }
            }
            "both-dynamic" => PolicyKind::Fixed(PolicySpec::DualBothDynamic),
            "both-together" => PolicyKind::BothTogether,
            "statedep" => {
                let rates = get("rates")
                    .ok_or_else(|| Error::Parse("statedep needs rates=r1/r2/...".into()))?
                    .split('/')
                    .map(|r| parse_f64("rates", r))
                    .collect::<Result<Vec<_>>>()?;
                PolicyKind::Fixed(PolicySpec::StateDepRates { c: rates.len() as u32, rates, k: timer()?, t: num("T", 0.0)? })
            }
            "per-request" => PolicyKind::Fixed(PolicySpec::ServerPerRequest),
            "reactive" => PolicyKind::Fixed(PolicySpec::ReactiveUnlimited { s: int("s", 1)? }),
            "proactive" => PolicyKind::Fixed(PolicySpec::ProactiveUnlimited),
            "optimal" => PolicyKind::Optimal {
                servers: get("servers").map_or(Ok(Servers::Limited(1)), Servers::parse)?,
                cap_a: get("cap_a").map(|_| int("cap_a", 0)).transpose()?,
            },
            _ => unreachable!(),
        };
        if let PolicyKind::Fixed(spec) = &kind {
            spec.validate()?;
        }
        Ok(kind)
    }

    /// Concrete policy at parameters `p`, or `None` for optima.
    pub fn spec(&self, p: &SystemParams) -> Option<PolicySpec> {
        match &self.kind {
            PolicyKind::Fixed(s) => Some(s.clone()),
            PolicyKind::OneAlways { l, h } => Some(PolicySpec::dual_identical(*l, *h, p.mu)),
            PolicyKind::BothTogether => Some(PolicySpec::both_together(p.mu)),
            PolicyKind::Optimal { .. } => None,
        }
    }

    /// Objective at `p`, from the closed form or the decision model.
    pub fn objective(&self, p: &SystemParams) -> Result<f64> {
        match (&self.kind, self.spec(p)) {
            (PolicyKind::Optimal { servers, cap_a }, _) => Ok(solve_reference(p, *servers, *cap_a)?.objective()),
            (_, Some(spec)) => Ok(evaluate(&spec, p)?.objective(p)),
            _ => unreachable!(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    Lambda,
    Omega,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::Lambda => "lambda",
            SweepVar::Omega => "omega",
        }
    }
}

/// Evenly spaced points from `from` to `to` inclusive; with `log` the step
/// is in decades.
pub fn grid(from: f64, to: f64, step: f64, log: bool) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return invalid(format!("sweep step must be positive, got {step}"));
    }
    if !(from.is_finite() && to.is_finite() && to >= from) {
        return invalid(format!("sweep range needs from <= to, got {from}..{to}"));
    }
    if log && from <= 0.0 {
        return invalid("a log sweep needs a positive start");
    }
    let (a, b) = if log { (from.log10(), to.log10()) } else { (from, to) };
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| {
            let x = a + i as f64 * step;
            // snap to a short decimal so grid labels print cleanly
            let x = if log { 10f64.powf(x) } else { x };
            format!("{:.12}", x).parse::<f64>().unwrap()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioSweep {
    pub base: SystemParams,
    pub var: SweepVar,
    pub points: Vec<f64>,
    pub policies: Vec<PolicyRef>,
    pub reference: Servers,
    pub reference_cap_a: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub x: f64,
    pub optimal: f64,
    pub ratios: Vec<f64>,
    pub flags: Vec<String>,
}

impl RatioSweep {
    pub fn params_at(&self, x: f64) -> SystemParams {
        match self.var {
            SweepVar::Lambda => self.base.with_lambda(x),
            SweepVar::Omega => SystemParams { omega: x, ..self.base },
        }
    }

    pub fn row(&self, x: f64) -> Result<RatioRow> {
        let p = self.params_at(x);
        p.validate()?;
        let mut flags = Vec::new();
        let optimal = match solve_reference(&p, self.reference, self.reference_cap_a) {
            Ok(r) => r.objective(),
            Err(Error::Unstable(_)) => {
                flags.push("optimal:unstable".to_string());
                f64::NAN
            }
            Err(e) => return Err(e),
        };
        let mut ratios = Vec::with_capacity(self.policies.len());
        for pol in &self.policies {
            match pol.objective(&p) {
                Ok(v) => ratios.push(v / optimal),
                Err(Error::Unstable(_)) => {
                    flags.push(format!("{}:unstable", pol.label));
                    ratios.push(f64::NAN);
                }
                Err(e) => return Err(e),
            }
        }
        Ok(RatioRow { x, optimal, ratios, flags })
    }

    /// All rows, evaluated in parallel across grid points.
    pub fn run(&self) -> Result<Vec<RatioRow>> {
        self.points.par_iter().map(|&x| self.row(x)).collect()
    }

    pub fn header(&self) -> String {
        let mut h = self.var.name().to_string();
        for p in &self.policies {
            h.push(',');
            h.push_str(&p.label);
        }
        h.push_str(",optimal,flags");
        h
    }

    pub fn to_csv(&self, rows: &[RatioRow]) -> String {
        let mut out = self.header();
        out.push('\n');
        for r in rows {
            out.push_str(&num(r.x));
            for v in &r.ratios {
                out.push(',');
                out.push_str(&num(*v));
            }
            let _ = writeln!(out, ",{},{}", num(r.optimal), r.flags.join("|"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingSweep {
    pub base: TwoSiteParams,
    pub d_r: Vec<f64>,
    pub granularity: f64,
    pub options: TwoSiteOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingRow {
    pub d_r: f64,
    pub state_dependent: f64,
    pub oblivious: f64,
    pub oblivious_fraction: f64,
    pub local_only: f64,
    pub all_to_2: f64,
    pub balanced: f64,
    pub iterations: usize,
    pub flags: Vec<String>,
}

impl RoutingRow {
    pub fn baselines(&self) -> [(&'static str, f64); 3] {
        [("local_only", self.local_only), ("all_to_2", self.all_to_2), ("balanced", self.balanced)]
    }
}

pub const ROUTING_HEADER: &str = "d_r,obj_state_dependent,obj_oblivious,obj_local_only,obj_all_to_2,obj_balanced,\
ratio_oblivious,ratio_local_only,ratio_all_to_2,ratio_balanced,fraction_oblivious,flags";

impl RoutingSweep {
    pub fn row(&self, d_r: f64, cache: &SiteCache) -> Result<RoutingRow> {
        let tp = TwoSiteParams { d_r, ..self.base };
        let sd = solve_state_dependent(&tp, self.options)?;
        let obl = oblivious_optimal(&tp, self.granularity, cache)?;
        let mut flags = Vec::new();
        let mut base = |mode: Baseline| match baseline_routing(&tp, mode, cache) {
            Ok(r) => Ok(r.objective),
            Err(Error::Unstable(_)) => {
                flags.push(format!("{}:infeasible", mode.name()));
                Ok(f64::NAN)
            }
            Err(e) => Err(e),
        };
        let local_only = base(Baseline::LocalOnly)?;
        let all_to_2 = base(Baseline::AllToSite2)?;
        let balanced = base(Baseline::Balanced)?;
        Ok(RoutingRow {
            d_r,
            state_dependent: sd.objective(),
            oblivious: obl.objective,
            oblivious_fraction: obl.fraction,
            local_only,
            all_to_2,
            balanced,
            iterations: sd.iterations,
            flags,
        })
    }

    /// One row per transfer time; per-site optima are shared through a cache.
    pub fn run(&self) -> Result<Vec<RoutingRow>> {
        let cache = SiteCache::new();
        self.d_r.iter().map(|&d| self.row(d, &cache)).collect()
    }

    pub fn to_csv(rows: &[RoutingRow]) -> String {
        let mut out = format!("{ROUTING_HEADER}\n");
        for r in rows {
            let sd = r.state_dependent;
            let cols = [
                r.d_r,
                sd,
                r.oblivious,
                r.local_only,
                r.all_to_2,
                r.balanced,
                r.oblivious / sd,
                r.local_only / sd,
                r.all_to_2 / sd,
                r.balanced / sd,
                r.oblivious_fraction,
            ];
            let line: Vec<String> = cols.iter().map(|v| num(*v)).collect();
            let _ = writeln!(out, "{},{}", line.join(","), r.flags.join("|"));
        }
        out
    }
}

/// Shortest text that parses back to the same number.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// `x` rounded to ten significant digits, printed without trailing noise.
pub fn sig10(x: f64) -> String {
    if !x.is_finite() {
        return num(x);
    }
    num(format!("{x:.9e}").parse::<f64>().unwrap())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Ratio(RatioSweep),
    Routing(RoutingSweep),
}

const COMMON_KEYS: &[&str] = &["kind", "mu", "delta", "omega", "output", "seed", "warmup", "horizon", "replications"];
const RATIO_KEYS: &[&str] = &["lambda", "policies", "sweep", "from", "to", "step", "scale", "servers", "cap_a"];
const ROUTING_KEYS: &[&str] =
    &["lambda1", "lambda2", "servers1", "servers2", "d_r_from", "d_r_to", "d_r_step", "granularity", "cap"];

impl Experiment {
    pub fn from_config(kv: &KeyValues) -> Result<Self> {
        let mu = kv.num_or("mu", 1.0)?;
        let delta = kv.required("delta")?;
        let omega = kv.num_or("omega", 1.0)?;
        match kv.get("kind").unwrap_or("ratio") {
            "ratio" => {
                kv.check_keys(&[COMMON_KEYS, RATIO_KEYS].concat())?;
                let var = match kv.get("sweep").unwrap_or("lambda") {
                    "lambda" => SweepVar::Lambda,
                    "omega" => SweepVar::Omega,
                    v => return Err(Error::Parse(format!("sweep: expected lambda or omega, got {v:?}"))),
                };
                let log = match kv.get("scale").unwrap_or("linear") {
                    "linear" => false,
                    "log" => true,
                    v => return Err(Error::Parse(format!("scale: expected linear or log, got {v:?}"))),
                };
                let lambda = match var {
                    SweepVar::Lambda => kv.num_or("lambda", 1.0)?,
                    SweepVar::Omega => kv.required("lambda")?,
                };
                let base = SystemParams::new(lambda, mu, delta, omega)?;
                let points = grid(kv.required("from")?, kv.required("to")?, kv.required("step")?, log)?;
                let policies = kv
                    .get("policies")
                    .ok_or_else(|| Error::Invalid("missing key policies".into()))?
                    .split(',')
                    .map(PolicyRef::parse)
                    .collect::<Result<Vec<_>>>()?;
                let reference = Servers::parse(kv.get("servers").unwrap_or("1"))?;
                let reference_cap_a = kv.get("cap_a").map(|_| kv.int_or("cap_a", 0).map(|v| v as u32)).transpose()?;
                if var == SweepVar::Lambda {
                    let cap = reference.capacity(mu);
                    if let Some(x) = points.iter().find(|&&x| x <= 0.0 || x >= cap) {
                        return invalid(format!("lambda={x} is outside the stable range (0, {cap})"));
                    }
                }
                Ok(Experiment::Ratio(RatioSweep { base, var, points, policies, reference, reference_cap_a }))
            }
            "routing" => {
                kv.check_keys(&[COMMON_KEYS, ROUTING_KEYS].concat())?;
                let base = TwoSiteParams {
                    lambda1: kv.required("lambda1")?,
                    lambda2: kv.required("lambda2")?,
                    d_r: 0.0,
                    mu,
                    delta,
                    omega,
                    servers1: kv.int_or("servers1", 1)? as u32,
                    servers2: kv.int_or("servers2", 1)? as u32,
                };
                base.validate()?;
                let d_r = grid(kv.num_or("d_r_from", 0.0)?, kv.num_or("d_r_to", 5.0)?, kv.num_or("d_r_step", 0.25)?, false)?;
                let granularity = kv.num_or("granularity", DEFAULT_GRANULARITY)?;
                let mut options = TwoSiteOptions::default();
                if kv.get("cap").is_some() {
                    options.cap = Some(kv.int_or("cap", 0)? as u32);
                }
                Ok(Experiment::Routing(RoutingSweep { base, d_r, granularity, options }))
            }
            k => Err(Error::Parse(format!("kind: expected ratio or routing, got {k:?}"))),
        }
    }

    /// Run and render as CSV.
    pub fn run_csv(&self) -> Result<String> {
        match self {
            Experiment::Ratio(s) => Ok(s.to_csv(&s.run()?)),
            Experiment::Routing(s) => Ok(RoutingSweep::to_csv(&s.run()?)),
        }
    }
}

/// Simulation settings from a config, falling back to the defaults.
pub fn sim_config(kv: &KeyValues) -> Result<SimConfig> {
    let d = SimConfig::default();
    let cfg = SimConfig {
        seed: kv.int_or("seed", d.seed)?,
        warmup: kv.num_or("warmup", d.warmup)?,
        horizon: kv.num_or("horizon", d.horizon)?,
        replications: kv.int_or("replications", d.replications as u64)? as usize,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Built-in figure presets, as config text.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig5a", include_str!("../presets/fig5a.cfg")),
    ("fig5b", include_str!("../presets/fig5b.cfg")),
    ("fig5c", include_str!("../presets/fig5c.cfg")),
    ("fig5d", include_str!("../presets/fig5d.cfg")),
    ("fig6a", include_str!("../presets/fig6a.cfg")),
    ("fig6b", include_str!("../presets/fig6b.cfg")),
    ("fig6c", include_str!("../presets/fig6c.cfg")),
    ("fig6d", include_str!("../presets/fig6d.cfg")),
    ("fig7a", include_str!("../presets/fig7a.cfg")),
    ("fig7b", include_str!("../presets/fig7b.cfg")),
    ("fig7c", include_str!("../presets/fig7c.cfg")),
    ("fig7d", include_str!("../presets/fig7d.cfg")),
    ("fig8", include_str!("../presets/fig8.cfg")),
    ("fig9a", include_str!("../presets/fig9a.cfg")),
    ("fig9b", include_str!("../presets/fig9b.cfg")),
    ("fig9c", include_str!("../presets/fig9c.cfg")),
    ("fig9d", include_str!("../presets/fig9d.cfg")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}
