use std::fmt::Write as _;

use super::{allowed, build_state_space, Action, Caps, SmdpState, StateSpace};
use crate::error::{Error, Result};
use crate::model::SystemParams;

/// Action for every state of a capped state space.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    pub caps: Caps,
    /// Parameters the table was computed for (informational).
    pub params: SystemParams,
    space: StateSpace,
    actions: Vec<Action>,
}

impl PolicyTable {
    pub(crate) fn from_indices(caps: Caps, params: SystemParams, idx: &[usize]) -> Self {
        let space = build_state_space(caps).expect("caps already validated");
        let actions = idx.iter().map(|&i| Action::ALL[i]).collect();
        PolicyTable { caps, params, space, actions }
    }

    /// Build a table from a rule; fails if the rule picks a disallowed action.
    pub fn from_fn(caps: Caps, params: SystemParams, mut rule: impl FnMut(SmdpState) -> Action) -> Result<Self> {
        let space = build_state_space(caps)?;
        let mut actions = Vec::with_capacity(space.len());
        for &s in &space.states {
            let act = rule(s);
            if !allowed(s, act, &params, &caps) {
                return Err(Error::Invalid(format!("action {act} not allowed in state {s}")));
            }
            actions.push(act);
        }
        Ok(PolicyTable { caps, params, space, actions })
    }

    pub(crate) fn indices(&self) -> Vec<usize> {
        self.actions.iter().map(|a| a.index()).collect()
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn get(&self, s: SmdpState) -> Option<Action> {
        self.space.index_of(s).map(|i| self.actions[i])
    }

    pub fn states(&self) -> &[SmdpState] {
        &self.space.states
    }

    pub fn entries(&self) -> impl Iterator<Item = (SmdpState, Action)> + '_ {
        self.space.states.iter().copied().zip(self.actions.iter().copied())
    }

    /// Line-oriented text form: `#` header lines, then `n m a action` rows.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        let cap_a = self.caps.a.map_or("none".to_string(), |a| a.to_string());
        let _ = writeln!(out, "# policy table");
        let _ = writeln!(out, "# lambda={:?} mu={:?} delta={:?} omega={:?}", p.lambda, p.mu, p.delta, p.omega);
        let _ = writeln!(out, "# cap_n={} cap_total={} cap_a={}", self.caps.n, self.caps.total, cap_a);
        let _ = writeln!(out, "# n m a action");
        for (s, act) in self.entries() {
            let _ = writeln!(out, "{} {} {} {}", s.n, s.m, s.a, act);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut header = std::collections::HashMap::new();
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for tok in rest.split_whitespace() {
                    if let Some((k, v)) = tok.split_once('=') {
                        header.insert(k.to_string(), v.to_string());
                    }
                }
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("line {}: expected `n m a action`, got `{line}`", lineno + 1));
            if f.len() != 4 {
                return Err(bad());
            }
            let num = |s: &str| s.parse::<u32>().map_err(|_| bad());
            let act = Action::parse(f[3]).ok_or_else(bad)?;
            rows.push((SmdpState::new(num(f[0])?, num(f[1])?, num(f[2])?), act));
        }
        let get = |k: &str| header.get(k).ok_or_else(|| Error::Parse(format!("missing header key {k}")));
        let float = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| Error::Parse(format!("bad value for {k}"))) };
        let int = |k: &str| -> Result<u32> { get(k)?.parse().map_err(|_| Error::Parse(format!("bad value for {k}"))) };
        let params = SystemParams::new(float("lambda")?, float("mu")?, float("delta")?, float("omega")?)?;
        let cap_a = match get("cap_a")?.as_str() {
            "none" => None,
            v => Some(v.parse().map_err(|_| Error::Parse("bad value for cap_a".into()))?),
        };
        let caps = Caps::new(int("cap_n")?, int("cap_total")?, cap_a)?;
        let lookup: std::collections::HashMap<SmdpState, Action> = rows.into_iter().collect();
        PolicyTable::from_fn(caps, params, |s| *lookup.get(&s).unwrap_or(&Action::NC)).and_then(|t| {
            match t.states().iter().find(|s| !lookup.contains_key(s)) {
                Some(s) => Err(Error::MissingState(s.to_string())),
                None => Ok(t),
            }
        })
    }
}
