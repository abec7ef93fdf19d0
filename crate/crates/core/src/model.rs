use crate::error::{invalid, Result};
use crate::smdp::PolicyTable;

/// Arrival rate, per-server service rate, mean setup delay and delay weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub lambda: f64,
    pub mu: f64,
    pub delta: f64,
    pub omega: f64,
}

impl SystemParams {
    pub fn new(lambda: f64, mu: f64, delta: f64, omega: f64) -> Result<Self> {
        let p = SystemParams { lambda, mu, delta, omega };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return invalid(format!("lambda must be positive and finite, got {}", self.lambda));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return invalid(format!("mu must be positive and finite, got {}", self.mu));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return invalid(format!("delta must be nonnegative and finite, got {}", self.delta));
        }
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return invalid(format!("omega must be nonnegative and finite, got {}", self.omega));
        }
        Ok(())
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        SystemParams { lambda, ..*self }
    }
}

/// Mean response time and cost rate of a policy.
///
/// `q` is only filled in for two-site runs, where it holds the mean number
/// of requests in the system including the transfer-time contribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub r: f64,
    pub c: f64,
    pub q: Option<f64>,
}

impl Metrics {
    pub fn new(r: f64, c: f64) -> Self {
        Metrics { r, c, q: None }
    }

    pub fn objective(&self, p: &SystemParams) -> f64 {
        objective(self, p)
    }
}

/// Weighted sum of the request-time and server-time accumulation rates.
pub fn objective(m: &Metrics, p: &SystemParams) -> f64 {
    match m.q {
        Some(q) => p.omega * q + m.c,
        None => p.omega * p.lambda * m.r + m.c,
    }
}

/// Distribution of the idle-server holding time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HoldTimer {
    /// Erlang with the given number of exponential stages.
    Erlang(u32),
    Deterministic,
}

impl HoldTimer {
    /// Level-0 mass relative to the idle state in the single-server chain:
    /// `(λT/k + 1)^k` for Erlang-k, `e^{λT}` for deterministic holding.
    pub fn growth(&self, lambda: f64, t: f64) -> f64 {
        if t.is_infinite() {
            return f64::INFINITY;
        }
        match *self {
            HoldTimer::Erlang(k) => {
                let k = k as f64;
                (k * (lambda * t / k).ln_1p()).exp()
            }
            HoldTimer::Deterministic => (lambda * t).exp(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            HoldTimer::Erlang(0) => invalid("Erlang shape must be at least 1"),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    AlwaysOn { servers: u32 },
    HoldOn { k: HoldTimer, t: f64 },
    Batching { b: u32 },
    DualOneAlways { l: u32, h: u32, mu1: f64, mu2: f64 },
    DualBothDynamic,
    StateDepRates { c: u32, rates: Vec<f64>, k: HoldTimer, t: f64 },
    ServerPerRequest,
    ReactiveUnlimited { s: u32 },
    ProactiveUnlimited,
    SmdpTable(PolicyTable),
}

impl PolicySpec {
    /// Dual one-always with two identical servers of rate `mu`.
    pub fn dual_identical(l: u32, h: u32, mu: f64) -> Self {
        PolicySpec::DualOneAlways { l, h, mu1: mu, mu2: 2.0 * mu }
    }

    /// Single server that serves at `mu` with one request and at `2mu` with more.
    pub fn both_together(mu: f64) -> Self {
        PolicySpec::StateDepRates {
            c: 2,
            rates: vec![mu, 2.0 * mu],
            k: HoldTimer::Erlang(1),
            t: 0.0,
        }
    }

    /// Number of servers the policy may hold at once, if bounded.
    pub fn server_cap(&self) -> Option<u32> {
        match self {
            PolicySpec::AlwaysOn { servers } => Some(*servers),
            PolicySpec::HoldOn { .. } | PolicySpec::Batching { .. } => Some(1),
            PolicySpec::DualOneAlways { .. } | PolicySpec::DualBothDynamic => Some(2),
            PolicySpec::StateDepRates { c, .. } => Some(*c),
            PolicySpec::SmdpTable(t) => Some(t.caps.total as u32),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PolicySpec::AlwaysOn { servers } if *servers == 0 => invalid("servers must be at least 1"),
            PolicySpec::HoldOn { k, t } => {
                k.validate()?;
                if !(*t >= 0.0) {
                    return invalid(format!("holding time must be nonnegative, got {t}"));
                }
                Ok(())
            }
            PolicySpec::Batching { b } if *b == 0 => invalid("batch threshold must be at least 1"),
            PolicySpec::DualOneAlways { l, h, mu1, mu2 } => {
                if *l < 1 || l > h {
                    return invalid(format!("thresholds need 1 <= l <= h, got l={l} h={h}"));
                }
                if !(*mu1 > 0.0 && mu2 > mu1 && mu2.is_finite()) {
                    return invalid(format!("rates need mu2 > mu1 > 0, got mu1={mu1} mu2={mu2}"));
                }
                Ok(())
            }
            PolicySpec::StateDepRates { c, rates, k, t } => {
                k.validate()?;
                if *c == 0 || rates.len() != *c as usize {
                    return invalid(format!("need exactly c={c} rates, got {}", rates.len()));
                }
                if rates.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
                    return invalid("rates must be positive and finite");
                }
                if rates.windows(2).any(|w| w[1] < w[0]) {
                    return invalid("rates must be nondecreasing");
                }
                if !(*t >= 0.0) {
                    return invalid(format!("holding time must be nonnegative, got {t}"));
                }
                Ok(())
            }
            PolicySpec::ReactiveUnlimited { s } if *s == 0 => invalid("s must be at least 1"),
            _ => Ok(()),
        }
    }
}
