use crate::error::{invalid, unstable, Result};
use crate::model::{HoldTimer, Metrics, SystemParams};

/// Standard M/M/k queue with every server permanently allocated.
pub fn mmk_baseline(p: &SystemParams, servers: u32) -> Result<Metrics> {
    p.validate()?;
    if servers == 0 {
        return invalid("servers must be at least 1");
    }
    let k = servers as f64;
    if p.lambda >= k * p.mu {
        return unstable(format!("lambda={} >= {}*mu", p.lambda, servers));
    }
    let wait = erlang_c(servers, p.lambda / p.mu) / (k * p.mu - p.lambda);
    Ok(Metrics::new(1.0 / p.mu + wait, k * p.mu))
}

/// Probability that an arrival waits in an M/M/k queue with offered load `a`.
pub fn erlang_c(servers: u32, a: f64) -> f64 {
    // Erlang B by the usual stable recursion, then convert.
    let mut b = 1.0;
    for j in 1..=servers {
        b = a * b / (j as f64 + a * b);
    }
    let k = servers as f64;
    k * b / (k - a * (1.0 - b))
}

fn check_single(p: &SystemParams) -> Result<()> {
    p.validate()?;
    if p.lambda >= p.mu {
        return unstable(format!("lambda={} >= mu={}", p.lambda, p.mu));
    }
    Ok(())
}

/// Single server released after an idle holding period of mean `t`.
pub fn single_hold_on(p: &SystemParams, k: HoldTimer, t: f64) -> Result<Metrics> {
    check_single(p)?;
    k.validate()?;
    if !(t >= 0.0) {
        return invalid(format!("holding time must be nonnegative, got {t}"));
    }
    let x = k.growth(p.lambda, t);
    let ld = p.lambda * p.delta;
    let r = 1.0 / (p.mu - p.lambda) + p.delta * (1.0 + ld) / (x + ld);
    let c = p.mu - (p.mu - p.lambda) / (x + ld);
    Ok(Metrics::new(r, c))
}

/// Single server allocated once `b` requests have accumulated, released when idle.
pub fn single_batching(p: &SystemParams, b: u32) -> Result<Metrics> {
    check_single(p)?;
    if b == 0 {
        return invalid("batch threshold must be at least 1");
    }
    let (lam, mu) = (p.lambda, p.mu);
    let ld = lam * p.delta;
    let bf = b as f64;
    let r = 1.0 / (mu - lam) + p.delta + bf * (bf - 1.0) / (2.0 * lam * (ld + bf));
    let c = mu - bf * (mu - lam) / (ld + bf);
    Ok(Metrics::new(r, c))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SingleChoice {
    AlwaysOn,
    Batching(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleOptimum {
    pub value: f64,
    pub best: SingleChoice,
    /// Minimizing batch threshold, even when keeping the server on wins.
    pub best_batch: u32,
}

/// Largest batch threshold examined; only reached when the delay weight is
/// zero or tiny, where the bracket keeps decreasing toward its limit.
pub const MAX_BATCH: u32 = 1_000_000;

/// Optimal single-server objective for a fixed arrival rate: the better of
/// never releasing the server and the best batching threshold.
pub fn single_optimal_objective(p: &SystemParams) -> Result<SingleOptimum> {
    check_single(p)?;
    let (lam, mu, w) = (p.lambda, p.mu, p.omega);
    let ld = lam * p.delta;
    let bracket = |b: f64| w * (ld + b * (b - 1.0) / (2.0 * (ld + b))) - b * (mu - lam) / (ld + b);

    let mut best_b = 1;
    let mut best = bracket(1.0);
    let mut prev = best;
    let mut rises = 0;
    for b in 2..=MAX_BATCH {
        let v = bracket(b as f64);
        if v < best {
            best = v;
            best_b = b;
        }
        if v > prev && b > best_b {
            rises += 1;
            if rises == 3 {
                break;
            }
        } else {
            rises = 0;
        }
        prev = v;
    }
    let base = w * (lam / mu) / (1.0 - lam / mu) + mu;
    if best < 0.0 {
        Ok(SingleOptimum { value: base + best, best: SingleChoice::Batching(best_b), best_batch: best_b })
    } else {
        Ok(SingleOptimum { value: base, best: SingleChoice::AlwaysOn, best_batch: best_b })
    }
}

/// Weights `y_i = P(level i) / P(idle)` for the single-server chain whose
/// service rate with `i` requests is `rates[min(i,c)-1]`. Also returns the
/// tail sum and tail first moment from level `c` on.
pub(crate) struct StateDepWeights {
    pub x: f64,
    pub sigma: f64,
    /// y_0..y_{c-1}
    pub head: Vec<f64>,
    pub tail_sum: f64,
    pub tail_mean: f64,
}

pub(crate) fn statedep_weights(p: &SystemParams, rates: &[f64], k: HoldTimer, t: f64) -> StateDepWeights {
    let lam = p.lambda;
    let ld = lam * p.delta;
    let sigma = ld / (ld + 1.0);
    let x = k.growth(lam, t);
    let c = rates.len();
    let mut head = Vec::with_capacity(c);
    head.push(x);
    let mut sp = 1.0;
    for rate in rates.iter().take(c - 1) {
        sp *= sigma;
        let prev = *head.last().unwrap();
        head.push(sp + lam * prev / rate);
    }
    let rho_c = lam / rates[c - 1];
    let sc = sigma.powi(c as i32);
    let yc1 = head[c - 1];
    let tail_sum = (sc * (ld + 1.0) + rho_c * yc1) / (1.0 - rho_c);
    let moment = sc * (ld + 1.0) * (c as f64 + ld);
    let tail_mean = (moment + rho_c * (c as f64 * yc1 + tail_sum)) / (1.0 - rho_c);
    StateDepWeights { x, sigma, head, tail_sum, tail_mean }
}

/// Single server whose service rate depends on the number of requests present;
/// it is charged at the highest rate whenever allocated.
pub fn single_statedep_rates(p: &SystemParams, rates: &[f64], k: HoldTimer, t: f64) -> Result<Metrics> {
    p.validate()?;
    k.validate()?;
    if rates.is_empty() || rates.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return invalid("rates must be nonempty, positive and finite");
    }
    if rates.windows(2).any(|w| w[1] < w[0]) {
        return invalid("rates must be nondecreasing");
    }
    if !(t >= 0.0) {
        return invalid(format!("holding time must be nonnegative, got {t}"));
    }
    let top = *rates.last().unwrap();
    if p.lambda >= top {
        return unstable(format!("lambda={} >= top rate {}", p.lambda, top));
    }
    let w = statedep_weights(p, rates, k, t);
    if w.x.is_infinite() {
        return statedep_never_release(p, rates);
    }
    // Level 0 weight y_0 = X already counts the idle state and the holding states.
    let total: f64 = w.head.iter().sum::<f64>() + w.tail_sum;
    let mean: f64 = w.head.iter().enumerate().map(|(i, y)| i as f64 * y).sum::<f64>() + w.tail_mean;
    let p0 = 1.0 / total;
    Ok(Metrics::new(mean / total / p.lambda, top * (1.0 - p0)))
}

/// Holding time infinite: a birth-death chain with the server always on.
fn statedep_never_release(p: &SystemParams, rates: &[f64]) -> Result<Metrics> {
    let c = rates.len();
    let mut y = vec![1.0];
    for rate in rates.iter().take(c - 1) {
        let prev = *y.last().unwrap();
        y.push(prev * p.lambda / rate);
    }
    let rho = p.lambda / rates[c - 1];
    let yc1 = y[c - 1];
    let tail_sum = rho * yc1 / (1.0 - rho);
    let tail_mean = rho * yc1 * (c as f64 - (c as f64 - 1.0) * rho) / ((1.0 - rho) * (1.0 - rho));
    let total: f64 = y.iter().sum::<f64>() + tail_sum;
    let mean: f64 = y.iter().enumerate().map(|(i, v)| i as f64 * v).sum::<f64>() + tail_mean;
    Ok(Metrics::new(mean / total / p.lambda, rates[c - 1]))
}
