use super::dual::char_roots;
use crate::error::{invalid, Result};
use crate::model::{Metrics, SystemParams};

/// A fresh server per request, released on completion.
pub fn server_per_request(p: &SystemParams) -> Result<Metrics> {
    p.validate()?;
    Ok(Metrics::new(1.0 / p.mu + p.delta, p.lambda * (1.0 + p.delta * p.mu)))
}

/// Waiting-count weights for the reactive policy, relative to zero waiting.
/// Returns (finite weights for i < s, weight at s, tail ratio).
pub(crate) fn reactive_weights(p: &SystemParams, s: u32) -> (Vec<f64>, f64, f64) {
    let lam = p.lambda;
    let mut w = Vec::with_capacity(s as usize);
    let mut prod = 1.0;
    for i in 0..s {
        if i > 0 {
            prod *= lam / (lam + i as f64 / p.delta);
        }
        w.push(prod);
    }
    let ratio = lam / (lam + s as f64 / p.delta);
    (w, prod * ratio, ratio)
}

/// Allocation started on each arrival with at most `s` setups in flight;
/// a freed server is handed to a waiting request, otherwise released.
pub fn reactive_unlimited(p: &SystemParams, s: u32) -> Result<Metrics> {
    p.validate()?;
    if s == 0 {
        return invalid("s must be at least 1");
    }
    if p.delta == 0.0 {
        return Ok(Metrics::new(1.0 / p.mu, p.lambda));
    }
    let (w, ws, ratio) = reactive_weights(p, s);
    let sf = s as f64;
    let o = 1.0 - ratio;
    let total: f64 = w.iter().sum::<f64>() + ws / o;
    let head_mean: f64 = w.iter().enumerate().map(|(i, v)| i as f64 * v).sum();
    let waiting = (head_mean + ws * (sf / o + ratio / (o * o))) / total;
    let setups = (head_mean + ws * sf / o) / total;
    Ok(Metrics::new(1.0 / p.mu + waiting / p.lambda, p.lambda + p.mu * setups))
}

/// One server kept idle-and-ready whenever possible; a new allocation starts
/// as soon as every allocated server is busy.
pub fn proactive_unlimited(p: &SystemParams) -> Result<Metrics> {
    p.validate()?;
    let mu = p.mu;
    if p.delta == 0.0 {
        return Ok(Metrics::new(1.0 / mu, mu + p.lambda));
    }
    let r = char_roots(p.lambda, mu, p.delta).r1;
    let odds = r / (1.0 - r);
    let inv_d = 1.0 / p.delta;
    let resp = (1.0 / mu) * ((mu + inv_d) / p.lambda) * odds;
    let cost = mu * (1.0 + r) + inv_d * odds;
    Ok(Metrics::new(resp, cost))
}
