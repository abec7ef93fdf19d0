use super::single::mmk_baseline;
use crate::error::{invalid, unstable, Result};
use crate::model::{Metrics, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharRoots {
    pub r1: f64,
    pub r2: f64,
}

/// Roots of `x^2 - ((λ+μ₁+1/Δ)/μ₁) x + λ/μ₁`.
///
/// The larger root is taken from the "+" branch and the smaller one from the
/// product of the roots, which avoids cancellation when `1/Δ` is small.
pub fn char_roots(lambda: f64, mu1: f64, delta: f64) -> CharRoots {
    let b = (lambda + mu1 + 1.0 / delta) / mu1;
    let prod = lambda / mu1;
    let disc = (b * b - 4.0 * prod).max(0.0);
    let r2 = 0.5 * (b + disc.sqrt());
    CharRoots { r1: prod / r2, r2 }
}

fn check_one_always(p: &SystemParams, mu1: f64, mu2: f64, l: u32, h: u32) -> Result<()> {
    p.validate()?;
    if l < 1 || l > h {
        return invalid(format!("thresholds need 1 <= l <= h, got l={l} h={h}"));
    }
    if !(mu1 > 0.0 && mu2 > mu1 && mu2.is_finite()) {
        return invalid(format!("rates need mu2 > mu1 > 0, got mu1={mu1} mu2={mu2}"));
    }
    if p.lambda >= mu2 {
        return unstable(format!("lambda={} >= mu2={mu2}", p.lambda));
    }
    Ok(())
}

/// Unnormalized stationary masses of the one-always-allocated dual system.
///
/// Families: `base[i]` for `0 <= i < h` (second server off), `setup[i-l]` for
/// `l <= i <= h` (second server being allocated), `extra[i-l]` for
/// `l <= i <= h` (both in use). States above `h` are summarized by their
/// geometric tails.
#[derive(Debug, Clone)]
pub(crate) struct OneAlwaysMasses {
    pub l: usize,
    pub h: usize,
    pub base: Vec<f64>,
    pub setup: Vec<f64>,
    pub extra: Vec<f64>,
    /// decay of the setup family above h (0 when setup is instantaneous)
    pub r1: f64,
    pub rho2: f64,
    /// forcing coefficient of the extra family above h
    pub kappa: f64,
    pub setup_tail: (f64, f64),
    pub extra_tail: (f64, f64),
}

const RESCALE_AT: f64 = 1e200;

impl OneAlwaysMasses {
    pub fn solve(p: &SystemParams, mu1: f64, mu2: f64, l: u32, h: u32) -> Self {
        let (l, h) = (l as usize, h as usize);
        let lam = p.lambda;
        let rho2 = lam / mu2;
        let width = h - l + 1;
        let mut setup = vec![0.0; width];
        let mut extra = vec![0.0; width];
        let (r1, kappa, setup_tail, extra_tail): (f64, f64, (f64, f64), (f64, f64));
        let hf = h as f64;

        if p.delta > 0.0 {
            let roots = char_roots(lam, mu1, p.delta);
            r1 = roots.r1;
            let ratio = roots.r1 / roots.r2;
            let big_h = width as i32;
            let denom = 1.0 - ratio.powi(big_h);
            for (idx, v) in setup.iter_mut().enumerate() {
                let j = idx as i32 + 1;
                *v = roots.r2.powi(j - big_h) * (1.0 - ratio.powi(j)) / denom;
            }
            setup[width - 1] = 1.0;
            let q = 1.0 - r1;
            setup_tail = (1.0 / q, hf / q + r1 / (q * q));

            // Flow from setup states at or above level i+1 into the extra family.
            let mut above = 1.0 / q; // setup mass at levels >= h
            let inv_d = 1.0 / p.delta;
            let mut suffix = vec![0.0; width];
            for idx in (0..width).rev() {
                suffix[idx] = above;
                if idx > 0 {
                    above += setup[idx - 1];
                }
            }
            // suffix[idx] = setup mass at levels >= l+idx
            extra[0] = suffix[0] * inv_d / mu2;
            for idx in 0..width - 1 {
                extra[idx + 1] = rho2 * extra[idx] + suffix[idx + 1] * inv_d / mu2;
            }
            kappa = inv_d / (mu2 * q);
            let eh = extra[width - 1];
            let s = (eh + kappa * r1 / q) / (1.0 - rho2);
            let m = (hf * eh + rho2 * s + kappa * (hf * r1 / q + r1 / (q * q))) / (1.0 - rho2);
            extra_tail = (s, m);
        } else {
            // Instant setup: anchor the extra state at level h.
            r1 = 0.0;
            kappa = 0.0;
            setup_tail = (0.0, 0.0);
            let mut acc = 1.0;
            let mut pow = 1.0;
            extra[0] = 1.0;
            for v in extra.iter_mut().skip(1) {
                pow *= rho2;
                acc += pow;
                *v = acc;
            }
            let scale = 1.0 / acc;
            for v in extra.iter_mut() {
                *v *= scale;
            }
            let q = 1.0 - rho2;
            // levels above h: rho2^{i-h}
            let eh_tail = (rho2 / q, hf * rho2 / q + rho2 / (q * q));
            return Self::finish(p, mu1, mu2, l, h, setup, extra, r1, rho2, kappa, setup_tail, eh_tail, true);
        }
        Self::finish(p, mu1, mu2, l, h, setup, extra, r1, rho2, kappa, setup_tail, extra_tail, false)
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        p: &SystemParams,
        mu1: f64,
        mu2: f64,
        l: usize,
        h: usize,
        mut setup: Vec<f64>,
        mut extra: Vec<f64>,
        r1: f64,
        rho2: f64,
        kappa: f64,
        mut setup_tail: (f64, f64),
        mut extra_tail: (f64, f64),
        instant: bool,
    ) -> Self {
        let lam = p.lambda;
        // Without setup, levels >= h are extra states only and the level-h
        // entry of `extra` is the anchor; the tail covers levels above h.
        let into_base = if instant { mu2 * extra[0] } else { mu1 * setup[0] + mu2 * extra[0] };
        let mut base = vec![0.0; h];
        let top = into_base / lam;
        base[h - 1] = top;
        let mut feed = top;
        let mut scale = 1.0;
        for i in (0..h - 1).rev() {
            let v = if i + 1 >= l { (mu1 * base[i + 1] + lam * feed) / lam } else { mu1 * base[i + 1] / lam };
            base[i] = v;
            if v > RESCALE_AT {
                for b in base[i..].iter_mut() {
                    *b /= RESCALE_AT;
                }
                feed /= RESCALE_AT;
                scale /= RESCALE_AT;
            }
        }
        if scale != 1.0 {
            for v in setup.iter_mut().chain(extra.iter_mut()) {
                *v *= scale;
            }
            setup_tail = (setup_tail.0 * scale, setup_tail.1 * scale);
            extra_tail = (extra_tail.0 * scale, extra_tail.1 * scale);
        }
        OneAlwaysMasses { l, h, base, setup, extra, r1, rho2, kappa: kappa * scale, setup_tail, extra_tail }
    }

    /// Levels `l..h` of the setup family are stored with the level-h value last;
    /// the tail pair covers levels `>= h` for the setup family when setup takes
    /// time, and levels `> h` for the extra family with instant setup.
    /// Total unnormalized mass, first moment of the request count, and the
    /// mass of the base family.
    pub fn totals(&self, p: &SystemParams) -> (f64, f64, f64) {
        let (l, h) = (self.l, self.h);
        let width = h - l + 1;
        let sb: f64 = self.base.iter().sum();
        let mb: f64 = self.base.iter().enumerate().map(|(i, v)| i as f64 * v).sum();
        // setup levels l..h-1 are explicit; level h onward is in the tail
        let (mut ss, mut ms) = self.setup_tail;
        let (mut se, mut me) = self.extra_tail;
        for idx in 0..width - 1 {
            let i = (l + idx) as f64;
            ss += self.setup[idx];
            ms += i * self.setup[idx];
            se += self.extra[idx];
            me += i * self.extra[idx];
        }
        if p.delta == 0.0 {
            // with instant setup the extra tail starts above h
            se += self.extra[width - 1];
            me += h as f64 * self.extra[width - 1];
        }
        (sb + ss + se, mb + ms + me, sb)
    }

    pub fn summary(&self, p: &SystemParams, mu1: f64, mu2: f64) -> Metrics {
        let (total, mean, sb) = self.totals(p);
        let cost = (mu1 * sb + mu2 * (total - sb)) / total;
        Metrics::new(mean / total / p.lambda, cost)
    }
}

/// One server always allocated; the second is requested when the number of
/// requests reaches `h` and released (or its setup cancelled) when it drops
/// below `l`. Service runs at `mu1` with one server and `mu2` with both.
pub fn dual_one_always(p: &SystemParams, mu1: f64, mu2: f64, l: u32, h: u32) -> Result<Metrics> {
    check_one_always(p, mu1, mu2, l, h)?;
    let masses = OneAlwaysMasses::solve(p, mu1, mu2, l, h);
    let m = masses.summary(p, mu1, mu2);
    if !(m.r.is_finite() && m.c.is_finite()) {
        return invalid("dual one-always evaluation overflowed");
    }
    Ok(m)
}

/// The equal-threshold case in its simplified closed form.
pub fn dual_one_always_equal(p: &SystemParams, mu1: f64, mu2: f64, h: u32) -> Result<Metrics> {
    check_one_always(p, mu1, mu2, h, h)?;
    if p.delta == 0.0 {
        return dual_one_always(p, mu1, mu2, h, h);
    }
    let lam = p.lambda;
    let r1 = char_roots(lam, mu1, p.delta).r1;
    let x = mu1 / lam;
    // g = sum_{m<h} x^m and F = sum_{i<h} i x^{h-1-i}, by Horner so that x near 1
    // needs no special case.
    let (mut g, mut big_f) = (0.0, 0.0);
    for i in 0..h {
        big_f = x * big_f + i as f64;
        g = x * g + 1.0;
    }
    let hf = h as f64;
    let f = big_f - hf * g;
    let w = (1.0 - r1) / r1;
    let e_mass = (lam / r1 - mu1) / (mu2 - lam);
    let d = 1.0 + e_mass + w * g;
    let num = lam * (lam / r1 - mu1) / ((mu2 - lam) * (mu2 - lam)) + w * f - g;
    let mean = hf + r1 / (1.0 - r1) + num / d;
    let base = w * g / d;
    let c = mu1 * base + mu2 * (1.0 - base);
    Ok(Metrics::new(mean / lam, c))
}

/// Both servers allocated on demand and released when idle.
pub fn dual_both_dynamic(p: &SystemParams) -> Result<Metrics> {
    p.validate()?;
    let (lam, mu) = (p.lambda, p.mu);
    if lam >= 2.0 * mu {
        return unstable(format!("lambda={lam} >= 2*mu"));
    }
    if p.delta == 0.0 {
        let m = mmk_baseline(p, 2)?;
        return Ok(Metrics::new(m.r, lam));
    }
    let s = BothDynamicSums::new(p);
    let total = 1.0 + s.sd + s.sb + s.se;
    let mean = (s.md + s.mb + s.me) / total;
    let cost = (mu * (s.p1d + s.p1b) + 2.0 * mu * (s.sd - s.p1d + s.sb - s.p1b + s.se)) / total;
    Ok(Metrics::new(mean / lam, cost))
}

/// Masses relative to the idle state for the both-dynamic chain.
pub(crate) struct BothDynamicSums {
    pub r1: f64,
    pub q: f64,
    pub sigma: f64,
    /// coefficient of the divided-difference term in the one-active family
    pub kz: f64,
    pub p1d: f64,
    pub p1b: f64,
    pub sd: f64,
    pub md: f64,
    pub sb: f64,
    pub mb: f64,
    pub se: f64,
    pub me: f64,
}

impl BothDynamicSums {
    pub fn new(p: &SystemParams) -> Self {
        let (lam, mu) = (p.lambda, p.mu);
        let a = 1.0 / p.delta;
        let roots = char_roots(lam, mu, p.delta);
        let r1 = roots.r1;
        let q = lam / (lam + 2.0 * a);
        let sigma = lam / (lam + a);
        // Z written through the larger root; it stays finite when q = r1.
        let z = -lam * a / ((lam + 2.0 * a) * (lam + 2.0 * a) * mu * (q - roots.r2));
        let k = 2.0 * (lam + 2.0 * a) * lam / (lam + a);
        let kz = k * z;
        let p1d = sigma;
        let p1b = lam / mu;
        let ld2 = 1.0 + lam * p.delta / 2.0;
        let sd = sigma * ld2;
        let md = sigma * ld2 * ld2;
        let (oq, o1) = (1.0 - q, 1.0 - r1);
        let sb = lam / (mu * o1) + kz / (oq * o1);
        let mb = lam / (mu * o1 * o1) + kz * (2.0 - q - r1) / (oq * oq * o1 * o1);
        let den = 2.0 * mu - lam;
        let se = (lam * (sd + sb) - mu * (sb - p1b)) / den;
        let me = (lam * (md + sd + mb + sb + se) - mu * (mb - p1b)) / den;
        BothDynamicSums { r1, q, sigma, kz, p1d, p1b, sd, md, sb, mb, se, me }
    }

    /// Mass of the state with `i >= 1` requests and one active server.
    pub fn one_active(&self, p: &SystemParams, i: u32) -> f64 {
        let n = i - 1;
        self.r1.powi(n as i32) * p.lambda / p.mu + self.kz * divided_power_difference(self.q, self.r1, n)
    }
}

/// `(x^n - y^n)/(x - y)`, evaluated as a sum when the arguments are close.
pub(crate) fn divided_power_difference(x: f64, y: f64, n: u32) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let scale = x.abs().max(y.abs());
    if (x - y).abs() > 1e-3 * scale {
        return (x.powi(n as i32) - y.powi(n as i32)) / (x - y);
    }
    let mut acc = 0.0;
    let mut xp = 1.0;
    let mut yp = y.powi(n as i32 - 1);
    for _ in 0..n {
        acc += xp * yp;
        xp *= x;
        yp = if y != 0.0 { yp / y } else { 0.0 };
    }
    acc
}
