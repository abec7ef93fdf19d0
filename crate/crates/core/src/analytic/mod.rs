//! Closed-form evaluators for the simple allocation policies.

mod dual;
mod single;
mod states;
mod unlimited;

pub use dual::{char_roots, dual_both_dynamic, dual_one_always, dual_one_always_equal, CharRoots};
pub use single::{
    erlang_c, mmk_baseline, single_batching, single_hold_on, single_optimal_objective, single_statedep_rates,
    SingleChoice, SingleOptimum, MAX_BATCH,
};
pub use states::{state_probabilities, StateLabel, StateProbVector, DEFAULT_TAIL_TOLERANCE};
pub use unlimited::{proactive_unlimited, reactive_unlimited, server_per_request};

use crate::error::{invalid, Result};
use crate::model::{Metrics, PolicySpec, SystemParams};

/// Evaluate any policy that has a closed form.
pub fn evaluate(policy: &PolicySpec, p: &SystemParams) -> Result<Metrics> {
    policy.validate()?;
    match policy {
        PolicySpec::AlwaysOn { servers } => mmk_baseline(p, *servers),
        PolicySpec::HoldOn { k, t } => single_hold_on(p, *k, *t),
        PolicySpec::Batching { b } => single_batching(p, *b),
        PolicySpec::DualOneAlways { l, h, mu1, mu2 } => dual_one_always(p, *mu1, *mu2, *l, *h),
        PolicySpec::DualBothDynamic => dual_both_dynamic(p),
        PolicySpec::StateDepRates { rates, k, t, .. } => single_statedep_rates(p, rates, *k, *t),
        PolicySpec::ServerPerRequest => server_per_request(p),
        PolicySpec::ReactiveUnlimited { s } => reactive_unlimited(p, *s),
        PolicySpec::ProactiveUnlimited => proactive_unlimited(p),
        PolicySpec::SmdpTable(_) => invalid("policy tables are evaluated with smdp::stationary_metrics"),
    }
}
