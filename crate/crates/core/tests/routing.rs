mod common;

use common::assert_close;
use dynalloc::routing::*;
use dynalloc::smdp::{solve_optimal, SolveOptions};
use dynalloc::Error;

fn scenario(lambda1: f64, lambda2: f64, d_r: f64, servers: u32) -> TwoSiteParams {
    TwoSiteParams { lambda1, lambda2, d_r, mu: 1.0, delta: 2.0, omega: 1.0, servers1: servers, servers2: servers }
}

fn zero() -> TwoSiteState {
    TwoSiteState { n1: 0, m1: 0, a1: 0, n2: 0, m2: 0, a2: 0 }
}

#[test]
fn action_catalog() {
    assert_eq!(TwoSiteAction::COUNT, 26);
    for i in 0..26 {
        assert_eq!(TwoSiteAction::from_index(i).index(), i);
    }
    for prov in Provision::ALL {
        assert_eq!(Provision::parse(prov.name()), Some(prov));
    }
    assert_eq!(TwoSiteAction::from_index(25).to_string(), "NC+R12");
}

#[test]
fn transition_examples() {
    let tp = scenario(0.3, 0.2, 1.5, 1);
    let space = TwoSiteSpace::new(10, 1, 1).unwrap();
    let nc_rl = TwoSiteAction { provision: Provision::Nc, route: Route::Local };
    let (t, r) = two_site_transitions(zero(), nc_rl, &tp, &space).unwrap();
    assert_eq!(t, vec![(TwoSiteState { n1: 1, ..zero() }, 0.3), (TwoSiteState { n2: 1, ..zero() }, 0.2)]);
    assert_eq!(r, 0.0);

    let ia1_r12 = TwoSiteAction { provision: Provision::Ia1, route: Route::ToSite2 };
    let (t, r) = two_site_transitions(zero(), ia1_r12, &tp, &space).unwrap();
    let forwarded = TwoSiteState { a1: 1, n2: 1, ..zero() };
    assert!(t.contains(&(forwarded, 0.3)));
    assert!(t.contains(&(TwoSiteState { m1: 1, ..zero() }, 0.5)));
    assert_close(r, -(0.3 * 1.5 + 1.0), 1e-15);

    let ia1_rl = TwoSiteAction { provision: Provision::Ia1, route: Route::Local };
    let (_, r_local) = two_site_transitions(zero(), ia1_rl, &tp, &space).unwrap();
    assert_close(r_local - r, 0.3 * 1.5, 1e-15);

    // IA1/D2 needs a1 = a2 = 0 and m2 > 0
    let ia1_d2 = TwoSiteAction { provision: Provision::Ia1D2, route: Route::Local };
    assert!(two_site_transitions(zero(), ia1_d2, &tp, &space).is_err());
    let s = TwoSiteState { m2: 1, ..zero() };
    assert!(two_site_transitions(s, ia1_d2, &tp, &space).is_ok());
}

#[test]
fn space_indexing_is_dense() {
    for (k1, k2) in [(1, 1), (2, 1), (0, 2), (2, 2)] {
        let space = TwoSiteSpace::new(7, k1, k2).unwrap();
        for (i, s) in space.states.iter().enumerate() {
            assert_eq!(space.index_of(*s), Some(i));
        }
    }
}

#[test]
fn disabled_second_site_reduces_to_one_site() {
    let mut tp = scenario(0.5, 0.0, 0.0, 1);
    tp.servers2 = 0;
    let two = solve_state_dependent(&tp, TwoSiteOptions::default()).unwrap();
    let one = solve_optimal(&tp.site(0.5), SolveOptions::servers(1).with_cap_a(Some(1))).unwrap();
    assert_close(two.objective(), one.objective(), 1e-6);
}

#[test]
fn balanced_split_equalizes_load() {
    let tp = scenario(1.7, 0.04, 1.0, 2);
    let f = balanced_fraction(&tp);
    assert_close(1.7 * (1.0 - f), 0.87, 1e-12);
    assert_close(0.04 + 1.7 * f, 0.87, 1e-12);
}

#[test]
fn empty_site_one_costs_only_site_two() {
    let tp = scenario(0.0, 0.4, 1.0, 1);
    let cache = SiteCache::new();
    let best = oblivious_optimal(&tp, 0.1, &cache).unwrap();
    let site2 = solve_optimal(&tp.site(0.4), SolveOptions::servers(1).with_cap_a(Some(1))).unwrap();
    assert_close(best.objective, site2.objective(), 1e-12);
}

#[test]
fn symmetric_sites_consolidate_and_order_holds() {
    let cache = SiteCache::new();
    let tp = scenario(0.3, 0.3, 0.1, 1);
    let obl = oblivious_optimal(&tp, 0.01, &cache).unwrap();
    // nearly everything moves to site 2; full consolidation is within 0.2%
    assert!(obl.fraction >= 0.9, "{}", obl.fraction);
    let all = split_objective(&tp, 1.0, &cache).unwrap().unwrap();
    assert!(all.objective <= obl.objective * 1.002);
    let sd = solve_state_dependent(&tp, TwoSiteOptions::default()).unwrap();
    assert!(sd.objective() <= obl.objective + 1e-8);
    for mode in [Baseline::LocalOnly, Baseline::AllToSite2, Baseline::Balanced] {
        let b = baseline_routing(&tp, mode, &cache).unwrap();
        assert!(obl.objective <= b.objective + 1e-8, "{mode:?}");
    }
    let m = sd.metrics;
    assert_close(m.q.unwrap() * tp.omega + m.c, sd.objective(), 1e-8);
}

#[test]
fn large_transfer_time_keeps_traffic_local() {
    let cache = SiteCache::new();
    let tp = scenario(0.4, 0.3, 1e4, 1);
    assert_eq!(oblivious_optimal(&tp, 0.05, &cache).unwrap().fraction, 0.0);
}

#[test]
fn finer_grid_never_hurts() {
    let cache = SiteCache::new();
    let tp = scenario(0.8, 0.04, 2.0, 1);
    let coarse = oblivious_optimal(&tp, 0.1, &cache).unwrap();
    let fine = oblivious_optimal(&tp, 0.05, &cache).unwrap();
    assert!(fine.objective <= coarse.objective + 1e-12);
}

#[test]
fn overloaded_baseline_is_reported() {
    let cache = SiteCache::new();
    let tp = scenario(0.8, 0.5, 1.0, 1);
    assert!(matches!(baseline_routing(&tp, Baseline::AllToSite2, &cache), Err(Error::Unstable(_))));
    assert!(baseline_routing(&tp, Baseline::LocalOnly, &cache).is_ok());
}

#[test]
fn two_site_table_text_lists_every_state() {
    let tp = scenario(0.3, 0.3, 0.5, 1);
    let res = solve_state_dependent(&tp, TwoSiteOptions { cap: Some(8), ..Default::default() }).unwrap();
    let text = res.table.to_text();
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, res.table.space.len());
    assert!(text.lines().nth(3).unwrap().starts_with("# n1 m1 a1 n2 m2 a2"));
}
