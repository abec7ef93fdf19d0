use dynalloc::experiments::*;
use dynalloc::{Error, HoldTimer, PolicySpec};

#[test]
fn every_preset_parses() {
    assert_eq!(PRESETS.len(), 17);
    for (name, text) in PRESETS {
        let kv = KeyValues::parse(text).unwrap();
        match Experiment::from_config(&kv).unwrap() {
            Experiment::Ratio(s) => {
                assert!(!name.starts_with("fig9"), "{name}");
                assert!(!s.points.is_empty() && !s.policies.is_empty(), "{name}");
            }
            Experiment::Routing(_) => assert!(name.starts_with("fig9"), "{name}"),
        }
    }
    assert!(preset("fig8").is_some() && preset("fig8a").is_none());
}

#[test]
fn key_values_reject_mistakes() {
    let kv = KeyValues::parse("# comment\nmu = 1\n\ndelta=2  \n").unwrap();
    assert_eq!(kv.get("delta"), Some("2"));
    assert!(matches!(KeyValues::parse("mu = 1\nmu = 2"), Err(Error::Parse(_))));
    assert!(matches!(KeyValues::parse("just words"), Err(Error::Parse(_))));
    let mut kv = KeyValues::parse(preset("fig5a").unwrap()).unwrap();
    kv.set("colour=blue").unwrap();
    assert!(Experiment::from_config(&kv).is_err());
}

#[test]
fn policy_references_parse() {
    let r = PolicyRef::parse("holdon:k=det:T=4").unwrap();
    assert_eq!(r.label, "holdon:k=det:T=4");
    assert_eq!(r.kind, PolicyKind::Fixed(PolicySpec::HoldOn { k: HoldTimer::Deterministic, t: 4.0 }));
    assert_eq!(
        PolicyRef::parse("optimal:servers=unlimited:cap_a=1").unwrap().kind,
        PolicyKind::Optimal { servers: Servers::Unlimited, cap_a: Some(1) }
    );
    assert_eq!(PolicyRef::parse("one-always:l=2:h=3").unwrap().kind, PolicyKind::OneAlways { l: 2, h: 3 });
    for bad in ["holdon:T=-1", "reactive:s=0", "nonsense", "batching:b=x", "holdon:T=1:T=2"] {
        assert!(PolicyRef::parse(bad).is_err(), "{bad}");
    }
}

#[test]
fn grids_include_both_ends() {
    assert_eq!(grid(0.01, 0.05, 0.01, false).unwrap(), vec![0.01, 0.02, 0.03, 0.04, 0.05]);
    assert_eq!(grid(0.01, 100.0, 1.0, true).unwrap(), vec![0.01, 0.1, 1.0, 10.0, 100.0]);
    assert!(grid(1.0, 0.0, 0.1, false).is_err());
    assert!(grid(0.0, 1.0, 0.1, true).is_err());
}
