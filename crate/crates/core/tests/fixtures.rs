use renet_core::sim::{telemedicine_default, telemedicine_ds_outage, Scenario};

fn load(src: &str) -> Scenario {
    Scenario::from_toml_str(src).unwrap_or_else(|e| panic!("{e}"))
}

#[test]
fn shipped_scenarios_match_builtin_fixtures() {
    assert_eq!(load(include_str!("../../../scenarios/telemedicine.toml")), telemedicine_default());
    assert_eq!(load(include_str!("../../../scenarios/ds_outage_backup.toml")), telemedicine_ds_outage(true));
    // the no-backup file spells out the heartbeat limit the fixture inherits
    let mut no_backup = load(include_str!("../../../scenarios/ds_outage_no_backup.toml"));
    assert_eq!(no_backup.policy.heartbeat_limit.take(), Some(no_backup.monitor.max_misses));
    assert_eq!(no_backup, telemedicine_ds_outage(false));
}

#[test]
fn every_shipped_scenario_validates() {
    for src in [
        include_str!("../../../scenarios/availability_cost.toml"),
        include_str!("../../../scenarios/late_backup.toml"),
        include_str!("../../../scenarios/load_balance.toml"),
        include_str!("../../../scenarios/optional_outage.toml"),
    ] {
        let s = load(src);
        assert_eq!(load(&s.to_toml_string()), s);
    }
}
