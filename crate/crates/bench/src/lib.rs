//! Fixtures shared by the benchmarks.

use std::path::{Path, PathBuf};

use helm_core::observer::ObserverState;
use helm_core::scenario::ScenarioConfig;
use helm_core::sim::{assess, build_closed_loop, pack, ClosedLoop, State};

pub fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

/// The case-study closed loop and its initial state.
pub fn case_study() -> (ScenarioConfig, ClosedLoop, State) {
    let cfg =
        ScenarioConfig::load(&scenario_path("case_study.toml")).expect("shipped scenario loads");
    let a = assess(&cfg).expect("assessment");
    let cl = build_closed_loop(&cfg, a.feasibility.sigma_or_zero()).expect("closed loop");
    let s0 = cfg.initial.vessel_state();
    let o0 = ObserverState::initial([s0.x, s0.y]);
    let x0 = pack(
        &s0,
        &o0,
        a.theta0.expect("initial position has a nearest point"),
    );
    (cfg, cl, x0)
}
