//! Committed result tables for `memlife check`, regenerated with
//! `memlife run --regime all` and `memlife sweep front_door` at default
//! settings (seed 42, 100 episodes).

macro_rules! table {
    ($n:literal) => {
        ($n, include_str!(concat!("../goldens/results_", $n, ".csv")))
    };
}

pub static REGIME_TABLES: &[(&str, &str)] = &[
    table!("premise_realization"),
    table!("heavy"),
    table!("heavy_very_tight"),
    table!("heavy_tight"),
    table!("heavy_roomy"),
    table!("heavy_very_roomy"),
    table!("gate_strength"),
    table!("quadrant"),
    table!("strength_source_oracle"),
    table!("strength_source_noisy"),
    table!("strength_source_coarse_cue"),
    table!("strength_source_generic_proxy"),
    table!("implicit_heuristic"),
    table!("compression_cycle"),
    table!("sensitivity_shock_0.50"),
    table!("sensitivity_shock_1.00"),
    table!("sensitivity_shock_1.50"),
    table!("sensitivity_conf_0.70"),
    table!("sensitivity_conf_0.85"),
    table!("sensitivity_conf_1.00"),
    table!("sensitivity_fixed_0.02"),
    table!("sensitivity_fixed_0.10"),
    table!("sensitivity_fixed_0.20"),
    table!("sensitivity_fixed_0.30"),
];

pub static SWEEP_TABLE: &str = include_str!("../goldens/sweep_front_door.csv");
pub static SWEEP_POINTS: &str = include_str!("../goldens/sweep_front_door_points.csv");
