//! Experiment designs, analytic validators, scenario files and CSV output.

pub mod config;
pub mod experiments;
pub mod result;
pub mod theory;

pub use config::{load_scenario, load_scenario_file};
pub use experiments::{
    control_comparison, dependency_study, group_control_study, group_sweep, group_sweep_trend,
    partition_study, presets, replication_seed, speed_sweep, task_distribution,
    waiting_law_grid, fully_connected_table, DependencyStudy, Preset, Workload,
    CONTROL_TASK_COUNTS, DEFAULT_REPLICATIONS, GROUP_COUNTS,
};
pub use result::{ColumnSummary, ExperimentResult, Row};
pub use theory::{
    expected_waiting_time, fully_connected_waiting, kendall_tau, monte_carlo_waiting, Estimate,
    FullyConnected, KendallTau,
};
