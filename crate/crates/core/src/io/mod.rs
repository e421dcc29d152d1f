//! File formats, configuration, synthetic scenes and experiment drivers.

pub mod config;
pub mod experiment;
pub mod pgm;
pub mod scene;

pub use config::{ExperimentConfig, FilterKind};
pub use experiment::{
    evaluate, monte_carlo, report_costs, run_experiment, sweep_csv, sweep_transfer, MonteCarloReport,
    RunOutput, Summary,
};
pub use pgm::{load_sequence, save_frame, save_mask, SaveMode};
pub use scene::{generate_scene, Scene, SyntheticSceneSpec};
