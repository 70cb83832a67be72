//! Benchmark harness around `feigh`: seeded instances, a timing grid with
//! CSV output, log-log scaling fits and a metric-learner demo.

pub mod demo;
pub mod fit;
pub mod grid;
pub mod instance;
pub mod stats;

pub use demo::{demo_learner, DemoConfig, DemoReport};
pub use fit::{fit_scaling, median_ratio_at_largest_m, ScalingFit};
pub use grid::{
    parse_m_grid, read_records, run_grid, summarize, write_records, Algorithm, BenchConfig,
    BenchRecord, GridResult, RankSpec,
};
pub use instance::{generate_instance, Instance};
