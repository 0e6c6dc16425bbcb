//! Experiment drivers, diagnostics and the command-line front end.

mod cli;
mod config;
mod experiments;
mod records;

pub use cli::{main_with_args, EXIT_FAIL, EXIT_OK, EXIT_USAGE, OUT_ENV};
pub use config::{ExperimentConfig, ExperimentKind};
pub use experiments::{
    kernel_table, perimeter_growth_report, rearrange_suite, rectangle_run, stability_report,
    steady_strip_experiment, Check, ExperimentReport, Rates, RectangleRun, REPORT_SCHEMA,
};
pub use records::{
    diagnose, read_series_csv, read_tracks_csv, velocity_gap_probe, write_series_csv,
    write_tracks_csv, DiagRecord, GapProbe, TrackRecord, SERIES_HEADER, TRACKS_HEADER,
};
