//! Experiment plumbing: libsvm files, TOML configs, CSV traces and
//! summaries.

mod config;
mod libsvm;
mod run;
mod summary;

pub use config::{
    AgdConfig, AlgorithmConfig, ExperimentConfig, MomentumConfig, NewtonConfig, OptionsConfig,
    ProblemConfig, RegularizerName, SamplingName, SubsolverConfig, SvrgConfig,
};
pub use libsvm::{parse_libsvm, read_libsvm, write_libsvm, LabelPolicy, LibsvmData, LibsvmOptions};
pub use run::{
    echo_path, execute, resolve, run_experiment, write_csv, ExperimentOutcome, PreparedProblem,
    RunResult, CSV_HEADER,
};
pub use summary::{summarize, summarize_reader, SummaryRow};
