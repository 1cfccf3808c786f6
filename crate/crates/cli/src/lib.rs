//! File formats, configuration and command drivers for the `stavskaya` binary.

pub mod certificate;
pub mod commands;
pub mod config;
pub mod output;
pub mod parallel;
pub mod verify;

use std::io::Write;
use std::process::ExitCode;

use anyhow::Result;

use crate::config::ExperimentConfig;

/// How a command finished, short of an error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    NotCertified,
    ChecksFailed,
}

impl Status {
    /// 0 success, 2 not certified or a failed check. Errors exit with 1.
    pub fn exit_code(self) -> ExitCode {
        match self {
            Status::Success => ExitCode::SUCCESS,
            Status::NotCertified | Status::ChecksFailed => ExitCode::from(2),
        }
    }
}

pub fn execute(config: &ExperimentConfig, stdout: &mut dyn Write) -> Result<Status> {
    match config {
        ExperimentConfig::Simulate(c) => commands::simulate(c, stdout),
        ExperimentConfig::Sweep(c) => commands::sweep(c, stdout),
        ExperimentConfig::Certify(c) => commands::certify(c, stdout),
        ExperimentConfig::Verify(c) => verify::verify(c, stdout),
        ExperimentConfig::Enumerate(c) => commands::enumerate(c, stdout),
    }
}
