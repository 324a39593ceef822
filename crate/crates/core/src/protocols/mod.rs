//! Monte Carlo simulations of the experimental protocols and decay fits.
//!
//! Every trial draws from its own substream `stream_of(n, trial)` of the
//! config seed, and results are collected in trial order, so curves do not
//! depend on the number of worker threads.

mod config;
mod continuous;
mod curve;
mod discrete;
mod readout;

pub use config::{ExperimentConfig, InitialState, LindbladParams, Protocol, Shots};
pub use continuous::{
    averaged_generator, cumulant_probe, lindblad_echo_curve, run_lindblad_echo, time_grid, Control, CumulantReport,
    STEP_BUDGET, TRACE_DRIFT_LIMIT,
};
pub use curve::{fit_decay, CurvePoint, DecayCurve, FitResult, CSV_HEADER, LOG_SIGMA_FLOOR};
pub use discrete::{
    run_generalized_echo, run_iterated_motion_reversal, run_loschmidt_echo, run_motion_reversal, Estimate,
};
pub use readout::PROBABILITY_SLACK;

use crate::error::Result;

/// Output of [`run`].
#[derive(Debug, Clone, PartialEq)]
pub enum RunOutput {
    Estimate(Estimate),
    Curve(DecayCurve),
}

/// Dispatches on `cfg.protocol`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    Ok(match cfg.protocol {
        Protocol::MotionReversal => RunOutput::Estimate(run_motion_reversal(cfg)?),
        Protocol::Iterated => RunOutput::Curve(run_iterated_motion_reversal(cfg)?),
        Protocol::Echo => RunOutput::Curve(run_loschmidt_echo(cfg)?),
        Protocol::GeneralizedEcho => RunOutput::Curve(run_generalized_echo(cfg)?),
        Protocol::LindbladEcho => RunOutput::Curve(run_lindblad_echo(cfg)?),
    })
}
