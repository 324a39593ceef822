use randecho::fidelity::{
    average_gate_fidelity, continuous_decay_prediction, depolarizing_strength, lindblad_rate, DecayModel,
};
use randecho::protocols::{
    fit_decay, run_generalized_echo, run_iterated_motion_reversal, run_lindblad_echo, run_loschmidt_echo,
    run_motion_reversal, DecayCurve, ExperimentConfig, FitResult, Protocol,
};
use randecho::Error;
use serde::Serialize;

use crate::output::{Failure, Outcome, RunWriter};
use crate::{config, Cli, Command};

fn protocol_of(verb: Command) -> (Protocol, &'static str) {
    match verb {
        Command::Estimate => (Protocol::MotionReversal, "estimate"),
        Command::Decay => (Protocol::Iterated, "decay"),
        Command::Echo => (Protocol::Echo, "echo"),
        Command::GenEcho => (Protocol::GeneralizedEcho, "gen-echo"),
        Command::Lindblad => (Protocol::LindbladEcho, "lindblad"),
        Command::Verify { .. } => unreachable!("verify is dispatched separately"),
    }
}

pub fn run(verb: Command, cli: &Cli) -> Result<Outcome, Failure> {
    let (protocol, name) = protocol_of(verb);
    let (cfg, resolved) = config::load(cli.config.as_deref(), &cli.overrides, cli.seed, protocol.name())?;
    if cfg.protocol != protocol {
        return Err(Failure::config(format!(
            "`{name}` runs protocol `{}`, but the config asks for `{}`",
            protocol.name(),
            cfg.protocol.name()
        )));
    }
    let mut writer = RunWriter::new(&cli.out, name, cli.config.as_deref(), resolved, cfg.seed)?;
    let outcome = match protocol {
        Protocol::MotionReversal => estimate(&cfg, &mut writer)?,
        _ => curve(&cfg, &mut writer)?,
    };
    writer.finish()?;
    Ok(outcome)
}

#[derive(Serialize)]
struct Analytic {
    average_gate_fidelity: f64,
    p: f64,
    /// Haar mean of the fidelity for the configured initial state.
    expected_f: f64,
}

#[derive(Serialize)]
struct EstimateReport {
    protocol: &'static str,
    dim: usize,
    f_hat: f64,
    stderr: f64,
    p_hat: f64,
    p_stderr: f64,
    n_unitaries: usize,
    shots: randecho::protocols::Shots,
    purity: f64,
    analytic: Option<Analytic>,
    /// `|f_hat - expected_f| / stderr`.
    z_score: Option<f64>,
}

/// Deviations this small are roundoff and score zero.
const ROUNDOFF: f64 = 1e-9;

fn z_score(diff: f64, stderr: f64) -> f64 {
    if diff.abs() <= ROUNDOFF {
        0.0
    } else if stderr > 0.0 {
        diff.abs() / stderr
    } else {
        f64::INFINITY
    }
}

fn estimate(cfg: &ExperimentConfig, writer: &mut RunWriter) -> Result<Outcome, Failure> {
    let est = run_motion_reversal(cfg)?;
    let dim = cfg.dim;
    let purity = cfg.initial_state.build(dim)?.purity();
    let span = purity - 1.0 / dim as f64;
    let analytic = if cfg.step_channels.is_none() {
        let ch = cfg.build_channel()?;
        let p = depolarizing_strength(&ch);
        Some(Analytic {
            average_gate_fidelity: average_gate_fidelity(&ch),
            p,
            expected_f: p * purity + (1.0 - p) / dim as f64,
        })
    } else {
        None
    };
    let z = analytic.as_ref().map(|a| z_score(est.f_hat - a.expected_f, est.stderr));
    let report = EstimateReport {
        protocol: cfg.protocol.name(),
        dim,
        f_hat: est.f_hat,
        stderr: est.stderr,
        p_hat: (est.f_hat - 1.0 / dim as f64) / span,
        p_stderr: est.stderr / span,
        n_unitaries: est.n_unitaries,
        shots: est.shots,
        purity,
        analytic,
        z_score: z,
    };
    writer.json("estimate.json", &report)?;
    Ok(Outcome::ok())
}

#[derive(Serialize)]
struct PredictedPoint {
    x: f64,
    predicted: f64,
    deviation: f64,
    z_score: f64,
}

#[derive(Serialize)]
struct Prediction {
    model: &'static str,
    /// Per-step strengths, cycled over steps.
    #[serde(skip_serializing_if = "Option::is_none")]
    step_strengths: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    purity: f64,
    max_abs_deviation: f64,
    max_z_score: f64,
    points: Vec<PredictedPoint>,
}

#[derive(Serialize)]
struct FitReport {
    protocol: &'static str,
    dim: usize,
    purity: f64,
    fit: Option<FitResult>,
    /// `-ln p_hat` when the curve is indexed by time.
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_hat: Option<f64>,
    fit_error: Option<String>,
    prediction: Option<Prediction>,
}

/// `Π_{j < steps} p_{j mod k}`.
fn cycled_product(strengths: &[f64], steps: usize) -> f64 {
    (0..steps).map(|j| strengths[j % strengths.len()]).product()
}

fn predict(cfg: &ExperimentConfig, curve: &DecayCurve, purity: f64) -> Result<Prediction, Error> {
    let dim = cfg.dim;
    let floor = 1.0 / dim as f64;
    let (model, strengths, gamma, values): (_, _, _, Vec<f64>) = match cfg.protocol {
        Protocol::LindbladEcho => {
            let gamma = lindblad_rate(&cfg.build_lindblad()?);
            let m = DecayModel::continuous(gamma, dim, purity)?;
            let values = curve.points.iter().map(|p| continuous_decay_prediction(&m, p.x)).collect();
            ("exp(-gamma t) purity + (1 - exp(-gamma t))/D", None, Some(gamma), values)
        }
        protocol => {
            let strengths: Vec<f64> = cfg.build_step_channels()?.iter().map(depolarizing_strength).collect();
            let (model, per_n) = if protocol == Protocol::GeneralizedEcho {
                ("P(2n) purity + (1 - P(2n))/D, P(m) = product of the first m step strengths", 2)
            } else {
                ("P(n) purity + (1 - P(n))/D, P(n) = product of the first n step strengths", 1)
            };
            let values = curve
                .points
                .iter()
                .map(|p| {
                    let big_p = cycled_product(&strengths, per_n * p.x as usize);
                    big_p * purity + (1.0 - big_p) * floor
                })
                .collect();
            (model, Some(strengths), None, values)
        }
    };
    let points: Vec<PredictedPoint> = curve
        .points
        .iter()
        .zip(&values)
        .map(|(p, &v)| PredictedPoint {
            x: p.x,
            predicted: v,
            deviation: p.mean - v,
            z_score: z_score(p.mean - v, p.stderr),
        })
        .collect();
    Ok(Prediction {
        model,
        step_strengths: strengths,
        gamma,
        purity,
        max_abs_deviation: points.iter().map(|p| p.deviation.abs()).fold(0.0, f64::max),
        max_z_score: points.iter().map(|p| p.z_score).fold(0.0, f64::max),
        points,
    })
}

fn curve(cfg: &ExperimentConfig, writer: &mut RunWriter) -> Result<Outcome, Failure> {
    let curve = match cfg.protocol {
        Protocol::Iterated => run_iterated_motion_reversal(cfg)?,
        Protocol::Echo => run_loschmidt_echo(cfg)?,
        Protocol::GeneralizedEcho => run_generalized_echo(cfg)?,
        Protocol::LindbladEcho => run_lindblad_echo(cfg)?,
        Protocol::MotionReversal => unreachable!("handled by estimate"),
    };
    writer.text("curve.csv", &curve.to_csv())?;
    let purity = cfg.initial_state.build(cfg.dim)?.purity();
    let prediction = Some(predict(cfg, &curve, purity)?);
    let timed = cfg.protocol == Protocol::LindbladEcho;
    let (fit, fit_error, outcome) = match fit_decay(&curve, cfg.dim, purity) {
        Ok(f) => (Some(f), None, Outcome::ok()),
        Err(e @ Error::InsufficientSignal(_)) => {
            let msg = e.to_string();
            (None, Some(msg.clone()), Outcome::check_failed(msg))
        }
        Err(e) => return Err(e.into()),
    };
    let report = FitReport {
        protocol: cfg.protocol.name(),
        dim: cfg.dim,
        purity,
        gamma_hat: fit.filter(|_| timed).map(|f| f.rate()),
        fit,
        fit_error,
        prediction,
    };
    writer.json("fit.json", &report)?;
    Ok(outcome)
}
