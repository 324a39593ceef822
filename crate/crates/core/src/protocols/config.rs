//! Experiment configuration, read from one JSON document per experiment.
//!
//! ```json
//! {
//!   "protocol": "echo",
//!   "dim": 8,
//!   "channel": {"type": "depolarizing", "p": 0.95},
//!   "n_unitaries": 50,
//!   "shots": "analytic",
//!   "n_max": 20,
//!   "seed": 7
//! }
//! ```

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channels::{Channel, ChannelKind, ChannelSpec, LindbladGenerator};
use crate::error::{Error, Result};
use crate::sampling::{check_dim, SeedSpec};
use crate::state::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    MotionReversal,
    Iterated,
    Echo,
    GeneralizedEcho,
    LindbladEcho,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::MotionReversal => "motion_reversal",
            Protocol::Iterated => "iterated",
            Protocol::Echo => "echo",
            Protocol::GeneralizedEcho => "generalized_echo",
            Protocol::LindbladEcho => "lindblad_echo",
        }
    }

    pub(crate) fn seed_tag(self) -> u64 {
        match self {
            Protocol::MotionReversal => 1,
            Protocol::Iterated => 2,
            Protocol::Echo => 3,
            Protocol::GeneralizedEcho => 4,
            Protocol::LindbladEcho => 5,
        }
    }
}

/// Measurement repetitions per unitary. `Analytic` records the survival
/// probability itself, with no shot noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    Count(u64),
    Analytic,
}

impl Serialize for Shots {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Shots::Count(n) => s.serialize_u64(*n),
            Shots::Analytic => s.serialize_str("analytic"),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ShotsVisitor;
        impl Visitor<'_> for ShotsVisitor {
            type Value = Shots;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a positive integer or \"analytic\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Shots, E> {
                Ok(Shots::Count(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Shots, E> {
                u64::try_from(v).map(Shots::Count).map_err(|_| E::custom("shots must be positive"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Shots, E> {
                match v {
                    "analytic" | "inf" | "infinite" => Ok(Shots::Analytic),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }
        d.deserialize_any(ShotsVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialState {
    /// Computational basis state `|index>`.
    Basis {
        #[serde(default)]
        index: usize,
    },
    /// Diagonal state `a|0><0| + (1-a) 1/D` with the requested purity.
    Purity { purity: f64 },
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Basis { index: 0 }
    }
}

impl InitialState {
    pub fn build(&self, dim: usize) -> Result<DensityMatrix> {
        match *self {
            InitialState::Basis { index } => DensityMatrix::basis(dim, index),
            InitialState::Purity { purity } => DensityMatrix::with_purity(dim, purity),
        }
    }
}

/// Continuous-time settings for the Lindblad echo and the cumulant probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LindbladParams {
    pub t_max: f64,
    /// Upper bound on the step; the integrator may pick a smaller one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Number of grid points in `[0, t_max]`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// GUE scale `s` of the control Hamiltonians, `E|H_ij|² = s²/D`.
    #[serde(default = "default_control_scale")]
    pub control_scale: f64,
    /// Control correlation time; defaults to `0.1 / control_scale`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_c: Option<f64>,
    /// Turns the control off entirely.
    #[serde(default)]
    pub no_control: bool,
}

fn default_samples() -> usize {
    61
}

fn default_control_scale() -> f64 {
    1.0
}

impl LindbladParams {
    pub fn tau_c(&self) -> f64 {
        self.tau_c.unwrap_or(0.1 / self.control_scale)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidParameter { name: "t_max", value: self.t_max, reason: "must be > 0" });
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(Error::InvalidParameter { name: "dt", value: dt, reason: "must be > 0" });
            }
        }
        if self.samples < 2 {
            return Err(Error::InvalidParameter { name: "samples", value: self.samples as f64, reason: "must be >= 2" });
        }
        if !(self.control_scale >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "control_scale",
                value: self.control_scale,
                reason: "must be >= 0",
            });
        }
        let tau = self.tau_c();
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter { name: "tau_c", value: tau, reason: "must be finite and > 0" });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub protocol: Protocol,
    pub dim: usize,
    pub channel: ChannelKind,
    /// Optional per-step channels; step `j` uses entry `(j - 1) mod len`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_channels: Option<Vec<ChannelKind>>,
    #[serde(default = "default_unitaries")]
    pub n_unitaries: usize,
    #[serde(default = "default_shots")]
    pub shots: Shots,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub initial_state: InitialState,
    /// Record every `n` from one propagation instead of independent runs per `n`.
    /// Not a physical protocol: real readout is destructive.
    #[serde(default)]
    pub trajectory_mode: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lindblad: Option<LindbladParams>,
}

fn default_unitaries() -> usize {
    100
}

fn default_shots() -> Shots {
    Shots::Analytic
}

fn default_n_max() -> usize {
    20
}

impl ExperimentConfig {
    pub fn new(protocol: Protocol, dim: usize, channel: ChannelKind) -> Self {
        Self {
            protocol,
            dim,
            channel,
            step_channels: None,
            n_unitaries: default_unitaries(),
            shots: default_shots(),
            n_max: default_n_max(),
            seed: 0,
            initial_state: InitialState::default(),
            trajectory_mode: false,
            lindblad: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn seed_spec(&self) -> SeedSpec {
        SeedSpec::new(self.seed, 0).derive(self.protocol.seed_tag())
    }

    pub fn channel_spec(&self) -> ChannelSpec {
        ChannelSpec { dim: self.dim, kind: self.channel.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.dim)?;
        if self.n_unitaries == 0 {
            return Err(Error::Config("n_unitaries must be >= 1".into()));
        }
        if self.shots == Shots::Count(0) {
            return Err(Error::Config("shots must be >= 1".into()));
        }
        if self.n_max == 0 {
            return Err(Error::Config("n_max must be >= 1".into()));
        }
        let lindblad_kind = matches!(self.channel, ChannelKind::Lindblad { .. });
        match self.protocol {
            Protocol::LindbladEcho => {
                if !lindblad_kind {
                    return Err(Error::Config("lindblad_echo needs a channel of type `lindblad`".into()));
                }
                self.lindblad
                    .as_ref()
                    .ok_or_else(|| Error::Config("lindblad_echo needs a `lindblad` section".into()))?
                    .validate()?;
            }
            _ if lindblad_kind => {
                return Err(Error::Config(format!(
                    "protocol `{}` needs a discrete channel, not `lindblad`",
                    self.protocol.name()
                )));
            }
            _ => {}
        }
        if let Some(steps) = &self.step_channels {
            if steps.is_empty() {
                return Err(Error::Config("step_channels must not be empty".into()));
            }
        }
        Ok(())
    }

    pub fn build_channel(&self) -> Result<Channel> {
        self.channel_spec().build_channel()
    }

    pub fn build_lindblad(&self) -> Result<LindbladGenerator> {
        self.channel_spec().build_lindblad()
    }

    /// Channels used at steps `1, 2, ...`, cycled.
    pub fn build_step_channels(&self) -> Result<Vec<Channel>> {
        let kinds = match &self.step_channels {
            Some(list) => list.clone(),
            None => vec![self.channel.clone()],
        };
        kinds
            .into_iter()
            .map(|kind| {
                let ch = ChannelSpec { dim: self.dim, kind }.build_channel()?;
                if !ch.is_trace_preserving() {
                    return Err(Error::NotTracePreserving { deviation: ch.trace_preservation_defect() });
                }
                Ok(ch)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config_with_defaults() {
        let cfg = ExperimentConfig::from_json(
            r#"{"protocol": "echo", "dim": 8, "channel": {"type": "depolarizing", "p": 0.95}}"#,
        )
        .unwrap();
        assert_eq!(cfg.shots, Shots::Analytic);
        assert_eq!(cfg.n_max, 20);
        assert_eq!(cfg.initial_state, InitialState::Basis { index: 0 });
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn shots_accept_numbers_and_analytic() {
        assert_eq!(serde_json::from_str::<Shots>("200").unwrap(), Shots::Count(200));
        assert_eq!(serde_json::from_str::<Shots>("\"analytic\"").unwrap(), Shots::Analytic);
        assert!(serde_json::from_str::<Shots>("-3").is_err());
        assert!(serde_json::from_str::<Shots>("\"lots\"").is_err());
        assert_eq!(serde_json::to_string(&Shots::Count(5)).unwrap(), "5");
    }

    #[test]
    fn missing_dim_is_named() {
        let err = ExperimentConfig::from_json(r#"{"protocol": "echo", "channel": {"type": "depolarizing", "p": 0.9}}"#)
            .unwrap_err();
        assert!(err.to_string().contains("`dim`"), "{err}");
    }

    #[test]
    fn rejects_inconsistent_configs() {
        let bad = [
            r#"{"protocol": "echo", "dim": 2, "channel": {"type": "depolarizing", "p": 0.9}, "n_unitaries": 0}"#,
            r#"{"protocol": "echo", "dim": 2, "channel": {"type": "depolarizing", "p": 0.9}, "shots": 0}"#,
            r#"{"protocol": "echo", "dim": 1, "channel": {"type": "depolarizing", "p": 0.9}}"#,
            r#"{"protocol": "echo", "dim": 2, "channel": {"type": "lindblad", "epsilon": 0.1}}"#,
            r#"{"protocol": "lindblad_echo", "dim": 2, "channel": {"type": "lindblad", "epsilon": 0.1}}"#,
            r#"{"protocol": "echo", "dim": 2, "channel": {"type": "depolarizing", "p": 0.9}, "extra": 1}"#,
        ];
        for text in bad {
            assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
        }
    }

    #[test]
    fn tau_c_defaults_to_control_scale() {
        let p: LindbladParams = serde_json::from_str(r#"{"t_max": 10, "control_scale": 2.0}"#).unwrap();
        assert!((p.tau_c() - 0.05).abs() < 1e-15);
        assert_eq!(p.samples, 61);
    }
}
