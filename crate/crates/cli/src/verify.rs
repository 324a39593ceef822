use std::fs;

use randecho::channels::Channel;
use randecho::fidelity::{average_gate_fidelity, depolarizing_strength, lindblad_rate};
use randecho::haar_lab::{
    concentration_study, invariant_one, invariant_two, state_vs_unitary_average, twirl_convergence, ChannelFamily,
};
use randecho::protocols::{cumulant_probe, Control};
use randecho::sampling::{ginibre, haar_unitary};
use randecho::stats::loglog_slope;
use randecho::{CMatrix, LindbladGenerator, SeedSpec, Superoperator};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::apply_override;
use crate::output::{Failure, Outcome, RunWriter};
use crate::{Cli, Suite};

/// One measured quantity and the range it must fall in.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    pub passed: bool,
    /// Informational checks never fail the suite.
    pub gating: bool,
}

impl Check {
    fn within(name: impl Into<String>, value: f64, min: Option<f64>, max: Option<f64>) -> Self {
        let passed = value.is_finite() && min.is_none_or(|m| value >= m) && max.is_none_or(|m| value <= m);
        Self { name: name.into(), value, min, max, passed, gating: true }
    }

    fn at_most(name: impl Into<String>, value: f64, max: f64) -> Self {
        Self::within(name, value, None, Some(max))
    }

    fn between(name: impl Into<String>, value: f64, range: [f64; 2]) -> Self {
        Self::within(name, value, Some(range[0]), Some(range[1]))
    }

    fn info(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), value, min: None, max: None, passed: true, gating: false }
    }
}

#[derive(Serialize)]
struct Report<P: Serialize> {
    suite: &'static str,
    passed: bool,
    parameters: P,
    checks: Vec<Check>,
    details: Value,
}

fn suite_tag(suite: Suite) -> u64 {
    match suite {
        Suite::Lemma => 11,
        Suite::Invariants => 12,
        Suite::Concentration => 13,
        Suite::Cumulants => 14,
        Suite::Equivalence => 15,
    }
}

/// Suite parameters: defaults, then the `--config` file, then `--set`.
fn parameters<P: Serialize + DeserializeOwned + Default>(cli: &Cli) -> Result<(P, Value), Failure> {
    let mut doc = serde_json::to_value(P::default()).expect("parameters serialize");
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
        let file: Value =
            serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
        let Value::Object(map) = file else {
            return Err(Failure::config(format!("{}: top level must be a JSON object", path.display())));
        };
        doc.as_object_mut().expect("parameters are an object").extend(map);
    }
    for spec in &cli.overrides {
        apply_override(&mut doc, spec)?;
    }
    let params: P = serde_path_to_error::deserialize(doc)
        .map_err(|e| Failure::config(format!("field `{}`: {}", e.path(), e.inner())))?;
    let resolved = serde_json::to_value(&params).expect("parameters serialize");
    Ok((params, resolved))
}

pub fn run(suite: Suite, cli: &Cli) -> Result<Outcome, Failure> {
    let master = cli.seed.unwrap_or(0);
    let seed = SeedSpec::new(master, 0).derive(suite_tag(suite));
    match suite {
        Suite::Lemma => execute(cli, suite, master, |p: &LemmaParams| lemma(p, seed)),
        Suite::Invariants => execute(cli, suite, master, |p: &InvariantParams| invariants(p, seed)),
        Suite::Concentration => execute(cli, suite, master, |p: &ConcentrationParams| concentration(p, seed)),
        Suite::Cumulants => execute(cli, suite, master, |p: &CumulantParams| cumulants(p, seed)),
        Suite::Equivalence => execute(cli, suite, master, |p: &EquivalenceParams| equivalence(p, seed)),
    }
}

type SuiteResult = Result<(Vec<Check>, Value, Vec<(&'static str, String)>), Failure>;

fn execute<P, F>(cli: &Cli, suite: Suite, master: u64, body: F) -> Result<Outcome, Failure>
where
    P: Serialize + DeserializeOwned + Default,
    F: FnOnce(&P) -> SuiteResult,
{
    let (params, resolved) = parameters::<P>(cli)?;
    let mut writer =
        RunWriter::new(&cli.out, &format!("verify {}", suite.name()), cli.config.as_deref(), resolved, master)?;
    let (checks, details, extra) = body(&params)?;
    for (name, body) in &extra {
        writer.text(name, body)?;
    }
    let passed = checks.iter().all(|c| c.passed || !c.gating);
    let failed: Vec<&str> = checks.iter().filter(|c| c.gating && !c.passed).map(|c| c.name.as_str()).collect();
    let outcome = if passed {
        Outcome::ok()
    } else {
        Outcome::check_failed(format!("verify {}: failed {}", suite.name(), failed.join(", ")))
    };
    writer.json("report.json", &Report { suite: suite.name(), passed, parameters: params, checks, details })?;
    writer.finish()?;
    Ok(outcome)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaParams {
    pub dim: usize,
    pub kraus_rank: usize,
    pub checkpoints: Vec<usize>,
    pub slope_range: [f64; 2],
    pub p_tolerance: f64,
    pub drift_tolerance: f64,
}

impl Default for LemmaParams {
    fn default() -> Self {
        Self {
            dim: 4,
            kraus_rank: 3,
            checkpoints: vec![100, 1_000, 10_000, 20_000],
            slope_range: [-0.6, -0.4],
            p_tolerance: 1e-3,
            drift_tolerance: 1e-9,
        }
    }
}

fn lemma(p: &LemmaParams, seed: SeedSpec) -> SuiteResult {
    let ch = Channel::random(p.dim, p.kraus_rank, seed.derive(0))?;
    let reports = twirl_convergence(&ch, &p.checkpoints, seed.derive(1))?;
    let last = reports.last().ok_or_else(|| Failure::config("checkpoints must not be empty"))?;
    let xs: Vec<f64> = reports.iter().map(|r| r.n_samples as f64).collect();
    let ys: Vec<f64> = reports.iter().map(|r| r.distance_to_depolarizing).collect();
    let slope = loglog_slope(&xs, &ys)?;
    let drift = reports.iter().map(|r| r.invariant_drift).fold(0.0, f64::max);
    let checks = vec![
        Check::between("distance_exponent", slope, p.slope_range),
        Check::at_most("p_empirical_error", (last.p_empirical - last.p_analytic).abs(), p.p_tolerance),
        Check::at_most("invariant_drift", drift, p.drift_tolerance),
        Check::info("p_analytic", last.p_analytic),
        Check::info("final_distance", last.distance_to_depolarizing),
    ];
    Ok((checks, serde_json::json!({ "checkpoints": reports }), Vec::new()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvariantParams {
    pub dims: Vec<usize>,
    pub channels_per_dim: usize,
    pub kraus_rank: usize,
    pub unitaries: usize,
    pub identity_tolerance: f64,
    pub drift_tolerance: f64,
}

impl Default for InvariantParams {
    fn default() -> Self {
        Self {
            dims: vec![2, 3, 4, 8],
            channels_per_dim: 5,
            kraus_rank: 3,
            unitaries: 20,
            identity_tolerance: 1e-12,
            drift_tolerance: 1e-9,
        }
    }
}

fn invariants(p: &InvariantParams, seed: SeedSpec) -> SuiteResult {
    let mut fidelity_gap: f64 = 0.0;
    let mut trace_gap: f64 = 0.0;
    let mut drift: f64 = 0.0;
    let mut per_dim = Vec::new();
    for &dim in &p.dims {
        let dim_seed = seed.derive(dim as u64);
        for c in 0..p.channels_per_dim {
            let ch = Channel::random(dim, p.kraus_rank, dim_seed.with_stream(c as u64))?;
            let d = dim as f64;
            let strength = depolarizing_strength(&ch);
            fidelity_gap = fidelity_gap.max((average_gate_fidelity(&ch) - (strength + (1.0 - strength) / d)).abs());
            let sup = ch.to_superoperator()?;
            let inv1 = invariant_one(&sup);
            let inv2 = invariant_two(&sup);
            trace_gap = trace_gap.max((ch.superop_trace() - inv2.re).abs().max(inv2.im.abs()));
            for k in 0..p.unitaries {
                let u: CMatrix = haar_unitary(dim, dim_seed.derive(1 + c as u64).with_stream(k as u64))?;
                let rotated = sup.conjugate(&u)?;
                drift = drift
                    .max((invariant_one(&rotated) - inv1).norm())
                    .max((invariant_two(&rotated) - inv2).norm());
            }
            per_dim.push(serde_json::json!({
                "dim": dim,
                "channel": c,
                "invariant_one": inv1.re,
                "invariant_two": inv2.re,
                "p": strength,
            }));
        }
    }
    let axb = {
        let a = CMatrix::from_real_diag(&[1.0, 2.0]);
        let b = CMatrix::from_real_diag(&[3.0, 1.0]);
        Superoperator::from_map(2, |x| &(&a * x) * &b)?
    };
    let axb_gap = (invariant_one(&axb).re - 5.0).abs().max((invariant_two(&axb).re - 12.0).abs());
    let checks = vec![
        Check::at_most("fidelity_vs_strength", fidelity_gap, p.identity_tolerance),
        Check::at_most("kraus_trace_vs_matrix_trace", trace_gap, p.drift_tolerance),
        Check::at_most("invariant_drift", drift, p.drift_tolerance),
        Check::at_most("diagonal_sandwich_example", axb_gap, p.identity_tolerance),
    ];
    Ok((checks, serde_json::json!({ "channels": per_dim }), Vec::new()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcentrationParams {
    pub family: ChannelFamily,
    pub dims: Vec<usize>,
    pub samples: usize,
    pub slope_range: [f64; 2],
    /// Also report a family with a dimension-independent single-qubit channel.
    pub reference: Option<ChannelFamily>,
}

impl Default for ConcentrationParams {
    fn default() -> Self {
        Self {
            family: ChannelFamily::Dephasing { q: 0.25 },
            dims: vec![4, 8, 16, 32, 64, 128],
            samples: 2000,
            slope_range: [-1.5, -0.5],
            reference: Some(ChannelFamily::AmplitudeDampingFirstQubit { gamma: 0.3 }),
        }
    }
}

fn concentration(p: &ConcentrationParams, seed: SeedSpec) -> SuiteResult {
    let main = concentration_study(p.family, &p.dims, p.samples, seed.derive(0))?;
    let mut checks = vec![match main.slope {
        Some(s) => Check::between("variance_exponent", s, p.slope_range),
        None => Check::info("variance_exponent_undefined", 0.0),
    }];
    let mut files = vec![("concentration.csv", main.to_csv())];
    let mut details = serde_json::json!({ "study": main });
    if let Some(family) = p.reference {
        let reference = concentration_study(family, &p.dims, p.samples, seed.derive(1))?;
        if let Some(s) = reference.slope {
            checks.push(Check::info("reference_variance_exponent", s));
        }
        files.push(("concentration_reference.csv", reference.to_csv()));
        details["reference"] = serde_json::to_value(&reference).expect("report serializes");
    }
    Ok((checks, details, files))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CumulantParams {
    pub dim: usize,
    pub jumps: usize,
    pub control_scale: f64,
    pub tau_c: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub step: f64,
    pub realizations: usize,
    pub k1_range: [f64; 2],
    pub k2_range: [f64; 2],
}

impl Default for CumulantParams {
    fn default() -> Self {
        Self {
            dim: 4,
            jumps: 2,
            control_scale: 1.0,
            tau_c: 1.0,
            t_min: 40.0,
            t_max: 400.0,
            points: 11,
            step: 0.5,
            realizations: 8,
            k1_range: [0.3, 0.7],
            k2_range: [1.2, 1.8],
        }
    }
}

fn cumulants(p: &CumulantParams, seed: SeedSpec) -> SuiteResult {
    if p.points < 2 || !(p.t_min > 0.0 && p.t_max > p.t_min) {
        return Err(Failure::config("cumulants needs points >= 2 and 0 < t_min < t_max"));
    }
    let mut rng = seed.derive(0).rng();
    let jumps: Vec<CMatrix> = (0..p.jumps).map(|_| ginibre(p.dim, &mut rng)).collect();
    let gen = LindbladGenerator::dissipative(p.dim, jumps, 1.0)?;
    let ratio = p.t_max / p.t_min;
    let last = (p.points - 1) as f64;
    let times: Vec<f64> = (0..p.points).map(|i| p.t_min * ratio.powf(i as f64 / last)).collect();
    let control = Control::Gue { scale: p.control_scale, tau_c: p.tau_c };
    let rep = cumulant_probe(&gen, &control, &times, p.step, p.realizations, seed.derive(1))?;
    let exponent = |name: &str, v: Option<f64>, range: [f64; 2]| match v {
        Some(x) => Check::between(name, x, range),
        None => Check::within(name, f64::NAN, Some(range[0]), Some(range[1])),
    };
    let checks = vec![
        exponent("k1_fluctuation_exponent", rep.k1_exponent, p.k1_range),
        exponent("k2_exponent", rep.k2_exponent, p.k2_range),
        Check::info("gamma", lindblad_rate(&gen)),
    ];
    Ok((checks, serde_json::json!({ "probe": rep }), Vec::new()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquivalenceParams {
    pub dephasing_q: f64,
    pub dephasing_dim: usize,
    pub random_dim: usize,
    pub kraus_rank: usize,
    pub samples: usize,
    pub z_max: f64,
}

impl Default for EquivalenceParams {
    fn default() -> Self {
        Self { dephasing_q: 0.25, dephasing_dim: 2, random_dim: 8, kraus_rank: 3, samples: 20_000, z_max: 3.0 }
    }
}

fn equivalence(p: &EquivalenceParams, seed: SeedSpec) -> SuiteResult {
    let cases = [
        ("dephasing", Channel::dephasing(p.dephasing_dim, p.dephasing_q)?),
        ("random", Channel::random(p.random_dim, p.kraus_rank, seed.derive(0))?),
    ];
    let mut checks = Vec::new();
    let mut details = serde_json::Map::new();
    for (i, (name, ch)) in cases.iter().enumerate() {
        let rep = state_vs_unitary_average(ch, p.samples, seed.derive(1 + i as u64))?;
        let exact = average_gate_fidelity(ch);
        let z_exact = |s: &randecho::stats::Summary| (s.mean - exact).abs() / s.stderr.max(f64::MIN_POSITIVE);
        checks.push(Check::at_most(format!("{name}_states_vs_unitaries_z"), rep.z_score(), p.z_max));
        checks.push(Check::at_most(format!("{name}_states_vs_exact_z"), z_exact(&rep.over_states), p.z_max));
        checks.push(Check::at_most(format!("{name}_unitaries_vs_exact_z"), z_exact(&rep.over_unitaries), p.z_max));
        details.insert(
            (*name).to_string(),
            serde_json::json!({ "average_gate_fidelity": exact, "over_states": rep.over_states, "over_unitaries": rep.over_unitaries }),
        );
    }
    Ok((checks, Value::Object(details), Vec::new()))
}
