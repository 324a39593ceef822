//! Continuous-time echo under a master equation, and the cumulant probe.
//!
//! The control `H_C(t)` is piecewise constant: a fresh GUE Hamiltonian every
//! `τ_c`, i.e. a random walk on `U(D)`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, LindbladParams, Protocol};
use super::curve::{CurvePoint, DecayCurve};
use crate::channels::LindbladGenerator;
use crate::error::{Error, Result};
use crate::matrix::{kron, matrix_exp, mul_into};
use crate::policy::POLICY;
use crate::sampling::{gue_hamiltonian_with, stream_of, SeedSpec};
use crate::state::trace_product;
use crate::stats::{loglog_slope, pairwise_sum};
use crate::{CMatrix, C64};

/// Largest `(||H_C|| + ε||L̂||) dt` the integrator accepts.
pub const STEP_BUDGET: f64 = 0.01;
/// Trace drift that flags an unstable integration.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum Control {
    None,
    Constant(CMatrix),
    /// New GUE Hamiltonian of the given scale every `tau_c`.
    Gue { scale: f64, tau_c: f64 },
}

impl Control {
    pub fn from_params(p: &LindbladParams) -> Self {
        if p.no_control || p.control_scale == 0.0 {
            Control::None
        } else {
            Control::Gue { scale: p.control_scale, tau_c: p.tau_c() }
        }
    }

    fn segment_length(&self) -> f64 {
        match self {
            Control::Gue { tau_c, .. } => *tau_c,
            _ => f64::INFINITY,
        }
    }

    fn hamiltonian<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> Result<CMatrix> {
        match self {
            Control::None => Ok(CMatrix::zeros(dim, dim)),
            Control::Constant(h) => Ok(h.clone()),
            Control::Gue { scale, .. } => gue_hamiltonian_with(dim, *scale, rng),
        }
    }
}

/// `-i (H ⊗ 1 - 1 ⊗ Hᵀ)`.
fn hamiltonian_superop(h: &CMatrix) -> Result<CMatrix> {
    let id = CMatrix::identity(h.rows());
    Ok((&kron(h, &id)? - &kron(&id, &h.transpose())?).scale(C64::new(0.0, -1.0)))
}

/// `1 + A + A²/2 + A³/6 + A⁴/24`: one classical RK4 step of `x' = A x / dt`.
fn rk4_propagator(a: &CMatrix) -> CMatrix {
    let n = a.rows();
    let mut out = CMatrix::identity(n);
    let mut term = CMatrix::identity(n);
    let mut next = CMatrix::zeros(n, n);
    for k in 1..=4 {
        mul_into(a, &term, &mut next);
        std::mem::swap(&mut term, &mut next);
        term = term.scale_real(1.0 / k as f64);
        out += &term;
    }
    out
}

struct Integrator {
    dim: usize,
    noise: CMatrix,
    noise_norm: f64,
    dt_cap: f64,
    rho: CMatrix,
    u: CMatrix,
    scratch_rho: CMatrix,
    scratch_u: CMatrix,
    last_dt: f64,
}

impl Integrator {
    fn new(noise: CMatrix, noise_norm: f64, dt_cap: f64, rho0: &CMatrix) -> Self {
        let dim = rho0.rows();
        Self {
            dim,
            noise,
            noise_norm,
            dt_cap,
            rho: CMatrix::column(rho0.as_slice().to_vec()),
            u: CMatrix::identity(dim),
            scratch_rho: CMatrix::zeros(dim * dim, 1),
            scratch_u: CMatrix::zeros(dim, dim),
            last_dt: dt_cap,
        }
    }

    fn advance(&mut self, h: &CMatrix, h_norm: f64, len: f64) -> Result<()> {
        if len <= 0.0 {
            return Ok(());
        }
        let rate = h_norm + self.noise_norm;
        let steps = ((len * rate / STEP_BUDGET).ceil().max((len / self.dt_cap).ceil()).max(1.0)) as usize;
        let dt = len / steps as f64;
        let mut g = hamiltonian_superop(h)?;
        g += &self.noise;
        let p_rho = rk4_propagator(&g.scale_real(dt));
        let p_u = rk4_propagator(&h.scale(C64::new(0.0, -dt)));
        for _ in 0..steps {
            mul_into(&p_rho, &self.rho, &mut self.scratch_rho);
            std::mem::swap(&mut self.rho, &mut self.scratch_rho);
            mul_into(&p_u, &self.u, &mut self.scratch_u);
            std::mem::swap(&mut self.u, &mut self.scratch_u);
        }
        self.last_dt = dt;
        Ok(())
    }

    /// `Tr[φ U^dag ρ U]`, after checking the trace of `ρ`.
    fn fidelity(&self, phi: &CMatrix) -> Result<f64> {
        let rho = CMatrix::unvectorize(self.rho.as_slice(), self.dim)?;
        let drift = (rho.trace() - C64::new(1.0, 0.0)).norm();
        if !(drift <= TRACE_DRIFT_LIMIT) {
            return Err(Error::IntegratorUnstable {
                drift,
                limit: TRACE_DRIFT_LIMIT,
                suggested_dt: self.last_dt / 2.0,
            });
        }
        let back = &(&self.u.adjoint() * &rho) * &self.u;
        Ok(trace_product(phi, &back).re)
    }
}

/// Evenly spaced grid `0, t_max/(n-1), ..., t_max`.
pub fn time_grid(t_max: f64, samples: usize) -> Vec<f64> {
    let last = (samples - 1) as f64;
    (0..samples).map(|i| t_max * i as f64 / last).collect()
}

/// Drives `f(H, len)` over `[0, grid.last]`, cutting at segment ends and grid
/// points, and calls `record(i)` at every grid point.
fn sweep<R: Rng + ?Sized>(
    control: &Control,
    dim: usize,
    grid: &[f64],
    rng: &mut R,
    mut advance: impl FnMut(&CMatrix, f64, f64) -> Result<()>,
    mut record: impl FnMut(usize) -> Result<()>,
) -> Result<()> {
    let tau = control.segment_length();
    let tol = 1e-12 * grid.last().copied().unwrap_or(1.0).max(1.0);
    let mut segment = 0usize;
    let mut h = control.hamiltonian(dim, rng)?;
    let mut h_norm = h.spectral_norm();
    let mut t = 0.0;
    record(0)?;
    for (i, &target) in grid.iter().enumerate().skip(1) {
        while t < target - tol {
            let seg_end = (segment + 1) as f64 * tau;
            if t >= seg_end - tol {
                segment += 1;
                h = control.hamiltonian(dim, rng)?;
                h_norm = h.spectral_norm();
                continue;
            }
            let stop = target.min(seg_end);
            advance(&h, h_norm, stop - t)?;
            t = stop;
        }
        record(i)?;
    }
    Ok(())
}

/// `F_φ(t) = <φ|U^dag(t) ρ(t) U(t)|φ>` averaged over control realizations.
pub fn run_lindblad_echo(cfg: &ExperimentConfig) -> Result<DecayCurve> {
    if cfg.protocol != Protocol::LindbladEcho {
        return Err(Error::Config(format!("config is for protocol `{}`, expected `lindblad_echo`", cfg.protocol.name())));
    }
    cfg.validate()?;
    let gen = cfg.build_lindblad()?;
    let params = cfg.lindblad.expect("validated");
    let phi = cfg.initial_state.build(cfg.dim)?.into_matrix();
    lindblad_echo_curve(&gen, &Control::from_params(&params), &params, &phi, cfg.n_unitaries, cfg.seed_spec())
}

/// Lower-level entry point for [`run_lindblad_echo`].
pub fn lindblad_echo_curve(
    gen: &LindbladGenerator,
    control: &Control,
    params: &LindbladParams,
    phi: &CMatrix,
    realizations: usize,
    seed: SeedSpec,
) -> Result<DecayCurve> {
    params.validate()?;
    let noise = gen.superoperator()?.into_matrix().scale_real(gen.epsilon());
    let noise_norm = noise.spectral_norm();
    let grid = time_grid(params.t_max, params.samples);
    let dt_cap = params.dt.unwrap_or(f64::INFINITY);
    let runs: Vec<Vec<f64>> = (0..realizations)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed.with_stream(stream_of(0, r)).rng();
            let mut integ = Integrator::new(noise.clone(), noise_norm, dt_cap, phi);
            let mut out = vec![0.0; grid.len()];
            let cell = std::cell::RefCell::new(&mut integ);
            sweep(
                control,
                gen.dim(),
                &grid,
                &mut rng,
                |h, hn, len| cell.borrow_mut().advance(h, hn, len),
                |i| {
                    out[i] = cell.borrow().fidelity(phi)?;
                    Ok(())
                },
            )?;
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(DecayCurve::new(
        grid.iter()
            .enumerate()
            .map(|(i, &t)| CurvePoint::from_trials(t, &runs.iter().map(|r| r[i]).collect::<Vec<_>>()))
            .collect(),
    ))
}

/// Growth of the first two cumulants of the interaction-picture generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulantReport {
    pub times: Vec<f64>,
    /// RMS over realizations of `||K₁(t) - t L̂ᵃᵛᵉ||_F`.
    pub k1_deviation: Vec<f64>,
    /// RMS over realizations of `||K₂(t)||_F`.
    pub k2_norm: Vec<f64>,
    /// Log-log slopes over `times`; `None` when a series is not strictly positive.
    pub k1_exponent: Option<f64>,
    pub k2_exponent: Option<f64>,
    pub realizations: usize,
}

/// `L̂ᵃᵛᵉ = -γ (1 - |vec 1><vec 1| / D)` with `γ = -Tr L̂ / (D² - 1)`.
pub fn averaged_generator(l_hat: &CMatrix, dim: usize) -> CMatrix {
    let d2 = (dim * dim) as f64;
    let gamma = -l_hat.trace().re / (d2 - 1.0);
    let v = CMatrix::identity(dim).into_vec();
    let proj = CMatrix::outer(&v, &v).scale_real(1.0 / dim as f64);
    (&CMatrix::identity(dim * dim) - &proj).scale_real(-gamma)
}

/// Riemann sums for `K₁(t) = ∫ L̂(s) ds` and `K₂(t) = ½ ∫ [L̂(s), K₁(s)] ds` with
/// `L̂(s) = Û^dag(s) L̂ Û(s)`, `Û = U ⊗ U*`. `L̂` excludes `ε`.
///
/// `times` must be increasing and positive; `step` bounds the quadrature step.
pub fn cumulant_probe(
    gen: &LindbladGenerator,
    control: &Control,
    times: &[f64],
    step: f64,
    realizations: usize,
    seed: SeedSpec,
) -> Result<CumulantReport> {
    let dim = gen.dim();
    let d2 = dim * dim;
    if d2 > 1024 {
        return Err(Error::SizeLimit { what: "cumulant superoperator", dim: d2, cap: 1024 });
    }
    if times.is_empty() || times.windows(2).any(|w| !(w[1] > w[0])) || !(times[0] > 0.0) {
        return Err(Error::Config("cumulant times must be positive and increasing".into()));
    }
    if !(step > 0.0) || realizations == 0 {
        return Err(Error::Config("cumulant probe needs step > 0 and at least one realization".into()));
    }
    let l_hat = gen.superoperator()?.into_matrix();
    let l_ave = averaged_generator(&l_hat, dim);
    let mut grid = Vec::with_capacity(times.len() + 1);
    grid.push(0.0);
    grid.extend_from_slice(times);

    let runs: Vec<(Vec<f64>, Vec<f64>)> = (0..realizations)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed.with_stream(stream_of(0, r)).rng();
            let state = std::cell::RefCell::new((
                CMatrix::identity(dim),
                CMatrix::zeros(d2, d2),
                CMatrix::zeros(d2, d2),
                0.0f64,
            ));
            let mut k1_dev = vec![0.0; grid.len()];
            let mut k2 = vec![0.0; grid.len()];
            sweep(
                control,
                dim,
                &grid,
                &mut rng,
                |h, _, len| {
                    let mut st = state.borrow_mut();
                    let (u, k1, k2m, t) = &mut *st;
                    let pieces = (len / step).ceil().max(1.0) as usize;
                    let ds = len / pieces as f64;
                    let prop = matrix_exp(&h.scale(C64::new(0.0, -ds)), POLICY.expm);
                    for _ in 0..pieces {
                        let big = kron(u, &u.conj())?;
                        let ls = &(&big.adjoint() * &l_hat) * &big;
                        let comm = &(&ls * k1) - &(&*k1 * &ls);
                        k2m.axpy(C64::new(0.5 * ds, 0.0), &comm);
                        k1.axpy(C64::new(ds, 0.0), &ls);
                        *u = &prop * &*u;
                        *t += ds;
                    }
                    Ok(())
                },
                |i| {
                    let st = state.borrow();
                    let (_, k1, k2m, t) = &*st;
                    k1_dev[i] = (k1 - &l_ave.scale_real(*t)).frobenius_norm();
                    k2[i] = k2m.frobenius_norm();
                    Ok(())
                },
            )?;
            Ok((k1_dev[1..].to_vec(), k2[1..].to_vec()))
        })
        .collect::<Result<_>>()?;

    let rms = |pick: &dyn Fn(&(Vec<f64>, Vec<f64>)) -> f64| -> f64 {
        let sq: Vec<f64> = runs.iter().map(|r| pick(r).powi(2)).collect();
        (pairwise_sum(&sq) / runs.len() as f64).sqrt()
    };
    let k1_deviation: Vec<f64> = (0..times.len()).map(|i| rms(&|r| r.0[i])).collect();
    let k2_norm: Vec<f64> = (0..times.len()).map(|i| rms(&|r| r.1[i])).collect();
    let fit = |ys: &[f64]| if times.len() >= 2 { loglog_slope(times, ys).ok() } else { None };
    Ok(CumulantReport {
        times: times.to_vec(),
        k1_exponent: fit(&k1_deviation),
        k2_exponent: fit(&k2_norm),
        k1_deviation,
        k2_norm,
        realizations,
    })
}
