//! Gaussian measures `mu_{s,M}`, the `C <= R` cutoff, weighted-measure weights and
//! Monte Carlo estimators built on them.
//!
//! Random draws follow a counter-based discipline: sample `i` of a run seeded with
//! `master_seed` uses its own ChaCha20 stream `i`, so results never depend on how
//! samples are distributed across threads.
//!
//! Gaussian variates use the Box-Muller transform in polar form
//! `g = sqrt(-ln U1) e^{2 pi i U2}`, giving real and imaginary parts of variance 1/2
//! (`E|g|^2 = 1`). Coefficients are drawn in order `k = -M, ..., M`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{r_correction, EnergyParams};
use crate::error::{Error, Result};
use crate::spectral::{conserved_c_truncated, japanese, sobolev_norm_sq_sigma, FourierState, GridSpec, WeightFamily};
use crate::stats::{mean_stderr, pairwise_sum, McReport};

/// Factor relating the normal-form energies to the Gaussian density exponent.
///
/// With `E|g_k|^2 = 1` the density of `mu_{s,M}` in coefficient coordinates is
/// proportional to `exp(-|||u|||^2)`, which is `exp(-2 E_{s,N} + 2 R_{s,N})` on the
/// low modes. Every `R`/`Q` contribution to a log-density therefore carries this factor.
pub const NORMAL_FORM_SCALE: f64 = 2.0;

/// Largest log-weight accepted before reporting overflow.
pub const MAX_LOG_WEIGHT: f64 = 700.0;

/// Handle on one reproducible random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeededRng {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeededRng {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn generator(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Uniform in `[0, 1)` with 53 random bits.
fn uniform(rng: &mut ChaCha20Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard complex Gaussian, `E|g|^2 = 1`.
pub fn complex_gaussian(rng: &mut ChaCha20Rng) -> Complex64 {
    let u1 = 1.0 - uniform(rng);
    let u2 = uniform(rng);
    Complex64::from_polar((-u1.ln()).sqrt(), 2.0 * PI * u2)
}

/// Parameters of `mu_{s,M}` and of its `C <= R` restriction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureParams {
    pub s: f64,
    pub m_ambient: usize,
    pub cutoff_r: Option<f64>,
    pub family: WeightFamily,
}

impl MeasureParams {
    pub fn new(family: WeightFamily, m_ambient: usize, cutoff_r: Option<f64>) -> Result<Self> {
        let s = family.s;
        if !(s > 1.5) {
            return Err(Error::InvalidArgument(format!("measure exponent s = {s} must exceed 3/2")));
        }
        if let Some(r) = cutoff_r {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidArgument(format!("cutoff R = {r} must be positive")));
            }
        }
        Ok(Self { s, m_ambient, cutoff_r, family })
    }

    pub fn japanese(s: f64, m_ambient: usize) -> Result<Self> {
        Self::new(WeightFamily::japanese(s), m_ambient, None)
    }

    pub fn with_cutoff(mut self, r: f64) -> Result<Self> {
        self.cutoff_r = Some(r);
        Self::new(self.family, self.m_ambient, self.cutoff_r)
    }

    /// `E|u_k|^2 = 1 / m(k)`.
    pub fn mode_variance(&self, k: i64) -> f64 {
        1.0 / self.family.multiplier(k)
    }
}

/// One draw from `mu_{s,M}`: `u_k = g_k / m(k)^{1/2}`.
pub fn sample_state(rng: &SeededRng, p: &MeasureParams) -> FourierState {
    let mut gen = rng.generator();
    let m = p.m_ambient as i64;
    let coeffs = (-m..=m).map(|k| complex_gaussian(&mut gen) / p.family.multiplier(k).sqrt()).collect();
    FourierState::from_raw(p.m_ambient, coeffs)
}

/// Evaluates `f` on samples `0..n` of the run `master_seed`, in parallel, in index order.
pub fn map_samples<T, F>(master_seed: u64, n: usize, p: &MeasureParams, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&FourierState) -> Result<T> + Sync,
{
    (0..n as u64)
        .into_par_iter()
        .map(|i| f(&sample_state(&SeededRng::new(master_seed, i), p)))
        .collect()
}

/// `1` iff `C_N(u) <= R`, where `C_N` is the energy conserved by `Phi_N`
/// (the full `C` when `n_cut >= M`). Ties count as inside.
pub fn cutoff_indicator(u: &FourierState, p: &MeasureParams, n_cut: usize, grid: &GridSpec) -> Result<u8> {
    let r = p.cutoff_r.ok_or(Error::MissingCutoff)?;
    Ok(u8::from(conserved_c_truncated(u, n_cut, grid)? <= r))
}

/// Indicator that is identically 1 when no cutoff is configured.
pub fn cutoff_factor(u: &FourierState, p: &MeasureParams, n_cut: usize, grid: &GridSpec) -> Result<f64> {
    match p.cutoff_r {
        None => Ok(1.0),
        Some(_) => cutoff_indicator(u, p, n_cut, grid).map(f64::from),
    }
}

/// Log of the unnormalized weight `1_{C <= R} e^{-2 R_{s,N}(u)}`; `None` outside the cutoff.
pub fn wgm_log_weight(u: &FourierState, p: &MeasureParams, energy: &EnergyParams, grid: &GridSpec) -> Result<Option<f64>> {
    let n = energy.resolve(u)?;
    if cutoff_indicator(u, p, n, grid)? == 0 {
        return Ok(None);
    }
    let log_w = -NORMAL_FORM_SCALE * r_correction(u, energy)?;
    if log_w > MAX_LOG_WEIGHT {
        return Err(Error::WeightOverflow(log_w));
    }
    Ok(Some(log_w))
}

/// Unnormalized weight of `rho_{s,R,N}` against `mu_{s,M}`.
pub fn wgm_weight(u: &FourierState, p: &MeasureParams, energy: &EnergyParams, grid: &GridSpec) -> Result<f64> {
    Ok(wgm_log_weight(u, p, energy, grid)?.map_or(0.0, f64::exp))
}

/// Monte Carlo estimate of the partition constant `Z_{s,R,N} = E_mu[weight]`.
pub fn partition_estimate(
    p: &MeasureParams,
    energy: &EnergyParams,
    grid: &GridSpec,
    n_samples: usize,
    seed: u64,
) -> Result<McReport> {
    if n_samples < 1000 {
        return Err(Error::InvalidArgument(format!("partition estimate needs >= 1000 samples, got {n_samples}")));
    }
    let w = map_samples(seed, n_samples, p, |u| wgm_weight(u, p, energy, grid))?;
    let report = McReport::from_samples(&w, seed);
    if !(report.estimate > 0.0 && report.estimate.is_finite()) {
        return Err(Error::BoundViolated(format!("partition estimate {} not positive and finite", report.estimate)));
    }
    Ok(report)
}

/// Pinned bound on `(E||u||^m)^{1/m} / (sqrt(m) (E||u||^2)^{1/2})`. Gaussian
/// hypercontractivity gives `sqrt((m-1)/m) < 1`.
pub const MOMENT_RATIO_BOUND: f64 = 1.0;

/// Monte Carlo moments of `||u||_{H^sigma}` under `mu_{s,M}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentSeries {
    /// `(m, (E||u||^m)^{1/m})` for `m = 2, 4, ..., m_max`.
    pub rows: Vec<(u32, f64)>,
    /// `(E||u||^2)^{1/2}` computed exactly.
    pub exact_l2: f64,
    /// `max_m rows[m] / (sqrt(m) exact_l2)`.
    pub max_ratio: f64,
}

/// `(E||u||^2_{H^sigma})^{1/2} = (sum_k <k>^{2 sigma} / m(k))^{1/2}`.
pub fn exact_second_moment(p: &MeasureParams, sigma: f64) -> f64 {
    let m = p.m_ambient as i64;
    pairwise_sum(&(-m..=m).map(|k| japanese(k, sigma) * p.mode_variance(k)).collect::<Vec<_>>()).sqrt()
}

pub fn moment_growth_mc(p: &MeasureParams, sigma: f64, m_max: u32, n_samples: usize, seed: u64) -> Result<MomentSeries> {
    if !(sigma < p.s - 0.5) {
        return Err(Error::InvalidArgument(format!("sigma = {sigma} must be below s - 1/2")));
    }
    if m_max < 2 {
        return Err(Error::InvalidArgument("m_max must be >= 2".into()));
    }
    let norms_sq = map_samples(seed, n_samples, p, |u| Ok(sobolev_norm_sq_sigma(u, sigma)))?;
    let exact_l2 = exact_second_moment(p, sigma);
    let mut rows = Vec::new();
    let mut max_ratio: f64 = 0.0;
    for m in (2..=m_max).step_by(2) {
        let pw: Vec<f64> = norms_sq.iter().map(|x| x.powi(m as i32 / 2)).collect();
        let lm = (pairwise_sum(&pw) / n_samples as f64).powf(1.0 / m as f64);
        max_ratio = max_ratio.max(lm / ((m as f64).sqrt() * exact_l2));
        rows.push((m, lm));
    }
    if max_ratio > MOMENT_RATIO_BOUND {
        return Err(Error::BoundViolated(format!("moment ratio {max_ratio} exceeds {MOMENT_RATIO_BOUND}")));
    }
    Ok(MomentSeries { rows, exact_l2, max_ratio })
}

/// `(E_mu |f|^p)^{1/p}` with a delta-method standard error.
pub fn lp_norm_mc<F>(f: F, p_exp: f64, measure: &MeasureParams, n: usize, seed: u64) -> Result<McReport>
where
    F: Fn(&FourierState) -> Result<f64> + Sync,
{
    if !(p_exp >= 1.0) {
        return Err(Error::InvalidArgument(format!("L^p exponent {p_exp} must be >= 1")));
    }
    let vals = map_samples(seed, n, measure, |u| Ok(f(u)?.abs().powf(p_exp)))?;
    Ok(lp_from_powers(&vals, p_exp, seed))
}

/// `(mean x)^{1/p}` from samples `x = |f|^p`.
pub(crate) fn lp_from_powers(vals: &[f64], p_exp: f64, seed: u64) -> McReport {
    let (mean, se) = mean_stderr(vals);
    let estimate = mean.powf(1.0 / p_exp);
    let stderr = if mean > 0.0 { se * estimate / (p_exp * mean) } else { 0.0 };
    McReport { estimate, stderr, n: vals.len(), seed, target: None, z: None }
}
