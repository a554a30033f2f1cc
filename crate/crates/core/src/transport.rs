//! Radon-Nikodym densities of `Phi_N(t)_# mu_{s,M}` and the studies built on them.
//!
//! Densities are handled as logarithms throughout. With `|||u|||^2 = sum m(k)|u_k|^2`,
//!
//! ```text
//! log G_direct = -(|||Pi_N Phi_N(-t) u|||^2 - |||Pi_N u|||^2)
//! log G_nf     = 2 (R(Phi_N(-t) u) - R(u) - int_0^{-t} Q(Phi_N(tau) u) d tau)
//! log F        = -2 int_0^{-t} Q(Phi_N(tau) u) d tau
//! ```
//!
//! The factor 2 is [`NORMAL_FORM_SCALE`]: it converts the half-norm in `E_{s,N}`
//! into the exponent of the Gaussian density.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{r_and_q, r_correction, EnergyParams, SumMethod};
use crate::error::{Error, Result};
use crate::flow::{evolve, evolve_trajectory, FlowParams};
use crate::measures::{map_samples, cutoff_factor, lp_from_powers, MeasureParams, NORMAL_FORM_SCALE};
use crate::spectral::{japanese, project_low, sobolev_norm_sq, sobolev_norm_sq_sigma, FourierState, GridSpec, WeightFamily};
use crate::stats::{mean_stderr, McReport};

/// Transport time, truncation and discretization for one density evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityParams {
    pub t: f64,
    pub energy: EnergyParams,
    pub flow: FlowParams,
    pub quad_points: usize,
}

impl DensityParams {
    pub const DEFAULT_QUAD_POINTS: usize = 501;

    pub fn new(t: f64, family: WeightFamily, flow: FlowParams, quad_points: usize) -> Result<Self> {
        let energy = EnergyParams::new(flow.n_cut, family).with_method(SumMethod::SpaceTime);
        Self { t, energy, flow, quad_points }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.quad_points < 3 || self.quad_points % 2 == 0 {
            return Err(Error::InvalidArgument(format!("quad_points = {} must be odd and >= 3", self.quad_points)));
        }
        if self.energy.n_cut != Some(self.flow.n_cut) {
            return Err(Error::InvalidArgument("energy and flow truncations differ".into()));
        }
        if !self.t.is_finite() {
            return Err(Error::InvalidArgument("transport time must be finite".into()));
        }
        Ok(self)
    }

    pub fn n_cut(&self) -> usize {
        self.flow.n_cut
    }

    fn grid(&self) -> &GridSpec {
        &self.flow.grid
    }
}

/// `log G_direct` from the quadratic form at the endpoints of one backward solve.
pub fn density_direct(u: &FourierState, d: &DensityParams) -> Result<f64> {
    if d.t == 0.0 {
        return Ok(0.0);
    }
    let n = d.energy.resolve(u)?;
    let back = evolve(u, -d.t, &d.flow)?;
    let fam = &d.energy.family;
    Ok(-(sobolev_norm_sq(&project_low(&back, n), fam) - sobolev_norm_sq(&project_low(u, n), fam)))
}

/// Ingredients of the normal-form and weighted-measure densities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormalFormTerms {
    /// `R_{s,N}(u)`
    pub r_start: f64,
    /// `R_{s,N}(Phi_N(-t) u)`
    pub r_end: f64,
    /// `int_0^{-t} Q_{s,N}(Phi_N(tau) u) d tau`, composite Simpson.
    pub q_integral: f64,
}

impl NormalFormTerms {
    pub fn log_g(&self) -> f64 {
        NORMAL_FORM_SCALE * (self.r_end - self.r_start - self.q_integral)
    }

    pub fn log_f(&self) -> f64 {
        -NORMAL_FORM_SCALE * self.q_integral
    }
}

/// Composite Simpson weights `(1, 4, 2, ..., 4, 1) h/3` on an odd number of nodes.
pub fn simpson_weights(points: usize, h: f64) -> Vec<f64> {
    (0..points)
        .map(|i| {
            let c = if i == 0 || i + 1 == points {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect()
}

/// One backward trajectory sampled at the Simpson nodes, with `R` at both ends and
/// `Q` at every node.
pub fn normal_form_terms(u: &FourierState, d: &DensityParams) -> Result<NormalFormTerms> {
    if d.t == 0.0 {
        let r = r_correction(u, &d.energy)?;
        return Ok(NormalFormTerms { r_start: r, r_end: r, q_integral: 0.0 });
    }
    let traj = evolve_trajectory(u, -d.t, &d.flow, d.quad_points)?;
    let h = -d.t / (d.quad_points - 1) as f64;
    let weights = simpson_weights(d.quad_points, h);
    let mut r_start = 0.0;
    let mut r_end = 0.0;
    let mut q_integral = 0.0;
    let last = traj.len() - 1;
    for (i, (state, w)) in traj.states.iter().zip(&weights).enumerate() {
        let (r, q) = r_and_q(state, &d.energy, d.grid())?;
        q_integral += w * q;
        if i == 0 {
            r_start = r;
        }
        if i == last {
            r_end = r;
        }
    }
    Ok(NormalFormTerms { r_start, r_end, q_integral })
}

/// `log G_nf = 2 (R(Phi_N(-t) u) - R(u) - int_0^{-t} Q)`.
pub fn density_normal_form(u: &FourierState, d: &DensityParams) -> Result<f64> {
    Ok(normal_form_terms(u, d)?.log_g())
}

/// `log F = -2 int_0^{-t} Q`, the density for the weighted measure `rho_{s,R,N}`.
pub fn density_wgm(u: &FourierState, d: &DensityParams) -> Result<f64> {
    Ok(normal_form_terms(u, d)?.log_f())
}

/// Test functions for the change-of-measure identity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservableSpec {
    Constant,
    /// `|u_k|^2`
    ModeModulusSq { k: i64 },
    /// `sum_{|k| <= n} <k>^{2 sigma} |u_k|^2`
    LowNormSq { sigma: f64, n_cut: usize },
    /// `exp(-scale ||u||^2_{H^sigma})`
    BoundedExp { sigma: f64, scale: f64 },
    /// `sum_{|k| > n} |u_k|^2`
    HighMassOnly { n_cut: usize },
}

impl ObservableSpec {
    pub fn eval(&self, u: &FourierState) -> f64 {
        match *self {
            Self::Constant => 1.0,
            Self::ModeModulusSq { k } => u.coeff(k).norm_sqr(),
            Self::LowNormSq { sigma, n_cut } => {
                let n = n_cut as i64;
                u.iter().filter(|(k, _)| k.abs() <= n).map(|(k, c)| japanese(k, sigma) * c.norm_sqr()).sum()
            }
            Self::BoundedExp { sigma, scale } => (-scale * sobolev_norm_sq_sigma(u, sigma)).exp(),
            Self::HighMassOnly { n_cut } => {
                let n = n_cut as i64;
                u.iter().filter(|(k, _)| k.abs() > n).map(|(_, c)| c.norm_sqr()).sum()
            }
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Self::Constant => "constant".into(),
            Self::ModeModulusSq { k } => format!("mode_modulus_sq(k={k})"),
            Self::LowNormSq { sigma, n_cut } => format!("low_norm_sq(sigma={sigma},n={n_cut})"),
            Self::BoundedExp { sigma, scale } => format!("bounded_exp(sigma={sigma},scale={scale})"),
            Self::HighMassOnly { n_cut } => format!("high_mass_only(n={n_cut})"),
        }
    }

    /// The default battery for the change-of-measure test at truncation `n`.
    pub fn battery(n: usize) -> Vec<Self> {
        vec![
            Self::Constant,
            Self::ModeModulusSq { k: 0 },
            Self::ModeModulusSq { k: 1 },
            Self::LowNormSq { sigma: 1.0, n_cut: n },
            Self::BoundedExp { sigma: 0.0, scale: 0.5 },
            Self::HighMassOnly { n_cut: n },
        ]
    }
}

/// One observable's comparison of `E[f(Phi_N(t) u)]` with `E[f(u) G(t, u)]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChangeOfMeasureRow {
    pub observable: ObservableSpec,
    pub lhs: McReport,
    pub rhs: McReport,
    /// Mean of the paired differences over their standard error.
    pub z: f64,
}

/// Monte Carlo check of `E[1 f(Phi_N(t) u)] = E[1 f(u) G_{s,N}(t, u)]`, where `1` is the
/// `C_N <= R` indicator when a cutoff is configured (it is conserved by the flow).
pub fn change_of_measure_test(
    d: &DensityParams,
    m: &MeasureParams,
    obs: &[ObservableSpec],
    n: usize,
    seed: u64,
) -> Result<Vec<ChangeOfMeasureRow>> {
    if m.m_ambient < d.n_cut() {
        return Err(Error::TruncationExceedsAmbient { n_cut: d.n_cut(), m_ambient: m.m_ambient });
    }
    let per_sample = map_samples(seed, n, m, |u| {
        let chi = cutoff_factor(u, m, d.n_cut(), d.grid())?;
        if chi == 0.0 {
            return Ok(vec![(0.0, 0.0); obs.len()]);
        }
        let fwd = evolve(u, d.t, &d.flow)?;
        let g = density_direct(u, d)?.exp();
        Ok(obs.iter().map(|f| (f.eval(&fwd), f.eval(u) * g)).collect::<Vec<_>>())
    })?;
    Ok(obs
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let lhs: Vec<f64> = per_sample.iter().map(|r| r[j].0).collect();
            let rhs: Vec<f64> = per_sample.iter().map(|r| r[j].1).collect();
            let diff: Vec<f64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
            let (md, sd) = mean_stderr(&diff);
            ChangeOfMeasureRow {
                observable: *f,
                lhs: McReport::from_samples(&lhs, seed),
                rhs: McReport::from_samples(&rhs, seed),
                z: crate::stats::z_score(md, sd),
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvergenceKind {
    R,
    Q,
    G,
}

/// Settings shared by the convergence and `L^p` studies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StudySetup {
    pub s: f64,
    pub t: f64,
    pub m_ambient: usize,
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n_cut: usize,
    /// `sup` over the sample set of `|X_{s,M} - X_{s,N}|`.
    pub sup_diff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub kind: ConvergenceKind,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Strict decrease along the rows with `N < M`; the `N = M` row must be exactly zero.
    pub fn strictly_decreasing(&self, m_ambient: usize) -> bool {
        let inner: Vec<f64> = self.rows.iter().filter(|r| r.n_cut < m_ambient).map(|r| r.sup_diff).collect();
        let at_m = self.rows.iter().filter(|r| r.n_cut == m_ambient).all(|r| r.sup_diff == 0.0);
        at_m && inner.windows(2).all(|w| w[1] < w[0])
    }
}

fn quantity(kind: ConvergenceKind, u: &FourierState, n: usize, setup: &StudySetup) -> Result<f64> {
    let family = WeightFamily::japanese(setup.s);
    let energy = EnergyParams::new(n, family).with_method(SumMethod::SpaceTime);
    let flow = FlowParams::new(n, setup.step)?;
    match kind {
        ConvergenceKind::R => r_correction(u, &energy),
        ConvergenceKind::Q => crate::energy::q_derivative(u, &energy, &flow.grid),
        ConvergenceKind::G => density_direct(u, &DensityParams::new(setup.t, family, flow, 3)?),
    }
}

/// Sup-distance between `X_{s,M}` and `X_{s,N}` over a fixed sample set from `mu_{s,M}`.
pub fn convergence_study(
    kind: ConvergenceKind,
    setup: &StudySetup,
    n_states: usize,
    n_list: &[usize],
    seed: u64,
) -> Result<ConvergenceTable> {
    let m = setup.m_ambient;
    if let Some(&bad) = n_list.iter().find(|&&n| n > m) {
        return Err(Error::TruncationExceedsAmbient { n_cut: bad, m_ambient: m });
    }
    let measure = MeasureParams::japanese(setup.s, m)?;
    let states = map_samples(seed, n_states, &measure, |u| Ok(u.clone()))?;
    convergence_on_states(kind, setup, &states, n_list)
}

/// [`convergence_study`] on a caller-supplied sample set.
pub fn convergence_on_states(
    kind: ConvergenceKind,
    setup: &StudySetup,
    states: &[FourierState],
    n_list: &[usize],
) -> Result<ConvergenceTable> {
    let m = setup.m_ambient;
    let reference: Vec<f64> = states.par_iter().map(|u| quantity(kind, u, m, setup)).collect::<Result<_>>()?;
    let rows = n_list
        .iter()
        .map(|&n| {
            let vals: Vec<f64> = states.par_iter().map(|u| quantity(kind, u, n, setup)).collect::<Result<_>>()?;
            let sup = vals.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            Ok(ConvergenceRow { n_cut: n, sup_diff: sup })
        })
        .collect::<Result<_>>()?;
    Ok(ConvergenceTable { kind, rows })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpRow {
    pub n_cut: usize,
    pub p: f64,
    /// `||G_{s,N}(t)||_{L^p(1 d mu)}`
    pub norm: McReport,
    /// `||G_{s,M}(t) - G_{s,N}(t)||_{L^p(1 d mu)}`
    pub diff_to_ambient: McReport,
}

/// `L^p` norms of `G_{s,N}(t)` and of `G_{s,M}(t) - G_{s,N}(t)` against the restricted
/// measure `1_{C <= R} mu_{s,M}`, where `C` is the full conserved energy at `M`.
pub fn lp_density_study(
    setup: &StudySetup,
    measure: &MeasureParams,
    p_list: &[f64],
    n_list: &[usize],
    n: usize,
    seed: u64,
) -> Result<Vec<LpRow>> {
    let m = measure.m_ambient;
    if let Some(&bad) = n_list.iter().find(|&&k| k > m) {
        return Err(Error::TruncationExceedsAmbient { n_cut: bad, m_ambient: m });
    }
    if let Some(&p) = p_list.iter().find(|&&p| !(p >= 1.0)) {
        return Err(Error::InvalidArgument(format!("L^p exponent {p} must be >= 1")));
    }
    let family = measure.family;
    let dp = |k: usize| -> Result<DensityParams> { DensityParams::new(setup.t, family, FlowParams::new(k, setup.step)?, 3) };
    let ambient = dp(m)?;
    let per_n: Vec<DensityParams> = n_list.iter().map(|&k| dp(k)).collect::<Result<_>>()?;
    // per sample: (G_M, [G_N for N in n_list]) with the indicator folded in
    let samples = map_samples(seed, n, measure, |u| {
        let chi = cutoff_factor(u, measure, m, ambient.grid())?;
        if chi == 0.0 {
            return Ok((0.0, vec![0.0; per_n.len()]));
        }
        let gm = density_direct(u, &ambient)?.exp();
        let gn = per_n.iter().map(|d| Ok(density_direct(u, d)?.exp())).collect::<Result<Vec<_>>>()?;
        Ok((gm, gn))
    })?;
    let mut rows = Vec::new();
    for (j, &k) in n_list.iter().enumerate() {
        for &p in p_list {
            let g: Vec<f64> = samples.iter().map(|(_, gn)| gn[j].powf(p)).collect();
            let dg: Vec<f64> = samples.iter().map(|(gm, gn)| (gm - gn[j]).abs().powf(p)).collect();
            rows.push(LpRow { n_cut: k, p, norm: lp_from_powers(&g, p, seed), diff_to_ambient: lp_from_powers(&dg, p, seed) });
        }
    }
    Ok(rows)
}
