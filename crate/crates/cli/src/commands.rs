//! One function per subcommand. Each computes its table, judges it against the
//! tolerances below and returns a [`Report`].

use anyhow::Result;
use qnls_core::flow::{divergence_at, growth_monitor, jacobian_det};
use qnls_core::measures::{cutoff_factor, map_samples, moment_growth_mc};
use qnls_core::resonance::{counting_sweep, psi_bound_ratio, strichartz_sum, LemmaRow, COUNTING_CONSTANT};
use qnls_core::spectral::{conserved_c_truncated, mass, sobolev_norm_sq_sigma, GridSpec};
use qnls_core::transport::{
    change_of_measure_test, convergence_on_states, density_direct, density_normal_form, lp_density_study,
    ConvergenceKind, StudySetup,
};
use qnls_core::{
    evolve_trajectory, sample_state, Complex64, DensityParams, Error, FlowParams, FourierState, MeasureParams,
    ObservableSpec, SeededRng,
};
use serde::Serialize;

use crate::config::{Config, Initial};
use crate::output::{csv_of, Report};

/// Relative drift of mass and `C_N` allowed along a simulated trajectory.
pub const DRIFT_TOL: f64 = 1e-8;
/// Phase error allowed against the exact plane-wave solution.
pub const PLANE_WAVE_TOL: f64 = 1e-8;
/// Gap allowed between the direct and normal-form log-densities.
pub const DENSITY_TOL: f64 = 1e-6;
/// Largest Monte Carlo `|z|` accepted.
pub const Z_MAX: f64 = 4.0;
/// Bound on `|div|` and `|det - 1|`.
pub const LIOUVILLE_TOL: f64 = 1e-6;
/// Largest truncation for which `liouville` integrates the full variational system.
pub const JACOBIAN_MAX_N: usize = 16;
/// Gap allowed between the direct and space-time Strichartz sums.
pub const STRICHARTZ_TOL: f64 = 1e-10;

fn measure(cfg: &Config) -> Result<MeasureParams> {
    let m = MeasureParams::new(cfg.family(), cfg.m_ambient, None)?;
    Ok(match cfg.cutoff_r {
        Some(r) => m.with_cutoff(r)?,
        None => m,
    })
}

fn flow(cfg: &Config, n_cut: usize) -> Result<FlowParams> {
    Ok(FlowParams::new(n_cut, cfg.h)?)
}

fn density(cfg: &Config) -> Result<DensityParams> {
    Ok(DensityParams::new(cfg.t, cfg.family(), flow(cfg, cfg.n_cut)?, cfg.quad_points)?)
}

/// The first `n_samples` draws of the run, keeping those with `C_n <= R`.
fn restricted_states(cfg: &Config, n_cut: usize) -> Result<Vec<(usize, FourierState)>> {
    let m = measure(cfg)?;
    let grid = GridSpec::for_quintic(n_cut);
    let kept = map_samples(cfg.seed, cfg.n_samples, &m, |u| Ok((cutoff_factor(u, &m, n_cut, &grid)? == 1.0).then(|| u.clone())))?;
    Ok(kept.into_iter().enumerate().filter_map(|(i, u)| u.map(|u| (i, u))).collect())
}

fn max_abs(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

#[derive(Serialize)]
struct SimulateRow {
    t: f64,
    mass: f64,
    c_n: f64,
    h_sigma_norm: f64,
}

pub fn simulate(cfg: &Config) -> Result<Report> {
    let p = flow(cfg, cfg.n_cut)?;
    let u0 = match cfg.initial {
        Initial::PlaneWave => FourierState::plane_wave(cfg.m_ambient, cfg.mode, Complex64::new(cfg.amplitude, 0.0)),
        Initial::Gaussian => {
            let u = sample_state(&SeededRng::new(cfg.seed, 0), &measure(cfg)?);
            FourierState::from_coeffs(cfg.m_ambient, u.coeffs().iter().map(|c| c * cfg.amplitude).collect())?
        }
    };
    let tr = evolve_trajectory(&u0, cfg.t, &p, cfg.snapshots)?;
    tr.write_dir(cfg.output_path.join("trajectory"), &serde_json::to_value(cfg)?, Some(cfg.seed))?;
    let rows = tr
        .times
        .iter()
        .zip(&tr.states)
        .map(|(&t, u)| {
            Ok(SimulateRow {
                t,
                mass: mass(u),
                c_n: conserved_c_truncated(u, cfg.n_cut, &p.grid)?,
                h_sigma_norm: sobolev_norm_sq_sigma(u, cfg.sigma).sqrt(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (mut pass, mut summary) = match growth_monitor(&tr, cfg.sigma, &p, DRIFT_TOL) {
        Ok(r) => (
            true,
            format!("mass drift {:.1e}, C drift {:.1e}, growth ratio {:.3}", r.mass_rel_drift, r.c_rel_drift, r.max_bound_ratio),
        ),
        Err(Error::BoundViolated(msg)) => (false, msg),
        Err(e) => return Err(e.into()),
    };
    if cfg.initial == Initial::PlaneWave {
        let a = Complex64::new(cfg.amplitude, 0.0);
        let freq = (cfg.mode * cfg.mode) as f64 + cfg.amplitude.powi(4);
        let exact = FourierState::plane_wave(cfg.m_ambient, cfg.mode, a * Complex64::from_polar(1.0, -freq * cfg.t));
        let err = tr.states.last().expect("snapshots").max_abs_diff(&exact);
        pass &= err <= PLANE_WAVE_TOL;
        summary += &format!(", plane-wave error {err:.1e} (tol {PLANE_WAVE_TOL:.0e})");
    }
    Ok(Report {
        pass,
        summary: format!("{} snapshots to t = {}: {summary}", tr.len(), cfg.t),
        csv: csv_of(&rows)?,
    })
}

#[derive(Serialize)]
struct DensityRow {
    sample: usize,
    log_g_direct: f64,
    log_g_normal_form: f64,
    gap: f64,
}

pub fn density_check(cfg: &Config) -> Result<Report> {
    let d = density(cfg)?;
    let states = restricted_states(cfg, cfg.n_cut)?;
    let rows = states
        .iter()
        .map(|(i, u)| {
            let a = density_direct(u, &d)?;
            let b = density_normal_form(u, &d)?;
            Ok(DensityRow { sample: *i, log_g_direct: a, log_g_normal_form: b, gap: (a - b).abs() })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = max_abs(rows.iter().map(|r| r.gap));
    let pass = !rows.is_empty() && worst <= DENSITY_TOL;
    Ok(Report {
        pass,
        summary: format!("{} of {} draws inside the cutoff, worst gap {worst:.2e} (tol {DENSITY_TOL:.0e})", rows.len(), cfg.n_samples),
        csv: csv_of(&rows)?,
    })
}

#[derive(Serialize)]
struct TransportRow {
    observable: String,
    lhs: f64,
    lhs_stderr: f64,
    rhs: f64,
    rhs_stderr: f64,
    z: f64,
}

pub fn transport_mc(cfg: &Config) -> Result<Report> {
    let rows = change_of_measure_test(&density(cfg)?, &measure(cfg)?, &ObservableSpec::battery(cfg.n_cut), cfg.n_samples, cfg.seed)?;
    let rows: Vec<TransportRow> = rows
        .into_iter()
        .map(|r| TransportRow {
            observable: r.observable.label(),
            lhs: r.lhs.estimate,
            lhs_stderr: r.lhs.stderr,
            rhs: r.rhs.estimate,
            rhs_stderr: r.rhs.stderr,
            z: r.z,
        })
        .collect();
    let worst = max_abs(rows.iter().map(|r| r.z));
    Ok(Report {
        pass: worst <= Z_MAX,
        summary: format!("{} observables, n = {}, max |z| {worst:.2} (tol {Z_MAX})", rows.len(), cfg.n_samples),
        csv: csv_of(&rows)?,
    })
}

#[derive(Serialize)]
struct ConvergenceCsvRow {
    quantity: String,
    n_cut: usize,
    m_ambient: usize,
    sup_diff: f64,
}

pub fn convergence(cfg: &Config) -> Result<Report> {
    let setup = StudySetup { s: cfg.s, t: cfg.t, m_ambient: cfg.m_ambient, step: cfg.h };
    let states: Vec<FourierState> = restricted_states(cfg, cfg.m_ambient)?.into_iter().map(|(_, u)| u).collect();
    if states.is_empty() {
        return Ok(Report { pass: false, summary: "no draw inside the cutoff".into(), csv: Vec::new() });
    }
    let mut rows = Vec::new();
    let mut failing = Vec::new();
    for kind in [ConvergenceKind::R, ConvergenceKind::Q, ConvergenceKind::G] {
        let tab = convergence_on_states(kind, &setup, &states, &cfg.n_list())?;
        if !tab.strictly_decreasing(cfg.m_ambient) {
            failing.push(format!("{kind:?}"));
        }
        rows.extend(tab.rows.iter().map(|r| ConvergenceCsvRow {
            quantity: format!("{kind:?}"),
            n_cut: r.n_cut,
            m_ambient: cfg.m_ambient,
            sup_diff: r.sup_diff,
        }));
    }
    let summary = if failing.is_empty() {
        format!("R, Q, log G strictly decrease along N = {:?} over {} states", cfg.n_list(), states.len())
    } else {
        format!("not strictly decreasing: {}", failing.join(", "))
    };
    Ok(Report { pass: failing.is_empty(), summary, csv: csv_of(&rows)? })
}

#[derive(Serialize)]
struct LiouvilleRow {
    check: &'static str,
    sample: usize,
    value: f64,
}

pub fn liouville(cfg: &Config) -> Result<Report> {
    let p = flow(cfg, cfg.n_cut)?;
    let m = MeasureParams::new(cfg.family(), cfg.m_ambient, None)?;
    let divs = map_samples(cfg.seed, cfg.n_samples, &m, |u| divergence_at(u, &p))?;
    let mut rows: Vec<LiouvilleRow> =
        divs.iter().enumerate().map(|(i, &v)| LiouvilleRow { check: "divergence", sample: i, value: v }).collect();
    let worst_div = max_abs(divs.iter().copied());
    let mut pass = worst_div <= LIOUVILLE_TOL;
    let mut summary = format!("max |div| {worst_div:.2e}");
    if cfg.n_cut <= JACOBIAN_MAX_N {
        let det = jacobian_det(&sample_state(&SeededRng::new(cfg.seed, 0), &m), cfg.t, &p)?;
        rows.push(LiouvilleRow { check: "determinant", sample: 0, value: det });
        pass &= (det - 1.0).abs() <= LIOUVILLE_TOL;
        summary += &format!(", |det - 1| {:.2e}", (det - 1.0).abs());
    } else {
        summary += &format!(", determinant skipped for N > {JACOBIAN_MAX_N}");
    }
    Ok(Report { pass, summary: format!("{summary} (tol {LIOUVILLE_TOL:.0e})"), csv: csv_of(&rows)? })
}

/// Deterministic sequences for the Strichartz identity, supported on `|k| <= n`.
fn strichartz_inputs(n: usize) -> Vec<Vec<f64>> {
    (0..6).map(|j| (0..2 * n + 1).map(|i| 1.0 / (1.0 + ((i * 7 + j * 3) % 5) as f64)).collect()).collect()
}

pub fn lemmas(_cfg: &Config) -> Result<Report> {
    let mut rows = Vec::new();
    let sweep = counting_sweep(4, 8, 64)?;
    rows.push(LemmaRow {
        lemma: "counting".into(),
        params: format!("m<=4,blocks<=8,|kappa|<=64,worst={:?}", sweep.blocks),
        count_or_ratio: sweep.max_ratio,
        bound: COUNTING_CONSTANT,
    });
    let counting_ok = sweep.max_ratio <= COUNTING_CONSTANT;

    let mut psi_ok = true;
    for s in [1.6, 2.0, 2.5] {
        let a = psi_bound_ratio(8, s);
        let b = psi_bound_ratio(16, s);
        psi_ok &= a.is_finite() && b.is_finite() && b <= 2.0 * a;
        for (n, v) in [(8, a), (16, b)] {
            rows.push(LemmaRow { lemma: "psi".into(), params: format!("s={s},n={n}"), count_or_ratio: v, bound: 2.0 * a });
        }
    }

    let mut worst: f64 = 0.0;
    for n in 1..=4usize {
        let seqs = strichartz_inputs(n);
        let f = [&seqs[0][..], &seqs[1][..], &seqs[2][..], &seqs[3][..], &seqs[4][..], &seqs[5][..]];
        for kappa in [-((n * n) as i64), -1, 0, 2, 3 * (n * n) as i64] {
            let r = strichartz_sum(n, kappa, f)?;
            let gap = (r.brute - r.quadrature).abs() / r.brute.abs().max(1.0);
            worst = worst.max(gap);
            rows.push(LemmaRow {
                lemma: "strichartz".into(),
                params: format!("n={n},kappa={kappa}"),
                count_or_ratio: r.brute,
                bound: r.quadrature,
            });
        }
    }
    let pass = counting_ok && psi_ok && worst <= STRICHARTZ_TOL;
    Ok(Report {
        pass,
        summary: format!(
            "counting ratio {} (constant {COUNTING_CONSTANT}), psi ratio stable 8 -> 16: {psi_ok}, Strichartz gap {worst:.1e} (tol {STRICHARTZ_TOL:.0e})",
            sweep.max_ratio
        ),
        csv: csv_of(&rows)?,
    })
}

#[derive(Serialize)]
struct LpCsvRow {
    n_cut: usize,
    p: f64,
    norm: f64,
    norm_stderr: f64,
    diff_to_ambient: f64,
    diff_stderr: f64,
}

pub fn lp_density(cfg: &Config) -> Result<Report> {
    let setup = StudySetup { s: cfg.s, t: cfg.t, m_ambient: cfg.m_ambient, step: cfg.h };
    let rows = lp_density_study(&setup, &measure(cfg)?, &cfg.p, &cfg.n_list(), cfg.n_samples, cfg.seed)?;
    let finite = rows.iter().all(|r| r.norm.estimate.is_finite() && r.norm.estimate > 0.0);
    // Differences to G_M must shrink along the truncations below M.
    let mut decreasing = true;
    for &p in &cfg.p {
        let diffs: Vec<f64> = rows
            .iter()
            .filter(|r| r.p == p && r.n_cut < cfg.m_ambient)
            .map(|r| r.diff_to_ambient.estimate)
            .collect();
        decreasing &= diffs.windows(2).all(|w| w[1] < w[0]);
    }
    let csv_rows: Vec<LpCsvRow> = rows
        .iter()
        .map(|r| LpCsvRow {
            n_cut: r.n_cut,
            p: r.p,
            norm: r.norm.estimate,
            norm_stderr: r.norm.stderr,
            diff_to_ambient: r.diff_to_ambient.estimate,
            diff_stderr: r.diff_to_ambient.stderr,
        })
        .collect();
    Ok(Report {
        pass: finite && decreasing,
        summary: format!(
            "{} rows, norms finite: {finite}, differences to M = {} decreasing in N: {decreasing}",
            csv_rows.len(),
            cfg.m_ambient
        ),
        csv: csv_of(&csv_rows)?,
    })
}

#[derive(Serialize)]
struct MomentRow {
    m: u32,
    moment: f64,
    ratio_to_sqrt_m: f64,
}

pub fn moments(cfg: &Config) -> Result<Report> {
    let m = MeasureParams::new(cfg.family(), cfg.m_ambient, None)?;
    match moment_growth_mc(&m, cfg.sigma, cfg.m_max, cfg.n_samples, cfg.seed) {
        Ok(series) => {
            let rows: Vec<MomentRow> = series
                .rows
                .iter()
                .map(|&(k, v)| MomentRow { m: k, moment: v, ratio_to_sqrt_m: v / ((k as f64).sqrt() * series.exact_l2) })
                .collect();
            Ok(Report {
                pass: true,
                summary: format!("max moment ratio {:.3} for m <= {}", series.max_ratio, cfg.m_max),
                csv: csv_of(&rows)?,
            })
        }
        Err(Error::BoundViolated(msg)) => Ok(Report { pass: false, summary: msg, csv: Vec::new() }),
        Err(e) => Err(e.into()),
    }
}

/// One-line verdict printed by `main`.
pub fn headline(command: &str, report: &Report) -> String {
    format!("{} {command}: {}", verdict(report.pass), report.summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Config {
        Config { n_samples: 40, output_path: std::env::temp_dir().join("qnls-unused"), ..Config::default() }
    }

    #[test]
    fn density_check_at_time_zero_is_exactly_zero() {
        let r = density_check(&Config { t: 0.0, ..small() }).unwrap();
        assert!(r.pass);
        let text = String::from_utf8(r.csv).unwrap();
        assert!(text.lines().skip(1).all(|l| l.ends_with(",0.0,0.0,0.0")), "{text}");
    }

    #[test]
    fn moments_report_ratios_below_one() {
        let r = moments(&Config { n_samples: 2000, ..small() }).unwrap();
        assert!(r.pass);
        assert_eq!(String::from_utf8(r.csv).unwrap().lines().count(), 1 + 8);
    }

    #[test]
    fn liouville_passes_on_small_truncations() {
        let r = liouville(&Config { n_cut: 2, m_ambient: 4, n_samples: 5, ..small() }).unwrap();
        assert!(r.pass, "{}", r.summary);
    }
}
