//! The truncated flow `Phi_N(t)`.
//!
//! Low modes `|k| <= N` are integrated in the gauged variable
//! `w = e^{-it d_xx} u` (so `w_k = e^{i k^2 t} u_k`) with classical RK4 applied to
//!
//! ```text
//! d/dt w = -i e^{-it d_xx} Pi_N(|e^{it d_xx} w|^4 e^{it d_xx} w),
//! ```
//!
//! which is Lawson's integrating-factor RK4: the stiff phases `k^2` are applied
//! exactly and only the twisted nonlinearity is approximated. High modes
//! `|k| > N` evolve by the free group, `u_k -> e^{-i k^2 t} u_k`.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::spectral::{
    conserved_c_truncated, mass, project_high, project_low, quintic_nonlinearity, sobolev_norm_sq_sigma, wiener_norm,
    FourierState, GridSpec, QuinticWorkspace,
};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Integrator settings for `Phi_N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    pub n_cut: usize,
    pub step: f64,
    pub grid: GridSpec,
}

impl FlowParams {
    pub const DEFAULT_STEP: f64 = 1e-3;

    pub fn new(n_cut: usize, step: f64) -> Result<Self> {
        Self::with_grid(n_cut, step, GridSpec::for_quintic(n_cut))
    }

    pub fn with_grid(n_cut: usize, step: f64, grid: GridSpec) -> Result<Self> {
        if !(step > 0.0 && step <= 0.1) {
            return Err(Error::InvalidArgument(format!("time step {step} must lie in (0, 0.1]")));
        }
        grid.check_quintic(n_cut)?;
        Ok(Self { n_cut, step, grid })
    }
}

/// Snapshots of one solution.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<FourierState>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Writes `snapshot_NNNN.json` files plus `manifest.json` into `dir`.
    pub fn write_dir(&self, dir: impl AsRef<Path>, params: &serde_json::Value, seed: Option<u64>) -> Result<()> {
        let dir = dir.as_ref();
        let io = |e: std::io::Error| Error::Format(e.to_string());
        fs::create_dir_all(dir).map_err(io)?;
        let mut files = Vec::with_capacity(self.len());
        for (i, s) in self.states.iter().enumerate() {
            let name = format!("snapshot_{i:04}.json");
            s.write_snapshot(dir.join(&name))?;
            files.push(name);
        }
        let manifest = serde_json::json!({
            "schema_version": 1,
            "times": self.times,
            "files": files,
            "params": params,
            "seed": seed,
        });
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest).expect("json")).map_err(io)
    }
}

/// Exact phase factors for one step size.
struct Phases {
    half_fwd: Vec<Complex64>,
    half_bwd: Vec<Complex64>,
    full_fwd: Vec<Complex64>,
    full_bwd: Vec<Complex64>,
}

impl Phases {
    fn new(n: usize, h: f64) -> Self {
        let n = n as i64;
        let table = |tau: f64| -> Vec<Complex64> {
            (-n..=n).map(|k| Complex64::from_polar(1.0, (k * k) as f64 * tau)).collect()
        };
        Self { half_fwd: table(0.5 * h), half_bwd: table(-0.5 * h), full_fwd: table(h), full_bwd: table(-h) }
    }
}

/// Scratch state for the low-mode integrator.
struct LowIntegrator {
    n: usize,
    ws: QuinticWorkspace,
    tmp: Vec<Complex64>,
    nl: Vec<Complex64>,
    k: [Vec<Complex64>; 4],
}

impl LowIntegrator {
    fn new(n: usize, grid: &GridSpec) -> Self {
        let z = || vec![ZERO; 2 * n + 1];
        Self { n, ws: QuinticWorkspace::new(grid), tmp: z(), nl: z(), k: [z(), z(), z(), z()] }
    }

    /// `out = -i E(tau) NL(E(-tau) y)`, with `fwd = E(tau)`, `bwd = E(-tau)`.
    fn field(&mut self, y: &[Complex64], fwd: Option<(&[Complex64], &[Complex64])>, out_idx: usize) {
        match fwd {
            None => self.ws.apply(y, self.n, &mut self.nl),
            Some((_, bwd)) => {
                for ((t, a), b) in self.tmp.iter_mut().zip(y).zip(bwd) {
                    *t = a * b;
                }
                self.ws.apply(&self.tmp, self.n, &mut self.nl);
            }
        }
        let out = &mut self.k[out_idx];
        match fwd {
            None => {
                for (o, z) in out.iter_mut().zip(&self.nl) {
                    *o = -I * z;
                }
            }
            Some((f, _)) => {
                for ((o, z), e) in out.iter_mut().zip(&self.nl).zip(f) {
                    *o = -I * z * e;
                }
            }
        }
    }

    fn step(&mut self, y: &mut [Complex64], h: f64, ph: &Phases) {
        let len = y.len();
        let mut stage = vec![ZERO; len];
        self.field(y, None, 0);
        for i in 0..len {
            stage[i] = y[i] + self.k[0][i] * (0.5 * h);
        }
        self.field(&stage, Some((&ph.half_fwd, &ph.half_bwd)), 1);
        for i in 0..len {
            stage[i] = y[i] + self.k[1][i] * (0.5 * h);
        }
        self.field(&stage, Some((&ph.half_fwd, &ph.half_bwd)), 2);
        for i in 0..len {
            stage[i] = y[i] + self.k[2][i] * h;
        }
        self.field(&stage, Some((&ph.full_fwd, &ph.full_bwd)), 3);
        for i in 0..len {
            let w = y[i] + (self.k[0][i] + (self.k[1][i] + self.k[2][i]) * 2.0 + self.k[3][i]) * (h / 6.0);
            y[i] = w * ph.full_bwd[i];
        }
    }
}

/// `(number of full steps, signed step, signed remainder)` covering `t`.
fn schedule(t: f64, h: f64) -> (usize, f64, f64) {
    let ratio = t.abs() / h;
    let mut n_full = ratio.floor() as usize;
    if ratio - n_full as f64 > 1.0 - 1e-9 {
        n_full += 1;
    }
    let rem = t.abs() - n_full as f64 * h;
    let rem = if rem.abs() <= 1e-12 * t.abs().max(1.0) { 0.0 } else { rem };
    (n_full, h.copysign(t), rem.copysign(t))
}

fn check_finite(u: &FourierState) -> Result<()> {
    if u.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteState { context: Some("evolve".into()) })
    }
}

/// Integrates the low block `y` (length `2n+1`) over time `t` in place.
fn integrate_low(y: &mut [Complex64], n: usize, t: f64, p: &FlowParams) {
    let (n_full, h, rem) = schedule(t, p.step);
    let mut integ = LowIntegrator::new(n, &p.grid);
    if n_full > 0 {
        let ph = Phases::new(n, h);
        for _ in 0..n_full {
            integ.step(y, h, &ph);
        }
    }
    if rem != 0.0 {
        integ.step(y, rem, &Phases::new(n, rem));
    }
}

/// `Phi_N(t) u0`.
pub fn evolve(u0: &FourierState, t: f64, p: &FlowParams) -> Result<FourierState> {
    let n = p.n_cut.min(u0.m_ambient());
    p.grid.check_quintic(n)?;
    if t == 0.0 {
        return Ok(u0.clone());
    }
    let mut out = project_high(u0, n).linear_evolve(t);
    let mut low = u0.low(n).to_vec();
    integrate_low(&mut low, n, t, p);
    out.low_mut(n).copy_from_slice(&low);
    check_finite(&out)?;
    Ok(out)
}

/// Equispaced snapshots of `Phi_N(t) u0` on `[0, t_final]` (endpoints included).
pub fn evolve_trajectory(u0: &FourierState, t_final: f64, p: &FlowParams, n_snapshots: usize) -> Result<Trajectory> {
    if n_snapshots < 2 {
        return Err(Error::InvalidArgument("a trajectory needs at least 2 snapshots".into()));
    }
    let dt = t_final / (n_snapshots - 1) as f64;
    let mut times = Vec::with_capacity(n_snapshots);
    let mut states = Vec::with_capacity(n_snapshots);
    times.push(0.0);
    states.push(u0.clone());
    for i in 1..n_snapshots {
        let next = evolve(states.last().unwrap(), dt, p)?;
        times.push(t_final * i as f64 / (n_snapshots - 1) as f64);
        states.push(next);
    }
    Ok(Trajectory { times, states })
}

/// Classical RK4 applied to `u` itself, `u_k' = -i k^2 u_k - i NL(u)_k`, without the
/// integrating factor. Independent of [`evolve`]'s gauge; needs a small step for the
/// linear phases.
pub fn evolve_ungauged(u0: &FourierState, t: f64, p: &FlowParams) -> Result<FourierState> {
    let n = p.n_cut.min(u0.m_ambient());
    p.grid.check_quintic(n)?;
    let sq: Vec<f64> = (-(n as i64)..=n as i64).map(|k| (k * k) as f64).collect();
    let mut ws = QuinticWorkspace::new(&p.grid);
    let mut nl = vec![ZERO; 2 * n + 1];
    let mut rhs = |y: &[Complex64], out: &mut Vec<Complex64>| {
        ws.apply(y, n, &mut nl);
        out.clear();
        out.extend(y.iter().zip(&nl).zip(&sq).map(|((a, b), k2)| -I * (a * k2 + b)));
    };
    let mut y = u0.low(n).to_vec();
    let (n_full, h, rem) = schedule(t, p.step);
    let steps = std::iter::repeat_n(h, n_full).chain((rem != 0.0).then_some(rem));
    let (mut k1, mut k2, mut k3, mut k4) = (vec![], vec![], vec![], vec![]);
    for h in steps {
        rhs(&y, &mut k1);
        let s: Vec<_> = y.iter().zip(&k1).map(|(a, b)| a + b * (0.5 * h)).collect();
        rhs(&s, &mut k2);
        let s: Vec<_> = y.iter().zip(&k2).map(|(a, b)| a + b * (0.5 * h)).collect();
        rhs(&s, &mut k3);
        let s: Vec<_> = y.iter().zip(&k3).map(|(a, b)| a + b * h).collect();
        rhs(&s, &mut k4);
        for i in 0..y.len() {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
    let mut out = project_high(u0, n).linear_evolve(t);
    out.low_mut(n).copy_from_slice(&y);
    check_finite(&out)?;
    Ok(out)
}

/// Lipschitz constant of `u -> |u|^4 u` on a Wiener-algebra ball of radius `R`, per `R^4`.
const QUINTIC_LIPSCHITZ: f64 = 5.0;

/// Result of a Picard iteration.
#[derive(Clone, Debug)]
pub struct PicardResult {
    pub state: FourierState,
    /// Sup over nodes of the Wiener-norm distance between successive iterates.
    pub increments: Vec<f64>,
    /// `1 / (3 C R^4)`, `R = 1 + 2 ||u0||_A`.
    pub local_time: f64,
}

/// Local existence time for data `u0`: `1 / (3 * 5 * R^4)` with `R = 1 + 2 ||u0||_A`.
pub fn picard_local_time(u0: &FourierState) -> f64 {
    let r = 1.0 + 2.0 * wiener_norm(u0);
    1.0 / (3.0 * QUINTIC_LIPSCHITZ * r.powi(4))
}

/// Cumulative integrals `int_0^{tau_j} f` on equispaced nodes, Simpson-based.
fn cumulative_simpson(f: &[Vec<Complex64>], dt: f64) -> Vec<Vec<Complex64>> {
    let len = f[0].len();
    let lin = |terms: &[(usize, f64)], scale: f64| -> Vec<Complex64> {
        (0..len).map(|i| terms.iter().map(|&(j, w)| f[j][i] * w).sum::<Complex64>() * scale).collect()
    };
    let mut out = vec![vec![ZERO; len]; f.len()];
    for j in 1..f.len() {
        out[j] = if j % 2 == 0 {
            let seg = lin(&[(j - 2, 1.0), (j - 1, 4.0), (j, 1.0)], dt / 3.0);
            out[j - 2].iter().zip(&seg).map(|(a, b)| a + b).collect()
        } else if j == 1 {
            lin(&[(0, 5.0), (1, 8.0), (2, -1.0)], dt / 12.0)
        } else {
            let seg = lin(&[(j - 3, 1.0), (j - 2, 3.0), (j - 1, 3.0), (j, 1.0)], 3.0 * dt / 8.0);
            out[j - 3].iter().zip(&seg).map(|(a, b)| a + b).collect()
        };
    }
    out
}

/// Picard iterates of the Duhamel map
/// `u(t) = e^{it d_xx} u0 - i int_0^t e^{i(t - tau) d_xx} Pi_N(|Pi_N u|^4 Pi_N u)(tau) d tau`
/// on 33 equispaced nodes.
pub fn picard_solve(u0: &FourierState, t_small: f64, p: &FlowParams, n_iter: usize) -> Result<PicardResult> {
    const NODES: usize = 33;
    if n_iter == 0 {
        return Err(Error::InvalidArgument("n_iter must be >= 1".into()));
    }
    let local_time = picard_local_time(u0);
    if t_small.abs() > local_time {
        return Err(Error::ContractionRadiusExceeded { t: t_small, t_max: local_time });
    }
    let dt = t_small / (NODES - 1) as f64;
    let taus: Vec<f64> = (0..NODES).map(|j| j as f64 * dt).collect();
    let free: Vec<FourierState> = taus.iter().map(|&tau| u0.linear_evolve(tau)).collect();
    let mut iterate = free.clone();
    let mut increments = Vec::with_capacity(n_iter);
    for _ in 0..n_iter {
        // integrand pulled back to time 0: e^{-i tau d_xx} NL(u(tau))
        let pulled: Vec<Vec<Complex64>> = iterate
            .iter()
            .zip(&taus)
            .map(|(u, &tau)| Ok(quintic_nonlinearity(u, p.n_cut, &p.grid)?.linear_evolve(-tau).coeffs().to_vec()))
            .collect::<Result<_>>()?;
        let cum = cumulative_simpson(&pulled, dt);
        let next: Vec<FourierState> = cum
            .iter()
            .zip(&taus)
            .map(|(c, &tau)| {
                let coeffs = u0.coeffs().iter().zip(c).map(|(a, b)| a - I * b).collect();
                FourierState::from_raw(u0.m_ambient(), coeffs).linear_evolve(tau)
            })
            .collect();
        let inc = next
            .iter()
            .zip(&iterate)
            .map(|(a, b)| a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).norm()).sum::<f64>())
            .fold(0.0, f64::max);
        increments.push(inc);
        iterate = next;
    }
    let state = iterate.pop().expect("nodes");
    check_finite(&state)?;
    Ok(PicardResult { state, increments, local_time })
}

/// The FNLS vector field on `E_N` in real coordinates `(Re u_k, Im u_k)`.
fn real_field(u: &[Complex64], n: usize, ws: &mut QuinticWorkspace, nl: &mut [Complex64]) -> Vec<f64> {
    ws.apply(u, n, nl);
    let mut out = Vec::with_capacity(2 * u.len());
    for (i, (a, b)) in u.iter().zip(nl.iter()).enumerate() {
        let k = i as i64 - n as i64;
        let f = -I * (a * (k * k) as f64 + b);
        out.push(f.re);
        out.push(f.im);
    }
    out
}

/// Trace of the Jacobian of the FNLS vector field at `Pi_N u` by central differences
/// over all `2(2N+1)` real directions.
pub fn divergence_at(u: &FourierState, p: &FlowParams) -> Result<f64> {
    let n = p.n_cut.min(u.m_ambient());
    p.grid.check_quintic(n)?;
    let base = u.low(n).to_vec();
    let norm = base.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let h = 1e-5 * (1.0 + norm);
    let mut ws = QuinticWorkspace::new(&p.grid);
    let mut nl = vec![ZERO; base.len()];
    let mut trace = 0.0;
    for j in 0..2 * base.len() {
        let dir = if j % 2 == 0 { Complex64::new(h, 0.0) } else { Complex64::new(0.0, h) };
        let mut plus = base.clone();
        plus[j / 2] += dir;
        let mut minus = base.clone();
        minus[j / 2] -= dir;
        let fp = real_field(&plus, n, &mut ws, &mut nl);
        let fm = real_field(&minus, n, &mut ws, &mut nl);
        trace += (fp[j] - fm[j]) / (2.0 * h);
    }
    Ok(trace)
}

/// Linearized quintic term: `delta -> Pi_N(3 |u|^4 delta + 2 |u|^2 u^2 conj(delta))`.
struct Linearization {
    n: usize,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    buf: Vec<Complex64>,
}

impl Linearization {
    fn new(n: usize, grid: &GridSpec) -> Self {
        let g = grid.n_points;
        Self { n, a: vec![ZERO; g], b: vec![ZERO; g], buf: vec![ZERO; g] }
    }

    fn set_point(&mut self, u: &[Complex64]) {
        fft::synthesize(u, self.n, &mut self.buf);
        for ((z, a), b) in self.buf.iter().zip(self.a.iter_mut()).zip(self.b.iter_mut()) {
            let r = z.norm_sqr();
            *a = Complex64::new(3.0 * r * r, 0.0);
            *b = z * z * (2.0 * r);
        }
    }

    fn apply(&mut self, delta: &[Complex64], out: &mut [Complex64]) {
        fft::synthesize(delta, self.n, &mut self.buf);
        for ((z, a), b) in self.buf.iter_mut().zip(&self.a).zip(&self.b) {
            *z = a * *z + b * z.conj();
        }
        fft::analyze(&mut self.buf, self.n, out);
    }
}

/// `det D Phi~_N(t)` at `Pi_N u0`, from RK4 integration of the variational equations in
/// the gauged variable alongside the state.
pub fn jacobian_det(u0: &FourierState, t: f64, p: &FlowParams) -> Result<f64> {
    let n = p.n_cut.min(u0.m_ambient());
    p.grid.check_quintic(n)?;
    let len = 2 * n + 1;
    let dim = 2 * len;
    let mut y = u0.low(n).to_vec();
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|j| {
            let mut c = vec![ZERO; len];
            c[j / 2] = if j % 2 == 0 { Complex64::new(1.0, 0.0) } else { I };
            c
        })
        .collect();

    let mut ws = QuinticWorkspace::new(&p.grid);
    let mut lin = Linearization::new(n, &p.grid);
    let mut nl = vec![ZERO; len];
    let mut tmp = vec![ZERO; len];

    // f(tau, y) and Df(tau, y) J given the phase pair (E(tau), E(-tau)).
    let mut eval = |y: &[Complex64], js: &[Vec<Complex64>], ph: (&[Complex64], &[Complex64])| {
        let (fwd, bwd) = ph;
        let pulled: Vec<Complex64> = y.iter().zip(bwd).map(|(a, b)| a * b).collect();
        ws.apply(&pulled, n, &mut nl);
        let fy: Vec<Complex64> = nl.iter().zip(fwd).map(|(z, e)| -I * z * e).collect();
        lin.set_point(&pulled);
        let dj: Vec<Vec<Complex64>> = js
            .iter()
            .map(|c| {
                let pc: Vec<Complex64> = c.iter().zip(bwd).map(|(a, b)| a * b).collect();
                lin.apply(&pc, &mut tmp);
                tmp.iter().zip(fwd).map(|(z, e)| -I * z * e).collect()
            })
            .collect();
        (fy, dj)
    };
    let axpy = |x: &[Complex64], k: &[Complex64], h: f64| -> Vec<Complex64> {
        x.iter().zip(k).map(|(a, b)| a + b * h).collect()
    };

    let (n_full, h, rem) = schedule(t, p.step);
    let steps: Vec<f64> = std::iter::repeat_n(h, n_full).chain((rem != 0.0).then_some(rem)).collect();
    let ones = vec![Complex64::new(1.0, 0.0); len];
    let mut cached: Option<(f64, Phases)> = None;
    for h in steps {
        if cached.as_ref().map(|c| c.0) != Some(h) {
            cached = Some((h, Phases::new(n, h)));
        }
        let ph = &cached.as_ref().unwrap().1;
        let (k1, d1) = eval(&y, &cols, (&ones, &ones));
        let y2 = axpy(&y, &k1, 0.5 * h);
        let j2: Vec<_> = cols.iter().zip(&d1).map(|(c, d)| axpy(c, d, 0.5 * h)).collect();
        let (k2, d2) = eval(&y2, &j2, (&ph.half_fwd, &ph.half_bwd));
        let y3 = axpy(&y, &k2, 0.5 * h);
        let j3: Vec<_> = cols.iter().zip(&d2).map(|(c, d)| axpy(c, d, 0.5 * h)).collect();
        let (k3, d3) = eval(&y3, &j3, (&ph.half_fwd, &ph.half_bwd));
        let y4 = axpy(&y, &k3, h);
        let j4: Vec<_> = cols.iter().zip(&d3).map(|(c, d)| axpy(c, d, h)).collect();
        let (k4, d4) = eval(&y4, &j4, (&ph.full_fwd, &ph.full_bwd));
        let combine = |x: &[Complex64], a: &[Complex64], b: &[Complex64], c: &[Complex64], d: &[Complex64]| {
            (0..len)
                .map(|i| (x[i] + (a[i] + (b[i] + c[i]) * 2.0 + d[i]) * (h / 6.0)) * ph.full_bwd[i])
                .collect::<Vec<_>>()
        };
        y = combine(&y, &k1, &k2, &k3, &k4);
        cols = (0..dim).map(|j| combine(&cols[j], &d1[j], &d2[j], &d3[j], &d4[j])).collect();
        if y.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFiniteState { context: Some("jacobian_det".into()) });
        }
    }
    let m = DMatrix::from_fn(dim, dim, |r, c| {
        let z = cols[c][r / 2];
        if r % 2 == 0 {
            z.re
        } else {
            z.im
        }
    });
    let det = m.determinant();
    if !det.is_finite() {
        return Err(Error::NonFiniteState { context: Some("jacobian_det".into()) });
    }
    Ok(det)
}

/// Pinned constant in the growth bound `C_0 <= C_sigma (1 + ||u0||_{H^1})^12`.
pub const GROWTH_C_SIGMA: f64 = 1.0;

/// Summary of a growth-monitor pass over a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub c0: f64,
    /// `max_t ||u(t)||_{H^sigma} / (||u0||_{H^sigma} e^{C_0 |t|})`; must stay `<= 1`.
    pub max_bound_ratio: f64,
    pub mass_rel_drift: f64,
    pub c_rel_drift: f64,
}

/// Checks the exponential `H^sigma` growth bound and the drift of the mass and of the
/// conserved energy `C_N` along a trajectory.
pub fn growth_monitor(traj: &Trajectory, sigma: f64, p: &FlowParams, drift_tol: f64) -> Result<GrowthReport> {
    let u0 = traj.states.first().ok_or_else(|| Error::InvalidArgument("empty trajectory".into()))?;
    let h1 = sobolev_norm_sq_sigma(u0, 1.0).sqrt();
    let c0 = GROWTH_C_SIGMA * (1.0 + h1).powi(12);
    let n0 = sobolev_norm_sq_sigma(u0, sigma).sqrt();
    let m0 = mass(u0);
    let e0 = conserved_c_truncated(u0, p.n_cut, &p.grid)?;
    let mut report = GrowthReport { c0, max_bound_ratio: 0.0, mass_rel_drift: 0.0, c_rel_drift: 0.0 };
    for (t, u) in traj.times.iter().zip(&traj.states) {
        let nt = sobolev_norm_sq_sigma(u, sigma).sqrt();
        let ratio = if n0 == 0.0 { if nt == 0.0 { 0.0 } else { f64::INFINITY } } else { nt / (n0 * (c0 * t.abs()).exp()) };
        report.max_bound_ratio = report.max_bound_ratio.max(ratio);
        let rel = |a: f64, b: f64| if b == 0.0 { a.abs() } else { ((a - b) / b).abs() };
        report.mass_rel_drift = report.mass_rel_drift.max(rel(mass(u), m0));
        let e = conserved_c_truncated(u, p.n_cut, &p.grid)?;
        report.c_rel_drift = report.c_rel_drift.max(rel(e, e0));
    }
    if report.max_bound_ratio > 1.0 {
        return Err(Error::BoundViolated(format!("H^{sigma} growth ratio {}", report.max_bound_ratio)));
    }
    if report.mass_rel_drift > drift_tol || report.c_rel_drift > drift_tol {
        return Err(Error::BoundViolated(format!(
            "drift mass {:.3e}, C {:.3e} > {drift_tol:.1e}",
            report.mass_rel_drift, report.c_rel_drift
        )));
    }
    Ok(report)
}

/// `max_k |Phi_N(t) u0 - (Phi~_N(t) Pi_N u0 + e^{it d_xx} Pi_N^perp u0)|`.
pub fn check_factorization(u0: &FourierState, t: f64, p: &FlowParams) -> Result<f64> {
    let full = evolve(u0, t, p)?;
    let low = evolve(&project_low(u0, p.n_cut), t, p)?;
    let high = project_high(u0, p.n_cut).linear_evolve(t);
    let recombined = FourierState::from_raw(
        u0.m_ambient(),
        low.coeffs().iter().zip(high.coeffs()).map(|(a, b)| a + b).collect(),
    );
    Ok(full.max_abs_diff(&recombined))
}
