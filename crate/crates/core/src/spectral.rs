//! Torus functions as finite Fourier series.
//!
//! The torus is `[0, 2*pi)` with Lebesgue measure `dx` and a state stores the
//! coefficients `u_k` of `u(x) = sum_k u_k e^{ikx}` for `|k| <= M`.
//! Integrals such as the mass and the Hamiltonian are computed with that
//! (unnormalized) measure; quadratic forms such as the Sobolev norms act on
//! the coefficient sequence directly.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;

/// Complex Fourier coefficients `u_k`, `k = -M..=M`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierState {
    m_ambient: usize,
    coeffs: Vec<Complex64>,
}

impl FourierState {
    pub fn zeros(m_ambient: usize) -> Self {
        Self {
            m_ambient,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * m_ambient + 1],
        }
    }

    pub fn from_coeffs(m_ambient: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * m_ambient + 1 {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients for M = {m_ambient}, got {}",
                2 * m_ambient + 1,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteState { context: Some("from_coeffs".into()) });
        }
        Ok(Self { m_ambient, coeffs })
    }

    /// Builds a state from a coefficient function of `k`.
    pub fn from_fn(m_ambient: usize, f: impl FnMut(i64) -> Complex64) -> Result<Self> {
        let m = m_ambient as i64;
        Self::from_coeffs(m_ambient, (-m..=m).map(f).collect())
    }

    /// `c e^{ikx}` embedded in ambient truncation `M`.
    pub fn plane_wave(m_ambient: usize, k: i64, c: Complex64) -> Self {
        assert!(k.unsigned_abs() as usize <= m_ambient, "mode {k} outside |k| <= {m_ambient}");
        let mut s = Self::zeros(m_ambient);
        s.coeffs[(k + m_ambient as i64) as usize] = c;
        s
    }

    pub(crate) fn from_raw(m_ambient: usize, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), 2 * m_ambient + 1);
        Self { m_ambient, coeffs }
    }

    pub fn m_ambient(&self) -> usize {
        self.m_ambient
    }

    /// Coefficients ordered `k = -M..=M`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `u_k`, zero outside the stored range.
    pub fn coeff(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.m_ambient {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + self.m_ambient as i64) as usize]
        }
    }

    /// `(k, u_k)` pairs in increasing `k`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let m = self.m_ambient as i64;
        self.coeffs.iter().enumerate().map(move |(i, c)| (i as i64 - m, *c))
    }

    /// Coefficients `|k| <= n` as a slice (requires `n <= M`).
    pub(crate) fn low(&self, n: usize) -> &[Complex64] {
        let m = self.m_ambient;
        &self.coeffs[m - n..=m + n]
    }

    pub(crate) fn low_mut(&mut self, n: usize) -> &mut [Complex64] {
        let m = self.m_ambient;
        &mut self.coeffs[m - n..=m + n]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Re-embeds the state at ambient truncation `m_new`, zero-padding or truncating.
    pub fn with_ambient(&self, m_new: usize) -> Self {
        Self::from_fn(m_new, |k| self.coeff(k)).expect("finite coefficients stay finite")
    }

    /// `u_k -> e^{i theta} u_k`.
    pub fn rotate_phase(&self, theta: f64) -> Self {
        let r = Complex64::from_polar(1.0, theta);
        Self::from_raw(self.m_ambient, self.coeffs.iter().map(|c| c * r).collect())
    }

    /// `u(x) -> u(x + alpha)`, i.e. `u_k -> e^{ik alpha} u_k`.
    pub fn translate(&self, alpha: f64) -> Self {
        Self::from_raw(
            self.m_ambient,
            self.iter().map(|(k, c)| c * Complex64::from_polar(1.0, k as f64 * alpha)).collect(),
        )
    }

    /// The free Schrödinger group `e^{it d_xx}`: `u_k -> e^{-ik^2 t} u_k`.
    pub fn linear_evolve(&self, t: f64) -> Self {
        Self::from_raw(
            self.m_ambient,
            self.iter().map(|(k, c)| c * Complex64::from_polar(1.0, -((k * k) as f64) * t)).collect(),
        )
    }

    /// Largest coefficient-wise modulus of `self - other` over the union of supports.
    pub fn max_abs_diff(&self, other: &FourierState) -> f64 {
        let m = self.m_ambient.max(other.m_ambient) as i64;
        (-m..=m).map(|k| (self.coeff(k) - other.coeff(k)).norm()).fold(0.0, f64::max)
    }

    /// `sum_k <k>^{2 sigma} |u_k - v_k|^2`, square-rooted.
    pub fn sobolev_distance(&self, other: &FourierState, sigma: f64) -> f64 {
        let m = self.m_ambient.max(other.m_ambient) as i64;
        (-m..=m)
            .map(|k| japanese(k, sigma) * (self.coeff(k) - other.coeff(k)).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&Snapshot::from(self)).expect("snapshot serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let snap: Snapshot = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        snap.try_into()
    }

    pub fn write_snapshot(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn read_snapshot(path: impl AsRef<Path>) -> Result<Self> {
        let s = fs::read_to_string(path).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_json(&s)
    }
}

/// On-disk snapshot: `{"m_ambient": M, "coeffs": [[re, im], ...]}`, `k = -M..=M`.
#[derive(Serialize, Deserialize)]
pub struct Snapshot {
    pub m_ambient: usize,
    pub coeffs: Vec<[f64; 2]>,
}

impl From<&FourierState> for Snapshot {
    fn from(u: &FourierState) -> Self {
        Self { m_ambient: u.m_ambient, coeffs: u.coeffs.iter().map(|c| [c.re, c.im]).collect() }
    }
}

impl TryFrom<Snapshot> for FourierState {
    type Error = Error;

    fn try_from(s: Snapshot) -> Result<Self> {
        FourierState::from_coeffs(
            s.m_ambient,
            s.coeffs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
        )
    }
}

/// `<k>^{2 sigma} = (1 + k^2)^sigma`.
#[inline]
pub fn japanese(k: i64, sigma: f64) -> f64 {
    (1.0 + (k * k) as f64).powf(sigma)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeightKind {
    /// `m(k) = (1 + k^2)^s`
    JapaneseBracket,
    /// `m(k) = 1 + |k|^{2s}`
    EquivalentNorm,
}

/// The Fourier multiplier shared by the Gaussian covariance and the `H^s` quadratic form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightFamily {
    pub kind: WeightKind,
    pub s: f64,
}

impl WeightFamily {
    pub fn new(kind: WeightKind, s: f64) -> Result<Self> {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::InvalidArgument(format!("weight exponent s = {s} must be finite and >= 0")));
        }
        Ok(Self { kind, s })
    }

    pub fn japanese(s: f64) -> Self {
        Self::new(WeightKind::JapaneseBracket, s).expect("valid exponent")
    }

    pub fn equivalent(s: f64) -> Self {
        Self::new(WeightKind::EquivalentNorm, s).expect("valid exponent")
    }

    #[inline]
    pub fn multiplier(&self, k: i64) -> f64 {
        match self.kind {
            WeightKind::JapaneseBracket => japanese(k, self.s),
            WeightKind::EquivalentNorm => 1.0 + (k.unsigned_abs() as f64).powf(2.0 * self.s),
        }
    }

    /// `m(k)` for `k = -n..=n`.
    pub fn table(&self, n: usize) -> Vec<f64> {
        let n = n as i64;
        (-n..=n).map(|k| self.multiplier(k)).collect()
    }
}

/// Number of collocation points used for FFT products.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_points: usize,
}

impl GridSpec {
    pub fn new(n_points: usize) -> Self {
        Self { n_points }
    }

    /// Default grid for quintic products of `Pi_N` states: next power of two `>= 8N`.
    pub fn for_quintic(n_cut: usize) -> Self {
        Self { n_points: (8 * n_cut).max(4).next_power_of_two() }
    }

    /// Smallest admissible size for an exact sextic/quintic product at bandwidth `n`.
    pub fn min_quintic(n: usize) -> usize {
        6 * n + 2
    }

    pub fn check_quintic(&self, n: usize) -> Result<()> {
        let need = Self::min_quintic(n);
        if self.n_points < need {
            Err(Error::GridTooSmall { got: self.n_points, need })
        } else {
            Ok(())
        }
    }
}

/// Dirichlet projector `Pi_N`: zero every coefficient with `|k| > n_cut`.
pub fn project_low(u: &FourierState, n_cut: usize) -> FourierState {
    let n = n_cut as i64;
    FourierState::from_raw(
        u.m_ambient,
        u.iter().map(|(k, c)| if k.abs() <= n { c } else { Complex64::new(0.0, 0.0) }).collect(),
    )
}

/// `Pi_N^perp = Id - Pi_N`.
pub fn project_high(u: &FourierState, n_cut: usize) -> FourierState {
    let n = n_cut as i64;
    FourierState::from_raw(
        u.m_ambient,
        u.iter().map(|(k, c)| if k.abs() > n { c } else { Complex64::new(0.0, 0.0) }).collect(),
    )
}

/// `sum_k m(k) |u_k|^2` for the family's multiplier.
pub fn sobolev_norm_sq(u: &FourierState, family: &WeightFamily) -> f64 {
    u.iter().map(|(k, c)| family.multiplier(k) * c.norm_sqr()).sum()
}

/// `sum_k <k>^{2 sigma} |u_k|^2`.
pub fn sobolev_norm_sq_sigma(u: &FourierState, sigma: f64) -> f64 {
    u.iter().map(|(k, c)| japanese(k, sigma) * c.norm_sqr()).sum()
}

/// `||u||_{L^2}^2 = 2 pi sum_k |u_k|^2`.
pub fn mass(u: &FourierState) -> f64 {
    2.0 * PI * u.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
}

/// `sum_k |u_k|`, the Wiener algebra norm.
pub fn wiener_norm(u: &FourierState) -> f64 {
    u.coeffs.iter().map(|c| c.norm()).sum()
}

fn kinetic(u: &FourierState) -> f64 {
    // 1/2 int |d_x u|^2
    PI * u.iter().map(|(k, c)| (k * k) as f64 * c.norm_sqr()).sum::<f64>()
}

/// `int |u|^6 dx` over the modes `|k| <= n`, exact when `G >= 6n + 2`.
fn sextic_integral(u: &FourierState, n: usize, grid: &GridSpec) -> Result<f64> {
    grid.check_quintic(n)?;
    let mut buf = vec![Complex64::new(0.0, 0.0); grid.n_points];
    fft::synthesize(u.low(n), n, &mut buf);
    let mean = buf.iter().map(|z| z.norm_sqr().powi(3)).sum::<f64>() / grid.n_points as f64;
    Ok(2.0 * PI * mean)
}

/// `H(u) = 1/2 int |d_x u|^2 + 1/6 int |u|^6`.
pub fn hamiltonian(u: &FourierState, grid: &GridSpec) -> Result<f64> {
    Ok(kinetic(u) + sextic_integral(u, u.m_ambient, grid)? / 6.0)
}

/// `C(u) = 1/2 ||u||_{L^2}^2 + H(u)`.
pub fn conserved_c(u: &FourierState, grid: &GridSpec) -> Result<f64> {
    Ok(0.5 * mass(u) + hamiltonian(u, grid)?)
}

/// The functional conserved by the truncated flow `Phi_N`:
/// `1/2 ||u||^2 + 1/2 int |d_x u|^2 + 1/6 int |Pi_N u|^6`.
///
/// Equals [`conserved_c`] when `n_cut >= M`.
pub fn conserved_c_truncated(u: &FourierState, n_cut: usize, grid: &GridSpec) -> Result<f64> {
    let n = n_cut.min(u.m_ambient);
    Ok(0.5 * mass(u) + kinetic(u) + sextic_integral(u, n, grid)? / 6.0)
}

/// Scratch space for repeated quintic products on a fixed grid.
pub(crate) struct QuinticWorkspace {
    buf: Vec<Complex64>,
}

impl QuinticWorkspace {
    pub(crate) fn new(grid: &GridSpec) -> Self {
        Self { buf: vec![Complex64::new(0.0, 0.0); grid.n_points] }
    }

    /// `Pi_n(|w|^4 w)` for `w` given by its `2n+1` low coefficients.
    pub(crate) fn apply(&mut self, w: &[Complex64], n: usize, out: &mut [Complex64]) {
        fft::synthesize(w, n, &mut self.buf);
        for z in self.buf.iter_mut() {
            let a = z.norm_sqr();
            *z *= a * a;
        }
        fft::analyze(&mut self.buf, n, out);
    }
}

/// `Pi_N(|Pi_N u|^4 Pi_N u)`, computed on the collocation grid.
pub fn quintic_nonlinearity(u: &FourierState, n_cut: usize, grid: &GridSpec) -> Result<FourierState> {
    let n = n_cut.min(u.m_ambient);
    grid.check_quintic(n)?;
    let mut out = FourierState::zeros(u.m_ambient);
    QuinticWorkspace::new(grid).apply(u.low(n), n, out.low_mut(n));
    Ok(out)
}
