//! Normal-form energies: the correction `R_{s,N}`, the modified energy `E_{s,N}`
//! and its time derivative `Q_{s,N}`.
//!
//! All three are sums over constrained 6-tuples `k_1 - k_2 + ... - k_6 = 0`
//! with `|k_j| <= N` of
//!
//! ```text
//! R   = 1/6 Re sum_{Omega != 0} (psi/Omega) w_1 w2* w_3 w4* w_5 w6*
//! q0  = sum_{Omega == 0} psi   w_1 w2* w_3 w4* w_5 w6*
//! q1  = sum_{Omega != 0} (psi/Omega) v_1 w2* w_3 w4* w_5 w6*
//! q2  = sum_{Omega != 0} (psi/Omega) w_1 v2* w_3 w4* w_5 w6*
//! Q   = Im(-q0/6 + q1/2 - q2/2)
//! ```
//!
//! where `w = Pi_N u` and `v = Pi_N(|w|^4 w)`. Two evaluation routes exist:
//! [`SumMethod::Enumerate`] walks the `(2N+1)^5` tuples, and
//! [`SumMethod::SpaceTime`] reads the sums off the `Omega`-spectrum of
//! products of free Schrödinger evolutions, which costs `O(N^3 log N)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::spectral::{project_low, quintic_nonlinearity, sobolev_norm_sq, FourierState, GridSpec, WeightFamily};
use crate::stats::pairwise_sum_complex;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SumMethod {
    #[default]
    Enumerate,
    SpaceTime,
}

/// Truncation and weight for the normal-form quantities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    /// `None` stands for the ambient truncation of the state (the finite proxy for `N = inf`).
    pub n_cut: Option<usize>,
    pub family: WeightFamily,
    pub method: SumMethod,
}

impl EnergyParams {
    pub fn new(n_cut: usize, family: WeightFamily) -> Self {
        Self { n_cut: Some(n_cut), family, method: SumMethod::Enumerate }
    }

    pub fn ambient(family: WeightFamily) -> Self {
        Self { n_cut: None, family, method: SumMethod::Enumerate }
    }

    pub fn with_method(mut self, method: SumMethod) -> Self {
        self.method = method;
        self
    }

    /// The effective `N` for a given state.
    pub fn resolve(&self, u: &FourierState) -> Result<usize> {
        match self.n_cut {
            None => Ok(u.m_ambient()),
            Some(n) if n <= u.m_ambient() => Ok(n),
            Some(n) => Err(Error::TruncationExceedsAmbient { n_cut: n, m_ambient: u.m_ambient() }),
        }
    }
}

/// The three complex multilinear sums entering `Q_{s,N}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QComponents {
    pub q0: Complex64,
    pub q1: Complex64,
    pub q2: Complex64,
}

impl QComponents {
    /// `Im(-q0/6 + q1/2 - q2/2)`.
    pub fn combine(&self) -> f64 {
        (-self.q0 / 6.0 + self.q1 * 0.5 - self.q2 * 0.5).im
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Sums {
    /// `sum_{Omega != 0} (psi/Omega) W`
    r: Complex64,
    q0: Complex64,
    q1: Complex64,
    q2: Complex64,
}

fn tree_sum(parts: &[Sums]) -> Sums {
    let pick = |f: fn(&Sums) -> Complex64| pairwise_sum_complex(&parts.iter().map(f).collect::<Vec<_>>());
    Sums { r: pick(|s| s.r), q0: pick(|s| s.q0), q1: pick(|s| s.q1), q2: pick(|s| s.q2) }
}

/// Tuple walk with `k_6` frozen by the constraint; one `k_1` slice per task,
/// slices reduced by a pairwise tree.
fn enumerate_sums<const WITH_Q: bool>(w: &[Complex64], v: &[Complex64], m: &[f64]) -> Sums {
    let len = w.len();
    let n = (len - 1) / 2;
    let sq: Vec<i64> = (0..len).map(|i| (i as i64 - n as i64).pow(2)).collect();
    let wc: Vec<Complex64> = w.iter().map(|z| z.conj()).collect();
    let vc: Vec<Complex64> = v.iter().map(|z| z.conj()).collect();
    let top = 2 * n as i64;
    let parts: Vec<Sums> = (0..len)
        .into_par_iter()
        .map(|i1| {
            let mut acc = Sums::default();
            for i2 in 0..len {
                let p2 = w[i1] * wc[i2];
                let (a2, b2) = if WITH_Q { (v[i1] * wc[i2], w[i1] * vc[i2]) } else { (ZERO, ZERO) };
                for i3 in 0..len {
                    for i4 in 0..len {
                        let d4 = i1 as i64 - i2 as i64 + i3 as i64 - i4 as i64;
                        let lo = (-d4).max(0);
                        let hi = (top - d4).min(top);
                        if lo > hi {
                            continue;
                        }
                        let x34 = w[i3] * wc[i4];
                        let p4 = p2 * x34;
                        let (a4, b4) = if WITH_Q { (a2 * x34, b2 * x34) } else { (ZERO, ZERO) };
                        let om4 = sq[i1] - sq[i2] + sq[i3] - sq[i4];
                        let ps4 = (m[i1] - m[i2]) + (m[i3] - m[i4]);
                        for i5 in lo..=hi {
                            let i5 = i5 as usize;
                            let i6 = (d4 + i5 as i64) as usize;
                            let om = om4 + sq[i5] - sq[i6];
                            let ps = ps4 + (m[i5] - m[i6]);
                            let tail = w[i5] * wc[i6];
                            if om == 0 {
                                if WITH_Q {
                                    acc.q0 += p4 * tail * ps;
                                }
                            } else {
                                let c = ps / om as f64;
                                acc.r += p4 * tail * c;
                                if WITH_Q {
                                    acc.q1 += a4 * tail * c;
                                    acc.q2 += b4 * tail * c;
                                }
                            }
                        }
                    }
                }
            }
            acc
        })
        .collect();
    tree_sum(&parts)
}

/// The same sums from the `Omega`-spectrum of space-time products.
///
/// With `F_c(t, x) = sum_k c_k e^{-itk^2} e^{ikx}`, the `x`-mean of a product of six such
/// functions (alternately conjugated) is `sum_kappa S_kappa e^{-it kappa}` where `S_kappa`
/// collects tuples with `Omega = kappa`. Sampling `t` at `T > 6N^2` points recovers every
/// `S_kappa` exactly. Permutation symmetry of the constrained sums reduces `psi` to one
/// weighted slot per term:
///
/// * `sum psi W / Omega = 6 Re sum m(k_1) W / Omega`, `sum_{Omega=0} psi W = 6i Im sum_{Omega=0} m(k_1) W`;
/// * `q1` uses `m(k_1) + 2 m(k_3) - 3 m(k_2)`, `q2` uses `3 m(k_1) - m(k_2) - 2 m(k_4)`.
fn spacetime_sums<const WITH_Q: bool>(w: &[Complex64], v: &[Complex64], m: &[f64]) -> Sums {
    let len = w.len();
    let n = (len - 1) / 2;
    let t_pts = (6 * n * n + 1).next_power_of_two();
    let g = (6 * n + 2).next_power_of_two();
    let phase: Vec<Complex64> =
        (0..t_pts).map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / t_pts as f64)).collect();
    let sq: Vec<usize> = (0..len).map(|i| (i as i64 - n as i64).pow(2) as usize).collect();

    let series: Vec<[Complex64; 3]> = (0..t_pts)
        .into_par_iter()
        .map_init(
            || (vec![ZERO; len], [vec![ZERO; g], vec![ZERO; g], vec![ZERO; g], vec![ZERO; g]]),
            |(tw, bufs), l| {
                let twist = |c: &[Complex64], weighted: bool, out: &mut [Complex64]| {
                    for i in 0..len {
                        let z = c[i] * phase[(sq[i] * l) % t_pts];
                        out[i] = if weighted { z * m[i] } else { z };
                    }
                };
                let [b, bm, p, pm] = bufs;
                twist(w, false, tw);
                fft::synthesize(tw, n, b);
                twist(w, true, tw);
                fft::synthesize(tw, n, bm);
                if WITH_Q {
                    twist(v, false, tw);
                    fft::synthesize(tw, n, p);
                    twist(v, true, tw);
                    fft::synthesize(tw, n, pm);
                }
                let mut s = [ZERO; 3];
                for x in 0..g {
                    let (bx, bmx) = (b[x], bm[x]);
                    let bb = bx.norm_sqr();
                    let b4 = bb * bb;
                    s[0] += bmx * bx.conj() * b4;
                    if WITH_Q {
                        let (px, pmx) = (p[x], pm[x]);
                        let bc = bx.conj();
                        s[1] += pmx * bc * b4 + px * bmx * bc * bc * bb * 2.0 - px * bmx.conj() * b4 * 3.0;
                        s[2] += bmx * px.conj() * b4 * 3.0
                            - bx * pmx.conj() * b4
                            - bx * bx * bb * px.conj() * bmx.conj() * 2.0;
                    }
                }
                s.map(|z| z / g as f64)
            },
        )
        .collect();

    let kmax = 3 * n * n;
    let spectrum = |idx: usize| -> (Complex64, Complex64) {
        let mut buf: Vec<Complex64> = series.iter().map(|s| s[idx]).collect();
        fft::inverse_plan(t_pts).process(&mut buf);
        let scale = 1.0 / t_pts as f64;
        let resonant = buf[0] * scale;
        let mut terms = Vec::with_capacity(2 * kmax);
        for kappa in 1..=kmax {
            let k = kappa as i64;
            terms.push(buf[fft::slot(k, t_pts)] * (scale / k as f64));
            terms.push(buf[fft::slot(-k, t_pts)] * (-scale / k as f64));
        }
        (resonant, pairwise_sum_complex(&terms))
    };

    let (b0, a) = spectrum(0);
    let mut out = Sums { r: Complex64::new(6.0 * a.re, 0.0), ..Default::default() };
    if WITH_Q {
        out.q0 = Complex64::new(0.0, 6.0 * b0.im);
        out.q1 = spectrum(1).1;
        out.q2 = spectrum(2).1;
    }
    out
}

fn sums(u: &FourierState, n: usize, family: &WeightFamily, method: SumMethod, v: Option<&FourierState>) -> Sums {
    let w = &u.coeffs()[u.m_ambient() - n..=u.m_ambient() + n];
    // a single active mode makes every constrained tuple trivial (Omega = psi = 0)
    if w.iter().filter(|z| **z != ZERO).count() <= 1 {
        return Sums::default();
    }
    let m = family.table(n);
    match (method, v) {
        (SumMethod::Enumerate, None) => enumerate_sums::<false>(w, w, &m),
        (SumMethod::Enumerate, Some(v)) => enumerate_sums::<true>(w, &v.coeffs()[v.m_ambient() - n..=v.m_ambient() + n], &m),
        (SumMethod::SpaceTime, None) => spacetime_sums::<false>(w, w, &m),
        (SumMethod::SpaceTime, Some(v)) => spacetime_sums::<true>(w, &v.coeffs()[v.m_ambient() - n..=v.m_ambient() + n], &m),
    }
}

/// The complex sum `sum_{Omega != 0} (psi/Omega) w_1 w2* ... w6*` before taking `Re`.
pub fn r_correction_complex(u: &FourierState, p: &EnergyParams) -> Result<Complex64> {
    let n = p.resolve(u)?;
    Ok(sums(u, n, &p.family, p.method, None).r)
}

/// `R_{s,N}(u) = 1/6 Re sum_{Omega != 0} (psi/Omega) w_1 w2* w_3 w4* w_5 w6*`, `w = Pi_N u`.
pub fn r_correction(u: &FourierState, p: &EnergyParams) -> Result<f64> {
    Ok(r_correction_complex(u, p)?.re / 6.0)
}

/// `E_{s,N}(u) = 1/2 |||Pi_N u|||^2 + R_{s,N}(u)`.
pub fn e_modified(u: &FourierState, p: &EnergyParams) -> Result<f64> {
    let n = p.resolve(u)?;
    Ok(0.5 * sobolev_norm_sq(&project_low(u, n), &p.family) + r_correction(u, p)?)
}

/// `(q0, q1, q2)`; the inner five-fold sums are the coefficients of `Pi_N(|w|^4 w)`.
pub fn q_components(u: &FourierState, p: &EnergyParams, grid: &GridSpec) -> Result<QComponents> {
    let n = p.resolve(u)?;
    let v = quintic_nonlinearity(u, n, grid)?;
    let s = sums(u, n, &p.family, p.method, Some(&v));
    Ok(QComponents { q0: s.q0, q1: s.q1, q2: s.q2 })
}

/// `Q_{s,N}(u) = d/dt E_{s,N}(Pi_N Phi_N(t) u)` at `t = 0`.
pub fn q_derivative(u: &FourierState, p: &EnergyParams, grid: &GridSpec) -> Result<f64> {
    Ok(q_components(u, p, grid)?.combine())
}

/// `R_{s,N}(u)` and `Q_{s,N}(u)` sharing one quintic evaluation.
pub fn r_and_q(u: &FourierState, p: &EnergyParams, grid: &GridSpec) -> Result<(f64, f64)> {
    let n = p.resolve(u)?;
    let v = quintic_nonlinearity(u, n, grid)?;
    let s = sums(u, n, &p.family, p.method, Some(&v));
    Ok((s.r.re / 6.0, QComponents { q0: s.q0, q1: s.q1, q2: s.q2 }.combine()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample(m: usize, seed: u64) -> FourierState {
        let mut x = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let mut next = move || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        FourierState::from_fn(m, |k| c(next(), next()) / (1.0 + (k * k) as f64)).unwrap()
    }

    #[test]
    fn single_mode_and_two_mode_support_vanish() {
        let fam = WeightFamily::japanese(2.0);
        let g = GridSpec::for_quintic(3);
        for method in [SumMethod::Enumerate, SumMethod::SpaceTime] {
            let p = EnergyParams::new(3, fam).with_method(method);
            let u = FourierState::plane_wave(3, 2, c(0.7, -0.2));
            assert!(r_correction(&u, &p).unwrap().abs() < 1e-15);
            let q = q_components(&u, &p, &g).unwrap();
            assert!(q.q0.norm() < 1e-14 && q.q1.norm() < 1e-14 && q.q2.norm() < 1e-14);

            let u01 = FourierState::from_fn(3, |k| if k == 0 || k == 1 { c(0.6, 0.1 * k as f64) } else { c(0.0, 0.0) }).unwrap();
            assert!(r_correction(&u01, &p).unwrap().abs() < 1e-14);
            assert!(q_derivative(&u01, &p, &g).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn modified_energy_of_single_mode() {
        let fam = WeightFamily::equivalent(2.0);
        let p = EnergyParams::new(4, fam);
        let a = c(0.3, 0.4);
        let u = FourierState::plane_wave(6, -3, a);
        let e = e_modified(&u, &p).unwrap();
        assert!((e - 0.5 * fam.multiplier(3) * a.norm_sqr()).abs() < 1e-14);
        assert_eq!(e_modified(&FourierState::zeros(4), &p).unwrap(), 0.0);
    }

    #[test]
    fn modified_energy_splits_exactly() {
        let u = sample(3, 11);
        let p = EnergyParams::new(3, WeightFamily::japanese(2.0));
        let e = e_modified(&u, &p).unwrap();
        let r = r_correction(&u, &p).unwrap();
        let half = 0.5 * sobolev_norm_sq(&project_low(&u, 3), &p.family);
        assert!(((e - half) - r).abs() <= 1e-15 * e.abs());
    }

    #[test]
    fn truncation_above_ambient_is_an_error() {
        let u = sample(2, 1);
        let p = EnergyParams::new(3, WeightFamily::japanese(2.0));
        assert_eq!(r_correction(&u, &p), Err(Error::TruncationExceedsAmbient { n_cut: 3, m_ambient: 2 }));
        let amb = EnergyParams::ambient(WeightFamily::japanese(2.0));
        assert_eq!(amb.resolve(&u).unwrap(), 2);
    }

    #[test]
    fn spacetime_agrees_with_enumeration() {
        let g = GridSpec::for_quintic(5);
        for (n, seed) in [(1, 3), (2, 5), (4, 7), (5, 9)] {
            let u = sample(n + 1, seed);
            for fam in [WeightFamily::japanese(2.0), WeightFamily::equivalent(1.7)] {
                let pe = EnergyParams::new(n, fam);
                let ps = pe.with_method(SumMethod::SpaceTime);
                let (a, b) = (q_components(&u, &pe, &g).unwrap(), q_components(&u, &ps, &g).unwrap());
                let scale = a.q0.norm() + a.q1.norm() + a.q2.norm() + 1e-300;
                for (x, y) in [(a.q0, b.q0), (a.q1, b.q1), (a.q2, b.q2)] {
                    assert!((x - y).norm() <= 1e-11 * scale, "n={n}: {x} vs {y}");
                }
                let (ra, rb) = (r_correction_complex(&u, &pe).unwrap(), r_correction_complex(&u, &ps).unwrap());
                assert!((ra - rb).norm() <= 1e-11 * ra.norm().max(1e-300), "n={n}: {ra} vs {rb}");
            }
        }
    }

    #[test]
    fn r_sum_is_real_and_q0_is_imaginary() {
        let u = sample(4, 21);
        let p = EnergyParams::new(4, WeightFamily::japanese(2.5));
        let r = r_correction_complex(&u, &p).unwrap();
        assert!(r.im.abs() <= 1e-12 * r.norm());
        let q = q_components(&u, &p, &GridSpec::for_quintic(4)).unwrap();
        assert!(q.q0.re.abs() <= 1e-12 * q.q0.norm());
    }
}
