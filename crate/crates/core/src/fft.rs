//! Thin wrapper over `rustfft` with a per-thread plan cache.
//!
//! Grid convention: `x_j = 2*pi*j/G`, synthesis `u(x_j) = sum_k u_k e^{i k x_j}`,
//! analysis `u_k = (1/G) sum_j u(x_j) e^{-i k x_j}`.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

pub(crate) fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Index of frequency `k` in a length-`g` DFT buffer.
#[inline]
pub(crate) fn slot(k: i64, g: usize) -> usize {
    k.rem_euclid(g as i64) as usize
}

/// Writes the coefficients `coeffs[k + m]`, `|k| <= m`, into `buf` and
/// synthesizes grid values in place.
pub(crate) fn synthesize(coeffs: &[Complex64], m: usize, buf: &mut [Complex64]) {
    let g = buf.len();
    buf.fill(Complex64::new(0.0, 0.0));
    for (i, c) in coeffs.iter().enumerate() {
        let k = i as i64 - m as i64;
        buf[slot(k, g)] += *c;
    }
    inverse_plan(g).process(buf);
}

/// Analyzes grid values in place and extracts coefficients `|k| <= m` into `out`.
pub(crate) fn analyze(buf: &mut [Complex64], m: usize, out: &mut [Complex64]) {
    let g = buf.len();
    forward_plan(g).process(buf);
    let scale = 1.0 / g as f64;
    for (i, o) in out.iter_mut().enumerate() {
        let k = i as i64 - m as i64;
        *o = buf[slot(k, g)] * scale;
    }
}
