//! Fixtures shared by the `qnls-core` benchmarks.

use qnls_core::{sample_state, FourierState, MeasureParams, SeededRng};

/// A reproducible draw of `mu_{2,M}` scaled by `amplitude`.
pub fn fixture_state(m_ambient: usize, amplitude: f64, seed: u64) -> FourierState {
    let p = MeasureParams::japanese(2.0, m_ambient).expect("valid measure");
    let u = sample_state(&SeededRng::new(seed, 0), &p);
    FourierState::from_coeffs(m_ambient, u.coeffs().iter().map(|c| c * amplitude).collect()).expect("finite draw")
}
