//! Spectral simulator and Monte Carlo laboratory for the frequency-truncated
//! defocusing quintic NLS on the torus,
//!
//! ```text
//! i u_t + u_xx = Pi_N(|Pi_N u|^4 Pi_N u),   x in [0, 2 pi),
//! ```
//!
//! together with its normal-form energies, Gaussian measures with covariance
//! `m(k)^{-1}`, and the Radon-Nikodym densities of the transported measures.
//!
//! Module map:
//!
//! * [`spectral`]: Fourier states, projectors, norms, conserved quantities, dealiased quintic product.
//! * [`resonance`]: `Omega`, `psi`, constrained tuple enumeration and the deterministic lemma checks.
//! * [`energy`]: `R_{s,N}`, `E_{s,N}`, `Q_{s,N}`.
//! * [`flow`]: the truncated flow, Picard cross-check, Liouville checks, growth monitor.
//! * [`measures`]: sampling, cutoffs, weights, partition constants, moment and `L^p` estimators.
//! * [`transport`]: densities, the change-of-measure test, convergence and `L^p` studies.

pub mod energy;
pub mod error;
mod fft;
pub mod flow;
pub mod measures;
pub mod resonance;
pub mod spectral;
pub mod stats;
pub mod transport;

pub use energy::{e_modified, q_components, q_derivative, r_correction, EnergyParams, QComponents, SumMethod};
pub use error::{Error, Result};
pub use flow::{evolve, evolve_trajectory, FlowParams, Trajectory};
pub use measures::{sample_state, MeasureParams, SeededRng};
pub use resonance::{omega, psi, ResonanceFilter, Tuple6};
pub use spectral::{FourierState, GridSpec, WeightFamily, WeightKind};
pub use stats::McReport;
pub use transport::{DensityParams, ObservableSpec};

pub use num_complex::Complex64;
