//! Measurement-based direct feedback control (MDFC) of a qubit in a dephasing
//! bosonic bath.
//!
//! The crate is organised bottom-up:
//!
//! - [`qmat`]: 2×2 operators, 4×4 Liouville-space superoperators, `expm`,
//!   Bloch/density conversions.
//! - [`scheme`]: measurement operators, correction unitaries and the feedback
//!   schemes built from them.
//! - [`bath`]: Ohmic spectral density and the noise/dissipation kernels.
//! - [`evolve`]: the feedback generator and the hybrid memory-kernel solver.
//! - [`oracle`]: jump-trajectory unravelling and the exact pure-dephasing
//!   solution, used to validate the solver.
//! - [`metrics`]: fidelities, purity, Bloch-sphere averages and the
//!   parameter-sweep optimizer.
//!
//! Units: ħ = k_B = 1, and frequencies are measured in units of the bath
//! cutoff ω_c, so times are the scaled time ω_c·t.

pub mod bath;
pub mod error;
pub mod evolve;
pub mod metrics;
pub mod oracle;
pub mod qmat;
pub mod quad;
pub mod scheme;

pub use bath::{BathSpec, Temperature};
pub use error::{Error, Result};
pub use evolve::{MapSeries, SimConfig, TimeSeries};
pub use metrics::sweep::{Axis, Optimum, SweepResult};
pub use oracle::TrajectoryEstimate;
pub use qmat::{BlochVector, Complex2, DensityMatrix, DensityReport, Ket2, Superop, C64};
pub use scheme::{CorrectionAxis, FeedbackPair, FeedbackScheme, MeasurementAxis, MeasurementPair, Sign};
