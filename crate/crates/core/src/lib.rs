//! Entanglement of conditional states of open quantum systems.
//!
//! A central system of qubits and qudits couples to zero-temperature bosonic
//! baths through local traceless operators. Measuring the baths in a coherent
//! state basis leaves the system in a conditional pure state whose normalized
//! entanglement `x = G(ψ)/G(φ)` obeys `x = f/F`, with `F` the Born-rule
//! probability ratio and `f` an outcome-independent scaling function.
//!
//! The crate provides closed-form propagators, bath kernels, Monte Carlo
//! sampling of the entanglement distribution and an independent discrete-mode
//! oracle that integrates the full system-bath Schrödinger equation.

pub mod config;
pub mod entanglement;
pub mod error;
pub mod kernels;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod oracle;
pub mod propagator;
pub mod quad;
pub mod random;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use model::{
    ChannelKind, ChannelSpec, PureState, QubitMarginal, SpectralDensity, SubsystemLayout,
    SystemSpec,
};
