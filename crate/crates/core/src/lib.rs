//! Exact, approximate and brute-force evolution of a free quantum particle
//! under position-coupled noise and energy dephasing.
//!
//! The master equation is
//! `∂ₜρ = −p∂_qρ + (ħσ²/2)∂ₚ²ρ + (ħγ²/2)p²∂_q²ρ`
//! on Wigner functions over `x = (p, q)`. At `γ = 0` this is a Gaussian
//! channel; for `γ > 0` it is not, but Gaussian initial data still evolve in
//! closed form after a partial Fourier transform in `q`.

pub mod error;
pub mod quad;
pub mod phase_space;
pub mod gaussian_channel;
pub mod exact_channel;
pub mod observables;
pub mod propagator;
pub mod approximations;
pub mod entropy;
pub mod oracle;

pub use error::{BgcError, Result};
pub use exact_channel::ChannelSpec;
pub use phase_space::{GaussianTerm, StateSum};
