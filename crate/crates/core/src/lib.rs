//! One-shot information-theoretic quantities and coding simulations.
//!
//! Rényi and smooth Rényi entropies over finite alphabets, a one-shot typical
//! set built from them, universal hashing, and simulators for distributed
//! source coding and the two-user multiple-access channel.

pub mod asymptotics;
pub mod entropy;
pub mod error;
pub mod hashing;
pub mod mac;
pub mod probability;
pub mod report;
pub mod rng;
pub mod slepian_wolf;
pub mod smoothing;
pub mod typical;

pub use entropy::{renyi, renyi_conditional, shannon, EntropyOrder};
pub use error::{Error, Result};
pub use probability::{tv_distance, Alphabet, Axis, Caps, Channel, JointPmf, Pmf};
pub use smoothing::{
    smooth_conditional_h0, smooth_conditional_hneginf, smooth_h0, smooth_hinf, smooth_hneginf, SmoothingMethod,
    SmoothingResult,
};
pub use typical::{build_typical_set, find_delta, scan_delta, tail_probability, xi_bounds, EpsilonBudget, TypicalSet, XiBounds};
