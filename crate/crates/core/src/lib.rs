//! Density-matrix laboratory for the sequential quantum secret sharing scheme.
//!
//! A single qubit prepared in `|+⟩` circulates through `N` players. Each player
//! applies a phase gate drawn from `{0, π/2, π, 3π/2}` and the qubit then crosses a
//! (possibly noisy) link to the next player. After the last link the dealer
//! measures in the X basis. Rounds whose public class bits sum to an even number
//! are kept, and every kept round yields one bit of each player's key share.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: 2×2 matrices, row-major vectorization and 4×4 superoperators.
//! * [`channels`]: Kraus channels, their superoperators and the players' phase gates.
//! * [`protocol`]: the seeded round engine, sieving, key extraction and Monte Carlo estimates.
//! * [`analytics`]: closed-form error rates, admissible-noise bounds, the bit-flip block
//!   algebra and an exhaustive-enumeration oracle.

pub mod analytics;
pub mod channels;
mod error;
pub mod linalg;
pub mod protocol;

pub use analytics::{
    bitflip_block_product, bitflip_conditional_plus, bitflip_error_prob, dephasing_error_prob,
    dephasing_error_prob_hetero, exhaustive_error_prob, gate_error_bound, gate_error_prob,
    gate_error_prob_jittered, noise_bound, table1, BitflipTranscript, BlockProduct, Bound,
    Table1Row, ToleranceBudget,
};
pub use channels::{
    apply_kraus, compose, make_channel, noisy_phase_gate_superop, phase_gate_superop, to_superop,
    ChannelKind, KrausChannel, PlayerAction,
};
pub use error::{Error, Result};
pub use linalg::{
    devectorize, hs_inner, vectorize, x_minus_prob, x_plus_prob, Complex, DensityMatrix, Mat2,
    Superop, VecState,
};
pub use protocol::{
    extract_key_shares, ideal_outcome, is_valid, run_experiment, run_round, Engine, ErrorEstimate,
    GateErrorSpec, KeyShares, Outcome, ProtocolConfig, RoundRecord,
};
