//! Shared fixtures for the criterion benchmarks in `benches/`.

use qss_core::{ChannelKind, GateErrorSpec, ProtocolConfig};

/// A homogeneous dephasing configuration of `n` players.
pub fn dephasing_config(n: usize, rounds: u64) -> ProtocolConfig {
    ProtocolConfig::homogeneous(n, ChannelKind::PhaseDamping(0.05), rounds, 7)
}

/// Bit-flip links plus a jittered gate error, exercising every random draw.
pub fn jittered_bitflip_config(n: usize, rounds: u64) -> ProtocolConfig {
    ProtocolConfig::homogeneous(n, ChannelKind::BitFlip(0.02), rounds, 7)
        .with_gate_error(GateErrorSpec::new(0.01, 0.01).expect("small gate error"))
}
