//! Closed-form error probabilities, admissible-noise bounds and their exact
//! enumeration oracle.
//!
//! Error probabilities are averaged over valid rounds with uniformly random
//! player actions. `δ` is a tolerance budget: the bounds give the largest gate
//! error or channel parameter for which the error probability stays below `δ/2`.

mod bitflip;
mod oracle;
mod table;

pub use bitflip::{
    bitflip_block_product, bitflip_conditional_plus, BitflipTranscript, BlockProduct,
};
pub use oracle::{
    all_transcripts, exhaustive_error_prob, valid_transcripts, NeumaierSum, ORACLE_MAX_PLAYERS,
};
pub use table::{table1, Table1Row};

use crate::channels::ChannelKind;
use crate::error::{Error, Result};
use crate::protocol::GateErrorSpec;

/// The `δ` of a target `P_error < δ/2`, with `0 < δ < 1`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct ToleranceBudget(f64);

impl ToleranceBudget {
    pub fn new(delta: f64) -> Result<Self> {
        if delta > 0.0 && delta < 1.0 {
            Ok(ToleranceBudget(delta))
        } else {
            Err(Error::OutOfDomain {
                field: "delta",
                value: delta,
                bound: "δ ∈ (0,1)",
            })
        }
    }

    pub fn delta(self) -> f64 {
        self.0
    }
}

/// An exact bound together with its small-`δ` approximation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bound {
    pub exact: f64,
    pub approx: f64,
}

/// `½(1 − cos Nε̄)`: error rate for a deterministic phase offset `ε̄` per player.
pub fn gate_error_prob(n: usize, eps_bar: f64) -> f64 {
    0.5 * (1.0 - (n as f64 * eps_bar).cos())
}

/// Exact average under Gaussian jitter, `½(1 − cos(Nε̄)·e^{−Nσ²/2})`.
///
/// The gap to [`gate_error_prob`] is the cost of averaging the phase before the
/// cosine.
pub fn gate_error_prob_jittered(n: usize, eps_bar: f64, sigma: f64) -> f64 {
    let n = n as f64;
    0.5 * (1.0 - (n * eps_bar).cos() * (-n * sigma * sigma / 2.0).exp())
}

/// Largest mean phase offset with error below `δ/2`: `arccos(1−δ)/N ≈ √(2δ)/N`.
pub fn gate_error_bound(n: usize, budget: ToleranceBudget) -> Bound {
    let (n, d) = (n as f64, budget.delta());
    Bound {
        exact: (1.0 - d).acos() / n,
        approx: (2.0 * d).sqrt() / n,
    }
}

/// `½(1 − (1−p)^N)` for `N` dephasing (or depolarizing) links.
pub fn dephasing_error_prob(n: usize, p: f64) -> f64 {
    // Same multiplication order as the heterogeneous product, so the two agree exactly.
    0.5 * (1.0 - (0..n).map(|_| 1.0 - p).product::<f64>())
}

/// `½(1 − ∏(1−p_i))` for dephasing links with individual parameters.
pub fn dephasing_error_prob_hetero(ps: &[f64]) -> Result<f64> {
    if ps.is_empty() {
        return Err(Error::config(
            "heterogeneous dephasing needs at least one link",
        ));
    }
    Ok(0.5 * (1.0 - ps.iter().map(|p| 1.0 - p).product::<f64>()))
}

/// Largest homogeneous dephasing parameter with error below `δ/2`:
/// `1 − (1−δ)^{1/N} ≈ δ/N`.
pub fn noise_bound(n: usize, budget: ToleranceBudget) -> Bound {
    let (n, d) = (n as f64, budget.delta());
    Bound {
        exact: 1.0 - (1.0 - d).powf(1.0 / n),
        approx: d / n,
    }
}

/// `½(1 − (1−p)^{N−1})` for `N ≥ 2` bit-flip links.
pub fn bitflip_error_prob(n: usize, p: f64) -> f64 {
    debug_assert!(n >= 2);
    0.5 * (1.0 - (1.0 - p).powi(n as i32 - 1))
}

/// The closed-form error rate for a link/gate configuration, when one exists.
///
/// * Links that are all dephasing, depolarizing or identity use the
///   heterogeneous dephasing product.
/// * Identical bit-flip links use the `N−1` exponent.
/// * Gate errors without channel noise use `½(1 − cos Nε̄)`, ignoring jitter.
///
/// Anything else (phase flip, amplitude damping, mixtures, gate errors on top
/// of channel noise) returns `None`.
pub fn closed_form_rate(links: &[ChannelKind], gate: &GateErrorSpec) -> Option<f64> {
    if links.is_empty() {
        return None;
    }
    if !gate.is_none() {
        return links
            .iter()
            .all(ChannelKind::is_identity)
            .then(|| gate_error_prob(links.len(), gate.mean()));
    }
    let dephasing_like: Option<Vec<f64>> = links
        .iter()
        .map(|k| match *k {
            ChannelKind::PhaseDamping(p) | ChannelKind::Depolarizing(p) => Some(p),
            k if k.is_identity() => Some(0.0),
            _ => None,
        })
        .collect();
    if let Some(ps) = dephasing_like {
        return dephasing_error_prob_hetero(&ps).ok();
    }
    match links[0] {
        ChannelKind::BitFlip(p) if links.len() >= 2 && links.iter().all(|k| *k == links[0]) => {
            Some(bitflip_error_prob(links.len(), p))
        }
        _ => None,
    }
}
