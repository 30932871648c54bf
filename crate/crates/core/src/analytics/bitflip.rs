//! Block algebra of the bit-flip channel.
//!
//! In the vectorized picture `ℰ_bf·𝒰(φ_m)` splits into an outer block `A_m`
//! acting on `(ρ00, ρ11)` and an inner block `B_m = ((1−p)I + pX)·e^{iφ_m Z}`
//! acting on `(ρ01, ρ10)`. Writing `e^{iφZ} = (−1)^s (iZ)^c` and pushing every
//! `Z` to the right flips the sign of the `X` terms it passes, so for a valid
//! round
//!
//! ```text
//! ∏ B_m = σ · ∏_{m=1}^N [(1−p)I + p·ξ_{m−1}·X] = σ · H diag(∏(1−p+pξ), ∏(1−p−pξ)) H
//! ```
//!
//! with `ξ_m = (−1)^{c_1+…+c_m}` and overall sign `σ = (−1)^{Σs}·i^{Σc}`. In a
//! valid round `i^{Σc} = (−1)^{Σc/2}` is real and must be kept: it is what makes
//! `σ` equal the sign `(−1)^{Σφ/π}` of the noiseless outcome.

use crate::channels::PlayerAction;
use crate::error::{Error, Result};
use crate::linalg::VecState;

/// Public class bits and private secret bits of one transcript.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitflipTranscript {
    class_bits: Vec<bool>,
    secret_bits: Vec<bool>,
}

impl BitflipTranscript {
    pub fn new(class_bits: Vec<bool>, secret_bits: Vec<bool>) -> Result<Self> {
        if class_bits.is_empty() || class_bits.len() != secret_bits.len() {
            return Err(Error::config(format!(
                "transcript needs equally many class and secret bits, got {} and {}",
                class_bits.len(),
                secret_bits.len()
            )));
        }
        Ok(BitflipTranscript {
            class_bits,
            secret_bits,
        })
    }

    pub fn from_actions(actions: &[PlayerAction]) -> Self {
        BitflipTranscript {
            class_bits: actions.iter().map(|a| a.class_bit()).collect(),
            secret_bits: actions.iter().map(|a| a.secret_bit()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.class_bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_bits.is_empty()
    }

    fn class_sum(&self) -> usize {
        self.class_bits.iter().filter(|&&b| b).count()
    }

    pub fn is_valid(&self) -> bool {
        self.class_sum().is_multiple_of(2)
    }

    /// `ξ_m = (−1)^{c_1+…+c_m}`, with `ξ_0 = 1`.
    pub fn xi(&self, m: usize) -> f64 {
        let flips = self.class_bits[..m].iter().filter(|&&b| b).count();
        sign(flips)
    }

    /// `η_N = (−1)^{Σ s_m}`.
    pub fn eta(&self) -> f64 {
        sign(self.secret_bits.iter().filter(|&&b| b).count())
    }

    /// `(−1)^{Σc/2}`, the real value of `i^{Σc}` in a valid round.
    pub fn class_phase(&self) -> f64 {
        sign(self.class_sum() / 2)
    }

    fn require_valid(&self, what: &'static str) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidRound(what))
        }
    }

    /// `∏_{m=1}^N (1 − p + sign·p·ξ_{m−1})`.
    fn xi_product(&self, p: f64, sign: f64) -> f64 {
        (0..self.len())
            .map(|m| 1.0 - p + sign * p * self.xi(m))
            .product()
    }
}

fn sign(count: usize) -> f64 {
    if count.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `γ = 1 − 2p`.
pub fn gamma(p: f64) -> f64 {
    1.0 - 2.0 * p
}

/// `P(+ | transcript) = ½(1 + (−1)^{Σs}(−1)^{Σc/2} ∏(1 − p + p·ξ_{m−1}))` for a
/// valid round with identical bit-flip links.
pub fn bitflip_conditional_plus(t: &BitflipTranscript, p: f64) -> Result<f64> {
    t.require_valid("bitflip_conditional_plus")?;
    let a = t.eta() * t.class_phase() * t.xi_product(p, 1.0);
    Ok((0.5 * (1.0 + a)).clamp(0.0, 1.0))
}

/// Products of the outer and inner blocks over a whole valid round.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockProduct {
    /// Eigenvalue of `∏B_m` on `|+⟩`, equal to `2ρ01` of the final state.
    pub a_n: f64,
    /// Eigenvalue of `∏B_m` on `|−⟩`.
    pub b_n: f64,
    /// `∏A_m = ½((1+γ^N, 1−γ^N), (1−γ^N, 1+γ^N))`.
    pub outer: [[f64; 2]; 2],
}

impl BlockProduct {
    /// `H diag(a_N, b_N) H`.
    pub fn inner(&self) -> [[f64; 2]; 2] {
        let (a, b) = (self.a_n, self.b_n);
        [
            [(a + b) / 2.0, (a - b) / 2.0],
            [(a - b) / 2.0, (a + b) / 2.0],
        ]
    }

    /// Applies both block products to `|+⟩⟨+|`, giving the vectorized final state.
    pub fn reassemble(&self) -> VecState {
        let v0 = VecState::plus().0;
        let (o, i) = (self.outer, self.inner());
        VecState([
            v0[0] * o[0][0] + v0[3] * o[0][1],
            v0[1] * i[0][0] + v0[2] * i[0][1],
            v0[1] * i[1][0] + v0[2] * i[1][1],
            v0[0] * o[1][0] + v0[3] * o[1][1],
        ])
    }
}

pub fn bitflip_block_product(t: &BitflipTranscript, p: f64) -> Result<BlockProduct> {
    t.require_valid("bitflip_block_product")?;
    let sigma = t.eta() * t.class_phase();
    let g = gamma(p).powi(t.len() as i32);
    Ok(BlockProduct {
        a_n: sigma * t.xi_product(p, 1.0),
        b_n: sigma * t.xi_product(p, -1.0),
        outer: [
            [(1.0 + g) / 2.0, (1.0 - g) / 2.0],
            [(1.0 - g) / 2.0, (1.0 + g) / 2.0],
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::valid_transcripts;
    use crate::channels::{make_channel, to_superop, ChannelKind};
    use crate::linalg::{x_plus_prob, Complex, DensityMatrix, Superop};
    use crate::protocol::evolve;

    /// `B_m = ((1−p)I + pX)·diag(e^{iφ}, e^{−iφ})`.
    fn inner_block(action: PlayerAction, p: f64) -> [[Complex; 2]; 2] {
        let z = action.phase_factor();
        let (q, r) = (Complex::from(1.0 - p), Complex::from(p));
        [[q * z, r * z.conj()], [r * z, q * z.conj()]]
    }

    fn acts(qs: &[u8]) -> Vec<PlayerAction> {
        qs.iter().map(|&q| PlayerAction::new(q).unwrap()).collect()
    }

    fn engine_state(actions: &[PlayerAction], p: f64) -> VecState {
        let link = to_superop(&make_channel(ChannelKind::BitFlip(p)).unwrap());
        let links: Vec<Superop> = vec![link; actions.len()];
        evolve(actions, &vec![0.0; actions.len()], &links)
    }

    fn mat_mul(a: [[Complex; 2]; 2], b: [[Complex; 2]; 2]) -> [[Complex; 2]; 2] {
        let mut out = [[Complex::from(0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

    #[test]
    fn xi_and_eta() {
        let t = BitflipTranscript::from_actions(&acts(&[1, 3, 0, 2]));
        assert_eq!(
            (0..=4).map(|m| t.xi(m)).collect::<Vec<_>>(),
            vec![1.0, -1.0, 1.0, 1.0, 1.0]
        );
        assert_eq!(t.eta(), 1.0);
        assert!(t.is_valid());
        assert_eq!(t.class_phase(), -1.0);
        assert!(BitflipTranscript::new(vec![true], vec![]).is_err());
    }

    #[test]
    fn conditional_plus_examples() {
        for p in [0.0, 0.1, 0.3] {
            let t = BitflipTranscript::from_actions(&acts(&[0, 0]));
            assert_eq!(bitflip_conditional_plus(&t, p).unwrap(), 1.0);
            let t = BitflipTranscript::from_actions(&acts(&[1, 1]));
            assert!((bitflip_conditional_plus(&t, p).unwrap() - p).abs() < 1e-15);
        }
        let t = BitflipTranscript::from_actions(&acts(&[2, 2, 1, 3]));
        assert_eq!(bitflip_conditional_plus(&t, 0.0).unwrap(), 1.0);
        let t = BitflipTranscript::from_actions(&acts(&[2, 0, 1, 1]));
        assert_eq!(bitflip_conditional_plus(&t, 0.0).unwrap(), 1.0);
        let t = BitflipTranscript::from_actions(&acts(&[1, 0]));
        assert_eq!(
            bitflip_conditional_plus(&t, 0.1),
            Err(Error::InvalidRound("bitflip_conditional_plus"))
        );
    }

    #[test]
    fn block_product_examples() {
        let t = BitflipTranscript::from_actions(&acts(&[1, 3, 2]));
        let b = bitflip_block_product(&t, 0.0).unwrap();
        assert_eq!(
            (b.a_n, b.b_n),
            (t.eta() * t.class_phase(), t.eta() * t.class_phase())
        );
        assert_eq!(b.outer, [[1.0, 0.0], [0.0, 1.0]]);

        let p = 0.2;
        let t = BitflipTranscript::from_actions(&acts(&[1, 3]));
        let b = bitflip_block_product(&t, p).unwrap();
        assert!((b.a_n - (1.0 - 2.0 * p)).abs() < 1e-15);
        assert!(bitflip_block_product(&BitflipTranscript::from_actions(&acts(&[1])), p).is_err());
    }

    #[test]
    fn conditional_plus_matches_superoperator_engine() {
        for n in 1..=6 {
            for actions in valid_transcripts(n) {
                let t = BitflipTranscript::from_actions(&actions);
                for p in [0.0, 0.05, 0.3, 0.5, 0.9] {
                    let rho = DensityMatrix::from_vec(&engine_state(&actions, p)).unwrap();
                    let got = bitflip_conditional_plus(&t, p).unwrap();
                    assert!((got - x_plus_prob(&rho)).abs() < 1e-10, "{actions:?} p={p}");
                }
            }
        }
    }

    #[test]
    fn reassembly_matches_superoperator_engine() {
        for n in 1..=6 {
            for actions in valid_transcripts(n) {
                let t = BitflipTranscript::from_actions(&actions);
                for p in [0.0, 0.1, 0.25, 0.7] {
                    let b = bitflip_block_product(&t, p).unwrap();
                    let diff = b.reassemble().max_abs_diff(&engine_state(&actions, p));
                    assert!(diff < 1e-12, "{actions:?} p={p} diff={diff}");
                }
            }
        }
    }

    #[test]
    fn inner_block_product_matches_hadamard_form() {
        // Brute-force B_N ⋯ B_1 as complex 2×2 products, including the b_N eigenvalue.
        for n in 1..=5 {
            for actions in valid_transcripts(n) {
                let p = 0.15;
                let t = BitflipTranscript::from_actions(&actions);
                let b = bitflip_block_product(&t, p).unwrap();
                let one = Complex::from(1.0);
                let zero = Complex::from(0.0);
                let prod = actions.iter().fold([[one, zero], [zero, one]], |acc, &a| {
                    mat_mul(inner_block(a, p), acc)
                });
                let want = b.inner();
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((prod[i][j] - want[i][j]).norm() < 1e-12, "{actions:?}");
                    }
                }
            }
        }
    }
}
