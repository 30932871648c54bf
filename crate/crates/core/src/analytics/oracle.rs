//! Exact error rates by enumerating every action transcript.

use rayon::prelude::*;

use crate::channels::{
    make_channel, noisy_phase_gate_superop, to_superop, ChannelKind, PlayerAction,
};
use crate::error::{Error, Result};
use crate::linalg::{x_plus_prob, DensityMatrix, Superop, VecState};
use crate::protocol::{GateErrorSpec, Outcome};

/// 4^10 ≈ 10^6 transcripts.
pub const ORACLE_MAX_PLAYERS: usize = 10;

/// Players whose actions are fixed per parallel task.
const SPLIT_DEPTH: usize = 2;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: NeumaierSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// All `4^n` action tuples in lexicographic order.
pub fn all_transcripts(n: usize) -> impl Iterator<Item = Vec<PlayerAction>> {
    let total = 4usize.pow(n as u32);
    (0..total).map(move |mut code| {
        let mut actions = vec![PlayerAction::ALL[0]; n];
        for slot in actions.iter_mut().rev() {
            *slot = PlayerAction::ALL[code % 4];
            code /= 4;
        }
        actions
    })
}

/// The `4^n / 2` transcripts whose class bits sum to an even number.
pub fn valid_transcripts(n: usize) -> impl Iterator<Item = Vec<PlayerAction>> {
    all_transcripts(n).filter(|a| crate::protocol::actions_valid(a))
}

/// Per-player gate superoperators averaged over the gate error distribution.
///
/// A Gaussian phase `ε ~ N(ε̄, σ²)` averages `e^{iε}` to `e^{iε̄}·e^{−σ²/2}`, so the
/// averaged gate is the deterministic gate followed by extra dephasing on the
/// coherences. Draws are independent across players, hence the average of the
/// whole round is the product of the averaged steps.
fn averaged_gates(gate: &GateErrorSpec) -> [Superop; 4] {
    let damp = (-gate.jitter_sigma().powi(2) / 2.0).exp();
    PlayerAction::ALL.map(|a| {
        let mut s = noisy_phase_gate_superop(a, gate.mean());
        s.0[1][1] *= damp;
        s.0[2][2] *= damp;
        s
    })
}

struct Walker<'a> {
    gates: [Superop; 4],
    links: &'a [Superop],
}

impl Walker<'_> {
    /// Depth-first over the remaining players, sharing the evolved prefix.
    fn walk(&self, depth: usize, state: VecState, quarter_sum: u32, acc: &mut NeumaierSum) {
        if depth == self.links.len() {
            if quarter_sum.is_multiple_of(2) {
                acc.add(error_prob(&state, quarter_sum));
            }
            return;
        }
        for (q, gate) in self.gates.iter().enumerate() {
            let next = self.links[depth].apply(&gate.apply(&state));
            self.walk(depth + 1, next, quarter_sum + q as u32, acc);
        }
    }
}

/// Probability of the wrong outcome for a valid transcript with the given final state.
fn error_prob(state: &VecState, quarter_sum: u32) -> f64 {
    let ideal = Outcome::from_bit((quarter_sum / 2) % 2 == 1);
    let rho = DensityMatrix::new_unchecked(crate::linalg::devectorize(state));
    let p_plus = x_plus_prob(&rho);
    match ideal {
        Outcome::Plus => 1.0 - p_plus,
        Outcome::Minus => p_plus,
    }
}

/// Exact mean error probability over all valid transcripts, each weighted
/// `1/4^N` and conditioned on validity.
///
/// Works for any channel mix, including those without a closed form. Gaussian
/// gate jitter is averaged exactly. The transcript tree is split into fixed
/// subtrees whose compensated sums are merged in a fixed order, so the result
/// does not depend on the thread count.
pub fn exhaustive_error_prob(n: usize, links: &[ChannelKind], gate: &GateErrorSpec) -> Result<f64> {
    if n > ORACLE_MAX_PLAYERS {
        return Err(Error::OracleTooLarge {
            n,
            max: ORACLE_MAX_PLAYERS,
        });
    }
    if n == 0 || links.len() != n {
        return Err(Error::config(format!(
            "oracle needs one link per player, got {} links for {n} players",
            links.len()
        )));
    }
    GateErrorSpec::new(gate.mean(), gate.jitter_sigma())?;
    let link_ops = links
        .iter()
        .map(|&k| make_channel(k).map(|ch| to_superop(&ch)))
        .collect::<Result<Vec<_>>>()?;
    let walker = Walker {
        gates: averaged_gates(gate),
        links: &link_ops,
    };

    let split = SPLIT_DEPTH.min(n);
    let partials: Vec<NeumaierSum> = all_transcripts(split)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|prefix| {
            let mut state = VecState::plus();
            let mut quarter_sum = 0;
            for (depth, a) in prefix.iter().enumerate() {
                state =
                    link_ops[depth].apply(&walker.gates[a.quarter_turn() as usize].apply(&state));
                quarter_sum += u32::from(a.quarter_turn());
            }
            let mut acc = NeumaierSum::default();
            walker.walk(split, state, quarter_sum, &mut acc);
            acc
        })
        .collect();
    let mut total = NeumaierSum::default();
    for part in partials {
        total.merge(part);
    }
    let n_valid = 4f64.powi(n as i32) / 2.0;
    Ok(total.value() / n_valid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{bitflip_error_prob, dephasing_error_prob, gate_error_prob_jittered};
    use crate::protocol::{actions_ideal_outcome, evolve};

    /// Straight enumeration without prefix sharing or threads.
    fn naive(links: &[ChannelKind], eps: f64) -> f64 {
        let n = links.len();
        let ops: Vec<Superop> = links
            .iter()
            .map(|&k| to_superop(&make_channel(k).unwrap()))
            .collect();
        let mut total = 0.0;
        let mut count = 0usize;
        for actions in valid_transcripts(n) {
            let rho = DensityMatrix::from_vec(&evolve(&actions, &vec![eps; n], &ops)).unwrap();
            let p_plus = x_plus_prob(&rho);
            total += match actions_ideal_outcome(&actions).unwrap() {
                Outcome::Plus => 1.0 - p_plus,
                Outcome::Minus => p_plus,
            };
            count += 1;
        }
        assert_eq!(count, 4usize.pow(n as u32) / 2);
        total / count as f64
    }

    #[test]
    fn transcripts_enumerate_in_order() {
        let all: Vec<_> = all_transcripts(2).collect();
        assert_eq!(all.len(), 16);
        assert_eq!(all[0], vec![PlayerAction::ALL[0]; 2]);
        assert_eq!(all[1], vec![PlayerAction::ALL[0], PlayerAction::ALL[1]]);
        assert_eq!(valid_transcripts(5).count(), 512);
    }

    #[test]
    fn noiseless_is_exactly_zero() {
        for n in 1..=6 {
            let got =
                exhaustive_error_prob(n, &vec![ChannelKind::Noiseless; n], &GateErrorSpec::NONE)
                    .unwrap();
            assert_eq!(got, 0.0);
        }
    }

    #[test]
    fn agrees_with_naive_enumeration() {
        let mixes = [
            vec![
                ChannelKind::BitFlip(0.1),
                ChannelKind::AmplitudeDamping(0.3),
                ChannelKind::Depolarizing(0.2),
            ],
            vec![ChannelKind::PhaseFlip(0.4); 4],
            vec![ChannelKind::BitFlip(0.2), ChannelKind::Noiseless],
        ];
        for links in mixes {
            for eps in [0.0, 0.05] {
                let gate = GateErrorSpec::deterministic(eps).unwrap();
                let got = exhaustive_error_prob(links.len(), &links, &gate).unwrap();
                assert!((got - naive(&links, eps)).abs() < 1e-14, "{links:?}");
            }
        }
    }

    #[test]
    fn closed_form_spot_checks() {
        let got = exhaustive_error_prob(
            5,
            &[ChannelKind::PhaseDamping(0.05); 5],
            &GateErrorSpec::NONE,
        )
        .unwrap();
        assert!((got - dephasing_error_prob(5, 0.05)).abs() < 1e-10);
        let got = exhaustive_error_prob(4, &[ChannelKind::BitFlip(0.1); 4], &GateErrorSpec::NONE)
            .unwrap();
        assert!((got - bitflip_error_prob(4, 0.1)).abs() < 1e-10);
        let links = [
            ChannelKind::PhaseDamping(0.1),
            ChannelKind::PhaseDamping(0.2),
            ChannelKind::PhaseDamping(0.3),
        ];
        let got = exhaustive_error_prob(3, &links, &GateErrorSpec::NONE).unwrap();
        assert!((got - 0.248).abs() < 1e-10);
    }

    #[test]
    fn jitter_is_averaged_exactly() {
        let gate = GateErrorSpec::new(0.04, 0.05).unwrap();
        let got = exhaustive_error_prob(4, &[ChannelKind::Noiseless; 4], &gate).unwrap();
        assert!((got - gate_error_prob_jittered(4, 0.04, 0.05)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(
            exhaustive_error_prob(11, &[ChannelKind::Noiseless; 11], &GateErrorSpec::NONE),
            Err(Error::OracleTooLarge { n: 11, max: 10 })
        );
        assert!(
            exhaustive_error_prob(3, &[ChannelKind::Noiseless; 2], &GateErrorSpec::NONE).is_err()
        );
        assert!(
            exhaustive_error_prob(2, &[ChannelKind::BitFlip(3.0); 2], &GateErrorSpec::NONE)
                .is_err()
        );
    }

    #[test]
    fn thread_count_does_not_change_result() {
        let links = [ChannelKind::AmplitudeDamping(0.17); 7];
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| exhaustive_error_prob(7, &links, &GateErrorSpec::NONE).unwrap())
        };
        assert_eq!(run(1).to_bits(), run(3).to_bits());
    }

    #[test]
    fn neumaier_recovers_small_terms() {
        let mut s = NeumaierSum::default();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }
}
