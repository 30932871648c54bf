//! Final states of the two-player round under bit-flip noise, for every valid
//! pair of phases.

use crate::channels::{make_channel, to_superop, ChannelKind, PlayerAction};
use crate::error::Result;
use crate::linalg::{x_minus_prob, x_plus_prob, DensityMatrix};
use crate::protocol::{actions_ideal_outcome, evolve, Outcome};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Table1Row {
    pub phi1: PlayerAction,
    pub phi2: PlayerAction,
    /// The final state is `½((1, a), (a, 1))`.
    pub a: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    /// Outcome expected from `φ1 + φ2`.
    pub expected: Outcome,
    pub p_error: f64,
}

/// Row order: the four Class-0 pairs, then the four Class-1 pairs.
const ROWS: [(u8, u8); 8] = [
    (0, 0),
    (0, 2),
    (2, 0),
    (2, 2),
    (1, 1),
    (1, 3),
    (3, 1),
    (3, 3),
];

/// Evolves each valid two-player transcript through bit-flip links with
/// parameter `p` and reads `a` and the outcome probabilities off the final state.
pub fn table1(p: f64) -> Result<Vec<Table1Row>> {
    let link = to_superop(&make_channel(ChannelKind::BitFlip(p))?);
    ROWS.iter()
        .map(|&(q1, q2)| {
            let actions = [PlayerAction::new(q1)?, PlayerAction::new(q2)?];
            let v = evolve(&actions, &[0.0, 0.0], &[link, link]);
            let rho = DensityMatrix::from_vec(&v)?;
            let expected = actions_ideal_outcome(&actions).expect("table rows are valid rounds");
            let (p_plus, p_minus) = (x_plus_prob(&rho), x_minus_prob(&rho));
            Ok(Table1Row {
                phi1: actions[0],
                phi2: actions[1],
                a: 2.0 * rho.as_mat().get(0, 1).re,
                p_plus,
                p_minus,
                expected,
                p_error: match expected {
                    Outcome::Plus => p_minus,
                    Outcome::Minus => p_plus,
                },
            })
        })
        .collect()
}
