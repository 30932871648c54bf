//! Single-qubit noise channels and the players' phase gates.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{Complex, DensityMatrix, Mat2, Superop, I, ONE, ZERO};

/// Completeness tolerance for `Σ A†A = I`.
pub const COMPLETENESS_TOL: f64 = 1e-12;

/// The noise model of one link between consecutive players.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelKind {
    Noiseless,
    /// `ρ ↦ (1−p)ρ + p·A0ρA0 + p·A1ρA1` with `A0 = |0⟩⟨0|`, `A1 = |1⟩⟨1|`.
    PhaseDamping(f64),
    /// `ρ ↦ (1−p)ρ + (p/2)·tr(ρ)·I`.
    Depolarizing(f64),
    /// `ρ ↦ (1−p)ρ + p·XρX`.
    BitFlip(f64),
    /// `ρ ↦ (1−p)ρ + p·ZρZ`.
    PhaseFlip(f64),
    /// Decay `|1⟩ → |0⟩` with probability γ.
    AmplitudeDamping(f64),
}

impl ChannelKind {
    pub const NAMES: [&'static str; 6] = [
        "noiseless",
        "dephasing",
        "depolarizing",
        "bit-flip",
        "phase-flip",
        "amplitude-damping",
    ];

    /// Builds a kind from its name and parameter. `noiseless` ignores `param`.
    pub fn from_name(name: &str, param: f64) -> Result<Self> {
        let kind = match name {
            "noiseless" | "none" => ChannelKind::Noiseless,
            "dephasing" | "phase-damping" => ChannelKind::PhaseDamping(param),
            "depolarizing" => ChannelKind::Depolarizing(param),
            "bit-flip" | "bitflip" => ChannelKind::BitFlip(param),
            "phase-flip" | "phaseflip" => ChannelKind::PhaseFlip(param),
            "amplitude-damping" => ChannelKind::AmplitudeDamping(param),
            other => {
                return Err(Error::config(format!(
                    "unknown channel '{other}', expected one of {}",
                    Self::NAMES.join(", ")
                )))
            }
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChannelKind::Noiseless => "noiseless",
            ChannelKind::PhaseDamping(_) => "dephasing",
            ChannelKind::Depolarizing(_) => "depolarizing",
            ChannelKind::BitFlip(_) => "bit-flip",
            ChannelKind::PhaseFlip(_) => "phase-flip",
            ChannelKind::AmplitudeDamping(_) => "amplitude-damping",
        }
    }

    /// The channel parameter (`p`, or `γ` for amplitude damping); 0 when noiseless.
    pub fn param(&self) -> f64 {
        match *self {
            ChannelKind::Noiseless => 0.0,
            ChannelKind::PhaseDamping(p)
            | ChannelKind::Depolarizing(p)
            | ChannelKind::BitFlip(p)
            | ChannelKind::PhaseFlip(p)
            | ChannelKind::AmplitudeDamping(p) => p,
        }
    }

    /// True when the channel is the identity map (noiseless, or parameter 0).
    pub fn is_identity(&self) -> bool {
        self.param() == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let (field, bound) = match self {
            ChannelKind::Noiseless => return Ok(()),
            ChannelKind::AmplitudeDamping(_) => ("gamma", "γ ∈ [0,1]"),
            _ => ("p", "p ∈ [0,1]"),
        };
        let value = self.param();
        if (0.0..=1.0).contains(&value) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                field,
                value,
                bound,
            })
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelKind::Noiseless => f.write_str("noiseless"),
            other => write!(f, "{}({})", other.name(), other.param()),
        }
    }
}

/// Parses `name` or `name(param)`, e.g. `bit-flip(0.1)`.
impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.split_once('(') {
            Some((name, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::config(format!("malformed channel '{s}'")))?;
                let param: f64 = inner
                    .trim()
                    .parse()
                    .map_err(|_| Error::config(format!("malformed channel parameter in '{s}'")))?;
                ChannelKind::from_name(name.trim(), param)
            }
            None if s == "noiseless" || s == "none" => Ok(ChannelKind::Noiseless),
            None => Err(Error::config(format!(
                "channel '{s}' needs a parameter, e.g. {s}(0.1)"
            ))),
        }
    }
}

/// A channel in Kraus form, `ρ ↦ Σ_k A_k ρ A_k†`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    ops: Vec<Mat2>,
    kind: ChannelKind,
}

impl KrausChannel {
    /// Checks `1 ≤ |ops| ≤ 4` and completeness within [`COMPLETENESS_TOL`].
    pub fn new(ops: Vec<Mat2>, kind: ChannelKind) -> Result<Self> {
        let ch = KrausChannel::new_unchecked(ops, kind)?;
        let defect = ch.completeness_defect();
        if defect > COMPLETENESS_TOL {
            return Err(Error::Incomplete { defect });
        }
        Ok(ch)
    }

    /// Skips the completeness check. Used to inject faults into the invariant
    /// battery; channels built this way are not trace preserving in general.
    pub fn new_unchecked(ops: Vec<Mat2>, kind: ChannelKind) -> Result<Self> {
        if ops.is_empty() || ops.len() > 4 {
            return Err(Error::KrausCount(ops.len()));
        }
        Ok(KrausChannel { ops, kind })
    }

    pub fn ops(&self) -> &[Mat2] {
        &self.ops
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    /// `max |Σ A_k†A_k − I|` over entries.
    pub fn completeness_defect(&self) -> f64 {
        let sum = self
            .ops
            .iter()
            .fold(Mat2::zero(), |acc, a| acc + a.adjoint() * *a);
        sum.max_abs_diff(&Mat2::identity())
    }
}

fn real(x: f64) -> Complex {
    Complex::new(x, 0.0)
}

pub fn make_channel(kind: ChannelKind) -> Result<KrausChannel> {
    kind.validate()?;
    let id = Mat2::identity();
    let ops = match kind {
        ChannelKind::Noiseless => vec![id],
        ChannelKind::PhaseDamping(p) => {
            let s = real(p.sqrt());
            vec![
                id.scale(real((1.0 - p).sqrt())),
                Mat2::diag(s, ZERO),
                Mat2::diag(ZERO, s),
            ]
        }
        ChannelKind::Depolarizing(p) => {
            let s = real((p / 4.0).sqrt());
            vec![
                id.scale(real((1.0 - 0.75 * p).sqrt())),
                Mat2::pauli_x().scale(s),
                Mat2::pauli_y().scale(s),
                Mat2::pauli_z().scale(s),
            ]
        }
        ChannelKind::BitFlip(p) => vec![
            id.scale(real((1.0 - p).sqrt())),
            Mat2::pauli_x().scale(real(p.sqrt())),
        ],
        ChannelKind::PhaseFlip(p) => vec![
            id.scale(real((1.0 - p).sqrt())),
            Mat2::pauli_z().scale(real(p.sqrt())),
        ],
        ChannelKind::AmplitudeDamping(g) => vec![
            Mat2::diag(ONE, real((1.0 - g).sqrt())),
            Mat2::new(ZERO, real(g.sqrt()), ZERO, ZERO),
        ],
    };
    KrausChannel::new(ops, kind)
}

/// Liouville form `Σ_k A_k ⊗ conj(A_k)`.
pub fn to_superop(ch: &KrausChannel) -> Superop {
    ch.ops
        .iter()
        .fold(Superop::zero(), |acc, a| acc + a.kron(&a.conj()))
}

pub fn apply_kraus(ch: &KrausChannel, rho: &DensityMatrix) -> DensityMatrix {
    let m = rho.as_mat();
    let out = ch
        .ops
        .iter()
        .fold(Mat2::zero(), |acc, a| acc + *a * *m * a.adjoint());
    DensityMatrix::new_unchecked(out)
}

/// A player's phase choice `φ = q·π/2` with quarter turn `q ∈ {0,1,2,3}`.
///
/// The class bit `q mod 2` is announced publicly; the secret bit `⌊q/2⌋` picks
/// the phase within the class, so that `e^{iφZ} = (−1)^s (iZ)^p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlayerAction(u8);

impl PlayerAction {
    pub const ALL: [PlayerAction; 4] = [
        PlayerAction(0),
        PlayerAction(1),
        PlayerAction(2),
        PlayerAction(3),
    ];

    pub fn new(quarter_turn: u8) -> Result<Self> {
        if quarter_turn < 4 {
            Ok(PlayerAction(quarter_turn))
        } else {
            Err(Error::QuarterTurn(quarter_turn))
        }
    }

    pub fn from_bits(class_bit: bool, secret_bit: bool) -> Self {
        PlayerAction(class_bit as u8 + 2 * secret_bit as u8)
    }

    pub fn quarter_turn(self) -> u8 {
        self.0
    }

    pub fn class_bit(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn secret_bit(self) -> bool {
        self.0 >> 1 == 1
    }

    /// Phase in radians.
    pub fn phase(self) -> f64 {
        f64::from(self.0) * FRAC_PI_2
    }

    /// `e^{iφ}` from the exact table `{1, i, −1, −i}`.
    pub fn phase_factor(self) -> Complex {
        match self.0 {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        }
    }
}

impl fmt::Display for PlayerAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "0",
            1 => "π/2",
            2 => "π",
            _ => "3π/2",
        })
    }
}

/// `diag(1, e^{iφ}, e^{−iφ}, 1)`: multiplies `ρ01` by `e^{iφ}` and `ρ10` by its
/// conjugate. Entries are exact.
pub fn phase_gate_superop(action: PlayerAction) -> Superop {
    let z = action.phase_factor();
    Superop::diag([ONE, z, z.conj(), ONE])
}

/// Phase gate with an additive phase error `eps`, `diag(1, e^{i(φ+ε)}, e^{−i(φ+ε)}, 1)`.
/// With `eps == 0` the result equals [`phase_gate_superop`] bit for bit.
pub fn noisy_phase_gate_superop(action: PlayerAction, eps: f64) -> Superop {
    let z = action.phase_factor() * Complex::cis(eps);
    Superop::diag([ONE, z, z.conj(), ONE])
}

/// Product of a sequence of superoperators; the first element is applied first.
pub fn compose(sequence: &[Superop]) -> Result<Superop> {
    let (first, rest) = sequence.split_first().ok_or(Error::EmptySequence)?;
    Ok(rest.iter().fold(*first, |acc, s| *s * acc))
}
