//! Gate-level circuits: fixed-depth evolution synthesis for commuting cores,
//! product-formula synthesis for general operators, interferometric state
//! preparation, adjoints and OpenQASM export.
//!
//! Gate set: {H, X, S, Sdg, RZ, CNOT, GPHASE, MEASURE_ALL}. Qubit indices are
//! 0-based (qubit q carries vertex q+1). The global phase gate keeps analytic
//! statevectors exact; it is physically inert in any measured probability.

use crate::operator::{keys_commute, Key, PauliSum, IDENTITY};
use std::fmt::Write as _;
use thiserror::Error;

pub mod simulate;

pub use simulate::{
    destructive_swap_probability, mirror_probability, prep_pair, simulate, NoiseModel,
    OverlapEstimate, ShotSpec, SimResult,
};

/// Hard cap on simulated register width.
pub const MAX_SIM_QUBITS: usize = 24;

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("qubit index {q} out of range for width {width}")]
    IndexOutOfRange { q: usize, width: usize },
    #[error("gate angle must be finite")]
    BadAngle,
    #[error("terms {a} and {b} do not commute")]
    NonCommuting { a: String, b: String },
    #[error("superposition preparation needs target != reference")]
    TargetEqualsReference,
    #[error("state mask {mask:#x} does not fit in width {width}")]
    MaskTooWide { mask: u32, width: usize },
    #[error("circuit widths differ: {a} vs {b}")]
    WidthMismatch { a: usize, b: usize },
    #[error("register of {0} qubits exceeds the simulation cap of {MAX_SIM_QUBITS}")]
    WidthTooLarge(usize),
    #[error("shot count must be positive")]
    BadShots,
    #[error("noise probabilities must lie in [0, 1]")]
    BadNoise,
    #[error("noisy simulation requires shot sampling, not analytic mode")]
    NoisyAnalytic,
    #[error("cannot take the adjoint of a measured circuit")]
    AdjointOfMeasured,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    S(usize),
    Sdg(usize),
    RZ { q: usize, angle: f64 },
    CNOT { control: usize, target: usize },
    GPHASE { angle: f64 },
    MeasureAll,
}

impl Gate {
    fn adjoint(&self) -> Gate {
        match *self {
            Gate::S(q) => Gate::Sdg(q),
            Gate::Sdg(q) => Gate::S(q),
            Gate::RZ { q, angle } => Gate::RZ { q, angle: -angle },
            Gate::GPHASE { angle } => Gate::GPHASE { angle: -angle },
            g => g,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    width: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(width: usize) -> Self {
        Circuit {
            width,
            gates: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        if self.is_measured() {
            return Err(CircuitError::AdjointOfMeasured);
        }
        match gate {
            Gate::H(q) | Gate::X(q) | Gate::S(q) | Gate::Sdg(q) => self.check_q(q)?,
            Gate::RZ { q, angle } => {
                self.check_q(q)?;
                if !angle.is_finite() {
                    return Err(CircuitError::BadAngle);
                }
            }
            Gate::CNOT { control, target } => {
                self.check_q(control)?;
                self.check_q(target)?;
                if control == target {
                    return Err(CircuitError::IndexOutOfRange {
                        q: target,
                        width: self.width,
                    });
                }
            }
            Gate::GPHASE { angle } => {
                if !angle.is_finite() {
                    return Err(CircuitError::BadAngle);
                }
            }
            Gate::MeasureAll => {}
        }
        self.gates.push(gate);
        Ok(())
    }

    fn check_q(&self, q: usize) -> Result<(), CircuitError> {
        if q >= self.width {
            return Err(CircuitError::IndexOutOfRange {
                q,
                width: self.width,
            });
        }
        Ok(())
    }

    pub fn is_measured(&self) -> bool {
        self.gates.last() == Some(&Gate::MeasureAll)
    }

    pub fn gate_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| !matches!(g, Gate::MeasureAll))
            .count()
    }

    pub fn cnot_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::CNOT { .. }))
            .count()
    }

    /// Reversed circuit of inverted gates; errors on measured circuits.
    pub fn adjoint(&self) -> Result<Circuit, CircuitError> {
        if self.is_measured() {
            return Err(CircuitError::AdjointOfMeasured);
        }
        Ok(Circuit {
            width: self.width,
            gates: self.gates.iter().rev().map(Gate::adjoint).collect(),
        })
    }

    /// Appends all gates of `other` (width must match, `other` unmeasured).
    pub fn extend(&mut self, other: &Circuit) -> Result<(), CircuitError> {
        if self.width != other.width {
            return Err(CircuitError::WidthMismatch {
                a: self.width,
                b: other.width,
            });
        }
        for &g in &other.gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// Same gates acting on qubits shifted upward into a wider register.
    pub fn shifted(&self, offset: usize, new_width: usize) -> Result<Circuit, CircuitError> {
        let mut out = Circuit::new(new_width);
        for &g in &self.gates {
            let shifted = match g {
                Gate::H(q) => Gate::H(q + offset),
                Gate::X(q) => Gate::X(q + offset),
                Gate::S(q) => Gate::S(q + offset),
                Gate::Sdg(q) => Gate::Sdg(q + offset),
                Gate::RZ { q, angle } => Gate::RZ {
                    q: q + offset,
                    angle,
                },
                Gate::CNOT { control, target } => Gate::CNOT {
                    control: control + offset,
                    target: target + offset,
                },
                g => g,
            };
            out.push(shifted)?;
        }
        Ok(out)
    }

    /// OpenQASM 2.0 text; the global phase is annotated as a comment since
    /// the format cannot express it.
    pub fn to_qasm(&self) -> String {
        let mut out = String::new();
        out.push_str("OPENQASM 2.0;\n");
        out.push_str("include \"qelib1.inc\";\n");
        let _ = writeln!(out, "qreg q[{}];", self.width);
        let _ = writeln!(out, "creg c[{}];", self.width);
        for g in &self.gates {
            match *g {
                Gate::H(q) => {
                    let _ = writeln!(out, "h q[{q}];");
                }
                Gate::X(q) => {
                    let _ = writeln!(out, "x q[{q}];");
                }
                Gate::S(q) => {
                    let _ = writeln!(out, "s q[{q}];");
                }
                Gate::Sdg(q) => {
                    let _ = writeln!(out, "sdg q[{q}];");
                }
                Gate::RZ { q, angle } => {
                    let _ = writeln!(out, "rz({angle:.15e}) q[{q}];");
                }
                Gate::CNOT { control, target } => {
                    let _ = writeln!(out, "cx q[{control}],q[{target}];");
                }
                Gate::GPHASE { angle } => {
                    let _ = writeln!(out, "// global phase: exp(i*{angle:.15e})");
                }
                Gate::MeasureAll => {
                    out.push_str("measure q -> c;\n");
                }
            }
        }
        out
    }
}

/// Appends the compiled exponential `exp(-i * angle * W(key))` of one
/// canonical string: basis changes into Z, parity ladder onto the highest
/// active qubit, the RZ, and the mirrored un-computation.
fn append_string_exponential(circuit: &mut Circuit, key: Key, angle: f64) -> Result<(), CircuitError> {
    let (x, z) = key;
    if key == IDENTITY {
        return circuit.push(Gate::GPHASE { angle: -angle });
    }
    let active: Vec<usize> = (0..circuit.width)
        .filter(|q| (x | z) >> q & 1 == 1)
        .collect();
    for &q in &active {
        match (x >> q & 1, z >> q & 1) {
            (1, 0) => circuit.push(Gate::H(q))?,
            (1, 1) => {
                circuit.push(Gate::Sdg(q))?;
                circuit.push(Gate::H(q))?;
            }
            _ => {}
        }
    }
    for pair in active.windows(2) {
        circuit.push(Gate::CNOT {
            control: pair[0],
            target: pair[1],
        })?;
    }
    let top = *active.last().expect("non-identity string has active qubits");
    circuit.push(Gate::RZ {
        q: top,
        angle: 2.0 * angle,
    })?;
    for pair in active.windows(2).rev() {
        circuit.push(Gate::CNOT {
            control: pair[0],
            target: pair[1],
        })?;
    }
    for &q in active.iter().rev() {
        match (x >> q & 1, z >> q & 1) {
            (1, 0) => circuit.push(Gate::H(q))?,
            (1, 1) => {
                circuit.push(Gate::H(q))?;
                circuit.push(Gate::S(q))?;
            }
            _ => {}
        }
    }
    Ok(())
}

/// Exact evolution `exp(-i h t)` for a mutually commuting operator, one
/// exponential per term in canonical order; the identity term becomes a
/// global phase. The gate count depends only on the term support, never on
/// `t`.
pub fn synthesize_evolution(h_sum: &PauliSum, n: usize, t: f64) -> Result<Circuit, CircuitError> {
    let keys: Vec<Key> = h_sum.keys().collect();
    for (i, &a) in keys.iter().enumerate() {
        for &b in &keys[..i] {
            if !keys_commute(a, b) {
                return Err(CircuitError::NonCommuting {
                    a: crate::operator::key_label(a, n),
                    b: crate::operator::key_label(b, n),
                });
            }
        }
    }
    let mut circuit = Circuit::new(n);
    for (key, coeff) in h_sum.terms() {
        append_string_exponential(&mut circuit, key, coeff * t)?;
    }
    Ok(circuit)
}

/// First-order product formula for a general operator: `steps` repetitions
/// of all term exponentials at `t/steps`, terms in canonical order per step.
pub fn synthesize_trotter(
    op: &PauliSum,
    n: usize,
    t: f64,
    steps: usize,
) -> Result<Circuit, CircuitError> {
    assert!(steps >= 1, "at least one product-formula step");
    let dt = t / steps as f64;
    let mut circuit = Circuit::new(n);
    for _ in 0..steps {
        for (key, coeff) in op.terms() {
            append_string_exponential(&mut circuit, key, coeff * dt)?;
        }
    }
    Ok(circuit)
}

/// Which interferometric input to prepare.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrepMode {
    /// The basis state `|target>` itself.
    Hot,
    /// `(|reference> + |target>)/sqrt(2)`.
    Plus,
    /// `(|reference> + i|target>)/sqrt(2)`.
    IPhase,
}

/// Prepares a basis state or a two-state superposition against a reference
/// basis state: an X string, plus (for superpositions) one Hadamard on a
/// pivot bit where the two states differ and a CNOT cascade copying the
/// branch choice to the remaining differing bits.
pub fn prep_circuit(
    target: u32,
    mode: PrepMode,
    reference: u32,
    n: usize,
) -> Result<Circuit, CircuitError> {
    for &mask in &[target, reference] {
        if u64::from(mask) >> n != 0 {
            return Err(CircuitError::MaskTooWide { mask, width: n });
        }
    }
    let mut circuit = Circuit::new(n);
    if mode == PrepMode::Hot {
        for q in 0..n {
            if target >> q & 1 == 1 {
                circuit.push(Gate::X(q))?;
            }
        }
        return Ok(circuit);
    }
    let diff = target ^ reference;
    if diff == 0 {
        return Err(CircuitError::TargetEqualsReference);
    }
    // pivot on a bit set in the target when one exists, so the Hadamard
    // branch carrying the pivot is the target branch
    let (base, pivot_in_target) = if target & !reference != 0 {
        (reference, true)
    } else {
        (target, false)
    };
    let pivot = (diff & !base).trailing_zeros() as usize;
    for q in 0..n {
        if base >> q & 1 == 1 {
            circuit.push(Gate::X(q))?;
        }
    }
    circuit.push(Gate::H(pivot))?;
    for q in 0..n {
        if q != pivot && diff >> q & 1 == 1 {
            circuit.push(Gate::CNOT {
                control: pivot,
                target: q,
            })?;
        }
    }
    if mode == PrepMode::IPhase {
        if pivot_in_target {
            circuit.push(Gate::S(pivot))?;
        } else {
            // the pivot-one branch is the reference; phase it by -i and
            // restore with a global i so the i lands on the target branch
            circuit.push(Gate::Sdg(pivot))?;
            circuit.push(Gate::GPHASE {
                angle: std::f64::consts::FRAC_PI_2,
            })?;
        }
    }
    Ok(circuit)
}
