//! Statevector simulation with shot sampling and stochastic Pauli noise,
//! plus the two interferometric overlap protocols.
//!
//! Noise model: after every single-qubit gate one of {X,Y,Z} is inserted on
//! its qubit with probability p1/3 each; after every CNOT one of the fifteen
//! non-identity two-qubit Paulis with probability p2/15 each. Shot sampling
//! splits exactly into error-free shots, drawn in one binomial batch from
//! the cached noiseless distribution, and erroneous shots, each replayed
//! from a checkpoint just before its first error site. The split reproduces
//! the one-trajectory-per-shot distribution exactly.

use super::{Circuit, CircuitError, Gate, PrepMode, MAX_SIM_QUBITS};
use crate::rng::derive_rng;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Depolarizing strengths per gate class.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
}

impl NoiseModel {
    pub fn new(p1: f64, p2: f64) -> Result<Self, CircuitError> {
        if !(0.0..=1.0).contains(&p1) || !(0.0..=1.0).contains(&p2) {
            return Err(CircuitError::BadNoise);
        }
        Ok(NoiseModel { p1, p2 })
    }

    pub fn is_zero(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0
    }
}

/// Sampling budget of a simulation call.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShotSpec {
    /// Exact Born probabilities.
    Analytic,
    /// Empirical counts from this many sampled shots.
    Shots(u64),
}

#[derive(Clone, Debug)]
pub enum SimResult {
    Probabilities(Vec<f64>),
    Counts {
        counts: BTreeMap<u32, u64>,
        shots: u64,
    },
}

impl SimResult {
    /// Probability (exact or empirical) of one outcome mask.
    pub fn probability_of(&self, mask: u32) -> f64 {
        match self {
            SimResult::Probabilities(p) => p.get(mask as usize).copied().unwrap_or(0.0),
            SimResult::Counts { counts, shots } => {
                *counts.get(&mask).unwrap_or(&0) as f64 / *shots as f64
            }
        }
    }

    pub fn shots(&self) -> Option<u64> {
        match self {
            SimResult::Probabilities(_) => None,
            SimResult::Counts { shots, .. } => Some(*shots),
        }
    }
}

/// An overlap probability with its sampling pedigree; analytic estimates
/// carry `shots = None` and zero standard error.
#[derive(Clone, Copy, Debug)]
pub struct OverlapEstimate {
    pub probability: f64,
    pub shots: Option<u64>,
    pub std_error: f64,
}

impl OverlapEstimate {
    fn from_probability(p: f64, shots: Option<u64>) -> Self {
        let std_error = match shots {
            Some(s) if s > 0 => (p * (1.0 - p) / s as f64).sqrt(),
            _ => 0.0,
        };
        OverlapEstimate {
            probability: p,
            shots,
            std_error,
        }
    }
}

#[derive(Clone, Copy)]
enum PauliOp {
    X,
    Y,
    Z,
}

fn apply_gate(state: &mut [Complex64], gate: &Gate) {
    match *gate {
        Gate::H(q) => {
            let bit = 1usize << q;
            let f = std::f64::consts::FRAC_1_SQRT_2;
            for i in 0..state.len() {
                if i & bit == 0 {
                    let (a, b) = (state[i], state[i | bit]);
                    state[i] = (a + b) * f;
                    state[i | bit] = (a - b) * f;
                }
            }
        }
        Gate::X(q) => {
            let bit = 1usize << q;
            for i in 0..state.len() {
                if i & bit == 0 {
                    state.swap(i, i | bit);
                }
            }
        }
        Gate::S(q) => phase_on_bit(state, q, Complex64::new(0.0, 1.0)),
        Gate::Sdg(q) => phase_on_bit(state, q, Complex64::new(0.0, -1.0)),
        Gate::RZ { q, angle } => {
            let bit = 1usize << q;
            let minus = Complex64::from_polar(1.0, -angle / 2.0);
            let plus = Complex64::from_polar(1.0, angle / 2.0);
            for (i, amp) in state.iter_mut().enumerate() {
                *amp *= if i & bit == 0 { minus } else { plus };
            }
        }
        Gate::CNOT { control, target } => {
            let cbit = 1usize << control;
            let tbit = 1usize << target;
            for i in 0..state.len() {
                if i & cbit != 0 && i & tbit == 0 {
                    state.swap(i, i | tbit);
                }
            }
        }
        Gate::GPHASE { angle } => {
            let f = Complex64::from_polar(1.0, angle);
            for amp in state.iter_mut() {
                *amp *= f;
            }
        }
        Gate::MeasureAll => {}
    }
}

fn phase_on_bit(state: &mut [Complex64], q: usize, factor: Complex64) {
    let bit = 1usize << q;
    for (i, amp) in state.iter_mut().enumerate() {
        if i & bit != 0 {
            *amp *= factor;
        }
    }
}

fn apply_pauli(state: &mut [Complex64], q: usize, op: PauliOp) {
    match op {
        PauliOp::X => apply_gate(state, &Gate::X(q)),
        PauliOp::Z => phase_on_bit(state, q, Complex64::new(-1.0, 0.0)),
        PauliOp::Y => {
            let bit = 1usize << q;
            let i_up = Complex64::new(0.0, 1.0);
            let i_dn = Complex64::new(0.0, -1.0);
            for i in 0..state.len() {
                if i & bit == 0 {
                    let (a, b) = (state[i], state[i | bit]);
                    state[i] = i_dn * b;
                    state[i | bit] = i_up * a;
                }
            }
        }
    }
}

/// Exact statevector after the circuit, starting from a basis state.
pub fn statevector_from(circuit: &Circuit, initial: u32) -> Result<Vec<Complex64>, CircuitError> {
    let width = circuit.width();
    if width > MAX_SIM_QUBITS {
        return Err(CircuitError::WidthTooLarge(width));
    }
    if u64::from(initial) >> width != 0 {
        return Err(CircuitError::MaskTooWide {
            mask: initial,
            width,
        });
    }
    let mut state = vec![Complex64::new(0.0, 0.0); 1 << width];
    state[initial as usize] = Complex64::new(1.0, 0.0);
    for gate in circuit.gates() {
        apply_gate(&mut state, gate);
    }
    Ok(state)
}

/// Exact statevector from the all-zeros state.
pub fn statevector(circuit: &Circuit) -> Result<Vec<Complex64>, CircuitError> {
    statevector_from(circuit, 0)
}

enum SiteKind {
    One(usize),
    Two(usize, usize),
}

struct NoiseSite {
    gate_index: usize,
    kind: SiteKind,
}

fn noise_sites(circuit: &Circuit) -> Vec<NoiseSite> {
    circuit
        .gates()
        .iter()
        .enumerate()
        .filter_map(|(gate_index, g)| match *g {
            Gate::H(q) | Gate::X(q) | Gate::S(q) | Gate::Sdg(q) => Some(NoiseSite {
                gate_index,
                kind: SiteKind::One(q),
            }),
            Gate::RZ { q, .. } => Some(NoiseSite {
                gate_index,
                kind: SiteKind::One(q),
            }),
            Gate::CNOT { control, target } => Some(NoiseSite {
                gate_index,
                kind: SiteKind::Two(control, target),
            }),
            _ => None,
        })
        .collect()
}

const PAULI_CHOICES: [PauliOp; 3] = [PauliOp::X, PauliOp::Y, PauliOp::Z];

fn apply_site_error<R: Rng>(state: &mut [Complex64], site: &NoiseSite, rng: &mut R) {
    match site.kind {
        SiteKind::One(q) => {
            let op = PAULI_CHOICES[rng.gen_range(0..3)];
            apply_pauli(state, q, op);
        }
        SiteKind::Two(a, b) => {
            // one of the 15 non-identity pairs (P, Q), identity excluded
            let idx = rng.gen_range(1..16);
            if idx / 4 > 0 {
                apply_pauli(state, a, PAULI_CHOICES[idx / 4 - 1]);
            }
            if idx % 4 > 0 {
                apply_pauli(state, b, PAULI_CHOICES[idx % 4 - 1]);
            }
        }
    }
}

fn sample_mask(cumulative: &[f64], u: f64) -> u32 {
    let idx = cumulative.partition_point(|&c| c <= u);
    idx.min(cumulative.len() - 1) as u32
}

fn merge_counts(mut a: BTreeMap<u32, u64>, b: BTreeMap<u32, u64>) -> BTreeMap<u32, u64> {
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

const CHECKPOINT_WIDTH_CAP: usize = 12;

/// Runs the circuit. Analytic mode returns the exact Born distribution;
/// shot mode samples counts; with a noise model each shot is one stochastic
/// Pauli trajectory, seeded from (seed, stream, shot index).
pub fn simulate(
    circuit: &Circuit,
    noise: Option<&NoiseModel>,
    shots: ShotSpec,
    seed: u64,
) -> Result<SimResult, CircuitError> {
    let width = circuit.width();
    if width > MAX_SIM_QUBITS {
        return Err(CircuitError::WidthTooLarge(width));
    }
    if let Some(nm) = noise {
        NoiseModel::new(nm.p1, nm.p2)?;
    }
    let noisy = noise.map(|n| !n.is_zero()).unwrap_or(false);
    let shot_count = match shots {
        ShotSpec::Analytic => {
            if noisy {
                return Err(CircuitError::NoisyAnalytic);
            }
            None
        }
        ShotSpec::Shots(0) => return Err(CircuitError::BadShots),
        ShotSpec::Shots(s) => Some(s),
    };

    // noiseless pass, checkpointing before-error replay states when noisy
    let keep_checkpoints = noisy && width <= CHECKPOINT_WIDTH_CAP;
    let mut state = vec![Complex64::new(0.0, 0.0); 1 << width];
    state[0] = Complex64::new(1.0, 0.0);
    let mut checkpoints: Vec<Vec<Complex64>> = Vec::new();
    if keep_checkpoints {
        checkpoints.push(state.clone());
    }
    for gate in circuit.gates() {
        apply_gate(&mut state, gate);
        if keep_checkpoints {
            checkpoints.push(state.clone());
        }
    }
    let probs: Vec<f64> = state.iter().map(|a| a.norm_sqr()).collect();

    let Some(total_shots) = shot_count else {
        return Ok(SimResult::Probabilities(probs));
    };

    let mut cumulative = probs.clone();
    let mut acc = 0.0;
    for c in &mut cumulative {
        acc += *c;
        *c = acc;
    }

    let sites = if noisy {
        noise_sites(circuit)
    } else {
        Vec::new()
    };
    let (n1, n2) = sites.iter().fold((0u32, 0u32), |(a, b), s| match s.kind {
        SiteKind::One(_) => (a + 1, b),
        SiteKind::Two(..) => (a, b + 1),
    });
    let nm = noise.copied().unwrap_or(NoiseModel { p1: 0.0, p2: 0.0 });
    let p_clean = (1.0 - nm.p1).powi(n1 as i32) * (1.0 - nm.p2).powi(n2 as i32);
    let clean_shots = if noisy {
        let mut rng = derive_rng(seed, "noise-split", 0);
        Binomial::new(total_shots, p_clean)
            .expect("valid binomial")
            .sample(&mut rng)
    } else {
        total_shots
    };

    let clean_counts: BTreeMap<u32, u64> = (0..clean_shots)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_rng(seed, "shot", i);
            sample_mask(&cumulative, rng.gen::<f64>())
        })
        .fold(BTreeMap::new, |mut m, mask| {
            *m.entry(mask).or_insert(0u64) += 1;
            m
        })
        .reduce(BTreeMap::new, merge_counts);

    let dirty_shots = total_shots - clean_shots;
    let dirty_counts: BTreeMap<u32, u64> = (0..dirty_shots)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_rng(seed, "noise-shot", i);
            // error pattern over sites, conditioned on at least one error
            let mut pattern: Vec<usize> = Vec::new();
            while pattern.is_empty() {
                for (s, site) in sites.iter().enumerate() {
                    let p = match site.kind {
                        SiteKind::One(_) => nm.p1,
                        SiteKind::Two(..) => nm.p2,
                    };
                    if rng.gen::<f64>() < p {
                        pattern.push(s);
                    }
                }
            }
            let first_gate = sites[pattern[0]].gate_index;
            let mut st = if keep_checkpoints {
                checkpoints[first_gate + 1].clone()
            } else {
                let mut st = vec![Complex64::new(0.0, 0.0); 1 << width];
                st[0] = Complex64::new(1.0, 0.0);
                for gate in &circuit.gates()[..=first_gate] {
                    apply_gate(&mut st, gate);
                }
                st
            };
            let mut pattern_iter = pattern.iter().peekable();
            apply_site_error(&mut st, &sites[pattern[0]], &mut rng);
            pattern_iter.next();
            for (g, gate) in circuit.gates().iter().enumerate().skip(first_gate + 1) {
                apply_gate(&mut st, gate);
                if let Some(&&s) = pattern_iter.peek() {
                    if sites[s].gate_index == g {
                        apply_site_error(&mut st, &sites[s], &mut rng);
                        pattern_iter.next();
                    }
                }
            }
            let mut acc = 0.0;
            let u = rng.gen::<f64>();
            let mut outcome = (st.len() - 1) as u32;
            for (idx, amp) in st.iter().enumerate() {
                acc += amp.norm_sqr();
                if u < acc {
                    outcome = idx as u32;
                    break;
                }
            }
            outcome
        })
        .fold(BTreeMap::new, |mut m, mask| {
            *m.entry(mask).or_insert(0u64) += 1;
            m
        })
        .reduce(BTreeMap::new, merge_counts);

    Ok(SimResult::Counts {
        counts: merge_counts(clean_counts, dirty_counts),
        shots: total_shots,
    })
}

/// Self-inverting interferometry: prepare, evolve, un-prepare the second
/// state, and read the all-zeros return probability, which estimates
/// `|<psi2| evolution |psi1>|^2`.
pub fn mirror_probability(
    prep1: &Circuit,
    evolution: &Circuit,
    prep2: &Circuit,
    noise: Option<&NoiseModel>,
    shots: ShotSpec,
    seed: u64,
) -> Result<OverlapEstimate, CircuitError> {
    let width = prep1.width();
    for c in [evolution, prep2] {
        if c.width() != width {
            return Err(CircuitError::WidthMismatch {
                a: width,
                b: c.width(),
            });
        }
    }
    let mut circuit = Circuit::new(width);
    circuit.extend(prep1)?;
    circuit.extend(evolution)?;
    circuit.extend(&prep2.adjoint()?)?;
    circuit.push(Gate::MeasureAll)?;
    let result = simulate(&circuit, noise, shots, seed)?;
    Ok(OverlapEstimate::from_probability(
        result.probability_of(0),
        result.shots(),
    ))
}

/// Two-register overlap test: both states prepared side by side, transversal
/// CNOTs from the first register onto the second, Hadamards on the first,
/// then the failure parity of the pairwise AND gives `|<psi1|psi2>|^2 =
/// 1 - 2 P_fail`, clamped to [0, 1].
pub fn destructive_swap_probability(
    state1: &Circuit,
    state2: &Circuit,
    noise: Option<&NoiseModel>,
    shots: ShotSpec,
    seed: u64,
) -> Result<OverlapEstimate, CircuitError> {
    let n = state1.width();
    if state2.width() != n {
        return Err(CircuitError::WidthMismatch {
            a: n,
            b: state2.width(),
        });
    }
    if 2 * n > MAX_SIM_QUBITS {
        return Err(CircuitError::WidthTooLarge(2 * n));
    }
    let mut circuit = Circuit::new(2 * n);
    circuit.extend(&state1.shifted(0, 2 * n)?)?;
    circuit.extend(&state2.shifted(n, 2 * n)?)?;
    for i in 0..n {
        circuit.push(Gate::CNOT {
            control: i,
            target: i + n,
        })?;
    }
    for i in 0..n {
        circuit.push(Gate::H(i))?;
    }
    circuit.push(Gate::MeasureAll)?;
    let result = simulate(&circuit, noise, shots, seed)?;
    let low = (1u32 << n) - 1;
    let fail = |mask: u32| ((mask & low) & (mask >> n)).count_ones() % 2 == 1;
    let (p_fail, used) = match &result {
        SimResult::Probabilities(p) => (
            p.iter()
                .enumerate()
                .filter(|&(m, _)| fail(m as u32))
                .map(|(_, &v)| v)
                .sum::<f64>(),
            None,
        ),
        SimResult::Counts { counts, shots } => (
            counts
                .iter()
                .filter(|&(&m, _)| fail(m))
                .map(|(_, &c)| c)
                .sum::<u64>() as f64
                / *shots as f64,
            Some(*shots),
        ),
    };
    let overlap = (1.0 - 2.0 * p_fail).clamp(0.0, 1.0);
    let std_error = match used {
        Some(s) => 2.0 * (p_fail * (1.0 - p_fail) / s as f64).sqrt(),
        None => 0.0,
    };
    Ok(OverlapEstimate {
        probability: overlap,
        shots: used,
        std_error,
    })
}

/// Convenience wrapper building the interferometric prep states of one
/// (target, reference) pair.
pub fn prep_pair(
    target: u32,
    reference: u32,
    n: usize,
) -> Result<(Circuit, Circuit, Circuit), CircuitError> {
    Ok((
        super::prep_circuit(target, PrepMode::Hot, reference, n)?,
        super::prep_circuit(target, PrepMode::Plus, reference, n)?,
        super::prep_circuit(target, PrepMode::IPhase, reference, n)?,
    ))
}
