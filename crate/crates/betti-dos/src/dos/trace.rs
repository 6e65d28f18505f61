//! Trace-signal estimation `S(t) = tr exp(-i H t)` over a sampling plan.
//!
//! Each diagonal element is reconstructed interferometrically from three
//! overlap probabilities against a reference basis state `r` that the
//! evolution leaves phase-pure:
//!
//! ```text
//! Re z = 2 p_plus  - (1 + p_hot) / 2
//! Im z = (1 + p_hot) / 2 - 2 p_cross
//! ```
//!
//! with `p_hot = |<b|U|b>|^2`, `p_plus = |<psi+|U|psi+>|^2`,
//! `p_cross = |<psi+|U|psi_i>|^2`, `psi+ = (|r> + |b>)/sqrt(2)` and
//! `psi_i = (|r> + i|b>)/sqrt(2)`. The residual reference phase
//! `exp(-i d_r t)` read off the diagonal part of the evolved operator is
//! divided out afterwards, so the sum over targets recovers the trace.

use super::{DosError, SamplingPlan, SignalMeta, TraceSignal};
use crate::cartan::KhkResult;
use crate::circuit::{
    destructive_swap_probability, mirror_probability, prep_pair, synthesize_evolution,
    synthesize_trotter, Circuit, NoiseModel, ShotSpec,
};
use crate::complex::SimplicialComplex;
use crate::operator::dense::EigenSystem;
use crate::operator::PauliSum;
use crate::rng::derive_rng;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

/// How the diagonal overlaps are measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Single register: prepare, evolve, un-prepare, measure survival.
    Mirror,
    /// Doubled register: evolved and unevolved copies, transversal overlap test.
    Swap,
    /// Diagonalize and read the signal off the spectrum (no circuits).
    Exact,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Mirror => "mirror",
            Protocol::Swap => "swap",
            Protocol::Exact => "exact",
        })
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mirror" => Ok(Protocol::Mirror),
            "swap" => Ok(Protocol::Swap),
            "exact" => Ok(Protocol::Exact),
            other => Err(format!("unknown protocol `{other}`")),
        }
    }
}

/// What implements `exp(-i H t)`.
#[derive(Clone, Copy, Debug)]
pub enum Evolution<'a> {
    /// Fixed-depth commuting-core circuit from a frame decomposition; the
    /// basis is scrambled but the trace is preserved.
    Cartan(&'a KhkResult),
    /// Exact dense exponential of the operator itself (analytic only).
    DirectDense(&'a PauliSum),
    /// First-order product-formula circuit of the operator itself.
    DirectTrotter { operator: &'a PauliSum, steps: usize },
}

impl Evolution<'_> {
    fn is_direct(&self) -> bool {
        !matches!(self, Evolution::Cartan(_))
    }

    /// Operator whose diagonal part sets the reference-state phase.
    fn diagonal_source(&self) -> &PauliSum {
        match self {
            Evolution::Cartan(khk) => &khk.h_sum,
            Evolution::DirectDense(sum) => sum,
            Evolution::DirectTrotter { operator, .. } => operator,
        }
    }
}

/// Which basis states contribute measured targets.
#[derive(Clone, Copy, Debug)]
pub enum BasisScope<'a> {
    /// Every one of the `2^n` basis states.
    All,
    /// Only the order-`k` simplex masks; the rest of the register is inert
    /// under a direct evolution and contributes exactly 1 per state.
    ComplexOnly {
        complex: &'a SimplicialComplex,
        k: usize,
    },
}

/// One trace-estimation request.
#[derive(Clone, Copy, Debug)]
pub struct TraceJob<'a> {
    pub n: usize,
    pub evolution: Evolution<'a>,
    pub protocol: Protocol,
    pub scope: BasisScope<'a>,
    pub noise: Option<NoiseModel>,
    pub shots: ShotSpec,
    pub seed: u64,
}

/// Phase rate a diagonal-part eigenstate accrues: the sum of the `Z`-only
/// coefficients signed by their parity on `reference`, identity included.
fn reference_phase_rate(source: &PauliSum, reference: u32) -> f64 {
    source
        .terms()
        .filter(|&((x, _), _)| x == 0)
        .map(|((_, z), c)| {
            if (reference & z).count_ones() % 2 == 1 {
                -c
            } else {
                c
            }
        })
        .sum()
}

fn reconstruct(p_hot: f64, p_plus: f64, p_cross: f64) -> Complex64 {
    let half = 0.5 * (1.0 + p_hot);
    Complex64::new(2.0 * p_plus - half, half - 2.0 * p_cross)
}

/// The three overlap probabilities of one target, measured on circuits.
fn circuit_probabilities(
    target: u32,
    reference: u32,
    n: usize,
    evolution: &Circuit,
    protocol: Protocol,
    noise: Option<&NoiseModel>,
    shots: ShotSpec,
    seeds: [u64; 3],
) -> Result<(f64, f64, f64), DosError> {
    let (hot, plus, iphase) = prep_pair(target, reference, n)?;
    let run = |state_in: &Circuit, state_out: &Circuit, seed: u64| -> Result<f64, DosError> {
        let p = match protocol {
            Protocol::Mirror => {
                mirror_probability(state_in, evolution, state_out, noise, shots, seed)?
            }
            Protocol::Swap => {
                let mut evolved = state_in.clone();
                evolved.extend(evolution)?;
                destructive_swap_probability(state_out, &evolved, noise, shots, seed)?
            }
            Protocol::Exact => unreachable!("exact protocol runs no circuits"),
        };
        Ok(p.probability)
    };
    Ok((
        run(&hot, &hot, seeds[0])?,
        run(&plus, &plus, seeds[1])?,
        run(&iphase, &plus, seeds[2])?,
    ))
}

/// The same three probabilities from exact unitary matrix elements.
fn dense_probabilities(eig: &EigenSystem, target: u32, reference: u32, t: f64) -> (f64, f64, f64) {
    let u_rr = eig.matrix_element(reference, reference, t);
    let u_rb = eig.matrix_element(reference, target, t);
    let u_br = eig.matrix_element(target, reference, t);
    let u_bb = eig.matrix_element(target, target, t);
    let plus = (u_rr + u_rb + u_br + u_bb) / 2.0;
    let cross = (u_rr + Complex64::i() * u_rb + u_br + Complex64::i() * u_bb) / 2.0;
    (u_bb.norm_sqr(), plus.norm_sqr(), cross.norm_sqr())
}

fn validate(job: &TraceJob) -> Result<(), DosError> {
    let noisy = job.noise.map(|nm| !nm.is_zero()).unwrap_or(false);
    let sampled = matches!(job.shots, ShotSpec::Shots(_));
    match job.protocol {
        Protocol::Exact => {
            if sampled {
                return Err(DosError::ExactWithShots);
            }
            if noisy {
                return Err(DosError::ExactWithNoise);
            }
            if matches!(job.evolution, Evolution::DirectTrotter { .. }) {
                return Err(DosError::ExactWithTrotter);
            }
        }
        Protocol::Mirror | Protocol::Swap => {
            if matches!(job.evolution, Evolution::DirectDense(_)) {
                if sampled {
                    return Err(DosError::DenseWithShots);
                }
                if noisy {
                    return Err(DosError::DenseWithNoise);
                }
            }
        }
    }
    if matches!(job.scope, BasisScope::ComplexOnly { .. }) && !job.evolution.is_direct() {
        return Err(DosError::ScrambledScope);
    }
    Ok(())
}

/// Estimates the trace signal at every sampled time of the plan. Targets
/// run in parallel; all randomness is derived from `job.seed`, the time
/// index, the target mask and the experiment slot, so results are
/// reproducible bit for bit.
pub fn estimate_trace(job: &TraceJob, plan: &SamplingPlan) -> Result<TraceSignal, DosError> {
    assert_eq!(job.n, plan.n, "sampling plan sized for a different register");
    validate(job)?;
    let n = job.n;
    let times = plan.times();
    let dimension = (1u64 << n) as f64;

    // measured targets and the inert remainder (exactly 1 per state)
    let (targets, passive): (Vec<u32>, f64) = match job.scope {
        BasisScope::All => ((0..1u32 << n).collect(), 0.0),
        BasisScope::ComplexOnly { complex, k } => {
            let masks = complex.simplices_of_order(k);
            let passive = dimension - masks.len() as f64;
            (masks, passive)
        }
    };

    let diag_source = job.evolution.diagonal_source();
    let direct = job.evolution.is_direct();
    let sub_seed = |j: usize, b: u32, slot: u64| {
        derive_rng(
            job.seed,
            "trace-sample",
            ((j as u64) << 40) | ((b as u64) << 3) | slot,
        )
        .gen::<u64>()
    };

    let values: Vec<Complex64> = match (job.protocol, &job.evolution) {
        (Protocol::Exact, evolution) => {
            let op = match evolution {
                Evolution::Cartan(khk) => &khk.h_sum,
                Evolution::DirectDense(sum) => sum,
                Evolution::DirectTrotter { .. } => unreachable!("rejected by validation"),
            };
            let eig = EigenSystem::new(op, n)?;
            times
                .iter()
                .map(|&t| match job.scope {
                    BasisScope::All => eig.trace_signal(t),
                    BasisScope::ComplexOnly { .. } => {
                        targets
                            .iter()
                            .map(|&b| eig.diagonal_signal(b, t))
                            .sum::<Complex64>()
                            + passive
                    }
                })
                .collect()
        }
        (_, Evolution::DirectDense(sum)) => {
            let eig = EigenSystem::new(sum, n)?;
            times
                .iter()
                .map(|&t| {
                    let measured: Complex64 = targets
                        .par_iter()
                        .map(|&b| {
                            if b == 0 {
                                return Complex64::new(1.0, 0.0);
                            }
                            let (p_hot, p_plus, p_cross) = dense_probabilities(&eig, b, 0, t);
                            reconstruct(p_hot, p_plus, p_cross)
                        })
                        .sum();
                    measured + passive
                })
                .collect()
        }
        (_, _) => {
            let mut out = Vec::with_capacity(times.len());
            for (j, &t) in times.iter().enumerate() {
                let evolution = match job.evolution {
                    Evolution::Cartan(khk) => synthesize_evolution(&khk.h_sum, n, t)?,
                    Evolution::DirectTrotter { operator, steps } => {
                        synthesize_trotter(operator, n, t, steps)?
                    }
                    Evolution::DirectDense(_) => unreachable!("handled above"),
                };
                let measured: Complex64 = targets
                    .par_iter()
                    .map(|&b| -> Result<Complex64, DosError> {
                        if direct && b == 0 {
                            // a direct evolution fixes the vacuum exactly
                            return Ok(Complex64::new(1.0, 0.0));
                        }
                        let reference = if b == 0 { 1 } else { 0 };
                        let seeds =
                            [sub_seed(j, b, 0), sub_seed(j, b, 1), sub_seed(j, b, 2)];
                        let (p_hot, p_plus, p_cross) = circuit_probabilities(
                            b,
                            reference,
                            n,
                            &evolution,
                            job.protocol,
                            job.noise.as_ref(),
                            job.shots,
                            seeds,
                        )?;
                        let rate = reference_phase_rate(diag_source, reference);
                        Ok(reconstruct(p_hot, p_plus, p_cross)
                            * Complex64::from_polar(1.0, -rate * t))
                    })
                    .collect::<Result<Vec<_>, _>>()?
                    .into_iter()
                    .sum();
                out.push(measured + passive);
            }
            out
        }
    };

    Ok(TraceSignal {
        times,
        values,
        meta: SignalMeta {
            protocol: job.protocol,
            shots: match job.shots {
                ShotSpec::Analytic => None,
                ShotSpec::Shots(s) => Some(s),
            },
            noise: job.noise.map(|nm| (nm.p1, nm.p2)),
            seed: job.seed,
            grid_size: plan.grid_size(),
            period: plan.total_period(),
        },
    })
}
