//! Spectral-density estimation: sampling plans over one or more evolution
//! periods, trace-signal assembly from interferometric measurements, signal
//! post-processing, interpolation, Fourier coefficients and Betti estimates.
//!
//! Frequency bookkeeping: the trace of `exp(-i H t)` with eigenvalues near
//! the integers `0..=N` is periodic in `T = 2 pi`; sampling `f_s` points on
//! the half period and mirroring gives an `M = 2 f_s - 1` point grid whose
//! DFT bins count eigenvalue multiplicities.

use crate::circuit::CircuitError;
use crate::operator::OperatorError;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

pub mod interpolate;
pub mod trace;

pub use interpolate::{fourier_coefficients, interpolate, Interpolant, InterpolationMode};
pub use trace::{estimate_trace, BasisScope, Evolution, Protocol, TraceJob};

#[derive(Debug, Error)]
pub enum DosError {
    #[error("sampling needs at least one qubit")]
    EmptyRegister,
    #[error("samples per period must be positive")]
    BadSampleRate,
    #[error("period multiplier must be at least 1")]
    BadPeriodMultiplier,
    #[error("signal lengths differ: {times} times vs {values} values")]
    LengthMismatch { times: usize, values: usize },
    #[error("signal is missing its t = 0 sample")]
    MissingTimeZero,
    #[error("signal grid is not uniform at index {0}")]
    NonUniformGrid(usize),
    #[error("signal has {got} samples but the grid needs {want}")]
    WrongSampleCount { got: usize, want: usize },
    #[error("basis scope `complex-only` is invalid after a frame change that scrambles the basis")]
    ScrambledScope,
    #[error("the exact protocol computes amplitudes directly and takes no shots")]
    ExactWithShots,
    #[error("the exact protocol cannot carry a noise model")]
    ExactWithNoise,
    #[error("the exact protocol needs a dense-capable evolution, not a product formula")]
    ExactWithTrotter,
    #[error("dense evolution has no circuits to perturb: noise requires a circuit evolution")]
    DenseWithNoise,
    #[error("dense evolution is analytic only: shot sampling requires a circuit evolution")]
    DenseWithShots,
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// Time grid for trace sampling: `f_s` samples per period by default
/// `ceil(n pi)`, an odd `M = 2 f_s - 1` point period grid, and an optional
/// period multiplier for small-gap spectra. Only the first half of the grid
/// is sampled; conjugate mirroring supplies the rest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplingPlan {
    pub n: usize,
    pub f_s: usize,
    pub m: usize,
    pub period: f64,
    pub period_multiplier: usize,
    /// Set when an override puts `f_s` below the Nyquist rate `n + 1` for
    /// the largest expected frequency.
    pub nyquist_warning: bool,
}

impl SamplingPlan {
    pub fn new(
        n: usize,
        f_s_override: Option<usize>,
        period_multiplier: usize,
    ) -> Result<Self, DosError> {
        if n == 0 {
            return Err(DosError::EmptyRegister);
        }
        if period_multiplier == 0 {
            return Err(DosError::BadPeriodMultiplier);
        }
        let f_s = match f_s_override {
            Some(0) => return Err(DosError::BadSampleRate),
            Some(f) => f,
            None => (n as f64 * PI).ceil() as usize,
        };
        Ok(SamplingPlan {
            n,
            f_s,
            m: 2 * f_s - 1,
            period: 2.0 * PI,
            period_multiplier,
            nyquist_warning: f_s < n + 1,
        })
    }

    /// Grid points across all sampled periods.
    pub fn grid_size(&self) -> usize {
        self.m * self.period_multiplier
    }

    /// Total sampled duration.
    pub fn total_period(&self) -> f64 {
        self.period * self.period_multiplier as f64
    }

    /// Grid spacing; independent of the period multiplier.
    pub fn step(&self) -> f64 {
        self.period / self.m as f64
    }

    /// Number of measured samples: the grid prefix up to the half period.
    pub fn sample_count(&self) -> usize {
        self.grid_size() / 2 + 1
    }

    /// Measured sample times, `t_j = j T / M` up to the half period.
    pub fn times(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.sample_count()).map(|j| j as f64 * h).collect()
    }

    /// Full-period grid times.
    pub fn grid_times(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.grid_size()).map(|j| j as f64 * h).collect()
    }
}

/// Measurement pedigree a signal carries through post-processing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignalMeta {
    pub protocol: Protocol,
    pub shots: Option<u64>,
    pub noise: Option<(f64, f64)>,
    pub seed: u64,
    /// Full-period grid length the signal belongs to.
    pub grid_size: usize,
    /// Total period of that grid.
    pub period: f64,
}

/// A sampled (or completed) trace signal `S(t) = tr exp(-i H t)`.
#[derive(Clone, Debug)]
pub struct TraceSignal {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    pub meta: SignalMeta,
}

impl TraceSignal {
    fn check_lengths(&self) -> Result<(), DosError> {
        if self.times.len() != self.values.len() {
            return Err(DosError::LengthMismatch {
                times: self.times.len(),
                values: self.values.len(),
            });
        }
        Ok(())
    }
}

/// Completes a half-period signal into its full period grid: the real part
/// is shifted so the t = 0 sample equals `2^n` exactly, the imaginary part
/// is shifted to vanish there, and the upper half of the grid is filled with
/// the conjugate mirror `S(T - t) = conj(S(t))`.
pub fn postprocess(raw: &TraceSignal, n: usize) -> Result<TraceSignal, DosError> {
    raw.check_lengths()?;
    let grid = raw.meta.grid_size;
    let want = grid / 2 + 1;
    if raw.times.len() != want {
        return Err(DosError::WrongSampleCount {
            got: raw.times.len(),
            want,
        });
    }
    if raw.times.first().copied() != Some(0.0) {
        return Err(DosError::MissingTimeZero);
    }
    let h = raw.meta.period / grid as f64;
    for (j, &t) in raw.times.iter().enumerate() {
        if (t - j as f64 * h).abs() > 1e-9 {
            return Err(DosError::NonUniformGrid(j));
        }
    }
    let dim = (1u64 << n) as f64;
    let re_shift = dim - raw.values[0].re;
    let im_shift = raw.values[0].im;
    let mut values = Vec::with_capacity(grid);
    values.push(Complex64::new(dim, 0.0));
    for v in &raw.values[1..] {
        values.push(Complex64::new(v.re + re_shift, v.im - im_shift));
    }
    for m in want..grid {
        let mirrored = values[grid - m];
        values.push(mirrored.conj());
    }
    Ok(TraceSignal {
        times: (0..grid).map(|m| m as f64 * h).collect(),
        values,
        meta: raw.meta.clone(),
    })
}

/// Integer-frequency mass readout of a signal: `c[n]` estimates the
/// multiplicity of eigenvalue `n`, `rank_sum` and `rank_c0` the two rank
/// estimators, and `residual_energy` the interpolation mass outside the
/// integer bins `0..=N`.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumEstimate {
    pub c: Vec<f64>,
    pub rank_sum: f64,
    pub rank_c0: f64,
    pub residual_energy: f64,
    /// Imaginary residuals of the coefficients, diagnostics only.
    pub c_imag: Vec<f64>,
}

/// Betti estimates from both rank estimators; the zero-coefficient variant
/// is the noise-robust default.
#[derive(Clone, Debug, Serialize)]
pub struct BettiReport {
    pub k: usize,
    pub s_k: usize,
    pub rank_sum: f64,
    pub rank_c0: f64,
    pub beta_sum: usize,
    pub beta_c0: usize,
    /// Reported estimate; equals `beta_c0`.
    pub beta: usize,
    pub oracle_rank: Option<usize>,
    pub oracle_betti: Option<usize>,
}

fn beta_from_rank(s_k: usize, rank: f64) -> usize {
    let beta = (s_k as f64 - rank.max(0.0)).round();
    if beta < 0.0 {
        0
    } else {
        beta as usize
    }
}

/// Rounds both rank estimators into clamped integer Betti numbers.
pub fn betti_estimate(k: usize, s_k: usize, spectrum: &SpectrumEstimate) -> BettiReport {
    let beta_sum = beta_from_rank(s_k, spectrum.rank_sum);
    let beta_c0 = beta_from_rank(s_k, spectrum.rank_c0);
    BettiReport {
        k,
        s_k,
        rank_sum: spectrum.rank_sum,
        rank_c0: spectrum.rank_c0,
        beta_sum,
        beta_c0,
        beta: beta_c0,
        oracle_rank: None,
        oracle_betti: None,
    }
}

/// CSV rows `t, re_raw, im_raw, re_post, im_post` over the full period grid;
/// the raw columns are empty on the mirrored upper half.
pub fn signal_csv(raw: &TraceSignal, post: &TraceSignal) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "re_raw", "im_raw", "re_post", "im_post"])?;
    for (m, (&t, v)) in post.times.iter().zip(&post.values).enumerate() {
        let (re_raw, im_raw) = match raw.values.get(m) {
            Some(r) => (format!("{:.12e}", r.re), format!("{:.12e}", r.im)),
            None => (String::new(), String::new()),
        };
        w.write_record([
            format!("{t:.12e}"),
            re_raw,
            im_raw,
            format!("{:.12e}", v.re),
            format!("{:.12e}", v.im),
        ])?;
    }
    let bytes = w.into_inner().expect("csv writer over Vec cannot fail");
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct SpectrumExport<'a> {
    c: &'a [f64],
    rank_sum: f64,
    rank_c0: f64,
    residual_energy: f64,
}

/// Spectrum export: `{c, rank_sum, rank_c0, residual_energy}`.
pub fn spectrum_json(spectrum: &SpectrumEstimate) -> String {
    serde_json::to_string_pretty(&SpectrumExport {
        c: &spectrum.c,
        rank_sum: spectrum.rank_sum,
        rank_c0: spectrum.rank_c0,
        residual_energy: spectrum.residual_energy,
    })
    .expect("spectrum export serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn synthetic_raw(plan: &SamplingPlan, values: Vec<Complex64>) -> TraceSignal {
        TraceSignal {
            times: plan.times(),
            values,
            meta: SignalMeta {
                protocol: Protocol::Exact,
                shots: None,
                noise: None,
                seed: 0,
                grid_size: plan.grid_size(),
                period: plan.total_period(),
            },
        }
    }

    #[test]
    fn default_plans_match_the_stated_rates() {
        let p4 = SamplingPlan::new(4, None, 1).unwrap();
        assert_eq!((p4.f_s, p4.m), (13, 25));
        assert_eq!(p4.sample_count(), 13);
        assert!(!p4.nyquist_warning);
        let p10 = SamplingPlan::new(10, None, 1).unwrap();
        assert_eq!((p10.f_s, p10.m), (32, 63));
        assert_eq!(p10.sample_count(), 32);
    }

    #[test]
    fn times_start_at_zero_and_increase() {
        let plan = SamplingPlan::new(4, None, 1).unwrap();
        let times = plan.times();
        assert_eq!(times[0], 0.0);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert!(times.iter().all(|&t| t <= plan.total_period() / 2.0 + 1e-12));
        assert_abs_diff_eq!(times[1], 2.0 * PI / 25.0, epsilon = 1e-15);
    }

    #[test]
    fn period_multiplier_keeps_the_step() {
        let single = SamplingPlan::new(4, None, 1).unwrap();
        let double = SamplingPlan::new(4, None, 2).unwrap();
        assert_eq!(double.grid_size(), 50);
        assert_abs_diff_eq!(double.step(), single.step(), epsilon = 1e-15);
        assert_abs_diff_eq!(double.total_period(), 4.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn undersampling_raises_the_warning_flag() {
        let plan = SamplingPlan::new(4, Some(3), 1).unwrap();
        assert!(plan.nyquist_warning);
        assert!(!SamplingPlan::new(4, Some(5), 1).unwrap().nyquist_warning);
    }

    #[test]
    fn postprocess_pins_the_boundary_and_mirrors() {
        let plan = SamplingPlan::new(2, None, 1).unwrap();
        // a uniformly damped constant signal: raw S(t) = 0.8 * 4
        let raw = synthetic_raw(
            &plan,
            vec![Complex64::new(3.2, 0.1); plan.sample_count()],
        );
        let post = postprocess(&raw, 2).unwrap();
        assert_eq!(post.values[0], Complex64::new(4.0, 0.0));
        assert_eq!(post.values.len(), plan.grid_size());
        let g = plan.grid_size();
        for m in 1..g {
            assert_eq!(post.values[g - m], post.values[m].conj());
        }
    }

    #[test]
    fn postprocess_leaves_exact_signals_alone() {
        let plan = SamplingPlan::new(2, None, 1).unwrap();
        // S(t) = 3 + exp(-i 2 t): integer spectrum {0,0,0,2}
        let values: Vec<Complex64> = plan
            .times()
            .iter()
            .map(|&t| Complex64::new(3.0, 0.0) + Complex64::from_polar(1.0, -2.0 * t))
            .collect();
        let raw = synthetic_raw(&plan, values.clone());
        let post = postprocess(&raw, 2).unwrap();
        for (a, b) in post.values.iter().zip(&values) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn postprocess_rejects_malformed_input() {
        let plan = SamplingPlan::new(2, None, 1).unwrap();
        let mut raw = synthetic_raw(
            &plan,
            vec![Complex64::new(4.0, 0.0); plan.sample_count()],
        );
        raw.times[0] = 0.01;
        assert!(matches!(
            postprocess(&raw, 2),
            Err(DosError::MissingTimeZero)
        ));
        let short = TraceSignal {
            times: vec![0.0],
            values: vec![Complex64::new(4.0, 0.0)],
            meta: raw.meta.clone(),
        };
        assert!(matches!(
            postprocess(&short, 2),
            Err(DosError::WrongSampleCount { .. })
        ));
    }

    #[test]
    fn betti_rounding_matches_the_reference_points() {
        let spectrum = SpectrumEstimate {
            c: vec![],
            rank_sum: 3.16,
            rank_c0: 16.0 - 12.63,
            residual_energy: 0.0,
            c_imag: vec![],
        };
        let report = betti_estimate(1, 5, &spectrum);
        assert_eq!(report.beta_sum, 2);
        assert_abs_diff_eq!(report.rank_c0, 3.37, epsilon = 1e-9);
        assert_eq!(report.beta_c0, 2);
        assert_eq!(report.beta, 2);

        let big = SpectrumEstimate {
            c: vec![],
            rank_sum: 35.35,
            rank_c0: 35.35,
            residual_energy: 0.0,
            c_imag: vec![],
        };
        assert_eq!(betti_estimate(2, 44, &big).beta_sum, 9);

        let negative = SpectrumEstimate {
            c: vec![],
            rank_sum: -0.4,
            rank_c0: 5.9,
            residual_energy: 0.0,
            c_imag: vec![],
        };
        let clamped = betti_estimate(0, 5, &negative);
        assert_eq!(clamped.beta_sum, 5);
        assert_eq!(clamped.beta_c0, 0);
    }

    #[test]
    fn csv_export_has_blank_raw_columns_on_the_mirrored_half() {
        let plan = SamplingPlan::new(2, None, 1).unwrap();
        let raw = synthetic_raw(
            &plan,
            vec![Complex64::new(4.0, 0.0); plan.sample_count()],
        );
        let post = postprocess(&raw, 2).unwrap();
        let text = signal_csv(&raw, &post).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + plan.grid_size());
        assert!(lines[1].split(',').nth(1).unwrap().starts_with('4'));
        let mirrored = lines[plan.grid_size()];
        assert_eq!(mirrored.split(',').nth(1).unwrap(), "");
    }
}
