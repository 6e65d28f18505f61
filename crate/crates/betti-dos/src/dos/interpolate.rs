//! Interpolation of full-period trace signals and integer-frequency
//! coefficient readout.
//!
//! The trigonometric interpolant stores the DFT bins of the grid; with the
//! analysis kernel `exp(+i 2 pi q m / G)`, a spectral component
//! `exp(-i lambda t)` of an integer eigenvalue `lambda` lands entirely in
//! bin `q = lambda * periods`, so bin reads are multiplicity estimates. The
//! spline alternative integrates a periodic cubic through the grid against
//! the same kernel.

use super::{DosError, SpectrumEstimate, TraceSignal};
use num_complex::Complex64;
use std::f64::consts::TAU;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpolationMode {
    Trig,
    Spline,
}

impl FromStr for InterpolationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "trig" | "trigonometric" => Ok(InterpolationMode::Trig),
            "spline" | "periodic_spline" | "periodic-spline" => Ok(InterpolationMode::Spline),
            other => Err(format!("unknown interpolation mode `{other}`")),
        }
    }
}

/// Trigonometric polynomial through the grid, kept as DFT bins.
#[derive(Clone, Debug)]
pub struct TrigInterpolant {
    /// `bins[q] = (1/G) sum_m S[m] exp(+i 2 pi q m / G)`.
    pub bins: Vec<Complex64>,
    pub period: f64,
    pub periods: usize,
}

impl TrigInterpolant {
    /// Evaluates with the shifted (minimal-frequency) bin assignment.
    pub fn eval(&self, t: f64) -> Complex64 {
        let g = self.bins.len() as i64;
        self.bins
            .iter()
            .enumerate()
            .map(|(q, &b)| {
                let f = if (q as i64) <= g / 2 {
                    q as i64
                } else {
                    q as i64 - g
                };
                b * Complex64::from_polar(1.0, -TAU * f as f64 * t / self.period)
            })
            .sum()
    }
}

/// Uniform periodic cubic spline, one per signal quadrature.
#[derive(Clone, Debug)]
pub struct PeriodicSpline {
    values: Vec<Complex64>,
    /// Second derivatives at the knots, periodic end conditions.
    second: Vec<Complex64>,
    step: f64,
    pub period: f64,
    pub periods: usize,
}

/// Solves the cyclic tridiagonal system of the periodic natural-cubic knot
/// equations via the Sherman-Morrison correction of two ordinary
/// tridiagonal solves.
fn cyclic_tridiagonal(diag: f64, off: f64, rhs: &[Complex64]) -> Vec<Complex64> {
    let n = rhs.len();
    assert!(n >= 3, "periodic spline needs at least three knots");
    let gamma = -diag;
    let solve = |b: &[Complex64]| -> Vec<Complex64> {
        // Thomas algorithm with constant diagonals, first/last modified
        let mut main = vec![diag; n];
        main[0] = diag - gamma;
        main[n - 1] = diag - off * off / gamma;
        let mut c_prime = vec![Complex64::new(0.0, 0.0); n];
        let mut d_prime = vec![Complex64::new(0.0, 0.0); n];
        c_prime[0] = Complex64::new(off / main[0], 0.0);
        d_prime[0] = b[0] / main[0];
        for i in 1..n {
            let denom = Complex64::new(main[i], 0.0) - off * c_prime[i - 1];
            if i < n - 1 {
                c_prime[i] = Complex64::new(off, 0.0) / denom;
            }
            d_prime[i] = (b[i] - off * d_prime[i - 1]) / denom;
        }
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        x[n - 1] = d_prime[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d_prime[i] - c_prime[i] * x[i + 1];
        }
        x
    };
    let y = solve(rhs);
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    u[0] = Complex64::new(gamma, 0.0);
    u[n - 1] = Complex64::new(off, 0.0);
    let q = solve(&u);
    let factor = (y[0] + y[n - 1] * off / gamma)
        / (Complex64::new(1.0, 0.0) + q[0] + q[n - 1] * off / gamma);
    (0..n).map(|i| y[i] - factor * q[i]).collect()
}

impl PeriodicSpline {
    fn new(values: Vec<Complex64>, step: f64, period: f64, periods: usize) -> Self {
        let g = values.len();
        let rhs: Vec<Complex64> = (0..g)
            .map(|i| {
                let prev = values[(i + g - 1) % g];
                let next = values[(i + 1) % g];
                (next - 2.0 * values[i] + prev) * 6.0 / (step * step)
            })
            .collect();
        let second = cyclic_tridiagonal(4.0, 1.0, &rhs);
        PeriodicSpline {
            values,
            second,
            step,
            period,
            periods,
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let g = self.values.len();
        let pos = (t / self.step).rem_euclid(g as f64);
        let i = (pos.floor() as usize).min(g - 1);
        let j = (i + 1) % g;
        let a = pos - i as f64;
        let b = 1.0 - a;
        let h2 = self.step * self.step / 6.0;
        self.values[i] * b
            + self.values[j] * a
            + self.second[i] * ((b * b * b - b) * h2)
            + self.second[j] * ((a * a * a - a) * h2)
    }
}

#[derive(Clone, Debug)]
pub enum Interpolant {
    Trig(TrigInterpolant),
    Spline(PeriodicSpline),
}

impl Interpolant {
    pub fn eval(&self, t: f64) -> Complex64 {
        match self {
            Interpolant::Trig(tr) => tr.eval(t),
            Interpolant::Spline(sp) => sp.eval(t),
        }
    }
}

/// Builds the interpolant of a post-processed full-period signal.
pub fn interpolate(signal: &TraceSignal, mode: InterpolationMode) -> Result<Interpolant, DosError> {
    let g = signal.meta.grid_size;
    if signal.times.len() != g || signal.values.len() != g {
        return Err(DosError::WrongSampleCount {
            got: signal.times.len().min(signal.values.len()),
            want: g,
        });
    }
    let h = signal.meta.period / g as f64;
    for (m, &t) in signal.times.iter().enumerate() {
        if (t - m as f64 * h).abs() > 1e-9 {
            return Err(DosError::NonUniformGrid(m));
        }
    }
    let periods = (signal.meta.period / TAU).round().max(1.0) as usize;
    match mode {
        InterpolationMode::Trig => {
            let bins = (0..g)
                .map(|q| {
                    signal
                        .values
                        .iter()
                        .enumerate()
                        .map(|(m, &s)| {
                            s * Complex64::from_polar(1.0, TAU * (q * m % g) as f64 / g as f64)
                        })
                        .sum::<Complex64>()
                        / g as f64
                })
                .collect();
            Ok(Interpolant::Trig(TrigInterpolant {
                bins,
                period: signal.meta.period,
                periods,
            }))
        }
        InterpolationMode::Spline => Ok(Interpolant::Spline(PeriodicSpline::new(
            signal.values.clone(),
            h,
            signal.meta.period,
            periods,
        ))),
    }
}

/// Oversampling factor of the spline quadrature.
const SPLINE_OVERSAMPLE: usize = 32;

fn spline_coefficient(sp: &PeriodicSpline, freq: f64) -> Complex64 {
    // composite Simpson over the full period against exp(+i freq t)
    let panels = SPLINE_OVERSAMPLE * sp.values.len();
    let h = sp.period / panels as f64;
    let f = |i: usize| {
        let t = i as f64 * h;
        sp.eval(t) * Complex64::from_polar(1.0, freq * t)
    };
    let mut acc = f(0) + f(panels);
    for i in 1..panels {
        acc += f(i) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / (3.0 * sp.period)
}

/// Reads the integer-frequency coefficients `c_0..=c_n` and the rank
/// estimators out of an interpolant.
pub fn fourier_coefficients(interpolant: &Interpolant, n: usize) -> SpectrumEstimate {
    let dim = (1u64 << n) as f64;
    let (c, c_imag, residual_energy) = match interpolant {
        Interpolant::Trig(tr) => {
            let g = tr.bins.len();
            let indices: Vec<usize> = (0..=n).map(|f| f * tr.periods % g).collect();
            let c: Vec<f64> = indices.iter().map(|&q| tr.bins[q].re).collect();
            let c_imag: Vec<f64> = indices.iter().map(|&q| tr.bins[q].im).collect();
            let residual = tr
                .bins
                .iter()
                .enumerate()
                .filter(|(q, _)| !indices.contains(q))
                .map(|(_, b)| b.re)
                .sum();
            (c, c_imag, residual)
        }
        Interpolant::Spline(sp) => {
            let coeffs: Vec<Complex64> =
                (0..=n).map(|f| spline_coefficient(sp, f as f64)).collect();
            let c: Vec<f64> = coeffs.iter().map(|v| v.re).collect();
            let c_imag: Vec<f64> = coeffs.iter().map(|v| v.im).collect();
            let residual = dim - c.iter().sum::<f64>();
            (c, c_imag, residual)
        }
    };
    let rank_sum = c[1..].iter().sum();
    SpectrumEstimate {
        rank_c0: dim - c[0],
        rank_sum,
        residual_energy,
        c,
        c_imag,
    }
}
