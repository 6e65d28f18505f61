//! Run orchestration: a single config drives complex construction, operator
//! building, frame compilation, trace sampling, spectral readout and report
//! generation, with every artifact written as soon as its stage completes.
//!
//! All run artifacts except `timing.json` are deterministic functions of the
//! config (including the master seed), so re-running a config reproduces
//! `report.json`, `signal.csv`, `spectrum.json` and `cartan.json` byte for
//! byte. Wall-clock numbers live only in `timing.json`.

use crate::cartan::{cartan_split_of, khk_optimize, KhkOptions, KhkResult};
use crate::circuit::{
    prep_pair, synthesize_evolution, synthesize_trotter, Circuit, Gate, NoiseModel, ShotSpec,
};
use crate::complex::{
    build_vietoris_rips, parse_complex_path, Metric, PointCloud, SimplicialComplex,
};
use crate::dos::{
    betti_estimate, estimate_trace, fourier_coefficients, interpolate, postprocess, signal_csv,
    spectrum_json, BasisScope, BettiReport, Evolution, InterpolationMode, Protocol, SamplingPlan,
    SpectrumEstimate, TraceJob,
};
use crate::operator::dense::{
    block_spectrum, exact_trace_signal, rank_of_spectrum, MAX_DENSE_QUBITS,
};
use crate::operator::{laplacian, PauliSum};
use crate::rng::derive_rng;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

/// A stage-tagged failure; artifacts written before the failing stage are
/// left in place.
#[derive(Debug, thiserror::Error)]
#[error("{stage}: {message}")]
pub struct PipelineError {
    pub stage: &'static str,
    pub message: String,
}

impl PipelineError {
    fn new(stage: &'static str, err: impl fmt::Display) -> Self {
        PipelineError {
            stage,
            message: err.to_string(),
        }
    }
}

fn at<E: fmt::Display>(stage: &'static str) -> impl Fn(E) -> PipelineError {
    move |err| PipelineError::new(stage, err)
}

/// Which basis states the sampler visits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScopeChoice {
    #[default]
    All,
    ComplexOnly,
}

impl FromStr for ScopeChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(ScopeChoice::All),
            "complex-only" | "complex" => Ok(ScopeChoice::ComplexOnly),
            other => Err(format!("unknown scope `{other}`")),
        }
    }
}

/// How `exp(-i H t)` is realized during sampling.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolutionChoice {
    /// Compile a fixed-depth commuting core first.
    #[default]
    Cartan,
    /// Product-formula circuit of the operator itself.
    Trotter,
    /// Dense exponential, no circuits (exact protocol only).
    Dense,
}

impl FromStr for EvolutionChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cartan" => Ok(EvolutionChoice::Cartan),
            "trotter" => Ok(EvolutionChoice::Trotter),
            "dense" => Ok(EvolutionChoice::Dense),
            other => Err(format!("unknown evolution `{other}`")),
        }
    }
}

/// Optimizer knobs for the frame compilation stage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub gamma: f64,
    pub grad_tol: f64,
    pub max_iterations: u64,
    pub restarts: usize,
    pub residual_tol: f64,
    /// Safety cap on the closure dimension.
    pub closure_cap: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        let base = KhkOptions::default();
        OptimizerConfig {
            gamma: base.gamma,
            grad_tol: base.grad_tol,
            max_iterations: base.max_iterations,
            restarts: base.restarts,
            residual_tol: base.residual_tol,
            closure_cap: 4096,
        }
    }
}

/// One full run description. Exactly one of `points`/`complex` supplies the
/// input; every random choice downstream derives from `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Point-cloud CSV (one point per row).
    pub points: Option<PathBuf>,
    pub metric: Metric,
    /// Filtration scale for the point-cloud input.
    pub epsilon: Option<f64>,
    /// Explicit complex JSON (`{"n": ..., "maximal": [[...], ...]}`).
    pub complex: Option<PathBuf>,
    /// Homology order.
    pub k: usize,
    pub protocol: Protocol,
    pub scope: ScopeChoice,
    pub evolution: EvolutionChoice,
    pub trotter_steps: usize,
    /// Shots per overlap circuit; ignored by the exact protocol.
    pub shots: u64,
    pub noise_p1: f64,
    pub noise_p2: f64,
    /// Sampling rate override; default is ceil(pi 2^n).
    pub f_s: Option<usize>,
    pub period_multiplier: usize,
    pub interpolation: InterpolationMode,
    pub optimizer: OptimizerConfig,
    /// Master seed; recorded in the report for auditability.
    pub seed: u64,
    /// Artifact directory; nothing is written when absent. Not echoed into
    /// `report.json` so identical runs produce identical bytes wherever they
    /// are written.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            points: None,
            metric: Metric::Euclidean,
            epsilon: None,
            complex: None,
            k: 0,
            protocol: Protocol::Mirror,
            scope: ScopeChoice::All,
            evolution: EvolutionChoice::Cartan,
            trotter_steps: 8,
            shots: 1000,
            noise_p1: 0.0,
            noise_p2: 0.0,
            f_s: None,
            period_multiplier: 1,
            interpolation: InterpolationMode::Trig,
            optimizer: OptimizerConfig::default(),
            seed: 7,
            out: None,
        }
    }
}

impl RunConfig {
    /// Reads a TOML or JSON config; the extension picks the parser, with a
    /// TOML-then-JSON fallback for anything else.
    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(at("config"))?;
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or("")
            .to_ascii_lowercase();
        match ext.as_str() {
            "toml" => toml::from_str(&text).map_err(at("config")),
            "json" => serde_json::from_str(&text).map_err(at("config")),
            _ => toml::from_str(&text)
                .or_else(|_| serde_json::from_str(&text))
                .map_err(at("config")),
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |msg: &str| Err(PipelineError::new("config", msg));
        match (&self.points, &self.complex) {
            (None, None) => return fail("no input: set `points` or `complex`"),
            (Some(_), Some(_)) => return fail("ambiguous input: set only one of `points`/`complex`"),
            (Some(_), None) if self.epsilon.is_none() => {
                return fail("point-cloud input needs `epsilon`")
            }
            (None, Some(_)) if self.epsilon.is_some() => {
                return fail("`epsilon` only applies to point-cloud input")
            }
            _ => {}
        }
        let noisy = self.noise_p1 > 0.0 || self.noise_p2 > 0.0;
        match self.protocol {
            Protocol::Exact => {
                if noisy {
                    return fail("the exact protocol admits no noise model");
                }
                if self.evolution == EvolutionChoice::Trotter {
                    return fail("the exact protocol reads spectra, not product-formula circuits");
                }
            }
            Protocol::Mirror | Protocol::Swap => {
                if self.shots == 0 {
                    return fail("interferometric protocols need shots >= 1");
                }
                if self.evolution == EvolutionChoice::Dense {
                    return fail("dense evolution is analytic-only; use protocol = \"exact\"");
                }
            }
        }
        NoiseModel::new(self.noise_p1, self.noise_p2).map_err(at("config"))?;
        if self.scope == ScopeChoice::ComplexOnly && self.evolution == EvolutionChoice::Cartan {
            return fail("subspace scope needs a direct evolution; the compiled frame scrambles the basis");
        }
        if self.evolution == EvolutionChoice::Trotter && self.trotter_steps == 0 {
            return fail("trotter_steps must be >= 1");
        }
        if self.period_multiplier == 0 {
            return fail("period_multiplier must be >= 1");
        }
        Ok(())
    }

    fn khk_options(&self) -> KhkOptions {
        KhkOptions {
            gamma: self.optimizer.gamma,
            grad_tol: self.optimizer.grad_tol,
            max_iterations: self.optimizer.max_iterations,
            restarts: self.optimizer.restarts,
            residual_tol: self.optimizer.residual_tol,
            seed: derive_rng(self.seed, "optimizer", 0).gen(),
        }
    }
}

/// Input complex with its operator, shared by every subcommand.
pub struct Problem {
    pub complex: SimplicialComplex,
    pub laplacian: PauliSum,
    pub n: usize,
    pub s_k: usize,
}

/// Builds or loads the complex and its order-k Laplacian.
pub fn load_problem(config: &RunConfig) -> Result<Problem, PipelineError> {
    let complex = match (&config.points, &config.complex) {
        (Some(path), None) => {
            let cloud = PointCloud::from_csv_path(path).map_err(at("complex"))?;
            let epsilon = config
                .epsilon
                .ok_or_else(|| PipelineError::new("complex", "missing epsilon"))?;
            build_vietoris_rips(&cloud, config.metric, epsilon, None).map_err(at("complex"))?
        }
        (None, Some(path)) => parse_complex_path(path).map_err(at("complex"))?,
        _ => return Err(PipelineError::new("complex", "exactly one input source required")),
    };
    let n = complex.n_vertices();
    let s_k = complex.s_count(config.k);
    let laplacian = laplacian(&complex, config.k);
    Ok(Problem {
        complex,
        laplacian,
        n,
        s_k,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexSummary {
    pub n: usize,
    /// Simplex counts per order, 0..=max_order.
    pub simplex_counts: Vec<usize>,
    pub s_k: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct OperatorSummary {
    pub terms: usize,
    pub non_identity_terms: usize,
    pub identity_coeff: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CartanSummary {
    pub dim_g: usize,
    pub dim_k: usize,
    pub dim_m: usize,
    pub core_terms: usize,
    pub residual: f64,
    pub restarts_used: usize,
    pub iterations: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CircuitSummary {
    pub evolution_gates: usize,
    pub evolution_cnots: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleSummary {
    pub block_eigenvalues: Vec<f64>,
    pub rank: usize,
    pub betti: usize,
    /// Largest deviation of the sampled signal from the exact trace.
    pub trace_bias_max: f64,
}

/// Everything a run learned, minus wall-clock timings (kept separate so the
/// report is reproducible byte for byte).
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub complex: ComplexSummary,
    pub operator: OperatorSummary,
    pub cartan: Option<CartanSummary>,
    pub circuits: Option<CircuitSummary>,
    pub sampling: SamplingPlan,
    pub spectrum: SpectrumEstimate,
    pub betti: BettiReport,
    pub oracle: Option<OracleSummary>,
}

#[derive(Debug, Default, Serialize)]
struct TimingBreakdown {
    build_ms: f64,
    cartan_ms: f64,
    sampling_ms: f64,
    dos_ms: f64,
    total_ms: f64,
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir).map_err(at("io"))?;
    std::fs::write(dir.join(name), contents).map_err(at("io"))
}

fn pretty_json<T: Serialize>(value: &T) -> Result<String, PipelineError> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(at("report"))
}

/// Runs the full pipeline: complex, operator, frame compilation, sampling,
/// spectral readout, Betti estimation, artifacts.
pub fn analyze(config: &RunConfig) -> Result<RunReport, PipelineError> {
    config.validate()?;
    let start = Instant::now();
    let mut timing = TimingBreakdown::default();
    let out = config.out.clone();

    let stage_start = Instant::now();
    let problem = load_problem(config)?;
    timing.build_ms = stage_start.elapsed().as_secs_f64() * 1e3;
    let Problem {
        complex,
        laplacian,
        n,
        s_k,
    } = &problem;
    let n = *n;
    let complex_summary = ComplexSummary {
        n,
        simplex_counts: (0..=complex.max_order()).map(|k| complex.s_count(k)).collect(),
        s_k: *s_k,
    };
    let operator_summary = OperatorSummary {
        terms: laplacian.len(),
        non_identity_terms: laplacian.non_identity_len(),
        identity_coeff: laplacian.identity_coeff(),
    };

    // frame compilation; a zero operator falls back to an (empty) direct
    // circuit since it generates no algebra to decompose
    let stage_start = Instant::now();
    let mut cartan_summary = None;
    let khk: Option<KhkResult> =
        if config.evolution == EvolutionChoice::Cartan && !laplacian.is_zero() {
            let split =
                cartan_split_of(laplacian, config.optimizer.closure_cap).map_err(at("cartan"))?;
            let result =
                khk_optimize(laplacian, &split, &config.khk_options()).map_err(at("cartan"))?;
            if let Some(dir) = &out {
                write_artifact(dir, "cartan.json", &crate::cartan::khk::export_json(&result, n))?;
            }
            cartan_summary = Some(CartanSummary {
                dim_g: split.basis.dim(),
                dim_k: split.k_indices.len(),
                dim_m: split.m_indices.len(),
                core_terms: result.h_sum.len(),
                residual: result.residual,
                restarts_used: result.restarts_used,
                iterations: result.iterations,
            });
            Some(result)
        } else {
            None
        };
    timing.cartan_ms = stage_start.elapsed().as_secs_f64() * 1e3;

    let evolution = match (config.evolution, &khk) {
        (EvolutionChoice::Cartan, Some(result)) => Evolution::Cartan(result),
        (EvolutionChoice::Cartan, None) if config.protocol == Protocol::Exact => {
            Evolution::DirectDense(laplacian)
        }
        (EvolutionChoice::Cartan, None) => Evolution::DirectTrotter {
            operator: laplacian,
            steps: 1,
        },
        (EvolutionChoice::Trotter, _) => Evolution::DirectTrotter {
            operator: laplacian,
            steps: config.trotter_steps,
        },
        (EvolutionChoice::Dense, _) => Evolution::DirectDense(laplacian),
    };

    let plan =
        SamplingPlan::new(n, config.f_s, config.period_multiplier).map_err(at("sampling"))?;
    let circuits = match evolution {
        Evolution::DirectDense(_) => None,
        Evolution::Cartan(result) => Some(
            synthesize_evolution(&result.h_sum, n, plan.step()).map_err(at("sampling"))?,
        ),
        Evolution::DirectTrotter { operator, steps } => {
            Some(synthesize_trotter(operator, n, plan.step(), steps).map_err(at("sampling"))?)
        }
    }
    .map(|circuit| CircuitSummary {
        evolution_gates: circuit.gate_count(),
        evolution_cnots: circuit.cnot_count(),
    });

    let stage_start = Instant::now();
    let job = TraceJob {
        n,
        evolution,
        protocol: config.protocol,
        scope: match config.scope {
            ScopeChoice::All => BasisScope::All,
            ScopeChoice::ComplexOnly => BasisScope::ComplexOnly {
                complex,
                k: config.k,
            },
        },
        noise: if config.noise_p1 > 0.0 || config.noise_p2 > 0.0 {
            Some(NoiseModel::new(config.noise_p1, config.noise_p2).map_err(at("sampling"))?)
        } else {
            None
        },
        shots: match config.protocol {
            Protocol::Exact => ShotSpec::Analytic,
            _ => ShotSpec::Shots(config.shots),
        },
        seed: derive_rng(config.seed, "trace", 0).gen(),
    };
    let raw = estimate_trace(&job, &plan).map_err(at("sampling"))?;
    timing.sampling_ms = stage_start.elapsed().as_secs_f64() * 1e3;

    let stage_start = Instant::now();
    let post = postprocess(&raw, n).map_err(at("dos"))?;
    if let Some(dir) = &out {
        let csv = signal_csv(&raw, &post).map_err(at("dos"))?;
        write_artifact(dir, "signal.csv", &csv)?;
    }
    let interpolant = interpolate(&post, config.interpolation).map_err(at("dos"))?;
    let spectrum = fourier_coefficients(&interpolant, n);
    let mut betti = betti_estimate(config.k, *s_k, &spectrum);
    if let Some(dir) = &out {
        write_artifact(dir, "spectrum.json", &spectrum_json(&spectrum))?;
    }
    timing.dos_ms = stage_start.elapsed().as_secs_f64() * 1e3;

    let oracle = if n <= MAX_DENSE_QUBITS {
        let basis = complex.simplices_of_order(config.k);
        let eigenvalues = block_spectrum(laplacian, n, &basis).map_err(at("report"))?;
        let rank = rank_of_spectrum(&eigenvalues);
        let betti_exact = s_k - rank;
        let exact = exact_trace_signal(laplacian, n, &raw.times).map_err(at("report"))?;
        let trace_bias_max = raw
            .values
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        betti.oracle_rank = Some(rank);
        betti.oracle_betti = Some(betti_exact);
        Some(OracleSummary {
            block_eigenvalues: eigenvalues,
            rank,
            betti: betti_exact,
            trace_bias_max,
        })
    } else {
        None
    };

    let report = RunReport {
        config: config.clone(),
        complex: complex_summary,
        operator: operator_summary,
        cartan: cartan_summary,
        circuits,
        sampling: plan,
        spectrum,
        betti,
        oracle,
    };
    if let Some(dir) = &out {
        write_artifact(dir, "report.json", &pretty_json(&report)?)?;
        timing.total_ms = start.elapsed().as_secs_f64() * 1e3;
        write_artifact(dir, "timing.json", &pretty_json(&timing)?)?;
    }
    Ok(report)
}

/// Exact diagonalization summary of the configured problem (register cap
/// applies), written by the `oracle` subcommand.
#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub n: usize,
    pub k: usize,
    pub s_k: usize,
    pub block_eigenvalues: Vec<f64>,
    pub rank: usize,
    pub betti: usize,
}

pub fn oracle(config: &RunConfig) -> Result<OracleReport, PipelineError> {
    let problem = load_problem(config)?;
    if problem.n > MAX_DENSE_QUBITS {
        return Err(PipelineError::new(
            "oracle",
            format!("{} vertices exceed the dense cap {MAX_DENSE_QUBITS}", problem.n),
        ));
    }
    let basis = problem.complex.simplices_of_order(config.k);
    let eigenvalues =
        block_spectrum(&problem.laplacian, problem.n, &basis).map_err(at("oracle"))?;
    let rank = rank_of_spectrum(&eigenvalues);
    let report = OracleReport {
        n: problem.n,
        k: config.k,
        s_k: problem.s_k,
        block_eigenvalues: eigenvalues,
        rank,
        betti: problem.s_k - rank,
    };
    if let Some(dir) = &config.out {
        write_artifact(dir, "oracle.json", &pretty_json(&report)?)?;
    }
    Ok(report)
}

/// Compiles the frame and writes `cartan.json`; the analysis pipeline does
/// the same en passant, this is the standalone entry point.
pub fn compile_cartan(config: &RunConfig) -> Result<KhkResult, PipelineError> {
    let problem = load_problem(config)?;
    if problem.laplacian.is_zero() {
        return Err(PipelineError::new(
            "cartan",
            "the operator is zero; nothing to decompose",
        ));
    }
    let split = cartan_split_of(&problem.laplacian, config.optimizer.closure_cap)
        .map_err(at("cartan"))?;
    let result =
        khk_optimize(&problem.laplacian, &split, &config.khk_options()).map_err(at("cartan"))?;
    if let Some(dir) = &config.out {
        write_artifact(
            dir,
            "cartan.json",
            &crate::cartan::khk::export_json(&result, problem.n),
        )?;
    }
    Ok(result)
}

/// Interferometer leg exported for one target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CircuitVariant {
    Hot,
    Plus,
    Cross,
}

impl CircuitVariant {
    pub const ALL: [CircuitVariant; 3] =
        [CircuitVariant::Hot, CircuitVariant::Plus, CircuitVariant::Cross];

    fn label(&self) -> &'static str {
        match self {
            CircuitVariant::Hot => "hot",
            CircuitVariant::Plus => "plus",
            CircuitVariant::Cross => "cross",
        }
    }
}

impl FromStr for CircuitVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hot" => Ok(CircuitVariant::Hot),
            "plus" => Ok(CircuitVariant::Plus),
            "cross" => Ok(CircuitVariant::Cross),
            other => Err(format!("unknown variant `{other}`")),
        }
    }
}

/// Writes OpenQASM mirror circuits `mirror_t{j}_target{mask}_{variant}.qasm`
/// plus one bare `evolution_t{j}.qasm` per requested time index, and returns
/// the written paths in a deterministic order.
pub fn export_circuits(
    config: &RunConfig,
    time_indices: &[usize],
    target: u32,
    variants: &[CircuitVariant],
) -> Result<Vec<PathBuf>, PipelineError> {
    config.validate()?;
    let dir = config
        .out
        .clone()
        .ok_or_else(|| PipelineError::new("io", "circuit export needs an output directory"))?;
    let problem = load_problem(config)?;
    let n = problem.n;
    let plan =
        SamplingPlan::new(n, config.f_s, config.period_multiplier).map_err(at("sampling"))?;
    let times = plan.times();

    enum Compiled {
        Core(KhkResult),
        Product(usize),
    }
    let compiled = match config.evolution {
        EvolutionChoice::Cartan => {
            if problem.laplacian.is_zero() {
                Compiled::Product(1)
            } else {
                let split = cartan_split_of(&problem.laplacian, config.optimizer.closure_cap)
                    .map_err(at("cartan"))?;
                Compiled::Core(
                    khk_optimize(&problem.laplacian, &split, &config.khk_options())
                        .map_err(at("cartan"))?,
                )
            }
        }
        EvolutionChoice::Trotter => Compiled::Product(config.trotter_steps),
        EvolutionChoice::Dense => {
            return Err(PipelineError::new(
                "circuit",
                "dense evolution has no circuits to export",
            ))
        }
    };

    let reference = if target == 0 { 1 } else { 0 };
    let (hot, plus, iphase) = prep_pair(target, reference, n).map_err(at("circuit"))?;
    let mut written = Vec::new();
    for &j in time_indices {
        let &t = times.get(j).ok_or_else(|| {
            PipelineError::new(
                "circuit",
                format!("time index {j} out of range (0..{})", times.len()),
            )
        })?;
        let evolution = match &compiled {
            Compiled::Core(result) => {
                synthesize_evolution(&result.h_sum, n, t).map_err(at("circuit"))?
            }
            Compiled::Product(steps) => {
                synthesize_trotter(&problem.laplacian, n, t, *steps).map_err(at("circuit"))?
            }
        };
        let name = format!("evolution_t{j}.qasm");
        write_artifact(&dir, &name, &evolution.to_qasm())?;
        written.push(dir.join(name));
        for variant in variants {
            let (prep_in, prep_out) = match variant {
                CircuitVariant::Hot => (&hot, &hot),
                CircuitVariant::Plus => (&plus, &plus),
                CircuitVariant::Cross => (&iphase, &plus),
            };
            let mut mirror = Circuit::new(n);
            mirror.extend(prep_in).map_err(at("circuit"))?;
            mirror.extend(&evolution).map_err(at("circuit"))?;
            mirror
                .extend(&prep_out.adjoint().map_err(at("circuit"))?)
                .map_err(at("circuit"))?;
            mirror.push(Gate::MeasureAll).map_err(at("circuit"))?;
            let name = format!("mirror_t{j}_target{target}_{}.qasm", variant.label());
            write_artifact(&dir, &name, &mirror.to_qasm())?;
            written.push(dir.join(name));
        }
    }
    Ok(written)
}

/// CSV table of mean closure dimensions over every clique complex on `n`
/// labelled vertices, all homology orders.
pub fn scan_table(n: usize, cap: usize) -> Result<String, PipelineError> {
    let mut out = String::from("edges,k,mean_dim,count\n");
    for k in 0..n {
        let rows = crate::cartan::lie_dim_scan(n, k, cap).map_err(at("scan"))?;
        for row in rows {
            out.push_str(&format!(
                "{},{},{:.6},{}\n",
                row.edges, row.k, row.mean_dim, row.count
            ));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn fixture_complex() -> tempfile::NamedTempFile {
        let mut file = tempfile::Builder::new().suffix(".json").tempfile().unwrap();
        write!(
            file,
            "{}",
            r#"{"n": 4, "maximal": [[1,3],[1,4],[2,3],[2,4],[3,4]]}"#
        )
        .unwrap();
        file
    }

    fn base_config(input: &Path) -> RunConfig {
        RunConfig {
            complex: Some(input.to_path_buf()),
            k: 1,
            ..RunConfig::default()
        }
    }

    #[test]
    fn exact_run_recovers_the_loop_count() {
        let input = fixture_complex();
        let mut config = base_config(input.path());
        config.protocol = Protocol::Exact;
        let report = analyze(&config).unwrap();
        assert_eq!(report.betti.beta, 2);
        assert_eq!(report.betti.beta_sum, 2);
        assert_eq!(report.oracle.as_ref().unwrap().betti, 2);
        assert_eq!(report.oracle.as_ref().unwrap().rank, 3);
        assert!(report.cartan.is_some());
        assert!((report.betti.rank_sum - 3.0).abs() < 1e-6);
    }

    #[test]
    fn dense_exact_run_skips_circuits() {
        let input = fixture_complex();
        let mut config = base_config(input.path());
        config.protocol = Protocol::Exact;
        config.evolution = EvolutionChoice::Dense;
        let report = analyze(&config).unwrap();
        assert!(report.circuits.is_none());
        assert!(report.cartan.is_none());
        assert_eq!(report.betti.beta, 2);
    }

    #[test]
    fn config_validation_rejects_contradictions() {
        let input = fixture_complex();
        let ok = base_config(input.path());
        assert!(ok.validate().is_ok());

        let mut no_input = ok.clone();
        no_input.complex = None;
        assert!(no_input.validate().is_err());

        let mut both = ok.clone();
        both.points = Some(PathBuf::from("x.csv"));
        assert!(both.validate().is_err());

        let mut zero_shots = ok.clone();
        zero_shots.shots = 0;
        assert!(zero_shots.validate().is_err());

        let mut noisy_exact = ok.clone();
        noisy_exact.protocol = Protocol::Exact;
        noisy_exact.noise_p1 = 0.01;
        assert!(noisy_exact.validate().is_err());

        let mut scrambled = ok.clone();
        scrambled.scope = ScopeChoice::ComplexOnly;
        assert!(scrambled.validate().is_err());

        let mut dense_mirror = ok;
        dense_mirror.evolution = EvolutionChoice::Dense;
        assert!(dense_mirror.validate().is_err());
    }

    #[test]
    fn artifacts_are_deterministic() {
        let input = fixture_complex();
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config(input.path());
        config.protocol = Protocol::Mirror;
        config.shots = 64;
        config.f_s = Some(13);
        config.out = Some(dir.path().join("run"));
        analyze(&config).unwrap();
        let first: Vec<(String, Vec<u8>)> = ["report.json", "signal.csv", "spectrum.json", "cartan.json"]
            .iter()
            .map(|f| {
                (
                    f.to_string(),
                    std::fs::read(dir.path().join("run").join(f)).unwrap(),
                )
            })
            .collect();
        analyze(&config).unwrap();
        for (name, bytes) in first {
            let again = std::fs::read(dir.path().join("run").join(name)).unwrap();
            assert_eq!(bytes, again);
        }
    }

    #[test]
    fn single_vertex_complex_reports_one_component() {
        let mut file = tempfile::Builder::new().suffix(".json").tempfile().unwrap();
        write!(file, "{}", r#"{"n": 1, "maximal": [[1]]}"#).unwrap();
        let mut config = base_config(file.path());
        config.k = 0;
        config.protocol = Protocol::Exact;
        let report = analyze(&config).unwrap();
        assert_eq!(report.betti.beta, 1);
        assert!(report.cartan.is_none(), "zero operator skips compilation");
        assert_eq!(report.operator.terms, 0);
    }

    #[test]
    fn toml_and_json_configs_parse_alike() {
        let toml_text = "complex = \"cx.json\"\nk = 1\nprotocol = \"swap\"\nshots = 99\n\n[optimizer]\nrestarts = 2\n";
        let from_toml: RunConfig = toml::from_str(toml_text).unwrap();
        let json_text = r#"{"complex": "cx.json", "k": 1, "protocol": "swap", "shots": 99, "optimizer": {"restarts": 2}}"#;
        let from_json: RunConfig = serde_json::from_str(json_text).unwrap();
        assert_eq!(from_toml, from_json);
        assert_eq!(from_toml.shots, 99);
        assert_eq!(from_toml.optimizer.restarts, 2);
        assert_eq!(from_toml.optimizer.residual_tol, OptimizerConfig::default().residual_tol);
    }

    #[test]
    fn circuit_export_writes_deterministic_names() {
        let input = fixture_complex();
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config(input.path());
        config.out = Some(dir.path().to_path_buf());
        let written =
            export_circuits(&config, &[0, 2], 0b101, &CircuitVariant::ALL).unwrap();
        assert_eq!(written.len(), 8);
        assert!(dir.path().join("evolution_t0.qasm").exists());
        assert!(dir.path().join("mirror_t2_target5_cross.qasm").exists());
        let text = std::fs::read_to_string(dir.path().join("mirror_t0_target5_hot.qasm")).unwrap();
        assert!(text.starts_with("OPENQASM 2.0;"));
    }

    #[test]
    fn scan_table_has_header_and_rows() {
        let table = scan_table(3, 4096).unwrap();
        let mut lines = table.lines();
        assert_eq!(lines.next(), Some("edges,k,mean_dim,count"));
        assert!(table.lines().count() > 3);
        for line in table.lines().skip(1) {
            assert_eq!(line.split(',').count(), 4);
        }
    }
}
