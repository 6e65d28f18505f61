//! Coefficient optimization that conjugates the compiled operator into the
//! abelian subalgebra.
//!
//! The frame is `K(theta) = prod_i exp(i theta_i k_i)` over the antisymmetric
//! basis elements in basis order. All conjugations act term by term in Pauli
//! space: a rotation generator leaves commuting strings alone and mixes each
//! anticommuting string with its partner by a Givens rotation of angle
//! `2 theta`. The cost `f(theta) = <K v K', target>` is minimized with an
//! analytic gradient, then the angles are polished by descending the squared
//! leakage outside the subalgebra; the leakage objective converges to zero,
//! so it is free of the additive rounding floor that stops descent on `f`
//! when the probe ladder spans several decades.

use super::{CartanError, CartanSplit};
use crate::operator::{product_phase_exp, Key, PauliSum, IDENTITY};
use crate::rng::derive_rng;
use rand::Rng;
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct KhkOptions {
    /// Base of the geometric coefficient ladder in `v`; transcendental so
    /// the ladder is rationally independent.
    pub gamma: f64,
    /// Stop when the gradient max-norm falls below this.
    pub grad_tol: f64,
    /// Iteration cap per attempt.
    pub max_iterations: u64,
    /// Random restarts after the zero start, each seeded from
    /// (seed, restart index).
    pub restarts: usize,
    /// Accept when the extracted operator leaks at most this much weight
    /// outside the subalgebra.
    pub residual_tol: f64,
    pub seed: u64,
}

impl Default for KhkOptions {
    fn default() -> Self {
        KhkOptions {
            gamma: std::f64::consts::PI,
            grad_tol: 1e-8,
            max_iterations: 100_000,
            restarts: 5,
            residual_tol: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct KhkResult {
    pub gamma: f64,
    /// One angle per frame generator, in the generator order of `k_keys`.
    pub theta_c: Vec<f64>,
    /// The conjugated operator projected onto the subalgebra, identity
    /// coefficient reinstated.
    pub h_sum: PauliSum,
    pub identity_coeff: f64,
    /// Weight leaked outside the subalgebra and dropped by the projection.
    pub residual: f64,
    /// Cost value at the accepted angles.
    pub cost: f64,
    /// Frame generators in application order (matches `theta_c`).
    pub k_keys: Vec<Key>,
    /// Subalgebra strings in selection order.
    pub h_keys: Vec<Key>,
    /// Random restarts consumed; 0 means the zero start succeeded.
    pub restarts_used: usize,
    pub iterations: u64,
}

#[derive(Serialize)]
struct HTermExport {
    label: String,
    coeff: f64,
}

#[derive(Serialize)]
struct KhkExport<'a> {
    gamma: f64,
    theta_c: &'a [f64],
    h_terms: Vec<HTermExport>,
    identity_coeff: f64,
    residual: f64,
}

/// JSON document for a result: angles, subalgebra terms with labels,
/// identity coefficient and residual.
pub fn export_json(result: &KhkResult, n: usize) -> String {
    let h_terms = result
        .h_sum
        .terms()
        .filter(|&(k, _)| k != IDENTITY)
        .map(|(k, c)| HTermExport {
            label: crate::operator::key_label(k, n),
            coeff: c,
        })
        .collect();
    serde_json::to_string_pretty(&KhkExport {
        gamma: result.gamma,
        theta_c: &result.theta_c,
        h_terms,
        identity_coeff: result.identity_coeff,
        residual: result.residual,
    })
    .expect("plain data serializes")
}

/// Givens pair table of one rotation generator over the basis:
/// `(a, b, s)` with `i * k * basis[a] = s * basis[b]`, each unordered pair
/// listed once with `a < b`.
type PairTable = Vec<(usize, usize, f64)>;

pub(crate) struct FrameWorkspace<'a> {
    split: &'a CartanSplit,
    tables: Vec<PairTable>,
}

impl<'a> FrameWorkspace<'a> {
    pub(crate) fn new(split: &'a CartanSplit) -> Self {
        let basis = &split.basis;
        let tables = split
            .k_indices
            .iter()
            .map(|&ki| {
                let kk = basis.key(ki);
                let mut pairs = PairTable::new();
                for a in 0..basis.dim() {
                    let g = basis.key(a);
                    if crate::operator::keys_commute(kk, g) {
                        continue;
                    }
                    let partner = (g.0 ^ kk.0, g.1 ^ kk.1);
                    let b = basis
                        .position(partner)
                        .expect("closure contains every commutator");
                    if a < b {
                        let m = product_phase_exp(kk.0, kk.1, g.0, g.1);
                        debug_assert!(m % 2 == 1);
                        let s = if m == 3 { 1.0 } else { -1.0 };
                        pairs.push((a, b, s));
                    }
                }
                pairs
            })
            .collect();
        FrameWorkspace { split, tables }
    }

    pub(crate) fn dim(&self) -> usize {
        self.split.basis.dim()
    }

    pub(crate) fn rotations(&self) -> usize {
        self.tables.len()
    }

    /// Applies `exp(i theta k_i) . exp(-i theta k_i)` in place.
    fn rotate(&self, w: &mut [f64], i: usize, theta: f64) {
        let (c, sigma) = ((2.0 * theta).cos(), (2.0 * theta).sin());
        for &(a, b, s) in &self.tables[i] {
            let (wa, wb) = (w[a], w[b]);
            w[a] = c * wa - s * sigma * wb;
            w[b] = s * sigma * wa + c * wb;
        }
    }

    /// `K w K'` (generators applied last-to-first).
    pub(crate) fn conjugate_forward(&self, w: &mut [f64], theta: &[f64]) {
        for i in (0..theta.len()).rev() {
            self.rotate(w, i, theta[i]);
        }
    }

    /// `K' w K` (generators applied first-to-last, angles negated).
    pub(crate) fn conjugate_backward(&self, w: &mut [f64], theta: &[f64]) {
        for i in 0..theta.len() {
            self.rotate(w, i, -theta[i]);
        }
    }

    pub(crate) fn vector_of(&self, sum: &PauliSum) -> Vec<f64> {
        let mut w = vec![0.0; self.dim()];
        for (key, coeff) in sum.terms() {
            let idx = self
                .split
                .basis
                .position(key)
                .expect("operator must be supported on the basis");
            w[idx] = coeff;
        }
        w
    }

    pub(crate) fn sum_of(&self, w: &[f64]) -> PauliSum {
        PauliSum::from_terms(
            w.iter()
                .enumerate()
                .map(|(i, &c)| (self.split.basis.key(i), c)),
        )
    }
}

struct Objective<'a> {
    ws: &'a FrameWorkspace<'a>,
    /// Normalized subalgebra probe vector.
    v: Vec<f64>,
    /// Target operator coefficients (identity removed).
    d: Vec<f64>,
}

impl<'a> Objective<'a> {
    fn new(ws: &'a FrameWorkspace<'a>, target: &PauliSum, gamma: f64) -> Self {
        let basis = &ws.split.basis;
        let mut v = vec![0.0; ws.dim()];
        let mut power = 1.0;
        let mut norm_sq = 0.0;
        for &hi in &ws.split.h_indices {
            if basis.key(hi) == IDENTITY {
                continue;
            }
            v[hi] = power;
            norm_sq += power * power;
            power *= gamma;
        }
        let scale = 1.0 / norm_sq.sqrt();
        for x in &mut v {
            *x *= scale;
        }
        let d = ws.vector_of(&target.without_identity());
        Objective { ws, v, d }
    }

    /// Cost and analytic gradient via one forward and one backward sweep.
    fn cost_grad(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let l = theta.len();
        let mut fwd: Vec<Vec<f64>> = Vec::with_capacity(l + 1);
        fwd.push(self.v.clone());
        for i in (0..l).rev() {
            let mut w = fwd.last().unwrap().clone();
            self.ws.rotate(&mut w, i, theta[i]);
            fwd.push(w);
        }
        // fwd[l - i] holds the probe rotated by generators i..l-1
        let rotated = fwd.last().unwrap();
        let f = dot(rotated, &self.d);
        let mut grad = vec![0.0; l];
        let mut back = self.d.clone();
        for i in 0..l {
            let pre = &fwd[l - 1 - i];
            grad[i] = self.deriv_dot(pre, &back, i, theta[i]);
            self.ws.rotate(&mut back, i, -theta[i]);
        }
        (f, grad)
    }

    /// `<d/dtheta rotate(pre), back>` for generator `i` at angle `theta`.
    fn deriv_dot(&self, pre: &[f64], back: &[f64], i: usize, theta: f64) -> f64 {
        let (c, sigma) = ((2.0 * theta).cos(), (2.0 * theta).sin());
        let mut acc = 0.0;
        for &(a, b, s) in &self.ws.tables[i] {
            acc += -2.0 * sigma * (back[a] * pre[a] + back[b] * pre[b])
                + 2.0 * s * c * (back[b] * pre[a] - back[a] * pre[b]);
        }
        acc
    }
}

/// Squared weight of the conjugated operator outside the subalgebra,
/// `L(theta) = |P_leak K' target K|^2`, with its analytic gradient. Unlike
/// the linear cost this objective tends to zero at a solution, so descent
/// keeps full relative precision arbitrarily close to it.
struct LeakObjective<'a> {
    ws: &'a FrameWorkspace<'a>,
    /// Target operator coefficients (identity removed).
    d: Vec<f64>,
    /// True on basis slots that count as leakage.
    leaking: Vec<bool>,
}

impl<'a> LeakObjective<'a> {
    fn new(ws: &'a FrameWorkspace<'a>, target: &PauliSum) -> Self {
        let allowed = allowed_slots(ws);
        let leaking = (0..ws.dim()).map(|i| !allowed.contains(&i)).collect();
        LeakObjective {
            ws,
            d: ws.vector_of(&target.without_identity()),
            leaking,
        }
    }

    fn cost_grad(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let l = theta.len();
        // states[i] is the vector entering generator i of the backward sweep
        let mut states: Vec<Vec<f64>> = Vec::with_capacity(l + 1);
        states.push(self.d.clone());
        for i in 0..l {
            let mut w = states.last().unwrap().clone();
            self.ws.rotate(&mut w, i, -theta[i]);
            states.push(w);
        }
        let out = states.last().unwrap();
        let mut cost = 0.0;
        let mut cot = vec![0.0; out.len()];
        for (idx, &w) in out.iter().enumerate() {
            if self.leaking[idx] {
                cost += w * w;
                cot[idx] = 2.0 * w;
            }
        }
        let mut grad = vec![0.0; l];
        for i in (0..l).rev() {
            let x = &states[i];
            let (c, sigma) = ((2.0 * theta[i]).cos(), (-2.0 * theta[i]).sin());
            let mut acc = 0.0;
            for &(a, b, s) in &self.ws.tables[i] {
                // output of this generator: [c x_a - s sigma x_b, s sigma x_a + c x_b]
                // differentiated in the applied angle -theta_i
                let da = -2.0 * sigma * x[a] - 2.0 * s * c * x[b];
                let db = 2.0 * s * c * x[a] - 2.0 * sigma * x[b];
                acc += cot[a] * da + cot[b] * db;
            }
            // chain rule through the negated application angle
            grad[i] = -acc;
            // cotangent through the orthogonal rotation: transpose = inverse
            self.ws.rotate(&mut cot, i, theta[i]);
        }
        (cost, grad)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn linf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Adaptive-step descent: Barzilai-Borwein step proposal with Armijo
/// backtracking. Stops at the gradient tolerance, the iteration cap, a
/// failed line search, or (when given) a cost target. Returns the angles,
/// final cost and iterations used.
fn minimize(
    cost_grad: impl Fn(&[f64]) -> (f64, Vec<f64>),
    theta0: Vec<f64>,
    grad_tol: f64,
    max_iterations: u64,
    stop_below: Option<f64>,
) -> (Vec<f64>, f64, u64) {
    let mut theta = theta0;
    let (mut f, mut g) = cost_grad(&theta);
    let mut alpha = 1e-3;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut iters = 0;
    while iters < max_iterations {
        if linf(&g) < grad_tol || stop_below.is_some_and(|target| f <= target) {
            break;
        }
        iters += 1;
        if let Some((s, y)) = &prev {
            let sy = dot(s, y);
            let yy = dot(y, y);
            if sy > f64::MIN_POSITIVE && yy > f64::MIN_POSITIVE {
                alpha = (sy / yy).clamp(1e-10, 1e2);
            }
        }
        let gg = dot(&g, &g);
        let mut step = alpha;
        let mut moved = false;
        for _ in 0..64 {
            let cand: Vec<f64> = theta.iter().zip(&g).map(|(t, gi)| t - step * gi).collect();
            let (fc, gc) = cost_grad(&cand);
            if fc <= f - 1e-4 * step * gg {
                let s = cand.iter().zip(&theta).map(|(a, b)| a - b).collect();
                let y = gc.iter().zip(&g).map(|(a, b)| a - b).collect();
                prev = Some((s, y));
                theta = cand;
                f = fc;
                g = gc;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (theta, f, iters)
}

struct Extraction {
    h_sum: PauliSum,
    residual: f64,
}

/// Basis slots the extraction may keep: the subalgebra plus the identity.
fn allowed_slots(ws: &FrameWorkspace) -> std::collections::HashSet<usize> {
    ws.split
        .h_indices
        .iter()
        .copied()
        .chain(ws.split.basis.position(IDENTITY))
        .collect()
}

fn extract(ws: &FrameWorkspace, target: &PauliSum, theta: &[f64]) -> Extraction {
    let mut w = ws.vector_of(&target.without_identity());
    ws.conjugate_backward(&mut w, theta);
    let mut h_sum = PauliSum::new();
    let mut leak_sq = 0.0;
    let allowed = allowed_slots(ws);
    for (idx, &coeff) in w.iter().enumerate() {
        if allowed.contains(&idx) {
            h_sum.add_term(ws.split.basis.key(idx), coeff);
        } else {
            leak_sq += coeff * coeff;
        }
    }
    h_sum.add_term(IDENTITY, target.identity_coeff());
    Extraction {
        h_sum,
        residual: leak_sq.sqrt(),
    }
}

/// Finds frame angles that conjugate the operator into the subalgebra: zero
/// start first, then seeded random restarts, accepting the first attempt
/// whose extraction residual meets the tolerance. Each attempt runs the
/// linear-cost descent and then polishes the angles against the leakage
/// objective.
pub fn khk_optimize(
    hamiltonian: &PauliSum,
    split: &CartanSplit,
    opts: &KhkOptions,
) -> Result<KhkResult, CartanError> {
    if split.h_indices.is_empty() {
        return Err(CartanError::EmptyCsa);
    }
    let ws = FrameWorkspace::new(split);
    let obj = Objective::new(&ws, hamiltonian, opts.gamma);
    let leak = LeakObjective::new(&ws, hamiltonian);
    let leak_target = (opts.residual_tol * 1e-3).powi(2);
    let l = ws.rotations();
    let mut best_residual = f64::INFINITY;
    let mut total_iters = 0;
    for attempt in 0..=opts.restarts {
        let theta0 = if attempt == 0 {
            vec![0.0; l]
        } else {
            let mut rng = derive_rng(opts.seed, "khk-restart", attempt as u64);
            (0..l).map(|_| rng.gen_range(-0.5..0.5)).collect()
        };
        let (theta, _, iters) = minimize(
            |t| obj.cost_grad(t),
            theta0,
            opts.grad_tol,
            opts.max_iterations,
            None,
        );
        total_iters += iters;
        let (theta, _, polish_iters) = minimize(
            |t| leak.cost_grad(t),
            theta,
            0.0,
            opts.max_iterations,
            Some(leak_target),
        );
        total_iters += polish_iters;
        let cost = obj.cost_grad(&theta).0;
        let ext = extract(&ws, hamiltonian, &theta);
        if ext.residual <= opts.residual_tol {
            return Ok(KhkResult {
                gamma: opts.gamma,
                theta_c: theta,
                h_sum: ext.h_sum,
                identity_coeff: hamiltonian.identity_coeff(),
                residual: ext.residual,
                cost,
                k_keys: split.k_keys(),
                h_keys: split.h_keys(),
                restarts_used: attempt,
                iterations: total_iters,
            });
        }
        best_residual = best_residual.min(ext.residual);
    }
    Err(CartanError::NotConverged {
        best: best_residual,
    })
}

/// Conjugates an operator supported on the basis by the frame:
/// forward gives `K A K'`, backward `K' A K`. Exposed for validation against
/// dense conjugation.
pub fn conjugate_sum(
    split: &CartanSplit,
    theta: &[f64],
    op: &PauliSum,
    forward: bool,
) -> PauliSum {
    let ws = FrameWorkspace::new(split);
    let mut w = ws.vector_of(op);
    if forward {
        ws.conjugate_forward(&mut w, theta);
    } else {
        ws.conjugate_backward(&mut w, theta);
    }
    ws.sum_of(&w)
}
