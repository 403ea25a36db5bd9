//! Mixture fitting: approximate an exact subset distribution with mixtures
//! of tractable components and compare the results.
//!
//! The target is an explicit table of all `2^n` assignment probabilities
//! (from an L-ensemble or anywhere else). Two mixture families are
//! supported, sized for a fair comparison: rank-one-perturbed diagonal
//! (R1P) components with `2n` distribution parameters each, and fully
//! factorized Bernoulli components with `n` each — so `m` R1P components
//! match `2m` factorized ones.
//!
//! All constraints are kept implicit through reparameterization: diagonals
//! `d = exp(a)`, perturbation scale `λ = exp(b)`, Bernoulli means
//! `p = sigmoid(z)`, mixture weights as normalized exponentials of logits.
//! Training minimizes exact KL divergence by full-batch gradient descent
//! with backtracking step halving (the KL history is non-increasing by
//! construction) and seeded random restarts whose outcome is independent of
//! execution order.

use crate::linalg::Subset;
use crate::{dpp, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Central-difference step used by [`fd_gradient`] and the
/// finite-difference training mode.
pub const FD_STEP: f64 = 1e-5;

const MAX_REINITS_PER_RESTART: u32 = 50;
/// Base RNG stream for restart initializations, far away from the low
/// stream indices used by kernel generation on the same seed.
const RESTART_STREAM_BASE: u64 = 0x9E37_79B9;

/// Exact distribution over all `2^n` subsets, indexed by bitmask
/// (bit `i` = variable `i`).
#[derive(Clone, Debug, PartialEq)]
pub struct TargetTable {
    n: usize,
    probs: Vec<f64>,
}

impl TargetTable {
    /// Validate a dense table: `2^n` nonnegative entries summing to
    /// 1 ± 1e−8, with `n ≤ 20`.
    pub fn new(n: usize, probs: Vec<f64>) -> Result<Self> {
        if n > 20 {
            return Err(Error::SizeGuard(format!("explicit tables are limited to n ≤ 20, got {n}")));
        }
        if probs.len() != 1 << n {
            return Err(Error::Dimension(format!(
                "table over {n} variables needs {} entries, got {}",
                1usize << n,
                probs.len()
            )));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::Argument(format!("table entry {i} = {p} must be finite and nonnegative")));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::Argument(format!("table sums to {total}, expected 1 ± 1e-8")));
        }
        Ok(TargetTable { n, probs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: &Subset) -> f64 {
        self.probs[x.mask() as usize]
    }
}

/// Tabulate an L-ensemble's distribution exhaustively (`n ≤ 20`).
pub fn exact_distribution(e: &dpp::LEnsemble) -> Result<TargetTable> {
    let n = e.n();
    if n > 20 {
        return Err(Error::SizeGuard(format!(
            "tabulating 2^n assignment probabilities is limited to n ≤ 20, got {n}"
        )));
    }
    let probs = (0u64..1 << n)
        .map(|mask| dpp::prob(e, &Subset::from_mask(n, mask)))
        .collect::<Result<Vec<f64>>>()?;
    TargetTable::new(n, probs)
}

/// Mixture component family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixtureKind {
    /// Rank-one-perturbed diagonal L-ensembles, `2n` distribution
    /// parameters per component (diagonal log-values and perturbation
    /// vector; the scale `λ` rides along as one extra reparameterized
    /// value).
    R1P,
    /// Fully factorized Bernoulli products, `n` parameters per component.
    Factorized,
}

/// A mixture of `m` components over `n` binary variables, stored as one
/// unconstrained parameter vector.
///
/// Layout: `m` mixture logits first, then one block per component —
/// R1P blocks are `[a_0..a_{n-1}, u_0..u_{n-1}, b]` with `d = exp(a)` and
/// `λ = exp(b)`; factorized blocks are `[z_0..z_{n-1}]` with
/// `p = sigmoid(z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureModel {
    kind: MixtureKind,
    n: usize,
    m: usize,
    raw: Vec<f64>,
}

/// One decoded mixture component.
enum Component {
    R1P { d: Vec<f64>, u: Vec<f64>, lambda: f64 },
    Factorized { p: Vec<f64> },
}

impl MixtureModel {
    fn block_len(kind: MixtureKind, n: usize) -> usize {
        match kind {
            MixtureKind::R1P => 2 * n + 1,
            MixtureKind::Factorized => n,
        }
    }

    fn raw_len(kind: MixtureKind, n: usize, m: usize) -> usize {
        m + m * Self::block_len(kind, n)
    }

    pub fn new(kind: MixtureKind, n: usize, m: usize, raw: Vec<f64>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Argument("mixtures need n ≥ 1 variables and m ≥ 1 components".into()));
        }
        let want = Self::raw_len(kind, n, m);
        if raw.len() != want {
            return Err(Error::Dimension(format!(
                "{kind:?} mixture with m={m}, n={n} needs {want} raw parameters, got {}",
                raw.len()
            )));
        }
        if let Some((i, &v)) = raw.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Argument(format!("raw parameter {i} = {v} must be finite")));
        }
        Ok(MixtureModel { kind, n, m, raw })
    }

    /// All-zero raw parameters: uniform weights, and uniform components
    /// (`d = 1`, `u = 0`, `λ = 1` for R1P; `p = 1/2` for factorized).
    /// Handy as a [`train`] architecture template.
    pub fn zeros(kind: MixtureKind, n: usize, m: usize) -> Result<Self> {
        Self::new(kind, n, m, vec![0.0; Self::raw_len(kind, n, m)])
    }

    /// Random initialization: mixture and Bernoulli logits
    /// ~ Normal(0, 0.01), R1P `a` ~ Normal(0, 0.1), `u` ~ Normal(0, 1),
    /// `b = 0` — variances, i.e. standard deviations 0.1 / √0.1 / 1.
    pub fn init<R: Rng + ?Sized>(
        kind: MixtureKind,
        n: usize,
        m: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let tiny = Normal::new(0.0, 0.01f64.sqrt()).expect("valid sigma");
        let small = Normal::new(0.0, 0.1f64.sqrt()).expect("valid sigma");
        let unit = Normal::new(0.0, 1.0).expect("valid sigma");
        let mut raw = Vec::with_capacity(Self::raw_len(kind, n, m));
        for _ in 0..m {
            raw.push(tiny.sample(rng));
        }
        match kind {
            MixtureKind::R1P => {
                for _ in 0..m {
                    for _ in 0..n {
                        raw.push(small.sample(rng));
                    }
                    for _ in 0..n {
                        raw.push(unit.sample(rng));
                    }
                    raw.push(0.0);
                }
            }
            MixtureKind::Factorized => {
                for _ in 0..m * n {
                    raw.push(tiny.sample(rng));
                }
            }
        }
        Self::new(kind, n, m, raw)
    }

    pub fn kind(&self) -> MixtureKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn raw_params(&self) -> &[f64] {
        &self.raw
    }

    /// Replace the raw parameter vector (same layout and length).
    pub fn with_raw(&self, raw: Vec<f64>) -> Result<Self> {
        Self::new(self.kind, self.n, self.m, raw)
    }

    /// Distribution parameters per the fairness bookkeeping: `2·m·n` for
    /// R1P, `m·n` for factorized (mixture logits and `λ` not counted).
    pub fn parameter_count(&self) -> usize {
        match self.kind {
            MixtureKind::R1P => 2 * self.m * self.n,
            MixtureKind::Factorized => self.m * self.n,
        }
    }

    /// Mixture weights: normalized exponentials of the leading logits.
    pub fn weights(&self) -> Vec<f64> {
        let logits = &self.raw[..self.m];
        let max = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let exps: Vec<f64> = logits.iter().map(|&c| (c - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / total).collect()
    }

    fn component(&self, k: usize) -> Component {
        let start = self.m + k * Self::block_len(self.kind, self.n);
        match self.kind {
            MixtureKind::R1P => {
                let a = &self.raw[start..start + self.n];
                let u = &self.raw[start + self.n..start + 2 * self.n];
                let b = self.raw[start + 2 * self.n];
                Component::R1P {
                    d: a.iter().map(|&ai| ai.exp()).collect(),
                    u: u.to_vec(),
                    lambda: b.exp(),
                }
            }
            MixtureKind::Factorized => {
                let z = &self.raw[start..start + self.n];
                Component::Factorized { p: z.iter().map(|&zi| sigmoid(zi)).collect() }
            }
        }
    }

    /// The model's full probability table over all `2^n` masks.
    pub fn prob_table(&self) -> Result<Vec<f64>> {
        let w = self.weights();
        let mut q = vec![0.0; 1 << self.n];
        for k in 0..self.m {
            let tab = component_table(&self.component(k), self.n);
            for (qm, t) in q.iter_mut().zip(&tab.q) {
                *qm += w[k] * t;
            }
        }
        Ok(q)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Per-component tables over all masks: the normalized probability `q`,
/// and for R1P components the inner sums `s[mask] = Σ_{i∈mask} u_i²/d_i`
/// needed by the gradient.
struct CompTable {
    q: Vec<f64>,
    s: Vec<f64>,
    /// `T = Σ_i u_i²/(d_i+1)` (R1P only; 0 for factorized).
    t: f64,
}

fn component_table(comp: &Component, n: usize) -> CompTable {
    match comp {
        Component::R1P { d, u, lambda } => {
            // Doubling construction: extend the tables one variable at a
            // time; the new variable's bit indexes the upper half.
            let mut prod = vec![1.0f64];
            let mut s = vec![0.0f64];
            for i in 0..n {
                let len = prod.len();
                prod.extend_from_within(..);
                s.extend_from_within(..);
                let ratio = u[i] * u[i] / d[i];
                for mask in 0..len {
                    prod[len + mask] *= d[i];
                    s[len + mask] += ratio;
                }
            }
            let t: f64 = (0..n).map(|i| u[i] * u[i] / (d[i] + 1.0)).sum();
            let z: f64 =
                d.iter().map(|&di| di + 1.0).product::<f64>() * (1.0 + lambda * t);
            let q: Vec<f64> =
                prod.iter().zip(&s).map(|(&pr, &si)| pr * (1.0 + lambda * si) / z).collect();
            CompTable { q, s, t }
        }
        Component::Factorized { p } => {
            let mut q = vec![1.0f64];
            for &pi in p.iter().take(n) {
                let len = q.len();
                q.extend_from_within(..);
                for mask in 0..len {
                    q[mask] *= 1.0 - pi;
                    q[len + mask] *= pi;
                }
            }
            CompTable { q, s: vec![0.0; 1 << n], t: 0.0 }
        }
    }
}

/// Mixture probability of one complete assignment.
pub fn model_prob(m: &MixtureModel, x: &Subset) -> Result<f64> {
    if x.n() != m.n() {
        return Err(Error::Dimension(format!(
            "assignment over {} variables, model has {}",
            x.n(),
            m.n()
        )));
    }
    let w = m.weights();
    let mut total = 0.0;
    for k in 0..m.m() {
        let qk = match m.component(k) {
            Component::R1P { d, u, lambda } => {
                let members = x.members();
                let prod: f64 = members.iter().map(|&i| d[i]).product();
                let s: f64 = members.iter().map(|&i| u[i] * u[i] / d[i]).sum();
                let t: f64 = (0..m.n()).map(|i| u[i] * u[i] / (d[i] + 1.0)).sum();
                let z: f64 =
                    d.iter().map(|&di| di + 1.0).product::<f64>() * (1.0 + lambda * t);
                prod * (1.0 + lambda * s) / z
            }
            Component::Factorized { p } => (0..m.n())
                .map(|i| if x.contains(i) { p[i] } else { 1.0 - p[i] })
                .product(),
        };
        total += w[k] * qk;
    }
    Ok(total)
}

/// Exact KL divergence `Σ_x P(x)·ln(P(x)/Q(x))` between a target table and
/// a mixture model. Fails with a divergence error when the model assigns a
/// nonpositive or non-finite probability to a target-support assignment.
pub fn kl(p: &TargetTable, m: &MixtureModel) -> Result<f64> {
    if p.n() != m.n() {
        return Err(Error::Dimension(format!(
            "target over {} variables, model over {}",
            p.n(),
            m.n()
        )));
    }
    let q = m.prob_table()?;
    kl_against_table(p, &q)
}

fn kl_against_table(p: &TargetTable, q: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for (mask, &px) in p.probs().iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        let qx = q[mask];
        if !(qx > 0.0) || !qx.is_finite() {
            return Err(Error::DivergenceInfinite(format!(
                "model probability {qx} at assignment mask {mask:b} with target mass {px}"
            )));
        }
        total += px * (px / qx).ln();
    }
    Ok(total)
}

/// Analytic gradient of [`kl`] with respect to the raw parameter vector.
pub fn gradient(m: &MixtureModel, p: &TargetTable) -> Result<Vec<f64>> {
    if p.n() != m.n() {
        return Err(Error::Dimension(format!(
            "target over {} variables, model over {}",
            p.n(),
            m.n()
        )));
    }
    let n = m.n();
    let n_masks = 1usize << n;
    let w = m.weights();
    let comps: Vec<Component> = (0..m.m()).map(|k| m.component(k)).collect();
    let tables: Vec<CompTable> = comps.iter().map(|c| component_table(c, n)).collect();
    let mut q = vec![0.0f64; n_masks];
    for (k, tab) in tables.iter().enumerate() {
        for (qm, t) in q.iter_mut().zip(&tab.q) {
            *qm += w[k] * t;
        }
    }
    for (mask, &px) in p.probs().iter().enumerate() {
        if px > 0.0 && (!(q[mask] > 0.0) || !q[mask].is_finite()) {
            return Err(Error::DivergenceInfinite(format!(
                "model probability {} at assignment mask {mask:b} with target mass {px}",
                q[mask]
            )));
        }
    }
    let sum_p: f64 = p.probs().iter().sum();

    let mut grad = vec![0.0f64; m.raw_params().len()];
    for k in 0..m.m() {
        let tab = &tables[k];
        // Responsibilities: γ(x) = P(x)·w_k·q_k(x)/Q(x), accumulated into
        // Γ = Σ γ plus the per-variable sums each family needs.
        let mut big_gamma = 0.0;
        match &comps[k] {
            Component::R1P { d, u, lambda } => {
                let mut g1 = vec![0.0f64; n]; // Σ_{x∋i} γ(x)
                let mut g2 = vec![0.0f64; n]; // Σ_{x∋i} γ(x)/(1+λS_x)
                let mut g3 = 0.0; // Σ_x γ(x)·λS_x/(1+λS_x)
                for (mask, &px) in p.probs().iter().enumerate() {
                    if px == 0.0 {
                        continue;
                    }
                    let gamma = px * w[k] * tab.q[mask] / q[mask];
                    big_gamma += gamma;
                    let denom = 1.0 + lambda * tab.s[mask];
                    g3 += gamma * lambda * tab.s[mask] / denom;
                    let mut bits = mask;
                    while bits != 0 {
                        let i = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        g1[i] += gamma;
                        g2[i] += gamma / denom;
                    }
                }
                let start = m.m() + k * MixtureModel::block_len(m.kind(), n);
                let zt = 1.0 + lambda * tab.t;
                for i in 0..n {
                    let usq = u[i] * u[i];
                    // ∂lnZ/∂a_i and ∂lnZ/∂u_i pieces (x-independent).
                    let za = d[i] / (d[i] + 1.0)
                        - lambda * usq * d[i] / ((d[i] + 1.0) * (d[i] + 1.0) * zt);
                    let zu = 2.0 * lambda * u[i] / ((d[i] + 1.0) * zt);
                    grad[start + i] = -(g1[i] - lambda * usq / d[i] * g2[i]) + big_gamma * za;
                    grad[start + n + i] =
                        -(2.0 * lambda * u[i] / d[i]) * g2[i] + big_gamma * zu;
                }
                grad[start + 2 * n] = -g3 + big_gamma * lambda * tab.t / zt;
            }
            Component::Factorized { p: probs } => {
                let mut h = vec![0.0f64; n]; // Σ_{x∋i} γ(x)
                for (mask, &px) in p.probs().iter().enumerate() {
                    if px == 0.0 {
                        continue;
                    }
                    let gamma = px * w[k] * tab.q[mask] / q[mask];
                    big_gamma += gamma;
                    let mut bits = mask;
                    while bits != 0 {
                        let i = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        h[i] += gamma;
                    }
                }
                let start = m.m() + k * MixtureModel::block_len(m.kind(), n);
                for i in 0..n {
                    grad[start + i] = -(h[i] - probs[i] * big_gamma);
                }
            }
        }
        grad[k] = w[k] * sum_p - big_gamma;
    }
    Ok(grad)
}

/// Central finite-difference gradient of [`kl`] (step [`FD_STEP`] unless
/// overridden). Slow; intended for validation and the finite-difference
/// training mode.
pub fn fd_gradient(m: &MixtureModel, p: &TargetTable, step: f64) -> Result<Vec<f64>> {
    let mut grad = vec![0.0f64; m.raw_params().len()];
    let mut raw = m.raw_params().to_vec();
    for i in 0..raw.len() {
        let orig = raw[i];
        raw[i] = orig + step;
        let hi = kl(p, &m.with_raw(raw.clone())?)?;
        raw[i] = orig - step;
        let lo = kl(p, &m.with_raw(raw.clone())?)?;
        raw[i] = orig;
        grad[i] = (hi - lo) / (2.0 * step);
    }
    Ok(grad)
}

/// How [`train`] computes gradients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientMode {
    Analytic,
    FiniteDifference,
}

/// Training configuration. `restarts` independent random initializations
/// are run (deterministically derived from `seed` and the restart index)
/// and the best final KL wins.
#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    pub gradient_mode: GradientMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1.0,
            iterations: 1000,
            restarts: 20,
            seed: 0,
            gradient_mode: GradientMode::Analytic,
        }
    }
}

/// Outcome of [`train`]: the best model over all restarts, that restart's
/// KL trace (initial value plus one entry per completed iteration), and
/// bookkeeping.
#[derive(Clone, Debug)]
pub struct TrainResult {
    pub model: MixtureModel,
    pub kl_history: Vec<f64>,
    pub best_restart: usize,
    /// Restart attempts abandoned because the initialization (or a
    /// gradient evaluation) produced a non-finite objective.
    pub reinitializations: u32,
}

struct RestartOutcome {
    final_kl: f64,
    model: MixtureModel,
    history: Vec<f64>,
    reinits: u32,
}

/// Fit a mixture to a target table by gradient descent with backtracking
/// and random restarts.
///
/// The input model supplies the architecture (kind, n, m); every restart
/// draws fresh parameters from its own RNG stream, so results depend only
/// on `cfg.seed`, the restart index, and the architecture — not on thread
/// scheduling. Within one restart the step starts at `cfg.learning_rate`,
/// grows 2x per iteration, and halves (at most 30 times per iteration)
/// until the KL does not increase, which makes the history non-increasing;
/// if no step length helps, the restart stops early at its local optimum.
pub fn train(template: &MixtureModel, p: &TargetTable, cfg: &TrainConfig) -> Result<TrainResult> {
    if template.n() != p.n() {
        return Err(Error::Dimension(format!(
            "model over {} variables, target over {}",
            template.n(),
            p.n()
        )));
    }
    if cfg.restarts == 0 {
        return Err(Error::Argument("training needs at least one restart".into()));
    }
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) {
        return Err(Error::Argument(format!(
            "learning rate {} must be positive and finite",
            cfg.learning_rate
        )));
    }

    let workers = effective_threads().min(cfg.restarts).max(1);
    let run = |restart: usize| -> Result<RestartOutcome> {
        run_restart(template, p, cfg, restart)
    };

    let outcomes: Vec<Result<RestartOutcome>> = if workers == 1 {
        (0..cfg.restarts).map(run).collect()
    } else {
        let slots: Mutex<Vec<Option<Result<RestartOutcome>>>> =
            Mutex::new((0..cfg.restarts).map(|_| None).collect());
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let r = next.fetch_add(1, Ordering::Relaxed);
                    if r >= cfg.restarts {
                        break;
                    }
                    let out = run(r);
                    slots.lock().expect("no poisoned worker")[r] = Some(out);
                });
            }
        });
        slots
            .into_inner()
            .expect("workers finished")
            .into_iter()
            .map(|o| o.expect("every restart index was claimed"))
            .collect()
    };

    let mut best: Option<(usize, RestartOutcome)> = None;
    let mut reinits = 0;
    for (idx, outcome) in outcomes.into_iter().enumerate() {
        let outcome = outcome?;
        reinits += outcome.reinits;
        let better = match &best {
            None => true,
            Some((_, b)) => outcome.final_kl < b.final_kl,
        };
        if better {
            best = Some((idx, outcome));
        }
    }
    let (best_restart, outcome) = best.expect("at least one restart ran");
    Ok(TrainResult {
        model: outcome.model,
        kl_history: outcome.history,
        best_restart,
        reinitializations: reinits,
    })
}

/// Worker-count policy: the `DPPC_THREADS` environment variable when set
/// (0 = auto), otherwise the machine's available parallelism.
fn effective_threads() -> usize {
    let auto = || std::thread::available_parallelism().map(|v| v.get()).unwrap_or(1);
    match std::env::var("DPPC_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) | Err(_) => auto(),
            Ok(k) => k,
        },
        Err(_) => auto(),
    }
}

fn run_restart(
    template: &MixtureModel,
    p: &TargetTable,
    cfg: &TrainConfig,
    restart: usize,
) -> Result<RestartOutcome> {
    let mut reinits = 0u32;
    'attempt: loop {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(RESTART_STREAM_BASE + (restart as u64) * 64 + u64::from(reinits));
        let mut model = MixtureModel::init(template.kind(), template.n(), template.m(), &mut rng)?;
        let mut current = match kl(p, &model) {
            Ok(v) if v.is_finite() => v,
            Ok(_) | Err(Error::DivergenceInfinite(_)) => {
                reinits += 1;
                if reinits > MAX_REINITS_PER_RESTART {
                    return Err(Error::DivergenceInfinite(format!(
                        "restart {restart} failed to initialize after {MAX_REINITS_PER_RESTART} attempts"
                    )));
                }
                continue 'attempt;
            }
            Err(e) => return Err(e),
        };
        let mut history = vec![current];
        // The step length persists across iterations: it grows by 2x on
        // entry (optimism) and backtracking halves it while the objective
        // would increase, so it hovers near the largest workable step.
        let mut step = cfg.learning_rate;
        for _ in 0..cfg.iterations {
            let grad = match cfg.gradient_mode {
                GradientMode::Analytic => gradient(&model, p),
                GradientMode::FiniteDifference => fd_gradient(&model, p, FD_STEP),
            };
            let grad = match grad {
                Ok(g) => g,
                Err(Error::DivergenceInfinite(_)) => {
                    reinits += 1;
                    if reinits > MAX_REINITS_PER_RESTART {
                        return Err(Error::DivergenceInfinite(format!(
                            "restart {restart} diverged after {MAX_REINITS_PER_RESTART} attempts"
                        )));
                    }
                    continue 'attempt;
                }
                Err(e) => return Err(e),
            };
            step = (step * 2.0).min(cfg.learning_rate * 1e6);
            let mut accepted = false;
            for _ in 0..=30 {
                let raw: Vec<f64> = model
                    .raw_params()
                    .iter()
                    .zip(&grad)
                    .map(|(&v, &g)| v - step * g)
                    .collect();
                if raw.iter().all(|v| v.is_finite()) {
                    let candidate = model.with_raw(raw)?;
                    if let Ok(v) = kl(p, &candidate) {
                        if v.is_finite() && v <= current {
                            model = candidate;
                            current = v;
                            accepted = true;
                            break;
                        }
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                // Even the smallest step fails to improve the objective: a
                // (numerical) local optimum. The next iteration would see
                // the same gradient from a smaller starting step, so only
                // the step schedule, not the endpoint, could differ — stop.
                break;
            }
            history.push(current);
        }
        return Ok(RestartOutcome { final_kl: current, model, history, reinits });
    }
}

/// One row of the mixture-comparison report.
#[derive(Clone, Debug, PartialEq)]
pub struct Table1Row {
    pub m: usize,
    pub baseline_kl: f64,
    pub r1p_kl: f64,
    pub ratio: f64,
}

/// The head-to-head experiment: tabulate a random Gram L-ensemble over `n`
/// items (`B ∈ R^{k_rows×n}`, entries uniform in `[-1, 1]`, seeded by
/// `cfg.seed`), then for each `m` fit an R1P mixture with `m` components
/// against a factorized mixture with `2m` components (equal parameter
/// budgets) and report both KLs.
pub fn run_table1(
    n: usize,
    k_rows: usize,
    m_list: &[usize],
    cfg: &TrainConfig,
) -> Result<Vec<Table1Row>> {
    if n > 14 {
        return Err(Error::SizeGuard(format!(
            "the exhaustive experiment is limited to n ≤ 14, got {n}"
        )));
    }
    let target = exact_distribution(&dpp::random_gram_lensemble(n, k_rows, 1.0, cfg.seed)?)?;
    let mut rows = Vec::with_capacity(m_list.len());
    for &m in m_list {
        if m == 0 {
            return Err(Error::Argument("component counts must be at least 1".into()));
        }
        let r1p = train(&MixtureModel::zeros(MixtureKind::R1P, n, m)?, &target, cfg)?;
        let fact =
            train(&MixtureModel::zeros(MixtureKind::Factorized, n, 2 * m)?, &target, cfg)?;
        let r1p_kl = *r1p.kl_history.last().expect("history is never empty");
        let baseline_kl = *fact.kl_history.last().expect("history is never empty");
        rows.push(Table1Row { m, baseline_kl, r1p_kl, ratio: baseline_kl / r1p_kl });
    }
    Ok(rows)
}

/// CSV rendering of [`run_table1`] rows with run metadata as comments.
pub fn table1_csv(rows: &[Table1Row], n: usize, k_rows: usize, cfg: &TrainConfig) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# seed={} n={} k_rows={} iterations={} restarts={} learning_rate={}\n",
        cfg.seed, n, k_rows, cfg.iterations, cfg.restarts, cfg.learning_rate
    ));
    out.push_str("m,baseline_kl,r1p_kl,ratio\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.m, r.baseline_kl, r.r1p_kl, r.ratio));
    }
    out
}
