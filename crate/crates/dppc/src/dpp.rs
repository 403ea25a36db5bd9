//! L-ensembles and marginal-kernel DPPs.
//!
//! An L-ensemble assigns every subset `x` of `{0, .., n-1}` the probability
//! `det(L_x) / det(L + I)`, where `L_x` is the principal minor of a symmetric
//! PSD kernel. The equivalent marginal form uses `K = L(L+I)⁻¹`, for which
//! `Pr(A ⊆ Y) = det(K_A)`. This module provides exact probabilities,
//! marginals with positive and negative evidence, conditional probabilities,
//! seeded random kernel generation, and a counter for the number of distinct
//! conditional distributions a kernel induces.

use crate::linalg::{self, Matrix, Subset};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Default tolerance under which two conditional probabilities are considered
/// equal by [`count_distinct_conditionals`].
pub const DEFAULT_DISTINCTNESS_TOL: f64 = 1e-9;

/// An L-ensemble: symmetric PSD kernel `L` plus its cached normalizer
/// `det(L + I)`.
#[derive(Clone, Debug)]
pub struct LEnsemble {
    l: Matrix,
    n: usize,
    normalizer: f64,
}

impl LEnsemble {
    /// Validate a kernel and cache its normalizer.
    ///
    /// Requirements: square, symmetric within 1e-12 (relative for large
    /// entries), and positive semidefinite up to a 1e-9 shift — checked by a
    /// shifted Cholesky factorization rather than an eigendecomposition.
    pub fn new(l: Matrix) -> Result<Self> {
        if !l.is_square() {
            return Err(Error::Dimension(format!(
                "L-ensemble kernel must be square, got {}x{}",
                l.n_rows(),
                l.n_cols()
            )));
        }
        if !l.is_symmetric(1e-12) {
            return Err(Error::Argument("L-ensemble kernel must be symmetric within 1e-12".into()));
        }
        let shift = 1e-9 * l.max_abs().max(1.0);
        if !linalg::psd_within(&l, shift) {
            return Err(Error::Argument(
                "L-ensemble kernel must be positive semidefinite (shifted Cholesky failed)".into(),
            ));
        }
        let n = l.n_rows();
        let normalizer = linalg::det(&l.add_scaled_identity(1.0)?)?;
        if !(normalizer > 0.0) {
            return Err(Error::Argument(format!(
                "det(L+I) = {normalizer} must be positive for a PSD kernel"
            )));
        }
        Ok(LEnsemble { l, n, normalizer })
    }

    /// Ground-set size.
    pub fn n(&self) -> usize {
        self.n
    }

    /// The kernel matrix L.
    pub fn kernel(&self) -> &Matrix {
        &self.l
    }

    /// The cached normalizing constant `det(L + I)`.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }
}

/// A DPP in marginal form: symmetric kernel `K` with eigenvalues in `[0, 1]`.
#[derive(Clone, Debug)]
pub struct MarginalDPP {
    k: Matrix,
    n: usize,
}

impl MarginalDPP {
    /// Validate a marginal kernel: square, symmetric within 1e-12, and with
    /// spectrum inside `[-1e-9, 1 + 1e-9]` (checked by shifted Cholesky on
    /// both `K` and `I - K`).
    pub fn new(k: Matrix) -> Result<Self> {
        if !k.is_square() {
            return Err(Error::Dimension(format!(
                "marginal kernel must be square, got {}x{}",
                k.n_rows(),
                k.n_cols()
            )));
        }
        if !k.is_symmetric(1e-12) {
            return Err(Error::Argument("marginal kernel must be symmetric within 1e-12".into()));
        }
        let n = k.n_rows();
        let shift = 1e-9 * k.max_abs().max(1.0);
        if !linalg::psd_within(&k, shift) {
            return Err(Error::Argument("marginal kernel must be positive semidefinite".into()));
        }
        let mut i_minus_k = Matrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                i_minus_k.set(i, j, i_minus_k.get(i, j) - k.get(i, j));
            }
        }
        if !linalg::psd_within(&i_minus_k, shift) {
            return Err(Error::Argument("marginal kernel must satisfy K ≼ I (eigenvalues at most 1)".into()));
        }
        Ok(MarginalDPP { k, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The kernel matrix K.
    pub fn kernel(&self) -> &Matrix {
        &self.k
    }
}

/// Probability of the complete assignment `x`: `det(L_x) / det(L + I)`.
/// The empty subset has probability `1 / det(L + I)`.
pub fn prob(e: &LEnsemble, x: &Subset) -> Result<f64> {
    if x.n() != e.n {
        return Err(Error::Dimension(format!(
            "assignment ranges over {} variables but the ensemble has {}",
            x.n(),
            e.n
        )));
    }
    Ok(linalg::principal_minor_det(&e.l, x)? / e.normalizer)
}

/// Convert an L-ensemble to marginal form: `K = L(L+I)⁻¹`.
///
/// The result is symmetrized (the identity is symmetric in exact arithmetic)
/// and validated to have spectrum in `[0, 1]` up to 1e-9.
pub fn marginal_kernel(e: &LEnsemble) -> Result<MarginalDPP> {
    let inv = linalg::psd_inverse(&e.l.add_scaled_identity(1.0)?)?;
    let mut k = e.l.matmul(&inv)?;
    for i in 0..e.n {
        for j in (i + 1)..e.n {
            let v = 0.5 * (k.get(i, j) + k.get(j, i));
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }
    MarginalDPP::new(k)
}

/// Marginal probability that all of `a` is included: `Pr(A ⊆ Y) = det(K_A)`.
/// The empty subset yields 1.
pub fn marginal_prob(d: &MarginalDPP, a: &Subset) -> Result<f64> {
    if a.n() != d.n {
        return Err(Error::Dimension(format!(
            "subset ranges over {} variables but the DPP has {}",
            a.n(),
            d.n
        )));
    }
    linalg::principal_minor_det(&d.k, a)
}

/// Marginal probability of mixed evidence: every variable in `a` is 1 and
/// every variable in `b` is 0 (variables outside `a ∪ b` are unconstrained).
///
/// Computed by inclusion–exclusion over the negative evidence:
/// `Σ_{S ⊆ B} (−1)^|S| det(K_{A∪S})`. The result is clamped to `[0, 1]` to
/// absorb rounding at the boundaries. `a` and `b` must be disjoint.
pub fn general_marginal(d: &MarginalDPP, a: &Subset, b: &Subset) -> Result<f64> {
    if a.n() != d.n || b.n() != d.n {
        return Err(Error::Dimension("evidence subsets must range over the DPP's ground set".into()));
    }
    if !a.is_disjoint(b) {
        return Err(Error::Argument("positive and negative evidence sets must be disjoint".into()));
    }
    if b.len() > 30 {
        return Err(Error::SizeGuard(format!(
            "inclusion–exclusion enumerates 2^|B| subsets; |B| = {} exceeds 30",
            b.len()
        )));
    }
    let b_members = b.members();
    let mut total = 0.0;
    for pick in 0u64..(1u64 << b_members.len()) {
        let mut members: Vec<usize> = a.members().to_vec();
        let mut sign = 1.0;
        for (bit, &idx) in b_members.iter().enumerate() {
            if pick >> bit & 1 == 1 {
                members.push(idx);
                sign = -sign;
            }
        }
        let s = Subset::new(d.n, members)?;
        total += sign * linalg::principal_minor_det(&d.k, &s)?;
    }
    debug_assert!(
        (-1e-9..=1.0 + 1e-9).contains(&total),
        "inclusion–exclusion total {total} outside [0,1] tolerance"
    );
    Ok(total.clamp(0.0, 1.0))
}

/// Conditional probability that variable `q` is 1 given that exactly the
/// variables in `a_in` are 1 and all others (except `q`) are 0:
/// `det(L_{A∪{q}}) / (det(L_{A∪{q}}) + det(L_A))`, equivalently
/// `1 / (1 + det(L_A)/det(L_{A∪{q}}))`.
///
/// Fails when the conditioning minor `det(L_{A∪{q}})` is not positive — the
/// conditional is undefined for singular evidence.
pub fn conditional_prob(e: &LEnsemble, q: usize, a_in: &Subset) -> Result<f64> {
    if q >= e.n || a_in.n() != e.n {
        return Err(Error::Dimension(format!(
            "conditional index {q} / subset over {} variables vs ensemble of {}",
            a_in.n(),
            e.n
        )));
    }
    if a_in.contains(q) {
        return Err(Error::Argument(format!("query variable {q} must not be part of the conditioning set")));
    }
    let with_q = linalg::principal_minor_det(&e.l, &a_in.with(q))?;
    if !(with_q > 0.0) {
        return Err(Error::SingularConditional(format!(
            "det(L_(A ∪ {{{q}}})) = {with_q} must be positive for the conditional to exist"
        )));
    }
    // PSD kernels have nonnegative principal minors; clip rounding noise.
    let without_q = linalg::principal_minor_det(&e.l, a_in)?.max(0.0);
    Ok(with_q / (with_q + without_q))
}

/// Deterministically generate a random L-ensemble: `L = BᵀB` with the entries
/// of the n x n matrix `B` drawn uniformly from `[-bound, bound]`.
///
/// If `|det L| ≤ 1e-12` (a measure-zero event under continuous sampling) the
/// kernel is regenerated from the next derived stream; see
/// [`random_lensemble_counted`] for the regeneration count.
pub fn random_lensemble(n: usize, bound: f64, seed: u64) -> Result<LEnsemble> {
    random_lensemble_counted(n, bound, seed).map(|(e, _)| e)
}

/// As [`random_lensemble`], additionally reporting how many candidate kernels
/// were discarded as numerically singular before one was accepted.
pub fn random_lensemble_counted(n: usize, bound: f64, seed: u64) -> Result<(LEnsemble, u32)> {
    if n == 0 {
        return Err(Error::Argument("ground-set size must be at least 1".into()));
    }
    if !(bound > 0.0) {
        return Err(Error::Argument(format!("sampling bound must be positive, got {bound}")));
    }
    const MAX_ATTEMPTS: u32 = 64;
    for attempt in 0..MAX_ATTEMPTS {
        let l = sample_gram(n, n, bound, seed, attempt as u64);
        if linalg::det(&l)?.abs() > 1e-12 {
            return Ok((LEnsemble::new(l)?, attempt));
        }
    }
    Err(Error::Argument(format!(
        "all {MAX_ATTEMPTS} sampled kernels were numerically singular (n={n}, bound={bound}, seed={seed})"
    )))
}

/// Random Gram kernel `L = BᵀB` with a rectangular `B ∈ R^{k_rows x n}`,
/// entries uniform on `[-bound, bound]`. With `k_rows < n` the kernel is
/// rank-deficient by construction (no regeneration is attempted); this is the
/// target generator for the mixture-fitting experiment.
pub fn random_gram_lensemble(n: usize, k_rows: usize, bound: f64, seed: u64) -> Result<LEnsemble> {
    if n == 0 || k_rows == 0 {
        return Err(Error::Argument("matrix dimensions must be at least 1".into()));
    }
    if !(bound > 0.0) {
        return Err(Error::Argument(format!("sampling bound must be positive, got {bound}")));
    }
    LEnsemble::new(sample_gram(n, k_rows, bound, seed, 0))
}

fn sample_gram(n: usize, k_rows: usize, bound: f64, seed: u64, stream: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let data: Vec<f64> = (0..k_rows * n).map(|_| bound * (2.0 * rng.gen::<f64>() - 1.0)).collect();
    let b = Matrix::new(k_rows, n, data).expect("sampled entries are finite");
    // Accumulation order is identical for (i,j) and (j,i), so the product is
    // bitwise symmetric.
    b.transpose().matmul(&b).expect("dimensions agree by construction")
}

/// Number of distinct values taken by `conditional_prob(e, q, ·)` over all
/// `2^(n-1)` conditioning subsets of the other variables.
///
/// Two values are distinct when they differ by more than `tol` (absolute);
/// values are sorted and clustered, so equality is transitive along chains.
/// Guarded to `n ≤ 20` — the enumeration is exponential.
pub fn count_distinct_conditionals(e: &LEnsemble, q: usize, tol: f64) -> Result<usize> {
    if e.n > 20 {
        return Err(Error::SizeGuard(format!(
            "conditional enumeration visits 2^(n-1) subsets; n = {} exceeds the guard of 20",
            e.n
        )));
    }
    if q >= e.n {
        return Err(Error::Dimension(format!("query index {q} out of range for {} variables", e.n)));
    }
    let others: Vec<usize> = (0..e.n).filter(|&i| i != q).collect();
    let mut values = Vec::with_capacity(1 << others.len());
    for pick in 0u64..(1u64 << others.len()) {
        let members: Vec<usize> =
            others.iter().enumerate().filter(|&(bit, _)| pick >> bit & 1 == 1).map(|(_, &i)| i).collect();
        let a_in = Subset::new(e.n, members)?;
        values.push(conditional_prob(e, q, &a_in)?);
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("conditional probabilities are not NaN"));
    Ok(1 + values.windows(2).filter(|w| w[1] - w[0] > tol).count())
}
