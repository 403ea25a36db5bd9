//! Circuit and kernel constructions.
//!
//! This module holds the bridges between determinantal models and circuits:
//! fully factorized circuits and their diagonal kernels, a division-free
//! determinant circuit built from the clow-sequence dynamic program, the
//! symbolic-kernel compilation of an L-ensemble into a circuit over its
//! ground-set variables, the exact marginal kernel of the uniform
//! spanning-tree distribution on a complete graph, compact circuits for
//! rank-one-perturbed diagonal kernels, and the witness-kernel computations
//! used to separate conditional distributions.

use crate::circuit::{Circuit, CircuitBuilder, LeafConfig, NodeId};
use crate::dpp::{LEnsemble, MarginalDPP};
use crate::linalg::{self, Matrix, Subset};
use crate::{Error, Result};

/// Fully factorized distribution as a circuit:
/// `f(x) = Π_i (p_i·x_i + (1−p_i)·(1−x_i))`.
///
/// The result is smooth, decomposable, and deterministic, and its
/// normalizing constant is exactly 1.
pub fn factorized_circuit(p: &[f64]) -> Result<Circuit> {
    if p.is_empty() {
        return Err(Error::Argument("need at least one variable".into()));
    }
    for (i, &pi) in p.iter().enumerate() {
        if !(0.0..=1.0).contains(&pi) {
            return Err(Error::Argument(format!("p[{i}] = {pi} is not a probability in [0, 1]")));
        }
    }
    let mut b = CircuitBuilder::new(p.len());
    let gadgets: Vec<NodeId> = p
        .iter()
        .enumerate()
        .map(|(v, &pi)| {
            let pos = b.leaf(v, true);
            let neg = b.leaf(v, false);
            b.sum(vec![(pi, pos), (1.0 - pi, neg)])
        })
        .collect();
    let root = b.product(gadgets);
    Ok(b.build(root))
}

/// The diagonal L-ensemble with the same distribution as
/// [`factorized_circuit`]: `L = diag(p_i / (1 − p_i))`.
pub fn diag_kernel_of(p: &[f64]) -> Result<LEnsemble> {
    if p.is_empty() {
        return Err(Error::Argument("need at least one variable".into()));
    }
    let mut l = Matrix::zeros(p.len(), p.len());
    for (i, &pi) in p.iter().enumerate() {
        if !(0.0..=1.0).contains(&pi) {
            return Err(Error::Argument(format!("p[{i}] = {pi} is not a probability in [0, 1]")));
        }
        if pi == 1.0 {
            return Err(Error::Division(format!(
                "p[{i}] = 1 has infinite odds and no finite diagonal kernel entry"
            )));
        }
        l.set(i, i, pi / (1.0 - pi));
    }
    LEnsemble::new(l)
}

/// Clow-sequence dynamic program, shared by [`det_circuit`] and
/// [`symbolic_kernel_compile`].
///
/// `entry[i][j]` is the node computing the (i, j) matrix entry. The DP state
/// (clow head `h`, current vertex `u ≥ h`) is advanced `n − 1` times; closing
/// a clow contributes an explicit −1 sum weight, and the final layer closes
/// every open clow back to its head with an overall sign of `(−1)^{n+1}`.
/// The construction is division-free, which is what makes it realizable as a
/// circuit; the price is negative parameters, and the result is neither
/// decomposable nor deterministic.
fn clow_skeleton(b: &mut CircuitBuilder, n: usize, entry: &[Vec<NodeId>]) -> NodeId {
    if n == 1 {
        return entry[0][0];
    }
    // state[h][u] = node summing all partial clow sequences of the current
    // length with open head h and current vertex u.
    let mut state: Vec<Vec<Option<NodeId>>> = vec![vec![None; n]; n];
    for h in 0..n {
        for u in h..n {
            if u > h {
                state[h][u] = Some(entry[h][u]);
            } else if h > 0 {
                let terms: Vec<(f64, NodeId)> =
                    (0..h).map(|prev| (-1.0, entry[prev][prev])).collect();
                state[h][h] = Some(b.sum(terms));
            }
        }
    }
    for _length in 2..n {
        let mut next: Vec<Vec<Option<NodeId>>> = vec![vec![None; n]; n];
        for h in 0..n {
            for u in h..n {
                let mut terms: Vec<(f64, NodeId)> = Vec::new();
                if u > h {
                    // Extend the open clow by the edge (w, u).
                    for w in h..n {
                        if let Some(s) = state[h][w] {
                            let p = b.product(vec![s, entry[w][u]]);
                            terms.push((1.0, p));
                        }
                    }
                } else {
                    // Close a clow with head h0 < h and open a new one at h.
                    for h0 in 0..h {
                        for w in h0..n {
                            if let Some(s) = state[h0][w] {
                                let p = b.product(vec![s, entry[w][h0]]);
                                terms.push((-1.0, p));
                            }
                        }
                    }
                }
                if !terms.is_empty() {
                    next[h][u] = Some(b.sum(terms));
                }
            }
        }
        state = next;
    }
    let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
    let mut terms: Vec<(f64, NodeId)> = Vec::new();
    for h in 0..n {
        for u in h..n {
            if let Some(s) = state[h][u] {
                let p = b.product(vec![s, entry[u][h]]);
                terms.push((sign, p));
            }
        }
    }
    b.sum(terms)
}

/// Division-free determinant circuit over `n²` formal inputs.
///
/// Variable `i·n + j` stands for the matrix entry `t_ij`; evaluate the
/// circuit with [`det_input_config`] to compute the determinant of a
/// concrete matrix. Polynomial identity with the determinant, so it is exact
/// up to floating-point rounding. Node count grows like `n⁴` (one product
/// per DP transition); the negative sum weights carry the permutation signs.
pub fn det_circuit(n: usize) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::Argument("determinant circuits need n ≥ 1".into()));
    }
    let mut b = CircuitBuilder::new(n * n);
    let entry: Vec<Vec<NodeId>> =
        (0..n).map(|i| (0..n).map(|j| b.leaf(i * n + j, true)).collect()).collect();
    let root = clow_skeleton(&mut b, n, &entry);
    Ok(b.build(root))
}

/// Leaf configuration that feeds a concrete matrix into [`det_circuit`]:
/// the positive literal of variable `i·n + j` is `m[i][j]`.
pub fn det_input_config(m: &Matrix) -> Result<LeafConfig> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "determinant inputs must be square, got {}x{}",
            m.n_rows(),
            m.n_cols()
        )));
    }
    let n = m.n_rows();
    let mut values = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            values.push((1.0, m.get(i, j)));
        }
    }
    Ok(LeafConfig::new(values))
}

/// Compile an L-ensemble into a circuit over its `n` ground-set variables
/// whose value on every complete assignment `x` is the unnormalized
/// probability `det(L_x)`.
///
/// Each matrix entry of the determinant DP is replaced by a gadget:
/// diagonal `L_ii·X_i + X̄_i`, off-diagonal `L_ij·X_i·X_j` (shared between
/// `(i,j)` and `(j,i)`). Evaluating the all-ones configuration yields
/// `det(L + I)`, the normalizer. The output is neither decomposable nor
/// deterministic and carries negative weights — compactness is bought by
/// giving up every tractability property.
pub fn symbolic_kernel_compile(e: &LEnsemble) -> Circuit {
    let n = e.n();
    let l = e.kernel();
    let mut b = CircuitBuilder::new(n);
    let pos: Vec<NodeId> = (0..n).map(|i| b.leaf(i, true)).collect();
    let neg: Vec<NodeId> = (0..n).map(|i| b.leaf(i, false)).collect();
    let mut entry = vec![vec![0 as NodeId; n]; n];
    for i in 0..n {
        entry[i][i] = b.sum(vec![(l.get(i, i), pos[i]), (1.0, neg[i])]);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let p = b.product(vec![pos[i], pos[j]]);
            let gadget = b.sum(vec![(l.get(i, j), p)]);
            entry[i][j] = gadget;
            entry[j][i] = gadget;
        }
    }
    let root = clow_skeleton(&mut b, n, &entry);
    b.build(root)
}

/// Marginal-kernel DPP of the uniform distribution over spanning trees of
/// the complete graph `K_n`. Ground-set items are the `C(n, 2)` edges
/// `e_ij` (1-based vertices, `i < j`) in lexicographic order.
#[derive(Clone, Debug)]
pub struct SpanningTreeDPP {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
    dpp: MarginalDPP,
}

/// Build the spanning-tree DPP for the complete graph on `n ≥ 2` vertices.
///
/// The kernel entry for edges `(i, j)` and `(l, k)` is `2/n` when they are
/// equal, `1/n` when `i = l` or `j = k`, `−1/n` when `j = l` or `i = k`, and
/// 0 otherwise. The result is a projection (`K² = K`) with trace `n − 1`,
/// and `det(K_A) · n^{n−2}` counts the spanning trees containing the edge
/// set `A`.
pub fn spanning_tree_dpp(n: usize) -> Result<SpanningTreeDPP> {
    if n < 2 {
        return Err(Error::Argument(format!("spanning trees need at least 2 vertices, got {n}")));
    }
    let edges: Vec<(usize, usize)> =
        (1..=n).flat_map(|i| ((i + 1)..=n).map(move |j| (i, j))).collect();
    let m = edges.len();
    let nf = n as f64;
    let mut k = Matrix::zeros(m, m);
    for (a, &(i, j)) in edges.iter().enumerate() {
        for (b, &(l, kk)) in edges.iter().enumerate() {
            let v = if i == l && j == kk {
                2.0 / nf
            } else if i == l || j == kk {
                1.0 / nf
            } else if j == l || i == kk {
                -1.0 / nf
            } else {
                0.0
            };
            k.set(a, b, v);
        }
    }
    Ok(SpanningTreeDPP { n_vertices: n, edges, dpp: MarginalDPP::new(k)? })
}

impl SpanningTreeDPP {
    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    /// Edges in kernel index order: `(i, j)` with 1-based `i < j`,
    /// lexicographic.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Position of edge `(i, j)` (either endpoint order) in the kernel.
    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        let key = (i.min(j), i.max(j));
        self.edges.iter().position(|&e| e == key)
    }

    pub fn marginal_dpp(&self) -> &MarginalDPP {
        &self.dpp
    }

    pub fn kernel(&self) -> &Matrix {
        self.dpp.kernel()
    }

    /// CSV rendering: a `# edges: e12 e13 …` comment naming the index order,
    /// then the kernel in the standard matrix CSV format.
    pub fn to_csv(&self) -> String {
        let names: Vec<String> = self.edges.iter().map(|&(i, j)| format!("e{i}{j}")).collect();
        format!("# edges: {}\n{}", names.join(" "), self.kernel().to_csv())
    }
}

/// Rank-one-perturbed diagonal L-ensemble kernel: `L = D + λ·uuᵀ` with
/// `d_i ≥ 0` and `λ ≥ 0` (PSD by construction).
#[derive(Clone, Debug, PartialEq)]
pub struct R1PModel {
    d: Vec<f64>,
    lambda: f64,
    u: Vec<f64>,
}

impl R1PModel {
    pub fn new(d: Vec<f64>, lambda: f64, u: Vec<f64>) -> Result<Self> {
        if d.is_empty() || d.len() != u.len() {
            return Err(Error::Dimension(format!(
                "diagonal has {} entries, perturbation vector has {}",
                d.len(),
                u.len()
            )));
        }
        for (i, &di) in d.iter().enumerate() {
            if !(di >= 0.0 && di.is_finite()) {
                return Err(Error::Argument(format!("d[{i}] = {di} must be finite and nonnegative")));
            }
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Argument(format!("lambda = {lambda} must be finite and nonnegative")));
        }
        if let Some((i, &ui)) = u.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Argument(format!("u[{i}] = {ui} must be finite")));
        }
        Ok(R1PModel { d, lambda, u })
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// The dense kernel `D + λ·uuᵀ`.
    pub fn kernel(&self) -> Matrix {
        let n = self.n();
        let mut l = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut v = self.lambda * self.u[i] * self.u[j];
                if i == j {
                    v += self.d[i];
                }
                l.set(i, j, v);
            }
        }
        l
    }

    pub fn lensemble(&self) -> Result<LEnsemble> {
        LEnsemble::new(self.kernel())
    }

    /// Principal minor in closed form:
    /// `det(L_A) = Π_{i∈A} d_i + λ·Σ_{i∈A} u_i² Π_{j∈A, j≠i} d_j`
    /// (matrix determinant lemma applied to the submatrix). Empty `A` → 1.
    pub fn minor(&self, a: &Subset) -> Result<f64> {
        if a.n() != self.n() {
            return Err(Error::Dimension(format!(
                "subset over {} items, model has {}",
                a.n(),
                self.n()
            )));
        }
        let members = a.members();
        let prod: f64 = members.iter().map(|&i| self.d[i]).product();
        let mut sum = 0.0;
        for &i in members {
            let rest: f64 =
                members.iter().filter(|&&j| j != i).map(|&j| self.d[j]).product();
            sum += self.u[i] * self.u[i] * rest;
        }
        Ok(prod + self.lambda * sum)
    }

    /// The normalizing constant `det(L + I)` in closed form (same shape as
    /// [`R1PModel::minor`] with every `d_i` shifted by 1).
    pub fn normalizer(&self) -> f64 {
        let n = self.n();
        let prod: f64 = self.d.iter().map(|&di| di + 1.0).product();
        let mut sum = 0.0;
        for i in 0..n {
            let rest: f64 = (0..n).filter(|&j| j != i).map(|j| self.d[j] + 1.0).product();
            sum += self.u[i] * self.u[i] * rest;
        }
        prod + self.lambda * sum
    }
}

/// Compile a rank-one-perturbed diagonal model into a smooth, decomposable
/// circuit with `O(n)` nodes.
///
/// Per-variable gadgets `g_j = d_j·X_j + X̄_j` are shared through prefix and
/// suffix product chains, so every term
/// `λu_i²·X_i · Π_{j<i} g_j · Π_{j>i} g_j` reuses two existing chains. On a
/// complete assignment the circuit computes the principal minor
/// `det((D + λuuᵀ)_x)`; the all-ones configuration gives `det(D + λuuᵀ + I)`.
pub fn r1p_circuit(m: &R1PModel) -> Circuit {
    let n = m.n();
    let mut b = CircuitBuilder::new(n);
    let pos: Vec<NodeId> = (0..n).map(|v| b.leaf(v, true)).collect();
    let neg: Vec<NodeId> = (0..n).map(|v| b.leaf(v, false)).collect();
    let g: Vec<NodeId> =
        (0..n).map(|j| b.sum(vec![(m.d[j], pos[j]), (1.0, neg[j])])).collect();
    // prefix[i] = Π_{j<i} g_j (None when i = 0); suffix[i] = Π_{j>i} g_j.
    let mut prefix: Vec<Option<NodeId>> = vec![None; n];
    for i in 1..n {
        prefix[i] = Some(match prefix[i - 1] {
            None => g[i - 1],
            Some(p) => b.product(vec![p, g[i - 1]]),
        });
    }
    let mut suffix: Vec<Option<NodeId>> = vec![None; n];
    for i in (0..n - 1).rev() {
        suffix[i] = Some(match suffix[i + 1] {
            None => g[i + 1],
            Some(s) => b.product(vec![g[i + 1], s]),
        });
    }
    let full = match prefix[n - 1] {
        None => g[n - 1],
        Some(p) => b.product(vec![p, g[n - 1]]),
    };
    let mut terms = vec![(1.0, full)];
    for i in 0..n {
        let h = b.sum(vec![(m.lambda * m.u[i] * m.u[i], pos[i])]);
        let mut children = Vec::new();
        if let Some(p) = prefix[i] {
            children.push(p);
        }
        children.push(h);
        if let Some(s) = suffix[i] {
            children.push(s);
        }
        let term = if children.len() == 1 { h } else { b.product(children) };
        terms.push((1.0, term));
    }
    let root = b.sum(terms);
    b.build(root)
}

/// Witness kernel with a distinguished item `q`: identity off row/column
/// `q`, `(√2)^{i+1}` at `(i, q)` and `(q, i)` for `i ≠ q`, and
/// `s = 2^{n+1} − 2` at `(q, q)` (0-based indices carry the exponent
/// `i + 1`).
///
/// Its defining property: `det(L_{B∪{q}}) = s − Σ_{b∈B} 2^{b+1}` for every
/// `B` avoiding `q`, which is injective over subsets `B` by uniqueness of
/// binary representations — so all `2^{n−1}` conditional distributions of
/// item `q` are distinct.
pub fn witness_kernel(n: usize, q: usize) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::Argument("witness kernels need n ≥ 1".into()));
    }
    if q >= n {
        return Err(Error::Dimension(format!("distinguished index {q} out of range for n = {n}")));
    }
    let mut l = Matrix::identity(n);
    let root2 = 2.0f64.sqrt();
    for i in 0..n {
        if i != q {
            let v = root2.powi(i as i32 + 1);
            l.set(i, q, v);
            l.set(q, i, v);
        }
    }
    l.set(q, q, 2.0f64.powi(n as i32 + 1) - 2.0);
    Ok(l)
}

/// Closed form for the witness kernel's minors that include `q`:
/// `det(L_{B∪{q}}) = (2^{n+1} − 2) − Σ_{b∈B} 2^{b+1}`.
pub fn witness_minor_closed_form(n: usize, q: usize, b: &Subset) -> Result<f64> {
    if q >= n || b.n() != n {
        return Err(Error::Dimension(format!(
            "index {q} / subset over {} items vs n = {n}",
            b.n()
        )));
    }
    if b.contains(q) {
        return Err(Error::Argument(format!("subset must avoid the distinguished index {q}")));
    }
    let s = 2.0f64.powi(n as i32 + 1) - 2.0;
    let drop: f64 = b.members().iter().map(|&i| 2.0f64.powi(i as i32 + 1)).sum();
    Ok(s - drop)
}

/// The two-subset odds polynomial
/// `f = det(L_A)·det(L_{B∪{q}}) − det(L_B)·det(L_{A∪{q}})`.
///
/// `f = 0` exactly when conditioning on `A` and on `B` gives item `q` the
/// same conditional odds; a kernel whose `f` never vanishes over distinct
/// pairs has all-distinct conditionals.
pub fn f_polynomial_eval(l: &Matrix, a: &Subset, b: &Subset, q: usize) -> Result<f64> {
    if !l.is_square() || a.n() != l.n_rows() || b.n() != l.n_rows() || q >= l.n_rows() {
        return Err(Error::Dimension("subsets, index, and kernel must share one ground set".into()));
    }
    if a.contains(q) || b.contains(q) {
        return Err(Error::Argument(format!("subsets must avoid the distinguished index {q}")));
    }
    let det_a = linalg::principal_minor_det(l, a)?;
    let det_b = linalg::principal_minor_det(l, b)?;
    let det_aq = linalg::principal_minor_det(l, &a.with(q))?;
    let det_bq = linalg::principal_minor_det(l, &b.with(q))?;
    Ok(det_a * det_bq - det_b * det_aq)
}

/// Bounded multiplicative-independence check over principal minors.
///
/// Returns `true` when no relation `(det L_A)^r = Π_{B≠A} (det L_B)^{r_B}`
/// holds for any nonempty `A`, `1 ≤ r ≤ max_exp`, and exponents
/// `0 ≤ r_B ≤ max_exp` over the other nonempty subsets, compared in log
/// space with absolute tolerance 1e−9. Requires every principal minor to
/// exceed 1, and `n ≤ 3` (the exponent grid has `(max_exp+1)^(2ⁿ−2)`
/// points per choice of `A` and `r`).
pub fn check_condition2_bounded(l: &Matrix, max_exp: u32) -> Result<bool> {
    if !l.is_square() {
        return Err(Error::Dimension(format!(
            "kernel must be square, got {}x{}",
            l.n_rows(),
            l.n_cols()
        )));
    }
    let n = l.n_rows();
    if n == 0 || n > 3 {
        return Err(Error::SizeGuard(format!(
            "exponent-grid enumeration is only feasible for 1 ≤ n ≤ 3, got {n}"
        )));
    }
    if max_exp == 0 {
        return Err(Error::Argument("max_exp must be at least 1".into()));
    }
    let count = (1usize << n) - 1;
    let mut log_minors = Vec::with_capacity(count);
    for mask in 1..=count as u64 {
        let s = Subset::from_mask(n, mask);
        let d = linalg::principal_minor_det(l, &s)?;
        if !(d > 1.0) {
            return Err(Error::Argument(format!(
                "principal minor det(L_{{{}}}) = {d} must exceed 1 for the independence check",
                s.to_bitstring()
            )));
        }
        log_minors.push(d.ln());
    }
    const TOL: f64 = 1e-9;
    for a_idx in 0..count {
        let others: Vec<f64> = log_minors
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != a_idx)
            .map(|(_, &v)| v)
            .collect();
        for r in 1..=max_exp {
            let target = f64::from(r) * log_minors[a_idx];
            let mut exps = vec![0u32; others.len()];
            'grid: loop {
                let rhs: f64 =
                    exps.iter().zip(&others).map(|(&e, &lv)| f64::from(e) * lv).sum();
                if (rhs - target).abs() <= TOL {
                    return Ok(false);
                }
                for slot in exps.iter_mut() {
                    if *slot < max_exp {
                        *slot += 1;
                        continue 'grid;
                    }
                    *slot = 0;
                }
                break;
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpp;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let data: Vec<f64> = (0..n * n).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect();
        Matrix::new(n, n, data).unwrap()
    }

    #[test]
    fn factorized_circuit_is_the_product_of_bernoullis() {
        let c = factorized_circuit(&[0.5; 4]).unwrap();
        for mask in 0u64..16 {
            assert!((c.evaluate(&Subset::from_mask(4, mask)).unwrap() - 0.0625).abs() < 1e-15);
        }
        let r = c.analyze();
        assert!(r.decomposable && r.smooth);
        assert_eq!(r.deterministic, crate::circuit::DeterminismCheck::Verified(true));

        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p: Vec<f64> = (0..5).map(|_| rng.gen()).collect();
        let c = factorized_circuit(&p).unwrap();
        let total: f64 =
            (0u64..32).map(|m| c.evaluate(&Subset::from_mask(5, m)).unwrap()).sum();
        assert!((total - 1.0).abs() <= 1e-12, "normalizing constant {total}");

        assert!(matches!(factorized_circuit(&[1.5]), Err(Error::Argument(_))));
    }

    #[test]
    fn diag_kernel_matches_factorized_circuit() {
        let e = diag_kernel_of(&[0.5, 0.5, 0.5]).unwrap();
        assert_eq!(e.kernel(), &Matrix::identity(3));

        let p = [0.2, 0.8];
        let e = diag_kernel_of(&p).unwrap();
        assert!((e.kernel().get(0, 0) - 0.25).abs() < 1e-15);
        assert!((e.kernel().get(1, 1) - 4.0).abs() < 1e-12);
        let c = factorized_circuit(&p).unwrap();
        for mask in 0u64..4 {
            let x = Subset::from_mask(2, mask);
            assert!((dpp::prob(&e, &x).unwrap() - c.evaluate(&x).unwrap()).abs() <= 1e-10);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p: Vec<f64> = (0..6).map(|_| rng.gen::<f64>() * 0.95).collect();
        let e = diag_kernel_of(&p).unwrap();
        let c = factorized_circuit(&p).unwrap();
        for mask in 0u64..64 {
            let x = Subset::from_mask(6, mask);
            assert!((dpp::prob(&e, &x).unwrap() - c.evaluate(&x).unwrap()).abs() <= 1e-10);
        }

        assert!(matches!(diag_kernel_of(&[1.0]), Err(Error::Division(_))));
    }

    #[test]
    fn det_circuit_small_closed_forms() {
        let c1 = det_circuit(1).unwrap();
        let m = Matrix::from_rows(&[vec![7.5]]).unwrap();
        assert_eq!(c1.evaluate_config(&det_input_config(&m).unwrap()).unwrap(), 7.5);

        let c2 = det_circuit(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let m = random_matrix(2, &mut rng);
            let got = c2.evaluate_config(&det_input_config(&m).unwrap()).unwrap();
            let want = m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0);
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
        assert!(c2.has_negative_parameter());
    }

    #[test]
    fn det_circuit_matches_lu_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=6 {
            let c = det_circuit(n).unwrap();
            for _ in 0..20 {
                let m = random_matrix(n, &mut rng);
                let got = c.evaluate_config(&det_input_config(&m).unwrap()).unwrap();
                let want = linalg::det(&m).unwrap();
                assert!(
                    (got - want).abs() <= 1e-9 * want.abs().max(1.0),
                    "n={n}: circuit {got} vs LU {want}"
                );
            }
        }
    }

    #[test]
    fn det_input_config_rejects_non_square() {
        let m = Matrix::zeros(2, 3);
        assert!(matches!(det_input_config(&m), Err(Error::Dimension(_))));
    }

    #[test]
    fn symbolic_kernel_matches_minors_on_worked_example() {
        let l = Matrix::from_rows(&[
            vec![2.0, 1.1, 1.4],
            vec![1.1, 2.5, 0.5],
            vec![1.4, 0.5, 3.0],
        ])
        .unwrap();
        let e = LEnsemble::new(l.clone()).unwrap();
        let c = symbolic_kernel_compile(&e);
        for mask in 0u64..8 {
            let x = Subset::from_mask(3, mask);
            let got = c.evaluate(&x).unwrap();
            let want = linalg::principal_minor_det(&l, &x).unwrap();
            assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "mask {mask:03b}");
        }
        let x02 = Subset::new(3, vec![0, 2]).unwrap();
        assert!((c.evaluate(&x02).unwrap() - 4.04).abs() <= 1e-9);
        assert_eq!(c.evaluate(&Subset::empty(3)).unwrap(), 1.0);
        let z = c.evaluate_config(&LeafConfig::all_ones(3)).unwrap();
        assert!((z - 31.09).abs() <= 1e-9, "normalizer from the all-ones configuration: {z}");

        let r = c.analyze();
        assert!(!r.decomposable);
        assert_eq!(r.deterministic, crate::circuit::DeterminismCheck::Verified(false));
        assert!(r.has_negative_parameter);
    }

    #[test]
    fn symbolic_kernel_matches_minors_on_random_ensembles() {
        let e = dpp::random_lensemble(4, 1.0, 77).unwrap();
        let c = symbolic_kernel_compile(&e);
        for mask in 0u64..16 {
            let x = Subset::from_mask(4, mask);
            let got = c.evaluate(&x).unwrap();
            let want = linalg::principal_minor_det(e.kernel(), &x).unwrap();
            assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0));
        }
    }

    /// Decode a Prüfer sequence over 1-based vertices into a tree edge list.
    fn prufer_tree(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
        let mut degree = vec![1usize; n + 1];
        for &s in seq {
            degree[s] += 1;
        }
        let mut edges = Vec::with_capacity(n - 1);
        for &s in seq {
            let leaf = (1..=n).find(|&v| degree[v] == 1).unwrap();
            edges.push((leaf.min(s), leaf.max(s)));
            degree[leaf] -= 1;
            degree[s] -= 1;
        }
        let rem: Vec<usize> = (1..=n).filter(|&v| degree[v] == 1).collect();
        edges.push((rem[0], rem[1]));
        edges
    }

    fn all_labeled_trees(n: usize) -> Vec<Vec<(usize, usize)>> {
        let count = n.pow(n as u32 - 2);
        let mut trees = Vec::with_capacity(count);
        for code in 0..count {
            let mut seq = Vec::with_capacity(n - 2);
            let mut c = code;
            for _ in 0..n - 2 {
                seq.push(1 + c % n);
                c /= n;
            }
            trees.push(prufer_tree(&seq, n));
        }
        trees
    }

    #[test]
    fn spanning_tree_kernel_matches_printed_four_vertex_case() {
        let st = spanning_tree_dpp(4).unwrap();
        assert_eq!(st.edges(), &[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]);
        let k = st.kernel();
        for i in 0..6 {
            assert!((k.get(i, i) - 0.5).abs() < 1e-15);
        }
        let e12 = st.edge_index(1, 2).unwrap();
        assert!((k.get(e12, st.edge_index(1, 3).unwrap()) - 0.25).abs() < 1e-15);
        assert!((k.get(e12, st.edge_index(2, 3).unwrap()) + 0.25).abs() < 1e-15);
        assert!(k.get(e12, st.edge_index(3, 4).unwrap()).abs() < 1e-15);

        let trace: f64 = (0..6).map(|i| k.get(i, i)).sum();
        assert!((trace - 3.0).abs() < 1e-12);
        let ksq = k.matmul(k).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert!((ksq.get(i, j) - k.get(i, j)).abs() <= 1e-8, "projection at ({i},{j})");
            }
        }

        let pair = Subset::new(6, vec![e12, st.edge_index(2, 4).unwrap()]).unwrap();
        let p = dpp::marginal_prob(st.marginal_dpp(), &pair).unwrap();
        assert!((p - 3.0 / 16.0).abs() <= 1e-12, "3 of 16 trees contain e12 and e24: {p}");
        assert_eq!(all_labeled_trees(4).len(), 16);
    }

    #[test]
    fn spanning_tree_marginals_count_trees_by_enumeration() {
        let n = 5;
        let st = spanning_tree_dpp(n).unwrap();
        let trees = all_labeled_trees(n);
        assert_eq!(trees.len(), 125);
        let m = st.edges().len();
        // Single edges and all pairs.
        for a in 0..m {
            for b in a..m {
                let members = if a == b { vec![a] } else { vec![a, b] };
                let subset = Subset::new(m, members.clone()).unwrap();
                let det = dpp::marginal_prob(st.marginal_dpp(), &subset).unwrap();
                let cnt = trees
                    .iter()
                    .filter(|t| members.iter().all(|&e| t.contains(&st.edges()[e])))
                    .count();
                assert!(
                    (det * 125.0 - cnt as f64).abs() <= 1e-6,
                    "edges {members:?}: det·125 = {} vs count {cnt}",
                    det * 125.0
                );
            }
        }
    }

    #[test]
    fn spanning_tree_csv_names_the_edge_order() {
        let st = spanning_tree_dpp(4).unwrap();
        let csv = st.to_csv();
        assert!(csv.starts_with("# edges: e12 e13 e14 e23 e24 e34\n6\n"), "{csv}");
        let back = Matrix::from_csv(&csv).unwrap();
        assert_eq!(&back, st.kernel());
    }

    #[test]
    fn r1p_minor_and_normalizer_match_dense_linear_algebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [1usize, 3, 5] {
            let d: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0).collect();
            let u: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let m = R1PModel::new(d, rng.gen::<f64>() * 1.5, u).unwrap();
            let l = m.kernel();
            for mask in 0u64..1 << n {
                let s = Subset::from_mask(n, mask);
                let direct = linalg::principal_minor_det(&l, &s).unwrap();
                let closed = m.minor(&s).unwrap();
                assert!(
                    (direct - closed).abs() <= 1e-10 * direct.abs().max(1.0),
                    "n={n} mask={mask:b}: {closed} vs {direct}"
                );
            }
            let z = linalg::det(&l.add_scaled_identity(1.0).unwrap()).unwrap();
            assert!((m.normalizer() - z).abs() <= 1e-10 * z.max(1.0));
        }
    }

    #[test]
    fn r1p_circuit_matches_minors_and_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1usize, 2, 3, 6, 10] {
            let d: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0).collect();
            let u: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let m = R1PModel::new(d, 0.3 + rng.gen::<f64>(), u).unwrap();
            let c = r1p_circuit(&m);
            assert!(c.is_smooth(), "n={n}");
            assert!(c.is_decomposable(), "n={n}");
            for mask in 0u64..1 << n {
                let x = Subset::from_mask(n, mask);
                let got = c.evaluate(&x).unwrap();
                let want = m.minor(&x).unwrap();
                assert!(
                    (got - want).abs() <= 1e-10 * want.abs().max(1.0),
                    "n={n} mask={mask:b}: {got} vs {want}"
                );
            }
            let z = c.evaluate_config(&LeafConfig::all_ones(n)).unwrap();
            let root_lambda = m.lambda().sqrt();
            let su: Vec<f64> = m.u().iter().map(|v| v * root_lambda).collect();
            let mut d_plus = Matrix::zeros(n, n);
            for i in 0..n {
                d_plus.set(i, i, m.d()[i] + 1.0);
            }
            let via_lemma = linalg::matrix_determinant_lemma(&d_plus, &su, &su).unwrap();
            assert!((z - via_lemma).abs() <= 1e-9 * via_lemma.abs().max(1.0));
        }
    }

    #[test]
    fn r1p_circuit_with_zero_lambda_is_the_diagonal_case() {
        let m = R1PModel::new(vec![0.5, 2.0, 3.0], 0.0, vec![1.0, -1.0, 2.0]).unwrap();
        let c = r1p_circuit(&m);
        for mask in 0u64..8 {
            let x = Subset::from_mask(3, mask);
            let want: f64 = x.members().iter().map(|&i| m.d()[i]).product();
            assert!((c.evaluate(&x).unwrap() - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn r1p_circuit_node_count_grows_linearly() {
        for n in [2usize, 10, 40] {
            let m = R1PModel::new(vec![1.0; n], 1.0, vec![1.0; n]).unwrap();
            let c = r1p_circuit(&m);
            assert!(
                c.node_count() <= 8 * n + 2,
                "n={n}: {} nodes exceeds the linear budget",
                c.node_count()
            );
        }
    }

    #[test]
    fn r1p_criterion_kernel_is_exact() {
        // d = (0, 1), λ = 1, u = (1, 2) realizes [[1, 2], [2, 5]] exactly.
        let m = R1PModel::new(vec![0.0, 1.0], 1.0, vec![1.0, 2.0]).unwrap();
        let want = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 5.0]]).unwrap();
        assert_eq!(m.kernel(), want);
    }

    #[test]
    fn r1p_rejects_invalid_parameters() {
        assert!(matches!(R1PModel::new(vec![-1.0], 1.0, vec![1.0]), Err(Error::Argument(_))));
        assert!(matches!(R1PModel::new(vec![1.0], -0.5, vec![1.0]), Err(Error::Argument(_))));
        assert!(matches!(R1PModel::new(vec![1.0, 2.0], 1.0, vec![1.0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn witness_kernel_matches_the_case_table() {
        let l = witness_kernel(2, 1).unwrap();
        let r2 = 2.0f64.sqrt();
        assert!((l.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((l.get(0, 1) - r2).abs() < 1e-15);
        assert!((l.get(1, 0) - r2).abs() < 1e-15);
        assert!((l.get(1, 1) - 6.0).abs() < 1e-15);

        // Off the distinguished row/column the kernel is the identity.
        let l = witness_kernel(5, 2).unwrap();
        let others = Subset::new(5, vec![0, 1, 3, 4]).unwrap();
        let c = Subset::new(5, vec![0, 3, 4]).unwrap();
        assert!((linalg::principal_minor_det(&l, &others).unwrap() - 1.0).abs() < 1e-12);
        assert!((linalg::principal_minor_det(&l, &c).unwrap() - 1.0).abs() < 1e-12);

        // Symmetric and PSD at n = 8.
        let l = witness_kernel(8, 3).unwrap();
        assert!(l.is_symmetric(0.0));
        assert!(LEnsemble::new(l).is_ok());
    }

    #[test]
    fn witness_minor_closed_form_matches_lu_and_is_injective() {
        let b = Subset::new(3, vec![0]).unwrap();
        let v = witness_minor_closed_form(3, 2, &b).unwrap();
        assert_eq!(v, 12.0, "s = 14, drop 2^1");
        let l = witness_kernel(3, 2).unwrap();
        let direct = linalg::principal_minor_det(&l, &b.with(2)).unwrap();
        assert!((direct - 12.0).abs() <= 1e-9);

        for (n, q) in [(6usize, 0usize), (6, 3), (6, 5)] {
            let l = witness_kernel(n, q).unwrap();
            let others: Vec<usize> = (0..n).filter(|&i| i != q).collect();
            let mut seen = Vec::new();
            for pick in 0u64..1 << others.len() {
                let members: Vec<usize> = others
                    .iter()
                    .enumerate()
                    .filter(|&(bit, _)| pick >> bit & 1 == 1)
                    .map(|(_, &i)| i)
                    .collect();
                let b = Subset::new(n, members).unwrap();
                let closed = witness_minor_closed_form(n, q, &b).unwrap();
                let direct = linalg::principal_minor_det(&l, &b.with(q)).unwrap();
                assert!(
                    (closed - direct).abs() <= 1e-6 * closed.abs().max(1.0),
                    "n={n} q={q} pick={pick:b}: {closed} vs {direct}"
                );
                seen.push(closed);
            }
            seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for w in seen.windows(2) {
                assert!(w[1] - w[0] >= 2.0 - 1e-9, "closed-form minors are distinct integers");
            }
        }

        let bad = Subset::new(3, vec![2]).unwrap();
        assert!(matches!(witness_minor_closed_form(3, 2, &bad), Err(Error::Argument(_))));
    }

    #[test]
    fn f_polynomial_is_zero_only_on_equal_odds() {
        let l = witness_kernel(4, 1).unwrap();
        let a = Subset::new(4, vec![0]).unwrap();
        assert_eq!(f_polynomial_eval(&l, &a, &a, 1).unwrap(), 0.0);

        // Witness identity: f = Σ_{a∈A} 2^(a+1) − Σ_{b∈B} 2^(b+1).
        let b = Subset::new(4, vec![2, 3]).unwrap();
        let f = f_polynomial_eval(&l, &a, &b, 1).unwrap();
        let want = 2.0 - (8.0 + 16.0);
        assert!((f - want).abs() <= 1e-9 * want.abs(), "{f} vs {want}");

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let e = dpp::random_lensemble(4, 1.0, 123).unwrap();
        let mut checked = 0;
        while checked < 20 {
            let q = rng.gen_range(0..4);
            let a_mask = rng.gen_range(0u64..16) & !(1 << q);
            let b_mask = rng.gen_range(0u64..16) & !(1 << q);
            if a_mask == b_mask {
                continue;
            }
            let f = f_polynomial_eval(
                e.kernel(),
                &Subset::from_mask(4, a_mask),
                &Subset::from_mask(4, b_mask),
                q,
            )
            .unwrap();
            assert!(f.abs() > 1e-9, "q={q} A={a_mask:04b} B={b_mask:04b}: f = {f}");
            checked += 1;
        }

        assert!(matches!(
            f_polynomial_eval(e.kernel(), &Subset::from_mask(4, 0b10), &Subset::empty(4), 1),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn condition2_examples() {
        let l1 = Matrix::from_rows(&[vec![2.4]]).unwrap();
        assert!(check_condition2_bounded(&l1, 6).unwrap());

        let l2 = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!(!check_condition2_bounded(&l2, 2).unwrap(), "equal singleton minors relate");

        let l3 = Matrix::from_rows(&[vec![2.4, 1.0], vec![1.0, 3.7182818]]).unwrap();
        assert!(check_condition2_bounded(&l3, 4).unwrap());

        let small = Matrix::from_rows(&[vec![0.5]]).unwrap();
        assert!(matches!(check_condition2_bounded(&small, 3), Err(Error::Argument(_))));

        let big = Matrix::identity(4);
        assert!(matches!(check_condition2_bounded(&big, 2), Err(Error::SizeGuard(_))));
    }
}
