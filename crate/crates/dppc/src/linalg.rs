//! Dense real matrix primitives: determinants, principal minors,
//! positive-definite inverses, PSD tests, and two bordered-determinant
//! identities (rank-1 update, constant-off-diagonal).
//!
//! Everything here is plain `Vec<f64>` row-major storage with LU (partial
//! pivoting) and Cholesky underneath — no sparse formats, no
//! eigendecompositions. All functions are pure; values are cheap to clone and
//! safe to share across threads.

use crate::{Error, Result};

/// Dense real matrix, row-major.
///
/// Entries are validated to be finite on construction. Equality is exact
/// bitwise equality of dimensions and entries.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl std::fmt::Debug for Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.n_rows, self.n_cols)?;
        for i in 0..self.n_rows {
            write!(f, "  ")?;
            for j in 0..self.n_cols {
                write!(f, "{:>12.6} ", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    /// Build a matrix from row-major data.
    ///
    /// Returns an error if `data.len() != n_rows * n_cols` or any entry is
    /// NaN/infinite.
    pub fn new(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::Dimension(format!(
                "matrix data length {} does not match {}x{}",
                data.len(),
                n_rows,
                n_cols
            )));
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Argument(format!(
                "matrix entries must be finite; entry {} is {}",
                bad, data[bad]
            )));
        }
        Ok(Matrix { n_rows, n_cols, data })
    }

    /// Build a matrix from explicit rows. All rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Dimension("rows have unequal lengths".into()));
        }
        Matrix::new(n_rows, n_cols, rows.concat())
    }

    /// The `n_rows` x `n_cols` zero matrix.
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Matrix { n_rows, n_cols, data: vec![0.0; n_rows * n_cols] }
    }

    /// The n x n identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n_cols + j] = v;
    }

    /// Largest absolute entry (0 for an empty matrix).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Matrix transpose.
    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Matrix product `self * rhs`. Returns an error on inner-dimension
    /// mismatch.
    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.n_cols != rhs.n_rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.n_rows, self.n_cols, rhs.n_rows, rhs.n_cols
            )));
        }
        let mut out = Matrix::zeros(self.n_rows, rhs.n_cols);
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.n_cols {
                    out.data[i * rhs.n_cols + j] += a * rhs.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// `self + s * I` (square matrices only).
    pub fn add_scaled_identity(&self, s: f64) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::Dimension("add_scaled_identity requires a square matrix".into()));
        }
        let mut m = self.clone();
        for i in 0..self.n_rows {
            m.set(i, i, m.get(i, i) + s);
        }
        Ok(m)
    }

    /// True when every pair satisfies
    /// `|M[i][j] - M[j][i]| <= tol * max(1, |M[i][j]|)`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.n_rows {
            for j in (i + 1)..self.n_cols {
                let a = self.get(i, j);
                let b = self.get(j, i);
                if (a - b).abs() > tol * a.abs().max(1.0) {
                    return false;
                }
            }
        }
        true
    }

    /// Submatrix on the given row and column index lists (in order).
    /// Indices must be in range.
    pub fn extract(&self, rows: &[usize], cols: &[usize]) -> Result<Matrix> {
        if rows.iter().any(|&i| i >= self.n_rows) || cols.iter().any(|&j| j >= self.n_cols) {
            return Err(Error::Dimension("extract index out of range".into()));
        }
        let mut out = Matrix::zeros(rows.len(), cols.len());
        for (oi, &i) in rows.iter().enumerate() {
            for (oj, &j) in cols.iter().enumerate() {
                out.set(oi, oj, self.get(i, j));
            }
        }
        Ok(out)
    }

    /// Serialize a square matrix to the kernel CSV format: a line holding n,
    /// then n lines of n comma-separated entries. Floats are printed in
    /// shortest-roundtrip decimal form, so parsing the output reproduces the
    /// matrix bit for bit.
    ///
    /// Panics if the matrix is not square (the format carries a single size).
    pub fn to_csv(&self) -> String {
        assert!(self.is_square(), "kernel CSV format holds square matrices");
        let mut out = String::new();
        out.push_str(&format!("{}\n", self.n_rows));
        for i in 0..self.n_rows {
            let row: Vec<String> = (0..self.n_cols).map(|j| format!("{}", self.get(i, j))).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Parse the kernel CSV format produced by [`Matrix::to_csv`].
    ///
    /// Blank lines and lines starting with `#` are ignored. Errors carry the
    /// 1-based line number of the offending line.
    pub fn from_csv(text: &str) -> Result<Matrix> {
        let mut n: Option<usize> = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            last_line = line_no;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match n {
                None => {
                    let size: usize = line.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        reason: format!("expected matrix size (positive integer), found {line:?}"),
                    })?;
                    if size == 0 {
                        return Err(Error::Parse {
                            line: line_no,
                            reason: "matrix size must be at least 1".into(),
                        });
                    }
                    n = Some(size);
                }
                Some(size) => {
                    if rows.len() == size {
                        return Err(Error::Parse {
                            line: line_no,
                            reason: format!("unexpected extra row (matrix size is {size})"),
                        });
                    }
                    let mut row = Vec::with_capacity(size);
                    for tok in line.split(',') {
                        let tok = tok.trim();
                        let v: f64 = tok.parse().map_err(|_| Error::Parse {
                            line: line_no,
                            reason: format!("expected a decimal number, found {tok:?}"),
                        })?;
                        if !v.is_finite() {
                            return Err(Error::Parse {
                                line: line_no,
                                reason: format!("matrix entries must be finite, found {tok:?}"),
                            });
                        }
                        row.push(v);
                    }
                    if row.len() != size {
                        return Err(Error::Parse {
                            line: line_no,
                            reason: format!("expected {size} comma-separated values, found {}", row.len()),
                        });
                    }
                    rows.push(row);
                }
            }
        }
        let size = n.ok_or(Error::Parse { line: last_line.max(1), reason: "missing matrix size line".into() })?;
        if rows.len() != size {
            return Err(Error::Parse {
                line: last_line.max(1),
                reason: format!("expected {size} rows, found {}", rows.len()),
            });
        }
        Matrix::from_rows(&rows)
    }
}

/// A subset of the ground set `{0, .., n-1}`, stored as strictly increasing
/// indices. Under the subset/assignment bijection this is also a complete
/// binary assignment of n indicator variables: variable i is 1 iff i is a
/// member.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subset {
    n: usize,
    members: Vec<usize>,
}

impl Subset {
    /// Build a subset of `{0, .., n-1}`. Members may arrive unsorted; they are
    /// sorted. Duplicates or out-of-range indices are errors.
    pub fn new(n: usize, mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        if let Some(&bad) = members.iter().find(|&&i| i >= n) {
            return Err(Error::Argument(format!("subset index {bad} out of range for ground set of size {n}")));
        }
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Argument("subset members must be distinct".into()));
        }
        Ok(Subset { n, members })
    }

    /// The empty subset of a ground set of size n.
    pub fn empty(n: usize) -> Self {
        Subset { n, members: Vec::new() }
    }

    /// The full ground set.
    pub fn full(n: usize) -> Self {
        Subset { n, members: (0..n).collect() }
    }

    /// Subset from the low n bits of a mask (bit i set ⇔ i is a member).
    /// Supports ground sets up to 64 elements.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64, "mask-based subsets support at most 64 elements");
        Subset { n, members: (0..n).filter(|&i| mask >> i & 1 == 1).collect() }
    }

    /// Bitmask with bit i set for each member i. Requires n ≤ 64.
    pub fn mask(&self) -> u64 {
        assert!(self.n <= 64, "mask-based subsets support at most 64 elements");
        self.members.iter().fold(0u64, |m, &i| m | 1 << i)
    }

    /// Ground-set size.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of members.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members in strictly increasing order.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    /// This subset with `i` added (no-op if already present).
    /// Panics if `i` is outside the ground set.
    pub fn with(&self, i: usize) -> Subset {
        assert!(i < self.n, "index {i} out of range for ground set of size {}", self.n);
        let mut members = self.members.clone();
        if let Err(pos) = members.binary_search(&i) {
            members.insert(pos, i);
        }
        Subset { n: self.n, members }
    }

    /// Union with another subset over the same ground set.
    pub fn union(&self, other: &Subset) -> Result<Subset> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "subsets over different ground sets ({} vs {})",
                self.n, other.n
            )));
        }
        let mut members: Vec<usize> = self.members.iter().chain(other.members.iter()).copied().collect();
        members.sort_unstable();
        members.dedup();
        Ok(Subset { n: self.n, members })
    }

    /// True when the two subsets share no member.
    pub fn is_disjoint(&self, other: &Subset) -> bool {
        self.members.iter().all(|&i| !other.contains(i))
    }

    /// The complement within the ground set.
    pub fn complement(&self) -> Subset {
        Subset { n: self.n, members: (0..self.n).filter(|&i| !self.contains(i)).collect() }
    }

    /// Assignment rendering: character j is '1' iff variable j is a member,
    /// left to right from variable 0.
    pub fn to_bitstring(&self) -> String {
        (0..self.n).map(|i| if self.contains(i) { '1' } else { '0' }).collect()
    }
}

/// LU factors of a square matrix (Doolittle with partial pivoting).
struct Lu {
    n: usize,
    /// Combined L (strict lower, unit diagonal implied) and U (upper).
    f: Vec<f64>,
    /// Row permutation applied to the input: factored row i is input row perm[i].
    perm: Vec<usize>,
    /// Determinant sign of the permutation.
    sign: f64,
    /// Smallest |U[i][i]|.
    min_abs_pivot: f64,
}

impl Lu {
    fn factor(m: &Matrix) -> Lu {
        let n = m.n_rows;
        let mut f = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut min_abs_pivot = f64::INFINITY;
        for k in 0..n {
            // Pick the largest pivot in column k at or below the diagonal.
            let mut p = k;
            let mut best = f[k * n + k].abs();
            for i in (k + 1)..n {
                let v = f[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    f.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = f[k * n + k];
            min_abs_pivot = min_abs_pivot.min(pivot.abs());
            if pivot == 0.0 {
                continue; // Singular: remaining rows keep their zeros.
            }
            for i in (k + 1)..n {
                let l = f[i * n + k] / pivot;
                f[i * n + k] = l;
                for j in (k + 1)..n {
                    f[i * n + j] -= l * f[k * n + j];
                }
            }
        }
        if n == 0 {
            min_abs_pivot = f64::INFINITY;
        }
        Lu { n, f, perm, sign, min_abs_pivot }
    }

    fn det(&self) -> f64 {
        let mut d = self.sign;
        for k in 0..self.n {
            d *= self.f[k * self.n + k];
        }
        d
    }

    /// Solve `A x = b`. Returns `None` when a pivot is too small relative to
    /// the given threshold for the solution to be trustworthy.
    fn solve(&self, b: &[f64], pivot_floor: f64) -> Option<Vec<f64>> {
        if self.min_abs_pivot <= pivot_floor {
            return None;
        }
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 1..n {
            for j in 0..i {
                x[i] -= self.f[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                x[i] -= self.f[i * n + j] * x[j];
            }
            x[i] /= self.f[i * n + i];
        }
        Some(x)
    }
}

/// Determinant via LU with partial pivoting. The determinant of the 0x0
/// matrix is 1. Returns an error for non-square input.
pub fn det(m: &Matrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("determinant requires a square matrix, got {}x{}", m.n_rows, m.n_cols)));
    }
    Ok(Lu::factor(m).det())
}

/// Determinant of the principal submatrix of `m` on the rows/columns in `s`.
/// The empty subset yields 1 (determinant of the empty matrix).
///
/// Returns an error if `m` is not square or `s` ranges over a different
/// ground-set size than `m`'s dimension.
pub fn principal_minor_det(m: &Matrix, s: &Subset) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::Dimension("principal minors require a square matrix".into()));
    }
    if s.n() != m.n_rows {
        return Err(Error::Dimension(format!(
            "subset ranges over {} elements but the matrix is {}x{}",
            s.n(),
            m.n_rows,
            m.n_cols
        )));
    }
    det(&m.extract(s.members(), s.members())?)
}

/// Cholesky factorization `M = L Lᵀ` of a symmetric matrix, stored as the
/// dense lower triangle. Fails with the index of the first pivot that is not
/// strictly greater than `pivot_tol`.
fn cholesky(m: &Matrix, pivot_tol: f64) -> Result<Vec<f64>> {
    let n = m.n_rows;
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut pivot = m.get(j, j);
        for k in 0..j {
            pivot -= l[j * n + k] * l[j * n + k];
        }
        if !(pivot > pivot_tol) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: pivot, tol: pivot_tol });
        }
        let d = pivot.sqrt();
        l[j * n + j] = d;
        for i in (j + 1)..n {
            let mut v = m.get(i, j);
            for k in 0..j {
                v -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = v / d;
        }
    }
    Ok(l)
}

/// True when `m + shift*I` admits a Cholesky factorization, i.e. the smallest
/// eigenvalue of `m` is at least `-shift` up to rounding. Used as the PSD
/// test throughout the crate (no eigendecompositions).
pub(crate) fn psd_within(m: &Matrix, shift: f64) -> bool {
    debug_assert!(m.is_square());
    match m.add_scaled_identity(shift) {
        Ok(shifted) => cholesky(&shifted, 0.0).is_ok(),
        Err(_) => false,
    }
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
///
/// Requires every Cholesky pivot to exceed 1e-12; fails otherwise with the
/// index of the offending pivot. The result is symmetrized, and satisfies
/// `‖M·M⁻¹ − I‖_max ≤ 1e-8` for well-conditioned input.
pub fn psd_inverse(m: &Matrix) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::Dimension("psd_inverse requires a square matrix".into()));
    }
    let n = m.n_rows;
    let l = cholesky(m, 1e-12)?;
    // Solve L Lᵀ X = I column by column.
    let mut inv = Matrix::zeros(n, n);
    let mut col = vec![0.0; n];
    for c in 0..n {
        for (i, v) in col.iter_mut().enumerate() {
            *v = if i == c { 1.0 } else { 0.0 };
        }
        for i in 0..n {
            for k in 0..i {
                col[i] -= l[i * n + k] * col[k];
            }
            col[i] /= l[i * n + i];
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                col[i] -= l[k * n + i] * col[k];
            }
            col[i] /= l[i * n + i];
        }
        for i in 0..n {
            inv.set(i, c, col[i]);
        }
    }
    // Symmetrize: the exact inverse of a symmetric matrix is symmetric.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (inv.get(i, j) + inv.get(j, i));
            inv.set(i, j, v);
            inv.set(j, i, v);
        }
    }
    Ok(inv)
}

/// Determinant of a rank-1 update: `det(A + u vᵀ)`.
///
/// Uses `det(A)·(1 + vᵀA⁻¹u)` when A is comfortably invertible and the
/// adjugate identity `det(A + uvᵀ) = det(A) + vᵀ·adj(A)·u` otherwise.
pub fn matrix_determinant_lemma(a: &Matrix, u: &[f64], v: &[f64]) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Dimension("matrix_determinant_lemma requires a square matrix".into()));
    }
    let n = a.n_rows;
    if u.len() != n || v.len() != n {
        return Err(Error::Dimension(format!(
            "vector lengths ({}, {}) do not match matrix dimension {}",
            u.len(),
            v.len(),
            n
        )));
    }
    let lu = Lu::factor(a);
    let det_a = lu.det();
    let pivot_floor = 1e-12 * a.max_abs().max(1.0);
    if let Some(z) = lu.solve(u, pivot_floor) {
        let vz: f64 = v.iter().zip(&z).map(|(a, b)| a * b).sum();
        return Ok(det_a * (1.0 + vz));
    }
    // Singular (or nearly singular) A: fall back to the adjugate form.
    let adj = adjugate(a)?;
    let mut adj_u = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            adj_u[i] += adj.get(i, j) * u[j];
        }
    }
    let v_adj_u: f64 = v.iter().zip(&adj_u).map(|(a, b)| a * b).sum();
    Ok(det_a + v_adj_u)
}

/// Adjugate (classical adjoint) via cofactor minors. O(n^5); used only as the
/// singular-matrix fallback of [`matrix_determinant_lemma`].
fn adjugate(a: &Matrix) -> Result<Matrix> {
    let n = a.n_rows;
    let mut adj = Matrix::zeros(n, n);
    if n == 0 {
        return Ok(adj);
    }
    for i in 0..n {
        for j in 0..n {
            let rows: Vec<usize> = (0..n).filter(|&r| r != j).collect();
            let cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
            let minor = det(&a.extract(&rows, &cols)?)?;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            adj.set(i, j, sign * minor);
        }
    }
    Ok(adj)
}

/// Determinant of the matrix with diagonal `d` and every off-diagonal entry 1:
/// `∏ᵢ(dᵢ−1) + Σᵢ ∏_{j≠i}(dⱼ−1)`.
///
/// The empty vector yields 1 (empty-matrix convention).
pub fn diag_perturbed_det(d: &[f64]) -> f64 {
    if d.is_empty() {
        return 1.0;
    }
    let prod: f64 = d.iter().map(|&x| x - 1.0).product();
    let sum: f64 = (0..d.len())
        .map(|i| d.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x - 1.0).product::<f64>())
        .sum();
    prod + sum
}
