//! Dense symmetric matrices and the ordered eigenvalue decomposition.
//!
//! Every symmetric matrix `Y` is decomposed as
//!
//! ```text
//! Y = Pᵀ M P,    M = diag(λ₁ ≥ λ₂ ≥ … ≥ λₘ)
//! ```
//!
//! with an orthogonal `P` whose **rows** are eigenvectors. With this convention
//! the conjugation `A ↦ A^P = P A Pᵀ` maps `Y` to `M`, and all block formulas of
//! the cone geometry (`A^P_{IJ}` for index sets `I, J`) read without transposes.
//! The index set `pi` collects the eigenvalues above the rank tolerance and
//! `omega` those within `[-rank_tol, rank_tol]`.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Bound on `‖P Pᵀ − I‖_F` for a valid decomposition.
pub const ORTH_TOL: f64 = 1e-10;
/// Relative bound on the reconstruction error `‖Pᵀ M P − Y‖_F / max(1, ‖Y‖_F)`.
pub const RECON_TOL: f64 = 1e-8;
/// Default rank tolerance is `RANK_TOL_FACTOR · max(1, max |λ|)`.
pub const RANK_TOL_FACTOR: f64 = 1e-8;

const JACOBI_REL_THRESHOLD: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// A real symmetric `m × m` matrix stored by its lower triangle.
///
/// Storage is the row-major lower triangle including the diagonal, so entry
/// `(i, j)` with `i ≥ j` lives at `i (i + 1) / 2 + j`. The upper triangle is
/// never stored, which makes the matrix symmetric by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMat {
    m: usize,
    lower: Vec<f64>,
}

#[inline]
fn tri_index(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument("matrix entries must be finite".into()))
    }
}

impl SymMat {
    pub fn zeros(m: usize) -> Self {
        Self {
            m,
            lower: vec![0.0; m * (m + 1) / 2],
        }
    }

    pub fn identity(m: usize) -> Self {
        Self::from_diag(&vec![1.0; m])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut out = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            out.set(i, i, d);
        }
        out
    }

    /// Builds a matrix from its row-major lower triangle (length `m (m + 1) / 2`).
    pub fn from_lower(m: usize, lower: Vec<f64>) -> Result<Self> {
        let expected = m * (m + 1) / 2;
        if lower.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: lower.len(),
                context: "lower-triangle length",
            });
        }
        check_finite(&lower)?;
        Ok(Self { m, lower })
    }

    /// Builds a matrix from dense rows, which must be square and symmetric up
    /// to a relative `1e-12`; the result averages the two triangles.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let mut out = Self::zeros(m);
        for row in rows {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: row.len(),
                    context: "row length of a square matrix",
                });
            }
            check_finite(row)?;
        }
        for i in 0..m {
            for j in 0..=i {
                let (a, b) = (rows[i][j], rows[j][i]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::InvalidArgument(format!(
                        "matrix is not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
                out.set(i, j, 0.5 * (a + b));
            }
        }
        Ok(out)
    }

    pub fn from_fn(m: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(m);
        for i in 0..m {
            for j in 0..=i {
                out.set(i, j, f(i, j));
            }
        }
        out
    }

    /// Symmetric part `(A + Aᵀ) / 2` of a square dense matrix.
    pub fn from_dmatrix_symmetrized(a: &DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: a.ncols(),
                context: "square matrix",
            });
        }
        let out = Self::from_fn(a.nrows(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
        check_finite(&out.lower)?;
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[tri_index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.lower[tri_index(i, j)] = value;
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.m, self.m, |i, j| self.get(i, j))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.m)
            .map(|i| (0..self.m).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_inner_unchecked(self).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.lower.iter().all(|&v| v == 0.0)
    }

    fn frobenius_inner_unchecked(&self, other: &SymMat) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.m {
            for j in 0..=i {
                let w = if i == j { 1.0 } else { 2.0 };
                sum += w * self.get(i, j) * other.get(i, j);
            }
        }
        sum
    }

    fn check_same_dim(&self, other: &SymMat, context: &'static str) -> Result<()> {
        if self.m == other.m {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.m,
                found: other.m,
                context,
            })
        }
    }

    pub fn try_add(&self, other: &SymMat) -> Result<SymMat> {
        self.check_same_dim(other, "matrix sum")?;
        Ok(self.zip_map(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &SymMat) -> Result<SymMat> {
        self.check_same_dim(other, "matrix difference")?;
        Ok(self.zip_map(other, |a, b| a - b))
    }

    /// `self + t · other`.
    pub fn axpy(&self, t: f64, other: &SymMat) -> Result<SymMat> {
        self.check_same_dim(other, "matrix axpy")?;
        Ok(self.zip_map(other, |a, b| a + t * b))
    }

    pub fn scale(&self, factor: f64) -> SymMat {
        SymMat {
            m: self.m,
            lower: self.lower.iter().map(|v| v * factor).collect(),
        }
    }

    fn zip_map(&self, other: &SymMat, f: impl Fn(f64, f64) -> f64) -> SymMat {
        SymMat {
            m: self.m,
            lower: self
                .lower
                .iter()
                .zip(&other.lower)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// The symmetric product `A B A` (used for `V Y† V`).
    pub fn sandwich(&self, middle: &SymMat) -> Result<SymMat> {
        self.check_same_dim(middle, "sandwich product")?;
        let a = self.to_dmatrix();
        SymMat::from_dmatrix_symmetrized(&(&a * middle.to_dmatrix() * &a))
    }
}

impl std::ops::Add for &SymMat {
    type Output = SymMat;
    fn add(self, rhs: &SymMat) -> SymMat {
        self.try_add(rhs).expect("SymMat addition with mismatched dimensions")
    }
}

impl std::ops::Sub for &SymMat {
    type Output = SymMat;
    fn sub(self, rhs: &SymMat) -> SymMat {
        self.try_sub(rhs)
            .expect("SymMat subtraction with mismatched dimensions")
    }
}

impl std::ops::Mul<f64> for &SymMat {
    type Output = SymMat;
    fn mul(self, rhs: f64) -> SymMat {
        self.scale(rhs)
    }
}

impl std::ops::Neg for &SymMat {
    type Output = SymMat;
    fn neg(self) -> SymMat {
        self.scale(-1.0)
    }
}

#[derive(Serialize, Deserialize)]
struct SymMatJson {
    m: usize,
    lower: Vec<f64>,
}

impl Serialize for SymMat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SymMatJson {
            m: self.m,
            lower: self.lower.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SymMat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = SymMatJson::deserialize(deserializer)?;
        SymMat::from_lower(raw.m, raw.lower).map_err(serde::de::Error::custom)
    }
}

/// Frobenius inner product `⟨A, B⟩ = trace(AB) = Σᵢⱼ AᵢⱼBᵢⱼ`.
pub fn frobenius_inner(a: &SymMat, b: &SymMat) -> Result<f64> {
    a.check_same_dim(b, "Frobenius inner product")?;
    Ok(a.frobenius_inner_unchecked(b))
}

/// Order in which the Jacobi solver visits the off-diagonal pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum JacobiOrder {
    /// Row-cyclic order `(0,1), (0,2), …, (m-2,m-1)`.
    #[default]
    Cyclic,
    /// A fresh random permutation of the pairs in every sweep.
    Shuffled(u64),
}

/// Unsorted eigenpairs `(λ, V)` with `Y = V diag(λ) Vᵀ` (columns of `V` are eigenvectors).
fn jacobi_eigen(y: &SymMat, order: JacobiOrder) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = y.dim();
    let mut a = y.to_dmatrix();
    let mut v = DMatrix::<f64>::identity(n, n);
    let threshold = JACOBI_REL_THRESHOLD * y.frobenius_norm();
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
        .collect();
    let mut rng = match order {
        JacobiOrder::Cyclic => None,
        JacobiOrder::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
    };

    for sweep in 0..=JACOBI_MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= threshold {
            return Ok(((0..n).map(|i| a[(i, i)]).collect(), v));
        }
        if sweep == JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNoConvergence {
                sweeps: JACOBI_MAX_SWEEPS,
                off_norm: off,
            });
        }
        if let Some(rng) = rng.as_mut() {
            pairs.shuffle(rng);
        }
        for &(p, q) in &pairs {
            rotate(&mut a, &mut v, p, q);
        }
    }
    unreachable!("loop returns on the final sweep")
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// Applies `A ← Jᵀ A J`, `V ← V J` with the plane rotation annihilating `A[p, q]`.
fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.nrows();
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Eigenvalues of `y`, sorted non-increasingly.
pub fn eigenvalues(y: &SymMat) -> Result<Vec<f64>> {
    let (mut values, _) = jacobi_eigen(y, JacobiOrder::Cyclic)?;
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Smallest eigenvalue of `y`; `+∞` for the empty matrix.
pub fn min_eigenvalue(y: &SymMat) -> Result<f64> {
    Ok(eigenvalues(y)?.last().copied().unwrap_or(f64::INFINITY))
}

/// Largest eigenvalue of `y`; `-∞` for the empty matrix.
pub fn max_eigenvalue(y: &SymMat) -> Result<f64> {
    Ok(eigenvalues(y)?.first().copied().unwrap_or(f64::NEG_INFINITY))
}

/// Default rank tolerance for a spectrum: `1e-8 · max(1, max |λ|)`.
pub fn default_rank_tol(eigenvalues: &[f64]) -> f64 {
    let scale = eigenvalues.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    RANK_TOL_FACTOR * scale
}

/// Ordered eigenvalue decomposition `Y = Pᵀ diag(λ) P` with index sets `pi` and `omega`.
#[derive(Clone, Debug)]
pub struct OrderedEigenDecomposition {
    source: SymMat,
    p: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    pi: Vec<usize>,
    omega: Vec<usize>,
    rank_tol: f64,
}

impl OrderedEigenDecomposition {
    /// Assembles a decomposition from explicit parts and checks its invariants.
    ///
    /// Useful to build decompositions with a different basis inside a
    /// repeated eigenspace than the one the Jacobi solver happens to return.
    pub fn from_parts(
        source: SymMat,
        p: DMatrix<f64>,
        eigenvalues: Vec<f64>,
        rank_tol: f64,
    ) -> Result<Self> {
        let m = source.dim();
        if p.nrows() != m || p.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: p.nrows().max(p.ncols()),
                context: "orthogonal factor P",
            });
        }
        if eigenvalues.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: eigenvalues.len(),
                context: "eigenvalue count",
            });
        }
        if !(rank_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "rank_tol must be positive, got {rank_tol}"
            )));
        }
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(
                "eigenvalues must be sorted non-increasingly".into(),
            ));
        }
        let orth = (&p * p.transpose() - DMatrix::<f64>::identity(m, m)).norm();
        if orth > ORTH_TOL {
            return Err(Error::InvalidArgument(format!(
                "P is not orthogonal: ‖PPᵀ − I‖_F = {orth:e}"
            )));
        }
        let out = Self::assemble(source, p, eigenvalues, rank_tol);
        let recon = out.reconstruction_error();
        if recon > RECON_TOL * out.source.frobenius_norm().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "PᵀMP does not reconstruct Y: error {recon:e}"
            )));
        }
        Ok(out)
    }

    fn assemble(source: SymMat, p: DMatrix<f64>, eigenvalues: Vec<f64>, rank_tol: f64) -> Self {
        let pi = (0..eigenvalues.len())
            .filter(|&i| eigenvalues[i] > rank_tol)
            .collect();
        let omega = (0..eigenvalues.len())
            .filter(|&i| eigenvalues[i].abs() <= rank_tol)
            .collect();
        Self {
            source,
            p,
            eigenvalues,
            pi,
            omega,
            rank_tol,
        }
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    pub fn source(&self) -> &SymMat {
        &self.source
    }

    /// The orthogonal factor `P`; its rows are eigenvectors.
    pub fn p_matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Indices of the eigenvalues above `rank_tol`.
    pub fn pi(&self) -> &[usize] {
        &self.pi
    }

    /// Indices of the eigenvalues in `[-rank_tol, rank_tol]`.
    pub fn omega(&self) -> &[usize] {
        &self.omega
    }

    /// Indices of the eigenvalues below `-rank_tol` (empty for PSD input).
    pub fn negative(&self) -> Vec<usize> {
        (0..self.eigenvalues.len())
            .filter(|&i| self.eigenvalues[i] < -self.rank_tol)
            .collect()
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::INFINITY)
    }

    /// `false` when some eigenvalue lies below `-rank_tol`.
    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -self.rank_tol
    }

    pub fn require_psd(&self) -> Result<()> {
        if self.is_psd() {
            Ok(())
        } else {
            Err(Error::NotPsd {
                min_eigenvalue: self.min_eigenvalue(),
            })
        }
    }

    /// `‖Pᵀ M P − Y‖_F`.
    pub fn reconstruction_error(&self) -> f64 {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.eigenvalues));
        (self.p.transpose() * m * &self.p - self.source.to_dmatrix()).norm()
    }

    /// `‖P Pᵀ − I‖_F`.
    pub fn orthogonality_error(&self) -> f64 {
        let m = self.dim();
        (&self.p * self.p.transpose() - DMatrix::<f64>::identity(m, m)).norm()
    }

    /// Eigenvalues restricted to `pi`, i.e. the diagonal of `M_ππ`.
    pub fn positive_eigenvalues(&self) -> Vec<f64> {
        self.pi.iter().map(|&i| self.eigenvalues[i]).collect()
    }
}

/// Ordered eigenvalue decomposition with an explicit rank tolerance.
pub fn eigen_decompose(y: &SymMat, rank_tol: f64) -> Result<OrderedEigenDecomposition> {
    eigen_decompose_with(y, Some(rank_tol), JacobiOrder::Cyclic)
}

/// Ordered eigenvalue decomposition with the default rank tolerance.
pub fn eigen_decompose_auto(y: &SymMat) -> Result<OrderedEigenDecomposition> {
    eigen_decompose_with(y, None, JacobiOrder::Cyclic)
}

/// Full-control variant: `rank_tol = None` selects [`default_rank_tol`].
pub fn eigen_decompose_with(
    y: &SymMat,
    rank_tol: Option<f64>,
    order: JacobiOrder,
) -> Result<OrderedEigenDecomposition> {
    if let Some(tol) = rank_tol {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "rank_tol must be positive, got {tol}"
            )));
        }
    }
    let (values, vectors) = jacobi_eigen(y, order)?;
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let sorted: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
    let m = y.dim();
    let p = DMatrix::from_fn(m, m, |r, c| vectors[(c, idx[r])]);
    let tol = rank_tol.unwrap_or_else(|| default_rank_tol(&sorted));
    Ok(OrderedEigenDecomposition::assemble(y.clone(), p, sorted, tol))
}

/// Moore–Penrose pseudoinverse `Y† = Pᵀ M† P` of a PSD-flagged decomposition.
pub fn pseudoinverse(d: &OrderedEigenDecomposition) -> Result<SymMat> {
    d.require_psd()?;
    let m = d.dim();
    let mut inv = vec![0.0; m];
    for &i in d.pi() {
        inv[i] = 1.0 / d.eigenvalues[i];
    }
    let dagger = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(inv));
    SymMat::from_dmatrix_symmetrized(&(d.p.transpose() * dagger * &d.p))
}

fn check_decomp_dim(a: &SymMat, d: &OrderedEigenDecomposition) -> Result<()> {
    if a.dim() == d.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: d.dim(),
            found: a.dim(),
            context: "matrix vs decomposition",
        })
    }
}

/// `A^P = P A Pᵀ`.
pub fn conjugate(a: &SymMat, d: &OrderedEigenDecomposition) -> Result<SymMat> {
    check_decomp_dim(a, d)?;
    SymMat::from_dmatrix_symmetrized(&(&d.p * a.to_dmatrix() * d.p.transpose()))
}

/// Inverse conjugation `Pᵀ A P`, mapping eigenbasis coordinates back.
pub fn conjugate_inverse(a: &SymMat, d: &OrderedEigenDecomposition) -> Result<SymMat> {
    check_decomp_dim(a, d)?;
    SymMat::from_dmatrix_symmetrized(&(d.p.transpose() * a.to_dmatrix() * &d.p))
}

/// Extracts rows `rows` and columns `cols` (in the listed order) of a dense matrix.
pub fn submatrix(a: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| a[(rows[r], cols[c])])
}

/// `A^P_{IJ}`: the `rows × cols` block of `conjugate(a, d)`.
pub fn block(
    a: &SymMat,
    d: &OrderedEigenDecomposition,
    rows: &[usize],
    cols: &[usize],
) -> Result<DMatrix<f64>> {
    let m = d.dim();
    if let Some(&bad) = rows.iter().chain(cols).find(|&&i| i >= m) {
        return Err(Error::InvalidArgument(format!(
            "block index {bad} out of range for dimension {m}"
        )));
    }
    let conj = conjugate(a, d)?.to_dmatrix();
    Ok(submatrix(&conj, rows, cols))
}
