//! Instance generators and reference computations shared by the integration tests.
//!
//! The reference values here are computed from the construction of each
//! instance (explicit eigenbasis, explicit blocks) and never through the
//! library's decomposition-based routines.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use psd_sosc::nlsdp::{NlsdpProblem, QuadraticMatrixMap, QuadraticScalar};
use psd_sosc::random::{gaussian_sym, gaussian_vector, random_orthogonal, SeededRng};
use psd_sosc::SymMat;
use rand::Rng;

pub fn sym_from(a: &DMatrix<f64>) -> SymMat {
    SymMat::from_dmatrix_symmetrized(a).unwrap()
}

pub fn random_sym_dense(k: usize, rng: &mut SeededRng) -> DMatrix<f64> {
    gaussian_sym(k, rng).to_dmatrix()
}

/// `Q diag(d) Qᵀ` restricted to the first `d.len()` columns of `q`.
fn spanned(q: &DMatrix<f64>, cols: std::ops::Range<usize>, d: &[f64]) -> DMatrix<f64> {
    let k = q.nrows();
    let mut out = DMatrix::zeros(k, k);
    for (c, &w) in cols.zip(d) {
        let v = q.column(c);
        out += w * &v * v.transpose();
    }
    out
}

/// A `(Y, Y*, V)` triple built in a known eigenbasis.
///
/// `Y = Pᵀ diag(M, 0) P`, `Y* = Pᵀ diag(0, W) P` with `W ⪯ 0`, and `V^P` with
/// a PSD `ωω` block whose range is orthogonal to the range of `W`, so that
/// `V ∈ T(Y)`, `Y* ∈ N(Y)` and `⟨Y*, V⟩ = 0`.
pub struct BuiltTriple {
    pub y: SymMat,
    pub ystar: SymMat,
    pub v: SymMat,
    /// Rows are eigenvectors.
    pub p: DMatrix<f64>,
    pub rank: usize,
    pub m_diag: Vec<f64>,
    pub w: DMatrix<f64>,
    pub v_conj: DMatrix<f64>,
}

impl BuiltTriple {
    /// `-2⟨W, V_ωπ M⁻¹ V_πω⟩`, the value predicted by the construction.
    pub fn reference_value(&self) -> f64 {
        let r = self.rank;
        let m = self.p.nrows();
        let k = m - r;
        let vwp = self.v_conj.view((r, 0), (k, r)).into_owned();
        let minv = DMatrix::from_diagonal(&DVector::from_iterator(r, self.m_diag.iter().map(|x| 1.0 / x)));
        let inner = &vwp * minv * vwp.transpose();
        -2.0 * self.w.component_mul(&inner).sum()
    }
}

pub fn to_original(p: &DMatrix<f64>, conj: &DMatrix<f64>) -> SymMat {
    sym_from(&(p.transpose() * conj * p))
}

/// Random valid triple of order `m` with rank `rank < m`.
pub fn valid_triple(m: usize, rank: usize, rng: &mut SeededRng) -> BuiltTriple {
    assert!(rank <= m);
    let k = m - rank;
    let p = random_orthogonal(m, rng).transpose();
    let m_diag: Vec<f64> = (0..rank).map(|_| rng.random_range(0.5..2.0)).collect();
    let mut y_conj = DMatrix::zeros(m, m);
    for (i, &l) in m_diag.iter().enumerate() {
        y_conj[(i, i)] = l;
    }

    let q = random_orthogonal(k.max(1), rng);
    let k1 = if k == 0 { 0 } else { rng.random_range(1..=k) };
    let k2 = if k > k1 { rng.random_range(0..=(k - k1)) } else { 0 };
    let (w, v_ww) = if k == 0 {
        (DMatrix::zeros(0, 0), DMatrix::zeros(0, 0))
    } else {
        let wd: Vec<f64> = (0..k1).map(|_| -rng.random_range(0.2..2.0)).collect();
        let vd: Vec<f64> = (0..k2).map(|_| rng.random_range(0.2..2.0)).collect();
        (spanned(&q, 0..k1, &wd), spanned(&q, k1..k1 + k2, &vd))
    };

    let mut v_conj = random_sym_dense(m, rng);
    v_conj.view_mut((rank, rank), (k, k)).copy_from(&v_ww);
    let mut ystar_conj = DMatrix::zeros(m, m);
    ystar_conj.view_mut((rank, rank), (k, k)).copy_from(&w);

    BuiltTriple {
        y: to_original(&p, &y_conj),
        ystar: to_original(&p, &ystar_conj),
        v: to_original(&p, &v_conj),
        p,
        rank,
        m_diag,
        w,
        v_conj,
    }
}

/// `Y* ∈ N(Y)` through the projection characterization `Π(Y + Y*) = Y`.
pub fn normal_cone_projection_oracle(y: &SymMat, ystar: &SymMat, tol: f64) -> bool {
    let s = y.try_add(ystar).unwrap();
    let proj = psd_sosc::cone::project_psd(&s).unwrap();
    (&proj - y).frobenius_norm() <= tol * y.frobenius_norm().max(1.0)
}

/// Random problem with exact derivatives: quadratic `f` and quadratic `F`.
pub fn random_problem(n: usize, m: usize, rng: &mut SeededRng) -> NlsdpProblem {
    let h = gaussian_sym(n, rng);
    let f = QuadraticScalar::new(rng.random_range(-1.0..1.0), gaussian_vector(n, rng), h).unwrap();
    let a0 = gaussian_sym(m, rng);
    let a: Vec<SymMat> = (0..n).map(|_| gaussian_sym(m, rng)).collect();
    let mut b = vec![vec![SymMat::zeros(m); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let bij = gaussian_sym(m, rng);
            b[i][j] = bij.clone();
            b[j][i] = bij;
        }
    }
    NlsdpProblem::new(f, QuadraticMatrixMap::new(a0, a, Some(b)).unwrap()).unwrap()
}

/// Problem with `F(0) = Y` and `F′(0)u = V` for a given direction `u`, built
/// from a valid triple; `(α, Y*)` then satisfies the normal-cone and
/// orthogonality conditions along `u` (stationarity is not imposed).
pub fn problem_through_triple(t: &BuiltTriple, n: usize, rng: &mut SeededRng) -> (NlsdpProblem, Vec<f64>) {
    let m = t.y.dim();
    let mut u = gaussian_vector(n, rng);
    if u[0].abs() < 0.3 {
        u[0] = if u[0] < 0.0 { -0.3 } else { 0.3 };
    }
    let mut a: Vec<SymMat> = (0..n).map(|_| gaussian_sym(m, rng)).collect();
    let rest = (1..n).fold(SymMat::zeros(m), |acc, i| acc.axpy(u[i], &a[i]).unwrap());
    a[0] = t.v.try_sub(&rest).unwrap().scale(1.0 / u[0]);
    let mut b = vec![vec![SymMat::zeros(m); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let bij = gaussian_sym(m, rng);
            b[i][j] = bij.clone();
            b[j][i] = bij;
        }
    }
    let f = QuadraticScalar::new(0.0, gaussian_vector(n, rng), gaussian_sym(n, rng)).unwrap();
    let p = NlsdpProblem::new(f, QuadraticMatrixMap::new(t.y.clone(), a, Some(b)).unwrap()).unwrap();
    (p, u)
}

pub fn angle(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot / (na * nb)).clamp(-1.0, 1.0).acos()
}

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn schema_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("schema").join("report.schema.json")
}
