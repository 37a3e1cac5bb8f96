//! Problem model `min f(x) s.t. F(x) ⪰ 0` with a quadratic objective and an
//! affine-quadratic matrix map, so every derivative is exact:
//!
//! ```text
//! f(x) = c + gᵀx + ½ xᵀHx
//! F(x) = A₀ + Σᵢ xᵢ Aᵢ + ½ Σᵢⱼ xᵢ xⱼ Bᵢⱼ,    Bᵢⱼ = Bⱼᵢ
//! ```
//!
//! The generalized Lagrangian is `L^α(x, Y*) = α f(x) + ⟨Y*, F(x)⟩`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symmat::{frobenius_inner, SymMat};

fn check_len(expected: usize, found: usize, context: &'static str) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            found,
            context,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sym_times(h: &SymMat, x: &[f64]) -> Vec<f64> {
    let n = h.dim();
    (0..n)
        .map(|i| (0..n).map(|j| h.get(i, j) * x[j]).sum())
        .collect()
}

/// `f(x) = c + gᵀx + ½ xᵀHx`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticScalar {
    pub c: f64,
    pub g: Vec<f64>,
    pub h: SymMat,
}

impl QuadraticScalar {
    pub fn new(c: f64, g: Vec<f64>, h: SymMat) -> Result<Self> {
        check_len(g.len(), h.dim(), "objective Hessian order")?;
        if !c.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("objective data must be finite".into()));
        }
        Ok(Self { c, g, h })
    }

    /// The linear function `gᵀx`.
    pub fn linear(g: Vec<f64>) -> Self {
        let n = g.len();
        Self {
            c: 0.0,
            g,
            h: SymMat::zeros(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }
}

/// `F(x) = A₀ + Σ xᵢAᵢ + ½ Σ xᵢxⱼBᵢⱼ`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticMatrixMap {
    pub a0: SymMat,
    pub a: Vec<SymMat>,
    /// `n × n` table of quadratic coefficients; `None` means all zero.
    pub b: Option<Vec<Vec<SymMat>>>,
}

impl QuadraticMatrixMap {
    pub fn new(a0: SymMat, a: Vec<SymMat>, b: Option<Vec<Vec<SymMat>>>) -> Result<Self> {
        let m = a0.dim();
        let n = a.len();
        for ai in &a {
            check_len(m, ai.dim(), "linear coefficient order")?;
        }
        if let Some(b) = &b {
            check_len(n, b.len(), "quadratic coefficient rows")?;
            for (i, row) in b.iter().enumerate() {
                check_len(n, row.len(), "quadratic coefficient columns")?;
                for (j, bij) in row.iter().enumerate() {
                    check_len(m, bij.dim(), "quadratic coefficient order")?;
                    if j < i && *bij != b[j][i] {
                        return Err(Error::InvalidArgument(format!(
                            "quadratic coefficients must satisfy B[{i}][{j}] = B[{j}][{i}]"
                        )));
                    }
                }
            }
        }
        Ok(Self { a0, a, b })
    }

    pub fn affine(a0: SymMat, a: Vec<SymMat>) -> Result<Self> {
        Self::new(a0, a, None)
    }

    pub fn order(&self) -> usize {
        self.a0.dim()
    }

    pub fn inputs(&self) -> usize {
        self.a.len()
    }

    /// `∂F/∂xᵢ (x) = Aᵢ + Σⱼ xⱼ Bᵢⱼ`.
    fn partial(&self, i: usize, x: &[f64]) -> SymMat {
        let mut out = self.a[i].clone();
        if let Some(b) = &self.b {
            for (j, &xj) in x.iter().enumerate() {
                if xj != 0.0 {
                    out = out.axpy(xj, &b[i][j]).expect("validated orders");
                }
            }
        }
        out
    }
}

/// The problem `min f(x) s.t. F(x) ⪰ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct NlsdpProblem {
    f: QuadraticScalar,
    map: QuadraticMatrixMap,
}

impl NlsdpProblem {
    pub fn new(f: QuadraticScalar, map: QuadraticMatrixMap) -> Result<Self> {
        check_len(f.dim(), map.inputs(), "objective vs constraint inputs")?;
        Ok(Self { f, map })
    }

    /// Decision dimension `n`.
    pub fn n(&self) -> usize {
        self.f.dim()
    }

    /// Matrix order `m`.
    pub fn m(&self) -> usize {
        self.map.order()
    }

    pub fn objective(&self) -> &QuadraticScalar {
        &self.f
    }

    pub fn constraint_map(&self) -> &QuadraticMatrixMap {
        &self.map
    }

    fn check_x(&self, x: &[f64]) -> Result<()> {
        check_len(self.n(), x.len(), "decision vector")
    }

    pub fn eval_f(&self, x: &[f64]) -> Result<f64> {
        self.check_x(x)?;
        Ok(self.f.c + dot(&self.f.g, x) + 0.5 * dot(x, &sym_times(&self.f.h, x)))
    }

    pub fn grad_f(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_x(x)?;
        Ok(self
            .f
            .g
            .iter()
            .zip(sym_times(&self.f.h, x))
            .map(|(g, hx)| g + hx)
            .collect())
    }

    pub fn hess_f(&self) -> &SymMat {
        &self.f.h
    }

    /// `F(x)`.
    pub fn eval_constraint(&self, x: &[f64]) -> Result<SymMat> {
        self.check_x(x)?;
        let mut out = self.map.a0.clone();
        for (i, &xi) in x.iter().enumerate() {
            out = out.axpy(xi, &self.map.a[i])?;
        }
        if let Some(b) = &self.map.b {
            for (i, &xi) in x.iter().enumerate() {
                for (j, &xj) in x.iter().enumerate() {
                    out = out.axpy(0.5 * xi * xj, &b[i][j])?;
                }
            }
        }
        Ok(out)
    }

    /// `F′(x)u = Σᵢ uᵢ (Aᵢ + Σⱼ xⱼ Bᵢⱼ)`.
    pub fn constraint_derivative(&self, x: &[f64], u: &[f64]) -> Result<SymMat> {
        self.check_x(x)?;
        self.check_x(u)?;
        let mut out = SymMat::zeros(self.m());
        for (i, &ui) in u.iter().enumerate() {
            if ui != 0.0 {
                out = out.axpy(ui, &self.map.partial(i, x))?;
            }
        }
        Ok(out)
    }

    /// Adjoint `F′(x)*Y*` with components `⟨Y*, Aᵢ + Σⱼ xⱼ Bᵢⱼ⟩`.
    pub fn constraint_adjoint(&self, x: &[f64], ystar: &SymMat) -> Result<Vec<f64>> {
        self.check_x(x)?;
        check_len(self.m(), ystar.dim(), "multiplier order")?;
        (0..self.n())
            .map(|i| frobenius_inner(ystar, &self.map.partial(i, x)))
            .collect()
    }

    /// `F″(x)[u, u] = Σᵢⱼ uᵢuⱼ Bᵢⱼ` (independent of `x` for this family).
    pub fn constraint_second_derivative(&self, u: &[f64]) -> Result<SymMat> {
        self.check_x(u)?;
        let mut out = SymMat::zeros(self.m());
        if let Some(b) = &self.map.b {
            for (i, &ui) in u.iter().enumerate() {
                for (j, &uj) in u.iter().enumerate() {
                    out = out.axpy(ui * uj, &b[i][j])?;
                }
            }
        }
        Ok(out)
    }

    /// `L^α(x, Y*) = α f(x) + ⟨Y*, F(x)⟩`.
    pub fn lagrangian(&self, alpha: f64, x: &[f64], ystar: &SymMat) -> Result<f64> {
        check_alpha(alpha)?;
        check_len(self.m(), ystar.dim(), "multiplier order")?;
        Ok(alpha * self.eval_f(x)? + frobenius_inner(ystar, &self.eval_constraint(x)?)?)
    }

    /// `∇ₓL^α(x, Y*) = α ∇f(x) + F′(x)*Y*`.
    pub fn lagrangian_grad(&self, alpha: f64, x: &[f64], ystar: &SymMat) -> Result<Vec<f64>> {
        check_alpha(alpha)?;
        let g = self.grad_f(x)?;
        let adj = self.constraint_adjoint(x, ystar)?;
        Ok(g.iter().zip(adj).map(|(gi, ai)| alpha * gi + ai).collect())
    }

    /// `∇²ₓₓL^α(x, Y*)[u, u] = α uᵀHu + Σᵢⱼ uᵢuⱼ ⟨Y*, Bᵢⱼ⟩`.
    pub fn lagrangian_hess_form(
        &self,
        alpha: f64,
        x: &[f64],
        ystar: &SymMat,
        u: &[f64],
    ) -> Result<f64> {
        check_alpha(alpha)?;
        self.check_x(x)?;
        check_len(self.m(), ystar.dim(), "multiplier order")?;
        let hu = dot(u, &sym_times(&self.f.h, u));
        let curv = frobenius_inner(ystar, &self.constraint_second_derivative(u)?)?;
        Ok(alpha * hu + curv)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha >= 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "alpha must be a nonnegative finite number, got {alpha}"
        )))
    }
}

/// Either a flat row-major lower triangle or a full symmetric-matrix object.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum LowerTriangle {
    Flat(Vec<f64>),
    Matrix(SymMat),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ObjectiveJson {
    #[serde(default)]
    c: f64,
    g: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    h: Option<LowerTriangle>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct MapJson {
    #[serde(rename = "A0")]
    a0: SymMat,
    #[serde(rename = "A")]
    a: Vec<SymMat>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    b: Option<Vec<Vec<SymMat>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ProblemJson {
    n: usize,
    m: usize,
    f: ObjectiveJson,
    #[serde(rename = "F")]
    map: MapJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    xbar: Option<Vec<f64>>,
}

/// A problem together with its candidate point, as stored in problem JSON:
///
/// ```json
/// {"n": 2, "m": 2,
///  "f": {"c": 0, "g": [0, 1], "h": [0, 0, 0]},
///  "F": {"A0": {"m": 2, "lower": [1, 0, 0]}, "A": [...], "B": [[...]]},
///  "xbar": [0, 0]}
/// ```
///
/// `h` is the row-major lower triangle (a flat array or a symmetric-matrix
/// object) and may be omitted for linear objectives; `B` may be omitted for
/// affine maps.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    pub problem: NlsdpProblem,
    pub xbar: Option<Vec<f64>>,
}

impl ProblemInstance {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: ProblemJson =
            serde_json::from_str(s).map_err(|e| Error::Input(format!("problem JSON: {e}")))?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: ProblemJson) -> Result<Self> {
        let n = raw.n;
        let h = match raw.f.h {
            None => SymMat::zeros(n),
            Some(LowerTriangle::Flat(v)) => SymMat::from_lower(n, v)?,
            Some(LowerTriangle::Matrix(h)) => h,
        };
        let f = QuadraticScalar::new(raw.f.c, raw.f.g, h)?;
        let map = QuadraticMatrixMap::new(raw.map.a0, raw.map.a, raw.map.b)?;
        let problem = NlsdpProblem::new(f, map)?;
        check_len(raw.n, problem.n(), "declared n")?;
        check_len(raw.m, problem.m(), "declared m")?;
        if let Some(x) = &raw.xbar {
            check_len(n, x.len(), "xbar length")?;
        }
        Ok(Self {
            problem,
            xbar: raw.xbar,
        })
    }

    pub fn to_json_string(&self) -> Result<String> {
        let p = &self.problem;
        let raw = ProblemJson {
            n: p.n(),
            m: p.m(),
            f: ObjectiveJson {
                c: p.f.c,
                g: p.f.g.clone(),
                h: Some(LowerTriangle::Flat(p.f.h.lower().to_vec())),
            },
            map: MapJson {
                a0: p.map.a0.clone(),
                a: p.map.a.clone(),
                b: p.map.b.clone(),
            },
            xbar: self.xbar.clone(),
        };
        Ok(serde_json::to_string_pretty(&raw)?)
    }

    pub fn require_xbar(&self) -> Result<&[f64]> {
        self.xbar
            .as_deref()
            .ok_or_else(|| Error::Input("problem JSON has no \"xbar\"".into()))
    }
}

/// Small worked problems used throughout the tests and examples.
pub mod fixtures {
    use super::*;

    fn arrow_map() -> QuadraticMatrixMap {
        // F(x) = [[1, x₁], [x₁, x₂]]
        QuadraticMatrixMap::affine(
            SymMat::from_diag(&[1.0, 0.0]),
            vec![
                SymMat::from_lower(2, vec![0.0, 1.0, 0.0]).unwrap(),
                SymMat::from_diag(&[0.0, 1.0]),
            ],
        )
        .unwrap()
    }

    /// `min x₂ s.t. [[1, x₁], [x₁, x₂]] ⪰ 0`; the origin is a strict minimizer.
    pub fn p1() -> NlsdpProblem {
        NlsdpProblem::new(QuadraticScalar::linear(vec![0.0, 1.0]), arrow_map()).unwrap()
    }

    /// Same constraint, objective `-x₂`; the origin is not a minimizer.
    pub fn p1_negated() -> NlsdpProblem {
        NlsdpProblem::new(QuadraticScalar::linear(vec![0.0, -1.0]), arrow_map()).unwrap()
    }

    /// `min x s.t. diag(x, x) ⪰ 0`; the critical cone at 0 is `{0}`.
    pub fn trivial_cone() -> NlsdpProblem {
        let map = QuadraticMatrixMap::affine(SymMat::zeros(2), vec![SymMat::identity(2)]).unwrap();
        NlsdpProblem::new(QuadraticScalar::linear(vec![1.0]), map).unwrap()
    }

    pub fn origin(n: usize) -> Vec<f64> {
        vec![0.0; n]
    }
}
