//! Second subderivative of the indicator function of the PSD cone.
//!
//! For `Y ⪰ 0`, `V ∈ T(Y)` and `Y* ∈ N(Y)` with `⟨Y*, V⟩ = 0` the value is
//!
//! ```text
//! d²δ(Y, Y*)(V) = -2 ⟨Y*, V Y† V⟩
//! ```
//!
//! and it is `+∞` when `V ∉ T(Y)` or `⟨Y*, V⟩ < 0`. Besides the closed form this
//! module implements the two constructive ingredients behind it:
//!
//! * the Schur-complement test deciding `Y + tV′ ⪰ 0` in the eigenbasis of `Y`,
//! * the recovery sequence `V_t`, which stays feasible (`Y + tV_t ⪰ 0`), tends to
//!   `V`, and whose difference quotients `-2⟨Y*, V_t⟩/t` attain the closed form,
//!
//! and a sampling oracle evaluating those difference quotients directly.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cone;
use crate::error::{Error, Result};
use crate::random::{gaussian_sym, stream};
use crate::symmat::{
    self, conjugate, conjugate_inverse, eigen_decompose_auto, frobenius_inner, pseudoinverse,
    submatrix, OrderedEigenDecomposition, SymMat,
};

/// A value in `R ∪ {-∞, +∞}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ExtendedReal {
    Finite(f64),
    PlusInfinity,
    MinusInfinity,
}

impl ExtendedReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    /// Maps the infinities to `±f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::PlusInfinity => f64::INFINITY,
            ExtendedReal::MinusInfinity => f64::NEG_INFINITY,
        }
    }
}

impl std::fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PlusInfinity => write!(f, "+inf"),
            ExtendedReal::MinusInfinity => write!(f, "-inf"),
        }
    }
}

/// Closed-form second subderivative `d²δ(Y, Y*)(V)`.
///
/// `Y*` must lie in the normal cone within `tol`. The sign of `⟨Y*, V⟩` is
/// classified against the band `tol · max(1, ‖Y*‖_F ‖V‖_F)`.
pub fn second_subderivative(
    d: &OrderedEigenDecomposition,
    ystar: &SymMat,
    v: &SymMat,
    tol: f64,
) -> Result<ExtendedReal> {
    d.require_psd()?;
    if !cone::normal_cone_contains(d, ystar, tol)? {
        return Err(Error::NotInNormalCone);
    }
    if !cone::tangent_cone_contains(d, v, tol)? {
        return Ok(ExtendedReal::PlusInfinity);
    }
    let inner = frobenius_inner(ystar, v)?;
    let band = tol * (ystar.frobenius_norm() * v.frobenius_norm()).max(1.0);
    if inner < -band {
        return Ok(ExtendedReal::PlusInfinity);
    }
    if inner > band {
        return Err(Error::MinusInfinityAnomaly { inner });
    }
    let dagger = pseudoinverse(d)?;
    let value = -2.0 * frobenius_inner(ystar, &v.sandwich(&dagger)?)?;
    Ok(ExtendedReal::Finite(value + 0.0))
}

/// `V^P` split into the `ππ`, `πω` and `ωω` blocks.
struct EigenBlocks {
    pp: DMatrix<f64>,
    pw: DMatrix<f64>,
    ww: DMatrix<f64>,
}

impl EigenBlocks {
    fn new(a: &SymMat, d: &OrderedEigenDecomposition) -> Result<Self> {
        let conj = conjugate(a, d)?.to_dmatrix();
        Ok(Self {
            pp: submatrix(&conj, d.pi(), d.pi()),
            pw: submatrix(&conj, d.pi(), d.omega()),
            ww: submatrix(&conj, d.omega(), d.omega()),
        })
    }
}

/// `[M_ππ + t A_ππ]⁻¹` after checking the pivot is positive definite beyond `rank_tol`.
fn pivot_inverse(d: &OrderedEigenDecomposition, a_pp: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    let pos = d.positive_eigenvalues();
    let pivot = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(pos)) + a_pp * t;
    if pivot.nrows() == 0 {
        return Ok(pivot);
    }
    let sym = SymMat::from_dmatrix_symmetrized(&pivot)?;
    let lowest = symmat::min_eigenvalue(&sym)?;
    if !(lowest > d.rank_tol()) {
        return Err(Error::PivotNotPositiveDefinite {
            min_eigenvalue: lowest,
        });
    }
    sym.to_dmatrix()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or(Error::PivotNotPositiveDefinite {
            min_eigenvalue: lowest,
        })
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("t must be positive and finite, got {t}")))
    }
}

/// The Schur complement `V′_ωω − t V′_ωπ [M_ππ + t V′_ππ]⁻¹ V′_πω` (in the eigenbasis of `Y`).
pub fn schur_complement(d: &OrderedEigenDecomposition, vprime: &SymMat, t: f64) -> Result<SymMat> {
    check_t(t)?;
    d.require_psd()?;
    let b = EigenBlocks::new(vprime, d)?;
    let inv = pivot_inverse(d, &b.pp, t)?;
    let correction = b.pw.transpose() * inv * &b.pw * t;
    SymMat::from_dmatrix_symmetrized(&(b.ww - correction))
}

/// Decides `Y + tV′ ⪰ 0` through the Schur complement of the positive pivot.
///
/// With `M_ππ + t V′_ππ ≻ 0` the matrix `Y + tV′` is PSD exactly when the
/// complement is PSD; here the complement is tested within `tol`. Errors when the
/// pivot is not positive definite beyond `rank_tol`, i.e. `t` is too large.
pub fn schur_feasibility(
    d: &OrderedEigenDecomposition,
    vprime: &SymMat,
    t: f64,
    tol: f64,
) -> Result<bool> {
    let complement = schur_complement(d, vprime, t)?;
    Ok(symmat::min_eigenvalue(&complement)? >= -tol)
}

/// Recovery sequence element `V_t = Pᵀ [[V_ππ, V_πω], [V_ωπ, V_ωω + Δ_t]] P`
/// with `Δ_t = t V_ωπ [M_ππ + t V_ππ]⁻¹ V_πω`.
///
/// `V` must be tangent (checked within the decomposition's `rank_tol`); then
/// `Y + tV_t ⪰ 0` and `‖V_t − V‖_F = O(t)`.
pub fn recovery_sequence(d: &OrderedEigenDecomposition, v: &SymMat, t: f64) -> Result<SymMat> {
    check_t(t)?;
    d.require_psd()?;
    if !cone::tangent_cone_contains(d, v, d.rank_tol())? {
        return Err(Error::NotInTangentCone);
    }
    let b = EigenBlocks::new(v, d)?;
    let inv = pivot_inverse(d, &b.pp, t)?;
    let delta = b.pw.transpose() * inv * &b.pw * t;
    let mut shifted = conjugate(v, d)?;
    for (r, &i) in d.omega().iter().enumerate() {
        for (c, &j) in d.omega().iter().enumerate().take(r + 1) {
            shifted.set(i, j, shifted.get(i, j) + 0.5 * (delta[(r, c)] + delta[(c, r)]));
        }
    }
    conjugate_inverse(&shifted, d)
}

/// Difference quotient `-2⟨Y*, V_t⟩ / t` along the recovery sequence.
pub fn recovery_quotient(
    d: &OrderedEigenDecomposition,
    ystar: &SymMat,
    v: &SymMat,
    t: f64,
) -> Result<f64> {
    let vt = recovery_sequence(d, v, t)?;
    Ok(-2.0 * frobenius_inner(ystar, &vt)? / t)
}

/// Linear extrapolation to `t = 0` through `(t1, q1)` and `(t2, q2)`.
fn extrapolate(t1: f64, q1: f64, t2: f64, q2: f64) -> f64 {
    (t2 * q1 - t1 * q2) / (t2 - t1)
}

/// Limit of the recovery-sequence quotients as `t → 0`.
///
/// The quotient is a smooth function of `t`, so a linear (Richardson)
/// extrapolation through the two smallest grid points with a valid pivot
/// removes the first-order term.
pub fn recovery_limit(
    d: &OrderedEigenDecomposition,
    ystar: &SymMat,
    v: &SymMat,
    t_grid: &[f64],
) -> Result<f64> {
    let mut ts = t_grid.to_vec();
    ts.sort_by(|a, b| a.total_cmp(b));
    let mut values = Vec::with_capacity(2);
    for &t in &ts {
        match recovery_quotient(d, ystar, v, t) {
            Ok(q) => values.push((t, q)),
            Err(Error::PivotNotPositiveDefinite { .. }) => continue,
            Err(e) => return Err(e),
        }
        if values.len() == 2 {
            break;
        }
    }
    match values.as_slice() {
        [(t1, q1), (t2, q2)] => Ok(extrapolate(*t1, *q1, *t2, *q2)),
        [(_, q)] => Ok(*q),
        _ => Err(Error::NoFeasibleSample),
    }
}

/// Knobs of the sampling oracle.
#[derive(Clone, Debug)]
pub struct SamplingOptions {
    pub t_grid: Vec<f64>,
    pub radius: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self {
            t_grid: log_grid(1e-1, 1e-5, 8),
            radius: 1.0,
            n_samples: 64,
            seed: 0,
        }
    }
}

/// `count` log-spaced points from `hi` down to `lo`.
pub fn log_grid(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![hi];
    }
    let (a, b) = (hi.log10(), lo.log10());
    (0..count)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64))
        .collect()
}

/// Relative interior margin `λ_min(Y + tV′) ≥ INTERIOR_MARGIN · t²` demanded of
/// sampled points; it certifies feasibility despite rounding.
const INTERIOR_MARGIN: f64 = 1e-3;

/// Which sequence a sampled point belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum SampleFamily {
    /// `V′ = V`.
    Direction,
    /// `V′ = V_t` from [`recovery_sequence`].
    Recovery,
    /// `V′ = V_t + radius · t · G_j` with a fixed unit-norm Gaussian `G_j`.
    Perturbed(usize),
}

/// One feasible pair `(t, V′)` and its quotient `-2⟨Y*, V′⟩/t`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuotientSample {
    pub family: SampleFamily,
    pub t: f64,
    pub quotient: f64,
}

/// Everything the sampling oracle looked at.
#[derive(Clone, Debug, Serialize)]
pub struct SamplingTrace {
    pub samples: Vec<QuotientSample>,
    /// Extrapolated `t → 0` value of each family feasible at the two smallest grid points.
    pub family_limits: Vec<(SampleFamily, f64)>,
    pub recovery_limit: Option<f64>,
    /// Smallest family limit.
    pub estimate: f64,
}

impl SamplingTrace {
    /// Minimum raw quotient over the samples taken at grid point `t`.
    pub fn min_quotient_at(&self, t: f64) -> Option<f64> {
        self.samples
            .iter()
            .filter(|s| s.t == t)
            .map(|s| s.quotient)
            .min_by(|a, b| a.total_cmp(b))
    }
}

/// Samples feasible difference quotients `-2⟨Y*, V′⟩/t` around `V` on the t-grid.
///
/// Each sampled family is a sequence `t ↦ V′(t)` converging to `V`: the
/// constant `V`, the recovery sequence, and `n_samples` random perturbations
/// `V_t + radius·t·G_j` (one fixed direction `G_j` per family). Points are kept
/// when feasible: recovery points by construction, the others only when
/// `Y + tV′` is strictly inside the cone by a margin of order `t²`. A family
/// feasible at the two smallest grid points contributes its extrapolated
/// `t → 0` limit, and the estimate is the smallest such limit.
pub fn sample_difference_quotients(
    y: &SymMat,
    ystar: &SymMat,
    v: &SymMat,
    opts: &SamplingOptions,
) -> Result<SamplingTrace> {
    if opts.t_grid.is_empty() || opts.t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidArgument("t_grid must be non-empty and positive".into()));
    }
    let d = eigen_decompose_auto(y)?;
    d.require_psd()?;
    let tol = d.rank_tol();
    if !cone::normal_cone_contains(&d, ystar, tol)? {
        return Err(Error::NotInNormalCone);
    }
    let m = y.dim();
    let mut ts = opts.t_grid.clone();
    ts.sort_by(|a, b| b.total_cmp(a));
    ts.dedup();

    let directions: Vec<SymMat> = (0..opts.n_samples)
        .map(|j| {
            let mut rng = stream(opts.seed, j as u64);
            let g = gaussian_sym(m, &mut rng);
            let norm = g.frobenius_norm();
            if norm > 0.0 {
                g.scale(1.0 / norm)
            } else {
                g
            }
        })
        .collect();

    let tangent = cone::tangent_cone_contains(&d, v, tol)?;
    let quotient = |vp: &SymMat, t: f64| -> Result<f64> { Ok(-2.0 * frobenius_inner(ystar, vp)? / t) };
    let strictly_feasible = |vp: &SymMat, t: f64| -> Result<bool> {
        Ok(symmat::min_eigenvalue(&y.axpy(t, vp)?)? >= INTERIOR_MARGIN * t * t)
    };

    let mut samples = Vec::new();
    for &t in &ts {
        if strictly_feasible(v, t)? {
            samples.push(QuotientSample {
                family: SampleFamily::Direction,
                t,
                quotient: quotient(v, t)?,
            });
        }
        let base = if tangent {
            match recovery_sequence(&d, v, t) {
                Ok(vt) => Some(vt),
                Err(Error::PivotNotPositiveDefinite { .. }) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        let Some(vt) = base else { continue };
        samples.push(QuotientSample {
            family: SampleFamily::Recovery,
            t,
            quotient: quotient(&vt, t)?,
        });
        for (j, g) in directions.iter().enumerate() {
            let vp = vt.axpy(opts.radius * t, g)?;
            if strictly_feasible(&vp, t)? {
                samples.push(QuotientSample {
                    family: SampleFamily::Perturbed(j),
                    t,
                    quotient: quotient(&vp, t)?,
                });
            }
        }
    }

    let tail: Vec<f64> = ts.iter().rev().take(2).copied().collect();
    let mut families: Vec<SampleFamily> = vec![SampleFamily::Direction, SampleFamily::Recovery];
    families.extend((0..opts.n_samples).map(SampleFamily::Perturbed));
    let mut family_limits = Vec::new();
    for family in families {
        let at = |t: f64| {
            samples
                .iter()
                .find(|s| s.family == family && s.t == t)
                .map(|s| s.quotient)
        };
        let limit = match tail.as_slice() {
            [t1, t2] => match (at(*t1), at(*t2)) {
                (Some(q1), Some(q2)) => Some(extrapolate(*t1, q1, *t2, q2)),
                _ => None,
            },
            [t1] => at(*t1),
            _ => None,
        };
        if let Some(l) = limit {
            family_limits.push((family, l));
        }
    }
    let recovery_limit = family_limits
        .iter()
        .find(|(f, _)| *f == SampleFamily::Recovery)
        .map(|(_, l)| *l);
    let estimate = family_limits
        .iter()
        .map(|(_, l)| *l)
        .min_by(|a, b| a.total_cmp(b))
        .ok_or(Error::NoFeasibleSample)?;
    Ok(SamplingTrace {
        samples,
        family_limits,
        recovery_limit,
        estimate,
    })
}

/// Sampling estimate of `d²δ(Y, Y*)(V)`; see [`sample_difference_quotients`].
pub fn estimate_subderivative_sampling(
    y: &SymMat,
    ystar: &SymMat,
    v: &SymMat,
    t_grid: &[f64],
    radius: f64,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    let opts = SamplingOptions {
        t_grid: t_grid.to_vec(),
        radius,
        n_samples,
        seed,
    };
    Ok(sample_difference_quotients(y, ystar, v, &opts)?.estimate)
}
