//! Second-order sufficient condition and quadratic growth checks at a
//! candidate point `x̄` of `min f(x) s.t. F(x) ⪰ 0`.
//!
//! For every nonzero `u` in the critical cone
//!
//! ```text
//! C(x̄) = { u : f′(x̄)u ≤ 0,  F′(x̄)u ∈ T(F(x̄)) }
//! ```
//!
//! the condition asks for a generalized multiplier `(α, Y*)` with `α ≥ 0`,
//! `Y* ∈ N(F(x̄))`, `⟨Y*, F′(x̄)u⟩ = 0` and `∇ₓL^α(x̄, Y*) = 0` such that
//!
//! ```text
//! ∇²ₓₓL^α(x̄, Y*)[u, u]  >  2 ⟨Y*, (F′(x̄)u) F(x̄)† (F′(x̄)u)⟩.
//! ```
//!
//! The quantifier over `C(x̄)` is discretized by sampling, so a positive
//! verdict is a sampled verification and never a proof. Multipliers are
//! searched per direction.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::{self, dist_psd};
use crate::error::{Error, Result};
use crate::nlsdp::NlsdpProblem;
use crate::random::{self, stream};
use crate::subderivative::{second_subderivative, ExtendedReal};
use crate::symmat::{
    self, conjugate_inverse, eigen_decompose_with, frobenius_inner, pseudoinverse, JacobiOrder,
    OrderedEigenDecomposition, SymMat,
};

/// Membership tolerance for cones and feasibility.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Tolerance on stationarity, normal-cone and orthogonality residuals of a certificate.
pub const DEFAULT_CERT_TOL: f64 = 1e-7;
/// A direction passes when its margin exceeds this value.
pub const DEFAULT_MARGIN_TOL: f64 = 1e-9;
pub const DEFAULT_DIRECTIONS: usize = 512;
pub const DEFAULT_STARTS: usize = 32;
pub const DEFAULT_MAX_ITER: usize = 200;

const ANGULAR_DEDUP: f64 = 1e-3;
const NULL_SPACE_REL_TOL: f64 = 1e-9;
const ASCENT_STEP_TOL: f64 = 1e-10;
/// Offset separating infeasible from feasible scores in the best-margin search.
const INFEASIBLE_PENALTY: f64 = 1e12;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Data at `x̄` shared by all direction checks.
#[derive(Clone, Debug)]
pub struct PointContext {
    pub decomposition: OrderedEigenDecomposition,
    pub grad_f: Vec<f64>,
    /// `F(x̄)†`.
    pub pseudoinverse: SymMat,
    pub tol: f64,
}

impl PointContext {
    /// Decomposes `F(x̄)`; errors with [`Error::InfeasiblePoint`] unless `F(x̄) ⪰ -tol·I`.
    pub fn new(p: &NlsdpProblem, xbar: &[f64], tol: f64, rank_tol: Option<f64>) -> Result<Self> {
        let fx = p.eval_constraint(xbar)?;
        let decomposition = eigen_decompose_with(&fx, rank_tol, JacobiOrder::Cyclic)?;
        if decomposition.min_eigenvalue() < -tol.max(decomposition.rank_tol()) {
            return Err(Error::InfeasiblePoint {
                dist: dist_psd(&fx)?,
            });
        }
        let pseudoinverse = pseudoinverse(&decomposition)?;
        Ok(Self {
            decomposition,
            grad_f: p.grad_f(xbar)?,
            pseudoinverse,
            tol,
        })
    }

    fn contains(&self, p: &NlsdpProblem, xbar: &[f64], u: &[f64]) -> Result<bool> {
        if dot(&self.grad_f, u) > self.tol * norm(u).max(1.0) {
            return Ok(false);
        }
        let g = p.constraint_derivative(xbar, u)?;
        cone::tangent_cone_contains(&self.decomposition, &g, self.tol)
    }
}

/// `u ∈ C(x̄)` within `tol`.
pub fn critical_cone_contains(p: &NlsdpProblem, xbar: &[f64], u: &[f64], tol: f64) -> Result<bool> {
    PointContext::new(p, xbar, tol, None)?.contains(p, xbar, u)
}

fn axis_directions(n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = sign;
            out.push(e);
        }
    }
    out
}

/// Angular grid: 2° steps on the circle, 10° steps in spherical angles for `n = 3`.
fn grid_directions(n: usize) -> Vec<Vec<f64>> {
    match n {
        2 => (0..180)
            .map(|k| {
                let a = (2.0 * k as f64).to_radians();
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let mut out = Vec::new();
            for polar in (0..=180).step_by(10) {
                let ph = (polar as f64).to_radians();
                let azimuths: Vec<i32> = if polar == 0 || polar == 180 {
                    vec![0]
                } else {
                    (0..360).step_by(10).collect()
                };
                for az in azimuths {
                    let th = (az as f64).to_radians();
                    out.push(vec![ph.sin() * th.cos(), ph.sin() * th.sin(), ph.cos()]);
                }
            }
            out
        }
        _ => Vec::new(),
    }
}

fn dedup_directions(dirs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for d in dirs {
        let close = kept
            .iter()
            .any(|k| dot(k, &d).clamp(-1.0, 1.0).acos() < ANGULAR_DEDUP);
        if !close {
            kept.push(d);
        }
    }
    kept
}

fn sample_with_context(
    p: &NlsdpProblem,
    xbar: &[f64],
    ctx: &PointContext,
    n_dirs: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let n = p.n();
    let mut candidates = axis_directions(n);
    candidates.extend(grid_directions(n));
    let mut rng = random::rng_from_seed(seed);
    candidates.extend((0..n_dirs).map(|_| random::unit_vector(n, &mut rng)));
    let mut inside = Vec::new();
    for u in candidates {
        if ctx.contains(p, xbar, &u)? {
            inside.push(u);
        }
    }
    Ok(dedup_directions(inside))
}

/// Unit directions in `C(x̄)`: coordinate axes, an angular grid for `n ≤ 3`, and
/// `n_dirs` uniform samples from the sphere, filtered by [`critical_cone_contains`]
/// and deduplicated within `1e-3` rad. Axes come first.
pub fn sample_critical_directions(
    p: &NlsdpProblem,
    xbar: &[f64],
    n_dirs: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<Vec<f64>>> {
    if n_dirs == 0 {
        return Err(Error::InvalidArgument("n_dirs must be at least 1".into()));
    }
    let ctx = PointContext::new(p, xbar, tol, None)?;
    sample_with_context(p, xbar, &ctx, n_dirs, seed)
}

/// A generalized multiplier `(α, Y*)` for one critical direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierCandidate {
    pub alpha: f64,
    pub ystar: SymMat,
    /// `‖∇ₓL^α(x̄, Y*)‖`.
    pub stationarity_residual: f64,
    /// Largest violation of the normal-cone conditions and of `⟨Y*, F′(x̄)u⟩ = 0`.
    pub normal_cone_slack: f64,
}

impl MultiplierCandidate {
    pub fn is_nontrivial(&self, cert_tol: f64) -> bool {
        self.alpha.max(self.ystar.frobenius_norm()) > cert_tol
    }
}

/// Settings of the multiplier search.
#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub starts: usize,
    pub max_iter: usize,
    pub cert_tol: f64,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            starts: DEFAULT_STARTS,
            max_iter: DEFAULT_MAX_ITER,
            cert_tol: DEFAULT_CERT_TOL,
            seed: 0,
        }
    }
}

/// What the ascent maximizes over the unit sphere of the null space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchObjective {
    /// `min(α, λ_min(−W))`: distance-like measure of membership in the multiplier cone.
    Feasibility,
    /// Feasibility first, then the SOSC margin among feasible points.
    BestMargin,
}

/// Result of a multiplier search along one direction.
#[derive(Clone, Debug)]
pub enum MultiplierOutcome {
    Found {
        candidate: MultiplierCandidate,
        converged: bool,
    },
    NotFound {
        /// Best feasibility score reached (`-∞` when the null space is trivial).
        best_score: f64,
        converged: bool,
        nullity: usize,
    },
}

impl MultiplierOutcome {
    pub fn candidate(&self) -> Option<&MultiplierCandidate> {
        match self {
            MultiplierOutcome::Found { candidate, .. } => Some(candidate),
            MultiplierOutcome::NotFound { .. } => None,
        }
    }

    pub fn converged(&self) -> bool {
        match self {
            MultiplierOutcome::Found { converged, .. } | MultiplierOutcome::NotFound { converged, .. } => {
                *converged
            }
        }
    }
}

/// The linear multiplier system for one direction, in null-space coordinates.
///
/// Unknowns are `z = (α, vec(W))` with `Y* = Pᵀ [[O, O], [O, W]] P`, where `vec`
/// is the isometric half-vectorization (off-diagonal entries scaled by `√2`), so
/// `‖z‖² = α² + ‖Y*‖²_F`.
struct MultiplierSpace {
    order: usize,
    omega_dim: usize,
    /// Orthonormal null-space basis, one column per free direction.
    basis: DMatrix<f64>,
    /// `Y*` for each half-vectorization coordinate.
    unit_multipliers: Vec<SymMat>,
    /// Margin as a linear functional of `z`.
    margin_weights: Vec<f64>,
}

fn half_vec_pairs(k: usize) -> Vec<(usize, usize)> {
    (0..k).flat_map(|i| (0..=i).map(move |j| (i, j))).collect()
}

impl MultiplierSpace {
    fn build(p: &NlsdpProblem, xbar: &[f64], u: &[f64], ctx: &PointContext) -> Result<Self> {
        let d = &ctx.decomposition;
        let omega = d.omega();
        let k = omega.len();
        let m = d.dim();
        let pairs = half_vec_pairs(k);
        let unit_multipliers = pairs
            .iter()
            .map(|&(i, j)| {
                let mut e = SymMat::zeros(m);
                let w = if i == j { 1.0 } else { std::f64::consts::FRAC_1_SQRT_2 };
                e.set(omega[i], omega[j], w);
                conjugate_inverse(&e, d)
            })
            .collect::<Result<Vec<_>>>()?;

        let g = p.constraint_derivative(xbar, u)?;
        let second = p.constraint_second_derivative(u)?;
        let curvature = g.sandwich(&ctx.pseudoinverse)?;
        let hu = {
            let h = p.hess_f();
            let n = p.n();
            (0..n)
                .map(|i| (0..n).map(|j| u[i] * h.get(i, j) * u[j]).sum::<f64>())
                .sum::<f64>()
        };

        let n = p.n();
        let cols = 1 + pairs.len();
        let mut system = DMatrix::<f64>::zeros(n + 1, cols);
        let mut margin_weights = Vec::with_capacity(cols);
        for i in 0..n {
            system[(i, 0)] = ctx.grad_f[i];
        }
        margin_weights.push(hu);
        for (c, y) in unit_multipliers.iter().enumerate() {
            let adj = p.constraint_adjoint(xbar, y)?;
            for i in 0..n {
                system[(i, c + 1)] = adj[i];
            }
            system[(n, c + 1)] = frobenius_inner(y, &g)?;
            margin_weights.push(frobenius_inner(y, &second)? - 2.0 * frobenius_inner(y, &curvature)?);
        }

        Ok(Self {
            order: m,
            omega_dim: k,
            basis: null_space(&system),
            unit_multipliers,
            margin_weights,
        })
    }

    fn nullity(&self) -> usize {
        self.basis.ncols()
    }

    fn point(&self, c: &[f64]) -> Vec<f64> {
        let cv = nalgebra::DVector::from_column_slice(c);
        (&self.basis * cv).iter().copied().collect()
    }

    fn w_block(&self, z: &[f64]) -> SymMat {
        let mut w = SymMat::zeros(self.omega_dim);
        for (idx, (i, j)) in half_vec_pairs(self.omega_dim).into_iter().enumerate() {
            let s = if i == j { 1.0 } else { std::f64::consts::FRAC_1_SQRT_2 };
            w.set(i, j, s * z[idx + 1]);
        }
        w
    }

    fn feasibility(&self, z: &[f64]) -> f64 {
        if self.omega_dim == 0 {
            return z[0];
        }
        let lowest = symmat::max_eigenvalue(&self.w_block(z)).map(|l| -l).unwrap_or(f64::NEG_INFINITY);
        z[0].min(lowest)
    }

    fn margin(&self, z: &[f64]) -> f64 {
        dot(&self.margin_weights, z)
    }

    fn multiplier(&self, z: &[f64]) -> SymMat {
        let m = self.order;
        self.unit_multipliers
            .iter()
            .zip(&z[1..])
            .fold(SymMat::zeros(m), |acc, (y, &w)| acc.axpy(w, y).expect("same order"))
    }
}

/// Orthonormal basis of `{z : Az = 0}` from a full SVD (rows padded to make `V` square).
fn null_space(a: &DMatrix<f64>) -> DMatrix<f64> {
    let cols = a.ncols();
    let rows = a.nrows().max(cols);
    let mut padded = DMatrix::<f64>::zeros(rows, cols);
    padded.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let smax = svd.singular_values.iter().fold(0.0_f64, |m, s| m.max(*s));
    let cut = NULL_SPACE_REL_TOL * smax.max(1.0);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= cut)
        .collect();
    DMatrix::from_fn(cols, keep.len(), |r, c| v_t[(keep[c], r)])
}

fn normalize(c: &mut [f64]) {
    let n = norm(c);
    if n > 0.0 {
        c.iter_mut().for_each(|x| *x /= n);
    }
}

/// Multi-start coordinate ascent of `score` on the unit sphere of `R^dim`.
fn sphere_ascent(
    dim: usize,
    score: impl Fn(&[f64]) -> f64,
    starts: usize,
    max_iter: usize,
    seed: u64,
) -> (Vec<f64>, f64, bool) {
    if dim == 1 {
        let (a, b) = (score(&[1.0]), score(&[-1.0]));
        return if a >= b { (vec![1.0], a, true) } else { (vec![-1.0], b, true) };
    }
    let mut initial: Vec<Vec<f64>> = axis_directions(dim);
    initial.truncate(starts.max(1));
    let mut rng = random::rng_from_seed(seed);
    while initial.len() < starts {
        initial.push(random::unit_vector(dim, &mut rng));
    }

    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for mut c in initial {
        let mut val = score(&c);
        let mut step = 0.5;
        let mut iter = 0;
        while iter < max_iter && step > ASCENT_STEP_TOL {
            let mut improved = false;
            for i in 0..dim {
                for sign in [1.0, -1.0] {
                    let mut trial = c.clone();
                    trial[i] += sign * step;
                    normalize(&mut trial);
                    let v = score(&trial);
                    if v > val {
                        c = trial;
                        val = v;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
            iter += 1;
        }
        let converged = step <= ASCENT_STEP_TOL;
        if best.as_ref().is_none_or(|(_, b, _)| val > *b) {
            best = Some((c, val, converged));
        }
    }
    best.expect("at least one start")
}

fn search_multiplier(
    p: &NlsdpProblem,
    xbar: &[f64],
    u: &[f64],
    ctx: &PointContext,
    objective: SearchObjective,
    opts: &SearchOptions,
) -> Result<MultiplierOutcome> {
    let space = MultiplierSpace::build(p, xbar, u, ctx)?;
    let nullity = space.nullity();
    if nullity == 0 {
        return Ok(MultiplierOutcome::NotFound {
            best_score: f64::NEG_INFINITY,
            converged: true,
            nullity,
        });
    }
    let cert_tol = opts.cert_tol;
    let score = |c: &[f64]| {
        let z = space.point(c);
        let feas = space.feasibility(&z);
        match objective {
            SearchObjective::Feasibility => feas,
            SearchObjective::BestMargin if feas >= -cert_tol => space.margin(&z),
            SearchObjective::BestMargin => feas - INFEASIBLE_PENALTY,
        }
    };
    let (c, _, converged) = sphere_ascent(nullity, score, opts.starts, opts.max_iter, opts.seed);
    let z = space.point(&c);
    let feas = space.feasibility(&z);
    if feas < -cert_tol {
        return Ok(MultiplierOutcome::NotFound {
            best_score: feas,
            converged,
            nullity,
        });
    }

    let g = p.constraint_derivative(xbar, u)?;
    let assemble = |scale: f64| -> Result<MultiplierCandidate> {
        let alpha = (z[0] * scale).max(0.0);
        let ystar = space.multiplier(&z).scale(scale);
        let residual = norm(&p.lagrangian_grad(alpha, xbar, &ystar)?);
        let slack = cone::normal_cone_violation(&ctx.decomposition, &ystar)?
            .max(frobenius_inner(&ystar, &g)?.abs());
        Ok(MultiplierCandidate {
            alpha,
            ystar,
            stationarity_residual: residual,
            normal_cone_slack: slack,
        })
    };
    let sound = |c: &MultiplierCandidate| {
        c.stationarity_residual <= cert_tol && c.normal_cone_slack <= cert_tol && c.is_nontrivial(cert_tol)
    };

    // Prefer the normalization α = 1 when the objective multiplier is active.
    let mut candidate = assemble(1.0)?;
    if z[0] > cert_tol {
        let scaled = assemble(1.0 / z[0])?;
        if sound(&scaled) {
            candidate = scaled;
        }
    }
    if !sound(&candidate) {
        return Ok(MultiplierOutcome::NotFound {
            best_score: feas,
            converged,
            nullity,
        });
    }
    Ok(MultiplierOutcome::Found {
        candidate,
        converged,
    })
}

/// Searches `Λ^α(x̄, u)` for a nontrivial multiplier.
///
/// `Y*` is parametrized as `Pᵀ [[O, O], [O, W]] P`, so the normal-cone zero
/// blocks hold by construction. Stationarity and `⟨Y*, F′(x̄)u⟩ = 0` are linear in
/// `(α, W)`; on the unit sphere of their null space the search maximizes
/// `min(α, λ_min(−W))`. A point with value `≥ -cert_tol` is returned, scaled to
/// `α = 1` when `α > 0`.
pub fn find_multiplier(
    p: &NlsdpProblem,
    xbar: &[f64],
    u: &[f64],
    opts: &SearchOptions,
) -> Result<Option<MultiplierCandidate>> {
    let ctx = PointContext::new(p, xbar, DEFAULT_TOL, None)?;
    find_multiplier_with(p, xbar, u, &ctx, SearchObjective::Feasibility, opts)
        .map(|o| o.candidate().cloned())
}

/// [`find_multiplier`] with an explicit context and objective, returning the full outcome.
pub fn find_multiplier_with(
    p: &NlsdpProblem,
    xbar: &[f64],
    u: &[f64],
    ctx: &PointContext,
    objective: SearchObjective,
    opts: &SearchOptions,
) -> Result<MultiplierOutcome> {
    search_multiplier(p, xbar, u, ctx, objective, opts)
}

/// Both evaluations of the SOSC margin for one certificate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarginBreakdown {
    /// `∇²ₓₓL^α(x̄, Y*)[u, u]`.
    pub hessian_term: f64,
    /// `2⟨Y*, G F(x̄)† G⟩` with `G = F′(x̄)u`.
    pub curvature_term: f64,
    /// `hessian_term − curvature_term`.
    pub margin: f64,
    /// Second subderivative `d²δ(F(x̄), Y*)(G)`.
    pub subderivative: ExtendedReal,
}

impl MarginBreakdown {
    /// `hessian_term + d²δ(F(x̄), Y*)(G)` when the latter is finite.
    pub fn margin_via_subderivative(&self) -> Option<f64> {
        self.subderivative.finite().map(|s| self.hessian_term + s)
    }
}

/// Computes the margin through the pseudoinverse and through the second subderivative.
pub fn margin_breakdown(
    p: &NlsdpProblem,
    ctx: &PointContext,
    xbar: &[f64],
    u: &[f64],
    cand: &MultiplierCandidate,
    tol: f64,
) -> Result<MarginBreakdown> {
    let g = p.constraint_derivative(xbar, u)?;
    let hessian_term = p.lagrangian_hess_form(cand.alpha, xbar, &cand.ystar, u)?;
    let curvature_term = 2.0 * frobenius_inner(&cand.ystar, &g.sandwich(&ctx.pseudoinverse)?)?;
    let subderivative = second_subderivative(&ctx.decomposition, &cand.ystar, &g, tol)?;
    if !subderivative.is_finite() {
        return Err(Error::MarginAnomaly {
            detail: format!("d²δ = {subderivative}, curvature term = {curvature_term}"),
        });
    }
    Ok(MarginBreakdown {
        hessian_term,
        curvature_term,
        margin: hessian_term - curvature_term,
        subderivative,
    })
}

/// `∇²ₓₓL^α(x̄, Y*)[u, u] − 2⟨Y*, G F(x̄)† G⟩`; positive at every critical
/// direction is the sufficient condition. `tol` is the normal-cone tolerance used
/// by the subderivative cross-check.
pub fn sosc_margin(
    p: &NlsdpProblem,
    xbar: &[f64],
    u: &[f64],
    cand: &MultiplierCandidate,
    tol: f64,
) -> Result<f64> {
    let ctx = PointContext::new(p, xbar, DEFAULT_TOL, None)?;
    Ok(margin_breakdown(p, &ctx, xbar, u, cand, tol)?.margin)
}

/// Settings for [`check_sosc`].
#[derive(Clone, Debug)]
pub struct SoscOptions {
    pub tol: f64,
    pub rank_tol: Option<f64>,
    pub cert_tol: f64,
    pub margin_tol: f64,
    pub n_dirs: usize,
    pub seed: u64,
    pub starts: usize,
    pub max_iter: usize,
}

impl Default for SoscOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            rank_tol: None,
            cert_tol: DEFAULT_CERT_TOL,
            margin_tol: DEFAULT_MARGIN_TOL,
            n_dirs: DEFAULT_DIRECTIONS,
            seed: 0,
            starts: DEFAULT_STARTS,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    VerifiedSampled,
    FailedAtDirection,
    CriticalConeTrivial,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::VerifiedSampled => "VERIFIED_SAMPLED",
            Verdict::FailedAtDirection => "FAILED_AT_DIRECTION",
            Verdict::CriticalConeTrivial => "CRITICAL_CONE_TRIVIAL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        };
        f.write_str(s)
    }
}

/// A direction together with the multiplier certifying it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub direction: Vec<f64>,
    pub multiplier: MultiplierCandidate,
    pub margin: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionStatus {
    Passed,
    NoMultiplier,
    NonPositiveMargin,
    SearchCapped,
}

/// Per-direction outcome, in sampling order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionResult {
    pub direction: Vec<f64>,
    pub status: DirectionStatus,
    pub margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoscReport {
    pub verdict: Verdict,
    pub directions_checked: usize,
    /// Smallest margin among certified directions (`None` when there is none).
    pub min_margin: Option<f64>,
    /// Witness for `FAILED_AT_DIRECTION`, else the direction attaining `min_margin`.
    pub worst_direction: Option<Vec<f64>>,
    pub certificates: Vec<Certificate>,
    pub directions: Vec<DirectionResult>,
    pub diagnostics: Vec<String>,
}

struct Checked {
    result: DirectionResult,
    certificate: Option<Certificate>,
    failure_score: Option<f64>,
}

fn check_direction(
    p: &NlsdpProblem,
    xbar: &[f64],
    u: &[f64],
    ctx: &PointContext,
    opts: &SoscOptions,
    index: usize,
) -> Result<Checked> {
    let search = SearchOptions {
        starts: opts.starts,
        max_iter: opts.max_iter,
        cert_tol: opts.cert_tol,
        seed: opts.seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
    };
    let outcome = search_multiplier(p, xbar, u, ctx, SearchObjective::BestMargin, &search)?;
    let converged = outcome.converged();
    let (status, margin, certificate, failure_score) = match outcome {
        MultiplierOutcome::Found { candidate, .. } => {
            let breakdown = margin_breakdown(p, ctx, xbar, u, &candidate, opts.cert_tol)?;
            let margin = breakdown.margin;
            let certificate = Certificate {
                direction: u.to_vec(),
                multiplier: candidate,
                margin,
            };
            if margin > opts.margin_tol {
                (DirectionStatus::Passed, Some(margin), Some(certificate), None)
            } else if converged {
                (DirectionStatus::NonPositiveMargin, Some(margin), Some(certificate), Some(margin))
            } else {
                (DirectionStatus::SearchCapped, Some(margin), Some(certificate), None)
            }
        }
        MultiplierOutcome::NotFound { best_score, .. } if converged => (
            DirectionStatus::NoMultiplier,
            None,
            None,
            Some(best_score - INFEASIBLE_PENALTY),
        ),
        MultiplierOutcome::NotFound { .. } => (DirectionStatus::SearchCapped, None, None, None),
    };
    Ok(Checked {
        result: DirectionResult {
            direction: u.to_vec(),
            status,
            margin,
        },
        certificate,
        failure_score,
    })
}

/// Point-level diagnostics echoed in reports.
pub fn describe_point(ctx: &PointContext) -> Vec<String> {
    let d = &ctx.decomposition;
    vec![
        format!("eigenvalues of F(xbar): {:?}", d.eigenvalues()),
        format!("pi (positive) = {:?}, omega (zero) = {:?}, rank_tol = {:e}", d.pi(), d.omega(), d.rank_tol()),
    ]
}

/// Samples the critical cone and certifies each direction with its own multiplier.
pub fn check_sosc(p: &NlsdpProblem, xbar: &[f64], opts: &SoscOptions) -> Result<SoscReport> {
    let ctx = PointContext::new(p, xbar, opts.tol, opts.rank_tol)?;
    check_sosc_with(p, xbar, &ctx, opts)
}

/// [`check_sosc`] with a precomputed context.
pub fn check_sosc_with(
    p: &NlsdpProblem,
    xbar: &[f64],
    ctx: &PointContext,
    opts: &SoscOptions,
) -> Result<SoscReport> {
    let dirs = sample_with_context(p, xbar, ctx, opts.n_dirs.max(1), opts.seed)?;
    let mut diagnostics = describe_point(ctx);
    if dirs.is_empty() {
        diagnostics.push("no sampled unit direction lies in the critical cone".into());
        return Ok(SoscReport {
            verdict: Verdict::CriticalConeTrivial,
            directions_checked: 0,
            min_margin: None,
            worst_direction: None,
            certificates: Vec::new(),
            directions: Vec::new(),
            diagnostics,
        });
    }

    let checked: Vec<Checked> = dirs
        .par_iter()
        .enumerate()
        .map(|(i, u)| check_direction(p, xbar, u, ctx, opts, i))
        .collect::<Result<_>>()?;

    let mut worst_failure: Option<(f64, &Vec<f64>)> = None;
    let mut capped = 0usize;
    let mut min_cert: Option<(f64, &Vec<f64>)> = None;
    for c in &checked {
        if let Some(score) = c.failure_score {
            if worst_failure.is_none_or(|(s, _)| score < s) {
                worst_failure = Some((score, &c.result.direction));
            }
        }
        if c.result.status == DirectionStatus::SearchCapped {
            capped += 1;
        }
        if let Some(cert) = &c.certificate {
            if min_cert.is_none_or(|(m, _)| cert.margin < m) {
                min_cert = Some((cert.margin, &c.result.direction));
            }
        }
    }

    let verdict = if worst_failure.is_some() {
        Verdict::FailedAtDirection
    } else if capped > 0 {
        Verdict::Inconclusive
    } else {
        Verdict::VerifiedSampled
    };
    let worst_direction = match verdict {
        Verdict::FailedAtDirection => worst_failure.map(|(_, d)| d.clone()),
        _ => min_cert.map(|(_, d)| d.clone()),
    };
    diagnostics.push(format!(
        "checked {} sampled critical directions; a VERIFIED_SAMPLED verdict covers these samples only and is not a proof over the whole critical cone",
        dirs.len()
    ));
    if capped > 0 {
        diagnostics.push(format!("{capped} direction(s) hit the multiplier-search iteration cap"));
    }
    if let Some((score, d)) = worst_failure {
        if score < -INFEASIBLE_PENALTY / 2.0 {
            diagnostics.push(format!("no admissible multiplier exists along {d:?}"));
        } else {
            diagnostics.push(format!("best margin {score:e} is not positive along {d:?}"));
        }
    }

    Ok(SoscReport {
        verdict,
        directions_checked: dirs.len(),
        min_margin: min_cert.map(|(m, _)| m),
        worst_direction,
        certificates: checked.iter().filter_map(|c| c.certificate.clone()).collect(),
        directions: checked.into_iter().map(|c| c.result).collect(),
        diagnostics,
    })
}

/// Empirical check of `max(f(x) − f(x̄), dist(F(x), S₊)) ≥ β‖x − x̄‖²` on `B_ε(x̄)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub epsilon: f64,
    pub beta: f64,
    pub samples: usize,
    pub violations: usize,
    /// Smallest observed ratio, i.e. the largest `β` the sample supports.
    pub min_ratio: f64,
    pub min_ratio_point: Vec<f64>,
    /// Samples with `dist(F(x), S₊) ≤ tol`, used for the plain growth condition
    /// `f(x) − f(x̄) ≥ β‖x − x̄‖²` on feasible points.
    pub feasible_samples: usize,
    pub feasible_violations: usize,
    pub feasible_min_ratio: Option<f64>,
}

fn growth_points(xbar: &[f64], epsilon: f64, n_samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = xbar.len();
    let shift = |dir: &[f64], r: f64| -> Vec<f64> { xbar.iter().zip(dir).map(|(x, d)| x + r * d).collect() };
    let mut pts = Vec::new();
    for axis in axis_directions(n) {
        for k in 0..10 {
            pts.push(shift(&axis, epsilon * 0.5f64.powi(k)));
        }
    }
    let mut rng = stream(seed, 0);
    for _ in 0..n_samples.div_ceil(8) {
        let dir = random::unit_vector(n, &mut rng);
        pts.push(shift(&dir, epsilon));
    }
    let mut rng = stream(seed, 1);
    for _ in 0..n_samples {
        let dir = random::unit_vector(n, &mut rng);
        let r: f64 = rand::Rng::random::<f64>(&mut rng);
        pts.push(shift(&dir, epsilon * r.powf(1.0 / n as f64)));
    }
    pts
}

/// Samples `B_ε(x̄)` (uniformly, on the boundary sphere, and along the axes at
/// radii `ε, ε/2, …`) and evaluates the growth ratio at every point.
pub fn verify_growth(
    p: &NlsdpProblem,
    xbar: &[f64],
    epsilon: f64,
    beta: f64,
    n_samples: usize,
    seed: u64,
) -> Result<GrowthReport> {
    verify_growth_with_tol(p, xbar, epsilon, beta, n_samples, seed, DEFAULT_TOL)
}

/// [`verify_growth`] with an explicit feasibility tolerance for the feasible-only statistics.
pub fn verify_growth_with_tol(
    p: &NlsdpProblem,
    xbar: &[f64],
    epsilon: f64,
    beta: f64,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<GrowthReport> {
    if !(epsilon > 0.0) || !(beta >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive and beta nonnegative (got {epsilon}, {beta})"
        )));
    }
    if xbar.len() != p.n() {
        return Err(Error::DimensionMismatch {
            expected: p.n(),
            found: xbar.len(),
            context: "decision vector",
        });
    }
    let f0 = p.eval_f(xbar)?;
    let pts = growth_points(xbar, epsilon, n_samples, seed);
    let evaluated: Vec<(f64, f64, Vec<f64>, bool)> = pts
        .into_par_iter()
        .map(|x| -> Result<_> {
            let r2: f64 = x.iter().zip(xbar).map(|(a, b)| (a - b).powi(2)).sum();
            let gap = p.eval_f(&x)? - f0;
            let dist = dist_psd(&p.eval_constraint(&x)?)?;
            Ok((gap.max(dist) / r2, gap / r2, x, dist <= tol))
        })
        .collect::<Result<_>>()?;

    let mut report = GrowthReport {
        epsilon,
        beta,
        samples: evaluated.len(),
        violations: 0,
        min_ratio: f64::INFINITY,
        min_ratio_point: xbar.to_vec(),
        feasible_samples: 0,
        feasible_violations: 0,
        feasible_min_ratio: None,
    };
    for (ratio, feasible_ratio, x, feasible) in evaluated {
        if ratio < beta {
            report.violations += 1;
        }
        if ratio < report.min_ratio {
            report.min_ratio = ratio;
            report.min_ratio_point = x;
        }
        if feasible {
            report.feasible_samples += 1;
            if feasible_ratio < beta {
                report.feasible_violations += 1;
            }
            report.feasible_min_ratio = Some(report.feasible_min_ratio.map_or(feasible_ratio, |m| m.min(feasible_ratio)));
        }
    }
    Ok(report)
}
