//! JSON report format and its text rendering.
//!
//! Every command emits one [`Report`] object carrying `"schema_version": "1"`.
//! The JSON Schema lives in `schema/report.schema.json` next to this crate.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cone;
use crate::error::{Error, Result};
use crate::nlsdp::{NlsdpProblem, ProblemInstance};
use crate::sosc::{GrowthReport, PointContext, SoscReport};
use crate::subderivative::{
    recovery_sequence, sample_difference_quotients, second_subderivative, ExtendedReal,
    SamplingOptions,
};
use crate::symmat::{self, eigen_decompose_with, frobenius_inner, JacobiOrder, OrderedEigenDecomposition, SymMat};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    CheckSosc,
    Subderivative,
    Growth,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::CheckSosc => "check-sosc",
            CommandKind::Subderivative => "subderivative",
            CommandKind::Growth => "growth",
        }
    }
}

/// Eigenvalues and the rank decision for a PSD matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub pi: Vec<usize>,
    pub omega: Vec<usize>,
    pub rank_tol: f64,
}

impl From<&OrderedEigenDecomposition> for Spectrum {
    fn from(d: &OrderedEigenDecomposition) -> Self {
        Self {
            eigenvalues: d.eigenvalues().to_vec(),
            pi: d.pi().to_vec(),
            omega: d.omega().to_vec(),
            rank_tol: d.rank_tol(),
        }
    }
}

/// The candidate point and the spectrum of `F(x̄)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub xbar: Vec<f64>,
    pub objective_value: f64,
    pub constraint_dist: f64,
    pub constraint: Spectrum,
}

impl PointSummary {
    pub fn new(p: &NlsdpProblem, xbar: &[f64], ctx: &PointContext) -> Result<Self> {
        Ok(Self {
            xbar: xbar.to_vec(),
            objective_value: p.eval_f(xbar)?,
            constraint_dist: cone::dist_psd(&p.eval_constraint(xbar)?)?,
            constraint: Spectrum::from(&ctx.decomposition),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubderivativeBranch {
    /// `V ∈ T(Y)` and `⟨Y*, V⟩ = 0`: the value is `-2⟨Y*, V Y† V⟩`.
    Finite,
    /// `V ∉ T(Y)`.
    NotTangent,
    /// `⟨Y*, V⟩ < 0`.
    NegativeInner,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryStep {
    pub t: f64,
    /// `-2⟨Y*, V_t⟩ / t`.
    pub quotient: f64,
    /// `λ_min(Y + tV_t)`, nonnegative up to rounding.
    pub min_eigenvalue: f64,
    /// `‖V_t − V‖_F`.
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubderivativeSummary {
    pub spectrum: Spectrum,
    pub inner_product: f64,
    pub closed_form: ExtendedReal,
    pub branch: SubderivativeBranch,
    /// Smallest extrapolated limit found by the sampling oracle; absent when no
    /// feasible sequence exists, which is the oracle's reading of `+∞`.
    pub oracle_estimate: Option<f64>,
    pub oracle_families: usize,
    pub recovery_limit: Option<f64>,
    pub recovery_trace: Vec<RecoveryStep>,
}

/// A `(Y, Y*, V)` triple as stored in JSON: `{"Y": …, "Ystar": …, "V": …}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    #[serde(rename = "Y")]
    pub y: SymMat,
    #[serde(rename = "Ystar")]
    pub ystar: SymMat,
    #[serde(rename = "V")]
    pub v: SymMat,
}

impl Triple {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let t: Triple = serde_json::from_str(s).map_err(|e| Error::Input(format!("triple JSON: {e}")))?;
        if t.ystar.dim() != t.y.dim() || t.v.dim() != t.y.dim() {
            return Err(Error::Input(format!(
                "triple orders differ: Y is {}, Ystar is {}, V is {}",
                t.y.dim(),
                t.ystar.dim(),
                t.v.dim()
            )));
        }
        Ok(t)
    }
}

/// Closed form, sampling oracle and recovery trace for one triple.
///
/// Hypothesis violations (`Y ∉ S₊`, `Y* ∉ N(Y)`) are returned as errors.
pub fn subderivative_summary(
    triple: &Triple,
    rank_tol: Option<f64>,
    tol: f64,
    sampling: &SamplingOptions,
) -> Result<SubderivativeSummary> {
    let Triple { y, ystar, v } = triple;
    let d = eigen_decompose_with(y, rank_tol, JacobiOrder::Cyclic)?;
    let closed_form = second_subderivative(&d, ystar, v, tol)?;
    let inner_product = frobenius_inner(ystar, v)?;
    let branch = if !cone::tangent_cone_contains(&d, v, tol)? {
        SubderivativeBranch::NotTangent
    } else if closed_form.is_finite() {
        SubderivativeBranch::Finite
    } else {
        SubderivativeBranch::NegativeInner
    };

    let (oracle_estimate, oracle_families, recovery_limit) =
        match sample_difference_quotients(y, ystar, v, sampling) {
            Ok(trace) => (Some(trace.estimate), trace.family_limits.len(), trace.recovery_limit),
            Err(Error::NoFeasibleSample) => (None, 0, None),
            Err(e) => return Err(e),
        };

    let mut recovery_trace = Vec::new();
    if branch != SubderivativeBranch::NotTangent {
        let mut ts = sampling.t_grid.clone();
        ts.sort_by(|a, b| b.total_cmp(a));
        for t in ts {
            let vt = match recovery_sequence(&d, v, t) {
                Ok(vt) => vt,
                Err(Error::PivotNotPositiveDefinite { .. } | Error::NotInTangentCone) => continue,
                Err(e) => return Err(e),
            };
            recovery_trace.push(RecoveryStep {
                t,
                quotient: -2.0 * frobenius_inner(ystar, &vt)? / t,
                min_eigenvalue: symmat::min_eigenvalue(&y.axpy(t, &vt)?)?,
                offset: (&vt - v).frobenius_norm(),
            });
        }
    }

    Ok(SubderivativeSummary {
        spectrum: Spectrum::from(&d),
        inner_product,
        closed_form,
        branch,
        oracle_estimate,
        oracle_families,
        recovery_limit,
        recovery_trace,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for ErrorInfo {
    fn from(e: &Error) -> Self {
        Self {
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

/// Top-level report. Exactly one of `sosc`, `growth`, `subderivative` or
/// `error` is present, matching `command`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub command: CommandKind,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<PointSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sosc: Option<SoscReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<GrowthReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subderivative: Option<SubderivativeSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
}

impl Report {
    pub fn new(command: CommandKind, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            command,
            seed,
            point: None,
            sosc: None,
            growth: None,
            subderivative: None,
            error: None,
        }
    }

    pub fn failed(command: CommandKind, seed: u64, e: &Error) -> Self {
        Self {
            error: Some(ErrorInfo::from(e)),
            ..Self::new(command, seed)
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: Report = serde_json::from_str(s)?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::Input(format!(
                "unsupported report schema_version {:?}",
                r.schema_version
            )));
        }
        Ok(r)
    }

    /// Human-readable rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "psd-sosc {} (seed {})", self.command.name(), self.seed);
        if let Some(p) = &self.point {
            write_point(&mut out, p);
        }
        if let Some(s) = &self.sosc {
            write_sosc(&mut out, s);
        }
        if let Some(g) = &self.growth {
            write_growth(&mut out, g);
        }
        if let Some(s) = &self.subderivative {
            write_subderivative(&mut out, s);
        }
        if let Some(e) = &self.error {
            let _ = writeln!(out, "error [{}]: {}", e.kind, e.message);
        }
        out
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn write_spectrum(out: &mut String, label: &str, s: &Spectrum) {
    let eig: Vec<String> = s.eigenvalues.iter().map(|x| format!("{x:.6e}")).collect();
    let _ = writeln!(out, "eigenvalues of {label}: [{}]", eig.join(", "));
    let _ = writeln!(out, "pi = {:?}  omega = {:?}  (rank tol {:.1e})", s.pi, s.omega, s.rank_tol);
}

fn write_point(out: &mut String, p: &PointSummary) {
    let _ = writeln!(out, "xbar = {}  f(xbar) = {:.6}  dist(F(xbar), PSD) = {:.3e}", fmt_vec(&p.xbar), p.objective_value, p.constraint_dist);
    write_spectrum(out, "F(xbar)", &p.constraint);
}

fn write_sosc(out: &mut String, s: &SoscReport) {
    let _ = writeln!(out, "verdict: {}", s.verdict);
    let _ = writeln!(out, "directions checked: {}", s.directions_checked);
    match s.min_margin {
        Some(m) => {
            let _ = writeln!(out, "min margin: {m:.9}");
        }
        None => {
            let _ = writeln!(out, "min margin: none");
        }
    }
    if let Some(w) = &s.worst_direction {
        let _ = writeln!(out, "worst direction: {}", fmt_vec(w));
    }
    if let Some(c) = s
        .certificates
        .iter()
        .min_by(|a, b| a.margin.total_cmp(&b.margin))
    {
        let _ = writeln!(
            out,
            "certificate at worst margin: alpha = {:.6}, Y* lower = {}, stationarity {:.1e}, normal-cone slack {:.1e}",
            c.multiplier.alpha,
            fmt_vec(c.multiplier.ystar.lower()),
            c.multiplier.stationarity_residual,
            c.multiplier.normal_cone_slack
        );
    }
    for line in s.diagnostics.iter().skip(2) {
        let _ = writeln!(out, "note: {line}");
    }
}

fn write_growth(out: &mut String, g: &GrowthReport) {
    let _ = writeln!(out, "epsilon = {}  beta = {}", g.epsilon, g.beta);
    let _ = writeln!(out, "samples: {}  violations: {}", g.samples, g.violations);
    let _ = writeln!(out, "min ratio: {:.9} at {}", g.min_ratio, fmt_vec(&g.min_ratio_point));
    let feasible = g
        .feasible_min_ratio
        .map_or_else(|| "none".to_string(), |r| format!("{r:.9}"));
    let _ = writeln!(
        out,
        "feasible samples: {}  violations: {}  min ratio: {feasible}",
        g.feasible_samples, g.feasible_violations
    );
}

fn write_subderivative(out: &mut String, s: &SubderivativeSummary) {
    write_spectrum(out, "Y", &s.spectrum);
    let _ = writeln!(out, "<Y*, V> = {:.3e}", s.inner_product);
    let _ = writeln!(out, "closed form: {} ({:?})", s.closed_form, s.branch);
    match s.oracle_estimate {
        Some(e) => {
            let _ = writeln!(out, "sampling oracle: {e:.9} ({} feasible families)", s.oracle_families);
        }
        None => {
            let _ = writeln!(out, "sampling oracle: no feasible sequence (+inf)");
        }
    }
    if let Some(l) = s.recovery_limit {
        let _ = writeln!(out, "recovery limit: {l:.9}");
    }
    if !s.recovery_trace.is_empty() {
        let _ = writeln!(out, "{:>10}  {:>16}  {:>12}  {:>10}", "t", "quotient", "min eig", "|V_t - V|");
        for r in &s.recovery_trace {
            let _ = writeln!(out, "{:>10.3e}  {:>16.9}  {:>12.3e}  {:>10.3e}", r.t, r.quotient, r.min_eigenvalue, r.offset);
        }
    }
}

/// Reads a problem file and its `xbar`.
pub fn load_problem(path: &std::path::Path) -> Result<(NlsdpProblem, Vec<f64>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    let inst = ProblemInstance::from_json_str(&text)?;
    let xbar = inst.require_xbar()?.to_vec();
    Ok((inst.problem, xbar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlsdp::fixtures::*;
    use crate::sosc::{check_sosc, SoscOptions, DEFAULT_TOL};

    fn example_triple() -> Triple {
        Triple {
            y: SymMat::from_diag(&[1.0, 0.0]),
            ystar: SymMat::from_diag(&[0.0, -1.0]),
            v: SymMat::from_lower(2, vec![0.0, 1.0, 0.0]).unwrap(),
        }
    }

    #[test]
    fn sosc_report_round_trip() {
        let p = p1();
        let x = origin(2);
        let ctx = PointContext::new(&p, &x, DEFAULT_TOL, None).unwrap();
        let mut r = Report::new(CommandKind::CheckSosc, 0);
        r.point = Some(PointSummary::new(&p, &x, &ctx).unwrap());
        r.sosc = Some(check_sosc(&p, &x, &SoscOptions::default()).unwrap());
        let json = r.to_json().unwrap();
        assert!(json.contains("\"schema_version\": \"1\""));
        assert!(json.contains("\"VERIFIED_SAMPLED\""));
        assert_eq!(Report::from_json(&json).unwrap(), r);
        assert!(r.to_text().contains("omega = [1]"));
    }

    #[test]
    fn wrong_schema_version_is_rejected() {
        let mut r = Report::new(CommandKind::Growth, 1);
        r.schema_version = "2".into();
        assert!(Report::from_json(&r.to_json().unwrap()).is_err());
    }

    #[test]
    fn triple_summary() {
        let s = subderivative_summary(&example_triple(), None, 1e-8, &SamplingOptions::default()).unwrap();
        assert_eq!(s.branch, SubderivativeBranch::Finite);
        assert!((s.closed_form.to_f64() - 2.0).abs() < 1e-12);
        assert!((s.oracle_estimate.unwrap() - 2.0).abs() < 1e-6);
        assert!((s.recovery_limit.unwrap() - 2.0).abs() < 1e-6);
        assert_eq!(s.recovery_trace.len(), SamplingOptions::default().t_grid.len());
    }

    #[test]
    fn triple_outside_hypotheses() {
        let mut t = example_triple();
        t.ystar = SymMat::from_diag(&[1.0, -1.0]);
        assert!(matches!(
            subderivative_summary(&t, None, 1e-8, &SamplingOptions::default()),
            Err(Error::NotInNormalCone)
        ));
        let mut t = example_triple();
        t.v = SymMat::from_diag(&[0.0, -1.0]);
        let s = subderivative_summary(&t, None, 1e-8, &SamplingOptions::default()).unwrap();
        assert_eq!(s.branch, SubderivativeBranch::NotTangent);
        assert_eq!(s.oracle_estimate, None);
    }

    #[test]
    fn triple_orders_must_agree() {
        let json = r#"{"Y":{"m":1,"lower":[1]},"Ystar":{"m":1,"lower":[0]},"V":{"m":2,"lower":[0,0,0]}}"#;
        assert!(matches!(Triple::from_json_str(json), Err(Error::Input(_))));
    }
}
