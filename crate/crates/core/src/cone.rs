//! Geometry of the PSD cone: membership, projection, distance, and the
//! tangent/normal cone formulas in the eigenbasis of a boundary point.
//!
//! For `Y = Pᵀ M P` with index sets `π` (positive) and `ω` (zero eigenvalues):
//!
//! ```text
//! T(Y) = { V : V^P_ωω ⪰ 0 }
//! N(Y) = { Y* : (Y*)^P_ππ = O, (Y*)^P_πω = O, (Y*)^P_ωω ⪯ 0 }
//! ```
//!
//! Memberships are decided within a tolerance. A definition-based oracle for
//! the tangent cone (`dist(Y + tV, S₊)/t → 0`) is provided for cross-checks.

use crate::error::{Error, Result};
use crate::symmat::{self, block, eigen_decompose_auto, OrderedEigenDecomposition, SymMat};

/// Allowed slope of `dist(Y + tV, S₊)/t` in [`tangent_cone_contains_oracle`].
pub const ORACLE_SLOPE: f64 = 1e3;

/// Default t-grid for [`tangent_cone_contains_oracle`]: `1e-1, 1e-2, …, 1e-6`.
pub fn default_oracle_t_grid() -> Vec<f64> {
    (1..=6).map(|k| 10f64.powi(-k)).collect()
}

/// `true` iff the smallest eigenvalue of `a` is at least `-tol`.
pub fn is_psd(a: &SymMat, tol: f64) -> Result<bool> {
    Ok(symmat::min_eigenvalue(a)? >= -tol)
}

/// Frobenius-nearest PSD matrix `Pᵀ diag(max(λ, 0)) P`.
pub fn project_psd(a: &SymMat) -> Result<SymMat> {
    let d = eigen_decompose_auto(a)?;
    let clipped: Vec<f64> = d.eigenvalues().iter().map(|&l| l.max(0.0)).collect();
    let p = d.p_matrix();
    let m = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(clipped));
    SymMat::from_dmatrix_symmetrized(&(p.transpose() * m * p))
}

/// `dist(a, S₊) = sqrt(Σ min(λᵢ, 0)²)`.
pub fn dist_psd(a: &SymMat) -> Result<f64> {
    Ok(symmat::eigenvalues(a)?
        .iter()
        .map(|&l| l.min(0.0).powi(2))
        .sum::<f64>()
        .sqrt())
}

fn omega_block(a: &SymMat, d: &OrderedEigenDecomposition) -> Result<SymMat> {
    SymMat::from_dmatrix_symmetrized(&block(a, d, d.omega(), d.omega())?)
}

/// Amount by which `v` violates the tangent cone: `max(0, -λ_min(V^P_ωω))`.
///
/// Zero when `ω` is empty. Infinite when `d` is flagged not-PSD, since the
/// cone is only defined at members of `S₊`.
pub fn tangent_cone_violation(d: &OrderedEigenDecomposition, v: &SymMat) -> Result<f64> {
    if !d.is_psd() {
        return Ok(f64::INFINITY);
    }
    let w = omega_block(v, d)?;
    Ok((-symmat::min_eigenvalue(&w)?).max(0.0))
}

/// Amount by which `ystar` violates the normal cone: the largest of
/// `‖(Y*)^P_ππ‖_F`, `‖(Y*)^P_πω‖_F` and `max(0, λ_max((Y*)^P_ωω))`.
pub fn normal_cone_violation(d: &OrderedEigenDecomposition, ystar: &SymMat) -> Result<f64> {
    if !d.is_psd() {
        return Ok(f64::INFINITY);
    }
    let pp = block(ystar, d, d.pi(), d.pi())?.norm();
    let pw = block(ystar, d, d.pi(), d.omega())?.norm();
    let ww = omega_block(ystar, d)?;
    let top = symmat::max_eigenvalue(&ww)?.max(0.0);
    Ok(pp.max(pw).max(top))
}

/// `V ∈ T(Y)` within `tol`, i.e. `V^P_ωω ⪰ -tol·I`. Always true at interior points.
pub fn tangent_cone_contains(d: &OrderedEigenDecomposition, v: &SymMat, tol: f64) -> Result<bool> {
    Ok(tangent_cone_violation(d, v)? <= tol)
}

/// `Y* ∈ N(Y)` within `tol`. At interior points only `O` qualifies.
pub fn normal_cone_contains(
    d: &OrderedEigenDecomposition,
    ystar: &SymMat,
    tol: f64,
) -> Result<bool> {
    Ok(normal_cone_violation(d, ystar)? <= tol)
}

/// Definition-based tangent cone test.
///
/// Evaluates `dist(Y + tV, S₊) / t` on the grid and declares membership when the
/// quotient is at most `max(tol, ORACLE_SLOPE · t)` at each of the two smallest
/// grid points. A tangent direction makes the quotient decay like `O(t)`; a
/// non-tangent one keeps it near `|λ_min(V^P_ωω)|`. Directions whose violation
/// is below `ORACLE_SLOPE · t_min` (`1e-3` on the default grid) fall in the
/// undecided band and read as tangent.
pub fn tangent_cone_contains_oracle(
    y: &SymMat,
    v: &SymMat,
    t_grid: &[f64],
    tol: f64,
) -> Result<bool> {
    if y.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: y.dim(),
            found: v.dim(),
            context: "tangent oracle",
        });
    }
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidArgument("t_grid must be non-empty and positive".into()));
    }
    let lowest = symmat::min_eigenvalue(y)?;
    if lowest < -tol {
        return Err(Error::NotPsd {
            min_eigenvalue: lowest,
        });
    }
    let mut ts = t_grid.to_vec();
    ts.sort_by(|a, b| a.total_cmp(b));
    for &t in ts.iter().take(2) {
        if dist_psd(&y.axpy(t, v)?)? / t > tol.max(ORACLE_SLOPE * t) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmat::eigen_decompose;

    fn sym(rows: &[&[f64]]) -> SymMat {
        SymMat::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn psd_membership() {
        assert!(is_psd(&SymMat::identity(2), 0.0).unwrap());
        assert!(!is_psd(&SymMat::from_diag(&[1.0, -1.0]), 1e-9).unwrap());
        assert!(is_psd(&sym(&[&[1.0, 1.0], &[1.0, 1.0]]), 1e-9).unwrap());
    }

    #[test]
    fn projection_examples() {
        let p = project_psd(&SymMat::from_diag(&[1.0, -3.0])).unwrap();
        assert!((&p - &SymMat::from_diag(&[1.0, 0.0])).frobenius_norm() < 1e-15);
        let psd = sym(&[&[2.0, 1.0], &[1.0, 2.0]]);
        assert!((&project_psd(&psd).unwrap() - &psd).frobenius_norm() < 1e-9);
        let p = project_psd(&sym(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert!((&p - &sym(&[&[0.5, 0.5], &[0.5, 0.5]])).frobenius_norm() < 1e-14);
    }

    #[test]
    fn distance_examples() {
        assert!((dist_psd(&SymMat::from_diag(&[1.0, -3.0])).unwrap() - 3.0).abs() < 1e-15);
        assert_eq!(dist_psd(&SymMat::identity(3)).unwrap(), 0.0);
        assert!((dist_psd(&sym(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tangent_examples() {
        let d = eigen_decompose(&SymMat::from_diag(&[1.0, 0.0]), 1e-9).unwrap();
        assert!(tangent_cone_contains(&d, &sym(&[&[-5.0, 7.0], &[7.0, 0.0]]), 0.0).unwrap());
        assert!(!tangent_cone_contains(&d, &SymMat::from_diag(&[0.0, -1.0]), 1e-9).unwrap());
        let interior = eigen_decompose_auto(&SymMat::identity(2)).unwrap();
        assert!(tangent_cone_contains(&interior, &SymMat::from_diag(&[-4.0, -9.0]), 0.0).unwrap());
    }

    #[test]
    fn normal_examples() {
        let d = eigen_decompose(&SymMat::from_diag(&[1.0, 0.0]), 1e-9).unwrap();
        assert!(normal_cone_contains(&d, &SymMat::from_diag(&[0.0, -2.0]), 0.0).unwrap());
        assert!(!normal_cone_contains(&d, &sym(&[&[0.0, 1.0], &[1.0, -1.0]]), 1e-9).unwrap());
        let interior = eigen_decompose_auto(&SymMat::identity(2)).unwrap();
        assert!(normal_cone_contains(&interior, &SymMat::zeros(2), 0.0).unwrap());
        assert!(!normal_cone_contains(&interior, &SymMat::from_diag(&[0.0, -1.0]), 1e-9).unwrap());
    }

    #[test]
    fn origin_cones() {
        // Y = O: T = S₊ and N = S₋
        let d = eigen_decompose_auto(&SymMat::zeros(2)).unwrap();
        assert!(tangent_cone_contains(&d, &SymMat::identity(2), 0.0).unwrap());
        assert!(!tangent_cone_contains(&d, &SymMat::from_diag(&[1.0, -1.0]), 1e-9).unwrap());
        assert!(normal_cone_contains(&d, &SymMat::from_diag(&[-1.0, -2.0]), 0.0).unwrap());
    }

    #[test]
    fn not_psd_point_has_no_cones() {
        let d = eigen_decompose(&SymMat::from_diag(&[1.0, -1.0]), 1e-9).unwrap();
        assert!(!tangent_cone_contains(&d, &SymMat::zeros(2), 1e-9).unwrap());
        assert!(!normal_cone_contains(&d, &SymMat::zeros(2), 1e-9).unwrap());
    }

    #[test]
    fn oracle_examples() {
        let y = SymMat::from_diag(&[1.0, 0.0]);
        let grid = default_oracle_t_grid();
        let v = sym(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(tangent_cone_contains_oracle(&y, &v, &grid, 1e-9).unwrap());
        let v = SymMat::from_diag(&[0.0, -1.0]);
        assert!(!tangent_cone_contains_oracle(&y, &v, &grid, 1e-9).unwrap());
        let v = SymMat::from_diag(&[-3.0, -7.0]);
        assert!(tangent_cone_contains_oracle(&SymMat::identity(2), &v, &grid, 1e-9).unwrap());
        assert!(tangent_cone_contains_oracle(&SymMat::from_diag(&[-1.0, 0.0]), &v, &grid, 1e-9).is_err());
    }
}
