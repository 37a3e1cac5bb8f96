//! Tangent and normal cones of the PSD cone at a boundary point, checked
//! against their definitions.
//!
//! ```text
//! cargo run --example cone_geometry
//! ```

use psd_sosc::cone::{
    default_oracle_t_grid, dist_psd, normal_cone_contains, project_psd, tangent_cone_contains,
    tangent_cone_contains_oracle,
};
use psd_sosc::symmat::eigen_decompose_auto;
use psd_sosc::SymMat;

fn main() -> psd_sosc::Result<()> {
    let y = SymMat::from_diag(&[1.0, 0.0]);
    let d = eigen_decompose_auto(&y)?;
    let tol = 1e-9;

    let directions = [
        ("offdiagonal", SymMat::from_lower(2, vec![0.0, 1.0, 0.0])?),
        ("shrink zero block", SymMat::from_diag(&[0.0, -1.0])),
        ("grow zero block", SymMat::from_diag(&[-5.0, 2.0])),
    ];
    println!("Y = diag(1, 0)");
    for (name, v) in &directions {
        let formula = tangent_cone_contains(&d, v, tol)?;
        let oracle = tangent_cone_contains_oracle(&y, v, &default_oracle_t_grid(), tol)?;
        println!("  V = {name:<18} tangent: formula {formula:<5} definition {oracle}");
    }

    let multipliers = [
        ("diag(0, -2)", SymMat::from_diag(&[0.0, -2.0])),
        ("diag(0, 1)", SymMat::from_diag(&[0.0, 1.0])),
        ("offdiagonal", SymMat::from_lower(2, vec![0.0, 1.0, -1.0])?),
    ];
    for (name, ys) in &multipliers {
        let formula = normal_cone_contains(&d, ys, tol)?;
        // Y* ∈ N(Y) exactly when Y is the projection of Y + Y*
        let moreau = (&project_psd(&(&y + ys))? - &y).frobenius_norm() <= tol;
        println!("  Y* = {name:<17} normal:  formula {formula:<5} projection {moreau}");
    }

    let a = SymMat::from_lower(2, vec![0.0, 1.0, 0.0])?;
    println!("dist([[0,1],[1,0]], S+) = {}", dist_psd(&a)?);
    println!("projection = {:?}", project_psd(&a)?.to_rows());
    Ok(())
}
