//! Building a problem `min f(x) s.t. F(x) ⪰ 0`, evaluating exact derivatives
//! and the generalized Lagrangian `αf + ⟨Y*, F⟩`, and reading it from JSON.
//!
//! ```text
//! cargo run --example problem_model
//! ```

use psd_sosc::nlsdp::{fixtures, NlsdpProblem, ProblemInstance, QuadraticMatrixMap, QuadraticScalar};
use psd_sosc::SymMat;

fn main() -> psd_sosc::Result<()> {
    // min x₂  s.t.  [[1, x₁], [x₁, x₂]] ⪰ 0
    let f = QuadraticScalar::linear(vec![0.0, 1.0]);
    let map = QuadraticMatrixMap::affine(
        SymMat::from_diag(&[1.0, 0.0]),
        vec![SymMat::from_lower(2, vec![0.0, 1.0, 0.0])?, SymMat::from_diag(&[0.0, 1.0])],
    )?;
    let p = NlsdpProblem::new(f, map)?;
    assert_eq!(p, fixtures::p1());

    let x = [0.3, 0.5];
    let u = [1.0, -2.0];
    println!("F(x)      = {:?}", p.eval_constraint(&x)?.to_rows());
    println!("F'(x)u    = {:?}", p.constraint_derivative(&x, &u)?.to_rows());

    let ystar = SymMat::from_diag(&[0.0, -1.0]);
    println!("L^1(x, Y*)          = {}", p.lagrangian(1.0, &x, &ystar)?);
    println!("grad_x L^1(0, Y*)   = {:?}", p.lagrangian_grad(1.0, &[0.0, 0.0], &ystar)?);
    println!("L''[u, u]           = {}", p.lagrangian_hess_form(1.0, &x, &ystar, &u)?);

    let inst = ProblemInstance {
        problem: p,
        xbar: Some(vec![0.0, 0.0]),
    };
    let json = inst.to_json_string()?;
    println!("{json}");
    assert_eq!(ProblemInstance::from_json_str(&json)?, inst);
    Ok(())
}
