//! Closed-form second subderivative of the PSD indicator next to its
//! constructive oracle: the recovery sequence and sampled difference quotients.
//!
//! ```text
//! cargo run --example second_subderivative
//! ```

use psd_sosc::subderivative::{
    recovery_limit, recovery_sequence, sample_difference_quotients, second_subderivative, SamplingOptions,
};
use psd_sosc::symmat::{eigen_decompose_auto, min_eigenvalue};
use psd_sosc::SymMat;

fn main() -> psd_sosc::Result<()> {
    let y = SymMat::from_diag(&[1.0, 0.0]);
    let ystar = SymMat::from_diag(&[0.0, -1.0]);
    let v = SymMat::from_lower(2, vec![0.0, 1.0, 0.0])?;
    let d = eigen_decompose_auto(&y)?;

    let closed = second_subderivative(&d, &ystar, &v, 1e-9)?;
    println!("closed form -2<Y*, V Y† V> = {closed}");

    println!("{:>8}  {:>22}  {:>10}", "t", "-2<Y*, V_t>/t", "λmin(Y+tV_t)");
    for t in [1e-1, 1e-2, 1e-3, 1e-4] {
        let vt = recovery_sequence(&d, &v, t)?;
        let q = -2.0 * psd_sosc::symmat::frobenius_inner(&ystar, &vt)? / t;
        println!("{t:>8.0e}  {q:>22.12}  {:>10.1e}", min_eigenvalue(&y.axpy(t, &vt)?)?);
    }
    let opts = SamplingOptions::default();
    println!("recovery limit          {:.12}", recovery_limit(&d, &ystar, &v, &opts.t_grid)?);

    let trace = sample_difference_quotients(&y, &ystar, &v, &opts)?;
    println!(
        "sampling oracle         {:.12} ({} samples, {} convergent families)",
        trace.estimate,
        trace.samples.len(),
        trace.family_limits.len()
    );

    // V leaves the cone along the zero block: +∞
    let outward = SymMat::from_diag(&[0.0, -1.0]);
    println!("V = diag(0,-1): {}", second_subderivative(&d, &ystar, &outward, 1e-9)?);
    Ok(())
}
