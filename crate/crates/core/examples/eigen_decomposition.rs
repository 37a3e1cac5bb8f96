//! Ordered eigenvalue decomposition `Y = PᵀMP`, rank split and pseudoinverse.
//!
//! ```text
//! cargo run --example eigen_decomposition
//! ```

use psd_sosc::symmat::{eigen_decompose_auto, pseudoinverse};
use psd_sosc::SymMat;

fn main() -> psd_sosc::Result<()> {
    // rank 2: eigenvalues 3, 1, 0
    let y = SymMat::from_rows(&[
        vec![2.0, 1.0, 0.0],
        vec![1.0, 2.0, 0.0],
        vec![0.0, 0.0, 0.0],
    ])?;
    let d = eigen_decompose_auto(&y)?;
    println!("eigenvalues      {:?}", d.eigenvalues());
    println!("pi (positive)    {:?}", d.pi());
    println!("omega (zero)     {:?}", d.omega());
    println!("rank tolerance   {:e}", d.rank_tol());
    println!("rows of P (eigenvectors):");
    for row in d.p_matrix().row_iter() {
        println!("  {:?}", row.iter().map(|x| format!("{x:+.4}")).collect::<Vec<_>>());
    }
    println!("|PᵀMP - Y|_F     {:.1e}", d.reconstruction_error());
    println!("|PPᵀ - I|_F      {:.1e}", d.orthogonality_error());

    let dag = pseudoinverse(&d)?;
    println!("Y† = {:?}", dag.to_rows());
    Ok(())
}
