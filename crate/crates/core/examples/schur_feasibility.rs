//! Feasibility of `Y + tV′` decided through the Schur complement of the
//! positive eigenvalue block, compared with a direct eigenvalue test.
//!
//! ```text
//! cargo run --example schur_feasibility
//! ```

use psd_sosc::cone::is_psd;
use psd_sosc::random::{gaussian_sym, random_psd, stream};
use psd_sosc::subderivative::{schur_complement, schur_feasibility};
use psd_sosc::symmat::{eigen_decompose_auto, min_eigenvalue};

fn main() -> psd_sosc::Result<()> {
    let mut rng = stream(7, 0);
    let y = random_psd(4, 2, 0.5, 2.0, &mut rng);
    let d = eigen_decompose_auto(&y)?;
    println!("eigenvalues of Y: {:?}", d.eigenvalues());
    let mut agree = 0;
    for k in 0..10 {
        let vp = gaussian_sym(4, &mut rng);
        let t = 0.05 * (k + 1) as f64;
        let schur = schur_feasibility(&d, &vp, t, 0.0)?;
        let direct = is_psd(&y.axpy(t, &vp)?, 0.0)?;
        let s = schur_complement(&d, &vp, t)?;
        println!(
            "t = {t:.2}  λmin(S) = {:+.3e}  λmin(Y+tV′) = {:+.3e}  schur {schur:<5} direct {direct}",
            min_eigenvalue(&s)?,
            min_eigenvalue(&y.axpy(t, &vp)?)?
        );
        agree += usize::from(schur == direct);
    }
    println!("{agree}/10 agree");
    Ok(())
}
