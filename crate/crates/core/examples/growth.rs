//! Empirical quadratic growth around a candidate point:
//! `max(f(x) − f(x̄), dist(F(x), S₊)) ≥ β‖x − x̄‖²` on a ball.
//!
//! ```text
//! cargo run --example growth
//! ```

use psd_sosc::nlsdp::fixtures::{origin, p1, p1_negated};
use psd_sosc::sosc::verify_growth;

fn main() -> psd_sosc::Result<()> {
    for (name, p) in [("min x2", p1()), ("min -x2", p1_negated())] {
        let g = verify_growth(&p, &origin(2), 0.1, 0.25, 10_000, 0)?;
        println!("{name}: eps = {}, beta = {}", g.epsilon, g.beta);
        println!("  samples {}  violations {}", g.samples, g.violations);
        println!("  largest supported beta {:.6} (attained at {:?})", g.min_ratio, g.min_ratio_point);
        println!(
            "  feasible only: {} samples, {} violations, min ratio {:?}",
            g.feasible_samples, g.feasible_violations, g.feasible_min_ratio
        );
    }
    Ok(())
}
