//! Directional multipliers `(α, Y*)` for individual critical directions, and
//! the resulting second-order margin.
//!
//! ```text
//! cargo run --example multiplier_search
//! ```

use psd_sosc::nlsdp::fixtures::{origin, p1, p1_negated};
use psd_sosc::sosc::{critical_cone_contains, find_multiplier, sosc_margin, SearchOptions, DEFAULT_TOL};

fn main() -> psd_sosc::Result<()> {
    let x = origin(2);
    let opts = SearchOptions::default();
    for (name, p) in [("min x2", p1()), ("min -x2", p1_negated())] {
        println!("{name}:");
        for u in [[1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] {
            if !critical_cone_contains(&p, &x, &u, DEFAULT_TOL)? {
                println!("  u = {u:?}: not critical");
                continue;
            }
            match find_multiplier(&p, &x, &u, &opts)? {
                Some(c) => println!(
                    "  u = {u:?}: alpha = {:.3}, Y* = {:?}, margin = {:.6}",
                    c.alpha,
                    c.ystar.to_rows(),
                    sosc_margin(&p, &x, &u, &c, 1e-7)?
                ),
                None => println!("  u = {u:?}: no nontrivial multiplier"),
            }
        }
    }
    Ok(())
}
