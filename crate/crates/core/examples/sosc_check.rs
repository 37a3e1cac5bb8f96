//! Sampled verification of the second-order sufficient condition at the
//! fixture points, with the full report.
//!
//! ```text
//! cargo run --example sosc_check [-- path/to/problem.json]
//! ```

use psd_sosc::report::load_problem;
use psd_sosc::sosc::{check_sosc, SoscOptions};

fn main() -> psd_sosc::Result<()> {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let paths: Vec<std::path::PathBuf> = match std::env::args().nth(1) {
        Some(p) => vec![p.into()],
        None => ["p1.json", "p1_negated.json", "trivial_cone.json", "disk.json"]
            .iter()
            .map(|f| root.join(f))
            .collect(),
    };
    for path in paths {
        let (p, xbar) = load_problem(&path)?;
        let r = check_sosc(&p, &xbar, &SoscOptions::default())?;
        println!("{}", path.file_name().unwrap().to_string_lossy());
        println!("  verdict            {}", r.verdict);
        println!("  directions checked {}", r.directions_checked);
        if let Some(m) = r.min_margin {
            println!("  min margin         {m:.9}");
        }
        if let Some(w) = &r.worst_direction {
            println!("  worst direction    {w:?}");
        }
        for line in &r.diagnostics {
            println!("  | {line}");
        }
    }
    Ok(())
}
