//! Producing the versioned JSON report programmatically, as the command-line
//! tool does, and reading it back.
//!
//! ```text
//! cargo run --example json_report
//! ```

use psd_sosc::nlsdp::fixtures::{origin, p1};
use psd_sosc::report::{CommandKind, PointSummary, Report};
use psd_sosc::sosc::{check_sosc, PointContext, SoscOptions};

fn main() -> psd_sosc::Result<()> {
    let (p, x) = (p1(), origin(2));
    let opts = SoscOptions::default();
    let ctx = PointContext::new(&p, &x, opts.tol, opts.rank_tol)?;
    let mut report = Report::new(CommandKind::CheckSosc, opts.seed);
    report.point = Some(PointSummary::new(&p, &x, &ctx)?);
    report.sosc = Some(check_sosc(&p, &x, &opts)?);

    print!("{}", report.to_text());
    let json = report.to_json()?;
    println!("{json}");
    assert_eq!(Report::from_json(&json)?, report);
    Ok(())
}
