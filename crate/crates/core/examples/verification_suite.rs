//! Runs the whole verification suite and prints one line per check.
//!
//! `cargo run --release --example verification_suite [q]`

use tree_heat::verify::{run_suite, VerifyConfig};

fn main() -> tree_heat::Result<()> {
    let q = std::env::args().nth(1).map(|s| s.parse().expect("q must be an integer"));
    let config = VerifyConfig { q, ..VerifyConfig::default() };
    let reports = run_suite(&config)?;
    for r in &reports {
        let status = if r.passed { "pass" } else { "FAIL" };
        println!(
            "{status}  {:<26} {:>8} ms  measured={}  threshold={}",
            r.check_id,
            r.runtime_ms,
            serde_json::to_string(&r.measured).expect("serialisable"),
            r.threshold
        );
        for d in r.details.iter().filter(|d| !d.passed) {
            println!("        {}: {}", d.label, serde_json::to_string(&d.measured).expect("serialisable"));
        }
        if let Some(e) = &r.error {
            println!("        error: {e}");
        }
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("{} of {} checks passed", reports.len() - failed, reports.len());
    Ok(())
}
