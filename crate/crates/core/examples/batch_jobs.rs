// Driving the batch front end from code, on the shipped instances.

use std::path::Path;

use robust_coding::cli::{run_code, run_verify, JobSpec, ObjectiveKind, OracleLimits};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let file = data.join("letters6.csv");
    for objective in [ObjectiveKind::AvgRed, ObjectiveKind::Gg, ObjectiveKind::Pointwise] {
        let job = JobSpec::new(&file, objective, 0.1);
        let report = run_code(&job)?;
        println!(
            "{:<10} {:<10} {:?} {:?}  utility {:.6}",
            objective.name(),
            report.regime,
            report.labels.unwrap_or_default(),
            report.codewords,
            report.achieved_utility
        );
    }

    let job = JobSpec::new(data.join("skewed3.json"), ObjectiveKind::Pointwise, 0.05);
    let verdict = run_verify(&job, OracleLimits { samples: 2000, ..Default::default() }, None)?;
    for check in &verdict.checks {
        println!("{} {}", if check.passed { "ok  " } else { "FAIL" }, check.name);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
