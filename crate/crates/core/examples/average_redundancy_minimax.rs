// Minimax average redundancy as the radius grows, through the regime change.

use robust_coding::solver::{existence_threshold, solve_avg_redundancy, SolveOptions};
use robust_coding::{Arity, Distribution, DivergenceBall};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mu = Distribution::new(vec![0.45, 0.3, 0.15, 0.1])?;
    let threshold = existence_threshold(&mu, Arity::BINARY)?;
    println!("R_max = {:.6}, limit code {:?}", threshold.r_max, threshold.limit_code.values());

    println!("{:<8}{:<12}{:<14}{:<12}utility", "R", "regime", "lengths", "beta");
    for radius in [0.0, 0.01, 0.05, 0.1, 0.2, 0.4, 0.8] {
        let ball = DivergenceBall::new(mu.clone(), radius)?;
        let r = solve_avg_redundancy(&ball, Arity::BINARY, SolveOptions::default())?;
        let beta = r.beta.map_or("-".to_string(), |b| format!("{b:.4}"));
        println!(
            "{radius:<8}{:<12}{:<14}{beta:<12}{:.6}",
            r.regime.as_str(),
            format!("{:?}", r.lengths.as_integers().unwrap()),
            r.achieved_utility
        );
    }

    let strict = SolveOptions { strict_boundary: true, ..Default::default() };
    let ball = DivergenceBall::new(mu, 0.8)?;
    match solve_avg_redundancy(&ball, Arity::BINARY, strict) {
        Err(e) => println!("strict mode: {e}"),
        Ok(r) => println!("strict mode: {:?}", r.regime),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
