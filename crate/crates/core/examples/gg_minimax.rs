// Minimax of redundancy minus divergence. Past `-ln min mu` the minimax
// pointwise code is optimal outright.

use robust_coding::solver::{gg_threshold, solve_gg, SolveOptions};
use robust_coding::{Arity, Distribution, DivergenceBall};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mu = Distribution::new(vec![0.6, 0.3, 0.1])?;
    println!("shortcut from R = {:.6}", gg_threshold(&mu));
    for radius in [0.0, 0.05, 0.5, 1.5, 2.5] {
        let ball = DivergenceBall::new(mu.clone(), radius)?;
        let r = solve_gg(&ball, Arity::BINARY, SolveOptions::default())?;
        println!(
            "R = {radius:<5} {:<12} lengths {:?}  utility {:.6}",
            r.regime.as_str(),
            r.lengths.as_integers().unwrap(),
            r.achieved_utility
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
