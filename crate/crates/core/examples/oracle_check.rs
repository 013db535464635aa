// Checking the solvers against brute force on a small instance.

use robust_coding::oracle::{
    ball_sample, brute_binary_root, brute_min_over_codes, default_lmax, enumerate_kraft_lengths,
    Objective,
};
use robust_coding::nml::solve_pi_k;
use robust_coding::solver::{solve_avg_redundancy, SolveOptions};
use robust_coding::{Arity, Distribution, DivergenceBall};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let codes: Vec<Vec<u32>> = enumerate_kraft_lengths(3, Arity::BINARY, 3)?.collect();
    println!("sorted binary codes for 3 symbols: {codes:?}");

    let w = [0.4, 0.3, 0.2, 0.1];
    let lin = brute_min_over_codes(Objective::LinearCost(&w), Arity::BINARY, 4)?;
    println!("min E[l] = {} at {:?}", lin.optimum_value, lin.optimal_length_vectors);

    let mu = Distribution::new(vec![0.6, 0.3, 0.1])?;
    let ball = DivergenceBall::new(mu, 0.05)?;
    let samples = ball_sample(&ball, Arity::BINARY, 5000, 2000, 7)?;
    let brute = brute_min_over_codes(
        Objective::AvgRedundancy { ball: &ball, samples: &samples },
        Arity::BINARY,
        default_lmax(3, Arity::BINARY),
    )?;
    let solved = solve_avg_redundancy(&ball, Arity::BINARY, SolveOptions::default())?;
    println!(
        "nested minimax: oracle {:.6} over {} samples, solver {:.6}",
        brute.optimum_value,
        samples.len(),
        solved.achieved_utility
    );

    println!(
        "binary root: bisection {:.15}, newton {:.15}",
        brute_binary_root(0.25, 0.02)?,
        solve_pi_k(0.25, 0.02, 1e-12)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
