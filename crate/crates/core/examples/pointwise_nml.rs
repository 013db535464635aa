// NML distributions and the robust pointwise-redundancy codes.

use robust_coding::nml::{
    nml_distribution, nml_tv, pointwise_utility, robust_huffman_pointwise,
    robust_shannon_pointwise, solve_pi_k_with, RootMethod, RootOptions,
};
use robust_coding::{Arity, Distribution, DivergenceBall};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for method in [RootMethod::Newton, RootMethod::Halley] {
        let s = solve_pi_k_with(0.25, 0.02, RootOptions { method, ..Default::default() })?;
        println!("{method:?}: pi = {:.15} after {} steps", s.root, s.steps);
    }

    let mu = Distribution::new(vec![0.5, 0.3, 0.2])?;
    for radius in [0.0, 0.05, 0.5, 0.8] {
        let ball = DivergenceBall::new(mu.clone(), radius)?;
        let nml = nml_distribution(&ball, 1e-12)?;
        let huff = robust_huffman_pointwise(&ball, Arity::BINARY)?;
        let shannon = robust_shannon_pointwise(&ball, Arity::BINARY)?;
        println!(
            "R = {radius:<5} pi = {:.4?} saturated {:?}",
            nml.raw, nml.saturated
        );
        println!(
            "          huffman {:?} ({:.6})  shannon {:?} ({:.6})",
            huff.lengths.as_integers().unwrap(),
            huff.achieved_utility,
            shannon.as_integers().unwrap(),
            pointwise_utility(&shannon, &nml.normalized)?
        );
    }

    let tv = nml_tv(&mu, 0.2)?;
    println!("total variation 0.2: pi = {:.4?}", tv.raw);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
