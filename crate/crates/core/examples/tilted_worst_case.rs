// Worst case of a fixed code over a divergence ball, via the tilted family.

use robust_coding::tilted::{
    avg_redundancy, decomposition_terms, divergence_at_beta, nu_infinity, sup_avg_redundancy,
    tight_beta,
};
use robust_coding::{Arity, CodeLengths, Distribution, DivergenceBall};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mu = Distribution::new(vec![0.6, 0.3, 0.1])?;
    let code = CodeLengths::integer(vec![1, 2, 2], Arity::BINARY)?;
    println!("redundancy at mu: {:.6}", avg_redundancy(&code, &mu)?);

    println!("beta      D(nu° || mu)");
    for beta in [0.1, 0.5, 1.0, 2.0, 10.0, 100.0] {
        println!("{beta:<9} {:.6}", divergence_at_beta(&mu, &code, beta)?);
    }
    let limit = nu_infinity(&mu, &code)?;
    println!("limit divergence  {:.6} (= -ln 0.9)", limit.divergence_from_center);

    for radius in [0.02, 0.05, 0.2] {
        let ball = DivergenceBall::new(mu.clone(), radius)?;
        let sup = sup_avg_redundancy(&code, &ball, 1e-12)?;
        let beta = sup.beta.map_or("none".to_string(), |b| format!("{b:.4}"));
        println!("R = {radius:<5} sup = {:.6}  beta = {beta}  worst = {:.4?}", sup.value, sup.maximizer.probs());
    }

    // the three-term split holds for any nu and beta
    let nu = Distribution::new(vec![0.5, 0.2, 0.3])?;
    let tp = tight_beta(&mu, &code, 0.05, 1e-12)?.expect("0.05 is below the limit divergence");
    let t = decomposition_terms(&code, &nu, &mu, tp.beta)?;
    println!(
        "split at beta {:.4}: {:.6} + {:.6} + {:.6} = {:.6} bits (direct {:.6})",
        tp.beta,
        t.divergence_term,
        t.tilt_gap_term,
        t.log_partition_term,
        t.sum_nats() / Arity::BINARY.ln(),
        avg_redundancy(&code, &nu)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
