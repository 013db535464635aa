// Entropy, relative entropy and the divergence ball.

use robust_coding::primitives::{binary_divergence, entropy, kl_divergence, pinsker_upper};
use robust_coding::{Arity, Distribution, DivergenceBall};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mu = Distribution::new(vec![0.4, 0.3, 0.2, 0.1])?;
    println!("H_2(mu)          = {:.6} bits", entropy(&mu, Arity::BINARY));
    println!("H_3(mu)          = {:.6} trits", entropy(&mu, Arity::TERNARY));

    let nu = Distribution::new(vec![0.25; 4])?;
    let d = kl_divergence(&nu, &mu)?;
    println!("D(uniform || mu) = {d:.6} nats");

    let ball = DivergenceBall::new(mu, 0.05)?;
    println!("uniform in the 0.05 ball: {}", ball.contains(&nu, 0.0));

    // the larger root of d(p || m) = R sits between m and m + sqrt(R / 2)
    let (m, r) = (0.5, 0.05);
    println!("d(0.658 || 0.5)  = {:.6}", binary_divergence(0.658, m)?);
    println!("root range       = ({m}, {:.6}]", pinsker_upper(m, r));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
