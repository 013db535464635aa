// The merge-loop family: Huffman, exponential Huffman, max-combining Huffman
// and the large-beta limit code, plus canonical codewords.

use robust_coding::huffman::{
    canonical_codewords, exp_cost_log, exponential_huffman, huffman, limit_huffman, linear_cost,
    max_huffman, pointwise_cost,
};
use robust_coding::Arity;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let w = [0.4, 0.3, 0.2, 0.1];

    let plain = huffman(&w, Arity::BINARY)?;
    println!("huffman          {:?}  E[l] = {}", plain.values(), linear_cost(&w, &plain));

    for beta in [0.5, 1.0, 5.0] {
        let c = exponential_huffman(&w, beta, Arity::BINARY)?;
        println!("exp huffman b={beta:<4}{:?}  ln cost = {:.6}", c.values(), exp_cost_log(&w, &c, beta));
    }

    let mx = max_huffman(&w, Arity::BINARY)?;
    println!("max huffman      {:?}  pointwise = log2 1.6 = {:.6}", mx.values(), pointwise_cost(&w, &mx));
    let lim = limit_huffman(&w, Arity::BINARY)?;
    println!("limit code       {:?}", lim.values());

    let ternary = huffman(&[0.3, 0.3, 0.2, 0.1, 0.1], Arity::TERNARY)?;
    let code = canonical_codewords(&ternary)?;
    println!("ternary words    {:?}", code.codewords());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
