//! Leaf-given-root error on random binary chains, for a few sample sizes.

use qbn::oracle::{chain_experiment, ExperimentConfig};

fn main() -> qbn::Result<()> {
    let config = ExperimentConfig {
        lengths: vec![2, 3, 4, 5, 6, 8],
        sizes: vec![30, 100, 1_000, 10_000],
        seeds: (0..30).collect(),
    };
    let report = chain_experiment(&config)?;
    print!("{:>6}", "len");
    for n in &config.sizes {
        print!("{n:>10}");
    }
    println!();
    for &len in &config.lengths {
        print!("{len:>6}");
        for &n in &config.sizes {
            print!("{:>10.5}", report.aggregate(len, n).unwrap().median_abs_err);
        }
        println!();
    }
    Ok(())
}
