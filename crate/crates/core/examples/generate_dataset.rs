//! Write a seeded strong-signal regression dataset as CSV.
//!
//! ```text
//! cargo run --example generate_dataset -- data.csv [n] [seed]
//! ```
//!
//! Four standard normal covariates `x1..x4`; the response depends on
//! `x1` and `x3` only: `y = 1 + 2·x1 − 1.5·x3 + N(0, 1)`.

use std::fs::File;
use std::io::BufWriter;

use intrinsic_select::cli::write_dataset_csv;
use intrinsic_select::evaluation::{Design, Scenario};
use intrinsic_select::linear::ModelSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scenario() -> Scenario {
    Scenario {
        design: Design::Gaussian { covariates: 4 },
        true_model: ModelSpec::new(vec![0, 1, 3]).expect("sorted indices"),
        true_coeffs: vec![1.0, 2.0, -1.5],
        sigma: 1.0,
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args.next().ok_or("usage: generate_dataset <out.csv> [n] [seed]")?;
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(120);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0x5EED);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ds = scenario().sample(n, &mut rng)?;
    write_dataset_csv(&ds, "y", BufWriter::new(File::create(&path)?))?;
    eprintln!("wrote {n} rows to {path} (true model: intercept, x1, x3)");
    Ok(())
}
