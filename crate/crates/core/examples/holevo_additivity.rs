//! Holevo capacities of two channels and of their tensor product.
//!
//! Also prints the minimum output entropy of each channel, which the same
//! optimizer machinery computes over pure inputs.

use opstat::channel::{
    additivity_experiment, min_output_entropy, random_channel, OptimizerConfig, QuantumChannel,
};

fn main() -> opstat::Result<()> {
    let opt = OptimizerConfig::default();
    let pairs = [
        ("depolarizing x depolarizing", QuantumChannel::depolarizing(0.5)?, QuantumChannel::depolarizing(0.5)?),
        ("identity x amplitude damping", QuantumChannel::identity(2), QuantumChannel::amplitude_damping(0.3)?),
        ("random x random", random_channel(2, 2, 1)?, random_channel(2, 2, 2)?),
    ];
    for (name, a, b) in &pairs {
        let r = additivity_experiment(a, b, &opt)?;
        println!(
            "{name:30} chi1 {:.6}  chi2 {:.6}  joint {:.6}  defect {:+.2e}  {}",
            r.chi_1,
            r.chi_2,
            r.chi_joint,
            r.defect,
            r.verdict.as_str()
        );
        let m = min_output_entropy(a, &opt)?;
        println!("{:30} min output entropy of the first channel {:.6}", "", m.value);
    }
    Ok(())
}
