//! Runs an experiment through the same path as the CLI and prints the
//! manifest it writes.

use opstat::experiment::{run, Experiment, ExperimentConfig};

fn main() -> opstat::Result<()> {
    let dir = std::env::temp_dir().join("opstat-example");
    let config = ExperimentConfig::new(Experiment::Poisson, 7, dir.clone())
        .with("trials", 50)
        .with("rate", 3.0);
    let manifest = run(&config)?;
    println!("{}", std::fs::read_to_string(dir.join("manifest.json")).unwrap());
    println!("outputs: {:?}", manifest.outputs);
    Ok(())
}
