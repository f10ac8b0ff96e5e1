//! Encode a disk as Poisson hits, tessellate, decode, and walk the cell
//! graph between two far-apart cells.

use opstat::codec::{
    decode, encode, fidelity, geodesic_walk, run_codec, stopping_check, tessellate, GeometricObject, RunConfig,
    StoppingConfig,
};

fn main() -> opstat::Result<()> {
    let disk = GeometricObject::disk(0.5, 0.5, 0.25)?;

    for intensity in [250.0, 500.0, 1000.0, 2000.0] {
        let hits = encode(&disk, intensity, 0)?;
        let tess = tessellate(&hits)?;
        let recon = decode(&tess, &hits);
        println!(
            "intensity {intensity:>6}: {:>5} hits, IoU {:.4}",
            hits.len(),
            fidelity(&disk, &recon, 1000)?
        );
    }

    let hits = encode(&disk, 500.0, 3)?;
    let tess = tessellate(&hits)?;
    let start = tess.locate([0.02, 0.02]);
    let goal = tess.locate([0.98, 0.98]);
    let walk = geodesic_walk(&tess, start, goal, 0, 0.0)?;
    println!("greedy walk {start} -> {goal}: {} steps", walk.steps());

    let run = run_codec(&disk, &RunConfig::default())?;
    for r in &run.rounds {
        println!(
            "round {}: {} hits, IoU {:.4}, boundary band {:.3}",
            r.round, r.total_hits, r.iou, r.boundary_band_fraction
        );
    }
    let report = stopping_check(&run, &StoppingConfig::default())?;
    for c in &report.conditions {
        println!("{:14} {}  ({})", c.name, if c.passed { "ok" } else { "not met" }, c.note);
    }
    Ok(())
}
