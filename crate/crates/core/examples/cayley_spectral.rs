//! Cayley transform of a random Hermitian matrix, its spectral projectors on
//! eight equal arcs, and the round trip back.
//!
//! cargo run --example cayley_spectral -- [dim] [seed]

use opstat::random::{self, stream};
use opstat::spectral::{
    cayley_transform, eig_unitary, idempotence_defect, inverse_cayley, resolution_of_identity, unitarity_defect,
    BorelArc,
};

fn main() -> opstat::Result<()> {
    let mut args = std::env::args().skip(1);
    let dim: usize = args.next().map_or(4, |s| s.parse().expect("dim"));
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));

    let h = random::hermitian(dim, 2.0, &mut stream(seed, 0));
    let u = cayley_transform(&h)?;
    println!("unitarity defect  {:.3e}", unitarity_defect(u.matrix()));

    let phases = eig_unitary(&u)?.eigenphases();
    println!("eigenphases       {phases:.4?}");

    let arcs = BorelArc::equal_partition(8);
    for (arc, p) in arcs.iter().zip(resolution_of_identity(&u, &arcs)?) {
        if p.rank() > 0 {
            println!(
                "arc [{:.3}, {:.3})  rank {}  idempotence {:.1e}",
                arc.lo(),
                arc.hi(),
                p.rank(),
                idempotence_defect(p.matrix())
            );
        }
    }

    let back = inverse_cayley(&u)?;
    println!("round trip error  {:.3e}", back.matrix().max_abs_diff(h.matrix()));
    Ok(())
}
