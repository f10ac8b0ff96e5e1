//! The operator Poisson semigroup `exp(-λt(I - U))`: closed form against the
//! truncated series, the semigroup law, and a projection-valued jump path.

use opstat::poisson::{poisson_semigroup, poisson_series, projection_poisson_path, sigma_additivity_test, PoissonConfig};
use opstat::random::{self, stream};
use opstat::spectral::BorelArc;

fn main() -> opstat::Result<()> {
    let (rate, t) = (2.0, 1.0);
    let u = random::haar_unitary(4, &mut stream(0, 0));

    let closed = poisson_semigroup(&u, rate, t)?;
    let series = poisson_series(&u, rate, t, 40);
    println!("series vs closed form  {:.3e}", series.max_abs_diff(&closed));

    let half = poisson_semigroup(&u, rate, t / 2.0)?;
    println!("P(t/2)^2 vs P(t)       {:.3e}", (&half * &half).max_abs_diff(&closed));
    println!("operator norm          {:.6}", closed.spectral_norm());

    let arcs = BorelArc::equal_partition(8);
    let cfg = PoissonConfig::new(rate, t, 42)?;
    for (time, p) in projection_poisson_path(&u, &arcs, &cfg)? {
        println!("jump at {time:.4}  projector rank {}", p.rank());
    }

    let report = sigma_additivity_test(&u, &arcs, 200, &cfg)?;
    println!(
        "sigma-additivity: {} trials, max defect {:.2e}, pass fraction {}",
        report.trials, report.max_defect, report.pass_fraction
    );
    Ok(())
}
