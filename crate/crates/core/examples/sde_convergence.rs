//! Euler-Maruyama for `dX = -aX dt + sqrt(ω) X dB` against the exact
//! solution driven by the same Brownian increments.

use opstat::sde::{convergence_study, euler_maruyama, gbm_exact, terminal_moments, SDEConfig};

fn main() -> opstat::Result<()> {
    let cfg = SDEConfig {
        x0: 1.0,
        drift_coeff: 1.5,
        omega: 0.5,
        t_end: 1.0,
        n_steps: 256,
        seed: 0,
    };

    let em = euler_maruyama(&cfg)?;
    let exact = gbm_exact(&cfg, &em.brownian_increments)?;
    println!("terminal  EM {:.6}  exact {:.6}", em.terminal(), exact.terminal());

    let table = convergence_study(&cfg, &[32, 64, 128, 256, 512], 1000)?;
    println!("{:>10} {:>12} {:>12}", "dt", "strong", "weak");
    for row in &table.rows {
        println!("{:>10.5} {:>12.4e} {:>12.4e}", row.dt, row.strong_err, row.weak_err);
    }
    println!("strong order {:.3}, weak order {:.3}", table.strong_order, table.weak_order);

    let m = terminal_moments(&cfg, 5000)?;
    let want = (-cfg.drift_coeff * cfg.t_end).exp();
    println!("E[X_T] {:.5} ± {:.5}  (exact {want:.5})", m.mean, m.mean_stderr);
    Ok(())
}
