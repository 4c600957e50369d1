// Seeded Monte Carlo cross-checks of the analytic quantities.
//
// ```text
// cargo run --release --example monte_carlo
// ```

use std::error::Error;

use rsmdp::{
    example22, finite_horizon_cost, mc_certain_equivalent, mc_hitting_tail, survival_curve,
    MarkovPolicy, RiskCoefficient, StationaryPolicy,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let m = example22(0.5)?;
    let f = StationaryPolicy::from_names(&m, &[("1", "0")])?;
    let seed = 2024;
    for lambda in [0.5, 1.0, 2.0] {
        let l = RiskCoefficient::new(lambda)?;
        let n = 4;
        let exact = finite_horizon_cost(&m, &MarkovPolicy::stationary(&m, &f, n)?, l, n)?[2];
        let est = mc_certain_equivalent(&m, &f, l, 2, n, 20_000, seed)?;
        println!(
            "λ = {lambda}: exact {exact:.5}, estimate {:.5} ± {:.5}{}",
            est.estimate,
            est.stderr,
            if est.heavy_tail { " (heavy tail)" } else { "" }
        );
    }

    let empirical = mc_hitting_tail(&m, &f, 0, 6, 20_000, seed)?;
    let exact = survival_curve(&m, &f, 0, 6);
    for k in 0..=6 {
        println!(
            "P_2[T ≥ {k}]: empirical {:.4}, exact {:.4}",
            empirical[2][k], exact[2][k]
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
