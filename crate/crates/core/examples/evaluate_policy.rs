// Certain equivalents of a fixed policy: finite-horizon values, the
// long-run average via Perron roots, and how J_n / n approaches it.
//
// ```text
// cargo run --example evaluate_policy
// ```

use std::error::Error;

use rsmdp::{
    certain_equivalent, example22, finite_horizon_cost, long_run_average, verify_growth,
    FiniteCostDistribution, MarkovPolicy, RiskCoefficient, StationaryPolicy,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // A fair coin paying 0 or 2: risk aversion prices it above its mean.
    let coin = FiniteCostDistribution::new(vec![(0.0, 0.5), (2.0, 0.5)])?;
    for lambda in [0.01, 1.0, 10.0] {
        let ce = certain_equivalent(RiskCoefficient::new(lambda)?, &coin);
        println!("E({lambda}, coin) = {ce:.6} (mean {})", coin.mean());
    }

    let m = example22(0.5)?;
    let lambda = RiskCoefficient::new(1.0)?;
    for pairs in [[("1", "0")], [("1", "1")]] {
        let f = StationaryPolicy::from_names(&m, &pairs)?;
        let avg = long_run_average(&m, &f, lambda);
        let pi = MarkovPolicy::stationary(&m, &f, 3)?;
        let j3 = finite_horizon_cost(&m, &pi, lambda, 3)?;
        println!("policy {}", f.display(&m));
        println!("  J_3 = {:?}", j3.as_slice());
        println!("  J   = {:?}", avg.as_slice());
        for n in [10, 100, 1000] {
            let (rate, limit) = verify_growth(&m, &f, lambda, 2, n)?;
            println!("  J_{n}(2)/{n} = {rate:.6} → {limit:.6}");
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
