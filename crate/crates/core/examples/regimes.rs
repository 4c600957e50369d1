// The three-state fixture across its three λ regimes: computed J* against
// the closed forms, and what happens to the optimality equation.
//
// ```text
// cargo run --example regimes
// ```

use std::error::Error;
use std::f64::consts::LN_2;

use rsmdp::{
    closed_form, example22, optimal_average, solve_optimality_equation, OptimalityOutcome,
    RiskCoefficient, SolverSettings,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let rho = 0.5;
    let m = example22(rho)?;
    let settings = SolverSettings::default();
    for lambda in [1.0, LN_2, 0.5] {
        let l = RiskCoefficient::new(lambda)?;
        let expected = closed_form(rho, lambda)?;
        let sol = optimal_average(&m, l, &settings)?;
        println!("λ = {lambda:.6} ({})", expected.regime.label());
        for x in 0..3 {
            println!(
                "  J*({x}) = {:.9}  closed form {:.9}",
                sol.jstar[x], expected.jstar[x]
            );
            assert!((sol.jstar[x] - expected.jstar[x]).abs() < 1e-9);
        }
        match solve_optimality_equation(&m, l, 0, &settings)? {
            OptimalityOutcome::Solved { gamma, h, residual, .. } => println!(
                "  optimality equation solved: γ = {gamma:.3e}, h = {:?}, residual {residual:.1e}",
                h.as_slice()
            ),
            OptimalityOutcome::NotFound { reason, .. } => {
                println!("  optimality equation: no solution found ({reason:?})")
            }
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
