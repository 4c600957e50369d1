// Structural properties of J* on random models: the min–max equation,
// minimality at the Doeblin state, and the bound by ‖C‖.
//
// ```text
// cargo run --release --example random_models
// ```

use std::error::Error;

use rsmdp::{
    level_sets, max_cost_norm, optimal_average, random_doeblin_model, verify_minmax,
    RandomModelSpec, RiskCoefficient, SolverSettings,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let spec = RandomModelSpec::default();
    let settings = SolverSettings::default();
    let lambda = RiskCoefficient::new(1.5)?;
    let mut multi_level = 0;
    for i in 0..50 {
        let r = random_doeblin_model(&spec, 11, i)?;
        let sol = optimal_average(&r.mdp, lambda, &settings)?;
        let cnorm = max_cost_norm(&r.mdp);
        assert!(verify_minmax(&r.mdp, &sol.jstar)?.holds);
        assert!((sol.jstar[r.z] - sol.jstar.min()).abs() < 1e-9);
        assert!(sol.jstar.iter().all(|&j| j.abs() <= cnorm + 1e-12));
        let levels = level_sets(&sol.jstar);
        if levels.sets.len() > 1 {
            multi_level += 1;
            if multi_level <= 3 {
                println!("model {i}: levels {:?} at {:?}", levels.gammas, levels.sets);
            }
        }
    }
    println!("{multi_level} of 50 models have a non-constant J*");
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
