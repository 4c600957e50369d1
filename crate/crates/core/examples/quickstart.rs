// Load a model from JSON, check the Doeblin condition and compute the
// optimal risk-sensitive average cost.
//
// ```text
// cargo run --example quickstart
// ```

use std::error::Error;

use rsmdp::{find_doeblin_state, load_model, optimal_average, RiskCoefficient, SolverSettings};

const MODEL: &str = r#"{
    "name": "machine replacement",
    "states": ["new", "worn", "broken"],
    "actions": ["run", "repair"],
    "admissible": {"new": ["run"], "worn": ["run", "repair"], "broken": ["repair"]},
    "cost": {
        "new": {"run": 0.0},
        "worn": {"run": 0.5, "repair": 2.0},
        "broken": {"repair": 4.0}
    },
    "transitions": {
        "new": {"run": {"new": 0.7, "worn": 0.3}},
        "worn": {"run": {"worn": 0.6, "broken": 0.4}, "repair": {"new": 1.0}},
        "broken": {"repair": {"new": 1.0}}
    }
}"#;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let m = load_model(MODEL)?;
    let settings = SolverSettings::default();
    let doeblin = find_doeblin_state(&m, settings.policy_cap)?.ok_or("no Doeblin state")?;
    println!(
        "Doeblin state {} with max expected hitting time {:.4}",
        m.state_name(doeblin.z),
        doeblin.bound_m.unwrap_or(f64::INFINITY)
    );

    for lambda in [0.1, 1.0, 3.0] {
        let sol = optimal_average(&m, RiskCoefficient::new(lambda)?, &settings)?;
        println!("λ = {lambda}:");
        for x in 0..m.n_states() {
            println!(
                "  J*({}) = {:.6}   policy {}",
                m.state_name(x),
                sol.jstar[x],
                sol.per_state_policy[x].display(&m)
            );
        }
        // a unichain model has a constant optimal value
        assert!(sol.jstar.max() - sol.jstar.min() < 1e-9);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
