// Simultaneous Doeblin check, expected hitting times and the geometric
// tail envelope of the arrival time.
//
// ```text
// cargo run --example doeblin
// ```

use std::error::Error;

use rsmdp::{
    check_doeblin, enumerate_stationary_policies, example22, expected_hitting_time, load_model,
    survival_curve, tail_bound,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let m = example22(0.5)?;
    let report = check_doeblin(&m, 0, 1_000)?;
    println!(
        "z = 0: pass = {}, M = {:.9} (attained from state {:?})",
        report.pass,
        report.bound_m.unwrap_or(f64::INFINITY),
        report.worst_state
    );
    assert!((report.bound_m.unwrap() - 7.0 / 3.0).abs() < 1e-9);

    for f in enumerate_stationary_policies(&m) {
        let times = expected_hitting_time(&m, &f, 0);
        let tail = tail_bound(&m, &f, 0)?;
        let exact = survival_curve(&m, &f, 0, 10);
        println!(
            "policy {}: E[T] = {:?}, β = {:.3}, β0 = {:.3}",
            f.display(&m),
            times.as_slice(),
            tail.beta,
            tail.beta0
        );
        for k in [1, 5, 10] {
            let worst = exact.iter().map(|c| c[k]).fold(0.0, f64::max);
            println!("  max_x P[T ≥ {k:2}] = {worst:.3e} ≤ {:.3e}", tail.envelope(k));
            assert!(worst <= tail.envelope(k) + 1e-12);
        }
    }

    // A second absorbing state breaks the condition.
    let broken = load_model(
        r#"{"states":["0","1","2"],"actions":["stay"],
        "admissible":{"0":["stay"],"1":["stay"],"2":["stay"]},
        "cost":{"0":{"stay":0},"1":{"stay":1},"2":{"stay":0}},
        "transitions":{"0":{"stay":{"0":1}},"1":{"stay":{"0":0.5,"2":0.5}},"2":{"stay":{"2":1}}}}"#,
    )?;
    let failed = check_doeblin(&broken, 0, 1_000)?;
    println!(
        "second absorbing state: pass = {}, witness state {}",
        failed.pass,
        broken.state_name(failed.worst_state.unwrap())
    );
    assert!(!failed.pass);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
