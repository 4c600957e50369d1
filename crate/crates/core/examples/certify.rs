// Upper bounds of J* with certificates: g_α = αJ* + (1−α)‖C‖ is certified
// for every α ∈ (0, 1), while J* itself admits no witness.
//
// ```text
// cargo run --example certify
// ```

use std::error::Error;

use rsmdp::{
    check_membership, deviation_function, example22, optimal_average, verify_theorem35,
    CertificateStatus, RiskCoefficient, SolverSettings, DEFAULT_ALPHAS,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let m = example22(0.5)?;
    let lambda = RiskCoefficient::new(1.0)?;
    let settings = SolverSettings::default();
    let report = verify_theorem35(&m, lambda, 0, &DEFAULT_ALPHAS, &settings)?;
    println!("J* = {:?}, ‖C‖ = {}", report.jstar.as_slice(), report.cnorm);
    for r in &report.results {
        println!(
            "α = {:<6} g_α = {:?}  gap {:.4}  witness h = {:?}  policy {}",
            r.alpha,
            r.g_alpha.as_slice(),
            r.gap,
            r.certificate.h.as_slice(),
            r.extracted.policy.display(&m)
        );
    }
    assert!(report.all_pass());

    let dev = deviation_function(&m, lambda, 0.5, &report.jstar, 0, &settings)?;
    println!("deviation function at α = 0.5: {:?}", dev.h.as_slice());
    assert!(dev.post_checks_pass());

    let jstar = optimal_average(&m, lambda, &settings)?.jstar;
    let probe = check_membership(
        &m,
        lambda,
        &jstar,
        0,
        &SolverSettings {
            max_iter: 5_000,
            ..settings
        },
    )?;
    println!("membership probe for J* itself: {:?}", probe.status);
    assert_eq!(probe.status, CertificateStatus::Inconclusive);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
