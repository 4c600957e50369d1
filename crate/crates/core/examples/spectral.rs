// Nonnegative-matrix tools: strongly connected components in topological
// order and Perron roots computed in log space.
//
// ```text
// cargo run --example spectral
// ```

use std::error::Error;

use rsmdp::{log_spectral_radius, spectral_radius, strongly_connected_components, NonnegativeMatrix};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let q = NonnegativeMatrix::from_rows(&[
        vec![0.5, 0.5, 0.0, 0.0],
        vec![0.2, 0.3, 0.5, 0.0],
        vec![0.0, 0.0, 0.0, 2.0],
        vec![0.0, 0.0, 2.0, 0.0],
    ])?;
    let sccs = strongly_connected_components(&q);
    println!("components (sources first): {sccs:?}");
    let rho = spectral_radius(&q);
    println!("spectral radius {rho:.12}");
    assert!((rho - 2.0).abs() < 1e-9);

    // Entries far outside the f64 range are fine in log space.
    let huge = NonnegativeMatrix::from_log_entries(vec![0, 1], vec![900.0, 900.0, 900.0, 900.0])?;
    println!("log radius of e^900·J₂ = {:.9}", log_spectral_radius(&huge));
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
