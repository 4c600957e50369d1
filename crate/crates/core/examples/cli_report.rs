// Drive the command-line front end in-process: write the fixture, solve
// it and read back the JSON report.
//
// ```text
// cargo run --example cli_report
// ```

use std::error::Error;

use clap::Parser;
use rsmdp::cli::{execute, Cli};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = std::env::temp_dir().join(format!("rsmdp-cli-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let model = dir.join("fixture.json");
    let model_arg = model.to_str().ok_or("non-UTF-8 temp path")?;

    let write = Cli::try_parse_from(["rsmdp", "example22", "--rho", "0.5", "--out", model_arg])?;
    let (_, written) = execute(&write).map_err(|(_, f)| f.message)?;
    println!("sidecar: {}", written["sidecar"]);

    let solve = Cli::try_parse_from(["rsmdp", "solve", "--model", model_arg, "--lambda", "1"])?;
    let (_, report) = execute(&solve).map_err(|(_, f)| f.message)?;
    println!("jstar = {}", report["jstar"]);
    println!("regime = {}", report["provenance"]["fixture"]["regime"]);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
