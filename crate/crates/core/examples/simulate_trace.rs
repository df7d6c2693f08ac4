//! Runs one scenario and writes its CSV trace.
//!
//! Usage: `cargo run --example simulate_trace -- [scenario.json | preset] [out.csv]`

use std::io::Write;
use std::path::Path;

use apb::cli::{load_scenario, parse_scenario, preset, write_trace};
use apb::sim::run;

fn main() -> apb::Result<()> {
    let mut args = std::env::args().skip(1);
    let source = args.next().unwrap_or_else(|| "worst_case_front".to_string());
    let scenario = if Path::new(&source).exists() {
        load_scenario(Path::new(&source))?
    } else {
        parse_scenario(preset(&source)?)?
    };
    let trace = run(&scenario)?;
    match args.next() {
        Some(path) => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
            write_trace(&mut file, &scenario, &trace)?;
            file.flush()?;
            eprintln!("{} rows written to {path}", trace.records.len());
        }
        None => write_trace(&mut std::io::stdout().lock(), &scenario, &trace)?,
    }
    Ok(())
}
