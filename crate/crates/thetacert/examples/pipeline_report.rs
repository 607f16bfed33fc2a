//! Ingest the bundled genus-5 fixture and print the certification report.
//!
//! Run with `cargo run --example pipeline_report`. Pass `json` or `csv` as an
//! argument for the other report formats.

use std::path::Path;

use thetacert::pipeline::{ingest, report_render, run_pipeline, Format, PipelineConfig, Stages};

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/genus5");
    let model = ingest(&dir.join("curve.json"), &dir.join("hyperplanes.json"), None).unwrap();
    println!("{} hyperplanes, g = {}", model.hyperplanes.len(), model.g());

    let report = run_pipeline(&model, &PipelineConfig::default(), Stages::All).unwrap();
    let format = match std::env::args().nth(1).as_deref() {
        Some("json") => Format::Json,
        Some("csv") => Format::CsvSigma,
        _ => Format::Text,
    };
    print!("{}", report_render(&report, format));
}
