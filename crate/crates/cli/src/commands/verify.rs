//! `nbde verify`: run the identity/lemma suite for the configured m and
//! emit one pass/fail record per check. Exit code 2 names the failures.

use serde_json::{json, Map, Value};

use nbde::checks::{run_verify_suite, VerifyConfig};
use nbde::gf_coeffs::CoefficientTable;

use crate::config::EnsembleSpec;
use crate::output::{render_csv, render_json, CsvBlock, Metadata, OutFormat};
use crate::CliError;

pub fn run(
    spec: &EnsembleSpec,
    out: OutFormat,
    samples: usize,
    corrupt_table: bool,
) -> Result<(), CliError> {
    let table =
        CoefficientTable::shared(spec.m).map_err(|e| CliError::Validation(e.to_string()))?;
    let table = if corrupt_table {
        table.corrupted()
    } else {
        (*table).clone()
    };
    let dd = spec.degree_distribution()?;
    let cfg = VerifyConfig {
        samples,
        seed: spec.seed,
        ..VerifyConfig::default()
    };
    let reports = run_verify_suite(&table, Some(&dd), &cfg);

    let meta = Metadata {
        command: "verify",
        spec_hash: spec.hash(),
        seed: spec.seed,
        units: "max_error:dimensionless",
    };
    match out {
        OutFormat::Json => {
            let mut body = Map::new();
            body.insert("m".into(), json!(spec.m));
            body.insert("samples".into(), json!(samples));
            body.insert(
                "checks".into(),
                Value::Array(
                    reports
                        .iter()
                        .map(|r| {
                            json!({
                                "name": r.name,
                                "passed": r.passed,
                                "max_error": r.max_error,
                                "samples": r.samples,
                                "skipped": r.skipped,
                                "detail": r.detail,
                            })
                        })
                        .collect(),
                ),
            );
            body.insert("all_passed".into(), json!(reports.iter().all(|r| r.passed)));
            println!("{}", render_json(&meta, body));
        }
        OutFormat::Csv => {
            let block = CsvBlock {
                section: None,
                header: "name,passed,max_error,samples,skipped".into(),
                rows: reports
                    .iter()
                    .map(|r| {
                        format!(
                            "{},{},{},{},{}",
                            r.name,
                            r.passed,
                            crate::output::fmt(r.max_error),
                            r.samples,
                            r.skipped
                        )
                    })
                    .collect(),
            };
            print!("{}", render_csv(&meta, &[block]));
        }
    }

    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.name.to_string())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::LemmaFailure(failed))
    }
}
