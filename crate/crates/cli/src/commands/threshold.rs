//! `nbde threshold`: uncoupled BP threshold by bisection.

use serde_json::{json, Map};

use nbde::de_uncoupled::bp_threshold;
use nbde::gf_coeffs::CoefficientTable;

use crate::config::EnsembleSpec;
use crate::output::{fmt, render_csv, render_json, CsvBlock, Metadata, OutFormat};
use crate::CliError;

pub fn run(spec: &EnsembleSpec, out: OutFormat) -> Result<(), CliError> {
    let table =
        CoefficientTable::shared(spec.m).map_err(|e| CliError::Validation(e.to_string()))?;
    let dd = spec.degree_distribution()?;
    let opts = spec.solver_options();
    let eps_bp = bp_threshold(&dd, &table, &opts);
    // number of bisection probes taken to reach the bracket width
    let iters = (1.0 / opts.eps_tol).log2().ceil() as usize;

    let meta = Metadata {
        command: "threshold",
        spec_hash: spec.hash(),
        seed: spec.seed,
        units: "eps_bp:erasure-probability",
    };
    match out {
        OutFormat::Json => {
            let mut body = Map::new();
            body.insert("m".into(), json!(spec.m));
            body.insert("lambda".into(), json!(spec.lambda));
            body.insert("rho".into(), json!(spec.rho));
            body.insert("eps_bp".into(), json!(eps_bp));
            body.insert("iters".into(), json!(iters));
            println!("{}", render_json(&meta, body));
        }
        OutFormat::Csv => {
            let block = CsvBlock {
                section: None,
                header: "m,lambda,rho,eps_bp,iters".into(),
                rows: vec![format!(
                    "{},{},{},{},{}",
                    spec.m,
                    EnsembleSpec::polynomial_label(&spec.lambda),
                    EnsembleSpec::polynomial_label(&spec.rho),
                    fmt(eps_bp),
                    iters
                )],
            };
            print!("{}", render_csv(&meta, &[block]));
        }
    }
    Ok(())
}
