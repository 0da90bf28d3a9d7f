//! `nbde dump-tables`: exact coefficient tensors as CSV, one row per
//! (i, j, k) with numerator/denominator pairs.

use serde_json::{json, Map, Value};

use nbde::gf_coeffs::CoefficientTable;

use crate::config::EnsembleSpec;
use crate::output::{render_csv, render_json, CsvBlock, Metadata, OutFormat};
use crate::CliError;

pub fn run(spec: &EnsembleSpec, out: OutFormat) -> Result<(), CliError> {
    let table =
        CoefficientTable::shared(spec.m).map_err(|e| CliError::Validation(e.to_string()))?;
    let m = spec.m;
    let meta = Metadata {
        command: "dump-tables",
        spec_hash: spec.hash(),
        seed: spec.seed,
        units: "exact-rational",
    };
    let mut rows = Vec::with_capacity((m + 1) * (m + 1) * (m + 1));
    for i in 0..=m {
        for j in 0..=m {
            for k in 0..=m {
                let v = table.v(i, j, k);
                let c = table.c(i, j, k);
                rows.push(format!(
                    "{m},{i},{j},{k},{},{},{},{}",
                    v.numer(),
                    v.denom(),
                    c.numer(),
                    c.denom()
                ));
            }
        }
    }
    match out {
        OutFormat::Csv => {
            let block = CsvBlock {
                section: None,
                header: "m,i,j,k,V_num,V_den,C_num,C_den".into(),
                rows,
            };
            print!("{}", render_csv(&meta, &[block]));
        }
        OutFormat::Json => {
            let mut body = Map::new();
            body.insert("m".into(), json!(m));
            body.insert(
                "entries".into(),
                Value::Array(
                    (0..=m)
                        .flat_map(|i| {
                            let table = &table;
                            (0..=m).flat_map(move |j| {
                                (0..=m).map(move |k| {
                                    let v = table.v(i, j, k);
                                    let c = table.c(i, j, k);
                                    json!({
                                        "i": i, "j": j, "k": k,
                                        "V": format!("{}/{}", v.numer(), v.denom()),
                                        "C": format!("{}/{}", c.numer(), c.denom()),
                                    })
                                })
                            })
                        })
                        .collect(),
                ),
            );
            println!("{}", render_json(&meta, body));
        }
    }
    Ok(())
}
