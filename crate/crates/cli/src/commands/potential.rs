//! `nbde potential`: energy-gap samples over the ε grid, the potential
//! threshold, and the discovered fixed points with their potentials.

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use nbde::de_uncoupled::{
    energy_gap, enumerate_ufps, potential_threshold, potential_u_s, UfpSearchOptions,
};
use nbde::density::Density;
use nbde::gf_coeffs::CoefficientTable;

use crate::config::EnsembleSpec;
use crate::output::{fmt, render_csv, render_json, CsvBlock, Metadata, OutFormat};
use crate::CliError;

pub fn run(spec: &EnsembleSpec, out: OutFormat) -> Result<(), CliError> {
    let table =
        CoefficientTable::shared(spec.m).map_err(|e| CliError::Validation(e.to_string()))?;
    let dd = spec.degree_distribution()?;
    let opts = UfpSearchOptions {
        solver: spec.solver_options(),
        ..UfpSearchOptions::default()
    };
    let grid = spec.epsilon_values()?;

    let eps_pot = potential_threshold(&dd, &table, &opts);
    // grid points fan out across the worker pool; collect keeps grid order
    let gaps: Vec<f64> = grid
        .par_iter()
        .map(|&eps| energy_gap(eps, &dd, &table, &opts))
        .collect();
    let ufps: Vec<(f64, Vec<(Density, f64)>)> = grid
        .par_iter()
        .map(|&eps| {
            let fps = enumerate_ufps(eps, &dd, &table, &opts)
                .into_iter()
                .map(|fp| {
                    let u = potential_u_s(&fp, eps, &dd, &table);
                    (fp, u)
                })
                .collect();
            (eps, fps)
        })
        .collect();

    let meta = Metadata {
        command: "potential",
        spec_hash: spec.hash(),
        seed: spec.seed,
        units: "eps:erasure-probability delta_e:bits potential:bits",
    };
    match out {
        OutFormat::Json => {
            let mut body = Map::new();
            body.insert("m".into(), json!(spec.m));
            body.insert("eps_pot".into(), json!(eps_pot));
            body.insert(
                "ufp_search".into(),
                json!({
                    "seed_grid": opts.seed_grid,
                    "bracket_unstable": opts.bracket_unstable,
                    "note": "seeded forward search; the fixed-point set is an under-approximation",
                }),
            );
            body.insert(
                "grid".into(),
                Value::Array(
                    grid.iter()
                        .zip(&gaps)
                        .map(|(&eps, &gap)| {
                            json!({
                                "eps": eps,
                                "delta_e": if gap.is_finite() { json!(gap) } else { json!("inf") },
                            })
                        })
                        .collect(),
                ),
            );
            body.insert(
                "ufps".into(),
                Value::Array(
                    ufps.iter()
                        .map(|(eps, fps)| {
                            json!({
                                "eps": eps,
                                "fixed_points": fps.iter().map(|(fp, u)| {
                                    json!({
                                        "p": fp.as_slice(),
                                        "entropy": fp.entropy(),
                                        "potential": u,
                                    })
                                }).collect::<Vec<_>>(),
                            })
                        })
                        .collect(),
                ),
            );
            println!("{}", render_json(&meta, body));
        }
        OutFormat::Csv => {
            let main = CsvBlock {
                section: None,
                header: "eps,delta_e,eps_pot".into(),
                rows: grid
                    .iter()
                    .zip(&gaps)
                    .map(|(&eps, &gap)| format!("{},{},{}", fmt(eps), fmt(gap), fmt(eps_pot)))
                    .collect(),
            };
            let m = spec.m;
            let mut ufp_rows = Vec::new();
            for (eps, fps) in &ufps {
                for (idx, (fp, u)) in fps.iter().enumerate() {
                    let p = fp
                        .as_slice()
                        .iter()
                        .map(|&x| fmt(x))
                        .collect::<Vec<_>>()
                        .join(",");
                    ufp_rows.push(format!(
                        "{},{},{},{},{}",
                        fmt(*eps),
                        idx,
                        fmt(fp.entropy()),
                        fmt(*u),
                        p
                    ));
                }
            }
            let ufp_block = CsvBlock {
                section: Some("ufps (seeded search; under-approximation)".into()),
                header: format!(
                    "eps,fp_index,entropy,potential,{}",
                    (0..=m)
                        .map(|k| format!("p{k}"))
                        .collect::<Vec<_>>()
                        .join(",")
                ),
                rows: ufp_rows,
            };
            print!("{}", render_csv(&meta, &[main, ufp_block]));
        }
    }
    Ok(())
}
