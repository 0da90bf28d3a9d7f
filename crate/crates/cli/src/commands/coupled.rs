//! `nbde coupled`: coupled BP threshold, decoding-wave profile, CFP
//! export, middle-point convergence table, and the saturation gap
//! |eps_bp_coupled - eps_pot|.

use std::path::Path;

use serde_json::{json, Map, Value};

use nbde::de_coupled::{coupled_bp_threshold, coupled_fp, middle_point, wave_profile};
use nbde::de_uncoupled::{bp_threshold, potential_threshold, UfpSearchOptions};
use nbde::gf_coeffs::CoefficientTable;

use crate::config::EnsembleSpec;
use crate::output::{fmt, render_csv, render_json, CsvBlock, Metadata, OutFormat};
use crate::CliError;

pub fn run(spec: &EnsembleSpec, out: OutFormat, output_dir: Option<&Path>) -> Result<(), CliError> {
    let table =
        CoefficientTable::shared(spec.m).map_err(|e| CliError::Validation(e.to_string()))?;
    let dd = spec.degree_distribution()?;
    let coupling = spec.coupling()?;
    let copts = spec.coupled_options();
    let solver = spec.solver_options();
    let ufp_opts = UfpSearchOptions {
        solver: solver.clone(),
        ..UfpSearchOptions::default()
    };

    let eps_bp_uncoupled = bp_threshold(&dd, &table, &solver);
    let eps_pot = potential_threshold(&dd, &table, &ufp_opts);
    let eps_bp_coupled = coupled_bp_threshold(&dd, &coupling, &table, &copts)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let saturation_gap = (eps_bp_coupled - eps_pot).abs();

    // wave profile inside the saturation window unless ε was pinned
    let eps_wave = spec.epsilon.unwrap_or(0.5 * (eps_bp_uncoupled + eps_pot));
    let wave = wave_profile(eps_wave, &dd, &coupling, &table, 10, &copts)
        .map_err(|e| CliError::Validation(e.to_string()))?;

    // nontrivial-CFP regime for the middle-point table unless ε was pinned
    let eps_mid = spec.epsilon.unwrap_or(eps_pot + 0.01);
    let n_list = middle_point_lengths(coupling.n(), coupling.w());
    let middles = middle_point(eps_mid, &dd, coupling.w(), &n_list, &table, &copts)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    if !middles.all_converged {
        return Err(CliError::NonConvergence(format!(
            "a coupled run at eps={eps_mid} hit the iteration cap {}",
            copts.max_iter
        )));
    }
    let (cfp, cfp_report) = coupled_fp(eps_mid, &dd, &coupling, &table, &copts)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    if !cfp_report.converged {
        return Err(CliError::NonConvergence(format!(
            "coupled fixed point at eps={eps_mid} did not converge \
             (residual {:.3e} after {} sweeps)",
            cfp_report.residual, cfp_report.iterations
        )));
    }

    let meta = Metadata {
        command: "coupled",
        spec_hash: spec.hash(),
        seed: spec.seed,
        units: "eps:erasure-probability entropy:bits",
    };

    let wave_rows: Vec<String> = wave
        .iter()
        .flat_map(|(iter, profile)| {
            profile
                .iter()
                .enumerate()
                .map(move |(pos, h)| format!("{iter},{pos},{}", fmt(*h)))
        })
        .collect();
    let cfp_rows: Vec<String> = cfp
        .entries()
        .iter()
        .enumerate()
        .map(|(pos, d)| {
            let p = d
                .as_slice()
                .iter()
                .map(|&x| fmt(x))
                .collect::<Vec<_>>()
                .join(",");
            format!("{pos},{p}")
        })
        .collect();

    if let Some(dir) = output_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Validation(format!("cannot create {}: {e}", dir.display())))?;
        let wave_csv = render_csv(
            &meta,
            &[CsvBlock {
                section: Some(format!("wave profile at eps={}", fmt(eps_wave))),
                header: "iter,pos,entropy".into(),
                rows: wave_rows.clone(),
            }],
        );
        let cfp_csv = render_csv(
            &meta,
            &[CsvBlock {
                section: Some(format!("coupled fixed point at eps={}", fmt(eps_mid))),
                header: format!(
                    "pos,{}",
                    (0..=spec.m)
                        .map(|k| format!("p{k}"))
                        .collect::<Vec<_>>()
                        .join(",")
                ),
                rows: cfp_rows.clone(),
            }],
        );
        std::fs::write(dir.join("wave.csv"), wave_csv)
            .map_err(|e| CliError::Validation(format!("cannot write wave.csv: {e}")))?;
        std::fs::write(dir.join("cfp.csv"), cfp_csv)
            .map_err(|e| CliError::Validation(format!("cannot write cfp.csv: {e}")))?;
    }

    match out {
        OutFormat::Json => {
            let mut body = Map::new();
            body.insert("m".into(), json!(spec.m));
            body.insert("N".into(), json!(coupling.n()));
            body.insert("w".into(), json!(coupling.w()));
            body.insert("eps_bp_uncoupled".into(), json!(eps_bp_uncoupled));
            body.insert("eps_pot".into(), json!(eps_pot));
            body.insert("eps_bp_coupled".into(), json!(eps_bp_coupled));
            body.insert("saturation_gap".into(), json!(saturation_gap));
            body.insert("eps_wave".into(), json!(eps_wave));
            body.insert("eps_middle".into(), json!(eps_mid));
            body.insert(
                "middle_points".into(),
                Value::Array(
                    middles
                        .points
                        .iter()
                        .map(|(n, d)| {
                            json!({
                                "N": n,
                                "entropy": d.entropy(),
                                "p": d.as_slice(),
                            })
                        })
                        .collect(),
                ),
            );
            body.insert("middle_monotone_in_N".into(), json!(middles.monotone_in_n));
            body.insert("middle_ufp_residual".into(), json!(middles.ufp_residual));
            body.insert(
                "wave".into(),
                Value::Array(
                    wave.iter()
                        .map(|(iter, profile)| json!({"iter": iter, "entropy": profile}))
                        .collect(),
                ),
            );
            body.insert(
                "cfp".into(),
                Value::Array(cfp.entries().iter().map(|d| json!(d.as_slice())).collect()),
            );
            println!("{}", render_json(&meta, body));
        }
        OutFormat::Csv => {
            let summary = CsvBlock {
                section: None,
                header: "m,N,w,eps_bp_uncoupled,eps_pot,eps_bp_coupled,saturation_gap".into(),
                rows: vec![format!(
                    "{},{},{},{},{},{},{}",
                    spec.m,
                    coupling.n(),
                    coupling.w(),
                    fmt(eps_bp_uncoupled),
                    fmt(eps_pot),
                    fmt(eps_bp_coupled),
                    fmt(saturation_gap)
                )],
            };
            let middle = CsvBlock {
                section: Some(format!(
                    "middle points at eps={} (monotone={}, ufp_residual={})",
                    fmt(eps_mid),
                    middles.monotone_in_n,
                    fmt(middles.ufp_residual)
                )),
                header: "N,entropy".into(),
                rows: middles
                    .points
                    .iter()
                    .map(|(n, d)| format!("{n},{}", fmt(d.entropy())))
                    .collect(),
            };
            let wave_block = CsvBlock {
                section: Some(format!("wave profile at eps={}", fmt(eps_wave))),
                header: "iter,pos,entropy".into(),
                rows: wave_rows,
            };
            let cfp_block = CsvBlock {
                section: Some(format!("coupled fixed point at eps={}", fmt(eps_mid))),
                header: format!(
                    "pos,{}",
                    (0..=spec.m)
                        .map(|k| format!("p{k}"))
                        .collect::<Vec<_>>()
                        .join(",")
                ),
                rows: cfp_rows,
            };
            print!(
                "{}",
                render_csv(&meta, &[summary, middle, wave_block, cfp_block])
            );
        }
    }
    Ok(())
}

/// Halving chain of coupling lengths ending at `n`, all at least `w`.
fn middle_point_lengths(n: usize, w: usize) -> Vec<usize> {
    let mut list = vec![n];
    let mut cur = n;
    while list.len() < 4 && cur / 2 >= w.max(5) {
        cur /= 2;
        list.push(cur);
    }
    list.reverse();
    list.dedup();
    list
}
