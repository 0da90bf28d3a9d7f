//! Experiment configuration: a single JSON document, with command-line
//! flags overriding individual fields. Unknown fields are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use nbde::de_coupled::CouplingSpec;
use nbde::de_uncoupled::{DegreeDistribution, SolverOptions};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_fp_tol")]
    pub fp_tol: f64,
    #[serde(default = "default_eps_tol")]
    pub eps_tol: f64,
    #[serde(default = "default_h_zero_tol")]
    pub h_zero_tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_max_iter_coupled")]
    pub max_iter_coupled: usize,
}

fn default_fp_tol() -> f64 {
    nbde::tol::FP_TOL
}
fn default_eps_tol() -> f64 {
    nbde::tol::EPS_TOL
}
fn default_h_zero_tol() -> f64 {
    nbde::tol::H_ZERO_TOL
}
fn default_max_iter() -> usize {
    nbde::tol::MAX_ITER_UNCOUPLED
}
fn default_max_iter_coupled() -> usize {
    nbde::tol::MAX_ITER_COUPLED
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            fp_tol: default_fp_tol(),
            eps_tol: default_eps_tol(),
            h_zero_tol: default_h_zero_tol(),
            max_iter: default_max_iter(),
            max_iter_coupled: default_max_iter_coupled(),
        }
    }
}

/// One experiment: ensemble, optional coupling geometry, tolerances and
/// the RNG seed recorded in every output.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub m: usize,
    /// Edge-perspective degree -> coefficient maps.
    pub lambda: BTreeMap<usize, f64>,
    pub rho: BTreeMap<usize, f64>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    0x6e62_6465 // "nbde"
}

impl Default for EnsembleSpec {
    /// The (3,6)-regular ensemble over GL(2^2).
    fn default() -> Self {
        EnsembleSpec {
            m: 2,
            lambda: BTreeMap::from([(3, 1.0)]),
            rho: BTreeMap::from([(6, 1.0)]),
            n: None,
            w: None,
            epsilon: None,
            epsilon_grid: None,
            tolerances: Tolerances::default(),
            seed: default_seed(),
        }
    }
}

impl EnsembleSpec {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("invalid config {}: {e}", path.display())))
    }

    /// Stable hash of the fully resolved spec, quoted in every output.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("spec serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        hex::encode(&digest[..6])
    }

    pub fn degree_distribution(&self) -> Result<DegreeDistribution, CliError> {
        let lambda: Vec<(usize, f64)> = self.lambda.iter().map(|(&d, &c)| (d, c)).collect();
        let rho: Vec<(usize, f64)> = self.rho.iter().map(|(&d, &c)| (d, c)).collect();
        DegreeDistribution::new(lambda, rho).map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            fp_tol: self.tolerances.fp_tol,
            max_iter: self.tolerances.max_iter,
            h_zero_tol: self.tolerances.h_zero_tol,
            eps_tol: self.tolerances.eps_tol,
        }
    }

    pub fn coupled_options(&self) -> nbde::de_coupled::CoupledOptions {
        nbde::de_coupled::CoupledOptions {
            fp_tol: self.tolerances.fp_tol,
            max_iter: self.tolerances.max_iter_coupled,
            h_zero_tol: self.tolerances.h_zero_tol,
            eps_tol: self.tolerances.eps_tol,
            ..Default::default()
        }
    }

    /// Coupling geometry, defaulting to N = 129, w = 5 when unspecified.
    pub fn coupling(&self) -> Result<CouplingSpec, CliError> {
        CouplingSpec::new(self.n.unwrap_or(129), self.w.unwrap_or(5))
            .map_err(|e| CliError::Validation(e.to_string()))
    }

    /// The ε values a grid-driven command sweeps: the explicit grid, else
    /// the single ε, else a default 21-point sweep of [0, 1].
    pub fn epsilon_values(&self) -> Result<Vec<f64>, CliError> {
        if let (Some(_), Some(_)) = (&self.epsilon, &self.epsilon_grid) {
            return Err(CliError::Validation(
                "specify either epsilon or epsilon_grid, not both".into(),
            ));
        }
        let values = if let Some(grid) = &self.epsilon_grid {
            grid.clone()
        } else if let Some(eps) = self.epsilon {
            vec![eps]
        } else {
            (0..=20).map(|i| i as f64 / 20.0).collect()
        };
        for &e in &values {
            if !(0.0..=1.0).contains(&e) {
                return Err(CliError::Validation(format!(
                    "erasure probability {e} outside [0, 1]"
                )));
            }
        }
        Ok(values)
    }

    /// Compact `degree:coeff;degree:coeff` rendering for CSV fields.
    pub fn polynomial_label(coeffs: &BTreeMap<usize, f64>) -> String {
        coeffs
            .iter()
            .map(|(d, c)| format!("{d}:{c}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Parses an override like `3:1.0,2:0.5` into a degree map.
pub fn parse_degree_map(text: &str) -> Result<BTreeMap<usize, f64>, CliError> {
    let mut out = BTreeMap::new();
    for part in text.split(',') {
        let (d, c) = part
            .split_once(':')
            .ok_or_else(|| CliError::Validation(format!("bad degree term '{part}'")))?;
        let degree: usize = d
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("bad degree '{d}'")))?;
        let coeff: f64 = c
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("bad coefficient '{c}'")))?;
        if out.insert(degree, coeff).is_some() {
            return Err(CliError::Validation(format!("duplicate degree {degree}")));
        }
    }
    Ok(out)
}
