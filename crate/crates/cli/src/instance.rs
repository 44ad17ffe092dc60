//! JSON instance documents.
//!
//! ```json
//! {
//!   "m": 3, "n": 1,
//!   "A": [[1.0], [2.0], [3.0]],
//!   "y": [4.0, 2.0, 6.0],
//!   "ground_truth": { "x_star": [2.0], "pi_star": [1, 0, 2], "sigma": 0.0 }
//! }
//! ```
//!
//! `ground_truth` is optional. `pi_star` lists, for each slot `i`, the index
//! of the noiseless measurement that landed there: `y[i] = (A x*)[pi_star[i]] + ε_i`.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use slr_core::{Matrix, Permutation, ProblemInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<GroundTruth>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruth {
    pub x_star: Vec<f64>,
    pub pi_star: Vec<usize>,
    /// Noise standard deviation used at generation time.
    pub sigma: f64,
}

impl InstanceDoc {
    pub fn from_instance(inst: &ProblemInstance, ground_truth: Option<GroundTruth>) -> Self {
        Self {
            m: inst.m(),
            n: inst.n(),
            a: inst.a().to_rows(),
            y: inst.y().to_vec(),
            ground_truth,
        }
    }

    pub fn to_instance(&self) -> Result<ProblemInstance> {
        if self.a.len() != self.m || self.y.len() != self.m {
            bail!(
                "declared m = {} but A has {} rows and y has {} entries",
                self.m,
                self.a.len(),
                self.y.len()
            );
        }
        if let Some(row) = self.a.iter().position(|r| r.len() != self.n) {
            bail!(
                "declared n = {} but row {row} of A has {} entries",
                self.n,
                self.a[row].len()
            );
        }
        if let Some(gt) = &self.ground_truth {
            if gt.x_star.len() != self.n {
                bail!(
                    "ground_truth.x_star has {} entries, expected {}",
                    gt.x_star.len(),
                    self.n
                );
            }
            Permutation::new(gt.pi_star.clone()).context("ground_truth.pi_star")?;
            if gt.pi_star.len() != self.m {
                bail!(
                    "ground_truth.pi_star has {} entries, expected {}",
                    gt.pi_star.len(),
                    self.m
                );
            }
        }
        let a = Matrix::from_rows(&self.a).context("matrix A")?;
        Ok(ProblemInstance::new(a, self.y.clone())?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).with_context(|| format!("writing {}", path.display()))
    }
}
