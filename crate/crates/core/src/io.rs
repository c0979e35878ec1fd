//! JSON formats for matrices and ensembles, and CSV number formatting.
//!
//! A matrix is `{"dim": d, "re": [[...]], "im": [[...]]}` with `im`
//! optional; an ensemble is `{"probs": [...], "states": [matrix, ...]}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Ensemble, ProbVector};
use crate::qmat::{ComplexMatrix, DensityOperator, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleJson {
    pub probs: Vec<f64>,
    pub states: Vec<MatrixJson>,
}

fn check_square(part: &str, rows: &[Vec<f64>], dim: usize) -> Result<()> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Parse(format!("\"{part}\" must be a {dim}x{dim} array of numbers")));
    }
    Ok(())
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.dim == 0 {
            return Err(Error::Parse("\"dim\" must be at least 1".into()));
        }
        check_square("re", &self.re, self.dim)?;
        if let Some(im) = &self.im {
            check_square("im", im, self.dim)?;
        }
        let mut entries = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let im = self.im.as_ref().map_or(0.0, |m| m[i][j]);
                entries.push(C64::new(self.re[i][j], im));
            }
        }
        ComplexMatrix::from_row_major(self.dim, self.dim, entries)
    }

    /// Omits `im` when every imaginary part is zero.
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..m.rows()).map(|i| (0..m.cols()).map(|j| f(&m.get(i, j))).collect()).collect()
        };
        let im = rows(|z| z.im);
        Self {
            dim: m.rows(),
            re: rows(|z| z.re),
            im: im.iter().flatten().any(|x| *x != 0.0).then_some(im),
        }
    }

    pub fn to_density(&self) -> Result<DensityOperator> {
        DensityOperator::new(self.to_matrix()?)
    }
}

impl EnsembleJson {
    pub fn to_ensemble(&self) -> Result<Ensemble> {
        let states = self.states.iter().map(MatrixJson::to_density).collect::<Result<Vec<_>>>()?;
        Ensemble::new(ProbVector::new(self.probs.clone())?, states)
    }

    pub fn from_ensemble(e: &Ensemble) -> Self {
        Self {
            probs: e.probs().as_slice().to_vec(),
            states: e.states().iter().map(|s| MatrixJson::from_matrix(s.matrix())).collect(),
        }
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

pub fn parse_density(text: &str) -> Result<DensityOperator> {
    parse::<MatrixJson>(text)?.to_density()
}

pub fn parse_ensemble(text: &str) -> Result<Ensemble> {
    parse::<EnsembleJson>(text)?.to_ensemble()
}

pub fn read_density(path: &Path) -> Result<DensityOperator> {
    parse_density(&read(path)?)
}

pub fn read_ensemble(path: &Path) -> Result<Ensemble> {
    parse_ensemble(&read(path)?)
}

/// `x` rounded to 12 significant digits, in plain decimal notation.
pub fn format_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        return "0".into();
    }
    rounded.to_string()
}
