//! On-disk formats.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sharpkit::operator::{from_pair_rows, to_pair_rows, DensityMatrix, HermitianOperator};
use sharpkit::povm::Povm;
use sharpkit::{Error, Result};

/// Matrix as row-major rows of `[re, im]` pairs.
pub type PairRows = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmFile {
    pub dim: usize,
    pub outcomes: usize,
    pub elements: Vec<PairRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl PovmFile {
    pub fn from_povm(p: &Povm) -> Self {
        Self {
            dim: p.dim(),
            outcomes: p.outcomes(),
            elements: p.elements().iter().map(|e| to_pair_rows(e.matrix())).collect(),
            labels: None,
        }
    }

    pub fn to_povm(&self) -> Result<Povm> {
        if self.elements.len() != self.outcomes {
            return Err(Error::InvalidInput(format!(
                "`outcomes` is {} but {} elements are listed",
                self.outcomes,
                self.elements.len()
            )));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.outcomes {
                return Err(Error::InvalidInput(format!("{} labels for {} outcomes", labels.len(), self.outcomes)));
            }
        }
        let elements = self
            .elements
            .iter()
            .enumerate()
            .map(|(x, rows)| operator(rows, self.dim).map_err(|e| Error::InvalidInput(format!("element {x}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Povm::validate(elements, self.dim)
    }
}

fn operator(rows: &PairRows, dim: usize) -> Result<HermitianOperator> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::InvalidInput(format!("expected a {dim}×{dim} matrix")));
    }
    if rows.iter().flatten().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite entry".into()));
    }
    HermitianOperator::new(from_pair_rows(rows)?)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn read_povm(path: &Path) -> Result<Povm> {
    read_json::<PovmFile>(path)?
        .to_povm()
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

/// A state file holds a bare density matrix in the same row format.
pub fn read_state(path: &Path) -> Result<DensityMatrix> {
    let rows: PairRows = read_json(path)?;
    DensityMatrix::new(operator(&rows, rows.len())?).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}
