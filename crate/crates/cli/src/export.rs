//! Canonical JSON problem files.
//!
//! ```json
//! {"schema": "qama-problem/1", "kind": "qubo", "n": 2, "offset": 0.0,
//!  "fields": [0.5, -1.0], "pairs": [[0, 1, 2.0]]}
//! ```
//!
//! `fields` holds the linear coefficients of a QUBO or the local fields of an
//! Ising problem. `pairs` is sorted by `(p, q)` with `p < q`.

use std::path::Path;

use qama_core::{IsingProblem, QuboProblem, Shape};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::output::{read_json, write_json};

pub const SCHEMA: &str = "qama-problem/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Qubo,
    Ising,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema: String,
    pub kind: ProblemKind,
    pub n: usize,
    pub offset: f64,
    pub fields: Vec<f64>,
    pub pairs: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<Shape>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Qubo(QuboProblem),
    Ising(IsingProblem),
}

impl Problem {
    pub fn to_ising(&self) -> IsingProblem {
        match self {
            Problem::Qubo(q) => qama_core::to_ising(q),
            Problem::Ising(i) => i.clone(),
        }
    }
}

impl From<&QuboProblem> for ProblemFile {
    fn from(q: &QuboProblem) -> Self {
        ProblemFile {
            schema: SCHEMA.into(),
            kind: ProblemKind::Qubo,
            n: q.n(),
            offset: q.offset(),
            fields: q.linear().to_vec(),
            pairs: q.quad().iter().map(|(&(p, r), &w)| (p, r, w)).collect(),
            shape: q.shape(),
        }
    }
}

impl From<&IsingProblem> for ProblemFile {
    fn from(i: &IsingProblem) -> Self {
        ProblemFile {
            schema: SCHEMA.into(),
            kind: ProblemKind::Ising,
            n: i.n(),
            offset: i.offset(),
            fields: i.fields().to_vec(),
            pairs: i
                .couplings()
                .iter()
                .map(|(&(p, q), &w)| (p, q, w))
                .collect(),
            shape: None,
        }
    }
}

impl From<&Problem> for ProblemFile {
    fn from(p: &Problem) -> Self {
        match p {
            Problem::Qubo(q) => q.into(),
            Problem::Ising(i) => i.into(),
        }
    }
}

impl ProblemFile {
    pub fn into_problem(self) -> Result<Problem> {
        if self.schema != SCHEMA {
            return Err(CliError::Config(format!(
                "unsupported schema {:?}, expected {SCHEMA:?}",
                self.schema
            )));
        }
        let pairs = self.pairs.into_iter().map(|(p, q, w)| ((p, q), w));
        Ok(match self.kind {
            ProblemKind::Qubo => {
                let q = QuboProblem::from_parts(self.n, pairs, self.fields, self.offset)?;
                Problem::Qubo(match self.shape {
                    Some(shape) => q.with_shape(shape),
                    None => q,
                })
            }
            ProblemKind::Ising => {
                Problem::Ising(IsingProblem::new(self.n, pairs, self.fields, self.offset)?)
            }
        })
    }
}

pub fn export_problem(problem: &Problem, path: &Path) -> Result<()> {
    write_json(path, &ProblemFile::from(problem))
}

pub fn import_problem(path: &Path) -> Result<Problem> {
    read_json::<ProblemFile>(path)?.into_problem()
}
