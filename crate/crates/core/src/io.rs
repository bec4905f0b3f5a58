//! JSON formats for matrices, channels, states and probability tables.
//!
//! Matrix: `{"rows": n, "cols": m, "re": [[…]], "im": [[…]]}` with `im` optional.
//! Channel: `{"dim_in": a, "dim_out": b, "choi": <matrix>}` or `{"kraus": [<matrix>, …]}`.
//! State: a matrix, or a classical table `{"p": [[…]]}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelRep;
use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix};
use crate::state::{classical_state, Density};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == self.rows && rows.iter().all(|r| r.len() == self.cols);
        if !shape_ok(&self.re) {
            return Err(Error::Parse(format!("\"re\" is not {}x{}", self.rows, self.cols)));
        }
        if let Some(im) = &self.im {
            if !shape_ok(im) {
                return Err(Error::Parse(format!("\"im\" is not {}x{}", self.rows, self.cols)));
            }
        }
        let m = CMatrix::from_fn(self.rows, self.cols, |i, j| {
            c64(self.re[i][j], self.im.as_ref().map(|im| im[i][j]).unwrap_or(0.0))
        });
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse("non-finite matrix entry".into()));
        }
        Ok(m)
    }

    pub fn from_matrix(m: &CMatrix) -> Self {
        let (rows, cols) = m.shape();
        let grid = |part: fn(&num_complex::Complex64) -> f64| {
            (0..rows).map(|i| (0..cols).map(|j| part(&m[(i, j)])).collect()).collect::<Vec<Vec<f64>>>()
        };
        let im = grid(|z| z.im);
        let has_im = im.iter().flatten().any(|&x| x != 0.0);
        MatrixJson { rows, cols, re: grid(|z| z.re), im: has_im.then_some(im) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelJson {
    Choi { dim_in: usize, dim_out: usize, choi: MatrixJson },
    Kraus { kraus: Vec<MatrixJson> },
}

impl ChannelJson {
    pub fn to_channel(&self) -> Result<ChannelRep> {
        match self {
            ChannelJson::Choi { dim_in, dim_out, choi } => ChannelRep::from_choi(choi.to_matrix()?, *dim_in, *dim_out),
            ChannelJson::Kraus { kraus } => {
                let ops = kraus.iter().map(MatrixJson::to_matrix).collect::<Result<Vec<_>>>()?;
                let shape = ops.first().map(|k| k.shape()).ok_or_else(|| Error::Parse("empty Kraus list".into()))?;
                if ops.iter().any(|k| k.shape() != shape) {
                    return Err(Error::DimensionMismatch("Kraus operators differ in shape".into()));
                }
                ChannelRep::from_kraus(ops)
            }
        }
    }

    pub fn from_channel(e: &ChannelRep) -> Self {
        use crate::channel::LinearMap;
        ChannelJson::Choi { dim_in: e.dim_in(), dim_out: e.dim_out(), choi: MatrixJson::from_matrix(e.choi()) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateJson {
    Table { p: Vec<Vec<f64>> },
    Matrix(MatrixJson),
}

/// A parsed state file; tables carry their dimensions.
#[derive(Debug, Clone)]
pub enum StateInput {
    Quantum(Density),
    Classical { table: Vec<Vec<f64>>, state: Density },
}

impl StateInput {
    pub fn density(&self) -> &Density {
        match self {
            StateInput::Quantum(d) => d,
            StateInput::Classical { state, .. } => state,
        }
    }

    pub fn table_dims(&self) -> Option<(usize, usize)> {
        match self {
            StateInput::Quantum(_) => None,
            StateInput::Classical { table, .. } => Some((table.len(), table.first().map(Vec::len).unwrap_or(0))),
        }
    }
}

impl StateJson {
    pub fn to_state(&self) -> Result<StateInput> {
        match self {
            StateJson::Table { p } => Ok(StateInput::Classical { table: p.clone(), state: classical_state(p)? }),
            StateJson::Matrix(m) => Ok(StateInput::Quantum(Density::new(m.to_matrix()?)?)),
        }
    }
}

/// Parses JSON text; errors carry the line and column.
pub fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

pub fn read_file<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse(&text, &path.display().to_string())
}

pub fn read_channel(path: &Path) -> Result<ChannelRep> {
    read_file::<ChannelJson>(path)?.to_channel()
}

pub fn read_state(path: &Path) -> Result<StateInput> {
    read_file::<StateJson>(path)?.to_state()
}
