//! JSON interchange for tuples:
//! `{"g", "n", "mode": "float"|"rational", "mats", "inhomogeneous"?}` with
//! entries either numbers or `"p/q"` strings.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::matrix::{format_rational, parse_rational, rat_to_f64, RatMatrix, RationalTuple};
use crate::exact::poly::Rational;
use crate::sym::{HomTuple, SymTuple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Float,
    Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Number(f64),
    Text(String),
}

impl Entry {
    fn to_f64(&self) -> Result<f64> {
        match self {
            Entry::Number(v) => Ok(*v),
            Entry::Text(s) => Ok(rat_to_f64(&parse_rational(s)?)),
        }
    }

    fn to_rational(&self) -> Result<Rational> {
        match self {
            Entry::Number(v) => {
                Rational::from_float(*v).ok_or_else(|| Error::Parse(format!("non-finite entry {v}")))
            }
            Entry::Text(s) => parse_rational(s),
        }
    }
}

type Rows = Vec<Vec<Entry>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TupleDocument {
    pub g: usize,
    pub n: usize,
    pub mode: Mode,
    pub mats: Vec<Rows>,
    /// `X₀` of a homogeneous tuple `(X₀, X)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inhomogeneous: Option<Rows>,
}

impl TupleDocument {
    pub fn parse(s: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(s)?;
        doc.check_shape()?;
        Ok(doc)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Canonical compact form.
    pub fn emit(&self) -> String {
        serde_json::to_string(self).expect("documents always serialize")
    }

    fn check_shape(&self) -> Result<()> {
        if self.mats.len() != self.g {
            return Err(Error::Ragged(format!("g = {} but {} matrices given", self.g, self.mats.len())));
        }
        let all = self.mats.iter().enumerate().chain(self.inhomogeneous.iter().map(|m| (usize::MAX, m)));
        for (i, m) in all {
            let name = if i == usize::MAX { "inhomogeneous".to_string() } else { format!("matrix {i}") };
            if m.len() != self.n {
                return Err(Error::Ragged(format!("{name} has {} rows, expected {}", m.len(), self.n)));
            }
            if let Some((r, row)) = m.iter().enumerate().find(|(_, row)| row.len() != self.n) {
                return Err(Error::Ragged(format!("{name} row {r} has {} entries, expected {}", row.len(), self.n)));
            }
        }
        Ok(())
    }

    fn float_matrix(&self, rows: &Rows) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (r, row) in rows.iter().enumerate() {
            for (c, e) in row.iter().enumerate() {
                m[(r, c)] = e.to_f64()?;
            }
        }
        Ok(m)
    }

    pub fn to_sym_tuple(&self) -> Result<SymTuple> {
        self.check_shape()?;
        SymTuple::new(self.mats.iter().map(|m| self.float_matrix(m)).collect::<Result<_>>()?)
    }

    pub fn to_hom_tuple(&self) -> Result<HomTuple> {
        let x0 = match &self.inhomogeneous {
            Some(rows) => self.float_matrix(rows)?,
            None => DMatrix::identity(self.n, self.n),
        };
        HomTuple::new(x0, self.to_sym_tuple()?)
    }

    /// Exact tuple; float entries convert to their exact binary value.
    pub fn to_rational_tuple(&self) -> Result<RationalTuple> {
        self.check_shape()?;
        let mats = self
            .mats
            .iter()
            .map(|rows| {
                let data = rows
                    .iter()
                    .map(|row| row.iter().map(Entry::to_rational).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                RatMatrix::from_rows(data)
            })
            .collect::<Result<Vec<_>>>()?;
        RationalTuple::new(mats)
    }

    pub fn from_sym_tuple(x: &SymTuple) -> Self {
        Self {
            g: x.g(),
            n: x.n(),
            mode: Mode::Float,
            mats: x.mats().iter().map(float_rows).collect(),
            inhomogeneous: None,
        }
    }

    pub fn from_hom_tuple(h: &HomTuple) -> Self {
        let mut doc = Self::from_sym_tuple(h.rest());
        doc.inhomogeneous = Some(float_rows(h.inhomogeneous()));
        doc
    }

    pub fn from_rational_tuple(x: &RationalTuple) -> Self {
        Self {
            g: x.g(),
            n: x.n(),
            mode: Mode::Rational,
            mats: x
                .mats()
                .iter()
                .map(|m| {
                    (0..m.rows())
                        .map(|r| m.row(r).iter().map(|q| Entry::Text(format_rational(q))).collect())
                        .collect()
                })
                .collect(),
            inhomogeneous: None,
        }
    }
}

fn float_rows(m: &DMatrix<f64>) -> Rows {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| Entry::Number(m[(r, c)])).collect())
        .collect()
}

pub fn read_sym_tuple(path: impl AsRef<Path>) -> Result<SymTuple> {
    TupleDocument::read(path)?.to_sym_tuple()
}

pub fn read_rational_tuple(path: impl AsRef<Path>) -> Result<RationalTuple> {
    TupleDocument::read(path)?.to_rational_tuple()
}
