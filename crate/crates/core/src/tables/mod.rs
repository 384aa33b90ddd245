//! Summary tables over category schemes, their marginals, and consistency
//! of polyptychs (collections of tables over one population).

mod polyptych;
mod simplex;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use polyptych::{
    check_consistency, classify_empty, integer_witness, ConsistencyVerdict, EmptyClass, Polyptych,
    MAX_UNIVERSAL_CELLS,
};

/// Largest admissible attribute domain.
pub const MAX_DOMAIN: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryAttribute {
    pub name: String,
    pub domain: Vec<String>,
}

impl CategoryAttribute {
    pub fn new(name: impl Into<String>, domain: Vec<String>) -> Result<Self> {
        let name = name.into();
        if domain.is_empty() || domain.len() > MAX_DOMAIN {
            return Err(Error::invalid(format!(
                "attribute `{name}` needs 1..={MAX_DOMAIN} codes, got {}",
                domain.len()
            )));
        }
        let mut seen = HashSet::new();
        for c in &domain {
            if !seen.insert(c) {
                return Err(Error::invalid(format!(
                    "attribute `{name}` repeats code `{c}`"
                )));
            }
        }
        Ok(CategoryAttribute { name, domain })
    }

    /// Attribute with codes `"0"`, `"1"`, … .
    pub fn indexed(name: impl Into<String>, size: usize) -> Result<Self> {
        Self::new(name, (0..size).map(|i| i.to_string()).collect())
    }

    pub fn code_index(&self, code: &str) -> Option<usize> {
        self.domain.iter().position(|c| c == code)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VariableType {
    #[serde(rename = "real")]
    Real,
    #[serde(rename = "integer")]
    Integer,
    #[serde(rename = "nonneg-real")]
    NonnegReal,
    #[serde(rename = "nonneg-integer")]
    NonnegInteger,
}

impl VariableType {
    pub fn admits(self, v: f64) -> bool {
        if !v.is_finite() {
            return false;
        }
        let int_ok = !self.is_integer() || v.fract() == 0.0;
        let sign_ok = !matches!(self, VariableType::NonnegReal | VariableType::NonnegInteger)
            || v >= 0.0;
        int_ok && sign_ok
    }

    pub fn is_integer(self) -> bool {
        matches!(self, VariableType::Integer | VariableType::NonnegInteger)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryVariable {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: VariableType,
}

/// Dense table over the Cartesian product of its scheme, row-major with the
/// last attribute varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    scheme: Vec<CategoryAttribute>,
    variable: SummaryVariable,
    cells: Vec<f64>,
}

fn cell_count(scheme: &[CategoryAttribute]) -> Option<usize> {
    scheme
        .iter()
        .try_fold(1usize, |acc, a| acc.checked_mul(a.domain.len()))
}

impl SummaryTable {
    /// Builds a table from its dense cell vector.
    pub fn from_dense(
        scheme: Vec<CategoryAttribute>,
        variable: SummaryVariable,
        cells: Vec<f64>,
    ) -> Result<Self> {
        let mut names = HashSet::new();
        for a in &scheme {
            if !names.insert(&a.name) {
                return Err(Error::invalid(format!(
                    "attribute `{}` appears twice in a scheme",
                    a.name
                )));
            }
        }
        let size = cell_count(&scheme)
            .ok_or_else(|| Error::invalid("table size overflows"))?;
        if cells.len() != size {
            return Err(Error::Dimension(format!(
                "scheme has {size} cells, got {} values",
                cells.len()
            )));
        }
        if let Some(v) = cells.iter().find(|v| !variable.ty.admits(**v)) {
            return Err(Error::invalid(format!(
                "value {v} does not conform to variable type {:?}",
                variable.ty
            )));
        }
        Ok(SummaryTable {
            scheme,
            variable,
            cells,
        })
    }

    /// Builds a table from sparse `(codes, value)` entries; missing cells
    /// are 0 and repeated coordinates are rejected.
    pub fn from_cells<C: AsRef<str>>(
        scheme: Vec<CategoryAttribute>,
        variable: SummaryVariable,
        entries: impl IntoIterator<Item = (Vec<C>, f64)>,
    ) -> Result<Self> {
        let size = cell_count(&scheme)
            .ok_or_else(|| Error::invalid("table size overflows"))?;
        let mut cells = vec![0.0; size];
        let mut seen = HashSet::new();
        let probe = SummaryTable {
            scheme,
            variable,
            cells: Vec::new(),
        };
        for (codes, v) in entries {
            let idx = probe.index_of(&codes)?;
            if !seen.insert(idx) {
                return Err(Error::invalid(format!(
                    "cell {:?} given twice",
                    codes.iter().map(|c| c.as_ref()).collect::<Vec<_>>()
                )));
            }
            cells[idx] = v;
        }
        Self::from_dense(probe.scheme, probe.variable, cells)
    }

    pub fn scheme(&self) -> &[CategoryAttribute] {
        &self.scheme
    }

    pub fn variable(&self) -> &SummaryVariable {
        &self.variable
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn shape(&self) -> Vec<usize> {
        self.scheme.iter().map(|a| a.domain.len()).collect()
    }

    pub fn attribute_names(&self) -> Vec<&str> {
        self.scheme.iter().map(|a| a.name.as_str()).collect()
    }

    pub fn grand_total(&self) -> f64 {
        self.cells.iter().sum()
    }

    /// Flat index of a code tuple.
    pub fn index_of<C: AsRef<str>>(&self, codes: &[C]) -> Result<usize> {
        if codes.len() != self.scheme.len() {
            return Err(Error::Dimension(format!(
                "scheme has {} attributes, coordinates have {}",
                self.scheme.len(),
                codes.len()
            )));
        }
        let mut idx = 0;
        for (a, c) in self.scheme.iter().zip(codes) {
            let i = a.code_index(c.as_ref()).ok_or_else(|| {
                Error::invalid(format!(
                    "code `{}` is not in the domain of `{}`",
                    c.as_ref(),
                    a.name
                ))
            })?;
            idx = idx * a.domain.len() + i;
        }
        Ok(idx)
    }

    /// Per-attribute positions of a flat index.
    pub fn coords_of(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.scheme.len()];
        for (k, a) in self.scheme.iter().enumerate().rev() {
            out[k] = idx % a.domain.len();
            idx /= a.domain.len();
        }
        out
    }

    pub fn get<C: AsRef<str>>(&self, codes: &[C]) -> Result<f64> {
        Ok(self.cells[self.index_of(codes)?])
    }

    /// Sparse JSON form `{"scheme": [...], "cells": [{"coords", "value"}]}`
    /// listing nonzero cells.
    pub fn to_json(&self) -> serde_json::Value {
        let cells: Vec<_> = self
            .cells
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| {
                let coords: Vec<&str> = self
                    .coords_of(i)
                    .iter()
                    .zip(&self.scheme)
                    .map(|(&k, a)| a.domain[k].as_str())
                    .collect();
                serde_json::json!({ "coords": coords, "value": v })
            })
            .collect();
        serde_json::json!({ "scheme": self.attribute_names(), "cells": cells })
    }
}

/// Sums over the attributes not in `keep`. The result lists the kept
/// attributes in scheme order.
pub fn marginal<S: AsRef<str>>(table: &SummaryTable, keep: &[S]) -> Result<SummaryTable> {
    for k in keep {
        if !table.scheme.iter().any(|a| a.name == k.as_ref()) {
            return Err(Error::invalid(format!(
                "attribute `{}` is not in the table's scheme",
                k.as_ref()
            )));
        }
    }
    let kept: Vec<usize> = (0..table.scheme.len())
        .filter(|&i| keep.iter().any(|k| k.as_ref() == table.scheme[i].name))
        .collect();
    let scheme: Vec<CategoryAttribute> = kept.iter().map(|&i| table.scheme[i].clone()).collect();
    let mut cells = vec![0.0; cell_count(&scheme).unwrap_or(1)];
    for (idx, v) in table.cells.iter().enumerate() {
        let coords = table.coords_of(idx);
        let target = kept
            .iter()
            .fold(0, |acc, &i| acc * table.scheme[i].domain.len() + coords[i]);
        cells[target] += v;
    }
    SummaryTable::from_dense(scheme, table.variable.clone(), cells)
}

/// Relative tolerance for comparing grand totals.
const TOTAL_TOL: f64 = 1e-9;

pub(crate) fn totals_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOTAL_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Same summary variable and equal grand totals.
pub fn is_homogeneous(tables: &[SummaryTable]) -> bool {
    let Some(first) = tables.first() else {
        return true;
    };
    let total = first.grand_total();
    tables
        .iter()
        .all(|t| t.variable == first.variable && totals_equal(t.grand_total(), total))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
}

/// Pearson `X² = Σ (O − E)² / E` for a two-way table of counts.
pub fn chi_square_independence(table: &SummaryTable) -> Result<ChiSquare> {
    if table.scheme.len() != 2 {
        return Err(Error::invalid(format!(
            "chi-square needs exactly 2 attributes, table has {}",
            table.scheme.len()
        )));
    }
    if table.variable.ty != VariableType::NonnegInteger {
        return Err(Error::invalid("chi-square needs a nonneg-integer variable"));
    }
    let (r, c) = (table.scheme[0].domain.len(), table.scheme[1].domain.len());
    let rows: Vec<f64> = (0..r).map(|i| table.cells[i * c..(i + 1) * c].iter().sum()).collect();
    let cols: Vec<f64> = (0..c).map(|j| (0..r).map(|i| table.cells[i * c + j]).sum()).collect();
    if rows.iter().chain(&cols).any(|t| *t <= 0.0) {
        return Err(Error::invalid("every row and column total must be positive"));
    }
    let n: f64 = rows.iter().sum();
    let mut x2 = 0.0;
    for i in 0..r {
        for j in 0..c {
            let e = rows[i] * cols[j] / n;
            let d = table.cells[i * c + j] - e;
            x2 += d * d / e;
        }
    }
    Ok(ChiSquare {
        statistic: x2,
        df: (r - 1) * (c - 1),
    })
}
