//! Polyptychs and the search for a universal table whose marginals restore
//! every member table.

use serde::{Deserialize, Serialize, Serializer};

use super::simplex::{phase_one, Feasibility, Optimum};
use super::{totals_equal, CategoryAttribute, SummaryTable, SummaryVariable, VariableType};
use crate::error::{Error, Result};

/// Cap on the product of the universal scheme's domain sizes.
pub const MAX_UNIVERSAL_CELLS: usize = 1_000_000;
/// Cap on the dense constraint matrix.
const MAX_DENSE_ENTRIES: usize = 50_000_000;
/// Cap on the universal size for integer enumeration.
const MAX_ENUMERATION_CELLS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Polyptych {
    attributes: Vec<CategoryAttribute>,
    tables: Vec<SummaryTable>,
    /// Flat universal indices known to be impossible.
    structural_zeros: Vec<usize>,
    /// For each table, universal flat index → table flat index.
    maps: Vec<Vec<usize>>,
}

impl Polyptych {
    /// The universal scheme is the union of the member schemes in order of
    /// first appearance. Attributes sharing a name must share a domain.
    pub fn new<C: AsRef<str>>(
        tables: Vec<SummaryTable>,
        structural_zeros: &[Vec<C>],
    ) -> Result<Self> {
        let mut attributes: Vec<CategoryAttribute> = Vec::new();
        for t in &tables {
            for a in t.scheme() {
                match attributes.iter().find(|u| u.name == a.name) {
                    Some(u) if u.domain != a.domain => {
                        return Err(Error::invalid(format!(
                            "attribute `{}` has different domains across tables",
                            a.name
                        )))
                    }
                    Some(_) => {}
                    None => attributes.push(a.clone()),
                }
            }
        }
        Self::with_attributes(attributes, tables, structural_zeros)
    }

    /// Builds a polyptych over an explicit universal scheme.
    pub fn with_attributes<C: AsRef<str>>(
        attributes: Vec<CategoryAttribute>,
        tables: Vec<SummaryTable>,
        structural_zeros: &[Vec<C>],
    ) -> Result<Self> {
        if tables.is_empty() {
            return Err(Error::invalid("a polyptych needs at least one table"));
        }
        let first = tables[0].variable();
        if let Some(t) = tables.iter().find(|t| t.variable() != first) {
            return Err(Error::invalid(format!(
                "tables summarize different variables: `{}` ({:?}) vs `{}` ({:?})",
                first.name,
                first.ty,
                t.variable().name,
                t.variable().ty
            )));
        }
        let size = attributes
            .iter()
            .try_fold(1usize, |acc, a| acc.checked_mul(a.domain.len()))
            .filter(|s| *s <= MAX_UNIVERSAL_CELLS)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "universal scheme exceeds {MAX_UNIVERSAL_CELLS} cells ({})",
                    attributes
                        .iter()
                        .map(|a| a.domain.len().to_string())
                        .collect::<Vec<_>>()
                        .join(" x ")
                ))
            })?;
        let universal = SummaryTable::from_dense(
            attributes.clone(),
            first.clone(),
            vec![0.0; size],
        )?;

        let mut maps = Vec::with_capacity(tables.len());
        for t in &tables {
            let pos: Vec<usize> = t
                .scheme()
                .iter()
                .map(|a| {
                    attributes
                        .iter()
                        .position(|u| u.name == a.name && u.domain == a.domain)
                        .ok_or_else(|| {
                            Error::invalid(format!(
                                "attribute `{}` is missing from the universal scheme",
                                a.name
                            ))
                        })
                })
                .collect::<Result<_>>()?;
            let map = (0..size)
                .map(|u| {
                    let c = universal.coords_of(u);
                    pos.iter()
                        .zip(t.scheme())
                        .fold(0, |acc, (&k, a)| acc * a.domain.len() + c[k])
                })
                .collect();
            maps.push(map);
        }
        let mut zeros: Vec<usize> = structural_zeros
            .iter()
            .map(|z| universal.index_of(z))
            .collect::<Result<_>>()?;
        zeros.sort_unstable();
        zeros.dedup();
        Ok(Polyptych {
            attributes,
            tables,
            structural_zeros: zeros,
            maps,
        })
    }

    pub fn attributes(&self) -> &[CategoryAttribute] {
        &self.attributes
    }

    pub fn tables(&self) -> &[SummaryTable] {
        &self.tables
    }

    pub fn variable(&self) -> &SummaryVariable {
        self.tables[0].variable()
    }

    pub fn universal_size(&self) -> usize {
        self.maps[0].len()
    }

    fn empty_universal(&self) -> SummaryTable {
        SummaryTable::from_dense(
            self.attributes.clone(),
            self.variable().clone(),
            vec![0.0; self.universal_size()],
        )
        .expect("validated at construction")
    }

    fn is_structural(&self, u: usize) -> bool {
        self.structural_zeros.binary_search(&u).is_ok()
    }

    /// Parses the JSON exchange format. Codes may be strings or numbers.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawPolyptych = serde_json::from_str(text)?;
        let attributes: Vec<CategoryAttribute> = raw
            .attributes
            .into_iter()
            .map(|a| {
                let domain = a.domain.iter().map(code_string).collect::<Result<_>>()?;
                CategoryAttribute::new(a.name, domain)
            })
            .collect::<Result<_>>()?;
        let tables = raw
            .tables
            .into_iter()
            .map(|t| {
                let scheme = t
                    .scheme
                    .iter()
                    .map(|n| {
                        attributes
                            .iter()
                            .find(|a| &a.name == n)
                            .cloned()
                            .ok_or_else(|| Error::invalid(format!("unknown attribute `{n}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let entries = t
                    .cells
                    .iter()
                    .map(|c| {
                        let codes = c.coords.iter().map(code_string).collect::<Result<Vec<_>>>()?;
                        Ok((codes, c.value))
                    })
                    .collect::<Result<Vec<_>>>()?;
                SummaryTable::from_cells(scheme, raw.variable.clone(), entries)
            })
            .collect::<Result<Vec<_>>>()?;
        let zeros = raw
            .structural_zeros
            .iter()
            .map(|z| z.iter().map(code_string).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::with_attributes(attributes, tables, &zeros)
    }

    /// The linear system: one equality per member-table cell over the
    /// non-structural universal cells.
    fn system(&self) -> Result<(Vec<usize>, Vec<f64>, Vec<f64>, Vec<(usize, usize)>)> {
        let vars: Vec<usize> = (0..self.universal_size())
            .filter(|&u| !self.is_structural(u))
            .collect();
        let m: usize = self.tables.iter().map(|t| t.cells().len()).sum();
        if m.saturating_mul(vars.len()) > MAX_DENSE_ENTRIES {
            return Err(Error::invalid(format!(
                "constraint system {m} x {} exceeds the dense size cap",
                vars.len()
            )));
        }
        let n = vars.len();
        let mut a = vec![0.0; m * n];
        let mut b = Vec::with_capacity(m);
        let mut labels = Vec::with_capacity(m);
        let mut offset = 0;
        for (ti, t) in self.tables.iter().enumerate() {
            for (ci, v) in t.cells().iter().enumerate() {
                b.push(*v);
                labels.push((ti, ci));
            }
            for (j, &u) in vars.iter().enumerate() {
                a[(offset + self.maps[ti][u]) * n + j] = 1.0;
            }
            offset += t.cells().len();
        }
        Ok((vars, a, b, labels))
    }

    fn describe_cell(&self, table: usize, cell: usize) -> String {
        let t = &self.tables[table];
        let codes: Vec<String> = t
            .coords_of(cell)
            .iter()
            .zip(t.scheme())
            .map(|(&k, a)| format!("{}={}", a.name, a.domain[k]))
            .collect();
        format!("table {} cell ({}) = {}", table + 1, codes.join(", "), t.cells()[cell])
    }
}

fn code_string(v: &serde_json::Value) -> Result<String> {
    match v {
        serde_json::Value::String(s) => Ok(s.clone()),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        other => Err(Error::Parse(format!("category code must be a string or number, got {other}"))),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolyptych {
    attributes: Vec<RawAttribute>,
    variable: SummaryVariable,
    tables: Vec<RawTable>,
    #[serde(default)]
    structural_zeros: Vec<Vec<serde_json::Value>>,
}

#[derive(Deserialize)]
struct RawAttribute {
    name: String,
    domain: Vec<serde_json::Value>,
}

#[derive(Deserialize)]
struct RawTable {
    scheme: Vec<String>,
    #[serde(default)]
    cells: Vec<RawCell>,
}

#[derive(Deserialize)]
struct RawCell {
    coords: Vec<serde_json::Value>,
    value: f64,
}

/// Either a witness universal table or a description of what fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyVerdict {
    pub consistent: bool,
    #[serde(serialize_with = "witness_json")]
    pub witness: Option<SummaryTable>,
    pub certificate: Option<String>,
}

fn witness_json<S: Serializer>(
    w: &Option<SummaryTable>,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    w.as_ref().map(|t| t.to_json()).serialize(ser)
}

impl ConsistencyVerdict {
    fn inconsistent(certificate: String) -> Self {
        ConsistencyVerdict {
            consistent: false,
            witness: None,
            certificate: Some(certificate),
        }
    }
}

/// Decides whether some nonnegative universal table, zero on the structural
/// zeros, has every member table as its marginal.
///
/// Feasibility is over the reals. For integer variables the witness is
/// rounded only when every entry is within 1e-9 of an integer; otherwise it
/// is reported with the nonnegative-real type.
pub fn check_consistency(p: &Polyptych) -> Result<ConsistencyVerdict> {
    let totals: Vec<f64> = p.tables.iter().map(|t| t.grand_total()).collect();
    for i in 1..totals.len() {
        if !totals_equal(totals[0], totals[i]) {
            return Ok(ConsistencyVerdict::inconsistent(format!(
                "grand totals differ: table 1 sums to {}, table {} sums to {}",
                totals[0],
                i + 1,
                totals[i]
            )));
        }
    }
    let (vars, a, b, labels) = p.system()?;
    match phase_one(&a, &b, vars.len()) {
        Feasibility::Infeasible { rows, residual } => {
            let cells: Vec<String> = rows
                .iter()
                .map(|&r| p.describe_cell(labels[r].0, labels[r].1))
                .collect();
            Ok(ConsistencyVerdict::inconsistent(format!(
                "no nonnegative universal table meets these marginal constraints \
                 (total shortfall {residual}): {}",
                cells.join("; ")
            )))
        }
        Feasibility::Feasible(tab) => {
            let x = tab.solution();
            let mut cells = vec![0.0; p.universal_size()];
            for (j, &u) in vars.iter().enumerate() {
                cells[u] = x[j];
            }
            Ok(ConsistencyVerdict {
                consistent: true,
                witness: Some(witness_table(p, cells)?),
                certificate: None,
            })
        }
    }
}

fn witness_table(p: &Polyptych, mut cells: Vec<f64>) -> Result<SummaryTable> {
    let mut variable = p.variable().clone();
    let integral = cells.iter().all(|v| (v - v.round()).abs() < 1e-9);
    if variable.ty.is_integer() && integral {
        for v in &mut cells {
            *v = v.round();
        }
    } else {
        variable.ty = VariableType::NonnegReal;
    }
    SummaryTable::from_dense(p.attributes.clone(), variable, cells)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EmptyClass {
    Structural,
    Accidental,
    Occupied,
}

/// Structural if listed as a structural zero; accidental if the constraint
/// system forces the cell to 0 (its LP maximum is 0); occupied otherwise.
pub fn classify_empty<C: AsRef<str>>(p: &Polyptych, codes: &[C]) -> Result<EmptyClass> {
    let u = p.empty_universal().index_of(codes)?;
    if p.is_structural(u) {
        return Ok(EmptyClass::Structural);
    }
    let verdict = check_consistency(p)?;
    if !verdict.consistent {
        return Err(Error::invalid(format!(
            "polyptych is inconsistent: {}",
            verdict.certificate.unwrap_or_default()
        )));
    }
    let scale = p.tables[0].grand_total().abs().max(1.0);
    let tol = 1e-9 * scale;
    if verdict.witness.is_some_and(|w| w.cells()[u] > tol) {
        return Ok(EmptyClass::Occupied);
    }
    let (vars, a, b, _) = p.system()?;
    let j = vars.iter().position(|&v| v == u).expect("non-structural cell");
    let Feasibility::Feasible(tab) = phase_one(&a, &b, vars.len()) else {
        unreachable!("feasibility established above");
    };
    let mut c = vec![0.0; vars.len()];
    c[j] = -1.0;
    match tab.minimize(&c) {
        Optimum::Bounded { value, .. } if -value <= tol => Ok(EmptyClass::Accidental),
        _ => Ok(EmptyClass::Occupied),
    }
}

/// Exact search for an integer universal table. Needs integer-valued member
/// tables and at most 10⁴ universal cells. Returns `Ok(None)` when no
/// integer table exists; fails when `node_limit` search nodes are exceeded.
pub fn integer_witness(p: &Polyptych, node_limit: u64) -> Result<Option<SummaryTable>> {
    let size = p.universal_size();
    if size > MAX_ENUMERATION_CELLS {
        return Err(Error::invalid(format!(
            "integer enumeration is limited to {MAX_ENUMERATION_CELLS} universal cells, got {size}"
        )));
    }
    let mut remaining: Vec<Vec<i64>> = Vec::with_capacity(p.tables.len());
    for t in &p.tables {
        let mut r = Vec::with_capacity(t.cells().len());
        for &v in t.cells() {
            if v.fract() != 0.0 || v < 0.0 {
                return Ok(None);
            }
            r.push(v as i64);
        }
        remaining.push(r);
    }
    let mut left: Vec<Vec<usize>> = p.tables.iter().map(|t| vec![0; t.cells().len()]).collect();
    for u in (0..size).filter(|&u| !p.is_structural(u)) {
        for (ti, map) in p.maps.iter().enumerate() {
            left[ti][map[u]] += 1;
        }
    }
    // A table cell with no free universal cell must already be zero.
    if remaining
        .iter()
        .zip(&left)
        .any(|(r, l)| r.iter().zip(l).any(|(&v, &n)| n == 0 && v != 0))
    {
        return Ok(None);
    }
    let free: Vec<usize> = (0..size).filter(|&u| !p.is_structural(u)).collect();
    let mut search = Search {
        p,
        free: &free,
        remaining,
        left,
        cells: vec![0i64; size],
        nodes: 0,
        node_limit,
    };
    match search.dfs(0) {
        Some(true) => {
            let cells = search.cells.iter().map(|&v| v as f64).collect();
            Ok(Some(witness_table(p, cells)?))
        }
        Some(false) => Ok(None),
        None => Err(Error::NonConvergence {
            iterations: node_limit as usize,
            reason: "integer enumeration exceeded its node budget".into(),
        }),
    }
}

struct Search<'a> {
    p: &'a Polyptych,
    free: &'a [usize],
    remaining: Vec<Vec<i64>>,
    left: Vec<Vec<usize>>,
    cells: Vec<i64>,
    nodes: u64,
    node_limit: u64,
}

impl Search<'_> {
    /// `Some(found)`, or `None` once the node budget is spent.
    fn dfs(&mut self, k: usize) -> Option<bool> {
        if k == self.free.len() {
            return Some(true);
        }
        self.nodes += 1;
        if self.nodes > self.node_limit {
            return None;
        }
        let u = self.free[k];
        let mut hi = i64::MAX;
        let mut forced: Option<i64> = None;
        for (ti, map) in self.p.maps.iter().enumerate() {
            let c = map[u];
            let r = self.remaining[ti][c];
            hi = hi.min(r);
            if self.left[ti][c] == 1 {
                match forced {
                    Some(f) if f != r => return Some(false),
                    _ => forced = Some(r),
                }
            }
        }
        let range = match forced {
            Some(f) if f <= hi => f..=f,
            Some(_) => return Some(false),
            None => 0..=hi,
        };
        for v in range {
            for (ti, map) in self.p.maps.iter().enumerate() {
                self.remaining[ti][map[u]] -= v;
                self.left[ti][map[u]] -= 1;
            }
            self.cells[u] = v;
            let found = self.dfs(k + 1);
            for (ti, map) in self.p.maps.iter().enumerate() {
                self.remaining[ti][map[u]] += v;
                self.left[ti][map[u]] += 1;
            }
            match found {
                Some(false) => {}
                other => return other,
            }
        }
        self.cells[u] = 0;
        Some(false)
    }
}
