//! Sampling model curves on a grid, with CSV and SVG rendering, including
//! the twelve growth-curve figure configurations.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::models::{Input, ModelDef, ModelId, ParamVector};

/// Evenly spaced grid `lo..=hi` with `n` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            lo: 0.01,
            hi: 10.0,
            n: 500,
        }
    }
}

impl Grid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!("grid needs lo < hi, got {lo}:{hi}")));
        }
        if n < 2 {
            return Err(Error::invalid("grid needs at least 2 points"));
        }
        Ok(Grid { lo, hi, n })
    }

    pub fn points(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                if i + 1 == self.n {
                    self.hi
                } else {
                    self.lo + step * i as f64
                }
            })
            .collect()
    }
}

impl std::str::FromStr for Grid {
    type Err = Error;

    /// `lo:hi:n`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(Error::invalid(format!("grid `{s}` is not of the form lo:hi:n")));
        };
        let num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("grid bound `{v}` is not a number")))
        };
        let n = n
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::invalid(format!("grid size `{n}` is not a positive integer")))?;
        Grid::new(num(lo)?, num(hi)?, n)
    }
}

/// One figure: a title and the models drawn on a shared grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Figure {
    pub id: &'static str,
    pub title: &'static str,
    pub models: &'static [ModelId],
}

pub const FIGURES: [Figure; 12] = [
    Figure { id: "B.1", title: "Gompertz", models: &[ModelId::Gompertz] },
    Figure { id: "B.2", title: "Janoschek", models: &[ModelId::Janoschek] },
    Figure { id: "B.3", title: "Logistic", models: &[ModelId::Logistic] },
    Figure { id: "B.4", title: "Bertalanffy", models: &[ModelId::Bertalanffy] },
    Figure {
        id: "B.5",
        title: "Janoschek and Bertalanffy",
        models: &[ModelId::Janoschek, ModelId::Bertalanffy],
    },
    Figure { id: "B.6", title: "tanh", models: &[ModelId::Tanh] },
    Figure { id: "B.7", title: "3-tanh", models: &[ModelId::Tanh3] },
    Figure { id: "B.8", title: "4-tanh", models: &[ModelId::Tanh4] },
    Figure {
        id: "B.9",
        title: "tanh, 3-tanh and 4-tanh",
        models: &[ModelId::Tanh, ModelId::Tanh3, ModelId::Tanh4],
    },
    Figure {
        id: "B.10",
        title: "exponential and reparametrized exponential time-power",
        models: &[ModelId::ExpTimePower, ModelId::ExpTimePowerRepar],
    },
    Figure { id: "B.11", title: "reconstructed Weibull", models: &[ModelId::WeibullReconstructed] },
    Figure {
        id: "B.12",
        title: "generalized logistic, cases i and ii",
        models: &[ModelId::GenLogisticI, ModelId::GenLogisticIi],
    },
];

/// Looks up `B.5`, `b5` or `5`.
pub fn figure(id: &str) -> Result<&'static Figure> {
    let key = id.trim().trim_start_matches(['B', 'b']).trim_start_matches('.');
    FIGURES
        .iter()
        .find(|f| f.id[2..] == *key)
        .ok_or_else(|| Error::invalid(format!("unknown figure `{id}`; figures are B.1 to B.12")))
}

/// One model's curve specification.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    pub model: &'static ModelDef,
    pub theta: ParamVector,
    /// Second input for two-input models.
    pub u2: f64,
}

impl CurveSpec {
    /// All parameters 1 (multistage gets two coefficients).
    pub fn unit(model: &'static ModelDef) -> Self {
        CurveSpec {
            model,
            theta: ParamVector::ones(model.arity.min()),
            u2: 1.0,
        }
    }

    fn input(&self, u: f64) -> Input {
        if self.model.input_dim == 2 {
            Input::pair(u, self.u2)
        } else {
            Input::scalar(u)
        }
    }
}

/// Curves sampled on a shared grid. `values[k][i]` is model `k` at `u[i]`;
/// `None` where the evaluation is not finite.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSet {
    pub names: Vec<String>,
    pub u: Vec<f64>,
    pub values: Vec<Vec<Option<f64>>>,
    pub warnings: Vec<String>,
}

/// Samples every curve. Grid points outside any model's input domain are
/// dropped with a warning.
pub fn sample(specs: &[CurveSpec], grid: Grid) -> Result<CurveSet> {
    if specs.is_empty() {
        return Err(Error::invalid("no models to sample"));
    }
    for s in specs {
        s.model.check_theta(&s.theta)?;
    }
    let mut warnings = Vec::new();
    let all = grid.points();
    let u: Vec<f64> = all
        .iter()
        .copied()
        .filter(|&u| specs.iter().all(|s| s.model.check_input(s.input(u)).is_ok()))
        .collect();
    if u.len() < all.len() {
        warnings.push(format!(
            "{} grid points outside the model domain were clipped",
            all.len() - u.len()
        ));
    }
    if u.is_empty() {
        return Err(Error::invalid("no grid point lies inside the model domain"));
    }
    let mut values = Vec::with_capacity(specs.len());
    for s in specs {
        let col: Vec<Option<f64>> = u
            .iter()
            .map(|&x| s.model.evaluate(s.input(x), &s.theta).ok())
            .collect();
        let missing = col.iter().filter(|v| v.is_none()).count();
        if missing > 0 {
            warnings.push(format!(
                "{}: {missing} points are not finite and were left empty",
                s.model.id_str
            ));
        }
        values.push(col);
    }
    Ok(CurveSet {
        names: specs.iter().map(|s| s.model.id_str.to_string()).collect(),
        u,
        values,
        warnings,
    })
}

impl CurveSet {
    /// `u,<model>,…` rows in grid order; empty fields for missing values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (i, u) in self.u.iter().enumerate() {
            write!(out, "{u}").unwrap();
            for col in &self.values {
                out.push(',');
                if let Some(v) = col[i] {
                    write!(out, "{v}").unwrap();
                }
            }
            out.push('\n');
        }
        out
    }

    /// Static SVG with axes and one polyline per model.
    pub fn to_svg(&self, title: &str) -> String {
        const W: f64 = 640.0;
        const H: f64 = 400.0;
        const M: f64 = 40.0;
        const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
        let finite = self.values.iter().flatten().flatten().copied();
        let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            (lo, hi) = (lo - 0.5, hi + 0.5);
        }
        let (u0, u1) = (self.u[0], self.u[self.u.len() - 1]);
        let du = if u1 > u0 { u1 - u0 } else { 1.0 };
        let px = |u: f64| M + (u - u0) / du * (W - 2.0 * M);
        let py = |v: f64| H - M - (v - lo) / (hi - lo) * (H - 2.0 * M);
        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        )
        .unwrap();
        writeln!(s, r#"<title>{}</title>"#, escape(title)).unwrap();
        writeln!(
            s,
            r#"<line x1="{M}" y1="{y}" x2="{x}" y2="{y}" stroke="black"/>"#,
            y = H - M,
            x = W - M
        )
        .unwrap();
        writeln!(
            s,
            r#"<line x1="{M}" y1="{M}" x2="{M}" y2="{y}" stroke="black"/>"#,
            y = H - M
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{M}" y="{y}" font-size="11">{u0}</text><text x="{x}" y="{y}" font-size="11" text-anchor="end">{u1}</text>"#,
            y = H - M + 15.0,
            x = W - M
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{x}" y="{y0}" font-size="11" text-anchor="end">{lo:.4}</text><text x="{x}" y="{y1}" font-size="11" text-anchor="end">{hi:.4}</text>"#,
            x = M - 4.0,
            y0 = H - M,
            y1 = M + 4.0
        )
        .unwrap();
        for (k, (name, col)) in self.names.iter().zip(&self.values).enumerate() {
            let color = COLORS[k % COLORS.len()];
            // Break the line where values are missing.
            let mut segment = Vec::new();
            let flush = |seg: &mut Vec<String>, s: &mut String| {
                if seg.len() > 1 {
                    writeln!(
                        s,
                        r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                        seg.join(" ")
                    )
                    .unwrap();
                }
                seg.clear();
            };
            for (u, v) in self.u.iter().zip(col) {
                match v {
                    Some(v) => segment.push(format!("{:.2},{:.2}", px(*u), py(*v))),
                    None => flush(&mut segment, &mut s),
                }
            }
            flush(&mut segment, &mut s);
            writeln!(
                s,
                r#"<text x="{x}" y="{y}" font-size="12" fill="{color}">{}</text>"#,
                escape(name),
                x = W - M - 150.0,
                y = M + 14.0 * (k as f64 + 1.0)
            )
            .unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
