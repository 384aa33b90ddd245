//! Dense two-phase simplex for `{A x = b, x >= 0}` with Bland's rule.

/// Result of a phase-1 run.
pub(crate) enum Feasibility {
    Feasible(Tableau),
    /// Rows whose artificial variables stay positive at the phase-1 optimum,
    /// with the total infeasibility.
    Infeasible { rows: Vec<usize>, residual: f64 },
}

pub(crate) enum Optimum {
    Bounded { value: f64 },
    Unbounded,
}

pub(crate) struct Tableau {
    m: usize,
    n: usize,
    /// `(m + 1) × (n + m + 1)`, row-major; the last row holds reduced costs
    /// and the last column the right-hand side.
    t: Vec<f64>,
    basis: Vec<usize>,
    /// Rows removed as redundant after phase 1.
    dropped: Vec<bool>,
    eps: f64,
}

impl Tableau {
    fn width(&self) -> usize {
        self.n + self.m + 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width() + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.width() - 1)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width();
        let p = self.at(row, col);
        for c in 0..w {
            self.t[row * w + c] /= p;
        }
        for r in 0..=self.m {
            if r == row {
                continue;
            }
            let f = self.at(r, col);
            if f != 0.0 {
                for c in 0..w {
                    self.t[r * w + c] -= f * self.t[row * w + c];
                }
            }
        }
        self.basis[row] = col;
    }

    /// Runs simplex iterations on the current objective row. Columns at or
    /// beyond `col_limit` never enter.
    fn iterate(&mut self, col_limit: usize) -> bool {
        let obj = self.m;
        let max_iter = 50 * (self.m + self.n + 10);
        for _ in 0..max_iter {
            // Bland: lowest-index improving column.
            let Some(col) = (0..col_limit).find(|&c| self.at(obj, c) < -self.eps) else {
                return true;
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.m {
                if self.dropped[r] {
                    continue;
                }
                let a = self.at(r, col);
                if a > self.eps {
                    let ratio = self.rhs(r) / a;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bv)) => {
                            if ratio < bv - self.eps
                                || (ratio <= bv + self.eps && self.basis[r] < self.basis[br])
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, bv))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = best else {
                return false;
            };
            self.pivot(row, col);
        }
        true
    }

    /// Current values of the structural variables.
    pub(crate) fn solution(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for r in 0..self.m {
            if !self.dropped[r] && self.basis[r] < self.n {
                x[self.basis[r]] = self.rhs(r).max(0.0);
            }
        }
        x
    }

    /// Minimizes `c·x` from the phase-1 basis.
    pub(crate) fn minimize(mut self, c: &[f64]) -> Optimum {
        let w = self.width();
        let obj = self.m;
        for j in 0..w {
            self.t[obj * w + j] = if j < self.n { c[j] } else { 0.0 };
        }
        for r in 0..self.m {
            if self.dropped[r] {
                continue;
            }
            let cb = c[self.basis[r]];
            if cb != 0.0 {
                for j in 0..w {
                    self.t[obj * w + j] -= cb * self.t[r * w + j];
                }
            }
        }
        if !self.iterate(self.n) {
            return Optimum::Unbounded;
        }
        let x = self.solution();
        let value = x.iter().zip(c).map(|(a, b)| a * b).sum();
        Optimum::Bounded { value }
    }
}

/// Phase 1: decides whether `A x = b, x >= 0` is feasible. `a` is `m × n`
/// row-major.
pub(crate) fn phase_one(a: &[f64], b: &[f64], n: usize) -> Feasibility {
    let m = b.len();
    let w = n + m + 1;
    let scale = b.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let eps = 1e-9 * scale.max(1.0) / scale;
    let mut t = vec![0.0; (m + 1) * w];
    for r in 0..m {
        // Normalize each row so its right-hand side is nonnegative.
        let sign = if b[r] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[r * w + j] = sign * a[r * n + j];
        }
        t[r * w + n + r] = 1.0;
        t[r * w + w - 1] = sign * b[r] / scale;
    }
    for j in 0..w {
        if j >= n && j < n + m {
            continue;
        }
        let s: f64 = (0..m).map(|r| t[r * w + j]).sum();
        t[m * w + j] = -s;
    }
    let mut tab = Tableau {
        m,
        n,
        t,
        basis: (n..n + m).collect(),
        dropped: vec![false; m],
        eps: 1e-11,
    };
    tab.iterate(n);
    let residual = -tab.rhs(m);
    if residual > eps {
        let rows = (0..m)
            .filter(|&r| tab.basis[r] >= n && tab.rhs(r) > eps)
            .map(|r| tab.basis[r] - n)
            .collect();
        return Feasibility::Infeasible {
            rows,
            residual: residual * scale,
        };
    }
    // Drive zero-level artificials out of the basis; rows where that is
    // impossible are linear combinations of others.
    for r in 0..m {
        if tab.basis[r] < n {
            continue;
        }
        match (0..n).find(|&j| tab.at(r, j).abs() > 1e-9) {
            Some(j) => tab.pivot(r, j),
            None => tab.dropped[r] = true,
        }
    }
    // Undo the scaling of the right-hand side.
    for r in 0..m {
        tab.t[r * w + w - 1] *= scale;
    }
    tab.eps = 1e-11;
    Feasibility::Feasible(tab)
}
