//! Dense two-phase tableau simplex for `min c·x, A x = b, x ≥ 0`.
//!
//! Sized for the small dual-certificate LPs: a few thousand columns and at
//! most ~1000 rows. Dantzig pricing, falling back to Bland's rule during long
//! degenerate stretches.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 50;

pub(crate) struct StandardLp {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows × cols`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

pub(crate) struct LpSolution {
    /// Row multipliers `y` with `Aᵀy ≤ c` at optimality.
    pub duals: Vec<f64>,
    pub objective: f64,
    /// Basic column per row; values `≥ cols` denote artificials.
    pub basis: Vec<usize>,
}

struct Tableau {
    rows: usize,
    cols: usize,
    width: usize,
    t: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    scratch: Vec<usize>,
}

impl Tableau {
    fn rhs(&self) -> usize {
        self.width - 1
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.t[r * w + c];
        {
            let row = &mut self.t[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[c] = 1.0;
        }
        self.scratch.clear();
        for j in 0..w {
            if self.t[r * w + j] != 0.0 {
                self.scratch.push(j);
            }
        }
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.t[i * w + c];
            if f == 0.0 {
                continue;
            }
            for &j in &self.scratch {
                let v = self.t[r * w + j];
                self.t[i * w + j] -= f * v;
            }
            self.t[i * w + c] = 0.0;
        }
        let f = self.obj[c];
        if f != 0.0 {
            for &j in &self.scratch {
                self.obj[j] -= f * self.t[r * w + j];
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations over columns `0..self.cols` until no reduced
    /// cost is below `-cost_tol`.
    fn optimize(&mut self, cost_tol: f64, max_iter: usize) -> Result<()> {
        let rhs = self.rhs();
        let mut streak = 0usize;
        for _ in 0..max_iter {
            let bland = streak >= DEGENERATE_STREAK;
            let mut enter = usize::MAX;
            let mut best = -cost_tol;
            for j in 0..self.cols {
                let r = self.obj[j];
                if r < best {
                    enter = j;
                    if bland {
                        break;
                    }
                    best = r;
                }
            }
            if enter == usize::MAX {
                return Ok(());
            }

            let mut leave = usize::MAX;
            let mut ratio = f64::INFINITY;
            for i in 0..self.rows {
                let a = self.at(i, enter);
                if a > PIVOT_TOL {
                    let q = self.at(i, rhs).max(0.0) / a;
                    if leave == usize::MAX || q < ratio || (q == ratio && self.basis[i] < self.basis[leave]) {
                        ratio = q;
                        leave = i;
                    }
                }
            }
            if leave == usize::MAX {
                return Err(Error::Solver("linear program is unbounded".into()));
            }
            streak = if ratio == 0.0 { streak + 1 } else { 0 };
            self.pivot(leave, enter);
        }
        Err(Error::Solver(format!(
            "simplex did not converge within {max_iter} iterations"
        )))
    }
}

pub(crate) fn solve(lp: &StandardLp) -> Result<LpSolution> {
    let (m, n) = (lp.rows, lp.cols);
    assert_eq!(lp.a.len(), m * n);
    let width = n + m + 1;
    let mut t = vec![0.0; m * width];
    let mut sign = vec![1.0; m];
    for i in 0..m {
        sign[i] = if lp.b[i] < 0.0 { -1.0 } else { 1.0 };
        let row = &mut t[i * width..(i + 1) * width];
        for j in 0..n {
            row[j] = sign[i] * lp.a[i * n + j];
        }
        row[n + i] = 1.0;
        row[width - 1] = sign[i] * lp.b[i];
    }

    // Phase I: minimise the sum of artificials.
    let mut obj = vec![0.0; width];
    for i in 0..m {
        for j in 0..n {
            obj[j] -= t[i * width + j];
        }
        obj[width - 1] -= t[i * width + width - 1];
    }
    let mut tab = Tableau {
        rows: m,
        cols: n,
        width,
        t,
        obj,
        basis: (n..n + m).collect(),
        scratch: Vec::with_capacity(width),
    };
    let max_iter = 50 * (m + n) + 1000;
    tab.optimize(1e-12, max_iter)?;

    let b_scale = lp.b.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
    let infeasibility = -tab.obj[width - 1];
    if infeasibility > 1e-9 * b_scale {
        return Err(Error::Solver(format!(
            "linear program is infeasible (phase one residual {infeasibility:e})"
        )));
    }

    // Pivot remaining artificials out of the basis where possible.
    for i in 0..m {
        if tab.basis[i] >= n {
            let mut best = usize::MAX;
            let mut mag = PIVOT_TOL;
            for j in 0..n {
                let a = tab.at(i, j).abs();
                if a > mag {
                    mag = a;
                    best = j;
                }
            }
            if best != usize::MAX {
                tab.pivot(i, best);
            }
        }
    }

    // Phase II with the true costs; artificials may no longer enter.
    let mut obj = vec![0.0; width];
    obj[..n].copy_from_slice(&lp.c);
    for i in 0..m {
        let bc = tab.basis[i];
        let cb = if bc < n { lp.c[bc] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..width {
                obj[j] -= cb * tab.at(i, j);
            }
        }
    }
    tab.obj = obj;
    let c_scale = lp.c.iter().fold(1.0_f64, |s, v| s.max(v.abs()));
    tab.optimize(1e-11 * c_scale, max_iter)?;

    let mut x = vec![0.0; n];
    for i in 0..m {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.at(i, width - 1);
        }
    }
    let duals = (0..m).map(|i| -sign[i] * tab.obj[n + i]).collect();
    let objective = lp.c.iter().zip(&x).map(|(c, x)| c * x).sum();
    Ok(LpSolution {
        duals,
        objective,
        basis: tab.basis,
    })
}
