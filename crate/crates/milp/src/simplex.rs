//! Dense two-phase primal simplex for the LP relaxations of small models.
//!
//! Variables are shifted onto `y >= 0` (fixed ones are substituted out),
//! finite upper bounds become rows, and the tableau is pivoted with Dantzig's
//! rule, falling back to Bland's rule after a run of degenerate pivots.

use crate::model::{Model, Sense};

const EPS: f64 = 1e-9;
const PHASE1_TOL: f64 = 1e-7;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

/// How an original variable maps onto tableau columns.
#[derive(Debug, Clone, Copy)]
enum Map {
    Fixed(f64),
    /// x = offset + sign * y[col]
    Shifted {
        col: usize,
        offset: f64,
        sign: f64,
    },
    /// x = y[pos] - y[neg]
    Free {
        pos: usize,
        neg: usize,
    },
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize, zrow: &mut [f64]) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f.abs() > 0.0 {
                for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        let f = zrow[c];
        if f.abs() > 0.0 {
            for (v, &pv) in zrow.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
        self.basis[r] = c;
    }

    /// Reduced-cost row for maximizing `cost . y`.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.width + 1];
        for j in 0..self.width {
            z[j] = -cost[j];
        }
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (zj, &a) in z.iter_mut().zip(&self.rows[r]) {
                    *zj += cb * a;
                }
            }
        }
        z
    }

    /// Pivots to optimality. Returns false when unbounded.
    fn optimize(&mut self, zrow: &mut [f64], allowed: &[bool]) -> bool {
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate >= DEGENERATE_RUN;
            let mut enter = None;
            let mut best = -EPS;
            for j in 0..self.width {
                if !allowed[j] || zrow[j] >= -EPS {
                    continue;
                }
                if bland {
                    enter = Some(j);
                    break;
                }
                if zrow[j] < best {
                    best = zrow[j];
                    enter = Some(j);
                }
            }
            let Some(e) = enter else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][e];
                if a > EPS {
                    let ratio = self.rhs(r) / a;
                    match leave {
                        None => leave = Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - EPS
                                || (ratio <= lratio + EPS && self.basis[r] < self.basis[lr])
                            {
                                leave = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return false;
            };
            if ratio.abs() <= EPS {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, e, zrow);
        }
    }
}

/// Maximizes the model objective over its LP relaxation with the given bounds.
pub(crate) fn solve_lp(model: &Model, lb: &[f64], ub: &[f64]) -> LpOutcome {
    let n = model.num_vars();
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    // (column, upper bound on y) rows to add
    let mut ub_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (l, u) = (lb[j], ub[j]);
        if l > u + EPS {
            return LpOutcome::Infeasible;
        }
        let m = if l.is_finite() && u.is_finite() && (u - l).abs() <= EPS {
            Map::Fixed(l)
        } else if l.is_finite() {
            let col = ncols;
            ncols += 1;
            if u.is_finite() {
                ub_rows.push((col, u - l));
            }
            Map::Shifted {
                col,
                offset: l,
                sign: 1.0,
            }
        } else if u.is_finite() {
            let col = ncols;
            ncols += 1;
            Map::Shifted {
                col,
                offset: u,
                sign: -1.0,
            }
        } else {
            let pos = ncols;
            ncols += 2;
            Map::Free { pos, neg: pos + 1 }
        };
        maps.push(m);
    }

    // Rows in y-space: (coefficients, sense, rhs).
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::new();
    for c in model.constraints() {
        let mut a = vec![0.0; ncols];
        let mut rhs = c.rhs;
        for &(v, coef) in c.expr.terms() {
            match maps[v.index()] {
                Map::Fixed(val) => rhs -= coef * val,
                Map::Shifted { col, offset, sign } => {
                    rhs -= coef * offset;
                    a[col] += coef * sign;
                }
                Map::Free { pos, neg } => {
                    a[pos] += coef;
                    a[neg] -= coef;
                }
            }
        }
        if a.iter().all(|x| x.abs() <= EPS) {
            let ok = match c.sense {
                Sense::Le => rhs >= -PHASE1_TOL,
                Sense::Ge => rhs <= PHASE1_TOL,
                Sense::Eq => rhs.abs() <= PHASE1_TOL,
            };
            if !ok {
                return LpOutcome::Infeasible;
            }
            continue;
        }
        rows.push((a, c.sense, rhs));
    }
    for &(col, bound) in &ub_rows {
        let mut a = vec![0.0; ncols];
        a[col] = 1.0;
        rows.push((a, Sense::Le, bound));
    }
    for row in rows.iter_mut() {
        if row.2 < 0.0 {
            for v in row.0.iter_mut() {
                *v = -*v;
            }
            row.2 = -row.2;
            row.1 = match row.1 {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let width = ncols + n_slack + n_art;
    let mut tab = Tableau {
        rows: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        width,
    };
    let mut is_art = vec![false; width];
    let (mut s_next, mut a_next) = (ncols, ncols + n_slack);
    for (a, sense, rhs) in rows {
        let mut row = vec![0.0; width + 1];
        row[..ncols].copy_from_slice(&a);
        row[width] = rhs;
        match sense {
            Sense::Le => {
                row[s_next] = 1.0;
                tab.basis.push(s_next);
                s_next += 1;
            }
            Sense::Ge => {
                row[s_next] = -1.0;
                s_next += 1;
                row[a_next] = 1.0;
                is_art[a_next] = true;
                tab.basis.push(a_next);
                a_next += 1;
            }
            Sense::Eq => {
                row[a_next] = 1.0;
                is_art[a_next] = true;
                tab.basis.push(a_next);
                a_next += 1;
            }
        }
        tab.rows.push(row);
    }

    if n_art > 0 {
        let cost: Vec<f64> = is_art.iter().map(|&a| if a { -1.0 } else { 0.0 }).collect();
        let mut z = tab.reduced_costs(&cost);
        let allowed = vec![true; width];
        tab.optimize(&mut z, &allowed);
        if z[width] < -PHASE1_TOL {
            return LpOutcome::Infeasible;
        }
        // Drive zero-valued artificials out of the basis where possible.
        for r in 0..m {
            if is_art[tab.basis[r]] {
                if let Some(c) = (0..width).find(|&c| !is_art[c] && tab.rows[r][c].abs() > 1e-7) {
                    tab.pivot(r, c, &mut z);
                }
            }
        }
    }

    let mut cost = vec![0.0; width];
    for &(v, coef) in model.objective().terms() {
        match maps[v.index()] {
            Map::Fixed(_) => {}
            Map::Shifted { col, sign, .. } => cost[col] += coef * sign,
            Map::Free { pos, neg } => {
                cost[pos] += coef;
                cost[neg] -= coef;
            }
        }
    }
    let mut z = tab.reduced_costs(&cost);
    let allowed: Vec<bool> = is_art.iter().map(|&a| !a).collect();
    if !tab.optimize(&mut z, &allowed) {
        return LpOutcome::Unbounded;
    }

    let mut y = vec![0.0; width];
    for (r, &b) in tab.basis.iter().enumerate() {
        y[b] = tab.rhs(r);
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            Map::Fixed(v) => v,
            Map::Shifted { col, offset, sign } => offset + sign * y[col],
            Map::Free { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    let objective = model.objective_value(&x);
    LpOutcome::Optimal { x, objective }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinExpr, Model, Sense};

    fn bounds(m: &Model) -> (Vec<f64>, Vec<f64>) {
        (
            m.vars().iter().map(|v| v.lb).collect(),
            m.vars().iter().map(|v| v.ub).collect(),
        )
    }

    #[test]
    fn textbook_lp() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut m = Model::new();
        let x = m.continuous("x", 0.0, f64::INFINITY).unwrap();
        let y = m.continuous("y", 0.0, f64::INFINITY).unwrap();
        m.add_constraint(LinExpr::term(x, 1.0), Sense::Le, 4.0, "a")
            .unwrap();
        m.add_constraint(LinExpr::term(y, 2.0), Sense::Le, 12.0, "b")
            .unwrap();
        m.add_constraint(LinExpr::term(x, 3.0).with(y, 2.0), Sense::Le, 18.0, "c")
            .unwrap();
        m.set_objective(LinExpr::term(x, 3.0).with(y, 5.0)).unwrap();
        let (lb, ub) = bounds(&m);
        match solve_lp(&m, &lb, &ub) {
            LpOutcome::Optimal { x: sol, objective } => {
                assert!((objective - 36.0).abs() < 1e-9);
                assert!((sol[0] - 2.0).abs() < 1e-9 && (sol[1] - 6.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn free_and_upper_only_variables() {
        // max -|x - 2| style: max t s.t. t <= x - 2, t <= 2 - x, x free, t <= 5
        let mut m = Model::new();
        let x = m.continuous("x", f64::NEG_INFINITY, f64::INFINITY).unwrap();
        let t = m.continuous("t", f64::NEG_INFINITY, 5.0).unwrap();
        m.add_constraint(LinExpr::term(t, 1.0).with(x, -1.0), Sense::Le, -2.0, "a")
            .unwrap();
        m.add_constraint(LinExpr::term(t, 1.0).with(x, 1.0), Sense::Le, 2.0, "b")
            .unwrap();
        m.set_objective(LinExpr::term(t, 1.0)).unwrap();
        let (lb, ub) = bounds(&m);
        match solve_lp(&m, &lb, &ub) {
            LpOutcome::Optimal { x: sol, objective } => {
                assert!(objective.abs() < 1e-9);
                assert!((sol[0] - 2.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut m = Model::new();
        let x = m.continuous("x", 0.0, f64::INFINITY).unwrap();
        m.add_constraint(LinExpr::term(x, 1.0), Sense::Le, 1.0, "a")
            .unwrap();
        m.add_constraint(LinExpr::term(x, 1.0), Sense::Ge, 2.0, "b")
            .unwrap();
        let (lb, ub) = bounds(&m);
        assert_eq!(solve_lp(&m, &lb, &ub), LpOutcome::Infeasible);

        let mut m = Model::new();
        let x = m.continuous("x", 0.0, f64::INFINITY).unwrap();
        m.set_objective(LinExpr::term(x, 1.0)).unwrap();
        let (lb, ub) = bounds(&m);
        assert_eq!(solve_lp(&m, &lb, &ub), LpOutcome::Unbounded);
    }

    #[test]
    fn equality_rows_and_fixed_vars() {
        // x + y = 3, y fixed at 1 -> x = 2
        let mut m = Model::new();
        let x = m.continuous("x", 0.0, 10.0).unwrap();
        let y = m.continuous("y", 1.0, 1.0).unwrap();
        m.add_constraint(LinExpr::term(x, 1.0).with(y, 1.0), Sense::Eq, 3.0, "a")
            .unwrap();
        m.set_objective(LinExpr::term(x, -1.0)).unwrap();
        let (lb, ub) = bounds(&m);
        match solve_lp(&m, &lb, &ub) {
            LpOutcome::Optimal { x: sol, .. } => assert!((sol[0] - 2.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }
}
