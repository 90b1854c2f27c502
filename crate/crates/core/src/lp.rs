//! Dense two-phase simplex method with Bland's anti-cycling rule.
//!
//! Used with [`Rat`](crate::num::Rat) it is exact: no tolerances anywhere.
//! Problems here are tiny (a handful of variables, a few dozen rows).



use crate::linalg::Vec4;
use crate::num::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<T> {
    Infeasible,
    Unbounded,
    Optimal { value: T, point: Vec<T> },
}

impl<T> LpOutcome<T> {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }
}

/// `maximize objective·x` subject to the constraints. Variables flagged in
/// `nonneg` are constrained `≥ 0`; the others are free.
#[derive(Clone, Debug)]
pub struct LinearProgram<T> {
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
    pub nonneg: Vec<bool>,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram { objective: vec![T::zero(); num_vars], constraints: Vec::new(), nonneg: vec![false; num_vars] }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<T>, relation: Relation, rhs: T) -> &mut Self {
        assert_eq!(coeffs.len(), self.num_vars(), "constraint width mismatch");
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self
    }

    pub fn maximize(&mut self, objective: Vec<T>) -> &mut Self {
        assert_eq!(objective.len(), self.num_vars(), "objective width mismatch");
        self.objective = objective;
        self
    }

    pub fn solve(&self) -> LpOutcome<T> {
        // Column layout: for each original variable one column (nonneg) or two (x⁺, x⁻),
        // then one slack/surplus per inequality, then one artificial per row.
        let n = self.num_vars();
        let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(n);
        let mut ncols = 0;
        for &nn in &self.nonneg {
            if nn {
                col_of.push((ncols, None));
                ncols += 1;
            } else {
                col_of.push((ncols, Some(ncols + 1)));
                ncols += 2;
            }
        }
        let structural = ncols;
        let m = self.constraints.len();
        let slack_count = self.constraints.iter().filter(|c| c.relation != Relation::Eq).count();
        let total = structural + slack_count + m;
        let art0 = structural + slack_count;

        let mut rows: Vec<Vec<T>> = Vec::with_capacity(m);
        let mut rhs: Vec<T> = Vec::with_capacity(m);
        let mut slack = structural;
        for c in &self.constraints {
            let mut row = vec![T::zero(); total];
            for (j, a) in c.coeffs.iter().enumerate() {
                let (p, q) = col_of[j];
                row[p] = a.clone();
                if let Some(q) = q {
                    row[q] = -a.clone();
                }
            }
            match c.relation {
                Relation::Le => {
                    row[slack] = T::one();
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -T::one();
                    slack += 1;
                }
                Relation::Eq => {}
            }
            let mut b = c.rhs.clone();
            if b.is_negative() {
                for x in row.iter_mut() {
                    *x = -x.clone();
                }
                b = -b;
            }
            rows.push(row);
            rhs.push(b);
        }
        for (i, row) in rows.iter_mut().enumerate() {
            row[art0 + i] = T::one();
        }
        let mut basis: Vec<usize> = (art0..art0 + m).collect();

        // Phase 1: minimize the sum of artificials.
        let mut cost = vec![T::zero(); total];
        for c in cost.iter_mut().skip(art0) {
            *c = T::one();
        }
        let mut tab = Tableau { rows, rhs, basis: &mut basis, allowed: total };
        if tab.minimize(&cost).is_none() {
            unreachable!("phase one is bounded below by zero");
        }
        let infeasibility: T = tab.basis.iter().zip(&tab.rhs).filter(|(&b, _)| b >= art0).map(|(_, v)| v.clone()).fold(T::zero(), |a, b| a + b);
        if !infeasibility.is_zero() {
            return LpOutcome::Infeasible;
        }
        // Drive zero-valued artificials out of the basis where possible.
        for r in 0..m {
            if tab.basis[r] < art0 {
                continue;
            }
            if let Some(col) = (0..art0).find(|&c| !tab.rows[r][c].is_zero()) {
                tab.pivot(r, col);
            }
        }
        tab.allowed = art0;

        // Phase 2: minimize -objective.
        let mut cost2 = vec![T::zero(); total];
        for (j, obj) in self.objective.iter().enumerate() {
            let (p, q) = col_of[j];
            cost2[p] = -obj.clone();
            if let Some(q) = q {
                cost2[q] = obj.clone();
            }
        }
        let Some(()) = tab.minimize(&cost2) else {
            return LpOutcome::Unbounded;
        };
        let mut values = vec![T::zero(); total];
        for (r, &b) in tab.basis.iter().enumerate() {
            values[b] = tab.rhs[r].clone();
        }
        let point: Vec<T> = col_of
            .iter()
            .map(|&(p, q)| match q {
                Some(q) => values[p].clone() - values[q].clone(),
                None => values[p].clone(),
            })
            .collect();
        let value = self.objective.iter().zip(&point).fold(T::zero(), |acc, (c, x)| acc + c.clone() * x.clone());
        LpOutcome::Optimal { value, point }
    }
}

struct Tableau<'a, T> {
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    basis: &'a mut Vec<usize>,
    /// Columns at or beyond this index may not enter the basis.
    allowed: usize,
}

impl<T: Scalar> Tableau<'_, T> {
    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col].clone();
        for x in self.rows[r].iter_mut() {
            *x = x.clone() / p.clone();
        }
        self.rhs[r] = self.rhs[r].clone() / p;
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][col].is_zero() {
                continue;
            }
            let f = self.rows[i][col].clone();
            for c in 0..self.rows[i].len() {
                if self.rows[r][c].is_zero() {
                    continue;
                }
                let v = self.rows[r][c].clone() * f.clone();
                self.rows[i][c] = self.rows[i][c].clone() - v;
            }
            let v = self.rhs[r].clone() * f;
            self.rhs[i] = self.rhs[i].clone() - v;
        }
        self.basis[r] = col;
    }

    /// Bland's rule minimization; `None` when unbounded.
    fn minimize(&mut self, cost: &[T]) -> Option<()> {
        loop {
            // Reduced cost of column j: c_j - c_B · column_j.
            let entering = (0..self.allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut rc = cost[j].clone();
                for (r, &b) in self.basis.iter().enumerate() {
                    if !self.rows[r][j].is_zero() && !cost[b].is_zero() {
                        rc = rc - cost[b].clone() * self.rows[r][j].clone();
                    }
                }
                rc.is_negative()
            });
            let Some(col) = entering else {
                return Some(());
            };
            let mut best: Option<(usize, T)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs[r].clone() / a.clone();
                best = match best {
                    None => Some((r, ratio)),
                    Some((br, bv)) => {
                        if ratio < bv || (ratio == bv && self.basis[r] < self.basis[br]) {
                            Some((r, ratio))
                        } else {
                            Some((br, bv))
                        }
                    }
                };
            }
            let (r, _) = best?;
            self.pivot(r, col);
        }
    }
}

/// Does `target` lie in the cone generated by `generators` (nonnegative combinations)?
pub fn in_cone<T: Scalar>(generators: &[Vec4<T>], target: &Vec4<T>) -> bool {
    if target.is_zero() {
        return true;
    }
    if generators.is_empty() {
        return false;
    }
    let mut lp = LinearProgram::new(generators.len());
    lp.nonneg = vec![true; generators.len()];
    for k in 0..4 {
        lp.add(generators.iter().map(|g| g.0[k].clone()).collect(), Relation::Eq, target.0[k].clone());
    }
    lp.solve().is_feasible()
}

/// Largest `s` such that some point satisfies every `a·x + s ≤ b` (capped at 1).
/// Positive iff the system has a nonempty interior; nonnegative iff it is feasible.
pub fn max_slack<T: Scalar>(halfplanes: &[(Vec<T>, T)]) -> T {
    let Some(dim) = halfplanes.first().map(|h| h.0.len()) else {
        return T::one();
    };
    let mut lp = LinearProgram::new(dim + 1);
    for (a, b) in halfplanes {
        let mut row = a.clone();
        row.push(T::one());
        lp.add(row, Relation::Le, b.clone());
    }
    let mut cap = vec![T::zero(); dim + 1];
    cap[dim] = T::one();
    lp.add(cap.clone(), Relation::Le, T::one());
    lp.maximize(cap);
    match lp.solve() {
        LpOutcome::Optimal { value, .. } => value,
        other => unreachable!("slack problem is feasible and capped: {other:?}"),
    }
}
