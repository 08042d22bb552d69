//! Dense two-phase simplex over exact rationals (Bland's rule).
//!
//! Solves `maximize c·x subject to A x <= b` with every `x` free.

use num_traits::{One, Signed, Zero};

use crate::exactnum::Rat;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rat, x: Vec<Rat> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    obj: Vec<Rat>,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rat {
        self.rows[i].last().unwrap()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (o, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *o -= &f * p;
                }
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for (o, p) in self.obj.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *o -= &f * p;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Sets the objective row to reduced costs of `cost` for the current basis.
    fn load_objective(&mut self, cost: &[Rat]) {
        let width = self.rows.first().map_or(cost.len() + 1, Vec::len);
        let mut obj: Vec<Rat> = cost.iter().cloned().chain(std::iter::once(Rat::zero())).collect();
        obj.resize(width, Rat::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (o, v) in obj.iter_mut().zip(&self.rows[i]) {
                *o -= cb * v;
            }
        }
        self.obj = obj;
    }

    /// Runs simplex on columns `< allowed`. Returns false when unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let Some(c) = (0..allowed).find(|&j| self.obj[j].is_positive()) else {
                return true;
            };
            let mut best: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }
}

/// `maximize c·x  s.t.  A x <= b`, `x` free.
pub fn maximize(c: &[Rat], a: &[Vec<Rat>], b: &[Rat]) -> LpOutcome {
    let n = c.len();
    let m = a.len();
    // columns: x+ (n), x- (n), slacks (m), artificials
    let needs_art: Vec<usize> = (0..m).filter(|&i| b[i].is_negative()).collect();
    let n_struct = 2 * n + m;
    let width = n_struct + needs_art.len() + 1;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art_idx = 0;
    for i in 0..m {
        let mut row = vec![Rat::zero(); width];
        let sign = if b[i].is_negative() { -Rat::one() } else { Rat::one() };
        for j in 0..n {
            if !a[i][j].is_zero() {
                row[j] = &sign * &a[i][j];
                row[n + j] = -&row[j];
            }
        }
        row[2 * n + i] = sign.clone();
        row[width - 1] = &sign * &b[i];
        if b[i].is_negative() {
            let col = n_struct + art_idx;
            row[col] = Rat::one();
            basis.push(col);
            art_idx += 1;
        } else {
            basis.push(2 * n + i);
        }
        rows.push(row);
    }
    let mut t = Tableau { rows, basis, obj: Vec::new() };

    if !needs_art.is_empty() {
        let mut cost = vec![Rat::zero(); width - 1];
        for j in n_struct..width - 1 {
            cost[j] = -Rat::one();
        }
        t.load_objective(&cost);
        t.optimize(width - 1);
        let infeasible = t
            .basis
            .iter()
            .enumerate()
            .any(|(i, &bcol)| bcol >= n_struct && !t.rhs(i).is_zero());
        if infeasible {
            return LpOutcome::Infeasible;
        }
        // drive remaining (zero-level) artificials out of the basis
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= n_struct {
                match (0..n_struct).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(j) => t.pivot(i, j),
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        for row in t.rows.iter_mut() {
            for v in row[n_struct..width - 1].iter_mut() {
                *v = Rat::zero();
            }
        }
    }

    let mut cost = vec![Rat::zero(); width - 1];
    for j in 0..n {
        cost[j] = c[j].clone();
        cost[n + j] = -c[j].clone();
    }
    t.load_objective(&cost);
    if !t.optimize(n_struct) {
        return LpOutcome::Unbounded;
    }
    let mut full = vec![Rat::zero(); n_struct];
    for (i, &bcol) in t.basis.iter().enumerate() {
        if bcol < n_struct {
            full[bcol] = t.rhs(i).clone();
        }
    }
    let x: Vec<Rat> = (0..n).map(|j| &full[j] - &full[n + j]).collect();
    let value = c.iter().zip(&x).fold(Rat::zero(), |acc, (ci, xi)| acc + ci * xi);
    LpOutcome::Optimal { value, x }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, rat};

    fn v(xs: &[i64]) -> Vec<Rat> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn small_lp() {
        // max x + y s.t. x <= 2, y <= 3, x + 2y <= 7
        let out = maximize(&v(&[1, 1]), &[v(&[1, 0]), v(&[0, 1]), v(&[1, 2])], &v(&[2, 3, 7]));
        assert_eq!(out, LpOutcome::Optimal { value: rat(9, 2), x: vec![int(2), rat(5, 2)] });
    }

    #[test]
    fn free_variables_and_phase_one() {
        // max -x s.t. -x <= -3 (x >= 3), x <= 10
        let out = maximize(&v(&[-1]), &[v(&[-1]), v(&[1])], &v(&[-3, 10]));
        assert_eq!(out, LpOutcome::Optimal { value: int(-3), x: v(&[3]) });
        // negative optimum location
        let out = maximize(&v(&[1]), &[v(&[1]), v(&[-1])], &v(&[-2, 5]));
        assert_eq!(out, LpOutcome::Optimal { value: int(-2), x: v(&[-2]) });
    }

    #[test]
    fn infeasible_and_unbounded() {
        assert_eq!(maximize(&v(&[1]), &[v(&[1]), v(&[-1])], &v(&[1, -2])), LpOutcome::Infeasible);
        assert_eq!(maximize(&v(&[1]), &[v(&[-1])], &v(&[0])), LpOutcome::Unbounded);
    }
}
