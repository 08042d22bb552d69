//! Dense exact linear algebra over rationals.

use num_traits::{One, Zero};

use crate::exactnum::Rat;

pub type Matrix = Vec<Vec<Rat>>;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let (pivot_row, other) = if i < r {
                    let (a, b) = m.split_at_mut(r);
                    (&b[0], &mut a[i])
                } else {
                    let (a, b) = m.split_at_mut(i);
                    (&a[r], &mut b[0])
                };
                for (o, p) in other.iter_mut().zip(pivot_row.iter()) {
                    if !p.is_zero() {
                        *o -= &f * p;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<Rat>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

pub fn transpose(m: &[Vec<Rat>]) -> Matrix {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
}

pub fn mat_vec(m: &[Vec<Rat>], v: &[Rat]) -> Vec<Rat> {
    m.iter().map(|row| dot(row, v)).collect()
}

pub fn mat_mul(a: &[Vec<Rat>], b: &[Vec<Rat>]) -> Matrix {
    let bt = transpose(b);
    a.iter().map(|row| bt.iter().map(|col| dot(row, col)).collect()).collect()
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect())
        .collect()
}

/// Inverse of a square matrix, `None` when singular.
pub fn invert(m: &[Vec<Rat>]) -> Option<Matrix> {
    let n = m.len();
    let mut aug: Matrix = m
        .iter()
        .zip(identity(n))
        .map(|(row, id)| row.iter().cloned().chain(id).collect())
        .collect();
    let piv = rref(&mut aug);
    if piv.len() < n || piv[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Basis of `{u : Σ u_i · vectors[i] = 0}`.
pub fn dependencies(vectors: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let n = vectors.len();
    if n == 0 {
        return Vec::new();
    }
    let mut m = transpose(vectors);
    if m.is_empty() {
        // zero-length vectors: everything is a dependency
        return identity(n);
    }
    let piv = rref(&mut m);
    let free: Vec<usize> = (0..n).filter(|c| !piv.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut u = vec![Rat::zero(); n];
            u[f] = Rat::one();
            for (r, &p) in piv.iter().enumerate() {
                u[p] = -m[r][f].clone();
            }
            u
        })
        .collect()
}

/// Coefficients expressing `target` in terms of independent `vectors`.
pub fn solve_combination(vectors: &[Vec<Rat>], target: &[Rat]) -> Option<Vec<Rat>> {
    let mut all = vectors.to_vec();
    all.push(target.to_vec());
    let deps = dependencies(&all);
    let k = vectors.len();
    let d = deps.into_iter().find(|u| !u[k].is_zero())?;
    let s = -d[k].recip();
    Some(d[..k].iter().map(|x| x * &s).collect())
}

/// Greedy maximal independent subset, in order.
pub fn independent_subset(vectors: &[Vec<Rat>]) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut rows: Matrix = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        rows.push(v.clone());
        if rank(&rows) == rows.len() {
            chosen.push(i);
        } else {
            rows.pop();
        }
    }
    chosen
}
