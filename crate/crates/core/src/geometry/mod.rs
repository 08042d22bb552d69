//! Affine subspaces, their lifted spans, and exact sup-norm distances.

pub mod linalg;
pub mod lp;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{floor_int, Rat};
use linalg::{dependencies, rank, solve_combination};
use lp::{maximize, LpOutcome};

pub type RatVec = Vec<Rat>;

/// `p + span(directions)` inside `R^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSubspace {
    base: RatVec,
    directions: Vec<RatVec>,
}

impl AffineSubspace {
    pub fn new(base: RatVec, directions: Vec<RatVec>) -> Result<Self> {
        let d = base.len();
        if d == 0 {
            return Err(Error::invalid("ambient dimension must be positive"));
        }
        for v in &directions {
            if v.len() != d {
                return Err(Error::Dimension { expected: d, got: v.len() });
            }
        }
        if directions.len() > d || rank(&directions) != directions.len() {
            return Err(Error::Rank(format!("{} directions are not linearly independent", directions.len())));
        }
        Ok(AffineSubspace { base, directions })
    }

    /// All of `R^d`.
    pub fn full(d: usize) -> Self {
        let directions = (0..d).map(|i| unit(d, i)).collect();
        AffineSubspace { base: vec![Rat::zero(); d], directions }
    }

    /// The single point `p`.
    pub fn point(p: RatVec) -> Result<Self> {
        AffineSubspace::new(p, Vec::new())
    }

    pub fn ambient(&self) -> usize {
        self.base.len()
    }

    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    pub fn base(&self) -> &RatVec {
        &self.base
    }

    pub fn directions(&self) -> &[RatVec] {
        &self.directions
    }

    /// `p + Σ t_i v_i`.
    pub fn at(&self, t: &[Rat]) -> RatVec {
        let mut w = self.base.clone();
        for (ti, v) in t.iter().zip(&self.directions) {
            for (wj, vj) in w.iter_mut().zip(v) {
                *wj += ti * vj;
            }
        }
        w
    }

    pub fn contains(&self, w: &[Rat]) -> bool {
        let diff: RatVec = w.iter().zip(&self.base).map(|(a, b)| a - b).collect();
        diff.iter().all(Zero::is_zero) || solve_combination(&self.directions, &diff).is_some()
    }
}

/// A linear subspace of `R^(d+1)` given by a basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedSpan {
    ambient: usize,
    basis: Vec<RatVec>,
}

impl LiftedSpan {
    pub fn from_basis(ambient: usize, basis: Vec<RatVec>) -> Result<Self> {
        for v in &basis {
            if v.len() != ambient {
                return Err(Error::Dimension { expected: ambient, got: v.len() });
            }
        }
        if rank(&basis) != basis.len() {
            return Err(Error::Rank("span basis is linearly dependent".into()));
        }
        Ok(LiftedSpan { ambient, basis })
    }

    /// The zero subspace `{0}`.
    pub fn zero(ambient: usize) -> Self {
        LiftedSpan { ambient, basis: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        LiftedSpan { ambient, basis: (0..ambient).map(|i| unit(ambient, i)).collect() }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[RatVec] {
        &self.basis
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == self.ambient
    }

    /// Row `i` of the `ambient × dim` basis matrix.
    pub fn row(&self, i: usize) -> RatVec {
        self.basis.iter().map(|v| v[i].clone()).collect()
    }

    pub fn rows(&self) -> Vec<RatVec> {
        (0..self.ambient).map(|i| self.row(i)).collect()
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        x.iter().all(Zero::is_zero) || solve_combination(&self.basis, x).is_some()
    }

    pub fn is_subspace_of(&self, other: &LiftedSpan) -> bool {
        self.ambient == other.ambient && self.basis.iter().all(|v| other.contains(v))
    }

    /// `Σ t_j basis_j`.
    pub fn combine(&self, t: &[Rat]) -> RatVec {
        let mut y = vec![Rat::zero(); self.ambient];
        for (tj, v) in t.iter().zip(&self.basis) {
            for (yi, vi) in y.iter_mut().zip(v) {
                *yi += tj * vi;
            }
        }
        y
    }
}

/// Span of `{(1, w) : w ∈ A}`.
pub fn lift(a: &AffineSubspace) -> Result<LiftedSpan> {
    let mut basis = Vec::with_capacity(a.dim() + 1);
    basis.push(std::iter::once(Rat::one()).chain(a.base.iter().cloned()).collect());
    for v in &a.directions {
        basis.push(std::iter::once(Rat::zero()).chain(v.iter().cloned()).collect());
    }
    LiftedSpan::from_basis(a.ambient() + 1, basis)
}

pub fn unit(n: usize, i: usize) -> RatVec {
    (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect()
}

pub fn sup_norm(x: &[Rat]) -> Rat {
    x.iter().map(|v| v.abs()).max().unwrap_or_else(Rat::zero)
}

/// `||x||`, distance to the nearest integer.
pub fn nearest_int_dist(x: &Rat) -> Rat {
    let f = x - Rat::from_integer(floor_int(x));
    let g = Rat::one() - &f;
    if f < g {
        f
    } else {
        g
    }
}

pub fn sub(a: &[Rat], b: &[Rat]) -> RatVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Rat], b: &[Rat]) -> RatVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[Rat], k: &Rat) -> RatVec {
    a.iter().map(|x| x * k).collect()
}

/// `min_{y ∈ S} |x − y|` by the exact minimax LP.
pub fn cheb_distance(x: &[Rat], s: &LiftedSpan) -> Rat {
    cheb_nearest(x, s).0
}

/// Distance together with coefficients `t` of an optimal `y = Σ t_j basis_j`.
pub fn cheb_nearest(x: &[Rat], s: &LiftedSpan) -> (Rat, RatVec) {
    assert_eq!(x.len(), s.ambient, "dimension mismatch");
    let k = s.dim();
    let m = sup_norm(x);
    if k == 0 {
        return (m, Vec::new());
    }
    // variables (t, r') with r = M + r'; origin is feasible
    let mut a = Vec::with_capacity(2 * x.len());
    let mut b = Vec::with_capacity(2 * x.len());
    for (i, xi) in x.iter().enumerate() {
        let row = s.row(i);
        let mut lo: RatVec = row.iter().map(|v| -v).collect();
        lo.push(-Rat::one());
        a.push(lo);
        b.push(&m - xi);
        let mut hi = row;
        hi.push(-Rat::one());
        a.push(hi);
        b.push(&m + xi);
    }
    let mut c = vec![Rat::zero(); k];
    c.push(-Rat::one());
    match maximize(&c, &a, &b) {
        LpOutcome::Optimal { value, mut x } => {
            x.truncate(k);
            (m - value, x)
        }
        other => unreachable!("minimax LP is feasible and bounded, got {other:?}"),
    }
}

/// `min_t max_i |x_i − t v_i|` and an optimal `t`.
pub fn line_distance(x: &[Rat], v: &[Rat]) -> (Rat, Rat) {
    let mut cands: Vec<Rat> = Vec::new();
    for i in 0..x.len() {
        if !v[i].is_zero() {
            cands.push(&x[i] / &v[i]);
        }
        for k in i + 1..x.len() {
            let dm = &v[i] - &v[k];
            if !dm.is_zero() {
                cands.push((&x[i] - &x[k]) / dm);
            }
            let dp = &v[i] + &v[k];
            if !dp.is_zero() {
                cands.push((&x[i] + &x[k]) / dp);
            }
        }
    }
    if cands.is_empty() {
        return (sup_norm(x), Rat::zero());
    }
    let eval = |t: &Rat| x.iter().zip(v).map(|(a, b)| (a - t * b).abs()).max().unwrap();
    let mut best: Option<(Rat, Rat)> = None;
    for t in cands {
        let g = eval(&t);
        if best.as_ref().is_none_or(|(bg, bt)| g < *bg || (g == *bg && t < *bt)) {
            best = Some((g, t));
        }
    }
    best.unwrap()
}

/// Precomputed circuits of a span: `dist(x, S) = max_ρ |x·ρ|` over the
/// minimal-support vectors `ρ ⊥ S` normalized to `|ρ|_1 = 1`.
#[derive(Clone, Debug)]
pub struct Circuits {
    ambient: usize,
    list: Vec<Vec<(usize, Rat)>>,
}

impl Circuits {
    pub fn new(s: &LiftedSpan) -> Self {
        Circuits { ambient: s.ambient, list: circuits_of_rows(&s.rows(), s.dim()) }
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<(usize, Rat)>> {
        self.list.iter()
    }

    pub fn distance(&self, x: &[Rat]) -> Rat {
        debug_assert_eq!(x.len(), self.ambient);
        self.list
            .iter()
            .map(|rho| rho.iter().fold(Rat::zero(), |acc, (i, r)| acc + &x[*i] * r).abs())
            .max()
            .unwrap_or_else(Rat::zero)
    }
}

/// Circuits of the row family `rows` (each of length `k`), normalized to unit 1-norm.
pub fn circuits_of_rows(rows: &[RatVec], k: usize) -> Vec<Vec<(usize, Rat)>> {
    let n = rows.len();
    assert!(n <= 20, "too many rows for circuit enumeration");
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size > k + 1 {
            continue;
        }
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let vecs: Vec<RatVec> = idx.iter().map(|&i| rows[i].clone()).collect();
        let deps = dependencies(&vecs);
        if deps.len() != 1 || deps[0].iter().any(Zero::is_zero) {
            continue;
        }
        let norm = deps[0].iter().fold(Rat::zero(), |acc, v| acc + v.abs());
        // fix the sign so the first entry is positive
        let s = if deps[0][0].is_negative() { -norm.recip() } else { norm.recip() };
        out.push(idx.into_iter().zip(deps[0].iter().map(|v| v * &s)).collect());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, rat};

    fn v(xs: &[i64]) -> RatVec {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn lift_examples() {
        let a = AffineSubspace::new(v(&[0, 1]), vec![v(&[1, 1])]).unwrap();
        let s = lift(&a).unwrap();
        assert_eq!(s.basis(), &[v(&[1, 0, 1]), v(&[0, 1, 1])]);
        assert!(lift(&AffineSubspace::full(1)).unwrap().is_full());
        let b = lift(&AffineSubspace::point(vec![rat(1, 2)]).unwrap()).unwrap();
        assert_eq!(b.basis(), &[vec![int(1), rat(1, 2)]]);
        assert!(AffineSubspace::new(v(&[0, 0]), vec![v(&[1, 1]), v(&[2, 2])]).is_err());
    }

    #[test]
    fn norms() {
        assert_eq!(sup_norm(&v(&[1, -3, 2])), int(3));
        assert_eq!(sup_norm(&v(&[0, 0])), int(0));
        assert_eq!(sup_norm(&[rat(-7, 2), int(3)]), rat(7, 2));
        assert_eq!(nearest_int_dist(&rat(9, 4)), rat(1, 4));
        assert_eq!(nearest_int_dist(&rat(1, 2)), rat(1, 2));
        assert_eq!(nearest_int_dist(&rat(-6, 5)), rat(1, 5));
    }

    #[test]
    fn distance_examples() {
        let s = LiftedSpan::from_basis(2, vec![v(&[1, 1])]).unwrap();
        assert_eq!(cheb_distance(&v(&[1, 0]), &s), rat(1, 2));
        assert_eq!(cheb_nearest(&v(&[1, 0]), &s).1, vec![rat(1, 2)]);
        assert_eq!(cheb_distance(&v(&[3, 4]), &LiftedSpan::zero(2)), int(4));
        assert_eq!(cheb_distance(&v(&[3, 3]), &s), int(0));
        assert_eq!(Circuits::new(&s).distance(&v(&[1, 0])), rat(1, 2));
        assert_eq!(Circuits::new(&LiftedSpan::zero(2)).distance(&v(&[3, -4])), int(4));
        assert_eq!(Circuits::new(&LiftedSpan::full(3)).distance(&v(&[3, -4, 1])), int(0));
    }

    #[test]
    fn line_distance_examples() {
        assert_eq!(line_distance(&v(&[1, 0]), &v(&[1, 1])), (rat(1, 2), rat(1, 2)));
        assert_eq!(line_distance(&v(&[2, 1]), &[int(1), rat(1, 2)]).0, int(0));
        assert_eq!(line_distance(&v(&[2, 1]), &v(&[0, 0])), (int(2), int(0)));
    }

    #[test]
    fn circuits_match_lp_on_plane() {
        let s = LiftedSpan::from_basis(4, vec![v(&[1, 0, 2, -1]), v(&[0, 1, 1, 3])]).unwrap();
        let c = Circuits::new(&s);
        for x in [v(&[1, 2, 3, 4]), v(&[-5, 0, 7, 1]), v(&[0, 0, 0, 1])] {
            assert_eq!(c.distance(&x), cheb_distance(&x, &s));
        }
    }
}
