//! Explicit covering of Π_T by translates of ½Ω_T.
//!
//! Points of Π_T are written `z = y + e` with `y ∈ 𝔄` and `|e| ≤ φ(RT)`, and
//! `y` in coordinates adapted to `𝔅 ⊂ 𝔄`:
//! `y = t_0 u_0 + Σ t_i u_i + Σ s_k v_k` where `u_0 = (1, p_B)`, `u_i = (0, ·)`
//! span 𝔅 and the `v_k = (0, ·)` complete a basis of 𝔄. Each coordinate is cut
//! into cells; one tile per cell combination.
//!
//! * `s_k` cells are narrow enough that the transverse part stays within
//!   half of the tile thickness; this is the only direction whose cell count
//!   grows like `T/ψ(RT)`.
//! * `t_0` cells have width comparable to `T/2`; the `t_i` cells have width
//!   comparable to `RT`, so their counts stay bounded.
//! * `e` is cut into cubes of side at most `κ = γψ(RT)/2`.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{IntPoint, OmegaSpec, Thickness};
use crate::error::{Error, Result};
use crate::exactnum::{ceil_int, floor_int, fmt_rat, int, rat, Rat};
use crate::geometry::{self, linalg, sup_norm, LiftedSpan, RatVec};
use crate::rates::RateFunction;

/// Uniform cells of `[lo, lo + n·width]`.
#[derive(Clone, Debug)]
struct Grid {
    lo: Rat,
    width: Rat,
    cells: u128,
}

impl Grid {
    fn covering(lo: Rat, hi: &Rat, width: Rat) -> Result<Self> {
        let cells = ceil_int(&((hi - &lo) / &width)).max(BigInt::one());
        let cells = cells.to_u128().ok_or_else(|| Error::invalid("covering grid overflow"))?;
        Ok(Grid { lo, width, cells })
    }

    fn index(&self, x: &Rat) -> Option<u128> {
        let i = floor_int(&((x - &self.lo) / &self.width));
        let last = BigInt::from(self.cells) - 1;
        if i.is_negative() || i > last + 1 {
            return None;
        }
        // the right endpoint belongs to the last cell
        Some(i.to_u128()?.min(self.cells - 1))
    }

    fn center(&self, i: u128) -> Rat {
        &self.lo + (Rat::from_integer(BigInt::from(i)) + rat(1, 2)) * &self.width
    }
}

/// The covering construction for one `T`.
#[derive(Clone, Debug)]
pub struct Covering {
    pub t: u64,
    /// Number of tiles `ν_T`.
    pub nu: u128,
    pub kappa: Rat,
    pub phi_bar: Rat,
    pub cells_t0: u128,
    pub cells_t: Vec<u128>,
    pub cells_s: Vec<u128>,
    pub cells_e: u128,
    omega: OmegaSpec,
    a_span: LiftedSpan,
    u: Vec<RatVec>,
    v: Vec<RatVec>,
    left_inverse: Vec<RatVec>,
    g0: Grid,
    gt: Vec<Grid>,
    gs: Vec<Grid>,
    ge: Grid,
}

fn checked_product(xs: impl IntoIterator<Item = u128>) -> Result<u128> {
    xs.into_iter()
        .try_fold(1u128, |acc, x| acc.checked_mul(x))
        .ok_or_else(|| Error::invalid("tile count overflows 128 bits"))
}

/// Builds the adapted basis: `u_0 = (1, p_B)`, the other `u_i` and all `v_k` vanish in coordinate 0.
fn adapted_basis(a_span: &LiftedSpan, b_span: &LiftedSpan) -> Result<(Vec<RatVec>, Vec<RatVec>)> {
    let bb = b_span.basis();
    let lead = bb
        .iter()
        .position(|w| !w[0].is_zero())
        .ok_or_else(|| Error::Rank("B span has no vector with nonzero first coordinate".into()))?;
    let u0 = geometry::scale(&bb[lead], &bb[lead][0].recip());
    let mut u = vec![u0.clone()];
    for (i, w) in bb.iter().enumerate() {
        if i != lead {
            u.push(geometry::sub(w, &geometry::scale(&u0, &w[0])));
        }
    }
    let mut v: Vec<RatVec> = Vec::new();
    for w in a_span.basis() {
        let cand = geometry::sub(w, &geometry::scale(&u0, &w[0]));
        let mut all: Vec<RatVec> = u.iter().chain(v.iter()).cloned().collect();
        all.push(cand.clone());
        if linalg::rank(&all) == all.len() {
            v.push(cand);
        }
    }
    if u.len() + v.len() != a_span.dim() {
        return Err(Error::Rank("could not complete an adapted basis of the A span".into()));
    }
    Ok((u, v))
}

/// Constructs the tiling of Π_T and returns its size `ν_T` with the data to audit it.
pub fn covering_count(
    t: u64,
    r: &Rat,
    psi: &RateFunction,
    phi: &RateFunction,
    gamma: &Rat,
    a_span: &LiftedSpan,
    b_span: &LiftedSpan,
) -> Result<Covering> {
    let (a, b) = (a_span.dim() - 1, b_span.dim().saturating_sub(1));
    if b_span.dim() == 0 || b >= a {
        return Err(Error::Hypothesis {
            what: format!("dim B = {b} is not below dim A = {a}"),
            cites: "0 ⩽ b = dim B < a = dim A",
        });
    }
    if !b_span.is_subspace_of(a_span) {
        return Err(Error::Hypothesis { what: "B is not contained in A".into(), cites: "B ⊂ A" });
    }
    let n = a_span.ambient();
    let tt = int(t as i64);
    let rt = r * &tt;
    let kappa = Thickness::rate(gamma * rat(1, 2), psi, rt.clone()).bounds()?.0;
    let phi_bar = Thickness::rate(int(1), phi, rt.clone()).bounds()?.1;
    let (u, v) = adapted_basis(a_span, b_span)?;
    let pb = sup_norm(&u[0][1..]);
    let budget = &rt * rat(1, 2) - &kappa - &kappa * &pb;
    let mut w0 = &tt * rat(1, 2) - &kappa * int(2);
    if pb.is_positive() {
        let alt = &budget / (int(2) * &pb);
        if alt < w0 {
            w0 = alt;
        }
    }
    if !budget.is_positive() || !w0.is_positive() {
        return Err(Error::invalid(format!(
            "T = {t} is too small for the covering (budget {}, t0 step {})",
            fmt_rat(&budget),
            fmt_rat(&w0)
        )));
    }
    let mut cols: Vec<RatVec> = u.clone();
    cols.extend(v.iter().cloned());
    // columns as rows; L = (UᵀU)⁻¹Uᵀ
    let gram = linalg::mat_mul(&cols, &linalg::transpose(&cols));
    let inv = linalg::invert(&gram).ok_or_else(|| Error::Rank("singular Gram matrix".into()))?;
    let left_inverse = linalg::mat_mul(&inv, &cols);
    let ell: Vec<Rat> = left_inverse.iter().map(|row| row.iter().fold(Rat::zero(), |s, x| s + x.abs())).collect();
    let y = &rt + &phi_bar;

    let g0 = Grid::covering(-phi_bar.clone(), &(&tt + &phi_bar), w0)?;
    let mut gt = Vec::new();
    for i in 1..u.len() {
        let eta = &budget / (int(b as i64) * sup_norm(&u[i]));
        let ext = &ell[i] * &y;
        gt.push(Grid::covering(-ext.clone(), &ext, eta)?);
    }
    let mut gs = Vec::new();
    for (k, vk) in v.iter().enumerate() {
        let h = &kappa / (int(2 * (a - b) as i64) * sup_norm(vk));
        let ext = &ell[u.len() + k] * &y;
        gs.push(Grid::covering(-ext.clone(), &ext, h * int(2))?);
    }
    let ge = Grid::covering(-phi_bar.clone(), &phi_bar, kappa.clone())?;

    let cells_t: Vec<u128> = gt.iter().map(|g| g.cells).collect();
    let cells_s: Vec<u128> = gs.iter().map(|g| g.cells).collect();
    let e_total = checked_product(std::iter::repeat_n(ge.cells, n))?;
    let nu = checked_product(
        std::iter::once(g0.cells).chain(cells_t.iter().copied()).chain(cells_s.iter().copied()).chain([e_total]),
    )?;
    Ok(Covering {
        t,
        nu,
        kappa,
        phi_bar,
        cells_t0: g0.cells,
        cells_t,
        cells_s,
        cells_e: ge.cells,
        omega: OmegaSpec { b_span: b_span.clone(), gamma: gamma.clone(), psi: psi.clone(), r: r.clone(), t },
        a_span: a_span.clone(),
        u,
        v,
        left_inverse,
        g0,
        gt,
        gs,
        ge,
    })
}

impl Covering {
    /// Center of the tile holding `z`, or `None` if `z` falls outside every cell range.
    pub fn tile_center(&self, z: &[Rat]) -> Option<RatVec> {
        let (_, ta) = geometry::cheb_nearest(z, &self.a_span);
        let y = self.a_span.combine(&ta);
        let e = geometry::sub(z, &y);
        let coords = linalg::mat_vec(&self.left_inverse, &y);
        let i0 = self.g0.index(&coords[0])?;
        let mut c = geometry::scale(&self.u[0], &(self.g0.lo.clone() + Rat::from_integer(BigInt::from(i0)) * &self.g0.width - &self.kappa));
        for (i, g) in self.gt.iter().enumerate() {
            let tau = g.center(g.index(&coords[i + 1])?);
            c = geometry::add(&c, &geometry::scale(&self.u[i + 1], &tau));
        }
        for (k, g) in self.gs.iter().enumerate() {
            let sigma = g.center(g.index(&coords[self.u.len() + k])?);
            c = geometry::add(&c, &geometry::scale(&self.v[k], &sigma));
        }
        for (cj, ej) in c.iter_mut().zip(&e) {
            *cj += self.ge.center(self.ge.index(ej)?);
        }
        Some(c)
    }

    /// Checks that each point lies in its assigned tile; returns the first uncovered one.
    pub fn verify(&self, points: &[IntPoint], max_bits: u32) -> Result<Option<IntPoint>> {
        for p in points {
            let z: RatVec = p.iter().map(|x| int(*x)).collect();
            let covered = match self.tile_center(&z) {
                Some(c) => self.omega.half_translate(&c).contains(&z, max_bits)?,
                None => false,
            };
            if !covered {
                return Ok(Some(p.clone()));
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::DEFAULT_MAX_BITS;
    use crate::geometry::{lift, AffineSubspace};
    use crate::lattice::{enumerate_slab, SlabSpec};

    #[test]
    fn rejects_equal_dimensions() {
        let psi = RateFunction::power_law(int(1), int(1)).unwrap();
        let a = lift(&AffineSubspace::new(vec![int(0), int(0)], vec![vec![int(1), int(1)]]).unwrap()).unwrap();
        let e = covering_count(16, &int(1), &psi, &psi, &int(1), &a, &a).unwrap_err();
        assert!(matches!(e, Error::Hypothesis { .. }));
    }

    #[test]
    fn covers_pi_on_line() {
        let psi = RateFunction::power_law(int(1), int(1)).unwrap();
        let a = lift(&AffineSubspace::full(1)).unwrap();
        let b = lift(&AffineSubspace::point(vec![rat(2, 7)]).unwrap()).unwrap();
        for t in [8u64, 20, 40] {
            let cov = covering_count(t, &int(1), &psi, &psi, &rat(1, 4), &a, &b).unwrap();
            let pts = enumerate_slab(&SlabSpec::pi(&a, &psi, &int(1), t), DEFAULT_MAX_BITS).unwrap();
            assert_eq!(cov.verify(&pts, DEFAULT_MAX_BITS).unwrap(), None, "T = {t}");
            assert!(cov.nu >= 1);
        }
    }

    #[test]
    fn covers_plane_in_r2() {
        let psi = RateFunction::power_law(int(1), rat(1, 2)).unwrap();
        let a = lift(&AffineSubspace::new(vec![int(0), rat(1, 3)], vec![vec![int(1), rat(1, 2)]]).unwrap()).unwrap();
        let b = lift(&AffineSubspace::point(vec![rat(1, 5), rat(13, 30)]).unwrap()).unwrap();
        let cov = covering_count(12, &int(1), &psi, &psi, &rat(1, 10), &a, &b).unwrap();
        let pts = enumerate_slab(&SlabSpec::pi(&a, &psi, &int(1), 12), DEFAULT_MAX_BITS).unwrap();
        assert!(!pts.is_empty());
        assert_eq!(cov.verify(&pts, DEFAULT_MAX_BITS).unwrap(), None);
    }
}
