//! Integer points of the slab sets Ω_T, Π_T and the layers Z_T.
//!
//! Enumeration walks coordinates in order. For each prefix `z_0..z_{j-1}` the
//! feasible values of `z_j` form an interval that is computed exactly from the
//! circuits of the target span (minimal dependent row sets): `dist(x, S) ≤ r`
//! holds iff `|x·ρ| ≤ r` for every normalized circuit `ρ`, and a circuit whose
//! largest index is `j` bounds `x_j` in terms of the prefix. The projection is
//! exact, so the walk never visits a dead prefix and no final LP is needed.

pub mod covering;

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactnum::{ceil_int, cmp_refine, floor_int, fmt_rat, int, rat, Rat};
use crate::geometry::{self, sup_norm, Circuits, LiftedSpan, RatVec};
use crate::rates::RateFunction;

pub use covering::{covering_count, Covering};

/// Integer lattice point `(z_0, …, z_d)`.
pub type IntPoint = Vec<i64>;

/// Largest candidate box the enumerator accepts.
pub const BOX_GUARD: u128 = 1_000_000_000;

const THICKNESS_BITS: u32 = 128;

/// Upper bound on the distance to the target span.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Thickness {
    Fixed(Rat),
    /// `factor · f(at)`.
    Rate { factor: Rat, f: RateFunction, at: Rat },
}

impl Thickness {
    pub fn rate(factor: Rat, f: &RateFunction, at: Rat) -> Self {
        Thickness::Rate { factor, f: f.clone(), at }
    }

    /// The value when it is rational.
    pub fn exact(&self) -> Option<Rat> {
        match self {
            Thickness::Fixed(r) => Some(r.clone()),
            Thickness::Rate { factor, f, at } => f.exact_value(at).map(|v| factor * v),
        }
    }

    /// Rational enclosure `(lo, hi)`.
    pub fn bounds(&self) -> Result<(Rat, Rat)> {
        if let Some(r) = self.exact() {
            return Ok((r.clone(), r));
        }
        match self {
            Thickness::Fixed(_) => unreachable!(),
            Thickness::Rate { factor, f, at } => {
                let iv = f.interval(at, THICKNESS_BITS)?;
                Ok((factor * iv.lo(), factor * iv.hi()))
            }
        }
    }

    /// Exact test `dist <= thickness`.
    pub fn admits(&self, dist: &Rat, max_bits: u32) -> Result<bool> {
        match self {
            Thickness::Fixed(r) => Ok(dist <= r),
            Thickness::Rate { factor, f, at } => {
                if !dist.is_positive() {
                    return Ok(true);
                }
                let d = cmp_refine(&(dist / factor), f, at, max_bits)?;
                let o = d.require(|| format!("distance {} against {}·{f} at T = {}", fmt_rat(dist), fmt_rat(factor), fmt_rat(at)))?;
                Ok(o != Ordering::Greater)
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Thickness::Fixed(r) => fmt_rat(r),
            Thickness::Rate { factor, f, at } => format!("{}*{f}@{}", fmt_rat(factor), fmt_rat(at)),
        }
    }
}

/// `{ z ∈ Z^(d+1) : z0 ∈ [z0_lo, z0_hi], |z_j − c_j| ≤ h (j ≥ 1), dist(z − c, S) ≤ r }`.
#[derive(Clone, Debug)]
pub struct Region {
    pub center: RatVec,
    pub z0_lo: Rat,
    pub z0_hi: Rat,
    pub half_width: Rat,
    pub target: LiftedSpan,
    pub thickness: Thickness,
}

impl Region {
    pub fn dims(&self) -> usize {
        self.target.ambient()
    }

    /// Candidate count of the bounding box.
    pub fn box_size(&self) -> u128 {
        let mut total: u128 = span_len(&ceil_int(&self.z0_lo), &floor_int(&self.z0_hi));
        for c in &self.center[1..] {
            let n = span_len(&ceil_int(&(c - &self.half_width)), &floor_int(&(c + &self.half_width)));
            total = total.saturating_mul(n);
        }
        total
    }

    /// Exact membership of a rational point.
    pub fn contains(&self, z: &[Rat], max_bits: u32) -> Result<bool> {
        if z[0] < self.z0_lo || z[0] > self.z0_hi {
            return Ok(false);
        }
        let x = geometry::sub(z, &self.center);
        if x[1..].iter().any(|v| v.abs() > self.half_width) {
            return Ok(false);
        }
        let dist = geometry::cheb_distance(&x, &self.target);
        self.thickness.admits(&dist, max_bits)
    }
}

fn span_len(lo: &BigInt, hi: &BigInt) -> u128 {
    if hi < lo {
        0
    } else {
        (hi - lo + 1u32).to_u128().unwrap_or(u128::MAX)
    }
}

/// A circuit constraint `|Σ p_i z_i − K| ≤ r·N` expressed for its last index.
#[derive(Clone, Debug)]
struct LevelConstraint {
    pj: BigInt,
    prev: Vec<(usize, BigInt)>,
    /// `K ∓ r·N` for the wide (upper) and narrow (lower) thickness bound, as
    /// `(numerator, denominator)`: `[wide_lo, wide_hi, narrow_lo, narrow_hi]`.
    ends: [(BigInt, BigInt); 4],
}

/// Precomputed pruning data for one region.
pub struct Plan {
    region: Region,
    circuits: Circuits,
    levels: Vec<Vec<LevelConstraint>>,
    boxes: Vec<(i64, i64)>,
    exact: bool,
    max_bits: u32,
}

/// Result of a walk.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Enumeration {
    pub count: u128,
    pub points: Vec<IntPoint>,
    /// Points whose membership needed an exact check beyond interval bounds.
    pub boundary_checks: u64,
}

impl Plan {
    pub fn new(region: Region, max_bits: u32) -> Result<Self> {
        let n = region.dims();
        if region.center.len() != n {
            return Err(Error::Dimension { expected: n, got: region.center.len() });
        }
        let size = region.box_size();
        if size > BOX_GUARD {
            return Err(Error::BoxTooLarge(size));
        }
        let (r_lo, r_hi) = region.thickness.bounds()?;
        if r_hi.is_negative() {
            return Err(Error::invalid(format!("negative thickness {}", region.thickness.describe())));
        }
        let exact = r_lo == r_hi;
        let circuits = Circuits::new(&region.target);
        let mut levels: Vec<Vec<LevelConstraint>> = vec![Vec::new(); n];
        for rho in circuits.iter() {
            let den = rho.iter().fold(BigInt::one(), |acc, (_, v)| acc.lcm(v.denom()));
            let ints: Vec<(usize, BigInt)> =
                rho.iter().map(|(i, v)| (*i, (v * Rat::from_integer(den.clone())).to_integer())).collect();
            let norm: BigInt = ints.iter().map(|(_, p)| p.abs()).sum();
            let k: Rat = ints.iter().fold(Rat::zero(), |acc, (i, p)| acc + &region.center[*i] * Rat::from_integer(p.clone()));
            let nr = Rat::from_integer(norm);
            let parts = |x: Rat| (x.numer().clone(), x.denom().clone());
            let ends = [
                parts(&k - &r_hi * &nr),
                parts(&k + &r_hi * &nr),
                parts(&k - &r_lo * &nr),
                parts(&k + &r_lo * &nr),
            ];
            let (last, pj) = ints.last().cloned().expect("circuits are non-empty");
            let prev = ints[..ints.len() - 1].to_vec();
            levels[last].push(LevelConstraint { pj, prev, ends });
        }
        let to_i64 = |b: BigInt| -> Result<i64> {
            b.to_i64().ok_or_else(|| Error::invalid("box coordinate exceeds 64 bits"))
        };
        let mut boxes = vec![(to_i64(ceil_int(&region.z0_lo))?, to_i64(floor_int(&region.z0_hi))?)];
        for c in &region.center[1..] {
            boxes.push((
                to_i64(ceil_int(&(c - &region.half_width)))?,
                to_i64(floor_int(&(c + &region.half_width)))?,
            ));
        }
        Ok(Plan { region, circuits, levels, boxes, exact, max_bits })
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// `(wide_lo, wide_hi, narrow_lo, narrow_hi)` for coordinate `j` given the prefix.
    fn range(&self, j: usize, z: &[i64]) -> (i64, i64, i64, i64) {
        let (blo, bhi) = self.boxes[j];
        let (mut wl, mut wh, mut nl, mut nh) = (blo, bhi, blo, bhi);
        for lc in &self.levels[j] {
            let s: BigInt = lc.prev.iter().map(|(i, p)| p * z[*i]).sum();
            // p_j z_j ∈ [lo_end − s, hi_end − s]
            let bound = |e: &(BigInt, BigInt), up: bool| -> BigInt {
                let num = &e.0 - &s * &e.1;
                let den = &e.1 * &lc.pj;
                if up {
                    num.div_floor(&den)
                } else {
                    -((-num).div_floor(&den))
                }
            };
            let pos = lc.pj.is_positive();
            let (lo_e, hi_e) = if pos { (0, 1) } else { (1, 0) };
            let clamp_lo = |b: BigInt, cur: i64| -> i64 { b.to_i64().map_or(if b.is_positive() { i64::MAX } else { cur }, |v| v.max(cur)) };
            let clamp_hi = |b: BigInt, cur: i64| -> i64 { b.to_i64().map_or(if b.is_negative() { i64::MIN } else { cur }, |v| v.min(cur)) };
            wl = clamp_lo(bound(&lc.ends[lo_e], false), wl);
            wh = clamp_hi(bound(&lc.ends[hi_e], true), wh);
            if self.exact {
                nl = wl;
                nh = wh;
            } else {
                nl = clamp_lo(bound(&lc.ends[2 + lo_e], false), nl);
                nh = clamp_hi(bound(&lc.ends[2 + hi_e], true), nh);
            }
        }
        if self.exact {
            (wl, wh, wl, wh)
        } else {
            (wl, wh, nl.max(wl), nh.min(wh))
        }
    }

    fn member_exact(&self, z: &[i64]) -> Result<bool> {
        let x: RatVec = z.iter().zip(&self.region.center).map(|(zi, ci)| int(*zi) - ci).collect();
        let d = self.circuits.distance(&x);
        self.region.thickness.admits(&d, self.max_bits).map_err(|e| match e {
            Error::Undecidable { bits, context } => {
                Error::Undecidable { bits, context: format!("{context} at point {z:?}") }
            }
            other => other,
        })
    }

    fn walk(&self, j: usize, z: &mut IntPoint, certain: bool, collect: bool, out: &mut Enumeration) -> Result<()> {
        let n = z.len();
        let (wl, wh, nl, nh) = self.range(j, z);
        if wl > wh {
            return Ok(());
        }
        if j + 1 == n {
            if certain && nl == wl && nh == wh {
                out.count += (wh - wl + 1) as u128;
                if collect {
                    for v in wl..=wh {
                        z[j] = v;
                        out.points.push(z.clone());
                    }
                }
                return Ok(());
            }
            for v in wl..=wh {
                z[j] = v;
                let sure = certain && nl <= v && v <= nh;
                let ok = if sure {
                    true
                } else {
                    out.boundary_checks += 1;
                    self.member_exact(z)?
                };
                if ok {
                    out.count += 1;
                    if collect {
                        out.points.push(z.clone());
                    }
                }
            }
            return Ok(());
        }
        for v in wl..=wh {
            z[j] = v;
            self.walk(j + 1, z, certain && nl <= v && v <= nh, collect, out)?;
        }
        z[j] = 0;
        Ok(())
    }

    fn run(&self, collect: bool) -> Result<Enumeration> {
        let n = self.region.dims();
        let (wl, wh, nl, nh) = self.range(0, &vec![0; n]);
        if wl > wh {
            return Ok(Enumeration::default());
        }
        let parts: Vec<Result<Enumeration>> = (wl..=wh)
            .into_par_iter()
            .map(|z0| {
                let mut z = vec![0i64; n];
                z[0] = z0;
                let mut e = Enumeration::default();
                if n == 1 {
                    let sure = nl <= z0 && z0 <= nh;
                    if sure || self.member_exact(&z)? {
                        e.count = 1;
                        if collect {
                            e.points.push(z);
                        }
                    }
                } else {
                    self.walk(1, &mut z, nl <= z0 && z0 <= nh, collect, &mut e)?;
                }
                Ok(e)
            })
            .collect();
        let mut total = Enumeration::default();
        for p in parts {
            let p = p?;
            total.count += p.count;
            total.boundary_checks += p.boundary_checks;
            total.points.extend(p.points);
        }
        Ok(total)
    }

    /// All members in lexicographic order.
    pub fn enumerate(&self) -> Result<Enumeration> {
        self.run(true)
    }

    /// Member count without materializing points.
    pub fn count(&self) -> Result<Enumeration> {
        self.run(false)
    }
}

pub fn enumerate_region(region: &Region, max_bits: u32) -> Result<Vec<IntPoint>> {
    Ok(Plan::new(region.clone(), max_bits)?.enumerate()?.points)
}

pub fn count_region(region: &Region, max_bits: u32) -> Result<u128> {
    Ok(Plan::new(region.clone(), max_bits)?.count()?.count)
}

/// One of the slab sets: `z_0` in an integer range, `|z_j| ≤ R·T`, distance ≤ thickness.
#[derive(Clone, Debug)]
pub struct SlabSpec {
    pub t: u64,
    pub r: Rat,
    pub target: LiftedSpan,
    pub thickness: Thickness,
    pub z0_range: (i64, i64),
}

impl SlabSpec {
    /// Ω_T: target 𝔅, thickness γ·ψ(RT), `0 ≤ z_0 ≤ T`.
    pub fn omega(b_span: &LiftedSpan, gamma: &Rat, psi: &RateFunction, r: &Rat, t: u64) -> Self {
        SlabSpec {
            t,
            r: r.clone(),
            target: b_span.clone(),
            thickness: Thickness::rate(gamma.clone(), psi, r * int(t as i64)),
            z0_range: (0, t as i64),
        }
    }

    /// Π_T: target 𝔄, thickness φ(RT), `0 ≤ z_0 ≤ T`.
    pub fn pi(a_span: &LiftedSpan, phi: &RateFunction, r: &Rat, t: u64) -> Self {
        SlabSpec {
            t,
            r: r.clone(),
            target: a_span.clone(),
            thickness: Thickness::rate(int(1), phi, r * int(t as i64)),
            z0_range: (0, t as i64),
        }
    }

    /// Z_T: as Π_T with `z_0 = T`.
    pub fn layer(a_span: &LiftedSpan, phi: &RateFunction, r: &Rat, t: u64) -> Self {
        SlabSpec { z0_range: (t as i64, t as i64), ..SlabSpec::pi(a_span, phi, r, t) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t == 0 {
            return Err(Error::invalid("T must be >= 1"));
        }
        if self.r < int(1) {
            return Err(Error::invalid(format!("R = {} must be >= 1", fmt_rat(&self.r))));
        }
        let (lo, hi) = self.thickness.bounds()?;
        if !(lo.is_positive() || self.target.is_full()) || hi < lo {
            return Err(Error::invalid(format!("thickness {} must be > 0", self.thickness.describe())));
        }
        Ok(())
    }

    pub fn region(&self) -> Region {
        let n = self.target.ambient();
        Region {
            center: vec![Rat::zero(); n],
            z0_lo: int(self.z0_range.0),
            z0_hi: int(self.z0_range.1),
            half_width: &self.r * int(self.t as i64),
            target: self.target.clone(),
            thickness: self.thickness.clone(),
        }
    }

    /// Independent membership test of the three defining inequalities.
    pub fn contains(&self, z: &[i64], max_bits: u32) -> Result<bool> {
        let zr: RatVec = z.iter().map(|v| int(*v)).collect();
        self.region().contains(&zr, max_bits)
    }
}

pub fn enumerate_slab(spec: &SlabSpec, max_bits: u32) -> Result<Vec<IntPoint>> {
    spec.validate()?;
    enumerate_region(&spec.region(), max_bits)
}

pub fn count_slab(spec: &SlabSpec, max_bits: u32) -> Result<u128> {
    spec.validate()?;
    count_region(&spec.region(), max_bits)
}

/// `ζ_T = #Z_T` with the points.
pub fn zeta_layer(t: u64, r: &Rat, a_span: &LiftedSpan, phi: &RateFunction, max_bits: u32) -> Result<(u128, Vec<IntPoint>)> {
    let pts = enumerate_slab(&SlabSpec::layer(a_span, phi, r, t), max_bits)?;
    Ok((pts.len() as u128, pts))
}

pub fn zeta_count(t: u64, r: &Rat, a_span: &LiftedSpan, phi: &RateFunction, max_bits: u32) -> Result<u128> {
    count_slab(&SlabSpec::layer(a_span, phi, r, t), max_bits)
}

/// Parameters of Ω_T.
#[derive(Clone, Debug)]
pub struct OmegaSpec {
    pub b_span: LiftedSpan,
    pub gamma: Rat,
    pub psi: RateFunction,
    pub r: Rat,
    pub t: u64,
}

impl OmegaSpec {
    pub fn slab(&self) -> SlabSpec {
        SlabSpec::omega(&self.b_span, &self.gamma, &self.psi, &self.r, self.t)
    }

    fn rt(&self) -> Rat {
        &self.r * int(self.t as i64)
    }

    /// Membership of a real (rational) point in Ω_T.
    pub fn contains(&self, v: &[Rat], max_bits: u32) -> Result<bool> {
        self.slab().region().contains(v, max_bits)
    }

    /// `½·Ω_T + c`.
    pub fn half_translate(&self, c: &[Rat]) -> Region {
        let half = rat(1, 2);
        Region {
            center: c.to_vec(),
            z0_lo: c[0].clone(),
            z0_hi: &c[0] + int(self.t as i64) * &half,
            half_width: self.rt() * &half,
            target: self.b_span.clone(),
            thickness: Thickness::rate(&self.gamma * &half, &self.psi, self.rt()),
        }
    }

    /// A random rational point of Ω_T (rejection sampling, dyadic with 32 bits).
    pub fn sample_point<G: Rng>(&self, rng: &mut G, max_bits: u32) -> Result<Option<RatVec>> {
        let (r_lo, _) = self.slab().thickness.bounds()?;
        let n = self.b_span.ambient();
        let t = int(self.t as i64);
        let rt = self.rt();
        let basis = self.b_span.basis();
        // coefficient ranges: first basis vector drives z0, the rest span the box
        let scale = Rat::new(BigInt::one(), BigInt::one() << 32u32);
        let mut uniform = |lo: &Rat, hi: &Rat| -> Rat {
            let k: u64 = rng.gen::<u32>() as u64;
            lo + (hi - lo) * Rat::from_integer(BigInt::from(k)) * &scale
        };
        for _ in 0..1000 {
            let mut coeffs = Vec::with_capacity(basis.len());
            for (i, b) in basis.iter().enumerate() {
                if i == 0 && !b[0].is_zero() {
                    coeffs.push(uniform(&Rat::zero(), &(&t / &b[0]).abs()));
                } else {
                    let norm = sup_norm(b);
                    let w = if norm.is_zero() { Rat::zero() } else { &rt / norm };
                    coeffs.push(uniform(&-w.clone(), &w));
                }
            }
            let mut v = self.b_span.combine(&coeffs);
            for x in v.iter_mut().take(n) {
                *x += uniform(&-r_lo.clone(), &r_lo);
            }
            if self.contains(&v, max_bits)? {
                return Ok(Some(v));
            }
        }
        Ok(None)
    }
}

/// `None` when `Ω_T ∩ Z^(d+1) = {0}`, otherwise the nonzero member closest to 𝔅
/// (lexicographically first among ties).
pub fn verify_omega_trivial(b_span: &LiftedSpan, gamma: &Rat, psi: &RateFunction, r: &Rat, t: u64, max_bits: u32) -> Result<Option<IntPoint>> {
    if !gamma.is_positive() {
        return Err(Error::invalid("gamma must be > 0"));
    }
    let spec = OmegaSpec { b_span: b_span.clone(), gamma: gamma.clone(), psi: psi.clone(), r: r.clone(), t };
    let pts = enumerate_slab(&spec.slab(), max_bits)?;
    let circuits = Circuits::new(b_span);
    let mut best: Option<(Rat, IntPoint)> = None;
    for p in pts.into_iter().filter(|p| p.iter().any(|v| *v != 0)) {
        let x: RatVec = p.iter().map(|v| int(*v)).collect();
        let d = circuits.distance(&x);
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, p));
        }
    }
    Ok(best.map(|(_, p)| p))
}

/// A pair of distinct integer points in one translate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackingViolation {
    pub translate: RatVec,
    pub x: IntPoint,
    pub y: IntPoint,
    /// Sign-adjusted `x − y`.
    pub difference: IntPoint,
    pub difference_in_omega: bool,
}

#[derive(Clone, Debug, Default)]
pub struct PackingReport {
    pub translates: usize,
    pub max_points: usize,
    pub occupied: usize,
    pub pair_checks: usize,
    pub pair_failures: usize,
    pub violation: Option<PackingViolation>,
}

/// Sign-adjusts `v` so that `v_0 ≥ 0` (first nonzero coordinate positive when `v_0 = 0`).
pub fn normalize_sign<T: Clone + Signed>(v: &[T]) -> Vec<T> {
    let first = v.iter().find(|x| !x.is_zero());
    match first {
        Some(x) if x.is_negative() => v.iter().map(|x| -x.clone()).collect(),
        _ => v.to_vec(),
    }
}

fn normalize_i64(v: &[i64]) -> IntPoint {
    match v.iter().find(|x| **x != 0) {
        Some(x) if *x < 0 => v.iter().map(|x| -x).collect(),
        _ => v.to_vec(),
    }
}

/// Checks that every translate `½Ω_T + c` holds at most one integer point, and
/// that differences of rational points sampled inside one translate land in
/// Ω_T after sign adjustment.
pub fn half_dilation_check<G: Rng>(
    omega: &OmegaSpec,
    translates: &[RatVec],
    pair_samples: usize,
    rng: &mut G,
    max_bits: u32,
) -> Result<PackingReport> {
    let mut rep = PackingReport { translates: translates.len(), ..Default::default() };
    for c in translates {
        let region = omega.half_translate(c);
        let pts = enumerate_region(&region, max_bits)?;
        rep.max_points = rep.max_points.max(pts.len());
        if !pts.is_empty() {
            rep.occupied += 1;
        }
        if pts.len() >= 2 && rep.violation.is_none() {
            let (x, y) = (pts[0].clone(), pts[1].clone());
            let diff: IntPoint = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            let difference = normalize_i64(&diff);
            let dr: RatVec = difference.iter().map(|v| int(*v)).collect();
            let difference_in_omega = omega.contains(&dr, max_bits)?;
            rep.violation = Some(PackingViolation { translate: c.clone(), x, y, difference, difference_in_omega });
        }
        // difference property on rational points of the same translate
        for _ in 0..pair_samples {
            let (Some(a), Some(b)) = (omega.sample_point(rng, max_bits)?, omega.sample_point(rng, max_bits)?) else {
                continue;
            };
            let half = rat(1, 2);
            let pa = geometry::add(c, &geometry::scale(&a, &half));
            let pb = geometry::add(c, &geometry::scale(&b, &half));
            rep.pair_checks += 1;
            let in_both = region.contains(&pa, max_bits)? && region.contains(&pb, max_bits)?;
            let diff = normalize_sign(&geometry::sub(&pa, &pb));
            if !in_both || !omega.contains(&diff, max_bits)? {
                rep.pair_failures += 1;
            }
        }
    }
    Ok(rep)
}

/// Translates that put a chosen integer point inside `½Ω_T + c` (first half)
/// or are uniform over the box (second half).
pub fn random_translates<G: Rng>(omega: &OmegaSpec, count: usize, rng: &mut G, max_bits: u32) -> Result<Vec<RatVec>> {
    let n = omega.b_span.ambient();
    let t = omega.t as i64;
    let rt = floor_int(&omega.rt()).to_i64().unwrap_or(i64::MAX / 4);
    let den = 1i64 << 20;
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        if k % 2 == 0 {
            if let Some(w) = omega.sample_point(rng, max_bits)? {
                let z: RatVec = (0..n)
                    .map(|j| if j == 0 { int(rng.gen_range(0..=t)) } else { int(rng.gen_range(-rt..=rt)) })
                    .collect();
                out.push(geometry::sub(&z, &geometry::scale(&w, &rat(1, 2))));
                continue;
            }
        }
        let c: RatVec = (0..n)
            .map(|j| {
                let span = if j == 0 { t } else { rt };
                let lo = if j == 0 { -span } else { -rt };
                Rat::new(BigInt::from(rng.gen_range(lo * den..=span * den)), BigInt::from(den))
            })
            .collect();
        out.push(c);
    }
    Ok(out)
}
