//! Monte Carlo experiments on points of `A`: empirical φ-badness, membership
//! in the projected unions `𝒰_T`, and measure estimates.

mod report;

pub use report::{run_theorem1, TailRow, Theorem1Report, ThresholdRow};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::badness::{subspace_badness, vector_badness, BadnessCertificate, SubspaceBadness};
use crate::config::{fmt_vector, fmt_vectors, parse_scalar, parse_vector, parse_vectors, KeyValues};
use crate::error::{Error, Result};
use crate::exactnum::{ceil_int, cmp_refine, floor_int, fmt_rat, int, parse_rat, precision_from_env, round_int, to_f64, Rat, Value};
use crate::geometry::{lift, line_distance, linalg, sup_norm, AffineSubspace, LiftedSpan, RatVec};
use crate::lattice::{zeta_count, zeta_layer, IntPoint};
use crate::rates::{require_admissible, RateFunction};
use crate::series::{measure_upper_bound, SeriesInstance};

/// Name of the only supported generator.
pub const RNG_NAME: &str = "chacha20";
/// Fractional bits of sampled chart parameters.
pub const SAMPLE_BITS: u32 = 64;
/// Draws allowed per accepted sample before sampling is declared degenerate.
const MAX_DRAWS: u64 = 1000;

/// Graph chart of `A`: parameters are the pivot coordinates of `w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    pub base: RatVec,
    /// Directions in reduced form: direction `i` is 1 at `pivots[i]` and 0 at the other pivots.
    pub directions: Vec<RatVec>,
    pub pivots: Vec<usize>,
    /// Parameter box implied by `|w| ≤ R` on the pivot coordinates.
    pub lo: RatVec,
    pub hi: RatVec,
}

impl Chart {
    pub fn new(a: &AffineSubspace, r: &Rat) -> Result<Self> {
        let mut m: Vec<RatVec> = a.directions().to_vec();
        let pivots = linalg::rref(&mut m);
        m.truncate(pivots.len());
        let base = a.base().clone();
        let lo: RatVec = pivots.iter().map(|&p| -r.clone() - &base[p]).collect();
        let hi: RatVec = pivots.iter().map(|&p| r - &base[p]).collect();
        let mut chart = Chart { base, directions: m, pivots, lo, hi };
        if chart.dim() == 1 {
            // tighten to the exact interval where every coordinate fits
            let (l, h) = chart.line_interval(r);
            chart.lo = vec![l];
            chart.hi = vec![h];
        }
        Ok(chart)
    }

    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    pub fn at(&self, t: &[Rat]) -> RatVec {
        let mut w = self.base.clone();
        for (ti, v) in t.iter().zip(&self.directions) {
            for (wj, vj) in w.iter_mut().zip(v) {
                *wj += ti * vj;
            }
        }
        w
    }

    /// For a line: the parameter interval where `|base + t v| ≤ R`.
    fn line_interval(&self, r: &Rat) -> (Rat, Rat) {
        let v = &self.directions[0];
        let (mut lo, mut hi) = (-r.clone() - &self.base[self.pivots[0]], r - &self.base[self.pivots[0]]);
        for (b, vj) in self.base.iter().zip(v) {
            if vj.is_zero() {
                continue;
            }
            let e1 = (-r.clone() - b) / vj;
            let e2 = (r - b) / vj;
            let (l, h) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            lo = lo.max(l);
            hi = hi.min(h);
        }
        (lo, hi)
    }

    /// Chart volume of the parameter box.
    pub fn box_volume(&self) -> Rat {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l).max(Rat::zero()))
            .fold(Rat::one(), |acc, x| acc * x)
    }
}

/// Everything a Monte Carlo run needs, validated.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub d: usize,
    pub a: AffineSubspace,
    pub b: AffineSubspace,
    pub a_span: LiftedSpan,
    pub b_span: LiftedSpan,
    pub psi: RateFunction,
    pub phi: RateFunction,
    pub r: Rat,
    pub certificate: BadnessCertificate,
    pub samples: usize,
    /// Height of the vector badness scan.
    pub x: u64,
    pub t_min: u64,
    pub t_max: u64,
    pub seed: u64,
    pub thresholds: Vec<Rat>,
    /// Last `T` included in the tail sums.
    pub tail_max: u64,
    pub series_n: u64,
    pub series_rounds: u32,
    /// Ω thickness factor for `verify`; below the certified constant.
    pub gamma: Rat,
    pub chart: Chart,
}

fn rate_from(kv: &KeyValues, prefix: &str, d: usize) -> Result<RateFunction> {
    let key = |k: &str| format!("{prefix}.{k}");
    let get = |k: &str, default: Rat| -> Result<Rat> { kv.get(&key(k)).map(parse_scalar).unwrap_or(Ok(default)) };
    let kind = kv.get(&key("kind")).unwrap_or("power");
    let c = get("c", int(1))?;
    let alpha = get("alpha", Rat::new(BigInt::one(), BigInt::from(d)))?;
    match kind {
        "power" => RateFunction::power_law(c, alpha),
        "powerlog" => {
            let delta = get("delta", Rat::zero())?;
            let t0 = get("t0", int(2))?;
            RateFunction::power_log(c, alpha, delta, t0)
        }
        other => Err(Error::Config(format!("{}: unknown rate kind {other:?} (power | powerlog)", key("kind")))),
    }
}

fn rate_into(kv: &mut KeyValues, prefix: &str, f: &RateFunction) {
    let set = |kv: &mut KeyValues, k: &str, v: String| kv.set(&format!("{prefix}.{k}"), v);
    match f {
        RateFunction::PowerLaw { c, alpha } => {
            set(kv, "kind", "power".into());
            set(kv, "c", fmt_rat(c));
            set(kv, "alpha", fmt_rat(alpha));
        }
        RateFunction::PowerLog { c, alpha, delta, t0 } => {
            set(kv, "kind", "powerlog".into());
            set(kv, "c", fmt_rat(c));
            set(kv, "alpha", fmt_rat(alpha));
            set(kv, "delta", fmt_rat(delta));
            set(kv, "t0", fmt_rat(t0));
        }
    }
}

fn uint<T: std::str::FromStr>(kv: &KeyValues, key: &str, default: T) -> Result<T> {
    match kv.get(key) {
        None => Ok(default),
        Some(s) => s.trim().parse().map_err(|_| Error::Config(format!("{key}: expected a non-negative integer, got {s:?}"))),
    }
}

fn subspace_from(kv: &KeyValues, prefix: &str, d: usize, full_default: bool) -> Result<AffineSubspace> {
    let base_key = format!("{prefix}.base");
    let dirs_key = format!("{prefix}.directions");
    if full_default && kv.get(&base_key).is_none() && kv.get(&dirs_key).is_none() {
        return Ok(AffineSubspace::full(d));
    }
    let base = parse_vector(kv.require(&base_key)?)?;
    if base.len() != d {
        return Err(Error::Config(format!("{base_key}: expected {d} coordinates, got {}", base.len())));
    }
    let dirs = parse_vectors(kv.get(&dirs_key).unwrap_or(""))?;
    AffineSubspace::new(base, dirs).map_err(|e| Error::Config(format!("{prefix}: {e}")))
}

impl ExperimentConfig {
    /// Parses and validates; every hypothesis violation is reported with the
    /// hypothesis it breaks.
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        let d: usize = kv.require("d")?.trim().parse().map_err(|_| Error::Config("d: expected a positive integer".into()))?;
        if d == 0 {
            return Err(Error::Config("d must be positive".into()));
        }
        let a = subspace_from(kv, "A", d, true)?;
        let b = subspace_from(kv, "B", d, false)?;
        let psi = rate_from(kv, "psi", d)?;
        let phi = if kv.get("phi.kind").is_some() { rate_from(kv, "phi", d)? } else { psi.clone() };
        let r = kv.get("R").map(parse_rat).unwrap_or(Ok(int(1)))?;
        if r < int(1) {
            return Err(Error::Hypothesis { what: format!("R = {}", fmt_rat(&r)), cites: "R ⩾ 1" });
        }
        if b.dim() >= a.dim() {
            return Err(Error::Hypothesis {
                what: format!("dim B = {} is not below dim A = {}", b.dim(), a.dim()),
                cites: "0 ⩽ b = dim B < a = dim A",
            });
        }
        let a_span = lift(&a)?;
        let b_span = lift(&b)?;
        if !b_span.is_subspace_of(&a_span) {
            return Err(Error::Hypothesis { what: "B is not contained in A".into(), cites: "B ⊂ A" });
        }
        let t_min: u64 = uint(kv, "T.min", 2)?;
        let t_max: u64 = uint(kv, "T.max", 256)?;
        if t_min == 0 || t_max < t_min {
            return Err(Error::Config(format!("T range [{t_min}, {t_max}] is empty")));
        }
        let max_bits = precision_from_env();
        let tail_max: u64 = uint(kv, "tail.max", 1024.max(t_max))?;
        if tail_max < t_max {
            return Err(Error::Config("tail.max must be at least T.max".into()));
        }
        require_admissible(&psi, &phi, &(&r * int(tail_max as i64)), max_bits)?;
        let inst = SeriesInstance::new(psi.clone(), phi.clone(), r.clone(), a.dim(), b.dim())?;
        if t_min < inst.start() {
            return Err(Error::Config(format!("T.min = {t_min} is below the first admissible T = {}", inst.start())));
        }

        let need = ceil_int(&(&r * int(t_max as i64))).to_u64().ok_or_else(|| Error::Config("R * T.max too large".into()))?;
        let height: u64 = uint(kv, "certificate.height", need)?;
        if height < need {
            return Err(Error::Hypothesis {
                what: format!("certificate height {height} is below R * T.max = {need}"),
                cites: "Let B be a ψ-badly approximable affine subspace",
            });
        }
        let certificate = match subspace_badness(&b_span, &psi, height, max_bits)? {
            SubspaceBadness::Certificate(c) => c,
            SubspaceBadness::ZeroHit { witness, .. } => {
                return Err(Error::Hypothesis {
                    what: format!("integer point {witness:?} lies on the lifted span of B"),
                    cites: "Let B be a ψ-badly approximable affine subspace",
                })
            }
        };
        let gamma = match kv.get("gamma") {
            Some(s) => parse_scalar(s)?,
            None => &certificate.gamma * Rat::new(BigInt::from(99), BigInt::from(100)),
        };
        if !gamma.is_positive() {
            return Err(Error::Config("gamma must be positive".into()));
        }
        let thresholds = match kv.get("thresholds") {
            Some(s) => parse_vector(s)?,
            None => vec![Rat::new(1.into(), 1000.into()), Rat::new(1.into(), 100.into()), Rat::new(1.into(), 10.into()), int(1)],
        };
        if let Some(rng) = kv.get("rng") {
            if rng != RNG_NAME {
                return Err(Error::Config(format!("rng: only {RNG_NAME:?} is supported")));
            }
        }
        let chart = Chart::new(&a, &r)?;
        Ok(ExperimentConfig {
            d,
            a,
            b,
            a_span,
            b_span,
            psi,
            phi,
            r,
            certificate,
            samples: uint(kv, "samples", 100)?,
            x: uint(kv, "X", 100_000)?.max(1),
            t_min,
            t_max,
            seed: uint(kv, "seed", 0)?,
            thresholds,
            tail_max,
            series_n: uint(kv, "series.N", 100_000)?,
            series_rounds: uint(kv, "series.rounds", 3)?,
            gamma,
            chart,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_key_values(&KeyValues::parse(text)?)
    }

    /// Fully expanded key/value form; parsing it back gives the same config.
    pub fn to_key_values(&self) -> KeyValues {
        let mut kv = KeyValues::default();
        kv.set("d", self.d.to_string());
        kv.set("A.base", fmt_vector(self.a.base()));
        kv.set("A.directions", fmt_vectors(self.a.directions()));
        kv.set("B.base", fmt_vector(self.b.base()));
        kv.set("B.directions", fmt_vectors(self.b.directions()));
        rate_into(&mut kv, "psi", &self.psi);
        rate_into(&mut kv, "phi", &self.phi);
        kv.set("R", fmt_rat(&self.r));
        kv.set("samples", self.samples.to_string());
        kv.set("X", self.x.to_string());
        kv.set("T.min", self.t_min.to_string());
        kv.set("T.max", self.t_max.to_string());
        kv.set("seed", self.seed.to_string());
        kv.set("rng", RNG_NAME);
        kv.set("thresholds", fmt_vector(&self.thresholds));
        kv.set("tail.max", self.tail_max.to_string());
        kv.set("series.N", self.series_n.to_string());
        kv.set("series.rounds", self.series_rounds.to_string());
        kv.set("certificate.height", self.certificate.height.to_string());
        kv.set("gamma", fmt_rat(&self.gamma));
        kv
    }

    pub fn hash(&self) -> String {
        self.to_key_values().hash()
    }

    pub fn series_instance(&self) -> Result<SeriesInstance> {
        SeriesInstance::new(self.psi.clone(), self.phi.clone(), self.r.clone(), self.a.dim(), self.b.dim())
    }

    /// `(2R)^a`-style chart volume of `{w ∈ A : |w| ≤ R}`: exact for lines,
    /// otherwise `None` (estimated from the acceptance rate by the caller).
    pub fn exact_chart_measure(&self) -> Option<Rat> {
        (self.chart.dim() == 1).then(|| self.chart.box_volume())
    }
}

/// Uniform dyadic in `[lo, hi]` with [`SAMPLE_BITS`] fractional bits.
fn uniform_dyadic<G: Rng>(rng: &mut G, lo: &Rat, hi: &Rat) -> Result<Rat> {
    let scale = Rat::from_integer(BigInt::one() << SAMPLE_BITS);
    let a = ceil_int(&(lo * &scale));
    let b = floor_int(&(hi * &scale));
    let (a, b) = match (a.to_i128(), b.to_i128()) {
        (Some(a), Some(b)) if a <= b => (a, b),
        _ => return Err(Error::Sampling(format!("empty or oversized parameter range [{}, {}]", fmt_rat(lo), fmt_rat(hi)))),
    };
    let m = rng.gen_range(a..=b);
    Ok(Rat::new(BigInt::from(m), BigInt::one() << SAMPLE_BITS))
}

/// One accepted sample with the number of draws it took.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Draw {
    pub w: RatVec,
    pub draws: u64,
}

/// The `index`-th sample: ChaCha20 seeded with `seed`, stream `index`.
pub fn sample_one(cfg: &ExperimentConfig, index: u64) -> Result<Draw> {
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    for draws in 1..=MAX_DRAWS {
        let t: Vec<Rat> = (0..cfg.chart.dim())
            .map(|i| uniform_dyadic(&mut rng, &cfg.chart.lo[i], &cfg.chart.hi[i]))
            .collect::<Result<_>>()?;
        let w = cfg.chart.at(&t);
        if sup_norm(&w) <= cfg.r {
            return Ok(Draw { w, draws });
        }
    }
    Err(Error::Sampling(format!(
        "no accepted point in {MAX_DRAWS} draws: rejection rate above 99.9% for |w| <= {}",
        fmt_rat(&cfg.r)
    )))
}

/// `n` points of `A` with `|w| ≤ R`, uniform in the chart.
pub fn sample_on_a(cfg: &ExperimentConfig, n: usize) -> Result<Vec<Draw>> {
    (0..n as u64).into_par_iter().map(|i| sample_one(cfg, i)).collect()
}

/// Witness of membership in `𝒰_T`: `|t·(1, w) − z| ≤ φ(RT)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Membership {
    pub z: IntPoint,
    pub t: Rat,
    pub distance: Rat,
}

/// Membership of `w` in `𝒰_T` given the layer `Z_T`; the witness is the
/// closest layer point.
pub fn u_t_member_in(w: &[Rat], t: u64, layer: &[IntPoint], phi: &RateFunction, r: &Rat, max_bits: u32) -> Result<Option<Membership>> {
    let lifted: RatVec = std::iter::once(Rat::one()).chain(w.iter().cloned()).collect();
    let rt = r * int(t as i64);
    // |z_j − z_0 w_j| ≤ (1 + |w_j|)·dist, so a float lower bound with a wide
    // margin discards points that cannot be within φ(RT)
    let cut = to_f64(&phi.eval_at(&rt)?.hi()) * (1.0 + 1e-9) + 1e-12;
    let wf: Vec<f64> = w.iter().map(to_f64).collect();
    let mut best: Option<Membership> = None;
    for z in layer {
        let z0 = z[0] as f64;
        let far = wf.iter().zip(&z[1..]).any(|(wj, zj)| (*zj as f64 - z0 * wj).abs() > cut * (1.0 + wj.abs()) * (1.0 + 1e-9));
        if far {
            continue;
        }
        let zr: RatVec = z.iter().map(|v| int(*v)).collect();
        let (distance, tt) = line_distance(&zr, &lifted);
        if best.as_ref().is_none_or(|b| distance < b.distance) {
            best = Some(Membership { z: z.clone(), t: tt, distance });
        }
    }
    let Some(b) = best else { return Ok(None) };
    let ord = cmp_refine(&b.distance, phi, &rt, max_bits)?.require(|| format!("membership distance at T = {t}"))?;
    Ok((ord != std::cmp::Ordering::Greater).then_some(b))
}

/// Membership of `w` in `𝒰_T`, enumerating `Z_T`.
pub fn u_t_member(w: &[Rat], t: u64, cfg: &ExperimentConfig) -> Result<Option<Membership>> {
    let max_bits = precision_from_env();
    if !cfg.a.contains(w) || sup_norm(w) > cfg.r {
        return Err(Error::invalid("w must lie on A with |w| <= R"));
    }
    let (_, layer) = zeta_layer(t, &cfg.r, &cfg.a_span, &cfg.phi, max_bits)?;
    u_t_member_in(w, t, &layer, &cfg.phi, &cfg.r, max_bits)
}

/// `max_j ||T w_j|| ≤ φ(RT)` with rounded coordinates in the box: the
/// point `(T, round(Tw))` then certifies membership.
pub fn constructive_member(w: &[Rat], t: u64, phi: &RateFunction, r: &Rat, max_bits: u32) -> Result<bool> {
    let tt = int(t as i64);
    let rt = r * &tt;
    let mut m = Rat::zero();
    for wj in w {
        let x = wj * &tt;
        let z = Rat::from_integer(round_int(&x));
        if z.abs() > rt {
            return Ok(false);
        }
        m = m.max((x - z).abs());
    }
    let ord = cmp_refine(&m, phi, &rt, max_bits)?.require(|| format!("constructive check at T = {t}"))?;
    Ok(ord != std::cmp::Ordering::Greater)
}

/// Per-sample outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleResult {
    pub index: u64,
    pub w: RatVec,
    pub draws: u64,
    pub gamma_phi: Value,
    pub argmin_q: u64,
    /// `max_j ||argmin_q · w_j||`.
    pub m: Rat,
    pub u_t_hits: Vec<u64>,
    /// Invariant failures found while processing this sample.
    pub violations: Vec<String>,
}

/// Layers `Z_T` for the configured range.
pub fn layers(cfg: &ExperimentConfig) -> Result<Vec<Vec<IntPoint>>> {
    let max_bits = precision_from_env();
    (cfg.t_min..=cfg.t_max)
        .into_par_iter()
        .map(|t| Ok(zeta_layer(t, &cfg.r, &cfg.a_span, &cfg.phi, max_bits)?.1))
        .collect()
}

/// Badness scan, hits and invariant checks for one sample.
pub fn process_sample(cfg: &ExperimentConfig, draw: Draw, index: u64, layers: &[Vec<IntPoint>]) -> Result<SampleResult> {
    let max_bits = precision_from_env();
    let w = draw.w;
    let vb = vector_badness(&w, &cfg.phi, cfg.x, max_bits)?;
    let mut hits = Vec::new();
    let mut violations = Vec::new();
    let scale = Rat::one() + sup_norm(&w);
    for (k, layer) in layers.iter().enumerate() {
        let t = cfg.t_min + k as u64;
        let member = u_t_member_in(&w, t, layer, &cfg.phi, &cfg.r, max_bits)?;
        if let Some(mem) = &member {
            hits.push(t);
            // the witness bounds ||T w_j|| by (1 + |w|) φ(RT)
            let tt = int(t as i64);
            let worst = w
                .iter()
                .zip(&mem.z[1..])
                .map(|(wj, zj)| (wj * &tt - int(*zj)).abs())
                .max()
                .unwrap_or_else(Rat::zero);
            let bound = cfg.phi.eval_at(&(&cfg.r * &tt))?.mul_rat(&scale);
            if worst > bound.hi() {
                violations.push(format!("sample {index}: witness at T = {t} gives {} above (1+|w|)phi(RT)", fmt_rat(&worst)));
            }
        }
        if member.is_none() && constructive_member(&w, t, &cfg.phi, &cfg.r, max_bits)? {
            violations.push(format!("sample {index}: constructive witness at T = {t} but no membership"));
        }
    }
    Ok(SampleResult {
        index,
        w,
        draws: draw.draws,
        gamma_phi: vb.gamma,
        argmin_q: vb.argmin,
        m: vb.m,
        u_t_hits: hits,
        violations,
    })
}

/// Monte Carlo estimate of `mes_a 𝒰_T` against `ζ_T (2φ(RT)/T)^a`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureEstimate {
    pub t: u64,
    pub zeta: u128,
    pub upper_bound: Value,
    /// `ζ_T (2(1+R)φ(RT)/(T − φ(RT)))^a`, which also accounts for the tilt of the cone.
    pub upper_bound_cone: Value,
    pub hits: usize,
    pub n_samples: usize,
    /// Hit fraction times the chart measure of the sampled region.
    pub monte_carlo: Value,
    /// One-sigma Wilson half-width of the fraction, times the chart measure.
    pub half_width: f64,
    /// `monte_carlo ≤ upper_bound + 3 half_width`.
    pub within_bound: bool,
}

/// One-sigma Wilson score half-width.
pub fn wilson_half_width(hits: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let (n, p) = (n as f64, hits as f64 / n as f64);
    (p * (1.0 - p) / n + 1.0 / (4.0 * n * n)).sqrt() / (1.0 + 1.0 / n)
}

/// `ζ_T (2(1+R)φ(RT)/(T − φ(RT)))^a`.
pub fn cone_upper_bound(t: u64, zeta: u128, inst: &SeriesInstance) -> Result<Value> {
    let tt = int(t as i64);
    let p = inst.phi.eval_at(&(&inst.r * &tt))?;
    let num = p.mul_rat(&(int(2) * (Rat::one() + &inst.r)));
    let rad = num.div(&Value::Exact(tt).sub(&p))?;
    Ok(rad.powi(inst.a as u32).mul_rat(&Rat::from_integer(BigInt::from(zeta))))
}

fn estimate_from(t: u64, zeta: u128, hits: usize, n: usize, measure: &Value, inst: &SeriesInstance) -> Result<MeasureEstimate> {
    let upper_bound = measure_upper_bound(t, zeta, inst)?;
    let upper_bound_cone = cone_upper_bound(t, zeta, inst)?;
    let frac = if n == 0 { Rat::zero() } else { Rat::new(BigInt::from(hits), BigInt::from(n)) };
    let monte_carlo = measure.mul_rat(&frac);
    let half_width = wilson_half_width(hits, n) * crate::exactnum::to_f64(&measure.hi());
    let slack = Rat::from_float(3.0 * half_width).unwrap_or_else(Rat::zero);
    let within_bound = monte_carlo.lo() <= upper_bound.hi() + slack;
    Ok(MeasureEstimate { t, zeta, upper_bound, upper_bound_cone, hits, n_samples: n, monte_carlo, half_width, within_bound })
}

/// Chart measure of the sampled region: exact for lines, else box volume
/// times the acceptance rate.
pub fn region_measure(cfg: &ExperimentConfig, draws: &[Draw]) -> Value {
    match cfg.exact_chart_measure() {
        Some(m) => Value::Exact(m),
        None => {
            let total: u64 = draws.iter().map(|d| d.draws).sum();
            let rate = if total == 0 { Rat::zero() } else { Rat::new(BigInt::from(draws.len()), BigInt::from(total)) };
            Value::Exact(cfg.chart.box_volume() * rate)
        }
    }
}

/// Standalone estimate at one `T` from `n ≥ 100` fresh samples.
pub fn measure_estimate(t: u64, cfg: &ExperimentConfig, n: usize) -> Result<MeasureEstimate> {
    if n < 100 {
        return Err(Error::invalid(format!("n = {n} is below 100")));
    }
    let max_bits = precision_from_env();
    let inst = cfg.series_instance()?;
    let (zeta, layer) = zeta_layer(t, &cfg.r, &cfg.a_span, &cfg.phi, max_bits)?;
    let draws = sample_on_a(cfg, n)?;
    let hits: Vec<bool> = draws
        .par_iter()
        .map(|d| Ok(u_t_member_in(&d.w, t, &layer, &cfg.phi, &cfg.r, max_bits)?.is_some()))
        .collect::<Result<_>>()?;
    let measure = region_measure(cfg, &draws);
    estimate_from(t, zeta, hits.iter().filter(|h| **h).count(), n, &measure, &inst)
}

/// `ζ_T` for `lo ≤ T ≤ hi`.
pub fn zeta_counts(cfg: &ExperimentConfig, lo: u64, hi: u64) -> Result<Vec<u128>> {
    let max_bits = precision_from_env();
    (lo..=hi).into_par_iter().map(|t| zeta_count(t, &cfg.r, &cfg.a_span, &cfg.phi, max_bits)).collect()
}

pub(crate) fn estimates_for(
    cfg: &ExperimentConfig,
    samples: &[SampleResult],
    zetas: &[u128],
    measure: &Value,
) -> Result<Vec<MeasureEstimate>> {
    let inst = cfg.series_instance()?;
    (cfg.t_min..=cfg.t_max)
        .map(|t| {
            let hits = samples.iter().filter(|s| s.u_t_hits.binary_search(&t).is_ok()).count();
            estimate_from(t, zetas[(t - cfg.t_min) as usize], hits, samples.len(), measure, &inst)
        })
        .collect()
}

/// Dyadic formatting helper for sample coordinates.
pub fn fmt_point(w: &[Rat]) -> Vec<String> {
    w.iter().map(crate::exactnum::fmt_dyadic).collect()
}
