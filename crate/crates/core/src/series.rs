//! The scale `μ_T`, the increments `λ_T`, partial sums of `Σ μ_T λ_T` and
//! convergence diagnostics.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::json;

use crate::badness::BadnessCertificate;
use crate::error::{Error, Result};
use crate::exactnum::{ceil_int, fmt_rat, int, precision_from_env, rat, to_f64, Rat, Value, START_BITS};
use crate::geometry::LiftedSpan;
use crate::lattice::{count_slab, zeta_count, SlabSpec};
use crate::rates::RateFunction;

/// Exact partial sums switch to intervals once the denominator grows past this.
pub const EXACT_SUM_DENOM_BITS: u64 = 4096;
/// Fractional bits of the running sum once it is an interval.
pub const SUM_BITS: u32 = 128;

/// The data that fixes the series: rates, radius and dimensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesInstance {
    pub psi: RateFunction,
    pub phi: RateFunction,
    pub r: Rat,
    pub a: usize,
    pub b: usize,
}

impl SeriesInstance {
    pub fn new(psi: RateFunction, phi: RateFunction, r: Rat, a: usize, b: usize) -> Result<Self> {
        check_dims(a, b)?;
        if r < int(1) {
            return Err(Error::invalid(format!("R = {} must be >= 1", fmt_rat(&r))));
        }
        Ok(SeriesInstance { psi, phi, r, a, b })
    }

    /// First `T >= 1` with `RT` inside both rate domains.
    pub fn start(&self) -> u64 {
        let need = self.psi.domain_start().max(self.phi.domain_start());
        ceil_int(&(need / &self.r)).to_u64().unwrap_or(1).max(1)
    }

    fn rt(&self, t: u64) -> Rat {
        &self.r * int(t as i64)
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if b >= a {
        return Err(Error::Hypothesis {
            what: format!("b = {b} is not below a = {a}"),
            cites: "0 ⩽ b = dim B < a = dim A",
        });
    }
    Ok(())
}

fn int_u(t: u64) -> Rat {
    Rat::from_integer(BigInt::from(t))
}

/// `(T/ψ(RT))^(a−b)` at `bits` when not rational.
pub fn mu_term_bits(t: u64, r: &Rat, psi: &RateFunction, a: usize, b: usize, bits: u32) -> Result<Value> {
    check_dims(a, b)?;
    let p = psi.eval_bits(&(r * int_u(t)), bits)?;
    Ok(Value::Exact(int_u(t)).div(&p)?.powi((a - b) as u32))
}

/// `μ_T = (T/ψ(RT))^(a−b)`.
pub fn mu_term(t: u64, r: &Rat, psi: &RateFunction, a: usize, b: usize) -> Result<Value> {
    mu_term_bits(t, r, psi, a, b, crate::rates::EVAL_BITS)
}

/// `(φ(RT)/T)^a`.
fn shrink(t: u64, r: &Rat, phi: &RateFunction, a: usize, bits: u32) -> Result<Value> {
    let p = phi.eval_bits(&(r * int_u(t)), bits)?;
    Ok(p.div(&Value::Exact(int_u(t)))?.powi(a as u32))
}

/// `λ_T = (φ(RT)/T)^a − (φ(R(T+1))/(T+1))^a`, refined until its sign is certain.
pub fn lambda_term(t: u64, r: &Rat, phi: &RateFunction, a: usize) -> Result<Value> {
    let max_bits = precision_from_env();
    let mut bits = START_BITS.min(max_bits);
    loop {
        let l = shrink(t, r, phi, a, bits)?.sub(&shrink(t + 1, r, phi, a, bits)?);
        if l.is_certainly_positive() {
            return Ok(l);
        }
        if l.is_exact() || bits >= max_bits {
            return Err(Error::Invariant(format!("lambda at T = {t} is not certainly positive: {l}")));
        }
        bits = (bits * 2).min(max_bits);
    }
}

/// One row of the series table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesTerm {
    pub t: u64,
    pub mu: Value,
    pub lambda: Value,
    /// `μ_T λ_T`.
    pub term: Value,
    pub zeta: Option<u128>,
    pub pi_count: Option<u128>,
    pub nu: Option<u128>,
}

/// Terms for `lo ≤ T ≤ hi`, reusing `(φ(R(T+1))/(T+1))^a` as the next `T`'s head.
fn term_block(inst: &SeriesInstance, lo: u64, hi: u64) -> Result<Vec<SeriesTerm>> {
    let max_bits = precision_from_env();
    let mut out = Vec::with_capacity((hi + 1 - lo) as usize);
    let mut head: Option<Value> = None;
    let mut bits = START_BITS.min(max_bits);
    let mut t = lo;
    while t <= hi {
        let g0 = match head.take() {
            Some(g) => g,
            None => shrink(t, &inst.r, &inst.phi, inst.a, bits)?,
        };
        let g1 = shrink(t + 1, &inst.r, &inst.phi, inst.a, bits)?;
        let lambda = g0.sub(&g1);
        if !lambda.is_certainly_positive() {
            if lambda.is_exact() || bits >= max_bits {
                return Err(Error::Invariant(format!("lambda at T = {t} is not certainly positive: {lambda}")));
            }
            bits = (bits * 2).min(max_bits);
            continue;
        }
        let mu = mu_term_bits(t, &inst.r, &inst.psi, inst.a, inst.b, bits)?;
        let term = mu.mul(&lambda);
        out.push(SeriesTerm { t, mu, lambda, term, zeta: None, pi_count: None, nu: None });
        head = Some(g1);
        t += 1;
    }
    Ok(out)
}

/// Terms for `start ≤ T ≤ n`, computed in parallel blocks.
pub fn series_terms(inst: &SeriesInstance, n: u64) -> Result<Vec<SeriesTerm>> {
    const BLOCK: u64 = 512;
    let start = inst.start();
    if n < start {
        return Ok(Vec::new());
    }
    let blocks: Vec<(u64, u64)> = (start..=n)
        .step_by(BLOCK as usize)
        .map(|lo| (lo, (lo + BLOCK - 1).min(n)))
        .collect();
    let parts: Vec<Result<Vec<SeriesTerm>>> = blocks.par_iter().map(|&(lo, hi)| term_block(inst, lo, hi)).collect();
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn denom_bits(v: &Value) -> u64 {
    match v {
        Value::Exact(x) => x.denom().bits(),
        Value::Approx(_) => 0,
    }
}

/// Adds in index order; exact until the denominator becomes unwieldy.
pub fn accumulate(terms: &[Value]) -> Vec<Value> {
    let mut sum = Value::zero();
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        sum = sum.add(t);
        if denom_bits(&sum) > EXACT_SUM_DENOM_BITS {
            sum = Value::Approx(sum.to_interval(SUM_BITS));
        }
        out.push(sum.clone());
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialSums {
    pub terms: Vec<SeriesTerm>,
    /// `S_T` for each row of `terms`.
    pub sums: Vec<Value>,
    /// Widest enclosure among the partial sums.
    pub max_width: Rat,
}

/// Partial sums of `Σ μ_T λ_T` from the first admissible `T` up to `n`.
pub fn partial_sum(n: u64, inst: &SeriesInstance) -> Result<PartialSums> {
    crate::rates::require_admissible(&inst.psi, &inst.phi, &(&inst.r * int_u(n.max(1))), precision_from_env())?;
    let terms = series_terms(inst, n)?;
    let vals: Vec<Value> = terms.iter().map(|t| t.term.clone()).collect();
    let sums = accumulate(&vals);
    let max_width = sums.iter().map(Value::width).max().unwrap_or_else(Rat::zero);
    Ok(PartialSums { terms, sums, max_width })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Converging,
    Diverging,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Converging => "converging",
            Verdict::Diverging => "diverging",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// The term behaves like `T^e (log T)^ℓ`; returns `(e, ℓ)`.
pub fn term_exponents(inst: &SeriesInstance) -> (Rat, Rat) {
    let ab = int((inst.a - inst.b) as i64);
    let a = int(inst.a as i64);
    let one = int(1);
    let e = (&one + inst.psi.alpha()) * &ab - &a * (&one + inst.phi.alpha()) - &one;
    let l = inst.psi.delta() * &ab - &a * inst.phi.delta();
    (e, l)
}

/// Closed-form verdict: converges iff `e < −1`, or `e = −1` and `ℓ < −1`.
pub fn closed_form_verdict(inst: &SeriesInstance) -> Verdict {
    let (e, l) = term_exponents(inst);
    let m1 = int(-1);
    match e.cmp(&m1) {
        Ordering::Less => Verdict::Converging,
        Ordering::Greater => Verdict::Diverging,
        Ordering::Equal if l < m1 => Verdict::Converging,
        Ordering::Equal => Verdict::Diverging,
    }
}

/// Numeric summary of the doubling rounds.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub verdict: Verdict,
    pub closed_form: Verdict,
    pub exponent: Rat,
    pub log_exponent: Rat,
    /// `e = ℓ = −1`: the series diverges like `Σ 1/(T log T)`.
    pub boundary: bool,
    /// Verdict read off the increments alone.
    pub numeric: Verdict,
    /// `(2^k N, S_{2^k N})`.
    pub checkpoints: Vec<(u64, f64)>,
    /// `S_{2^k N} − S_{2^(k−1) N}`.
    pub increments: Vec<f64>,
    /// Power exponent fitted to the last two increments.
    pub fitted_exponent: f64,
    /// Log exponent fitted assuming the power exponent is −1.
    pub fitted_log_exponent: f64,
    /// Float terms agree with interval enclosures at the checkpoints.
    pub float_check: bool,
    pub note: String,
}

impl Diagnostic {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "verdict": self.verdict.as_str(),
            "closed_form": self.closed_form.as_str(),
            "numeric": self.numeric.as_str(),
            "term_exponent": fmt_rat(&self.exponent),
            "term_log_exponent": fmt_rat(&self.log_exponent),
            "boundary": self.boundary,
            "checkpoints": self.checkpoints.iter().map(|(t, s)| json!([t, format!("{s:e}")])).collect::<Vec<_>>(),
            "increments": self.increments.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>(),
            "fitted_exponent": format!("{:.6}", self.fitted_exponent),
            "fitted_log_exponent": format!("{:.6}", self.fitted_log_exponent),
            "float_check": self.float_check,
            "note": self.note,
        })
    }
}

fn rate_f64(f: &RateFunction, t: f64) -> f64 {
    let mut v = to_f64(f.c()) * t.powf(-to_f64(f.alpha()));
    if !f.delta().is_zero() {
        v *= t.ln().powf(-to_f64(f.delta()));
    }
    v
}

/// Float term, used only for the tail evidence.
fn term_f64(inst: &SeriesInstance, t: u64, r: f64) -> f64 {
    let (a, b) = (inst.a as i32, inst.b as i32);
    let tf = t as f64;
    let mu = (tf / rate_f64(&inst.psi, r * tf)).powi(a - b);
    let g = |s: f64| (rate_f64(&inst.phi, r * s) / s).powi(a);
    mu * (g(tf) - g(tf + 1.0))
}

/// Compensated sum of float terms over `lo..=hi`.
fn block_sum_f64(inst: &SeriesInstance, lo: u64, hi: u64) -> f64 {
    let r = to_f64(&inst.r);
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for t in lo..=hi {
        let x = term_f64(inst, t, r);
        let u = s + x;
        c += if s.abs() >= x.abs() { (s - u) + x } else { (x - u) + s };
        s = u;
    }
    s + c
}

/// Agreement band between fitted and analytic exponents.
const EXPONENT_TOL: f64 = 0.25;
const LOG_EXPONENT_TOL: f64 = 0.5;

/// Compares the increments over `[2^(k−1) N, 2^k N]` for `k = 1..=rounds`
/// with the closed-form exponent test.
///
/// The final verdict is the closed-form one when the fitted exponents agree
/// with it, and inconclusive otherwise.
pub fn convergence_diagnostic(inst: &SeriesInstance, n: u64, rounds: u32) -> Result<Diagnostic> {
    if n < 1000 {
        return Err(Error::invalid(format!("N = {n} is below 1000")));
    }
    if rounds < 2 {
        return Err(Error::invalid("at least two doubling rounds are needed"));
    }
    let start = inst.start();
    let mut edges = vec![n];
    for k in 1..=rounds {
        edges.push(n << k);
    }
    let head = block_sum_f64(inst, start, n);
    let increments: Vec<f64> = edges
        .windows(2)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|w| block_sum_f64(inst, w[0] + 1, w[1]))
        .collect();
    let mut checkpoints = vec![(n, head)];
    let mut s = head;
    for (i, inc) in increments.iter().enumerate() {
        s += inc;
        checkpoints.push((edges[i + 1], s));
    }

    // float terms against rigorous enclosures
    let r = to_f64(&inst.r);
    let mut float_check = true;
    for &t in &edges {
        let exact = series_terms_at(inst, t)?;
        let (lo, hi) = (to_f64(&exact.lo()), to_f64(&exact.hi()));
        let x = term_f64(inst, t, r);
        let slack = 1e-6 * x.abs();
        if x < lo - slack || x > hi + slack {
            float_check = false;
        }
    }

    let k = increments.len();
    let (i1, i2) = (increments[k - 2], increments[k - 1]);
    let ratio = i2 / i1;
    let fitted_exponent = ratio.log2() - 1.0;
    let mid = |j: usize| ((edges[j] as f64) * (edges[j + 1] as f64)).sqrt().ln();
    let fitted_log_exponent = ratio.ln() / (mid(k - 1) / mid(k - 2)).ln();

    let numeric = if !(i1 > 0.0 && i2 > 0.0) {
        Verdict::Inconclusive
    } else if fitted_exponent < -1.0 - EXPONENT_TOL {
        Verdict::Converging
    } else if fitted_exponent > -1.0 + EXPONENT_TOL {
        Verdict::Diverging
    } else if fitted_log_exponent < -1.0 - EXPONENT_TOL {
        Verdict::Converging
    } else if fitted_log_exponent > -1.0 + EXPONENT_TOL {
        Verdict::Diverging
    } else {
        Verdict::Inconclusive
    };

    let (e, l) = term_exponents(inst);
    let closed = closed_form_verdict(inst);
    let boundary = e == int(-1) && l == int(-1);
    let mut agree = (fitted_exponent - to_f64(&e)).abs() <= EXPONENT_TOL && float_check;
    if e == int(-1) {
        agree &= (fitted_log_exponent - to_f64(&l)).abs() <= LOG_EXPONENT_TOL;
    }
    let verdict = if agree { closed } else { Verdict::Inconclusive };
    let mut note = format!(
        "term ~ T^({}) (log T)^({}); fitted exponents {fitted_exponent:.4}, {fitted_log_exponent:.4}",
        fmt_rat(&e),
        fmt_rat(&l)
    );
    if boundary {
        note.push_str("; boundary case, diverges like sum 1/(T log T) and lies outside the strict hypothesis");
    }
    if !agree {
        note.push_str("; numeric evidence disagrees with the exponent analysis");
    }
    Ok(Diagnostic {
        verdict,
        closed_form: closed,
        exponent: e,
        log_exponent: l,
        boundary,
        numeric,
        checkpoints,
        increments,
        fitted_exponent,
        fitted_log_exponent,
        float_check,
        note,
    })
}

/// Rigorous enclosure of the single term `μ_T λ_T`.
pub fn series_terms_at(inst: &SeriesInstance, t: u64) -> Result<Value> {
    Ok(mu_term(t, &inst.r, &inst.psi, inst.a, inst.b)?.mul(&lambda_term(t, &inst.r, &inst.phi, inst.a)?))
}

/// Fills `zeta` and `pi_count` for rows with `T ≤ t_max`.
pub fn attach_counts(terms: &mut [SeriesTerm], inst: &SeriesInstance, a_span: &LiftedSpan, t_max: u64, max_bits: u32) -> Result<()> {
    let counts: Vec<Result<(u128, u128)>> = terms
        .par_iter()
        .filter(|row| row.t <= t_max)
        .map(|row| {
            let z = zeta_count(row.t, &inst.r, a_span, &inst.phi, max_bits)?;
            let p = count_slab(&SlabSpec::pi(a_span, &inst.phi, &inst.r, row.t), max_bits)?;
            Ok((z, p))
        })
        .collect();
    for (row, c) in terms.iter_mut().filter(|row| row.t <= t_max).zip(counts) {
        let (z, p) = c?;
        row.zeta = Some(z);
        row.pi_count = Some(p);
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioRow {
    pub t: u64,
    pub mu: Value,
    pub pi_count: u128,
    pub cum_zeta: u128,
    /// `#Π_T / μ_T`.
    pub ratio_int: Value,
    /// `Σ_{j ≤ T} ζ_j / μ_T`.
    pub ratio_cumzeta: Value,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioScan {
    pub rows: Vec<RatioRow>,
    /// Median midpoints: overall and over the top quartile of `T`.
    pub median_int: Rat,
    pub top_median_int: Rat,
    pub median_cumzeta: Rat,
    pub top_median_cumzeta: Rat,
    /// Top-quartile median exceeds twice the overall median.
    pub red_flag_int: bool,
    pub red_flag_cumzeta: bool,
}

fn midpoint(v: &Value) -> Rat {
    (v.lo() + v.hi()) * rat(1, 2)
}

fn median(mut xs: Vec<Rat>) -> Rat {
    xs.sort();
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2].clone()
    } else {
        (&xs[n / 2 - 1] + &xs[n / 2]) * rat(1, 2)
    }
}

/// Tabulates `#Π_T/μ_T` and `(Σ_{j≤T} ζ_j)/μ_T` for `t_lo ≤ T ≤ t_hi`.
pub fn packing_ratio_scan(
    t_lo: u64,
    t_hi: u64,
    inst: &SeriesInstance,
    a_span: &LiftedSpan,
    certificate: &BadnessCertificate,
    max_bits: u32,
) -> Result<RatioScan> {
    if t_hi < t_lo {
        return Err(Error::invalid(format!("empty T range [{t_lo}, {t_hi}]")));
    }
    let need = ceil_int(&(&inst.r * int_u(t_hi)));
    if BigInt::from(certificate.height) < need {
        return Err(Error::invalid(format!(
            "certificate height {} is below R * T_max = {need}",
            certificate.height
        )));
    }
    let start = inst.start();
    let t_lo = t_lo.max(start);
    let zetas: Vec<Result<u128>> = (start..=t_hi)
        .into_par_iter()
        .map(|j| zeta_count(j, &inst.r, a_span, &inst.phi, max_bits))
        .collect();
    let rows: Vec<Result<RatioRow>> = (t_lo..=t_hi)
        .into_par_iter()
        .map(|t| {
            let mu = mu_term(t, &inst.r, &inst.psi, inst.a, inst.b)?;
            let pi_count = count_slab(&SlabSpec::pi(a_span, &inst.phi, &inst.r, t), max_bits)?;
            let inv = mu.recip()?;
            Ok(RatioRow {
                t,
                ratio_int: inv.mul_rat(&Rat::from_integer(BigInt::from(pi_count))),
                ratio_cumzeta: inv.clone(),
                mu,
                pi_count,
                cum_zeta: 0,
            })
        })
        .collect();
    let mut cum = Vec::with_capacity(zetas.len());
    let mut acc = 0u128;
    for z in zetas {
        acc += z?;
        cum.push(acc);
    }
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        let mut r = r?;
        r.cum_zeta = cum[(r.t - start) as usize];
        r.ratio_cumzeta = r.ratio_cumzeta.mul_rat(&Rat::from_integer(BigInt::from(r.cum_zeta)));
        out.push(r);
    }
    let top_from = out.len() - out.len().div_ceil(4);
    let mids = |f: fn(&RatioRow) -> &Value, rows: &[RatioRow]| rows.iter().map(|r| midpoint(f(r))).collect::<Vec<_>>();
    let median_int = median(mids(|r| &r.ratio_int, &out));
    let top_median_int = median(mids(|r| &r.ratio_int, &out[top_from..]));
    let median_cumzeta = median(mids(|r| &r.ratio_cumzeta, &out));
    let top_median_cumzeta = median(mids(|r| &r.ratio_cumzeta, &out[top_from..]));
    Ok(RatioScan {
        red_flag_int: top_median_int > &median_int * int(2),
        red_flag_cumzeta: top_median_cumzeta > &median_cumzeta * int(2),
        rows: out,
        median_int,
        top_median_int,
        median_cumzeta,
        top_median_cumzeta,
    })
}

/// `ζ_T (2φ(RT)/T)^a`, the measure bound for the union of balls at level `T`.
pub fn measure_upper_bound(t: u64, zeta: u128, inst: &SeriesInstance) -> Result<Value> {
    let p = inst.phi.eval_at(&inst.rt(t))?;
    let rad = p.mul_rat(&(int(2) / int_u(t)));
    Ok(rad.powi(inst.a as u32).mul_rat(&Rat::from_integer(BigInt::from(zeta))))
}
