//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::io::Write;
use std::time::Instant;

use badlab::exactnum::{int, Rat};
use badlab::geometry::LiftedSpan;
use badlab::lattice::{IntPoint, SlabSpec};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Prints one result line past the test harness capture and fails on `false`.
pub fn report(n: u32, name: &str, started: Instant, ok: bool, detail: &str) {
    let line = format!(
        "criterion {n:>2} [{}] {name} ({:.1} s) {detail}\n",
        if ok { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "criterion {n} failed: {detail}");
}

/// `dist_∞(x, S)` as the largest of finitely many linear forms, obtained by
/// eliminating the span coordinates from `|x − Σ t_i b_i| ≤ θ` (Fourier–Motzkin).
pub struct FmDistance {
    forms: Vec<Vec<Rat>>,
    int_forms: Option<Vec<(Vec<i128>, i128)>>,
}

#[derive(Clone)]
struct Ineq {
    t: Vec<Rat>,
    x: Vec<Rat>,
    theta: Rat,
}

impl FmDistance {
    pub fn new(span: &LiftedSpan) -> Self {
        let n = span.ambient();
        let basis = span.basis();
        let k = basis.len();
        // rows read  Σ t_i c_i + Σ x_j e_j − θ·h ≤ 0
        let mut rows: Vec<Ineq> = Vec::new();
        for j in 0..n {
            for s in [1i64, -1] {
                let sg = int(s);
                rows.push(Ineq {
                    t: basis.iter().map(|b| -(&sg * &b[j])).collect(),
                    x: (0..n).map(|i| if i == j { sg.clone() } else { Rat::zero() }).collect(),
                    theta: Rat::one(),
                });
            }
        }
        for v in 0..k {
            let (mut pos, mut neg, mut keep) = (Vec::new(), Vec::new(), Vec::new());
            for r in rows {
                if r.t[v].is_positive() {
                    pos.push(r);
                } else if r.t[v].is_negative() {
                    neg.push(r);
                } else {
                    keep.push(r);
                }
            }
            for p in &pos {
                for q in &neg {
                    let a = Rat::one() / &p.t[v];
                    let b = Rat::one() / -&q.t[v];
                    let comb = Ineq {
                        t: p.t.iter().zip(&q.t).map(|(x, y)| x * &a + y * &b).collect(),
                        x: p.x.iter().zip(&q.x).map(|(x, y)| x * &a + y * &b).collect(),
                        theta: &p.theta * &a + &q.theta * &b,
                    };
                    keep.push(comb);
                }
            }
            rows = dedup(keep);
        }
        let mut forms: Vec<Vec<Rat>> = rows
            .into_iter()
            .filter(|r| r.theta.is_positive())
            .map(|r| r.x.iter().map(|c| c / &r.theta).collect())
            .collect();
        forms.sort();
        forms.dedup();
        let int_forms = forms
            .iter()
            .map(|f| {
                let den = f.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
                let num: Option<Vec<i128>> = f.iter().map(|c| (c.numer() * (&den / c.denom())).to_i128()).collect();
                Some((num?, den.to_i128()?))
            })
            .collect();
        FmDistance { forms, int_forms }
    }

    pub fn dist(&self, x: &[Rat]) -> Rat {
        self.forms
            .iter()
            .map(|f| f.iter().zip(x).fold(Rat::zero(), |acc, (c, v)| acc + c * v))
            .fold(Rat::zero(), |m, v| if v > m { v } else { m })
    }

    pub fn dist_int(&self, x: &[i64]) -> Rat {
        let Some(forms) = &self.int_forms else {
            let xr: Vec<Rat> = x.iter().map(|v| int(*v)).collect();
            return self.dist(&xr);
        };
        let (mut bn, mut bd) = (0i128, 1i128);
        for (c, den) in forms {
            let v: i128 = c.iter().zip(x).map(|(a, b)| a * *b as i128).sum();
            if v * bd > bn * den {
                bn = v;
                bd = *den;
            }
        }
        Rat::new(BigInt::from(bn), BigInt::from(bd))
    }
}

fn dedup(rows: Vec<Ineq>) -> Vec<Ineq> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for r in rows {
        // scale so the first nonzero entry has absolute value one
        let lead = r.t.iter().chain(&r.x).chain(std::iter::once(&r.theta)).find(|c| !c.is_zero()).cloned();
        let Some(lead) = lead else { continue };
        let s = Rat::one() / lead.abs();
        let key: Vec<Rat> = r.t.iter().chain(&r.x).chain(std::iter::once(&r.theta)).map(|c| c * &s).collect();
        if seen.insert(key) {
            out.push(Ineq {
                t: r.t.iter().map(|c| c * &s).collect(),
                x: r.x.iter().map(|c| c * &s).collect(),
                theta: &r.theta * &s,
            });
        }
    }
    out
}

/// Every integer point of the bounding box, tested one by one.
pub fn naive_slab(spec: &SlabSpec, max_bits: u32) -> BTreeSet<IntPoint> {
    let fm = FmDistance::new(&spec.target);
    let n = spec.target.ambient();
    let h = (&spec.r * int(spec.t as i64)).floor().to_integer().to_i64().unwrap();
    let (lo, hi) = spec.thickness.bounds().unwrap();
    let mut out = BTreeSet::new();
    let mut z = vec![0i64; n];
    for z0 in spec.z0_range.0..=spec.z0_range.1 {
        z[0] = z0;
        let total = (2 * h + 1).pow((n - 1) as u32);
        for mut code in 0..total {
            for zj in z.iter_mut().skip(1) {
                *zj = code % (2 * h + 1) - h;
                code /= 2 * h + 1;
            }
            let d = fm.dist_int(&z);
            let inside = if d <= lo {
                true
            } else if d > hi {
                false
            } else {
                spec.thickness.admits(&d, max_bits).unwrap()
            };
            if inside {
                out.insert(z.clone());
            }
        }
    }
    out
}

pub fn nearest_int_dist(x: &Rat) -> Rat {
    let f = x - x.floor();
    let g = Rat::one() - &f;
    if f < g {
        f
    } else {
        g
    }
}

pub fn max_dist(w: &[Rat], q: u64) -> Rat {
    let q = int(q as i64);
    w.iter().map(|v| nearest_int_dist(&(v * &q))).max().unwrap_or_else(Rat::zero)
}

/// `min q·max_j ||q w_j||` over `q_lo ≤ q ≤ q_hi` (the ratio for `ψ(q) = 1/q`),
/// with the smallest minimizing `q`.
pub fn brute_inv_t_badness(w: &[Rat], q_lo: u64, q_hi: u64) -> (Rat, u64) {
    let mut best: Option<(Rat, u64)> = None;
    for q in q_lo..=q_hi {
        let r = max_dist(w, q) * int(q as i64);
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, q));
        }
    }
    best.unwrap()
}

/// Convergence of `Σ T^e (log T)^l`.
pub fn log_power_series_converges(e: f64, l: f64) -> bool {
    e < -1.0 || (e == -1.0 && l < -1.0)
}

pub fn to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap()
}
