//! The full pipeline and its deterministic outputs.

use std::path::Path;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde_json::json;

use super::{estimates_for, fmt_point, layers, process_sample, region_measure, sample_on_a, zeta_counts, ExperimentConfig, MeasureEstimate, SampleResult};
use crate::config::to_csv;
use crate::error::{Error, Result};
use crate::exactnum::{fmt_rat, Rat, Value};
use crate::series::{convergence_diagnostic, measure_upper_bound, Diagnostic, Verdict};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailRow {
    pub t0: u64,
    /// `Σ_{T0 ≤ T ≤ tail_max} min(upper_bound_T, 1)`.
    pub tail_bound: Value,
    /// Fraction of samples with at least two hits at `T ≥ T0`.
    pub multi_hit_fraction: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdRow {
    pub threshold: Rat,
    /// Samples whose `gamma_phi` is certainly `≥ threshold`.
    pub exceeding: usize,
    /// Samples whose enclosure straddles the threshold.
    pub undecided: usize,
}

#[derive(Clone, Debug)]
pub struct Theorem1Report {
    pub config: crate::config::KeyValues,
    pub config_hash: String,
    pub diagnostic: Diagnostic,
    pub certificate: serde_json::Value,
    pub region_measure: Value,
    pub region_measure_exact: bool,
    pub samples: Vec<SampleResult>,
    pub estimates: Vec<MeasureEstimate>,
    pub tails: Vec<TailRow>,
    pub thresholds: Vec<ThresholdRow>,
    pub zero_gamma: usize,
    pub violations: Vec<String>,
}

/// Runs the sampling experiment; refuses unless the series converges.
pub fn run_theorem1(cfg: &ExperimentConfig) -> Result<Theorem1Report> {
    let inst = cfg.series_instance()?;
    let diagnostic = convergence_diagnostic(&inst, cfg.series_n, cfg.series_rounds)?;
    if diagnostic.verdict != Verdict::Converging {
        return Err(Error::Hypothesis {
            what: format!("series diagnostic is {}: {}", diagnostic.verdict.as_str(), diagnostic.note),
            cites: "and the series … converges",
        });
    }
    let layer_points = layers(cfg)?;
    let draws = sample_on_a(cfg, cfg.samples)?;
    let measure = region_measure(cfg, &draws);
    let samples: Vec<SampleResult> = draws
        .into_par_iter()
        .enumerate()
        .map(|(i, d)| process_sample(cfg, d, i as u64, &layer_points))
        .collect::<Result<_>>()?;
    let zetas = zeta_counts(cfg, cfg.t_min, cfg.tail_max)?;
    let estimates = estimates_for(cfg, &samples, &zetas, &measure)?;

    let mut violations: Vec<String> = samples.iter().flat_map(|s| s.violations.iter().cloned()).collect();
    for e in &estimates {
        if !e.within_bound {
            violations.push(format!(
                "T = {}: Monte Carlo measure {} exceeds the bound {} by more than 3 half-widths ({:e})",
                e.t, e.monte_carlo, e.upper_bound, e.half_width
            ));
        }
    }

    // tails, summed from the top so every T0 reuses the next one
    let one = Rat::one();
    let mut tail = Value::zero();
    let mut tails_rev = Vec::new();
    for t in (cfg.t_min..=cfg.tail_max).rev() {
        let ub = measure_upper_bound(t, zetas[(t - cfg.t_min) as usize], &inst)?;
        tail = tail.add(&ub.min_rat(&one));
        if t <= cfg.t_max {
            let multi = samples.iter().filter(|s| s.u_t_hits.iter().filter(|&&h| h >= t).count() >= 2).count();
            tails_rev.push(TailRow {
                t0: t,
                tail_bound: tail.clone(),
                multi_hit_fraction: frac(multi, samples.len()),
            });
        }
    }
    tails_rev.reverse();
    for w in tails_rev.windows(2) {
        if w[1].tail_bound.lo() > w[0].tail_bound.hi() {
            violations.push(format!("tail increases from T0 = {} to {}", w[0].t0, w[1].t0));
        }
    }

    let thresholds = cfg
        .thresholds
        .iter()
        .map(|thr| {
            let exceeding = samples.iter().filter(|s| s.gamma_phi.lo() >= *thr).count();
            let below = samples.iter().filter(|s| s.gamma_phi.hi() < *thr).count();
            ThresholdRow { threshold: thr.clone(), exceeding, undecided: samples.len() - exceeding - below }
        })
        .collect();
    let zero_gamma = samples.iter().filter(|s| s.gamma_phi.hi().is_zero()).count();

    Ok(Theorem1Report {
        config: cfg.to_key_values(),
        config_hash: cfg.hash(),
        diagnostic,
        certificate: cfg.certificate.to_json(),
        region_measure_exact: cfg.exact_chart_measure().is_some(),
        region_measure: measure,
        samples,
        estimates,
        tails: tails_rev,
        thresholds,
        zero_gamma,
        violations,
    })
}

fn frac(k: usize, n: usize) -> Rat {
    if n == 0 {
        Rat::zero()
    } else {
        Rat::new(BigInt::from(k), BigInt::from(n))
    }
}

impl Theorem1Report {
    pub fn to_json(&self) -> serde_json::Value {
        let mut gammas: Vec<Rat> = self.samples.iter().map(|s| s.gamma_phi.lo()).collect();
        gammas.sort();
        let quantile = |q: usize| gammas.get((gammas.len().saturating_sub(1)) * q / 4).map(fmt_rat);
        json!({
            "config": self.config.to_json(),
            "config_hash": self.config_hash,
            "diagnostic": self.diagnostic.to_json(),
            "certificate": self.certificate,
            "region_measure": self.region_measure.to_string(),
            "region_measure_exact": self.region_measure_exact,
            "samples": self.samples.len(),
            "gamma_phi": {
                "zero": self.zero_gamma,
                "quartiles_lo": (0..=4).map(quantile).collect::<Vec<_>>(),
                "thresholds": self.thresholds.iter().map(|t| json!({
                    "threshold": fmt_rat(&t.threshold),
                    "exceeding": t.exceeding,
                    "undecided": t.undecided,
                })).collect::<Vec<_>>(),
            },
            "measure_estimates": self.estimates.iter().map(|e| json!({
                "T": e.t,
                "zeta": e.zeta.to_string(),
                "upper_bound": e.upper_bound.to_string(),
                "upper_bound_cone": e.upper_bound_cone.to_string(),
                "hits": e.hits,
                "monte_carlo": e.monte_carlo.to_string(),
                "half_width": format!("{:e}", e.half_width),
                "within_bound": e.within_bound,
            })).collect::<Vec<_>>(),
            "violations": self.violations,
        })
    }

    /// `index,w_1..w_d,draws,gamma_phi,argmin_q,m,hits`.
    pub fn samples_csv(&self) -> Result<String> {
        let d = self.samples.first().map_or(0, |s| s.w.len());
        let mut header = vec!["index".to_string()];
        header.extend((1..=d).map(|j| format!("w{j}")));
        header.extend(["draws", "gamma_phi", "argmin_q", "m", "hits"].map(String::from));
        let rows = self.samples.iter().map(|r| {
            let hits: Vec<String> = r.u_t_hits.iter().map(u64::to_string).collect();
            let mut row = vec![r.index.to_string()];
            row.extend(fmt_point(&r.w));
            row.extend([r.draws.to_string(), r.gamma_phi.to_string(), r.argmin_q.to_string(), fmt_rat(&r.m), hits.join(" ")]);
            row
        });
        to_csv(&header, rows)
    }

    /// `T0,tail_bound,multi_hit_fraction`.
    pub fn tails_csv(&self) -> Result<String> {
        let header = ["T0", "tail_bound", "multi_hit_fraction"].map(String::from);
        let rows = self
            .tails
            .iter()
            .map(|r| vec![r.t0.to_string(), r.tail_bound.to_string(), fmt_rat(&r.multi_hit_fraction)]);
        to_csv(&header, rows)
    }

    /// Writes `report.json`, `samples.csv` and `tails.csv`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut json = serde_json::to_string_pretty(&self.to_json())?;
        json.push('\n');
        std::fs::write(dir.join("report.json"), json)?;
        std::fs::write(dir.join("samples.csv"), self.samples_csv()?)?;
        std::fs::write(dir.join("tails.csv"), self.tails_csv()?)?;
        Ok(())
    }
}
