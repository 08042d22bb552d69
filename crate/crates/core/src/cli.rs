//! Command-line front end.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::json;

use crate::badness::{def1_equivalence_audit, subspace_badness, vector_badness, SubspaceBadness};
use crate::config::{parse_vector, to_csv, KeyValues};
use crate::error::{Error, Result};
use crate::exactnum::{fmt_rat, precision_from_env, Rat, Value};
use crate::experiment::{run_theorem1, ExperimentConfig};
use crate::lattice::{enumerate_slab, half_dilation_check, random_translates, verify_omega_trivial, OmegaSpec, SlabSpec};
use crate::series::{attach_counts, convergence_diagnostic, partial_sum};

#[derive(Parser, Debug)]
#[command(name = "badlab", version, about = "Exact experiments on badly approximable vectors and subspaces")]
pub struct Cli {
    /// Worker threads (outputs do not depend on it).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Configuration file (key = value, or JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Badness certificate for B, and optionally the empirical badness of a vector.
    Badness {
        #[command(flatten)]
        common: Common,
        /// Which configured subspace to scan: B or A.
        #[arg(long, default_value = "B")]
        target: String,
        /// Rate the badness is measured against: psi or phi.
        #[arg(long, default_value = "psi")]
        rate: String,
        /// Scan height for the subspace (defaults to the configured certificate height).
        #[arg(long)]
        height: Option<u64>,
        /// Vector `w` (comma separated or preset) scanned against phi.
        #[arg(long)]
        vector: Option<String>,
        #[arg(long = "X", default_value_t = 10_000)]
        x: u64,
    },
    /// Lists the integer points of Ω_T, Π_T or Z_T.
    Enumerate {
        #[command(flatten)]
        common: Common,
        #[arg(long = "T")]
        t: u64,
        /// omega | pi | layer
        #[arg(long, default_value = "pi")]
        set: String,
    },
    /// Series table and convergence diagnostic.
    Series {
        #[command(flatten)]
        common: Common,
        #[arg(long = "N")]
        n: u64,
        #[arg(long, default_value_t = 3)]
        rounds: u32,
        /// Lattice counts are attached for T up to this value (defaults to T.max).
        #[arg(long)]
        counts_max: Option<u64>,
    },
    /// Sampling experiment on A.
    Montecarlo {
        #[command(flatten)]
        common: Common,
    },
    /// Ω_T triviality for every T up to the bound, then the packing check at T.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long = "T")]
        t: u64,
        #[arg(long, default_value_t = 100)]
        translates: usize,
        #[arg(long, default_value_t = 4)]
        pairs: usize,
    },
}

/// Exit code for an error: 2 for bad input, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Parse(_)
        | Error::Hypothesis { .. }
        | Error::InvalidRate(_)
        | Error::Invalid(_)
        | Error::Dimension { .. }
        | Error::Rank(_)
        | Error::Domain { .. }
        | Error::NonPositive(_) => 2,
        _ => 1,
    }
}

/// Loads and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::from_key_values(&KeyValues::load(path)?)
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

struct Manifest {
    command: &'static str,
    params: serde_json::Value,
    start: u64,
}

impl Manifest {
    fn write(self, out: &Path, cfg: &ExperimentConfig, status: &str) -> Result<()> {
        let m = json!({
            "tool": "badlab",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "params": self.params,
            "config": cfg.to_key_values().to_json(),
            "config_hash": cfg.hash(),
            "seed": cfg.seed,
            "precision_bits": precision_from_env(),
            "start_unix": self.start,
            "end_unix": now(),
            "status": status,
        });
        write_text(out, "manifest.json", &(serde_json::to_string_pretty(&m)? + "\n"))
    }
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

fn write_json(dir: &Path, name: &str, v: &serde_json::Value) -> Result<()> {
    write_text(dir, name, &(serde_json::to_string_pretty(v)? + "\n"))
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(j) = cli.jobs {
        // a second initialization (tests) is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("badlab: {e}");
            exit_code(&e)
        }
    }
}

/// Runs one command; `Ok(1)` signals a detected invariant violation.
pub fn dispatch(cmd: &Command) -> Result<i32> {
    let start = now();
    match cmd {
        Command::Badness { common, target, rate, height, vector, x } => {
            let cfg = parse_config(&common.config)?;
            let max_bits = precision_from_env();
            let h = height.unwrap_or(cfg.certificate.height);
            let span = match target.as_str() {
                "B" => &cfg.b_span,
                "A" => &cfg.a_span,
                other => return Err(Error::Config(format!("--target {other:?}: expected B or A"))),
            };
            let f = match rate.as_str() {
                "psi" => &cfg.psi,
                "phi" => &cfg.phi,
                other => return Err(Error::Config(format!("--rate {other:?}: expected psi or phi"))),
            };
            let mut out = match subspace_badness(span, f, h, max_bits)? {
                SubspaceBadness::Certificate(c) => {
                    let mut v = c.to_json();
                    v["gamma"] = json!(fmt_rat(&c.gamma));
                    v["witness"] = json!(c.witness);
                    v["height"] = json!(c.height);
                    v
                }
                SubspaceBadness::ZeroHit { witness, height } => json!({ "gamma": "0", "witness": witness, "height": height, "zero_hit": true }),
            };
            out["target"] = json!(target);
            out["rate"] = json!(rate);
            if let Some(v) = vector {
                let w = parse_vector(v)?;
                if w.len() != cfg.d {
                    return Err(Error::Dimension { expected: cfg.d, got: w.len() });
                }
                let vb = vector_badness(&w, &cfg.phi, *x, max_bits)?;
                let audit = def1_equivalence_audit(&w, &cfg.phi, *x, max_bits)?;
                out["vector"] = json!({
                    "gamma": vb.gamma.to_string(),
                    "argmin_q": vb.argmin,
                    "m": fmt_rat(&vb.m),
                    "X": x,
                    "sandwich_violations": audit.violations.len(),
                    "min_ratio": audit.min_ratio.as_ref().map(fmt_rat),
                    "max_ratio": audit.max_ratio.as_ref().map(fmt_rat),
                });
            }
            write_json(&common.out, "badness.json", &out)?;
            println!("{}", serde_json::to_string_pretty(&out)?);
            let m = Manifest { command: "badness", params: json!({ "target": target, "rate": rate, "height": h, "vector": vector, "X": x }), start };
            m.write(&common.out, &cfg, "ok")?;
            Ok(0)
        }
        Command::Enumerate { common, t, set } => {
            let cfg = parse_config(&common.config)?;
            let spec = match set.as_str() {
                "omega" => SlabSpec::omega(&cfg.b_span, &cfg.gamma, &cfg.psi, &cfg.r, *t),
                "pi" => SlabSpec::pi(&cfg.a_span, &cfg.phi, &cfg.r, *t),
                "layer" => SlabSpec::layer(&cfg.a_span, &cfg.phi, &cfg.r, *t),
                other => return Err(Error::Config(format!("--set {other:?}: expected omega, pi or layer"))),
            };
            let clock = std::time::Instant::now();
            let pts = enumerate_slab(&spec, precision_from_env())?;
            let wall_time_ms = clock.elapsed().as_millis() as u64;
            let header: Vec<String> = (0..=cfg.d).map(|j| format!("z{j}")).collect();
            let csv = to_csv(&header, pts.iter().map(|p| p.iter().map(i64::to_string).collect()))?;
            write_text(&common.out, "points.csv", &csv)?;
            let summary = json!({
                "T": t,
                "R": fmt_rat(&cfg.r),
                "set": set,
                "count": pts.len(),
                "thickness": spec.thickness.describe(),
                "wall_time_ms": wall_time_ms,
            });
            write_json(&common.out, "summary.json", &summary)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            let m = Manifest { command: "enumerate", params: json!({ "T": t, "set": set }), start };
            m.write(&common.out, &cfg, "ok")?;
            Ok(0)
        }
        Command::Series { common, n, rounds, counts_max } => {
            let cfg = parse_config(&common.config)?;
            let inst = cfg.series_instance()?;
            let max_bits = precision_from_env();
            let mut ps = partial_sum(*n, &inst)?;
            let cmax = counts_max.unwrap_or(cfg.t_max).min(*n);
            attach_counts(&mut ps.terms, &inst, &cfg.a_span, cmax, max_bits)?;
            let header = ["T", "mu", "lambda", "term", "partial_sum", "zeta", "pi_count", "ratio_int", "ratio_cumzeta"].map(String::from);
            let mut rows = Vec::with_capacity(ps.terms.len());
            let mut cum: u128 = 0;
            for (row, s) in ps.terms.iter().zip(&ps.sums) {
                let (zeta, pi, ri, rc) = match (row.zeta, row.pi_count) {
                    (Some(z), Some(p)) => {
                        cum += z;
                        let inv = row.mu.recip()?;
                        let ri = inv.mul_rat(&Rat::from_integer(BigInt::from(p)));
                        let rc = inv.mul_rat(&Rat::from_integer(BigInt::from(cum)));
                        (z.to_string(), p.to_string(), ri.to_string(), rc.to_string())
                    }
                    _ => Default::default(),
                };
                rows.push(vec![row.t.to_string(), row.mu.to_string(), row.lambda.to_string(), row.term.to_string(), s.to_string(), zeta, pi, ri, rc]);
            }
            let csv = to_csv(&header, rows)?;
            write_text(&common.out, "series.csv", &csv)?;
            let mut summary = json!({
                "N": n,
                "rows": ps.terms.len(),
                "max_width": fmt_rat(&ps.max_width),
                "last_partial_sum": ps.sums.last().map(Value::to_string),
            });
            if *n >= 1000 {
                let diag = convergence_diagnostic(&inst, *n, *rounds)?;
                summary["diagnostic"] = diag.to_json();
            }
            write_json(&common.out, "series.json", &summary)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            let m = Manifest { command: "series", params: json!({ "N": n, "rounds": rounds, "counts_max": cmax }), start };
            m.write(&common.out, &cfg, "ok")?;
            Ok(0)
        }
        Command::Montecarlo { common } => {
            let cfg = parse_config(&common.config)?;
            let report = run_theorem1(&cfg)?;
            report.write(&common.out)?;
            let status = if report.violations.is_empty() { "ok" } else { "violations" };
            println!("{} samples, {} violations, diagnostic {}", report.samples.len(), report.violations.len(), report.diagnostic.verdict.as_str());
            for v in &report.violations {
                eprintln!("violation: {v}");
            }
            let m = Manifest { command: "montecarlo", params: json!({}), start };
            m.write(&common.out, &cfg, status)?;
            Ok(if report.violations.is_empty() { 0 } else { 1 })
        }
        Command::Verify { common, t, translates, pairs } => {
            let cfg = parse_config(&common.config)?;
            let max_bits = precision_from_env();
            let need = crate::exactnum::ceil_int(&(&cfg.r * crate::exactnum::int(*t as i64)));
            if BigInt::from(cfg.certificate.height) < need {
                return Err(Error::Hypothesis {
                    what: format!("certificate height {} is below R * T = {need}", cfg.certificate.height),
                    cites: "Let B be a ψ-badly approximable affine subspace",
                });
            }
            let mut counterexample = None;
            for s in 1..=*t {
                if let Some(p) = verify_omega_trivial(&cfg.b_span, &cfg.gamma, &cfg.psi, &cfg.r, s, max_bits)? {
                    counterexample = Some((s, p));
                    break;
                }
            }
            let omega = OmegaSpec { b_span: cfg.b_span.clone(), gamma: cfg.gamma.clone(), psi: cfg.psi.clone(), r: cfg.r.clone(), t: *t };
            let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
            let cs = random_translates(&omega, *translates, &mut rng, max_bits)?;
            let rep = half_dilation_check(&omega, &cs, *pairs, &mut rng, max_bits)?;
            let ok = counterexample.is_none() && rep.violation.is_none() && rep.pair_failures == 0;
            let out = json!({
                "gamma": fmt_rat(&cfg.gamma),
                "gamma_certified": cfg.gamma <= cfg.certificate.gamma,
                "T": t,
                "omega_trivial": counterexample.is_none(),
                "counterexample": counterexample.as_ref().map(|(s, p)| json!({ "T": s, "point": p })),
                "translates": rep.translates,
                "occupied": rep.occupied,
                "max_points": rep.max_points,
                "pair_checks": rep.pair_checks,
                "pair_failures": rep.pair_failures,
                "packing_violation": rep.violation.as_ref().map(|v| json!({ "x": v.x, "y": v.y, "difference_in_omega": v.difference_in_omega })),
            });
            write_json(&common.out, "verify.json", &out)?;
            println!("{}", serde_json::to_string_pretty(&out)?);
            let m = Manifest { command: "verify", params: json!({ "T": t, "translates": translates, "pairs": pairs }), start };
            m.write(&common.out, &cfg, if ok { "ok" } else { "violations" })?;
            Ok(if ok { 0 } else { 1 })
        }
    }
}
