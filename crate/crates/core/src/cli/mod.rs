//! Config-driven experiment runner behind the `heavytail` binary.
//!
//! Every command writes one CSV table, `summary.json` and `manifest.json` into the output
//! directory. CSV floats use 17 significant digits. Column orders:
//!
//! | command | file | columns |
//! |---|---|---|
//! | simulate | `path.csv` | `t, x1..xd` |
//! | cluster-index | `cluster_index.csv` | `route, theta1..thetad, value, std_error, jackknife_se, baseline, horizon, replicas, exact` |
//! | ldp-scan | `ldp_scan.csv` | `x, ratio, ratio_se, exceedances, target` |
//! | stable-check | `stable_cf.csv` | `direction, x, empirical_re, empirical_im, theoretical_re, theoretical_im` |
//! | drift-check | `drift.csv` | `state, v, conditional_mean, std_error` |
//! | regen-check | `cycles.csv` | `cycle, start, length, sum1..sumd` |
//! | report | `report.csv` | `theta1..thetad, b, std_error` |

mod config;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub use config::{parse_config, Command, ConfigError, ConfigErrors, ExperimentConfig, Knobs};

use crate::cluster::{
    closed_form_cluster_index, cluster_index_tail_process, direction_grid, extremal_index,
    telescoping_difference, var1_cluster_index_exact, ClusterIndexEstimate, Direction,
    LimitMeasureEvaluator,
};
use crate::error::Error;
use crate::limits::{
    choose_centering, fitted_marginal_tail, gaussian_sigma, ldp_region, ldp_scan,
    normalizing_constant, stable_check, LdpConfig, StableCheckConfig, StableLawParams,
};
use crate::models::{
    drift_margin, horizon_for_tolerance, simulate_path, tail_index, MarginalTail, ModelSpec,
};
use crate::parallel::with_threads;
use crate::randkit::{derive_stream, RngStream};
use crate::regen::{harvest_blocks, kac_check, kernel_fidelity, small_set_probability, MinorizationSpec};
use crate::tailstats::{default_hill_k, hill_estimate};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(ConfigErrors),
    Model(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) if e.is_numeric_regime() => EXIT_NUMERIC,
            _ => EXIT_USAGE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Config(e) => write!(f, "config errors:\n{e}"),
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Model(e)
    }
}

#[derive(Parser, Debug)]
#[command(name = "heavytail", version, about = "Cluster index experiments for heavy-tailed Markov chains")]
pub struct Args {
    /// simulate, cluster-index, ldp-scan, stable-check, drift-check, regen-check or report
    #[arg(value_parser = parse_command)]
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; falls back to HEAVYTAIL_THREADS.
    #[arg(long)]
    pub threads: Option<usize>,
}

fn parse_command(s: &str) -> Result<Command, String> {
    Command::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
        format!("unknown command {s:?}; expected one of {}", names.join(", "))
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageStream {
    pub stage: String,
    pub stream_id: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: Command,
    pub seed: u64,
    pub version: String,
    pub threads: Option<usize>,
    pub runtime_seconds: f64,
    pub config: String,
    pub streams: Vec<StageStream>,
    pub artifacts: Vec<ArtifactEntry>,
}

/// Resolved inputs of one run.
#[derive(Clone, Debug)]
pub struct RunRequest {
    pub command: Command,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

struct Csv {
    text: String,
}

impl Csv {
    fn new(header: &[String]) -> Self {
        Csv {
            text: header.join(",") + "\n",
        }
    }

    fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }
}

fn theta_header(prefix: &str, d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("{prefix}{i}")).collect()
}

fn floats(xs: &[f64]) -> Vec<String> {
    xs.iter().map(|x| fmt_float(*x)).collect()
}

struct Stages {
    seed: u64,
    base: u64,
    used: Vec<StageStream>,
}

impl Stages {
    fn stream(&mut self, stage: &str, offset: u64) -> RngStream {
        let id = self.base * 100 + offset;
        self.used.push(StageStream {
            stage: stage.to_string(),
            stream_id: id,
        });
        derive_stream(self.seed, id)
    }
}

struct Output {
    csv_name: &'static str,
    csv: String,
    summary: Value,
}

fn directions(cfg: &ExperimentConfig) -> Result<Vec<Direction>, Error> {
    match &cfg.knobs.directions {
        Some(rows) => rows.iter().map(|r| Direction::new(r.clone())).collect(),
        None => direction_grid(cfg.model.dim()),
    }
}

fn horizon(cfg: &ExperimentConfig) -> Result<usize, Error> {
    match cfg.knobs.horizon {
        Some(h) => Ok(h),
        None => horizon_for_tolerance(cfg.model.contraction()?, 1.0, cfg.knobs.tolerance).map(|h| h.max(1)),
    }
}

fn marginal_tail(cfg: &ExperimentConfig, stages: &mut Stages) -> Result<(MarginalTail, bool), Error> {
    match cfg.model.marginal_tail() {
        Some(t) => Ok((t, false)),
        None => {
            let s = stages.stream("marginal-tail fit", 90);
            Ok((fitted_marginal_tail(&cfg.model, cfg.knobs.long_run, &s)?, true))
        }
    }
}

/// `b(theta)` from the exact closed form for the autoregression, else by the tail-process route.
fn cluster_value(
    cfg: &ExperimentConfig,
    theta: &Direction,
    alpha: f64,
    stream: &RngStream,
) -> Result<(f64, f64), Error> {
    if let ModelSpec::Var1(s) = &cfg.model {
        return Ok((var1_cluster_index_exact(s, theta)?, 0.0));
    }
    let sampler = cfg.model.tail_sampler(&stream.fork(u64::MAX))?;
    let est = cluster_index_tail_process(sampler.as_ref(), theta, alpha, horizon(cfg)?, cfg.knobs.replicas, stream)?;
    Ok((est.value, est.std_error))
}

fn estimate_json(e: &ClusterIndexEstimate, theta: &Direction, exact: Option<f64>) -> Value {
    json!({
        "route": e.route.name(),
        "theta": theta.theta,
        "value": e.value,
        "std_error": e.std_error,
        "jackknife_se": e.jackknife_se,
        "baseline": e.baseline,
        "baseline_se": e.baseline_se,
        "horizon": e.horizon,
        "replicas": e.replicas,
        "exact": exact,
    })
}

fn run_simulate(cfg: &ExperimentConfig, st: &mut Stages) -> Result<Output, Error> {
    let spec = &cfg.model;
    let n = cfg.knobs.n.unwrap_or(10_000);
    let burn = cfg.knobs.burn_in.unwrap_or_else(|| spec.default_burn_in());
    let mut rng = st.stream("path", 0);
    let path = simulate_path(spec, n, burn, &mut rng)?;
    let header: Vec<String> = match spec {
        ModelSpec::Garch11(_) => vec!["t".into(), "sigma".into(), "x".into()],
        _ => std::iter::once("t".to_string()).chain(theta_header("x", path.dim)).collect(),
    };
    let mut csv = Csv::new(&header);
    for t in 0..path.rows {
        let mut cells = vec![(t + 1).to_string()];
        cells.extend(floats(path.row(t)));
        csv.row(&cells);
    }
    let means: Vec<f64> = path.sum().iter().map(|s| s / n as f64).collect();
    let norms = path.norms();
    let hill = hill_estimate(&norms, default_hill_k(n)).ok();
    Ok(Output {
        csv_name: "path.csv",
        csv: csv.text,
        summary: json!({
            "model": spec.name(),
            "n": n,
            "burn_in": burn,
            "dim": path.dim,
            "sample_mean": means,
            "max_norm": norms.iter().copied().fold(0.0, f64::max),
            "tail_index": tail_index(spec).ok(),
            "hill": hill,
        }),
    })
}

fn run_cluster_index(cfg: &ExperimentConfig, st: &mut Stages) -> Result<Output, Error> {
    let spec = &cfg.model;
    let alpha = tail_index(spec)?;
    let dirs = directions(cfg)?;
    let h = horizon(cfg)?;
    let k = &cfg.knobs;
    let routes: Vec<String> = match &k.routes {
        Some(r) => r.clone(),
        None => match spec {
            ModelSpec::Garch11(_) => vec!["tail_process".into()],
            _ => vec!["tail_process".into(), "closed_form".into()],
        },
    };
    let pilot = st.stream("tail-process pilot", 1);
    let main = st.stream("cluster index", 0);
    let sampler = spec.tail_sampler(&pilot)?;
    let d = spec.dim();
    let mut header = vec!["route".to_string()];
    header.extend(theta_header("theta", d));
    for c in ["value", "std_error", "jackknife_se", "baseline", "horizon", "replicas", "exact"] {
        header.push(c.into());
    }
    let mut csv = Csv::new(&header);
    let mut rows = Vec::new();
    let mut tail_values = Vec::new();
    for (j, theta) in dirs.iter().enumerate() {
        let exact = match spec {
            ModelSpec::Var1(s) => Some(var1_cluster_index_exact(s, theta)?),
            _ => None,
        };
        for (r, route) in routes.iter().enumerate() {
            let s = main.fork((j * routes.len() + r) as u64);
            let est = match route.as_str() {
                "tail_process" => cluster_index_tail_process(sampler.as_ref(), theta, alpha, h, k.replicas, &s)?,
                "closed_form" => closed_form_cluster_index(spec, theta, k.replicas, h, &s)?,
                "telescoping" => {
                    telescoping_difference(sampler.as_ref(), theta, alpha, k.telescoping_k.unwrap_or(h), k.replicas, &s)?
                }
                "extremal" => extremal_index(sampler.as_ref(), theta, alpha, h, k.replicas, &s)?,
                other => return Err(Error::Parameter(format!("unknown route {other}"))),
            };
            if route == "tail_process" {
                tail_values.push((theta.clone(), est.value.max(0.0)));
            }
            let mut cells = vec![est.route.name().to_string()];
            cells.extend(floats(&theta.theta));
            cells.extend(floats(&[est.value, est.std_error, est.jackknife_se, est.baseline]));
            cells.push(est.horizon.to_string());
            cells.push(est.replicas.to_string());
            cells.push(fmt_float(exact.unwrap_or(f64::NAN)));
            csv.row(&cells);
            rows.push(estimate_json(&est, theta, exact));
        }
    }
    let flag = if tail_values.is_empty() {
        None
    } else {
        Some(LimitMeasureEvaluator::new(alpha, tail_values)?.uniqueness_flag())
    };
    Ok(Output {
        csv_name: "cluster_index.csv",
        csv: csv.text,
        summary: json!({
            "model": spec.name(),
            "alpha": alpha,
            "horizon": h,
            "replicas": k.replicas,
            "integer_alpha_uniqueness_flag": flag,
            "estimates": rows,
        }),
    })
}

fn run_ldp_scan(cfg: &ExperimentConfig, st: &mut Stages) -> Result<Output, Error> {
    let spec = &cfg.model;
    let k = &cfg.knobs;
    let alpha = tail_index(spec)?;
    let n = k.n.unwrap_or(2000);
    let theta = match &k.directions {
        Some(rows) => Direction::new(rows[0].clone())?,
        None => {
            let mut e = vec![0.0; spec.dim()];
            e[0] = 1.0;
            Direction::new(e)?
        }
    };
    let (tail, fitted) = marginal_tail(cfg, st)?;
    let target_stream = st.stream("target", 2);
    let (target, target_se) = cluster_value(cfg, &theta, alpha, &target_stream)?;
    let centering = choose_centering(spec, alpha, k.long_run, &st.stream("centering", 3))?;
    let region = ldp_region(n, alpha, k.eps, k.c_factor)?;
    let ldp_cfg = LdpConfig {
        n,
        region,
        grid_size: k.grid_size,
        reps: k.reps.unwrap_or(20_000),
        burn_in: k.burn_in.unwrap_or_else(|| spec.default_burn_in()),
        centering,
        min_exceedances: k.min_exceedances,
    };
    let res = ldp_scan(spec, &theta, target, &tail, &ldp_cfg, &st.stream("ldp scan", 0))?;
    let mut csv = Csv::new(&["x", "ratio", "ratio_se", "exceedances", "target"].map(String::from));
    for i in 0..res.xs.len() {
        csv.row(&[
            fmt_float(res.xs[i]),
            fmt_float(res.ratios[i]),
            fmt_float(res.ratio_se[i]),
            res.exceedances[i].to_string(),
            fmt_float(target),
        ]);
    }
    let within = res.within_band(3.0);
    Ok(Output {
        csv_name: "ldp_scan.csv",
        csv: csv.text,
        summary: json!({
            "model": spec.name(),
            "alpha": alpha,
            "n": n,
            "reps": ldp_cfg.reps,
            "theta": theta.theta,
            "region": [region.0, region.1],
            "target": target,
            "target_se": target_se,
            "sup_dev": res.sup_dev,
            "band": k.band,
            "sup_dev_within_band": k.band.map(|b| res.sup_dev <= b),
            "all_within_3se": within.iter().all(|w| *w),
            "centering": res.centering,
            "marginal_tail": {"alpha": tail.alpha, "constant": tail.constant, "fitted": fitted},
        }),
    })
}

fn run_stable_check(cfg: &ExperimentConfig, st: &mut Stages) -> Result<Output, Error> {
    let spec = &cfg.model;
    let k = &cfg.knobs;
    let alpha = tail_index(spec)?;
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::OutOfRegime(format!(
            "stable limits need alpha in (0, 2), model has alpha = {alpha}"
        )));
    }
    let dirs = match (&k.directions, spec.dim()) {
        (Some(_), _) => directions(cfg)?,
        (None, 1) => vec![Direction::plus()],
        (None, d) => direction_grid(d)?,
    };
    let b_stream = st.stream("cluster index", 2);
    let mut pairs = Vec::with_capacity(dirs.len());
    for (j, theta) in dirs.iter().enumerate() {
        let bp = cluster_value(cfg, theta, alpha, &b_stream.fork(2 * j as u64))?.0;
        let bm = cluster_value(cfg, &theta.neg(), alpha, &b_stream.fork(2 * j as u64 + 1))?.0;
        pairs.push((theta.clone(), bp.max(0.0), bm.max(0.0)));
    }
    let params = StableLawParams::new(alpha, pairs)?;
    let (tail, fitted) = marginal_tail(cfg, st)?;
    let n = k.n.unwrap_or(1000);
    let centering = choose_centering(spec, alpha, k.long_run, &st.stream("centering", 3))?;
    let check = StableCheckConfig {
        n,
        reps: k.reps.unwrap_or(2000),
        burn_in: k.burn_in.unwrap_or_else(|| spec.default_burn_in()),
        a_n: normalizing_constant(&tail, n as u64),
        centering,
    };
    let cmp = stable_check(spec, &params, &check, &st.stream("stable check", 0))?;
    let mut csv = Csv::new(
        &["direction", "x", "empirical_re", "empirical_im", "theoretical_re", "theoretical_im"].map(String::from),
    );
    for (j, c) in cmp.iter().enumerate() {
        for i in 0..c.grid.len() {
            csv.row(&[
                j.to_string(),
                fmt_float(c.grid[i]),
                fmt_float(c.empirical[i].0),
                fmt_float(c.empirical[i].1),
                fmt_float(c.theoretical[i].0),
                fmt_float(c.theoretical[i].1),
            ]);
        }
    }
    let per_direction: Vec<Value> = cmp
        .iter()
        .zip(&params.pairs)
        .map(|(c, (t, bp, bm))| {
            json!({
                "theta": t.theta, "b_plus": bp, "b_minus": bm,
                "sup_abs_gap": c.sup_abs_gap, "mc_band": c.mc_band, "passes": c.passes(),
            })
        })
        .collect();
    Ok(Output {
        csv_name: "stable_cf.csv",
        csv: csv.text,
        summary: json!({
            "model": spec.name(),
            "alpha": alpha,
            "c_alpha": params.c_alpha,
            "n": n,
            "reps": check.reps,
            "a_n": check.a_n,
            "marginal_tail": {"alpha": tail.alpha, "constant": tail.constant, "fitted": fitted},
            "centering": check.centering,
            "directions": per_direction,
            "passes": cmp.iter().all(|c| c.passes()),
        }),
    })
}

fn grid_states(spec: &ModelSpec, states: &[f64]) -> Vec<Vec<f64>> {
    let d = spec.dim();
    states
        .iter()
        .map(|&s| match spec {
            ModelSpec::Garch11(_) => vec![s, 0.0],
            _ => vec![s / (d as f64).sqrt(); d],
        })
        .collect()
}

fn run_drift_check(cfg: &ExperimentConfig, st: &mut Stages) -> Result<Output, Error> {
    let spec = &cfg.model;
    let k = &cfg.knobs;
    let grid = grid_states(spec, &k.states);
    let rep = drift_margin(spec, k.p, k.m, &grid, k.reps.unwrap_or(2000), &st.stream("drift", 0))?;
    let mut csv = Csv::new(&["state", "v", "conditional_mean", "std_error"].map(String::from));
    for i in 0..grid.len() {
        csv.row(&[
            fmt_float(k.states[i]),
            fmt_float(rep.grid_v[i]),
            fmt_float(rep.grid_mean[i]),
            fmt_float(rep.grid_se[i]),
        ]);
    }
    let radius = if rep.beta < 1.0 {
        Some((2.0 * rep.intercept.max(1e-12) / (1.0 - rep.beta)).powf(1.0 / rep.p))
    } else {
        None
    };
    Ok(Output {
        csv_name: "drift.csv",
        csv: csv.text,
        summary: json!({
            "model": spec.name(),
            "p": rep.p,
            "m": rep.m,
            "beta": rep.beta,
            "beta_se": rep.beta_se,
            "intercept": rep.intercept,
            "pass": rep.pass,
            "one_step_rate": rep.one_step_rate,
            "small_set_radius": radius,
        }),
    })
}

fn run_regen_check(cfg: &ExperimentConfig, st: &mut Stages) -> Result<Output, Error> {
    let spec = &cfg.model;
    let k = &cfg.knobs;
    let minor = match k.radius {
        Some(r) => MinorizationSpec::new(spec, r, k.epsilon)?,
        None => {
            let grid = grid_states(spec, &k.states);
            let rep = drift_margin(spec, k.p, 1, &grid, k.reps.unwrap_or(2000), &st.stream("drift", 4))?;
            let fitted = MinorizationSpec::from_drift(spec, &rep)?;
            match k.epsilon {
                Some(e) => {
                    let mut m = MinorizationSpec::new(spec, fitted.radius, Some(e))?;
                    m.heuristic = true;
                    m
                }
                None => fitted,
            }
        }
    };
    let n = k.n.unwrap_or(100_000);
    let burn = k.burn_in.unwrap_or_else(|| spec.default_burn_in());
    let mut rng = st.stream("split chain", 0);
    let blocks = harvest_blocks(spec, &minor, n, burn, &mut rng)?;
    let d = spec.dim();
    let mut header = vec!["cycle".to_string(), "start".into(), "length".into()];
    header.extend(theta_header("sum", d));
    let mut csv = Csv::new(&header);
    for i in 0..blocks.block_sums.len() {
        let mut cells = vec![
            (i + 1).to_string(),
            blocks.cycle_starts[i].to_string(),
            blocks.cycle_lengths[i].to_string(),
        ];
        cells.extend(floats(&blocks.block_sums[i]));
        csv.row(&cells);
    }
    let pi = small_set_probability(spec, &minor, n, &st.stream("small set", 5))?;
    let kac = kac_check(&blocks, minor.epsilon * pi)?;
    let origin = vec![0.0; d];
    let (ks, ks_crit) = kernel_fidelity(spec, &minor, &origin, k.fidelity, &st.stream("fidelity", 6))?;
    let cycles = blocks.block_sums.len();
    let (hill_blocks, hill_marginal) = if cycles >= 100 {
        let bn = blocks.block_matrix().norms();
        let xn = blocks.path.norms();
        (
            hill_estimate(&bn, default_hill_k(cycles)).ok(),
            hill_estimate(&xn, default_hill_k(xn.len())).ok(),
        )
    } else {
        (None, None)
    };
    // light-tailed innovations have no tail index
    let alpha = match tail_index(spec) {
        Err(Error::UnsupportedLaw(_)) => Some(f64::INFINITY),
        other => other.ok(),
    };
    let gaussian = match alpha {
        Some(a) if a > 2.0 => gaussian_sigma(&blocks).ok(),
        _ => None,
    };
    Ok(Output {
        csv_name: "cycles.csv",
        csv: csv.text,
        summary: json!({
            "model": spec.name(),
            "n": n,
            "radius": minor.radius,
            "epsilon": minor.epsilon,
            "epsilon_max": minor.epsilon_max,
            "heuristic": minor.heuristic,
            "cycles": cycles,
            "decomposition_exact": blocks.decomposition_exact(),
            "small_set_fraction": blocks.small_set_fraction(),
            "small_set_probability": pi,
            "kac": kac,
            "kac_within_3se": kac.within(3.0),
            "kernel_fidelity": {"ks": ks, "critical_1pct": ks_crit, "passes": ks <= ks_crit},
            "hill_blocks": hill_blocks,
            "hill_marginal": hill_marginal,
            "gaussian_clt": gaussian,
        }),
    })
}

fn run_report(cfg: &ExperimentConfig, st: &mut Stages) -> Result<Output, Error> {
    let spec = &cfg.model;
    let alpha = tail_index(spec)?;
    let contraction = spec.contraction()?;
    let h = horizon(cfg)?;
    let dirs = direction_grid(spec.dim())?;
    let b_stream = st.stream("cluster index", 0);
    let mut header = theta_header("theta", spec.dim());
    header.push("b".into());
    header.push("std_error".into());
    let mut csv = Csv::new(&header);
    let mut values = Vec::new();
    for (j, theta) in dirs.iter().enumerate() {
        let (b, se) = cluster_value(cfg, theta, alpha, &b_stream.fork(j as u64))?;
        let mut cells = floats(&theta.theta);
        cells.push(fmt_float(b));
        cells.push(fmt_float(se));
        csv.row(&cells);
        values.push((theta.clone(), b.max(0.0)));
    }
    let eval = LimitMeasureEvaluator::new(alpha, values)?;
    let tail = spec.marginal_tail();
    Ok(Output {
        csv_name: "report.csv",
        csv: csv.text,
        summary: json!({
            "model": spec.name(),
            "dim": spec.dim(),
            "alpha": alpha,
            "contraction": contraction,
            "mean": spec.mean(),
            "default_burn_in": spec.default_burn_in(),
            "horizon": h,
            "tolerance": cfg.knobs.tolerance,
            "marginal_tail": tail.map(|t| json!({"alpha": t.alpha, "constant": t.constant})),
            "integer_alpha_uniqueness_flag": eval.uniqueness_flag(),
        }),
    })
}

fn execute(req: &RunRequest, stages: &mut Stages) -> Result<Output, Error> {
    let cfg = &req.config;
    match req.command {
        Command::Simulate => run_simulate(cfg, stages),
        Command::ClusterIndex => run_cluster_index(cfg, stages),
        Command::LdpScan => run_ldp_scan(cfg, stages),
        Command::StableCheck => run_stable_check(cfg, stages),
        Command::DriftCheck => run_drift_check(cfg, stages),
        Command::RegenCheck => run_regen_check(cfg, stages),
        Command::Report => run_report(cfg, stages),
    }
}

fn write_all(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<(), CliError> {
    let created = !dir.exists();
    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        for (name, bytes) in files {
            let p = dir.join(name);
            fs::write(&p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            written.push(p);
        }
        Ok(())
    })();
    if result.is_err() {
        for p in &written {
            let _ = fs::remove_file(p);
        }
        if created {
            let _ = fs::remove_dir(dir);
        }
    }
    result
}

/// Executes the request and writes its artifacts. Nothing is left on disk when it fails.
pub fn run(req: &RunRequest) -> Result<RunManifest, CliError> {
    let start = Instant::now();
    let mut stages = Stages {
        seed: req.seed,
        base: req.command.stream_id(),
        used: Vec::new(),
    };
    let out = with_threads(req.threads, || execute(req, &mut stages))?;
    let summary = json!({
        "command": req.command.name(),
        "seed": req.seed,
        "result": out.summary,
    });
    let summary_bytes = serde_json::to_vec_pretty(&summary).map_err(|e| CliError::Io(e.to_string()))?;
    let files = vec![
        (out.csv_name.to_string(), out.csv.into_bytes()),
        ("summary.json".to_string(), summary_bytes),
    ];
    let artifacts = files
        .iter()
        .map(|(name, bytes)| ArtifactEntry {
            path: name.clone(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        })
        .collect();
    let manifest = RunManifest {
        command: req.command,
        seed: req.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        threads: req.threads,
        runtime_seconds: start.elapsed().as_secs_f64(),
        config: req.config.source.clone(),
        streams: stages.used,
        artifacts,
    };
    let mut all = files;
    let manifest_bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
    all.push(("manifest.json".to_string(), manifest_bytes));
    write_all(&req.out_dir, &all)?;
    Ok(manifest)
}

/// Re-hashes every artifact listed in a manifest; returns the paths that do not match.
pub fn verify_manifest(dir: &Path, manifest: &RunManifest) -> Vec<String> {
    manifest
        .artifacts
        .iter()
        .filter(|a| fs::read(dir.join(&a.path)).map(|b| sha256_hex(&b) != a.sha256).unwrap_or(true))
        .map(|a| a.path.clone())
        .collect()
}

fn threads_from_env(value: Option<String>) -> Result<Option<usize>, CliError> {
    match value {
        None => Ok(None),
        Some(v) if v.trim().is_empty() => Ok(None),
        Some(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|k| *k > 0)
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("HEAVYTAIL_THREADS must be a positive integer, got {v:?}"))),
    }
}

/// Resolves CLI arguments against the config file.
pub fn resolve(args: &Args, env_threads: Option<String>) -> Result<RunRequest, CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.config.display())))?;
    let config = parse_config(&text, Some(args.command)).map_err(CliError::Config)?;
    let seed = args
        .seed
        .or(config.seed)
        .ok_or_else(|| CliError::Usage("no seed given in the config or with --seed".into()))?;
    if args.threads == Some(0) {
        return Err(CliError::Usage("--threads must be positive".into()));
    }
    let threads = match args.threads {
        Some(k) => Some(k),
        None => threads_from_env(env_threads)?.or(config.threads),
    };
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("heavytail-out").join(args.command.name()));
    Ok(RunRequest {
        command: args.command,
        config,
        seed,
        out_dir,
        threads,
    })
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = resolve(&args, std::env::var("HEAVYTAIL_THREADS").ok()).and_then(|req| {
        let m = run(&req)?;
        Ok((req, m))
    });
    match outcome {
        Ok((req, m)) => {
            println!(
                "{} finished in {:.2} s; {} artifacts in {}",
                req.command.name(),
                m.runtime_seconds,
                m.artifacts.len() + 1,
                req.out_dir.display()
            );
            EXIT_OK
        }
        Err(e) => {
            eprintln!("heavytail: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, std::f64::consts::PI] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn env_threads() {
        assert_eq!(threads_from_env(None).unwrap(), None);
        assert_eq!(threads_from_env(Some("4".into())).unwrap(), Some(4));
        assert!(threads_from_env(Some("zero".into())).is_err());
    }

    #[test]
    fn numeric_errors_map_to_three() {
        assert_eq!(CliError::Model(Error::OutOfRegime("x".into())).exit_code(), 3);
        assert_eq!(CliError::Model(Error::Parameter("x".into())).exit_code(), 2);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
    }
}
