use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::models::{
    Garch11Spec, GarchNoise, Innovation, KestenLaw, KestenSpec, MatrixLaw, ModelSpec, PilotConfig,
    ScalarLaw, Var1Spec,
};
use crate::randkit::{TailFamily, TailLaw};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    ClusterIndex,
    LdpScan,
    StableCheck,
    DriftCheck,
    RegenCheck,
    Report,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Simulate,
        Command::ClusterIndex,
        Command::LdpScan,
        Command::StableCheck,
        Command::DriftCheck,
        Command::RegenCheck,
        Command::Report,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::ClusterIndex => "cluster-index",
            Command::LdpScan => "ldp-scan",
            Command::StableCheck => "stable-check",
            Command::DriftCheck => "drift-check",
            Command::RegenCheck => "regen-check",
            Command::Report => "report",
        }
    }

    pub fn parse(s: &str) -> Option<Command> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    /// Stream id of the command's main stage.
    pub fn stream_id(&self) -> u64 {
        Self::ALL.iter().position(|c| c == self).unwrap_or(0) as u64 + 1
    }
}

/// One problem found while reading a config file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: {}: {}", self.line, self.field, self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}

/// All problems of one config file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// Numeric knobs with their defaults. `None` means "derive from the model".
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Knobs {
    pub n: Option<usize>,
    pub burn_in: Option<usize>,
    pub replicas: usize,
    pub horizon: Option<usize>,
    pub tolerance: f64,
    pub telescoping_k: Option<usize>,
    pub routes: Option<Vec<String>>,
    pub directions: Option<Vec<Vec<f64>>>,
    pub reps: Option<usize>,
    pub grid_size: usize,
    pub eps: f64,
    pub c_factor: f64,
    pub band: Option<f64>,
    pub min_exceedances: u64,
    pub long_run: usize,
    pub p: f64,
    pub m: usize,
    pub states: Vec<f64>,
    pub radius: Option<f64>,
    pub epsilon: Option<f64>,
    pub k: Option<usize>,
    pub fidelity: usize,
}

impl Default for Knobs {
    fn default() -> Self {
        Knobs {
            n: None,
            burn_in: None,
            replicas: 10_000,
            horizon: None,
            tolerance: 1e-4,
            telescoping_k: None,
            routes: None,
            directions: None,
            reps: None,
            grid_size: 8,
            eps: 0.1,
            c_factor: 100.0,
            band: None,
            min_exceedances: 50,
            long_run: 1_000_000,
            p: 1.0,
            m: 1,
            states: vec![0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0],
            radius: None,
            epsilon: None,
            k: None,
            fidelity: 10_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub model: ModelSpec,
    pub knobs: Knobs,
    /// The text the config was parsed from.
    pub source: String,
}

const EXPERIMENT_KEYS: &[&str] = &["command", "seed", "threads", "output_dir"];
const MODEL_KEYS: &[&str] = &[
    "kind",
    "dim",
    "a",
    "a_weights",
    "innovation",
    "b",
    "alpha_hint",
    "pilot_length",
    "pilot_quantile",
    "alpha0",
    "alpha1",
    "beta1",
    "noise",
];

fn command_keys(c: Command) -> &'static [&'static str] {
    match c {
        Command::Simulate => &["n", "burn_in"],
        Command::ClusterIndex => &[
            "replicas",
            "horizon",
            "tolerance",
            "telescoping_k",
            "routes",
            "directions",
        ],
        Command::LdpScan => &[
            "n",
            "reps",
            "grid_size",
            "eps",
            "c_factor",
            "directions",
            "band",
            "min_exceedances",
            "replicas",
            "horizon",
            "burn_in",
        ],
        Command::StableCheck => &[
            "n",
            "reps",
            "directions",
            "long_run",
            "replicas",
            "horizon",
            "burn_in",
        ],
        Command::DriftCheck => &["p", "m", "reps", "states"],
        Command::RegenCheck => &[
            "n", "radius", "epsilon", "k", "burn_in", "fidelity", "p", "reps", "states",
        ],
        Command::Report => &["replicas", "horizon", "tolerance"],
    }
}

struct Entry {
    value: String,
    line: usize,
}

struct Reader {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
    section_lines: BTreeMap<String, usize>,
    errors: Vec<ConfigError>,
}

impl Reader {
    fn err(&mut self, line: usize, field: impl Into<String>, message: impl Into<String>) {
        self.errors.push(ConfigError {
            line,
            field: field.into(),
            message: message.into(),
        });
    }

    fn get(&self, section: &str, key: &str) -> Option<(&str, usize)> {
        self.sections
            .get(section)
            .and_then(|s| s.get(key))
            .map(|e| (e.value.as_str(), e.line))
    }

    fn parse<T: std::str::FromStr>(&mut self, section: &str, key: &str) -> Option<T> {
        let (v, line) = self.get(section, key)?;
        let v = v.to_string();
        match v.parse::<T>() {
            Ok(x) => Some(x),
            Err(_) => {
                self.err(line, format!("{section}.{key}"), format!("cannot parse {v:?}"));
                None
            }
        }
    }

    fn positive_f64(&mut self, section: &str, key: &str) -> Option<f64> {
        let line = self.get(section, key)?.1;
        let v: f64 = self.parse(section, key)?;
        if !(v > 0.0) || !v.is_finite() {
            self.err(line, format!("{section}.{key}"), format!("must be positive, got {v}"));
            return None;
        }
        Some(v)
    }

    fn positive_count(&mut self, section: &str, key: &str) -> Option<usize> {
        let line = self.get(section, key)?.1;
        let v: usize = self.parse(section, key)?;
        if v == 0 {
            self.err(line, format!("{section}.{key}"), "must be positive");
            return None;
        }
        Some(v)
    }

    fn required(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        match self.get(section, key) {
            Some((v, l)) => Some((v.to_string(), l)),
            None => {
                let line = self.section_lines.get(section).copied().unwrap_or(0);
                self.err(line, format!("{section}.{key}"), "missing required key");
                None
            }
        }
    }
}

fn tokenize(text: &str) -> Reader {
    let mut r = Reader {
        sections: BTreeMap::new(),
        section_lines: BTreeMap::new(),
        errors: Vec::new(),
    };
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_string();
            let known = name == "experiment" || name == "model" || Command::parse(&name).is_some();
            if !known {
                r.err(line_no, format!("[{name}]"), "unknown section");
            }
            if let Some(prev) = r.section_lines.get(&name) {
                let prev = *prev;
                r.err(line_no, format!("[{name}]"), format!("duplicate section, first at line {prev}"));
            } else {
                r.section_lines.insert(name.clone(), line_no);
            }
            r.sections.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            r.err(line_no, "syntax", format!("expected key = value, got {line:?}"));
            continue;
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let Some(section) = current.clone() else {
            r.err(line_no, key, "key outside of any section");
            continue;
        };
        let allowed: &[&str] = match section.as_str() {
            "experiment" => EXPERIMENT_KEYS,
            "model" => MODEL_KEYS,
            s => Command::parse(s).map(command_keys).unwrap_or(&[]),
        };
        if !allowed.contains(&key.as_str()) {
            r.err(line_no, format!("{section}.{key}"), "unknown key");
            continue;
        }
        let map = r.sections.entry(section.clone()).or_default();
        if let Some(prev) = map.get(&key) {
            let first = prev.line;
            r.err(
                line_no,
                format!("{section}.{key}"),
                format!("duplicate key, defined at lines {first} and {line_no}"),
            );
            continue;
        }
        map.insert(key, Entry { value, line: line_no });
    }
    r
}

/// `name(a, b, ...)` or a bare number.
pub(crate) fn parse_call(s: &str) -> Result<(String, Vec<f64>), String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Ok(("constant".into(), vec![v]));
    }
    let open = s.find('(');
    let (name, args) = match open {
        Some(i) => {
            let inner = s[i + 1..]
                .strip_suffix(')')
                .ok_or_else(|| format!("missing closing parenthesis in {s:?}"))?;
            let args = if inner.trim().is_empty() {
                Vec::new()
            } else {
                inner
                    .split(',')
                    .map(|a| a.trim().parse::<f64>().map_err(|_| format!("bad number {a:?} in {s:?}")))
                    .collect::<Result<Vec<_>, _>>()?
            };
            (s[..i].trim().to_string(), args)
        }
        None => (s.to_string(), Vec::new()),
    };
    Ok((name, args))
}

fn arg(args: &[f64], i: usize, default: Option<f64>, call: &str) -> Result<f64, String> {
    args.get(i)
        .copied()
        .or(default)
        .ok_or_else(|| format!("{call} needs at least {} argument(s)", i + 1))
}

pub(crate) fn parse_tail_law(s: &str) -> Result<TailLaw, String> {
    let (name, a) = parse_call(s)?;
    let law = match name.as_str() {
        "pareto" => TailLaw::new(TailFamily::Pareto, arg(&a, 0, None, &name)?, arg(&a, 1, Some(1.0), &name)?, 1.0),
        "symmetric_pareto" => TailLaw::new(
            TailFamily::SymmetricPareto,
            arg(&a, 0, None, &name)?,
            arg(&a, 1, Some(1.0), &name)?,
            arg(&a, 2, Some(0.0), &name)?,
        ),
        "stable" => TailLaw::new(
            TailFamily::Stable,
            arg(&a, 0, None, &name)?,
            arg(&a, 2, Some(1.0), &name)?,
            arg(&a, 1, Some(0.0), &name)?,
        ),
        "gaussian" => TailLaw::gaussian(arg(&a, 0, Some(1.0), &name)?),
        "lognormal" => TailLaw::lognormal(arg(&a, 0, Some(1.0), &name)?),
        other => return Err(format!("unknown law {other:?}")),
    };
    law.map_err(|e| e.to_string())
}

pub(crate) fn parse_scalar_law(s: &str) -> Result<ScalarLaw, String> {
    let (name, a) = parse_call(s)?;
    let law = match name.as_str() {
        "constant" => ScalarLaw::Constant(arg(&a, 0, None, &name)?),
        "lognormal" => ScalarLaw::LogNormal {
            mu: arg(&a, 0, None, &name)?,
            sigma2: arg(&a, 1, None, &name)?,
        },
        "uniform" => ScalarLaw::Uniform {
            lo: arg(&a, 0, None, &name)?,
            hi: arg(&a, 1, None, &name)?,
        },
        "normal" => ScalarLaw::Gaussian {
            mean: arg(&a, 0, None, &name)?,
            sd: arg(&a, 1, None, &name)?,
        },
        "two_point" => ScalarLaw::TwoPoint {
            x: arg(&a, 0, None, &name)?,
            y: arg(&a, 1, None, &name)?,
            p: arg(&a, 2, None, &name)?,
        },
        _ => ScalarLaw::Tail(parse_tail_law(s)?),
    };
    law.validate().map_err(|e| e.to_string())?;
    Ok(law)
}

/// Rows separated by `;`, entries by `,`.
pub(crate) fn parse_rows(s: &str) -> Result<Vec<Vec<f64>>, String> {
    s.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad number {:?}", x.trim())))
                .collect()
        })
        .collect()
}

fn parse_matrix(s: &str) -> Result<DMatrix<f64>, String> {
    let rows = parse_rows(s)?;
    let d = rows.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(format!("matrix {s:?} is not square"));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

fn split_top(s: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if ch == sep && depth == 0 {
            out.push(cur.trim().to_string());
            cur.clear();
        } else {
            cur.push(ch);
        }
    }
    out.push(cur.trim().to_string());
    out
}

fn parse_model(r: &mut Reader) -> Option<ModelSpec> {
    if !r.sections.contains_key("model") {
        r.err(0, "[model]", "missing section");
        return None;
    }
    let (kind, kind_line) = r.required("model", "kind")?;
    let fail = |r: &mut Reader, key: &str, msg: String| {
        let line = r.get("model", key).map(|x| x.1).unwrap_or(kind_line);
        r.err(line, format!("model.{key}"), msg);
    };
    match kind.as_str() {
        "var1" => {
            let (a_text, _) = r.required("model", "a")?;
            let (innov_text, _) = r.required("model", "innovation")?;
            let choices: Vec<String> = split_top(&a_text, '|');
            let mut mats = Vec::new();
            for c in &choices {
                match parse_matrix(c) {
                    Ok(m) => mats.push(m),
                    Err(e) => {
                        fail(r, "a", e);
                        return None;
                    }
                }
            }
            let d = mats[0].nrows();
            if let Some(dim) = r.parse::<usize>("model", "dim") {
                if dim != d {
                    fail(r, "dim", format!("dim = {dim} but a is {d}x{d}"));
                    return None;
                }
            }
            let a_law = if mats.len() == 1 {
                MatrixLaw::Fixed(mats.remove(0))
            } else {
                let weights = match r.get("model", "a_weights") {
                    Some((w, _)) => match parse_rows(w) {
                        Ok(rows) if rows.len() == 1 && rows[0].len() == mats.len() => rows[0].clone(),
                        _ => {
                            fail(r, "a_weights", "needs one weight per matrix choice".into());
                            return None;
                        }
                    },
                    None => vec![1.0; mats.len()],
                };
                MatrixLaw::Finite(mats.into_iter().zip(weights).collect())
            };
            let parts = split_top(&innov_text, ';');
            let mut laws = Vec::new();
            for p in &parts {
                match parse_tail_law(p) {
                    Ok(l) => laws.push(l),
                    Err(e) => {
                        fail(r, "innovation", e);
                        return None;
                    }
                }
            }
            if laws.len() == 1 && d > 1 {
                laws = vec![laws[0]; d];
            }
            if laws.len() != d {
                fail(r, "innovation", format!("{} laws given for dimension {d}", laws.len()));
                return None;
            }
            match Var1Spec::new(a_law, Innovation::Independent(laws)) {
                Ok(s) => Some(ModelSpec::Var1(s)),
                Err(e) => {
                    fail(r, "a", e.to_string());
                    None
                }
            }
        }
        "kesten" => {
            let (a_text, _) = r.required("model", "a")?;
            let (b_text, _) = r.required("model", "b")?;
            let a = parse_scalar_law(&a_text).map_err(|e| fail(r, "a", e)).ok();
            let b = parse_scalar_law(&b_text).map_err(|e| fail(r, "b", e)).ok();
            let hint = r.positive_f64("model", "alpha_hint");
            let mut pilot = PilotConfig::default();
            if let Some(l) = r.positive_count("model", "pilot_length") {
                pilot.length = l;
            }
            if let Some(q) = r.positive_f64("model", "pilot_quantile") {
                if q >= 1.0 {
                    fail(r, "pilot_quantile", "must lie in (0, 1)".into());
                }
                pilot.quantile = q;
            }
            let (a, b) = (a?, b?);
            let spec = KestenSpec {
                law: KestenLaw::Scalar { a, b },
                alpha_hint: hint,
                pilot,
            };
            match spec.validate() {
                Ok(()) => Some(ModelSpec::Kesten(spec)),
                Err(e) => {
                    fail(r, "a", e.to_string());
                    None
                }
            }
        }
        "garch11" => {
            let mut vals = [0.0; 3];
            let mut ok = true;
            for (i, key) in ["alpha0", "alpha1", "beta1"].iter().enumerate() {
                if r.required("model", key).is_none() {
                    ok = false;
                    continue;
                }
                match r.positive_f64("model", key) {
                    Some(v) => vals[i] = v,
                    None => ok = false,
                }
            }
            let noise = match r.get("model", "noise").map(|x| x.0.to_string()) {
                None => GarchNoise::Gaussian,
                Some(text) => match parse_call(&text) {
                    Ok((n, a)) if n == "gaussian" && a.is_empty() => GarchNoise::Gaussian,
                    Ok((n, a)) if n == "student_t" && a.len() == 1 => GarchNoise::StudentT { nu: a[0] },
                    _ => {
                        fail(r, "noise", format!("expected gaussian or student_t(nu), got {text:?}"));
                        ok = false;
                        GarchNoise::Gaussian
                    }
                },
            };
            if !ok {
                return None;
            }
            match Garch11Spec::new(vals[0], vals[1], vals[2], noise) {
                Ok(s) => Some(ModelSpec::Garch11(s)),
                Err(e) => {
                    fail(r, "beta1", e.to_string());
                    None
                }
            }
        }
        other => {
            r.err(kind_line, "model.kind", format!("unknown model kind {other:?}; expected var1, kesten or garch11"));
            None
        }
    }
}

fn parse_knobs(r: &mut Reader, command: Command) -> Knobs {
    let mut k = Knobs::default();
    let s = command.name();
    if !r.sections.contains_key(s) {
        return k;
    }
    k.n = r.positive_count(s, "n");
    k.burn_in = r.parse(s, "burn_in");
    if let Some(v) = r.positive_count(s, "replicas") {
        k.replicas = v;
    }
    k.horizon = r.parse(s, "horizon");
    if let Some(v) = r.positive_f64(s, "tolerance") {
        k.tolerance = v;
    }
    k.telescoping_k = r.positive_count(s, "telescoping_k");
    if let Some((v, line)) = r.get(s, "routes").map(|(v, l)| (v.to_string(), l)) {
        let routes: Vec<String> = v.split(',').map(|x| x.trim().to_string()).collect();
        for route in &routes {
            if !["tail_process", "closed_form", "telescoping", "extremal"].contains(&route.as_str()) {
                r.err(line, format!("{s}.routes"), format!("unknown route {route:?}"));
            }
        }
        k.routes = Some(routes);
    }
    if let Some((v, line)) = r.get(s, "directions").map(|(v, l)| (v.to_string(), l)) {
        match parse_rows(&v) {
            Ok(rows) => k.directions = Some(rows),
            Err(e) => r.err(line, format!("{s}.directions"), e),
        }
    }
    k.reps = r.positive_count(s, "reps");
    if let Some(v) = r.positive_count(s, "grid_size") {
        k.grid_size = v;
    }
    if let Some(v) = r.positive_f64(s, "eps") {
        k.eps = v;
    }
    if let Some(v) = r.positive_f64(s, "c_factor") {
        if v <= 1.0 {
            let line = r.get(s, "c_factor").map(|x| x.1).unwrap_or(0);
            r.err(line, format!("{s}.c_factor"), "must exceed 1");
        }
        k.c_factor = v;
    }
    k.band = r.positive_f64(s, "band");
    if let Some(v) = r.positive_count(s, "min_exceedances") {
        k.min_exceedances = v as u64;
    }
    if let Some(v) = r.positive_count(s, "long_run") {
        k.long_run = v;
    }
    if let Some(v) = r.positive_f64(s, "p") {
        k.p = v;
    }
    if let Some(v) = r.positive_count(s, "m") {
        k.m = v;
    }
    if let Some((v, line)) = r.get(s, "states").map(|(v, l)| (v.to_string(), l)) {
        match parse_rows(&v) {
            Ok(rows) if rows.len() == 1 && rows[0].len() >= 2 => k.states = rows[0].clone(),
            Ok(_) => r.err(line, format!("{s}.states"), "need at least two comma-separated states"),
            Err(e) => r.err(line, format!("{s}.states"), e),
        }
    }
    k.radius = r.positive_f64(s, "radius");
    k.epsilon = r.positive_f64(s, "epsilon");
    if let Some(e) = k.epsilon {
        if e > 1.0 {
            let line = r.get(s, "epsilon").map(|x| x.1).unwrap_or(0);
            r.err(line, format!("{s}.epsilon"), "must lie in (0, 1]");
        }
    }
    k.k = r.positive_count(s, "k");
    if let Some(v) = r.positive_count(s, "fidelity") {
        k.fidelity = v;
    }
    k
}

/// Parses and validates a config file, collecting every error with its line.
///
/// `command` selects the knob section to read; when `None`, the `[experiment] command`
/// key decides.
pub fn parse_config(text: &str, command: Option<Command>) -> Result<ExperimentConfig, ConfigErrors> {
    let mut r = tokenize(text);
    if !r.sections.contains_key("experiment") {
        r.err(0, "[experiment]", "missing section");
    }
    let file_command = match r.get("experiment", "command").map(|(v, l)| (v.to_string(), l)) {
        Some((v, line)) => match Command::parse(&v) {
            Some(c) => Some(c),
            None => {
                r.err(line, "experiment.command", format!("unknown command {v:?}"));
                None
            }
        },
        None => None,
    };
    let seed = r.parse::<u64>("experiment", "seed");
    let threads = r.positive_count("experiment", "threads");
    let output_dir = r.get("experiment", "output_dir").map(|(v, _)| PathBuf::from(v));
    let model = parse_model(&mut r);
    let chosen = command.or(file_command);
    let knobs = match chosen {
        Some(c) => parse_knobs(&mut r, c),
        None => Knobs::default(),
    };
    if let (Some(model), true) = (&model, r.errors.is_empty()) {
        if let Some(dirs) = &knobs.directions {
            if dirs.iter().any(|d| d.len() != model.dim()) {
                r.err(0, "directions", format!("each direction needs {} entries", model.dim()));
            }
        }
    }
    if r.errors.is_empty() {
        Ok(ExperimentConfig {
            command: chosen,
            seed,
            threads,
            output_dir,
            model: model.expect("model parsed without errors"),
            knobs,
            source: text.to_string(),
        })
    } else {
        r.errors.sort_by_key(|e| e.line);
        Err(ConfigErrors(r.errors))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[experiment]\nseed = 7\n\n[model]\nkind = var1\na = 0.5\ninnovation = pareto(1.5)\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL, Some(Command::ClusterIndex)).unwrap();
        assert_eq!(c.seed, Some(7));
        assert_eq!(c.knobs.replicas, 10_000);
        assert_eq!(c.model.dim(), 1);
    }

    #[test]
    fn negative_garch_parameter_named() {
        let text = "[experiment]\nseed = 1\n[model]\nkind = garch11\nalpha0 = 0.1\nalpha1 = -0.1\nbeta1 = 0.8\n";
        let e = parse_config(text, Some(Command::Report)).unwrap_err();
        assert_eq!(e.0.len(), 1);
        assert_eq!(e.0[0].field, "model.alpha1");
        assert_eq!(e.0[0].line, 6);
    }

    #[test]
    fn duplicate_key_lists_both_lines() {
        let text = format!("{MINIMAL}a = 0.4\n");
        let e = parse_config(&text, None).unwrap_err();
        assert!(e.0[0].message.contains("lines 6 and 8"), "{}", e);
    }

    #[test]
    fn all_errors_reported() {
        let text = "[experiment]\nseed = x\nbogus = 1\n[model]\nkind = var1\na = 0.5\n";
        let e = parse_config(text, None).unwrap_err();
        let fields: Vec<&str> = e.0.iter().map(|x| x.field.as_str()).collect();
        assert!(fields.contains(&"experiment.seed"));
        assert!(fields.contains(&"experiment.bogus"));
        assert!(fields.contains(&"model.innovation"));
    }

    #[test]
    fn law_expressions() {
        assert_eq!(parse_scalar_law("0.5").unwrap(), ScalarLaw::Constant(0.5));
        assert!(matches!(
            parse_scalar_law("lognormal(-0.5, 0.5)").unwrap(),
            ScalarLaw::LogNormal { .. }
        ));
        assert!(parse_tail_law("pareto()").is_err());
        assert!(parse_tail_law("cauchy(1)").is_err());
    }
}
