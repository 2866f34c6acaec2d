//! Flat `key = value` configuration with one section per model.
//!
//! Any value marked sweepable below may be a comma-separated list; a
//! config expands to the cartesian product of its lists, times
//! `replicates`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use bridgesmc_core::models::{CpRbmParams, CtcrwParams, DEFAULT_K_TRUNC};
use bridgesmc_core::resampling::Scheme;

use crate::error::{CliError, Result};

const SECTIONS: [&str; 4] = ["experiment", "ctcrwp", "cprbm", "ctcrwt"];

/// `(section, key, sweepable)`.
const KEYS: &[(&str, &str, bool)] = &[
    ("experiment", "model", false),
    ("experiment", "particles", true),
    ("experiment", "iterations", false),
    ("experiment", "burn_in", false),
    ("experiment", "resampling", true),
    ("experiment", "kernel", true),
    ("experiment", "blocking", true),
    ("experiment", "seed", false),
    ("experiment", "replicates", false),
    ("experiment", "output", false),
    ("experiment", "trace_times", false),
    ("experiment", "quantiles", false),
    ("experiment", "plu_runs", false),
    ("experiment", "max_init_particles", false),
    ("ctcrwp", "sigma", true),
    ("ctcrwp", "eta", true),
    ("ctcrwp", "beta_v", true),
    ("ctcrwp", "beta_x", true),
    ("ctcrwp", "horizon", false),
    ("ctcrwp", "step", false),
    ("cprbm", "sigma", true),
    ("cprbm", "a", true),
    ("cprbm", "b", true),
    ("cprbm", "alpha", true),
    ("cprbm", "beta", true),
    ("cprbm", "k_trunc", false),
    ("cprbm", "horizon", false),
    ("cprbm", "step", false),
    ("cprbm", "events", false),
    ("cprbm", "data_seed", false),
    ("ctcrwt", "beta", true),
    ("ctcrwt", "sigma", true),
    ("ctcrwt", "eta", true),
    ("ctcrwt", "sigma_l", true),
    ("ctcrwt", "step", false),
    ("ctcrwt", "raster", false),
    ("ctcrwt", "observations", false),
    ("ctcrwt", "boundary", false),
];

/// Keys whose value is itself a list.
const LIST_KEYS: [&str; 2] = ["trace_times", "quantiles"];

fn lookup(section: &str, key: &str) -> Option<bool> {
    KEYS.iter().find(|(s, k, _)| *s == section && *k == key).map(|&(_, _, sweep)| sweep)
}

/// Parsed but unexpanded configuration text.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<(String, String), String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = RawConfig::default();
        let mut section: Option<String> = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return Err(CliError::config(
                        format!("[{name}]"),
                        format!("unknown section on line {}", lineno + 1),
                    ));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(line, format!("expected `key = value` on line {}", lineno + 1)))?;
            let sec = section
                .as_deref()
                .ok_or_else(|| CliError::config(key.trim(), "keys must follow a [section] header"))?;
            out.insert(sec, key.trim(), value.trim())?;
        }
        Ok(out)
    }

    fn insert(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        if lookup(section, key).is_none() {
            return Err(CliError::config(format!("{section}.{key}"), "unknown key"));
        }
        self.values.insert((section.to_string(), key.to_string()), value.to_string());
        Ok(())
    }

    /// Applies a `section.key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (path, value) =
            assignment.split_once('=').ok_or_else(|| CliError::config(assignment, "expected section.key=value"))?;
        let (section, key) =
            path.trim().split_once('.').ok_or_else(|| CliError::config(path, "expected section.key"))?;
        self.insert(section, key, value.trim())
    }

    /// The configuration as text that parses back to itself.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for section in SECTIONS {
            let keys: Vec<_> = self.values.iter().filter(|((s, _), _)| s == section).collect();
            if keys.is_empty() {
                continue;
            }
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&format!("[{section}]\n"));
            for ((_, k), v) in keys {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.values.get(&(section.to_string(), key.to_string())).map(String::as_str)
    }

    /// One scalar configuration per grid cell and replicate, in a fixed
    /// order: replicates innermost, then lists in section/key order with
    /// the last varying fastest.
    pub fn expand(&self) -> Result<Vec<RunSpec>> {
        let model = self.get("experiment", "model").ok_or_else(|| CliError::config("experiment.model", "missing"))?;
        if !["ctcrwp", "cprbm", "ctcrwt"].contains(&model) {
            return Err(CliError::config("experiment.model", format!("unknown model `{model}`")));
        }
        for (section, _) in self.values.keys() {
            if section != "experiment" && section != model {
                return Err(CliError::config(
                    format!("[{section}]"),
                    format!("section does not apply to model `{model}`"),
                ));
            }
        }
        let mut axes: Vec<(String, String, Vec<String>)> = Vec::new();
        for ((section, key), value) in &self.values {
            let items = if LIST_KEYS.contains(&key.as_str()) { vec![value.clone()] } else { split_list(value) };
            if items.len() > 1 && !lookup(section, key).unwrap_or(false) {
                return Err(CliError::config(format!("{section}.{key}"), "only one value is allowed"));
            }
            axes.push((section.clone(), key.clone(), items));
        }
        let replicates: usize = match self.get("experiment", "replicates") {
            Some(v) => parse_num("experiment.replicates", v)?,
            None => 1,
        };
        if replicates == 0 {
            return Err(CliError::config("experiment.replicates", "must be positive"));
        }
        let mut runs = Vec::new();
        let mut choice = vec![0usize; axes.len()];
        loop {
            let mut scalar = BTreeMap::new();
            let mut label = Vec::new();
            for ((section, key, items), &c) in axes.iter().zip(&choice) {
                scalar.insert((section.clone(), key.clone()), items[c].clone());
                if section != "experiment" && items.len() > 1 {
                    label.push(format!("{key}={}", items[c]));
                }
            }
            let config = ExperimentConfig::from_scalars(&scalar)?;
            for replicate in 0..replicates {
                runs.push(RunSpec { index: runs.len(), replicate, params: label.join(";"), config: config.clone() });
            }
            // Odometer over the axes, last axis fastest.
            let mut j = axes.len();
            loop {
                if j == 0 {
                    return Ok(runs);
                }
                j -= 1;
                choice[j] += 1;
                if choice[j] < axes[j].2.len() {
                    break;
                }
                choice[j] = 0;
            }
        }
    }
}

/// Splits on commas outside parentheses.
pub fn split_list(value: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in value.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if ch == ',' && depth == 0 {
            out.push(cur.trim().to_string());
            cur.clear();
        } else {
            cur.push(ch);
        }
    }
    out.push(cur.trim().to_string());
    out
}

fn parse_num<T: std::str::FromStr>(field: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| CliError::config(field, format!("`{value}`: {e}")))
}

fn parse_list(field: &str, value: &str) -> Result<Vec<f64>> {
    split_list(value).iter().map(|v| parse_num(field, v)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockingSpec {
    Dense,
    Blocktime(f64),
    Auto { particles: usize, runs: usize },
}

impl BlockingSpec {
    pub fn parse(value: &str, particles: usize) -> Result<Self> {
        let field = "experiment.blocking";
        let v = value.trim();
        if v == "dense" {
            return Ok(BlockingSpec::Dense);
        }
        if v == "auto" {
            return Ok(BlockingSpec::Auto { particles, runs: 50 });
        }
        let args =
            |prefix: &str| v.strip_prefix(prefix).and_then(|r| r.strip_prefix('(')).and_then(|r| r.strip_suffix(')'));
        if let Some(a) = args("blocktime") {
            let bt: f64 = parse_num(field, a)?;
            if !(bt > 0.0 && bt.is_finite()) {
                return Err(CliError::config(field, "blocktime must be positive"));
            }
            return Ok(BlockingSpec::Blocktime(bt));
        }
        if let Some(a) = args("auto") {
            let parts = split_list(a);
            if parts.len() != 2 {
                return Err(CliError::config(field, "expected auto(N0, n)"));
            }
            let particles = parse_num(field, &parts[0])?;
            let runs = parse_num(field, &parts[1])?;
            if particles < 2 || runs == 0 {
                return Err(CliError::config(field, "auto needs N0 ≥ 2 and n ≥ 1"));
            }
            return Ok(BlockingSpec::Auto { particles, runs });
        }
        Err(CliError::config(field, format!("`{v}` is not dense, blocktime(x) or auto(N0, n)")))
    }

    /// The blocktime, if constant.
    pub fn blocktime(&self, step: f64) -> Option<f64> {
        match *self {
            BlockingSpec::Dense => Some(step),
            BlockingSpec::Blocktime(b) => Some(b),
            BlockingSpec::Auto { .. } => None,
        }
    }
}

impl fmt::Display for BlockingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockingSpec::Dense => write!(f, "dense"),
            BlockingSpec::Blocktime(b) => write!(f, "blocktime({b})"),
            BlockingSpec::Auto { particles, runs } => write!(f, "auto({particles}, {runs})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    AncestorTracing,
    BackwardSampling,
    Bridge,
}

impl KernelKind {
    fn parse(value: &str) -> Result<Self> {
        match value.trim() {
            "at" | "cpf_at" => Ok(KernelKind::AncestorTracing),
            "bs" | "cpf_bs" => Ok(KernelKind::BackwardSampling),
            "bbs" | "cpf_bbs" => Ok(KernelKind::Bridge),
            other => Err(CliError::config("experiment.kernel", format!("`{other}` is not at, bs or bbs"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::AncestorTracing => "cpf_at",
            KernelKind::BackwardSampling => "cpf_bs",
            KernelKind::Bridge => "cpf_bbs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CtcrwpSpec {
    pub sigma: f64,
    pub eta: f64,
    /// Both rates, or neither for unit stationary variances.
    pub betas: Option<(f64, f64)>,
    pub horizon: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CprbmSpec {
    pub params: CpRbmParams,
    pub horizon: f64,
    pub step: f64,
    /// Event times; simulated from the model when absent.
    pub events: Option<PathBuf>,
    pub data_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CtcrwtSpec {
    pub params: CtcrwParams,
    pub step: f64,
    /// Raster and track files; the built-in two-lake fixture when absent.
    pub raster: Option<PathBuf>,
    pub observations: Option<PathBuf>,
    pub boundary: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Ctcrwp(CtcrwpSpec),
    Cprbm(CprbmSpec),
    Ctcrwt(CtcrwtSpec),
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Ctcrwp(_) => "ctcrwp",
            ModelSpec::Cprbm(_) => "cprbm",
            ModelSpec::Ctcrwt(_) => "ctcrwt",
        }
    }

    pub fn step(&self) -> f64 {
        match self {
            ModelSpec::Ctcrwp(s) => s.step,
            ModelSpec::Cprbm(s) => s.step,
            ModelSpec::Ctcrwt(s) => s.step,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub particles: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub resampling: Scheme,
    pub kernel: KernelKind,
    pub blocking: BlockingSpec,
    pub seed: u64,
    pub output: PathBuf,
    /// Times written to `traces.csv`; first, middle and last grid point by default.
    pub trace_times: Option<Vec<f64>>,
    pub quantiles: Vec<f64>,
    /// Independent filter runs for per-block PLU estimates of the run's own
    /// blocking (0 = off).
    pub plu_runs: usize,
    pub max_init_particles: usize,
}

struct Scalars<'a>(&'a BTreeMap<(String, String), String>);

impl Scalars<'_> {
    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.0.get(&(section.to_string(), key.to_string())).map(String::as_str)
    }

    fn num<T: std::str::FromStr>(&self, section: &str, key: &str, default: Option<T>) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        let field = format!("{section}.{key}");
        match self.raw(section, key) {
            Some(v) => parse_num(&field, v),
            None => default.ok_or_else(|| CliError::config(field, "missing")),
        }
    }

    fn positive(&self, section: &str, key: &str, default: Option<f64>) -> Result<f64> {
        let v: f64 = self.num(section, key, default)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::config(format!("{section}.{key}"), "must be positive"));
        }
        Ok(v)
    }

    fn path(&self, section: &str, key: &str) -> Option<PathBuf> {
        self.raw(section, key).map(PathBuf::from)
    }
}

impl ExperimentConfig {
    fn from_scalars(values: &BTreeMap<(String, String), String>) -> Result<Self> {
        let s = Scalars(values);
        let e = "experiment";
        let model = match s.raw(e, "model").unwrap_or("") {
            "ctcrwp" => {
                let betas = match (s.raw("ctcrwp", "beta_v"), s.raw("ctcrwp", "beta_x")) {
                    (None, None) => None,
                    (Some(_), Some(_)) => {
                        Some((s.positive("ctcrwp", "beta_v", None)?, s.positive("ctcrwp", "beta_x", None)?))
                    }
                    _ => return Err(CliError::config("ctcrwp.beta_v", "give both beta_v and beta_x or neither")),
                };
                ModelSpec::Ctcrwp(CtcrwpSpec {
                    sigma: s.positive("ctcrwp", "sigma", None)?,
                    eta: s.positive("ctcrwp", "eta", Some(1.0))?,
                    betas,
                    horizon: s.positive("ctcrwp", "horizon", Some(8.0))?,
                    step: s.positive("ctcrwp", "step", Some(0.03125))?,
                })
            }
            "cprbm" => {
                let d = CpRbmParams::default();
                let params = CpRbmParams {
                    sigma: s.positive("cprbm", "sigma", Some(d.sigma))?,
                    a: s.num("cprbm", "a", Some(d.a))?,
                    b: s.num("cprbm", "b", Some(d.b))?,
                    alpha: s.num("cprbm", "alpha", Some(d.alpha))?,
                    beta: s.positive("cprbm", "beta", Some(d.beta))?,
                    k_trunc: s.num("cprbm", "k_trunc", Some(DEFAULT_K_TRUNC))?,
                };
                if !(params.a < params.b) || params.k_trunc == 0 {
                    return Err(CliError::config("cprbm.a", "need a < b and k_trunc ≥ 1"));
                }
                ModelSpec::Cprbm(CprbmSpec {
                    params,
                    horizon: s.positive("cprbm", "horizon", Some(16.0))?,
                    step: s.positive("cprbm", "step", Some(0.0625))?,
                    events: s.path("cprbm", "events"),
                    data_seed: s.num("cprbm", "data_seed", Some(0))?,
                })
            }
            "ctcrwt" => ModelSpec::Ctcrwt(CtcrwtSpec {
                params: CtcrwParams {
                    beta: s.positive("ctcrwt", "beta", Some(1.0))?,
                    sigma: s.positive("ctcrwt", "sigma", Some(1.5))?,
                    eta: s.positive("ctcrwt", "eta", Some(0.2))?,
                    sigma_l: s.positive("ctcrwt", "sigma_l", Some(0.2))?,
                },
                step: s.positive("ctcrwt", "step", Some(0.03125))?,
                raster: s.path("ctcrwt", "raster"),
                observations: s.path("ctcrwt", "observations"),
                boundary: s.num("ctcrwt", "boundary", Some(0.0))?,
            }),
            other => return Err(CliError::config("experiment.model", format!("unknown model `{other}`"))),
        };
        let particles: usize = s.num(e, "particles", None)?;
        let iterations: usize = s.num(e, "iterations", None)?;
        let burn_in: usize = s.num(e, "burn_in", Some(0))?;
        if particles == 0 {
            return Err(CliError::config("experiment.particles", "must be positive"));
        }
        if iterations == 0 {
            return Err(CliError::config("experiment.iterations", "must be positive"));
        }
        if burn_in >= iterations {
            return Err(CliError::config("experiment.burn_in", "must be smaller than iterations"));
        }
        let resampling: Scheme =
            s.raw(e, "resampling").unwrap_or("systematic_mp").parse().map_err(|_| {
                CliError::config("experiment.resampling", "expected multinomial, killing or systematic_mp")
            })?;
        let kernel = KernelKind::parse(s.raw(e, "kernel").unwrap_or("bbs"))?;
        let blocking = BlockingSpec::parse(s.raw(e, "blocking").unwrap_or("dense"), particles)?;
        if let BlockingSpec::Blocktime(bt) = blocking {
            let step = model.step();
            let ratio = bt / step;
            if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio.round() < 1.0 {
                return Err(CliError::config(
                    "experiment.blocking",
                    format!("blocktime {bt} is not a multiple of the step {step}"),
                ));
            }
        }
        let trace_times = s.raw(e, "trace_times").map(|v| parse_list("experiment.trace_times", v)).transpose()?;
        let quantiles = match s.raw(e, "quantiles") {
            Some(v) => parse_list("experiment.quantiles", v)?,
            None => vec![0.025, 0.25, 0.5, 0.75, 0.975],
        };
        if quantiles.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            return Err(CliError::config("experiment.quantiles", "must lie in (0, 1)"));
        }
        Ok(ExperimentConfig {
            model,
            particles,
            iterations,
            burn_in,
            resampling,
            kernel,
            blocking,
            seed: s.num(e, "seed", Some(1))?,
            output: s.path(e, "output").unwrap_or_else(|| PathBuf::from("out")),
            trace_times,
            quantiles,
            plu_runs: s.num(e, "plu_runs", Some(0))?,
            max_init_particles: s.num(e, "max_init_particles", Some(4096))?,
        })
    }
}

/// One chain of an expanded configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub index: usize,
    pub replicate: usize,
    /// Swept model parameters, e.g. `sigma=0.5`.
    pub params: String,
    pub config: ExperimentConfig,
}

pub const CTCRWP_PRESET: &str = "\
[experiment]
model = ctcrwp
particles = 8
iterations = 21000
burn_in = 1000
resampling = multinomial, killing, systematic_mp
kernel = bbs
blocking = blocktime(0.03125), blocktime(0.0625), blocktime(0.125), blocktime(0.25), blocktime(0.5), blocktime(1), blocktime(2), blocktime(4), blocktime(8)
seed = 1
output = out/ctcrwp

[ctcrwp]
sigma = 0.125, 0.5, 2.0
eta = 1.0
horizon = 8
step = 0.03125
";

pub const CPRBM_PRESET: &str = "\
[experiment]
model = cprbm
particles = 8
iterations = 11000
burn_in = 1000
resampling = systematic_mp
kernel = bbs
blocking = auto(8, 50), blocktime(0.0625), blocktime(0.125), blocktime(0.25), blocktime(0.5), blocktime(1), blocktime(2), blocktime(4), blocktime(8)
seed = 1
output = out/cprbm

[cprbm]
sigma = 0.3
a = 0
b = 3
alpha = 1
beta = 0.5
horizon = 16
step = 0.0625
data_seed = 1
";

pub const CTCRWT_PRESET: &str = "\
[experiment]
model = ctcrwt
particles = 16
iterations = 11000
burn_in = 1000
resampling = systematic_mp
kernel = bbs, bs
blocking = blocktime(1)
seed = 1
max_init_particles = 65536
output = out/ctcrwt

[ctcrwt]
beta = 1
sigma = 1.5
eta = 0.2
sigma_l = 0.2
step = 0.03125
";

pub fn preset(name: &str) -> Option<&'static str> {
    match name {
        "ctcrwp" => Some(CTCRWP_PRESET),
        "cprbm" => Some(CPRBM_PRESET),
        "ctcrwt" => Some(CTCRWT_PRESET),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_expand() {
        assert_eq!(RawConfig::parse(CTCRWP_PRESET).unwrap().expand().unwrap().len(), 81);
        assert_eq!(RawConfig::parse(CPRBM_PRESET).unwrap().expand().unwrap().len(), 9);
        assert_eq!(RawConfig::parse(CTCRWT_PRESET).unwrap().expand().unwrap().len(), 2);
    }

    #[test]
    fn text_round_trip() {
        for p in [CTCRWP_PRESET, CPRBM_PRESET, CTCRWT_PRESET] {
            let c = RawConfig::parse(p).unwrap();
            assert_eq!(RawConfig::parse(&c.to_text()).unwrap(), c);
        }
    }

    #[test]
    fn lists_respect_parentheses() {
        assert_eq!(split_list("auto(8, 50), dense"), ["auto(8, 50)", "dense"]);
        assert_eq!(BlockingSpec::parse("auto(8, 50)", 4).unwrap(), BlockingSpec::Auto { particles: 8, runs: 50 });
        assert_eq!(BlockingSpec::parse("auto", 4).unwrap(), BlockingSpec::Auto { particles: 4, runs: 50 });
    }

    #[test]
    fn errors_name_the_field() {
        let base = "[experiment]\nmodel = ctcrwp\nparticles = 4\niterations = 10\n[ctcrwp]\nsigma = 1\n";
        let check = |extra: &str, field: &str| {
            let err = RawConfig::parse(&format!("{base}{extra}")).and_then(|c| c.expand()).unwrap_err();
            match err {
                CliError::Config { field: f, .. } => assert_eq!(f, field),
                e => panic!("{e}"),
            }
        };
        check("step = 0.1\n[experiment]\nblocking = blocktime(0.25)\n", "experiment.blocking");
        check("eta = -1\n", "ctcrwp.eta");
        check("colour = red\n", "ctcrwp.colour");
        check("[experiment]\nseed = 1, 2\n", "experiment.seed");
        check("[experiment]\nburn_in = 10\n", "experiment.burn_in");
        check("[cprbm]\nsigma = 1\n", "[cprbm]");
    }

    #[test]
    fn expansion_order_is_fixed() {
        let text = "[experiment]\nmodel = ctcrwp\nparticles = 2, 8\niterations = 10\nreplicates = 2\n[ctcrwp]\nsigma = 0.5, 2\n";
        let runs = RawConfig::parse(text).unwrap().expand().unwrap();
        let got: Vec<(usize, String, usize)> =
            runs.iter().map(|r| (r.config.particles, r.params.clone(), r.replicate)).collect();
        let want: Vec<(usize, String, usize)> = [(2, "0.5"), (8, "0.5"), (2, "2"), (8, "2")]
            .iter()
            .flat_map(|&(n, s)| (0..2).map(move |r| (n, format!("sigma={s}"), r)))
            .collect();
        assert_eq!(got, want);
    }
}
