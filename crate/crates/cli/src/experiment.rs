//! Building models from configuration, running chains and collecting
//! per-run summaries.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use bridgesmc_core::blocking::{
    blocktime_blocking, choose_blocking_from, dyadic_blocktimes, evaluate_blocking_candidates, BlockingSequence,
    TunedBlocking, TunerConfig,
};
use bridgesmc_core::diagnostics::{iact_batch_means, ire, quantile_sorted, ChainTrace, PluTally, MIN_SERIES};
use bridgesmc_core::filters::{
    initial_reference, kernel_step, plan_blocks, BridgeOracle, BridgePlan, Kernel, ReferencePath, TransitionDensity,
};
use bridgesmc_core::models::{
    augment_grid, cp_rbm_fk, ctcrwp_fk, ctcrwp_unit_stationary, ctcrwt_fk, simulate_cp_rbm, two_lakes_track,
    CpRbmModel, CtcrwpModel, CtcrwpParams, CtcrwtModel, TerrainRaster,
};
use bridgesmc_core::resampling::Scheme;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{BlockingSpec, ExperimentConfig, KernelKind, ModelSpec, RawConfig, RunSpec};
use crate::error::{CliError, Result};
use crate::io::{self, CsvOut};

/// Stream reserved for simulating data sets.
pub const DATA_STREAM: u64 = u64::MAX;

/// The generator for `stream` under `master`: ChaCha8 keyed by the master
/// seed, with the stream number selecting an independent sequence. Run `i`
/// of an expanded configuration uses stream `i`, so results do not depend
/// on scheduling.
pub fn stream_rng(master: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

pub enum AnyModel {
    Ctcrwp(CtcrwpModel),
    Cprbm(CpRbmModel),
    Ctcrwt(CtcrwtModel),
}

macro_rules! with_model {
    ($any:expr, $m:ident => $body:expr) => {
        match $any {
            AnyModel::Ctcrwp($m) => $body,
            AnyModel::Cprbm($m) => $body,
            AnyModel::Ctcrwt($m) => $body,
        }
    };
}

/// A model ready to run, with the grid and the traced state component.
pub struct BuiltModel {
    pub model: AnyModel,
    pub grid: Vec<f64>,
    /// Base step; blocktimes are multiples of it.
    pub step: f64,
    /// State component summarised in traces and diagnostics.
    pub component: usize,
    /// Simulated latent path `(time, x)` and events, when the data were simulated.
    pub truth: Option<Vec<(f64, f64)>>,
    pub events: Option<Vec<f64>>,
}

fn regular_grid(field: &str, start: f64, span: f64, step: f64) -> Result<Vec<f64>> {
    let cells = span / step;
    let n = cells.round();
    if !(n >= 1.0) || (cells - n).abs() > 1e-9 * n.max(1.0) {
        return Err(CliError::config(field, format!("span {span} is not a positive multiple of the step {step}")));
    }
    Ok((0..=n as usize).map(|k| start + k as f64 * step).collect())
}

pub fn build_model(spec: &ModelSpec) -> Result<BuiltModel> {
    match spec {
        ModelSpec::Ctcrwp(s) => {
            let (beta_v, beta_x) = match s.betas {
                Some(b) => b,
                None => ctcrwp_unit_stationary(s.sigma)?,
            };
            let params = CtcrwpParams { beta_v, beta_x, sigma: s.sigma, eta: s.eta, horizon: s.horizon, step: s.step };
            regular_grid("ctcrwp.horizon", 0.0, s.horizon, s.step)?;
            Ok(BuiltModel {
                model: AnyModel::Ctcrwp(ctcrwp_fk(&params)?),
                grid: params.grid(),
                step: s.step,
                component: 1,
                truth: None,
                events: None,
            })
        }
        ModelSpec::Cprbm(s) => {
            let base = regular_grid("cprbm.horizon", 0.0, s.horizon, s.step)?;
            let (events, truth) = match &s.events {
                Some(path) => (io::read_events(path)?, None),
                None => {
                    let mut rng = stream_rng(s.data_seed, DATA_STREAM);
                    let sample = simulate_cp_rbm(&s.params, &base, &mut rng)?;
                    let truth: Vec<(f64, f64)> = base.iter().copied().zip(sample.path).collect();
                    (sample.events, Some(truth))
                }
            };
            let grid = augment_grid(&base, &events);
            let model = cp_rbm_fk(&s.params, &events, &grid)?;
            let simulated = truth.is_some();
            Ok(BuiltModel {
                model: AnyModel::Cprbm(model),
                grid,
                step: s.step,
                component: 0,
                truth,
                events: simulated.then_some(events),
            })
        }
        ModelSpec::Ctcrwt(s) => {
            let raster = match &s.raster {
                Some(path) => io::read_raster(path)?,
                None => TerrainRaster::two_lakes(),
            }
            .with_boundary(s.boundary)?;
            let obs = match &s.observations {
                Some(path) => io::read_observations(path)?,
                None => two_lakes_track(),
            };
            let first = obs.iter().map(|o| o.time).fold(f64::INFINITY, f64::min);
            let last = obs.iter().map(|o| o.time).fold(f64::NEG_INFINITY, f64::max);
            let grid = regular_grid("ctcrwt.step", first, last - first, s.step)?;
            let (model, _) = ctcrwt_fk(&s.params, &obs, Arc::new(raster), &grid)?;
            Ok(BuiltModel {
                model: AnyModel::Ctcrwt(model),
                grid,
                step: s.step,
                component: 1,
                truth: None,
                events: None,
            })
        }
    }
}

/// Constant-blocktime candidates `|Δ|, 2|Δ|, 4|Δ|, …` with duplicates removed.
pub fn blocktime_candidates(grid: &[f64], step: f64) -> Result<Vec<BlockingSequence>> {
    let mut out: Vec<BlockingSequence> = Vec::new();
    for bt in dyadic_blocktimes(grid, step) {
        let seq = blocktime_blocking(grid, bt)?;
        if out.last() != Some(&seq) {
            out.push(seq);
        }
    }
    Ok(out)
}

/// Post-burn-in output of one chain.
pub struct ChainOutput {
    pub trace: ChainTrace,
    /// Lower-boundary update counts, for bridge kernels.
    pub tally: Option<PluTally>,
    pub last: ReferencePath,
}

/// Iterates `kernel` from `init`, recording component `component` of every
/// state and, for bridge kernels, tallying lower-boundary updates after
/// burn-in.
#[allow(clippy::too_many_arguments)]
pub fn run_chain<M, P, R>(
    model: &M,
    kernel: &Kernel<P>,
    scheme: Scheme,
    particles: usize,
    iterations: usize,
    burn_in: usize,
    component: usize,
    init: ReferencePath,
    rng: &mut R,
) -> Result<ChainOutput>
where
    M: TransitionDensity,
    P: BridgePlan,
    R: Rng + ?Sized,
{
    let horizon = init.horizon();
    let mut trace = ChainTrace::with_capacity(horizon, burn_in, iterations);
    let mut tally = match kernel {
        Kernel::Bridge(plans) => Some(PluTally::new(plans.len())),
        _ => None,
    };
    let mut cur = init;
    let mut row = vec![0.0; horizon];
    for it in 0..iterations {
        let (next, changed) = kernel_step(model, kernel, scheme, &cur, particles, rng)?;
        cur = next;
        for (k, r) in row.iter_mut().enumerate() {
            *r = cur.state(k)[component];
        }
        trace.push(&row)?;
        if it >= burn_in {
            if let (Some(t), Some(c)) = (tally.as_mut(), changed) {
                t.record(&c)?;
            }
        }
    }
    Ok(ChainOutput { trace, tally, last: cur })
}

/// One line of `diagnostics.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagRow {
    pub quantity: String,
    pub index: usize,
    pub time: f64,
    pub value: f64,
}

/// Everything a run contributes to the output files.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub spec: RunSpec,
    pub blocking: BlockingSequence,
    pub grid: Vec<f64>,
    pub diagnostics: Vec<DiagRow>,
    /// Trace columns `(grid index, time)` and rows `(iteration, values)`.
    pub trace_columns: Vec<(usize, f64)>,
    pub trace_rows: Vec<(usize, Vec<f64>)>,
    pub tuned: Option<TunedBlocking>,
    pub truth: Option<Vec<(f64, f64)>>,
    pub events: Option<Vec<f64>>,
}

impl RunOutput {
    pub fn values(&self, quantity: &str) -> Vec<f64> {
        self.diagnostics.iter().filter(|d| d.quantity == quantity).map(|d| d.value).collect()
    }
}

fn resolve_blocking<M, R>(
    config: &ExperimentConfig,
    model: &M,
    grid: &[f64],
    step: f64,
    rng: &mut R,
) -> Result<(BlockingSequence, Option<TunedBlocking>)>
where
    M: TransitionDensity + BridgeOracle,
    R: Rng + ?Sized,
{
    match config.blocking {
        BlockingSpec::Dense => Ok((BlockingSequence::dense(grid.len())?, None)),
        BlockingSpec::Blocktime(bt) => Ok((blocktime_blocking(grid, bt)?, None)),
        BlockingSpec::Auto { particles, runs } => {
            if config.particles < 2 {
                return Err(CliError::config(
                    "experiment.particles",
                    "automatic blocking needs at least two particles",
                ));
            }
            let candidates = blocktime_candidates(grid, step)?;
            let tuner = TunerConfig { particles, target: config.particles, runs };
            let tuned = choose_blocking_from(&candidates, model, model, tuner, rng)?;
            Ok((tuned.blocking.clone(), Some(tuned)))
        }
    }
}

fn nearest_index(grid: &[f64], t: f64) -> usize {
    let j = grid.partition_point(|&g| g < t);
    if j == 0 {
        0
    } else if j >= grid.len() {
        grid.len() - 1
    } else if (grid[j] - t).abs() < (t - grid[j - 1]).abs() {
        j
    } else {
        j - 1
    }
}

fn run_model<M>(spec: &RunSpec, built: &BuiltModel, model: &M) -> Result<RunOutput>
where
    M: TransitionDensity + BridgeOracle,
{
    let config = &spec.config;
    let grid = &built.grid;
    let mut rng = stream_rng(config.seed, spec.index as u64);
    let (blocking, tuned) = resolve_blocking(config, model, grid, built.step, &mut rng)?;
    let kernel = match config.kernel {
        KernelKind::AncestorTracing => Kernel::AncestorTracing,
        KernelKind::BackwardSampling => Kernel::BackwardSampling,
        KernelKind::Bridge => Kernel::Bridge(plan_blocks(model, &blocking)?),
    };
    let init = initial_reference(model, config.particles, config.max_init_particles.max(config.particles), &mut rng)?;
    let out = run_chain(
        model,
        &kernel,
        config.resampling,
        config.particles,
        config.iterations,
        config.burn_in,
        built.component,
        init,
        &mut rng,
    )?;

    let mut diagnostics = Vec::new();
    let trace = &out.trace;
    for (t, &time) in grid.iter().enumerate() {
        let mut series = trace.series(t);
        let iact = if series.len() >= MIN_SERIES { iact_batch_means(&series).unwrap_or(f64::NAN) } else { f64::NAN };
        let mean = series.iter().sum::<f64>() / series.len() as f64;
        diagnostics.push(DiagRow { quantity: "iact".into(), index: t, time, value: iact });
        diagnostics.push(DiagRow { quantity: "ire".into(), index: t, time, value: ire(iact, config.particles) });
        diagnostics.push(DiagRow { quantity: "mean".into(), index: t, time, value: mean });
        series.sort_by(f64::total_cmp);
        for &p in &config.quantiles {
            diagnostics.push(DiagRow { quantity: format!("q{p}"), index: t, time, value: quantile_sorted(&series, p) });
        }
    }
    if let Some(tally) = &out.tally {
        for ((l, _), v) in blocking.blocks().zip(tally.empirical_plu()?) {
            diagnostics.push(DiagRow { quantity: "empirical_plu".into(), index: l, time: grid[l], value: v });
        }
    }
    if config.plu_runs > 0 {
        let tuner = TunerConfig::new(config.particles, config.plu_runs);
        let table = evaluate_blocking_candidates(std::slice::from_ref(&blocking), model, model, tuner, &mut rng)?;
        for ((l, _), &v) in blocking.blocks().zip(&table.values[0]) {
            diagnostics.push(DiagRow { quantity: "phi_plu".into(), index: l, time: grid[l], value: v });
        }
    }

    let trace_columns: Vec<(usize, f64)> = match &config.trace_times {
        Some(times) => times.iter().map(|&t| nearest_index(grid, t)).map(|j| (j, grid[j])).collect(),
        None => {
            let last = grid.len() - 1;
            let mut cols = vec![0, last / 2, last];
            cols.dedup();
            cols.into_iter().map(|j| (j, grid[j])).collect()
        }
    };
    let trace_rows =
        (0..trace.iterations()).map(|i| (i, trace_columns.iter().map(|&(j, _)| trace.row(i)[j]).collect())).collect();
    Ok(RunOutput {
        spec: spec.clone(),
        blocking,
        grid: grid.clone(),
        diagnostics,
        trace_columns,
        trace_rows,
        tuned,
        truth: built.truth.clone(),
        events: built.events.clone(),
    })
}

pub fn run_one(spec: &RunSpec) -> Result<RunOutput> {
    let built = build_model(&spec.config.model)?;
    with_model!(&built.model, m => run_model(spec, &built, m))
}

/// Runs every expanded configuration (in parallel; results are independent
/// of scheduling) and writes the result files into the output directory.
pub fn run_experiment(raw: &RawConfig) -> Result<(PathBuf, Vec<RunOutput>)> {
    let specs = raw.expand()?;
    let outputs = specs.par_iter().map(run_one).collect::<Vec<_>>().into_iter().collect::<Result<Vec<_>>>()?;
    let dir = specs[0].config.output.clone();
    write_outputs(&dir, &outputs)?;
    io::write_string(&dir.join("config.txt"), &raw.to_text())?;
    Ok((dir, outputs))
}

fn fmt(x: f64) -> String {
    x.to_string()
}

pub const RUNS_HEADER: [&str; 12] = [
    "run",
    "model",
    "params",
    "particles",
    "resampling",
    "kernel",
    "blocking",
    "blocktime",
    "replicate",
    "blocks",
    "iterations",
    "burn_in",
];

/// Writes `runs.csv`, `diagnostics.csv`, `traces.csv` and, when present,
/// `chosen_blocking.csv`, `plu_table.csv`, `truth.csv` and `events.csv`.
pub fn write_outputs(dir: &Path, outputs: &[RunOutput]) -> Result<()> {
    io::create_dir(dir)?;
    let mut runs = CsvOut::create(&dir.join("runs.csv"), &RUNS_HEADER)?;
    for o in outputs {
        let c = &o.spec.config;
        let blocktime = c.blocking.blocktime(c.model.step()).map(fmt).unwrap_or_default();
        runs.row([
            o.spec.index.to_string(),
            c.model.name().to_string(),
            o.spec.params.clone(),
            c.particles.to_string(),
            c.resampling.name().to_string(),
            c.kernel.name().to_string(),
            c.blocking.to_string(),
            blocktime,
            o.spec.replicate.to_string(),
            o.blocking.num_blocks().to_string(),
            c.iterations.to_string(),
            c.burn_in.to_string(),
        ])?;
    }
    runs.finish()?;

    let mut diag = CsvOut::create(&dir.join("diagnostics.csv"), &["run", "quantity", "index", "time", "value"])?;
    for o in outputs {
        for d in &o.diagnostics {
            diag.row([o.spec.index.to_string(), d.quantity.clone(), d.index.to_string(), fmt(d.time), fmt(d.value)])?;
        }
    }
    diag.finish()?;

    let mut traces = CsvOut::create(&dir.join("traces.csv"), &["run", "iteration", "index", "time", "value"])?;
    for o in outputs {
        for (it, values) in &o.trace_rows {
            for (&(j, t), v) in o.trace_columns.iter().zip(values) {
                traces.row([o.spec.index.to_string(), it.to_string(), j.to_string(), fmt(t), fmt(*v)])?;
            }
        }
    }
    traces.finish()?;

    if outputs.iter().any(|o| o.tuned.is_some()) {
        write_tuned(dir, outputs.iter().filter_map(|o| o.tuned.as_ref().map(|t| (o.spec.index, &o.grid, t))))?;
    }
    if outputs.iter().any(|o| o.truth.is_some()) {
        let mut truth = CsvOut::create(&dir.join("truth.csv"), &["run", "time", "x"])?;
        let mut events = CsvOut::create(&dir.join("events.csv"), &["run", "time"])?;
        for o in outputs {
            for &(t, x) in o.truth.iter().flatten() {
                truth.row([o.spec.index.to_string(), fmt(t), fmt(x)])?;
            }
            for &t in o.events.iter().flatten() {
                events.row([o.spec.index.to_string(), fmt(t)])?;
            }
        }
        truth.finish()?;
        events.finish()?;
    }
    Ok(())
}

fn write_tuned<'a>(
    dir: &Path,
    tuned: impl Iterator<Item = (usize, &'a Vec<f64>, &'a TunedBlocking)> + Clone,
) -> Result<()> {
    let mut chosen = CsvOut::create(
        &dir.join("chosen_blocking.csv"),
        &["run", "block", "lower", "upper", "lower_time", "upper_time"],
    )?;
    let mut table =
        CsvOut::create(&dir.join("plu_table.csv"), &["run", "candidate", "block_lower", "block_size", "phi_plu"])?;
    for (run, grid, t) in tuned {
        for (i, (l, u)) in t.blocking.blocks().enumerate() {
            chosen.row([run.to_string(), i.to_string(), l.to_string(), u.to_string(), fmt(grid[l]), fmt(grid[u])])?;
        }
        for (s, (seq, vals)) in t.table.candidates.iter().zip(&t.table.values).enumerate() {
            for ((l, u), &v) in seq.blocks().zip(vals) {
                table.row([run.to_string(), s.to_string(), l.to_string(), (u - l).to_string(), fmt(v)])?;
            }
        }
    }
    chosen.finish()?;
    table.finish()
}

/// Runs only the blocking tuner for each distinct configuration, treating
/// every blocking as `auto(N0, n)` with the given defaults when not already
/// automatic.
pub fn tune_blocking(
    raw: &RawConfig,
    pool: Option<usize>,
    runs: Option<usize>,
) -> Result<(PathBuf, Vec<TunedBlocking>)> {
    let mut specs: Vec<RunSpec> = Vec::new();
    for mut s in raw.expand()? {
        let (p0, n0) = match s.config.blocking {
            BlockingSpec::Auto { particles, runs } => (particles, runs),
            _ => (s.config.particles, 50),
        };
        s.config.blocking = BlockingSpec::Auto { particles: pool.unwrap_or(p0), runs: runs.unwrap_or(n0) };
        if !specs.iter().any(|t| t.config == s.config && t.replicate == s.replicate) {
            s.index = specs.len();
            specs.push(s);
        }
    }
    let tuned = specs
        .par_iter()
        .map(|spec| -> Result<(usize, Vec<f64>, TunedBlocking)> {
            let built = build_model(&spec.config.model)?;
            let mut rng = stream_rng(spec.config.seed, spec.index as u64);
            let (_, t) =
                with_model!(&built.model, m => resolve_blocking(&spec.config, m, &built.grid, built.step, &mut rng))?;
            Ok((spec.index, built.grid, t.expect("automatic blocking returns a table")))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let dir = specs[0].config.output.clone();
    io::create_dir(&dir)?;
    write_tuned(&dir, tuned.iter().map(|(i, g, t)| (*i, g, t)))?;
    Ok((dir, tuned.into_iter().map(|(_, _, t)| t).collect()))
}
