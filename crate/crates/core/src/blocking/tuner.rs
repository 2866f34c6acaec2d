//! Candidate blockings, their PLU evaluation from particle-filter runs, and
//! assembly of a single blocking from the per-block estimates.

use alloc::vec::Vec;

use rand::Rng;

use super::plu::{plu_g, plu_hat, plu_m_alt_log, plu_m_log, resampling_rate};
use super::sequence::BlockingSequence;
use crate::error::{Error, Result};
use crate::filters::{particle_filter, BridgeOracle, BridgePlan, FkModel, ParticleSystem};
use crate::resampling::{weights::exp_shifted, weights::normalise, Scheme};

/// Dyadic candidates with block sizes `1, 2, …, 2^p`, where `2^p` is the
/// largest power of two not exceeding the number of steps `T-1`.
pub fn dyadic_candidate_blockings(horizon: usize) -> Result<Vec<BlockingSequence>> {
    if horizon < 2 {
        return Err(Error::InvalidBlocking("dyadic candidates need T ≥ 2"));
    }
    let steps = horizon - 1;
    let mut out = Vec::new();
    let mut size = 1usize;
    while size <= steps {
        out.push(BlockingSequence::uniform(horizon, size)?);
        size *= 2;
    }
    Ok(out)
}

/// Boundaries at the first grid points reaching each multiple of
/// `blocktime`; the last grid point always closes the sequence.
pub fn blocktime_blocking(grid: &[f64], blocktime: f64) -> Result<BlockingSequence> {
    if grid.len() < 2 {
        return Err(Error::InvalidBlocking("grid needs two points"));
    }
    if !(blocktime > 0.0 && blocktime.is_finite()) {
        return Err(Error::InvalidBlocking("blocktime must be positive"));
    }
    let t0 = grid[0];
    let last = grid.len() - 1;
    let tol = 1e-9 * blocktime;
    let mut bounds = alloc::vec![0usize];
    let mut m = 1.0;
    loop {
        let target = t0 + m * blocktime;
        let j = grid.partition_point(|&g| g < target - tol);
        if j >= last {
            break;
        }
        if j > bounds[bounds.len() - 1] {
            bounds.push(j);
        }
        m += 1.0;
    }
    bounds.push(last);
    BlockingSequence::new(bounds)
}

/// Blocktimes `2^j |Δ|` for `j = 0, 1, …` up to the grid span.
pub fn dyadic_blocktimes(grid: &[f64], base: f64) -> Vec<f64> {
    let span = grid[grid.len() - 1] - grid[0];
    let mut out = Vec::new();
    let mut b = base;
    while b <= span * (1.0 + 1e-12) {
        out.push(b);
        b *= 2.0;
    }
    out
}

/// Per-candidate, per-block mean PLU estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct PluTable {
    pub candidates: Vec<BlockingSequence>,
    /// `values[s][i]` for block `i` of candidate `s`.
    pub values: Vec<Vec<f64>>,
    pub runs_used: usize,
    pub runs_failed: usize,
    /// Number of block estimates in which a `PLU_G` factor was clamped.
    pub clamped: usize,
}

/// `(ℓ, b, e_PLU)`: the estimate for the block `[ℓ, ℓ+b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockRecord {
    pub lower: usize,
    pub size: usize,
    pub plu: f64,
}

impl PluTable {
    pub fn records(&self) -> Vec<BlockRecord> {
        let mut out = Vec::new();
        for (seq, vals) in self.candidates.iter().zip(&self.values) {
            for ((l, u), &plu) in seq.blocks().zip(vals) {
                out.push(BlockRecord { lower: l, size: u - l, plu });
            }
        }
        out
    }

    /// Block-averaged estimate per candidate.
    pub fn means(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect()
    }
}

/// Estimates for one particle system `sys` and traced indices `b`.
/// `plans[s]` holds the bridge plans of candidate `s`. With `n_target`
/// different from the pool size, `PLU_M` uses the typical-density form.
pub fn estimate_plu<P: BridgePlan>(
    candidates: &[BlockingSequence],
    plans: &[Vec<P>],
    sys: &ParticleSystem,
    b: &[usize],
    n_target: usize,
) -> Result<(Vec<Vec<f64>>, usize)> {
    let t = sys.horizon();
    let n0 = sys.particles();
    if b.len() != t || plans.len() != candidates.len() {
        return Err(Error::DimensionMismatch("traced indices or plans"));
    }
    let mut p = Vec::with_capacity(t.saturating_sub(1));
    for k in 0..t.saturating_sub(1) {
        let (w, _) = exp_shifted(sys.log_weights_at(k)).map_err(|_| Error::DegenerateRow { time: k })?;
        let w = normalise(&w)?;
        p.push(resampling_rate(&w)?);
    }
    let mut log_dens = alloc::vec![0.0; n0];
    let mut clamped = 0;
    let mut out = Vec::with_capacity(candidates.len());
    for (seq, seq_plans) in candidates.iter().zip(plans) {
        if seq.horizon() != t || seq_plans.len() != seq.num_blocks() {
            return Err(Error::InvalidBlocking("candidate does not match the horizon"));
        }
        let mut row = Vec::with_capacity(seq.num_blocks());
        for ((l, u), plan) in seq.blocks().zip(seq_plans) {
            let x_upper = sys.state(u, b[u]);
            for (j, ld) in log_dens.iter_mut().enumerate() {
                *ld = plan.log_block_density(sys.state(l, j), x_upper);
            }
            let m =
                if n_target == n0 { plu_m_log(&log_dens, b[l])? } else { plu_m_alt_log(&log_dens, b[l], n_target)? };
            let (g, flag) = plu_g(&p[l..u], n_target)?;
            clamped += flag as usize;
            row.push(plu_hat(g, m, n_target)?);
        }
        out.push(row);
    }
    Ok((out, clamped))
}

/// Tuning sizes: `particles` in each filter run, `target` in the CPF-BBS
/// that will use the blocking, and `runs` replicate filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TunerConfig {
    pub particles: usize,
    pub target: usize,
    pub runs: usize,
}

impl TunerConfig {
    pub fn new(particles: usize, runs: usize) -> Self {
        Self { particles, target: particles, runs }
    }
}

/// Averages [`estimate_plu`] over independent particle-filter runs with
/// systematic mean-partition resampling. Runs that degenerate are skipped
/// as long as at least half succeed.
pub fn evaluate_blocking_candidates<M, O, R>(
    candidates: &[BlockingSequence],
    model: &M,
    oracle: &O,
    config: TunerConfig,
    rng: &mut R,
) -> Result<PluTable>
where
    M: FkModel,
    O: BridgeOracle,
    R: Rng + ?Sized,
{
    if config.runs == 0 {
        return Err(Error::InvalidArgument("at least one run is required"));
    }
    if config.target < 2 || config.particles < 2 {
        return Err(Error::InvalidArgument("PLU needs at least two particles"));
    }
    let plans = candidates
        .iter()
        .map(|seq| seq.blocks().map(|(l, u)| oracle.plan(l, u)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let mut sums: Vec<Vec<f64>> = candidates.iter().map(|s| alloc::vec![0.0; s.num_blocks()]).collect();
    let (mut used, mut failed, mut clamped) = (0usize, 0usize, 0usize);
    for _ in 0..config.runs {
        match single_run(candidates, &plans, model, config, rng) {
            Ok((vals, c)) => {
                for (acc, row) in sums.iter_mut().zip(vals) {
                    for (a, v) in acc.iter_mut().zip(row) {
                        *a += v;
                    }
                }
                used += 1;
                clamped += c;
            }
            Err(Error::DegenerateRow { .. }) => failed += 1,
            Err(e) => return Err(e),
        }
    }
    if used == 0 || 2 * used < config.runs {
        return Err(Error::TooFewRuns { succeeded: used, requested: config.runs });
    }
    for row in &mut sums {
        for v in row.iter_mut() {
            *v /= used as f64;
        }
    }
    Ok(PluTable { candidates: candidates.to_vec(), values: sums, runs_used: used, runs_failed: failed, clamped })
}

fn single_run<M, P, R>(
    candidates: &[BlockingSequence],
    plans: &[Vec<P>],
    model: &M,
    config: TunerConfig,
    rng: &mut R,
) -> Result<(Vec<Vec<f64>>, usize)>
where
    M: FkModel,
    P: BridgePlan,
    R: Rng + ?Sized,
{
    let sys = particle_filter(model, Scheme::SystematicMeanPartition, config.particles, rng)?;
    let t = sys.horizon();
    let (w, _) = exp_shifted(sys.log_weights_at(t - 1)).map_err(|_| Error::DegenerateRow { time: t - 1 })?;
    let last = crate::resampling::weights::Cumulative::new(&w)?.draw_lower(rng.random::<f64>());
    let b = sys.trace(0, t - 1, last);
    let mut full = b;
    full.push(last);
    estimate_plu(candidates, plans, &sys, &full, config.target)
}

/// Assembles a blocking from per-block records. `candidates` must be
/// ordered from the smallest to the largest blocks; larger blocks are
/// considered first and a block is accepted when it attains the largest
/// estimate among the remaining records sharing its lower boundary (ties
/// favour the larger block). Positions left uncovered fall back to the next
/// boundary of any candidate. Returns the blocking and the number of
/// fallback blocks.
pub fn choose_from_records(
    candidates: &[BlockingSequence],
    records: &[BlockRecord],
) -> Result<(BlockingSequence, usize)> {
    let horizon = candidates.first().ok_or(Error::InvalidBlocking("no candidates"))?.horizon();
    if candidates.iter().any(|c| c.horizon() != horizon) {
        return Err(Error::InvalidBlocking("candidates disagree on the horizon"));
    }
    let mut alive: Vec<BlockRecord> = records.to_vec();
    let mut accepted: Vec<(usize, usize)> = Vec::new();
    for seq in candidates.iter().rev() {
        for (l, u) in seq.blocks() {
            let size = u - l;
            let best = alive
                .iter()
                .filter(|r| r.lower == l)
                .map(|r| (if r.plu.is_nan() { f64::NEG_INFINITY } else { r.plu }, r.size))
                .max_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if let Some((_, best_size)) = best {
                if best_size == size {
                    accepted.push((l, size));
                    alive.retain(|r| r.lower < l || r.lower >= l + size);
                }
            }
        }
    }
    accepted.sort_unstable();
    let last = horizon - 1;
    let mut bounds = alloc::vec![0usize];
    let mut fallbacks = 0;
    let mut cur = 0;
    while cur < last {
        let next = match accepted.iter().find(|&&(l, _)| l == cur) {
            Some(&(l, size)) => (l + size).min(last),
            None => {
                fallbacks += 1;
                candidates
                    .iter()
                    .flat_map(|c| c.boundaries().iter().copied())
                    .filter(|&b| b > cur)
                    .min()
                    .unwrap_or(last)
            }
        };
        bounds.push(next);
        cur = next;
    }
    Ok((BlockingSequence::new(bounds)?, fallbacks))
}

/// The chosen blocking together with the table it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct TunedBlocking {
    pub blocking: BlockingSequence,
    pub table: PluTable,
    pub fallbacks: usize,
}

/// Evaluates `candidates` (ordered by increasing block size) and assembles
/// a blocking from the estimates.
pub fn choose_blocking_from<M, O, R>(
    candidates: &[BlockingSequence],
    model: &M,
    oracle: &O,
    config: TunerConfig,
    rng: &mut R,
) -> Result<TunedBlocking>
where
    M: FkModel,
    O: BridgeOracle,
    R: Rng + ?Sized,
{
    let table = evaluate_blocking_candidates(candidates, model, oracle, config, rng)?;
    let (blocking, fallbacks) = choose_from_records(candidates, &table.records())?;
    Ok(TunedBlocking { blocking, table, fallbacks })
}

/// [`choose_blocking_from`] with dyadic block-size candidates.
pub fn choose_blocking<M, O, R>(model: &M, oracle: &O, config: TunerConfig, rng: &mut R) -> Result<TunedBlocking>
where
    M: FkModel,
    O: BridgeOracle,
    R: Rng + ?Sized,
{
    let candidates = dyadic_candidate_blockings(model.horizon())?;
    choose_blocking_from(&candidates, model, oracle, config, rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(b: &[usize]) -> BlockingSequence {
        BlockingSequence::from_one_based(b).unwrap()
    }

    #[test]
    fn dyadic_examples() {
        let c = dyadic_candidate_blockings(9).unwrap();
        let got: Vec<Vec<usize>> = c.iter().map(|s| s.one_based()).collect();
        assert_eq!(
            got,
            [
                alloc::vec![1, 2, 3, 4, 5, 6, 7, 8, 9],
                alloc::vec![1, 3, 5, 7, 9],
                alloc::vec![1, 5, 9],
                alloc::vec![1, 9]
            ]
        );
        let c = dyadic_candidate_blockings(10).unwrap();
        assert_eq!(c[2].one_based(), [1, 5, 9, 10]);
        assert_eq!(c.len(), 4);
        let c = dyadic_candidate_blockings(2).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].one_based(), [1, 2]);
    }

    #[test]
    fn hand_fixture() {
        let candidates = [seq(&[1, 2, 3, 4, 5]), seq(&[1, 3, 5]), seq(&[1, 5])];
        let rec = |l: usize, b: usize, e: f64| BlockRecord { lower: l - 1, size: b, plu: e };
        let records = [
            rec(1, 4, 0.2),
            rec(1, 2, 0.5),
            rec(3, 2, 0.4),
            rec(1, 1, 0.3),
            rec(2, 1, 0.3),
            rec(3, 1, 0.3),
            rec(4, 1, 0.2),
        ];
        let (b, fallbacks) = choose_from_records(&candidates, &records).unwrap();
        assert_eq!(b.one_based(), [1, 3, 5]);
        assert_eq!(fallbacks, 0);
    }

    #[test]
    fn single_candidate_verbatim() {
        let c = [seq(&[1, 4, 6, 9])];
        let records = [
            BlockRecord { lower: 0, size: 3, plu: 0.1 },
            BlockRecord { lower: 3, size: 2, plu: 0.9 },
            BlockRecord { lower: 5, size: 3, plu: 0.0 },
        ];
        assert_eq!(choose_from_records(&c, &records).unwrap().0, c[0]);
    }

    #[test]
    fn ties_favour_larger_blocks() {
        let candidates = [seq(&[1, 2, 3]), seq(&[1, 3])];
        let records = [
            BlockRecord { lower: 0, size: 1, plu: 0.4 },
            BlockRecord { lower: 1, size: 1, plu: 0.4 },
            BlockRecord { lower: 0, size: 2, plu: 0.4 },
        ];
        assert_eq!(choose_from_records(&candidates, &records).unwrap().0.one_based(), [1, 3]);
    }

    #[test]
    fn blocktime_snaps_to_grid() {
        let grid = [0.0, 0.3, 0.5, 1.0, 1.2, 2.0, 2.5];
        assert_eq!(blocktime_blocking(&grid, 1.0).unwrap().boundaries(), [0, 3, 5, 6]);
        let regular: Vec<f64> = (0..=8).map(|k| k as f64 * 0.25).collect();
        assert_eq!(blocktime_blocking(&regular, 0.5).unwrap(), BlockingSequence::uniform(9, 2).unwrap());
        assert_eq!(dyadic_blocktimes(&regular, 0.25), [0.25, 0.5, 1.0, 2.0]);
    }
}
