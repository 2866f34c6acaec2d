//! Blocking sequences and their automatic selection.

mod artificial;
mod plu;
mod sequence;
mod tuner;

pub use artificial::{artificial_system_expected_healthy, artificial_system_simulate};
pub use plu::{plu_g, plu_hat, plu_m, plu_m_alt, plu_m_alt_log, plu_m_log, resampling_rate};
pub use sequence::BlockingSequence;
pub use tuner::{
    blocktime_blocking, choose_blocking, choose_blocking_from, choose_from_records, dyadic_blocktimes,
    dyadic_candidate_blockings, estimate_plu, evaluate_blocking_candidates, BlockRecord, PluTable, TunedBlocking,
    TunerConfig,
};
