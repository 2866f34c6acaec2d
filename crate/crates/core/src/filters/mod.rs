//! Particle filters, conditional particle filters and bridge backward
//! sampling.

mod bbs;
mod cpf;
mod mcmc;
mod model;
mod pf;
mod system;

pub use bbs::{bridge_cpf, cpf_bbs, cpf_bs, plan_blocks, BbsOutput, BridgeOutput, OneStepPlan, Pool};
pub use cpf::{cpf, cpf_at};
pub use mcmc::{initial_reference, kernel_step, Kernel};
pub use model::{BridgeOracle, BridgePlan, FkModel, TransitionDensity};
pub use pf::{particle_filter, particle_filter_with};
pub use system::{ancestor_trace, ParticleSystem, ReferencePath};
