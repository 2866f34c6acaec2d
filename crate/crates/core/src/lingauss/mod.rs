//! Linear-Gaussian machinery: SDE discretisation, Kalman filtering and
//! smoothing, and the conditionals needed for bridging.

mod chain;
mod kalman;
mod linalg;
mod sde;

pub use chain::{ChainBridgePlan, GaussianChain, LinearKernel};
pub use kalman::{kalman_filter, kalman_smoother, FilterOutput, LgssObservation, SmootherOutput, StateSpaceModel};
pub use linalg::{expm, robust_cholesky, symmetrise, AffineGaussian, GaussianDist, LN_2PI};
pub use sde::{centred, GaussianTransition, LinearSde};
