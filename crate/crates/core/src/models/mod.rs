//! Reference Feynman–Kac models built on Gauss–Markov proposals.

mod chain_model;
mod cprbm;
mod ctcrwp;
mod ctcrwt;
mod reflected;
mod terrain;

pub use chain_model::{ChainModel, GaussianObservations, PathIntegral, Potential, Rate, Unit};
pub use cprbm::{
    augment_grid, cp_rbm_fk, event_cells, poisson_process_simulate, simulate_cp_rbm, CpRbmModel, CpRbmParams,
    CpRbmPotential, CpRbmSample, TIME_TOLERANCE,
};
pub use ctcrwp::{ctcrwp_fk, ctcrwp_unit_stationary, stationary_entries, CtcrwpModel, CtcrwpParams, QuadraticLocation};
pub use ctcrwt::{ctcrwt_fk, two_lakes_track, CtcrwParams, CtcrwtModel, CtcrwtObservation, TerrainRate};
pub use reflected::{reflect, reflected_normal_logpdf, reflection_images, DEFAULT_K_TRUNC};
pub use terrain::TerrainRaster;
