//! Conjugate Bayesian VAR with exogenous regressors.

mod design;
mod hyper;
mod posterior;
mod prior;
mod sampler;
pub mod stability;

pub use design::{build_design, DesignMatrices, Layout};
pub use hyper::{PriorFamily, SzHyper};
pub use posterior::{fit, posterior_update, MniwPosterior};
pub use prior::{ar_residual_sd, build_prior, build_prior_with, MniwPrior, PriorOptions, STD_FLOOR};
pub use sampler::{
    draws_from_json, draws_to_json, gibbs_sample, sample_direct, GibbsOptions, ParamDraw, SigmaConditional,
};
pub(crate) use sampler::stream_rng;

/// `(stable, spectral_radius)` of a parameter draw's lag polynomial.
pub fn stability(draw: &ParamDraw) -> crate::Result<(bool, f64)> {
    stability::classify(&draw.phi)
}
