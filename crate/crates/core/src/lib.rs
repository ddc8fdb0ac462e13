//! Exact arithmetic for degree-p covers of non-archimedean annuli, discs and
//! nodal curves: normalization of étale annular covers to binomial form,
//! different functions on skeletons, reduction of trace forms in residue
//! characteristic p, validation of enhanced log structures, and lifting plans.

pub mod annulus;
pub mod bivariant;
pub mod doc;
pub mod enhancement;
pub mod error;
pub mod gf;
pub mod laurent;
pub mod lifting;
pub mod log_curve;
pub mod normalize;
pub mod parse;
pub mod poly;
pub mod rational;
pub mod valued_field;

pub use error::{Error, Result};
pub use rational::{rat, Rat, Val};
