//! Animated PCA biplots for multivariate data observed across the ordered
//! levels of a categorical "time" variable.
//!
//! The pipeline has three variants:
//!
//! * **fixed variable frame**: one PCA on the full data, sample scores sliced
//!   per level, variable vectors constant ([`pca::pca_biplot`] +
//!   [`pca::project_slices`]);
//! * **dynamic frame, manual correction**: one PCA per level with
//!   user-chosen reflections ([`pca::per_slice_pca`] +
//!   [`align::reflect_at_levels`]);
//! * **dynamic frame, automated alignment**: one PCA per level aligned by
//!   Generalized Procrustes analysis ([`align::align_series`]) and scored
//!   with five Procrustes-based measures ([`eval::evaluate_series`]).
//!
//! The resulting biplot states are turned into a frame timeline
//! ([`anim::build_timeline`]) and rendered to SVG, GIF or JSON ([`render`]).

pub mod align;
pub mod anim;
pub mod data;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod pca;
pub mod render;

pub use error::{Error, ErrorKind, Result};
