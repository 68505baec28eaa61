//! Qualitative reconstruction methods.
//!
//! Sampling-type methods produce an [`IndicatorField`] over a
//! [`SamplingGrid`](crate::geometry::SamplingGrid) with the convention that
//! larger values mean "inside". Domain-testing methods produce a support
//! estimate or a classification of test domains instead.

mod direct;
mod enclosure;
mod field;
mod no_response;
mod sampling;
mod singular;

pub use direct::{dsm_w1, osm_w2, OsmMode};
pub(crate) use enclosure::linear_fit;
pub use enclosure::{cgo_norm, enclosure, enclosure_functional, tau_grid, DirectionEstimate, Scaled, SupportEstimate};
pub use field::{IndicatorField, Method};
pub use no_response::{no_response, response, test_response, Cutoff, NoResponseParams, NoResponseResult};
pub use sampling::{default_truncation, factorization_picard, factorization_regularized, lsm, picard_sum};
pub use singular::{domain_contains, singular_sources, SingularSources, SingularSourcesParams};
