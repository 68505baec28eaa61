//! Forward scattering by sound-soft obstacles: a series solution for discs,
//! a boundary integral solver for smooth curves, data synthesis and noise.

mod data;
mod disc;
pub mod io;
mod nystrom;

pub(crate) use data::spectral_norm;
pub use data::{
    add_noise, synthesize_cauchy, synthesize_disc, synthesize_multistatic, CauchyData, FarFieldData, Provenance,
};
pub use disc::{disc_farfield, DiscSeries};
pub use nystrom::{solve_dirichlet, BoundaryDensity, Discretization, Incident, NystromSolver};
