use nalgebra::DVector;
use num_complex::Complex64;

use super::sampling::evaluate_grid;
use super::{IndicatorField, Method};
use crate::error::{Error, Result};
use crate::farfield_op::test_function;
use crate::forward::FarFieldData;
use crate::geometry::{Aperture, SamplingGrid};

fn aperture_tag(a: Aperture) -> String {
    match a {
        Aperture::Full => "full".into(),
        Aperture::Arc { start, end } => format!("arc:{start}:{end}"),
    }
}

fn require_square(data: &FarFieldData, what: &str) -> Result<()> {
    if !data.observation.same_as(&data.incidence) {
        return Err(Error::InvalidArgument(format!(
            "{what} needs multi-static data on one direction set, got {}x{} (single columns are only accepted by orthogonality sampling in one-wave mode and the no-response test)",
            data.observation.len(),
            data.incidence.len()
        )));
    }
    Ok(())
}

/// Direct sampling `W_1(z) = |(F φ_z, φ_z)|` with `φ_z(x̂) = e^{-ik z·x̂}`:
/// `|Σ_i Σ_j w_i w_j u_∞(x̂_i, d_j) φ_z(d_j) conj(φ_z(x̂_i))|`.
pub fn dsm_w1(data: &FarFieldData, grid: &SamplingGrid) -> Result<IndicatorField> {
    require_square(data, "direct sampling")?;
    let ctx = data.ctx()?;
    let set = &data.incidence;
    let w = DVector::from_column_slice(set.weights()).map(Complex64::from);
    let values = evaluate_grid(grid, |z| {
        let phi = test_function(z, set, &ctx);
        let fphi = &data.matrix * phi.component_mul(&w);
        let s: Complex64 = fphi
            .iter()
            .zip(phi.iter())
            .zip(set.weights())
            .map(|((f, p), wi)| f * p.conj() * *wi)
            .sum();
        Ok(s.norm())
    })?;
    Ok(IndicatorField::new(grid.clone(), values, Method::Dsm, false)?
        .with_parameter("aperture", aperture_tag(set.aperture())))
}

/// Orthogonality sampling input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OsmMode {
    /// `|Σ_i w_i u_∞(x̂_i, d) conj(φ_z(x̂_i))|` for the incidence column.
    OneWave(usize),
    /// `‖F φ_z‖`.
    MultiWave,
}

pub fn osm_w2(data: &FarFieldData, mode: OsmMode, grid: &SamplingGrid) -> Result<IndicatorField> {
    if data.matrix.is_empty() {
        return Err(Error::InvalidArgument("orthogonality sampling needs data".into()));
    }
    let ctx = data.ctx()?;
    let obs = &data.observation;
    match mode {
        OsmMode::OneWave(col) => {
            if col >= data.incidence.len() {
                return Err(Error::InvalidArgument(format!(
                    "incidence column {col} out of range for {} columns",
                    data.incidence.len()
                )));
            }
            let u = data.matrix.column(col).into_owned();
            let values = evaluate_grid(grid, |z| {
                let phi = test_function(z, obs, &ctx);
                let s: Complex64 = u
                    .iter()
                    .zip(phi.iter())
                    .zip(obs.weights())
                    .map(|((u, p), wi)| u * p.conj() * *wi)
                    .sum();
                Ok(s.norm())
            })?;
            Ok(IndicatorField::new(grid.clone(), values, Method::OsmOneWave, false)?
                .with_parameter("aperture", aperture_tag(obs.aperture()))
                .with_parameter("incidence", data.incidence.nodes()[col].angle()))
        }
        OsmMode::MultiWave => {
            require_square(data, "multi-wave orthogonality sampling")?;
            let set = &data.incidence;
            let w = DVector::from_column_slice(set.weights()).map(Complex64::from);
            let values = evaluate_grid(grid, |z| {
                let phi = test_function(z, set, &ctx);
                let fphi = &data.matrix * phi.component_mul(&w);
                let s: f64 = fphi.iter().zip(obs.weights()).map(|(f, wi)| f.norm_sqr() * wi).sum();
                Ok(s.sqrt())
            })?;
            Ok(IndicatorField::new(grid.clone(), values, Method::OsmMultiWave, false)?
                .with_parameter("aperture", aperture_tag(set.aperture())))
        }
    }
}
