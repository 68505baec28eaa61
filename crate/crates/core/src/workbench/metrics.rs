use crate::error::{Error, Result};
use crate::geometry::{Obstacle, SamplingGrid};
use crate::indicators::{linear_fit, IndicatorField};

use super::ReconstructionMask;

/// Grid points inside the obstacle.
pub fn rasterize(obstacle: &Obstacle, grid: &SamplingGrid) -> Vec<bool> {
    grid.points().iter().map(|z| obstacle.contains(z)).collect()
}

/// `|A ∩ B| / |A ∪ B|`; 1 for two empty sets.
pub fn jaccard_sets(a: &[bool], b: &[bool]) -> f64 {
    let (mut inter, mut union) = (0usize, 0usize);
    for (x, y) in a.iter().zip(b) {
        inter += usize::from(*x && *y);
        union += usize::from(*x || *y);
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Jaccard index of a mask against the rasterized obstacle.
pub fn jaccard(mask: &ReconstructionMask, obstacle: &Obstacle) -> Result<f64> {
    let truth = rasterize(obstacle, mask.grid());
    if !truth.iter().any(|v| *v) {
        return Err(Error::InvalidArgument("obstacle covers no grid point".into()));
    }
    Ok(jaccard_sets(mask.values(), &truth))
}

pub fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Median inside the obstacle over the median at points more than `0.5`
/// away from it.
pub fn contrast(field: &IndicatorField, obstacle: &Obstacle) -> Result<f64> {
    let pts = field.grid().points();
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for (z, v) in pts.iter().zip(field.values()) {
        if obstacle.contains(z) {
            inside.push(*v);
        } else if obstacle.distance_to_boundary(z) > 0.5 {
            outside.push(*v);
        }
    }
    let (Some(a), Some(b)) = (median(inside), median(outside)) else {
        return Err(Error::InvalidArgument(
            "contrast needs grid points inside and well outside the obstacle".into(),
        ));
    };
    if b > 0.0 {
        Ok(a / b)
    } else {
        Ok(f64::INFINITY)
    }
}

/// How an indicator is expected to behave in the distance `d` to the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowupLaw {
    /// `value ≈ a + s ln d`.
    Logarithmic,
    /// `ln value ≈ a + s ln d`.
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupFit {
    pub slope: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Least-squares fit of values against `ln d`.
pub fn blowup_fit(distances: &[f64], values: &[f64], law: BlowupLaw) -> Result<BlowupFit> {
    if distances.len() != values.len() {
        return Err(Error::InvalidArgument("distances and values differ in length".into()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = distances
        .iter()
        .zip(values)
        .filter(|(d, v)| **d > 0.0 && v.is_finite() && (law == BlowupLaw::Logarithmic || **v > 0.0))
        .map(|(d, v)| {
            let y = match law {
                BlowupLaw::Logarithmic => *v,
                BlowupLaw::Power => v.ln(),
            };
            (d.ln(), y)
        })
        .unzip();
    if xs.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "blow-up fit needs at least 3 usable samples, got {}",
            xs.len()
        )));
    }
    let (slope, r_squared) = linear_fit(&xs, &ys);
    Ok(BlowupFit {
        slope,
        r_squared,
        samples: xs.len(),
    })
}

/// Which side of the boundary to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Inside,
    Outside,
}

/// [`blowup_fit`] over grid points on one side with `d ∈ [d_min, d_max]`.
/// `transform` maps stored values first (e.g. `|v| 1.0 / v` for inverted
/// fields).
pub fn field_blowup(
    field: &IndicatorField,
    obstacle: &Obstacle,
    side: Side,
    band: [f64; 2],
    law: BlowupLaw,
    transform: impl Fn(f64) -> f64,
) -> Result<BlowupFit> {
    let mut d = Vec::new();
    let mut v = Vec::new();
    for (z, val) in field.grid().points().iter().zip(field.values()) {
        if obstacle.contains(z) != (side == Side::Inside) {
            continue;
        }
        let dist = obstacle.distance_to_boundary(z).abs();
        if dist >= band[0] && dist <= band[1] {
            d.push(dist);
            v.push(transform(*val));
        }
    }
    blowup_fit(&d, &v, law)
}
