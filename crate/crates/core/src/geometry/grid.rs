use serde::{Deserialize, Serialize};

use super::Point;
use crate::error::{Error, Result};

/// Uniform grid of cell centres over a box, stored row-major with row 0 at
/// `y_min`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl SamplingGrid {
    pub fn new(bbox: [f64; 4], nx: usize, ny: usize) -> Result<Self> {
        let [x_min, x_max, y_min, y_max] = bbox;
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid resolution must be at least 2x2, got {nx}x{ny}"
            )));
        }
        if !(x_max > x_min && y_max > y_min) || bbox.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid grid box {bbox:?}")));
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
            nx,
            ny,
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / self.ny as f64
    }

    #[inline]
    pub fn point(&self, ix: usize, iy: usize) -> Point {
        Point::new(
            self.x_min + (ix as f64 + 0.5) * self.dx(),
            self.y_min + (iy as f64 + 0.5) * self.dy(),
        )
    }

    #[inline]
    pub fn point_at(&self, index: usize) -> Point {
        self.point(index % self.nx, index / self.nx)
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.len()).map(|i| self.point_at(i)).collect()
    }

    /// Index of the cell containing `p`, if inside the box.
    pub fn cell_of(&self, p: &Point) -> Option<(usize, usize)> {
        let fx = (p.x - self.x_min) / self.dx();
        let fy = (p.y - self.y_min) / self.dy();
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (ix, iy) = (fx as usize, fy as usize);
        (ix < self.nx && iy < self.ny).then_some((ix, iy))
    }
}
