use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::Point;
use crate::error::{Error, Result};

/// A unit vector on the circle together with its polar angle in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    angle: f64,
    vector: Point,
}

impl Direction {
    pub fn from_angle(angle: f64) -> Self {
        let a = angle.rem_euclid(TAU);
        Self {
            angle: a,
            vector: Point::new(a.cos(), a.sin()),
        }
    }

    #[inline]
    pub fn angle(&self) -> f64 {
        self.angle
    }

    #[inline]
    pub fn vector(&self) -> Point {
        self.vector
    }

    pub fn negated(&self) -> Self {
        Self::from_angle(self.angle + PI)
    }

    /// `ω^⊥ = (ω_2, -ω_1)`.
    pub fn perp(&self) -> Point {
        super::perp(&self.vector)
    }
}

/// Full circle or a closed arc `[start, end]` (angles in radians, `end > start`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Aperture {
    Full,
    Arc { start: f64, end: f64 },
}

impl Aperture {
    pub fn is_full(&self) -> bool {
        matches!(self, Aperture::Full)
    }
}

/// Quadrature nodes on the unit circle (or an arc of it).
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    nodes: Vec<Direction>,
    weights: Vec<f64>,
    aperture: Aperture,
}

/// Equispaced nodes with trapezoid weights: `2π/N` each on the full circle,
/// composite trapezoid (end weights halved) on an arc.
pub fn make_direction_set(n: usize, aperture: Aperture) -> Result<DirectionSet> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "direction set needs at least 4 nodes, got {n}"
        )));
    }
    match aperture {
        Aperture::Full => {
            let h = TAU / n as f64;
            let nodes = (0..n).map(|i| Direction::from_angle(i as f64 * h)).collect();
            Ok(DirectionSet {
                nodes,
                weights: vec![h; n],
                aperture,
            })
        }
        Aperture::Arc { start, end } => {
            if !(start.is_finite() && end.is_finite()) || end <= start || end - start >= TAU {
                return Err(Error::InvalidArgument(format!("empty or invalid arc [{start}, {end}]")));
            }
            let h = (end - start) / (n - 1) as f64;
            let nodes = (0..n).map(|i| Direction::from_angle(start + i as f64 * h)).collect();
            let mut weights = vec![h; n];
            weights[0] *= 0.5;
            weights[n - 1] *= 0.5;
            Ok(DirectionSet {
                nodes,
                weights,
                aperture,
            })
        }
    }
}

impl DirectionSet {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Direction] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn aperture(&self) -> Aperture {
        self.aperture
    }

    pub fn angles(&self) -> Vec<f64> {
        self.nodes.iter().map(Direction::angle).collect()
    }

    pub fn vectors(&self) -> Vec<Point> {
        self.nodes.iter().map(Direction::vector).collect()
    }

    /// Node spacing in radians.
    pub fn spacing(&self) -> f64 {
        match self.aperture {
            Aperture::Full => TAU / self.len() as f64,
            Aperture::Arc { start, end } => (end - start) / (self.len() - 1) as f64,
        }
    }

    /// The set `{-d}` with the same weights (an arc shifted by π).
    pub fn negated(&self) -> DirectionSet {
        match self.aperture {
            Aperture::Full => self.clone(),
            Aperture::Arc { start, end } => DirectionSet {
                nodes: self.nodes.iter().map(Direction::negated).collect(),
                weights: self.weights.clone(),
                aperture: Aperture::Arc {
                    start: start + PI,
                    end: end + PI,
                },
            },
        }
    }

    /// For a full set with an even node count, `index_of_negation(i)` is the
    /// node index of `-d_i`.
    pub fn index_of_negation(&self, i: usize) -> Option<usize> {
        let n = self.len();
        (self.aperture.is_full() && n.is_multiple_of(2)).then(|| (i + n / 2) % n)
    }

    /// Number of node steps a rotation by `angle` corresponds to, if the full
    /// set is closed under it.
    pub fn rotation_steps(&self, angle: f64) -> Option<usize> {
        if !self.aperture.is_full() {
            return None;
        }
        let steps = angle.rem_euclid(TAU) / self.spacing();
        let r = steps.round();
        ((steps - r).abs() < 1e-9).then(|| (r as usize) % self.len())
    }

    /// Same nodes and aperture as `other`.
    pub fn same_as(&self, other: &DirectionSet) -> bool {
        self.len() == other.len()
            && self.aperture == other.aperture
            && self
                .nodes
                .iter()
                .zip(&other.nodes)
                .all(|(a, b)| (a.angle - b.angle).abs() < 1e-12)
    }

    /// `Σ w_i f(d_i)`.
    pub fn integrate<T, F>(&self, f: F) -> T
    where
        F: Fn(&Direction) -> T,
        T: std::iter::Sum<T> + std::ops::Mul<f64, Output = T>,
    {
        self.nodes.iter().zip(&self.weights).map(|(d, &w)| f(d) * w).sum()
    }
}
