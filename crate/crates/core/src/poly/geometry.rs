use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radii of the polydisk `|x_j| <= R_j, |y_j| <= R_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolydiskGeometry {
    radii: Vec<f64>,
}

impl PolydiskGeometry {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::InvalidInput("polydisk needs at least one radius".into()));
        }
        if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::InvalidInput(format!("polydisk radius {r} is not positive")));
        }
        Ok(Self { radii })
    }

    pub fn unit(n: usize) -> Self {
        Self {
            radii: vec![1.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.radii.len()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Smallest radius.
    pub fn lambda(&self) -> f64 {
        self.radii.iter().copied().fold(f64::INFINITY, f64::min)
    }
}
