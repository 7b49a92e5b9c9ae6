//! Points and axis-aligned boxes in the virtual parameter space.

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// A point in the virtual parameter box.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    values: Vec<f64>,
}

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(values: Vec<f64>) -> Self {
        Self::new(values)
    }
}

/// An axis-aligned search box with per-dimension bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl ParamBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                actual: hi.len(),
            });
        }
        if lo.is_empty() {
            return Err(Error::Config("parameter box must have dimension >= 1".into()));
        }
        for (l, h) in lo.iter().zip(&hi) {
            if !(l.is_finite() && h.is_finite() && l < h) {
                return Err(Error::Config(format!("invalid box bounds [{l}, {h}]")));
            }
        }
        Ok(Self { lo, hi })
    }

    /// The `[0.5, 1.5]^dim` box of dimensionless link-length scale factors.
    pub fn link_scale(dim: usize) -> Self {
        Self {
            lo: vec![0.5; dim],
            hi: vec![1.5; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, p: &ParamVector) -> bool {
        p.dim() == self.dim()
            && p.values()
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| *v >= *l && *v <= *h)
    }

    pub fn clamp(&self, p: &ParamVector) -> ParamVector {
        let values = p
            .values()
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(v, (l, h))| v.clamp(*l, *h))
            .collect();
        ParamVector::new(values)
    }

    /// Uniform draw from the box. Consumes one draw per dimension.
    pub fn sample(&self, rng: &mut RngStream) -> ParamVector {
        let values = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| rng.next_in(*l, *h))
            .collect();
        ParamVector::new(values)
    }

    /// Affine map of a point into the unit cube.
    pub fn normalize(&self, p: &ParamVector) -> Result<Vec<f64>> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: p.dim(),
            });
        }
        Ok(p.values()
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(v, (l, h))| (v - l) / (h - l))
            .collect())
    }

    /// Inverse of [`ParamBox::normalize`].
    pub fn denormalize(&self, unit: &[f64]) -> ParamVector {
        debug_assert_eq!(unit.len(), self.dim());
        let values = unit
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(u, (l, h))| l + (h - l) * u)
            .collect();
        ParamVector::new(values)
    }
}
