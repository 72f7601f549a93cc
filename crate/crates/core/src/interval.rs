//! Closed intervals with outward rounding.
//!
//! Elementary operations go through the platform libm, which is not
//! correctly rounded; results are pushed outward by [`LIBM_ULPS`] ulps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelKind, Pattern};

pub const LIBM_ULPS: u32 = 2;

fn down(x: f64, n: u32) -> f64 {
    (0..n).fold(x, |acc, _| acc.next_down())
}

fn up(x: f64, n: u32) -> f64 {
    (0..n).fold(x, |acc, _| acc.next_up())
}

/// Accumulated-ulp accounting for the plain floating-point recursion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundingSlack {
    pub ulps_per_step: f64,
    /// Arithmetic steps charged along one root-to-leaf path.
    pub steps: u64,
    /// Relative widening applied to each marginal endpoint.
    pub relative: f64,
}

impl RoundingSlack {
    pub fn for_recursion(ulps_per_step: f64, depth: u32, dim: usize) -> Self {
        let steps = depth as u64 * (2 * dim as u64 + 3);
        let relative = ulps_per_step * f64::EPSILON * steps as f64;
        Self {
            ulps_per_step,
            steps,
            relative,
        }
    }

    pub fn none() -> Self {
        Self {
            ulps_per_step: 0.0,
            steps: 0,
            relative: 0.0,
        }
    }
}

/// One parity of the Φ/Ψ sandwich at a given depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityBracket {
    pub depth: u32,
    pub phi: f64,
    pub psi: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundMeta {
    pub model: Option<ModelKind>,
    pub dim: usize,
    pub lambda: f64,
    pub depth: u32,
    pub pattern: Option<Pattern>,
    pub rounding: Option<RoundingSlack>,
    pub parities: Vec<ParityBracket>,
    pub memo_entries: usize,
    pub nodes: u64,
    pub notes: Vec<String>,
}

/// `[lower, upper]` together with where it came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInterval {
    pub lower: f64,
    pub upper: f64,
    pub meta: BoundMeta,
}

impl BoundInterval {
    pub fn new(lower: f64, upper: f64, meta: BoundMeta) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(Error::InternalConsistency(format!(
                "malformed interval [{lower}, {upper}]"
            )));
        }
        Ok(Self { lower, upper, meta })
    }

    pub fn point(x: f64) -> Self {
        Self {
            lower: x,
            upper: x,
            meta: BoundMeta::default(),
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn intersects(&self, other: &BoundInterval) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }

    pub fn with_meta(mut self, meta: BoundMeta) -> Self {
        self.meta = meta;
        self
    }

    fn bounds(lower: f64, upper: f64, meta: &BoundMeta) -> Self {
        Self {
            lower,
            upper,
            meta: meta.clone(),
        }
    }

    pub fn add(&self, other: &BoundInterval) -> Self {
        Self::bounds(
            down(self.lower + other.lower, 1),
            up(self.upper + other.upper, 1),
            &self.meta,
        )
    }

    pub fn sub(&self, other: &BoundInterval) -> Self {
        Self::bounds(
            down(self.lower - other.upper, 1),
            up(self.upper - other.lower, 1),
            &self.meta,
        )
    }

    pub fn neg(&self) -> Self {
        Self::bounds(-self.upper, -self.lower, &self.meta)
    }

    /// Multiplication by a nonnegative scalar known exactly.
    pub fn scale(&self, c: f64) -> Self {
        assert!(c >= 0.0, "scale factor must be nonnegative");
        Self::bounds(down(self.lower * c, 1), up(self.upper * c, 1), &self.meta)
    }

    /// Natural log of an interval inside `(0, ∞)`; `0` maps to `-∞`.
    pub fn ln(&self) -> Self {
        Self::bounds(
            down(self.lower.ln(), LIBM_ULPS),
            up(self.upper.ln(), LIBM_ULPS),
            &self.meta,
        )
    }

    pub fn exp(&self) -> Self {
        Self::bounds(
            down(self.lower.exp(), LIBM_ULPS).max(0.0),
            up(self.upper.exp(), LIBM_ULPS),
            &self.meta,
        )
    }

    /// Symmetric widening by `r >= 0`.
    pub fn widen(&self, r: f64) -> Self {
        Self::bounds(down(self.lower - r, 1), up(self.upper + r, 1), &self.meta)
    }

    pub fn intersect(&self, other: &BoundInterval) -> Result<Self> {
        let lower = self.lower.max(other.lower);
        let upper = self.upper.min(other.upper);
        if lower > upper {
            return Err(Error::InternalConsistency(format!(
                "brackets [{}, {}] and [{}, {}] of the same value are disjoint",
                self.lower, self.upper, other.lower, other.upper
            )));
        }
        Ok(Self::bounds(lower, upper, &self.meta))
    }
}

/// Enclosure of `ln(x)` for an exactly representable `x > 0`.
pub fn ln_enclosure(x: f64) -> BoundInterval {
    BoundInterval::point(x).ln()
}
