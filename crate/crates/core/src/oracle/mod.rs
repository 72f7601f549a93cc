//! Exact reference computations on small boxes and strips, independent of
//! the cavity engine.

mod count;
mod transfer;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{lex_cmp_raw, LatticePoint, Region, RegionKind};
use crate::model::{ModelKind, ModelSpec};

pub use count::{independence_polynomial, matching_polynomial, SmallGraph};
pub use transfer::{transfer_matrix_free_energy, TransferResult};

pub const DEFAULT_VERTEX_CAP: usize = 36;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Visit every configuration.
    Enumeration,
    /// Row-by-row profile dynamic programming (hard-core only).
    SliceDp,
    /// Vertex deletion (hard-core) or edge deletion (matchings) with memo.
    Deletion,
    TransferMatrix,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Enumeration => "enumeration",
            Method::SliceDp => "slice_dp",
            Method::Deletion => "deletion",
            Method::TransferMatrix => "transfer_matrix",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "enumeration" | "enum" => Ok(Method::Enumeration),
            "slice_dp" | "slice" => Ok(Method::SliceDp),
            "deletion" => Ok(Method::Deletion),
            "transfer_matrix" | "transfer" => Ok(Method::TransferMatrix),
            other => Err(Error::usage(format!("unknown method '{other}'"))),
        }
    }
}

/// The box `∏_j [-h_j, h_j]`, minus removed points, restricted to a region.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteBox {
    pub half_widths: Vec<u32>,
    pub removed: BTreeSet<LatticePoint>,
    pub filter: Option<RegionKind>,
    pub cap: usize,
}

impl FiniteBox {
    pub fn new(half_widths: Vec<u32>) -> Result<Self> {
        if half_widths.is_empty() {
            return Err(Error::usage("box needs dimension >= 1"));
        }
        Ok(Self {
            half_widths,
            removed: BTreeSet::new(),
            filter: None,
            cap: DEFAULT_VERTEX_CAP,
        })
    }

    /// The box `∏_j [lo_j, hi_j]`.
    pub fn from_ranges(ranges: &[(i32, i32)]) -> Result<Self> {
        if let Some((lo, hi)) = ranges.iter().find(|(lo, hi)| lo > hi) {
            return Err(Error::usage(format!("empty range {lo}:{hi}")));
        }
        let half = ranges
            .iter()
            .map(|(lo, hi)| lo.unsigned_abs().max(hi.unsigned_abs()))
            .collect();
        let mut parts = Vec::new();
        for (axis, &(lo, hi)) in ranges.iter().enumerate() {
            parts.push(RegionKind::HalfPlanePlus { axis, offset: hi });
            parts.push(RegionKind::HalfPlaneMinus { axis, offset: -lo });
        }
        Ok(Self::new(half)?.with_filter(RegionKind::Intersection(parts)))
    }

    /// Keeps only points of `filter`; asymmetric boxes are a symmetric box
    /// plus a half-plane filter.
    pub fn with_filter(mut self, filter: RegionKind) -> Self {
        self.filter = Some(filter);
        self
    }

    pub fn with_removed<I: IntoIterator<Item = LatticePoint>>(mut self, points: I) -> Self {
        self.removed.extend(points);
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn dim(&self) -> usize {
        self.half_widths.len()
    }

    fn in_box(&self, c: &[i32]) -> bool {
        c.iter()
            .zip(&self.half_widths)
            .all(|(x, h)| x.unsigned_abs() <= *h)
    }

    pub fn contains(&self, v: &LatticePoint) -> bool {
        v.dim() == self.dim()
            && self.in_box(v.coords())
            && !self.removed.contains(v)
            && self.filter.as_ref().is_none_or(|f| f.contains_raw(v.coords()))
    }

    /// Live vertices in ascending lexicographic order.
    pub fn vertices(&self) -> Vec<LatticePoint> {
        let d = self.dim();
        let mut out = Vec::new();
        let mut c: Vec<i32> = self.half_widths.iter().map(|h| -(*h as i32)).collect();
        loop {
            let p = LatticePoint::from(c.as_slice());
            if self.contains(&p) {
                out.push(p);
            }
            let mut j = 0;
            loop {
                if j == d {
                    out.sort_by(|a, b| lex_cmp_raw(a.coords(), b.coords()));
                    return out;
                }
                c[j] += 1;
                if c[j] > self.half_widths[j] as i32 {
                    c[j] = -(self.half_widths[j] as i32);
                    j += 1;
                } else {
                    break;
                }
            }
        }
    }

    /// The same vertex set as a cavity region, windowed at `window`.
    pub fn region(&self, window: u32) -> Result<Region> {
        let mut parts = Vec::new();
        for (axis, h) in self.half_widths.iter().enumerate() {
            parts.push(RegionKind::HalfPlanePlus { axis, offset: *h as i32 });
            parts.push(RegionKind::HalfPlaneMinus { axis, offset: *h as i32 });
        }
        if let Some(f) = &self.filter {
            parts.push(f.clone());
        }
        Region::new(self.dim(), RegionKind::Intersection(parts), window)
    }

    pub fn graph(&self) -> Result<SmallGraph> {
        let vs = self.vertices();
        if vs.len() > self.cap {
            return Err(Error::Capacity(format!(
                "{} vertices exceed the oracle cap of {}",
                vs.len(),
                self.cap
            )));
        }
        Ok(SmallGraph::from_points(&vs))
    }
}

/// Exact value as a rational, with its floating-point rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub exact: Option<BigRational>,
    pub value: f64,
    pub method: Method,
    /// Configuration counts by size, when computed by counting.
    pub counts: Option<Vec<u128>>,
}

impl OracleResult {
    pub fn exact_string(&self) -> Option<String> {
        self.exact.as_ref().map(|r| r.to_string())
    }
}

/// `λ` as an exact rational; every finite double is one.
pub fn exact_lambda(lambda: f64) -> Result<BigRational> {
    BigRational::from_float(lambda)
        .ok_or_else(|| Error::usage(format!("activity {lambda} is not finite")))
}

/// `Σ_k c_k λ^k` evaluated exactly.
pub fn evaluate_polynomial(counts: &[u128], lambda: &BigRational) -> BigRational {
    counts.iter().rev().fold(BigRational::zero(), |acc, c| {
        acc * lambda + BigRational::from_integer(BigInt::from(*c))
    })
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn counts_for(g: &SmallGraph, model: ModelKind, method: Method) -> Result<Vec<u128>> {
    match model {
        ModelKind::Hardcore => independence_polynomial(g, method),
        ModelKind::Dimer => matching_polynomial(g, method),
    }
}

fn default_method(model: ModelKind) -> Method {
    match model {
        ModelKind::Hardcore => Method::SliceDp,
        ModelKind::Dimer => Method::Deletion,
    }
}

/// `Z` of the box for the given model.
pub fn exact_partition_function(b: &FiniteBox, model: &ModelSpec) -> Result<OracleResult> {
    partition_function_with(b, model, default_method(model.kind))
}

pub fn partition_function_with(b: &FiniteBox, model: &ModelSpec, method: Method) -> Result<OracleResult> {
    check_dim(b, model)?;
    let g = b.graph()?;
    let counts = counts_for(&g, model.kind, method)?;
    let z = evaluate_polynomial(&counts, &exact_lambda(model.lambda)?);
    Ok(OracleResult {
        value: to_f64(&z),
        exact: Some(z),
        method,
        counts: Some(counts),
    })
}

/// Probability that `v` is unoccupied (hard-core) or unmatched (dimer), as
/// the ratio `Z(box − v) / Z(box)`.
pub fn exact_marginal(b: &FiniteBox, v: &LatticePoint, model: &ModelSpec) -> Result<OracleResult> {
    marginal_with(b, v, model, default_method(model.kind))
}

pub fn marginal_with(
    b: &FiniteBox,
    v: &LatticePoint,
    model: &ModelSpec,
    method: Method,
) -> Result<OracleResult> {
    check_dim(b, model)?;
    if !b.contains(v) {
        return Err(Error::usage(format!("{v:?} is not a live vertex of the box")));
    }
    let lambda = exact_lambda(model.lambda)?;
    let z = evaluate_polynomial(&counts_for(&b.graph()?, model.kind, method)?, &lambda);
    let minus = b.clone().with_removed([v.clone()]);
    let z_minus = evaluate_polynomial(&counts_for(&minus.graph()?, model.kind, method)?, &lambda);
    let ratio = z_minus / z;
    Ok(OracleResult {
        value: to_f64(&ratio),
        exact: Some(ratio),
        method,
        counts: None,
    })
}

fn check_dim(b: &FiniteBox, model: &ModelSpec) -> Result<()> {
    if b.dim() != model.dim {
        return Err(Error::usage(format!(
            "box is {}-dimensional but the model is {}-dimensional",
            b.dim(),
            model.dim
        )));
    }
    Ok(())
}
