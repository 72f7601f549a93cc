use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Weight λ^|I| on independent sets.
    Hardcore,
    /// Weight λ^|M| on matchings.
    Dimer,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Hardcore => "hardcore",
            ModelKind::Dimer => "dimer",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hardcore" | "hard-core" => Ok(ModelKind::Hardcore),
            "dimer" | "monomer-dimer" | "monomer_dimer" => Ok(ModelKind::Dimer),
            other => Err(Error::usage(format!("unknown model '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub lambda: f64,
    pub dim: usize,
    /// H(s*, s*); zero for both implemented models.
    pub ref_spin_pair_energy: f64,
    /// h(s*); zero for both implemented models.
    pub ref_spin_field: f64,
}

impl ModelSpec {
    /// `lambda = 0` is accepted as the degenerate empty-configuration measure.
    pub fn new(kind: ModelKind, lambda: f64, dim: usize) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::usage(format!("activity must be finite and >= 0, got {lambda}")));
        }
        if dim == 0 {
            return Err(Error::usage("dimension must be >= 1"));
        }
        Ok(Self {
            kind,
            lambda,
            dim,
            ref_spin_pair_energy: 0.0,
            ref_spin_field: 0.0,
        })
    }

    pub fn hardcore(lambda: f64, dim: usize) -> Result<Self> {
        Self::new(ModelKind::Hardcore, lambda, dim)
    }

    pub fn dimer(lambda: f64, dim: usize) -> Result<Self> {
        Self::new(ModelKind::Dimer, lambda, dim)
    }
}

/// Depth-0 initialisation of the computation tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedKind {
    /// Seeds 1.
    Phi,
    /// Seeds 0.
    Psi,
}

impl SeedKind {
    pub fn seed_value(self) -> f64 {
        match self {
            SeedKind::Phi => 1.0,
            SeedKind::Psi => 0.0,
        }
    }
}

/// Which vertices are conditioned on in the sequential cavity representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    Plain,
    Chess,
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pattern::Plain => "plain",
            Pattern::Chess => "chess",
        })
    }
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plain" => Ok(Pattern::Plain),
            "chess" => Ok(Pattern::Chess),
            other => Err(Error::usage(format!("unknown pattern '{other}'"))),
        }
    }
}
