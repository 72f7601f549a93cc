//! Free-energy and surface-pressure intervals assembled from cavity marginals,
//! and depth planning from the correlation-decay rates.

use serde::{Deserialize, Serialize};

use crate::cavity::{marginal_bounds, CavityState, EngineConfig};
use crate::error::{Error, Result};
use crate::interval::{ln_enclosure, BoundInterval, BoundMeta};
use crate::lattice::{shape_coefficients, LatticePoint, Region, RegionKind, ShapeVector};
use crate::model::{ModelKind, ModelSpec, Pattern};

/// How the monomer-dimer activity is reported.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// `Z = Σ λ^|M|`.
    #[default]
    Activity,
    /// Dimer weight 1 and monomer weight `1/λ`, i.e. `P(λ²) − log λ`.
    Monomer,
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "activity" => Ok(Normalization::Activity),
            "monomer" => Ok(Normalization::Monomer),
            other => Err(Error::usage(format!("unknown normalization '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    ProvenSsm,
    Unproven,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::ProvenSsm => "proven_ssm",
            Regime::Unproven => "unproven",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate {
    pub regime: Regime,
    pub rho: Option<f64>,
    pub prefactor: Option<f64>,
    pub notes: Vec<String>,
}

/// Uniqueness threshold `(Δ−1)^{Δ−1}/(Δ−2)^Δ` of the hard-core model on
/// degree-Δ graphs, Δ = 2d. Infinite for d = 1.
pub fn hardcore_threshold(dim: usize) -> f64 {
    if dim <= 1 {
        return f64::INFINITY;
    }
    let delta = 2.0 * dim as f64;
    (delta - 1.0).powf(delta - 1.0) / (delta - 2.0).powf(delta)
}

/// Fixed point of `x = 1/(1 + λ x^{Δ−1})` by bisection.
fn tree_fixed_point(lambda: f64, delta: f64) -> f64 {
    let f = |x: f64| x - 1.0 / (1.0 + lambda * x.powf(delta - 1.0));
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn decay_certificate(model: ModelKind, dim: usize, lambda: f64) -> DecayCertificate {
    let prefactor = (2.0 * dim as f64 * lambda).ln_1p();
    match model {
        ModelKind::Dimer => {
            let s = (1.0 + 2.0 * lambda * dim as f64).sqrt();
            DecayCertificate {
                regime: Regime::ProvenSsm,
                rho: Some((1.0 - 2.0 / (s + 1.0)).sqrt()),
                prefactor: Some(prefactor),
                notes: Vec::new(),
            }
        }
        ModelKind::Hardcore => {
            let delta = 2.0 * dim as f64;
            if lambda >= hardcore_threshold(dim) {
                return DecayCertificate {
                    regime: Regime::Unproven,
                    rho: None,
                    prefactor: None,
                    notes: vec![format!(
                        "activity {lambda} is at or above the uniqueness threshold {:.6} for degree {}",
                        hardcore_threshold(dim),
                        2 * dim
                    )],
                };
            }
            let x = tree_fixed_point(lambda, delta);
            let mut notes = vec![
                "hard-core rate is the tree-recursion contraction (Δ−1)(1−x*); prefactor log(1+2dλ) is conservative, not proven"
                    .to_string(),
            ];
            if dim == 1 {
                notes.push("d = 1 classified as proven by one-dimensional uniqueness".to_string());
            }
            DecayCertificate {
                regime: Regime::ProvenSsm,
                rho: Some((delta - 1.0) * (1.0 - x)),
                prefactor: Some(prefactor),
                notes,
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthPlan {
    Depth(u32),
    Refused { reason: String },
}

/// Smallest `t >= 1` with `prefactor · ρ^t < ε`, or a refusal outside the
/// proven regime.
pub fn depth_for_accuracy(model: ModelKind, dim: usize, lambda: f64, eps: f64) -> Result<DepthPlan> {
    if !(eps > 0.0) {
        return Err(Error::usage(format!("accuracy must be > 0, got {eps}")));
    }
    let cert = decay_certificate(model, dim, lambda);
    match (cert.regime, cert.rho, cert.prefactor) {
        (Regime::ProvenSsm, Some(rho), Some(c)) => Ok(DepthPlan::Depth(smallest_power(c, rho, eps, 1))),
        _ => Ok(DepthPlan::Refused {
            reason: format!(
                "no correlation-decay guarantee for {model} at d={dim}, λ={lambda}; supply an explicit depth"
            ),
        }),
    }
}

fn smallest_power(c: f64, rho: f64, eps: f64, start: u32) -> u32 {
    let mut t = start;
    let mut v = c * rho.powi(start as i32);
    while v >= eps && t < 100_000 {
        t += 1;
        v *= rho;
    }
    t
}

/// Options shared by the free-energy entry points.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyOptions {
    pub engine: EngineConfig,
    pub normalization: Normalization,
}

fn origin_marginal(
    model: &ModelSpec,
    kind: RegionKind,
    t: u32,
    engine: &EngineConfig,
) -> Result<BoundInterval> {
    if t == 0 {
        return Err(Error::usage("depth must be >= 1; depth 0 yields only the vacuous bound"));
    }
    let region = Region::new(model.dim, kind, t + 1)?;
    let state = CavityState::new(region, model.clone())?;
    marginal_bounds(&state, &LatticePoint::origin(model.dim), t, engine)
}

pub fn pattern_region(pattern: Pattern) -> RegionKind {
    match pattern {
        Pattern::Plain => RegionKind::PrecOrigin,
        Pattern::Chess => RegionKind::PrecOriginEven,
    }
}

/// The state whose origin marginal gives the pressure, windowed at `window`.
pub fn pattern_state(model: &ModelSpec, pattern: Pattern, window: u32) -> Result<CavityState> {
    CavityState::new(Region::new(model.dim, pattern_region(pattern), window)?, model.clone())
}

fn stamp(mut out: BoundInterval, marginal: &BoundInterval, pattern: Pattern) -> BoundInterval {
    let mut meta = marginal.meta.clone();
    meta.pattern = Some(pattern);
    meta.notes.append(&mut out.meta.notes);
    out.meta = meta;
    out
}

/// Interval on the hard-core pressure `P(d, λ)`.
pub fn hardcore_free_energy(
    dim: usize,
    lambda: f64,
    t: u32,
    pattern: Pattern,
    engine: &EngineConfig,
) -> Result<BoundInterval> {
    let model = ModelSpec::hardcore(lambda, dim)?;
    let m = origin_marginal(&model, pattern_region(pattern), t, engine)?;
    let out = match pattern {
        Pattern::Plain => m.ln().neg(),
        Pattern::Chess => {
            let one_plus = BoundInterval {
                lower: (1.0 + lambda).next_down().max(1.0),
                upper: (1.0 + lambda).next_up(),
                meta: BoundMeta::default(),
            };
            m.ln().neg().scale(0.5).add(&one_plus.ln().scale(0.5))
        }
    };
    let out = stamp(out, &m, pattern);
    BoundInterval::new(out.lower, out.upper, out.meta)
}

/// Interval on the monomer-dimer pressure.
pub fn dimer_free_energy(
    dim: usize,
    lambda: f64,
    t: u32,
    pattern: Pattern,
    opts: &FreeEnergyOptions,
) -> Result<BoundInterval> {
    let mut notes = Vec::new();
    let activity = match opts.normalization {
        Normalization::Activity => lambda,
        Normalization::Monomer => {
            if !(lambda > 0.0) {
                return Err(Error::usage("monomer normalization needs λ > 0"));
            }
            let sq = lambda * lambda;
            if lambda.mul_add(lambda, -sq) != 0.0 {
                notes.push(format!("λ² rounded to {sq:e}; bounds refer to that activity"));
            }
            sq
        }
    };
    let model = ModelSpec::dimer(activity, dim)?;
    let m = origin_marginal(&model, pattern_region(pattern), t, &opts.engine)?;
    let mut out = match pattern {
        Pattern::Plain => m.ln().neg(),
        Pattern::Chess => m.ln().neg().scale(0.5),
    };
    if opts.normalization == Normalization::Monomer {
        out = out.sub(&ln_enclosure(lambda));
    }
    let mut out = stamp(out, &m, pattern);
    out.meta.lambda = lambda;
    out.meta.notes.extend(notes);
    BoundInterval::new(out.lower, out.upper, out.meta)
}

/// Dispatches on the model.
pub fn free_energy(
    model: ModelKind,
    dim: usize,
    lambda: f64,
    t: u32,
    pattern: Pattern,
    opts: &FreeEnergyOptions,
) -> Result<BoundInterval> {
    match model {
        ModelKind::Hardcore => {
            if opts.normalization != Normalization::Activity {
                return Err(Error::usage("monomer normalization applies to the dimer model only"));
            }
            hardcore_free_energy(dim, lambda, t, pattern, &opts.engine)
        }
        ModelKind::Dimer => dimer_free_energy(dim, lambda, t, pattern, opts),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceOptions {
    pub engine: EngineConfig,
    pub allow_uncertified: bool,
    /// Reuse axis-0 terms for every axis when all shape entries are equal.
    pub symmetry_reuse: bool,
    /// Emit a warning when the tail bound exceeds this.
    pub tail_tolerance: Option<f64>,
}

impl Default for SurfaceOptions {
    fn default() -> Self {
        Self {
            engine: EngineConfig::default(),
            allow_uncertified: false,
            symmetry_reuse: true,
            tail_tolerance: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceTerm {
    pub axis: usize,
    pub k: u32,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceReport {
    pub interval: BoundInterval,
    pub terms: Vec<SurfaceTerm>,
    /// Bound on the omitted `k > k_max` terms, when proven.
    pub tail: Option<f64>,
    pub k_max: u32,
    pub certificate: DecayCertificate,
    pub warnings: Vec<String>,
}

/// Smallest `k_max >= 1` whose tail bound is below `eps`.
pub fn kmax_for_tolerance(cert: &DecayCertificate, eps: f64) -> Option<u32> {
    let (rho, c) = (cert.rho?, cert.prefactor?);
    let mut k = 1;
    while tail_bound(c, rho, k) >= eps && k < 100_000 {
        k += 1;
    }
    Some(k)
}

/// `2 C ρ^{k+1} / (1 − ρ)`, rounded up.
pub fn tail_bound(prefactor: f64, rho: f64, k_max: u32) -> f64 {
    let raw = 2.0 * prefactor * rho.powi(k_max as i32 + 1) / (1.0 - rho);
    (0..4).fold(raw, |x, _| x.next_up())
}

fn half_plane(axis: usize, k: u32, plus: bool) -> RegionKind {
    let hp = if plus {
        RegionKind::HalfPlanePlus { axis, offset: k as i32 }
    } else {
        RegionKind::HalfPlaneMinus { axis, offset: k as i32 }
    };
    RegionKind::Intersection(vec![RegionKind::PrecOrigin, hp])
}

/// Interval on the surface pressure `sP(d, λ, a)`, plain pattern.
#[allow(clippy::too_many_arguments)]
pub fn surface_pressure(
    model: ModelKind,
    dim: usize,
    lambda: f64,
    shape: &ShapeVector,
    t: u32,
    k_max: u32,
    opts: &SurfaceOptions,
) -> Result<SurfaceReport> {
    if shape.dim() != dim {
        return Err(Error::usage(format!(
            "shape has {} entries but d = {dim}",
            shape.dim()
        )));
    }
    if k_max == 0 {
        return Err(Error::usage("k_max must be >= 1"));
    }
    let cert = decay_certificate(model, dim, lambda);
    if cert.regime == Regime::Unproven && !opts.allow_uncertified {
        return Err(Error::refusal(format!(
            "surface series is only known to converge under exponential decay; {} (pass the allow-uncertified flag to compute partial sums anyway)",
            cert.notes.join("; ")
        )));
    }
    let spec = ModelSpec::new(model, lambda, dim)?;
    let full = origin_marginal(&spec, RegionKind::PrecOrigin, t, &opts.engine)?;
    let log_full = full.ln();
    let coeffs = shape_coefficients(shape);
    let cubic = shape.entries().iter().all(|&x| x == shape.entries()[0]);
    let axes: Vec<usize> = if opts.symmetry_reuse && cubic { vec![0] } else { (0..dim).collect() };

    let mut terms = Vec::new();
    let mut per_axis = Vec::with_capacity(axes.len());
    let mut nodes = full.meta.nodes;
    for &j in &axes {
        let mut sum = BoundInterval::point(0.0);
        for k in 0..=k_max {
            let plus = origin_marginal(&spec, half_plane(j, k, true), t, &opts.engine)?;
            let minus = origin_marginal(&spec, half_plane(j, k, false), t, &opts.engine)?;
            nodes += plus.meta.nodes + minus.meta.nodes;
            let term = log_full.scale(2.0).sub(&plus.ln()).sub(&minus.ln());
            terms.push(SurfaceTerm {
                axis: j,
                k,
                lower: term.lower,
                upper: term.upper,
            });
            sum = sum.add(&term);
        }
        per_axis.push(sum);
    }

    let mut total = BoundInterval::point(0.0);
    if axes.len() == 1 && dim > 1 {
        // every face carries the same per-area series, and Σ_j A_j/A = 1
        total = per_axis[0].clone();
    } else {
        for (&j, sum) in axes.iter().zip(&per_axis) {
            let w = coeffs.faces[j] / coeffs.total;
            let weight = BoundInterval {
                lower: w.next_down().max(0.0),
                upper: w.next_up(),
                meta: BoundMeta::default(),
            };
            total = total.add(&mul(sum, &weight));
        }
    }

    let mut warnings = Vec::new();
    let tail = match (cert.regime, cert.rho, cert.prefactor) {
        (Regime::ProvenSsm, Some(rho), Some(c)) => {
            let tb = tail_bound(c, rho, k_max);
            total = total.widen(tb);
            if let Some(tol) = opts.tail_tolerance {
                if tb > tol {
                    warnings.push(format!(
                        "k_max = {k_max} leaves tail bound {tb:e} above the requested {tol:e}"
                    ));
                }
            }
            Some(tb)
        }
        _ => {
            warnings.push("unproven regime: partial sum only, no tail bound".to_string());
            None
        }
    };

    let meta = BoundMeta {
        model: Some(model),
        dim,
        lambda,
        depth: t,
        pattern: Some(Pattern::Plain),
        rounding: full.meta.rounding.clone(),
        parities: Vec::new(),
        memo_entries: full.meta.memo_entries,
        nodes,
        notes: warnings.clone(),
    };
    let interval = BoundInterval::new(total.lower, total.upper, meta)?;
    Ok(SurfaceReport {
        interval,
        terms,
        tail,
        k_max,
        certificate: cert,
        warnings,
    })
}

fn mul(a: &BoundInterval, b: &BoundInterval) -> BoundInterval {
    let p = [
        a.lower * b.lower,
        a.lower * b.upper,
        a.upper * b.lower,
        a.upper * b.upper,
    ];
    let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    BoundInterval {
        lower: lo.next_down(),
        upper: hi.next_up(),
        meta: a.meta.clone(),
    }
}
