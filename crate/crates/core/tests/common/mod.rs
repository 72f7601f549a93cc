#![allow(dead_code)]

use cavity_core::cavity::{evaluate, CavityState, EngineConfig};
use cavity_core::oracle::{exact_marginal, FiniteBox};
use cavity_core::{LatticePoint, ModelKind, ModelSpec};
use proptest::prelude::*;

pub fn point(c: &[i32]) -> LatticePoint {
    LatticePoint::new(c.to_vec()).unwrap()
}

/// The box as an engine state whose window covers depth `depth` from any vertex.
pub fn state_of(b: &FiniteBox, model: &ModelSpec, depth: u32) -> CavityState {
    let reach = b.half_widths.iter().sum::<u32>() + depth;
    CavityState::new(b.region(reach).unwrap(), model.clone())
        .unwrap()
        .with_removed(b.removed.iter().cloned())
        .unwrap()
}

/// `(Φ, Ψ)` at depth `t`.
pub fn seeds(b: &FiniteBox, model: &ModelSpec, v: &LatticePoint, t: u32, cfg: &EngineConfig) -> (f64, f64) {
    let p = evaluate(&state_of(b, model, t), v, t, cfg).unwrap();
    (p.phi, p.psi)
}

pub fn oracle(b: &FiniteBox, model: &ModelSpec, v: &LatticePoint) -> f64 {
    exact_marginal(b, v, model).unwrap().value
}

/// Asymmetric box with a few holes, at most `max_vertices` live vertices.
#[derive(Clone, Debug)]
pub struct Instance {
    pub b: FiniteBox,
    pub v: LatticePoint,
}

pub fn instance(max_vertices: usize) -> impl Strategy<Value = Instance> {
    (1usize..=3)
        .prop_flat_map(|d| {
            let ranges = prop::collection::vec((-2i32..=0, 0i32..=2), d);
            (ranges, prop::collection::vec(prop::collection::vec(-2i32..=2, d), 0..4), any::<prop::sample::Index>())
        })
        .prop_filter_map("box too large or empty", move |(ranges, holes, pick)| {
            let b = FiniteBox::from_ranges(&ranges).unwrap();
            let holes: Vec<LatticePoint> = holes
                .into_iter()
                .map(|c| LatticePoint::new(c).unwrap())
                .filter(|p| b.contains(p))
                .collect();
            let b = b.with_removed(holes);
            let vs = b.vertices();
            if vs.is_empty() || vs.len() > max_vertices {
                return None;
            }
            let v = vs[pick.index(vs.len())].clone();
            Some(Instance { b, v })
        })
}

pub fn model_strategy(dim: usize) -> impl Strategy<Value = ModelSpec> {
    (prop_oneof![Just(ModelKind::Hardcore), Just(ModelKind::Dimer)], prop_oneof![Just(0.3), Just(1.0), Just(3.0)])
        .prop_map(move |(k, l)| ModelSpec::new(k, l, dim).unwrap())
}

/// Checks the parity ordering of `(Φ, Ψ)` at depth `t` around `exact`.
pub fn sandwiched(t: u32, phi: f64, psi: f64, exact: f64) -> bool {
    let tol = 1e-12 * exact.max(1e-300);
    let (lo, hi) = if t % 2 == 0 { (psi, phi) } else { (phi, psi) };
    lo <= exact + tol && exact <= hi + tol
}
