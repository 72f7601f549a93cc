//! Depth-bounded Φ/Ψ recursions for the probability that a vertex is
//! unoccupied (hard-core) or unmatched (monomer-dimer).

mod eval;
mod grid;
mod memo;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{BoundInterval, BoundMeta, ParityBracket, RoundingSlack};
use crate::lattice::{LatticePoint, Region, RegionKind};
use crate::model::{ModelKind, ModelSpec, SeedKind};

use eval::{Ctx, Walk};
use grid::Grid;
use memo::{LocalMemo, MemoStore, NoMemo, SharedMemo};

/// `[Φ_r, Ψ_r, Φ_{r-1}, Ψ_{r-1}]` at one node.
pub(crate) type Lanes = [f64; 4];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub memo: bool,
    /// Worker threads; 1 runs on the calling thread.
    pub workers: usize,
    /// Nodes with less remaining depth are recomputed instead of cached.
    pub min_memo_depth: u32,
    /// The table stops growing at this many entries.
    pub memo_capacity: usize,
    pub ulps_per_step: f64,
    /// Tree levels fanned out over workers.
    pub parallel_levels: u32,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            memo: true,
            workers: 1,
            min_memo_depth: 3,
            memo_capacity: 40_000_000,
            ulps_per_step: 2.0,
            parallel_levels: 2,
        }
    }
}

/// A region plus the vertices removed so far along one branch.
#[derive(Clone, Debug, PartialEq)]
pub struct CavityState {
    pub region: Region,
    pub removed: BTreeSet<LatticePoint>,
    pub model: ModelSpec,
}

impl CavityState {
    pub fn new(region: Region, model: ModelSpec) -> Result<Self> {
        if region.dim() != model.dim {
            return Err(Error::usage(format!(
                "region is {}-dimensional but the model is {}-dimensional",
                region.dim(),
                model.dim
            )));
        }
        Ok(Self {
            region,
            removed: BTreeSet::new(),
            model,
        })
    }

    pub fn with_removed<I: IntoIterator<Item = LatticePoint>>(mut self, points: I) -> Result<Self> {
        for p in points {
            if !self.region.contains(&p)? {
                return Err(Error::usage(format!("removed vertex {p:?} is not in the region")));
            }
            self.removed.insert(p);
        }
        Ok(self)
    }

    pub fn is_live(&self, v: &LatticePoint) -> Result<bool> {
        Ok(self.region.contains(v)? && !self.removed.contains(v))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    pub nodes: u64,
    pub memo_entries: usize,
}

/// Φ and Ψ at depths `depth` and `depth - 1` from one traversal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedPair {
    pub depth: u32,
    pub phi: f64,
    pub psi: f64,
    pub phi_prev: f64,
    pub psi_prev: f64,
    pub stats: RunStats,
}

impl SeedPair {
    pub fn value(&self, seed: SeedKind) -> f64 {
        match seed {
            SeedKind::Phi => self.phi,
            SeedKind::Psi => self.psi,
        }
    }
}

/// Runs the recursion for `state.model` at `v` to depth `depth`.
pub fn evaluate(state: &CavityState, v: &LatticePoint, depth: u32, cfg: &EngineConfig) -> Result<SeedPair> {
    if !state.is_live(v)? {
        return Err(Error::usage(format!("target {v:?} is not a live vertex of the state")));
    }
    let needed = depth as u64 + v.l1_norm();
    if (state.region.window_radius() as u64) < needed {
        return Err(Error::usage(format!(
            "window radius {} is smaller than depth {depth} plus |v| = {}",
            state.region.window_radius(),
            v.l1_norm()
        )));
    }
    if cfg.workers == 0 {
        return Err(Error::usage("worker count must be >= 1"));
    }
    if depth == 0 {
        return Ok(SeedPair {
            depth,
            phi: 1.0,
            psi: 0.0,
            phi_prev: f64::NAN,
            psi_prev: f64::NAN,
            stats: RunStats::default(),
        });
    }
    let grid = Grid::new(&state.region)?;
    let initial: Vec<usize> = state
        .removed
        .iter()
        .filter_map(|p| grid.index(p.coords()))
        .collect();
    let root = grid.index(v.coords()).expect("target inside window");

    let (lanes, stats) = if cfg.workers == 1 {
        if cfg.memo {
            run_seq(&grid, state, &initial, root, depth, cfg, &LocalMemo::new(cfg.memo_capacity))
        } else {
            run_seq(&grid, state, &initial, root, depth, cfg, &NoMemo)
        }
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::usage(format!("cannot start worker pool: {e}")))?;
        pool.install(|| {
            if cfg.memo {
                run_par(&grid, state, &initial, root, depth, cfg, &SharedMemo::new(cfg.memo_capacity))
            } else {
                run_par(&grid, state, &initial, root, depth, cfg, &NoMemo)
            }
        })
    };
    Ok(SeedPair {
        depth,
        phi: lanes[0],
        psi: lanes[1],
        phi_prev: lanes[2],
        psi_prev: lanes[3],
        stats,
    })
}

fn ctx<'a, M>(grid: &'a Grid, state: &'a CavityState, cfg: &EngineConfig, memo: &'a M) -> Ctx<'a, M> {
    Ctx {
        grid,
        kind: state.region.kind(),
        model: state.model.kind,
        lambda: state.model.lambda,
        memo,
        min_memo_depth: cfg.min_memo_depth.max(2),
    }
}

fn run_seq<M: MemoStore>(
    grid: &Grid,
    state: &CavityState,
    initial: &[usize],
    root: usize,
    depth: u32,
    cfg: &EngineConfig,
    memo: &M,
) -> (Lanes, RunStats) {
    let ctx = ctx(grid, state, cfg, memo);
    let mut walk = Walk::new(grid, initial);
    let lanes = walk.eval(&ctx, root, depth);
    (lanes, RunStats { nodes: walk.nodes, memo_entries: memo.len() })
}

fn run_par<M: MemoStore + Sync>(
    grid: &Grid,
    state: &CavityState,
    initial: &[usize],
    root: usize,
    depth: u32,
    cfg: &EngineConfig,
    memo: &M,
) -> (Lanes, RunStats) {
    let ctx = ctx(grid, state, cfg, memo);
    let mut walk = Walk::new(grid, initial);
    let lanes = walk.eval_par(&ctx, root, depth, cfg.parallel_levels);
    (lanes, RunStats { nodes: walk.nodes, memo_entries: memo.len() })
}

fn require_model(state: &CavityState, kind: ModelKind) -> Result<()> {
    if state.model.kind != kind {
        return Err(Error::usage(format!(
            "state carries the {} model, expected {kind}",
            state.model.kind
        )));
    }
    Ok(())
}

/// Hard-core Φ (seed = phi) or Ψ (seed = psi) at depth `t`.
pub fn hardcore_cavity(
    state: &CavityState,
    v: &LatticePoint,
    t: u32,
    seed: SeedKind,
    cfg: &EngineConfig,
) -> Result<f64> {
    require_model(state, ModelKind::Hardcore)?;
    Ok(evaluate(state, v, t, cfg)?.value(seed))
}

/// Monomer-dimer Φ or Ψ at depth `t`. Removing a vertex deletes its edges.
pub fn dimer_cavity(
    state: &CavityState,
    v: &LatticePoint,
    t: u32,
    seed: SeedKind,
    cfg: &EngineConfig,
) -> Result<f64> {
    require_model(state, ModelKind::Dimer)?;
    Ok(evaluate(state, v, t, cfg)?.value(seed))
}

/// Orders Φ and Ψ at depth `s` into a bracket of the exact marginal.
pub fn parity_bracket(depth: u32, phi: f64, psi: f64) -> ParityBracket {
    let (lower, upper) = if depth % 2 == 0 { (psi, phi) } else { (phi, psi) };
    ParityBracket {
        depth,
        phi,
        psi,
        lower,
        upper,
    }
}

/// Certified bracket on the probability that `v` is unoccupied/unmatched.
///
/// Both parities `t` and `t + 1` are evaluated in one traversal, each
/// widened by the rounding slack, then intersected.
pub fn marginal_bounds(
    state: &CavityState,
    v: &LatticePoint,
    t: u32,
    cfg: &EngineConfig,
) -> Result<BoundInterval> {
    if t == 0 {
        return Err(Error::usage("depth must be >= 1"));
    }
    let pair = evaluate(state, v, t + 1, cfg)?;
    let slack = RoundingSlack::for_recursion(cfg.ulps_per_step, t + 1, state.model.dim);
    let brackets = [
        parity_bracket(t, pair.phi_prev, pair.psi_prev),
        parity_bracket(t + 1, pair.phi, pair.psi),
    ];
    let widen = |b: &ParityBracket| {
        let lower = (b.lower * (1.0 - slack.relative)).next_down().max(0.0);
        let upper = (b.upper * (1.0 + slack.relative)).next_up().min(1.0);
        (lower, upper)
    };
    let (l0, u0) = widen(&brackets[0]);
    let (l1, u1) = widen(&brackets[1]);
    let lower = l0.max(l1);
    let upper = u0.min(u1);
    if lower > upper || brackets.iter().any(|b| b.lower > b.upper) {
        return Err(Error::InternalConsistency(format!(
            "parity brackets [{l0}, {u0}] (t={t}) and [{l1}, {u1}] (t={}) at {v:?} do not overlap",
            t + 1
        )));
    }
    let meta = BoundMeta {
        model: Some(state.model.kind),
        dim: state.model.dim,
        lambda: state.model.lambda,
        depth: t,
        pattern: None,
        rounding: Some(slack),
        parities: brackets.to_vec(),
        memo_entries: pair.stats.memo_entries,
        nodes: pair.stats.nodes,
        notes: Vec::new(),
    };
    BoundInterval::new(lower, upper, meta)
}

/// Cache fingerprint of one recursion call.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MemoKey {
    region: RegionKind,
    class: Vec<i32>,
    depth: u32,
    removed: Vec<Vec<i32>>,
    seed: SeedKind,
}

/// Two calls with equal keys return equal values. Removed vertices farther
/// than `t` from `v` are left out since the recursion never reaches them.
pub fn memo_key(state: &CavityState, v: &LatticePoint, t: u32, seed: SeedKind) -> MemoKey {
    let mut class = Vec::new();
    state
        .region
        .kind()
        .local_class(v.coords(), t as i64, &mut class);
    let mut removed: Vec<Vec<i32>> = state
        .removed
        .iter()
        .filter(|w| w.l1_distance(v) <= t as u64)
        .map(|w| w.coords().iter().zip(v.coords()).map(|(a, b)| a - b).collect())
        .collect();
    removed.sort();
    MemoKey {
        region: state.region.kind().clone(),
        class,
        depth: t,
        removed,
        seed,
    }
}
