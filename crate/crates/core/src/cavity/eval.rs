//! The Φ/Ψ computation-tree recursions.
//!
//! One traversal at remaining depth `r` yields four lanes
//! `[Φ_r, Ψ_r, Φ_{r-1}, Ψ_{r-1}]`. Each lane follows exactly the arithmetic a
//! standalone run of that seed and depth would perform, so the lanes are
//! bit-identical to separate runs.

use rayon::prelude::*;
use smallvec::SmallVec;

use super::grid::Grid;
use super::memo::MemoStore;
use super::Lanes;
use crate::lattice::RegionKind;
use crate::model::ModelKind;

type KeyBuf = SmallVec<[i32; 48]>;

pub(crate) struct Ctx<'a, M> {
    pub grid: &'a Grid,
    pub kind: &'a RegionKind,
    pub model: ModelKind,
    pub lambda: f64,
    pub memo: &'a M,
    pub min_memo_depth: u32,
}

#[derive(Clone)]
pub(crate) struct Walk {
    removed: Vec<bool>,
    stack: Vec<u32>,
    pub nodes: u64,
}

impl Walk {
    pub fn new(grid: &Grid, initial: &[usize]) -> Self {
        let mut w = Walk {
            removed: vec![false; grid.cells()],
            stack: Vec::with_capacity(256),
            nodes: 0,
        };
        for &c in initial {
            if !w.removed[c] {
                w.remove(c);
            }
        }
        w
    }

    #[inline]
    fn remove(&mut self, cell: usize) {
        self.removed[cell] = true;
        self.stack.push(cell as u32);
    }

    #[inline]
    fn restore(&mut self, n: usize) {
        for _ in 0..n {
            let c = self.stack.pop().expect("restore past initial state");
            self.removed[c as usize] = false;
        }
    }

    #[inline]
    fn live_neighbors<M>(&self, ctx: &Ctx<'_, M>, v: usize) -> SmallVec<[u32; 8]> {
        let mut ns = SmallVec::new();
        for &s in &ctx.grid.steps {
            let u = (v as isize + s) as usize;
            if ctx.grid.member[u] && !self.removed[u] {
                ns.push(u as u32);
            }
        }
        ns
    }

    fn key<M>(&self, ctx: &Ctx<'_, M>, v: usize, r: u32) -> KeyBuf {
        let mut key = KeyBuf::new();
        ctx.kind
            .local_class(ctx.grid.coords_of(v), r as i64, &mut key);
        key.push(r as i32);
        let start = key.len();
        for &w in &self.stack {
            if ctx.grid.l1(w as usize, v) <= r {
                key.push(w as i32 - v as i32);
            }
        }
        key[start..].sort_unstable();
        key
    }

    pub fn eval<M: MemoStore>(&mut self, ctx: &Ctx<'_, M>, v: usize, r: u32) -> Lanes {
        debug_assert!(r >= 1);
        self.nodes += 1;
        let ns = self.live_neighbors(ctx, v);
        if let Some(lanes) = base_case(ctx.model, ctx.lambda, ns.len(), r) {
            return lanes;
        }
        let key = (r >= ctx.min_memo_depth).then(|| self.key(ctx, v, r));
        if let Some(k) = &key {
            if let Some(hit) = ctx.memo.get(k.as_slice()) {
                return hit;
            }
        }
        let lanes = match ctx.model {
            ModelKind::Hardcore => {
                self.remove(v);
                let mut prod = [1.0; 4];
                for &u in &ns {
                    let c = self.eval(ctx, u as usize, r - 1);
                    for l in 0..4 {
                        prod[l] *= c[l];
                    }
                    self.remove(u as usize);
                }
                self.restore(ns.len() + 1);
                combine(ctx.lambda, prod)
            }
            ModelKind::Dimer => {
                self.remove(v);
                let mut sum = [0.0; 4];
                for &u in &ns {
                    let c = self.eval(ctx, u as usize, r - 1);
                    for l in 0..4 {
                        sum[l] += c[l];
                    }
                }
                self.restore(1);
                combine(ctx.lambda, sum)
            }
        };
        if let Some(k) = &key {
            ctx.memo.insert(k.as_slice(), lanes);
        }
        lanes
    }

    /// Same values as [`Walk::eval`], fanning the top `levels` of the tree out
    /// over the rayon pool. Children are combined in sibling order.
    pub fn eval_par<M: MemoStore + Sync>(
        &mut self,
        ctx: &Ctx<'_, M>,
        v: usize,
        r: u32,
        levels: u32,
    ) -> Lanes {
        if levels == 0 {
            return self.eval(ctx, v, r);
        }
        self.nodes += 1;
        let ns = self.live_neighbors(ctx, v);
        if let Some(lanes) = base_case(ctx.model, ctx.lambda, ns.len(), r) {
            return lanes;
        }
        let key = (r >= ctx.min_memo_depth).then(|| self.key(ctx, v, r));
        if let Some(k) = &key {
            if let Some(hit) = ctx.memo.get(k.as_slice()) {
                return hit;
            }
        }
        let mut jobs = Vec::with_capacity(ns.len());
        self.remove(v);
        for &u in &ns {
            jobs.push((self.clone_for_job(), u as usize));
            if ctx.model == ModelKind::Hardcore {
                self.remove(u as usize);
            }
        }
        let pushed = match ctx.model {
            ModelKind::Hardcore => ns.len() + 1,
            ModelKind::Dimer => 1,
        };
        self.restore(pushed);
        let results: Vec<(Lanes, u64)> = jobs
            .into_par_iter()
            .map(|(mut w, u)| {
                let lanes = w.eval_par(ctx, u, r - 1, levels - 1);
                (lanes, w.nodes)
            })
            .collect();
        let mut acc = match ctx.model {
            ModelKind::Hardcore => [1.0; 4],
            ModelKind::Dimer => [0.0; 4],
        };
        for (c, nodes) in results {
            self.nodes += nodes;
            for l in 0..4 {
                match ctx.model {
                    ModelKind::Hardcore => acc[l] *= c[l],
                    ModelKind::Dimer => acc[l] += c[l],
                }
            }
        }
        let lanes = combine(ctx.lambda, acc);
        if let Some(k) = &key {
            ctx.memo.insert(k.as_slice(), lanes);
        }
        lanes
    }

    fn clone_for_job(&self) -> Walk {
        Walk {
            removed: self.removed.clone(),
            stack: self.stack.clone(),
            nodes: 0,
        }
    }
}

#[inline]
fn combine(lambda: f64, acc: Lanes) -> Lanes {
    acc.map(|a| 1.0 / (1.0 + lambda * a))
}

/// Lanes that need no recursion: isolated vertices and remaining depth 1.
#[inline]
fn base_case(model: ModelKind, lambda: f64, live: usize, r: u32) -> Option<Lanes> {
    let deeper = r > 1;
    match (model, live) {
        (ModelKind::Hardcore, 0) => {
            let x = 1.0 / (1.0 + lambda);
            Some([x, x, if deeper { x } else { 1.0 }, if deeper { x } else { 0.0 }])
        }
        (ModelKind::Dimer, 0) => Some([1.0, 1.0, 1.0, if deeper { 1.0 } else { 0.0 }]),
        (ModelKind::Hardcore, _) if r == 1 => Some([1.0 / (1.0 + lambda * 1.0), 1.0, 1.0, 0.0]),
        (ModelKind::Dimer, k) if r == 1 => {
            Some([1.0 / (1.0 + lambda * k as f64), 1.0, 1.0, 0.0])
        }
        _ => None,
    }
}
