//! Independence and matching polynomials of graphs with at most 64 vertices,
//! as coefficient vectors indexed by configuration size.

use rustc_hash::FxHashMap;

use super::Method;
use crate::error::{Error, Result};
use crate::lattice::LatticePoint;

/// Brute-force enumeration refuses graphs larger than this.
const ENUMERATION_CAP: usize = 26;

/// A graph on vertices `0..n`, numbered in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallGraph {
    pub n: usize,
    pub adj: Vec<u64>,
    /// Each edge once, as `(lower, higher)`, sorted.
    pub edges: Vec<(usize, usize)>,
}

impl SmallGraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n > 64 {
            return Err(Error::Capacity(format!("{n} vertices exceed 64")));
        }
        let mut adj = vec![0u64; n];
        let mut list = Vec::new();
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::usage(format!("bad edge ({a}, {b})")));
            }
            let (a, b) = (a.min(b), a.max(b));
            if adj[a] >> b & 1 == 0 {
                adj[a] |= 1 << b;
                adj[b] |= 1 << a;
                list.push((a, b));
            }
        }
        list.sort_unstable();
        Ok(Self { n, adj, edges: list })
    }

    /// Nearest-neighbor graph induced on `points`, which must be lex-sorted.
    pub(crate) fn from_points(points: &[LatticePoint]) -> Self {
        let mut edges = Vec::new();
        for (i, a) in points.iter().enumerate() {
            for (j, b) in points.iter().enumerate().skip(i + 1) {
                if a.l1_distance(b) == 1 {
                    edges.push((i, j));
                }
            }
        }
        Self::new(points.len(), &edges).expect("cap checked by caller")
    }

    fn all(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }
}

fn add_into(acc: &mut Vec<u128>, p: &[u128], shift: usize) {
    if acc.len() < p.len() + shift {
        acc.resize(p.len() + shift, 0);
    }
    for (i, c) in p.iter().enumerate() {
        acc[i + shift] += c;
    }
}

pub fn independence_polynomial(g: &SmallGraph, method: Method) -> Result<Vec<u128>> {
    match method {
        Method::Enumeration => {
            if g.n > ENUMERATION_CAP {
                return Err(Error::Capacity(format!(
                    "enumeration over 2^{} subsets refused (cap {ENUMERATION_CAP} vertices)",
                    g.n
                )));
            }
            let mut counts = vec![0u128; g.n + 1];
            for mask in 0..(1u64 << g.n) {
                let independent = (0..g.n).all(|i| mask >> i & 1 == 0 || g.adj[i] & mask == 0);
                if independent {
                    counts[mask.count_ones() as usize] += 1;
                }
            }
            Ok(trim(counts))
        }
        Method::SliceDp => Ok(trim(slice_dp(g))),
        Method::Deletion => {
            let mut memo = FxHashMap::default();
            Ok(trim(hc_delete(g, g.all(), &mut memo)))
        }
        Method::TransferMatrix => Err(Error::usage("transfer matrices do not count finite graphs")),
    }
}

/// Profile DP: vertices are added in order, and the state is the occupancy
/// of already-placed vertices that still have unplaced neighbors.
fn slice_dp(g: &SmallGraph) -> Vec<u128> {
    let mut states: FxHashMap<u64, Vec<u128>> = FxHashMap::default();
    states.insert(0, vec![1]);
    for i in 0..g.n {
        let later = if i + 1 >= 64 { 0 } else { u64::MAX << (i + 1) };
        let mut frontier = 0u64;
        for v in 0..=i {
            if g.adj[v] & later != 0 {
                frontier |= 1 << v;
            }
        }
        let mut next: FxHashMap<u64, Vec<u128>> = FxHashMap::default();
        for (state, poly) in states {
            add_into(next.entry(state & frontier).or_default(), &poly, 0);
            if g.adj[i] & state == 0 {
                let occ = (state | 1 << i) & frontier;
                add_into(next.entry(occ).or_default(), &poly, 1);
            }
        }
        states = next;
    }
    let mut total = vec![0];
    for poly in states.values() {
        add_into(&mut total, poly, 0);
    }
    total
}

fn hc_delete(g: &SmallGraph, live: u64, memo: &mut FxHashMap<u64, Vec<u128>>) -> Vec<u128> {
    if live == 0 {
        return vec![1];
    }
    if let Some(p) = memo.get(&live) {
        return p.clone();
    }
    let v = live.trailing_zeros() as usize;
    let without = hc_delete(g, live & !(1 << v), memo);
    let with = hc_delete(g, live & !(1 << v) & !g.adj[v], memo);
    let mut out = without;
    add_into(&mut out, &with, 1);
    memo.insert(live, out.clone());
    out
}

pub fn matching_polynomial(g: &SmallGraph, method: Method) -> Result<Vec<u128>> {
    match method {
        Method::Enumeration => {
            if g.n > 2 * ENUMERATION_CAP {
                return Err(Error::Capacity(format!("matching enumeration on {} vertices refused", g.n)));
            }
            let mut counts = vec![0u128; g.n / 2 + 1];
            enumerate_matchings(g, g.all(), 0, &mut counts);
            Ok(trim(counts))
        }
        Method::Deletion => {
            if g.edges.len() > 128 {
                return Err(Error::Capacity(format!("{} edges exceed 128", g.edges.len())));
            }
            let all_edges = if g.edges.len() == 128 {
                u128::MAX
            } else {
                (1u128 << g.edges.len()) - 1
            };
            let mut memo = FxHashMap::default();
            Ok(trim(edge_delete(g, g.all(), all_edges, &mut memo)))
        }
        other => Err(Error::usage(format!("method {other} does not count matchings"))),
    }
}

/// Visits every matching once: the lowest free vertex is either left
/// unmatched or matched to one of its free neighbors.
fn enumerate_matchings(g: &SmallGraph, free: u64, size: usize, counts: &mut [u128]) {
    if free == 0 {
        counts[size] += 1;
        return;
    }
    let v = free.trailing_zeros() as usize;
    let rest = free & !(1 << v);
    enumerate_matchings(g, rest, size, counts);
    let mut nbrs = g.adj[v] & rest;
    while nbrs != 0 {
        let u = nbrs.trailing_zeros() as usize;
        nbrs &= nbrs - 1;
        enumerate_matchings(g, rest & !(1 << u), size + 1, counts);
    }
}

/// `Z(G) = Z(G ∖ e) + λ Z(G − u − v)` for the first live edge `e = uv`.
fn edge_delete(
    g: &SmallGraph,
    live: u64,
    edges: u128,
    memo: &mut FxHashMap<(u64, u128), Vec<u128>>,
) -> Vec<u128> {
    let mut usable = edges;
    let mut remaining = edges;
    while remaining != 0 {
        let e = remaining.trailing_zeros() as usize;
        remaining &= remaining - 1;
        let (a, b) = g.edges[e];
        if live >> a & 1 == 0 || live >> b & 1 == 0 {
            usable &= !(1u128 << e);
        }
    }
    if usable == 0 {
        return vec![1];
    }
    if let Some(p) = memo.get(&(live, usable)) {
        return p.clone();
    }
    let e = usable.trailing_zeros() as usize;
    let (a, b) = g.edges[e];
    let without = edge_delete(g, live, usable & !(1u128 << e), memo);
    let with = edge_delete(g, live & !(1 << a) & !(1 << b), usable & !(1u128 << e), memo);
    let mut out = without;
    add_into(&mut out, &with, 1);
    memo.insert((live, usable), out.clone());
    out
}

fn trim(mut v: Vec<u128>) -> Vec<u128> {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
    v
}
