//! The integer lattice Z^d: points, the lexicographic order, the half-space
//! style regions the cavity recursions run on, and rectangle-shape surface
//! coefficients.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of Z^d in lattice units. The derived `Ord` is storage order
/// only; see [`lex_compare`] for the lattice order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticePoint(Vec<i32>);

impl LatticePoint {
    pub fn new(coords: Vec<i32>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::usage("lattice points need dimension >= 1"));
        }
        Ok(Self(coords))
    }

    pub fn origin(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be >= 1");
        Self(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i32] {
        &self.0
    }

    /// Coordinate `j`, zero-based.
    pub fn coord(&self, j: usize) -> i32 {
        self.0[j]
    }

    pub fn l1_norm(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs() as u64).sum()
    }

    pub fn l1_distance(&self, other: &LatticePoint) -> u64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).unsigned_abs() as u64)
            .sum()
    }

    /// True when the coordinate sum is even.
    pub fn is_even(&self) -> bool {
        coord_sum_is_even(&self.0)
    }

    pub fn offset(&self, axis: usize, delta: i32) -> LatticePoint {
        let mut c = self.0.clone();
        c[axis] += delta;
        LatticePoint(c)
    }
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<&[i32]> for LatticePoint {
    fn from(c: &[i32]) -> Self {
        assert!(!c.is_empty(), "dimension must be >= 1");
        LatticePoint(c.to_vec())
    }
}

pub(crate) fn coord_sum_is_even(c: &[i32]) -> bool {
    c.iter().map(|&x| x as i64).sum::<i64>().rem_euclid(2) == 0
}

/// Lexicographic comparison on raw coordinates: the last coordinate is the
/// most significant.
pub(crate) fn lex_cmp_raw(u: &[i32], v: &[i32]) -> Ordering {
    for (a, b) in u.iter().rev().zip(v.iter().rev()) {
        match a.cmp(b) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// Total order on Z^d used by the sequential cavity construction.
///
/// `u < v` iff `u_d < v_d`, or the last differing coordinate of `u` is the
/// smaller one.
pub fn lex_compare(u: &LatticePoint, v: &LatticePoint) -> Result<Ordering> {
    if u.dim() != v.dim() {
        return Err(Error::usage(format!(
            "dimension mismatch: {} vs {}",
            u.dim(),
            v.dim()
        )));
    }
    Ok(lex_cmp_raw(&u.0, &v.0))
}

/// Set description of a region of Z^d, before the window cutoff.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionKind {
    FullLattice,
    /// `{u : u < 0} ∪ {0}`.
    PrecOrigin,
    /// `PrecOrigin` plus every odd point after the origin.
    PrecOriginEven,
    /// `{v : v_axis <= offset}`.
    HalfPlanePlus { axis: usize, offset: i32 },
    /// `{v : v_axis >= -offset}`.
    HalfPlaneMinus { axis: usize, offset: i32 },
    Intersection(Vec<RegionKind>),
}

/// How a region looks inside an L1 ball, up to translation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) enum LocalPattern {
    /// Every point of the ball is a member.
    All,
    /// Exactly the odd points of the ball are members.
    OddOnly,
    /// No point of the ball is a member.
    Empty,
    /// Membership depends on absolute position.
    Mixed,
}

impl RegionKind {
    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            RegionKind::HalfPlanePlus { axis, .. } | RegionKind::HalfPlaneMinus { axis, .. } => {
                if *axis >= dim {
                    return Err(Error::usage(format!(
                        "half-plane axis {axis} out of range for dimension {dim}"
                    )));
                }
                Ok(())
            }
            RegionKind::Intersection(parts) => parts.iter().try_for_each(|p| p.validate(dim)),
            _ => Ok(()),
        }
    }

    pub(crate) fn contains_raw(&self, c: &[i32]) -> bool {
        match self {
            RegionKind::FullLattice => true,
            RegionKind::PrecOrigin => prec_origin(c),
            RegionKind::PrecOriginEven => prec_origin(c) || !coord_sum_is_even(c),
            RegionKind::HalfPlanePlus { axis, offset } => c[*axis] <= *offset,
            RegionKind::HalfPlaneMinus { axis, offset } => c[*axis] >= -*offset,
            RegionKind::Intersection(parts) => parts.iter().all(|p| p.contains_raw(c)),
        }
    }

    /// Classifies membership inside the L1 ball of `radius` around `c`.
    pub(crate) fn local_pattern(&self, c: &[i32], radius: i64) -> LocalPattern {
        let last = *c.last().expect("dim >= 1") as i64;
        match self {
            RegionKind::FullLattice => LocalPattern::All,
            RegionKind::PrecOrigin => {
                if last + radius < 0 {
                    LocalPattern::All
                } else if last - radius > 0 {
                    LocalPattern::Empty
                } else {
                    LocalPattern::Mixed
                }
            }
            RegionKind::PrecOriginEven => {
                if last + radius < 0 {
                    LocalPattern::All
                } else if last - radius > 0 {
                    LocalPattern::OddOnly
                } else {
                    LocalPattern::Mixed
                }
            }
            RegionKind::HalfPlanePlus { axis, offset } => {
                let x = c[*axis] as i64;
                let k = *offset as i64;
                if x + radius <= k {
                    LocalPattern::All
                } else if x - radius > k {
                    LocalPattern::Empty
                } else {
                    LocalPattern::Mixed
                }
            }
            RegionKind::HalfPlaneMinus { axis, offset } => {
                let x = c[*axis] as i64;
                let k = *offset as i64;
                if x - radius >= -k {
                    LocalPattern::All
                } else if x + radius < -k {
                    LocalPattern::Empty
                } else {
                    LocalPattern::Mixed
                }
            }
            RegionKind::Intersection(parts) => {
                let mut acc = LocalPattern::All;
                for p in parts {
                    match p.local_pattern(c, radius) {
                        LocalPattern::Empty => return LocalPattern::Empty,
                        LocalPattern::Mixed => acc = LocalPattern::Mixed,
                        LocalPattern::OddOnly if acc == LocalPattern::All => {
                            acc = LocalPattern::OddOnly
                        }
                        _ => {}
                    }
                }
                acc
            }
        }
    }
}

impl RegionKind {
    /// Appends a fingerprint that fixes membership on the L1 ball of `radius`
    /// around `c` relative to `c`. Translation-invariant cases drop the
    /// absolute position.
    pub(crate) fn local_class<E: Extend<i32>>(&self, c: &[i32], radius: i64, out: &mut E) {
        let pattern_tag = |p: LocalPattern| match p {
            LocalPattern::All => 1,
            LocalPattern::Empty => 2,
            LocalPattern::OddOnly => 3 + i32::from(!coord_sum_is_even(c)),
            LocalPattern::Mixed => 5,
        };
        match self {
            RegionKind::FullLattice => out.extend([0]),
            RegionKind::PrecOrigin | RegionKind::PrecOriginEven => {
                let p = self.local_pattern(c, radius);
                out.extend([pattern_tag(p)]);
                if p == LocalPattern::Mixed {
                    out.extend(c.iter().copied());
                }
            }
            RegionKind::HalfPlanePlus { axis, offset } => {
                let p = self.local_pattern(c, radius);
                out.extend([pattern_tag(p)]);
                if p == LocalPattern::Mixed {
                    out.extend([c[*axis] - offset]);
                }
            }
            RegionKind::HalfPlaneMinus { axis, offset } => {
                let p = self.local_pattern(c, radius);
                out.extend([pattern_tag(p)]);
                if p == LocalPattern::Mixed {
                    out.extend([c[*axis] + offset]);
                }
            }
            RegionKind::Intersection(parts) => {
                out.extend([6]);
                for p in parts {
                    p.local_class(c, radius, out);
                }
            }
        }
    }
}

fn prec_origin(c: &[i32]) -> bool {
    lex_cmp_raw(c, &vec![0; c.len()]) != Ordering::Greater
}

/// An immutable region: a set description cut off at an L1 window around
/// the origin. Points farther than `window_radius` are treated as absent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    dim: usize,
    kind: RegionKind,
    window_radius: u32,
}

impl Region {
    pub fn new(dim: usize, kind: RegionKind, window_radius: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::usage("dimension must be >= 1"));
        }
        kind.validate(dim)?;
        Ok(Self {
            dim,
            kind,
            window_radius,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &RegionKind {
        &self.kind
    }

    pub fn window_radius(&self) -> u32 {
        self.window_radius
    }

    pub fn with_window(&self, window_radius: u32) -> Region {
        Region {
            window_radius,
            ..self.clone()
        }
    }

    pub fn contains(&self, v: &LatticePoint) -> Result<bool> {
        self.check_dim(v)?;
        Ok(self.contains_raw(v.coords()))
    }

    pub(crate) fn contains_raw(&self, c: &[i32]) -> bool {
        let norm: u64 = c.iter().map(|x| x.unsigned_abs() as u64).sum();
        norm <= self.window_radius as u64 && self.kind.contains_raw(c)
    }

    /// Unit neighbors of `v` inside the region, ascending in lexicographic order.
    pub fn neighbors(&self, v: &LatticePoint) -> Result<Vec<LatticePoint>> {
        self.check_dim(v)?;
        Ok(unit_offsets(self.dim)
            .into_iter()
            .map(|(axis, delta)| v.offset(axis, delta))
            .filter(|u| self.contains_raw(u.coords()))
            .collect())
    }

    fn check_dim(&self, v: &LatticePoint) -> Result<()> {
        if v.dim() != self.dim {
            return Err(Error::usage(format!(
                "dimension mismatch: region is {}-dimensional, point is {}-dimensional",
                self.dim,
                v.dim()
            )));
        }
        Ok(())
    }
}

/// The 2d unit steps `(axis, ±1)` in ascending lexicographic order of `v + step`:
/// `-e_d, …, -e_1, +e_1, …, +e_d`.
pub(crate) fn unit_offsets(dim: usize) -> Vec<(usize, i32)> {
    let mut out = Vec::with_capacity(2 * dim);
    for axis in (0..dim).rev() {
        out.push((axis, -1));
    }
    for axis in 0..dim {
        out.push((axis, 1));
    }
    out
}

/// Aspect ratios `a` of a rectangular box `B_{an}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeVector(Vec<f64>);

impl ShapeVector {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::usage("shape vector needs at least one entry"));
        }
        if let Some(bad) = a.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::usage(format!(
                "shape entries must be finite and > 0, got {bad}"
            )));
        }
        Ok(Self(a))
    }

    pub fn cube(dim: usize) -> Self {
        Self(vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }
}

/// Face weights `A_j = ∏_{k≠j} 2a_k` and their total.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeCoefficients {
    pub faces: Vec<f64>,
    pub total: f64,
}

pub fn shape_coefficients(a: &ShapeVector) -> ShapeCoefficients {
    let faces: Vec<f64> = (0..a.dim())
        .map(|j| {
            a.0.iter()
                .enumerate()
                .filter(|(k, _)| *k != j)
                .map(|(_, x)| 2.0 * x)
                .product()
        })
        .collect();
    let total = faces.iter().sum();
    ShapeCoefficients { faces, total }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(c: &[i32]) -> LatticePoint {
        LatticePoint::from(c)
    }

    #[test]
    fn lex_examples() {
        assert_eq!(lex_compare(&p(&[0, 0]), &p(&[0, 0])).unwrap(), Ordering::Equal);
        assert_eq!(lex_compare(&p(&[5, -1]), &p(&[0, 0])).unwrap(), Ordering::Less);
        assert_eq!(lex_compare(&p(&[-3, 0]), &p(&[0, 0])).unwrap(), Ordering::Less);
        assert!(lex_compare(&p(&[0]), &p(&[0, 0])).is_err());
    }

    #[test]
    fn region_examples() {
        let prec = Region::new(2, RegionKind::PrecOrigin, 10).unwrap();
        assert!(prec.contains(&p(&[0, 0])).unwrap());
        assert!(!prec.contains(&p(&[1, 0])).unwrap());
        let even = Region::new(2, RegionKind::PrecOriginEven, 10).unwrap();
        assert!(even.contains(&p(&[1, 0])).unwrap());
        assert!(!even.contains(&p(&[1, 1])).unwrap());
        assert!(prec.contains(&p(&[0, 0, 0])).is_err());
    }

    #[test]
    fn half_planes_and_window() {
        let plus = Region::new(2, RegionKind::HalfPlanePlus { axis: 1, offset: 2 }, 5).unwrap();
        assert!(plus.contains(&p(&[0, 2])).unwrap());
        assert!(!plus.contains(&p(&[0, 3])).unwrap());
        let minus = Region::new(2, RegionKind::HalfPlaneMinus { axis: 0, offset: 1 }, 5).unwrap();
        assert!(minus.contains(&p(&[-1, 0])).unwrap());
        assert!(!minus.contains(&p(&[-2, 0])).unwrap());
        // window cutoff
        assert!(!plus.contains(&p(&[-4, -2])).unwrap());
        assert!(Region::new(2, RegionKind::HalfPlanePlus { axis: 2, offset: 0 }, 5).is_err());
    }

    #[test]
    fn neighbor_examples() {
        let full = Region::new(2, RegionKind::FullLattice, 5).unwrap();
        assert_eq!(
            full.neighbors(&p(&[0, 0])).unwrap(),
            vec![p(&[0, -1]), p(&[-1, 0]), p(&[1, 0]), p(&[0, 1])]
        );
        let prec = Region::new(2, RegionKind::PrecOrigin, 5).unwrap();
        assert_eq!(prec.neighbors(&p(&[0, 0])).unwrap(), vec![p(&[0, -1]), p(&[-1, 0])]);
        let line = Region::new(1, RegionKind::FullLattice, 5).unwrap();
        assert_eq!(line.neighbors(&p(&[0])).unwrap(), vec![p(&[-1]), p(&[1])]);
    }

    #[test]
    fn shape_examples() {
        let c = shape_coefficients(&ShapeVector::new(vec![1.0, 1.0]).unwrap());
        assert_eq!((c.faces, c.total), (vec![2.0, 2.0], 4.0));
        let c = shape_coefficients(&ShapeVector::cube(3));
        assert_eq!((c.faces, c.total), (vec![4.0, 4.0, 4.0], 12.0));
        let c = shape_coefficients(&ShapeVector::new(vec![1.0, 2.0]).unwrap());
        assert_eq!((c.faces, c.total), (vec![4.0, 2.0], 6.0));
        assert!(ShapeVector::new(vec![1.0, 0.0]).is_err());
        assert!(ShapeVector::new(vec![-1.0]).is_err());
    }

    fn point(dim: usize) -> impl Strategy<Value = LatticePoint> {
        prop::collection::vec(-6i32..=6, dim).prop_map(LatticePoint)
    }

    proptest! {
        #[test]
        fn lex_is_total_order((u, v, w) in (1usize..4).prop_flat_map(|d| (point(d), point(d), point(d)))) {
            let uv = lex_compare(&u, &v).unwrap();
            prop_assert_eq!(uv.reverse(), lex_compare(&v, &u).unwrap());
            prop_assert_eq!(uv == Ordering::Equal, u == v);
            if uv != Ordering::Greater && lex_compare(&v, &w).unwrap() != Ordering::Greater {
                prop_assert_ne!(lex_compare(&u, &w).unwrap(), Ordering::Greater);
            }
        }

        #[test]
        fn prec_origin_partitions(v in (1usize..4).prop_flat_map(point)) {
            let r = Region::new(v.dim(), RegionKind::PrecOrigin, 100).unwrap();
            let after = lex_compare(&LatticePoint::origin(v.dim()), &v).unwrap() == Ordering::Less;
            prop_assert!(r.contains(&v).unwrap() ^ after);
        }

        #[test]
        fn every_edge_has_one_even_end((v, axis) in (1usize..5).prop_flat_map(|d| (point(d), 0..d))) {
            let u = v.offset(axis, 1);
            prop_assert!(v.is_even() ^ u.is_even());
        }

        #[test]
        fn neighbors_sorted_and_bounded(v in (1usize..4).prop_flat_map(point), kind in 0usize..3) {
            let kind = [RegionKind::FullLattice, RegionKind::PrecOrigin, RegionKind::PrecOriginEven][kind].clone();
            let r = Region::new(v.dim(), kind, 100).unwrap();
            let ns = r.neighbors(&v).unwrap();
            prop_assert!(ns.len() <= 2 * v.dim());
            for pair in ns.windows(2) {
                prop_assert_eq!(lex_compare(&pair[0], &pair[1]).unwrap(), Ordering::Less);
            }
        }

        #[test]
        fn shape_coefficients_permute(a in prop::collection::vec(0.1f64..5.0, 1..5), seed in any::<u64>()) {
            let n = a.len();
            let perm: Vec<usize> = {
                let mut idx: Vec<usize> = (0..n).collect();
                let mut s = seed;
                for i in (1..n).rev() {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    idx.swap(i, (s >> 33) as usize % (i + 1));
                }
                idx
            };
            let base = shape_coefficients(&ShapeVector::new(a.clone()).unwrap());
            let permuted = shape_coefficients(&ShapeVector::new(perm.iter().map(|&i| a[i]).collect()).unwrap());
            for (j, &i) in perm.iter().enumerate() {
                prop_assert!((permuted.faces[j] - base.faces[i]).abs() <= 1e-12 * base.faces[i]);
            }
            prop_assert!((permuted.total - base.total).abs() <= 1e-12 * base.total);
        }

        #[test]
        fn local_pattern_agrees_with_membership(
            c in prop::collection::vec(-5i32..=5, 2),
            radius in 0i64..4,
            kind in 0usize..5,
        ) {
            let kind = [
                RegionKind::PrecOrigin,
                RegionKind::PrecOriginEven,
                RegionKind::HalfPlanePlus { axis: 0, offset: 1 },
                RegionKind::HalfPlaneMinus { axis: 1, offset: 2 },
                RegionKind::Intersection(vec![RegionKind::PrecOriginEven, RegionKind::HalfPlanePlus { axis: 1, offset: 2 }]),
            ][kind].clone();
            let pattern = kind.local_pattern(&c, radius);
            let r = radius as i32;
            for dx in -r..=r {
                for dy in -(r - dx.abs())..=(r - dx.abs()) {
                    let w = [c[0] + dx, c[1] + dy];
                    let inside = kind.contains_raw(&w);
                    match pattern {
                        LocalPattern::All => prop_assert!(inside),
                        LocalPattern::Empty => prop_assert!(!inside),
                        LocalPattern::OddOnly => prop_assert_eq!(inside, !coord_sum_is_even(&w)),
                        LocalPattern::Mixed => {}
                    }
                }
            }
        }
    }
}
