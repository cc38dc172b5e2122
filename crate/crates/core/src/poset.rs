//! Embedded posets under the dominance order.
//!
//! Every element of a [`Poset`] is a point of the hypergrid `[0, m-1]^d` and
//! `x ⪯ y` holds iff `x_i <= y_i` in every dimension. Element ids are the
//! 0-based positions in the point list.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Upper bound on the number of elements [`hypergrid`] will materialize.
pub const MAX_GRID_ELEMENTS: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridPoint(Vec<u32>);

impl GridPoint {
    pub fn new(coords: Vec<u32>) -> Self {
        GridPoint(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<u32> {
        self.0
    }

    /// Componentwise `<=`. Callers must have checked the dimensions agree.
    pub fn dominated_by(&self, other: &GridPoint) -> bool {
        debug_assert_eq!(self.0.len(), other.0.len());
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `self ⪯ other` and `self != other`.
    pub fn strictly_below(&self, other: &GridPoint) -> bool {
        self != other && self.dominated_by(other)
    }

    /// Componentwise maximum.
    pub fn join(&self, other: &GridPoint) -> GridPoint {
        GridPoint(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| *a.max(b))
                .collect(),
        )
    }
}

impl From<Vec<u32>> for GridPoint {
    fn from(coords: Vec<u32>) -> Self {
        GridPoint(coords)
    }
}

impl fmt::Display for GridPoint {
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

/// Dominance test with a dimension check.
pub fn dominance_leq(x: &GridPoint, y: &GridPoint) -> Result<bool> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    Ok(x.dominated_by(y))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poset {
    dim: usize,
    side: u32,
    points: Vec<GridPoint>,
}

impl Poset {
    /// Validates dimensions, coordinate range and distinctness.
    pub fn new(dim: usize, side: u32, points: Vec<GridPoint>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if side == 0 {
            return Err(Error::InvalidParameter(
                "side length must be positive".into(),
            ));
        }
        let mut seen: HashMap<&GridPoint, usize> = HashMap::with_capacity(points.len());
        for (id, p) in points.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
            if let Some(&c) = p.coords().iter().find(|&&c| c >= side) {
                return Err(Error::CoordinateOutOfRange {
                    value: c as u64,
                    side: side as u64,
                });
            }
            if let Some(prev) = seen.insert(p, id) {
                return Err(Error::DuplicatePoint(prev, id));
            }
        }
        Ok(Poset { dim, side, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> u32 {
        self.side
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[GridPoint] {
        &self.points
    }

    pub fn point(&self, id: usize) -> &GridPoint {
        &self.points[id]
    }

    /// `u ⪯ v` for element ids.
    pub fn leq(&self, u: usize, v: usize) -> bool {
        self.points[u].dominated_by(&self.points[v])
    }

    /// `u ≺ v` for element ids.
    pub fn lt(&self, u: usize, v: usize) -> bool {
        u != v && self.leq(u, v)
    }

    pub fn comparable(&self, u: usize, v: usize) -> bool {
        self.leq(u, v) || self.leq(v, u)
    }

    /// Checks that every dimension carries pairwise-distinct coordinates.
    pub fn check_canonical(&self) -> Result<()> {
        for dim in 0..self.dim {
            let mut seen = vec![false; self.side as usize];
            for p in &self.points {
                let c = p.coords()[dim];
                if std::mem::replace(&mut seen[c as usize], true) {
                    return Err(Error::NotCanonical { dim, value: c });
                }
            }
        }
        Ok(())
    }

    pub fn is_canonical(&self) -> bool {
        self.check_canonical().is_ok()
    }

    /// All pairs `(u, v)` with `u ≺ v`, computed on demand.
    pub fn comparable_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |u| (0..n).filter(move |&v| self.lt(u, v)).map(move |v| (u, v)))
    }
}

/// Strict comparability pairs `(u, v)`, `u ≺ v`, sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Relation {
    pairs: Vec<(usize, usize)>,
}

impl Relation {
    pub fn from_pairs(mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        Relation { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.pairs.binary_search(&(u, v)).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }
}

/// The hypergrid `[m]^d`; elements are listed lexicographically, so for
/// `d = 1` the id of an element equals its coordinate.
pub fn hypergrid(m: u32, d: usize) -> Result<Poset> {
    if m == 0 || d == 0 {
        return Err(Error::InvalidParameter(format!(
            "hypergrid needs m >= 1 and d >= 1, got m={m}, d={d}"
        )));
    }
    let count = u32::try_from(d)
        .ok()
        .and_then(|d32| (m as u64).checked_pow(d32))
        .filter(|&c| c <= MAX_GRID_ELEMENTS)
        .ok_or(Error::GridTooLarge { m: m as u64, d })?;
    let mut points = Vec::with_capacity(count as usize);
    let mut cur = vec![0u32; d];
    for _ in 0..count {
        points.push(GridPoint(cur.clone()));
        for c in cur.iter_mut().rev() {
            *c += 1;
            if *c < m {
                break;
            }
            *c = 0;
        }
    }
    Poset::new(d, m, points)
}

/// Rank-transforms every dimension so coordinates become pairwise distinct
/// (the result lives in `[0, n-1]^d`). Ties in a dimension are ordered by
/// the full coordinate vector, lexicographically. The comparability of every
/// pair that shared a coordinate is re-checked; all other pairs are strictly
/// ordered in each dimension and keep their order under any rank transform.
#[allow(clippy::needless_range_loop)]
pub fn canonicalize_embedding(p: &Poset) -> Result<Poset> {
    let n = p.len();
    let side = u32::try_from(n.max(1))
        .map_err(|_| Error::InvalidParameter(format!("{n} elements do not fit a u32 side")))?;
    let mut coords = vec![vec![0u32; p.dim()]; n];
    let mut ids: Vec<usize> = (0..n).collect();
    for dim in 0..p.dim() {
        ids.sort_by(|&a, &b| {
            let (pa, pb) = (p.point(a), p.point(b));
            pa.coords()[dim]
                .cmp(&pb.coords()[dim])
                .then_with(|| pa.cmp(pb))
        });
        for (rank, &id) in ids.iter().enumerate() {
            coords[id][dim] = rank as u32;
        }
    }
    let out = Poset::new(p.dim(), side, coords.into_iter().map(GridPoint).collect())?;

    for dim in 0..p.dim() {
        let mut groups: HashMap<u32, Vec<usize>> = HashMap::new();
        for id in 0..n {
            groups
                .entry(p.point(id).coords()[dim])
                .or_default()
                .push(id);
        }
        for group in groups.values().filter(|g| g.len() > 1) {
            for (i, &a) in group.iter().enumerate() {
                for &b in &group[i + 1..] {
                    if p.leq(a, b) != out.leq(a, b) || p.leq(b, a) != out.leq(b, a) {
                        return Err(Error::TieBreak(a.min(b), a.max(b)));
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn transitive_closure(p: &Poset) -> Relation {
    Relation {
        pairs: p.comparable_pairs().collect(),
    }
}
