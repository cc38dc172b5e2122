//! Checking candidate graphs against the Steiner k-TC-spanner conditions,
//! and moving Steiner vertices onto the grid.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{bfs_distances, SpannerGraph, VertexId, UNREACHABLE};
use crate::poset::{hypergrid, GridPoint, Poset};

/// Reports list at most this many violations; the total is always counted.
pub const MAX_REPORTED_VIOLATIONS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// A comparable pair is more than `k` hops apart (or disconnected).
    TooFar,
    /// A pair that is not ordered `u ⪯ v` is connected by a path.
    ForbiddenReach,
    /// An edge between coordinated vertices that does not go strictly up.
    BadEdge,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub kind: ViolationKind,
    pub pair: (VertexId, VertexId),
    /// Hop distance witnessing the violation; `None` is infinite.
    pub distance: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub k: u32,
    /// Sorted, truncated to [`MAX_REPORTED_VIOLATIONS`].
    pub violations: Vec<Violation>,
    pub total_violations: usize,
}

impl VerificationReport {
    pub fn is_valid(&self) -> bool {
        self.total_violations == 0
    }
}

fn finite(d: u32) -> Option<u32> {
    (d != UNREACHABLE).then_some(d)
}

/// Runs a BFS from every original vertex and checks both reachability
/// conditions for all ordered pairs of originals, plus the direction of every
/// edge whose endpoints carry coordinates. Cost is `O(n·(V + E))`.
pub fn is_steiner_ktc(h: &SpannerGraph, g: &Poset, k: u32) -> Result<VerificationReport> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "stretch k must be at least 1".into(),
        ));
    }
    h.check_matches(g)?;
    let n = g.len();
    let adj = h.out_adjacency();

    let per_source: Vec<(Vec<Violation>, usize)> = (0..n)
        .into_par_iter()
        .map(|u| {
            let dist = bfs_distances(&adj, u);
            let mut found = Vec::new();
            let mut counts = [0usize; 2];
            for v in (0..n).filter(|&v| v != u) {
                let d = dist[v];
                let kind = if g.leq(u, v) {
                    if d <= k {
                        continue;
                    }
                    ViolationKind::TooFar
                } else {
                    if d == UNREACHABLE {
                        continue;
                    }
                    ViolationKind::ForbiddenReach
                };
                let slot = &mut counts[(kind == ViolationKind::ForbiddenReach) as usize];
                *slot += 1;
                if *slot <= MAX_REPORTED_VIOLATIONS {
                    found.push(Violation {
                        kind,
                        pair: (u, v),
                        distance: finite(d),
                    });
                }
            }
            (found, counts[0] + counts[1])
        })
        .collect();

    let mut total = 0;
    let mut violations = Vec::new();
    for (found, count) in per_source {
        total += count;
        violations.extend(found);
    }
    for &(a, b) in h.edges() {
        if let (Some(ca), Some(cb)) = (h.coord(a), h.coord(b)) {
            if !ca.strictly_below(cb) {
                total += 1;
                violations.push(Violation {
                    kind: ViolationKind::BadEdge,
                    pair: (a, b),
                    distance: Some(1),
                });
            }
        }
    }
    violations.sort();
    violations.truncate(MAX_REPORTED_VIOLATIONS);
    Ok(VerificationReport {
        k,
        violations,
        total_violations: total,
    })
}

/// For every Steiner vertex, the sorted original vertices that reach it.
pub fn steiner_predecessors(h: &SpannerGraph) -> Vec<Vec<VertexId>> {
    let n = h.original_count();
    let adj = h.out_adjacency();
    let mut prev = vec![Vec::new(); h.steiner_count()];
    for x in 0..n {
        let dist = bfs_distances(&adj, x);
        for (s, list) in prev.iter_mut().enumerate() {
            if dist[n + s] != UNREACHABLE {
                list.push(x);
            }
        }
    }
    prev
}

/// Componentwise maximum of the given elements' coordinates.
pub fn replacement_point(g: &Poset, prev: &[VertexId]) -> Option<GridPoint> {
    let (first, rest) = prev.split_first()?;
    Some(
        rest.iter()
            .fold(g.point(*first).clone(), |acc, &x| acc.join(g.point(x))),
    )
}

/// Moves every Steiner vertex of a valid Steiner k-TC-spanner onto the grid
/// of `g`.
///
/// Steiner vertices no original reaches are dropped first. Each remaining
/// Steiner vertex `s` is placed at the componentwise maximum of the
/// originals that reach it. A Steiner vertex landing on an original element,
/// or on the same point as another, is merged with it; resulting self-loops
/// and parallel edges are dropped, so the edge count never grows.
pub fn replace_steiner(h: &SpannerGraph, g: &Poset, k: u32) -> Result<SpannerGraph> {
    let report = is_steiner_ktc(h, g, k)?;
    if let Some(v) = report.violations.first() {
        return Err(Error::InvalidSpanner(format!(
            "not a Steiner {k}-TC-spanner: {:?} at ({}, {}), {} violation(s) in total",
            v.kind,
            v.pair.0 + 1,
            v.pair.1 + 1,
            report.total_violations
        )));
    }

    let n = g.len();
    // A path from an original to a reachable Steiner vertex only visits
    // reachable vertices, so dropping the unreachable ones leaves every other
    // predecessor set unchanged and one pass reaches the fixpoint.
    let prev = steiner_predecessors(h);
    let targets: Vec<Option<GridPoint>> = prev.iter().map(|p| replacement_point(g, p)).collect();

    let originals: std::collections::HashMap<&GridPoint, VertexId> =
        g.points().iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut new_steiners: BTreeMap<GridPoint, VertexId> = BTreeMap::new();
    for t in targets.iter().flatten() {
        if !originals.contains_key(t) {
            new_steiners.entry(t.clone()).or_insert(0);
        }
    }
    for (rank, id) in new_steiners.values_mut().enumerate() {
        *id = n + rank;
    }

    let map = |v: VertexId| -> Option<VertexId> {
        if v < n {
            return Some(v);
        }
        let t = targets[v - n].as_ref()?;
        Some(originals.get(t).copied().unwrap_or_else(|| new_steiners[t]))
    };
    let edges = h
        .edges()
        .iter()
        .filter_map(|&(a, b)| Some((map(a)?, map(b)?)))
        .filter(|(a, b)| a != b)
        .collect();
    let steiners = new_steiners.into_keys().map(Some).collect();
    SpannerGraph::over_poset(g, steiners, edges)
}

/// Turns a Steiner k-TC-spanner of the hypergrid `[m]^d` into an ordinary
/// one with no more edges.
pub fn grid_spanner_from_steiner(
    h: &SpannerGraph,
    m: u32,
    d: usize,
    k: u32,
) -> Result<SpannerGraph> {
    let grid = hypergrid(m, d)?;
    let out = replace_steiner(h, &grid, k)?;
    debug_assert_eq!(out.steiner_count(), 0);
    Ok(out)
}
