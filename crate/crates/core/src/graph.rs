//! Directed graphs over original poset elements plus Steiner vertices.
//!
//! Vertex ids `0..n` are the original elements (same ids as the poset);
//! Steiner vertices follow. Every original vertex carries grid coordinates;
//! a Steiner vertex may lack them (for instance after coordinates from a
//! different embedding were stripped).

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::poset::{GridPoint, Poset};

pub type VertexId = usize;

/// Distance marker for vertices a BFS did not reach.
pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpannerGraph {
    dim: usize,
    originals: Vec<GridPoint>,
    steiners: Vec<Option<GridPoint>>,
    edges: Vec<(VertexId, VertexId)>,
    index: HashMap<GridPoint, VertexId>,
}

impl SpannerGraph {
    /// Builds a graph, sorting and deduplicating the edges.
    ///
    /// Rejects self-loops, dangling ids, dimension mismatches and coordinate
    /// vectors shared by two vertices.
    pub fn new(
        dim: usize,
        originals: Vec<GridPoint>,
        steiners: Vec<Option<GridPoint>>,
        mut edges: Vec<(VertexId, VertexId)>,
    ) -> Result<Self> {
        let total = originals.len() + steiners.len();
        let mut index = HashMap::with_capacity(total);
        let coords = originals
            .iter()
            .map(Some)
            .chain(steiners.iter().map(Option::as_ref))
            .enumerate();
        for (id, c) in coords {
            let Some(c) = c else { continue };
            if c.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.dim(),
                });
            }
            if let Some(prev) = index.insert(c.clone(), id) {
                return Err(Error::InvalidSpanner(format!(
                    "vertices {prev} and {id} share coordinates {c}"
                )));
            }
        }
        for &(u, v) in &edges {
            if u >= total || v >= total {
                return Err(Error::UnknownVertex(u.max(v)));
            }
            if u == v {
                return Err(Error::InvalidSpanner(format!("self-loop at vertex {u}")));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(SpannerGraph {
            dim,
            originals,
            steiners,
            edges,
            index,
        })
    }

    /// A graph whose originals are the elements of `poset`.
    pub fn over_poset(
        poset: &Poset,
        steiners: Vec<Option<GridPoint>>,
        edges: Vec<(VertexId, VertexId)>,
    ) -> Result<Self> {
        Self::new(poset.dim(), poset.points().to_vec(), steiners, edges)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn original_count(&self) -> usize {
        self.originals.len()
    }

    pub fn steiner_count(&self) -> usize {
        self.steiners.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.originals.len() + self.steiners.len()
    }

    pub fn originals(&self) -> &[GridPoint] {
        &self.originals
    }

    pub fn steiners(&self) -> &[Option<GridPoint>] {
        &self.steiners
    }

    /// Edges sorted by `(tail, head)` id.
    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_steiner(&self, v: VertexId) -> bool {
        v >= self.originals.len()
    }

    pub fn coord(&self, v: VertexId) -> Option<&GridPoint> {
        if v < self.originals.len() {
            Some(&self.originals[v])
        } else {
            self.steiners.get(v - self.originals.len())?.as_ref()
        }
    }

    pub fn vertex_at(&self, p: &GridPoint) -> Option<VertexId> {
        self.index.get(p).copied()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.edges.binary_search(&(u, v)).is_ok()
    }

    pub fn all_coordinated(&self) -> bool {
        self.steiners.iter().all(Option::is_some)
    }

    /// Same graph with every Steiner coordinate dropped.
    pub fn without_steiner_coords(&self) -> SpannerGraph {
        let mut index = self.index.clone();
        index.retain(|_, v| *v < self.originals.len());
        SpannerGraph {
            dim: self.dim,
            originals: self.originals.clone(),
            steiners: vec![None; self.steiners.len()],
            edges: self.edges.clone(),
            index,
        }
    }

    /// The same edges over the elements of another embedding of the same
    /// poset. Steiner coordinates belong to the old embedding and are dropped.
    pub fn reembed(&self, poset: &Poset) -> Result<SpannerGraph> {
        if poset.len() != self.originals.len() {
            return Err(Error::IdMismatch(format!(
                "spanner has {} originals, poset has {} elements",
                self.originals.len(),
                poset.len()
            )));
        }
        SpannerGraph::over_poset(poset, vec![None; self.steiners.len()], self.edges.clone())
    }

    /// Checks that the original vertices are exactly the elements of `poset`.
    pub fn check_matches(&self, poset: &Poset) -> Result<()> {
        if self.originals.len() != poset.len() {
            return Err(Error::IdMismatch(format!(
                "spanner has {} originals, poset has {} elements",
                self.originals.len(),
                poset.len()
            )));
        }
        if self.dim != poset.dim() {
            return Err(Error::IdMismatch(format!(
                "spanner dimension {} differs from poset dimension {}",
                self.dim,
                poset.dim()
            )));
        }
        if let Some(id) = (0..poset.len()).find(|&i| &self.originals[i] != poset.point(i)) {
            return Err(Error::IdMismatch(format!(
                "vertex {id} sits at {} but element {id} is {}",
                self.originals[id],
                poset.point(id)
            )));
        }
        Ok(())
    }

    /// Out-neighbour lists, each sorted by id.
    pub fn out_adjacency(&self) -> Vec<Vec<VertexId>> {
        let mut adj = vec![Vec::new(); self.vertex_count()];
        for &(u, v) in &self.edges {
            adj[u].push(v);
        }
        adj
    }

    /// In-neighbour lists, each sorted by id.
    pub fn in_adjacency(&self) -> Vec<Vec<VertexId>> {
        let mut adj = vec![Vec::new(); self.vertex_count()];
        for &(u, v) in &self.edges {
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Edges ordered lexicographically by (tail coordinates, head coordinates).
    /// Vertices without coordinates sort after all coordinated ones, by id.
    pub fn edges_in_coordinate_order(&self) -> Vec<(VertexId, VertexId)> {
        let key = |v: VertexId| (self.coord(v).is_none(), self.coord(v), v);
        let mut out = self.edges.clone();
        out.sort_by(|a, b| {
            key(a.0)
                .cmp(&key(b.0))
                .then_with(|| key(a.1).cmp(&key(b.1)))
        });
        out
    }

    /// Graphviz rendering; originals are boxes, Steiner vertices ellipses.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph spanner {\n  rankdir=BT;\n");
        for v in 0..self.vertex_count() {
            let label = match self.coord(v) {
                Some(c) => format!("{} {}", v + 1, c),
                None => format!("{}", v + 1),
            };
            let shape = if self.is_steiner(v) { "ellipse" } else { "box" };
            let _ = writeln!(out, "  v{} [label=\"{label}\", shape={shape}];", v + 1);
        }
        for (u, v) in self.edges_in_coordinate_order() {
            let _ = writeln!(out, "  v{} -> v{};", u + 1, v + 1);
        }
        out.push_str("}\n");
        out
    }
}

/// Hop distances from `src`; unreached vertices hold [`UNREACHABLE`].
pub fn bfs_distances(adj: &[Vec<VertexId>], src: VertexId) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; adj.len()];
    let mut queue = VecDeque::new();
    dist[src] = 0;
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v] == UNREACHABLE {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}
