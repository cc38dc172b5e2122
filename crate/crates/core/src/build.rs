//! Sparse Steiner 2-TC-spanners of embedded posets.
//!
//! Coordinates are read as `ℓ`-bit strings, `ℓ = ⌈log2 n⌉`. For a value `t`
//! and `0 <= i < ℓ`, the prefix point `p_i(t)` keeps the top `i` bits of `t`,
//! sets the next bit and clears the rest. Every element is joined to each
//! comparable point whose coordinates are prefix points of its own
//! coordinates, which gives at most `n·ℓ^d` edges. For `x ≺ y` the point
//! built from the longest common prefixes of `x_i` and `y_i` sits between
//! them and is adjacent to both, so every comparable pair is two hops apart
//! and the relay point is found with `O(d)` bit operations.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{SpannerGraph, VertexId};
use crate::poset::{GridPoint, Poset, Relation};

/// `⌈log2 n⌉`, with the convention that one element still uses one bit.
pub fn prefix_bits(n: usize) -> u32 {
    if n <= 2 {
        1
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

fn check_width(t: u64, ell: u32) -> Result<()> {
    if ell == 0 || ell >= 64 {
        return Err(Error::InvalidParameter(format!(
            "bit length {ell} must lie in 1..=63"
        )));
    }
    if t >> ell != 0 {
        return Err(Error::PrefixValue { t, ell });
    }
    Ok(())
}

/// The `ℓ`-bit value whose top `i` bits are those of `t`, followed by a one
/// and `ℓ - i - 1` zeros.
pub fn prefix_point(t: u64, i: u32, ell: u32) -> Result<u64> {
    check_width(t, ell)?;
    if i >= ell {
        return Err(Error::PrefixIndex { i, ell });
    }
    let low = ell - i;
    Ok(((t >> low) << low) | (1 << (low - 1)))
}

/// Length of the longest common prefix of the `ℓ`-bit strings of `a` and `b`.
pub fn common_prefix_len(a: u64, b: u64, ell: u32) -> u32 {
    ell - (64 - (a ^ b).leading_zeros())
}

/// `p_i(a)` where `i` is the common prefix length of `a` and `b`.
pub fn lcp(a: u64, b: u64, ell: u32) -> Result<u64> {
    check_width(a, ell)?;
    check_width(b, ell)?;
    prefix_point(a, common_prefix_len(a, b, ell), ell)
}

/// The relay point between `x` and `y`: per dimension, the prefix point of
/// the longest common prefix. Requires `x_i < y_i` in every dimension, which
/// holds for every strictly ordered pair of a canonical embedding.
pub fn lcp_point(x: &GridPoint, y: &GridPoint, ell: u32) -> Result<GridPoint> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    let mut out = Vec::with_capacity(x.dim());
    for (dim, (&a, &b)) in x.coords().iter().zip(y.coords()).enumerate() {
        if a == b {
            return Err(Error::EqualCoordinate { dim });
        }
        if a > b {
            return Err(Error::InvalidParameter(format!("{x} is not below {y}")));
        }
        out.push(lcp(a as u64, b as u64, ell)? as u32);
    }
    Ok(GridPoint::new(out))
}

/// Builds the prefix-point Steiner 2-TC-spanner of a canonical poset.
///
/// A candidate point equal to an original element is that element; equal
/// candidates of different elements are one Steiner vertex. Steiner
/// vertices are numbered in lexicographic order of their coordinates, so
/// the output depends only on the input poset.
pub fn build_steiner_2tc(p: &Poset) -> Result<SpannerGraph> {
    p.check_canonical()?;
    let n = p.len();
    let ell = prefix_bits(n);
    let d = p.dim();
    if n <= 1 {
        return SpannerGraph::over_poset(p, vec![], vec![]);
    }

    let mut index: HashMap<GridPoint, VertexId> = p
        .points()
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, c)| (c, i))
        .collect();
    let mut new_points: Vec<GridPoint> = Vec::new();
    let mut edges: Vec<(VertexId, VertexId)> = Vec::with_capacity(n * (ell as usize).pow(d as u32));

    let mut up: Vec<Vec<u32>> = vec![Vec::new(); d];
    let mut down: Vec<Vec<u32>> = vec![Vec::new(); d];
    for x in 0..n {
        let xc = p.point(x).coords();
        for dim in 0..d {
            up[dim].clear();
            down[dim].clear();
            for i in 0..ell {
                let c = prefix_point(xc[dim] as u64, i, ell)? as u32;
                if c >= xc[dim] {
                    up[dim].push(c);
                }
                if c <= xc[dim] {
                    down[dim].push(c);
                }
            }
        }
        // A candidate is comparable to x iff it moves up in every dimension
        // or down in every dimension; mixed tuples are skipped.
        for (lists, upward) in [(&up, true), (&down, false)] {
            for_each_tuple(lists, |coords| {
                if coords == xc {
                    return;
                }
                let point = GridPoint::new(coords.to_vec());
                let next = n + new_points.len();
                let v = *index.entry(point.clone()).or_insert_with(|| {
                    new_points.push(point);
                    next
                });
                edges.push(if upward { (x, v) } else { (v, x) });
            });
        }
    }
    debug_assert!(edges.len() <= n * (ell as usize).pow(d as u32));

    // Renumber Steiner vertices by coordinates.
    let mut order: Vec<usize> = (0..new_points.len()).collect();
    order.sort_by(|&a, &b| new_points[a].cmp(&new_points[b]));
    let mut remap = vec![0; new_points.len()];
    for (rank, &old) in order.iter().enumerate() {
        remap[old] = n + rank;
    }
    let relabel = |v: VertexId| if v < n { v } else { remap[v - n] };
    let edges = edges
        .into_iter()
        .map(|(u, v)| (relabel(u), relabel(v)))
        .collect();
    let steiners = order
        .into_iter()
        .map(|i| Some(new_points[i].clone()))
        .collect();
    SpannerGraph::over_poset(p, steiners, edges)
}

fn for_each_tuple(lists: &[Vec<u32>], mut f: impl FnMut(&[u32])) {
    if lists.iter().any(Vec::is_empty) {
        return;
    }
    let mut pos = vec![0usize; lists.len()];
    let mut cur: Vec<u32> = lists.iter().map(|l| l[0]).collect();
    loop {
        f(&cur);
        let mut dim = lists.len();
        loop {
            if dim == 0 {
                return;
            }
            dim -= 1;
            pos[dim] += 1;
            if pos[dim] < lists[dim].len() {
                cur[dim] = lists[dim][pos[dim]];
                break;
            }
            pos[dim] = 0;
            cur[dim] = lists[dim][0];
        }
    }
}

/// A path of at most two edges from `x` to `y` in a spanner produced by
/// [`build_steiner_2tc`]. The relay is computed from coordinates and looked
/// up by coordinate; the graph is never searched.
pub fn path_query(s: &SpannerGraph, x: VertexId, y: VertexId) -> Result<Vec<VertexId>> {
    let n = s.original_count();
    for v in [x, y] {
        if v >= n {
            return Err(Error::UnknownVertex(v));
        }
    }
    let (xc, yc) = (&s.originals()[x], &s.originals()[y]);
    if !xc.strictly_below(yc) {
        return Err(Error::NotOrdered(x, y));
    }
    let z = lcp_point(xc, yc, prefix_bits(n))?;
    let path = if &z == yc || &z == xc {
        vec![x, y]
    } else {
        let relay = s
            .vertex_at(&z)
            .ok_or_else(|| Error::InvalidSpanner(format!("relay point {z} is not a vertex")))?;
        vec![x, relay, y]
    };
    for w in path.windows(2) {
        if !s.has_edge(w[0], w[1]) {
            return Err(Error::MissingEdge(w[0], w[1]));
        }
    }
    Ok(path)
}

/// The standard embedding of `K_{n/2,n/2}` into `[n]^2` (0-based): left
/// vertex `i` at `(i, n/2 - 1 - i)`, right vertex `i` at `(n - 1 - i, n/2 + i)`.
/// Left vertices get ids `0..n/2`, right vertices `n/2..n`.
pub fn bipartite_embedding(n: usize) -> Result<Poset> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::OddSize(n));
    }
    let half = (n / 2) as u32;
    let side = n as u32;
    let left = (0..half).map(|i| GridPoint::new(vec![i, half - 1 - i]));
    let right = (0..half).map(|i| GridPoint::new(vec![side - 1 - i, half + i]));
    Poset::new(2, side, left.chain(right).collect())
}

/// Every left vertex below every right vertex, nothing else.
pub fn complete_bipartite_relation(n: usize) -> Relation {
    let half = n / 2;
    Relation::from_pairs(
        (0..half)
            .flat_map(|l| (half..n).map(move |r| (l, r)))
            .collect(),
    )
}

/// One Steiner hub joining every left vertex of [`bipartite_embedding`] to
/// every right vertex: `n` edges. The hub sits at `(n/2 - 1, n/2)`, above all
/// left points and below all right points.
pub fn bipartite_single_steiner(n: usize) -> Result<SpannerGraph> {
    let poset = bipartite_embedding(n)?;
    let half = n / 2;
    let hub = n;
    let edges = (0..half)
        .map(|l| (l, hub))
        .chain((half..n).map(|r| (hub, r)))
        .collect();
    let hub_point = GridPoint::new(vec![half as u32 - 1, half as u32]);
    SpannerGraph::over_poset(&poset, vec![Some(hub_point)], edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::{canonicalize_embedding, hypergrid, transitive_closure};
    use proptest::prelude::*;

    /// Independent string-based construction of `p_i(t)`.
    fn prefix_point_by_string(t: u64, i: u32, ell: u32) -> u64 {
        let bits = format!("{:0width$b}", t, width = ell as usize);
        let s = format!(
            "{}1{}",
            &bits[..i as usize],
            "0".repeat((ell - i - 1) as usize)
        );
        u64::from_str_radix(&s, 2).unwrap()
    }

    fn lcp_by_string(a: u64, b: u64, ell: u32) -> u64 {
        let (sa, sb) = (
            format!("{:0w$b}", a, w = ell as usize),
            format!("{:0w$b}", b, w = ell as usize),
        );
        let i = sa
            .chars()
            .zip(sb.chars())
            .take_while(|(x, y)| x == y)
            .count() as u32;
        prefix_point_by_string(a, i, ell)
    }

    fn pt(c: &[u32]) -> GridPoint {
        GridPoint::new(c.to_vec())
    }

    #[test]
    fn prefix_point_examples() {
        assert_eq!(prefix_point(0, 0, 2).unwrap(), 2);
        assert_eq!(prefix_point(0, 1, 2).unwrap(), 1);
        assert_eq!(prefix_point(5, 2, 3).unwrap(), 5);
        for (t, i, ell) in [(0, 0, 2), (0, 1, 2), (5, 2, 3)] {
            assert_eq!(
                prefix_point(t, i, ell).unwrap(),
                prefix_point_by_string(t, i, ell)
            );
        }
    }

    #[test]
    fn prefix_point_errors() {
        assert_eq!(
            prefix_point(0, 2, 2),
            Err(Error::PrefixIndex { i: 2, ell: 2 })
        );
        assert_eq!(
            prefix_point(4, 0, 2),
            Err(Error::PrefixValue { t: 4, ell: 2 })
        );
        assert!(matches!(
            prefix_point(0, 0, 0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn prefix_bits_convention() {
        let cases = [
            (1, 1),
            (2, 1),
            (3, 2),
            (4, 2),
            (5, 3),
            (8, 3),
            (9, 4),
            (1024, 10),
            (1025, 11),
        ];
        for (n, ell) in cases {
            assert_eq!(prefix_bits(n), ell, "n = {n}");
        }
    }

    #[test]
    fn lcp_point_examples() {
        assert_eq!(lcp_point(&pt(&[1]), &pt(&[3]), 2).unwrap(), pt(&[2]));
        assert_eq!(lcp_point(&pt(&[0]), &pt(&[1]), 2).unwrap(), pt(&[1]));
        assert_eq!(
            lcp_point(&pt(&[0, 1]), &pt(&[1, 3]), 2).unwrap(),
            pt(&[1, 2])
        );
        assert_eq!(
            lcp_point(&pt(&[0, 1]), &pt(&[0, 3]), 2),
            Err(Error::EqualCoordinate { dim: 0 })
        );
        assert!(lcp_point(&pt(&[2]), &pt(&[1]), 2).is_err());
    }

    #[test]
    fn line_of_four_trace() {
        let p = hypergrid(4, 1).unwrap();
        let s = build_steiner_2tc(&p).unwrap();
        assert_eq!(s.steiner_count(), 0);
        assert_eq!(s.edges(), &[(0, 1), (0, 2), (1, 2), (2, 3)]);

        assert_eq!(path_query(&s, 0, 3).unwrap(), vec![0, 2, 3]);
        assert_eq!(path_query(&s, 0, 1).unwrap(), vec![0, 1]);
        assert_eq!(path_query(&s, 1, 2).unwrap(), vec![1, 2]);
    }

    #[test]
    fn tiny_lines() {
        let s = build_steiner_2tc(&hypergrid(1, 1).unwrap()).unwrap();
        assert_eq!(s.edge_count(), 0);
        let s = build_steiner_2tc(&hypergrid(2, 1).unwrap()).unwrap();
        assert_eq!(s.edges(), &[(0, 1)]);
    }

    #[test]
    fn non_power_of_two_line_uses_points_past_the_end() {
        // ℓ = 2 for three elements; p_1(2) = 3 lies outside [0, 2].
        let s = build_steiner_2tc(&hypergrid(3, 1).unwrap()).unwrap();
        assert_eq!(s.steiners(), &[Some(pt(&[3]))]);
        assert!(s.has_edge(2, 3));
    }

    #[test]
    fn build_rejects_non_canonical_input() {
        assert!(matches!(
            build_steiner_2tc(&hypergrid(2, 2).unwrap()),
            Err(Error::NotCanonical { .. })
        ));
    }

    #[test]
    fn path_query_errors() {
        let s = build_steiner_2tc(&hypergrid(4, 1).unwrap()).unwrap();
        assert_eq!(path_query(&s, 2, 2), Err(Error::NotOrdered(2, 2)));
        assert_eq!(path_query(&s, 3, 1), Err(Error::NotOrdered(3, 1)));
        assert_eq!(path_query(&s, 0, 9), Err(Error::UnknownVertex(9)));

        let p = bipartite_embedding(4).unwrap();
        let s = build_steiner_2tc(&p).unwrap();
        assert_eq!(path_query(&s, 0, 1), Err(Error::NotOrdered(0, 1)));
    }

    #[test]
    fn build_is_deterministic() {
        let p = canonicalize_embedding(&hypergrid(4, 2).unwrap()).unwrap();
        assert_eq!(
            build_steiner_2tc(&p).unwrap(),
            build_steiner_2tc(&p).unwrap()
        );
    }

    #[test]
    fn bipartite_examples() {
        let s = bipartite_single_steiner(4).unwrap();
        assert_eq!(s.vertex_count(), 5);
        assert_eq!(s.edge_count(), 4);
        assert_eq!(s.steiners(), &[Some(pt(&[1, 2]))]);

        let s = bipartite_single_steiner(2).unwrap();
        assert_eq!(s.originals(), &[pt(&[0, 0]), pt(&[1, 1])]);
        assert_eq!(s.edges(), &[(0, 2), (2, 1)]);

        assert_eq!(bipartite_single_steiner(3), Err(Error::OddSize(3)));
        assert_eq!(bipartite_single_steiner(0), Err(Error::OddSize(0)));
    }

    #[test]
    fn bipartite_embedding_realizes_the_complete_bipartite_order() {
        for n in [2, 4, 6, 8, 16, 32] {
            let p = bipartite_embedding(n).unwrap();
            assert!(p.is_canonical());
            assert_eq!(transitive_closure(&p), complete_bipartite_relation(n));
        }
    }

    proptest! {
        #[test]
        fn prefix_point_matches_string_oracle(ell in 1u32..=20, t in any::<u64>(), i in any::<u32>()) {
            let t = t & ((1u64 << ell) - 1);
            let i = i % ell;
            prop_assert_eq!(prefix_point(t, i, ell).unwrap(), prefix_point_by_string(t, i, ell));
        }

        #[test]
        fn lcp_sits_between(ell in 1u32..=20, a in any::<u64>(), b in any::<u64>()) {
            let mask = (1u64 << ell) - 1;
            let (a, b) = (a & mask, b & mask);
            prop_assume!(a != b);
            let (lo, hi) = (a.min(b), a.max(b));
            let z = lcp(lo, hi, ell).unwrap();
            prop_assert_eq!(z, lcp_by_string(lo, hi, ell));
            prop_assert!(lo < z && z <= hi);
            prop_assert_eq!(z, lcp(hi, lo, ell).unwrap());
        }
    }
}
