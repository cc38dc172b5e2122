//! Random posets with prescribed first coordinates, dyadic box partitions,
//! and jump counting.
//!
//! Element `a` of a sampled poset has first coordinate `a` and uniform other
//! coordinates (all 0-based here). With `ℓ = log2 n`, partition `i` cuts a
//! coordinate into `2^i` intervals of length `2^{ℓ−i}`; a point's location
//! `λ` is the 1-based index of its interval. For `d > 2` a partition is a
//! vector `ivec ∈ [ℓ′]^{d−1}`, `ℓ′ = ⌊ℓ/(d−1)⌋`, one entry per coordinate
//! after the first.
//!
//! A jump of partition `ivec` is a pair `a < b` with `p_a` in an odd box
//! `B(jvec)` (all `j_t` odd), `p_b` in `B(jvec + 1)`, and no element
//! strictly between them in either box.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::build::build_steiner_2tc;
use crate::error::{Error, Result};
use crate::graph::{bfs_distances, SpannerGraph, VertexId, UNREACHABLE};
use crate::poset::{canonicalize_embedding, GridPoint, Poset};
use crate::verify::replace_steiner;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomPosetSpec {
    pub n: usize,
    pub d: usize,
    pub seed: u64,
}

/// Trial `trial` of a seed draws from its own ChaCha stream.
fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn sample_from(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<Poset> {
    if n < 2 || d < 2 {
        return Err(Error::InvalidParameter(format!(
            "random posets need n >= 2 and d >= 2, got n={n}, d={d}"
        )));
    }
    let side = u32::try_from(n).map_err(|_| Error::InvalidParameter(format!("n={n} too large")))?;
    let points = (0..side)
        .map(|a| {
            let mut c = Vec::with_capacity(d);
            c.push(a);
            c.extend((1..d).map(|_| rng.random_range(0..side)));
            GridPoint::new(c)
        })
        .collect();
    Poset::new(d, side, points)
}

/// Draws one poset; equivalent to trial 0 of `spec.seed`.
pub fn sample_poset(spec: RandomPosetSpec) -> Result<Poset> {
    sample_trial(spec, 0)
}

pub fn sample_trial(spec: RandomPosetSpec, trial: u64) -> Result<Poset> {
    sample_from(spec.n, spec.d, &mut trial_rng(spec.seed, trial))
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Jump {
    pub a: usize,
    pub b: usize,
    /// Generating partition, 1-based interval levels.
    pub ivec: Vec<u32>,
    /// Odd 1-based box index of `p_a`; `p_b` sits in `jvec + 1`.
    pub jvec: Vec<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct JumpSet {
    /// Sorted; the same `(a, b)` may appear once per generating partition.
    pub jumps: Vec<Jump>,
    /// Every partition in enumeration order with its jump count.
    pub per_partition: Vec<(Vec<u32>, usize)>,
}

impl JumpSet {
    pub fn len(&self) -> usize {
        self.jumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }
}

pub fn log2_exact(n: usize) -> Result<u32> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(n.trailing_zeros())
}

/// `ℓ′`: the largest level usable in every non-first coordinate.
pub fn level_cap(ell: u32, d: usize) -> u32 {
    if d <= 2 {
        ell
    } else {
        ell / (d as u32 - 1)
    }
}

/// All partitions `ivec`, lexicographic.
pub fn partitions(ell: u32, d: usize) -> Vec<Vec<u32>> {
    let cap = level_cap(ell, d);
    let mut out = Vec::new();
    if cap == 0 || d < 2 {
        return out;
    }
    let mut cur = vec![1u32; d - 1];
    loop {
        out.push(cur.clone());
        let mut k = d - 1;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            cur[k] += 1;
            if cur[k] <= cap {
                break;
            }
            cur[k] = 1;
        }
    }
}

/// 1-based interval index of a 0-based coordinate at level `i`.
pub fn location(c: u32, i: u32, ell: u32) -> u32 {
    (c >> (ell - i)) + 1
}

/// Locations of `p` in every non-first coordinate.
fn locations(p: &GridPoint, ivec: &[u32], ell: u32) -> Vec<u32> {
    ivec.iter()
        .zip(&p.coords()[1..])
        .map(|(&i, &c)| location(c, i, ell))
        .collect()
}

/// Parity vector `π`: 0 in odd intervals, 1 in even ones.
pub fn parity(p: &GridPoint, ivec: &[u32], ell: u32) -> Vec<u8> {
    locations(p, ivec, ell)
        .iter()
        .map(|&l| ((l + 1) % 2) as u8)
        .collect()
}

fn check_sampled_form(p: &Poset) -> Result<u32> {
    let ell = log2_exact(p.len())?;
    if p.dim() < 2 {
        return Err(Error::InvalidParameter("jumps need d >= 2".into()));
    }
    if let Some(a) = (0..p.len()).find(|&a| p.point(a).coords()[0] as usize != a) {
        return Err(Error::InvalidParameter(format!(
            "element {} must have first coordinate {}",
            a + 1,
            a + 1
        )));
    }
    if let Some(c) = p
        .points()
        .iter()
        .flat_map(|q| q.coords().iter())
        .find(|&&c| c as usize >= p.len())
    {
        return Err(Error::CoordinateOutOfRange {
            value: *c as u64,
            side: p.len() as u64,
        });
    }
    Ok(ell)
}

/// Jumps of one partition in a single left-to-right pass: within each
/// odd/even box pair, a jump is a lower-box element immediately followed
/// by an upper-box element.
fn jumps_of_partition(p: &Poset, ivec: &[u32], ell: u32) -> Vec<Jump> {
    let mut last: HashMap<Vec<u32>, (usize, bool)> = HashMap::new();
    let mut out = Vec::new();
    for b in 0..p.len() {
        let loc = locations(p.point(b), ivec, ell);
        let upper = loc[0].is_multiple_of(2);
        if loc.iter().any(|&l| (l % 2 == 0) != upper) {
            continue;
        }
        let key: Vec<u32> = loc.iter().map(|&l| if upper { l - 1 } else { l }).collect();
        if let Some(&(a, false)) = last.get(&key) {
            if upper {
                out.push(Jump {
                    a,
                    b,
                    ivec: ivec.to_vec(),
                    jvec: key.clone(),
                });
            }
        }
        last.insert(key, (b, upper));
    }
    out
}

/// Every jump of every partition.
pub fn enumerate_jumps(p: &Poset) -> Result<JumpSet> {
    let ell = check_sampled_form(p)?;
    let parts = partitions(ell, p.dim());
    let found: Vec<Vec<Jump>> = parts
        .par_iter()
        .map(|ivec| jumps_of_partition(p, ivec, ell))
        .collect();
    let per_partition = parts
        .iter()
        .cloned()
        .zip(found.iter().map(Vec::len))
        .collect();
    let mut jumps: Vec<Jump> = found.into_iter().flatten().collect();
    jumps.sort_unstable();
    Ok(JumpSet {
        jumps,
        per_partition,
    })
}

/// The expectation lower bound: `n(ℓ−1)/4` for `d = 2`, otherwise
/// `(ℓ′)^{d−1} n / 2^d − n/4`.
pub fn expected_jumps_lower_bound(n: usize, d: usize) -> Result<f64> {
    let ell = log2_exact(n)?;
    let n = n as f64;
    Ok(match d {
        0 | 1 => return Err(Error::InvalidParameter("jumps need d >= 2".into())),
        2 => n * (ell as f64 - 1.0) / 4.0,
        _ => {
            let cap = level_cap(ell, d) as f64;
            cap.powi(d as i32 - 1) * n / 2f64.powi(d as i32) - n / 4.0
        }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct JumpStats {
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    pub seed: u64,
    /// `|J|` per trial.
    pub counts: Vec<usize>,
    /// Per trial, jump counts of each partition in [`partitions`] order.
    pub per_partition: Vec<Vec<usize>>,
    pub mean: f64,
    pub stddev: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
}

pub const MIN_TRIALS: usize = 30;

/// Sample statistics of `|J|` over independent seeded trials.
pub fn monte_carlo_jumps(n: usize, d: usize, trials: usize, seed: u64) -> Result<JumpStats> {
    log2_exact(n)?;
    if trials < MIN_TRIALS {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    let spec = RandomPosetSpec { n, d, seed };
    let results: Vec<JumpSet> = (0..trials as u64)
        .into_par_iter()
        .map(|t| enumerate_jumps(&sample_trial(spec, t)?))
        .collect::<Result<_>>()?;
    let counts: Vec<usize> = results.iter().map(JumpSet::len).collect();
    let per_partition = results
        .iter()
        .map(|s| s.per_partition.iter().map(|p| p.1).collect())
        .collect();
    let t = trials as f64;
    let mean = counts.iter().sum::<usize>() as f64 / t;
    let var = counts
        .iter()
        .map(|&c| (c as f64 - mean).powi(2))
        .sum::<f64>()
        / (t - 1.0);
    let stddev = var.sqrt();
    let stderr = stddev / t.sqrt();
    Ok(JumpStats {
        n,
        d,
        trials,
        seed,
        counts,
        per_partition,
        mean,
        stddev,
        stderr,
        ci95: (mean - 1.96 * stderr, mean + 1.96 * stderr),
    })
}

/// Exact `E[|J|]` by enumerating every assignment of the non-first
/// coordinates. Only for tiny `n` and `d`.
pub fn exact_expected_jumps(n: usize, d: usize) -> Result<f64> {
    log2_exact(n)?;
    let free = n * (d - 1);
    let outcomes = (n as u64)
        .checked_pow(free as u32)
        .filter(|&o| o <= 1 << 20);
    let Some(outcomes) = outcomes else {
        return Err(Error::GuardExceeded(format!(
            "{n}^{free} outcomes is too many to enumerate"
        )));
    };
    let mut total = 0usize;
    for code in 0..outcomes {
        let mut rest = code;
        let points = (0..n as u32)
            .map(|a| {
                let mut c = vec![a];
                for _ in 1..d {
                    c.push((rest % n as u64) as u32);
                    rest /= n as u64;
                }
                GridPoint::new(c)
            })
            .collect();
        total += enumerate_jumps(&Poset::new(d, n as u32, points)?)?.len();
    }
    Ok(total as f64 / outcomes as f64)
}

/// Builds the construction's spanner for a sampled poset and moves it back
/// onto the poset's own coordinates: canonicalize, build, carry the edges
/// over, then replace the Steiner vertices.
pub fn built_spanner(p: &Poset) -> Result<SpannerGraph> {
    let canon = canonicalize_embedding(p)?;
    let s = build_steiner_2tc(&canon)?;
    replace_steiner(&s.reembed(p)?, p, 2)
}

/// Lexicographically smallest shortest path from `a` to `b`.
fn smallest_shortest_path(
    out: &[Vec<VertexId>],
    inn: &[Vec<VertexId>],
    a: VertexId,
    b: VertexId,
) -> Option<Vec<VertexId>> {
    let from = bfs_distances(out, a);
    if from[b] == UNREACHABLE {
        return None;
    }
    let to = bfs_distances(inn, b);
    let mut path = vec![a];
    let mut cur = a;
    while cur != b {
        cur = *out[cur]
            .iter()
            .find(|&&v| from[v] == from[cur] + 1 && to[v] != UNREACHABLE && to[v] + 1 == to[cur])?;
        path.push(cur);
    }
    Some(path)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MappingReport {
    pub d: usize,
    pub k: u32,
    pub jump_count: usize,
    pub edge_count: usize,
    /// Each jump with the spanner edge it selects.
    pub assignments: Vec<(Jump, (VertexId, VertexId))>,
    pub max_multiplicity: usize,
    pub injective: bool,
    /// `d > 2`: the smallest parity distance over selected edges, and the
    /// required `d′ = ⌈(d−1)/k⌉`.
    pub min_parity_distance: Option<u32>,
    pub required_distance: Option<u32>,
    /// `d > 2`: `2^{d−1} (ℓ′)^{d−1−d′}`.
    pub multiplicity_bound: Option<f64>,
}

impl MappingReport {
    pub fn multiplicities(&self) -> BTreeMap<(VertexId, VertexId), usize> {
        let mut m = BTreeMap::new();
        for (_, e) in &self.assignments {
            *m.entry(*e).or_insert(0) += 1;
        }
        m
    }

    /// The property the mapping is meant to certify.
    pub fn holds(&self) -> bool {
        match self.d {
            2 => self.injective && self.edge_count >= self.jump_count,
            _ => {
                let far_enough = match (self.min_parity_distance, self.required_distance) {
                    (Some(got), Some(need)) => got >= need,
                    _ => true,
                };
                far_enough
                    && self
                        .multiplicity_bound
                        .is_none_or(|b| self.max_multiplicity as f64 <= b)
            }
        }
    }
}

fn hamming(x: &[u8], y: &[u8]) -> u32 {
    x.iter().zip(y).filter(|(a, b)| a != b).count() as u32
}

/// Maps each jump to one edge of a shortest path between its endpoints.
///
/// For `d = 2` the selected edge is the one leaving box `j` for box `j+1`;
/// for `d > 2` it is the first edge whose endpoint parities differ most.
pub fn jump_edge_mapping(p: &Poset, h: &SpannerGraph, k: u32) -> Result<MappingReport> {
    let ell = check_sampled_form(p)?;
    h.check_matches(p)?;
    if !h.all_coordinated() {
        return Err(Error::InvalidSpanner(
            "every Steiner vertex needs coordinates; replace Steiner vertices first".into(),
        ));
    }
    let d = p.dim();
    let jumps = enumerate_jumps(p)?;
    let out = h.out_adjacency();
    let inn = h.in_adjacency();
    let coord = |v: VertexId| h.coord(v).expect("coordinated");

    let mut assignments = Vec::with_capacity(jumps.len());
    let mut min_dist: Option<u32> = None;
    for jump in &jumps.jumps {
        let path = smallest_shortest_path(&out, &inn, jump.a, jump.b)
            .filter(|path| path.len() as u32 - 1 <= k)
            .ok_or_else(|| {
                Error::InvalidSpanner(format!(
                    "no path of at most {k} hops from {} to {}",
                    jump.a + 1,
                    jump.b + 1
                ))
            })?;
        let edges = path.windows(2).map(|w| (w[0], w[1]));
        let chosen = if d == 2 {
            let (i, j) = (jump.ivec[0], jump.jvec[0]);
            edges.clone().find(|&(u, v)| {
                location(coord(u).coords()[1], i, ell) <= j
                    && location(coord(v).coords()[1], i, ell) > j
            })
        } else {
            let best = edges
                .clone()
                .map(|(u, v)| {
                    let du = parity(coord(u), &jump.ivec, ell);
                    let dv = parity(coord(v), &jump.ivec, ell);
                    ((u, v), hamming(&du, &dv))
                })
                .fold(
                    None,
                    |acc: Option<((VertexId, VertexId), u32)>, cur| match acc {
                        Some(a) if a.1 >= cur.1 => Some(a),
                        _ => Some(cur),
                    },
                );
            if let Some((_, dist)) = best {
                min_dist = Some(min_dist.map_or(dist, |m| m.min(dist)));
            }
            best.map(|b| b.0)
        };
        let edge = chosen.ok_or(Error::NoCrossingEdge(jump.a, jump.b))?;
        assignments.push((jump.clone(), edge));
    }

    let mut report = MappingReport {
        d,
        k,
        jump_count: jumps.len(),
        edge_count: h.edge_count(),
        assignments,
        max_multiplicity: 0,
        injective: true,
        min_parity_distance: None,
        required_distance: None,
        multiplicity_bound: None,
    };
    report.max_multiplicity = report.multiplicities().values().copied().max().unwrap_or(0);
    report.injective = report.max_multiplicity <= 1;
    if d > 2 {
        let required = (d as u32 - 1).div_ceil(k);
        let cap = level_cap(ell, d) as f64;
        report.min_parity_distance = min_dist;
        report.required_distance = Some(required);
        report.multiplicity_bound =
            Some(2f64.powi(d as i32 - 1) * cap.powi(d as i32 - 1 - required as i32));
    }
    Ok(report)
}
