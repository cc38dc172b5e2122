//! Exact sparsest TC-spanners of tiny posets.
//!
//! Only edges of the transitive closure are candidates: any other edge
//! either connects an unordered pair or is never needed. Edge choices are
//! bitmasks over the closure pairs, so the closure may hold at most 64 pairs.

use crate::error::{Error, Result};
use crate::graph::UNREACHABLE;
use crate::poset::{transitive_closure, Poset};

/// Default cap on the number of comparable pairs the oracle accepts.
pub const DEFAULT_MAX_PAIRS: usize = 40;
/// Hard cap imposed by the bitmask representation.
pub const HARD_MAX_PAIRS: usize = 64;
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    /// Maximum number of search-tree nodes to expand.
    pub budget: u64,
    pub max_pairs: usize,
}

impl SearchLimits {
    pub fn with_budget(budget: u64) -> Self {
        SearchLimits {
            budget,
            max_pairs: DEFAULT_MAX_PAIRS,
        }
    }
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self::with_budget(DEFAULT_BUDGET)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub opt_size: usize,
    /// Edges of one optimal spanner, as sorted element-id pairs.
    pub witness: Vec<(usize, usize)>,
    /// Search-tree nodes expanded.
    pub explored: u64,
}

struct Closure {
    pairs: Vec<(usize, usize)>,
}

impl Closure {
    fn new(g: &Poset, limits: SearchLimits) -> Result<Self> {
        let pairs = transitive_closure(g).pairs().to_vec();
        let cap = limits.max_pairs.min(HARD_MAX_PAIRS);
        if pairs.len() > cap {
            return Err(Error::GuardExceeded(format!(
                "{} comparable pairs exceed the oracle limit of {cap}; try a smaller instance",
                pairs.len()
            )));
        }
        Ok(Closure { pairs })
    }

    fn bit(&self, u: usize, v: usize) -> u64 {
        let i = self.pairs.binary_search(&(u, v)).expect("pair in closure");
        1 << i
    }

    fn all(&self) -> u64 {
        if self.pairs.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.pairs.len()) - 1
        }
    }

    fn witness(&self, mask: u64) -> Vec<(usize, usize)> {
        (0..self.pairs.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| self.pairs[i])
            .collect()
    }
}

/// For each comparable pair, the ways to connect it within two hops, as
/// edge masks: the direct edge, then one two-edge mask per midpoint.
fn two_hop_options(g: &Poset, c: &Closure) -> Vec<Vec<u64>> {
    c.pairs
        .iter()
        .map(|&(u, v)| {
            let mut opts = vec![c.bit(u, v)];
            for w in (0..g.len()).filter(|&w| g.lt(u, w) && g.lt(w, v)) {
                opts.push(c.bit(u, w) | c.bit(w, v));
            }
            opts
        })
        .collect()
}

struct TwoHopSearch<'a> {
    options: &'a [Vec<u64>],
    budget: u64,
    explored: u64,
    best: u32,
    best_mask: u64,
}

impl TwoHopSearch<'_> {
    fn run(&mut self, inc: u64, exc: u64) -> Result<()> {
        self.explored += 1;
        if self.explored > self.budget {
            return Err(Error::BudgetExhausted {
                budget: self.budget,
            });
        }
        let decided = inc | exc;

        // Fail-first: the unsatisfied pair with the fewest live options.
        let mut target: Option<(usize, usize)> = None;
        let mut packed = 0u64;
        let mut bound = inc.count_ones();
        for (p, opts) in self.options.iter().enumerate() {
            if opts.iter().any(|&o| o & !inc == 0) {
                continue;
            }
            let mut live = 0;
            let mut need = 0u64;
            for &o in opts.iter().filter(|&&o| o & exc == 0) {
                live += 1;
                need |= o & !decided;
            }
            if live == 0 {
                return Ok(());
            }
            if need & packed == 0 {
                packed |= need;
                bound += 1;
            }
            if target.is_none_or(|(_, l)| live < l) {
                target = Some((p, live));
            }
        }
        if bound >= self.best {
            return Ok(());
        }
        let Some((p, _)) = target else {
            self.best = inc.count_ones();
            self.best_mask = inc;
            return Ok(());
        };
        let option = self.options[p]
            .iter()
            .copied()
            .find(|&o| o & exc == 0)
            .expect("live option");
        let free = option & !decided;
        let edge = free & free.wrapping_neg();
        self.run(inc | edge, exc)?;
        self.run(inc, exc | edge)
    }
}

/// Exact size of the sparsest 2-TC-spanner (no Steiner vertices, no
/// self-loops) by branch and bound over closure edges.
///
/// Pairs with no element strictly between them are seeded into the
/// solution. The search branches on an undecided edge of the unsatisfied
/// pair with the fewest remaining two-hop options, and prunes with a bound
/// from unsatisfied pairs whose remaining options use disjoint edges.
pub fn min_2tc_bruteforce(g: &Poset, limits: SearchLimits) -> Result<OracleResult> {
    let c = Closure::new(g, limits)?;
    let options = two_hop_options(g, &c);
    let forced = options
        .iter()
        .filter(|o| o.len() == 1)
        .fold(0u64, |acc, o| acc | o[0]);
    let all = c.all();
    let mut search = TwoHopSearch {
        options: &options,
        budget: limits.budget,
        explored: 0,
        best: all.count_ones() + 1,
        best_mask: all,
    };
    search.run(forced, 0)?;
    Ok(OracleResult {
        opt_size: search.best_mask.count_ones() as usize,
        witness: c.witness(search.best_mask),
        explored: search.explored,
    })
}

struct HopSearch<'a> {
    g: &'a Poset,
    c: &'a Closure,
    k: u32,
    budget: u64,
    explored: u64,
    best: u32,
    best_mask: u64,
}

impl HopSearch<'_> {
    fn adjacency(&self, mask: u64) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
        let n = self.g.len();
        let (mut out, mut inn) = (vec![Vec::new(); n], vec![Vec::new(); n]);
        for (i, &(u, v)) in self.c.pairs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                out[u].push(v);
                inn[v].push(u);
            }
        }
        (out, inn)
    }

    /// Hop distances from `src` over at most `k` hops.
    fn bounded_bfs(&self, adj: &[Vec<usize>], src: usize) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; adj.len()];
        dist[src] = 0;
        let mut frontier = vec![src];
        for hop in 1..=self.k {
            let mut next = Vec::new();
            for &u in &frontier {
                for &v in &adj[u] {
                    if dist[v] == UNREACHABLE {
                        dist[v] = hop;
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        dist
    }

    fn run(&mut self, inc: u64, exc: u64) -> Result<()> {
        self.explored += 1;
        if self.explored > self.budget {
            return Err(Error::BudgetExhausted {
                budget: self.budget,
            });
        }
        let (inc_out, _) = self.adjacency(inc);
        let optimistic = self.c.all() & !exc;
        let (opt_out, opt_in) = self.adjacency(optimistic);
        let undecided = optimistic & !inc;

        let mut bound = inc.count_ones();
        let mut packed = 0u64;
        let mut target: Option<(u64, u32)> = None;
        let mut reach_cache: Vec<Option<Vec<u32>>> = vec![None; self.g.len()];
        for &(u, v) in &self.c.pairs {
            let from_u = reach_cache[u].get_or_insert_with(|| self.bounded_bfs(&inc_out, u));
            if from_u[v] != UNREACHABLE {
                continue;
            }
            // Undecided edges on some <= k path from u to v in the optimistic graph.
            let fwd = self.bounded_bfs(&opt_out, u);
            if fwd[v] == UNREACHABLE {
                return Ok(());
            }
            let bwd = self.bounded_bfs(&opt_in, v);
            let mut need = 0u64;
            for (i, &(a, b)) in self.c.pairs.iter().enumerate() {
                let bit = 1u64 << i;
                if undecided & bit != 0
                    && fwd[a] != UNREACHABLE
                    && bwd[b] != UNREACHABLE
                    && fwd[a] + 1 + bwd[b] <= self.k
                {
                    need |= bit;
                }
            }
            if need & packed == 0 {
                packed |= need;
                bound += 1;
            }
            let width = need.count_ones();
            if target.is_none_or(|(_, w)| width < w) {
                target = Some((need, width));
            }
        }
        if bound >= self.best {
            return Ok(());
        }
        let Some((need, _)) = target else {
            self.best = inc.count_ones();
            self.best_mask = inc;
            return Ok(());
        };
        let edge = need & need.wrapping_neg();
        self.run(inc | edge, exc)?;
        self.run(inc, exc | edge)
    }
}

/// Exact size of the sparsest k-TC-spanner (no Steiner vertices) using hop
/// distances for feasibility.
pub fn min_ktc_bruteforce(g: &Poset, k: u32, limits: SearchLimits) -> Result<OracleResult> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "stretch k must be at least 1".into(),
        ));
    }
    let c = Closure::new(g, limits)?;
    // Covering pairs have no midpoint and always need their own edge.
    let forced = c
        .pairs
        .iter()
        .filter(|&&(u, v)| !(0..g.len()).any(|w| g.lt(u, w) && g.lt(w, v)))
        .fold(0u64, |acc, &(u, v)| acc | c.bit(u, v));
    let all = c.all();
    let mut search = HopSearch {
        g,
        c: &c,
        k,
        budget: limits.budget,
        explored: 0,
        best: all.count_ones() + 1,
        best_mask: all,
    };
    search.run(forced, 0)?;
    Ok(OracleResult {
        opt_size: search.best_mask.count_ones() as usize,
        witness: search.c.witness(search.best_mask),
        explored: search.explored,
    })
}
