//! Acceptance criteria 1-10, one line each. Runs without the libtest harness
//! so the lines always show; exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tcspan_core::build::{
    bipartite_embedding, bipartite_single_steiner, build_steiner_2tc, complete_bipartite_relation,
    path_query, prefix_bits,
};
use tcspan_core::dual::{
    certify, closed_form_objective, max_constraint1_lhs, objective_raw, scale_lower,
    step2_tightness, CertifyMode,
};
use tcspan_core::graph::{bfs_distances, SpannerGraph};
use tcspan_core::integral::{integral_check, CheckStatus};
use tcspan_core::jumps::{
    built_spanner, expected_jumps_lower_bound, jump_edge_mapping, monte_carlo_jumps, sample_trial,
    RandomPosetSpec,
};
use tcspan_core::oracle::{min_2tc_bruteforce, SearchLimits};
use tcspan_core::poset::{canonicalize_embedding, hypergrid, transitive_closure, GridPoint, Poset};
use tcspan_core::verify::{is_steiner_ktc, replace_steiner};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Instances of criteria 1 and 2: the poset, its canonical embedding, and
/// the spanner built on the latter.
fn construction_instances() -> Result<Vec<(String, Poset, Poset, SpannerGraph)>, String> {
    let mut out = Vec::new();
    let grids = (1..=10)
        .map(|e| (1u32 << e, 1usize))
        .chain([2u32, 4, 8, 16].map(|m| (m, 2)));
    for (m, d) in grids {
        let g = hypergrid(m, d).map_err(err)?;
        let canon = canonicalize_embedding(&g).map_err(err)?;
        let s = build_steiner_2tc(&canon).map_err(err)?;
        out.push((format!("H_{{{m},{d}}}"), g, canon, s));
    }
    Ok(out)
}

fn criterion_1() -> Check {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (name, g, canon, s) in construction_instances()? {
        let n = g.len() as u64;
        let bound = n * (prefix_bits(g.len()) as u64).pow(g.dim() as u32);
        ensure(s.edge_count() as u64 <= bound, || {
            format!("{name}: {} edges exceed n·ℓ^d = {bound}", s.edge_count())
        })?;
        worst = worst.max(s.edge_count() as f64 / bound as f64);
        let r = is_steiner_ktc(&s, &canon, 2).map_err(err)?;
        ensure(r.is_valid(), || {
            format!("{name}: {} violations", r.total_violations)
        })?;
        if g != canon {
            let back = s.reembed(&g).map_err(err)?;
            let r = is_steiner_ktc(&back, &g, 2).map_err(err)?;
            ensure(r.is_valid(), || {
                format!("{name} (original embedding): invalid")
            })?;
        }
        count += 1;
    }
    Ok(format!(
        "{count} instances valid, max |E|/(n·ℓ^d) = {worst:.3}"
    ))
}

fn criterion_2() -> Check {
    let mut pairs = 0usize;
    for (name, _, canon, s) in construction_instances()? {
        let adj = s.out_adjacency();
        for x in 0..canon.len() {
            let dist = bfs_distances(&adj, x);
            for y in (0..canon.len()).filter(|&y| canon.lt(x, y)) {
                let path = path_query(&s, x, y).map_err(|e| format!("{name}: ({x},{y}): {e}"))?;
                let hops = path.len() as u32 - 1;
                ensure(
                    path[0] == x && path[path.len() - 1] == y && hops <= 2,
                    || format!("{name}: bad path {path:?} for ({x},{y})"),
                )?;
                ensure(path.windows(2).all(|w| s.has_edge(w[0], w[1])), || {
                    format!("{name}: path {path:?} uses a missing edge")
                })?;
                if let [_, z, _] = path[..] {
                    let cz = s.coord(z).ok_or("relay without coordinates")?;
                    ensure(
                        canon.point(x).dominated_by(cz) && cz.dominated_by(canon.point(y)),
                        || format!("{name}: relay {cz} not between {x} and {y}"),
                    )?;
                }
                ensure((1..=hops).contains(&dist[y]), || {
                    format!(
                        "{name}: BFS distance {} disagrees with path {path:?}",
                        dist[y]
                    )
                })?;
                pairs += 1;
            }
        }
    }
    Ok(format!(
        "{pairs} comparable pairs answered in <= 2 hops, matching BFS"
    ))
}

/// Smallest closure-edge subset meeting the two-hop condition, by trying
/// every subset.
fn naive_min_2tc(g: &Poset) -> usize {
    let pairs = transitive_closure(g).pairs().to_vec();
    let bit = |u: usize, v: usize| pairs.iter().position(|&e| e == (u, v)).map(|i| 1u32 << i);
    let ok = |mask: u32| {
        pairs.iter().all(|&(u, v)| {
            let has = |a, b| bit(a, b).is_some_and(|m| mask & m != 0);
            has(u, v) || (0..g.len()).any(|w| g.lt(u, w) && g.lt(w, v) && has(u, w) && has(w, v))
        })
    };
    (0u32..1 << pairs.len())
        .filter(|&m| ok(m))
        .map(|m| m.count_ones() as usize)
        .min()
        .unwrap_or(0)
}

const ORACLE_CASES: [(u32, usize, usize); 4] = [(3, 1, 2), (4, 1, 4), (5, 1, 6), (2, 2, 4)];

fn criterion_3() -> Check {
    let mut parts = Vec::new();
    for (m, d, want) in ORACLE_CASES {
        let g = hypergrid(m, d).map_err(err)?;
        let r = min_2tc_bruteforce(&g, SearchLimits::default()).map_err(err)?;
        ensure(r.opt_size == want, || {
            format!("H_{{{m},{d}}}: oracle {} != {want}", r.opt_size)
        })?;
        let h = SpannerGraph::over_poset(&g, vec![], r.witness.clone()).map_err(err)?;
        ensure(is_steiner_ktc(&h, &g, 2).map_err(err)?.is_valid(), || {
            format!("H_{{{m},{d}}}: witness invalid")
        })?;
        if (m, d) == (3, 1) || (m, d) == (2, 2) {
            let naive = naive_min_2tc(&g);
            ensure(naive == r.opt_size, || {
                format!("H_{{{m},{d}}}: naive checker says {naive}")
            })?;
        }
        let built = build_steiner_2tc(&canonicalize_embedding(&g).map_err(err)?).map_err(err)?;
        ensure(built.edge_count() >= r.opt_size, || {
            format!(
                "H_{{{m},{d}}}: built {} < optimum {}",
                built.edge_count(),
                r.opt_size
            )
        })?;
        parts.push(format!("H_{{{m},{d}}}={}", r.opt_size));
    }
    Ok(format!("optima {}; naive checker agrees", parts.join(", ")))
}

fn criterion_4() -> Check {
    let margin = tcspan_core::dual::margin();
    let mut instances = 0;
    let mut largest_ratio: f64 = 0.0;
    for d in 1..=12usize {
        let max_m = (1..=4096u32)
            .take_while(|&m| (m as u64).pow(d as u32) <= 4096)
            .last()
            .unwrap_or(1);
        // Left sides grow with m (every class of a smaller grid is dominated
        // by one of a larger grid), so the largest grid bounds all others.
        let best = max_constraint1_lhs(max_m, d).map_err(err)?;
        let cap = scale_lower(d);
        ensure(&best.value + &margin <= cap, || {
            format!("d={d}, m={max_m}: max lhs exceeds (4π)^d")
        })?;
        let ratio = num_traits::ToPrimitive::to_f64(&(&best.value / &cap)).unwrap_or(f64::NAN);
        largest_ratio = largest_ratio.max(ratio);
        // Spot-check the growth in m wherever the full scan is cheap.
        let mut prev = None;
        for m in 1..=max_m.min(if d == 1 { 64 } else { max_m }) {
            let v = max_constraint1_lhs(m, d).map_err(err)?.value;
            if let Some(p) = &prev {
                ensure(p <= &v, || format!("max lhs decreases at d={d}, m={m}"))?;
            }
            prev = Some(v);
        }
        let tight_m = (1..=512u32)
            .take_while(|&m| (m as u64).pow(d as u32) <= 512)
            .last()
            .unwrap_or(1);
        ensure(step2_tightness(tight_m, d).map_err(err)?, || {
            format!("step-2 split not tight at d={d}, m={tight_m}")
        })?;
        for m in 1..=max_m {
            let raw = objective_raw(m, d);
            ensure(raw == closed_form_objective(m, d), || {
                format!("objective differs from closed form at m={m}, d={d}")
            })?;
            if m >= 3 {
                let obj = num_traits::ToPrimitive::to_f64(&raw).unwrap_or(f64::NAN);
                let rhs = (m as f64 * ((m as f64).ln() - 1.0)).powi(d as i32);
                ensure(obj > rhs * (1.0 + 1e-9), || {
                    format!("objective {obj} <= m^d(ln m - 1)^d = {rhs} at m={m}, d={d}")
                })?;
            }
            instances += 1;
        }
    }
    Ok(format!(
        "{instances} (m,d) instances; max lhs/(4π)^d = {largest_ratio:.3e}; closed form exact; step-2 tight"
    ))
}

fn criterion_5() -> Check {
    let mut parts = Vec::new();
    for (m, d, _) in ORACLE_CASES {
        let g = hypergrid(m, d).map_err(err)?;
        let opt = min_2tc_bruteforce(&g, SearchLimits::default())
            .map_err(err)?
            .opt_size;
        let c = certify(m, d, CertifyMode::default()).map_err(err)?;
        ensure(c.bound_at_most(opt), || {
            format!(
                "H_{{{m},{d}}}: certified {} > optimum {opt}",
                c.certified_bound
            )
        })?;
        parts.push(format!("{:.3}<={opt}", c.certified_bound));
    }
    Ok(parts.join(", "))
}

fn criterion_6() -> Check {
    let r1 = integral_check(1, 100_000, 1).map_err(err)?;
    let r2 = integral_check(2, 400_000, 2).map_err(err)?;
    for r in [&r1, &r2] {
        ensure(r.status == CheckStatus::Pass, || {
            format!("d={}: status {} ({:?})", r.d, r.status.as_str(), r.i_d)
        })?;
    }
    Ok(format!(
        "|J-π| = {:.1e}; I_1 = {:.6} <= {:.4}; I_2 = {:.5} ± {:.1e} <= {:.4}",
        (r1.j.value - std::f64::consts::PI).abs(),
        r1.i_d.value,
        r1.bound,
        r2.i_d.value,
        r2.i_d.stderr,
        r2.bound
    ))
}

fn criterion_7() -> Check {
    let mut parts = Vec::new();
    for (n, d, trials, seed) in [(256, 2, 500, 42), (64, 3, 200, 43)] {
        let s = monte_carlo_jumps(n, d, trials, seed).map_err(err)?;
        let again = monte_carlo_jumps(n, d, trials, seed).map_err(err)?;
        ensure(s == again, || format!("n={n}, d={d}: not deterministic"))?;
        let bound = expected_jumps_lower_bound(n, d).map_err(err)?;
        ensure(s.mean >= bound - 3.0 * s.stderr, || {
            format!(
                "n={n}, d={d}: mean {:.2} < {bound} - 3·{:.2}",
                s.mean, s.stderr
            )
        })?;
        parts.push(format!(
            "d={d}: mean {:.1} ± {:.2} vs {bound}",
            s.mean, s.stderr
        ));
    }
    Ok(parts.join("; "))
}

fn criterion_8() -> Check {
    let mut total_jumps = 0;
    for t in 0..100u64 {
        let n = [8, 16, 32][(t % 3) as usize];
        let p = sample_trial(RandomPosetSpec { n, d: 2, seed: 8 }, t).map_err(err)?;
        let h = built_spanner(&p).map_err(err)?;
        ensure(is_steiner_ktc(&h, &p, 2).map_err(err)?.is_valid(), || {
            format!("trial {t}: spanner invalid")
        })?;
        let r = jump_edge_mapping(&p, &h, 2).map_err(err)?;
        ensure(r.injective && r.edge_count >= r.jump_count, || {
            format!(
                "trial {t}: multiplicity {}, |E| = {}, |J| = {}",
                r.max_multiplicity, r.edge_count, r.jump_count
            )
        })?;
        total_jumps += r.jump_count;
    }
    Ok(format!(
        "100 posets, {total_jumps} jumps, every mapping injective"
    ))
}

fn criterion_9() -> Check {
    for n in [2, 4, 8, 16] {
        let g = bipartite_embedding(n).map_err(err)?;
        ensure(
            transitive_closure(&g) == complete_bipartite_relation(n),
            || format!("n={n}: embedding does not realize K_{{n/2,n/2}}"),
        )?;
        let h = bipartite_single_steiner(n).map_err(err)?;
        ensure(h.edge_count() == n, || {
            format!("n={n}: {} edges", h.edge_count())
        })?;
        ensure(is_steiner_ktc(&h, &g, 2).map_err(err)?.is_valid(), || {
            format!("n={n}: hub spanner invalid")
        })?;
    }
    Ok("n in {2,4,8,16}: n edges, valid, embedding order-preserving".into())
}

/// A random small poset, its closure as a spanner, and Steiner hubs that
/// replace direct edges between a down-set and an up-set of some element.
fn steiner_instance(rng: &mut ChaCha8Rng) -> Result<(Poset, SpannerGraph, u32), String> {
    let d = rng.random_range(1..=3);
    let side = rng.random_range(3..=6u32);
    let n = rng.random_range(3..=(side as usize).pow(d as u32).min(8));
    let mut points: Vec<GridPoint> = Vec::new();
    while points.len() < n {
        let p = GridPoint::new((0..d).map(|_| rng.random_range(0..side)).collect());
        if !points.contains(&p) {
            points.push(p);
        }
    }
    let g = Poset::new(d, side, points).map_err(err)?;
    let k = rng.random_range(2..=3);
    let mut edges: Vec<(usize, usize)> = transitive_closure(&g).pairs().to_vec();
    let mut steiners = 0;
    for _ in 0..rng.random_range(1..=3) {
        let c = rng.random_range(0..n);
        let below: Vec<usize> = (0..n)
            .filter(|&x| g.leq(x, c) && rng.random_bool(0.7))
            .collect();
        let above: Vec<usize> = (0..n)
            .filter(|&y| g.leq(c, y) && rng.random_bool(0.7))
            .collect();
        let s = n + steiners;
        steiners += 1;
        edges.retain(|e| !(below.contains(&e.0) && above.contains(&e.1)));
        edges.extend(below.iter().map(|&x| (x, s)));
        edges.extend(above.iter().map(|&y| (s, y)));
    }
    if rng.random_bool(0.3) {
        // A hub nothing reaches.
        let s = n + steiners;
        steiners += 1;
        edges.push((s, rng.random_range(0..n)));
    }
    let h = SpannerGraph::over_poset(&g, vec![None; steiners], edges).map_err(err)?;
    Ok((g, h, k))
}

fn criterion_10() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut removed, mut merged) = (0usize, 0usize);
    let mut done = 0;
    while done < 200 {
        let (g, h, k) = steiner_instance(&mut rng)?;
        if !is_steiner_ktc(&h, &g, k).map_err(err)?.is_valid() {
            continue;
        }
        let r = replace_steiner(&h, &g, k).map_err(|e| format!("instance {done}: {e}"))?;
        ensure(is_steiner_ktc(&r, &g, k).map_err(err)?.is_valid(), || {
            format!("instance {done}: replacement invalid")
        })?;
        ensure(r.edge_count() <= h.edge_count(), || {
            format!(
                "instance {done}: {} edges > {}",
                r.edge_count(),
                h.edge_count()
            )
        })?;
        ensure(r.all_coordinated(), || {
            format!("instance {done}: uncoordinated vertex")
        })?;
        for s in r.steiners().iter().flatten() {
            ensure(s.coords().iter().all(|&c| c < g.side()), || {
                format!("instance {done}: {s} outside the grid")
            })?;
        }
        removed += h.edge_count() - r.edge_count();
        merged += h.steiner_count() - r.steiner_count();
        done += 1;
    }
    Ok(format!(
        "200 instances stay valid; {merged} Steiner vertices pruned or merged, {removed} edges saved"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("construction validity", criterion_1),
        ("O(d) path queries", criterion_2),
        ("oracle ground truth", criterion_3),
        ("dual certificate", criterion_4),
        ("weak duality", criterion_5),
        ("integral estimates", criterion_6),
        ("jump statistics", criterion_7),
        ("jump-to-edge mapping", criterion_8),
        ("bipartite example", criterion_9),
        ("Steiner elimination", criterion_10),
    ];
    let mut failed = 0;
    let mut total = Duration::ZERO;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        total += took;
        match outcome {
            Ok(detail) => println!(
                "criterion {:>2} PASS {name} ({:.1}s): {detail}",
                i + 1,
                took.as_secs_f64()
            ),
            Err(why) => {
                failed += 1;
                println!(
                    "criterion {:>2} FAIL {name} ({:.1}s): {why}",
                    i + 1,
                    took.as_secs_f64()
                );
            }
        }
    }
    println!(
        "{} of 10 criteria passed in {:.1}s",
        10 - failed,
        total.as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
