use std::collections::BTreeSet;

use tcspan_core::graph::SpannerGraph;
use tcspan_core::jumps::{
    enumerate_jumps, jump_edge_mapping, location, monte_carlo_jumps, parity, partitions,
    sample_trial, Jump, RandomPosetSpec,
};
use tcspan_core::oracle::{min_ktc_bruteforce, SearchLimits};
use tcspan_core::poset::{GridPoint, Poset};
use tcspan_core::verify::is_steiner_ktc;

fn in_box(p: &GridPoint, ivec: &[u32], jvec: &[u32], ell: u32) -> bool {
    ivec.iter()
        .zip(jvec)
        .zip(&p.coords()[1..])
        .all(|((&i, &j), &c)| location(c, i, ell) == j)
}

/// All odd vectors with entries below `2^i` per coordinate.
fn odd_vectors(ivec: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for &i in ivec {
        out = out
            .into_iter()
            .flat_map(|v| {
                (1..=1u32 << i).step_by(2).map(move |j| {
                    let mut w = v.clone();
                    w.push(j);
                    w
                })
            })
            .collect();
    }
    out
}

/// Jumps straight from the definition, quadratic per box pair.
fn jumps_by_definition(p: &Poset) -> BTreeSet<Jump> {
    let ell = p.len().trailing_zeros();
    let mut out = BTreeSet::new();
    for ivec in partitions(ell, p.dim()) {
        for jvec in odd_vectors(&ivec) {
            let next: Vec<u32> = jvec.iter().map(|j| j + 1).collect();
            let lower = |x: usize| in_box(p.point(x), &ivec, &jvec, ell);
            let upper = |x: usize| in_box(p.point(x), &ivec, &next, ell);
            for a in (0..p.len()).filter(|&a| lower(a)) {
                for b in (a + 1..p.len()).filter(|&b| upper(b)) {
                    if (a + 1..b).all(|c| !lower(c) && !upper(c)) {
                        out.insert(Jump {
                            a,
                            b,
                            ivec: ivec.clone(),
                            jvec: jvec.clone(),
                        });
                    }
                }
            }
        }
    }
    out
}

fn poset_2d(second: &[u32]) -> Poset {
    let pts = second
        .iter()
        .enumerate()
        .map(|(a, &c)| GridPoint::new(vec![a as u32, c]))
        .collect();
    Poset::new(2, second.len() as u32, pts).unwrap()
}

#[test]
fn enumeration_matches_definition() {
    for d in 2..=4 {
        for n in [2, 4, 8, 16, 32, 64] {
            for trial in 0..6 {
                let p = sample_trial(RandomPosetSpec { n, d, seed: 91 }, trial).unwrap();
                let fast: BTreeSet<Jump> = enumerate_jumps(&p).unwrap().jumps.into_iter().collect();
                assert_eq!(fast, jumps_by_definition(&p), "n={n} d={d} trial={trial}");
            }
        }
    }
}

#[test]
fn four_point_example() {
    let p = poset_2d(&[2, 0, 3, 1]);
    let got: Vec<(usize, usize, u32)> = enumerate_jumps(&p)
        .unwrap()
        .jumps
        .iter()
        .map(|j| (j.a, j.b, j.ivec[0]))
        .collect();
    let mut want = vec![(1, 2, 1), (1, 3, 2), (0, 2, 2)];
    want.sort();
    let mut got = got;
    got.sort();
    assert_eq!(got, want);
}

#[test]
fn decreasing_sequence_has_no_jumps() {
    let p = poset_2d(&[7, 6, 5, 4, 3, 2, 1, 0]);
    let js = enumerate_jumps(&p).unwrap();
    assert!(js.is_empty());
    assert!(js.per_partition.iter().all(|(_, c)| *c == 0));
}

#[test]
fn parities_are_unbiased() {
    let (n, d) = (64, 3);
    let mut ones = 0usize;
    let mut total = 0usize;
    for trial in 0..200 {
        let p = sample_trial(RandomPosetSpec { n, d, seed: 5 }, trial).unwrap();
        for ivec in partitions(6, d) {
            for x in p.points() {
                let par = parity(x, &ivec, 6);
                ones += par.iter().filter(|&&b| b == 1).count();
                total += par.len();
            }
        }
    }
    let frac = ones as f64 / total as f64;
    let sd = (0.25 / total as f64).sqrt();
    assert!(
        (frac - 0.5).abs() < 5.0 * sd,
        "fraction of odd parities {frac}"
    );
}

#[test]
fn coordinates_are_uniform() {
    let n = 1024;
    let p = sample_trial(RandomPosetSpec { n, d: 2, seed: 77 }, 0).unwrap();
    let bins = 16;
    let mut hist = vec![0f64; bins];
    for x in p.points() {
        hist[x.coords()[1] as usize * bins / n] += 1.0;
    }
    let expect = n as f64 / bins as f64;
    let chi2: f64 = hist.iter().map(|h| (h - expect).powi(2) / expect).sum();
    // 15 degrees of freedom, upper 0.1% point.
    assert!(chi2 < 37.7, "chi-square {chi2}");
}

#[test]
fn monte_carlo_is_seeded() {
    let a = monte_carlo_jumps(32, 2, 40, 3).unwrap();
    let b = monte_carlo_jumps(32, 2, 40, 3).unwrap();
    let c = monte_carlo_jumps(32, 2, 40, 4).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.counts, c.counts);
    for (t, &count) in a.counts.iter().enumerate() {
        let p = sample_trial(
            RandomPosetSpec {
                n: 32,
                d: 2,
                seed: 3,
            },
            t as u64,
        )
        .unwrap();
        assert_eq!(enumerate_jumps(&p).unwrap().len(), count);
    }
}

#[test]
fn three_dimensional_mapping_on_optimal_spanners() {
    let mut checked = 0;
    for trial in 0..20 {
        let p = sample_trial(
            RandomPosetSpec {
                n: 8,
                d: 3,
                seed: 33,
            },
            trial,
        )
        .unwrap();
        let r = match min_ktc_bruteforce(&p, 3, SearchLimits::default()) {
            Ok(r) => r,
            Err(_) => continue,
        };
        let h = SpannerGraph::over_poset(&p, vec![], r.witness).unwrap();
        assert!(is_steiner_ktc(&h, &p, 3).unwrap().is_valid());
        let m = jump_edge_mapping(&p, &h, 3).unwrap();
        assert!(m.holds(), "trial {trial}: {m:?}");
        let bound = m.multiplicity_bound.unwrap();
        assert!(m.max_multiplicity as f64 <= bound);
        checked += 1;
    }
    assert!(
        checked >= 10,
        "only {checked} posets within the oracle's reach"
    );
}
