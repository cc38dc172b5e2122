//! Size comparisons per instance: what the construction builds, its
//! `n·ℓ^d` bound, the exact optimum when the oracle can reach it, and the
//! dual lower bound.

use std::fmt::Write as _;

use crate::build::{build_steiner_2tc, prefix_bits};
use crate::dual::{certify, CertifyMode};
use crate::error::{Error, Result};
use crate::oracle::{min_2tc_bruteforce, SearchLimits};
use crate::poset::{canonicalize_embedding, hypergrid};

#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub instance: String,
    pub n: usize,
    pub d: usize,
    pub built: usize,
    pub steiner: usize,
    pub bound: u64,
    pub oracle: Option<usize>,
    pub dual: Option<f64>,
}

/// Row for the hypergrid `H_{m,d}`. The oracle and the certificate are
/// skipped (left empty) when their guards refuse the instance.
pub fn hypergrid_row(m: u32, d: usize, limits: SearchLimits) -> Result<TableRow> {
    let g = hypergrid(m, d)?;
    let n = g.len();
    let built = build_steiner_2tc(&canonicalize_embedding(&g)?)?;
    let ell = prefix_bits(n) as u64;
    let oracle = match min_2tc_bruteforce(&g, limits) {
        Ok(r) => Some(r.opt_size),
        Err(Error::GuardExceeded(_) | Error::BudgetExhausted { .. }) => None,
        Err(e) => return Err(e),
    };
    let dual = match certify(m, d, CertifyMode::default()) {
        Ok(c) => Some(c.certified_bound),
        Err(Error::GridTooLarge { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(TableRow {
        instance: format!("H_{{{m},{d}}}"),
        n,
        d,
        built: built.edge_count(),
        steiner: built.steiner_count(),
        bound: n as u64 * ell.pow(d as u32),
        oracle,
        dual,
    })
}

const HEADER: [&str; 8] = [
    "instance", "n", "d", "built", "steiner", "bound", "oracle", "dual",
];

pub fn report_table(rows: &[TableRow]) -> String {
    let cells: Vec<[String; 8]> = rows
        .iter()
        .map(|r| {
            [
                r.instance.clone(),
                r.n.to_string(),
                r.d.to_string(),
                r.built.to_string(),
                r.steiner.to_string(),
                r.bound.to_string(),
                r.oracle.map_or("-".into(), |o| o.to_string()),
                r.dual.map_or("-".into(), |x| format!("{x:.4}")),
            ]
        })
        .collect();
    let mut width: Vec<usize> = HEADER.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let mut line = |items: &[String]| {
        let parts: Vec<String> = items
            .iter()
            .zip(&width)
            .enumerate()
            .map(|(i, (c, &w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&HEADER.map(String::from));
    for row in &cells {
        line(row);
    }
    out
}
