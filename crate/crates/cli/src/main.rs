use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use tcspan_core::build::{build_steiner_2tc, path_query};
use tcspan_core::dual::{self, certify, CertifyMode};
use tcspan_core::integral::{integral_check, CheckStatus};
use tcspan_core::io;
use tcspan_core::jumps::{self, jump_edge_mapping, monte_carlo_jumps};
use tcspan_core::oracle::{self, min_2tc_bruteforce, min_ktc_bruteforce, SearchLimits};
use tcspan_core::poset::canonicalize_embedding;
use tcspan_core::report::{hypergrid_row, report_table};
use tcspan_core::verify::{is_steiner_ktc, replace_steiner};
use tcspan_core::{Error, Poset, SpannerGraph};

/// Largest poset `build`, `verify` and `jumps` accept without `--unsafe`.
const MAX_ELEMENTS: usize = 1 << 16;

#[derive(Parser)]
#[command(
    name = "tcspan",
    version,
    about = "Steiner TC-spanners of low-dimensional posets"
)]
struct Cli {
    /// Worker threads for parallel steps.
    #[arg(long, global = true, env = "TCSPAN_THREADS")]
    threads: Option<usize>,

    /// Lift the size guards on enumeration and search.
    #[arg(long = "unsafe", global = true)]
    allow_unsafe: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "lowercase", tag = "command")]
enum Command {
    /// Rewrite a poset into its canonical embedding (distinct coordinates per dimension).
    Embed(EmbedArgs),
    /// Build the prefix-point Steiner 2-TC-spanner of a canonical poset.
    Build(BuildArgs),
    /// Check a graph against the Steiner k-TC-spanner conditions.
    Verify(VerifyArgs),
    /// Answer a 2-hop path query on a built spanner.
    Path(PathArgs),
    /// Exact sparsest k-TC-spanner of a tiny poset.
    Oracle(OracleArgs),
    /// Dual lower-bound certificate for the hypergrid [m]^d.
    Dualbound(DualArgs),
    /// Numerical checks of the integrals J and I_d.
    Integrals(IntegralArgs),
    /// Monte Carlo jump counts on random posets.
    Jumps(JumpsArgs),
    /// Map each jump of a poset to a spanner edge.
    Jumpmap(JumpmapArgs),
    /// Size comparison table for hypergrids.
    Table(TableArgs),
}

#[derive(Args, Serialize)]
struct EmbedArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct BuildArgs {
    /// Canonical poset JSON.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a Graphviz rendering.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    #[arg(long)]
    poset: PathBuf,
    #[arg(long)]
    spanner: PathBuf,
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// Write the full violation report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Accept a spanner over another embedding of the same poset; its
    /// Steiner coordinates are dropped.
    #[arg(long)]
    reembed: bool,
}

#[derive(Args, Serialize)]
struct PathArgs {
    #[arg(long)]
    spanner: PathBuf,
    /// Needed when the spanner file has no "points".
    #[arg(long)]
    poset: Option<PathBuf>,
    /// 1-based element id.
    #[arg(long)]
    from: usize,
    #[arg(long)]
    to: usize,
}

#[derive(Args, Serialize)]
struct OracleArgs {
    #[arg(long)]
    poset: PathBuf,
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// Search-tree nodes to expand before giving up.
    #[arg(long, default_value_t = oracle::DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct DualArgs {
    #[arg(long)]
    m: u32,
    #[arg(long)]
    d: usize,
    /// Spot-check this many random pairs instead of all of them.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct IntegralArgs {
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct JumpsArgs {
    /// Element count; rounded down to a power of two.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV with one row per trial.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct JumpmapArgs {
    /// Poset whose element a has first coordinate a.
    #[arg(long)]
    poset: PathBuf,
    /// Spanner to map into; built from the poset when omitted.
    #[arg(long)]
    spanner: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct TableArgs {
    /// Hypergrids as MxD, e.g. 4x1; repeatable.
    #[arg(long = "grid", value_parser = parse_grid)]
    grids: Vec<(u32, usize)>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_grid(s: &str) -> std::result::Result<(u32, usize), String> {
    let (m, d) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected MxD, got {s:?}"))?;
    let m = m
        .trim()
        .parse()
        .map_err(|e| format!("bad m in {s:?}: {e}"))?;
    let d = d
        .trim()
        .parse()
        .map_err(|e| format!("bad d in {s:?}: {e}"))?;
    Ok((m, d))
}

const DEFAULT_GRIDS: [(u32, usize); 8] = [
    (2, 1),
    (3, 1),
    (4, 1),
    (5, 1),
    (8, 1),
    (2, 2),
    (3, 2),
    (4, 2),
];

/// A failed check, as opposed to bad input.
struct Failed;

type Outcome = Result<std::result::Result<(), Failed>>;

fn meta(command: &Command, seed: Option<u64>) -> Value {
    json!({
        "tool": "tcspan",
        "version": env!("CARGO_PKG_VERSION"),
        "config": command,
        "seed": seed,
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_poset(path: &Path) -> Result<Poset> {
    io::parse_poset(&read(path)?).with_context(|| format!("bad poset file {}", path.display()))
}

fn load_spanner(path: &Path, poset: Option<&Poset>) -> Result<SpannerGraph> {
    io::parse_spanner(&read(path)?, poset)
        .with_context(|| format!("bad spanner file {}", path.display()))
}

fn guard_elements(n: usize, allow: bool) -> Result<()> {
    if n > MAX_ELEMENTS && !allow {
        bail!("{n} elements exceed the guard of {MAX_ELEMENTS}; pass --unsafe to proceed");
    }
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    let cmd = &cli.command;
    match cmd {
        Command::Embed(a) => {
            let p = load_poset(&a.input)?;
            let canon = canonicalize_embedding(&p)?;
            write(
                a.out.as_deref(),
                &io::to_pretty(&io::poset_to_json(&canon, Some(&meta(cmd, None)))),
            )?;
        }
        Command::Build(a) => {
            let p = load_poset(&a.input)?;
            guard_elements(p.len(), cli.allow_unsafe)?;
            let s = match build_steiner_2tc(&p) {
                Err(e @ Error::NotCanonical { .. }) => {
                    bail!("{e}; run `tcspan embed` first")
                }
                r => r?,
            };
            write(
                a.out.as_deref(),
                &io::to_pretty(&io::spanner_to_json(&s, Some(&meta(cmd, None)))),
            )?;
            if let Some(dot) = &a.dot {
                write(Some(dot), &s.to_dot())?;
            }
            eprintln!(
                "{} edges, {} Steiner vertices",
                s.edge_count(),
                s.steiner_count()
            );
        }
        Command::Verify(a) => {
            let p = load_poset(&a.poset)?;
            guard_elements(p.len(), cli.allow_unsafe)?;
            let mut h = load_spanner(&a.spanner, Some(&p))?;
            if h.check_matches(&p).is_err() && a.reembed {
                h = h.reembed(&p)?;
            }
            h.check_matches(&p)
                .context("spanner originals differ from the poset (see --reembed)")?;
            let r = is_steiner_ktc(&h, &p, a.k)?;
            if let Some(path) = &a.report {
                write(
                    Some(path),
                    &io::to_pretty(&io::report_to_json(&r, Some(&meta(cmd, None)))),
                )?;
            }
            if r.is_valid() {
                println!(
                    "valid Steiner {}-TC-spanner ({} edges)",
                    a.k,
                    h.edge_count()
                );
            } else {
                println!("invalid: {} violation(s)", r.total_violations);
                for v in r.violations.iter().take(10) {
                    let dist = v.distance.map_or("inf".into(), |d| d.to_string());
                    let kind = serde_json::to_value(v.kind)?;
                    println!(
                        "  {} ({},{}) {dist}",
                        kind.as_str().unwrap_or("?"),
                        v.pair.0 + 1,
                        v.pair.1 + 1
                    );
                }
                return Ok(Err(Failed));
            }
        }
        Command::Path(a) => {
            let p = a.poset.as_deref().map(load_poset).transpose()?;
            let s = load_spanner(&a.spanner, p.as_ref())?;
            if a.from == 0 || a.to == 0 {
                bail!("element ids are 1-based");
            }
            let path = path_query(&s, a.from - 1, a.to - 1)?;
            let ids: Vec<String> = path.iter().map(|v| (v + 1).to_string()).collect();
            println!("{}", ids.join(" -> "));
        }
        Command::Oracle(a) => {
            let p = load_poset(&a.poset)?;
            let limits = SearchLimits {
                budget: a.budget,
                max_pairs: if cli.allow_unsafe {
                    oracle::HARD_MAX_PAIRS
                } else {
                    oracle::DEFAULT_MAX_PAIRS
                },
            };
            let r = if a.k == 2 {
                min_2tc_bruteforce(&p, limits)?
            } else {
                min_ktc_bruteforce(&p, a.k, limits)?
            };
            let mut v = io::oracle_to_json(&r, a.k, Some(&meta(cmd, None)));
            v["budget"] = json!(a.budget);
            write(a.out.as_deref(), &io::to_pretty(&v))?;
            eprintln!(
                "optimum {} edges ({} nodes explored)",
                r.opt_size, r.explored
            );
        }
        Command::Dualbound(a) => {
            let mode = match a.sample {
                Some(samples) => CertifyMode::Sampled {
                    samples,
                    seed: a.seed,
                },
                None => CertifyMode::Exact {
                    max_elements: if cli.allow_unsafe {
                        dual::SAMPLED_MAX_ELEMENTS
                    } else {
                        dual::DEFAULT_MAX_ELEMENTS
                    },
                },
            };
            let c = match certify(a.m, a.d, mode) {
                Err(e @ Error::GridTooLarge { .. }) => {
                    bail!("{e}; use --sample N or --unsafe")
                }
                r => r?,
            };
            let seed = a.sample.map(|_| a.seed);
            write(
                a.out.as_deref(),
                &io::to_pretty(&io::certificate_to_json(&c, Some(&meta(cmd, seed)))),
            )?;
            eprintln!(
                "{}: objective {} / (4π)^{} = {:.6}",
                c.status.as_str(),
                io::decimal_string(&c.objective_raw, 6),
                c.d,
                c.certified_bound
            );
            if !c.all_checks_pass() {
                eprintln!("certificate checks failed");
                return Ok(Err(Failed));
            }
        }
        Command::Integrals(a) => {
            let r = integral_check(a.d, a.samples, a.seed)?;
            write(
                a.out.as_deref(),
                &io::to_pretty(&io::integral_to_json(&r, Some(&meta(cmd, Some(a.seed))))),
            )?;
            eprintln!(
                "J = {:.12}, I_{} = {:.6} ± {:.1e} (bound {:.6}): {}",
                r.j.value,
                r.d,
                r.i_d.value,
                r.i_d.stderr,
                r.bound,
                r.status.as_str()
            );
            if r.status == CheckStatus::Fail {
                return Ok(Err(Failed));
            }
        }
        Command::Jumps(a) => {
            if a.n < 2 {
                bail!("n must be at least 2");
            }
            let n = 1usize << (usize::BITS - 1 - a.n.leading_zeros());
            if n != a.n {
                eprintln!("warning: n={} is not a power of two; using n={n}", a.n);
            }
            guard_elements(n, cli.allow_unsafe)?;
            let stats = monte_carlo_jumps(n, a.d, a.trials, a.seed)?;
            let bound = jumps::expected_jumps_lower_bound(n, a.d)?;
            write(
                a.out.as_deref(),
                &jumps_csv(&stats, &meta(cmd, Some(a.seed)), n)?,
            )?;
            eprintln!(
                "mean |J| = {:.3} (stderr {:.3}); expectation bound {bound}",
                stats.mean, stats.stderr
            );
        }
        Command::Jumpmap(a) => {
            let p = load_poset(&a.poset)?;
            guard_elements(p.len(), cli.allow_unsafe)?;
            let h = match &a.spanner {
                None => jumps::built_spanner(&p)?,
                Some(path) => {
                    let mut h = load_spanner(path, Some(&p))?;
                    if h.check_matches(&p).is_err() {
                        h = h.reembed(&p)?;
                    }
                    if h.all_coordinated() {
                        h
                    } else {
                        replace_steiner(&h, &p, a.k)?
                    }
                }
            };
            let r = jump_edge_mapping(&p, &h, a.k)?;
            write(
                a.out.as_deref(),
                &io::to_pretty(&io::mapping_to_json(&r, Some(&meta(cmd, None)))),
            )?;
            eprintln!(
                "{} jumps onto {} edges, max multiplicity {}",
                r.jump_count, r.edge_count, r.max_multiplicity
            );
            if !r.holds() {
                return Ok(Err(Failed));
            }
        }
        Command::Table(a) => {
            let grids = if a.grids.is_empty() {
                DEFAULT_GRIDS.to_vec()
            } else {
                a.grids.clone()
            };
            let limits = SearchLimits {
                max_pairs: if cli.allow_unsafe {
                    oracle::HARD_MAX_PAIRS
                } else {
                    oracle::DEFAULT_MAX_PAIRS
                },
                ..SearchLimits::default()
            };
            let rows = grids
                .iter()
                .map(|&(m, d)| hypergrid_row(m, d, limits))
                .collect::<tcspan_core::Result<Vec<_>>>()?;
            write(a.out.as_deref(), &report_table(&rows))?;
        }
    }
    Ok(Ok(()))
}

fn jumps_csv(stats: &jumps::JumpStats, meta: &Value, n: usize) -> Result<String> {
    let labels: Vec<String> = jumps::partitions(jumps::log2_exact(n)?, stats.d)
        .iter()
        .map(|ivec| {
            let parts: Vec<String> = ivec.iter().map(u32::to_string).collect();
            format!("i={}", parts.join("-"))
        })
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["trial".to_string(), "jumps".to_string()];
    header.extend(labels);
    w.write_record(&header)?;
    for (t, (count, parts)) in stats.counts.iter().zip(&stats.per_partition).enumerate() {
        let mut row = vec![t.to_string(), count.to_string()];
        row.extend(parts.iter().map(usize::to_string));
        w.write_record(&row)?;
    }
    let body = String::from_utf8(w.into_inner()?)?;
    Ok(format!(
        "# {}\n# mean={} stddev={} stderr={}\n{body}",
        serde_json::to_string(meta)?,
        stats.mean,
        stats.stddev,
        stats.stderr
    ))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: cannot set up {t} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failed)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
