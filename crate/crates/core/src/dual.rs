//! The volume-based dual solution for 2-TC-spanners of `[m]^d`.
//!
//! Points here are 1-based. For a comparable pair `u ⪯ v` the dual value is
//! `ŷ_uv = 1/V(v−u)` with `V(x) = ∏(x_i+1)`; each triple splits `ŷ_uv`
//! between its two halves in proportion to their volumes.
//!
//! The constraint left side for `(u,v)` depends only on `x = v−u` and on how
//! much room lies above `v`. With `A_i = m − v_i` and `S_i = m − 1 − x_i`,
//!
//! ```text
//! lhs(u,v) = F(x, A) + F(x, S − A),
//! F(x, A)  = Σ_{0 ⪯ z ⪯ A} V(x) / (V(x+z) · (V(x) + V(z)))
//! ```
//!
//! [`max_constraint1_lhs`] screens every `(x, A)` class in floating point
//! with a rigorous error bound, then evaluates the surviving candidates
//! exactly.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::poset::GridPoint;

/// Largest `m^d` certified by full enumeration unless overridden.
pub const DEFAULT_MAX_ELEMENTS: u64 = 4096;
/// Largest `m^d` for which [`certify`] re-checks the triple split.
pub const TIGHTNESS_MAX_ELEMENTS: u64 = 512;
/// Largest `m^d` accepted at all, sampled or not.
pub const SAMPLED_MAX_ELEMENTS: u64 = 1 << 24;

/// Slack required between the largest left side and `(4π)^d`.
pub fn margin() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(1_000_000_000u64))
}

/// A rational just below π.
pub fn pi_lower() -> BigRational {
    BigRational::new(
        BigInt::from(314_159_265_358_979u64),
        BigInt::from(100_000_000_000_000u64),
    )
}

/// `(4π)^d` bounded from below by a rational.
pub fn scale_lower(d: usize) -> BigRational {
    num_traits::pow(pi_lower() * BigInt::from(4), d)
}

pub fn scale(d: usize) -> f64 {
    (4.0 * std::f64::consts::PI).powi(d as i32)
}

/// Number of grid points in the box `[0, x]`.
pub fn volume(x: &[i64]) -> Result<BigUint> {
    let mut v = BigUint::one();
    for &xi in x {
        if xi < 0 {
            return Err(Error::InvalidParameter(format!(
                "volume needs non-negative components, got {xi}"
            )));
        }
        v *= BigUint::from(xi as u64 + 1);
    }
    Ok(v)
}

fn difference(u: &GridPoint, v: &GridPoint) -> Result<Vec<i64>> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    if !u.dominated_by(v) {
        return Err(Error::NotDominated(u.to_string(), v.to_string()));
    }
    Ok(u.coords()
        .iter()
        .zip(v.coords())
        .map(|(&a, &b)| b as i64 - a as i64)
        .collect())
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `ŷ_uv = 1 / V(v − u)`.
pub fn yhat(u: &GridPoint, v: &GridPoint) -> Result<BigRational> {
    Ok(ratio(BigUint::one(), volume(&difference(u, v)?)?))
}

/// The two halves `(ŷ′, ŷ″)` of `ŷ_uv` for the triple `u ⪯ w ⪯ v`, where
/// `w` is the midpoint. Each half is computed from its own formula.
pub fn yprime_ydprime(
    u: &GridPoint,
    w: &GridPoint,
    v: &GridPoint,
) -> Result<(BigRational, BigRational)> {
    let y = yhat(u, v)?;
    let lo = volume(&difference(u, w)?)?;
    let hi = volume(&difference(w, v)?)?;
    let total = &lo + &hi;
    let first = &y * ratio(lo, total.clone());
    let second = &y * ratio(hi, total);
    Ok((first, second))
}

fn check_in_grid(p: &GridPoint, m: u32) -> Result<()> {
    match p.coords().iter().find(|&&c| c == 0 || c > m) {
        Some(&c) => Err(Error::CoordinateOutOfRange {
            value: c as u64,
            side: m as u64,
        }),
        None => Ok(()),
    }
}

fn for_each_index(lens: &[usize], mut f: impl FnMut(&[usize])) {
    if lens.contains(&0) {
        return;
    }
    let mut idx = vec![0; lens.len()];
    loop {
        f(&idx);
        let mut k = lens.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < lens[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Left side of the dual constraint for `(u, v)` in `[m]^d`, by direct
/// enumeration of every third point.
pub fn constraint1_lhs(u: &GridPoint, v: &GridPoint, m: u32) -> Result<BigRational> {
    check_in_grid(u, m)?;
    check_in_grid(v, m)?;
    difference(u, v)?;
    let mut sum = BigRational::zero();
    for_each_index(&vec![m as usize; u.dim()], |idx| {
        let w = GridPoint::new(idx.iter().map(|&i| i as u32 + 1).collect());
        if v.dominated_by(&w) {
            sum += yprime_ydprime(u, v, &w).expect("chain").0;
        }
        if w.dominated_by(u) {
            sum += yprime_ydprime(&w, u, v).expect("chain").1;
        }
    });
    Ok(sum)
}

fn factor(mut x: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= x {
        let mut e = 0;
        while x.is_multiple_of(p) {
            x /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if x > 1 {
        out.push((x, 1));
    }
    out
}

/// Least common multiple of products of small integers, kept as prime
/// exponents.
#[derive(Default)]
struct Lcm {
    exps: HashMap<u64, u32>,
    memo: HashMap<u64, Vec<(u64, u32)>>,
}

impl Lcm {
    fn add_product(&mut self, factors: &[u64]) {
        let mut local: HashMap<u64, u32> = HashMap::new();
        for &f in factors {
            let fs = self.memo.entry(f).or_insert_with(|| factor(f));
            for &(p, e) in fs.iter() {
                *local.entry(p).or_insert(0) += e;
            }
        }
        for (p, e) in local {
            let slot = self.exps.entry(p).or_insert(0);
            *slot = (*slot).max(e);
        }
    }

    fn value(&self) -> BigUint {
        self.exps.iter().fold(BigUint::one(), |acc, (&p, &e)| {
            acc * BigUint::from(p).pow(e)
        })
    }
}

/// Exact `Σ count/den` over `(den, count)` terms, via one common denominator.
fn exact_sum(terms: &HashMap<u64, BigUint>) -> BigRational {
    let mut lcm = Lcm::default();
    for &den in terms.keys() {
        lcm.add_product(&[den]);
    }
    let l = lcm.value();
    let num = terms
        .iter()
        .fold(BigUint::zero(), |acc, (&den, c)| acc + c * (&l / den));
    ratio(num, l)
}

/// `Σ_{l=1}^{m} (m − l + 1)/l`, the one-dimensional objective.
fn line_objective(m: u32) -> BigRational {
    let terms = (1..=m as u64)
        .map(|l| (l, BigUint::from(m as u64 - l + 1)))
        .collect();
    exact_sum(&terms)
}

/// The objective in product form, `(Σ_{l=1}^{m} (m−l+1)/l)^d`.
pub fn closed_form_objective(m: u32, d: usize) -> BigRational {
    num_traits::pow(line_objective(m), d)
}

/// `Σ_{u ⪯ v} ŷ_uv` over all comparable pairs of `[m]^d` (including `u = v`).
///
/// Pairs are grouped by their difference vector `x`, which occurs
/// `∏(m − x_i)` times, and then by volume.
pub fn objective_raw(m: u32, d: usize) -> BigRational {
    let mut by_volume: HashMap<u64, BigUint> = HashMap::new();
    for_each_index(&vec![m as usize; d], |x| {
        let vol: u64 = x.iter().map(|&xi| xi as u64 + 1).product();
        let count: u64 = x.iter().map(|&xi| (m as usize - xi) as u64).product();
        *by_volume.entry(vol).or_insert_with(BigUint::zero) += count;
    });
    exact_sum(&by_volume)
}

/// Largest constraint left side and a pair attaining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxLhs {
    pub value: BigRational,
    pub u: GridPoint,
    pub v: GridPoint,
    /// Classes evaluated exactly after screening.
    pub candidates: usize,
}

fn vol_f64(x: &[usize], z: &[usize]) -> f64 {
    x.iter().zip(z).map(|(&a, &b)| (a + b + 1) as f64).product()
}

struct Candidate {
    x: Vec<usize>,
    a: Vec<usize>,
    upper: f64,
}

/// Float screen of every split `A` for one difference `x`: returns the best
/// guaranteed lower value and all classes that might beat it.
fn screen(m: usize, x: &[usize]) -> (f64, Vec<Candidate>) {
    let lens: Vec<usize> = x.iter().map(|&xi| m - xi).collect();
    let total: usize = lens.iter().product();
    let vx = vol_f64(x, &vec![0; x.len()]);
    let mut table = Vec::with_capacity(total);
    for_each_index(&lens, |z| {
        let vz: f64 = z.iter().map(|&zi| (zi + 1) as f64).product();
        table.push(vx / (vol_f64(x, z) * (vx + vz)));
    });
    // Prefix sums one axis at a time: only additions of positive terms.
    let mut stride = total;
    for &len in &lens {
        stride /= len;
        for i in 0..total {
            if !(i / stride).is_multiple_of(len) {
                table[i] += table[i - stride];
            }
        }
    }
    let rel = (lens.iter().sum::<usize>() + 8) as f64 * f64::EPSILON;
    let lhs = |i: usize| table[i] + table[total - 1 - i];
    let half = total.div_ceil(2);
    let lower = (0..half).map(|i| lhs(i) * (1.0 - rel)).fold(0.0, f64::max);
    let mut keep = Vec::new();
    for i in 0..half {
        let upper = lhs(i) * (1.0 + rel);
        if upper >= lower {
            let mut a = vec![0; lens.len()];
            let mut rest = i;
            for k in (0..lens.len()).rev() {
                a[k] = rest % lens[k];
                rest /= lens[k];
            }
            keep.push(Candidate {
                x: x.to_vec(),
                a,
                upper,
            });
        }
    }
    (lower, keep)
}

/// Exact `F(x, A)`.
fn exact_half(x: &[usize], a: &[usize]) -> BigRational {
    let vx: u64 = x.iter().map(|&xi| xi as u64 + 1).product();
    let mut groups: HashMap<(u64, u64), u64> = HashMap::new();
    let lens: Vec<usize> = a.iter().map(|&ai| ai + 1).collect();
    for_each_index(&lens, |z| {
        let big: u64 = x
            .iter()
            .zip(z)
            .map(|(&xi, &zi)| (xi + zi) as u64 + 1)
            .product();
        let vz: u64 = z.iter().map(|&zi| zi as u64 + 1).product();
        *groups.entry((big, vx + vz)).or_insert(0) += 1;
    });
    let mut lcm = Lcm::default();
    for &(p, q) in groups.keys() {
        lcm.add_product(&[p, q]);
    }
    let l = lcm.value();
    let num = groups.iter().fold(BigUint::zero(), |acc, (&(p, q), &c)| {
        acc + (&l / (BigUint::from(p) * BigUint::from(q))) * c
    });
    ratio(num * vx, l)
}

fn canonical_key(m: usize, x: &[usize], a: &[usize]) -> Vec<(usize, usize)> {
    let mut direct: Vec<(usize, usize)> = x.iter().copied().zip(a.iter().copied()).collect();
    let mut swapped: Vec<(usize, usize)> = x
        .iter()
        .zip(a)
        .map(|(&xi, &ai)| (xi, m - 1 - xi - ai))
        .collect();
    direct.sort_unstable();
    swapped.sort_unstable();
    direct.min(swapped)
}

/// Exact maximum of the constraint left side over all pairs of `[m]^d`.
pub fn max_constraint1_lhs(m: u32, d: usize) -> Result<MaxLhs> {
    check_enumerable(m, d, SAMPLED_MAX_ELEMENTS)?;
    let m = m as usize;
    let mut xs = Vec::new();
    for_each_index(&vec![m; d], |x| xs.push(x.to_vec()));
    let screened: Vec<(f64, Vec<Candidate>)> = xs.par_iter().map(|x| screen(m, x)).collect();
    let lower = screened.iter().map(|s| s.0).fold(0.0, f64::max);

    let mut unique: HashMap<Vec<(usize, usize)>, Candidate> = HashMap::new();
    for c in screened.into_iter().flat_map(|s| s.1) {
        if c.upper >= lower {
            unique.entry(canonical_key(m, &c.x, &c.a)).or_insert(c);
        }
    }
    let candidates = unique.len();
    let best = unique
        .into_par_iter()
        .map(|(_, c)| {
            let rest: Vec<usize> =
                c.x.iter()
                    .zip(&c.a)
                    .map(|(&xi, &ai)| m - 1 - xi - ai)
                    .collect();
            (exact_half(&c.x, &c.a) + exact_half(&c.x, &rest), c)
        })
        .max_by(|p, q| {
            p.0.cmp(&q.0)
                .then_with(|| q.1.x.cmp(&p.1.x))
                .then_with(|| q.1.a.cmp(&p.1.a))
        })
        .expect("at least one class");
    let (value, c) = best;
    let v: Vec<u32> = c.a.iter().map(|&ai| (m - ai) as u32).collect();
    let u: Vec<u32> = v
        .iter()
        .zip(&c.x)
        .map(|(&vi, &xi)| vi - xi as u32)
        .collect();
    Ok(MaxLhs {
        value,
        u: GridPoint::new(u),
        v: GridPoint::new(v),
        candidates,
    })
}

/// Checks `ŷ′ + ŷ″ = ŷ` with both halves non-negative on every triple of
/// `[m]^d`. The values depend only on the two difference vectors, so one
/// triple per difference class is evaluated.
pub fn step2_tightness(m: u32, d: usize) -> Result<bool> {
    check_enumerable(m, d, TIGHTNESS_MAX_ELEMENTS)?;
    let per_coord: Vec<(u32, u32)> = (0..m)
        .flat_map(|a| (0..m - a).map(move |b| (a, b)))
        .collect();
    let mut ok = true;
    for_each_index(&vec![per_coord.len(); d], |idx| {
        if !ok {
            return;
        }
        let u = GridPoint::new(vec![1; d]);
        let w = GridPoint::new(idx.iter().map(|&i| 1 + per_coord[i].0).collect());
        let v = GridPoint::new(
            idx.iter()
                .map(|&i| 1 + per_coord[i].0 + per_coord[i].1)
                .collect(),
        );
        let (y1, y2) = yprime_ydprime(&u, &w, &v).expect("chain");
        let y = yhat(&u, &v).expect("chain");
        ok = !y1.is_negative() && !y2.is_negative() && y1 + y2 == y;
    });
    Ok(ok)
}

fn check_enumerable(m: u32, d: usize, limit: u64) -> Result<()> {
    if m == 0 || d == 0 {
        return Err(Error::InvalidParameter(format!(
            "certificate needs m >= 1 and d >= 1, got m={m}, d={d}"
        )));
    }
    let size = (m as u64).checked_pow(d as u32);
    match size {
        Some(s) if s <= limit => Ok(()),
        _ => Err(Error::GridTooLarge { m: m as u64, d }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertifyMode {
    /// Every pair is covered (through the class screen).
    Exact { max_elements: u64 },
    /// Left sides are evaluated in floating point on random pairs only.
    Sampled { samples: usize, seed: u64 },
}

impl Default for CertifyMode {
    fn default() -> Self {
        CertifyMode::Exact {
            max_elements: DEFAULT_MAX_ELEMENTS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateStatus {
    Certified,
    SpotChecked,
    /// `m = 1`: the bound says nothing.
    Trivial,
}

impl CertificateStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CertificateStatus::Certified => "certified",
            CertificateStatus::SpotChecked => "spot-checked",
            CertificateStatus::Trivial => "trivial",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualCertificate {
    pub m: u32,
    pub d: usize,
    pub mode: CertifyMode,
    pub status: CertificateStatus,
    /// `Σ ŷ_uv`; enumerated in exact mode, the closed form when sampled.
    pub objective_raw: BigRational,
    pub objective_closed_form: BigRational,
    pub objective_enumerated: bool,
    pub max_constraint_lhs: BigRational,
    pub max_lhs_pair: (GridPoint, GridPoint),
    /// `(4π)^d`.
    pub scale: f64,
    pub certified_bound: f64,
    /// `max_constraint_lhs + 1e-9 ≤ (4π)^d`, checked against a rational below π.
    pub lhs_within_scale: bool,
    pub objective_matches_closed_form: bool,
    /// `objective > m^d (ln m − 1)^d`; vacuous below `m = 3`.
    pub exceeds_log_bound: bool,
    /// `objective > ((m+1) ln(m+1) − m)^d`.
    pub exceeds_harmonic_bound: bool,
    pub step2_tight: Option<bool>,
}

impl DualCertificate {
    pub fn all_checks_pass(&self) -> bool {
        self.lhs_within_scale
            && self.objective_matches_closed_form
            && self.exceeds_log_bound
            && self.exceeds_harmonic_bound
            && self.step2_tight != Some(false)
    }

    /// Exact test of `objective / (4π)^d ≤ size`, using `π > π_lo`.
    pub fn bound_at_most(&self, size: usize) -> bool {
        self.objective_raw <= scale_lower(self.d) * BigInt::from(size)
    }
}

/// Float value of `F(x, A)` by direct summation.
fn half_f64(x: &[usize], a: &[usize]) -> f64 {
    let vx = vol_f64(x, &vec![0; x.len()]);
    let lens: Vec<usize> = a.iter().map(|&ai| ai + 1).collect();
    let mut s = 0.0;
    for_each_index(&lens, |z| {
        let vz: f64 = z.iter().map(|&zi| (zi + 1) as f64).product();
        s += vx / (vol_f64(x, z) * (vx + vz));
    });
    s
}

fn sampled_max(m: u32, d: usize, samples: usize, seed: u64) -> (BigRational, GridPoint, GridPoint) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (f64::NEG_INFINITY, vec![1; d], vec![1; d]);
    for _ in 0..samples.max(1) {
        let p: Vec<u32> = (0..d).map(|_| rng.random_range(1..=m)).collect();
        let q: Vec<u32> = (0..d).map(|_| rng.random_range(1..=m)).collect();
        let u: Vec<u32> = p.iter().zip(&q).map(|(&a, &b)| a.min(b)).collect();
        let v: Vec<u32> = p.iter().zip(&q).map(|(&a, &b)| a.max(b)).collect();
        let x: Vec<usize> = u.iter().zip(&v).map(|(&a, &b)| (b - a) as usize).collect();
        let a: Vec<usize> = v.iter().map(|&vi| (m - vi) as usize).collect();
        let rest: Vec<usize> = u.iter().map(|&ui| ui as usize - 1).collect();
        let value = half_f64(&x, &a) + half_f64(&x, &rest);
        if value > best.0 {
            best = (value, u, v);
        }
    }
    let value = BigRational::from_float(best.0).expect("finite");
    (value, GridPoint::new(best.1), GridPoint::new(best.2))
}

/// Builds the dual certificate for `[m]^d` and runs its checks.
pub fn certify(m: u32, d: usize, mode: CertifyMode) -> Result<DualCertificate> {
    let closed = closed_form_objective(m, d);
    let (objective, enumerated, lhs, pair) = match mode {
        CertifyMode::Exact { max_elements } => {
            check_enumerable(m, d, max_elements.min(SAMPLED_MAX_ELEMENTS))?;
            let best = max_constraint1_lhs(m, d)?;
            (objective_raw(m, d), true, best.value, (best.u, best.v))
        }
        CertifyMode::Sampled { samples, seed } => {
            check_enumerable(m, d, SAMPLED_MAX_ELEMENTS)?;
            let (value, u, v) = sampled_max(m, d, samples, seed);
            (closed.clone(), false, value, (u, v))
        }
    };
    let step2_tight = match check_enumerable(m, d, TIGHTNESS_MAX_ELEMENTS) {
        Ok(()) => Some(step2_tightness(m, d)?),
        Err(_) => None,
    };
    let s = scale(d);
    let obj = objective.to_f64().unwrap_or(f64::INFINITY);
    let mf = m as f64;
    let log_rhs = (mf * (mf.ln() - 1.0)).powi(d as i32);
    let harmonic_rhs = ((mf + 1.0) * (mf + 1.0).ln() - mf).powi(d as i32);
    let status = match (m, mode) {
        (1, _) => CertificateStatus::Trivial,
        (_, CertifyMode::Exact { .. }) => CertificateStatus::Certified,
        _ => CertificateStatus::SpotChecked,
    };
    Ok(DualCertificate {
        m,
        d,
        mode,
        status,
        objective_matches_closed_form: objective == closed,
        lhs_within_scale: &lhs + margin() <= scale_lower(d),
        exceeds_log_bound: m < 3 || obj > log_rhs * (1.0 + 1e-9),
        exceeds_harmonic_bound: obj > harmonic_rhs * (1.0 + 1e-9),
        certified_bound: obj / s,
        objective_raw: objective,
        objective_closed_form: closed,
        objective_enumerated: enumerated,
        max_constraint_lhs: lhs,
        max_lhs_pair: pair,
        scale: s,
        step2_tight,
    })
}
