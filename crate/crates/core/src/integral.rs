//! Numerical checks of the two integrals behind the dual scale factor:
//!
//! ```text
//! J   = ∫_{-1}^{1} dx / √(1 − x²)                              (= π)
//! I_d = ∫_{[-1,1]^d} dx / (∏(1 + x_i) + ∏(1 − x_i))           (≤ π^d / 2)
//! ```
//!
//! One-dimensional integrals use tanh-sinh quadrature, which copes with
//! endpoint singularities as long as `1 − x` and `1 + x` are supplied
//! without cancellation. For `d ≥ 2` the integrand of `I_d` blows up where
//! some `x_i = 1` and another `x_j = −1`; the substitution `x_i = −cos(π s_i)`
//! makes it bounded, and randomized Halton points estimate the result with
//! a standard error taken across independent random shifts.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 100_000;
pub const J_TOLERANCE: f64 = 1e-6;
/// Randomly shifted copies of the Halton set.
pub const REPLICATES: usize = 16;
/// Relative standard error above which a QMC estimate is not trusted.
pub const MAX_RELATIVE_STDERR: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Difference between the last two refinement levels.
    pub error: f64,
    pub converged: bool,
}

/// Tanh-sinh quadrature on `[-1, 1]`. The integrand receives `(x, 1 − x, 1 + x)`.
pub fn tanh_sinh(f: impl Fn(f64, f64, f64) -> f64) -> Quadrature {
    const T_MAX: f64 = 4.5;
    let node = |t: f64| {
        let s = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * s.abs()).exp();
        // For s ≥ 0: 1 − x = 2e/(1+e), 1 + x = 2/(1+e).
        let (small, large) = (2.0 * e / (1.0 + e), 2.0 / (1.0 + e));
        let (omx, opx) = if s >= 0.0 {
            (small, large)
        } else {
            (large, small)
        };
        let x = s.tanh();
        let w = FRAC_PI_2 * t.cosh() / s.cosh().powi(2);
        if w == 0.0 || !w.is_finite() {
            0.0
        } else {
            w * f(x, omx, opx)
        }
    };
    let mut h = 0.5;
    let mut sum = node(0.0);
    let mut j = 1;
    while j as f64 * h <= T_MAX {
        sum += node(j as f64 * h) + node(-(j as f64) * h);
        j += 1;
    }
    let mut prev = h * sum;
    for _ in 0..10 {
        h /= 2.0;
        // New nodes are the odd multiples of the halved step.
        let mut j = 1;
        while j as f64 * h <= T_MAX {
            sum += node(j as f64 * h) + node(-(j as f64) * h);
            j += 2;
        }
        let value = h * sum;
        let error = (value - prev).abs();
        if error <= 1e-13 * value.abs().max(1.0) {
            return Quadrature {
                value,
                error,
                converged: true,
            };
        }
        prev = value;
    }
    Quadrature {
        value: prev,
        error: f64::INFINITY,
        converged: false,
    }
}

/// `J` by quadrature.
pub fn j_integral() -> Quadrature {
    tanh_sinh(|_, omx, opx| 1.0 / (omx * opx).sqrt())
}

/// The integrand of `I_d` written in terms of `1 − x_i` and `1 + x_i`.
fn i_integrand(omx: &[f64], opx: &[f64]) -> f64 {
    1.0 / (opx.iter().product::<f64>() + omx.iter().product::<f64>())
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    let step = inv;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv *= step;
    }
    out
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Randomized quasi-Monte Carlo estimate of `I_d` from `samples` points in
/// total, split across [`REPLICATES`] shifts.
pub fn qmc_i(d: usize, samples: usize, seed: u64) -> Result<Estimate> {
    if d == 0 || d > PRIMES.len() {
        return Err(Error::InvalidParameter(format!(
            "QMC supports 1 <= d <= {}, got {d}",
            PRIMES.len()
        )));
    }
    let per = (samples / REPLICATES).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means = Vec::with_capacity(REPLICATES);
    let (mut omx, mut opx) = (vec![0.0; d], vec![0.0; d]);
    for _ in 0..REPLICATES {
        let shift: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let mut acc = 0.0;
        for i in 1..=per as u64 {
            let mut jac = 1.0;
            for k in 0..d {
                let s = (radical_inverse(i, PRIMES[k]) + shift[k]).fract();
                let half = FRAC_PI_2 * s;
                // x = −cos(πs): 1 + x = 2 sin²(πs/2), 1 − x = 2 cos²(πs/2).
                opx[k] = 2.0 * half.sin().powi(2);
                omx[k] = 2.0 * half.cos().powi(2);
                jac *= PI * (PI * s).sin();
            }
            let v = jac * i_integrand(&omx, &opx);
            if v.is_finite() {
                acc += v;
            }
        }
        means.push(acc / per as f64);
    }
    let r = means.len() as f64;
    let value = means.iter().sum::<f64>() / r;
    let var = means.iter().map(|m| (m - value).powi(2)).sum::<f64>() / (r - 1.0);
    Ok(Estimate {
        value,
        stderr: (var / r).sqrt(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Inconclusive,
}

impl CheckStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegralReport {
    pub d: usize,
    pub samples: usize,
    pub seed: u64,
    pub j: Quadrature,
    pub j_ok: bool,
    pub i_d: Estimate,
    /// `"tanh-sinh"` or `"randomized-halton"`.
    pub method: &'static str,
    /// `π^d / 2`.
    pub bound: f64,
    pub i_ok: bool,
    pub status: CheckStatus,
}

/// Evaluates `J` and `I_d` and compares them with `π` and `π^d / 2`.
pub fn integral_check(d: usize, samples: usize, seed: u64) -> Result<IntegralReport> {
    if !(1..=3).contains(&d) {
        return Err(Error::InvalidParameter(format!(
            "integral check supports d in 1..=3, got {d}"
        )));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "integral check needs at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let j = j_integral();
    let j_ok = j.converged && (j.value - PI).abs() <= J_TOLERANCE;
    let (i_d, method, converged) = if d == 1 {
        let q = tanh_sinh(|_, omx, opx| i_integrand(&[omx], &[opx]));
        let est = Estimate {
            value: q.value,
            stderr: q.error,
        };
        (est, "tanh-sinh", q.converged)
    } else {
        let est = qmc_i(d, samples, seed)?;
        let ok = est.stderr.is_finite() && est.stderr <= MAX_RELATIVE_STDERR * est.value.abs();
        (est, "randomized-halton", ok)
    };
    let bound = PI.powi(d as i32) / 2.0;
    let rel = if i_d.value != 0.0 {
        i_d.stderr / i_d.value.abs()
    } else {
        0.0
    };
    let i_ok = i_d.value <= bound * (1.0 + 3.0 * rel);
    let status = if !j.converged || !converged {
        CheckStatus::Inconclusive
    } else if j_ok && i_ok {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    Ok(IntegralReport {
        d,
        samples,
        seed,
        j,
        j_ok,
        i_d,
        method,
        bound,
        i_ok,
        status,
    })
}
