//! Numeric side of the growth bounds: `λ(n)`, the auxiliary function `f(n)`
//! and its threshold `N`, the piecewise upper function `F`, log-concave
//! majorants, the two counting bounds for the sphere split, and the closed
//! form lower bound.
//!
//! Natural logarithms and `f64` throughout. Large quantities are handled in
//! log space.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // the negated forms also reject NaN

use serde::Serialize;

use crate::error::{Error, Result};

/// `e^{e²}`, the start of the concave branch of `F`.
pub fn concavity_start() -> f64 {
    std::f64::consts::E.powf(std::f64::consts::E.powi(2))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundParams {
    /// Tree arity.
    pub d: u32,
    /// Level with `I_m = I`.
    pub m: u32,
    pub c: f64,
    /// Additive constant of `log F`.
    pub a: f64,
    /// Multiplier of `n (loglog n)² / log n` in `log F`.
    pub b: f64,
    pub big_m: f64,
    /// `[G : Stab(m)]`, user supplied.
    pub stab_index: f64,
    /// Constant with `K·rate ≥ γ(n)^{1/n}`.
    pub k: f64,
}

impl Default for BoundParams {
    fn default() -> Self {
        BoundParams {
            d: 3,
            m: 3,
            c: concavity_start(),
            a: 0.0,
            b: 1.0,
            big_m: 1.0,
            stab_index: 1.0,
            k: 1.0,
        }
    }
}

impl BoundParams {
    pub fn with_dm(d: u32, m: u32) -> Self {
        BoundParams {
            d,
            m,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 || self.m < 1 {
            return Err(Error::Domain(format!(
                "need d ≥ 2 and m ≥ 1, got d={} m={}",
                self.d, self.m
            )));
        }
        if !(self.a >= 0.0 && self.b >= 0.0 && self.big_m >= 0.0) {
            return Err(Error::Domain("A, B and M must be non-negative".into()));
        }
        Ok(())
    }

    /// `d^m`.
    pub fn dm(&self) -> f64 {
        (self.d as f64).powi(self.m as i32)
    }
}

/// `λ(n) = n loglog n / log n`.
pub fn lambda_fn(n: f64) -> Result<f64> {
    if !(n > std::f64::consts::E) {
        return Err(Error::Domain(format!("λ needs n > e, got {n}")));
    }
    let l = n.ln();
    Ok(n * l.ln() / l)
}

/// The three-term function whose eventual bound `f ≤ 1` closes the induction.
pub fn f_lf(n: f64, p: &BoundParams) -> Result<f64> {
    let lam = lambda_fn(n)?;
    let dm = p.dm();
    let rest = n - lam;
    if !(rest > dm) {
        return Err(Error::Domain(format!("f needs n − λ(n) > d^m at n = {n}")));
    }
    let ln = n.ln();
    let lln = ln.ln();
    let np = rest / dm;
    let lnp = np.ln();
    let t1 = ln / (n * lln * lln);
    let t2 = dm * ln * ln / (n * lln * lln);
    let t3 = rest / n * ln / lnp * (lnp.ln() / lln).powi(2);
    Ok(t1 + t2 + t3)
}

/// The same quantity regrouped as `(log n / n)(1 + A log n)/(loglog n)² +
/// (loglog n′ / loglog n)² · A n′ log n / (n log n′)` with `A = d^m` and
/// `n′ = (n − λ)/A`.
pub fn f_lf_regrouped(n: f64, p: &BoundParams) -> Result<f64> {
    let lam = lambda_fn(n)?;
    let a = p.dm();
    let np = (n - lam) / a;
    if !(np > 1.0) {
        return Err(Error::Domain(format!("f needs n − λ(n) > d^m at n = {n}")));
    }
    let (ln, lnp) = (n.ln(), np.ln());
    let (lln, llnp) = (ln.ln(), lnp.ln());
    Ok((ln / n) * (1.0 + a * ln) / (lln * lln)
        + (llnp * llnp) / (lln * lln) * a * np * ln / (n * lnp))
}

/// Sampling policy and outcome of [`find_n`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NSearch {
    pub n: u64,
    pub limit: f64,
    pub log_samples: usize,
    pub integer_window: u64,
    /// `f(N − 1)`, for information only.
    pub f_before: Option<f64>,
}

pub const LOG_SAMPLES: usize = 10_000;
pub const INTEGER_WINDOW: u64 = 1_000;

/// `n`-th of `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

fn f_ok(n: f64, p: &BoundParams) -> bool {
    f_lf(n, p).is_ok_and(|v| v <= 1.0)
}

/// Smallest integer `N` with `f ≤ 1` at every one of [`LOG_SAMPLES`]
/// log-spaced points of `[3, limit]` lying in `[N, limit]`, and at every
/// integer of `[N, N + INTEGER_WINDOW]`.
pub fn find_n(p: &BoundParams, limit: f64) -> Result<NSearch> {
    p.validate()?;
    if !(limit > 1e3) {
        return Err(Error::Domain(format!(
            "limit must exceed 10^3, got {limit}"
        )));
    }
    let grid = log_spaced(3.0, limit, LOG_SAMPLES);
    let start = match grid.iter().rposition(|&x| !f_ok(x, p)) {
        Some(i) if i + 1 == grid.len() => {
            return Err(Error::NotFound(format!("f(limit) > 1 at limit {limit}")));
        }
        Some(i) => grid[i].floor() as u64 + 1,
        None => 3,
    };
    let mut n = start;
    'scan: loop {
        if n as f64 > limit {
            return Err(Error::NotFound(format!("no N ≤ {limit}")));
        }
        for j in (n..=n + INTEGER_WINDOW).rev() {
            if !f_ok(j as f64, p) {
                n = j + 1;
                continue 'scan;
            }
        }
        break;
    }
    Ok(NSearch {
        n,
        limit,
        log_samples: LOG_SAMPLES,
        integer_window: INTEGER_WINDOW,
        f_before: f_lf((n - 1) as f64, p).ok(),
    })
}

/// `n (loglog n)² / log n`, the exponent profile of `F`.
pub fn growth_profile(n: f64) -> f64 {
    let l = n.ln();
    n * l.ln().powi(2) / l
}

/// Second derivative of [`growth_profile`] in closed form.
pub fn growth_profile_second_derivative(n: f64) -> f64 {
    let l = n.ln();
    let ll = l.ln();
    (-l * ll * ll + 2.0 * l * ll + 2.0 * ll * ll - 6.0 * ll + 2.0) / (n * l.powi(3))
}

/// `log F(n)`: `A + B·profile(n)` for `n ≥ c`, frozen at its value at `c` below.
pub fn log_f_upper(n: f64, p: &BoundParams) -> f64 {
    p.a + p.b * growth_profile(n.max(p.c))
}

pub fn f_upper(n: f64, p: &BoundParams) -> f64 {
    log_f_upper(n, p).exp()
}

/// Piecewise-linear concave function `ε_i n + δ_i` on `[n_i, n_{i+1}]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcaveMajorant {
    pub breaks: Vec<f64>,
    pub slopes: Vec<f64>,
    pub offsets: Vec<f64>,
}

impl ConcaveMajorant {
    /// `log G(n)`. Left of `n_1` the first piece continues.
    pub fn log_eval(&self, n: f64) -> f64 {
        let i = self.breaks.partition_point(|&b| b <= n).saturating_sub(1);
        self.slopes[i] * n + self.offsets[i]
    }

    pub fn eval(&self, n: f64) -> f64 {
        self.log_eval(n).exp()
    }
}

/// Default breakpoint grid: `1` and then ratio `1.02` up to `hi`.
pub fn geometric_breaks(hi: f64) -> Vec<f64> {
    let mut out = vec![1.0];
    let mut x: f64 = 2.0;
    while x < hi {
        out.push(x.round());
        x *= 1.02;
    }
    out.dedup();
    out
}

/// Builds `log G ≥ log F` from samples `(n, log F(n))` sorted by `n ≥ 1`.
/// Each candidate breakpoint gets `ε = max_{n ≥ n_i} log F(n)/n` over the
/// samples; candidates that do not strictly lower `ε` are dropped.
pub fn concave_majorant(
    samples: &[(f64, f64)],
    candidate_breaks: &[f64],
) -> Result<ConcaveMajorant> {
    if samples.is_empty() {
        return Err(Error::Construction("no samples".into()));
    }
    if samples.iter().any(|&(n, v)| !(n >= 1.0) || !v.is_finite()) {
        return Err(Error::Construction(
            "samples need n ≥ 1 and finite log F".into(),
        ));
    }
    if samples.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::Construction(
            "samples must be strictly increasing in n".into(),
        ));
    }
    let ratios: Vec<f64> = samples.iter().map(|&(n, v)| v / n).collect();
    let mut suffix = ratios.clone();
    for i in (0..suffix.len().saturating_sub(1)).rev() {
        suffix[i] = suffix[i].max(suffix[i + 1]);
    }
    let last = *ratios.last().unwrap();
    if last > 0.0 && suffix[0] <= last && samples.len() > 1 {
        return Err(Error::Construction(
            "log F(n)/n does not decrease on the sampled tail".into(),
        ));
    }

    let mut breaks = vec![1.0];
    let mut slopes = vec![suffix[0]];
    let mut offsets = vec![0.0];
    for &b in candidate_breaks {
        if b <= *breaks.last().unwrap() {
            continue;
        }
        let idx = samples.partition_point(|&(n, _)| n < b);
        if idx == samples.len() {
            break;
        }
        let eps = suffix[idx];
        let prev = *slopes.last().unwrap();
        if eps < prev {
            let delta = (prev - eps) * b + offsets.last().unwrap();
            breaks.push(b);
            slopes.push(eps);
            offsets.push(delta);
        }
    }
    Ok(ConcaveMajorant {
        breaks,
        slopes,
        offsets,
    })
}

/// Log of the left side and right side of `∏ G(n_i) ≤ G(∑ n_i / k)^k`.
pub fn product_inequality_logs(g: &ConcaveMajorant, ns: &[f64]) -> (f64, f64) {
    let k = ns.len() as f64;
    let lhs = ns.iter().map(|&n| g.log_eval(n)).sum();
    let mean = ns.iter().sum::<f64>() / k;
    (lhs, k * g.log_eval(mean))
}

/// `e^λ (n/λ)^{λ−1} δ(n/λ)^λ`, in log form.
pub fn log_w_less_bound(n: f64, lam: f64, delta_at: impl Fn(f64) -> f64) -> Result<f64> {
    if !(lam > 0.0 && lam <= n / 2.0) {
        return Err(Error::Domain(format!(
            "need 0 < λ ≤ n/2, got λ={lam} n={n}"
        )));
    }
    let d = delta_at(n / lam);
    if !(d > 0.0) {
        return Err(Error::Domain(format!("δ(n/λ) must be positive, got {d}")));
    }
    Ok(lam + (lam - 1.0) * (n / lam).ln() + lam * d.ln())
}

pub fn w_less_bound(n: f64, lam: f64, delta_at: impl Fn(f64) -> f64) -> Result<f64> {
    log_w_less_bound(n, lam, delta_at).map(f64::exp)
}

/// `binom(x, k)` for real `x`, zero when `x < k`.
pub fn real_binomial(x: f64, k: u64) -> f64 {
    if x < k as f64 {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (x - i as f64) / (i + 1) as f64)
}

/// `p(n) = [G:Stab(m)] K^{d^m} binom(n − λ, d^m)`.
pub fn p_poly(n: f64, lam: f64, p: &BoundParams) -> f64 {
    let dm = p.dm();
    p.stab_index * p.k.powf(dm) * real_binomial(n - lam, dm as u64)
}

/// `p(n) rate^{n−λ}`.
pub fn w_greater_bound(n: f64, lam: f64, p: &BoundParams, rate: f64) -> Result<f64> {
    if !(lam > 0.0 && lam <= n / 2.0) {
        return Err(Error::Domain(format!(
            "need 0 < λ ≤ n/2, got λ={lam} n={n}"
        )));
    }
    Ok(p_poly(n, lam, p) * rate.powf(n - lam))
}

/// `log M` for `M = (d^m + 1)[G:Stab(m)] γ(c)^{d^m} (e/d^m)^{d^m}`.
pub fn log_m_constant(p: &BoundParams, gamma_at_c: f64) -> Result<f64> {
    if !(gamma_at_c >= 1.0 && p.stab_index >= 1.0) {
        return Err(Error::Domain(
            "γ(c) and [G:Stab(m)] must be at least 1".into(),
        ));
    }
    let dm = p.dm();
    Ok((dm + 1.0).ln() + p.stab_index.ln() + dm * gamma_at_c.ln() + dm * (1.0 - dm.ln()))
}

/// `log 3 / log 6`.
pub fn lower_exponent() -> f64 {
    3f64.ln() / 6f64.ln()
}

/// `12^{(t/2)^{log 3/log 6}}`.
pub fn lower_bound(t: f64) -> Result<f64> {
    if !(t >= 2.0) {
        return Err(Error::Domain(format!("lower bound needs t ≥ 2, got {t}")));
    }
    Ok(12f64.powf((t / 2.0).powf(lower_exponent())))
}
