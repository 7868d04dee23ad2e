//! Adaptive order-`k` Markov measures `PPM_k` and their mixture.
//!
//! ```text
//! PPM_k(x_i | x_1^{i-1}) = 1/D                                           if k > i - 2
//!                        = (N(x_{i-k}^i | x_1^{i-1}) + 1) / (N(x_{i-k}^{i-1} | x_1^{i-2}) + D)   else
//!
//! Pi(x_1^n) = 6^2/pi^4 * (n+1)^-2 * sum_{k>=0} PPM_k(x_1^n) / (k+1)^2
//! ```
//!
//! All measures are kept as `-log2` values.

use std::f64::consts::{LN_2, PI};

use super::CodeLength;
use crate::stats::Classes;
use crate::{Error, FrequencyIndex, Result, Sequence};

/// `alpha = -log2 Gamma(1 + 1/D)`, the lower end of the normalized gap.
pub fn ppm_alpha(d: usize) -> f64 {
    -libm::lgamma(1.0 + 1.0 / d as f64) / LN_2
}

/// `PPM_k(next | prefix)` by direct scanning of `prefix`.
pub fn ppm_conditional(prefix: &[u32], next: u32, k: usize, d: usize) -> f64 {
    let i = prefix.len() + 1;
    if k + 2 > i {
        return 1.0 / d as f64;
    }
    let ctx = &prefix[i - 1 - k..];
    let occurs = |hay: &[u32], w: &[u32]| {
        if w.is_empty() {
            hay.len() + 1
        } else if w.len() > hay.len() {
            0
        } else {
            hay.windows(w.len()).filter(|v| *v == w).count()
        }
    };
    let mut ext = ctx.to_vec();
    ext.push(next);
    let mut full = prefix.to_vec();
    full.push(next);
    let num = occurs(&full[..i - 1], &ext) + 1;
    let den = occurs(&prefix[..i - 2], ctx) + d;
    num as f64 / den as f64
}

/// `PPM_k(x_i | x_1^{i-1})` for 1-based `i`.
pub fn ppm_cond(x: &Sequence, i: usize, k: usize) -> Result<f64> {
    let n = x.len();
    if i < 1 || i > n {
        return Err(Error::PositionOutOfRange { i, n });
    }
    let s = x.symbols();
    Ok(ppm_conditional(&s[..i - 1], s[i - 1], k, x.alphabet_size()))
}

/// `-log2 PPM_k(x_1^n)` by the position-by-position product.
pub fn ppm_log_measure(x: &Sequence, k: usize) -> f64 {
    let n = x.len();
    let d = x.alphabet_size();
    if k + 2 > n {
        return n as f64 * (d as f64).log2();
    }
    let idx = FrequencyIndex::build(x);
    incremental(&idx, &idx.classes(k), &idx.classes(k + 1), k)
}

/// Incremental evaluation from order-`k` and `(k+1)` classes, `k <= n - 2`.
///
/// Counts are updated after each position, so when position `i` is coded
/// they hold the `(k+1)`-grams ending at or before `i - 1` and the contexts
/// ending at or before `i - 2`.
fn incremental(idx: &FrequencyIndex<'_>, ctx: &Classes, ext: &Classes, k: usize) -> f64 {
    let n = idx.len();
    let d = idx.alphabet_size();
    let log_d = (d as f64).log2();
    let mut ctx_count = vec![0u64; ctx.distinct];
    let mut ext_count = vec![0u64; ext.distinct];
    let mut bits = k as f64 * log_d;
    for t in k..n {
        let s = t - k;
        let (c, e) = (ctx.ids[s] as usize, ext.ids[s] as usize);
        let p = (ext_count[e] + 1) as f64 / (ctx_count[c] + d as u64) as f64;
        bits -= p.log2();
        ctx_count[c] += 1;
        ext_count[e] += 1;
    }
    bits
}

/// `-log2 PPM_k(x_1^n)` from the factorial closed form
///
/// ```text
/// PPM_k(x_1^n) = D^-k prod_{w in V_k(x_1^{n-1})} (D-1)! prod_a N(wa|x_1^n)! / (N(w|x_1^{n-1}) + D - 1)!
/// ```
///
/// evaluated with `ln Gamma`. Defined for `k <= n - 2`.
pub fn ppm_log_measure_closed(x: &Sequence, k: usize) -> Result<f64> {
    let n = x.len();
    if k + 2 > n {
        return Err(Error::OrderOutOfRange { k, n });
    }
    let d = x.alphabet_size();
    let idx = FrequencyIndex::build(x);
    let (ctx, ext) = (idx.classes(k), idx.classes(k + 1));
    let starts = n - k;
    let mut ctx_count = vec![0u64; ctx.distinct];
    let mut ext_count = vec![0u64; ext.distinct];
    for s in 0..starts {
        ctx_count[ctx.ids[s] as usize] += 1;
        ext_count[ext.ids[s] as usize] += 1;
    }
    let df = d as f64;
    let lg = |v: f64| libm::lgamma(v);
    let mut nats = 0.0;
    for &c in ctx_count.iter().filter(|&&c| c > 0) {
        nats += lg(c as f64 + df) - lg(df);
    }
    for &e in &ext_count {
        nats -= lg(e as f64 + 1.0);
    }
    Ok(k as f64 * df.log2() + nats / LN_2)
}

/// Normalized gap
/// `[-log PPM_k(x) - k log D - (n-k) h_k(x)] / (D card V_k(x_1^{n-1}))`,
/// which lies in `[alpha, log2(e^2 n)]`. Defined for `k <= n - 2`.
pub fn ppm_bound_gap(x: &Sequence, k: usize) -> Result<f64> {
    let n = x.len();
    if k + 2 > n {
        return Err(Error::OrderOutOfRange { k, n });
    }
    let d = x.alphabet_size();
    let idx = FrequencyIndex::build(x);
    let (ctx, ext) = (idx.classes(k), idx.classes(k + 1));
    let log_ppm = incremental(&idx, &ctx, &ext, k);
    let weighted = idx.weighted_entropy_from(&ctx, &ext, k);
    let mut seen = vec![false; ctx.distinct];
    for &c in &ctx.ids[..n - k] {
        seen[c as usize] = true;
    }
    let vocab = seen.iter().filter(|&&b| b).count();
    Ok((log_ppm - k as f64 * (d as f64).log2() - weighted) / (d * vocab) as f64)
}

/// `-log Pi(x)` under the PPM mixture.
pub fn ppm_semidistribution_entropy(x: &Sequence) -> f64 {
    PpmMixture::default().pointwise_entropy(x)
}

/// The PPM mixture semi-distribution.
///
/// Orders above the maximal repetition length `L` all give `D^-n`: no
/// context of length `> L` recurs, so every factor is `1/D`. The default
/// mode therefore evaluates orders `0..=min(L, n-2)` and folds the rest into
/// the closed-form tail, which is exact. `exact` evaluates every order up to
/// `n - 2` literally.
#[derive(Debug, Clone, Copy, Default)]
pub struct PpmMixture {
    pub exact: bool,
}

impl PpmMixture {
    pub fn exact() -> Self {
        Self { exact: true }
    }

    pub fn analyze(&self, idx: &FrequencyIndex<'_>) -> PpmAnalysis {
        let n = idx.len();
        let d = idx.alphabet_size();
        let head = if n < 2 {
            0
        } else if self.exact {
            n - 1
        } else {
            (n - 2).min(idx.max_repetition()) + 1
        };
        let mut log_measures = Vec::with_capacity(head);
        if head > 0 {
            let mut ctx = idx.classes(0);
            for k in 0..head {
                let ext = idx.classes(k + 1);
                log_measures.push(incremental(idx, &ctx, &ext, k));
                ctx = ext;
            }
        }
        let tail_log = n as f64 * (d as f64).log2();
        let entropy_bits = mixture_entropy(&log_measures, tail_log, n);
        PpmAnalysis { n, log_measures, tail_log, entropy_bits }
    }
}

/// `H(x) = log(pi^4/36) + 2 log(n+1) - log sum_k 2^{-L_k} / (k+1)^2`, where
/// `L_k = head[k]` for the evaluated orders and `tail` for all later ones.
fn mixture_entropy(head: &[f64], tail: f64, n: usize) -> f64 {
    let mut terms: Vec<f64> = head.iter().enumerate().map(|(k, &l)| -l - 2.0 * ((k + 1) as f64).log2()).collect();
    // sum_{j > head.len()} 1/j^2, summed small-to-large before subtracting
    let partial: f64 = (1..=head.len()).rev().map(|j| 1.0 / (j as f64 * j as f64)).sum();
    let tail_weight = PI * PI / 6.0 - partial;
    if tail_weight > 0.0 {
        terms.push(-tail + tail_weight.log2());
    }
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|&t| (t - max).exp2()).sum();
    let log_sum = max + sum.log2();
    (PI.powi(4) / 36.0).log2() + 2.0 * ((n + 1) as f64).log2() - log_sum
}

/// Per-order PPM values for one string and the resulting mixture entropy.
#[derive(Debug, Clone)]
pub struct PpmAnalysis {
    n: usize,
    log_measures: Vec<f64>,
    tail_log: f64,
    entropy_bits: f64,
}

impl PpmAnalysis {
    /// `H(x)` in bits.
    pub fn entropy_bits(&self) -> f64 {
        self.entropy_bits
    }

    /// `-log2 PPM_k(x)` for any `k`.
    pub fn log_measure(&self, k: usize) -> f64 {
        self.log_measures.get(k).copied().unwrap_or(self.tail_log)
    }

    /// Orders evaluated individually; all later orders share the tail value.
    pub fn evaluated_orders(&self) -> usize {
        self.log_measures.len()
    }

    /// Krichevsky-Trofimov order: the least `k` maximizing `PPM_k(x)`.
    /// Values within `1e-9` bits of the maximum count as ties.
    pub fn kt_order(&self) -> usize {
        if self.n == 0 {
            return 0;
        }
        // Orders past the evaluated head are all equal to the tail, so one
        // representative suffices.
        let candidates = self.log_measures.len() + 1;
        let value = |k: usize| self.log_measure(k);
        let best = (0..candidates).map(value).fold(f64::INFINITY, f64::min);
        (0..candidates).find(|&k| value(k) <= best + 1e-9).unwrap_or(0)
    }
}

impl CodeLength for PpmMixture {
    fn name(&self) -> &str {
        "ppm"
    }

    fn pointwise_entropy_indexed(&self, idx: &FrequencyIndex<'_>) -> f64 {
        self.analyze(idx).entropy_bits
    }

    fn as_ppm(&self) -> Option<&PpmMixture> {
        Some(self)
    }
}
