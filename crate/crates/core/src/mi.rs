//! Pointwise mutual information, its vocabulary bound under the PPM
//! semi-distribution, and power-law (Hilberg) exponent estimation.

use rayon::prelude::*;
use serde::Serialize;

use crate::codes::{log_zeta2, CodeLength, PpmMixture};
use crate::orders::universal_markov_order_indexed;
use crate::sources::{derive_seed, SourceModel};
use crate::{Error, FrequencyIndex, Result, Sequence};

const LOG2_E: f64 = std::f64::consts::LOG2_E;

fn check_split(m: usize, split: usize) -> Result<()> {
    if split == 0 || split >= m {
        return Err(Error::InvalidSplit { split, m });
    }
    Ok(())
}

/// `I(x_1^n; x_{n+1}^m) = H(x_1^n) + H(x_{n+1}^m) - H(x_1^m)` for one code.
/// Requires `1 <= n < m`.
pub fn pointwise_mi(x: &Sequence, split: usize, code: &dyn CodeLength) -> Result<f64> {
    check_split(x.len(), split)?;
    let left = x.slice(1, split)?;
    let right = x.slice(split + 1, x.len())?;
    Ok(code.pointwise_entropy(&left) + code.pointwise_entropy(&right) - code.pointwise_entropy(x))
}

/// `2 [D |V_M| + m log D / H + 2 log(pi^2/6) + 4] log(e^2 m)`, all pieces
/// taken from the whole string.
fn bound_formula(d: usize, vocab: u64, m: usize, h: f64) -> f64 {
    let df = d as f64;
    let m_f = m as f64;
    2.0 * (df * vocab as f64 + m_f * df.log2() / h + 2.0 * log_zeta2() + 4.0) * (2.0 * LOG2_E + m_f.log2())
}

fn bound_precondition(order: usize, split: usize, m: usize) -> Result<()> {
    if order >= split {
        return Err(Error::BoundPrecondition(format!("M = {order} is not below the left length n = {split}")));
    }
    if order >= m - split {
        return Err(Error::BoundPrecondition(format!(
            "M = {order} is not below the right length m - n = {}",
            m - split
        )));
    }
    Ok(())
}

/// Upper bound on the PPM pointwise mutual information across `split`.
/// The universal order `M(x_1^m)` must be below both block lengths.
pub fn mi_bound_rhs(x: &Sequence, split: usize) -> Result<f64> {
    check_split(x.len(), split)?;
    let idx = FrequencyIndex::build(x);
    let report = universal_markov_order_indexed(&idx, &PpmMixture::default());
    bound_precondition(report.order, split, x.len())?;
    Ok(bound_formula(x.alphabet_size(), idx.vocab_size(report.order), x.len(), report.h_bits))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiReport {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "I_bits")]
    pub i_bits: f64,
    /// `M(x_1^m)`.
    pub order: usize,
    /// `|V_M(x_1^m)|`.
    pub vocab: u64,
    /// `None` unless the code is the PPM mixture and the order is admissible.
    pub bound_rhs: Option<f64>,
}

impl MiReport {
    pub fn bound_ok(&self) -> Option<bool> {
        self.bound_rhs.map(|b| self.i_bits <= b)
    }
}

/// One row per block `n`: mutual information between `x_1^n` and
/// `x_{n+1}^{2n}`, with the order and vocabulary of `x_1^{2n}`.
pub fn mi_profile(x: &Sequence, blocks: &[usize], code: &dyn CodeLength) -> Result<Vec<MiReport>> {
    blocks
        .iter()
        .map(|&n| {
            let m = 2 * n;
            if n == 0 || m > x.len() {
                return Err(Error::BlockTooLarge { block: n, needed: m, len: x.len() });
            }
            let whole = x.slice(1, m)?;
            let idx = FrequencyIndex::build(&whole);
            let report = universal_markov_order_indexed(&idx, code);
            let left = code.pointwise_entropy(&x.slice(1, n)?);
            let right = code.pointwise_entropy(&x.slice(n + 1, m)?);
            let vocab = idx.vocab_size(report.order);
            let bound_rhs = (code.as_ppm().is_some() && bound_precondition(report.order, n, m).is_ok())
                .then(|| bound_formula(x.alphabet_size(), vocab, m, report.h_bits));
            Ok(MiReport { n, m, i_bits: left + right - report.h_bits, order: report.order, vocab, bound_rhs })
        })
        .collect()
}

/// CSV with columns `n,m,I_bits,order_M,vocab_M,bound_rhs,bound_ok`.
/// Rows without a bound leave the last two fields empty.
pub fn mi_profile_csv(rows: &[MiReport]) -> String {
    let mut out = String::from("n,m,I_bits,order_M,vocab_M,bound_rhs,bound_ok\n");
    for r in rows {
        let (b, ok) = match (r.bound_rhs, r.bound_ok()) {
            (Some(b), Some(ok)) => (b.to_string(), ok.to_string()),
            _ => (String::new(), String::new()),
        };
        out.push_str(&format!("{},{},{},{},{},{},{}\n", r.n, r.m, r.i_bits, r.order, r.vocab, b, ok));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
}

impl MeanEstimate {
    fn of(values: &[f64]) -> Self {
        let t = values.len() as f64;
        let mean = values.iter().sum::<f64>() / t;
        if values.len() < 2 {
            return MeanEstimate { mean, std_err: 0.0 };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1.0);
        MeanEstimate { mean, std_err: (var / t).sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedMiReport {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// Estimate of `E I(X_1^n; X_{n+1}^{2n})` under the PPM code.
    pub lhs: MeanEstimate,
    /// Estimate of the expected vocabulary bound.
    pub rhs: MeanEstimate,
    /// `lhs.mean <= rhs.mean + 2 * sqrt(lhs.se^2 + rhs.se^2)`.
    pub holds: bool,
}

/// Monte Carlo comparison of the expected PPM mutual information between
/// adjacent blocks of length `n` with
/// `2 E[D |V_M(X_1^{2n})| + 4n log D / H(X_1^{2n}) + 4 log(pi^2/6) + 6] log(2 e^2 n)`.
pub fn expected_mi_check(src: &SourceModel, n: usize, trials: usize, seed: u64) -> Result<ExpectedMiReport> {
    if trials == 0 {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    if n == 0 {
        return Err(Error::InvalidSplit { split: 0, m: 0 });
    }
    let d = src.alphabet_size() as f64;
    let ppm = PpmMixture::default();
    let pairs: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let x = src.sample(2 * n, derive_seed(seed, t as u64));
            let idx = FrequencyIndex::build(&x);
            let report = universal_markov_order_indexed(&idx, &ppm);
            let left = ppm.pointwise_entropy(&x.slice(1, n).expect("in range"));
            let right = ppm.pointwise_entropy(&x.slice(n + 1, 2 * n).expect("in range"));
            let vocab = idx.vocab_size(report.order) as f64;
            let nf = n as f64;
            let rhs = 2.0
                * (d * vocab + 4.0 * nf * d.log2() / report.h_bits + 4.0 * log_zeta2() + 6.0)
                * (1.0 + 2.0 * LOG2_E + nf.log2());
            (left + right - report.h_bits, rhs)
        })
        .collect();
    let lhs = MeanEstimate::of(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let rhs = MeanEstimate::of(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
    let slack = 2.0 * lhs.std_err.hypot(rhs.std_err);
    Ok(ExpectedMiReport { n, trials, seed, lhs, rhs, holds: lhs.mean <= rhs.mean + slack })
}

/// `log2(x + 1)` for `x >= 0`, else 0.
pub fn log_plus(x: f64) -> f64 {
    if x >= 0.0 {
        (x + 1.0).log2()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HilbergFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Number of (largest) grid points entering the regression.
    pub points_used: usize,
    /// `log+ s(n) / log n` at every grid point, in grid order.
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HilbergEstimate {
    /// Regression slope clamped to `[0, 1]`.
    pub exponent: f64,
    pub grid: Vec<usize>,
    pub values: Vec<f64>,
    pub fit: HilbergFit,
}

/// Finite-grid proxy for `limsup log+ s(n) / log n`: the least-squares
/// slope of `log+ s(n)` against `log n` over the larger half of the grid.
pub fn hilberg_estimate(points: &[(usize, f64)]) -> Result<HilbergEstimate> {
    if points.len() < 4 {
        return Err(Error::TooFewPoints { needed: 4, got: points.len() });
    }
    let mut pts = points.to_vec();
    pts.sort_by_key(|p| p.0);
    if pts[0].0 < 2 {
        return Err(Error::InvalidGrid(format!("block size {} is below 2", pts[0].0)));
    }
    if pts.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidGrid("block sizes must be distinct".into()));
    }
    let ratios = pts.iter().map(|&(n, s)| log_plus(s) / (n as f64).log2()).collect();
    let top = &pts[pts.len() - pts.len() / 2..];
    let xs: Vec<f64> = top.iter().map(|p| (p.0 as f64).log2()).collect();
    let ys: Vec<f64> = top.iter().map(|p| log_plus(p.1)).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(HilbergEstimate {
        exponent: slope.clamp(0.0, 1.0),
        grid: pts.iter().map(|p| p.0).collect(),
        values: pts.iter().map(|p| p.1).collect(),
        fit: HilbergFit { slope, intercept: my - slope * mx, r_squared, points_used: top.len(), ratios },
    })
}
