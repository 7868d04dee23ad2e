//! Universal code-length backends.
//!
//! A backend maps a string to a pointwise entropy `H(x) = -log Pi(x)` for
//! some semi-distribution `Pi`, i.e. `sum_w Pi(w) <= 1` over all finite
//! strings.

mod lz78;
mod ppm;

use std::sync::Arc;

pub use lz78::{lz78_code_length, lz78_entropy, lz78_phrase_count, Lz78Code};
pub use ppm::{
    ppm_alpha, ppm_bound_gap, ppm_cond, ppm_conditional, ppm_log_measure, ppm_log_measure_closed,
    ppm_semidistribution_entropy, PpmAnalysis, PpmMixture,
};

use crate::{Alphabet, Error, FrequencyIndex, Result, Sequence};

/// `log2(pi^2 / 6)`, the length correction shared by the corrected codes.
pub fn log_zeta2() -> f64 {
    (std::f64::consts::PI.powi(2) / 6.0).log2()
}

/// A pointwise entropy function `H(x)` in bits.
pub trait CodeLength: Sync {
    fn name(&self) -> &str;

    fn pointwise_entropy_indexed(&self, idx: &FrequencyIndex<'_>) -> f64;

    fn pointwise_entropy(&self, x: &Sequence) -> f64 {
        self.pointwise_entropy_indexed(&FrequencyIndex::build(x))
    }

    /// Length entering the order test's critical region. Codes whose
    /// entropy carries a correction term may return the raw length here.
    fn critical_length(&self, idx: &FrequencyIndex<'_>) -> f64 {
        self.pointwise_entropy_indexed(idx)
    }

    /// The PPM mixture behind this code, if any.
    fn as_ppm(&self) -> Option<&PpmMixture> {
        None
    }
}

impl<C: CodeLength + ?Sized> CodeLength for &C {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn pointwise_entropy_indexed(&self, idx: &FrequencyIndex<'_>) -> f64 {
        (**self).pointwise_entropy_indexed(idx)
    }
    fn critical_length(&self, idx: &FrequencyIndex<'_>) -> f64 {
        (**self).critical_length(idx)
    }
    fn as_ppm(&self) -> Option<&PpmMixture> {
        (**self).as_ppm()
    }
}

impl<C: CodeLength + ?Sized + Send> CodeLength for Box<C> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn pointwise_entropy_indexed(&self, idx: &FrequencyIndex<'_>) -> f64 {
        (**self).pointwise_entropy_indexed(idx)
    }
    fn critical_length(&self, idx: &FrequencyIndex<'_>) -> f64 {
        (**self).critical_length(idx)
    }
    fn as_ppm(&self) -> Option<&PpmMixture> {
        (**self).as_ppm()
    }
}

/// `H(x) = n log D`. Kraft sum is exactly one at every length.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformCode;

impl CodeLength for UniformCode {
    fn name(&self) -> &str {
        "uniform"
    }
    fn pointwise_entropy_indexed(&self, idx: &FrequencyIndex<'_>) -> f64 {
        idx.len() as f64 * (idx.alphabet_size() as f64).log2()
    }
}

/// A backend with a constant added to every code length.
#[derive(Debug, Clone)]
pub struct Shifted<C> {
    pub inner: C,
    pub offset: f64,
}

impl<C: CodeLength> CodeLength for Shifted<C> {
    fn name(&self) -> &str {
        "shifted"
    }
    fn pointwise_entropy_indexed(&self, idx: &FrequencyIndex<'_>) -> f64 {
        self.inner.pointwise_entropy_indexed(idx) + self.offset
    }
}

/// `H(x) = c` for every string. Not a semi-distribution for most `c`;
/// used as a negative control.
#[derive(Debug, Clone, Copy)]
pub struct ConstantCode(pub f64);

impl CodeLength for ConstantCode {
    fn name(&self) -> &str {
        "constant"
    }
    fn pointwise_entropy_indexed(&self, _idx: &FrequencyIndex<'_>) -> f64 {
        self.0
    }
}

/// Backend selection by name: `"ppm"` or `"lz78"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Ppm { exact: bool },
    Lz78,
}

impl Backend {
    pub fn from_name(name: &str, ppm_exact: bool) -> Option<Self> {
        match name {
            "ppm" => Some(Backend::Ppm { exact: ppm_exact }),
            "lz78" => Some(Backend::Lz78),
            _ => None,
        }
    }

    fn code(&self) -> &dyn CodeLength {
        match self {
            Backend::Ppm { exact: false } => &PpmMixture { exact: false },
            Backend::Ppm { exact: true } => &PpmMixture { exact: true },
            Backend::Lz78 => &Lz78Code,
        }
    }
}

impl CodeLength for Backend {
    fn name(&self) -> &str {
        self.code().name()
    }
    fn pointwise_entropy_indexed(&self, idx: &FrequencyIndex<'_>) -> f64 {
        self.code().pointwise_entropy_indexed(idx)
    }
    fn pointwise_entropy(&self, x: &Sequence) -> f64 {
        self.code().pointwise_entropy(x)
    }
    fn critical_length(&self, idx: &FrequencyIndex<'_>) -> f64 {
        self.code().critical_length(idx)
    }
    fn as_ppm(&self) -> Option<&PpmMixture> {
        self.code().as_ppm()
    }
}

/// Largest number of strings [`kraft_sum`] will enumerate.
pub const KRAFT_BUDGET: u64 = 1 << 20;

/// Calls `f` on every string in `X^n` for `|X| = d`, in lexicographic order.
pub fn for_each_string(n: usize, d: usize, mut f: impl FnMut(&Sequence)) -> Result<()> {
    let total = (d as u64).checked_pow(n as u32).filter(|&t| t <= KRAFT_BUDGET);
    let total = total.ok_or(Error::BudgetExceeded { d, n })?;
    let alphabet = Arc::new(Alphabet::letters(d)?);
    let mut digits = vec![0u32; n];
    for _ in 0..total {
        let x = Sequence::new(digits.clone(), Arc::clone(&alphabet))?;
        f(&x);
        for pos in (0..n).rev() {
            digits[pos] += 1;
            if (digits[pos] as usize) < d {
                break;
            }
            digits[pos] = 0;
        }
    }
    Ok(())
}

/// `sum_{x in X^n} 2^{-H(x)}` by full enumeration (`D^n <= 2^20`).
pub fn kraft_sum(code: &dyn CodeLength, n: usize, d: usize) -> Result<f64> {
    let mut sum = 0.0;
    for_each_string(n, d, |x| sum += (-code.pointwise_entropy(x)).exp2())?;
    Ok(sum)
}
