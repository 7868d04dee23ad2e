//! Markov order estimators.
//!
//! - universal Markov order `M(x) = min{k : (n-k) h_k(x) <= H(x)}`
//! - Krichevsky-Trofimov order `K(x)`, the least maximizer of `PPM_k(x)`
//! - Merhav-Gutman-Ziv `M_lambda(x) = min{k : h_k(x) <= LZ(x)/n + lambda}`
//! - Ryabko-Astola-Malyutov test: accept order `<= M` iff
//!   `(n-M) h_M(x) <= H(x) + log(1/alpha)`
//!
//! Every estimator returns 0 on the empty string.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::codes::{lz78_code_length, CodeLength, PpmMixture};
use crate::{EntropyProfile, Error, FrequencyIndex, Result, Sequence};

/// Result of [`universal_markov_order`].
#[derive(Debug, Clone, PartialEq)]
pub struct OrderReport {
    pub order: usize,
    pub backend: String,
    /// `H(x)` in bits.
    pub h_bits: f64,
    /// `h_k` for `k = 0..=order`.
    pub profile: EntropyProfile,
    pub n: usize,
}

impl Serialize for OrderReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Row {
            k: usize,
            h: f64,
            weighted: f64,
        }
        let rows: Vec<Row> = (0..self.profile.len())
            .map(|k| Row { k, h: self.profile.h[k], weighted: self.profile.weighted[k] })
            .collect();
        let mut s = serializer.serialize_struct("OrderReport", 5)?;
        s.serialize_field("n", &self.n)?;
        s.serialize_field("backend", &self.backend)?;
        s.serialize_field("H_bits", &self.h_bits)?;
        s.serialize_field("order", &self.order)?;
        s.serialize_field("profile", &rows)?;
        s.end()
    }
}

/// Least `k` with `(n-k) h_k <= threshold`, scanning upward and recording
/// the profile on the way. Saturates at `n` if no order qualifies, which
/// only happens for a non-positive threshold.
pub(crate) fn scan_order(idx: &FrequencyIndex<'_>, threshold: f64) -> (usize, EntropyProfile) {
    let n = idx.len();
    let mut profile = EntropyProfile::empty(n);
    if n == 0 {
        return (0, profile);
    }
    let mut ctx = idx.classes(0);
    for k in 0..n {
        let ext = idx.classes(k + 1);
        let weighted = idx.weighted_entropy_from(&ctx, &ext, k);
        profile.push(weighted, idx.vocab_size(k));
        if weighted <= threshold {
            return (k, profile);
        }
        ctx = ext;
    }
    (n, profile)
}

pub fn universal_markov_order_indexed(idx: &FrequencyIndex<'_>, code: &dyn CodeLength) -> OrderReport {
    let h_bits = code.pointwise_entropy_indexed(idx);
    report_for(idx, code.name(), h_bits)
}

pub(crate) fn report_for(idx: &FrequencyIndex<'_>, backend: &str, h_bits: f64) -> OrderReport {
    let (order, profile) = scan_order(idx, h_bits);
    OrderReport { order, backend: backend.to_string(), h_bits, profile, n: idx.len() }
}

/// Universal Markov order of `x` for the given code.
pub fn universal_markov_order(x: &Sequence, code: &dyn CodeLength) -> OrderReport {
    universal_markov_order_indexed(&FrequencyIndex::build(x), code)
}

/// Krichevsky-Trofimov order; ties within `1e-9` bits go to the smaller order.
pub fn kt_order(x: &Sequence) -> usize {
    let idx = FrequencyIndex::build(x);
    PpmMixture::default().analyze(&idx).kt_order()
}

pub fn mgz_order_indexed(idx: &FrequencyIndex<'_>, lambda: f64) -> Result<usize> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::InvalidLambda(lambda));
    }
    let n = idx.len();
    if n == 0 {
        return Ok(0);
    }
    let rhs = lz78_code_length(idx.sequence()) / n as f64 + lambda;
    let mut ctx = idx.classes(0);
    for k in 0..n {
        let ext = idx.classes(k + 1);
        let h = idx.weighted_entropy_from(&ctx, &ext, k) / (n - k) as f64;
        if h <= rhs {
            return Ok(k);
        }
        ctx = ext;
    }
    // h_{n-1} = 0 always qualifies
    unreachable!("h_(n-1) is zero")
}

/// Merhav-Gutman-Ziv estimator with threshold `lambda > 0`.
pub fn mgz_order(x: &Sequence, lambda: f64) -> Result<usize> {
    mgz_order_indexed(&FrequencyIndex::build(x), lambda)
}

/// Outcome of [`ram_test`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RamTestResult {
    pub order: usize,
    pub alpha: f64,
    /// `(n-M) h_M(x) - H_code(x)` in bits.
    pub statistic: f64,
    /// `log2(1/alpha)`.
    pub threshold: f64,
    pub reject: bool,
}

pub fn ram_test_indexed(
    idx: &FrequencyIndex<'_>,
    order: usize,
    alpha: f64,
    code: &dyn CodeLength,
) -> Result<RamTestResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let n = idx.len();
    if order >= n {
        return Err(Error::OrderOutOfRange { k: order, n });
    }
    let weighted = idx.weighted_entropy_from(&idx.classes(order), &idx.classes(order + 1), order);
    let statistic = weighted - code.critical_length(idx);
    let threshold = (1.0 / alpha).log2();
    Ok(RamTestResult { order, alpha, statistic, threshold, reject: statistic > threshold })
}

/// Tests the null hypothesis "Markov order <= `order`" at level `alpha`.
/// The LZ78 backend enters with its raw code length, PPM with the full
/// mixture entropy.
pub fn ram_test(x: &Sequence, order: usize, alpha: f64, code: &dyn CodeLength) -> Result<RamTestResult> {
    ram_test_indexed(&FrequencyIndex::build(x), order, alpha, code)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{Lz78Code, Shifted};

    fn seq(s: &str) -> Sequence {
        Sequence::from_letters(s, 2).unwrap()
    }

    /// Brute-force evaluation of the defining sets.
    fn brute_mgz(x: &Sequence, lambda: f64) -> usize {
        let idx = FrequencyIndex::build(x);
        let rhs = lz78_code_length(x) / x.len() as f64 + lambda;
        (0..x.len()).find(|&k| idx.emp_cond_entropy(k).unwrap() <= rhs).unwrap()
    }

    #[test]
    fn universal_examples() {
        let r = universal_markov_order(&seq("aaaa"), &PpmMixture::default());
        assert_eq!(r.order, 0);
        assert_eq!(r.profile.len(), 1);
        let x = seq("abbabaababbbaababa");
        let idx = FrequencyIndex::build(&x);
        let r = universal_markov_order(&x, &PpmMixture::default());
        assert!(r.order <= idx.max_repetition() + 1);
        let e = universal_markov_order(&seq(""), &Lz78Code);
        assert_eq!(e.order, 0);
    }

    #[test]
    fn report_json_shape() {
        let r = universal_markov_order(&seq("abab"), &PpmMixture::default());
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["n"], 4);
        assert_eq!(v["backend"], "ppm");
        assert!(v["H_bits"].is_f64());
        assert_eq!(v["profile"][0]["k"], 0);
        assert_eq!(v["profile"].as_array().unwrap().len(), r.order + 1);
    }

    #[test]
    fn kt_example_aaaa() {
        assert_eq!(kt_order(&seq("aaaa")), 0);
        assert_eq!(kt_order(&seq("a")), 0);
        assert_eq!(kt_order(&seq("")), 0);
    }

    #[test]
    fn mgz_examples() {
        for s in ["abbab", "aaaa", "abab", "abbbbabaaaba"] {
            assert_eq!(mgz_order(&seq(s), 1.0).unwrap(), 0);
        }
        assert_eq!(mgz_order(&seq("aaaa"), 0.01).unwrap(), 0);
        assert_eq!(mgz_order(&seq("abab"), 0.1).unwrap(), brute_mgz(&seq("abab"), 0.1));
        for s in ["abbab", "abbbbabaaaba", "ababababababab", "aabbaabbaabbaabb"] {
            for lambda in [0.01, 0.1, 0.5] {
                assert_eq!(mgz_order(&seq(s), lambda).unwrap(), brute_mgz(&seq(s), lambda));
            }
        }
        assert!(matches!(mgz_order(&seq("ab"), 0.0), Err(Error::InvalidLambda(_))));
        assert_eq!(mgz_order(&seq(""), 0.1).unwrap(), 0);
    }

    #[test]
    fn ram_examples() {
        let x = seq("abbababbbaabab");
        let l = FrequencyIndex::build(&x).max_repetition();
        for m in l + 1..x.len() {
            assert!(!ram_test(&x, m, 0.05, &Lz78Code).unwrap().reject);
        }
        assert!(matches!(ram_test(&x, 0, 1.0, &Lz78Code), Err(Error::InvalidAlpha(_))));
        assert!(matches!(ram_test(&x, 0, 0.0, &Lz78Code), Err(Error::InvalidAlpha(_))));
        assert!(ram_test(&x, x.len(), 0.5, &Lz78Code).is_err());
        let r = ram_test(&x, 0, 0.25, &Lz78Code).unwrap();
        assert_eq!(r.threshold, 2.0);
        assert_eq!(r.reject, r.statistic > 2.0);
    }

    #[test]
    fn shifted_code_lowers_order() {
        let x = seq("abaababaabaababaababaabaababaabaababaababa");
        let base = universal_markov_order(&x, &PpmMixture::default()).order;
        for c in [1.0, 10.0] {
            let shifted = Shifted { inner: PpmMixture::default(), offset: c };
            assert!(universal_markov_order(&x, &shifted).order <= base);
        }
    }
}
