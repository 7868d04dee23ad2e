//! Library values against direct, scan-based evaluations of the
//! definitions.

use std::collections::{HashMap, HashSet};

use markov_order::codes::{for_each_string, ppm_conditional, ppm_log_measure, ppm_log_measure_closed};
use markov_order::{FrequencyIndex, Sequence};

fn occurrences(w: &[u32], x: &[u32]) -> usize {
    if w.is_empty() {
        return x.len() + 1;
    }
    x.windows(w.len()).filter(|v| *v == w).count()
}

/// `h_k` straight from the position-sum definition.
fn h_scan(x: &[u32], k: usize) -> f64 {
    let n = x.len();
    let mut sum = 0.0;
    for i in k..n {
        let ctx = &x[i - k..i];
        let ext = &x[i - k..=i];
        sum += (occurrences(ctx, &x[..n - 1]) as f64 / occurrences(ext, x) as f64).log2();
    }
    sum / (n - k) as f64
}

/// Longest k-gram occurring at least twice (0 if none).
fn max_rep_scan(x: &[u32]) -> usize {
    (1..x.len())
        .rev()
        .find(|&k| {
            let mut seen = HashSet::new();
            x.windows(k).any(|w| !seen.insert(w))
        })
        .unwrap_or(0)
}

#[test]
fn frequency_statistics_match_scans_ternary() {
    let x = Sequence::from_letters("abcabbcacbbabcaacbcabc", 3).unwrap();
    let s = x.symbols();
    let idx = FrequencyIndex::build(&x);
    for k in 0..s.len() {
        let distinct: HashSet<_> = s.windows(k.max(1)).map(|w| w.to_vec()).collect();
        let expected = if k == 0 { 1 } else { distinct.len() as u64 };
        assert_eq!(idx.vocab_size(k), expected, "k={k}");
        let h = idx.emp_cond_entropy(k).unwrap();
        assert!((h - h_scan(s, k)).abs() < 1e-12, "k={k}");
    }
    assert_eq!(idx.max_repetition(), max_rep_scan(s));
    let mut counts: HashMap<Vec<u32>, u64> = HashMap::new();
    for w in s.windows(3) {
        *counts.entry(w.to_vec()).or_default() += 1;
    }
    for (w, c) in counts {
        assert_eq!(idx.count(&w, s.len()).unwrap(), c);
    }
}

#[test]
fn entropy_forms_agree_exhaustively() {
    for n in 2..=10 {
        for_each_string(n, 2, |x| {
            let idx = FrequencyIndex::build(x);
            for k in 0..=n - 2 {
                let a = idx.emp_cond_entropy(k).unwrap();
                let b = idx.emp_cond_entropy_vocab(k).unwrap();
                assert!((a - b).abs() <= 1e-12, "{:?} k={k}", x.symbols());
                assert!((a - h_scan(x.symbols(), k)).abs() <= 1e-12);
            }
        })
        .unwrap();
    }
}

#[test]
fn ppm_measure_matches_product_of_conditionals() {
    let x = Sequence::from_letters("abacabadabacaba", 4).unwrap();
    let s = x.symbols();
    for k in 0..=4 {
        let product: f64 = (0..s.len()).map(|i| -ppm_conditional(&s[..i], s[i], k, 4).log2()).sum();
        let incremental = ppm_log_measure(&x, k);
        assert!((product - incremental).abs() < 1e-9, "k={k}");
        let closed = ppm_log_measure_closed(&x, k).unwrap();
        assert!((closed - incremental).abs() < 1e-9, "k={k}");
    }
}

#[test]
fn ppm_conditionals_normalize() {
    let x = Sequence::from_letters("bbacbcaabcbbacabccab", 3).unwrap();
    let s = x.symbols();
    for k in 0..=8 {
        for i in 0..=s.len() {
            let total: f64 = (0..3).map(|a| ppm_conditional(&s[..i], a, k, 3)).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
