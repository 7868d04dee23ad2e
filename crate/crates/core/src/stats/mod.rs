//! Substring statistics over a single string.
//!
//! [`FrequencyIndex`] holds a suffix array and LCP table. Every query the
//! estimators need reduces to a partition of start positions into classes of
//! equal `k`-grams, read off the suffix array in one linear sweep per `k`.

mod suffix;

use serde::Serialize;

use crate::{Error, Result, Sequence};

/// Partition of the start positions `0..=n-k` by their `k`-gram.
///
/// Class ids are dense, assigned in lexicographic order of the `k`-gram.
#[derive(Debug, Clone)]
pub(crate) struct Classes {
    pub(crate) ids: Vec<u32>,
    pub(crate) distinct: usize,
}

/// Immutable substring statistics for one sequence.
#[derive(Debug, Clone)]
pub struct FrequencyIndex<'a> {
    seq: &'a Sequence,
    sa: Vec<u32>,
    lcp: Vec<u32>,
    /// `lcp_at_least[k]` = number of adjacent suffix pairs with LCP >= k.
    lcp_at_least: Vec<u64>,
    max_lcp: usize,
}

impl<'a> FrequencyIndex<'a> {
    pub fn build(seq: &'a Sequence) -> Self {
        let s = seq.symbols();
        let sa = suffix::suffix_array(s, seq.alphabet_size());
        let lcp = suffix::lcp_array(s, &sa);
        let max_lcp = lcp.iter().copied().max().unwrap_or(0) as usize;
        let mut lcp_at_least = vec![0u64; max_lcp + 2];
        for &l in lcp.iter().skip(1) {
            lcp_at_least[l as usize] += 1;
        }
        for k in (0..=max_lcp).rev() {
            lcp_at_least[k] += lcp_at_least[k + 1];
        }
        Self { seq, sa, lcp, lcp_at_least, max_lcp }
    }

    pub fn sequence(&self) -> &'a Sequence {
        self.seq
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    pub fn alphabet_size(&self) -> usize {
        self.seq.alphabet_size()
    }

    /// `N(w | x_1^m)` for `m` in `{n - 1, n}`, with `N(lambda | x_1^m) = m + 1`.
    pub fn count(&self, w: &[u32], m: usize) -> Result<u64> {
        let n = self.len();
        if m != n && (n == 0 || m != n - 1) {
            return Err(Error::UnsupportedPrefix { m, n });
        }
        if w.is_empty() {
            return Ok(m as u64 + 1);
        }
        let full = self.count_full(w);
        if m == n {
            return Ok(full);
        }
        // N(w|x_1^{n-1}) = N(w|x_1^n) - [x ends with w]
        let s = self.seq.symbols();
        let ends_with = w.len() <= n && &s[n - w.len()..] == w;
        Ok(full - u64::from(ends_with))
    }

    fn count_full(&self, w: &[u32]) -> u64 {
        use std::cmp::Ordering;
        let s = self.seq.symbols();
        let cmp = |p: u32| {
            let suf = &s[p as usize..];
            let l = suf.len().min(w.len());
            match suf[..l].cmp(&w[..l]) {
                Ordering::Equal if suf.len() < w.len() => Ordering::Less,
                o => o,
            }
        };
        let lo = self.sa.partition_point(|&p| cmp(p) == Ordering::Less);
        let hi = self.sa.partition_point(|&p| cmp(p) != Ordering::Greater);
        (hi - lo) as u64
    }

    /// `card V_k(x_1^n)`: 1 for `k = 0`, 0 for `k > n`.
    pub fn vocab_size(&self, k: usize) -> u64 {
        let n = self.len();
        if k == 0 {
            return 1;
        }
        if k > n {
            return 0;
        }
        let repeats = self.lcp_at_least.get(k).copied().unwrap_or(0);
        (n - k + 1) as u64 - repeats
    }

    /// Maximal repetition length `L(x_1^n)`: the longest substring occurring
    /// at least twice. Zero for `n <= 1`.
    pub fn max_repetition(&self) -> usize {
        self.max_lcp
    }

    /// Class ids of the `k`-grams starting at `0..=n-k` (requires `k <= n`).
    pub(crate) fn classes(&self, k: usize) -> Classes {
        let n = self.len();
        debug_assert!(k <= n);
        if k == 0 {
            return Classes { ids: vec![0; n + 1], distinct: 1 };
        }
        let mut ids = vec![0u32; n - k + 1];
        let mut next = 0u32;
        let mut fresh = true;
        for (r, &p) in self.sa.iter().enumerate() {
            if (self.lcp[r] as usize) < k {
                fresh = true;
            }
            if n - (p as usize) >= k {
                if fresh {
                    next += 1;
                    fresh = false;
                }
                ids[p as usize] = next - 1;
            }
        }
        Classes { ids, distinct: next as usize }
    }

    /// `(n - k) h_k(x_1^n)` in bits from precomputed classes of orders
    /// `k` and `k + 1`, summed over positions.
    pub(crate) fn weighted_entropy_from(&self, ctx: &Classes, ext: &Classes, k: usize) -> f64 {
        self.window_weighted_entropy(ctx, ext, k, 0, self.len())
    }

    /// `(m - k) h_k(y)` for the substring `y = x[lo..hi)` of length `m`,
    /// counting only occurrences inside the window. Class ids are global,
    /// so equal ids still mean equal grams. Requires `k < m`.
    pub(crate) fn window_weighted_entropy(&self, ctx: &Classes, ext: &Classes, k: usize, lo: usize, hi: usize) -> f64 {
        debug_assert!(lo + k < hi && hi <= self.len());
        let starts = lo..hi - k;
        let mut ctx_count = vec![0u32; ctx.distinct];
        let mut ext_count = vec![0u32; ext.distinct];
        for s in starts.clone() {
            ctx_count[ctx.ids[s] as usize] += 1;
            ext_count[ext.ids[s] as usize] += 1;
        }
        let mut sum = 0.0;
        for s in starts {
            let c = ctx_count[ctx.ids[s] as usize];
            let e = ext_count[ext.ids[s] as usize];
            if c != e {
                sum += (c as f64 / e as f64).log2();
            }
        }
        sum
    }

    /// Empirical conditional entropy `h_k(x_1^n)` in bits, position-sum form:
    ///
    /// ```text
    /// h_k = 1/(n-k) * sum_{i=k+1}^{n} log N(x_{i-k}^{i-1} | x_1^{n-1}) / N(x_{i-k}^i | x_1^n)
    /// ```
    pub fn emp_cond_entropy(&self, k: usize) -> Result<f64> {
        let n = self.len();
        if k >= n {
            return Err(Error::OrderOutOfRange { k, n });
        }
        let w = self.weighted_entropy_from(&self.classes(k), &self.classes(k + 1), k);
        Ok(w / (n - k) as f64)
    }

    /// `h_k(x_1^n)` in the vocabulary-sum form, summing over distinct
    /// `(k+1)`-grams instead of positions.
    pub fn emp_cond_entropy_vocab(&self, k: usize) -> Result<f64> {
        let n = self.len();
        if k >= n {
            return Err(Error::OrderOutOfRange { k, n });
        }
        let (ctx, ext) = (self.classes(k), self.classes(k + 1));
        let starts = n - k;
        let mut ctx_count = vec![0u64; ctx.distinct];
        let mut ext_count = vec![0u64; ext.distinct];
        // context class of each (k+1)-gram class
        let mut parent = vec![u32::MAX; ext.distinct];
        for s in 0..starts {
            ctx_count[ctx.ids[s] as usize] += 1;
            ext_count[ext.ids[s] as usize] += 1;
            parent[ext.ids[s] as usize] = ctx.ids[s];
        }
        let norm = starts as f64;
        let h = ext_count
            .iter()
            .zip(&parent)
            .map(|(&e, &c)| {
                let ratio = ctx_count[c as usize] as f64 / e as f64;
                e as f64 / norm * ratio.log2()
            })
            .sum();
        Ok(h)
    }

    /// `h_0 .. h_kmax` from one sweep per order.
    pub fn entropy_profile(&self, kmax: usize) -> Result<EntropyProfile> {
        let n = self.len();
        if kmax >= n {
            return Err(Error::OrderOutOfRange { k: kmax, n });
        }
        let mut profile = EntropyProfile::empty(n);
        let mut ctx = self.classes(0);
        for k in 0..=kmax {
            let ext = self.classes(k + 1);
            profile.push(self.weighted_entropy_from(&ctx, &ext, k), self.vocab_size(k));
            ctx = ext;
        }
        Ok(profile)
    }
}

/// Empirical conditional entropies `h_k` for `k = 0..=kmax`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyProfile {
    pub n: usize,
    /// `h_k` in bits.
    pub h: Vec<f64>,
    /// `(n - k) h_k` in bits.
    pub weighted: Vec<f64>,
    /// `card V_k`.
    pub vocab: Vec<u64>,
}

impl EntropyProfile {
    pub(crate) fn empty(n: usize) -> Self {
        Self { n, h: Vec::new(), weighted: Vec::new(), vocab: Vec::new() }
    }

    pub(crate) fn push(&mut self, weighted: f64, vocab: u64) {
        let k = self.h.len();
        self.h.push(weighted / (self.n - k) as f64);
        self.weighted.push(weighted);
        self.vocab.push(vocab);
    }

    /// Largest order computed, `None` when empty.
    pub fn kmax(&self) -> Option<usize> {
        self.h.len().checked_sub(1)
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// CSV with columns `k,h_k,weighted,vocab_k`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,h_k,weighted,vocab_k\n");
        for k in 0..self.h.len() {
            out.push_str(&format!("{},{},{},{}\n", k, self.h[k], self.weighted[k], self.vocab[k]));
        }
        out
    }
}
