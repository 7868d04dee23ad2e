//! Invariant suites: exhaustive checks over all binary strings up to a
//! length budget, plus seeded random cases over larger strings and
//! alphabets.
//!
//! Exhaustive cases use the full-range PPM mixture. Random cases use the
//! default mixture, which gives the same values (see [`PpmMixture`]) at a
//! fraction of the cost. Orders above the maximal repetition length are
//! skipped in random cases where every quantity involved is zero there.

use std::f64::consts::LOG2_E;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::codes::{
    for_each_string, kraft_sum, ppm_alpha, ppm_bound_gap, ppm_log_measure, ppm_log_measure_closed, CodeLength,
    Lz78Code, PpmMixture, Shifted,
};
use crate::mi::{mi_bound_rhs, pointwise_mi};
use crate::orders::universal_markov_order_indexed;
use crate::sources::{derive_seed, SourceModel};
use crate::stats::Classes;
use crate::{FrequencyIndex, Result, Sequence};

/// Slack for floating-point inequalities.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Forms,
    PpmClosed,
    ShiftSandwich,
    DropSandwich,
    BlockSandwich,
    Monotone,
    EntropySum,
    RepetitionLength,
    ShiftedCode,
    RepetitionCap,
    KtDominates,
    OrderRate,
    Kraft,
    PpmGap,
    MiBound,
}

impl Suite {
    pub const ALL: [Suite; 15] = [
        Suite::Forms,
        Suite::PpmClosed,
        Suite::ShiftSandwich,
        Suite::DropSandwich,
        Suite::BlockSandwich,
        Suite::Monotone,
        Suite::EntropySum,
        Suite::RepetitionLength,
        Suite::ShiftedCode,
        Suite::RepetitionCap,
        Suite::KtDominates,
        Suite::OrderRate,
        Suite::Kraft,
        Suite::PpmGap,
        Suite::MiBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Forms => "forms",
            Suite::PpmClosed => "ppm-closed",
            Suite::ShiftSandwich => "shift",
            Suite::DropSandwich => "drop",
            Suite::BlockSandwich => "blocks",
            Suite::Monotone => "monotone",
            Suite::EntropySum => "hsum",
            Suite::RepetitionLength => "replen",
            Suite::ShiftedCode => "shifted-code",
            Suite::RepetitionCap => "repcap",
            Suite::KtDominates => "kt-order",
            Suite::OrderRate => "order-rate",
            Suite::Kraft => "kraft",
            Suite::PpmGap => "ppm-gap",
            Suite::MiBound => "mi-bound",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn description(self) -> &'static str {
        match self {
            Suite::Forms => "h_k position-sum = vocabulary-sum (1e-12)",
            Suite::PpmClosed => "PPM_k incremental = closed form (1e-9)",
            Suite::ShiftSandwich => "0 <= h_k(x_2^n) - h_{k+1}(x_1^n) <= log D",
            Suite::DropSandwich => "0 <= h_k(x_1^n) - (n-1-k)/(n-k) h_k(x_2^n) <= log min(2,D)",
            Suite::BlockSandwich => "block superadditivity of h_k within [0, log min(3,D)]",
            Suite::Monotone => "(n-k) h_k non-increasing in k",
            Suite::EntropySum => "sum_l h_l(x_1^{n+l}) <= log n",
            Suite::RepetitionLength => "L >= log_D(n - log_D n) - 1",
            Suite::ShiftedCode => "M(PPM) >= M(PPM + c), c in {1, 10}",
            Suite::RepetitionCap => "M <= L + 1",
            Suite::KtDominates => "M <= K",
            Suite::OrderRate => "M H < n log n",
            Suite::Kraft => "sum_x 2^-H(x) <= 1",
            Suite::PpmGap => "PPM gap within [alpha, log(e^2 n)]",
            Suite::MiBound => "pointwise MI <= vocabulary bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    /// Exhaustive over all binary strings of length `1..=max_n`.
    pub max_n: usize,
    pub random_cases: usize,
    pub random_max_n: usize,
    pub random_max_d: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { max_n: 10, random_cases: 0, random_max_n: 2000, random_max_d: 4, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub check: &'static str,
    pub cases: u64,
    pub violations: u64,
    /// First violation found (exhaustive cases first, then random cases in
    /// case order).
    pub counterexample: Option<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Default)]
struct Tally {
    cases: u64,
    violations: u64,
    counterexample: Option<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.violations += 1;
            if self.counterexample.is_none() {
                self.counterexample = Some(describe());
            }
        }
    }

    fn within(&mut self, value: f64, lo: f64, hi: f64, what: impl FnOnce() -> String) {
        self.check(value >= lo - EPS && value <= hi + EPS, || format!("{}: {value} outside [{lo}, {hi}]", what()));
    }

    fn merge(&mut self, other: Tally) {
        self.cases += other.cases;
        self.violations += other.violations;
        if self.counterexample.is_none() {
            self.counterexample = other.counterexample;
        }
    }
}

fn show(x: &Sequence) -> String {
    let tokens: Vec<String> = x
        .symbols()
        .iter()
        .map(|&s| String::from_utf8_lossy(x.alphabet().token(s).unwrap_or_default()).into_owned())
        .collect();
    let sep = if tokens.iter().all(|t| t.len() == 1) { "" } else { " " };
    format!("x=\"{}\" (D={})", tokens.join(sep), x.alphabet_size())
}

/// Class ids of the string's `k`-grams for `k = 0..=top + 1`, from which
/// `h_k` of any substring is read off directly.
struct Grams<'a> {
    idx: &'a FrequencyIndex<'a>,
    classes: Vec<Classes>,
}

impl<'a> Grams<'a> {
    /// With `exhaustive` every order is cached; otherwise orders above
    /// `L + 1`, where every substring has `h_k = 0`, are left out.
    fn new(idx: &'a FrequencyIndex<'a>, exhaustive: bool) -> Self {
        let n = idx.len();
        let top = if exhaustive { n } else { (idx.max_repetition() + 2).min(n) };
        Grams { idx, classes: (0..=top).map(|k| idx.classes(k)).collect() }
    }

    /// `h_k(x[lo..hi))` with 0-based, half-open bounds; requires `k < hi - lo`.
    fn h(&self, k: usize, lo: usize, hi: usize) -> f64 {
        if k + 1 >= self.classes.len() {
            return 0.0;
        }
        self.idx.window_weighted_entropy(&self.classes[k], &self.classes[k + 1], k, lo, hi) / (hi - lo - k) as f64
    }
}

/// Highest order worth visiting in `0..=limit`.
fn order_cap(limit: usize, l: usize, exhaustive: bool) -> usize {
    if exhaustive {
        limit
    } else {
        limit.min(l + 1)
    }
}

fn ppm_for(exhaustive: bool) -> PpmMixture {
    PpmMixture { exact: exhaustive }
}

fn check_string(suite: Suite, x: &Sequence, exhaustive: bool, rng: &mut ChaCha8Rng, t: &mut Tally) {
    let n = x.len();
    let d = x.alphabet_size();
    let log_d = (d as f64).log2();
    let idx = FrequencyIndex::build(x);
    let l = idx.max_repetition();
    match suite {
        Suite::Forms => {
            if n < 2 {
                return;
            }
            for k in 0..=order_cap(n - 2, l, exhaustive) {
                let a = idx.emp_cond_entropy(k).expect("k < n");
                let b = idx.emp_cond_entropy_vocab(k).expect("k < n");
                t.check((a - b).abs() <= 1e-12, || format!("{} k={k}: {a} vs {b}", show(x)));
            }
        }
        Suite::PpmClosed => {
            if n < 2 {
                return;
            }
            for k in 0..=order_cap(n - 2, l + 1, exhaustive) {
                let a = ppm_log_measure(x, k);
                let b = ppm_log_measure_closed(x, k).expect("k <= n-2");
                t.check((a - b).abs() <= 1e-9, || format!("{} k={k}: {a} vs {b}", show(x)));
            }
        }
        Suite::ShiftSandwich | Suite::DropSandwich => {
            if n < 2 {
                return;
            }
            let g = Grams::new(&idx, exhaustive);
            for k in 0..=order_cap(n - 2, l, exhaustive) {
                // x_2^n is the window [1, n)
                if suite == Suite::ShiftSandwich {
                    t.within(g.h(k, 1, n) - g.h(k + 1, 0, n), 0.0, log_d, || format!("{} k={k}", show(x)));
                } else {
                    let v = g.h(k, 0, n) - (n - 1 - k) as f64 / (n - k) as f64 * g.h(k, 1, n);
                    t.within(v, 0.0, log_d.min(1.0), || format!("{} k={k}", show(x)));
                }
            }
        }
        Suite::BlockSandwich => {
            let m = n;
            if m < 2 {
                return;
            }
            let g = Grams::new(&idx, exhaustive);
            let splits: Vec<usize> =
                if exhaustive { (1..m).collect() } else { (0..4).map(|_| rng.random_range(1..m)).collect() };
            for split in splits {
                for k in 0..=order_cap((split - 1).min(m - split - 1), l, exhaustive) {
                    // (k+1)-grams straddling the split: x_{n-k+1}^{n+k}
                    let window = if k == 0 { 0.0 } else { g.h(k, split - k, split + k) };
                    let mk = (m - k) as f64;
                    let v = g.h(k, 0, m)
                        - (split - k) as f64 / mk * g.h(k, 0, split)
                        - k as f64 / mk * window
                        - (m - split - k) as f64 / mk * g.h(k, split, m);
                    t.within(v, 0.0, log_d.min(3f64.log2()), || format!("{} n={split} k={k}", show(x)));
                }
            }
        }
        Suite::Monotone => {
            if n == 0 {
                return;
            }
            let g = Grams::new(&idx, exhaustive);
            let w = |k: usize| (n - k) as f64 * g.h(k, 0, n);
            for k in 0..n - 1 {
                let (a, b) = (w(k), w(k + 1));
                t.check(b <= a + EPS, || format!("{} k={k}: {b} > {a}", show(x)));
                if !exhaustive && k > l + 1 {
                    break;
                }
            }
        }
        Suite::EntropySum => {
            if n == 0 {
                return;
            }
            let g = Grams::new(&idx, exhaustive);
            let starts: Vec<usize> =
                if exhaustive { (1..=n).collect() } else { (0..2).map(|_| rng.random_range(1..=n)).collect() };
            for p in starts {
                let sum: f64 = (0..=order_cap(n - p, l, exhaustive)).map(|lag| g.h(lag, 0, p + lag)).sum();
                let bound = (p as f64).log2();
                t.check(sum <= bound + EPS, || format!("{} n={p}: {sum} > {bound}", show(x)));
            }
        }
        Suite::RepetitionLength => {
            if n == 0 {
                return;
            }
            let ln_d = (d as f64).ln();
            let nf = n as f64;
            let bound = (nf - nf.ln() / ln_d).ln() / ln_d - 1.0;
            t.check(l as f64 >= bound - EPS, || format!("{}: L={l} < {bound}", show(x)));
        }
        Suite::ShiftedCode => {
            let ppm = ppm_for(exhaustive);
            let base = universal_markov_order_indexed(&idx, &ppm).order;
            for c in [1.0, 10.0] {
                let shifted = universal_markov_order_indexed(&idx, &Shifted { inner: ppm, offset: c }).order;
                t.check(shifted <= base, || format!("{} c={c}: M(H+c)={shifted} > M(H)={base}", show(x)));
            }
        }
        Suite::RepetitionCap => {
            let codes: [&dyn CodeLength; 2] = [&ppm_for(exhaustive), &Lz78Code];
            for code in codes {
                let m = universal_markov_order_indexed(&idx, code).order;
                t.check(m <= l + 1, || format!("{} {}: M={m} > L+1={}", show(x), code.name(), l + 1));
            }
        }
        Suite::KtDominates => {
            let ppm = ppm_for(exhaustive);
            let analysis = ppm.analyze(&idx);
            let m = crate::orders::report_for(&idx, "ppm", analysis.entropy_bits()).order;
            let k = analysis.kt_order();
            t.check(m <= k, || format!("{}: M={m} > K={k}", show(x)));
        }
        Suite::OrderRate => {
            if n < 2 {
                return;
            }
            let codes: [&dyn CodeLength; 2] = [&ppm_for(exhaustive), &Lz78Code];
            for code in codes {
                let r = universal_markov_order_indexed(&idx, code);
                let lhs = r.order as f64 * r.h_bits;
                let rhs = n as f64 * (n as f64).log2();
                t.check(lhs < rhs, || format!("{} {}: M*H={lhs} >= n log n={rhs}", show(x), code.name()));
            }
        }
        Suite::PpmGap => {
            if n < 2 {
                return;
            }
            let hi = 2.0 * LOG2_E + (n as f64).log2();
            for k in 0..=order_cap(n - 2, l, exhaustive) {
                let gap = ppm_bound_gap(x, k).expect("k <= n-2");
                t.within(gap, ppm_alpha(d), hi, || format!("{} k={k}", show(x)));
            }
        }
        Suite::MiBound => {
            if n < 2 {
                return;
            }
            let ppm = PpmMixture::default();
            let splits: Vec<usize> =
                if exhaustive { (1..n).collect() } else { (0..2).map(|_| rng.random_range(1..n)).collect() };
            for split in splits {
                if let Ok(rhs) = mi_bound_rhs(x, split) {
                    let i = pointwise_mi(x, split, &ppm).expect("valid split");
                    t.check(i <= rhs + EPS, || format!("{} n={split}: I={i} > {rhs}", show(x)));
                }
            }
        }
        Suite::Kraft => unreachable!("kraft enumerates lengths, not strings"),
    }
}

/// A random test string of log-uniform length: uniform i.i.d., or a
/// sample from a random order-1/2 chain (low concentration gives long
/// repeats).
fn random_string(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Sequence {
    let d = rng.random_range(2..=cfg.random_max_d.max(2));
    // log-uniform length: short and long strings equally represented
    let top = (cfg.random_max_n.max(1) as f64).ln();
    let n = (rng.random_range(0.0..=top).exp().round() as usize).clamp(1, cfg.random_max_n.max(1));
    let seed = rng.random::<u64>();
    let src = match rng.random_range(0..3) {
        0 => SourceModel::iid(&vec![1.0 / d as f64; d]),
        1 => SourceModel::random_markov(d, 1, 1.0, seed),
        _ => SourceModel::random_markov(d, 2, 0.1, seed),
    };
    src.expect("valid source").sample(n, seed)
}

/// Runs invariant suites against a configurable set of Kraft backends.
pub struct Verifier {
    pub config: VerifyConfig,
    kraft_codes: Vec<Box<dyn CodeLength + Send>>,
}

impl Verifier {
    pub fn new(config: VerifyConfig) -> Self {
        Verifier { config, kraft_codes: vec![Box::new(PpmMixture::exact()), Box::new(Lz78Code)] }
    }

    /// Replaces the backends whose Kraft sums are checked.
    pub fn with_kraft_codes(mut self, codes: Vec<Box<dyn CodeLength + Send>>) -> Self {
        self.kraft_codes = codes;
        self
    }

    pub fn run(&self, suite: Suite) -> Result<SuiteResult> {
        let mut tally = Tally::default();
        if suite == Suite::Kraft {
            for n in 1..=self.config.max_n {
                for code in &self.kraft_codes {
                    let sum = kraft_sum(code.as_ref(), n, 2)?;
                    tally.check(sum <= 1.0 + EPS, || format!("{} n={n} D=2: sum {sum} > 1", code.name()));
                }
            }
            return Ok(finish(suite, tally));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for n in 1..=self.config.max_n {
            for_each_string(n, 2, |x| check_string(suite, x, true, &mut rng, &mut tally))?;
        }
        let stream = derive_seed(self.config.seed, suite as u64);
        let random: Vec<Tally> = (0..self.config.random_cases)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(stream, i as u64));
                let x = random_string(&self.config, &mut rng);
                let mut t = Tally::default();
                check_string(suite, &x, false, &mut rng, &mut t);
                t
            })
            .collect();
        for t in random {
            tally.merge(t);
        }
        Ok(finish(suite, tally))
    }

    pub fn run_all(&self, suites: &[Suite]) -> Result<Vec<SuiteResult>> {
        suites.iter().map(|&s| self.run(s)).collect()
    }
}

fn finish(suite: Suite, t: Tally) -> SuiteResult {
    SuiteResult {
        suite: suite.name(),
        check: suite.description(),
        cases: t.cases,
        violations: t.violations,
        counterexample: t.counterexample,
    }
}
