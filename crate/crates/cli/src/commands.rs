use std::fs::File;
use std::path::Path;
use std::sync::Arc;

use markov_order::codes::ConstantCode;
use markov_order::mi::mi_profile_csv;
use markov_order::orders::{mgz_order_indexed, ram_test_indexed, universal_markov_order_indexed};
use markov_order::verify::{Suite, SuiteResult, Verifier, VerifyConfig};
use markov_order::{
    consistency_experiment, ingest, mi_profile, Alphabet, Backend, CodeLength, Error, ExperimentConfig, FrequencyIndex,
    IngestMode, OrderReport, PpmMixture, RamTestResult, Sequence, SourceModel,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::args::{BackendName, EstimateArgs, Format, Global, InputOpts, ProfileArgs, SimulateArgs, VerifyArgs};
use crate::output::{emit, opt, Meta};
use crate::CliError;

fn core_error(e: Error) -> CliError {
    match e {
        Error::Io(e) => CliError::Io(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

fn backend(name: BackendName, ppm_exact: bool) -> Backend {
    Backend::from_name(name.as_str(), ppm_exact).expect("clap restricts backend names")
}

fn ingest_mode(opts: &InputOpts) -> Result<IngestMode, CliError> {
    match &opts.alphabet {
        Some(path) => {
            let spec = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Ok(IngestMode::Explicit(Arc::new(Alphabet::from_json(&spec).map_err(core_error)?)))
        }
        None if opts.tokens => Ok(IngestMode::Tokens),
        None => Ok(IngestMode::Bytes),
    }
}

fn read(path: &Path, mode: &IngestMode) -> Result<Sequence, CliError> {
    let file = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    ingest(std::io::BufReader::new(file), mode).map_err(|e| match e {
        Error::Io(e) => CliError::Io(format!("{}: {e}", path.display())),
        other => CliError::Config(format!("{}: {other}", path.display())),
    })
}

#[derive(Serialize)]
struct FileEstimate {
    file: String,
    #[serde(flatten)]
    report: OrderReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    kt: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mgz: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ram: Option<RamTestResult>,
}

pub fn estimate(global: &Global, args: &EstimateArgs, meta: &Meta) -> Result<(), CliError> {
    if let Some(l) = args.mgz {
        if l.is_nan() || l <= 0.0 {
            return Err(CliError::Config(format!("--mgz needs a positive threshold, got {l}")));
        }
    }
    if let Some((_, a)) = args.ram {
        if !(a > 0.0 && a < 1.0) {
            return Err(CliError::Config(format!("--ram level must lie in (0, 1), got {a}")));
        }
    }
    let mode = ingest_mode(&args.input)?;
    let code = backend(args.backend, args.ppm_exact);
    let results = args
        .files
        .par_iter()
        .map(|path| {
            let x = read(path, &mode)?;
            let idx = FrequencyIndex::build(&x);
            let (report, kt) = match code {
                Backend::Ppm { exact } => {
                    let analysis = PpmMixture { exact }.analyze(&idx);
                    let report = universal_markov_order_indexed(&idx, &FixedEntropy(analysis.entropy_bits()));
                    (report, args.kt.then(|| analysis.kt_order()))
                }
                Backend::Lz78 => {
                    let kt = args.kt.then(|| PpmMixture { exact: args.ppm_exact }.analyze(&idx).kt_order());
                    (universal_markov_order_indexed(&idx, &code), kt)
                }
            };
            let report = OrderReport { backend: code.name().to_string(), ..report };
            let mgz = args.mgz.map(|l| mgz_order_indexed(&idx, l)).transpose().map_err(core_error)?;
            let ram = args
                .ram
                .map(|(m, a)| ram_test_indexed(&idx, m, a, &code))
                .transpose()
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            Ok(FileEstimate { file: path.display().to_string(), report, kt, mgz, ram })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let text = match global.format.unwrap_or(Format::Json) {
        Format::Json => meta.wrap_json(json!({ "results": results }))?,
        Format::Csv => {
            let mut s = meta.csv_line();
            s.push_str("file,n,backend,H_bits,order,kt,mgz,ram_order,ram_alpha,ram_statistic,ram_reject\n");
            for r in &results {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{}\n",
                    csv_field(&r.file),
                    r.report.n,
                    r.report.backend,
                    r.report.h_bits,
                    r.report.order,
                    opt(r.kt),
                    opt(r.mgz),
                    opt(r.ram.map(|t| t.order)),
                    opt(r.ram.map(|t| t.alpha)),
                    opt(r.ram.map(|t| t.statistic)),
                    opt(r.ram.map(|t| t.reject)),
                ));
            }
            s
        }
    };
    emit(&text, global.out.as_deref())
}

/// Reuses an already computed mixture entropy.
struct FixedEntropy(f64);

impl CodeLength for FixedEntropy {
    fn name(&self) -> &str {
        "ppm"
    }
    fn pointwise_entropy_indexed(&self, _idx: &FrequencyIndex<'_>) -> f64 {
        self.0
    }
}

pub fn profile(global: &Global, args: &ProfileArgs, meta: &Meta) -> Result<(), CliError> {
    let x = read(&args.file, &ingest_mode(&args.input)?)?;
    let n = x.len();
    if n == 0 {
        return Err(CliError::Config(format!("{}: empty input has no profile", args.file.display())));
    }
    let idx = FrequencyIndex::build(&x);
    let kmax = args.kmax.unwrap_or_else(|| (idx.max_repetition() + 1).min(n - 1));
    let profile = idx.entropy_profile(kmax).map_err(core_error)?;
    let mi = if args.blocks.is_empty() {
        None
    } else {
        Some(mi_profile(&x, &args.blocks, &backend(args.backend, args.ppm_exact)).map_err(core_error)?)
    };
    let text = match global.format.unwrap_or(Format::Csv) {
        Format::Json => meta.wrap_json(json!({ "n": n, "profile": profile, "mi_profile": mi }))?,
        Format::Csv => {
            let mut s = meta.csv_line();
            s.push_str(&profile.to_csv());
            if let Some(rows) = &mi {
                s.push('\n');
                s.push_str(&mi_profile_csv(rows));
            }
            s
        }
    };
    emit(&text, global.out.as_deref())
}

fn source(args: &SimulateArgs) -> Result<SourceModel, CliError> {
    let src = if let Some(stay) = args.sticky {
        if args.order.unwrap_or(1) != 1 {
            return Err(CliError::Config("--sticky describes an order-1 chain".into()));
        }
        SourceModel::sticky(stay)
    } else if !args.iid.is_empty() {
        if args.order.unwrap_or(0) != 0 {
            return Err(CliError::Config("--iid describes an order-0 source".into()));
        }
        SourceModel::iid(&args.iid)
    } else {
        SourceModel::random_markov(args.alphabet_size, args.order.unwrap_or(1), args.concentration, args.source_seed)
    };
    src.map_err(core_error)
}

pub fn simulate(global: &Global, args: &SimulateArgs, meta: &Meta) -> Result<(), CliError> {
    if args.lengths.contains(&0) || args.trials == 0 {
        return Err(CliError::Config("sample lengths and --trials must be positive".into()));
    }
    let src = source(args)?;
    let mut backends = Vec::new();
    for &b in &args.backend {
        let b = backend(b, args.ppm_exact);
        if !backends.contains(&b) {
            backends.push(b);
        }
    }
    let cfg = ExperimentConfig {
        lengths: args.lengths.clone(),
        trials: args.trials,
        seed: global.seed,
        backends,
        kt: args.kt,
        mgz_lambda: args.mgz,
    };
    let report = consistency_experiment(&src, &cfg).map_err(core_error)?;
    let json = meta.wrap_json(&report)?;
    let csv = meta.csv_line() + &report.summary_csv();
    match &global.out {
        Some(path) => {
            emit(&json, Some(&with_suffix(path, "json")))?;
            emit(&csv, Some(&with_suffix(path, "csv")))
        }
        None => match global.format.unwrap_or(Format::Json) {
            Format::Json => emit(&json, None),
            Format::Csv => emit(&csv, None),
        },
    }
}

fn with_suffix(path: &Path, ext: &str) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    s.into()
}

pub fn suites(args: &VerifyArgs) -> Result<Vec<Suite>, CliError> {
    if args.suite.is_empty() {
        return Ok(Suite::ALL.to_vec());
    }
    args.suite
        .iter()
        .map(|name| {
            Suite::from_name(name).ok_or_else(|| {
                let known: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
                CliError::Config(format!("unknown suite `{name}` (known: {})", known.join(", ")))
            })
        })
        .collect()
}

/// Returns whether every suite passed.
pub fn verify(global: &Global, args: &VerifyArgs, meta: &Meta) -> Result<bool, CliError> {
    let selected = suites(args)?;
    let cfg = VerifyConfig {
        max_n: args.max_n,
        random_cases: args.random,
        random_max_n: args.random_max_n,
        random_max_d: args.random_max_d,
        seed: global.seed,
    };
    if args.random_max_d < 2 || args.random_max_n == 0 {
        return Err(CliError::Config("random cases need D >= 2 and n >= 1".into()));
    }
    let mut verifier = Verifier::new(cfg);
    if args.faulty_backend {
        verifier = verifier.with_kraft_codes(vec![Box::new(ConstantCode(-1.0))]);
    }
    let results: Vec<SuiteResult> = verifier.run_all(&selected).map_err(core_error)?;
    let passed = results.iter().all(SuiteResult::passed);
    for r in results.iter().filter(|r| !r.passed()) {
        eprintln!("suite {} failed: {}", r.suite, r.counterexample.as_deref().unwrap_or("?"));
    }
    let text = match global.format.unwrap_or(Format::Csv) {
        Format::Json => meta.wrap_json(json!({ "passed": passed, "suites": results }))?,
        Format::Csv => {
            let mut s = meta.csv_line();
            s.push_str("suite,cases,violations,status,counterexample\n");
            for r in &results {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.suite,
                    r.cases,
                    r.violations,
                    if r.passed() { "pass" } else { "FAIL" },
                    csv_field(r.counterexample.as_deref().unwrap_or(""))
                ));
            }
            s
        }
    };
    emit(&text, global.out.as_deref())?;
    Ok(passed)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
