//! Universal Markov order estimation for symbolic sequences.
//!
//! The crate compares empirical conditional entropies `h_k(x)` of a string
//! against the pointwise entropy `H(x)` of a universal code and returns the
//! least order at which the two agree:
//!
//! ```text
//! M(x_1^n) = min { k >= 0 : (n - k) h_k(x_1^n) <= H(x_1^n) }
//! ```
//!
//! Two code-length backends are provided: the PPM mixture semi-distribution
//! and an LZ78 code with a length correction. Alongside the universal order
//! there are the Krichevsky-Trofimov order, the Merhav-Gutman-Ziv estimator
//! and the Ryabko-Astola-Malyutov order test, pointwise mutual information
//! with its vocabulary bound, and stationary Markov sources with exact
//! entropy oracles for simulation studies.
//!
//! All logarithms are binary; entropies are reported in bits.
//!
//! ```
//! use markov_order::{universal_markov_order, PpmMixture, Sequence};
//!
//! let x = Sequence::from_letters("abababababababababababababababab", 2).unwrap();
//! let report = universal_markov_order(&x, &PpmMixture::default());
//! assert_eq!(report.order, 1);
//! ```

pub mod codes;
pub mod mi;
pub mod orders;
pub mod sequence;
pub mod sources;
pub mod stats;
pub mod verify;

mod error;

pub use codes::{kraft_sum, Backend, CodeLength, Lz78Code, PpmMixture, Shifted, UniformCode};
pub use error::{Error, Result};
pub use mi::{
    expected_mi_check, hilberg_estimate, mi_bound_rhs, mi_profile, pointwise_mi, ExpectedMiReport, HilbergEstimate,
    MiReport,
};

pub use orders::{kt_order, mgz_order, ram_test, universal_markov_order, OrderReport, RamTestResult};
pub use sequence::{ingest, Alphabet, IngestMode, Sequence};
pub use sources::{consistency_experiment, ConsistencyReport, ExperimentConfig, SourceModel};
pub use stats::{EntropyProfile, FrequencyIndex};
