//! Expurgated error exponents of discrete memoryless channels, and
//! Monte-Carlo experiments showing that a random mother code with a few
//! extra codewords almost always contains a subcode whose every codeword
//! meets the expurgated exponent.
//!
//! Module map:
//!
//! - [`channel`]: channels, likelihoods, Bhattacharyya coefficients;
//! - [`exponents`]: `E_x`, the optimized expurgated exponent, `E_0`/`E_r`,
//!   the `γ_n`/`δ_n` schedule and `n₀`;
//! - [`ensembles`]: codebook sizing and seeded sampling of i.i.d. and
//!   constant-composition codebooks;
//! - [`expurgation`]: per-codeword error probabilities and exponents,
//!   census of good codewords, expurgation;
//! - [`harness`]: experiment configuration, parallel deterministic trials,
//!   aggregated statistics and result files.

pub mod channel;
pub mod ensembles;
pub mod error;
pub mod exponents;
pub mod expurgation;
pub mod harness;
pub mod stats;

pub use channel::{BhattMatrix, Channel};
pub use ensembles::{
    codebook_size, nearest_composition, sample_codebook, Codebook, EnsembleKind, EnsembleSpec,
};
pub use error::{Error, Result};
pub use exponents::{
    ex_multi_letter_exact, ex_single_letter, gallager_e0, n0_threshold, optimize_rho,
    random_coding_exponent, schedule, ExponentSolution, GammaKind, InputDistribution,
    RandomCodingSolution, RateGrid, Schedule,
};
pub use expurgation::{
    census, codeword_exponent, evaluate_codewords, exact_ml_error, exact_ml_errors, expurgate,
    is_good_mother_code, union_bhattacharyya_bound, union_bhattacharyya_bounds, CodewordEval,
    EvalMethod, ExpurgatedCode, TrialCensus,
};
