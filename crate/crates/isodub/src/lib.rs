//! Isochrony-aware machine translation for automatic dubbing.
//!
//! The pipeline turns forced-alignment output into duration-annotated
//! training data, trains an encoder-decoder transformer that maps source
//! text plus desired segment-duration bins to interleaved phoneme/duration
//! sequences, and evaluates the result for translation quality (BLEU) and
//! timing fidelity (speech overlap).
//!
//! Modules follow the pipeline order:
//!
//! - [`corpus`]: alignment ingestion, pause detection, segment durations
//! - [`binning`]: equal-frequency duration bins and bin tokens
//! - [`codec`]: BPE, vocabularies, and the interleaved target format
//! - [`noise`]: Gaussian perturbation of source-side durations
//! - [`model`]: the from-scratch transformer with beam search
//! - [`p2w`]: phoneme-to-word mapping for scoring against text references
//! - [`metrics`]: speech overlap, BLEU, isometry, report assembly
//! - [`vad`]: energy-based voice activity detection for inference timing
//! - [`cli`]: subcommand orchestration with reproducible configuration
//!
//! All randomness flows from a single root seed through named substreams
//! (see [`rng`]), and every stage is deterministic for a fixed seed. Data
//! parallel inner loops use rayon when the `parallel` feature (default) is
//! enabled and fall back to sequential iteration otherwise; results are
//! identical either way.

pub mod binning;
pub mod cli;
pub mod codec;
pub mod config;
pub mod corpus;
pub mod metrics;
pub mod model;
pub mod noise;
pub mod p2w;
pub mod par;
pub mod rng;
pub mod synth;
pub mod vad;
pub mod wav;
