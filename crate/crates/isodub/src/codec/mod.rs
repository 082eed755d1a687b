//! Tokenization and sequence encoding.
//!
//! Source sequences are BPE text plus a `DELIM` and one bin token per
//! segment; target sequences interleave phoneme and duration tokens with
//! `EOW` after every word and `PAUSE` between segments:
//!
//! ```text
//! Source: Lass es gut sein DELIM BIN4
//! Target: L 10 EH1 6 T 15 EOW W 4 EH1 6 L 7 EOW AH0 7 L 6 OW1 8 N 7 EOW
//! ```

mod bpe;
mod interleave;
mod vocab;

pub use bpe::BpeModel;
pub use interleave::{
    decode_target, decode_target_tokens, encode_source, encode_source_plain, encode_target,
    render_timing, DecodedTarget, DecodedWord, EncodedTarget, RepairCounts, TargetSequence,
    DEFAULT_MAX_DURATION_FRAMES,
};
pub use vocab::{SpecialToken, VocabKind, Vocabulary, SPECIAL_TOKENS};

#[derive(Debug, thiserror::Error)]
pub enum CodecError {
    #[error("empty training corpus")]
    EmptyCorpus,
    #[error("vocab size {requested} is smaller than the character inventory ({inventory})")]
    VocabTooSmall { requested: usize, inventory: usize },
    #[error("unknown phoneme symbol {0:?} (closed vocabulary)")]
    UnknownPhoneme(String),
    #[error("source encoding requires at least one duration bin")]
    EmptyBins,
    #[error("token {0:?} not in vocabulary")]
    UnknownToken(String),
    #[error("duplicate token {0:?} while building vocabulary")]
    DuplicateToken(String),
    #[error("invalid merge line {line}: {text:?}")]
    BadMergeLine { line: usize, text: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
