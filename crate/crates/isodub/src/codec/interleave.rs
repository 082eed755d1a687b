//! The interleaved phoneme/duration target format.
//!
//! Well-formed target sequences match
//! `(PH DUR)+ EOW ((PH DUR)+ EOW | PAUSE)* EOS`. The encoder only produces
//! that language; the decoder accepts anything the model might emit and
//! repairs deviations, counting every repair it applies.

use super::vocab::{SpecialToken, Vocabulary};
use super::{BpeModel, CodecError};
use crate::corpus::TrainingRecord;

/// Duration tokens form a closed integer vocabulary `1..=D_max`. 128
/// frames of 10 ms is 1.28 s, longer than any plausible phone.
pub const DEFAULT_MAX_DURATION_FRAMES: u32 = 128;

/// A flat id sequence in target-format order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSequence {
    pub ids: Vec<u32>,
}

impl TargetSequence {
    pub fn dump(&self, vocab: &Vocabulary) -> String {
        vocab.dump(&self.ids)
    }
}

/// Encoder output; `clipped` counts phones whose duration exceeded the
/// duration-token cap and was clipped to it.
#[derive(Debug, Clone)]
pub struct EncodedTarget {
    pub sequence: TargetSequence,
    pub clipped: usize,
}

/// Interleave a record's phones and frame counts, with `EOW` at word ends
/// and `PAUSE` at segment breaks, terminated by `EOS`.
pub fn encode_target(
    record: &TrainingRecord,
    vocab: &Vocabulary,
    max_duration_frames: u32,
) -> Result<EncodedTarget, CodecError> {
    let mut ids = Vec::with_capacity(record.target_phones.len() * 2 + 8);
    let mut clipped = 0usize;
    let mut breaks = record.segment_breaks.iter().peekable();
    for (i, phone) in record.target_phones.iter().enumerate() {
        if breaks.peek() == Some(&&i) {
            ids.push(SpecialToken::Pause.id());
            breaks.next();
        }
        let ph_id = vocab
            .id(&phone.phoneme)
            .ok_or_else(|| CodecError::UnknownPhoneme(phone.phoneme.clone()))?;
        ids.push(ph_id);
        let frames = if phone.frames > max_duration_frames {
            clipped += 1;
            max_duration_frames
        } else {
            phone.frames.max(1)
        };
        let dur_id = vocab
            .id(&frames.to_string())
            .ok_or_else(|| CodecError::UnknownToken(frames.to_string()))?;
        ids.push(dur_id);
        let word_ends = record
            .target_phones
            .get(i + 1)
            .map_or(true, |next| next.word_idx != phone.word_idx);
        if word_ends {
            ids.push(SpecialToken::Eow.id());
        }
    }
    ids.push(SpecialToken::Eos.id());
    Ok(EncodedTarget {
        sequence: TargetSequence { ids },
        clipped,
    })
}

/// BPE the source text and append `DELIM` plus the segment bin tokens.
/// Characters outside the BPE inventory become `UNK`, never an error.
pub fn encode_source(
    text: &str,
    bins: &[usize],
    bpe: &BpeModel,
    vocab: &Vocabulary,
) -> Result<Vec<u32>, CodecError> {
    if bins.is_empty() {
        return Err(CodecError::EmptyBins);
    }
    let mut ids = encode_source_plain(text, bpe, vocab)?;
    ids.pop(); // re-append EOS after the bins
    ids.push(SpecialToken::Delim.id());
    for &bin in bins {
        let token = format!("BIN{bin}");
        ids.push(
            vocab
                .id(&token)
                .ok_or_else(|| CodecError::UnknownToken(token))?,
        );
    }
    ids.push(SpecialToken::Eos.id());
    Ok(ids)
}

/// BPE the source text without duration conditioning.
pub fn encode_source_plain(
    text: &str,
    bpe: &BpeModel,
    vocab: &Vocabulary,
) -> Result<Vec<u32>, CodecError> {
    let mut ids: Vec<u32> = bpe
        .encode_line(text)
        .iter()
        .map(|token| vocab.id_or_unk(token))
        .collect();
    ids.push(SpecialToken::Eos.id());
    Ok(ids)
}

/// Phones of one word: `(phoneme, frames)` pairs.
pub type DecodedWord = Vec<(String, u32)>;

/// Structured view of a decoded target sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DecodedTarget {
    pub words: Vec<DecodedWord>,
    /// Word indices at which segments 1.. start.
    pub segment_breaks: Vec<usize>,
}

impl DecodedTarget {
    pub fn phone_count(&self) -> usize {
        self.words.iter().map(Vec::len).sum()
    }

    /// Group words into segments according to the break positions.
    pub fn segments(&self) -> Vec<&[DecodedWord]> {
        let mut out = Vec::with_capacity(self.segment_breaks.len() + 1);
        let mut start = 0usize;
        for &brk in &self.segment_breaks {
            out.push(&self.words[start..brk]);
            start = brk;
        }
        out.push(&self.words[start..]);
        out
    }

    /// Flat phones with word indices, the inverse of record encoding.
    pub fn flat_phones(&self) -> Vec<(String, u32, usize)> {
        let mut out = Vec::with_capacity(self.phone_count());
        for (word_idx, word) in self.words.iter().enumerate() {
            for (ph, frames) in word {
                out.push((ph.clone(), *frames, word_idx));
            }
        }
        out
    }
}

/// Repairs applied while decoding model output.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RepairCounts {
    /// Phoneme without a following duration token: duration 1 assumed.
    pub missing_duration: usize,
    /// Duration token with no preceding phoneme: dropped.
    pub dangling_duration: usize,
    /// Word not closed by `EOW` before `PAUSE`/`EOS`: closed implicitly.
    pub unterminated_word: usize,
    /// `EOW`/`PAUSE` with nothing to attach to: dropped.
    pub stray_marker: usize,
}

impl RepairCounts {
    pub fn total(&self) -> usize {
        self.missing_duration + self.dangling_duration + self.unterminated_word + self.stray_marker
    }
}

/// Decode an id sequence through its vocabulary.
pub fn decode_target(seq: &TargetSequence, vocab: &Vocabulary) -> (DecodedTarget, RepairCounts) {
    let tokens: Vec<&str> = seq.ids.iter().map(|&id| vocab.token(id)).collect();
    decode_target_tokens(&tokens)
}

/// Decode surface tokens. Total: never fails, repairs are counted.
pub fn decode_target_tokens<S: AsRef<str>>(tokens: &[S]) -> (DecodedTarget, RepairCounts) {
    let mut decoded = DecodedTarget::default();
    let mut repairs = RepairCounts::default();
    let mut word: DecodedWord = Vec::new();
    let mut pending: Option<String> = None;
    let mut pause_pending = false;

    let mut close_word = |word: &mut DecodedWord,
                          pending: &mut Option<String>,
                          decoded: &mut DecodedTarget,
                          repairs: &mut RepairCounts,
                          pause_pending: &mut bool| {
        if let Some(ph) = pending.take() {
            repairs.missing_duration += 1;
            word.push((ph, 1));
        }
        if word.is_empty() {
            return false;
        }
        if *pause_pending {
            decoded.segment_breaks.push(decoded.words.len());
            *pause_pending = false;
        }
        decoded.words.push(std::mem::take(word));
        true
    };

    for token in tokens {
        let token = token.as_ref();
        match token {
            t if t == SpecialToken::Pad.text() || t == SpecialToken::Bos.text() => {}
            t if t == SpecialToken::Eos.text() => break,
            t if t == SpecialToken::Eow.text() => {
                if !close_word(&mut word, &mut pending, &mut decoded, &mut repairs, &mut pause_pending) {
                    repairs.stray_marker += 1;
                }
            }
            t if t == SpecialToken::Pause.text() => {
                if close_word(&mut word, &mut pending, &mut decoded, &mut repairs, &mut pause_pending) {
                    repairs.unterminated_word += 1;
                }
                if decoded.words.is_empty() || pause_pending {
                    repairs.stray_marker += 1;
                } else {
                    pause_pending = true;
                }
            }
            t if t.bytes().all(|b| b.is_ascii_digit()) && !t.is_empty() => {
                match pending.take() {
                    Some(ph) => {
                        let frames: u32 = t.parse().unwrap_or(1).max(1);
                        word.push((ph, frames));
                    }
                    None => repairs.dangling_duration += 1,
                }
            }
            _ => {
                if let Some(ph) = pending.take() {
                    repairs.missing_duration += 1;
                    word.push((ph, 1));
                }
                pending = Some(token.to_string());
            }
        }
    }
    if close_word(&mut word, &mut pending, &mut decoded, &mut repairs, &mut pause_pending) {
        repairs.unterminated_word += 1;
    }
    if pause_pending {
        // Trailing PAUSE with no following word.
        repairs.stray_marker += 1;
    }
    (decoded, repairs)
}

/// Dub duration per segment: the sum of predicted frames times the frame
/// length. This stands in for a synthesizer whose duration predictor is
/// overridden with the model's durations.
pub fn render_timing(decoded: &DecodedTarget, frame_ms: u32) -> Vec<u32> {
    decoded
        .segments()
        .iter()
        .map(|words| {
            words
                .iter()
                .flat_map(|word| word.iter())
                .map(|&(_, frames)| frames * frame_ms)
                .sum()
        })
        .collect()
}
