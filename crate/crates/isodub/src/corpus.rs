//! Forced-alignment ingestion, pause detection, and training records.
//!
//! The input interchange format is one JSON object per line:
//!
//! ```text
//! {"id": "...", "source_text": "...", "target_words": ["..."],
//!  "phones": [{"ph": "L", "start_ms": 0, "end_ms": 100, "word_idx": 0}]}
//! ```
//!
//! A pause is an inter-phone silence of at least the configured threshold
//! (default 300 ms). Pauses split an utterance into segments; a segment's
//! duration is the sum of the phone durations it contains, so sub-threshold
//! micro-gaps do not count towards speech time.

use std::fmt;
use std::io::{BufRead, Write};

use serde::de::Deserializer;
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::par;

/// Default pause threshold: silences of 300 ms or more split segments.
pub const DEFAULT_PAUSE_THRESHOLD_MS: u32 = 300;
/// Default duration-quantization frame length.
pub const DEFAULT_FRAME_MS: u32 = 10;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("phone events unsorted or overlapping at index {index}: previous ends {prev_end_ms} ms, next starts {next_start_ms} ms")]
    UnsortedPhones {
        index: usize,
        prev_end_ms: u32,
        next_start_ms: u32,
    },
    #[error("phone {index} has end_ms {end_ms} <= start_ms {start_ms}")]
    EmptyPhone {
        index: usize,
        start_ms: u32,
        end_ms: u32,
    },
    #[error("phone {index} word_idx {word_idx} out of range (utterance has {word_count} words)")]
    WordIndexOutOfRange {
        index: usize,
        word_idx: usize,
        word_count: usize,
    },
    #[error("word indices decrease at phone {index}")]
    WordIndexDecreases { index: usize },
    #[error("word {word_idx} owns no phones")]
    WordWithoutPhones { word_idx: usize },
    #[error("pause of {gap_ms} ms falls inside word {word_idx}; pauses are only expected at word boundaries")]
    PauseInsideWord { word_idx: usize, gap_ms: u32 },
    #[error("utterance has no phones")]
    NoPhones,
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<CorpusError>,
    },
    #[error("line {line}: invalid JSON: {message}")]
    Json { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One time-stamped phoneme from the forced aligner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhoneEvent {
    #[serde(rename = "ph")]
    pub label: String,
    pub start_ms: u32,
    pub end_ms: u32,
    pub word_idx: usize,
}

impl PhoneEvent {
    pub fn duration_ms(&self) -> u32 {
        self.end_ms - self.start_ms
    }
}

/// One training triplet: source text plus the time-aligned target side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignedUtterance {
    pub id: String,
    pub source_text: String,
    pub target_words: Vec<String>,
    pub phones: Vec<PhoneEvent>,
}

impl AlignedUtterance {
    /// Check the structural invariants of the alignment.
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.phones.is_empty() {
            return Err(CorpusError::NoPhones);
        }
        let mut seen = vec![false; self.target_words.len()];
        for (i, phone) in self.phones.iter().enumerate() {
            if phone.end_ms <= phone.start_ms {
                return Err(CorpusError::EmptyPhone {
                    index: i,
                    start_ms: phone.start_ms,
                    end_ms: phone.end_ms,
                });
            }
            if phone.word_idx >= self.target_words.len() {
                return Err(CorpusError::WordIndexOutOfRange {
                    index: i,
                    word_idx: phone.word_idx,
                    word_count: self.target_words.len(),
                });
            }
            if i > 0 {
                let prev = &self.phones[i - 1];
                if phone.start_ms < prev.end_ms {
                    return Err(CorpusError::UnsortedPhones {
                        index: i,
                        prev_end_ms: prev.end_ms,
                        next_start_ms: phone.start_ms,
                    });
                }
                if phone.word_idx < prev.word_idx {
                    return Err(CorpusError::WordIndexDecreases { index: i });
                }
            }
            seen[phone.word_idx] = true;
        }
        if let Some(word_idx) = seen.iter().position(|s| !s) {
            return Err(CorpusError::WordWithoutPhones { word_idx });
        }
        Ok(())
    }
}

/// A contiguous stretch of speech between pauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub start_ms: u32,
    pub end_ms: u32,
    /// Half-open index range into the utterance's phone list.
    pub phone_range: (usize, usize),
    /// Sum of phone durations in range; excludes sub-threshold gaps.
    pub duration_ms: u32,
}

/// Find every inter-phone gap of at least `threshold_ms`.
///
/// Gaps are reported as `(gap_start_ms, gap_end_ms)` pairs strictly between
/// the first phone's start and the last phone's end; leading and trailing
/// silence is never a pause. A gap exactly equal to the threshold counts.
pub fn detect_pauses(
    phones: &[PhoneEvent],
    threshold_ms: u32,
) -> Result<Vec<(u32, u32)>, CorpusError> {
    let mut pauses = Vec::new();
    for (i, pair) in phones.windows(2).enumerate() {
        let (prev, next) = (&pair[0], &pair[1]);
        if prev.end_ms <= prev.start_ms {
            return Err(CorpusError::EmptyPhone {
                index: i,
                start_ms: prev.start_ms,
                end_ms: prev.end_ms,
            });
        }
        if next.start_ms < prev.end_ms {
            return Err(CorpusError::UnsortedPhones {
                index: i + 1,
                prev_end_ms: prev.end_ms,
                next_start_ms: next.start_ms,
            });
        }
        if next.start_ms - prev.end_ms >= threshold_ms {
            pauses.push((prev.end_ms, next.start_ms));
        }
    }
    Ok(pauses)
}

/// Partition an utterance's phones at detected pauses.
///
/// Each segment's `duration_ms` is the sum of its phone durations, so the
/// segment durations together account for exactly the voiced time of the
/// utterance. Pauses inside a word are rejected: the aligner assigns every
/// phone to a word, and a word interrupted by silence of pause length
/// indicates a bad alignment.
pub fn segment_utterance(
    utt: &AlignedUtterance,
    threshold_ms: u32,
) -> Result<Vec<Segment>, CorpusError> {
    utt.validate()?;
    let pauses = detect_pauses(&utt.phones, threshold_ms)?;
    let mut breaks = Vec::with_capacity(pauses.len());
    for &(gap_start, _) in &pauses {
        // First phone index after the gap.
        let idx = utt
            .phones
            .iter()
            .position(|p| p.start_ms >= gap_start && p.end_ms > gap_start)
            .expect("gap lies strictly inside the phone list");
        if utt.phones[idx].word_idx == utt.phones[idx - 1].word_idx {
            return Err(CorpusError::PauseInsideWord {
                word_idx: utt.phones[idx].word_idx,
                gap_ms: utt.phones[idx].start_ms - utt.phones[idx - 1].end_ms,
            });
        }
        breaks.push(idx);
    }
    let mut segments = Vec::with_capacity(breaks.len() + 1);
    let mut start = 0usize;
    for end in breaks.into_iter().chain(std::iter::once(utt.phones.len())) {
        let slice = &utt.phones[start..end];
        segments.push(Segment {
            start_ms: slice[0].start_ms,
            end_ms: slice[slice.len() - 1].end_ms,
            phone_range: (start, end),
            duration_ms: slice.iter().map(PhoneEvent::duration_ms).sum(),
        });
        start = end;
    }
    Ok(segments)
}

/// One phoneme with its quantized duration in frames.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetPhone {
    pub phoneme: String,
    pub frames: u32,
    pub word_idx: usize,
}

impl Serialize for TargetPhone {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        (&self.phoneme, self.frames, self.word_idx).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TargetPhone {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (phoneme, frames, word_idx) = <(String, u32, usize)>::deserialize(deserializer)?;
        Ok(TargetPhone {
            phoneme,
            frames,
            word_idx,
        })
    }
}

/// A fully derived training example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub id: String,
    #[serde(rename = "src")]
    pub source_text: String,
    #[serde(rename = "seg_ms")]
    pub segment_durations_ms: Vec<u32>,
    #[serde(rename = "tgt")]
    pub target_phones: Vec<TargetPhone>,
    /// Phone indices at which segments 1.. start; always one fewer entry
    /// than `segment_durations_ms`.
    #[serde(rename = "seg_breaks")]
    pub segment_breaks: Vec<usize>,
}

/// Round a duration to frames, keeping at least one frame per phone.
pub fn quantize_frames(duration_ms: u32, frame_ms: u32) -> u32 {
    let d = duration_ms as u64;
    let f = frame_ms as u64;
    (((2 * d + f) / (2 * f)) as u32).max(1)
}

/// Quantize an utterance's phones to frames and mark segment boundaries.
pub fn build_training_record(
    utt: &AlignedUtterance,
    segments: &[Segment],
    frame_ms: u32,
) -> TrainingRecord {
    let target_phones = utt
        .phones
        .iter()
        .map(|p| TargetPhone {
            phoneme: p.label.clone(),
            frames: quantize_frames(p.duration_ms(), frame_ms),
            word_idx: p.word_idx,
        })
        .collect();
    TrainingRecord {
        id: utt.id.clone(),
        source_text: utt.source_text.clone(),
        segment_durations_ms: segments.iter().map(|s| s.duration_ms).collect(),
        target_phones,
        segment_breaks: segments.iter().skip(1).map(|s| s.phone_range.0).collect(),
    }
}

/// Pause counts over a record set, mirroring the usual dataset statistics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PauseStats {
    pub records: usize,
    pub with_one_plus: usize,
    pub with_two_plus: usize,
}

impl PauseStats {
    pub fn pct_one_plus(&self) -> f64 {
        100.0 * self.with_one_plus as f64 / self.records as f64
    }

    pub fn pct_two_plus(&self) -> f64 {
        100.0 * self.with_two_plus as f64 / self.records as f64
    }
}

impl fmt::Display for PauseStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# samples            {}", self.records)?;
        writeln!(
            f,
            "# samples, 1+ pauses {} ({:.1}%)",
            self.with_one_plus,
            self.pct_one_plus()
        )?;
        write!(
            f,
            "# samples, 2+ pauses {} ({:.1}%)",
            self.with_two_plus,
            self.pct_two_plus()
        )
    }
}

/// Count how many records contain one or more / two or more pauses.
pub fn corpus_stats(records: &[TrainingRecord]) -> Result<PauseStats, CorpusError> {
    if records.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let pause_counts = par::map_collect(records, |r| r.segment_breaks.len());
    Ok(PauseStats {
        records: records.len(),
        with_one_plus: pause_counts.iter().filter(|&&n| n >= 1).count(),
        with_two_plus: pause_counts.iter().filter(|&&n| n >= 2).count(),
    })
}

/// Result of reading an alignment file: parsed utterances plus per-line
/// failures, so the caller can decide how much malformed input to tolerate.
pub struct AlignmentRead {
    pub utterances: Vec<AlignedUtterance>,
    pub errors: Vec<(usize, CorpusError)>,
    pub total_lines: usize,
}

/// Read alignment JSONL, validating every utterance.
pub fn read_alignments<R: BufRead>(reader: R) -> Result<AlignmentRead, CorpusError> {
    let mut utterances = Vec::new();
    let mut errors = Vec::new();
    let mut total_lines = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        total_lines += 1;
        let line_no = i + 1;
        match serde_json::from_str::<AlignedUtterance>(&line) {
            Ok(utt) => match utt.validate() {
                Ok(()) => utterances.push(utt),
                Err(e) => errors.push((line_no, e)),
            },
            Err(e) => errors.push((
                line_no,
                CorpusError::Json {
                    line: line_no,
                    message: e.to_string(),
                },
            )),
        }
    }
    Ok(AlignmentRead {
        utterances,
        errors,
        total_lines,
    })
}

/// Derive training records for a whole corpus, in input order.
pub fn build_records(
    utterances: &[AlignedUtterance],
    threshold_ms: u32,
    frame_ms: u32,
) -> Vec<Result<TrainingRecord, CorpusError>> {
    par::map_collect(utterances, |utt| {
        let segments = segment_utterance(utt, threshold_ms)?;
        Ok(build_training_record(utt, &segments, frame_ms))
    })
}

pub fn write_records<W: Write>(
    writer: &mut W,
    records: &[TrainingRecord],
) -> Result<(), CorpusError> {
    for record in records {
        serde_json::to_writer(&mut *writer, record).map_err(|e| CorpusError::Json {
            line: 0,
            message: e.to_string(),
        })?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_records<R: BufRead>(reader: R) -> Result<Vec<TrainingRecord>, CorpusError> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TrainingRecord =
            serde_json::from_str(&line).map_err(|e| CorpusError::Json {
                line: i + 1,
                message: e.to_string(),
            })?;
        records.push(record);
    }
    Ok(records)
}
