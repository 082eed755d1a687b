//! Speech overlap, BLEU, isometry, and evaluation reports.
//!
//! Speech overlap for one segment pair is
//! `1 - |source_ms - dub_ms| / source_ms`, unclamped: a dub more than twice
//! the source length scores negative. Corpus speech overlap is the
//! arithmetic mean over all segments of all samples.
//!
//! BLEU is corpus-level with lowercasing, whitespace tokenization,
//! exponential smoothing of zero n-gram precisions, the standard brevity
//! penalty, and n-gram orders 1..4. An order with no hypothesis n-grams at
//! all (every line shorter than n tokens) zeroes the corpus score; only
//! zero *matches* are smoothed.

use serde::Serialize;

use crate::par;

pub const MAX_NGRAM: usize = 4;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("source duration must be positive, got {0}")]
    NonPositiveSource(f64),
    #[error("no segment pairs to average")]
    NoSegments,
    #[error("hypothesis/reference length mismatch: {hyps} vs {refs}")]
    LengthMismatch { hyps: usize, refs: usize },
    #[error("empty source text")]
    EmptySource,
    #[error("no samples to evaluate")]
    NoSamples,
}

/// Eq.-style overlap of one dubbed segment against its source segment.
pub fn speech_overlap(src_ms: f64, dub_ms: f64) -> Result<f64, MetricsError> {
    if src_ms <= 0.0 {
        return Err(MetricsError::NonPositiveSource(src_ms));
    }
    Ok(1.0 - (src_ms - dub_ms).abs() / src_ms)
}

/// Mean segment-level overlap across a corpus.
pub fn corpus_speech_overlap(pairs: &[(f64, f64)]) -> Result<f64, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::NoSegments);
    }
    let mut sum = 0.0;
    for &(src, dub) in pairs {
        sum += speech_overlap(src, dub)?;
    }
    Ok(sum / pairs.len() as f64)
}

/// Pair up source and dub segments in order. Unmatched source segments get
/// a zero-length dub; surplus dub segments are dropped from scoring and
/// reported through `extra_dub`.
pub struct SegmentAlignment {
    pub pairs: Vec<(f64, f64)>,
    pub extra_dub: usize,
}

pub fn align_segments(src_ms: &[u32], dub_ms: &[u32]) -> SegmentAlignment {
    let mut pairs = Vec::with_capacity(src_ms.len());
    for (i, &src) in src_ms.iter().enumerate() {
        let dub = dub_ms.get(i).copied().unwrap_or(0);
        pairs.push((src as f64, dub as f64));
    }
    SegmentAlignment {
        pairs,
        extra_dub: dub_ms.len().saturating_sub(src_ms.len()),
    }
}

/// Character-count ratio of target to source, whitespace included.
pub fn isometry_ratio(source_text: &str, target_text: &str) -> Result<f64, MetricsError> {
    let src_chars = source_text.chars().count();
    if src_chars == 0 {
        return Err(MetricsError::EmptySource);
    }
    Ok(target_text.chars().count() as f64 / src_chars as f64)
}

/// Summable per-line n-gram statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BleuStats {
    pub correct: [u64; MAX_NGRAM],
    pub total: [u64; MAX_NGRAM],
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuStats {
    pub fn add(&mut self, other: &BleuStats) {
        for n in 0..MAX_NGRAM {
            self.correct[n] += other.correct[n];
            self.total[n] += other.total[n];
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
    }
}

fn tokenize(line: &str) -> Vec<String> {
    line.split_whitespace().map(str::to_lowercase).collect()
}

/// Clipped n-gram match statistics for one hypothesis/reference pair.
pub fn bleu_stats(hypothesis: &str, reference: &str) -> BleuStats {
    let hyp = tokenize(hypothesis);
    let reference = tokenize(reference);
    let mut stats = BleuStats {
        hyp_len: hyp.len() as u64,
        ref_len: reference.len() as u64,
        ..BleuStats::default()
    };
    for n in 1..=MAX_NGRAM {
        if hyp.len() < n {
            break;
        }
        stats.total[n - 1] = (hyp.len() - n + 1) as u64;
        let mut ref_counts: std::collections::HashMap<&[String], u64> =
            std::collections::HashMap::new();
        if reference.len() >= n {
            for gram in reference.windows(n) {
                *ref_counts.entry(gram).or_insert(0) += 1;
            }
        }
        for gram in hyp.windows(n) {
            if let Some(count) = ref_counts.get_mut(gram) {
                if *count > 0 {
                    *count -= 1;
                    stats.correct[n - 1] += 1;
                }
            }
        }
    }
    stats
}

/// Score aggregated statistics on the 0..100 scale.
pub fn bleu_from_stats(stats: &BleuStats) -> f64 {
    if stats.hyp_len == 0 {
        return 0.0;
    }
    let mut smooth = 1.0f64;
    let mut log_precision_sum = 0.0f64;
    for n in 0..MAX_NGRAM {
        if stats.total[n] == 0 {
            // No n-grams of this order exist anywhere in the hypothesis
            // corpus; nothing to smooth, the geometric mean collapses.
            return 0.0;
        }
        let precision = if stats.correct[n] == 0 {
            smooth *= 2.0;
            100.0 / (smooth * stats.total[n] as f64)
        } else {
            100.0 * stats.correct[n] as f64 / stats.total[n] as f64
        };
        log_precision_sum += precision.ln();
    }
    let brevity_penalty = if stats.hyp_len < stats.ref_len {
        (1.0 - stats.ref_len as f64 / stats.hyp_len as f64).exp()
    } else {
        1.0
    };
    brevity_penalty * (log_precision_sum / MAX_NGRAM as f64).exp()
}

/// Corpus BLEU over paired hypothesis and single-reference lines.
pub fn bleu<H: AsRef<str> + Sync, R: AsRef<str> + Sync>(
    hypotheses: &[H],
    references: &[R],
) -> Result<f64, MetricsError> {
    if hypotheses.len() != references.len() {
        return Err(MetricsError::LengthMismatch {
            hyps: hypotheses.len(),
            refs: references.len(),
        });
    }
    let indices: Vec<usize> = (0..hypotheses.len()).collect();
    let per_line = par::map_collect(&indices, |&i| {
        bleu_stats(hypotheses[i].as_ref(), references[i].as_ref())
    });
    let mut total = BleuStats::default();
    for stats in &per_line {
        total.add(stats);
    }
    Ok(bleu_from_stats(&total))
}

/// Per-sample evaluation row.
#[derive(Debug, Clone, Serialize)]
pub struct SampleEval {
    pub id: String,
    pub bleu_stats: BleuStats,
    /// Mean segment overlap for this sample.
    pub so: f64,
    pub so_segments: Vec<f64>,
    pub src_ms: Vec<u32>,
    pub dub_ms: Vec<u32>,
    pub isometry: f64,
    pub segment_mismatch: bool,
}

/// Corpus-level evaluation results.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub system: String,
    pub bleu: f64,
    /// Mean overlap over all segments of all samples.
    pub speech_overlap: f64,
    /// Overlap computed on per-utterance duration totals, averaged.
    pub speech_overlap_utterance: f64,
    pub isometry: f64,
    pub negative_so_segments: usize,
    pub segment_mismatches: usize,
    pub samples: Vec<SampleEval>,
}

/// One sample's inputs to evaluation.
#[derive(Debug, Clone)]
pub struct EvalInput {
    pub id: String,
    pub source_text: String,
    pub hyp_text: String,
    pub ref_text: String,
    pub src_seg_ms: Vec<u32>,
    pub dub_seg_ms: Vec<u32>,
}

/// Score a corpus of samples for one system.
pub fn evaluate_corpus(system: &str, inputs: &[EvalInput]) -> Result<EvalReport, MetricsError> {
    if inputs.is_empty() {
        return Err(MetricsError::NoSamples);
    }
    let samples: Vec<SampleEval> = par::map_collect(inputs, |input| {
        let alignment = align_segments(&input.src_seg_ms, &input.dub_seg_ms);
        let so_segments: Vec<f64> = alignment
            .pairs
            .iter()
            .map(|&(src, dub)| speech_overlap(src, dub).unwrap_or(0.0))
            .collect();
        let so = if so_segments.is_empty() {
            0.0
        } else {
            so_segments.iter().sum::<f64>() / so_segments.len() as f64
        };
        SampleEval {
            id: input.id.clone(),
            bleu_stats: bleu_stats(&input.hyp_text, &input.ref_text),
            so,
            so_segments,
            src_ms: input.src_seg_ms.clone(),
            dub_ms: input.dub_seg_ms.clone(),
            isometry: isometry_ratio(&input.source_text, &input.hyp_text).unwrap_or(f64::NAN),
            segment_mismatch: input.src_seg_ms.len() != input.dub_seg_ms.len(),
        }
    });

    let mut corpus_stats = BleuStats::default();
    let mut segment_sum = 0.0;
    let mut segment_count = 0usize;
    let mut utterance_sum = 0.0;
    let mut utterance_count = 0usize;
    let mut isometry_sum = 0.0;
    let mut isometry_count = 0usize;
    let mut negative = 0usize;
    let mut mismatches = 0usize;
    for (sample, input) in samples.iter().zip(inputs) {
        corpus_stats.add(&sample.bleu_stats);
        segment_sum += sample.so_segments.iter().sum::<f64>();
        segment_count += sample.so_segments.len();
        negative += sample.so_segments.iter().filter(|&&v| v < 0.0).count();
        mismatches += sample.segment_mismatch as usize;
        let src_total: u32 = input.src_seg_ms.iter().sum();
        let dub_total: u32 = input.dub_seg_ms.iter().sum();
        if src_total > 0 {
            utterance_sum += speech_overlap(src_total as f64, dub_total as f64).unwrap();
            utterance_count += 1;
        }
        if sample.isometry.is_finite() {
            isometry_sum += sample.isometry;
            isometry_count += 1;
        }
    }
    if segment_count == 0 {
        return Err(MetricsError::NoSegments);
    }
    Ok(EvalReport {
        system: system.to_string(),
        bleu: bleu_from_stats(&corpus_stats),
        speech_overlap: segment_sum / segment_count as f64,
        speech_overlap_utterance: utterance_sum / utterance_count.max(1) as f64,
        isometry: isometry_sum / isometry_count.max(1) as f64,
        negative_so_segments: negative,
        segment_mismatches: mismatches,
        samples,
    })
}

/// Render one table row per system: System, BLEU, SO.
pub fn render_table(reports: &[EvalReport]) -> String {
    let name_width = reports
        .iter()
        .map(|r| r.system.len())
        .chain(std::iter::once("System".len()))
        .max()
        .unwrap_or(6);
    let mut out = String::new();
    out.push_str(&format!("{:name_width$}  {:>6}  {:>5}\n", "System", "BLEU", "SO"));
    for report in reports {
        out.push_str(&format!(
            "{:name_width$}  {:>6.1}  {:>5.2}\n",
            report.system, report.bleu, report.speech_overlap
        ));
    }
    out
}
