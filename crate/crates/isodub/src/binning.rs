//! Equal-frequency binning of segment durations.
//!
//! Durations are conveyed to the model as bin tokens rather than raw
//! millisecond values, so every duration token is seen a reasonable number
//! of times in training. Cut points are empirical quantiles fitted on the
//! training segment durations; inference must reuse the fitted boundaries.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum BinningError {
    #[error("need at least {k} samples to fit {k} bins, got {n}")]
    TooFewSamples { n: usize, k: usize },
    #[error("bin count must be at least 2, got {k}")]
    BinCountTooSmall { k: usize },
    #[error("bin index {index} out of range for {k} bins")]
    IndexOutOfRange { index: usize, k: usize },
    #[error("invalid boundaries file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Fitted equal-frequency cut points.
///
/// Bin `i` covers `(cuts[i-1], cuts[i]]` with `cuts[-1] = -inf` and
/// `cuts[k-1] = +inf` (upper-inclusive intervals). On heavily tied data,
/// duplicate cut values are collapsed, so the effective bin count can be
/// smaller than the requested `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinBoundaries {
    pub k: usize,
    #[serde(rename = "cuts_ms")]
    pub cuts: Vec<u32>,
    pub fitted_on: usize,
}

impl BinBoundaries {
    /// Number of bins actually distinguishable after deduplication.
    pub fn effective_bins(&self) -> usize {
        self.cuts.len() + 1
    }
}

/// Fit `k` equal-frequency bins on training durations.
///
/// Cut `i` (1-based, `i < k`) is the empirical `i/k` quantile: the
/// `ceil(n * i / k)`-th smallest sample.
pub fn fit_bins(durations_ms: &[u32], k: usize) -> Result<BinBoundaries, BinningError> {
    if k < 2 {
        return Err(BinningError::BinCountTooSmall { k });
    }
    if durations_ms.len() < k {
        return Err(BinningError::TooFewSamples {
            n: durations_ms.len(),
            k,
        });
    }
    let mut sorted = durations_ms.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let mut cuts = Vec::with_capacity(k - 1);
    for i in 1..k {
        let rank = (n * i).div_ceil(k); // 1-based rank of the i/k quantile
        let cut = sorted[rank - 1];
        if cuts.last() != Some(&cut) {
            cuts.push(cut);
        }
    }
    Ok(BinBoundaries {
        k,
        cuts,
        fitted_on: n,
    })
}

/// Map a duration to its bin index. Total: out-of-range durations land in
/// the edge bins, and a duration equal to a cut goes to the lower bin.
pub fn assign_bin(d_ms: u32, boundaries: &BinBoundaries) -> usize {
    boundaries.cuts.partition_point(|&cut| cut < d_ms)
}

/// Render a bin index as its source-side token.
pub fn bin_token(index: usize, boundaries: &BinBoundaries) -> Result<String, BinningError> {
    if index >= boundaries.k {
        return Err(BinningError::IndexOutOfRange {
            index,
            k: boundaries.k,
        });
    }
    Ok(format!("BIN{index}"))
}

pub fn write_boundaries<W: Write>(
    writer: &mut W,
    boundaries: &BinBoundaries,
) -> Result<(), BinningError> {
    let json = serde_json::to_string(boundaries).map_err(|e| BinningError::Format(e.to_string()))?;
    writer.write_all(json.as_bytes())?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn read_boundaries<R: Read>(reader: &mut R) -> Result<BinBoundaries, BinningError> {
    let mut buf = String::new();
    reader.read_to_string(&mut buf)?;
    serde_json::from_str(&buf).map_err(|e| BinningError::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn quartiles_of_one_to_hundred() {
        let durations: Vec<u32> = (1..=100).collect();
        let bins = fit_bins(&durations, 4).unwrap();
        assert_eq!(bins.cuts, vec![25, 50, 75]);
        assert_eq!(bins.fitted_on, 100);
        // Each bin holds exactly 25 of the fitting samples.
        let mut counts = [0usize; 4];
        for &d in &durations {
            counts[assign_bin(d, &bins)] += 1;
        }
        assert_eq!(counts, [25, 25, 25, 25]);
    }

    #[test]
    fn constant_data_collapses_to_one_bin() {
        let durations = vec![500u32; 40];
        let bins = fit_bins(&durations, 4).unwrap();
        assert_eq!(bins.cuts, vec![500]);
        // One cut still separates (-inf, 500] from (500, inf), but all of
        // the fitting data lands in bin 0: one effective bin.
        assert!(durations.iter().all(|&d| assign_bin(d, &bins) == 0));
    }

    #[test]
    fn uniform_random_fill_is_balanced() {
        let mut rng = crate::rng::stream(42, &["binning-test"]);
        let durations: Vec<u32> = (0..10_000).map(|_| rng.gen_range(0..1_000_000)).collect();
        let bins = fit_bins(&durations, 100).unwrap();
        let mut counts = vec![0usize; bins.effective_bins()];
        for &d in &durations {
            counts[assign_bin(d, &bins)] += 1;
        }
        for &count in counts.iter().take(100) {
            assert!(
                (count as i64 - 100).unsigned_abs() <= 2,
                "bin count {count} deviates more than 2% from 100"
            );
        }
    }

    #[test]
    fn edge_bins_catch_out_of_range_durations() {
        let bins = BinBoundaries {
            k: 4,
            cuts: vec![25, 50, 75],
            fitted_on: 100,
        };
        assert_eq!(assign_bin(3, &bins), 0);
        assert_eq!(assign_bin(1_000_000, &bins), 3);
        assert_eq!(assign_bin(50, &bins), 1); // upper-inclusive
        assert_eq!(assign_bin(51, &bins), 2);
    }

    #[test]
    fn exhaustive_scan_matches_quantile_partition() {
        let durations: Vec<u32> = (1..=100).collect();
        let bins = fit_bins(&durations, 4).unwrap();
        for d in 1..=100u32 {
            let expected = match d {
                1..=25 => 0,
                26..=50 => 1,
                51..=75 => 2,
                _ => 3,
            };
            assert_eq!(assign_bin(d, &bins), expected, "d = {d}");
        }
    }

    #[test]
    fn tokens_render_exactly() {
        let bins = BinBoundaries {
            k: 100,
            cuts: (1..100).map(|i| i * 10).collect(),
            fitted_on: 1000,
        };
        assert_eq!(bin_token(4, &bins).unwrap(), "BIN4");
        assert_eq!(bin_token(0, &bins).unwrap(), "BIN0");
        assert_eq!(bin_token(99, &bins).unwrap(), "BIN99");
        assert!(matches!(
            bin_token(100, &bins),
            Err(BinningError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn too_few_samples_is_an_error() {
        assert!(matches!(
            fit_bins(&[1, 2, 3], 4),
            Err(BinningError::TooFewSamples { .. })
        ));
        assert!(matches!(
            fit_bins(&[1, 2, 3], 1),
            Err(BinningError::BinCountTooSmall { .. })
        ));
    }

    #[test]
    fn boundaries_roundtrip_through_json() {
        let bins = fit_bins(&(1..=100).collect::<Vec<u32>>(), 4).unwrap();
        let mut buf = Vec::new();
        write_boundaries(&mut buf, &bins).unwrap();
        assert_eq!(
            String::from_utf8_lossy(&buf),
            "{\"k\":4,\"cuts_ms\":[25,50,75],\"fitted_on\":100}\n"
        );
        let back = read_boundaries(&mut buf.as_slice()).unwrap();
        assert_eq!(back, bins);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn assignment_is_monotone(
                mut durations in proptest::collection::vec(0u32..100_000, 10..200),
                k in 2usize..10,
                d1 in 0u32..120_000,
                d2 in 0u32..120_000,
            ) {
                durations.sort_unstable();
                prop_assume!(durations.len() >= k);
                let bins = fit_bins(&durations, k).unwrap();
                let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
                prop_assert!(assign_bin(lo, &bins) <= assign_bin(hi, &bins));
            }

            #[test]
            fn tie_free_fit_is_balanced_within_one(k in 2usize..20, n_per in 5usize..40) {
                // Strictly increasing samples: no ties by construction.
                let n = k * n_per;
                let durations: Vec<u32> = (0..n as u32).map(|i| i * 7 + 3).collect();
                let bins = fit_bins(&durations, k).unwrap();
                let mut counts = vec![0usize; bins.effective_bins()];
                for &d in &durations {
                    counts[assign_bin(d, &bins)] += 1;
                }
                let max = *counts.iter().max().unwrap();
                let min = *counts.iter().min().unwrap();
                prop_assert!(max - min <= 1, "counts {:?}", counts);
            }
        }
    }
}
