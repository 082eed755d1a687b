//! Byte-pair encoding over whitespace-separated words.
//!
//! Word-internal symbols start as single characters, with `</w>` appended
//! to the final character so detokenization is lossless. Training greedily
//! merges the most frequent adjacent pair (ties broken lexicographically
//! for reproducibility) until the requested vocabulary size is reached or
//! no pair occurs at least twice.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::CodecError;

pub const END_OF_WORD: &str = "</w>";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpeModel {
    merges: Vec<(String, String)>,
    ranks: HashMap<(String, String), usize>,
}

fn word_symbols(word: &str) -> Vec<String> {
    let chars: Vec<char> = word.chars().collect();
    let n = chars.len();
    chars
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            if i + 1 == n {
                format!("{c}{END_OF_WORD}")
            } else {
                c.to_string()
            }
        })
        .collect()
}

impl BpeModel {
    /// Train on raw text lines until `vocab_size` symbols (initial
    /// characters plus merge outputs) are available.
    pub fn train<S: AsRef<str>>(corpus_lines: &[S], vocab_size: usize) -> Result<Self, CodecError> {
        let mut word_freq: HashMap<Vec<String>, u64> = HashMap::new();
        for line in corpus_lines {
            for word in line.as_ref().split_whitespace() {
                *word_freq.entry(word_symbols(word)).or_insert(0) += 1;
            }
        }
        if word_freq.is_empty() {
            return Err(CodecError::EmptyCorpus);
        }
        let mut inventory: std::collections::BTreeSet<String> = word_freq
            .keys()
            .flat_map(|symbols| symbols.iter().cloned())
            .collect();
        if vocab_size < inventory.len() {
            return Err(CodecError::VocabTooSmall {
                requested: vocab_size,
                inventory: inventory.len(),
            });
        }

        let mut words: Vec<(Vec<String>, u64)> = word_freq.into_iter().collect();
        words.sort(); // deterministic iteration order

        let mut merges = Vec::new();
        while inventory.len() < vocab_size {
            let mut pair_freq: HashMap<(&str, &str), u64> = HashMap::new();
            for (symbols, freq) in &words {
                for pair in symbols.windows(2) {
                    *pair_freq.entry((&pair[0], &pair[1])).or_insert(0) += freq;
                }
            }
            let best = pair_freq
                .into_iter()
                .filter(|&(_, freq)| freq >= 2)
                .map(|((a, b), freq)| (freq, std::cmp::Reverse((a.to_string(), b.to_string()))))
                .max();
            let Some((_, std::cmp::Reverse(pair))) = best else {
                break;
            };
            let joined = format!("{}{}", pair.0, pair.1);
            for (symbols, _) in &mut words {
                let mut i = 0;
                while i + 1 < symbols.len() {
                    if symbols[i] == pair.0 && symbols[i + 1] == pair.1 {
                        symbols[i] = joined.clone();
                        symbols.remove(i + 1);
                    } else {
                        i += 1;
                    }
                }
            }
            inventory.insert(joined);
            merges.push(pair);
        }
        Ok(Self::from_merges(merges))
    }

    pub fn from_merges(merges: Vec<(String, String)>) -> Self {
        let ranks = merges
            .iter()
            .enumerate()
            .map(|(i, pair)| (pair.clone(), i))
            .collect();
        BpeModel { merges, ranks }
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    /// Segment one word by applying merges in training order.
    pub fn encode_word(&self, word: &str) -> Vec<String> {
        let mut symbols = word_symbols(word);
        loop {
            let mut best: Option<(usize, usize)> = None; // (rank, position)
            for i in 0..symbols.len().saturating_sub(1) {
                let key = (symbols[i].clone(), symbols[i + 1].clone());
                if let Some(&rank) = self.ranks.get(&key) {
                    if best.map_or(true, |(r, _)| rank < r) {
                        best = Some((rank, i));
                    }
                }
            }
            let Some((_, i)) = best else { break };
            let joined = format!("{}{}", symbols[i], symbols[i + 1]);
            symbols[i] = joined;
            symbols.remove(i + 1);
        }
        symbols
    }

    /// Segment a whole line; words are split on whitespace.
    pub fn encode_line(&self, line: &str) -> Vec<String> {
        line.split_whitespace()
            .flat_map(|w| self.encode_word(w))
            .collect()
    }

    /// Inverse of `encode_line` up to whitespace normalization.
    pub fn decode(tokens: &[String]) -> String {
        let mut out = String::new();
        for token in tokens {
            if let Some(stem) = token.strip_suffix(END_OF_WORD) {
                out.push_str(stem);
                out.push(' ');
            } else {
                out.push_str(token);
            }
        }
        out.trim_end().to_string()
    }

    /// Every symbol this model can emit, deterministically ordered:
    /// observed initial characters (sorted) then merge outputs.
    pub fn symbol_inventory<S: AsRef<str>>(&self, corpus_lines: &[S]) -> Vec<String> {
        let mut initial: std::collections::BTreeSet<String> = std::collections::BTreeSet::new();
        for line in corpus_lines {
            for word in line.as_ref().split_whitespace() {
                initial.extend(word_symbols(word));
            }
        }
        let mut symbols: Vec<String> = initial.into_iter().collect();
        let mut seen: std::collections::HashSet<String> = symbols.iter().cloned().collect();
        for (a, b) in &self.merges {
            let joined = format!("{a}{b}");
            if seen.insert(joined.clone()) {
                symbols.push(joined);
            }
        }
        symbols
    }

    /// One merge per line: `left right`.
    pub fn write<W: Write>(&self, writer: &mut W) -> Result<(), CodecError> {
        for (a, b) in &self.merges {
            writeln!(writer, "{a} {b}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self, CodecError> {
        let mut merges = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut parts = line.splitn(2, ' ');
            match (parts.next(), parts.next()) {
                (Some(a), Some(b)) if !a.is_empty() && !b.is_empty() => {
                    merges.push((a.to_string(), b.to_string()));
                }
                _ => {
                    return Err(CodecError::BadMergeLine {
                        line: i + 1,
                        text: line,
                    })
                }
            }
        }
        Ok(Self::from_merges(merges))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn most_frequent_pair_merges_first() {
        // Pair counts: (a,a) = 3, (a,b</w>) = 2.
        let model = BpeModel::train(&["aaab aab"], 100).unwrap();
        assert_eq!(model.merges()[0], ("a".to_string(), "a".to_string()));
    }

    #[test]
    fn single_character_corpus_learns_no_merges() {
        let model = BpeModel::train(&["a a a a"], 100).unwrap();
        assert!(model.merges().is_empty());
    }

    #[test]
    fn vocab_size_below_char_inventory_errors() {
        assert!(matches!(
            BpeModel::train(&["abcdef"], 3),
            Err(CodecError::VocabTooSmall { .. })
        ));
    }

    #[test]
    fn reencoding_the_training_corpus_is_lossless() {
        let corpus = ["lass es gut sein", "es ist gut", "lass das sein"];
        let model = BpeModel::train(&corpus, 40).unwrap();
        for line in &corpus {
            let tokens = model.encode_line(line);
            assert_eq!(BpeModel::decode(&tokens), *line);
        }
    }

    #[test]
    fn unseen_characters_pass_through_as_symbols() {
        let model = BpeModel::train(&["abc abc"], 50).unwrap();
        let tokens = model.encode_word("xyz");
        assert_eq!(tokens, vec!["x", "y", format!("z{END_OF_WORD}")]);
    }

    #[test]
    fn merge_file_roundtrip() {
        let model = BpeModel::train(&["aaab aab abab"], 12).unwrap();
        let mut buf = Vec::new();
        model.write(&mut buf).unwrap();
        let back = BpeModel::read(buf.as_slice()).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn training_is_deterministic() {
        let corpus = ["the cat sat", "the mat sat", "a cat sat on the mat"];
        let a = BpeModel::train(&corpus, 30).unwrap();
        let b = BpeModel::train(&corpus, 30).unwrap();
        assert_eq!(a.merges(), b.merges());
    }

    #[test]
    fn inventory_covers_everything_encodable() {
        let corpus = ["aaab aab abab baa"];
        let model = BpeModel::train(&corpus, 14).unwrap();
        let inventory: std::collections::HashSet<String> =
            model.symbol_inventory(&corpus).into_iter().collect();
        for word in corpus[0].split_whitespace() {
            for token in model.encode_word(word) {
                assert!(inventory.contains(&token), "missing {token}");
            }
        }
    }
}
