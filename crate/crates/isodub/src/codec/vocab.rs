//! Token/id vocabularies with reserved special tokens.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::CodecError;

/// Specials occupy the first ids of every vocabulary, in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialToken {
    Pad = 0,
    Bos = 1,
    Eos = 2,
    Unk = 3,
    Delim = 4,
    Eow = 5,
    Pause = 6,
}

impl SpecialToken {
    pub fn id(self) -> u32 {
        self as u32
    }

    pub fn text(self) -> &'static str {
        SPECIAL_TOKENS[self as usize]
    }
}

/// Surface forms; `DELIM`, `EOW`, and `PAUSE` appear verbatim in dumps.
pub const SPECIAL_TOKENS: [&str; 7] = ["<pad>", "<bos>", "<eos>", "<unk>", "DELIM", "EOW", "PAUSE"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum VocabKind {
    TextBpe,
    PhonemeClosed,
}

/// A total token <-> id bijection.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    kind: VocabKind,
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Build a vocabulary from regular tokens; specials are prepended.
    pub fn new<I, S>(kind: VocabKind, regular_tokens: I) -> Result<Self, CodecError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut tokens: Vec<String> = SPECIAL_TOKENS.iter().map(|s| s.to_string()).collect();
        let mut index: HashMap<String, u32> = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        for token in regular_tokens {
            let token = token.into();
            if index.contains_key(&token) {
                return Err(CodecError::DuplicateToken(token));
            }
            index.insert(token.clone(), tokens.len() as u32);
            tokens.push(token);
        }
        Ok(Vocabulary {
            kind,
            tokens,
            index,
        })
    }

    pub fn kind(&self) -> VocabKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false // specials are always present
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn id_or_unk(&self, token: &str) -> u32 {
        self.id(token).unwrap_or(SpecialToken::Unk.id())
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    /// Space-joined token dump in the listing style of the target format.
    pub fn dump(&self, ids: &[u32]) -> String {
        ids.iter()
            .map(|&id| self.token(id))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// One token per line; the id is the line number.
    pub fn write<W: Write>(&self, writer: &mut W) -> Result<(), CodecError> {
        for token in &self.tokens {
            writer.write_all(token.as_bytes())?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(kind: VocabKind, reader: R) -> Result<Self, CodecError> {
        let mut lines = Vec::new();
        for line in reader.lines() {
            lines.push(line?);
        }
        while lines.last().is_some_and(|l| l.is_empty()) {
            lines.pop();
        }
        for (i, special) in SPECIAL_TOKENS.iter().enumerate() {
            if lines.get(i).map(String::as_str) != Some(*special) {
                return Err(CodecError::UnknownToken(format!(
                    "vocabulary file must start with the reserved specials; line {} is {:?}",
                    i + 1,
                    lines.get(i)
                )));
            }
        }
        Self::new(kind, lines.into_iter().skip(SPECIAL_TOKENS.len()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specials_get_reserved_low_ids() {
        let vocab = Vocabulary::new(VocabKind::PhonemeClosed, ["AA1", "B"]).unwrap();
        assert_eq!(vocab.id("<pad>"), Some(0));
        assert_eq!(vocab.id("EOW"), Some(SpecialToken::Eow.id()));
        assert_eq!(vocab.id("PAUSE"), Some(SpecialToken::Pause.id()));
        assert_eq!(vocab.id("AA1"), Some(7));
        assert_eq!(vocab.token(8), "B");
    }

    #[test]
    fn bijection_is_total_and_duplicates_fail() {
        let vocab = Vocabulary::new(VocabKind::TextBpe, ["x", "y"]).unwrap();
        for id in 0..vocab.len() as u32 {
            assert_eq!(vocab.id(vocab.token(id)), Some(id));
        }
        assert!(Vocabulary::new(VocabKind::TextBpe, ["x", "x"]).is_err());
        assert!(Vocabulary::new(VocabKind::TextBpe, ["EOW"]).is_err());
    }

    #[test]
    fn file_roundtrip_preserves_ids() {
        let vocab = Vocabulary::new(VocabKind::PhonemeClosed, ["K", "AE1", "T", "S"]).unwrap();
        let mut buf = Vec::new();
        vocab.write(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("<pad>\n<bos>\n<eos>\n<unk>\nDELIM\nEOW\nPAUSE\nK\n"));
        let back = Vocabulary::read(VocabKind::PhonemeClosed, buf.as_slice()).unwrap();
        assert_eq!(back.id("S"), vocab.id("S"));
        assert_eq!(back.len(), vocab.len());
    }

    #[test]
    fn unknown_tokens_map_to_unk() {
        let vocab = Vocabulary::new(VocabKind::TextBpe, ["x"]).unwrap();
        assert_eq!(vocab.id_or_unk("zzz"), SpecialToken::Unk.id());
    }
}
