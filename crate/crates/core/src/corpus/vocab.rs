use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::CorpusError;
use crate::binio::fingerprint;

pub const PAD: u32 = 0;
pub const BOS: u32 = 1;
pub const EOS: u32 = 2;
pub const UNK: u32 = 3;

/// Number of reserved ids at the start of every vocabulary.
pub const NUM_RESERVED: usize = 4;

pub const RESERVED_TOKENS: [&str; NUM_RESERVED] = ["<pad>", "<s>", "</s>", "<unk>"];

/// Token string ↔ id map. Ids 0..4 are the reserved specials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Vocab {
    /// Builds a vocabulary from token counts: descending frequency, then
    /// lexicographic order. Reserved strings in `counts` are ignored.
    pub fn from_counts(counts: &HashMap<String, u64>) -> Self {
        let mut entries: Vec<(&String, u64)> = counts
            .iter()
            .filter(|(t, _)| !RESERVED_TOKENS.contains(&t.as_str()))
            .map(|(t, &c)| (t, c))
            .collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Self::from_tokens(entries.into_iter().map(|(t, _)| t.clone()))
            .expect("counts keys are distinct")
    }

    /// Builds a vocabulary from an ordered list of non-reserved tokens.
    pub fn from_tokens<I: IntoIterator<Item = String>>(tokens: I) -> Result<Self, CorpusError> {
        let mut all: Vec<String> = RESERVED_TOKENS.iter().map(|s| s.to_string()).collect();
        let mut ids: HashMap<String, u32> = all
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        for t in tokens {
            if ids.contains_key(&t) {
                return Err(CorpusError::Vocab(format!("duplicate or reserved token `{t}`")));
            }
            ids.insert(t.clone(), all.len() as u32);
            all.push(t);
        }
        Ok(Self { tokens: all, ids })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.len() == NUM_RESERVED
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    /// Maps unknown tokens to UNK.
    pub fn id_or_unk(&self, token: &str) -> u32 {
        self.id(token).unwrap_or(UNK)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn contains_id(&self, id: u32) -> bool {
        (id as usize) < self.tokens.len()
    }

    pub fn fingerprint(&self) -> u64 {
        let parts: Vec<&[u8]> = self.tokens.iter().map(|t| t.as_bytes()).collect();
        fingerprint(&parts)
    }

    /// One token per line, reserved block omitted.
    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        let mut f = fs::File::create(path).map_err(|e| CorpusError::io(path, e))?;
        for t in &self.tokens[NUM_RESERVED..] {
            writeln!(f, "{t}").map_err(|e| CorpusError::io(path, e))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let f = fs::File::open(path).map_err(|e| CorpusError::io(path, e))?;
        let lines = BufReader::new(f)
            .lines()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CorpusError::io(path, e))?;
        Self::from_tokens(lines)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_then_lexicographic() {
        let counts: HashMap<String, u64> = [("b", 2), ("a", 2), ("c", 5), ("<s>", 9)]
            .into_iter()
            .map(|(t, c)| (t.to_string(), c))
            .collect();
        let v = Vocab::from_counts(&counts);
        assert_eq!(&v.tokens()[NUM_RESERVED..], ["c", "a", "b"]);
        assert_eq!(v.id("c"), Some(4));
        assert_eq!(v.id("<s>"), Some(BOS));
        assert_eq!(v.id_or_unk("zzz"), UNK);
    }

    #[test]
    fn reserved_tokens_rejected() {
        assert!(Vocab::from_tokens(vec!["</s>".to_string()]).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.txt");
        let v = Vocab::from_tokens(["x", "y"].map(String::from)).unwrap();
        v.save(&p).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "x\ny\n");
        let w = Vocab::load(&p).unwrap();
        assert_eq!(v, w);
        assert_eq!(v.fingerprint(), w.fingerprint());
    }
}
