//! Byte-pair-encoding subword model.
//!
//! Words are split into characters followed by a standalone end-of-word
//! symbol, and merges concatenate adjacent symbols. The end-of-word symbol
//! participates in merges like any other symbol, so frequent word endings
//! become symbols such as `r</w>`.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::CorpusError;

pub const END_OF_WORD: &str = "</w>";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpeModel {
    merges: Vec<(String, String)>,
    ranks: HashMap<(String, String), usize>,
}

impl BpeModel {
    pub fn from_merges(merges: Vec<(String, String)>) -> Self {
        let ranks = merges
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        Self { merges, ranks }
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn num_merges(&self) -> usize {
        self.merges.len()
    }

    /// Learns `num_merges` merges by repeatedly joining the most frequent
    /// adjacent pair. Ties go to the lexicographically smallest pair. Stops
    /// early when no pair is left to merge.
    pub fn learn<S: AsRef<str>>(lines: &[S], num_merges: usize) -> Result<Self, CorpusError> {
        let mut word_counts: HashMap<&str, u64> = HashMap::new();
        for line in lines {
            for w in line.as_ref().split_whitespace() {
                *word_counts.entry(w).or_default() += 1;
            }
        }
        if word_counts.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }
        // Sorted for a deterministic iteration order.
        let mut words: Vec<(Vec<String>, u64)> = word_counts
            .into_iter()
            .map(|(w, c)| (split_word(w), c))
            .collect();
        words.sort();

        let mut merges = Vec::with_capacity(num_merges);
        for _ in 0..num_merges {
            let mut pair_counts: HashMap<(&str, &str), u64> = HashMap::new();
            for (symbols, count) in &words {
                for p in symbols.windows(2) {
                    *pair_counts.entry((p[0].as_str(), p[1].as_str())).or_default() += count;
                }
            }
            let best = pair_counts
                .into_iter()
                .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)));
            let Some(((l, r), _)) = best else { break };
            let pair = (l.to_string(), r.to_string());
            for (symbols, _) in &mut words {
                merge_pair(symbols, &pair.0, &pair.1);
            }
            merges.push(pair);
        }
        Ok(Self::from_merges(merges))
    }

    /// Encodes one whitespace-free word into subword symbols.
    pub fn encode_word(&self, word: &str) -> Vec<String> {
        let mut symbols = split_word(word);
        loop {
            let best = symbols
                .windows(2)
                .filter_map(|p| self.ranks.get(&(p[0].clone(), p[1].clone())))
                .min()
                .copied();
            let Some(rank) = best else { break };
            let (l, r) = &self.merges[rank];
            merge_pair(&mut symbols, l, r);
        }
        symbols
    }

    pub fn encode_line(&self, line: &str) -> Vec<String> {
        line.split_whitespace()
            .flat_map(|w| self.encode_word(w))
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        let mut f = fs::File::create(path).map_err(|e| CorpusError::io(path, e))?;
        let mut out = format!("bpe-v1 {}\n", self.merges.len());
        for (l, r) in &self.merges {
            out.push_str(l);
            out.push(' ');
            out.push_str(r);
            out.push('\n');
        }
        f.write_all(out.as_bytes()).map_err(|e| CorpusError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("");
        let n: usize = header
            .strip_prefix("bpe-v1 ")
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| CorpusError::Malformed {
                line: 1,
                reason: format!("expected `bpe-v1 <num_merges>`, found `{header}`"),
            })?;
        let mut merges = Vec::with_capacity(n);
        for (i, line) in lines.enumerate() {
            let mut parts = line.split(' ');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(l), Some(r), None) if !l.is_empty() && !r.is_empty() => {
                    merges.push((l.to_string(), r.to_string()))
                }
                _ => {
                    return Err(CorpusError::Malformed {
                        line: i + 2,
                        reason: "expected `left right`".into(),
                    })
                }
            }
        }
        if merges.len() != n {
            return Err(CorpusError::Malformed {
                line: 1,
                reason: format!("header declares {n} merges, file has {}", merges.len()),
            });
        }
        Ok(Self::from_merges(merges))
    }
}

/// Joins subword symbols back into space-separated words.
pub fn detokenize_bpe<S: AsRef<str>>(symbols: &[S]) -> String {
    let mut joined = String::new();
    for s in symbols {
        joined.push_str(s.as_ref());
    }
    joined
        .split(END_OF_WORD)
        .filter(|w| !w.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

fn split_word(word: &str) -> Vec<String> {
    word.chars()
        .map(String::from)
        .chain(std::iter::once(END_OF_WORD.to_string()))
        .collect()
}

fn merge_pair(symbols: &mut Vec<String>, left: &str, right: &str) {
    let mut i = 0;
    while i + 1 < symbols.len() {
        if symbols[i] == left && symbols[i + 1] == right {
            let r = symbols.remove(i + 1);
            symbols[i].push_str(&r);
        }
        i += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(v: &[(&str, &str)]) -> Vec<(String, String)> {
        v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn low_lower_two_merges() {
        // l o w </w> ×2, l o w e r </w> ×1:
        // (l,o)=3 and (o,w)=3 tie, (l,o) is smaller; then (lo,w)=3 is unique.
        let m = BpeModel::learn(&["low", "low", "lower"], 2).unwrap();
        assert_eq!(m.merges(), pairs(&[("l", "o"), ("lo", "w")]).as_slice());
        assert_eq!(m.encode_line("low lower"), ["low", "</w>", "low", "e", "r", "</w>"]);
    }

    #[test]
    fn aa_tie_break() {
        // a a </w> ×2: (a,a)=2, (a,</w>)=2; "</w>" sorts before "a".
        let m = BpeModel::learn(&["aa", "aa"], 1).unwrap();
        assert_eq!(m.merges(), pairs(&[("a", "</w>")]).as_slice());
    }

    #[test]
    fn higher_count_wins() {
        let corpus = ["ab", "ab", "ab", "cd", "cd"];
        let m = BpeModel::learn(&corpus, 1).unwrap();
        assert_eq!(m.merges(), pairs(&[("a", "b")]).as_slice());
    }

    #[test]
    fn zero_merges_is_character_level() {
        let m = BpeModel::learn(&["hello world"], 0).unwrap();
        assert_eq!(m.num_merges(), 0);
        assert_eq!(m.encode_word("hi"), ["h", "i", "</w>"]);
    }

    #[test]
    fn empty_corpus_is_error() {
        assert!(matches!(
            BpeModel::learn(&["", "  "], 3),
            Err(CorpusError::EmptyCorpus)
        ));
    }

    #[test]
    fn stops_when_nothing_left_to_merge() {
        let m = BpeModel::learn(&["ab"], 50).unwrap();
        assert_eq!(m.num_merges(), 2);
        assert_eq!(m.encode_word("ab"), ["ab</w>"]);
    }

    #[test]
    fn file_round_trip_and_header_check() {
        let m = BpeModel::learn(&["low lower newest widest"], 6).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bpe.txt");
        m.save(&p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("bpe-v1 6\n"));
        assert_eq!(BpeModel::load(&p).unwrap(), m);
        assert!(BpeModel::parse("bpe-v2 0\n").is_err());
        assert!(BpeModel::parse("bpe-v1 2\na b\n").is_err());
    }

    #[test]
    fn detokenize_restores_words() {
        let m = BpeModel::learn(&["hay haystack some"], 4).unwrap();
        let toks = m.encode_line("haystack  some");
        assert_eq!(detokenize_bpe(&toks), "haystack some");
    }
}
