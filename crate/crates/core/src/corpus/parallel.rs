use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::tokenize::Tokenizer;
use super::vocab::{Vocab, BOS, EOS};
use super::CorpusError;
use crate::binio::fingerprint;

pub const DEFAULT_MAX_LEN: usize = 256;

/// A tokenized sentence pair. `source` ends with EOS; `target` is wrapped in
/// BOS … EOS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    pub source: Vec<u32>,
    pub target: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParallelFormat {
    /// `source \t target` per line.
    Tsv(PathBuf),
    /// Line-aligned source and target files.
    TwoFiles(PathBuf, PathBuf),
}

#[derive(Debug, Clone)]
pub struct TokenizerConfig {
    pub tokenizer: Tokenizer,
    /// Applied to the id sequences including BOS/EOS.
    pub max_len: usize,
    pub shared_vocab: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            tokenizer: Tokenizer::Whitespace,
            max_len: DEFAULT_MAX_LEN,
            shared_vocab: false,
        }
    }
}

impl TokenizerConfig {
    pub fn fingerprint(&self) -> u64 {
        fingerprint(&[
            &self.tokenizer.fingerprint().to_le_bytes(),
            &(self.max_len as u64).to_le_bytes(),
            &[self.shared_vocab as u8],
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub path: String,
    pub tokenizer_fingerprint: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub rows: usize,
    pub skipped_empty: usize,
    pub dropped_too_long: usize,
}

#[derive(Debug, Clone)]
pub struct ParallelCorpus {
    pub pairs: Vec<SentencePair>,
    /// Whitespace-normalized raw text of each kept pair, used as references.
    pub texts: Vec<(String, String)>,
    pub source_vocab: Vocab,
    pub target_vocab: Vocab,
    pub provenance: Provenance,
    pub stats: LoadStats,
}

impl ParallelCorpus {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Number of target tokens excluding BOS, including EOS.
    pub fn target_token_count(&self) -> usize {
        self.pairs.iter().map(|p| p.target.len() - 1).sum()
    }

    pub fn references(&self) -> Vec<String> {
        self.texts.iter().map(|(_, t)| t.clone()).collect()
    }

    pub fn sources(&self) -> Vec<Vec<u32>> {
        self.pairs.iter().map(|p| p.source.clone()).collect()
    }

    /// Keeps only the pairs at the given indices, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            pairs: indices.iter().map(|&i| self.pairs[i].clone()).collect(),
            texts: indices.iter().map(|&i| self.texts[i].clone()).collect(),
            source_vocab: self.source_vocab.clone(),
            target_vocab: self.target_vocab.clone(),
            provenance: self.provenance.clone(),
            stats: self.stats,
        }
    }

    /// Concatenates corpora that share vocabularies.
    pub fn concat(parts: &[&ParallelCorpus]) -> Result<Self, CorpusError> {
        let first = parts.first().ok_or(CorpusError::EmptyCorpus)?;
        let mut out = (*first).clone();
        for p in &parts[1..] {
            if p.source_vocab.fingerprint() != first.source_vocab.fingerprint()
                || p.target_vocab.fingerprint() != first.target_vocab.fingerprint()
            {
                return Err(CorpusError::Vocab("cannot concatenate corpora with different vocabularies".into()));
            }
            out.pairs.extend(p.pairs.iter().cloned());
            out.texts.extend(p.texts.iter().cloned());
        }
        out.provenance.path = parts
            .iter()
            .map(|p| p.provenance.path.as_str())
            .collect::<Vec<_>>()
            .join("+");
        Ok(out)
    }
}

/// Raw text pairs tokenized once; vocabularies come later.
#[derive(Debug, Clone)]
pub struct TokenizedText {
    pub rows: Vec<TokenizedRow>,
    pub stats: LoadStats,
}

#[derive(Debug, Clone)]
pub struct TokenizedRow {
    pub source: Vec<String>,
    pub target: Vec<String>,
    pub text: (String, String),
}

/// Tokenizes text pairs, dropping empty and over-long rows. Runs in parallel
/// and yields rows in input order.
pub fn tokenize_pairs<S: AsRef<str> + Sync>(pairs: &[(S, S)], config: &TokenizerConfig) -> TokenizedText {
    let tokenized: Vec<Option<(Vec<String>, Vec<String>)>> = pairs
        .par_iter()
        .map(|(s, t)| {
            let s = config.tokenizer.tokenize_line(s.as_ref())?;
            let t = config.tokenizer.tokenize_line(t.as_ref())?;
            Some((s, t))
        })
        .collect();
    let mut stats = LoadStats {
        rows: pairs.len(),
        ..Default::default()
    };
    let mut rows = Vec::with_capacity(pairs.len());
    for ((s, t), toks) in pairs.iter().zip(tokenized) {
        let Some((src, tgt)) = toks else {
            stats.skipped_empty += 1;
            continue;
        };
        if src.len() + 1 > config.max_len || tgt.len() + 2 > config.max_len {
            stats.dropped_too_long += 1;
            continue;
        }
        rows.push(TokenizedRow {
            source: src,
            target: tgt,
            text: (normalize(s.as_ref()), normalize(t.as_ref())),
        });
    }
    TokenizedText { rows, stats }
}

fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Counts token frequencies on each side.
pub fn count_tokens<'a, I>(texts: I) -> (HashMap<String, u64>, HashMap<String, u64>)
where
    I: IntoIterator<Item = &'a TokenizedText>,
{
    let mut src = HashMap::new();
    let mut tgt = HashMap::new();
    for text in texts {
        for row in &text.rows {
            for t in &row.source {
                *src.entry(t.clone()).or_insert(0) += 1;
            }
            for t in &row.target {
                *tgt.entry(t.clone()).or_insert(0) += 1;
            }
        }
    }
    (src, tgt)
}

/// Builds source and target vocabularies from one or more tokenized texts.
pub fn build_vocabs<'a, I>(texts: I, shared: bool) -> (Vocab, Vocab)
where
    I: IntoIterator<Item = &'a TokenizedText>,
{
    let (src, tgt) = count_tokens(texts);
    if shared {
        let mut all = src;
        for (t, c) in tgt {
            *all.entry(t).or_insert(0) += c;
        }
        let v = Vocab::from_counts(&all);
        (v.clone(), v)
    } else {
        (Vocab::from_counts(&src), Vocab::from_counts(&tgt))
    }
}

/// Maps tokenized rows to ids with fixed vocabularies; unknown tokens become UNK.
pub fn encode(
    text: &TokenizedText,
    source_vocab: &Vocab,
    target_vocab: &Vocab,
    provenance: Provenance,
) -> Result<ParallelCorpus, CorpusError> {
    if text.rows.is_empty() {
        return Err(CorpusError::NoUsableRows);
    }
    let pairs = text
        .rows
        .par_iter()
        .map(|row| {
            let mut source: Vec<u32> = row.source.iter().map(|t| source_vocab.id_or_unk(t)).collect();
            source.push(EOS);
            let mut target = Vec::with_capacity(row.target.len() + 2);
            target.push(BOS);
            target.extend(row.target.iter().map(|t| target_vocab.id_or_unk(t)));
            target.push(EOS);
            SentencePair { source, target }
        })
        .collect();
    Ok(ParallelCorpus {
        pairs,
        texts: text.rows.iter().map(|r| r.text.clone()).collect(),
        source_vocab: source_vocab.clone(),
        target_vocab: target_vocab.clone(),
        provenance,
        stats: text.stats,
    })
}

/// Reads raw text pairs from disk.
pub fn read_pairs(format: &ParallelFormat) -> Result<Vec<(String, String)>, CorpusError> {
    match format {
        ParallelFormat::Tsv(path) => {
            let text = read_text(path)?;
            text.lines()
                .enumerate()
                .map(|(i, line)| {
                    let mut fields = line.split('\t');
                    match (fields.next(), fields.next(), fields.next()) {
                        (Some(s), Some(t), None) => Ok((s.to_string(), t.to_string())),
                        _ => Err(CorpusError::Malformed {
                            line: i + 1,
                            reason: format!("{}: expected 2 tab-separated fields", path.display()),
                        }),
                    }
                })
                .collect()
        }
        ParallelFormat::TwoFiles(src, tgt) => {
            let s = read_text(src)?;
            let t = read_text(tgt)?;
            let (s, t): (Vec<&str>, Vec<&str>) = (s.lines().collect(), t.lines().collect());
            if s.len() != t.len() {
                return Err(CorpusError::Malformed {
                    line: s.len().min(t.len()) + 1,
                    reason: format!("line counts differ: {} vs {}", s.len(), t.len()),
                });
            }
            Ok(s.into_iter()
                .zip(t)
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect())
        }
    }
}

fn read_text(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))
}

fn describe(format: &ParallelFormat) -> String {
    match format {
        ParallelFormat::Tsv(p) => p.display().to_string(),
        ParallelFormat::TwoFiles(a, b) => format!("{}|{}", a.display(), b.display()),
    }
}

/// Loads a parallel corpus and builds its vocabularies from it.
pub fn load_parallel(format: &ParallelFormat, config: &TokenizerConfig) -> Result<ParallelCorpus, CorpusError> {
    let raw = read_pairs(format)?;
    let text = tokenize_pairs(&raw, config);
    let (sv, tv) = build_vocabs([&text], config.shared_vocab);
    encode(&text, &sv, &tv, provenance(format, config))
}

/// Loads a parallel corpus against existing vocabularies (OOV → UNK).
pub fn load_parallel_with_vocabs(
    format: &ParallelFormat,
    config: &TokenizerConfig,
    source_vocab: &Vocab,
    target_vocab: &Vocab,
) -> Result<ParallelCorpus, CorpusError> {
    let raw = read_pairs(format)?;
    let text = tokenize_pairs(&raw, config);
    encode(&text, source_vocab, target_vocab, provenance(format, config))
}

pub fn provenance(format: &ParallelFormat, config: &TokenizerConfig) -> Provenance {
    Provenance {
        path: describe(format),
        tokenizer_fingerprint: config.fingerprint(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::vocab::NUM_RESERVED;
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn two_line_tsv() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.tsv", "a b\tx y\nc\tz\n");
        let c = load_parallel(&ParallelFormat::Tsv(p), &TokenizerConfig::default()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.source_vocab.len(), NUM_RESERVED + 3);
        assert_eq!(c.target_vocab.len(), NUM_RESERVED + 3);
        let x = c.target_vocab.id("x").unwrap();
        let y = c.target_vocab.id("y").unwrap();
        assert_eq!(c.pairs[0].target, vec![BOS, x, y, EOS]);
        assert_eq!(*c.pairs[0].source.last().unwrap(), EOS);
    }

    #[test]
    fn malformed_row_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.tsv", "a\tx\nonly-one-field\n");
        match load_parallel(&ParallelFormat::Tsv(p), &TokenizerConfig::default()) {
            Err(CorpusError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_usable_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.tsv", " \tx\n");
        assert!(matches!(
            load_parallel(&ParallelFormat::Tsv(p), &TokenizerConfig::default()),
            Err(CorpusError::NoUsableRows)
        ));
    }

    #[test]
    fn overlong_rows_dropped_and_counted() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.tsv", "a b c d\tx\na\tx\n");
        let cfg = TokenizerConfig {
            max_len: 4,
            ..Default::default()
        };
        let c = load_parallel(&ParallelFormat::Tsv(p), &cfg).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.stats.dropped_too_long, 1);
    }

    #[test]
    fn two_files_and_shared_vocab() {
        let dir = tempfile::tempdir().unwrap();
        let s = write(dir.path(), "s.txt", "a b\nb\n");
        let t = write(dir.path(), "t.txt", "b c\nc\n");
        let cfg = TokenizerConfig {
            shared_vocab: true,
            ..Default::default()
        };
        let c = load_parallel(&ParallelFormat::TwoFiles(s, t), &cfg).unwrap();
        assert_eq!(c.source_vocab, c.target_vocab);
        // b: 3, c: 2, a: 1
        assert_eq!(&c.source_vocab.tokens()[NUM_RESERVED..], ["b", "c", "a"]);
    }

    #[test]
    fn reload_is_stable_and_oov_maps_to_unk() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.tsv", "a b\tx y\nc\tz\n");
        let q = write(dir.path(), "t.tsv", "a new\tx other\n");
        let f = ParallelFormat::Tsv(p);
        let c1 = load_parallel(&f, &TokenizerConfig::default()).unwrap();
        let c2 = load_parallel(&f, &TokenizerConfig::default()).unwrap();
        assert_eq!(c1.source_vocab.fingerprint(), c2.source_vocab.fingerprint());
        assert_eq!(c1.pairs, c2.pairs);
        let t = load_parallel_with_vocabs(
            &ParallelFormat::Tsv(q),
            &TokenizerConfig::default(),
            &c1.source_vocab,
            &c1.target_vocab,
        )
        .unwrap();
        assert_eq!(t.pairs[0].source[1], crate::corpus::UNK);
        assert_eq!(t.texts[0].1, "x other");
    }
}
