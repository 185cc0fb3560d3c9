use super::bpe::{detokenize_bpe, BpeModel};
use crate::binio::fingerprint;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Tokenizer {
    #[default]
    Whitespace,
    Bpe(BpeModel),
}

impl Tokenizer {
    /// Splits a line into token strings. `None` marks a record that is empty
    /// after tokenization; callers skip it.
    pub fn tokenize_line(&self, line: &str) -> Option<Vec<String>> {
        let toks: Vec<String> = match self {
            Tokenizer::Whitespace => line.split_whitespace().map(String::from).collect(),
            Tokenizer::Bpe(m) => m.encode_line(line),
        };
        (!toks.is_empty()).then_some(toks)
    }

    pub fn detokenize<S: AsRef<str>>(&self, tokens: &[S]) -> String {
        match self {
            Tokenizer::Whitespace => tokens
                .iter()
                .map(AsRef::as_ref)
                .collect::<Vec<_>>()
                .join(" "),
            Tokenizer::Bpe(_) => detokenize_bpe(tokens),
        }
    }

    pub fn fingerprint(&self) -> u64 {
        match self {
            Tokenizer::Whitespace => fingerprint(&[b"whitespace"]),
            Tokenizer::Bpe(m) => {
                let mut parts: Vec<&[u8]> = vec![b"bpe"];
                for (l, r) in m.merges() {
                    parts.push(l.as_bytes());
                    parts.push(r.as_bytes());
                }
                fingerprint(&parts)
            }
        }
    }
}

/// Free-function form of [`Tokenizer::tokenize_line`].
pub fn tokenize_line(line: &str, mode: &Tokenizer) -> Option<Vec<String>> {
    mode.tokenize_line(line)
}
