use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use super::CliError;
use crate::base_model::{LexicalNgramModel, TranslationModel};
use crate::corpus::{BpeModel, Tokenizer, TokenizerConfig, Vocab};

const TOKENIZER_MAGIC: &str = "knnmt-tokenizer-v1";

/// `path` with `suffix` appended to its file name.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = OsString::from(path.as_os_str());
    s.push(suffix);
    PathBuf::from(s)
}

/// A fitted model with the vocabularies and tokenizer it was fit with.
///
/// On disk: the model file plus `<model>.src.vocab`, `<model>.tgt.vocab`,
/// `<model>.tok` and, for BPE, `<model>.bpe`.
#[derive(Debug, Clone)]
pub struct ModelBundle {
    pub model: LexicalNgramModel,
    pub source_vocab: Vocab,
    pub target_vocab: Vocab,
    pub tokenizer: TokenizerConfig,
}

fn write(path: &Path, body: &[u8]) -> Result<(), CliError> {
    fs::write(path, body).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

impl ModelBundle {
    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        self.model.save(path).map_err(|e| CliError::from(e).at(path))?;
        self.source_vocab.save(&sidecar(path, ".src.vocab"))?;
        self.target_vocab.save(&sidecar(path, ".tgt.vocab"))?;
        let kind = match &self.tokenizer.tokenizer {
            Tokenizer::Whitespace => "whitespace",
            Tokenizer::Bpe(bpe) => {
                bpe.save(&sidecar(path, ".bpe"))?;
                "bpe"
            }
        };
        let tok = format!(
            "{TOKENIZER_MAGIC}\ntokenizer {kind}\nmax_len {}\nshared_vocab {}\n",
            self.tokenizer.max_len, self.tokenizer.shared_vocab
        );
        write(&sidecar(path, ".tok"), tok.as_bytes())
    }

    /// Loads the model and its sidecars; vocabularies that do not match the
    /// fingerprints recorded in the model are a mismatch error.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let model = LexicalNgramModel::load(path).map_err(|e| CliError::from(e).at(path))?;
        let source_vocab = Vocab::load(&sidecar(path, ".src.vocab"))?;
        let target_vocab = Vocab::load(&sidecar(path, ".tgt.vocab"))?;
        for (side, vocab, expected) in [
            ("source", &source_vocab, model.source_vocab_fingerprint()),
            ("target", &target_vocab, model.target_vocab_fingerprint()),
        ] {
            if vocab.fingerprint() != expected {
                return Err(CliError::Mismatch(format!(
                    "{}: {side} vocabulary fingerprint {:016x} does not match the model ({expected:016x})",
                    path.display(),
                    vocab.fingerprint()
                )));
            }
        }
        let tokenizer = load_tokenizer(path)?;
        Ok(Self {
            model,
            source_vocab,
            target_vocab,
            tokenizer,
        })
    }
}

fn load_tokenizer(model_path: &Path) -> Result<TokenizerConfig, CliError> {
    let path = sidecar(model_path, ".tok");
    let text = fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let bad = |what: &str| CliError::Usage(format!("{}: {what}", path.display()));
    let mut lines = text.lines();
    if lines.next() != Some(TOKENIZER_MAGIC) {
        return Err(bad("not a tokenizer settings file"));
    }
    let mut config = TokenizerConfig::default();
    for line in lines {
        let (key, value) = line.split_once(' ').ok_or_else(|| bad("malformed line"))?;
        match key {
            "tokenizer" => {
                config.tokenizer = match value {
                    "whitespace" => Tokenizer::Whitespace,
                    "bpe" => Tokenizer::Bpe(BpeModel::load(&sidecar(model_path, ".bpe"))?),
                    _ => return Err(bad("unknown tokenizer")),
                }
            }
            "max_len" => config.max_len = value.parse().map_err(|_| bad("bad max_len"))?,
            "shared_vocab" => config.shared_vocab = value.parse().map_err(|_| bad("bad shared_vocab"))?,
            _ => return Err(bad("unknown key")),
        }
    }
    Ok(config)
}
