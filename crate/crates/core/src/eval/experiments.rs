//! Desk-scale experiments on synthetic corpora: in-domain gain, datastore
//! swap for domain adaptation, datastore size ablation and the k/T sweep.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::synth::{DomainConfig, Language, SynthConfig};
use super::tune::{tune, EvalSet, Evaluator, TuneGrid};
use super::EvalError;
use crate::base_model::{LexicalNgramModel, ModelConfig, TranslationModel};
use crate::binio::fingerprint;
use crate::corpus::{
    build_vocabs, encode, tokenize_pairs, ParallelCorpus, Provenance, TokenizedText, Tokenizer, TokenizerConfig,
};
use crate::datastore::{self, Datastore, IndexSettings, KnnParams};
use crate::decoder::{DecodeOptions, RetrievalCache};

/// Everything an experiment needs besides its seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub synth: SynthConfig,
    pub domains: Vec<DomainConfig>,
    pub train: usize,
    pub valid: usize,
    pub test: usize,
    pub domain_train: usize,
    pub model: ModelConfig,
    pub index: IndexSettings,
    /// Supplies k and nprobe; λ and T come from tuning.
    pub knn: KnnParams,
    pub grid: TuneGrid,
    pub beam: usize,
    pub workers: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            synth: SynthConfig::default(),
            domains: vec![DomainConfig::named("medical"), DomainConfig::named("legal")],
            train: 5000,
            valid: 200,
            test: 500,
            domain_train: 2000,
            model: ModelConfig::default(),
            index: IndexSettings::default(),
            knn: KnnParams::default(),
            grid: TuneGrid::default(),
            beam: 5,
            workers: 1,
        }
    }
}

impl SuiteConfig {
    pub fn fingerprint(&self) -> u64 {
        fingerprint(&[format!("{self:?}").as_bytes()])
    }

    fn evaluator<'a, M: TranslationModel + ?Sized>(
        &self,
        model: &'a M,
        corpus: &'a ParallelCorpus,
        tokenizer: &'a Tokenizer,
    ) -> Evaluator<'a, M> {
        Evaluator {
            model,
            target_vocab: &corpus.target_vocab,
            tokenizer,
            options: DecodeOptions::with_beam(self.beam),
            workers: self.workers,
        }
    }

    fn index_settings(&self, seed: u64) -> IndexSettings {
        IndexSettings {
            seed,
            ..self.index.clone()
        }
    }
}

/// Train/validation/test corpora of one distribution.
#[derive(Debug, Clone)]
pub struct Split {
    pub name: String,
    pub train: ParallelCorpus,
    pub valid: ParallelCorpus,
    pub test: ParallelCorpus,
}

/// General-language splits plus one split per domain, all encoded with
/// vocabularies built over every split.
#[derive(Debug, Clone)]
pub struct Suite {
    pub general: Split,
    pub domains: Vec<Split>,
    pub tokenizer_config: TokenizerConfig,
}

fn derive_seed(seed: u64, label: &str) -> u64 {
    fingerprint(&[&seed.to_le_bytes(), label.as_bytes()])
}

/// `n` pairs whose source does not occur in `exclude`.
fn fresh_pairs(
    lang: &Language,
    n: usize,
    seed: u64,
    domain: Option<usize>,
    exclude: &HashSet<String>,
) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut seen = HashSet::new();
    for _ in 0..n * 100 {
        if out.len() == n {
            break;
        }
        let pair = lang.sample(&mut rng, domain);
        if !exclude.contains(&pair.0) && seen.insert(pair.0.clone()) {
            out.push(pair);
        }
    }
    out
}

struct RawSplit {
    name: String,
    parts: [TokenizedText; 3],
}

fn raw_split(
    lang: &Language,
    config: &SuiteConfig,
    seed: u64,
    name: &str,
    domain: Option<usize>,
    train: usize,
    tok: &TokenizerConfig,
) -> RawSplit {
    let train_pairs = lang.corpus(train, derive_seed(seed, &format!("{name}/train")), domain);
    let mut exclude: HashSet<String> = train_pairs.iter().map(|p| p.0.clone()).collect();
    let valid = fresh_pairs(lang, config.valid, derive_seed(seed, &format!("{name}/valid")), domain, &exclude);
    exclude.extend(valid.iter().map(|p| p.0.clone()));
    let test = fresh_pairs(lang, config.test, derive_seed(seed, &format!("{name}/test")), domain, &exclude);
    RawSplit {
        name: name.to_string(),
        parts: [
            tokenize_pairs(&train_pairs, tok),
            tokenize_pairs(&valid, tok),
            tokenize_pairs(&test, tok),
        ],
    }
}

/// Generates the language for `seed` and every split. Held-out sentences
/// never repeat a training source.
pub fn prepare(config: &SuiteConfig, seed: u64, with_domains: bool) -> Result<Suite, EvalError> {
    let lang = Language::generate(
        SynthConfig {
            seed,
            ..config.synth.clone()
        },
        &config.domains,
    );
    let tok = TokenizerConfig::default();
    let mut raws = vec![raw_split(&lang, config, seed, "general", None, config.train, &tok)];
    if with_domains {
        for (i, d) in config.domains.iter().enumerate() {
            raws.push(raw_split(&lang, config, seed, &d.name, Some(i), config.domain_train, &tok));
        }
    }
    let (sv, tv) = build_vocabs(raws.iter().flat_map(|r| r.parts.iter()), tok.shared_vocab);
    let mut splits = raws
        .iter()
        .map(|r| {
            let enc = |i: usize, part: &str| {
                encode(
                    &r.parts[i],
                    &sv,
                    &tv,
                    Provenance {
                        path: format!("synthetic:{seed}:{}/{part}", r.name),
                        tokenizer_fingerprint: tok.fingerprint(),
                    },
                )
            };
            Ok(Split {
                name: r.name.clone(),
                train: enc(0, "train")?,
                valid: enc(1, "valid")?,
                test: enc(2, "test")?,
            })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    let general = splits.remove(0);
    Ok(Suite {
        general,
        domains: splits,
        tokenizer_config: tok,
    })
}

/// One measured cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    /// Test distribution (domain name, or "general").
    pub group: String,
    pub condition: String,
    pub seed: u64,
    pub bleu: f64,
    pub lambda: Option<f64>,
    pub temperature: Option<f64>,
    pub entries: Option<usize>,
}

/// Mean and spread of one (group, condition) over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub group: String,
    pub condition: String,
    pub seeds: usize,
    pub mean: f64,
    pub stdev: f64,
    /// `mean − mean(base)` within the same group.
    pub delta: f64,
    /// Sample standard deviation of the per-seed deltas.
    pub delta_stdev: f64,
}

/// A directional claim checked against the summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub claim: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config_fingerprint: u64,
    /// (artifact, fingerprint) of models and stores per seed.
    pub fingerprints: Vec<(String, u64)>,
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
    pub assessments: Vec<Assessment>,
    /// (file name, contents)
    pub csv: Vec<(String, String)>,
    pub notes: Vec<String>,
}

pub const BASE: &str = "base";

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; zero for fewer than two values.
pub fn stdev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Groups rows by (group, condition) in first-seen order.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut cells: BTreeMap<(String, String), Vec<(u64, f64)>> = BTreeMap::new();
    for r in rows {
        let key = (r.group.clone(), r.condition.clone());
        if !cells.contains_key(&key) {
            order.push(key.clone());
        }
        cells.entry(key).or_default().push((r.seed, r.bleu));
    }
    order
        .iter()
        .map(|key| {
            let vals = &cells[key];
            let bleus: Vec<f64> = vals.iter().map(|v| v.1).collect();
            let base = cells.get(&(key.0.clone(), BASE.to_string()));
            let deltas: Vec<f64> = match base {
                Some(b) => vals
                    .iter()
                    .filter_map(|(seed, x)| b.iter().find(|(s, _)| s == seed).map(|(_, y)| x - y))
                    .collect(),
                None => Vec::new(),
            };
            let base_mean = base.map(|b| mean(&b.iter().map(|v| v.1).collect::<Vec<_>>()));
            SummaryRow {
                group: key.0.clone(),
                condition: key.1.clone(),
                seeds: vals.len(),
                mean: mean(&bleus),
                stdev: stdev(&bleus),
                delta: base_mean.map_or(0.0, |b| mean(&bleus) - b),
                delta_stdev: stdev(&deltas),
            }
        })
        .collect()
}

impl ExperimentReport {
    fn new(name: &str, config: &SuiteConfig) -> Self {
        Self {
            name: name.to_string(),
            config_fingerprint: config.fingerprint(),
            fingerprints: Vec::new(),
            rows: Vec::new(),
            summary: Vec::new(),
            assessments: Vec::new(),
            csv: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn summary_row(&self, group: &str, condition: &str) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|s| s.group == group && s.condition == condition)
    }

    pub fn passed(&self) -> bool {
        self.assessments.iter().all(|a| a.passed)
    }

    pub fn to_json(&self) -> Result<String, EvalError> {
        serde_json::to_string_pretty(self).map_err(|e| EvalError::Report(e.to_string()))
    }

    /// Aligned-column rendering of the summary and per-seed rows.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} (config {:016x})", self.name, self.config_fingerprint);
        let _ = writeln!(
            out,
            "{:<12} {:<14} {:>5} {:>8} {:>7} {:>8} {:>7}",
            "group", "condition", "seeds", "bleu", "stdev", "delta", "d-sd"
        );
        for s in &self.summary {
            let _ = writeln!(
                out,
                "{:<12} {:<14} {:>5} {:>8.2} {:>7.2} {:>+8.2} {:>7.2}",
                s.group, s.condition, s.seeds, s.mean, s.stdev, s.delta, s.delta_stdev
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<12} {:<14} {:>20} {:>8} {:>6} {:>6} {:>9}",
            "group", "condition", "seed", "bleu", "lambda", "T", "entries"
        );
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x}"));
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<12} {:<14} {:>20} {:>8.2} {:>6} {:>6} {:>9}",
                r.group,
                r.condition,
                r.seed,
                r.bleu,
                opt(r.lambda),
                opt(r.temperature),
                r.entries.map_or("-".to_string(), |e| e.to_string())
            );
        }
        if !self.assessments.is_empty() {
            let _ = writeln!(out);
            for a in &self.assessments {
                let _ = writeln!(out, "[{}] {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.claim, a.detail);
            }
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }

    /// Writes `<name>.json`, `<name>.txt` and every CSV into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), EvalError> {
        let io = |path: &Path, e| EvalError::Io {
            path: path.to_path_buf(),
            source: e,
        };
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let mut files = vec![
            (format!("{}.json", self.name), self.to_json()? + "\n"),
            (format!("{}.txt", self.name), self.to_text()),
        ];
        files.extend(self.csv.iter().cloned());
        for (name, body) in files {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| io(&path, e))?;
        }
        Ok(())
    }
}

fn to_csv<R: Serialize>(rows: &[R]) -> Result<String, EvalError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| EvalError::Report(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| EvalError::Report(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| EvalError::Report(e.to_string()))
}

fn base_row(group: &str, seed: u64, bleu: f64) -> ResultRow {
    ResultRow {
        group: group.to_string(),
        condition: BASE.to_string(),
        seed,
        bleu,
        lambda: None,
        temperature: None,
        entries: None,
    }
}

/// Tunes (λ, T) on `valid` and scores `test` with the winner.
fn tuned_row<M: TranslationModel + ?Sized>(
    config: &SuiteConfig,
    evaluator: &Evaluator<'_, M>,
    ds: &Datastore,
    valid: &EvalSet,
    test: &EvalSet,
    group: &str,
    condition: &str,
    seed: u64,
) -> Result<ResultRow, EvalError> {
    let tuned = tune(evaluator, Some(ds), valid, &config.grid, &config.knn)?;
    let params = tuned.best_params(&config.knn);
    let score = evaluator.score(Some(ds), &params, test, None)?;
    Ok(ResultRow {
        group: group.to_string(),
        condition: condition.to_string(),
        seed,
        bleu: score.score,
        lambda: Some(params.lambda),
        temperature: Some(params.temperature),
        entries: Some(ds.len()),
    })
}

/// Margin check: mean(condition) − mean(reference) > 2 · stdev, where the
/// stdev is the larger of the two conditions' across-seed deviations.
fn margin_check(summary: &[SummaryRow], group: &str, better: &str, worse: &str, strict: bool) -> Assessment {
    let find = |c: &str| summary.iter().find(|s| s.group == group && s.condition == c);
    let (Some(b), Some(w)) = (find(better), find(worse)) else {
        return Assessment {
            claim: format!("{group}: {better} vs {worse}"),
            passed: false,
            detail: "missing condition".into(),
        };
    };
    let sd = b.stdev.max(w.stdev);
    let diff = b.mean - w.mean;
    let passed = if strict { diff > 2.0 * sd } else { diff >= -2.0 * sd };
    Assessment {
        claim: format!(
            "{group}: {better} {} {worse}",
            if strict { ">" } else { ">=" }
        ),
        passed,
        detail: format!(
            "{:.2} vs {:.2}, difference {:+.2}, 2*stdev {:.2}",
            b.mean,
            w.mean,
            diff,
            2.0 * sd
        ),
    }
}

fn fit(config: &SuiteConfig, corpus: &ParallelCorpus, seed: u64) -> Result<LexicalNgramModel, EvalError> {
    Ok(LexicalNgramModel::fit(
        ModelConfig {
            seed,
            ..config.model.clone()
        },
        corpus,
    )?)
}

/// Base model vs tuned kNN-MT with a datastore over the training data.
pub fn run_in_domain(config: &SuiteConfig, seeds: &[u64]) -> Result<ExperimentReport, EvalError> {
    let mut report = ExperimentReport::new("in_domain", config);
    for &seed in seeds {
        let suite = prepare(config, seed, false)?;
        let g = &suite.general;
        let model = fit(config, &g.train, seed)?;
        let ds = datastore::build(&model, &g.train, &config.index_settings(seed))?;
        report.fingerprints.push((format!("model/{seed}"), model.fingerprint()));
        let tokenizer = suite.tokenizer_config.tokenizer.clone();
        let ev = config.evaluator(&model, &g.train, &tokenizer);
        let (valid, test) = (EvalSet::from_corpus(&g.valid), EvalSet::from_corpus(&g.test));
        let base = ev.score(None, &config.knn, &test, None)?;
        report.rows.push(base_row("general", seed, base.score));
        report
            .rows
            .push(tuned_row(config, &ev, &ds, &valid, &test, "general", "knn", seed)?);
    }
    report.summary = summarize(&report.rows);
    report
        .assessments
        .push(margin_check(&report.summary, "general", "knn", BASE, true));
    Ok(report)
}

/// One frozen model fit on the general corpus, evaluated on each domain
/// with no datastore, the domain's own store, the general-corpus store and
/// a store over all corpora.
pub fn run_domain_adaptation(config: &SuiteConfig, seeds: &[u64]) -> Result<ExperimentReport, EvalError> {
    let mut report = ExperimentReport::new("domain_adaptation", config);
    for &seed in seeds {
        let suite = prepare(config, seed, true)?;
        let model = fit(config, &suite.general.train, seed)?;
        report.fingerprints.push((format!("model/{seed}"), model.fingerprint()));
        let settings = config.index_settings(seed);
        let general_ds = datastore::build(&model, &suite.general.train, &settings)?;
        let mut all: Vec<&ParallelCorpus> = vec![&suite.general.train];
        all.extend(suite.domains.iter().map(|d| &d.train));
        let all_ds = datastore::build(&model, &ParallelCorpus::concat(&all)?, &settings)?;
        let tokenizer = suite.tokenizer_config.tokenizer.clone();
        let ev = config.evaluator(&model, &suite.general.train, &tokenizer);
        for d in &suite.domains {
            let own_ds = datastore::build(&model, &d.train, &settings)?;
            let (valid, test) = (EvalSet::from_corpus(&d.valid), EvalSet::from_corpus(&d.test));
            let base = ev.score(None, &config.knn, &test, None)?;
            report.rows.push(base_row(&d.name, seed, base.score));
            for (condition, ds) in [("in-domain", &own_ds), ("base-corpus", &general_ds), ("all-domains", &all_ds)] {
                report
                    .rows
                    .push(tuned_row(config, &ev, ds, &valid, &test, &d.name, condition, seed)?);
            }
        }
    }
    report.summary = summarize(&report.rows);
    for d in &config.domains {
        report
            .assessments
            .push(margin_check(&report.summary, &d.name, "in-domain", BASE, true));
        report
            .assessments
            .push(margin_check(&report.summary, &d.name, "all-domains", "base-corpus", false));
    }
    report.notes.push(
        "all-domains >= base-corpus passes when the difference is not below -2*stdev".into(),
    );
    Ok(report)
}

/// Sentence indices in a seeded order; every prefix is a nested subset.
pub fn nested_order(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SizeRow {
    fraction: f64,
    entries: usize,
    bleu: f64,
}

/// BLEU of stores built over nested fractions of the training sentences.
/// (λ, T) are tuned once on the full store and held fixed.
pub fn run_size_ablation(config: &SuiteConfig, fractions: &[f64], seeds: &[u64]) -> Result<ExperimentReport, EvalError> {
    if fractions.iter().any(|&f| !(f > 0.0 && f <= 1.0)) {
        return Err(EvalError::Config("fractions must lie in (0, 1]".into()));
    }
    let mut report = ExperimentReport::new("size_ablation", config);
    let mut csv_rows = Vec::new();
    for &seed in seeds {
        let suite = prepare(config, seed, false)?;
        let g = &suite.general;
        let model = fit(config, &g.train, seed)?;
        let tokenizer = suite.tokenizer_config.tokenizer.clone();
        let ev = config.evaluator(&model, &g.train, &tokenizer);
        let settings = config.index_settings(seed);
        let (valid, test) = (EvalSet::from_corpus(&g.valid), EvalSet::from_corpus(&g.test));
        let full = datastore::build(&model, &g.train, &settings)?;
        let params = tune(&ev, Some(&full), &valid, &config.grid, &config.knn)?.best_params(&config.knn);
        let base = ev.score(None, &config.knn, &test, None)?;
        report.rows.push(base_row("general", seed, base.score));
        let order = nested_order(g.train.len(), derive_seed(seed, "size-ablation"));
        for &fraction in fractions {
            let n = (fraction * g.train.len() as f64).round() as usize;
            if n == 0 {
                report.notes.push(format!("seed {seed}: fraction {fraction} selects no sentence, skipped"));
                continue;
            }
            let mut idx = order[..n].to_vec();
            idx.sort_unstable();
            // All sentences in corpus order is the full corpus again.
            let built;
            let ds = if n == g.train.len() {
                &full
            } else {
                built = match datastore::build(&model, &g.train.subset(&idx), &settings) {
                    Ok(ds) => ds,
                    Err(e) => {
                        report.notes.push(format!("seed {seed}: fraction {fraction} skipped: {e}"));
                        continue;
                    }
                };
                &built
            };
            let score = ev.score(Some(ds), &params, &test, None)?;
            report.rows.push(ResultRow {
                group: "general".into(),
                condition: format!("fraction={fraction}"),
                seed,
                bleu: score.score,
                lambda: Some(params.lambda),
                temperature: Some(params.temperature),
                entries: Some(ds.len()),
            });
            csv_rows.push(SizeRow {
                fraction,
                entries: ds.len(),
                bleu: score.score,
            });
        }
    }
    report.summary = summarize(&report.rows);
    report.assessments.push(size_monotonicity(&report.summary, fractions));
    report.csv.push(("size_ablation.csv".into(), to_csv(&csv_rows)?));
    Ok(report)
}

/// Mean BLEU over increasing fractions never drops by more than the noise
/// tolerance, taken as twice the largest across-seed stdev of any fraction.
fn size_monotonicity(summary: &[SummaryRow], fractions: &[f64]) -> Assessment {
    let mut sorted: Vec<f64> = fractions.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted.dedup();
    let rows: Vec<&SummaryRow> = sorted
        .iter()
        .filter_map(|f| summary.iter().find(|s| s.condition == format!("fraction={f}")))
        .collect();
    let tolerance = 2.0 * rows.iter().map(|r| r.stdev).fold(0.0, f64::max);
    let worst_drop = rows
        .windows(2)
        .map(|w| w[0].mean - w[1].mean)
        .fold(f64::NEG_INFINITY, f64::max);
    let means: Vec<String> = rows.iter().map(|r| format!("{:.2}", r.mean)).collect();
    Assessment {
        claim: "BLEU non-decreasing in datastore size".into(),
        passed: rows.len() == sorted.len() && worst_drop <= tolerance,
        detail: format!(
            "means [{}], largest drop {:.2}, tolerance {:.2}",
            means.join(", "),
            worst_drop.max(0.0),
            tolerance
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SweepRow {
    k: usize,
    #[serde(rename = "T")]
    temperature: f64,
    bleu: f64,
}

/// BLEU over a k × T grid at fixed λ on the general test set.
pub fn run_k_t_sweep(
    config: &SuiteConfig,
    ks: &[usize],
    temperatures: &[f64],
    lambda: f64,
    seed: u64,
) -> Result<ExperimentReport, EvalError> {
    let mut report = ExperimentReport::new("k_T_sweep", config);
    let suite = prepare(config, seed, false)?;
    let g = &suite.general;
    let model = fit(config, &g.train, seed)?;
    let tokenizer = suite.tokenizer_config.tokenizer.clone();
    let ev = config.evaluator(&model, &g.train, &tokenizer);
    let ds = datastore::build(&model, &g.train, &config.index_settings(seed))?;
    let test = EvalSet::from_corpus(&g.test);
    let base = ev.score(None, &config.knn, &test, None)?;
    report.rows.push(base_row("general", seed, base.score));
    let mut csv_rows = Vec::new();
    let mut caches: BTreeMap<usize, RetrievalCache> = BTreeMap::new();
    for &k in ks {
        let cache = caches.entry(k).or_default();
        for &temperature in temperatures {
            let params = KnnParams {
                k,
                temperature,
                lambda,
                ..config.knn
            };
            let score = ev.score(Some(&ds), &params, &test, Some(cache))?;
            report.rows.push(ResultRow {
                group: "general".into(),
                condition: format!("k={k},T={temperature}"),
                seed,
                bleu: score.score,
                lambda: Some(lambda),
                temperature: Some(temperature),
                entries: Some(ds.len()),
            });
            csv_rows.push(SweepRow {
                k,
                temperature,
                bleu: score.score,
            });
        }
    }
    report.summary = summarize(&report.rows);
    report.csv.push(("k_T_sweep.csv".into(), to_csv(&csv_rows)?));
    Ok(report)
}
