use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;
use std::time::Instant;

use super::args::*;
use super::{CliError, Cli, Command, ModelBundle};
use crate::base_model::{LexicalNgramModel, ModelConfig, TranslationModel};
use crate::binio::fingerprint;
use crate::corpus::{
    learn_bpe, load_parallel, load_parallel_with_vocabs, read_pairs, BpeModel, ParallelFormat, Tokenizer,
    TokenizerConfig, EOS,
};
use crate::datastore::{self, Datastore, IndexKind, IndexSettings, KnnParams, LoadOptions};
use crate::decoder::{DecodeOptions, Decoder};
use crate::eval::experiments::{self, SuiteConfig};
use crate::eval::{
    bleu, render, run_bench, tune, BenchConfig, DomainConfig, EvalSet, Evaluator, Language, SynthConfig, TuneGrid,
    SIGNATURE,
};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn write_file(path: &Path, body: &[u8]) -> Result<(), CliError> {
    fs::write(path, body).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| usage(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_output(path: &Path, body: &str) -> Result<(), CliError> {
    if path.as_os_str() == "-" {
        let mut out = io::stdout().lock();
        return out
            .write_all(body.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| usage(format!("stdout: {e}")));
    }
    write_file(path, body.as_bytes())
}

fn resolve_seed(seed: &mut Option<u64>) {
    if seed.is_none() {
        let s = rand::random::<u64>();
        eprintln!("no --seed given; using seed {s}");
        *seed = Some(s);
    }
}

fn corpus_format(args: &CorpusArgs) -> Result<ParallelFormat, CliError> {
    match (&args.corpus, &args.source, &args.target) {
        (Some(tsv), None, None) => Ok(ParallelFormat::Tsv(tsv.clone())),
        (None, Some(s), Some(t)) => Ok(ParallelFormat::TwoFiles(s.clone(), t.clone())),
        (None, None, None) => Err(usage("a corpus is required: --corpus FILE or --source FILE --target FILE")),
        _ => Err(usage("use either --corpus or --source/--target, not both")),
    }
}

fn decode_options(args: &DecodeArgs) -> Result<DecodeOptions, CliError> {
    if args.beam == 0 {
        return Err(usage("--beam must be at least 1"));
    }
    if args.max_output_len == Some(0) {
        return Err(usage("--max-output-len must be at least 1"));
    }
    Ok(DecodeOptions {
        beam: args.beam,
        max_len: args.max_output_len,
        length_norm: !args.no_length_norm,
    })
}

fn index_settings(args: &IndexArgs, seed: u64) -> Result<IndexSettings, CliError> {
    if args.pq_bytes == 0 {
        return Err(usage("--pq-bytes must be at least 1"));
    }
    if args.clusters == Some(0) {
        return Err(usage("--clusters must be at least 1"));
    }
    if args.kmeans_iters == 0 {
        return Err(usage("--kmeans-iters must be at least 1"));
    }
    let kind = if args.flat {
        IndexKind::Flat
    } else {
        IndexKind::IvfPq {
            clusters: args.clusters,
            sub_quantizers: args.pq_bytes,
            identity: args.identity_pq,
        }
    };
    Ok(IndexSettings {
        kind,
        kmeans_iters: args.kmeans_iters,
        seed,
        provenance: !args.no_provenance,
    })
}

fn knn_params(args: &KnnArgs, lambda: f64, temperature: f64) -> Result<KnnParams, CliError> {
    let params = KnnParams {
        k: args.k,
        temperature,
        nprobe: args.nprobe,
        lambda,
    };
    params.validate()?;
    Ok(params)
}

fn load_datastore(path: &Path, model: &LexicalNgramModel, allow_mismatch: bool) -> Result<Datastore, CliError> {
    Datastore::load_for(
        path,
        model,
        LoadOptions {
            allow_fingerprint_mismatch: allow_mismatch,
        },
    )
    .map_err(|e| CliError::from(e).at(path))
}

pub(super) fn dispatch(mut cli: Cli) -> Result<(), CliError> {
    if cli.workers == 0 {
        return Err(usage("--workers must be at least 1"));
    }
    // Only fails if a pool already exists (repeated in-process runs).
    let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build_global();
    match &mut cli.command {
        Command::Synth(a) => resolve_seed(&mut a.seed),
        Command::Fit(a) => resolve_seed(&mut a.seed),
        Command::BuildDatastore(a) => resolve_seed(&mut a.seed),
        Command::Experiment(a) => resolve_seed(&mut a.seed),
        Command::Bench(a) => resolve_seed(&mut a.seed),
        _ => {}
    }
    eprintln!("config: {cli:?}");
    let workers = cli.workers;
    match cli.command {
        Command::Synth(a) => synth(a),
        Command::LearnBpe(a) => learn_bpe_cmd(a),
        Command::Fit(a) => fit(a),
        Command::BuildDatastore(a) => build_datastore(a),
        Command::Translate(a) => translate(a, workers),
        Command::Bleu(a) => bleu_cmd(a),
        Command::Tune(a) => tune_cmd(a, workers),
        Command::Experiment(a) => experiment(a, workers),
        Command::Bench(a) => bench(a),
    }
}

fn synth(a: SynthArgs) -> Result<(), CliError> {
    let seed = a.seed.unwrap_or_default();
    if a.sentences == 0 {
        return Err(usage("--sentences must be at least 1"));
    }
    let domains: Vec<DomainConfig> = a.domains.iter().map(|d| DomainConfig::named(d)).collect();
    let lang = Language::generate(
        SynthConfig {
            seed,
            ..SynthConfig::default()
        },
        &domains,
    );
    let domain = match &a.domain {
        None => None,
        Some(name) => Some(
            lang.domains()
                .iter()
                .position(|d| &d.name == name)
                .ok_or_else(|| usage(format!("unknown domain `{name}`; known: {}", a.domains.join(","))))?,
        ),
    };
    let label = a.domain.as_deref().unwrap_or("general");
    let sample_seed = fingerprint(&[&seed.to_le_bytes(), label.as_bytes(), a.part.as_bytes()]);
    let mut out = String::new();
    for (s, t) in lang.corpus(a.sentences, sample_seed, domain) {
        out.push_str(&s);
        out.push('\t');
        out.push_str(&t);
        out.push('\n');
    }
    write_file(&a.out, out.as_bytes())?;
    println!("wrote {} pairs ({label}/{}) to {}", a.sentences, a.part, a.out.display());
    Ok(())
}

fn learn_bpe_cmd(a: LearnBpeArgs) -> Result<(), CliError> {
    let format = corpus_format(&a.corpus)?;
    let pairs = read_pairs(&format)?;
    let lines: Vec<&str> = pairs
        .iter()
        .map(|p| p.0.as_str())
        .chain(pairs.iter().map(|p| p.1.as_str()))
        .collect();
    let model = learn_bpe(&lines, a.merges)?;
    model.save(&a.out)?;
    println!("learned {} merges; wrote {}", model.num_merges(), a.out.display());
    Ok(())
}

fn fit(a: FitArgs) -> Result<(), CliError> {
    let config = ModelConfig {
        mix: a.mix,
        alpha: a.alpha,
        window: a.window,
        seed: a.seed.unwrap_or_default(),
        dim: a.dim,
        source_weight: a.source_weight,
        target_weight: a.target_weight,
    };
    config.validate()?;
    if a.max_len < 3 {
        return Err(usage("--max-len must be at least 3"));
    }
    let format = corpus_format(&a.corpus)?;
    let tokenizer = match &a.bpe {
        Some(path) => Tokenizer::Bpe(BpeModel::load(path)?),
        None => Tokenizer::Whitespace,
    };
    let tok = TokenizerConfig {
        tokenizer,
        max_len: a.max_len,
        shared_vocab: a.shared_vocab,
    };
    let corpus = load_parallel(&format, &tok)?;
    let model = LexicalNgramModel::fit(config, &corpus)?;
    let bundle = ModelBundle {
        model,
        source_vocab: corpus.source_vocab.clone(),
        target_vocab: corpus.target_vocab.clone(),
        tokenizer: tok,
    };
    bundle.save(&a.model)?;
    let s = corpus.stats;
    println!(
        "pairs: {} used, {} skipped empty, {} dropped over --max-len",
        corpus.len(),
        s.skipped_empty,
        s.dropped_too_long
    );
    println!(
        "source vocab: {} tokens, fingerprint {:016x}",
        bundle.source_vocab.len(),
        bundle.source_vocab.fingerprint()
    );
    println!(
        "target vocab: {} tokens, fingerprint {:016x}",
        bundle.target_vocab.len(),
        bundle.target_vocab.fingerprint()
    );
    println!("model fingerprint {:016x}; wrote {}", bundle.model.fingerprint(), a.model.display());
    Ok(())
}

fn build_datastore(a: BuildArgs) -> Result<(), CliError> {
    let settings = index_settings(&a.index, a.seed.unwrap_or_default())?;
    let format = corpus_format(&a.corpus)?;
    let bundle = ModelBundle::load(&a.model)?;
    let corpus = load_parallel_with_vocabs(&format, &bundle.tokenizer, &bundle.source_vocab, &bundle.target_vocab)?;
    let start = Instant::now();
    let ds = datastore::build(&bundle.model, &corpus, &settings)?;
    eprintln!("built in {:.2} s", start.elapsed().as_secs_f64());
    ds.save(&a.out).map_err(|e| CliError::from(e).at(&a.out))?;
    println!(
        "entries: {} (target tokens incl. EOS over {} pairs: {})",
        ds.len(),
        corpus.len(),
        corpus.target_token_count()
    );
    let (kind, sub_quantizers, clusters) = ds.index_shape();
    let sizes = ds.posting_sizes();
    let empty = sizes.iter().filter(|&&n| n == 0).count();
    let (min, max) = (
        sizes.iter().copied().min().unwrap_or(0),
        sizes.iter().copied().max().unwrap_or(0),
    );
    if kind == "flat" {
        println!("index: flat, dim {}", ds.dim());
    } else {
        println!(
            "index: {kind}, dim {}, {clusters} clusters, {sub_quantizers} bytes/code; cluster sizes min {min}, mean {:.1}, max {max}, empty {empty}",
            ds.dim(),
            ds.len() as f64 / clusters.max(1) as f64
        );
    }
    println!("wrote {}", a.out.display());
    Ok(())
}

fn translate(a: TranslateArgs, workers: usize) -> Result<(), CliError> {
    let lambda = if a.datastore.is_some() { a.lambda } else { 0.0 };
    let params = knn_params(&a.knn, lambda, a.temperature)?;
    let options = decode_options(&a.decode)?;
    let bundle = ModelBundle::load(&a.model)?;
    let ds = match &a.datastore {
        Some(path) => Some(load_datastore(path, &bundle.model, a.allow_fingerprint_mismatch)?),
        None => {
            eprintln!("no --datastore: decoding with the base model only (lambda 0)");
            None
        }
    };
    let text = read_text(&a.input)?;
    let tokenizer = &bundle.tokenizer.tokenizer;
    let sources: Vec<Option<Vec<u32>>> = text
        .lines()
        .map(|line| {
            tokenizer.tokenize_line(line).map(|toks| {
                let mut ids: Vec<u32> = toks.iter().map(|t| bundle.source_vocab.id_or_unk(t)).collect();
                ids.push(EOS);
                ids
            })
        })
        .collect();
    let decoder = if a.allow_fingerprint_mismatch {
        Decoder::new_unchecked(&bundle.model, ds.as_ref(), params)?
    } else {
        Decoder::new(&bundle.model, ds.as_ref(), params)?
    };
    let present: Vec<Vec<u32>> = sources.iter().flatten().cloned().collect();
    let mut done = decoder.translate_corpus(&present, &options, workers)?.into_iter();
    let mut out = String::new();
    for s in &sources {
        if s.is_some() {
            let t = done.next().expect("one translation per non-empty line")?;
            out.push_str(&render(&t.tokens, &bundle.target_vocab, tokenizer));
        }
        out.push('\n');
    }
    let dump = match &a.dump_retrievals {
        Some(_) => {
            let mut lines = String::new();
            for (i, s) in sources.iter().enumerate() {
                let Some(s) = s else { continue };
                for rec in decoder.dump_retrievals(i, s, &bundle.target_vocab)? {
                    let json = serde_json::to_string(&rec).map_err(|e| CliError::Internal(e.to_string()))?;
                    lines.push_str(&json);
                    lines.push('\n');
                }
            }
            Some(lines)
        }
        None => None,
    };
    write_output(&a.output, &out)?;
    if let (Some(path), Some(body)) = (&a.dump_retrievals, dump) {
        write_file(path, body.as_bytes())?;
    }
    Ok(())
}

fn bleu_cmd(a: BleuArgs) -> Result<(), CliError> {
    let hyps = read_text(&a.hypotheses)?;
    let refs = read_text(&a.references)?;
    let hyps: Vec<&str> = hyps.lines().collect();
    let refs: Vec<&str> = refs.lines().collect();
    let score = bleu(&hyps, &refs)?;
    if a.json {
        let json = serde_json::to_string_pretty(&score).map_err(|e| CliError::Internal(e.to_string()))?;
        println!("{json}");
    } else {
        let p = score.precisions;
        println!(
            "{SIGNATURE} = {:.2} {:.1}/{:.1}/{:.1}/{:.1} (BP = {:.3} ratio = {:.3} hyp_len = {} ref_len = {})",
            score.score,
            p[0],
            p[1],
            p[2],
            p[3],
            score.brevity_penalty,
            score.sys_len as f64 / score.ref_len.max(1) as f64,
            score.sys_len,
            score.ref_len
        );
    }
    Ok(())
}

fn validate_grid(knn: &KnnArgs, lambdas: &[f64], temperatures: &[f64]) -> Result<TuneGrid, CliError> {
    if lambdas.is_empty() || temperatures.is_empty() {
        return Err(usage("the tuning grid needs at least one lambda and one temperature"));
    }
    for &l in lambdas {
        for &t in temperatures {
            knn_params(knn, l, t)?;
        }
    }
    Ok(TuneGrid {
        lambdas: lambdas.to_vec(),
        temperatures: temperatures.to_vec(),
    })
}

fn tune_cmd(a: TuneArgs, workers: usize) -> Result<(), CliError> {
    let grid = validate_grid(&a.knn, &a.lambdas, &a.temperatures)?;
    let options = decode_options(&a.decode)?;
    let base = knn_params(&a.knn, grid.lambdas[0], grid.temperatures[0])?;
    let format = corpus_format(&a.corpus)?;
    let bundle = ModelBundle::load(&a.model)?;
    let ds = load_datastore(&a.datastore, &bundle.model, false)?;
    let valid = load_parallel_with_vocabs(&format, &bundle.tokenizer, &bundle.source_vocab, &bundle.target_vocab)?;
    let set = EvalSet::from_corpus(&valid);
    let evaluator = Evaluator {
        model: &bundle.model,
        target_vocab: &bundle.target_vocab,
        tokenizer: &bundle.tokenizer.tokenizer,
        options,
        workers,
    };
    let result = tune(&evaluator, Some(&ds), &set, &grid, &base)?;
    let mut table = format!("{:>8} {:>8} {:>8}\n", "lambda", "T", "BLEU");
    for c in &result.cells {
        table.push_str(&format!("{:>8} {:>8} {:>8.2}\n", c.lambda, c.temperature, c.bleu));
    }
    table.push_str(&format!(
        "best: lambda {} T {} BLEU {:.2} (k {}, nprobe {}, beam {})\n",
        result.best.lambda, result.best.temperature, result.best.bleu, result.k, result.nprobe, result.beam
    ));
    print!("{table}");
    if let Some(path) = &a.out {
        let json = serde_json::to_string_pretty(&result).map_err(|e| CliError::Internal(e.to_string()))?;
        write_file(path, (json + "\n").as_bytes())?;
    }
    Ok(())
}

fn experiment(a: ExperimentArgs, workers: usize) -> Result<(), CliError> {
    let grid = validate_grid(&a.knn, &a.lambdas, &a.temperatures)?;
    let seed = a.seed.unwrap_or_default();
    let index = index_settings(&a.index, seed)?;
    let knn = knn_params(&a.knn, 0.5, 10.0)?;
    if a.seeds == 0 {
        return Err(usage("--seeds must be at least 1"));
    }
    if a.beam == 0 {
        return Err(usage("--beam must be at least 1"));
    }
    if a.train == 0 || a.valid == 0 || a.test == 0 {
        return Err(usage("--train, --valid and --test must be positive"));
    }
    if a.fractions.iter().any(|&f| !(f > 0.0 && f <= 1.0)) {
        return Err(usage("--fractions must lie in (0, 1]"));
    }
    if a.ks.contains(&0) {
        return Err(usage("--ks must be at least 1"));
    }
    knn_params(&a.knn, a.sweep_lambda, 1.0)?;
    let config = SuiteConfig {
        synth: SynthConfig::default(),
        domains: a.domains.iter().map(|d| DomainConfig::named(d)).collect(),
        train: a.train,
        valid: a.valid,
        test: a.test,
        domain_train: a.domain_train,
        model: ModelConfig::default(),
        index,
        knn,
        grid,
        beam: a.beam,
        workers,
    };
    let seeds: Vec<u64> = (0..a.seeds as u64).map(|i| seed.wrapping_add(i)).collect();
    let start = Instant::now();
    let report = match a.kind {
        ExperimentKind::InDomain => experiments::run_in_domain(&config, &seeds)?,
        ExperimentKind::DomainAdaptation => {
            if config.domains.is_empty() || a.domain_train == 0 {
                return Err(usage("domain-adaptation needs --domains and a positive --domain-train"));
            }
            experiments::run_domain_adaptation(&config, &seeds)?
        }
        ExperimentKind::SizeAblation => experiments::run_size_ablation(&config, &a.fractions, &seeds)?,
        ExperimentKind::KTSweep => {
            if seeds.len() > 1 {
                eprintln!("k-t-sweep runs one seed; using {seed}");
            }
            experiments::run_k_t_sweep(&config, &a.ks, &a.temperatures, a.sweep_lambda, seed)?
        }
    };
    eprintln!("runtime {:.1} s", start.elapsed().as_secs_f64());
    report.write(&a.out_dir)?;
    print!("{}", report.to_text());
    println!("wrote reports to {}", a.out_dir.display());
    Ok(())
}

fn bench(a: BenchArgs) -> Result<(), CliError> {
    let knn = knn_params(&a.knn, a.lambda, a.temperature)?;
    if a.beam == 0 {
        return Err(usage("--beam must be at least 1"));
    }
    let config = BenchConfig {
        entries: a.entries,
        queries: a.queries,
        clusters: a.clusters,
        sub_quantizers: a.pq_bytes,
        kmeans_iters: a.kmeans_iters,
        knn,
        decode_sentences: a.sentences,
        beam: a.beam,
        seed: a.seed.unwrap_or_default(),
    };
    let report = run_bench(&config)?;
    print!("{}", report.to_text());
    if let Some(path) = &a.out {
        let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?;
        write_file(path, (json + "\n").as_bytes())?;
    }
    Ok(())
}
