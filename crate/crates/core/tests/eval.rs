mod common;

use common::{corpus, dictionary_pairs, fit};
use knnmt::corpus::Tokenizer;
use knnmt::datastore::{build, IndexSettings, KnnParams};
use knnmt::decoder::DecodeOptions;
use knnmt::eval::experiments::{run_k_t_sweep, run_size_ablation, SuiteConfig};
use knnmt::eval::{bleu, tokenize_13a, tune, EvalSet, Evaluator, TuneGrid};
use proptest::prelude::*;
use serde::Deserialize;

#[derive(Deserialize)]
struct Golden {
    name: String,
    hypotheses: Vec<String>,
    references: Vec<String>,
    bleu: f64,
    brevity_penalty: f64,
}

fn goldens() -> Vec<Golden> {
    let text = include_str!("data/bleu_golden.json");
    serde_json::from_str(text).unwrap()
}

fn small_suite() -> SuiteConfig {
    SuiteConfig {
        train: 300,
        valid: 30,
        test: 40,
        domain_train: 150,
        grid: TuneGrid {
            lambdas: vec![0.3, 0.7],
            temperatures: vec![10.0],
        },
        beam: 2,
        ..SuiteConfig::default()
    }
}

/// Sources encoded with the training vocabulary, raw targets as references.
fn eval_set(pairs: &[(String, String)], train: &knnmt::corpus::ParallelCorpus) -> EvalSet {
    let sources = pairs
        .iter()
        .map(|(s, _)| {
            let mut ids: Vec<u32> = s.split_whitespace().map(|w| train.source_vocab.id_or_unk(w)).collect();
            ids.push(knnmt::corpus::EOS);
            ids
        })
        .collect();
    EvalSet {
        sources,
        references: pairs.iter().map(|p| p.1.clone()).collect(),
    }
}

#[test]
fn bleu_matches_golden_file() {
    let cases = goldens();
    assert!(cases.len() >= 10);
    for g in cases {
        let s = bleu(&g.hypotheses, &g.references).unwrap();
        assert!((s.score - g.bleu).abs() < 5e-4, "{}: {} vs {}", g.name, s.score, g.bleu);
        assert!((s.brevity_penalty - g.brevity_penalty).abs() < 5e-6, "{}", g.name);
    }
}

#[test]
fn smoothing_by_hand() {
    // p1..p3 = 3/4, 2/3, 1/2; p4 has no match in one 4-gram, so 1/(2·1).
    let s = bleu(&["a b c d"], &["a b c e"]).unwrap();
    let by_hand = 100.0 * (0.75f64 * (2.0 / 3.0) * 0.5 * 0.5).powf(0.25);
    assert!((s.score - by_hand).abs() < 1e-9);
    assert_eq!(s.precisions[3], 50.0);
    // Three zero orders: 1/(2·5), 1/(4·4), 1/(8·3).
    let s = bleu(&["x a y b z c"], &["a x b y c z"]).unwrap();
    let by_hand = 100.0 * (1.0f64 / 10.0 / 16.0 / 24.0).powf(0.25);
    assert!((s.score - by_hand).abs() < 1e-9);
}

#[test]
fn bleu_edge_cases() {
    let s = bleu(&["a b c d e"], &["a b c d e"]).unwrap();
    assert!((s.score - 100.0).abs() < 1e-9);
    let degenerate = bleu(&["", ""], &["a b c d", "e f g h"]).unwrap();
    assert_eq!(degenerate.score, 0.0);
    assert_eq!(degenerate.brevity_penalty, 0.0);
    let partial = bleu(&["a b c d", ""], &["a b c d", "e f g h"]).unwrap();
    assert!(partial.score > degenerate.score);
    assert!(bleu(&["a"], &["a", "b"]).is_err());
    assert_eq!(tokenize_13a("Hello, world!"), "Hello , world !");
    assert_eq!(tokenize_13a("1,000.50 and 3-4"), "1,000.50 and 3 - 4");
}

#[test]
fn tuning_on_a_dictionary_corpus() {
    let train = corpus(&dictionary_pairs(600, 10, 2, 1));
    let m = fit(&train, 0);
    let ds = build(&m, &train, &IndexSettings::default()).unwrap();
    let set = eval_set(&dictionary_pairs(60, 10, 2, 2), &train);
    let tokenizer = Tokenizer::Whitespace;
    let ev = Evaluator {
        model: &m,
        target_vocab: &train.target_vocab,
        tokenizer: &tokenizer,
        options: DecodeOptions::with_beam(2),
        workers: 1,
    };
    let base = ev.score(None, &KnnParams::default(), &set, None).unwrap().score;

    let zero = TuneGrid {
        lambdas: vec![0.0],
        temperatures: vec![1.0, 10.0, 100.0],
    };
    let r = tune(&ev, Some(&ds), &set, &zero, &KnnParams::default()).unwrap();
    assert!(r.cells.iter().all(|c| c.bleu == base));

    let single = TuneGrid {
        lambdas: vec![0.4],
        temperatures: vec![10.0],
    };
    let r = tune(&ev, Some(&ds), &set, &single, &KnnParams::default()).unwrap();
    assert_eq!(r.cells.len(), 1);
    assert_eq!(r.best, r.cells[0]);

    let mut grid = TuneGrid::default();
    grid.lambdas.insert(0, 0.0);
    let r = tune(&ev, Some(&ds), &set, &grid, &KnnParams::default()).unwrap();
    assert_eq!(r.cells.len(), 30);
    assert!(r.best.lambda > 0.0, "best {:?}, base {base}", r.best);
    assert!(r.best.bleu > base);
    assert_eq!((r.k, r.nprobe, r.beam), (64, 32, 2));
}

#[test]
fn repeated_full_fraction_rows_are_identical() {
    let config = small_suite();
    let report = run_size_ablation(&config, &[1.0, 1.0], &[0]).unwrap();
    let rows: Vec<_> = report.rows.iter().filter(|r| r.condition == "fraction=1").collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], rows[1]);
    assert!(run_size_ablation(&config, &[0.0], &[0]).is_err());
    assert!(run_size_ablation(&config, &[1.5], &[0]).is_err());
}

#[test]
fn single_neighbor_ignores_temperature_at_lambda_one() {
    let config = small_suite();
    let report = run_k_t_sweep(&config, &[1, 4, 4], &[1.0, 10.0, 100.0], 1.0, 3).unwrap();
    let bleu_of = |cond: &str| -> Vec<f64> {
        report.rows.iter().filter(|r| r.condition == cond).map(|r| r.bleu).collect()
    };
    let k1: Vec<f64> = ["k=1,T=1", "k=1,T=10", "k=1,T=100"].iter().flat_map(|c| bleu_of(c)).collect();
    assert_eq!(k1.len(), 3);
    assert!(k1.iter().all(|&b| b == k1[0]));
    let dup = bleu_of("k=4,T=10");
    assert_eq!(dup.len(), 2);
    assert_eq!(dup[0], dup[1]);
    let csv = &report.csv[0];
    assert_eq!(csv.0, "k_T_sweep.csv");
    assert!(csv.1.starts_with("k,T,bleu"));
}

#[test]
fn identical_stores_score_identically() {
    // A "domain" equal to the base corpus: both stores are the same bytes.
    let train = corpus(&dictionary_pairs(300, 10, 2, 4));
    let m = fit(&train, 0);
    let a = build(&m, &train, &IndexSettings::default()).unwrap();
    let b = build(&m, &train.clone(), &IndexSettings::default()).unwrap();
    assert_eq!(a.to_bytes(), b.to_bytes());
    let tokenizer = Tokenizer::Whitespace;
    let ev = Evaluator {
        model: &m,
        target_vocab: &train.target_vocab,
        tokenizer: &tokenizer,
        options: DecodeOptions::with_beam(2),
        workers: 2,
    };
    let set = eval_set(&dictionary_pairs(40, 10, 2, 5), &train);
    let ra = tune(&ev, Some(&a), &set, &TuneGrid::default(), &KnnParams::default()).unwrap();
    let rb = tune(&ev, Some(&b), &set, &TuneGrid::default(), &KnnParams::default()).unwrap();
    assert_eq!(ra, rb);
}

#[test]
fn reports_regenerate_identically() {
    let config = small_suite();
    let a = run_size_ablation(&config, &[0.5, 1.0], &[0, 1]).unwrap();
    let b = run_size_ablation(&config, &[0.5, 1.0], &[0, 1]).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    assert_eq!(a.to_text(), b.to_text());
    // Deltas are recomputable from the per-seed rows.
    for s in &a.summary {
        let mean_of = |cond: &str| {
            let v: Vec<f64> = a.rows.iter().filter(|r| r.condition == cond).map(|r| r.bleu).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!((s.delta - (mean_of(&s.condition) - mean_of("base"))).abs() < 1e-9);
    }
    assert!(a.summary.iter().all(|s| s.seeds == 2));
}

fn words() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec("[a-e]{1,3}", 4..14)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identical_input_scores_100(ws in words()) {
        let line = ws.join(" ");
        let s = bleu(&[&line], &[&line]).unwrap();
        prop_assert!((s.score - 100.0).abs() < 1e-9);
    }

    #[test]
    fn corrupting_one_token_never_helps(ws in words(), at in 0usize..14) {
        let reference = ws.join(" ");
        let mut bad = ws.clone();
        let i = at % bad.len();
        bad[i] = "zzz".into();
        let s = bleu(&[bad.join(" ")], &[&reference]).unwrap();
        prop_assert!(s.score < 100.0);
    }

    #[test]
    fn score_is_bounded(h in words(), r in words()) {
        let s = bleu(&[h.join(" ")], &[r.join(" ")]).unwrap();
        prop_assert!((0.0..=100.0 + 1e-9).contains(&s.score));
        prop_assert!((0.0..=1.0).contains(&s.brevity_penalty));
    }
}
