//! Corpus BLEU with 13a tokenization and exponential smoothing, single
//! reference, case-sensitive.

use std::collections::HashMap;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::EvalError;

pub const MAX_ORDER: usize = 4;

/// Signature of the scoring configuration.
pub const SIGNATURE: &str = "BLEU+case.mixed+numrefs.1+smooth.exp+tok.13a";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    /// In `[0, 100]`.
    pub score: f64,
    /// Smoothed n-gram precisions in percent, n = 1..=4.
    pub precisions: [f64; MAX_ORDER],
    pub brevity_penalty: f64,
    pub sys_len: usize,
    pub ref_len: usize,
    pub counts: [usize; MAX_ORDER],
    pub totals: [usize; MAX_ORDER],
}

struct Rules {
    punct: Regex,
    period_comma_before: Regex,
    period_comma_after: Regex,
    dash_after_digit: Regex,
}

fn rules() -> &'static Rules {
    static RULES: OnceLock<Rules> = OnceLock::new();
    RULES.get_or_init(|| Rules {
        punct: Regex::new(r"([\{-~\[-` -&\(-\+:-@/])").unwrap(),
        period_comma_before: Regex::new(r"([^0-9])([\.,])").unwrap(),
        period_comma_after: Regex::new(r"([\.,])([^0-9])").unwrap(),
        dash_after_digit: Regex::new(r"([0-9])(-)").unwrap(),
    })
}

/// The 13a tokenizer of the WMT evaluation scripts.
pub fn tokenize_13a(line: &str) -> String {
    let mut s = line.replace("<skipped>", "").replace("-\n", "").replace('\n', " ");
    if s.contains('&') {
        s = s
            .replace("&quot;", "\"")
            .replace("&amp;", "&")
            .replace("&lt;", "<")
            .replace("&gt;", ">");
    }
    let r = rules();
    let s = format!(" {s} ");
    let s = r.punct.replace_all(&s, " $1 ");
    let s = r.period_comma_before.replace_all(&s, "$1 $2 ");
    let s = r.period_comma_after.replace_all(&s, " $1 $2");
    let s = r.dash_after_digit.replace_all(&s, "$1 $2 ");
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn ngram_counts(tokens: &[&str], n: usize) -> HashMap<Vec<String>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w.iter().map(|t| t.to_string()).collect()).or_insert(0) += 1;
        }
    }
    counts
}

/// Sufficient statistics of one segment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SegmentStats {
    pub sys_len: usize,
    pub ref_len: usize,
    pub counts: [usize; MAX_ORDER],
    pub totals: [usize; MAX_ORDER],
}

impl SegmentStats {
    pub fn of(hypothesis: &str, reference: &str) -> Self {
        let hyp = tokenize_13a(hypothesis.trim_end());
        let rf = tokenize_13a(reference.trim_end());
        let h: Vec<&str> = hyp.split_whitespace().collect();
        let r: Vec<&str> = rf.split_whitespace().collect();
        let mut stats = Self {
            sys_len: h.len(),
            ref_len: r.len(),
            ..Self::default()
        };
        for n in 1..=MAX_ORDER {
            let hc = ngram_counts(&h, n);
            let rc = ngram_counts(&r, n);
            stats.totals[n - 1] = h.len().saturating_sub(n - 1);
            stats.counts[n - 1] = hc
                .iter()
                .map(|(g, &c)| c.min(rc.get(g).copied().unwrap_or(0)))
                .sum();
        }
        stats
    }

    fn add(&mut self, other: &Self) {
        self.sys_len += other.sys_len;
        self.ref_len += other.ref_len;
        for n in 0..MAX_ORDER {
            self.counts[n] += other.counts[n];
            self.totals[n] += other.totals[n];
        }
    }
}

/// BLEU from aggregated statistics. A zero match count at order n is
/// replaced by `1 / (2^j · total_n)` where j counts the zero orders so far;
/// an order with no n-grams at all zeroes the score.
pub fn score_from_stats(stats: &SegmentStats) -> BleuScore {
    let mut precisions = [0.0; MAX_ORDER];
    let mut smooth = 1.0;
    for n in 0..MAX_ORDER {
        if stats.totals[n] == 0 {
            break;
        }
        precisions[n] = if stats.counts[n] == 0 {
            smooth *= 2.0;
            100.0 / (smooth * stats.totals[n] as f64)
        } else {
            100.0 * stats.counts[n] as f64 / stats.totals[n] as f64
        };
    }
    let brevity_penalty = if stats.sys_len >= stats.ref_len {
        1.0
    } else if stats.sys_len == 0 {
        0.0
    } else {
        (1.0 - stats.ref_len as f64 / stats.sys_len as f64).exp()
    };
    let score = if precisions.iter().any(|&p| p == 0.0) {
        0.0
    } else {
        let mean_log = precisions.iter().map(|p| p.ln()).sum::<f64>() / MAX_ORDER as f64;
        brevity_penalty * mean_log.exp()
    };
    BleuScore {
        score,
        precisions,
        brevity_penalty,
        sys_len: stats.sys_len,
        ref_len: stats.ref_len,
        counts: stats.counts,
        totals: stats.totals,
    }
}

/// Corpus-level BLEU of line-aligned hypotheses and references.
pub fn bleu<H: AsRef<str>, R: AsRef<str>>(hypotheses: &[H], references: &[R]) -> Result<BleuScore, EvalError> {
    if hypotheses.len() != references.len() {
        return Err(EvalError::LineCount {
            hypotheses: hypotheses.len(),
            references: references.len(),
        });
    }
    let mut total = SegmentStats::default();
    for (h, r) in hypotheses.iter().zip(references) {
        total.add(&SegmentStats::of(h.as_ref(), r.as_ref()));
    }
    Ok(score_from_stats(&total))
}
