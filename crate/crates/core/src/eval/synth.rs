//! Seeded generator of toy parallel "languages".
//!
//! Source sentences read `DET [ADJ] AGENT VERB DET [ADJ] OBJECT [PREP DET
//! [ADJ] PLACE]`. The target side is verb-final with postpositions:
//! `AGENT [ADJ] SUBJ OBJECT [ADJ] OBJ [PLACE [ADJ] POSTP] VERB`, has no
//! articles, and inflects adjectives for the gender of their noun. Some
//! object nouns take a second translation under verbs of the second group.
//! Domains add nouns of their own and re-translate some general nouns.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    /// Nouns per class (agents, objects, places).
    pub nouns: usize,
    pub adjectives: usize,
    pub verbs: usize,
    pub determiners: usize,
    pub prepositions: usize,
    /// Object nouns (from the most frequent down) with a second sense.
    pub polysemous: usize,
    /// Zipf exponent of word frequencies within a class.
    pub zipf: f64,
    pub adjective_rate: f64,
    pub phrase_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            nouns: 40,
            adjectives: 16,
            verbs: 20,
            determiners: 3,
            prepositions: 6,
            polysemous: 10,
            zipf: 1.0,
            adjective_rate: 0.4,
            phrase_rate: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainConfig {
    pub name: String,
    /// Domain-only nouns per class.
    pub own_nouns: usize,
    /// General nouns per class that get a domain-specific translation.
    pub shifted: usize,
    /// Probability that a noun slot is filled with a domain-only noun.
    pub own_rate: f64,
}

impl DomainConfig {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            own_nouns: 30,
            shifted: 15,
            own_rate: 0.5,
        }
    }
}

const GENDERS: usize = 2;
const AGENT: usize = 0;
const OBJECT: usize = 1;
const PLACE: usize = 2;
const CLASSES: usize = 3;

#[derive(Debug, Clone)]
struct Noun {
    source: String,
    target: String,
    /// Translation under verbs of group 1.
    second_sense: Option<String>,
    gender: usize,
}

#[derive(Debug, Clone)]
struct NounClass {
    nouns: Vec<Noun>,
    weights: Vec<f64>,
}

impl NounClass {
    fn new(nouns: Vec<Noun>, zipf: f64) -> Self {
        Self {
            weights: zipf_weights(nouns.len(), zipf),
            nouns,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Domain {
    pub name: String,
    own: [NounClass; CLASSES],
    /// (class, general noun index, domain translation)
    shifted: Vec<(usize, usize, String)>,
    own_rate: f64,
}

impl Domain {
    /// Target words that only this domain uses.
    pub fn target_words(&self) -> Vec<&str> {
        self.own
            .iter()
            .flat_map(|c| c.nouns.iter().map(|n| n.target.as_str()))
            .chain(self.shifted.iter().map(|s| s.2.as_str()))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Language {
    config: SynthConfig,
    nouns: [NounClass; CLASSES],
    /// Source form and one target form per gender.
    adjectives: Vec<(String, [String; GENDERS])>,
    adjective_weights: Vec<f64>,
    /// (source, target, group)
    verbs: Vec<(String, String, usize)>,
    verb_weights: Vec<f64>,
    determiners: Vec<String>,
    /// (source preposition, target postposition)
    prepositions: Vec<(String, String)>,
    subject_marker: String,
    object_marker: String,
    domains: Vec<Domain>,
}

struct WordFactory {
    rng: ChaCha8Rng,
    used: HashSet<String>,
}

impl WordFactory {
    fn word(&mut self, consonants: &[u8], vowels: &[u8], syllables: usize) -> String {
        loop {
            let mut w = String::new();
            for _ in 0..syllables {
                w.push(consonants[self.rng.random_range(0..consonants.len())] as char);
                w.push(vowels[self.rng.random_range(0..vowels.len())] as char);
            }
            if self.used.insert(w.clone()) {
                return w;
            }
        }
    }

    fn source(&mut self, syllables: usize) -> String {
        self.word(b"ptkbdgfh", b"aeiou", syllables)
    }

    fn target(&mut self, syllables: usize) -> String {
        self.word(b"mnlrsvzw", b"aeiouy", syllables)
    }

    fn noun(&mut self) -> Noun {
        let gender = self.rng.random_range(0..GENDERS);
        Noun {
            source: self.source(3),
            target: self.target(3),
            second_sense: None,
            gender,
        }
    }

    fn nouns(&mut self, n: usize) -> Vec<Noun> {
        (0..n).map(|_| self.noun()).collect()
    }
}

fn zipf_weights(n: usize, s: f64) -> Vec<f64> {
    (0..n).map(|r| 1.0 / ((r + 1) as f64).powf(s)).collect()
}

fn pick(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return i;
        }
        x -= w;
    }
    weights.len() - 1
}

struct Phrase {
    source: Vec<String>,
    target: Vec<String>,
}

impl Language {
    pub fn generate(config: SynthConfig, domains: &[DomainConfig]) -> Self {
        let mut f = WordFactory {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            used: HashSet::new(),
        };
        let zipf = config.zipf;
        let agents = f.nouns(config.nouns);
        let mut objects = f.nouns(config.nouns);
        let places = f.nouns(config.nouns);
        for noun in objects.iter_mut().take(config.polysemous) {
            noun.second_sense = Some(f.target(3));
        }
        let adjectives = (0..config.adjectives)
            .map(|_| (f.source(2), [f.target(2), f.target(2)]))
            .collect();
        let verbs = (0..config.verbs)
            .map(|i| (f.source(2), f.target(2), i % 2))
            .collect();
        let determiners = (0..config.determiners).map(|_| f.source(1)).collect();
        let prepositions = (0..config.prepositions).map(|_| (f.source(1), f.target(1))).collect();
        let subject_marker = f.target(1);
        let object_marker = f.target(1);
        let domains = domains
            .iter()
            .map(|d| {
                let own = [
                    NounClass::new(f.nouns(d.own_nouns), zipf),
                    NounClass::new(f.nouns(d.own_nouns), zipf),
                    NounClass::new(f.nouns(d.own_nouns), zipf),
                ];
                let mut shifted = Vec::new();
                for class in 0..CLASSES {
                    let mut general: Vec<usize> = (0..config.nouns).collect();
                    general.shuffle(&mut f.rng);
                    for i in general.into_iter().take(d.shifted.min(config.nouns)) {
                        shifted.push((class, i, f.target(3)));
                    }
                }
                Domain {
                    name: d.name.clone(),
                    own,
                    shifted,
                    own_rate: d.own_rate,
                }
            })
            .collect();
        Self {
            nouns: [
                NounClass::new(agents, zipf),
                NounClass::new(objects, zipf),
                NounClass::new(places, zipf),
            ],
            adjective_weights: zipf_weights(config.adjectives, zipf),
            verb_weights: zipf_weights(config.verbs, zipf),
            config,
            adjectives,
            verbs,
            determiners,
            prepositions,
            subject_marker,
            object_marker,
            domains,
        }
    }

    pub fn config(&self) -> &SynthConfig {
        &self.config
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    fn noun_phrase(&self, rng: &mut ChaCha8Rng, class: usize, group: usize, domain: Option<&Domain>) -> Phrase {
        let (noun, target) = match domain {
            Some(d) if !d.own[class].nouns.is_empty() && rng.random::<f64>() < d.own_rate => {
                let n = &d.own[class].nouns[pick(rng, &d.own[class].weights)];
                (n, n.target.clone())
            }
            _ => {
                let i = pick(rng, &self.nouns[class].weights);
                let n = &self.nouns[class].nouns[i];
                let shifted = domain.and_then(|d| d.shifted.iter().find(|(c, j, _)| *c == class && *j == i));
                let target = match (shifted, &n.second_sense) {
                    (Some((_, _, t)), _) => t.clone(),
                    (None, Some(t)) if group == 1 => t.clone(),
                    _ => n.target.clone(),
                };
                (n, target)
            }
        };
        let det = &self.determiners[rng.random_range(0..self.determiners.len())];
        let mut source = vec![det.clone()];
        let mut tgt = vec![target];
        if rng.random::<f64>() < self.config.adjective_rate {
            let (a_s, a_t) = &self.adjectives[pick(rng, &self.adjective_weights)];
            source.push(a_s.clone());
            tgt.push(a_t[noun.gender].clone());
        }
        source.push(noun.source.clone());
        Phrase { source, target: tgt }
    }

    /// One sentence pair, in the general language or in a domain.
    pub fn sample(&self, rng: &mut ChaCha8Rng, domain: Option<usize>) -> (String, String) {
        let domain = domain.map(|d| &self.domains[d]);
        let (v_s, v_t, group) = &self.verbs[pick(rng, &self.verb_weights)];
        let subj = self.noun_phrase(rng, AGENT, *group, domain);
        let obj = self.noun_phrase(rng, OBJECT, *group, domain);
        let mut source = subj.source;
        source.push(v_s.clone());
        source.extend(obj.source);
        let mut target = subj.target;
        target.push(self.subject_marker.clone());
        target.extend(obj.target);
        target.push(self.object_marker.clone());
        if rng.random::<f64>() < self.config.phrase_rate {
            let (p_s, p_t) = &self.prepositions[rng.random_range(0..self.prepositions.len())];
            let pp = self.noun_phrase(rng, PLACE, *group, domain);
            source.push(p_s.clone());
            source.extend(pp.source);
            target.extend(pp.target);
            target.push(p_t.clone());
        }
        target.push(v_t.clone());
        (source.join(" "), target.join(" "))
    }

    /// `n` pairs drawn with their own seed.
    pub fn corpus(&self, n: usize, seed: u64, domain: Option<usize>) -> Vec<(String, String)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.sample(&mut rng, domain)).collect()
    }
}
