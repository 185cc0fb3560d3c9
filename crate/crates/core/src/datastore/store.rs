use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use super::{DatastoreError, KnnParams};
use crate::base_model::{KeyVector, TranslationContext, TranslationModel};
use crate::binio::{FormatError, Reader, Writer};
use crate::corpus::ParallelCorpus;
use crate::vector_index::{
    default_clusters, training_sample, FlatIndex, IvfPqConfig, IvfPqIndex, KMeansParams,
    VectorIndex,
};

pub const DATASTORE_MAGIC: &str = "knnds-v1";

const MAX_LEN: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexKind {
    /// Exact search over full-precision keys.
    Flat,
    IvfPq {
        /// `None` picks [`default_clusters`] for the store size.
        clusters: Option<usize>,
        /// Bytes per code.
        sub_quantizers: usize,
        /// Debug: keep keys unquantized.
        identity: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexSettings {
    pub kind: IndexKind,
    pub kmeans_iters: usize,
    pub seed: u64,
    /// Keep (sentence, step) per entry for retrieval dumps.
    pub provenance: bool,
}

impl Default for IndexSettings {
    fn default() -> Self {
        Self {
            kind: IndexKind::IvfPq {
                clusters: None,
                sub_quantizers: 16,
                identity: false,
            },
            kmeans_iters: 20,
            seed: 0,
            provenance: true,
        }
    }
}

/// Datastore: quantized keys in a search index plus the target token of
/// each entry. Entry ids are positions in `values`.
#[derive(Debug, Clone, PartialEq)]
pub struct Datastore {
    index: VectorIndex<f32>,
    values: Vec<u32>,
    provenance: Option<Vec<(u32, u16)>>,
    seed: u64,
    default_k: u32,
    source_vocab_fingerprint: u64,
    target_vocab_fingerprint: u64,
    model_fingerprint: u64,
}

/// One retrieved neighbor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Retrieved {
    pub distance: f32,
    pub value: u32,
    pub id: u64,
    /// `(sentence index, target step)` when the store keeps provenance.
    pub provenance: Option<(u32, u16)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalSet {
    /// Ascending by distance.
    pub items: Vec<Retrieved>,
}

impl RetrievalSet {
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// `(distance, value)` pairs in `f64`.
    pub fn distances_and_values(&self) -> Vec<(f64, u32)> {
        self.items
            .iter()
            .map(|r| (r.distance as f64, r.value))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Serve a model whose fingerprint differs from the one the store was
    /// built with.
    pub allow_fingerprint_mismatch: bool,
}

struct Entries {
    keys: Vec<f32>,
    values: Vec<u32>,
    provenance: Vec<(u32, u16)>,
}

fn extract<M: TranslationModel + ?Sized>(model: &M, corpus: &ParallelCorpus) -> Result<Entries, DatastoreError> {
    let per_pair: Vec<Result<Entries, DatastoreError>> = corpus
        .pairs
        .par_iter()
        .enumerate()
        .map(|(si, pair)| {
            let n = pair.target.len().saturating_sub(1);
            let mut e = Entries {
                keys: Vec::with_capacity(n * model.key_dim()),
                values: Vec::with_capacity(n),
                provenance: Vec::with_capacity(n),
            };
            for i in 1..pair.target.len() {
                let key = model.key(TranslationContext::new(&pair.source, &pair.target[..i]))?;
                e.keys.extend_from_slice(key.as_slice());
                e.values.push(pair.target[i]);
                e.provenance.push((si as u32, (i - 1).min(u16::MAX as usize) as u16));
            }
            Ok(e)
        })
        .collect();
    let mut all = Entries {
        keys: Vec::new(),
        values: Vec::new(),
        provenance: Vec::new(),
    };
    for e in per_pair {
        let e = e?;
        all.keys.extend(e.keys);
        all.values.extend(e.values);
        all.provenance.extend(e.provenance);
    }
    Ok(all)
}

fn check(what: &'static str, expected: u64, found: u64) -> Result<(), DatastoreError> {
    if expected == found {
        Ok(())
    } else {
        Err(DatastoreError::FingerprintMismatch {
            what,
            expected,
            found,
        })
    }
}

fn make_index(dim: usize, keys: &[f32], settings: &IndexSettings) -> Result<VectorIndex<f32>, DatastoreError> {
    let n = keys.len() / dim;
    let ids: Vec<u64> = (0..n as u64).collect();
    let mut index = match settings.kind {
        IndexKind::Flat => VectorIndex::Flat(FlatIndex::new(dim)),
        IndexKind::IvfPq {
            clusters,
            sub_quantizers,
            identity,
        } => {
            let c = clusters.unwrap_or_else(|| default_clusters(n));
            let cfg = IvfPqConfig {
                clusters: c,
                sub_quantizers,
                kmeans: KMeansParams {
                    iters: settings.kmeans_iters,
                    seed: settings.seed,
                    ..KMeansParams::default()
                },
                residual: true,
                identity,
            };
            let mut idx = IvfPqIndex::new(dim, cfg)?;
            let sample_rows = training_sample(n, c, settings.seed);
            let sample: Vec<f32> = sample_rows
                .iter()
                .flat_map(|&i| keys[i * dim..(i + 1) * dim].iter().copied())
                .collect();
            idx.train(&sample)?;
            VectorIndex::IvfPq(idx)
        }
    };
    index.add(ids.into_iter().zip(keys.chunks_exact(dim)))?;
    Ok(index)
}

/// One entry per target position of every pair, EOS included:
/// key = model key of `(source, target[..i])`, value = `target[i]`.
pub fn build<M: TranslationModel + ?Sized>(
    model: &M,
    corpus: &ParallelCorpus,
    settings: &IndexSettings,
) -> Result<Datastore, DatastoreError> {
    check(
        "source vocabulary",
        model.source_vocab_fingerprint(),
        corpus.source_vocab.fingerprint(),
    )?;
    check(
        "target vocabulary",
        model.target_vocab_fingerprint(),
        corpus.target_vocab.fingerprint(),
    )?;
    let entries = extract(model, corpus)?;
    if entries.values.is_empty() {
        return Err(DatastoreError::Empty);
    }
    let index = make_index(model.key_dim(), &entries.keys, settings)?;
    Ok(Datastore {
        index,
        values: entries.values,
        provenance: settings.provenance.then_some(entries.provenance),
        seed: settings.seed,
        default_k: KnnParams::default().k as u32,
        source_vocab_fingerprint: model.source_vocab_fingerprint(),
        target_vocab_fingerprint: model.target_vocab_fingerprint(),
        model_fingerprint: model.fingerprint(),
    })
}

/// Retrieves the `k` nearest entries with their values and provenance.
pub fn retrieve(ds: &Datastore, query: &KeyVector, params: &KnnParams) -> Result<RetrievalSet, DatastoreError> {
    ds.retrieve(query, params)
}

/// Unions datastores built with the same model. Ids are re-assigned in list
/// order and the index is re-trained on a sample of the union. Quantized
/// stores contribute their reconstructed keys.
pub fn merge(stores: &[&Datastore], settings: &IndexSettings) -> Result<Datastore, DatastoreError> {
    let first = *stores
        .first()
        .ok_or_else(|| DatastoreError::Incompatible("nothing to merge".into()))?;
    if stores.len() == 1 {
        return Ok(first.clone());
    }
    for ds in &stores[1..] {
        check("model", first.model_fingerprint, ds.model_fingerprint)?;
        check(
            "target vocabulary",
            first.target_vocab_fingerprint,
            ds.target_vocab_fingerprint,
        )?;
        if ds.index_shape() != first.index_shape() {
            return Err(DatastoreError::Incompatible(format!(
                "index shapes differ: {:?} vs {:?}",
                first.index_shape(),
                ds.index_shape()
            )));
        }
    }
    let dim = first.dim();
    let mut keys = Vec::new();
    let mut values = Vec::new();
    let mut provenance = Vec::new();
    let keep_prov = stores.iter().all(|s| s.provenance.is_some());
    for ds in stores {
        let mut entries = ds.index.entries();
        entries.sort_by_key(|(id, _)| *id);
        for (id, key) in entries {
            keys.extend(key);
            values.push(ds.values[id as usize]);
            if keep_prov {
                provenance.push(ds.provenance.as_ref().expect("checked")[id as usize]);
            }
        }
    }
    let index = make_index(dim, &keys, settings)?;
    Ok(Datastore {
        index,
        values,
        provenance: keep_prov.then_some(provenance),
        seed: settings.seed,
        default_k: first.default_k,
        source_vocab_fingerprint: first.source_vocab_fingerprint,
        target_vocab_fingerprint: first.target_vocab_fingerprint,
        model_fingerprint: first.model_fingerprint,
    })
}

impl Datastore {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.index.dim()
    }

    pub fn index(&self) -> &VectorIndex<f32> {
        &self.index
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn provenance(&self) -> Option<&[(u32, u16)]> {
        self.provenance.as_deref()
    }

    pub fn model_fingerprint(&self) -> u64 {
        self.model_fingerprint
    }

    pub fn target_vocab_fingerprint(&self) -> u64 {
        self.target_vocab_fingerprint
    }

    pub fn source_vocab_fingerprint(&self) -> u64 {
        self.source_vocab_fingerprint
    }

    /// `(kind, sub-quantizers, clusters)`; 0s for a flat index.
    pub fn index_shape(&self) -> (&'static str, usize, usize) {
        match &self.index {
            VectorIndex::Flat(_) => ("flat", 0, 0),
            VectorIndex::IvfPq(i) => ("ivfpq", i.config().sub_quantizers, i.num_clusters()),
        }
    }

    pub fn posting_sizes(&self) -> Vec<usize> {
        match &self.index {
            VectorIndex::Flat(f) => vec![f.len()],
            VectorIndex::IvfPq(i) => i.posting_sizes(),
        }
    }

    /// Fails unless the store was built with `model`.
    pub fn check_model<M: TranslationModel + ?Sized>(&self, model: &M) -> Result<(), DatastoreError> {
        check("model", self.model_fingerprint, model.fingerprint())?;
        check(
            "target vocabulary",
            self.target_vocab_fingerprint,
            model.target_vocab_fingerprint(),
        )
    }

    pub fn retrieve(&self, query: &KeyVector, params: &KnnParams) -> Result<RetrievalSet, DatastoreError> {
        let result = self.index.search(query.as_slice(), params.k, params.nprobe)?;
        let items = result
            .neighbors
            .into_iter()
            .map(|n| Retrieved {
                distance: n.distance,
                value: self.values[n.id as usize],
                id: n.id,
                provenance: self.provenance.as_ref().map(|p| p[n.id as usize]),
            })
            .collect();
        Ok(RetrievalSet { items })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut Writer::new(&mut out)).expect("in-memory write");
        out
    }

    fn write_to<W: Write>(&self, w: &mut Writer<W>) -> std::io::Result<()> {
        let (_, s, c) = self.index_shape();
        w.header(DATASTORE_MAGIC)?;
        w.u32(self.dim() as u32)?;
        w.u32(s as u32)?;
        w.u32(c as u32)?;
        w.u32(self.default_k)?;
        w.u64(self.seed)?;
        w.u64(self.source_vocab_fingerprint)?;
        w.u64(self.target_vocab_fingerprint)?;
        w.u64(self.model_fingerprint)?;
        let index = self.index.to_bytes();
        w.u64(index.len() as u64)?;
        w.bytes(&index)?;
        w.u64(self.values.len() as u64)?;
        w.u32s(&self.values)?;
        match &self.provenance {
            None => w.u8(0)?,
            Some(p) => {
                w.u8(1)?;
                for &(s, t) in p {
                    w.u32(s)?;
                    w.u16(t)?;
                }
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), DatastoreError> {
        let f = fs::File::create(path).map_err(FormatError::from)?;
        let mut w = Writer::new(BufWriter::new(f));
        self.write_to(&mut w).map_err(FormatError::from)?;
        w.into_inner().flush().map_err(FormatError::from)?;
        Ok(())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DatastoreError> {
        let mut r = Reader::new(bytes);
        r.expect_header(DATASTORE_MAGIC)?;
        let dim = r.u32("config block")? as usize;
        let _s = r.u32("config block")?;
        let _c = r.u32("config block")?;
        let default_k = r.u32("config block")?;
        let seed = r.u64("config block")?;
        let sfp = r.u64("config block")?;
        let tfp = r.u64("config block")?;
        let mfp = r.u64("config block")?;
        let index_len = r.len("index", MAX_LEN)?;
        let index_bytes = r.bytes(index_len, "index")?;
        let index = VectorIndex::from_bytes(&index_bytes)?;
        if index.dim() != dim {
            return Err(FormatError::Invalid {
                section: "index",
                reason: format!("index dimension {} differs from header {dim}", index.dim()),
            }
            .into());
        }
        let n = r.len("values", MAX_LEN)?;
        if n != index.len() {
            return Err(FormatError::Invalid {
                section: "values",
                reason: format!("{n} values for {} index entries", index.len()),
            }
            .into());
        }
        let values = r.u32s(n, "values")?;
        let provenance = match r.u8("provenance")? {
            0 => None,
            1 => {
                let mut p = Vec::with_capacity(n);
                for _ in 0..n {
                    p.push((r.u32("provenance")?, r.u16("provenance")?));
                }
                Some(p)
            }
            other => {
                return Err(FormatError::Invalid {
                    section: "provenance",
                    reason: format!("unknown flag {other}"),
                }
                .into())
            }
        };
        r.expect_end()?;
        Ok(Self {
            index,
            values,
            provenance,
            seed,
            default_k,
            source_vocab_fingerprint: sfp,
            target_vocab_fingerprint: tfp,
            model_fingerprint: mfp,
        })
    }

    pub fn load(path: &Path) -> Result<Self, DatastoreError> {
        let bytes = fs::read(path).map_err(FormatError::from)?;
        Self::from_bytes(&bytes)
    }

    /// Loads and checks that the store was built with `model`, unless the
    /// override is set.
    pub fn load_for<M: TranslationModel + ?Sized>(
        path: &Path,
        model: &M,
        options: LoadOptions,
    ) -> Result<Self, DatastoreError> {
        let ds = Self::load(path)?;
        if !options.allow_fingerprint_mismatch {
            ds.check_model(model)?;
        }
        Ok(ds)
    }
}
