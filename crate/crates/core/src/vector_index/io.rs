//! Binary index files. Little-endian, 32-bit floats.
//!
//! `ivfpq-v1`: D, S, C (u32), seed (u64), codebook size (u32), flags (u8:
//! residual, identity, trained), centroids (C×D), codebooks (S×ksub×D/S),
//! then per cluster: count (u64) and `(id: u64, code: S bytes)` records
//! sorted by id. Identity-mode records carry D floats instead of a code.
//!
//! `flat-v1`: D (u32), count (u64), then `(id: u64, key: D floats)`.

use std::io::{Read, Write};

use super::flat::FlatIndex;
use super::ivfpq::{Encoding, IvfPqConfig, IvfPqIndex, Posting};
use super::kmeans::KMeansParams;
use super::pq::ProductQuantizer;
use super::IndexError;
use crate::binio::{FormatError, Reader, Writer};

pub const IVFPQ_MAGIC: &str = "ivfpq-v1";
pub const FLAT_MAGIC: &str = "flat-v1";

const FLAG_RESIDUAL: u8 = 1;
const FLAG_IDENTITY: u8 = 2;
const FLAG_TRAINED: u8 = 4;
const MAX_LEN: u64 = 1 << 40;

impl IvfPqIndex<f32> {
    pub fn write_to<W: Write>(&self, w: &mut Writer<W>) -> std::io::Result<()> {
        let cfg = &self.config;
        w.header(IVFPQ_MAGIC)?;
        w.u32(self.dim() as u32)?;
        w.u32(cfg.sub_quantizers as u32)?;
        w.u32(cfg.clusters as u32)?;
        w.u64(cfg.kmeans.seed)?;
        let ksub = match &self.encoding {
            Some(Encoding::Pq(pq)) => pq.ksub(),
            _ => 0,
        };
        w.u32(ksub as u32)?;
        let mut flags = 0;
        if cfg.residual {
            flags |= FLAG_RESIDUAL;
        }
        if cfg.identity {
            flags |= FLAG_IDENTITY;
        }
        if self.encoding.is_some() {
            flags |= FLAG_TRAINED;
        }
        w.u8(flags)?;
        let Some(encoding) = &self.encoding else {
            return Ok(());
        };
        w.f32s(&self.centroids)?;
        if let Encoding::Pq(pq) = encoding {
            w.f32s(pq.codebooks())?;
        }
        for p in &self.postings {
            w.u64(p.ids.len() as u64)?;
            match encoding {
                Encoding::Pq(pq) => {
                    for (id, code) in p.ids.iter().zip(p.codes.chunks_exact(pq.n_sub())) {
                        w.u64(*id)?;
                        w.bytes(code)?;
                    }
                }
                Encoding::Identity => {
                    for (id, v) in p.ids.iter().zip(p.vectors.chunks_exact(self.dim())) {
                        w.u64(*id)?;
                        w.f32s(v)?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut Reader<R>) -> Result<Self, IndexError> {
        r.expect_header(IVFPQ_MAGIC)?;
        let dim = r.u32("index config")? as usize;
        let n_sub = r.u32("index config")? as usize;
        let clusters = r.u32("index config")? as usize;
        let seed = r.u64("index config")?;
        let ksub = r.u32("index config")? as usize;
        let flags = r.u8("index config")?;
        let config = IvfPqConfig {
            clusters,
            sub_quantizers: n_sub,
            kmeans: KMeansParams {
                seed,
                ..KMeansParams::default()
            },
            residual: flags & FLAG_RESIDUAL != 0,
            identity: flags & FLAG_IDENTITY != 0,
        };
        if flags & FLAG_TRAINED == 0 {
            return IvfPqIndex::new(dim, config);
        }
        let centroids = r.f32s(clusters * dim, "centroids")?;
        let encoding = if config.identity {
            Encoding::Identity
        } else {
            let books = r.f32s(ksub * dim, "codebooks")?;
            Encoding::Pq(ProductQuantizer::from_parts(dim, n_sub, ksub, books)?)
        };
        let mut postings = Vec::with_capacity(clusters);
        for _ in 0..clusters {
            let n = r.len("postings", MAX_LEN)?;
            let mut p = Posting::default();
            for _ in 0..n {
                p.ids.push(r.u64("postings")?);
                match &encoding {
                    Encoding::Pq(_) => {
                        let code = r.bytes(n_sub, "postings")?;
                        if code.iter().any(|&c| c as usize >= ksub) {
                            return Err(FormatError::Invalid {
                                section: "postings",
                                reason: "code byte outside codebook".into(),
                            }
                            .into());
                        }
                        p.codes.extend(code);
                    }
                    Encoding::Identity => p.vectors.extend(r.f32s(dim, "postings")?),
                }
            }
            postings.push(p);
        }
        IvfPqIndex::from_parts(dim, config, centroids, Some(encoding), postings)
    }
}

impl FlatIndex<f32> {
    pub fn write_to<W: Write>(&self, w: &mut Writer<W>) -> std::io::Result<()> {
        w.header(FLAT_MAGIC)?;
        w.u32(self.dim() as u32)?;
        w.u64(self.len() as u64)?;
        for (i, id) in self.ids().iter().enumerate() {
            w.u64(*id)?;
            w.f32s(self.key(i))?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut Reader<R>) -> Result<Self, IndexError> {
        r.expect_header(FLAT_MAGIC)?;
        let dim = r.u32("index config")? as usize;
        let n = r.len("keys", MAX_LEN)?;
        let mut ids = Vec::with_capacity(n);
        let mut keys = Vec::with_capacity(n * dim);
        for _ in 0..n {
            ids.push(r.u64("keys")?);
            keys.extend(r.f32s(dim, "keys")?);
        }
        let mut idx = FlatIndex::new(dim);
        idx.add(ids.into_iter().zip(keys.chunks_exact(dim.max(1))))?;
        Ok(idx)
    }
}
