//! Little-endian readers and writers for the versioned binary artifacts.
//!
//! Every read names the section it was decoding so a truncated file reports
//! where it ended.

use std::io::{self, Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad header: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("truncated file while reading {section}")]
    Truncated { section: &'static str },
    #[error("invalid {section}: {reason}")]
    Invalid { section: &'static str, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn map_eof(section: &'static str) -> impl FnOnce(io::Error) -> FormatError {
    move |e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            FormatError::Truncated { section }
        } else {
            FormatError::Io(e)
        }
    }
}

pub struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    pub fn new(inner: R) -> Self {
        Self { inner }
    }

    pub fn into_inner(self) -> R {
        self.inner
    }

    /// Reads a fixed-width magic string and compares it.
    pub fn expect_header(&mut self, magic: &str) -> Result<(), FormatError> {
        let mut buf = vec![0u8; magic.len()];
        self.inner.read_exact(&mut buf).map_err(map_eof("header"))?;
        if buf != magic.as_bytes() {
            return Err(FormatError::Header {
                expected: magic.to_string(),
                found: String::from_utf8_lossy(&buf).into_owned(),
            });
        }
        Ok(())
    }

    pub fn u8(&mut self, section: &'static str) -> Result<u8, FormatError> {
        self.inner.read_u8().map_err(map_eof(section))
    }

    pub fn u16(&mut self, section: &'static str) -> Result<u16, FormatError> {
        self.inner.read_u16::<LittleEndian>().map_err(map_eof(section))
    }

    pub fn u32(&mut self, section: &'static str) -> Result<u32, FormatError> {
        self.inner.read_u32::<LittleEndian>().map_err(map_eof(section))
    }

    pub fn u64(&mut self, section: &'static str) -> Result<u64, FormatError> {
        self.inner.read_u64::<LittleEndian>().map_err(map_eof(section))
    }

    pub fn f32(&mut self, section: &'static str) -> Result<f32, FormatError> {
        self.inner.read_f32::<LittleEndian>().map_err(map_eof(section))
    }

    pub fn f64(&mut self, section: &'static str) -> Result<f64, FormatError> {
        self.inner.read_f64::<LittleEndian>().map_err(map_eof(section))
    }

    pub fn f32s(&mut self, n: usize, section: &'static str) -> Result<Vec<f32>, FormatError> {
        let mut out = vec![0f32; n];
        self.inner
            .read_f32_into::<LittleEndian>(&mut out)
            .map_err(map_eof(section))?;
        Ok(out)
    }

    pub fn u32s(&mut self, n: usize, section: &'static str) -> Result<Vec<u32>, FormatError> {
        let mut out = vec![0u32; n];
        self.inner
            .read_u32_into::<LittleEndian>(&mut out)
            .map_err(map_eof(section))?;
        Ok(out)
    }

    pub fn bytes(&mut self, n: usize, section: &'static str) -> Result<Vec<u8>, FormatError> {
        let mut out = vec![0u8; n];
        self.inner.read_exact(&mut out).map_err(map_eof(section))?;
        Ok(out)
    }

    /// Length must fit in memory; guards against absurd sizes in corrupt files.
    pub fn len(&mut self, section: &'static str, limit: u64) -> Result<usize, FormatError> {
        let n = self.u64(section)?;
        if n > limit {
            return Err(FormatError::Invalid {
                section,
                reason: format!("length {n} exceeds limit {limit}"),
            });
        }
        Ok(n as usize)
    }

    /// Fails unless the stream is exhausted.
    pub fn expect_end(&mut self) -> Result<(), FormatError> {
        let mut probe = [0u8; 1];
        match self.inner.read(&mut probe)? {
            0 => Ok(()),
            _ => Err(FormatError::Invalid {
                section: "trailer",
                reason: "unexpected trailing bytes".into(),
            }),
        }
    }
}

pub struct Writer<W> {
    inner: W,
}

impl<W: Write> Writer<W> {
    pub fn new(inner: W) -> Self {
        Self { inner }
    }

    pub fn into_inner(self) -> W {
        self.inner
    }

    pub fn header(&mut self, magic: &str) -> io::Result<()> {
        self.inner.write_all(magic.as_bytes())
    }

    pub fn u8(&mut self, v: u8) -> io::Result<()> {
        self.inner.write_u8(v)
    }

    pub fn u16(&mut self, v: u16) -> io::Result<()> {
        self.inner.write_u16::<LittleEndian>(v)
    }

    pub fn u32(&mut self, v: u32) -> io::Result<()> {
        self.inner.write_u32::<LittleEndian>(v)
    }

    pub fn u64(&mut self, v: u64) -> io::Result<()> {
        self.inner.write_u64::<LittleEndian>(v)
    }

    pub fn f32(&mut self, v: f32) -> io::Result<()> {
        self.inner.write_f32::<LittleEndian>(v)
    }

    pub fn f64(&mut self, v: f64) -> io::Result<()> {
        self.inner.write_f64::<LittleEndian>(v)
    }

    pub fn f32s(&mut self, vs: &[f32]) -> io::Result<()> {
        vs.iter().try_for_each(|&v| self.f32(v))
    }

    pub fn u32s(&mut self, vs: &[u32]) -> io::Result<()> {
        vs.iter().try_for_each(|&v| self.u32(v))
    }

    pub fn bytes(&mut self, b: &[u8]) -> io::Result<()> {
        self.inner.write_all(b)
    }
}

/// 64-bit fingerprint: the first eight bytes of a SHA-256 digest.
pub fn fingerprint(parts: &[&[u8]]) -> u64 {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}
