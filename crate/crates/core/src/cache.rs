//! Binary cache files for [`KlStore`].
//!
//! Layout, little-endian: magic `COXKL`, format version (u32), degree (u32,
//! `u32::MAX` if unset), level (u32, `u32::MAX` if unset), flags (u8, bit 0 =
//! canonical keys), pair count, glossary count and μ count (u64 each), then
//! three length-prefixed sections (glossary, pairs, μ) and a trailing CRC-64.

use std::fs;
use std::path::Path;

use crc::{Crc, CRC_64_ECMA_182};
use rustc_hash::FxHashMap;

use crate::kl::KlStore;
use crate::perm::{PairKey, Permutation};
use crate::poly::Poly;

pub const MAGIC: &[u8; 5] = b"COXKL";
pub const FORMAT_VERSION: u32 = 1;
const CRC64: Crc<u64> = Crc::<u64>::new(&CRC_64_ECMA_182);
const UNSET: u32 = u32::MAX;

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a coxkl cache file")]
    BadMagic,
    #[error("cache format version {found} is not supported (expected {FORMAT_VERSION})")]
    VersionMismatch { found: u32 },
    #[error("checksum mismatch")]
    Checksum,
    #[error("cache file is truncated")]
    Truncated,
    #[error("malformed cache: {0}")]
    Malformed(String),
}

/// Header fields of a cache file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheInfo {
    pub version: u32,
    pub degree: Option<usize>,
    pub level: Option<usize>,
    pub canonical: bool,
    pub pairs: u64,
    pub glossary: u64,
    pub mu_entries: u64,
}

fn put_perm(out: &mut Vec<u8>, p: &Permutation) {
    out.extend_from_slice(p.as_slice());
}

fn put_key(out: &mut Vec<u8>, k: &PairKey) {
    out.push(k.degree() as u8);
    put_perm(out, &k.w);
    put_perm(out, &k.x);
}

fn put_section(out: &mut Vec<u8>, body: Vec<u8>) {
    out.extend_from_slice(&(body.len() as u64).to_le_bytes());
    out.extend_from_slice(&body);
}

fn opt(v: Option<usize>) -> u32 {
    v.map_or(UNSET, |x| x as u32)
}

/// Serializes the store. Glossary indices are renumbered by first use in
/// key order, so equal stores give identical bytes.
pub fn encode(store: &KlStore<u64>) -> Vec<u8> {
    let entries = store.entries();
    let mut index: FxHashMap<&Poly<u64>, u32> = FxHashMap::default();
    let mut glossary: Vec<&Poly<u64>> = Vec::new();
    let mut pairs = Vec::new();
    for (k, p) in &entries {
        let i = *index.entry(p).or_insert_with(|| {
            glossary.push(p);
            glossary.len() as u32 - 1
        });
        put_key(&mut pairs, k);
        pairs.extend_from_slice(&i.to_le_bytes());
    }
    let mut gl = Vec::new();
    for p in &glossary {
        gl.extend_from_slice(&(p.coeffs().len() as u32).to_le_bytes());
        for c in p.coeffs() {
            gl.extend_from_slice(&c.to_le_bytes());
        }
    }
    let mus = store.mu_entries();
    let mut mu = Vec::new();
    for (k, m) in &mus {
        put_key(&mut mu, k);
        mu.extend_from_slice(&m.to_le_bytes());
    }
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&opt(store.degree()).to_le_bytes());
    out.extend_from_slice(&opt(store.level()).to_le_bytes());
    out.push(store.is_canonical() as u8);
    for c in [entries.len(), glossary.len(), mus.len()] {
        out.extend_from_slice(&(c as u64).to_le_bytes());
    }
    put_section(&mut out, gl);
    put_section(&mut out, pairs);
    put_section(&mut out, mu);
    let crc = CRC64.checksum(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CacheError> {
        let end = self.pos.checked_add(n).ok_or(CacheError::Truncated)?;
        let s = self.buf.get(self.pos..end).ok_or(CacheError::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, CacheError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, CacheError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, CacheError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn perm(&mut self, n: usize) -> Result<Permutation, CacheError> {
        let s = self.take(n)?;
        let images: Vec<usize> = s.iter().map(|&v| v as usize + 1).collect();
        Permutation::from_one_line(&images).map_err(|e| CacheError::Malformed(e.to_string()))
    }

    fn key(&mut self) -> Result<PairKey, CacheError> {
        let n = self.u8()? as usize;
        let w = self.perm(n)?;
        let x = self.perm(n)?;
        Ok(PairKey { w, x })
    }

    fn section(&mut self) -> Result<Reader<'a>, CacheError> {
        let len = self.u64()? as usize;
        Ok(Reader { buf: self.take(len)?, pos: 0 })
    }

    fn done(&self) -> bool {
        self.pos == self.buf.len()
    }
}

fn read_header(r: &mut Reader<'_>) -> Result<CacheInfo, CacheError> {
    if r.take(MAGIC.len()).map_err(|_| CacheError::BadMagic)? != MAGIC {
        return Err(CacheError::BadMagic);
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(CacheError::VersionMismatch { found: version });
    }
    let unopt = |v: u32| (v != UNSET).then_some(v as usize);
    let degree = unopt(r.u32()?);
    let level = unopt(r.u32()?);
    let canonical = r.u8()? & 1 == 1;
    Ok(CacheInfo { version, degree, level, canonical, pairs: r.u64()?, glossary: r.u64()?, mu_entries: r.u64()? })
}

fn verified_body(bytes: &[u8]) -> Result<&[u8], CacheError> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(CacheError::BadMagic);
    }
    if bytes.len() < MAGIC.len() + 8 {
        return Err(CacheError::Truncated);
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().expect("8 bytes"));
    if CRC64.checksum(body) != stored {
        let mut r = Reader { buf: body, pos: 0 };
        // a damaged header is reported as such before the checksum
        read_header(&mut r)?;
        return Err(CacheError::Checksum);
    }
    Ok(body)
}

pub fn decode(bytes: &[u8]) -> Result<KlStore<u64>, CacheError> {
    let body = verified_body(bytes)?;
    let mut r = Reader { buf: body, pos: 0 };
    let info = read_header(&mut r)?;
    let mut gl = r.section()?;
    let mut glossary = Vec::with_capacity(info.glossary as usize);
    for _ in 0..info.glossary {
        let len = gl.u32()? as usize;
        let coeffs = (0..len).map(|_| gl.u64()).collect::<Result<Vec<_>, _>>()?;
        glossary.push(Poly::from_coeffs(coeffs));
    }
    let mut pairs = r.section()?;
    let mut store = if info.canonical { KlStore::new() } else { KlStore::without_canonicalization() };
    for _ in 0..info.pairs {
        let k = pairs.key()?;
        let i = pairs.u32()? as usize;
        let p = glossary.get(i).ok_or_else(|| CacheError::Malformed(format!("glossary index {i}")))?;
        store.insert(k, p.clone());
    }
    let mut mu = r.section()?;
    let mut mus = Vec::with_capacity(info.mu_entries as usize);
    for _ in 0..info.mu_entries {
        let k = mu.key()?;
        mus.push((k, mu.u64()?));
    }
    if !(gl.done() && pairs.done() && mu.done() && r.done()) {
        return Err(CacheError::Malformed("trailing bytes".into()));
    }
    if store.mu_entries() != mus {
        return Err(CacheError::Malformed("μ section disagrees with the table".into()));
    }
    store.set_levels(info.degree, info.level, info.canonical);
    Ok(store)
}

pub fn save_cache(store: &KlStore<u64>, path: &Path) -> Result<(), CacheError> {
    fs::write(path, encode(store))?;
    Ok(())
}

pub fn load_cache(path: &Path) -> Result<KlStore<u64>, CacheError> {
    decode(&fs::read(path)?)
}

/// Reads and checks the header and checksum without building the store.
pub fn cache_info(path: &Path) -> Result<CacheInfo, CacheError> {
    let bytes = fs::read(path)?;
    let body = verified_body(&bytes)?;
    read_header(&mut Reader { buf: body, pos: 0 })
}
