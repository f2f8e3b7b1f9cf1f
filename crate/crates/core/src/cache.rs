//! Binary caches for the factorization table and the Möbius series.
//!
//! Both files share one envelope: 4 magic bytes, a u32 LE format version,
//! a u64 LE limit, then the payload. The table payload is `limit + 1`
//! spf values as u64 LE (index 0 stored as 0); the series payload is
//! μ(1..=limit) as signed bytes.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::CacheError;
use crate::recursion::MoebiusSeries;
use crate::sieve::FactorizationTable;
use crate::{Error, Result};

pub const TABLE_MAGIC: [u8; 4] = *b"MUTB";
pub const SERIES_MAGIC: [u8; 4] = *b"MUSR";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

pub const TABLE_FILE: &str = "sieve.mutb";
pub const SERIES_FILE: &str = "series.musr";

fn header(magic: [u8; 4], limit: u64) -> [u8; HEADER_LEN] {
    let mut h = [0u8; HEADER_LEN];
    h[..4].copy_from_slice(&magic);
    h[4..8].copy_from_slice(&FORMAT_VERSION.to_le_bytes());
    h[8..].copy_from_slice(&limit.to_le_bytes());
    h
}

/// Checks the envelope and returns (limit, payload).
fn open_envelope(magic: [u8; 4], bytes: &[u8]) -> Result<(u64, &[u8]), CacheError> {
    if bytes.len() < 4 {
        return Err(CacheError::Truncated(format!(
            "{} bytes, header needs {HEADER_LEN}",
            bytes.len()
        )));
    }
    let found: [u8; 4] = bytes[..4].try_into().unwrap();
    if found != magic {
        return Err(CacheError::BadMagic {
            expected: magic,
            found,
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(CacheError::Truncated(format!(
            "{} bytes, header needs {HEADER_LEN}",
            bytes.len()
        )));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(CacheError::UnsupportedVersion {
            expected: FORMAT_VERSION,
            found: version,
        });
    }
    let limit = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    Ok((limit, &bytes[HEADER_LEN..]))
}

fn expect_len(payload: &[u8], want: u64) -> Result<(), CacheError> {
    let have = payload.len() as u64;
    if have < want {
        return Err(CacheError::Truncated(format!(
            "payload has {have} bytes, limit implies {want}"
        )));
    }
    if have > want {
        return Err(CacheError::Corrupt(format!(
            "{} trailing bytes after payload",
            have - want
        )));
    }
    Ok(())
}

pub fn encode_table(table: &FactorizationTable) -> Vec<u8> {
    let spf = table.spf();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * spf.len());
    out.extend_from_slice(&header(TABLE_MAGIC, table.limit()));
    out.extend_from_slice(&0u64.to_le_bytes());
    for &v in &spf[1..] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    out
}

pub fn decode_table(bytes: &[u8]) -> Result<FactorizationTable> {
    let (limit, payload) = open_envelope(TABLE_MAGIC, bytes)?;
    if limit == 0 || limit > u32::MAX as u64 {
        return Err(CacheError::Corrupt(format!("table limit {limit} out of range")).into());
    }
    expect_len(payload, (limit + 1) * 8)?;
    let mut spf = Vec::with_capacity(limit as usize + 1);
    for chunk in payload.chunks_exact(8) {
        let v = u64::from_le_bytes(chunk.try_into().unwrap());
        let v = u32::try_from(v)
            .map_err(|_| CacheError::Corrupt(format!("spf value {v} exceeds u32")))?;
        spf.push(v);
    }
    if spf[0] != 0 {
        return Err(CacheError::Corrupt(format!("spf[0] = {}, expected 0", spf[0])).into());
    }
    FactorizationTable::from_spf(spf).map_err(|e| match e {
        Error::Consistency(msg) => CacheError::Corrupt(msg).into(),
        other => other,
    })
}

pub fn encode_series(series: &MoebiusSeries) -> Vec<u8> {
    let mu = &series.mu_slice()[..series.limit() as usize];
    let mut out = Vec::with_capacity(HEADER_LEN + mu.len());
    out.extend_from_slice(&header(SERIES_MAGIC, series.limit()));
    out.extend(mu.iter().map(|&v| v as u8));
    out
}

pub fn decode_series(bytes: &[u8]) -> Result<MoebiusSeries> {
    let (limit, payload) = open_envelope(SERIES_MAGIC, bytes)?;
    if limit == 0 || limit > u32::MAX as u64 {
        return Err(CacheError::Corrupt(format!("series limit {limit} out of range")).into());
    }
    expect_len(payload, limit)?;
    let values: Vec<i8> = payload.iter().map(|&b| b as i8).collect();
    MoebiusSeries::from_mu_values(&values).map_err(|e| match e {
        Error::Consistency(msg) => CacheError::Corrupt(msg).into(),
        other => other,
    })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(CacheError::Io)?;
    }
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(CacheError::Io)?;
    f.write_all(bytes).map_err(CacheError::Io)?;
    f.sync_all().map_err(CacheError::Io)?;
    fs::rename(&tmp, path).map_err(CacheError::Io)?;
    Ok(())
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(CacheError::Io)?;
    Ok(buf)
}

pub fn write_table(path: &Path, table: &FactorizationTable) -> Result<()> {
    write_atomic(path, &encode_table(table))
}

pub fn read_table(path: &Path) -> Result<FactorizationTable> {
    decode_table(&read_all(path)?)
}

pub fn write_series(path: &Path, series: &MoebiusSeries) -> Result<()> {
    write_atomic(path, &encode_series(series))
}

pub fn read_series(path: &Path) -> Result<MoebiusSeries> {
    decode_series(&read_all(path)?)
}
