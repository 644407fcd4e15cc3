//! Small helpers over in-memory zip archives.

use std::collections::BTreeMap;
use std::io::{Cursor, Read, Write};

use thiserror::Error;
use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, ZipArchive, ZipWriter};

/// Upper bound for a single decompressed entry.
pub const MAX_ENTRY_BYTES: u64 = 8 * 1024 * 1024;
/// Upper bound for the sum of all decompressed entries.
pub const MAX_TOTAL_BYTES: u64 = 64 * 1024 * 1024;

#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error("not a zip archive: {0}")]
    Invalid(String),
    #[error("entry `{0}` exceeds the size limit")]
    TooLarge(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<zip::result::ZipError> for ArchiveError {
    fn from(e: zip::result::ZipError) -> Self {
        ArchiveError::Invalid(e.to_string())
    }
}

/// Reads every file entry into memory, keyed by its name in the archive.
pub fn read_entries(bytes: &[u8]) -> Result<BTreeMap<String, Vec<u8>>, ArchiveError> {
    let mut archive = ZipArchive::new(Cursor::new(bytes))?;
    let mut out = BTreeMap::new();
    let mut total = 0u64;
    for i in 0..archive.len() {
        let entry = archive.by_index(i)?;
        if entry.is_dir() {
            continue;
        }
        let name = entry.name()?.to_string();
        let mut buf = Vec::new();
        entry.take(MAX_ENTRY_BYTES + 1).read_to_end(&mut buf)?;
        if buf.len() as u64 > MAX_ENTRY_BYTES {
            return Err(ArchiveError::TooLarge(name));
        }
        total += buf.len() as u64;
        if total > MAX_TOTAL_BYTES {
            return Err(ArchiveError::TooLarge(name));
        }
        out.insert(name, buf);
    }
    Ok(out)
}

/// Writes `(name, contents)` pairs into a deflated zip, in the given order.
pub fn write_entries<'a, I>(entries: I) -> Result<Vec<u8>, ArchiveError>
where
    I: IntoIterator<Item = (&'a str, &'a [u8])>,
{
    write_with(entries, CompressionMethod::Deflated)
}

/// Like [`write_entries`] but without compression, so entry contents appear
/// verbatim in the archive bytes.
pub fn write_entries_stored<'a, I>(entries: I) -> Result<Vec<u8>, ArchiveError>
where
    I: IntoIterator<Item = (&'a str, &'a [u8])>,
{
    write_with(entries, CompressionMethod::Stored)
}

fn write_with<'a, I>(entries: I, method: CompressionMethod) -> Result<Vec<u8>, ArchiveError>
where
    I: IntoIterator<Item = (&'a str, &'a [u8])>,
{
    let mut writer = ZipWriter::new(Cursor::new(Vec::new()));
    let options = SimpleFileOptions::default().compression_method(method);
    for (name, contents) in entries {
        writer.start_file(name, options)?;
        writer.write_all(contents)?;
    }
    Ok(writer.finish()?.into_inner())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_survive_a_write_read_cycle() {
        let bytes = write_entries([("a.txt", &b"alpha"[..]), ("dir/b.txt", &b""[..])]).unwrap();
        let entries = read_entries(&bytes).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries["a.txt"], b"alpha");
        assert!(entries["dir/b.txt"].is_empty());
    }

    #[test]
    fn garbage_is_rejected() {
        assert!(matches!(read_entries(b"not a zip"), Err(ArchiveError::Invalid(_))));
        assert!(matches!(read_entries(b""), Err(ArchiveError::Invalid(_))));
    }
}
