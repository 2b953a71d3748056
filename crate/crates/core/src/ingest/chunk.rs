// SPDX-License-Identifier: Apache-2.0

//! Entry-per-line repair and whole-entry chunk splitting. Both stream line
//! by line, so memory stays bounded by the longest line.

use std::fs::{self, File};
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::scan::{EntryScanner, TagEvent};

/// Default number of lines per chunk file.
pub const DEFAULT_CHUNK_LINES: usize = 1_000_000;

/// Copies `input` to `output`, inserting a newline before every top-level
/// entry that does not already start its own line. Nothing else changes, so
/// applying it twice gives the same bytes as applying it once.
pub fn repair_xml<R: BufRead, W: Write>(mut input: R, mut output: W) -> io::Result<u64> {
    let mut scanner = EntryScanner::new();
    let mut line = Vec::new();
    let mut events = Vec::new();
    let mut inserted = 0;
    loop {
        line.clear();
        if input.read_until(b'\n', &mut line)? == 0 {
            break;
        }
        events.clear();
        scanner.scan_line(&line, &mut events);
        let mut segment = 0;
        for ev in &events {
            let TagEvent::Start(at) = *ev else { continue };
            if line[segment..at].iter().any(|b| !b.is_ascii_whitespace()) {
                output.write_all(&line[segment..at])?;
                output.write_all(b"\n")?;
                inserted += 1;
                segment = at;
            }
        }
        output.write_all(&line[segment..])?;
    }
    output.flush()?;
    Ok(inserted)
}

/// Streams `input` line by line and assigns each line to a chunk.
///
/// A new chunk starts once the current one holds `chunk_lines` lines and no
/// entry is open; a chunk only runs past the limit to finish the entry that
/// straddles it. `sink` receives `(chunk_index, line)` in input order, so
/// concatenating the lines of all chunks reproduces the input. Returns the
/// number of chunks.
pub fn split_chunks<R, F>(mut input: R, chunk_lines: usize, mut sink: F) -> io::Result<usize>
where
    R: BufRead,
    F: FnMut(usize, &[u8]) -> io::Result<()>,
{
    if chunk_lines == 0 {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "chunk_lines must be positive",
        ));
    }
    let mut scanner = EntryScanner::new();
    let mut line = Vec::new();
    let mut events = Vec::new();
    let mut chunk = 0;
    let mut lines_in_chunk = 0;
    let mut any = false;
    loop {
        line.clear();
        if input.read_until(b'\n', &mut line)? == 0 {
            break;
        }
        if lines_in_chunk >= chunk_lines && !scanner.inside() {
            chunk += 1;
            lines_in_chunk = 0;
        }
        events.clear();
        scanner.scan_line(&line, &mut events);
        sink(chunk, &line)?;
        lines_in_chunk += 1;
        any = true;
    }
    Ok(if any { chunk + 1 } else { 0 })
}

/// Writes chunks as `chunk-00000.xml`, `chunk-00001.xml`, ... in `dir`.
pub fn split_chunks_to_dir<R: BufRead>(
    input: R,
    dir: &Path,
    chunk_lines: usize,
) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths: Vec<PathBuf> = Vec::new();
    let mut current: Option<BufWriter<File>> = None;
    split_chunks(input, chunk_lines, |idx, line| {
        if idx == paths.len() {
            if let Some(mut w) = current.take() {
                w.flush()?;
            }
            let path = dir.join(format!("chunk-{idx:05}.xml"));
            current = Some(BufWriter::new(File::create(&path)?));
            paths.push(path);
        }
        current.as_mut().expect("chunk open").write_all(line)
    })?;
    if let Some(mut w) = current {
        w.flush()?;
    }
    Ok(paths)
}
