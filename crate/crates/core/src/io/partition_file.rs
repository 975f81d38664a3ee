use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::BlockId;

/// Writes one block ID per line, in vertex order.
pub fn write_partition(path: impl AsRef<Path>, assignment: &[BlockId]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for b in assignment {
        writeln!(out, "{b}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_partition(path: impl AsRef<Path>) -> Result<Vec<BlockId>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        out.push(line.parse().map_err(|e| Error::Parse { line: i + 1, message: format!("{e}") })?);
    }
    Ok(out)
}
