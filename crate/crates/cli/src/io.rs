use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use editdec::constraint::{parse_constraints, ConstraintSet};
use editdec::tokens::{tokenize, TokenSeq};

use crate::error::{data, CliResult, Context};

pub fn read_lines(path: &Path) -> CliResult<Vec<String>> {
    let text = std::fs::read_to_string(path).data_ctx(format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::to_string).collect())
}

pub fn read_sentences(path: &Path) -> CliResult<Vec<TokenSeq>> {
    Ok(read_lines(path)?.iter().map(|l| tokenize(l)).collect())
}

/// Fails with the first line number present in one file but not the other.
pub fn check_aligned(what: &str, path: &Path, found: usize, expected: usize) -> CliResult<()> {
    if found == expected {
        return Ok(());
    }
    Err(data(format!(
        "{what} {} is not line-aligned: line {} has no counterpart ({found} lines, expected {expected})",
        path.display(),
        found.min(expected) + 1
    )))
}

/// One constraint object per line; blank lines are empty sets.
pub fn read_constraints(path: &Path) -> CliResult<Vec<ConstraintSet>> {
    read_lines(path)?
        .iter()
        .enumerate()
        .map(|(i, line)| {
            if line.trim().is_empty() {
                return Ok(ConstraintSet::empty());
            }
            parse_constraints(line).data_ctx(format!("{} line {}", path.display(), i + 1))
        })
        .collect()
}

/// `refs[i]` holds line `i` of every reference file, in file order.
pub fn read_references(
    paths: &[impl AsRef<Path>],
    expected: usize,
) -> CliResult<Vec<Vec<TokenSeq>>> {
    let mut refs = vec![Vec::with_capacity(paths.len()); expected];
    for p in paths {
        let sents = read_sentences(p.as_ref())?;
        check_aligned("reference file", p.as_ref(), sents.len(), expected)?;
        for (slot, s) in refs.iter_mut().zip(sents) {
            slot.push(s);
        }
    }
    Ok(refs)
}

/// Buffered writer to a file, or stdout when `path` is `None`.
pub fn writer(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).data_ctx(format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).data_ctx(format!("writing {}", path.display()))
}
