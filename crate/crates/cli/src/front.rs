//! Front CSV files.
//!
//! ```text
//! # problem: P4a
//! # n: 2
//! # m: 2
//! # solver: omffm
//! # seed: 7
//! 4.2857142857142855e-1,0.0000000000000000e0,4.2857142857142855e-1,7.1598...e-1
//! ```
//!
//! Each row holds the `n` decision coordinates followed by the `m` objective
//! values, written with 17 significant digits. Files without an `n`/`m`
//! header are read as objective-only fronts.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use omffm::ArchiveEntry;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct FrontFile {
    pub problem: Option<String>,
    pub solver: Option<String>,
    pub seed: Option<u64>,
    pub n: usize,
    pub m: usize,
    pub entries: Vec<ArchiveEntry>,
}

impl FrontFile {
    pub fn objectives(&self) -> Vec<Vec<f64>> {
        self.entries.iter().map(|e| e.f.clone()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(p) = &self.problem {
            let _ = writeln!(out, "# problem: {p}");
        }
        let _ = writeln!(out, "# n: {}", self.n);
        let _ = writeln!(out, "# m: {}", self.m);
        if let Some(s) = &self.solver {
            let _ = writeln!(out, "# solver: {s}");
        }
        if let Some(s) = self.seed {
            let _ = writeln!(out, "# seed: {s}");
        }
        for e in &self.entries {
            let row: Vec<String> = e.x.iter().chain(&e.f).map(|v| format!("{v:.16e}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> CliResult<Self> {
        let mut problem = None;
        let mut solver = None;
        let mut seed = None;
        let mut n = None;
        let mut m = None;
        let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let Some((key, value)) = comment.split_once(':') else { continue };
                let value = value.trim();
                let count = |v: &str| {
                    v.parse::<usize>()
                        .map_err(|_| CliError::data(path, line_no, format!("bad header value `{v}`")))
                };
                match key.trim() {
                    "problem" => problem = Some(value.to_string()),
                    "solver" => solver = Some(value.to_string()),
                    "n" => n = Some(count(value)?),
                    "m" => m = Some(count(value)?),
                    "seed" => {
                        seed = Some(value.parse::<u64>().map_err(|_| {
                            CliError::data(path, line_no, format!("bad header value `{value}`"))
                        })?)
                    }
                    _ => {}
                }
                continue;
            }
            let mut values = Vec::new();
            for (col, cell) in line.split(',').enumerate() {
                let cell = cell.trim();
                let v: f64 = cell.parse().map_err(|_| {
                    CliError::data(path, line_no, format!("column {}: `{cell}` is not a number", col + 1))
                })?;
                values.push(v);
            }
            rows.push((line_no, values));
        }

        let width = rows.first().map(|(_, r)| r.len());
        let (n, m) = match (n, m, width) {
            (Some(n), Some(m), _) => (n, m),
            (None, Some(m), Some(w)) if w >= m => (w - m, m),
            (None, None, Some(w)) => (0, w),
            (Some(n), None, Some(w)) if w > n => (n, w - n),
            (None, None, None) => (0, 0),
            _ => return Err(CliError::data(path, 1, "header dimensions do not match the rows")),
        };
        let mut entries = Vec::with_capacity(rows.len());
        for (line_no, values) in rows {
            if values.len() != n + m {
                return Err(CliError::data(
                    path,
                    line_no,
                    format!("expected {} columns, found {}", n + m, values.len()),
                ));
            }
            let (x, f) = values.split_at(n);
            entries.push(ArchiveEntry::new(x.to_vec(), f.to_vec()));
        }
        Ok(Self { problem, solver, seed, n, m, entries })
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }
}

/// Writes `contents` to a temporary file next to `path`, then renames it.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FrontFile {
        FrontFile {
            problem: Some("P4a".into()),
            solver: Some("omffm".into()),
            seed: Some(7),
            n: 2,
            m: 2,
            entries: vec![
                ArchiveEntry::new(vec![0.1, 1.0 / 3.0], vec![std::f64::consts::PI, -2.5e-300]),
                ArchiveEntry::new(vec![0.0, 1.0], vec![f64::MIN_POSITIVE, 1e300]),
            ],
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let f = sample();
        let back = FrontFile::parse(&f.to_csv(), Path::new("mem")).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn headerless_rows_are_objectives() {
        let f = FrontFile::parse("0,1\n1,0\n", Path::new("mem")).unwrap();
        assert_eq!((f.n, f.m), (0, 2));
        assert_eq!(f.objectives(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn bad_cell_names_line() {
        let err = FrontFile::parse("# m: 2\n0,1\n1,abc\n", Path::new("f.csv")).unwrap_err();
        match err {
            CliError::Data { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(FrontFile::parse("0,1\n1\n", Path::new("f.csv")).unwrap_err().exit_code(), 4);
    }
}
