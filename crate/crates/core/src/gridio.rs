//! Plain-text grid files: optional `# key=value ...` header lines followed by
//! comma-separated rows of numbers.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub(crate) struct Grid {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
    pub meta: BTreeMap<String, String>,
}

pub(crate) fn write_grid<W: Write>(
    mut out: W,
    meta: &[(&str, String)],
    cols: usize,
    values: &[f64],
) -> Result<()> {
    if !meta.is_empty() {
        let line: Vec<String> = meta.iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(out, "# {}", line.join(" "))?;
    }
    for row in values.chunks(cols) {
        let line: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub(crate) fn read_grid<R: BufRead>(input: R, path: &Path) -> Result<Grid> {
    let parse_err = |line: usize, column: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message,
    };
    let mut meta = BTreeMap::new();
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            for kv in rest.split_whitespace() {
                if let Some((k, v)) = kv.split_once('=') {
                    meta.insert(k.to_string(), v.to_string());
                }
            }
            continue;
        }
        let mut count = 0;
        for (c, field) in trimmed.split(',').enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(lineno, c + 1, format!("not a number: {:?}", field.trim())))?;
            values.push(v);
            count += 1;
        }
        match cols {
            None => cols = Some(count),
            Some(c) if c != count => {
                return Err(parse_err(
                    lineno,
                    count.min(c) + 1,
                    format!("row has {count} columns, expected {c}"),
                ))
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| parse_err(1, 1, "no data rows".into()))?;
    Ok(Grid {
        rows,
        cols,
        values,
        meta,
    })
}

impl Grid {
    pub fn meta_f64(&self, key: &str, path: &Path) -> Result<Option<f64>> {
        match self.meta.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                column: 1,
                message: format!("header field {key}={v} is not a number"),
            }),
        }
    }
}
