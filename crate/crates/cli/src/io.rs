use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::CliError;

fn read_source(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Io(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

/// Whitespace-separated floats, typically one per line.
pub fn read_values(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = read_source(path)?;
    let mut out = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| {
                CliError::Usage(format!(
                    "{}:{}: '{tok}' is not a number",
                    path.display(),
                    line_no + 1
                ))
            })?;
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage(format!(
            "{}: no values found",
            path.display()
        )));
    }
    Ok(out)
}

/// Headerless CSV rows of equal length.
pub fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let text = read_source(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|_| {
                    CliError::Usage(format!(
                        "{}: row {}: '{f}' is not a number",
                        path.display(),
                        i + 1
                    ))
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Usage(format!(
            "{}: no rows found",
            path.display()
        )));
    }
    Ok(rows)
}

/// Writes to `path`, or stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, body: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, body).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(body)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}
