use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::CliError;

/// Read a single numeric column from a CSV file, or stdin when `path` is
/// `-`. A non-numeric first row is taken as a header.
pub fn read_column(path: &str) -> Result<Vec<f64>, CliError> {
    let mut text = String::new();
    let res = if path == "-" {
        io::stdin().read_to_string(&mut text)
    } else {
        File::open(path).and_then(|mut f| f.read_to_string(&mut text))
    };
    res.map_err(|e| CliError::Input(format!("{path}: {e}")))?;
    parse_column(&text, path)
}

pub fn parse_column(text: &str, source: &str) -> Result<Vec<f64>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Input(format!("{source}: {e}")))?;
        let row = rec.position().map_or(i + 1, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != 1 {
            return Err(CliError::Input(format!(
                "{source}: row {row}: expected one column, found {}",
                rec.len()
            )));
        }
        let field = &rec[0];
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(_) => return Err(CliError::Input(format!("{source}: row {row}: non-finite value `{field}`"))),
            Err(_) if i == 0 => {}
            Err(_) => return Err(CliError::Input(format!("{source}: row {row}: not a number: `{field}`"))),
        }
    }
    if values.is_empty() {
        return Err(CliError::Input(format!("{source}: no observations")));
    }
    Ok(values)
}

/// Write `bytes` to `path` through a temporary file in the same directory,
/// or to stdout when `path` is `-`.
pub fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if path.as_os_str() == "-" {
        let mut out = io::stdout().lock();
        return out
            .write_all(bytes)
            .and_then(|_| out.flush())
            .map_err(|e| CliError::Output(format!("stdout: {e}")));
    }
    let fail = |e: io::Error| CliError::Output(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}
