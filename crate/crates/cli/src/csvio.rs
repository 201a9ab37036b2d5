//! CSV reading/writing for observation streams and result rows.
//!
//! Floats are written with Rust's shortest-roundtrip formatting, so
//! every value re-parses exactly and repeated runs are byte-identical.

use std::io::{BufRead, Write};

use wdcusum::model::ObservationVector;

use crate::CliError;

/// Header for a labeled stream dump with `L` sensors.
pub fn stream_header(num_sensors: usize) -> String {
    let mut cols = vec!["k".to_string()];
    cols.extend((1..=num_sensors).map(|i| format!("x_{i}")));
    cols.push("phase".into());
    cols.push("affected_set".into());
    cols.join(",")
}

/// One labeled stream row: `k,x_1,...,x_L,phase,affected_set` with the
/// affected set `;`-separated (empty before the change).
pub fn stream_row(obs: &ObservationVector) -> String {
    let mut cols = vec![obs.k.to_string()];
    cols.extend(obs.values.iter().map(|v| v.to_string()));
    cols.push(obs.phase.to_string());
    cols.push(
        obs.affected
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(";"),
    );
    cols.join(",")
}

/// Read a stream CSV, keeping only the `x_*` columns (labels, if present,
/// are ignored). Returns the per-step observation values.
pub fn read_stream<R: BufRead>(reader: R) -> Result<Vec<Vec<f64>>, CliError> {
    let mut lines = reader.lines();
    let header = loop {
        match lines.next() {
            None => return Err(CliError::io("empty stream input")),
            Some(line) => {
                let line = line.map_err(|e| CliError::io(format!("read stream: {e}")))?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
        }
    };
    let x_cols: Vec<usize> = header
        .split(',')
        .enumerate()
        .filter(|(_, name)| name.trim().starts_with("x_"))
        .map(|(idx, _)| idx)
        .collect();
    if x_cols.is_empty() {
        return Err(CliError::io("stream header has no x_* columns"));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(|e| CliError::io(format!("read stream: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let mut values = Vec::with_capacity(x_cols.len());
        for &idx in &x_cols {
            let tok = cols.get(idx).ok_or_else(|| {
                CliError::io(format!("stream line {}: missing column {idx}", lineno + 2))
            })?;
            values.push(tok.trim().parse::<f64>().map_err(|_| {
                CliError::io(format!(
                    "stream line {}: `{tok}` is not a number",
                    lineno + 2
                ))
            })?);
        }
        rows.push(values);
    }
    Ok(rows)
}

/// Sink that writes either to a file or stdout.
pub enum OutputSink {
    Stdout(std::io::Stdout),
    File(std::io::BufWriter<std::fs::File>, std::path::PathBuf),
}

impl OutputSink {
    pub fn create(path: Option<&std::path::Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(OutputSink::Stdout(std::io::stdout())),
            Some(p) => {
                let file = std::fs::File::create(p)
                    .map_err(|e| CliError::io(format!("create {}: {e}", p.display())))?;
                Ok(OutputSink::File(
                    std::io::BufWriter::new(file),
                    p.to_path_buf(),
                ))
            }
        }
    }

    pub fn path(&self) -> Option<&std::path::Path> {
        match self {
            OutputSink::Stdout(_) => None,
            OutputSink::File(_, p) => Some(p),
        }
    }

    pub fn write_line(&mut self, line: &str) -> Result<(), CliError> {
        let res = match self {
            OutputSink::Stdout(out) => writeln!(out, "{line}"),
            OutputSink::File(out, _) => writeln!(out, "{line}"),
        };
        res.map_err(|e| CliError::io(format!("write output: {e}")))
    }

    pub fn finish(self) -> Result<(), CliError> {
        if let OutputSink::File(mut out, p) = self {
            out.flush()
                .map_err(|e| CliError::io(format!("flush {}: {e}", p.display())))?;
        }
        Ok(())
    }
}
