//! CSV artifacts with a `#`-prefixed provenance header.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use levyx_core::pricer::QuadSettings;

use crate::CliError;

pub struct Provenance {
    pub task: &'static str,
    pub model_json: String,
    pub scheme: String,
    pub order: usize,
    pub quadrature: QuadSettings,
    pub seed: Option<u64>,
    pub timestamp: bool,
}

impl Provenance {
    fn lines(&self) -> Vec<String> {
        let hash = Sha256::digest(self.model_json.as_bytes());
        let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
        let q = &self.quadrature;
        let mut lines = vec![
            format!("# levyx {} task={}", env!("CARGO_PKG_VERSION"), self.task),
            format!("# model_sha256={hex}"),
            format!("# model={}", self.model_json),
            format!("# scheme={} N={}", self.scheme, self.order),
            format!(
                "# quadrature panel_nodes={} max_panel_width={} rel_tol={:e} tail_tol={:e} max_xi={} max_refinements={}",
                q.panel_nodes, q.max_panel_width, q.rel_tol, q.tail_tol, q.max_xi, q.max_refinements
            ),
            match self.seed {
                Some(s) => format!("# seed={s}"),
                None => "# seed=none".into(),
            },
        ];
        if self.timestamp {
            let secs = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            lines.push(format!("# generated_unix={secs}"));
        }
        lines
    }
}

/// A table of numbers; `None` cells are written empty.
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        self.rows.push(row.into_iter().map(Some).collect());
    }
}

pub fn write(path: &Path, provenance: &Provenance, table: &Table) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Output(format!("{}: {e}", path.display()));
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    for line in provenance.lines() {
        writeln!(out, "{line}").map_err(io)?;
    }
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| CliError::Output(format!("{}: {e}", path.display()));
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|c| c.map(|v| v.to_string()).unwrap_or_default()))
            .map_err(csv_err)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}
