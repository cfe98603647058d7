//! Result tables, CSV output with a `#` metadata block, and the JSON manifest.

use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) if v.is_finite() => format!("{v:.12e}"),
            Cell::Num(v) if v.is_nan() => "nan".into(),
            Cell::Num(v) => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    /// Converged, with an informational remark.
    Note(String),
    Failed(String),
}

impl Status {
    pub fn failed(&self) -> bool {
        matches!(self, Status::Failed(_))
    }

    fn render(&self) -> String {
        match self {
            Status::Ok => "ok".into(),
            Status::Note(s) => s.clone(),
            Status::Failed(s) => format!("failed: {s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub cells: Vec<Cell>,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Row>,
    pub metadata: Vec<(String, String)>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), ..Default::default() }
    }

    pub fn push(&mut self, cells: Vec<Cell>, status: Status) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(Row { cells, status });
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.status.failed()).count()
    }

    pub fn failure_fraction(&self) -> f64 {
        if self.rows.is_empty() {
            0.0
        } else {
            self.failures() as f64 / self.rows.len() as f64
        }
    }

    /// Column values as numbers, for tests and summaries.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r.cells[i] {
                    Cell::Num(v) => *v,
                    Cell::Int(v) => *v as f64,
                    Cell::Text(_) => f64::NAN,
                })
                .collect(),
        )
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut out = out;
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}: {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = self.columns.clone();
        header.push("status");
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec: Vec<String> = r.cells.iter().map(Cell::render).collect();
            rec.push(r.status.render());
            w.write_record(&rec)?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn manifest(&self, extra: serde_json::Value) -> serde_json::Value {
        let points: Vec<serde_json::Value> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                serde_json::json!({
                    "index": i,
                    "converged": !r.status.failed(),
                    "status": r.status.render(),
                })
            })
            .collect();
        let created =
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        serde_json::json!({
            "tool": "rydpol",
            "version": env!("CARGO_PKG_VERSION"),
            "created_unix": created,
            "metadata": self.metadata.iter().map(|(k, v)| (k.clone(), serde_json::Value::from(v.clone()))).collect::<serde_json::Map<_, _>>(),
            "columns": self.columns,
            "rows": self.rows.len(),
            "failures": self.failures(),
            "failure_fraction": self.failure_fraction(),
            "points": points,
            "run": extra,
        })
    }

    /// Writes `path` and `path.manifest.json`.
    pub fn write_files(&self, path: &Path, extra: serde_json::Value) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        let mut name = path.as_os_str().to_owned();
        name.push(".manifest.json");
        let text = serde_json::to_string_pretty(&self.manifest(extra)).expect("manifest serializes");
        std::fs::write(name, text + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["x", "n"]);
        t.meta("study", "demo");
        t.push(vec![Cell::Num(0.5), Cell::Int(2)], Status::Ok);
        t.push(vec![Cell::Num(f64::NAN), Cell::Int(-1)], Status::Failed("no root, sorry".into()));
        let s = t.to_csv_string();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "# study: demo");
        assert_eq!(lines[1], "x,n,status");
        assert_eq!(lines[2], "5.000000000000e-1,2,ok");
        assert_eq!(lines[3], "nan,-1,\"failed: no root, sorry\"");
        assert_eq!(t.failure_fraction(), 0.5);
        let m = t.manifest(serde_json::json!({}));
        assert_eq!(m["points"][1]["converged"], false);
    }
}
