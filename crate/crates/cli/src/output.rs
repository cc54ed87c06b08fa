//! Tables rendered as CSV (metadata in a `#` preamble) or JSON. Numbers use
//! the shortest decimal form that parses back to the same `f64`.

use serde_json::{json, Map, Value};

use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            metadata: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    pub fn meta_num(&mut self, key: &str, value: f64) -> &mut Self {
        self.meta(key, format_real(value))
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> CliResult<Vec<u8>> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => Ok(self.to_json()),
        }
    }

    fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut out = Vec::new();
        for (k, v) in &self.metadata {
            out.extend_from_slice(format!("# {k}: {v}\n").as_bytes());
        }
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| crate::error::CliError::Numeric(format!("csv output: {e}"));
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell_text)).map_err(csv_err)?;
        }
        w.into_inner()
            .map_err(|e| crate::error::CliError::Numeric(format!("csv output: {e}")))
    }

    fn to_json(&self) -> Vec<u8> {
        let metadata: Map<String, Value> = self
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(cell_json).collect()))
            .collect();
        let doc = json!({ "metadata": metadata, "columns": self.columns, "rows": rows });
        let mut out = serde_json::to_vec_pretty(&doc).expect("JSON values always serialize");
        out.push(b'\n');
        out
    }
}

/// Shortest round-trip decimal; exponent form outside `[1e-4, 1e16)`.
pub fn format_real(v: f64) -> String {
    let a = v.abs();
    if !v.is_finite() || a == 0.0 || (1e-4..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Num(v) => format_real(*v),
        Cell::Int(v) => v.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::Num(v) if v.is_finite() => json!(v),
        Cell::Num(_) | Cell::Empty => Value::Null,
        Cell::Int(v) => json!(v),
        Cell::Text(s) => json!(s),
    }
}

/// Linear-interpolation quantile of sorted data (`q ∈ [0, 1]`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Quantile of unsorted data.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for v in [
            0.1 + 0.2,
            1e-300,
            6.02e23,
            -3.5,
            0.0,
            123456.789,
            1.0 / 3.0,
            f64::MIN_POSITIVE,
        ] {
            assert_eq!(format_real(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_real(0.5), "0.5");
        assert_eq!(format_real(2e-7), "2e-7");
    }

    #[test]
    fn csv_has_preamble_and_quotes() {
        let mut t = Table::new(&["a", "b"]);
        t.meta("kernel", "gamma");
        t.push(vec![Cell::Num(0.25), Cell::from("x,y")]);
        let s = String::from_utf8(t.render(Format::Csv).unwrap()).unwrap();
        assert_eq!(s, "# kernel: gamma\na,b\n0.25,\"x,y\"\n");
    }

    #[test]
    fn json_layout() {
        let mut t = Table::new(&["x"]);
        t.meta("n", 3);
        t.push(vec![Cell::Num(1.5)]);
        let v: Value = serde_json::from_slice(&t.render(Format::Json).unwrap()).unwrap();
        assert_eq!(v["metadata"]["n"], "3");
        assert_eq!(v["rows"][0][0], 1.5);
    }

    #[test]
    fn quantiles() {
        let d = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(quantile(&d, 0.0), 1.0);
        assert_eq!(quantile(&d, 1.0), 4.0);
        assert_eq!(quantile(&d, 0.5), 2.5);
    }
}
