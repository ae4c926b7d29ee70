//! Tabular output: CSV with `#`-prefixed metadata lines, or JSON with a
//! metadata object mirroring the same rows. Floats carry 12 significant
//! digits; non-finite values print as inf/-inf/nan.

use crate::config::RunConfig;

#[derive(Debug, Clone)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Float(v) => match serde_json::Number::from_f64(*v) {
                Some(n) => serde_json::Value::Number(n),
                None => serde_json::Value::String(format_float(*v)),
            },
            Cell::Int(v) => serde_json::Value::from(*v),
            Cell::Text(s) => serde_json::Value::String(s.clone()),
        }
    }
}

pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.11e}")
    }
}

/// One rendered result set. `status` holds "ok" or an error message per
/// row, mirrored in the last column.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub status: Vec<String>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
            status: Vec::new(),
        }
    }

    pub fn push_ok(&mut self, cells: Vec<Cell>) {
        self.rows.push(cells);
        self.status.push("ok".into());
    }

    pub fn push_failed(&mut self, cells: Vec<Cell>, message: String) {
        self.rows.push(cells);
        self.status.push(message);
    }

    pub fn ok_fraction(&self) -> f64 {
        if self.status.is_empty() {
            return 1.0;
        }
        self.status.iter().filter(|s| s.as_str() == "ok").count() as f64 / self.status.len() as f64
    }

    pub fn to_csv(&self, cfg: &RunConfig) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# tool = memprobe {}\n",
            env!("CARGO_PKG_VERSION")
        ));
        for (k, v) in cfg.to_pairs() {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push_str(",status\n");
        for (row, status) in self.rows.iter().zip(&self.status) {
            let mut fields: Vec<String> = row.iter().map(Cell::csv).collect();
            fields.push(status.replace(',', ";"));
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, cfg: &RunConfig) -> String {
        let config: serde_json::Map<String, serde_json::Value> = cfg
            .to_pairs()
            .into_iter()
            .map(|(k, v)| (k, serde_json::Value::String(v)))
            .collect();
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .zip(&self.status)
            .map(|(row, status)| {
                let mut obj = serde_json::Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    obj.insert(name.to_string(), cell.json());
                }
                obj.insert("status".into(), serde_json::Value::String(status.clone()));
                serde_json::Value::Object(obj)
            })
            .collect();
        let doc = serde_json::json!({
            "metadata": {
                "tool": "memprobe",
                "version": env!("CARGO_PKG_VERSION"),
                "config": serde_json::Value::Object(config),
            },
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("json serialization");
        s.push('\n');
        s
    }
}
