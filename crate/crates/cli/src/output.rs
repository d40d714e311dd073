//! Tables and JSON documents written by the commands.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

/// Per-replicate output: a fixed header and one row of cells per replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> anyhow::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell))?;
        }
        Ok(w.into_inner()?)
    }

    pub fn to_json(&self) -> anyhow::Result<Vec<u8>> {
        let objects: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let m: Map<String, Value> = self.header.iter().cloned().zip(row.iter().cloned()).collect();
                Value::Object(m)
            })
            .collect();
        let mut bytes = serde_json::to_vec_pretty(&objects)?;
        bytes.push(b'\n');
        Ok(bytes)
    }
}

/// Numbers use the shortest representation that reads back to the same value.
fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

pub fn write_table(dir: &Path, stem: &str, table: &Table, format: Format) -> anyhow::Result<()> {
    let (name, bytes) = match format {
        Format::Csv => (format!("{}.csv", stem), table.to_csv()?),
        Format::Json => (format!("{}.json", stem), table.to_json()?),
    };
    fs::write(dir.join(name), bytes)?;
    Ok(())
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> anyhow::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(dir.join(name), bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_cells() {
        let mut t = Table::new(["a", "b", "c"]);
        t.push(vec![json!(0.1), json!("{1,2}{3}"), Value::Null]);
        t.push(vec![json!(1e-7), json!(3), json!(true)]);
        let s = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(s, "a,b,c\n0.1,\"{1,2}{3}\",\n1e-7,3,true\n");
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1 + 0.2, 1.0 / 3.0, 6.02214076e23, -2.5e-300] {
            let s = cell(&json!(x));
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
