use std::io::{self, Write};

use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(usize),
    Num(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => fmt_num(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Num(x) => serde_json::Number::from_f64(*x)
                .map(Value::Number)
                .unwrap_or(Value::Null),
            Cell::Text(s) => Value::from(s.as_str()),
        }
    }
}

/// 15 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.14e}")
}

/// Problem name and parameters shared by every row.
#[derive(Debug, Clone)]
pub struct Header {
    pub problem: String,
    pub params: Vec<(String, Value)>,
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Header,
    pub meta: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Header, columns: Vec<&'static str>) -> Self {
        Table {
            header,
            meta: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.meta.push((key.to_string(), value.into()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, out: &mut impl Write) -> io::Result<()> {
        writeln!(out, "# problem: {}", self.header.problem)?;
        let params: Vec<String> = self
            .header
            .params
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k}={s}"),
                other => format!("{k}={other}"),
            })
            .collect();
        writeln!(out, "# params: {}", params.join(", "))?;
        for (k, v) in &self.meta {
            writeln!(out, "# {k}: {v}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    /// One object per row carrying `problem`, `params` and the columns.
    pub fn to_json(&self) -> Value {
        let params: Map<String, Value> = self.header.params.iter().cloned().collect();
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                obj.insert("problem".into(), Value::from(self.header.problem.as_str()));
                obj.insert("params".into(), Value::Object(params.clone()));
                for (c, cell) in self.columns.iter().zip(row) {
                    obj.insert((*c).into(), cell.json());
                }
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }

    pub fn write_json(&self, out: &mut impl Write) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut *out, &self.to_json())?;
        writeln!(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let header = Header {
            problem: "mathieu".into(),
            params: vec![("r".into(), Value::from(1.0))],
        };
        let mut t = Table::new(header, vec!["n", "lambda", "boundary", "residual"]);
        t.meta("order", "100");
        t.push(vec![
            Cell::Int(0),
            Cell::Num(-0.5),
            Cell::Text("periodic".into()),
            Cell::Num(f64::NAN),
        ]);
        t
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# problem: mathieu");
        assert_eq!(lines[1], "# params: r=1.0");
        assert_eq!(lines[2], "# order: 100");
        assert_eq!(lines[3], "n,lambda,boundary,residual");
        assert_eq!(lines[4], "0,-5.00000000000000e-1,periodic,NaN");
    }

    #[test]
    fn json_keys() {
        let v = sample().to_json();
        let obj = v[0].as_object().unwrap();
        let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(
            keys,
            ["boundary", "lambda", "n", "params", "problem", "residual"]
        );
        assert!(obj["residual"].is_null());
    }

    #[test]
    fn fifteen_significant_digits() {
        assert_eq!(fmt_num(16.033018848985410), "1.60330188489854e1");
    }
}
