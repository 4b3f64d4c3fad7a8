use std::io::Write;

use serde_json::{Map, Number, Value};

pub const SIG_DIGITS: usize = 12;

/// Rounds to 12 significant digits so outputs are stable across platforms.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().unwrap_or(x)
}

pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{}", round_sig(x))
    }
}

/// Applies [`round_sig`] to every float in a JSON tree. Non-finite numbers
/// have no JSON form and become strings.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            Number::from_f64(round_sig(x))
                .map(Value::Number)
                .unwrap_or_else(|| Value::String(fmt_num(x)))
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, round_json(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Header plus rows; the header row is always written.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| *h == name)?;
        self.rows.iter().map(|r| r[i].as_f64()).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(round_sig(0.736_965_594_166_206_3), 0.736_965_594_166);
        assert_eq!(round_sig(1e-300), 1e-300);
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(123_456_789_012_345.0), "123456789012000");
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn json_rounding_is_recursive() {
        let v = serde_json::json!({"a": [1.0 / 3.0, 2], "b": {"c": 2.0f64.sqrt()}});
        let r = round_json(v);
        assert_eq!(r["a"][0].as_f64().unwrap(), 0.333_333_333_333);
        assert_eq!(r["a"][1].as_u64().unwrap(), 2);
        assert_eq!(r["b"]["c"].as_f64().unwrap(), 1.414_213_562_37);
    }

    #[test]
    fn csv_has_header() {
        let mut t = Table::new(vec!["x", "y"]);
        assert_eq!(t.to_csv(), "x,y\n");
        t.push(vec![1.0.into(), "a".into()]);
        assert_eq!(t.to_csv(), "x,y\n1,a\n");
        assert_eq!(t.column("x").unwrap(), vec![1.0]);
        assert!(t.column("y").is_none());
    }
}
