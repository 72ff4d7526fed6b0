//! Document model and the CSV/JSON writers.

use std::fmt::Write as _;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Bool(bool),
    Str(String),
    List(Vec<Value>),
    Null,
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}
impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}
impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}
impl From<u32> for Value {
    fn from(v: u32) -> Self {
        Value::Int(v as i64)
    }
}
impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}
impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}
impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}
impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Str(v)
    }
}
impl<T: Into<Value>> From<Vec<T>> for Value {
    fn from(v: Vec<T>) -> Self {
        Value::List(v.into_iter().map(Into::into).collect())
    }
}
impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Null, Into::into)
    }
}

/// Ordered key/value list.
pub type Fields = Vec<(String, Value)>;

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_columns(name: &str, columns: Vec<String>) -> Self {
        Table { name: name.into(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub params: Fields,
    pub tables: Vec<Table>,
    pub summary: Fields,
}

impl Report {
    pub fn param(&mut self, key: &str, v: impl Into<Value>) {
        self.params.push((key.into(), v.into()));
    }

    pub fn note(&mut self, key: &str, v: impl Into<Value>) {
        self.summary.push((key.into(), v.into()));
    }
}

pub struct Header<'a> {
    pub version: &'a str,
    pub subcommand: &'a str,
    pub seed: u64,
}

/// `%.17g`: 17 significant digits, trailing zeros removed.
pub fn fmt_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        trim_zeros(&fixed)
    } else {
        let m = trim_zeros(mant);
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn json_value(v: &Value, out: &mut String) {
    match v {
        Value::Num(x) if x.is_finite() => out.push_str(&fmt_g17(*x)),
        Value::Num(x) => out.push_str(&json_string(&x.to_string())),
        Value::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Str(s) => out.push_str(&json_string(s)),
        Value::Null => out.push_str("null"),
        Value::List(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                json_value(item, out);
            }
            out.push(']');
        }
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn json_fields(fields: &Fields, indent: &str, out: &mut String) {
    if fields.is_empty() {
        out.push_str("{}");
        return;
    }
    out.push_str("{\n");
    for (i, (k, v)) in fields.iter().enumerate() {
        let _ = write!(out, "{indent}  {}: ", json_string(k));
        json_value(v, out);
        out.push_str(if i + 1 < fields.len() { ",\n" } else { "\n" });
    }
    let _ = write!(out, "{indent}}}");
}

pub fn to_json(h: &Header, r: &Report) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"toolkit\": \"qmkit\",");
    let _ = writeln!(out, "  \"version\": {},", json_string(h.version));
    let _ = writeln!(out, "  \"schema\": {SCHEMA},");
    let _ = writeln!(out, "  \"subcommand\": {},", json_string(h.subcommand));
    out.push_str("  \"params\": ");
    json_fields(&r.params, "  ", &mut out);
    out.push_str(",\n");
    let _ = writeln!(out, "  \"seed\": {},", h.seed);
    out.push_str("  \"tables\": {");
    for (t, table) in r.tables.iter().enumerate() {
        out.push_str(if t == 0 { "\n" } else { ",\n" });
        let _ = writeln!(out, "    {}: {{", json_string(&table.name));
        let cols: Vec<Value> = table.columns.iter().map(|c| Value::Str(c.clone())).collect();
        out.push_str("      \"columns\": ");
        json_value(&Value::List(cols), &mut out);
        out.push_str(",\n      \"rows\": [");
        for (i, row) in table.rows.iter().enumerate() {
            out.push_str(if i == 0 { "\n        " } else { ",\n        " });
            json_value(&Value::List(row.clone()), &mut out);
        }
        out.push_str(if table.rows.is_empty() { "]\n    }" } else { "\n      ]\n    }" });
    }
    out.push_str(if r.tables.is_empty() { "},\n" } else { "\n  },\n" });
    out.push_str("  \"summary\": ");
    json_fields(&r.summary, "  ", &mut out);
    out.push_str("\n}\n");
    out
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Num(x) if x.is_finite() => fmt_g17(*x),
        Value::Num(x) => x.to_string(),
        Value::Int(i) => i.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Null => String::new(),
        Value::Str(s) => csv_quote(s),
        Value::List(items) => csv_quote(&items.iter().map(csv_cell).collect::<Vec<_>>().join(" ")),
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n', ' ']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn to_csv(h: &Header, r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# qmkit {} schema {SCHEMA}", h.version);
    let _ = writeln!(out, "# subcommand: {}", h.subcommand);
    for (k, v) in &r.params {
        let _ = writeln!(out, "# param {k} = {}", csv_cell(v));
    }
    let _ = writeln!(out, "# seed: {}", h.seed);
    for table in &r.tables {
        let _ = writeln!(out, "# table: {}", table.name);
        out.push_str(&table.columns.iter().map(|c| csv_quote(c)).collect::<Vec<_>>().join(","));
        out.push('\n');
        for row in &table.rows {
            out.push_str(&row.iter().map(csv_cell).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
    }
    if !r.summary.is_empty() {
        out.push_str("# table: summary\nkey,value\n");
        for (k, v) in &r.summary {
            let _ = writeln!(out, "{},{}", csv_quote(k), csv_cell(v));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_formatting() {
        assert_eq!(fmt_g17(2.0 * 2f64.sqrt()), "2.8284271247461903");
        assert_eq!(fmt_g17(0.5), "0.5");
        assert_eq!(fmt_g17(3.0), "3");
        assert_eq!(fmt_g17(-1.25e-7), "-1.2499999999999999e-07");
        assert_eq!(fmt_g17(2f64.powi(-30)), "9.3132257461547852e-10");
        assert_eq!(fmt_g17(6.02214076e23), "6.0221407599999999e+23");
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        for x in [std::f64::consts::PI, 1e-300, 123456.789, -0.000123] {
            assert_eq!(fmt_g17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_layout() {
        let mut r = Report::default();
        r.param("n", 15u64);
        r.note("factors", vec![3u64, 5]);
        let h = Header { version: "0.1.0", subcommand: "shor", seed: 1 };
        let s = to_json(&h, &r);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["summary"]["factors"], serde_json::json!([3, 5]));
        assert_eq!(v["params"]["n"], 15);
    }
}
