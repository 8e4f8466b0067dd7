//! Records printed by every command and their three encodings.
//!
//! A command produces a [`Report`]: a fixed list of columns and zero or more
//! records carrying exactly those columns. The encodings are
//!
//! * `table`: aligned text for people; ASN to 2 decimals, probabilities to 4,
//!   absent values as `-`;
//! * `csv`: a header row (always, even with no records) and full-precision
//!   numbers, absent values as empty cells;
//! * `json-like`: one JSON object, see [`Report::to_json_like`].

use std::fmt::Write as _;

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    #[value(name = "json-like")]
    JsonLike,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Text(String),
    Flag(bool),
    Missing,
}

/// How a value is shown in the `table` encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Plain,
    Prob,
    Asn,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub key: &'static str,
    pub value: Value,
    pub style: Style,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record {
    fields: Vec<Field>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(mut self, key: &'static str, value: Value, style: Style) -> Self {
        self.fields.push(Field { key, value, style });
        self
    }

    pub fn int(self, key: &'static str, v: impl Into<i64>) -> Self {
        self.push(key, Value::Int(v.into()), Style::Plain)
    }

    pub fn real(self, key: &'static str, v: f64) -> Self {
        self.push(key, Value::Real(v), Style::Plain)
    }

    pub fn prob(self, key: &'static str, v: f64) -> Self {
        self.push(key, Value::Real(v), Style::Prob)
    }

    pub fn asn(self, key: &'static str, v: f64) -> Self {
        self.push(key, Value::Real(v), Style::Asn)
    }

    pub fn fixed(self, key: &'static str, v: f64, digits: usize) -> Self {
        self.push(key, Value::Real(v), Style::Fixed(digits))
    }

    pub fn text(self, key: &'static str, v: impl Into<String>) -> Self {
        self.push(key, Value::Text(v.into()), Style::Plain)
    }

    pub fn flag(self, key: &'static str, v: bool) -> Self {
        self.push(key, Value::Flag(v), Style::Plain)
    }

    pub fn missing(self, key: &'static str) -> Self {
        self.push(key, Value::Missing, Style::Plain)
    }

    /// Appends an optional integer.
    pub fn opt_int(self, key: &'static str, v: Option<impl Into<i64>>) -> Self {
        match v {
            Some(v) => self.int(key, v),
            None => self.missing(key),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub records: Vec<Record>,
}

impl Report {
    pub fn new(command: &'static str, columns: &[&'static str]) -> Self {
        Self {
            command,
            columns: columns.to_vec(),
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, record: Record) {
        let keys: Vec<&str> = record.fields.iter().map(|f| f.key).collect();
        assert_eq!(keys, self.columns, "record columns differ from the report's");
        self.records.push(record);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.to_table(),
            Format::Csv => self.to_csv(),
            Format::JsonLike => self.to_json_like(),
        }
    }

    pub fn to_table(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .records
            .iter()
            .map(|r| r.fields.iter().map(table_cell).collect())
            .collect();
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| rows.iter().map(|r| r[i].len()).chain([c.len()]).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        let line = |cells: Vec<&str>, out: &mut String| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            out.push_str(padded.join("  ").trim_end());
            out.push('\n');
        };
        line(self.columns.clone(), &mut out);
        for row in &rows {
            line(row.iter().map(String::as_str).collect(), &mut out);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.columns).expect("in-memory write");
        for record in &self.records {
            writer
                .write_record(record.fields.iter().map(|f| csv_cell(&f.value)))
                .expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    /// One JSON object per run:
    ///
    /// ```text
    /// document := '{' '"command":' STRING ',' '"columns":' '[' STRING,* ']' ','
    ///             '"records":' '[' record,* ']' '}'
    /// record   := '{' (STRING ':' scalar),* '}'     keys in column order
    /// scalar   := NUMBER | STRING | true | false | null
    /// ```
    ///
    /// Absent values are `null`; numbers use the shortest form that parses
    /// back to the same `f64`. Each record sits on its own line.
    pub fn to_json_like(&self) -> String {
        let quote = |s: &str| serde_json::to_string(s).expect("strings serialise");
        let mut out = String::new();
        let columns: Vec<String> = self.columns.iter().map(|c| quote(c)).collect();
        let _ = write!(
            out,
            "{{\"command\":{},\"columns\":[{}],\"records\":[",
            quote(self.command),
            columns.join(",")
        );
        for (i, record) in self.records.iter().enumerate() {
            let body: Vec<String> = record
                .fields
                .iter()
                .map(|f| format!("{}:{}", quote(f.key), json_scalar(&f.value)))
                .collect();
            let sep = if i == 0 { "" } else { "," };
            let _ = write!(out, "{sep}\n{{{}}}", body.join(","));
        }
        out.push_str("\n]}\n");
        out
    }
}

fn number(x: f64) -> String {
    serde_json::Number::from_f64(x).map_or_else(|| "null".to_string(), |n| n.to_string())
}

fn table_cell(field: &Field) -> String {
    match (&field.value, field.style) {
        (Value::Missing, _) => "-".into(),
        (Value::Int(v), _) => v.to_string(),
        (Value::Text(s), _) => s.clone(),
        (Value::Flag(b), _) => if *b { "yes" } else { "no" }.into(),
        (Value::Real(x), Style::Plain) => x.to_string(),
        (Value::Real(x), Style::Prob) => format!("{x:.4}"),
        (Value::Real(x), Style::Asn) => format!("{x:.2}"),
        (Value::Real(x), Style::Fixed(d)) => format!("{x:.d$}"),
    }
}

fn csv_cell(value: &Value) -> String {
    match value {
        Value::Missing => String::new(),
        Value::Int(v) => v.to_string(),
        Value::Real(x) => number(*x),
        Value::Text(s) => s.clone(),
        Value::Flag(b) => b.to_string(),
    }
}

fn json_scalar(value: &Value) -> String {
    match value {
        Value::Missing => "null".into(),
        Value::Int(v) => v.to_string(),
        Value::Real(x) => number(*x),
        Value::Text(s) => serde_json::to_string(s).expect("strings serialise"),
        Value::Flag(b) => b.to_string(),
    }
}
