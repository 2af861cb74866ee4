//! Command output: aligned plain-text tables or line-delimited `key=value` records.

use std::fmt::Write;

use clap::ValueEnum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Records,
}

impl Format {
    pub fn as_str(&self) -> &'static str {
        match self {
            Format::Table => "table",
            Format::Records => "records",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, headers: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row<S: ToString>(&mut self, cells: &[S]) {
        self.rows.push(cells.iter().map(|c| c.to_string()).collect());
    }
}

/// Everything a command prints.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub command: String,
    pub fields: Vec<(String, String)>,
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            ..Default::default()
        }
    }

    pub fn field(&mut self, key: &str, value: impl ToString) {
        self.fields.push((key.to_string(), value.to_string()));
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.render_table(),
            Format::Records => self.render_records(),
        }
    }

    fn render_table(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# {}", self.command).unwrap();
        let width = self.fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.fields {
            writeln!(out, "{k:<width$}  {v}").unwrap();
        }
        for t in &self.tables {
            writeln!(out).unwrap();
            writeln!(out, "[{}]", t.name).unwrap();
            let mut widths: Vec<usize> = t.headers.iter().map(|h| h.len()).collect();
            for r in &t.rows {
                for (i, c) in r.iter().enumerate() {
                    widths[i] = widths[i].max(c.len());
                }
            }
            let line = |cells: &[String]| {
                let padded: Vec<String> = cells
                    .iter()
                    .enumerate()
                    .map(|(i, c)| format!("{c:<w$}", w = widths[i]))
                    .collect();
                padded.join("  ").trim_end().to_string()
            };
            writeln!(out, "{}", line(&t.headers)).unwrap();
            if t.rows.is_empty() {
                writeln!(out, "(empty)").unwrap();
            }
            for r in &t.rows {
                writeln!(out, "{}", line(r)).unwrap();
            }
        }
        if !self.notes.is_empty() {
            writeln!(out).unwrap();
            for n in &self.notes {
                writeln!(out, "- {n}").unwrap();
            }
        }
        out
    }

    fn render_records(&self) -> String {
        let mut out = String::new();
        let mut head = vec![format!("record=run command={}", quote(&self.command))];
        head.extend(self.fields.iter().map(|(k, v)| format!("{}={}", key(k), quote(v))));
        writeln!(out, "{}", head.join(" ")).unwrap();
        for t in &self.tables {
            for r in &t.rows {
                let mut cells = vec![format!("record=row table={}", quote(&t.name))];
                cells.extend(t.headers.iter().zip(r).map(|(h, c)| format!("{}={}", key(h), quote(c))));
                writeln!(out, "{}", cells.join(" ")).unwrap();
            }
        }
        for n in &self.notes {
            writeln!(out, "record=note text={}", quote(n)).unwrap();
        }
        out
    }
}

fn key(k: &str) -> String {
    k.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

/// Leaves simple tokens bare and double-quotes anything else.
fn quote(v: &str) -> String {
    let bare = !v.is_empty()
        && v
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | '/' | ':' | '+' | '*' | '^' | '<' | '>'));
    if bare {
        v.to_string()
    } else {
        format!("\"{}\"", v.replace('\\', "\\\\").replace('"', "\\\""))
    }
}
