//! Record emission. Every record carries the tool version and the run config.

use crate::Cli;
use clap::ValueEnum;
use pnpair::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use std::io::Write;

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    /// One JSON object per line.
    Json,
    /// One CSV table per record kind; nested values are JSON-encoded cells.
    Csv,
    /// Indented JSON, for reading.
    Text,
}

pub struct Emitter<'a> {
    format: Format,
    config: Value,
    out: Box<dyn Write + 'a>,
    /// CSV rows grouped by kind, in first-seen order.
    tables: Vec<(String, Vec<Map<String, Value>>)>,
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::Resource { what: "output".into(), required: e.to_string(), limit: "writable stdout".into() }
}

impl<'a> Emitter<'a> {
    pub fn new(cli: &Cli, out: impl Write + 'a) -> Self {
        Emitter {
            format: cli.format,
            config: serde_json::to_value(cli).expect("config serializes"),
            out: Box::new(out),
            tables: Vec::new(),
        }
    }

    pub fn record(&mut self, kind: &str, payload: Value) -> Result<()> {
        match self.format {
            Format::Json | Format::Text => {
                let rec = json!({
                    "tool": "pnpair",
                    "version": env!("CARGO_PKG_VERSION"),
                    "kind": kind,
                    "config": self.config,
                    "data": payload,
                });
                let text = if self.format == Format::Json {
                    serde_json::to_string(&rec)
                } else {
                    serde_json::to_string_pretty(&rec)
                }
                .map_err(|e| Error::Integrity(e.to_string()))?;
                writeln!(self.out, "{text}").map_err(io)
            }
            Format::Csv => {
                let mut row = Map::new();
                row.insert("version".into(), env!("CARGO_PKG_VERSION").into());
                row.insert("kind".into(), kind.into());
                match payload {
                    Value::Object(m) => row.extend(m),
                    v => {
                        row.insert("value".into(), v);
                    }
                }
                match self.tables.iter_mut().find(|(k, _)| k == kind) {
                    Some((_, rows)) => rows.push(row),
                    None => self.tables.push((kind.to_string(), vec![row])),
                }
                Ok(())
            }
        }
    }

    pub fn finish(mut self) -> Result<()> {
        if self.format != Format::Csv {
            return self.out.flush().map_err(io);
        }
        let tables = std::mem::take(&mut self.tables);
        for (i, (_, rows)) in tables.iter().enumerate() {
            if i > 0 {
                writeln!(self.out).map_err(io)?;
            }
            // columns in first-seen order across all rows of this kind
            let mut cols: Vec<String> = Vec::new();
            for r in rows {
                for k in r.keys() {
                    if !cols.contains(k) {
                        cols.push(k.clone());
                    }
                }
            }
            let mut w = csv::Writer::from_writer(&mut self.out);
            w.write_record(&cols).map_err(io)?;
            for r in rows {
                w.write_record(cols.iter().map(|c| match r.get(c) {
                    None | Some(Value::Null) => String::new(),
                    Some(Value::String(s)) => s.clone(),
                    Some(v) => v.to_string(),
                }))
                .map_err(io)?;
            }
            w.flush().map_err(io)?;
        }
        self.out.flush().map_err(io)
    }
}
