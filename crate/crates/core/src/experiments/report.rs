use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    #[serde(alias = "md")]
    Markdown,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "md" | "markdown" => Ok(OutputFormat::Markdown),
            other => Err(Error::Config(format!("unknown output format {other:?}"))),
        }
    }
}

/// Rows of one experiment plus the number of rows that did not converge or failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<R> {
    pub experiment: String,
    pub failures: usize,
    pub rows: Vec<R>,
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

impl<R: Serialize> Report<R> {
    pub fn new(experiment: &str, rows: Vec<R>, failures: usize) -> Self {
        Self {
            experiment: experiment.to_string(),
            failures,
            rows,
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(io)?;
        }
        String::from_utf8(w.into_inner().map_err(io)?).map_err(io)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(io)
    }

    pub fn to_markdown(&self) -> Result<String> {
        let text = self.to_csv()?;
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = rd.headers().map_err(io)?.iter().map(str::to_string).collect();
        let mut out = String::new();
        if !header.is_empty() {
            out.push_str(&format!("| {} |\n", header.join(" | ")));
            out.push_str(&format!("|{}\n", " --- |".repeat(header.len())));
        }
        for rec in rd.records() {
            let rec = rec.map_err(io)?;
            let cells: Vec<&str> = rec.iter().collect();
            out.push_str(&format!("| {} |\n", cells.join(" | ")));
        }
        Ok(out)
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
            OutputFormat::Markdown => self.to_markdown(),
        }
    }

    pub fn write_to(&self, format: OutputFormat, mut w: impl Write) -> Result<()> {
        w.write_all(self.render(format)?.as_bytes()).map_err(io)
    }
}
