//! Output formats and the provenance header carried by every artifact.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Text => "txt",
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance<C: Serialize> {
    pub tool: &'static str,
    pub library_version: &'static str,
    pub run_config: C,
}

impl<C: Serialize> Provenance<C> {
    pub fn new(run_config: C) -> Self {
        Provenance {
            tool: "greensep",
            library_version: greensep::VERSION,
            run_config,
        }
    }

    /// `#`-prefixed header lines for text and CSV artifacts.
    pub fn comment_header(&self) -> Result<String> {
        Ok(format!(
            "# {} {}\n# run_config: {}\n",
            self.tool,
            self.library_version,
            serde_json::to_string(&self.run_config)?
        ))
    }

    pub fn to_value(&self) -> Result<serde_json::Value> {
        Ok(serde_json::to_value(self)?)
    }
}

/// A JSON artifact: the provenance record next to the result.
pub fn json_document<C: Serialize, T: Serialize>(prov: &Provenance<C>, result: &T) -> Result<String> {
    #[derive(Serialize)]
    struct Doc<'a, C: Serialize, T: Serialize> {
        provenance: &'a Provenance<C>,
        result: &'a T,
    }
    let mut s = serde_json::to_string_pretty(&Doc { provenance: prov, result })?;
    s.push('\n');
    Ok(s)
}

/// Write to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, body),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn write_file(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

/// Left-aligned text table with a header row.
pub fn text_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let s: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        s.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for r in rows {
        out += &line(r.iter().map(String::as_str).collect());
    }
    out
}

pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",") + "\n";
    for r in rows {
        out += &(r.join(",") + "\n");
    }
    out
}
