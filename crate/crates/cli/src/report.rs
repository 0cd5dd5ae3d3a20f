use std::fs;
use std::path::Path;
use std::str::FromStr;

use crlab::graphapprox::ApproxReport;
use crlab::hulls::HullCloud;
use crlab::moments::MomentReport;
use serde::Serialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Usage(format!("unknown format `{s}`"))),
        }
    }
}

/// Something a run writes to disk.
pub trait Artifact {
    /// `None` when the artifact has no tabular form.
    fn csv(&self) -> Option<String>;
    fn json(&self) -> String;
}

fn pretty<T: Serialize + ?Sized>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("artifact serialises");
    s.push('\n');
    s
}

impl Artifact for MomentReport {
    fn csv(&self) -> Option<String> {
        Some(self.to_csv())
    }

    fn json(&self) -> String {
        pretty(self)
    }
}

impl Artifact for HullCloud {
    fn csv(&self) -> Option<String> {
        Some(self.to_csv())
    }

    fn json(&self) -> String {
        pretty(self)
    }
}

impl Artifact for ApproxReport {
    fn csv(&self) -> Option<String> {
        Some(self.grid_csv())
    }

    fn json(&self) -> String {
        pretty(self)
    }
}

/// Any serialisable summary, JSON only.
pub struct Json<'a, T: Serialize>(pub &'a T);

impl<T: Serialize> Artifact for Json<'_, T> {
    fn csv(&self) -> Option<String> {
        None
    }

    fn json(&self) -> String {
        pretty(self.0)
    }
}

/// Plain table with a header row.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }
}

impl Artifact for Table {
    fn csv(&self) -> Option<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        Some(String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells"))
    }

    fn json(&self) -> String {
        pretty(self)
    }
}

/// Writes `artifact` to `path`. Re-reading a written file with the matching
/// parser and emitting it again reproduces the same bytes.
pub fn emit_report(artifact: &dyn Artifact, format: Format, path: &Path) -> Result<(), CliError> {
    let text = match format {
        Format::Csv => artifact
            .csv()
            .ok_or_else(|| CliError::Module(format!("{} has no CSV form", path.display())))?,
        Format::Json => artifact.json(),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}
