use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::args::{Command, Format};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Number(f64),
    Text(String),
    Missing,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // `{}` prints the shortest representation that parses back to the same f64.
            Self::Number(x) => format!("{x}"),
            Self::Text(s) => s.clone(),
            Self::Missing => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Self::Number(x) if x.is_finite() => serde_json::json!(x),
            Self::Number(x) => serde_json::json!(x.to_string()),
            Self::Text(s) => serde_json::json!(s),
            Self::Missing => serde_json::Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Self::Number(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Self::Number(x as f64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Self::Text(s.into())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Self::Missing, Self::Number)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[(&str, &str, &str)]) -> Self {
        Self {
            name: name.into(),
            columns: columns
                .iter()
                .map(|(n, u, d)| Column {
                    name: (*n).into(),
                    unit: (*u).into(),
                    description: (*d).into(),
                })
                .collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn file_name(&self, format: Format) -> String {
        match format {
            Format::Csv => format!("{}.csv", self.name),
            Format::Json => format!("{}.json", self.name),
        }
    }

    pub fn write<W: Write>(&self, w: W, format: Format) -> Result<(), CliError> {
        match format {
            Format::Csv => {
                let mut out = csv::Writer::from_writer(w);
                out.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
                for row in &self.rows {
                    out.write_record(row.iter().map(Cell::render))?;
                }
                out.flush()?;
            }
            Format::Json => {
                let rows: Vec<Vec<serde_json::Value>> =
                    self.rows.iter().map(|r| r.iter().map(Cell::json).collect()).collect();
                let doc = serde_json::json!({ "columns": self.columns, "rows": rows });
                serde_json::to_writer_pretty(w, &doc)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub table: String,
    pub file: String,
    pub rows: usize,
    pub columns: Vec<Column>,
}

/// Metadata of one run; sufficient to repeat it with `condent rerun`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRecord {
    pub command: String,
    pub parameters: Command,
    /// The system configuration as parsed, when the command takes one.
    pub system: Option<serde_json::Value>,
    pub versions: Versions,
    pub created_unix_seconds: u64,
    pub format: Format,
    pub outputs: Vec<OutputFile>,
    /// Command-level verdict, for commands that check tolerances.
    pub passed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub condent: String,
    pub record_schema: u32,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            condent: env!("CARGO_PKG_VERSION").into(),
            record_schema: 1,
        }
    }
}

pub struct RunResult {
    pub tables: Vec<Table>,
    pub passed: Option<bool>,
}

pub const MANIFEST: &str = "manifest.json";

/// Writes the tables and the manifest to `dir`, or the tables to stdout.
pub fn emit(
    command: &Command,
    system: Option<serde_json::Value>,
    result: &RunResult,
    format: Format,
    dir: Option<&Path>,
) -> Result<Option<PathBuf>, CliError> {
    let Some(dir) = dir else {
        let stdout = std::io::stdout();
        for (k, table) in result.tables.iter().enumerate() {
            let mut lock = stdout.lock();
            if k > 0 {
                writeln!(lock)?;
            }
            writeln!(lock, "# {}", table.name)?;
            table.write(&mut lock, format)?;
            if format == Format::Json {
                writeln!(lock)?;
            }
        }
        return Ok(None);
    };
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Usage(format!("cannot create output directory {}: {e}", dir.display())))?;
    let mut outputs = Vec::new();
    for table in &result.tables {
        let file = table.file_name(format);
        let handle = std::fs::File::create(dir.join(&file))?;
        table.write(std::io::BufWriter::new(handle), format)?;
        outputs.push(OutputFile {
            table: table.name.clone(),
            file,
            rows: table.rows.len(),
            columns: table.columns.clone(),
        });
    }
    let record = ResultRecord {
        command: command.name().into(),
        parameters: command.clone(),
        system,
        versions: Versions::current(),
        created_unix_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        format,
        outputs,
        passed: result.passed,
    };
    let path = dir.join(MANIFEST);
    std::fs::write(&path, serde_json::to_string_pretty(&record)?)?;
    Ok(Some(path))
}

pub fn load_record(path: &Path) -> Result<ResultRecord, CliError> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read manifest {}: {e}", path.display())))?;
    condent::config::parse_json(&src).map_err(CliError::from)
}
