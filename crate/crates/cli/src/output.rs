use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use edgedist::Error as CoreError;
use serde_json::{json, Value};

#[derive(Debug)]
pub enum CliError {
    /// Bad parameters: exit 2.
    Usage(String),
    /// Solver or sampler failure: exit 3.
    Numerical(String),
    /// A verification threshold was exceeded: exit 1.
    Verify(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Numerical(_) => ExitCode::from(3),
            CliError::Verify(_) | CliError::Io(_) => ExitCode::from(1),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "invalid arguments: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Verify(m) => write!(f, "verification failed: {m}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidConfig(_) | CoreError::Capability { .. } | CoreError::Range { .. } => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// A finished result: the CSV body and its JSON mirror.
pub struct Report {
    pub csv: String,
    pub json: Value,
    pub seed: Option<u64>,
    /// Extra `#` lines for the CSV header.
    pub notes: Vec<String>,
    /// Set when the output is complete but a check did not pass.
    pub failure: Option<String>,
}

impl Report {
    pub fn new(csv: String, json: Value) -> Self {
        Self {
            csv,
            json,
            seed: None,
            notes: Vec::new(),
            failure: None,
        }
    }
}

pub fn render(report: &Report, args: &[String], as_json: bool) -> String {
    let version = env!("CARGO_PKG_VERSION");
    if as_json {
        let doc = json!({
            "program": "edgedist",
            "version": version,
            "args": args,
            "seed": report.seed,
            "notes": report.notes,
            "result": report.json,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
        s.push('\n');
        return s;
    }
    let mut s = String::new();
    let _ = writeln!(s, "# edgedist {version}");
    let _ = writeln!(s, "# args: {}", args.join(" "));
    if let Some(seed) = report.seed {
        let _ = writeln!(s, "# seed: {seed}");
    }
    for n in &report.notes {
        let _ = writeln!(s, "# {n}");
    }
    s.push_str(&report.csv);
    s
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn emit(text: &str, path: Option<&Path>) -> std::io::Result<()> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}
