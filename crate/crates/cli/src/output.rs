use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Fatal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    /// Per-query parse failure; `--lenient` turns it into a skip.
    Parse,
    Failure,
}

#[derive(Debug, Default)]
pub struct Outcome {
    lenient: bool,
    parse_failures: usize,
    failures: usize,
}

impl Outcome {
    pub fn new(lenient: bool) -> Self {
        Outcome { lenient, ..Outcome::default() }
    }

    pub fn report(&mut self, severity: Severity, item: &str, message: &str) {
        let label = match severity {
            Severity::Parse if self.lenient => "skipped",
            _ => "error",
        };
        eprintln!("{label}: {item}: {}", message.replace('\n', "\n    "));
        match severity {
            Severity::Parse => self.parse_failures += 1,
            Severity::Failure => self.failures += 1,
        }
    }

    pub fn exit_code(&self) -> u8 {
        if self.failures > 0 || (self.parse_failures > 0 && !self.lenient) {
            1
        } else {
            0
        }
    }
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Named outputs go to `--out` when given, otherwise `primary` goes to
/// standard output.
pub fn emit(out: Option<&Path>, files: &[(&str, &str)], primary: &str) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            for (name, contents) in files {
                write_atomic(&dir.join(name), contents.as_bytes())?;
            }
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(primary.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
            lock.flush().map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
        }
    }
    Ok(())
}
