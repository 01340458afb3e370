//! Output helpers: deterministic CSV writing, check lines, run summaries.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::Serialize;

use crate::error::CliError;

/// One built-in assertion evaluated during a run.
#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckLine {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckLine {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// What a run produced: the verdict lines plus every file written.
#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub experiment: String,
    pub checks: Vec<CheckLine>,
    pub files: Vec<PathBuf>,
}

impl RunSummary {
    pub fn failed_checks(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

/// Collects the files an experiment writes under its output directory.
pub struct OutputCtx {
    dir: PathBuf,
    pub plots: bool,
    written: Mutex<Vec<PathBuf>>,
}

impl OutputCtx {
    pub fn new(dir: &Path, plots: bool) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(OutputCtx {
            dir: dir.to_path_buf(),
            plots,
            written: Mutex::new(Vec::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn into_files(self) -> Vec<PathBuf> {
        let mut files = self.written.into_inner().expect("no poisoned writers");
        files.sort();
        files
    }

    fn record(&self, path: PathBuf) -> PathBuf {
        self.written
            .lock()
            .expect("no poisoned writers")
            .push(path.clone());
        path
    }

    /// Write a CSV file; floats are formatted with the shortest round-trip
    /// representation, so reruns are byte-identical.
    pub fn csv<I>(&self, name: &str, header: &str, rows: I) -> Result<PathBuf, CliError>
    where
        I: IntoIterator<Item = String>,
    {
        let path = self.dir.join(name);
        let mut text = String::from(header);
        text.push('\n');
        for row in rows {
            text.push_str(&row);
            text.push('\n');
        }
        fs::write(&path, text)?;
        Ok(self.record(path))
    }

    /// Write a pretty-printed JSON report.
    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Config(format!("serialize {name}: {e}")))?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(self.record(path))
    }

    /// Write an already rendered file (plots).
    pub fn raw(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        Ok(self.record(path))
    }
}

/// `a` within `k` standard errors of `b`.
pub fn within(a: f64, b: f64, k: f64, se: f64) -> bool {
    (a - b).abs() < k * se
}

/// Shared float-to-CSV formatting (shortest round-trip).
pub fn fmt(v: f64) -> String {
    format!("{v}")
}
