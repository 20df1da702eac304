//! Run manifests and output bookkeeping.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;

use crate::{Failure, Global};

#[derive(Debug, Serialize)]
pub struct ExperimentManifest {
    pub schema_version: &'static str,
    pub command: String,
    pub spectrum: Option<String>,
    pub seed: u64,
    pub parameters: BTreeMap<String, Value>,
    /// Output paths as given, relative to the output directory.
    pub outputs: Vec<String>,
    pub pass: bool,
    pub failures: Vec<String>,
}

/// Collects outputs of one command and writes its manifest.
pub struct Run<'a> {
    global: &'a Global,
    dir: Option<PathBuf>,
    manifest: ExperimentManifest,
}

impl<'a> Run<'a> {
    pub fn new(global: &'a Global, command: &str, spectrum: Option<&Path>) -> Self {
        Self::in_dir(global, command, spectrum, global.out_dir.clone())
    }

    pub fn in_dir(global: &'a Global, command: &str, spectrum: Option<&Path>, dir: Option<PathBuf>) -> Self {
        Self {
            global,
            dir,
            manifest: ExperimentManifest {
                schema_version: "1",
                command: command.to_string(),
                spectrum: spectrum.map(|p| p.display().to_string()),
                seed: global.seed,
                parameters: BTreeMap::new(),
                outputs: Vec::new(),
                pass: true,
                failures: Vec::new(),
            },
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("parameter serializes");
        self.manifest.parameters.insert(key.to_string(), v);
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        match &self.dir {
            Some(d) if path.is_relative() => d.join(path),
            _ => path.to_path_buf(),
        }
    }

    pub fn write(&mut self, path: &Path, contents: &str) -> Result<(), Failure> {
        let full = self.resolve(path);
        if let Some(parent) = full.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        fs::write(&full, contents).with_context(|| format!("writing {}", full.display()))?;
        self.manifest.outputs.push(path.display().to_string());
        Ok(())
    }

    pub fn write_json(&mut self, path: &Path, value: &impl Serialize) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(path, &text)
    }

    pub fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.manifest.pass = false;
            self.manifest.failures.push(what.into());
        }
    }

    pub fn say(&self, line: impl AsRef<str>) {
        if !self.global.quiet && !self.global.json {
            // A closed pipe must not stop the run before its files are written.
            let _ = writeln!(io::stdout().lock(), "{}", line.as_ref());
        }
    }

    pub fn print_json(&self, value: &impl Serialize) -> Result<(), Failure> {
        if self.global.json && !self.global.quiet {
            let _ = writeln!(io::stdout().lock(), "{}", serde_json::to_string_pretty(value)?);
        }
        Ok(())
    }

    /// Write the manifest (when there is an output directory) and turn
    /// recorded failures into the exit status.
    pub fn finish(self) -> Result<(), Failure> {
        if self.dir.is_some() {
            let text = serde_json::to_string_pretty(&self.manifest)? + "\n";
            let full = self.resolve(Path::new("manifest.json"));
            fs::write(&full, text).with_context(|| format!("writing {}", full.display()))?;
        }
        if self.manifest.pass {
            Ok(())
        } else {
            Err(Failure::Assertion(self.manifest.failures))
        }
    }
}
