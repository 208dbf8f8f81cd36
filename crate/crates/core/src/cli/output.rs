//! Output collection and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ArgMatches;
use sha2::{Digest, Sha256};
use vernacular::{Error, Result};

pub(crate) const MANIFEST: &str = "manifest.txt";

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Everything a command produces, written in one go once it has succeeded.
pub(crate) struct Run {
    command: String,
    params: BTreeMap<String, String>,
    inputs: Vec<PathBuf>,
    outputs: Vec<(String, Vec<u8>)>,
}

impl Run {
    /// Records every resolved flag of the invocation except the output
    /// location and the config path (the config file is recorded as an
    /// input instead).
    pub(crate) fn new(name: &str, matches: &ArgMatches) -> Self {
        let mut params = BTreeMap::new();
        let cmd = super::command();
        let sub = cmd.find_subcommand(name).expect("known subcommand");
        for arg in sub.get_arguments() {
            let Some(long) = arg.get_long() else { continue };
            if matches!(long, "out-dir" | "config" | "help") {
                continue;
            }
            if let Some(values) = matches.get_raw(arg.get_id().as_str()) {
                let joined: Vec<String> = values.map(|v| v.to_string_lossy().into_owned()).collect();
                params.insert(long.to_string(), joined.join(","));
            }
        }
        let mut run = Run {
            command: name.to_string(),
            params,
            inputs: Vec::new(),
            outputs: Vec::new(),
        };
        if let Some(cfg) = matches.get_one::<PathBuf>("config") {
            run.input(cfg);
        }
        run
    }

    pub(crate) fn param(&mut self, key: &str, value: impl ToString) {
        self.params.insert(key.to_string(), value.to_string());
    }

    pub(crate) fn input(&mut self, path: &Path) {
        if !self.inputs.iter().any(|p| p == path) {
            self.inputs.push(path.to_path_buf());
        }
    }

    pub(crate) fn output(&mut self, name: &str, content: impl Into<Vec<u8>>) {
        self.outputs.push((name.to_string(), content.into()));
    }

    pub(crate) fn manifest(&self) -> Result<String> {
        let mut out = format!("command={}\nversion={}\n", self.command, env!("CARGO_PKG_VERSION"));
        for (k, v) in &self.params {
            out.push_str(&format!("param.{k}={v}\n"));
        }
        for p in &self.inputs {
            let bytes = fs::read(p).map_err(|e| Error::Io {
                path: p.display().to_string(),
                source: e,
            })?;
            out.push_str(&format!("input={} {}\n", sha256_hex(&bytes), p.display()));
        }
        for (name, bytes) in &self.outputs {
            out.push_str(&format!("output={} {name}\n", sha256_hex(bytes)));
        }
        Ok(out)
    }

    /// Writes the outputs and the manifest under `dir`, refusing to replace
    /// any input file.
    pub(crate) fn finish(self, dir: &Path) -> Result<()> {
        let manifest = self.manifest()?;
        let io = |p: &Path, e: std::io::Error| Error::Io {
            path: p.display().to_string(),
            source: e,
        };
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let inputs: Vec<PathBuf> = self.inputs.iter().filter_map(|p| p.canonicalize().ok()).collect();
        let names = self.outputs.iter().map(|(n, _)| n.as_str()).chain([MANIFEST]);
        for name in names {
            let target = dir.join(name);
            if let Ok(c) = target.canonicalize() {
                if inputs.contains(&c) {
                    return Err(Error::Validation(format!(
                        "output {} would overwrite an input",
                        target.display()
                    )));
                }
            }
        }
        for (name, bytes) in &self.outputs {
            let target = dir.join(name);
            fs::write(&target, bytes).map_err(|e| io(&target, e))?;
        }
        let target = dir.join(MANIFEST);
        fs::write(&target, manifest).map_err(|e| io(&target, e))
    }
}
