//! Run manifests: every file output gets a sibling `<file>.manifest`
//! recording the fully resolved invocation, so any published number can
//! be regenerated byte-for-byte.

use std::io::Write;
use std::path::Path;
use std::time::Duration;

use crate::CliError;

pub struct RunManifest {
    pub subcommand: String,
    /// Fully resolved argument vector (everything after the binary name),
    /// one entry per token; re-running the binary with exactly these
    /// arguments reproduces the output bytes.
    pub argv: Vec<String>,
    pub seed: u64,
    pub output: String,
    pub duration: Duration,
}

impl RunManifest {
    pub fn write_next_to(&self, output_path: &Path) -> Result<(), CliError> {
        let manifest_path = manifest_path_for(output_path);
        let mut text = String::new();
        text.push_str("# run manifest; re-run with the argv_* tokens to reproduce the output\n");
        text.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
        text.push_str(&format!("subcommand = {}\n", self.subcommand));
        for (i, arg) in self.argv.iter().enumerate() {
            text.push_str(&format!("argv_{i} = {arg}\n"));
        }
        text.push_str(&format!("seed = {}\n", self.seed));
        text.push_str(&format!("output = {}\n", self.output));
        text.push_str(&format!("duration_ms = {}\n", self.duration.as_millis()));
        let mut file = std::fs::File::create(&manifest_path)
            .map_err(|e| CliError::io(format!("create {}: {e}", manifest_path.display())))?;
        file.write_all(text.as_bytes())
            .map_err(|e| CliError::io(format!("write {}: {e}", manifest_path.display())))?;
        Ok(())
    }
}

pub fn manifest_path_for(output_path: &Path) -> std::path::PathBuf {
    let mut os = output_path.as_os_str().to_os_string();
    os.push(".manifest");
    os.into()
}
