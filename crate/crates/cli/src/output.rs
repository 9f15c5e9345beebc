//! Output files: every file opens with a `# manifest:` line; numbers are
//! written round-trip safe.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Duration;

/// Name of the pinned orbit generator, recorded in every manifest.
pub const GENERATOR: &str = "chacha8/splitmix64";

/// 17 significant digits; `NaN`, `inf` and `-inf` spelled out.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

/// One subcommand's output directory.
pub struct OutputDir {
    dir: PathBuf,
    echo: String,
}

impl OutputDir {
    pub fn create(root: &Path, subcommand: &str, echo: &str) -> io::Result<OutputDir> {
        let dir = root.join(subcommand);
        fs::create_dir_all(&dir)?;
        Ok(OutputDir {
            dir,
            echo: echo.to_string(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    /// Writes `name` as CSV with the manifest line, then `header`, then `rows`.
    pub fn write_csv(&self, name: &str, header: &str, rows: impl IntoIterator<Item = String>) -> io::Result<PathBuf> {
        let mut text = format!("# manifest: {}\n{header}\n", self.echo);
        for row in rows {
            text.push_str(&row);
            text.push('\n');
        }
        let path = self.dir.join(name);
        fs::write(&path, text)?;
        Ok(path)
    }

    /// Writes `manifest.txt`; `error` records a run that stopped early.
    pub fn write_manifest(
        &self,
        wall: Duration,
        threads: Option<usize>,
        checks: &[Check],
        error: Option<&str>,
    ) -> io::Result<PathBuf> {
        let mut text = format!("# manifest: {}\n", self.echo);
        let _ = writeln!(text, "generator = {GENERATOR}");
        let _ = writeln!(text, "version = {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(text, "wall_clock_s = {:.3}", wall.as_secs_f64());
        let threads = threads.unwrap_or_else(rayon::current_num_threads);
        let _ = writeln!(text, "threads = {threads}");
        if let Some(e) = error {
            let _ = writeln!(text, "error = {e}");
        }
        for c in checks {
            let _ = writeln!(text, "{}", c.line());
        }
        let path = self.dir.join("manifest.txt");
        fs::write(&path, text)?;
        Ok(path)
    }
}
