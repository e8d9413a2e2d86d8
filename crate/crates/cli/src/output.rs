//! CSV writing. Numbers carry 12 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;

pub fn num(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v:.11e}")
    }
}

pub struct Csv {
    text: String,
}

impl Csv {
    /// Header comment with command, tool version and configuration hash.
    pub fn new(command: &str, config_hash: &str, columns: &[&str]) -> Self {
        let mut text = String::new();
        writeln!(
            text,
            "# ctdper {} {command} config_sha256={config_hash}",
            env!("CARGO_PKG_VERSION")
        )
        .unwrap();
        writeln!(text, "{}", columns.join(",")).unwrap();
        Csv { text }
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        let line: Vec<&str> = fields.iter().map(|f| f.as_ref()).collect();
        writeln!(self.text, "{}", line.join(",")).unwrap();
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, &self.text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
    }
}


/// Quote a free-text field if it needs it.
pub fn text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
