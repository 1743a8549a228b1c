//! CSV tables and the run manifest.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

/// Reals are written with 17 significant digits in scientific notation.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub rows: u64,
}

pub struct Table {
    name: String,
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
    rows: u64,
}

impl Table {
    pub fn create(dir: &Path, name: &str, header: &[&str]) -> CliResult<Self> {
        let path = dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(BufWriter::new(file));
        writer.write_record(header).map_err(|e| CliError::csv(&path, e))?;
        Ok(Self { name: name.to_string(), path, writer, rows: 0 })
    }

    pub fn row<I, S>(&mut self, fields: I) -> CliResult<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(|e| CliError::csv(&self.path, e))?;
        self.rows += 1;
        Ok(())
    }

    pub fn finish(mut self) -> CliResult<OutputFile> {
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))?;
        Ok(OutputFile { file: self.name, rows: self.rows })
    }
}

/// Resolved configuration of a run, kept in flag order so it doubles as
/// the command line that reproduces the run.
#[derive(Debug, Default, Clone)]
pub struct Echo {
    entries: Vec<(String, Value, String)>,
}

impl Echo {
    pub fn flag(&mut self, name: &str, value: impl Into<Value>, text: impl ToString) -> &mut Self {
        self.entries.push((name.to_string(), value.into(), text.to_string()));
        self
    }

    pub fn config(&self) -> Value {
        let mut m = Map::new();
        for (k, v, _) in &self.entries {
            m.insert(k.clone(), v.clone());
        }
        Value::Object(m)
    }

    pub fn command_line(&self, subcommand: &str) -> Vec<String> {
        let mut argv = vec!["srpat".to_string(), subcommand.to_string()];
        for (k, _, text) in &self.entries {
            argv.push(format!("--{k}"));
            argv.push(text.clone());
        }
        argv.push("--out".into());
        argv.push("<out>".into());
        argv
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub command_line: Vec<String>,
    pub config: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<u32>,
    /// `SOURCE_DATE_EPOCH` when set; wall-clock time would break
    /// byte-identical reruns.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub outputs: Vec<OutputFile>,
}

impl Manifest {
    pub fn new(subcommand: &str, echo: &Echo, seed: Option<u64>, replicas: Option<u32>, outputs: Vec<OutputFile>) -> Self {
        let timestamp = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.trim().parse().ok());
        Self {
            tool: "srpat",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            command_line: echo.command_line(subcommand),
            config: echo.config(),
            seed,
            replicas,
            timestamp,
            outputs,
        }
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(self).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_carry_17_digits() {
        assert_eq!(real(1.0), "1.0000000000000000e0");
        assert_eq!(real(21.0 / 13.0), "1.6153846153846154e0");
        assert_eq!(real(-2.5e-7), "-2.4999999999999999e-7");
        let x = 0.1 + 0.2;
        assert_eq!(real(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn table_counts_rows() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::create(dir.path(), "x.csv", &["a", "b"]).unwrap();
        t.row(["1", "2"]).unwrap();
        t.row([String::from("3"), real(0.5)]).unwrap();
        let f = t.finish().unwrap();
        assert_eq!(f.rows, 2);
        let text = std::fs::read_to_string(dir.path().join("x.csv")).unwrap();
        assert_eq!(text, "a,b\n1,2\n3,5.0000000000000000e-1\n");
    }

    #[test]
    fn echo_rebuilds_command_line() {
        let mut e = Echo::default();
        e.flag("t-max", 10u64, 10).flag("sampler", "fast", "fast");
        assert_eq!(e.command_line("simulate"), ["srpat", "simulate", "--t-max", "10", "--sampler", "fast", "--out", "<out>"]);
        assert_eq!(e.config()["t-max"], 10);
    }
}
