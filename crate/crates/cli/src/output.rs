//! Deterministic artifact writers. JSON objects carry the resolved config
//! under `"config"`; CSV files start with a `# config=<json>` line followed
//! by a header row. Keys are sorted and floats use the shortest round-trip
//! form, so identical inputs give identical bytes.

use std::path::{Path, PathBuf};

use ergolab_core::GridMeasure;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

/// Shortest round-trip form, with an exponent for very large or small values.
pub fn num(x: f64) -> String {
    serde_json::Value::from(x).to_string()
}

pub struct Outputs {
    dir: PathBuf,
    config: Value,
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: &Path, config: Value) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            config,
            written: Vec::new(),
        })
    }

    /// Writes `fields` plus the config as one pretty-printed object.
    pub fn json(&mut self, name: &str, fields: Value) -> CliResult<()> {
        let mut object = match fields {
            Value::Object(m) => m,
            other => {
                let mut m = Map::new();
                m.insert("result".into(), other);
                m
            }
        };
        object.insert("config".into(), self.config.clone());
        let mut text = serde_json::to_string_pretty(&Value::Object(object))?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn csv<I>(&mut self, name: &str, header: &str, rows: I) -> CliResult<()>
    where
        I: IntoIterator<Item = String>,
    {
        let mut text = format!(
            "# config={}\n{header}\n",
            serde_json::to_string(&self.config)?
        );
        for row in rows {
            text.push_str(&row);
            text.push('\n');
        }
        self.write(name, &text)
    }

    /// `cell,left,right,mass` for every grid cell.
    pub fn grid(&mut self, name: &str, grid: &GridMeasure) -> CliResult<()> {
        let k = grid.cells();
        let rows = grid.mass().iter().enumerate().map(|(i, &m)| {
            format!(
                "{i},{},{},{}",
                num(i as f64 / k as f64),
                num((i + 1) as f64 / k as f64),
                num(m)
            )
        });
        self.csv(name, "cell,left,right,mass", rows)
    }

    fn write(&mut self, name: &str, text: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(CliError::io(&path))?;
        self.written.push(path);
        Ok(())
    }

    pub fn finish(self) -> Vec<PathBuf> {
        self.written
    }
}
