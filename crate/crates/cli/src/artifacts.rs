//! Single writer for everything a run leaves in its output directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use kp_core::evolution::fmt_float;
use kp_core::{DiscreteOperator, SpectralField, Trajectory};
use serde::Serialize;

pub struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    /// Relative paths written so far, in write order.
    pub fn written(&self) -> &[String] {
        &self.written
    }

    fn open(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let file = File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(BufWriter::new(file))
    }

    pub fn trajectory(&mut self, name: &str, op: &DiscreteOperator, traj: &Trajectory) -> Result<()> {
        let mut w = self.open(name)?;
        traj.write_csv(op, &mut w).with_context(|| format!("writing {name}"))?;
        w.flush()?;
        Ok(())
    }

    /// Nodal values `x, u` on the operator's collocation grid.
    pub fn field(&mut self, name: &str, op: &DiscreteOperator, u: &SpectralField) -> Result<()> {
        let values = op.to_grid(u)?;
        let rows = op.grid().nodes().iter().zip(&values).map(|(x, v)| vec![*x, *v]);
        self.table(name, &["x", "u"], rows)
    }

    pub fn table(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(self.open(name)?);
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(|v| fmt_float(*v)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut w = self.open(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let mut w = self.open(name)?;
        w.write_all(body.as_bytes())?;
        w.flush()?;
        Ok(())
    }
}
