use std::fs;
use std::path::{Path, PathBuf};

use conekernel::report::Report;
use serde::Serialize;

use crate::CliError;

/// Where a subcommand writes its artifacts: `<dir>/<stem>.json`, `.csv`,
/// `.svg`. `--out` may name a directory or the JSON report itself.
pub struct Outputs {
    dir: PathBuf,
    stem: String,
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(out: &Path, default_stem: &str) -> Result<Self, CliError> {
        let (dir, stem) = if out.extension().is_some_and(|e| e == "json") {
            let dir = out.parent().map(Path::to_path_buf).unwrap_or_default();
            let stem = out.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            (dir, stem)
        } else {
            (out.to_path_buf(), default_stem.to_string())
        };
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(&dir).map_err(|e| CliError::Config(format!("cannot create '{}': {e}", dir.display())))?;
        }
        Ok(Outputs {
            dir,
            stem,
            written: Vec::new(),
        })
    }

    fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}{suffix}", self.stem))
    }

    fn write(&mut self, suffix: &str, contents: &[u8]) -> Result<(), CliError> {
        let p = self.path(suffix);
        fs::write(&p, contents).map_err(|e| CliError::Failed(format!("cannot write '{}': {e}", p.display())))?;
        self.written.push(p);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, kind: &str, body: &T, passed: Option<bool>) -> Result<(), CliError> {
        let mut report = Report::new(kind, body);
        if let Some(p) = passed {
            report = report.with_outcome(p);
        }
        let text = report.to_json().map_err(|e| CliError::Failed(format!("cannot serialize report: {e}")))?;
        self.write(".json", text.as_bytes())
    }

    pub fn csv<R: Serialize>(&mut self, suffix: &str, rows: impl IntoIterator<Item = R>) -> Result<(), CliError> {
        let fail = |e: csv::Error| CliError::Failed(format!("cannot write CSV: {e}"));
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Failed(format!("cannot write CSV: {e}")))?;
        self.write(&format!("{suffix}.csv"), &bytes)
    }

    pub fn svg(&mut self, suffix: &str, svg: &str) -> Result<(), CliError> {
        self.write(&format!("{suffix}.svg"), svg.as_bytes())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_names_a_directory_or_the_report() {
        let dir = std::env::temp_dir().join(format!("conekernel-out-{}", std::process::id()));
        let o = Outputs::new(&dir.join("run.json"), "simulate").unwrap();
        assert_eq!(o.path(".json"), dir.join("run.json"));
        assert_eq!(o.path("_cells.csv"), dir.join("run_cells.csv"));
        let o = Outputs::new(&dir.join("nested"), "bound").unwrap();
        assert_eq!(o.path(".svg"), dir.join("nested").join("bound.svg"));
        assert!(dir.join("nested").is_dir());
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn csv_rows_get_a_header() {
        let dir = std::env::temp_dir().join(format!("conekernel-csv-{}", std::process::id()));
        let mut o = Outputs::new(&dir, "t").unwrap();
        #[derive(Serialize)]
        struct Row {
            x: f64,
            value: f64,
        }
        o.csv("", [Row { x: 0.5, value: 2.0 }]).unwrap();
        assert_eq!(fs::read_to_string(dir.join("t.csv")).unwrap(), "x,value\n0.5,2.0\n");
        assert_eq!(o.written().len(), 1);
        fs::remove_dir_all(&dir).unwrap();
    }
}
