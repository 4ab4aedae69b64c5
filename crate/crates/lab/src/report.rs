//! Append-only JSON-lines reports, witness files and CSV projections.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::experiments::RatioRecord;
use crate::Result;

pub const REPORT_DIR_ENV: &str = "DYVAR_REPORT_DIR";

#[derive(Debug, Clone)]
pub struct ReportStore {
    dir: PathBuf,
}

impl ReportStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ReportStore { dir: dir.into() }
    }

    /// `$DYVAR_REPORT_DIR`, or `./reports`.
    pub fn from_env() -> Self {
        Self::new(std::env::var_os(REPORT_DIR_ENV).map_or_else(|| PathBuf::from("reports"), PathBuf::from))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        Ok(self.dir.join(name))
    }

    /// Appends one JSON line to `<name>.jsonl`.
    pub fn append<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let path = self.path(&format!("{name}.jsonl"))?;
        let mut file = OpenOptions::new().create(true).append(true).open(&path)?;
        let mut line = serde_json::to_string(value)?;
        line.push('\n');
        file.write_all(line.as_bytes())?;
        Ok(path)
    }

    /// Writes `<name>.json`, replacing any previous content.
    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let path = self.path(&format!("{name}.json"))?;
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }

    /// Writes ratio records to `<name>.csv`, sorted by digest.
    pub fn export_ratios(&self, name: &str, records: &[RatioRecord]) -> Result<PathBuf> {
        let path = self.path(&format!("{name}.csv"))?;
        let mut sorted: Vec<&RatioRecord> = records.iter().collect();
        sorted.sort_by(|a, b| a.digest.cmp(&b.digest).then_with(|| a.tag.cmp(&b.tag)));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["digest", "seed", "var_mf", "var_f", "ratio", "tag"])?;
        for r in sorted {
            w.write_record([
                r.digest.clone(),
                r.seed.map(|s| s.to_string()).unwrap_or_default(),
                dyvar_core::exact::format(&r.var_mf),
                dyvar_core::exact::format(&r.var_f),
                dyvar_core::exact::format(&r.ratio),
                r.tag.clone(),
            ])?;
        }
        w.flush()?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dyvar_core::exact::{int, ratio};

    #[test]
    fn append_and_export() {
        let dir = tempfile::tempdir().unwrap();
        let store = ReportStore::new(dir.path().join("nested"));
        store.append("log", &serde_json::json!({"a": 1})).unwrap();
        let p = store.append("log", &serde_json::json!({"a": 2})).unwrap();
        assert_eq!(fs::read_to_string(p).unwrap(), "{\"a\":1}\n{\"a\":2}\n");

        let rec = |digest: &str| RatioRecord {
            digest: digest.into(),
            seed: Some(3),
            var_mf: int(5),
            var_f: int(4),
            ratio: ratio(5, 4),
            tag: "t".into(),
        };
        let p = store.export_ratios("r", &[rec("b"), rec("a")]).unwrap();
        let text = fs::read_to_string(p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "digest,seed,var_mf,var_f,ratio,tag");
        assert_eq!(lines[1], "a,3,5,4,5/4,t");
    }
}
