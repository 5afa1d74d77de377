//! The append-only trial ledger: one JSON record per line, flushed after
//! every trial so an interrupted search resumes from the last written row.

use crate::error::{Error, Result};
use crate::strategy::StrategyConfig;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialStatus {
    Ok,
    Failed,
}

/// One search iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub config: StrategyConfig,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    pub status: TrialStatus,
    /// Elapsed seconds when timing was requested, 0.0 otherwise (timing is
    /// opt-in so default ledgers stay byte-reproducible).
    pub wall_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn ok(
        trial_id: u64,
        config: StrategyConfig,
        seed: u64,
        score: f64,
        wall_time: f64,
    ) -> Self {
        TrialRecord {
            trial_id,
            config,
            seed,
            score: Some(score),
            status: TrialStatus::Ok,
            wall_time,
            error: None,
        }
    }

    pub fn failed(
        trial_id: u64,
        config: StrategyConfig,
        seed: u64,
        error: String,
        wall_time: f64,
    ) -> Self {
        TrialRecord {
            trial_id,
            config,
            seed,
            score: None,
            status: TrialStatus::Failed,
            wall_time,
            error: Some(error),
        }
    }

    fn check(&self, path: &Path, line: usize) -> Result<()> {
        let consistent = match self.status {
            TrialStatus::Ok => self.score.is_some(),
            TrialStatus::Failed => self.score.is_none(),
        };
        if !consistent {
            return Err(Error::CorruptLedger {
                path: path.to_path_buf(),
                line,
                reason: "score must be present exactly when status is ok".into(),
            });
        }
        Ok(())
    }
}

/// A loaded ledger plus its backing file.
#[derive(Debug)]
pub struct Ledger {
    path: PathBuf,
    records: Vec<TrialRecord>,
}

impl Ledger {
    /// Parses an existing ledger file. Trial ids must be dense from 0.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: TrialRecord =
                serde_json::from_str(line).map_err(|e| Error::CorruptLedger {
                    path: path.to_path_buf(),
                    line: i + 1,
                    reason: e.to_string(),
                })?;
            record.check(path, i + 1)?;
            if record.trial_id != records.len() as u64 {
                return Err(Error::LedgerNotDense {
                    path: path.to_path_buf(),
                    row: i + 1,
                    found: record.trial_id,
                });
            }
            records.push(record);
        }
        Ok(Ledger {
            path: path.to_path_buf(),
            records,
        })
    }

    /// Loads the ledger if the file exists, otherwise starts an empty one.
    /// An unreadable existing file is an error, never a silent restart.
    pub fn load_or_new(path: &Path) -> Result<Self> {
        if path.exists() {
            Self::load(path)
        } else {
            Ok(Ledger {
                path: path.to_path_buf(),
                records: Vec::new(),
            })
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn records(&self) -> &[TrialRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Appends one record to the file and flushes it.
    pub fn append(&mut self, record: TrialRecord) -> Result<()> {
        assert_eq!(
            record.trial_id,
            self.records.len() as u64,
            "trial ids are assigned densely"
        );
        record.check(&self.path, self.records.len() + 1)?;
        if let Some(dir) = self.path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
        }
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| Error::io(&self.path, e))?;
        let line = serde_json::to_string(&record).map_err(|e| Error::json("trial record", e))?;
        writeln!(file, "{line}").map_err(|e| Error::io(&self.path, e))?;
        file.flush().map_err(|e| Error::io(&self.path, e))?;
        self.records.push(record);
        Ok(())
    }
}
