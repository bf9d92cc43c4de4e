//! Append-only event log per round, plus a snapshot rewritten after every
//! event. The log is the source of truth; snapshots are for humans and
//! external tools and are regenerated on load.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use candor_core::annotate::{AnnotationRound, RoundEvent};

use crate::error::ServiceError;

const LOG_SUFFIX: &str = ".events.jsonl";
const SNAPSHOT_SUFFIX: &str = ".snapshot.json";

#[derive(Debug, Clone)]
pub struct RoundStore {
    dir: PathBuf,
}

impl RoundStore {
    pub fn open(dir: &Path) -> Result<Self, ServiceError> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn log_path(&self, round_id: &str) -> PathBuf {
        self.dir.join(format!("{round_id}{LOG_SUFFIX}"))
    }

    pub fn snapshot_path(&self, round_id: &str) -> PathBuf {
        self.dir.join(format!("{round_id}{SNAPSHOT_SUFFIX}"))
    }

    pub fn append(&self, round_id: &str, event: &RoundEvent) -> Result<(), ServiceError> {
        let mut line = serde_json::to_string(event).expect("event serialize");
        line.push('\n');
        let mut f = OpenOptions::new().create(true).append(true).open(self.log_path(round_id))?;
        f.write_all(line.as_bytes())?;
        f.sync_data()?;
        Ok(())
    }

    pub fn write_snapshot(&self, round: &AnnotationRound) -> Result<(), ServiceError> {
        let path = self.snapshot_path(&round.round_id);
        let tmp = path.with_extension("json.tmp");
        let mut body = serde_json::to_string_pretty(round).expect("round serialize");
        body.push('\n');
        fs::write(&tmp, body)?;
        fs::rename(tmp, path)?;
        Ok(())
    }

    pub fn read_log(path: &Path) -> Result<Vec<RoundEvent>, ServiceError> {
        let mut events = Vec::new();
        for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let ev = serde_json::from_str(&line).map_err(|e| ServiceError::Log {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
            events.push(ev);
        }
        Ok(events)
    }

    /// Replays every log in the directory, sorted by file name.
    pub fn load_all(&self) -> Result<Vec<AnnotationRound>, ServiceError> {
        let mut logs: Vec<PathBuf> = fs::read_dir(&self.dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(LOG_SUFFIX)))
            .collect();
        logs.sort();
        let mut rounds = Vec::with_capacity(logs.len());
        for path in logs {
            let events = Self::read_log(&path)?;
            let round = AnnotationRound::replay(&events).map_err(|e| ServiceError::Log {
                path: path.clone(),
                line: 0,
                message: e.to_string(),
            })?;
            self.write_snapshot(&round)?;
            rounds.push(round);
        }
        Ok(rounds)
    }
}
