use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    TabulaRasa,
    Pretrain,
    Finetune,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::TabulaRasa => "tabula_rasa",
            Phase::Pretrain => "pretrain",
            Phase::Finetune => "finetune",
        }
    }
}

/// One line of the JSONL event log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LogEvent {
    Step {
        phase: Phase,
        step: u64,
        actor: usize,
        action: usize,
        r_e: f64,
        /// Absent when novelty counting is off.
        r_i: Option<f64>,
        /// Reward the learner trained on.
        r_t: f64,
        reset: bool,
        done: bool,
    },
    Eval {
        phase: Phase,
        step: u64,
        returns: Vec<f64>,
    },
}

pub trait EventSink {
    fn record(&mut self, event: &LogEvent) -> Result<()>;

    /// Whether step events are wanted at all; lets the loop skip building them.
    fn wants_steps(&self) -> bool {
        true
    }

    fn flush(&mut self) -> Result<()> {
        Ok(())
    }
}

/// Discards everything.
pub struct NullSink;

impl EventSink for NullSink {
    fn record(&mut self, _: &LogEvent) -> Result<()> {
        Ok(())
    }

    fn wants_steps(&self) -> bool {
        false
    }
}

impl EventSink for Vec<LogEvent> {
    fn record(&mut self, event: &LogEvent) -> Result<()> {
        self.push(event.clone());
        Ok(())
    }
}

pub struct JsonlSink {
    path: PathBuf,
    out: BufWriter<File>,
}

impl JsonlSink {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        Ok(JsonlSink {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        })
    }
}

impl EventSink for JsonlSink {
    fn record(&mut self, event: &LogEvent) -> Result<()> {
        serde_json::to_writer(&mut self.out, event)?;
        self.out.write_all(b"\n").map_err(|e| Error::io(&self.path, e))
    }

    fn flush(&mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

pub fn read_events(path: &Path) -> Result<Vec<LogEvent>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}
