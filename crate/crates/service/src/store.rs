//! Append-only, file-backed log store.
//!
//! Layout under the store root:
//!
//! ```text
//! stimuli.json          stimulus definitions
//! assignments.jsonl     one TaskAssignment per line
//! charts.jsonl          one CodeChart per line
//! logs/<interface>.jsonl  one LogEnvelope per line
//! ```
//!
//! All writes go through one mutex, so each file has a single writer.
//! Readers parse the files, which makes every result a replay of the log.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use attnlab_core::codecharts::CodeChart;
use attnlab_core::quality::Interface;
use attnlab_core::Stimulus;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::assignment::TaskAssignment;
use crate::error::ServiceError;
use crate::wire::{validate_payload, Payload};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogEnvelope {
    pub assignment_id: String,
    pub participant_id: String,
    pub submission_id: String,
    pub interface: Interface,
    pub payload: Payload,
    /// Milliseconds since the Unix epoch.
    pub received_at: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IngestOutcome {
    Stored,
    Duplicate,
}

/// What the store keeps in memory: everything except the logs themselves.
#[derive(Debug, Default)]
struct Index {
    stimuli: BTreeMap<String, Stimulus>,
    charts: HashMap<String, CodeChart>,
    assignments: HashMap<String, TaskAssignment>,
    submissions: HashSet<String>,
}

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    index: Mutex<Index>,
}

impl Store {
    /// Creates a store for a stimulus set. Fails if one already exists at `root`.
    pub fn create(root: impl Into<PathBuf>, stimuli: &[Stimulus]) -> Result<Self, ServiceError> {
        let root = root.into();
        if root.join("stimuli.json").exists() {
            return Err(ServiceError::Config(format!("a store already exists at {}", root.display())));
        }
        let mut seen = HashSet::new();
        for s in stimuli {
            s.validate()?;
            if !seen.insert(&s.id) {
                return Err(ServiceError::Config(format!("duplicate stimulus id `{}`", s.id)));
            }
        }
        fs::create_dir_all(root.join("logs"))?;
        fs::write(root.join("stimuli.json"), serde_json::to_vec_pretty(stimuli)?)?;
        Self::open(root)
    }

    pub fn open(root: impl Into<PathBuf>) -> Result<Self, ServiceError> {
        let root = root.into();
        let stimuli: Vec<Stimulus> = serde_json::from_slice(&fs::read(root.join("stimuli.json"))?)?;
        let mut index = Index {
            stimuli: stimuli.into_iter().map(|s| (s.id.clone(), s)).collect(),
            ..Index::default()
        };
        for a in read_jsonl::<TaskAssignment>(&root.join("assignments.jsonl"))? {
            index.assignments.insert(a.assignment_id.clone(), a);
        }
        for c in read_jsonl::<CodeChart>(&root.join("charts.jsonl"))? {
            index.charts.insert(c.chart_id.clone(), c);
        }
        for interface in Interface::ALL {
            for e in read_jsonl::<LogEnvelope>(&log_path(&root, interface))? {
                index.submissions.insert(e.submission_id);
            }
        }
        Ok(Store {
            root,
            index: Mutex::new(index),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn index(&self) -> std::sync::MutexGuard<'_, Index> {
        self.index.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn stimuli(&self) -> Vec<Stimulus> {
        self.index().stimuli.values().cloned().collect()
    }

    pub fn stimulus(&self, id: &str) -> Option<Stimulus> {
        self.index().stimuli.get(id).cloned()
    }

    pub fn chart(&self, id: &str) -> Option<CodeChart> {
        self.index().charts.get(id).cloned()
    }

    pub fn charts(&self) -> HashMap<String, CodeChart> {
        self.index().charts.clone()
    }

    pub fn assignment(&self, id: &str) -> Option<TaskAssignment> {
        self.index().assignments.get(id).cloned()
    }

    pub fn assignment_count(&self) -> usize {
        self.index().assignments.len()
    }

    /// Records an assignment and its charts. Registering the same
    /// assignment again is a no-op.
    pub fn register_assignment(&self, assignment: &TaskAssignment, charts: &[CodeChart]) -> Result<(), ServiceError> {
        let mut index = self.index();
        if index.assignments.contains_key(&assignment.assignment_id) {
            return Ok(());
        }
        for t in &assignment.trials {
            if !index.stimuli.contains_key(&t.stimulus_id) {
                return Err(ServiceError::not_found("stimulus", &t.stimulus_id));
            }
        }
        let mut lines = Vec::new();
        for c in charts {
            lines.extend(serde_json::to_vec(c)?);
            lines.push(b'\n');
        }
        append(&self.root.join("charts.jsonl"), &lines)?;
        let mut line = serde_json::to_vec(assignment)?;
        line.push(b'\n');
        append(&self.root.join("assignments.jsonl"), &line)?;
        for c in charts {
            index.charts.insert(c.chart_id.clone(), c.clone());
        }
        index.assignments.insert(assignment.assignment_id.clone(), assignment.clone());
        Ok(())
    }

    /// Validates and appends one submission.
    pub fn ingest(&self, payload: Payload, received_at: u64) -> Result<IngestOutcome, ServiceError> {
        let mut index = self.index();
        let assignment = index
            .assignments
            .get(payload.assignment_id())
            .ok_or_else(|| ServiceError::not_found("assignment", payload.assignment_id()))?;
        if assignment.interface != payload.interface() {
            return Err(ServiceError::invalid(
                "interface",
                format!("assignment is for {}", assignment.interface),
            ));
        }
        if index.submissions.contains(payload.submission_id()) {
            return Ok(IngestOutcome::Duplicate);
        }
        for (i, id) in payload.stimulus_ids().into_iter().enumerate() {
            if !assignment.trials.iter().any(|t| t.stimulus_id == id) {
                let path = match payload {
                    Payload::Codecharts(_) => format!("trials[{i}].stimulus_id"),
                    _ => "stimulus_id".into(),
                };
                return Err(ServiceError::invalid(path, format!("`{id}` is not part of the assignment")));
            }
        }
        validate_payload(&payload, |id| index.stimuli.get(id), |id| index.charts.get(id))?;

        let envelope = LogEnvelope {
            assignment_id: payload.assignment_id().to_owned(),
            participant_id: payload.participant_id().to_owned(),
            submission_id: payload.submission_id().to_owned(),
            interface: payload.interface(),
            payload,
            received_at,
        };
        let mut line = serde_json::to_vec(&envelope)?;
        line.push(b'\n');
        append(&log_path(&self.root, envelope.interface), &line)?;
        index.submissions.insert(envelope.submission_id);
        Ok(IngestOutcome::Stored)
    }

    /// Every stored submission for one interface, in arrival order.
    pub fn logs(&self, interface: Interface) -> Result<Vec<LogEnvelope>, ServiceError> {
        let _guard = self.index();
        read_jsonl(&log_path(&self.root, interface))
    }
}

fn log_path(root: &Path, interface: Interface) -> PathBuf {
    root.join("logs").join(format!("{interface}.jsonl"))
}

fn append(path: &Path, bytes: &[u8]) -> Result<(), ServiceError> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(bytes)?;
    f.flush()?;
    Ok(())
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, ServiceError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::build_assignment;
    use crate::config::ServiceConfig;
    use crate::wire::{BubbleViewPayload, ClickEvent};
    use attnlab_core::heatmaps::BubbleTask;
    use attnlab_core::StimulusKind;

    fn payload(a: &TaskAssignment, submission: &str) -> Payload {
        Payload::Bubbleview(BubbleViewPayload {
            assignment_id: a.assignment_id.clone(),
            participant_id: "p".into(),
            submission_id: submission.into(),
            stimulus_id: "s".into(),
            clicks: vec![ClickEvent { t_ms: 0.0, x: 1.0, y: 1.0 }],
            description: None,
            task: BubbleTask::FreeView,
        })
    }

    #[test]
    fn reopened_store_remembers_submissions() {
        let dir = tempfile::tempdir().unwrap();
        let stimuli = [Stimulus::new("s", 8, 8, StimulusKind::Natural)];
        let store = Store::create(dir.path(), &stimuli).unwrap();
        assert!(Store::create(dir.path(), &stimuli).is_err());
        let (a, charts) = build_assignment(Interface::Bubbleview, &stimuli, &ServiceConfig::default(), 1).unwrap();
        store.register_assignment(&a, &charts).unwrap();
        store.register_assignment(&a, &charts).unwrap();
        assert_eq!(store.ingest(payload(&a, "x1"), 5).unwrap(), IngestOutcome::Stored);
        drop(store);

        let store = Store::open(dir.path()).unwrap();
        assert_eq!(store.assignment_count(), 1);
        assert_eq!(store.ingest(payload(&a, "x1"), 6).unwrap(), IngestOutcome::Duplicate);
        assert_eq!(store.ingest(payload(&a, "x2"), 7).unwrap(), IngestOutcome::Stored);
        let logs = store.logs(Interface::Bubbleview).unwrap();
        assert_eq!(logs.iter().map(|e| e.received_at).collect::<Vec<_>>(), [5, 7]);
    }

    #[test]
    fn wrong_interface_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let stimuli = [Stimulus::new("s", 8, 8, StimulusKind::Natural)];
        let store = Store::create(dir.path(), &stimuli).unwrap();
        let (a, _) = build_assignment(Interface::Zoommaps, &stimuli, &ServiceConfig::default(), 1).unwrap();
        store.register_assignment(&a, &[]).unwrap();
        let err = store.ingest(payload(&a, "x1"), 0).unwrap_err();
        assert!(matches!(err, ServiceError::Invalid { ref path, .. } if path == "interface"));
    }

    #[test]
    fn duplicate_stimulus_ids_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let s = Stimulus::new("s", 8, 8, StimulusKind::Natural);
        assert!(matches!(Store::create(dir.path(), &[s.clone(), s]), Err(ServiceError::Config(_))));
    }
}
