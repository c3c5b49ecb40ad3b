//! File-backed workspace: models, assessments and per-assessment score
//! history under one directory.
//!
//! ```text
//! <root>/
//!   .twinmat.lock            advisory single-writer lock
//!   models/<id>@<version>.json
//!   assessments/<ulid>.json
//!   history/<ulid>.jsonl     one score report per line, append-only
//! ```
//!
//! Documents are replaced atomically (temp file, fsync, rename). History
//! lines are appended with a single write; a torn final line left by a
//! crash is ignored on read.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions, TryLockError};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::SystemTime;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use ulid::{Generator, Ulid};

use crate::error::{Error, Result};
use crate::schema::{builtin_paper_model, load_model, serialize_model, MaturityModel, ModelRef};
use crate::scorer::{validate_assessment, Assessment, ScoreReport};

const LOCK_FILE: &str = ".twinmat.lock";

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FixedClock(pub DateTime<Utc>);

impl Clock for FixedClock {
    fn now(&self) -> DateTime<Utc> {
        self.0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssessmentFilter {
    #[serde(default)]
    pub model: Option<ModelRef>,
    #[serde(default)]
    pub subject: Option<String>,
    #[serde(default)]
    pub rater: Option<String>,
}

impl AssessmentFilter {
    fn matches(&self, a: &Assessment) -> bool {
        self.model.as_ref().is_none_or(|m| &a.model_ref == m)
            && self.subject.as_ref().is_none_or(|s| &a.subject.name == s)
            && self
                .rater
                .as_ref()
                .is_none_or(|r| a.rater.as_ref() == Some(r))
    }
}

/// One line of a history log: a score report stamped with its assessment
/// and the time it was recorded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub assessment_id: String,
    pub recorded_at: DateTime<Utc>,
    #[serde(flatten)]
    pub report: ScoreReport,
}

pub struct Workspace {
    root: PathBuf,
    models: RwLock<BTreeMap<ModelRef, MaturityModel>>,
    ids: Mutex<Generator>,
    clock: Arc<dyn Clock>,
    lock: Option<File>,
}

impl std::fmt::Debug for Workspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Workspace")
            .field("root", &self.root)
            .field("writer", &self.lock.is_some())
            .finish()
    }
}

impl Workspace {
    /// Open for reading only. Creates nothing.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        Self::open_inner(root.into(), false, Arc::new(SystemClock))
    }

    /// Open as the single writer, creating the layout if needed.
    pub fn open_writer(root: impl Into<PathBuf>) -> Result<Self> {
        Self::open_inner(root.into(), true, Arc::new(SystemClock))
    }

    pub fn open_writer_with_clock(root: impl Into<PathBuf>, clock: Arc<dyn Clock>) -> Result<Self> {
        Self::open_inner(root.into(), true, clock)
    }

    fn open_inner(root: PathBuf, writer: bool, clock: Arc<dyn Clock>) -> Result<Self> {
        let lock = if writer {
            for dir in ["models", "assessments", "history"] {
                fs::create_dir_all(root.join(dir))?;
            }
            let file = OpenOptions::new()
                .create(true)
                .truncate(false)
                .write(true)
                .open(root.join(LOCK_FILE))?;
            match file.try_lock() {
                Ok(()) => {}
                Err(TryLockError::WouldBlock) => {
                    return Err(Error::LockHeld(root.display().to_string()))
                }
                Err(TryLockError::Error(e)) => return Err(e.into()),
            }
            Some(file)
        } else {
            None
        };

        let mut models = BTreeMap::new();
        let builtin = builtin_paper_model();
        models.insert(builtin.model_ref(), builtin);
        let model_dir = root.join("models");
        if model_dir.is_dir() {
            let mut paths: Vec<_> = fs::read_dir(&model_dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            paths.sort();
            for path in paths {
                let model = load_model(&fs::read_to_string(&path)?)?;
                models.insert(model.model_ref(), model);
            }
        }

        Ok(Self {
            root,
            models: RwLock::new(models),
            ids: Mutex::new(Generator::new()),
            clock,
            lock,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn is_writer(&self) -> bool {
        self.lock.is_some()
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.clock.now()
    }

    fn require_writer(&self) -> Result<()> {
        if self.is_writer() {
            Ok(())
        } else {
            Err(Error::Storage(io::Error::new(
                io::ErrorKind::PermissionDenied,
                "workspace opened read-only",
            )))
        }
    }

    pub fn models(&self) -> Vec<MaturityModel> {
        self.models.read().unwrap().values().cloned().collect()
    }

    pub fn model(&self, r: &ModelRef) -> Result<MaturityModel> {
        self.models
            .read()
            .unwrap()
            .get(r)
            .cloned()
            .ok_or_else(|| Error::UnknownModel {
                id: r.id.clone(),
                version: r.version.clone(),
            })
    }

    pub fn put_model(&self, model: &MaturityModel) -> Result<()> {
        self.require_writer()?;
        let text = serialize_model(model);
        // round through the loader so invalid models never reach disk
        let model = load_model(&text)?;
        let name = format!("{}@{}.json", model.id, model.version);
        if name.contains('/') || name.contains('\\') {
            return Err(Error::domain(
                "model id and version may not contain path separators",
            ));
        }
        write_atomic(&self.root.join("models").join(name), text.as_bytes())?;
        self.models
            .write()
            .unwrap()
            .insert(model.model_ref(), model);
        Ok(())
    }

    fn next_id(&self) -> Result<String> {
        let at: SystemTime = self.clock.now().into();
        let id = self
            .ids
            .lock()
            .unwrap()
            .generate_from_datetime(at)
            .map_err(|e| Error::Storage(io::Error::other(e.to_string())))?;
        Ok(id.to_string())
    }

    fn assessment_path(&self, id: &str) -> Result<PathBuf> {
        Ulid::from_string(id).map_err(|_| Error::NotFound(format!("assessment {id}")))?;
        Ok(self.root.join("assessments").join(format!("{id}.json")))
    }

    fn history_path(&self, id: &str) -> PathBuf {
        self.root.join("history").join(format!("{id}.jsonl"))
    }

    /// Store a new assessment under a fresh id and return the id.
    pub fn put_assessment(&self, a: &Assessment) -> Result<String> {
        self.require_writer()?;
        let model = self.model(&a.model_ref)?;
        validate_assessment(a, &model)?;
        let id = self.next_id()?;
        let mut stored = a.clone();
        stored.id = Some(id.clone());
        let text = serde_json::to_string_pretty(&stored).map_err(io::Error::other)?;
        write_atomic(&self.assessment_path(&id)?, text.as_bytes())?;
        Ok(id)
    }

    /// Replace the document of an existing assessment. History is kept.
    pub fn update_assessment(&self, id: &str, a: &Assessment) -> Result<()> {
        self.require_writer()?;
        let path = self.assessment_path(id)?;
        if !path.exists() {
            return Err(Error::NotFound(format!("assessment {id}")));
        }
        let model = self.model(&a.model_ref)?;
        validate_assessment(a, &model)?;
        let mut stored = a.clone();
        stored.id = Some(id.to_owned());
        let text = serde_json::to_string_pretty(&stored).map_err(io::Error::other)?;
        write_atomic(&path, text.as_bytes())
    }

    pub fn get_assessment(&self, id: &str) -> Result<Assessment> {
        let path = self.assessment_path(id)?;
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(Error::NotFound(format!("assessment {id}")))
            }
            Err(e) => return Err(e.into()),
        };
        Ok(serde_json::from_str(&text)?)
    }

    /// All matching assessments in id (creation) order.
    pub fn list_assessments(&self, filter: &AssessmentFilter) -> Result<Vec<Assessment>> {
        let dir = self.root.join("assessments");
        if !dir.is_dir() {
            return Ok(Vec::new());
        }
        let mut ids: Vec<String> = fs::read_dir(&dir)?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                let id = name.strip_suffix(".json")?;
                Ulid::from_string(id).ok().map(|_| id.to_owned())
            })
            .collect();
        ids.sort();
        let mut out = Vec::new();
        for id in ids {
            let a = self.get_assessment(&id)?;
            if filter.matches(&a) {
                out.push(a);
            }
        }
        Ok(out)
    }

    pub fn append_history(&self, id: &str, report: &ScoreReport) -> Result<HistoryEntry> {
        self.require_writer()?;
        self.get_assessment(id)?;
        let entry = HistoryEntry {
            assessment_id: id.to_owned(),
            recorded_at: self.clock.now(),
            report: report.clone(),
        };
        let mut line = serde_json::to_string(&entry).map_err(io::Error::other)?;
        line.push('\n');

        let path = self.history_path(id);
        let mut file = OpenOptions::new().create(true).append(true).open(&path)?;
        // drop a torn tail so the new record starts on its own line
        let len = file.metadata()?.len();
        if len > 0 {
            let existing = fs::read(&path)?;
            if existing.last() != Some(&b'\n') {
                let keep = existing
                    .iter()
                    .rposition(|b| *b == b'\n')
                    .map_or(0, |p| p + 1);
                drop(file);
                let f = OpenOptions::new().write(true).open(&path)?;
                f.set_len(keep as u64)?;
                f.sync_all()?;
                file = OpenOptions::new().append(true).open(&path)?;
            }
        }
        file.write_all(line.as_bytes())?;
        file.sync_all()?;
        Ok(entry)
    }

    /// History of one assessment in append order.
    pub fn read_history(&self, id: &str) -> Result<Vec<HistoryEntry>> {
        self.get_assessment(id)?;
        let text = match fs::read_to_string(self.history_path(id)) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let complete = text.ends_with('\n');
        let lines: Vec<&str> = text.lines().collect();
        let mut out = Vec::with_capacity(lines.len());
        for (i, line) in lines.iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str(line) {
                Ok(entry) => out.push(entry),
                Err(_) if !complete && i + 1 == lines.len() => break,
                Err(e) => return Err(e.into()),
            }
        }
        Ok(out)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .ok_or_else(|| io::Error::other("document path has no parent"))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    if let Ok(d) = File::open(dir) {
        let _ = d.sync_all();
    }
    Ok(())
}
