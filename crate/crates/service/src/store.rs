//! Filesystem document store with compare-and-set revisions.
//!
//! Layout under the store root, one directory per document id:
//!
//! ```text
//! {id}/rev                  current revision number (the commit point)
//! {id}/revisions/{n}.json   every accepted revision
//! {id}/report.json          copy of the current revision
//! {id}/attachments/{name}   content-type and revision header, then bytes
//! {id}/.lock                advisory lock for writers
//! ```
//!
//! Every file is written to a temporary name and renamed into place.
//! Readers resolve `rev` first and then read the matching revision file,
//! so they only ever see committed documents.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("no document {0}")]
    NotFound(String),
    #[error("no attachment {name} on document {id}")]
    AttachmentNotFound { id: String, name: String },
    #[error("revision conflict: expected {expected}, current {current}")]
    Conflict { expected: u64, current: u64 },
    #[error("attachment {0} already exists in this revision")]
    AttachmentExists(String),
    #[error("invalid {what}: {value:?}")]
    InvalidName { what: &'static str, value: String },
    #[error("simulated crash before rename of {0}")]
    InjectedCrash(PathBuf),
    #[error("store I/O: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredDocument {
    pub id: String,
    pub revision: u64,
    pub json: String,
    /// Attachment name to content type.
    pub attachments: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredAttachment {
    pub content_type: String,
    /// Document revision current when the attachment was written.
    pub revision: u64,
    pub bytes: Vec<u8>,
}

/// Where the next `put` should stop as if the process died: the temporary
/// file is written, then removed, and the rename never happens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrashPoint {
    /// Before the new revision file is renamed into place.
    RevisionFile,
    /// After the revision file and the `report.json` copy are in place,
    /// before `rev` is updated.
    Commit,
}

pub struct Store {
    root: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
    crash: Mutex<Option<CrashPoint>>,
    tmp_counter: AtomicU64,
}

fn valid_name(s: &str, allow_dot: bool) -> bool {
    !s.is_empty()
        && s.len() <= 128
        && !s.starts_with('.')
        && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_' || (allow_dot && b == b'.'))
}

pub fn check_id(id: &str) -> Result<(), StoreError> {
    if valid_name(id, false) {
        Ok(())
    } else {
        Err(StoreError::InvalidName { what: "document id", value: id.into() })
    }
}

pub fn check_attachment_name(name: &str) -> Result<(), StoreError> {
    if valid_name(name, true) && !name.ends_with(".tmp") {
        Ok(())
    } else {
        Err(StoreError::InvalidName { what: "attachment name", value: name.into() })
    }
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Store { root, locks: Mutex::new(HashMap::new()), crash: Mutex::new(None), tmp_counter: AtomicU64::new(0) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Makes the next write stop at `point`.
    pub fn crash_next_put(&self, point: CrashPoint) {
        *self.crash.lock().unwrap() = Some(point);
    }

    fn dir(&self, id: &str) -> PathBuf {
        self.root.join(id)
    }

    fn with_lock<T>(&self, id: &str, create: bool, f: impl FnOnce(&Path) -> Result<T, StoreError>) -> Result<T, StoreError> {
        let local = Arc::clone(self.locks.lock().unwrap().entry(id.to_string()).or_default());
        let _guard = local.lock().unwrap();
        let dir = self.dir(id);
        if create {
            fs::create_dir_all(dir.join("revisions"))?;
            fs::create_dir_all(dir.join("attachments"))?;
        } else if !dir.join("rev").is_file() {
            return Err(StoreError::NotFound(id.into()));
        }
        let lock = OpenOptions::new().create(true).truncate(false).write(true).open(dir.join(".lock"))?;
        lock.lock()?;
        let out = f(&dir);
        let _ = lock.unlock();
        out
    }

    fn write_atomic(&self, target: &Path, bytes: &[u8], crash_here: bool) -> Result<(), StoreError> {
        let n = self.tmp_counter.fetch_add(1, Ordering::Relaxed);
        let tmp = target.with_file_name(format!(".{}.{}.{n}.tmp", target.file_name().unwrap().to_string_lossy(), std::process::id()));
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        drop(f);
        if crash_here {
            fs::remove_file(&tmp)?;
            return Err(StoreError::InjectedCrash(target.to_path_buf()));
        }
        fs::rename(&tmp, target)?;
        Ok(())
    }

    fn take_crash(&self) -> Option<CrashPoint> {
        self.crash.lock().unwrap().take()
    }

    fn current_revision(dir: &Path) -> Result<u64, StoreError> {
        match fs::read_to_string(dir.join("rev")) {
            Ok(s) => s.trim().parse().map_err(|_| StoreError::Io(io::Error::new(io::ErrorKind::InvalidData, format!("corrupt rev file in {}", dir.display())))),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(0),
            Err(e) => Err(e.into()),
        }
    }

    /// Writes a new revision if the current one is `expected` (0 for a new
    /// document). Returns the new revision.
    pub fn put(&self, id: &str, json: &str, expected: u64) -> Result<u64, StoreError> {
        check_id(id)?;
        if expected > 0 && !self.dir(id).join("rev").is_file() {
            return Err(StoreError::NotFound(id.into()));
        }
        self.with_lock(id, expected == 0, |dir| {
            let current = Self::current_revision(dir)?;
            if current != expected {
                return Err(StoreError::Conflict { expected, current });
            }
            let next = current + 1;
            let crash = self.take_crash();
            self.write_atomic(&dir.join("revisions").join(format!("{next}.json")), json.as_bytes(), crash == Some(CrashPoint::RevisionFile))?;
            self.write_atomic(&dir.join("report.json"), json.as_bytes(), false)?;
            self.write_atomic(&dir.join("rev"), format!("{next}\n").as_bytes(), crash == Some(CrashPoint::Commit))?;
            Ok(next)
        })
    }

    pub fn exists(&self, id: &str) -> bool {
        check_id(id).is_ok() && self.dir(id).join("rev").is_file()
    }

    pub fn revision(&self, id: &str) -> Result<u64, StoreError> {
        check_id(id)?;
        match Self::current_revision(&self.dir(id))? {
            0 => Err(StoreError::NotFound(id.into())),
            n => Ok(n),
        }
    }

    pub fn get(&self, id: &str) -> Result<StoredDocument, StoreError> {
        let revision = self.revision(id)?;
        let dir = self.dir(id);
        let json = fs::read_to_string(dir.join("revisions").join(format!("{revision}.json")))?;
        let mut attachments = BTreeMap::new();
        for name in self.attachment_names(id)? {
            let a = self.get_attachment(id, &name)?;
            attachments.insert(name, a.content_type);
        }
        Ok(StoredDocument { id: id.to_string(), revision, json, attachments })
    }

    /// Ids of every committed document, sorted.
    pub fn list(&self) -> Result<Vec<String>, StoreError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.root)? {
            let entry = entry?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if self.exists(&name) {
                ids.push(name);
            }
        }
        ids.sort();
        Ok(ids)
    }

    fn attachment_names(&self, id: &str) -> Result<Vec<String>, StoreError> {
        let mut names = Vec::new();
        match fs::read_dir(self.dir(id).join("attachments")) {
            Ok(rd) => {
                for e in rd {
                    let n = e?.file_name().to_string_lossy().into_owned();
                    if check_attachment_name(&n).is_ok() {
                        names.push(n);
                    }
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(e.into()),
        }
        names.sort();
        Ok(names)
    }

    /// Stores an attachment. A name may be reused only after the document
    /// has moved to a newer revision.
    pub fn put_attachment(&self, id: &str, name: &str, content_type: &str, bytes: &[u8]) -> Result<u64, StoreError> {
        check_id(id)?;
        check_attachment_name(name)?;
        let content_type = content_type.replace(['\n', '\r', '\t'], " ");
        self.with_lock(id, false, |dir| {
            let revision = Self::current_revision(dir)?;
            let path = dir.join("attachments").join(name);
            if let Ok(existing) = read_attachment(&path) {
                if existing.revision == revision {
                    return Err(StoreError::AttachmentExists(name.into()));
                }
            }
            let mut data = format!("{content_type}\t{revision}\n").into_bytes();
            data.extend_from_slice(bytes);
            self.write_atomic(&path, &data, false)?;
            Ok(revision)
        })
    }

    pub fn get_attachment(&self, id: &str, name: &str) -> Result<StoredAttachment, StoreError> {
        check_id(id)?;
        check_attachment_name(name)?;
        if !self.exists(id) {
            return Err(StoreError::NotFound(id.into()));
        }
        match read_attachment(&self.dir(id).join("attachments").join(name)) {
            Err(StoreError::Io(e)) if e.kind() == io::ErrorKind::NotFound => Err(StoreError::AttachmentNotFound { id: id.into(), name: name.into() }),
            other => other,
        }
    }
}

fn read_attachment(path: &Path) -> Result<StoredAttachment, StoreError> {
    let raw = fs::read(path)?;
    let bad = || StoreError::Io(io::Error::new(io::ErrorKind::InvalidData, format!("corrupt attachment {}", path.display())));
    let nl = raw.iter().position(|&b| b == b'\n').ok_or_else(bad)?;
    let header = std::str::from_utf8(&raw[..nl]).map_err(|_| bad())?;
    let (content_type, revision) = header.rsplit_once('\t').ok_or_else(bad)?;
    Ok(StoredAttachment { content_type: content_type.to_string(), revision: revision.parse().map_err(|_| bad())?, bytes: raw[nl + 1..].to_vec() })
}
