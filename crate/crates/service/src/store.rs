//! File snapshots: `<dir>/<session id>.json`, rewritten after every change.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::session::{Session, SessionFile};

fn session_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.json"))
}

/// Writes through a temporary file so a crash never leaves a torn snapshot.
pub fn save(dir: &Path, session: &Session) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let text = serde_json::to_string_pretty(&session.to_file()).map_err(io::Error::other)?;
    let tmp = dir.join(format!(".{}.json.tmp", session.id));
    fs::write(&tmp, text)?;
    fs::rename(tmp, session_path(dir, &session.id))
}

#[derive(Debug)]
pub struct Skipped {
    pub path: PathBuf,
    pub reason: String,
}

/// Loads every snapshot in `dir`. Unreadable or inconsistent files are
/// skipped and reported; a missing directory holds no sessions.
pub fn restore(dir: &Path) -> (Vec<Session>, Vec<Skipped>) {
    let mut sessions = Vec::new();
    let mut skipped = Vec::new();
    let entries = match fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return (sessions, skipped),
        Err(e) => {
            skipped.push(Skipped {
                path: dir.to_path_buf(),
                reason: e.to_string(),
            });
            return (sessions, skipped);
        }
    };
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .filter(|p| {
            !p.file_name()
                .is_some_and(|n| n.to_string_lossy().starts_with('.'))
        })
        .collect();
    paths.sort();
    for path in paths {
        let loaded = fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|t| serde_json::from_str::<SessionFile>(&t).map_err(|e| e.to_string()))
            .and_then(|f| Session::from_file(&f).map_err(|e| e.to_string()));
        match loaded {
            Ok(s) => sessions.push(s),
            Err(reason) => {
                tracing::error!(path = %path.display(), %reason, "session snapshot skipped");
                skipped.push(Skipped { path, reason });
            }
        }
    }
    (sessions, skipped)
}
