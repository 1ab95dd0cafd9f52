//! Snapshot persistence of the platform state.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use crate::state::State;

pub trait Store: Send {
    fn load(&self) -> std::io::Result<Option<State>>;
    fn save(&mut self, state: &State) -> std::io::Result<()>;
}

/// Keeps nothing; state lives only in the running process.
#[derive(Default)]
pub struct MemoryStore;

impl Store for MemoryStore {
    fn load(&self) -> std::io::Result<Option<State>> {
        Ok(None)
    }

    fn save(&mut self, _: &State) -> std::io::Result<()> {
        Ok(())
    }
}

/// One JSON file, replaced atomically on every save.
pub struct FileStore {
    path: PathBuf,
}

impl FileStore {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        FileStore { path: path.into() }
    }
}

impl Store for FileStore {
    fn load(&self) -> std::io::Result<Option<State>> {
        match fs::read(&self.path) {
            Ok(bytes) => serde_json::from_slice(&bytes).map(Some).map_err(std::io::Error::other),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn save(&mut self, state: &State) -> std::io::Result<()> {
        if let Some(dir) = self.path.parent() {
            fs::create_dir_all(dir)?;
        }
        let tmp = self.path.with_extension("tmp");
        let mut f = fs::File::create(&tmp)?;
        serde_json::to_writer(&mut f, state).map_err(std::io::Error::other)?;
        f.flush()?;
        f.sync_all()?;
        fs::rename(tmp, &self.path)
    }
}
