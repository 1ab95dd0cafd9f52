//! Drives an external transcoder given as a command template.

use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::MediaError;

const STDERR_TAIL: usize = 2000;

/// `command` is split like a POSIX shell line, then `{input}`, `{height}`
/// and `{outdir}` are substituted inside each word. The command must write
/// the segments of one rendition into `{outdir}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcoder {
    pub command: String,
    pub timeout: Duration,
}

impl Transcoder {
    pub fn new(command: impl Into<String>, timeout: Duration) -> Result<Self, MediaError> {
        let t = Transcoder { command: command.into(), timeout };
        t.words()?;
        Ok(t)
    }

    fn words(&self) -> Result<Vec<String>, MediaError> {
        let words = shell_words::split(&self.command).map_err(|e| MediaError::BadCommand(e.to_string()))?;
        if words.is_empty() {
            return Err(MediaError::BadCommand("empty command".into()));
        }
        Ok(words)
    }

    /// The argv for one rendition.
    pub fn argv(&self, input: &Path, height: u32, outdir: &Path) -> Result<Vec<String>, MediaError> {
        let (input, outdir, height) = (input.to_string_lossy(), outdir.to_string_lossy(), height.to_string());
        Ok(self
            .words()?
            .into_iter()
            .map(|w| w.replace("{input}", &input).replace("{height}", &height).replace("{outdir}", &outdir))
            .collect())
    }

    /// Run once for `height`, killing the process after the timeout.
    pub fn run(&self, input: &Path, height: u32, outdir: &Path) -> Result<(), MediaError> {
        let argv = self.argv(input, height, outdir)?;
        let mut child = Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| MediaError::TranscoderFailed { code: None, stderr_tail: format!("cannot start `{}`: {e}", argv[0]) })?;
        let mut stderr = child.stderr.take().expect("piped stderr");
        let reader = thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = stderr.read_to_end(&mut buf);
            buf
        });

        let started = Instant::now();
        let status = loop {
            if let Some(status) = child.try_wait()? {
                break Some(status);
            }
            if started.elapsed() >= self.timeout {
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
            thread::sleep(Duration::from_millis(10));
        };
        let err = reader.join().unwrap_or_default();
        let tail = tail(&err);
        match status {
            Some(s) if s.success() => Ok(()),
            Some(s) => Err(MediaError::TranscoderFailed { code: s.code(), stderr_tail: tail }),
            None => Err(MediaError::TranscoderFailed {
                code: None,
                stderr_tail: format!("timed out after {:?}; {tail}", self.timeout),
            }),
        }
    }
}

fn tail(bytes: &[u8]) -> String {
    let s = String::from_utf8_lossy(bytes);
    let s = s.trim_end();
    let start = s.len().saturating_sub(STDERR_TAIL);
    let start = (start..=s.len()).find(|i| s.is_char_boundary(*i)).unwrap_or(s.len());
    s[start..].to_owned()
}
