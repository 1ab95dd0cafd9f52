//! Command-line and environment configuration.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use framewise_media::Transcoder;

use crate::clock::SystemClock;
use crate::mail::{ConsoleMailer, Mailer, SendmailMailer};
use crate::platform::{Platform, Policy};
use crate::store::{FileStore, MemoryStore, Store};

#[derive(Parser, Debug)]
#[command(name = "framewise-server", version, about = "Group-based video annotation service")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the HTTP service.
    Serve(Serve),
    /// Create an active administrator account (password read from FRAMEWISE_ADMIN_PASSWORD or stdin).
    CreateAdmin {
        #[arg(long)]
        email: String,
    },
}

#[derive(Args, Debug)]
pub struct Common {
    /// Directory for uploaded media, documents and staging.
    #[arg(long, env = "FRAMEWISE_DATA_DIR", default_value = "./data", global = true)]
    pub data_dir: PathBuf,
    /// `file:<path>` for a JSON snapshot, or `memory` for no persistence.
    #[arg(long, env = "FRAMEWISE_DATABASE_URL", global = true)]
    pub database_url: Option<String>,
}

#[derive(Args, Debug)]
pub struct Serve {
    #[arg(long, env = "FRAMEWISE_LISTEN", default_value = "127.0.0.1:8080")]
    pub listen: String,
    /// `console`, or `sendmail:<command line>` such as `sendmail:sendmail -t`.
    #[arg(long, env = "FRAMEWISE_MAIL", default_value = "console")]
    pub mail: String,
    #[arg(long, env = "FRAMEWISE_MAIL_FROM", default_value = "framewise@localhost")]
    pub mail_from: String,
    /// Transcoder command template with {input}, {height} and {outdir}.
    /// Without one, uploads are served as is.
    #[arg(long, env = "FRAMEWISE_TRANSCODER")]
    pub transcoder: Option<String>,
    #[arg(long, env = "FRAMEWISE_TRANSCODE_TIMEOUT_SECS", default_value_t = 3600)]
    pub transcode_timeout_secs: u64,
    /// Force email two-factor login on or off, overriding the stored setting.
    #[arg(long, env = "FRAMEWISE_TWO_FACTOR")]
    pub two_factor: Option<bool>,
    #[arg(long, env = "FRAMEWISE_TOKEN_MAX_HOURS", default_value_t = 720)]
    pub token_max_hours: i64,
    #[arg(long, env = "FRAMEWISE_INGEST_WORKERS", default_value_t = 2)]
    pub ingest_workers: usize,
}

impl Common {
    pub fn store(&self) -> Result<Box<dyn Store>, String> {
        match self.database_url.as_deref() {
            None => Ok(Box::new(FileStore::new(self.data_dir.join("state.json")))),
            Some("memory") | Some(":memory:") => Ok(Box::new(MemoryStore)),
            Some(url) => match url.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(Box::new(FileStore::new(path))),
                _ => Err(format!("unsupported database url {url:?}; use file:<path> or memory")),
            },
        }
    }

    pub fn policy(&self) -> Policy {
        Policy::new(&self.data_dir)
    }
}

impl Serve {
    pub fn mailer(&self) -> Result<Arc<dyn Mailer>, String> {
        if self.mail == "console" {
            return Ok(Arc::new(ConsoleMailer));
        }
        match self.mail.strip_prefix("sendmail:") {
            Some(cmd) => Ok(Arc::new(SendmailMailer::new(cmd, self.mail_from.clone())?)),
            None => Err(format!("unsupported mail gateway {:?}", self.mail)),
        }
    }

    pub fn apply(&self, policy: &mut Policy) -> Result<(), String> {
        if let Some(cmd) = &self.transcoder {
            let t = Transcoder::new(cmd.clone(), Duration::from_secs(self.transcode_timeout_secs)).map_err(|e| e.to_string())?;
            policy.transcoder = Some(t);
        }
        if self.token_max_hours <= 0 {
            return Err("token max hours must be positive".into());
        }
        policy.token_max = chrono::Duration::hours(self.token_max_hours);
        Ok(())
    }
}

/// Open the platform for `serve`.
pub fn open_platform(common: &Common, serve: &Serve) -> Result<Platform, String> {
    let mut policy = common.policy();
    serve.apply(&mut policy)?;
    let mut p = Platform::open(common.store()?, Arc::new(SystemClock), serve.mailer()?, policy).map_err(|e| e.to_string())?;
    if let Some(on) = serve.two_factor {
        p.force_two_factor(on).map_err(|e| e.to_string())?;
    }
    Ok(p)
}
