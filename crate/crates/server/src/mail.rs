//! Outbound mail. Gateways must not block the caller for long; the
//! sendmail gateway hands messages to a background thread.

use std::io::Write;
use std::process::{Command, Stdio};
use std::sync::Mutex;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mail {
    pub to: String,
    pub subject: String,
    pub body: String,
}

pub trait Mailer: Send + Sync {
    fn send(&self, mail: Mail);
}

/// Writes messages to the log. Development default.
pub struct ConsoleMailer;

impl Mailer for ConsoleMailer {
    fn send(&self, mail: Mail) {
        tracing::info!(to = %mail.to, subject = %mail.subject, "mail:\n{}", mail.body);
    }
}

/// Keeps messages in memory for inspection.
#[derive(Default)]
pub struct MemoryMailer {
    outbox: Mutex<Vec<Mail>>,
}

impl MemoryMailer {
    pub fn sent(&self) -> Vec<Mail> {
        self.outbox.lock().unwrap().clone()
    }

    pub fn last_to(&self, to: &str) -> Option<Mail> {
        self.outbox.lock().unwrap().iter().rev().find(|m| m.to == to).cloned()
    }
}

impl Mailer for MemoryMailer {
    fn send(&self, mail: Mail) {
        self.outbox.lock().unwrap().push(mail);
    }
}

/// Pipes an RFC 5322 message into a sendmail-compatible command such as
/// `sendmail -t` or `msmtp -t`.
pub struct SendmailMailer {
    argv: Vec<String>,
    from: String,
}

impl SendmailMailer {
    pub fn new(command: &str, from: impl Into<String>) -> Result<Self, String> {
        let argv = shell_split(command)?;
        Ok(SendmailMailer { argv, from: from.into() })
    }
}

fn shell_split(command: &str) -> Result<Vec<String>, String> {
    let argv = shell_words::split(command).map_err(|e| e.to_string())?;
    if argv.is_empty() {
        return Err("empty mail command".into());
    }
    Ok(argv)
}

impl Mailer for SendmailMailer {
    fn send(&self, mail: Mail) {
        let argv = self.argv.clone();
        let message = format!("From: {}\r\nTo: {}\r\nSubject: {}\r\n\r\n{}\r\n", self.from, mail.to, mail.subject, mail.body);
        std::thread::spawn(move || {
            let result = Command::new(&argv[0]).args(&argv[1..]).stdin(Stdio::piped()).spawn().and_then(|mut child| {
                child.stdin.take().expect("piped").write_all(message.as_bytes())?;
                child.wait()
            });
            match result {
                Ok(status) if status.success() => {}
                Ok(status) => tracing::warn!(%status, "mail command failed"),
                Err(e) => tracing::warn!(error = %e, "mail command did not run"),
            }
        });
    }
}
