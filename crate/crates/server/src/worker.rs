//! Background ingest: probe and transcode uploads off the request path.

use std::sync::{Arc, Mutex};

use framewise_core::ids::VideoId;
use tokio::sync::{mpsc, Semaphore};
use tokio::task::JoinHandle;

use crate::platform::Platform;

fn lock(p: &Mutex<Platform>) -> std::sync::MutexGuard<'_, Platform> {
    p.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

/// Attach an ingest queue to the platform and run up to `workers`
/// ingests at a time. Jobs interrupted by a previous shutdown are queued
/// again first.
pub fn spawn(platform: Arc<Mutex<Platform>>, workers: usize) -> JoinHandle<()> {
    let (tx, mut rx) = mpsc::unbounded_channel::<VideoId>();
    {
        let mut p = lock(&platform);
        p.set_ingest_queue(tx.clone());
        for v in p.pending_ingests() {
            let _ = tx.send(v);
        }
    }
    let slots = Arc::new(Semaphore::new(workers.max(1)));
    tokio::spawn(async move {
        while let Some(video) = rx.recv().await {
            let Ok(permit) = slots.clone().acquire_owned().await else { break };
            let platform = platform.clone();
            tokio::spawn(async move {
                let _permit = permit;
                let result = tokio::task::spawn_blocking(move || run_one(&platform, &video)).await;
                if let Err(e) = result {
                    tracing::error!("ingest task panicked: {e}");
                }
            });
        }
    })
}

/// Run one ingest to completion on the current thread.
pub fn run_one(platform: &Mutex<Platform>, video: &VideoId) {
    let Some(task) = lock(platform).begin_ingest(video) else { return };
    let mut job = task.job.clone();
    let outcome = framewise_media::ingest(&mut job, &task.original, &task.hls_dir, task.transcoder.as_ref(), |j| {
        lock(platform).ingest_progress(j);
    });
    if let Err(e) = &outcome {
        tracing::warn!(video = %video, "ingest failed: {e}");
    }
    lock(platform).finish_ingest(&job, outcome);
}
