use std::io::BufRead;
use std::sync::Arc;

use clap::Parser;
use framewise_server::clock::SystemClock;
use framewise_server::config::{open_platform, Cli, Command};
use framewise_server::http::{router, App};
use framewise_server::mail::ConsoleMailer;
use framewise_server::platform::Platform;
use framewise_server::{password, worker};
use tracing_subscriber::EnvFilter;

#[tokio::main]
async fn main() {
    tracing_subscriber::fmt().with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info"))).init();
    let cli = Cli::parse();
    if let Err(e) = run(cli).await {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

async fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Serve(serve) => {
            let platform = open_platform(&cli.common, &serve)?;
            let app = App::new(platform);
            worker::spawn(app.shared(), serve.ingest_workers);
            let listener = tokio::net::TcpListener::bind(&serve.listen).await.map_err(|e| format!("binding {}: {e}", serve.listen))?;
            tracing::info!("listening on {}", serve.listen);
            axum::serve(listener, router(app))
                .with_graceful_shutdown(async {
                    let _ = tokio::signal::ctrl_c().await;
                })
                .await
                .map_err(|e| e.to_string())
        }
        Command::CreateAdmin { email } => {
            let pw = match std::env::var("FRAMEWISE_ADMIN_PASSWORD") {
                Ok(pw) => pw,
                Err(_) => {
                    eprintln!("password:");
                    let mut line = String::new();
                    std::io::stdin().lock().read_line(&mut line).map_err(|e| e.to_string())?;
                    line.trim_end_matches(['\r', '\n']).to_owned()
                }
            };
            let hash = password::hash(&pw).map_err(|e| e.to_string())?;
            let mut p = Platform::open(cli.common.store()?, Arc::new(SystemClock), Arc::new(ConsoleMailer), cli.common.policy()).map_err(|e| e.to_string())?;
            let user = p.create_admin(&email, hash).map_err(|e| e.to_string())?;
            println!("created administrator {} ({})", user.email, user.id);
            Ok(())
        }
    }
}
