use std::net::SocketAddr;
use std::path::PathBuf;

use amalgam_service::{router, AppState, Config};
use clap::Parser;

/// Serve the amalgamation workflow over HTTP/JSON.
#[derive(Debug, Parser)]
#[command(name = "amalgam-service", version)]
struct Args {
    #[arg(long, env = "AMALGAM_BIND", default_value = "127.0.0.1:8080")]
    bind: SocketAddr,
    /// Write each session's hierarchy and export document here on change.
    #[arg(long, env = "AMALGAM_DATA_DIR")]
    data_dir: Option<PathBuf>,
    #[arg(long, env = "AMALGAM_MAX_UPLOAD_BYTES", default_value_t = 16 * 1024 * 1024)]
    max_upload_bytes: usize,
    /// Allowed browser origin, or `*`.
    #[arg(long, env = "AMALGAM_CORS_ORIGIN")]
    cors_origin: Option<String>,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let app = router(AppState::new(Config {
        max_upload_bytes: args.max_upload_bytes,
        data_dir: args.data_dir,
        cors_origin: args.cors_origin,
    }));
    let listener = tokio::net::TcpListener::bind(args.bind).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
