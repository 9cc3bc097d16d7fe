use std::net::SocketAddr;
use std::path::PathBuf;

use clap::Parser;
use lumenlift_service::{router, ServiceConfig};

/// HTTP preview and enhancement server. The port comes from LUMENLIFT_PORT
/// (default 8080).
#[derive(Parser, Debug)]
#[command(name = "lumenlift-server", version)]
struct Args {
    /// Directory of static web UI assets served at `/`
    #[arg(long)]
    static_dir: Option<PathBuf>,
    /// Address to bind
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    /// Uploaded images kept in memory before the least recently used is dropped
    #[arg(long, default_value_t = 16)]
    max_sessions: usize,
}

fn port_from_env() -> Result<u16, String> {
    match std::env::var("LUMENLIFT_PORT") {
        Ok(v) => v.parse().map_err(|_| format!("LUMENLIFT_PORT: `{v}` is not a port number")),
        Err(_) => Ok(8080),
    }
}

#[tokio::main]
async fn main() -> std::process::ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let port = match port_from_env() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return std::process::ExitCode::from(2);
        }
    };
    if let Some(dir) = &args.static_dir {
        if !dir.is_dir() {
            eprintln!("error: --static-dir {} is not a directory", dir.display());
            return std::process::ExitCode::from(2);
        }
    }

    let config = ServiceConfig {
        max_sessions: args.max_sessions,
        static_dir: args.static_dir,
        ..ServiceConfig::default()
    };
    let addr = SocketAddr::new(args.host, port);
    let listener = match tokio::net::TcpListener::bind(addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot bind {addr}: {e}");
            return std::process::ExitCode::from(1);
        }
    };
    log::info!("listening on http://{addr}");
    let served = axum::serve(listener, router(&config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await;
    match served {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::from(1)
        }
    }
}
