//! Bug report document store and its HTTP API.

pub mod api;
pub mod store;

use std::io;
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::sync::Arc;
use std::thread::JoinHandle;

use tokio::sync::oneshot;

pub use api::{router, ServiceAssets, CONTENT_TYPE_HTML, CONTENT_TYPE_JSON, CONTENT_TYPE_SCRIPT};
pub use store::{CrashPoint, Store, StoreError, StoredAttachment, StoredDocument};

pub const DEFAULT_PORT: u16 = 8477;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub store_root: PathBuf,
    pub bind: IpAddr,
    pub port: u16,
    /// Built viewer assets to serve under `/ui/`.
    pub ui_dir: Option<PathBuf>,
}

impl ServerConfig {
    pub fn new(store_root: impl Into<PathBuf>) -> Self {
        ServerConfig { store_root: store_root.into(), bind: IpAddr::V4(Ipv4Addr::LOCALHOST), port: DEFAULT_PORT, ui_dir: None }
    }
}

/// Serves until the process ends.
pub async fn serve(config: ServerConfig) -> io::Result<()> {
    let store = Arc::new(Store::open(&config.store_root).map_err(io::Error::other)?);
    let listener = tokio::net::TcpListener::bind(SocketAddr::new(config.bind, config.port)).await?;
    log::info!("serving {} on http://{}", config.store_root.display(), listener.local_addr()?);
    axum::serve(listener, router(store, config.ui_dir)).await
}

/// A server running on its own runtime thread; stops when dropped.
pub struct RunningServer {
    pub addr: SocketAddr,
    pub store: Arc<Store>,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<io::Result<()>>>,
}

impl RunningServer {
    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Blocks until the server thread ends.
    pub fn wait(mut self) -> io::Result<()> {
        match self.thread.take() {
            Some(t) => t.join().map_err(|_| io::Error::other("server thread panicked"))?,
            None => Ok(()),
        }
    }

    pub fn stop(mut self) -> io::Result<()> {
        self.shutdown_now()
    }

    fn shutdown_now(&mut self) -> io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        match self.thread.take() {
            Some(t) => t.join().map_err(|_| io::Error::other("server thread panicked"))?,
            None => Ok(()),
        }
    }
}

impl Drop for RunningServer {
    fn drop(&mut self) {
        let _ = self.shutdown_now();
    }
}

/// Starts a server in the background. Port 0 picks a free port.
pub fn spawn(config: ServerConfig) -> io::Result<RunningServer> {
    let store = Arc::new(Store::open(&config.store_root).map_err(io::Error::other)?);
    let std_listener = std::net::TcpListener::bind(SocketAddr::new(config.bind, config.port))?;
    std_listener.set_nonblocking(true)?;
    let addr = std_listener.local_addr()?;
    let (tx, rx) = oneshot::channel::<()>();
    let app = router(Arc::clone(&store), config.ui_dir);
    let thread = std::thread::Builder::new().name("odbr-serve".into()).spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(std_listener)?;
            axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = rx.await;
                })
                .await
        })
    })?;
    Ok(RunningServer { addr, store, shutdown: Some(tx), thread: Some(thread) })
}
