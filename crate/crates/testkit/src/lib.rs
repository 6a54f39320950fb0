//! Test oracles, seeded generators and fixture paths shared by the
//! workspace's test suites.

pub mod gen;
pub mod hit_oracle;
pub mod mutations;
pub mod reports;
pub mod slot_oracle;

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Workspace root (two levels above this crate).
pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().expect("workspace root")
}

pub fn fixtures_dir() -> PathBuf {
    workspace_root().join("fixtures")
}

/// A scenario directory under `fixtures/scenarios`.
pub fn scenario(name: &str) -> PathBuf {
    fixtures_dir().join("scenarios").join(name)
}

/// Every scenario directory, sorted by name.
pub fn all_scenarios() -> Vec<PathBuf> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(fixtures_dir().join("scenarios"))
        .expect("fixtures/scenarios")
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("events.getevent").is_file())
        .collect();
    dirs.sort();
    dirs
}
