use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    pub iters: usize,
    pub bound: Option<f64>,
    pub orbit_budget: Option<usize>,
    pub t_fraction: f64,
}

/// Everything needed to re-run a command and check its output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    /// Arguments after the program name.
    pub argv: Vec<String>,
    pub map_hashes: Vec<String>,
    pub budgets: Budgets,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    /// SHA-256 of the bytes written to standard output.
    pub output_digest: String,
}

impl RunManifest {
    pub fn new(command: &str, argv: Vec<String>, map_hashes: Vec<String>, budgets: Budgets, output: &[u8]) -> Self {
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            argv,
            map_hashes,
            budgets,
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            output_digest: digest(output),
        }
    }

    /// The argument vector to replay, without the manifest and thread flags.
    pub fn replay_args(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut it = self.argv.iter();
        while let Some(a) = it.next() {
            if a == "--manifest" || a == "--threads" {
                it.next();
            } else if a.starts_with("--manifest=") || a.starts_with("--threads=") {
                continue;
            } else {
                out.push(a.clone());
            }
        }
        out
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_strips_run_local_flags() {
        let argv = ["census", "--map", "m.json", "--threads", "4", "--manifest=run.json", "--bound", "5"];
        let budgets = Budgets { iters: 30, bound: Some(5.0), orbit_budget: None, t_fraction: 0.1 };
        let m = RunManifest::new("census", argv.iter().map(|s| s.to_string()).collect(), vec![], budgets, b"x");
        assert_eq!(m.replay_args(), ["census", "--map", "m.json", "--bound", "5"]);
        assert_eq!(m.output_digest, digest(b"x"));
    }
}
