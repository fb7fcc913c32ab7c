// SPDX-License-Identifier: Apache-2.0

//! Bundled benchmark circuits and benchmark-path resolution.

use std::env;
use std::path::{Path, PathBuf};

use crate::netlist::{full_scan_transform, parse_bench_named, Netlist, NetlistError};

/// ISCAS'89 s27.
pub const S27: &str = include_str!("../data/s27.bench");
/// ISCAS'85 c17.
pub const C17: &str = include_str!("../data/c17.bench");

/// Environment variable naming the default benchmark directory.
pub const BENCH_DIR_VAR: &str = "BENCH_DIR";

/// Bundled circuit text by name.
pub fn bundled(name: &str) -> Option<&'static str> {
    match name.to_ascii_lowercase().as_str() {
        "s27" => Some(S27),
        "c17" => Some(C17),
        _ => None,
    }
}

/// Where a benchmark was found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BenchSource {
    File(PathBuf),
    Bundled(&'static str),
}

/// Resolves a benchmark reference. Tried in order: `spec` as a path,
/// `$BENCH_DIR/spec` and `$BENCH_DIR/spec.bench`, then the bundled circuits.
pub fn resolve(spec: &str) -> Option<BenchSource> {
    resolve_in(
        spec,
        env::var_os(BENCH_DIR_VAR).map(PathBuf::from).as_deref(),
    )
}

pub fn resolve_in(spec: &str, bench_dir: Option<&Path>) -> Option<BenchSource> {
    let direct = PathBuf::from(spec);
    if direct.is_file() {
        return Some(BenchSource::File(direct));
    }
    if let Some(dir) = bench_dir {
        for candidate in [dir.join(spec), dir.join(format!("{spec}.bench"))] {
            if candidate.is_file() {
                return Some(BenchSource::File(candidate));
            }
        }
    }
    let stem = Path::new(spec)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    bundled(&stem).map(BenchSource::Bundled)
}

/// Loads a benchmark by reference and applies the full-scan transform.
pub fn load_scanned(spec: &str) -> Result<Netlist, NetlistError> {
    let net = match resolve(spec) {
        Some(BenchSource::File(path)) => Netlist::from_file(path)?,
        Some(BenchSource::Bundled(text)) => {
            let stem = Path::new(spec)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| spec.to_string());
            parse_bench_named(&stem, text)?
        }
        None => {
            return Err(NetlistError::Io {
                path: spec.to_string(),
                message: format!("not found (also searched ${BENCH_DIR_VAR} and bundled circuits)"),
            })
        }
    };
    Ok(full_scan_transform(&net))
}
