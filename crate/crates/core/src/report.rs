//! Run manifests, atomic file output, CSV encodings and level-set geometry.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::fs;
use std::hash::{Hash, Hasher};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::cutsets::level_set;
use crate::error::{Error, Result};
use crate::height::{BoundaryCondition, HeightFunction};
use crate::oracle::Distribution;
use crate::sampler::EmpiricalStat;
use crate::torus::Vertex;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to rerun a command. Only `created_unix` differs between
/// a run and its replay, and it is never written into data files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    /// Arguments after the program name.
    pub command: Vec<String>,
    pub subcommand: String,
    pub torus: Vec<usize>,
    pub bc: Option<String>,
    pub model: Option<String>,
    pub method: Option<String>,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub statistics: Vec<String>,
    pub version: String,
    pub created_unix: u64,
    /// Data files written next to the manifest.
    pub outputs: Vec<String>,
}

impl ExperimentManifest {
    pub fn new(command: Vec<String>, subcommand: &str) -> Self {
        ExperimentManifest {
            command,
            subcommand: subcommand.to_string(),
            torus: Vec::new(),
            bc: None,
            model: None,
            method: None,
            seed: None,
            samples: None,
            statistics: Vec::new(),
            version: VERSION.to_string(),
            created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            outputs: Vec::new(),
        }
    }

    /// `<timestamp>-<hash of the command line>`.
    pub fn run_name(&self) -> String {
        let mut h = DefaultHasher::new();
        self.command.hash(&mut h);
        format!("{}-{:016x}", self.created_unix, h.finish())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Io(e.to_string()))?;
    for row in rows {
        w.write_record(&row).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// `value,count,total` with exact integer or rational strings.
pub fn distribution_csv(dist: &Distribution) -> Result<String> {
    let total = dist.total.to_string();
    csv_text(
        &["value", "count", "total"],
        dist.support.iter().map(|(k, c)| vec![k.to_string(), c.to_string(), total.clone()]),
    )
}

/// One row per (statistic, value) cell of a sample batch.
pub fn empirical_csv(stats: &[EmpiricalStat]) -> Result<String> {
    let rows = stats.iter().flat_map(|s| {
        s.cells.iter().map(move |(k, c)| {
            vec![
                s.statistic.clone(),
                k.to_string(),
                c.count.to_string(),
                s.samples.to_string(),
                format!("{:.6}", c.frequency),
                format!("{:.6}", c.lower),
                format!("{:.6}", c.upper),
            ]
        })
    });
    csv_text(&["statistic", "value", "count", "samples", "frequency", "lower99", "upper99"], rows)
}

/// Two-column histogram.
pub fn histogram_csv<K: ToString>(key: &str, counts: &BTreeMap<K, u64>) -> Result<String> {
    csv_text(&[key, "count"], counts.iter().map(|(k, c)| vec![k.to_string(), c.to_string()]))
}

/// Generic table with a header and string rows.
pub fn table_csv(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    csv_text(header, rows)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelSetRecord {
    /// Every x whose level set is this edge set.
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(Vertex, Vertex)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelSetGeometry {
    pub dims: Vec<usize>,
    pub level_sets: Vec<LevelSetRecord>,
}

/// LS(f, x, B) for every x, merged when identical; empty sets are omitted.
pub fn levelset_geometry(f: &HeightFunction, bc: &BoundaryCondition) -> Result<LevelSetGeometry> {
    let mut groups: BTreeMap<Vec<(Vertex, Vertex)>, Vec<Vertex>> = BTreeMap::new();
    for x in 0..f.torus.vertex_count() {
        if let Some(gamma) = level_set(f, x, bc)? {
            groups.entry(gamma.edges().to_vec()).or_default().push(x);
        }
    }
    let mut level_sets: Vec<LevelSetRecord> =
        groups.into_iter().map(|(edges, vertices)| LevelSetRecord { vertices, edges }).collect();
    level_sets.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    Ok(LevelSetGeometry { dims: f.torus.dims().to_vec(), level_sets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::TorusSpec;

    #[test]
    fn parity_function_has_one_level_set() {
        let t = TorusSpec::new(&[4, 4]).unwrap();
        let bc = BoundaryCondition::one_point(&t, 0).unwrap();
        let geo = levelset_geometry(&HeightFunction::parity_function(&t), &bc).unwrap();
        assert_eq!(geo.level_sets.len(), 1);
        assert_eq!(geo.level_sets[0].edges.len(), 4);
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("a.csv");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
    }

    #[test]
    fn manifest_roundtrip() {
        let mut m = ExperimentManifest::new(vec!["enumerate".into(), "--torus".into(), "6".into()], "enumerate");
        m.torus = vec![6];
        let back = ExperimentManifest::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert!(m.run_name().starts_with(&m.created_unix.to_string()));
    }
}
