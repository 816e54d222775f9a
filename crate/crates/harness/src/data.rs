//! Writing graphs in the on-disk manifest layout.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use gfmate_core::graph::{DomainEntry, Graph, Manifest};
use gfmate_core::synth::BenchmarkSpec;

use crate::error::Result;

/// Writes `{id}.edges`, `{id}.features.csv` and `{id}.labels.csv` into
/// `dir` and returns the manifest entry. Floats use the shortest
/// representation that parses back to the same bits.
pub fn write_graph_files(g: &Graph, dir: &Path) -> Result<DomainEntry> {
    fs::create_dir_all(dir)?;
    let id = g.domain_id();
    let mut edges = String::new();
    for (u, v) in g.edges() {
        writeln!(edges, "{u} {v}").unwrap();
    }
    let mut feats = String::new();
    for i in 0..g.num_nodes() {
        let row: Vec<String> = g.features().row(i).iter().map(|v| format!("{v:?}")).collect();
        writeln!(feats, "{}", row.join(",")).unwrap();
    }
    let edge_path = PathBuf::from(format!("{id}.edges"));
    let feature_path = PathBuf::from(format!("{id}.features.csv"));
    fs::write(dir.join(&edge_path), edges)?;
    fs::write(dir.join(&feature_path), feats)?;
    let label_path = match g.labels() {
        Some(labels) => {
            let mut text = String::from("node_id,class_index\n");
            for (i, y) in labels.iter().enumerate() {
                if let Some(y) = y {
                    writeln!(text, "{i},{y}").unwrap();
                }
            }
            let p = PathBuf::from(format!("{id}.labels.csv"));
            fs::write(dir.join(&p), text)?;
            Some(p)
        }
        None => None,
    };
    Ok(DomainEntry {
        domain_id: id.to_string(),
        edge_path,
        feature_path,
        label_path,
        num_classes: g.num_classes(),
        feature_header: false,
    })
}

/// Writes every graph plus `manifest.json`; returns the manifest path.
pub fn write_manifest(graphs: &[Graph], dir: &Path) -> Result<PathBuf> {
    let domains = graphs
        .iter()
        .map(|g| write_graph_files(g, dir))
        .collect::<Result<Vec<_>>>()?;
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&Manifest::new(domains, dir))?)?;
    Ok(path)
}

/// Materializes the synthetic benchmark (sources first, target last).
pub fn write_synthetic_benchmark(spec: &BenchmarkSpec, dir: &Path) -> Result<PathBuf> {
    let bench = spec.build()?;
    let mut graphs = bench.sources;
    graphs.push(bench.target);
    write_manifest(&graphs, dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gfmate_core::graph::load_manifest;

    #[test]
    fn written_graphs_load_back_identically() {
        let spec = BenchmarkSpec::standard(3);
        let bench = spec.build().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = write_synthetic_benchmark(&spec, dir.path()).unwrap();
        let m = load_manifest(&path).unwrap();
        assert_eq!(m.domains.len(), 3);
        for g in bench.sources.iter().chain([&bench.target]) {
            let back = m.load_domain(g.domain_id()).unwrap();
            assert_eq!(&back, g);
        }
    }
}
