//! Text dataset formats.
//!
//! * edge list: one `src dst` pair of node indices per line, `#` comments;
//! * features: CSV, one row of reals per node, optional header row;
//! * labels: CSV `node_id,class_index`, optional header row;
//! * manifest: JSON listing the files of every domain.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::DenseMatrix;

#[derive(Clone, Debug, Default)]
pub struct LoadOptions {
    /// Skip the first line of the feature file.
    pub feature_header: bool,
    /// Overrides the class count inferred from the label file.
    pub num_classes: Option<usize>,
    /// Defaults to the edge file's stem.
    pub domain_id: Option<String>,
}

/// Loads a graph with default options (no feature header, class count
/// inferred from the labels).
pub fn load_edge_list(
    edge_path: impl AsRef<Path>,
    feature_path: impl AsRef<Path>,
    label_path: impl AsRef<Path>,
) -> Result<Graph> {
    load_graph(edge_path, feature_path, Some(label_path), &LoadOptions::default())
}

pub fn load_graph(
    edge_path: impl AsRef<Path>,
    feature_path: impl AsRef<Path>,
    label_path: Option<impl AsRef<Path>>,
    opts: &LoadOptions,
) -> Result<Graph> {
    let edge_path = edge_path.as_ref();
    let features = read_features(feature_path.as_ref(), opts.feature_header)?;
    let n = features.rows();
    let edges = read_edges(edge_path)?;
    if let Some(&(u, v)) = edges.iter().find(|(u, v)| *u >= n || *v >= n) {
        return Err(Error::Index {
            index: u.max(v),
            num_nodes: n,
        });
    }
    let (labels, num_classes) = match label_path {
        Some(p) => {
            let labels = read_labels(p.as_ref(), n)?;
            let inferred = labels.iter().flatten().max().map_or(0, |c| c + 1);
            let c = opts.num_classes.unwrap_or(inferred);
            (Some(labels), c)
        }
        None => (None, opts.num_classes.unwrap_or(0)),
    };
    let domain_id = opts.domain_id.clone().unwrap_or_else(|| {
        edge_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    Graph::new(domain_id, features, edges, labels, num_classes)
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn read_edges(path: &Path) -> Result<Vec<(usize, usize)>> {
    let text = fs::read_to_string(path)?;
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let mut next = |what: &str| -> Result<usize> {
            let tok = parts
                .next()
                .ok_or_else(|| parse_err(path, lineno + 1, format!("missing {what} node")))?;
            tok.parse()
                .map_err(|_| parse_err(path, lineno + 1, format!("bad {what} node {tok:?}")))
        };
        let u = next("source")?;
        let v = next("target")?;
        if parts.next().is_some() {
            return Err(parse_err(path, lineno + 1, "expected exactly two node indices"));
        }
        edges.push((u, v));
    }
    Ok(edges)
}

fn read_features(path: &Path, header: bool) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path)?;
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (lineno, line) in text.lines().enumerate().skip(usize::from(header)) {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let before = data.len();
        for tok in line.split(',') {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| parse_err(path, lineno + 1, format!("bad feature value {tok:?}")))?;
            data.push(v);
        }
        let width = data.len() - before;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return Err(parse_err(
                    path,
                    lineno + 1,
                    format!("row has {width} values, expected {c}"),
                ))
            }
            _ => {}
        }
        rows += 1;
    }
    DenseMatrix::from_vec(rows, cols.unwrap_or(0), data)
}

fn read_labels(path: &Path, n: usize) -> Result<Vec<Option<usize>>> {
    let text = fs::read_to_string(path)?;
    let mut labels = vec![None; n];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',').map(str::trim);
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_err(path, lineno + 1, "expected node_id,class_index"));
        };
        let (node, class) = match (a.parse::<usize>(), b.parse::<usize>()) {
            (Ok(node), Ok(class)) => (node, class),
            // header row
            _ if lineno == 0 => continue,
            _ => return Err(parse_err(path, lineno + 1, format!("bad label row {line:?}"))),
        };
        if node >= n {
            return Err(Error::Index {
                index: node,
                num_nodes: n,
            });
        }
        labels[node] = Some(class);
    }
    Ok(labels)
}

/// One domain in a dataset manifest. Relative paths resolve against the
/// manifest's directory.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DomainEntry {
    pub domain_id: String,
    pub edge_path: PathBuf,
    pub feature_path: PathBuf,
    pub label_path: Option<PathBuf>,
    pub num_classes: usize,
    #[serde(default)]
    pub feature_header: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub domains: Vec<DomainEntry>,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl Manifest {
    pub fn new(domains: Vec<DomainEntry>, base_dir: impl Into<PathBuf>) -> Self {
        Self {
            domains,
            base_dir: base_dir.into(),
        }
    }

    pub fn domain(&self, id: &str) -> Option<&DomainEntry> {
        self.domains.iter().find(|d| d.domain_id == id)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn load_domain(&self, id: &str) -> Result<Graph> {
        let entry = self
            .domain(id)
            .ok_or_else(|| Error::Config(format!("domain {id:?} is not in the manifest")))?;
        let opts = LoadOptions {
            feature_header: entry.feature_header,
            num_classes: Some(entry.num_classes),
            domain_id: Some(entry.domain_id.clone()),
        };
        load_graph(
            self.resolve(&entry.edge_path),
            self.resolve(&entry.feature_path),
            entry.label_path.as_ref().map(|p| self.resolve(p)),
            &opts,
        )
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let mut m: Manifest = serde_json::from_str(&fs::read_to_string(path)?)?;
    m.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(m)
}
