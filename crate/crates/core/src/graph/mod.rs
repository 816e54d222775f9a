//! Graph representation, ingestion, adjacency normalisation, few-shot splits
//! and test-time perturbations.

mod csr;
pub mod io;
mod perturb;
mod split;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

pub use csr::{normalize_adjacency, CsrAdjacency};
pub use io::{load_edge_list, load_graph, load_manifest, DomainEntry, LoadOptions, Manifest};
pub use perturb::{ceil_count, merge_classes, perturb_edges, perturb_features, random_class_group, shuffle_test_features};
pub use split::{sample_few_shot_split, FewShotSplit};

/// One domain: undirected structure, raw node features and optional labels.
///
/// Edges are stored once as `(min, max)` pairs, sorted and deduplicated.
/// Self-loops are never stored; normalisation adds them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    domain_id: String,
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    features: DenseMatrix,
    labels: Option<Vec<Option<usize>>>,
    num_classes: usize,
}

impl Graph {
    /// Builds a graph, canonicalising the edge list and checking every
    /// invariant. Self-loop pairs are discarded.
    pub fn new(
        domain_id: impl Into<String>,
        features: DenseMatrix,
        edges: impl IntoIterator<Item = (usize, usize)>,
        labels: Option<Vec<Option<usize>>>,
        num_classes: usize,
    ) -> Result<Self> {
        let num_nodes = features.rows();
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            for x in [u, v] {
                if x >= num_nodes {
                    return Err(Error::Index {
                        index: x,
                        num_nodes,
                    });
                }
            }
            if u != v {
                set.insert((u.min(v), u.max(v)));
            }
        }
        if let Some(labels) = &labels {
            if labels.len() != num_nodes {
                return Err(Error::InvalidGraph(format!(
                    "{} labels for {num_nodes} nodes",
                    labels.len()
                )));
            }
            if let Some((i, c)) = labels
                .iter()
                .enumerate()
                .find_map(|(i, c)| c.filter(|&c| c >= num_classes).map(|c| (i, c)))
            {
                return Err(Error::InvalidGraph(format!(
                    "node {i} has label {c} but the graph has {num_classes} classes"
                )));
            }
        }
        if !features.is_finite() {
            return Err(Error::NonFinite("node features".into()));
        }
        Ok(Self {
            domain_id: domain_id.into(),
            num_nodes,
            edges: set.into_iter().collect(),
            features,
            labels,
            num_classes,
        })
    }

    pub fn domain_id(&self) -> &str {
        &self.domain_id
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn labels(&self) -> Option<&[Option<usize>]> {
        self.labels.as_deref()
    }

    pub fn label(&self, node: usize) -> Option<usize> {
        self.labels.as_ref().and_then(|l| l[node])
    }

    /// Labelled nodes of each class, in ascending node order.
    pub fn nodes_by_class(&self) -> Vec<Vec<usize>> {
        let mut by_class = vec![Vec::new(); self.num_classes];
        if let Some(labels) = &self.labels {
            for (i, c) in labels.iter().enumerate() {
                if let Some(c) = c {
                    by_class[*c].push(i);
                }
            }
        }
        by_class
    }

    /// Same structure and labels with replaced features.
    pub fn with_features(&self, features: DenseMatrix) -> Result<Self> {
        if features.rows() != self.num_nodes {
            return Err(Error::Shape(format!(
                "{} feature rows for {} nodes",
                features.rows(),
                self.num_nodes
            )));
        }
        if !features.is_finite() {
            return Err(Error::NonFinite("node features".into()));
        }
        Ok(Self {
            features,
            ..self.clone()
        })
    }

    /// Same nodes with a subset of the current edges.
    pub(crate) fn with_edge_subset(&self, edges: Vec<(usize, usize)>) -> Self {
        Self {
            edges,
            ..self.clone()
        }
    }

    pub fn with_labels(&self, labels: Vec<Option<usize>>, num_classes: usize) -> Result<Self> {
        Graph::new(
            self.domain_id.clone(),
            self.features.clone(),
            self.edges.iter().copied(),
            Some(labels),
            num_classes,
        )
    }

    /// Neighbour lists (both directions).
    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for row in &mut adj {
            row.sort_unstable();
        }
        adj
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feats(n: usize) -> DenseMatrix {
        DenseMatrix::from_fn(n, 2, |i, j| (i + j) as f64)
    }

    #[test]
    fn canonicalises_edges() {
        let g = Graph::new("t", feats(3), [(1, 0), (0, 1), (2, 2), (2, 1)], None, 0).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn rejects_out_of_range_endpoint() {
        let err = Graph::new("t", feats(3), [(5, 1)], None, 0).unwrap_err();
        assert!(matches!(err, Error::Index { index: 5, num_nodes: 3 }));
    }

    #[test]
    fn rejects_label_out_of_range() {
        let err = Graph::new("t", feats(2), [], Some(vec![Some(0), Some(2)]), 2).unwrap_err();
        assert!(matches!(err, Error::InvalidGraph(_)));
    }
}
