use crate::graph::Graph;
use crate::linalg::CsrMatrix;

/// Symmetrically normalised adjacency with self-loops.
pub type CsrAdjacency = CsrMatrix;

/// `D̃^{-1/2} (A + I) D̃^{-1/2}` in CSR form.
///
/// Each off-diagonal weight is computed once per undirected edge and written
/// to both `(i, j)` and `(j, i)`, so the result is bitwise symmetric.
/// Isolated nodes end up with a single unit self-loop.
pub fn normalize_adjacency(g: &Graph) -> CsrAdjacency {
    let n = g.num_nodes();
    let neighbours = g.adjacency_lists();
    let degree: Vec<f64> = neighbours.iter().map(|a| (a.len() + 1) as f64).collect();

    let mut row_ptr = Vec::with_capacity(n + 1);
    row_ptr.push(0);
    for a in &neighbours {
        row_ptr.push(row_ptr.last().unwrap() + a.len() + 1);
    }
    let nnz = row_ptr[n];
    let mut col_idx = vec![0usize; nnz];
    let mut values = vec![0.0; nnz];
    let mut fill = row_ptr[..n].to_vec();

    // Visiting i ascending, row i already holds its lower neighbours (pushed
    // while handling them), then takes the diagonal and its upper neighbours;
    // each upper pair is mirrored into the later row, keeping rows sorted.
    for i in 0..n {
        push(&mut col_idx, &mut values, &mut fill, i, i, 1.0 / degree[i]);
        for &j in neighbours[i].iter().filter(|&&j| j > i) {
            let w = 1.0 / (degree[i] * degree[j]).sqrt();
            push(&mut col_idx, &mut values, &mut fill, i, j, w);
            push(&mut col_idx, &mut values, &mut fill, j, i, w);
        }
    }
    CsrMatrix::new(n, n, row_ptr, col_idx, values).expect("normalised adjacency is valid CSR")
}

fn push(
    col_idx: &mut [usize],
    values: &mut [f64],
    fill: &mut [usize],
    row: usize,
    col: usize,
    w: f64,
) {
    let k = fill[row];
    col_idx[k] = col;
    values[k] = w;
    fill[row] += 1;
}
