//! Attributed graphs, the symmetric-normalized adjacency and sparse
//! aggregation.

use std::collections::BTreeSet;

use crate::bitlinalg::DenseMatrix;
use crate::error::{Error, Result};

/// Train / validation / test node masks. Disjoint by construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Masks {
    pub train: Vec<bool>,
    pub val: Vec<bool>,
    pub test: Vec<bool>,
}

impl Masks {
    pub fn new(train: Vec<bool>, val: Vec<bool>, test: Vec<bool>) -> Result<Self> {
        if train.len() != val.len() || val.len() != test.len() {
            return Err(Error::invalid("mask lengths differ"));
        }
        let masks = Self { train, val, test };
        if let Some(node) = masks.first_overlap() {
            return Err(Error::invalid(format!(
                "node {node} belongs to more than one split"
            )));
        }
        Ok(masks)
    }

    pub fn len(&self) -> usize {
        self.train.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train.is_empty()
    }

    fn first_overlap(&self) -> Option<usize> {
        (0..self.len()).find(|&i| {
            [self.train[i], self.val[i], self.test[i]]
                .iter()
                .filter(|&&b| b)
                .count()
                > 1
        })
    }

    /// `(train, val, test, unassigned)` node counts.
    pub fn counts(&self) -> (usize, usize, usize, usize) {
        let c = |m: &[bool]| m.iter().filter(|&&b| b).count();
        let (t, v, s) = (c(&self.train), c(&self.val), c(&self.test));
        (t, v, s, self.len() - t - v - s)
    }
}

/// An undirected simple graph with node features, labels and split masks.
#[derive(Clone, Debug, PartialEq)]
pub struct AttributedGraph {
    features: DenseMatrix,
    edges: Vec<(usize, usize)>,
    labels: Vec<usize>,
    num_classes: usize,
    masks: Masks,
}

impl AttributedGraph {
    /// Self-loops are dropped and duplicate (or reversed) edges merged; the
    /// stored edge list is sorted with `u < v`.
    pub fn new(
        features: DenseMatrix,
        edges: impl IntoIterator<Item = (usize, usize)>,
        labels: Vec<usize>,
        num_classes: usize,
        masks: Masks,
    ) -> Result<Self> {
        let n = features.rows();
        if features.cols() == 0 {
            return Err(Error::invalid("feature dimension must be at least 1"));
        }
        if num_classes < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 classes, got {num_classes}"
            )));
        }
        if labels.len() != n {
            return Err(Error::shape(
                "AttributedGraph::new",
                format!("{n} labels"),
                labels.len(),
            ));
        }
        if masks.len() != n {
            return Err(Error::shape(
                "AttributedGraph::new",
                format!("{n} mask entries"),
                masks.len(),
            ));
        }
        if let Some((i, l)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes) {
            return Err(Error::invalid(format!(
                "node {i} has label {l} >= {num_classes}"
            )));
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u != v {
                set.insert((u.min(v), u.max(v)));
            }
        }
        Ok(Self {
            features,
            edges: set.into_iter().collect(),
            labels,
            num_classes,
            masks,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.features.rows()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn masks(&self) -> &Masks {
        &self.masks
    }

    /// Sorted neighbor lists (no self entries).
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes()];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn average_degree(&self) -> f64 {
        2.0 * self.num_edges() as f64 / self.num_nodes().max(1) as f64
    }
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(column, value)` lists, which must be sorted by column.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in &rows {
            if row.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::invalid(
                    "CSR row columns must be strictly increasing",
                ));
            }
            for &(c, v) in row {
                if c >= cols {
                    return Err(Error::invalid(format!(
                        "column {c} out of range for {cols}"
                    )));
                }
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            indptr,
            indices,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn transpose(&self) -> Self {
        let mut rows = vec![Vec::new(); self.cols];
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                rows[c].push((r, v));
            }
        }
        Self::from_rows(self.rows, rows).expect("transpose of a valid CSR is valid")
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                m.set(r, c, v);
            }
        }
        m
    }

    /// Sparse-dense product `self · z`.
    pub fn spmm(&self, z: &DenseMatrix) -> Result<DenseMatrix> {
        if z.rows() != self.cols {
            return Err(Error::shape(
                "spmm",
                format!("{} rows", self.cols),
                z.rows(),
            ));
        }
        let m = z.cols();
        let mut out = DenseMatrix::zeros(self.rows, m);
        for r in 0..self.rows {
            let dst = out.row_mut(r);
            for (c, v) in self.row(r) {
                for (d, s) in dst.iter_mut().zip(z.row(c)) {
                    *d += v * s;
                }
            }
        }
        Ok(out)
    }
}

/// `Ã = D̂^{-1/2} (A + I) D̂^{-1/2}` in CSR form, rows sorted by column.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedAdjacency {
    matrix: CsrMatrix,
}

impl NormalizedAdjacency {
    pub fn num_nodes(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn to_dense(&self) -> DenseMatrix {
        self.matrix.to_dense()
    }
}

pub fn normalize_adjacency(g: &AttributedGraph) -> NormalizedAdjacency {
    let neighbors = g.neighbors();
    let deg: Vec<f64> = neighbors.iter().map(|l| (l.len() + 1) as f64).collect();
    // 1/sqrt(d_i·d_j) rounds once, so equal degrees give exact reciprocals.
    let weight = |i: usize, j: usize| 1.0 / (deg[i] * deg[j]).sqrt();
    let rows = neighbors
        .iter()
        .enumerate()
        .map(|(i, list)| {
            let mut row: Vec<(usize, f64)> = list.iter().map(|&j| (j, weight(i, j))).collect();
            let at = row.partition_point(|&(j, _)| j < i);
            row.insert(at, (i, 1.0 / deg[i]));
            row
        })
        .collect();
    NormalizedAdjacency {
        matrix: CsrMatrix::from_rows(g.num_nodes(), rows).expect("neighbor lists are sorted"),
    }
}

/// `Ã · Z`.
pub fn aggregate(adj: &NormalizedAdjacency, z: &DenseMatrix) -> Result<DenseMatrix> {
    adj.matrix.spmm(z)
}

/// Row-normalized neighbor averaging (no self-loop): row `i` holds `1/|N(i)|`
/// at each neighbor, and isolated nodes get an empty row.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanAggregator {
    forward: CsrMatrix,
    backward: CsrMatrix,
}

impl MeanAggregator {
    pub fn new(g: &AttributedGraph) -> Self {
        let rows = g
            .neighbors()
            .into_iter()
            .map(|list| {
                let w = 1.0 / list.len().max(1) as f64;
                list.into_iter().map(|j| (j, w)).collect()
            })
            .collect();
        let forward = CsrMatrix::from_rows(g.num_nodes(), rows).expect("neighbor lists are sorted");
        let backward = forward.transpose();
        Self { forward, backward }
    }

    pub fn num_nodes(&self) -> usize {
        self.forward.rows()
    }

    pub fn apply(&self, z: &DenseMatrix) -> Result<DenseMatrix> {
        self.forward.spmm(z)
    }

    /// Adjoint of [`apply`](Self::apply).
    pub fn apply_transpose(&self, z: &DenseMatrix) -> Result<DenseMatrix> {
        self.backward.spmm(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> AttributedGraph {
        let masks = Masks::new(vec![false; n], vec![false; n], vec![false; n]).unwrap();
        AttributedGraph::new(
            DenseMatrix::zeros(n, 1),
            edges.iter().copied(),
            vec![0; n],
            2,
            masks,
        )
        .unwrap()
    }

    /// `D̂^{-1/2} (A + I) D̂^{-1/2}` built densely.
    fn dense_oracle(n: usize, edges: &[(usize, usize)]) -> DenseMatrix {
        let mut a = DenseMatrix::identity(n);
        for &(u, v) in edges {
            if u != v {
                a.set(u, v, 1.0);
                a.set(v, u, 1.0);
            }
        }
        let deg: Vec<f64> = (0..n).map(|i| a.row(i).iter().sum()).collect();
        DenseMatrix::from_fn(n, n, |i, j| a.get(i, j) / (deg[i] * deg[j]).sqrt())
    }

    #[test]
    fn two_nodes_one_edge() {
        let adj = normalize_adjacency(&graph(2, &[(0, 1)]));
        assert_eq!(adj.to_dense().as_slice(), &[0.5, 0.5, 0.5, 0.5]);
        let z = DenseMatrix::from_rows(&[vec![2.0], vec![0.0]]).unwrap();
        assert_eq!(aggregate(&adj, &z).unwrap().as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn isolated_node() {
        let adj = normalize_adjacency(&graph(1, &[]));
        assert_eq!(adj.to_dense().as_slice(), &[1.0]);
        let z = DenseMatrix::from_rows(&[vec![3.0, -1.0]]).unwrap();
        assert_eq!(aggregate(&adj, &z).unwrap(), z);
    }

    #[test]
    fn star_graph() {
        let adj = normalize_adjacency(&graph(4, &[(0, 1), (0, 2), (0, 3)]));
        let m = adj.matrix();
        assert!((m.get(0, 0) - 0.25).abs() < 1e-15);
        for leaf in 1..4 {
            assert!((m.get(leaf, leaf) - 0.5).abs() < 1e-15);
            assert!((m.get(0, leaf) - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
            assert!((m.get(leaf, 0) - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
        }
        assert!(
            adj.to_dense()
                .max_abs_diff(&dense_oracle(4, &[(0, 1), (0, 2), (0, 3)]))
                < 1e-15
        );
    }

    #[test]
    fn ingestion_drops_loops_and_duplicates() {
        let g = graph(3, &[(0, 0), (1, 0), (0, 1), (2, 1)]);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn aggregate_shape_error_and_zero() {
        let adj = normalize_adjacency(&graph(3, &[(0, 1)]));
        assert!(aggregate(&adj, &DenseMatrix::zeros(2, 2)).is_err());
        let out = aggregate(&adj, &DenseMatrix::zeros(3, 2)).unwrap();
        assert!(out.as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn masks_reject_overlap() {
        assert!(Masks::new(vec![true, false], vec![true, false], vec![false, false]).is_err());
        assert!(Masks::new(vec![true], vec![false, false], vec![false]).is_err());
    }

    #[test]
    fn graph_validation() {
        let masks = || Masks::new(vec![false; 2], vec![false; 2], vec![false; 2]).unwrap();
        let x = DenseMatrix::zeros(2, 1);
        assert!(AttributedGraph::new(x.clone(), [(0, 2)], vec![0, 1], 2, masks()).is_err());
        assert!(AttributedGraph::new(x.clone(), [], vec![0, 2], 2, masks()).is_err());
        assert!(AttributedGraph::new(x.clone(), [], vec![0, 0], 1, masks()).is_err());
        assert!(
            AttributedGraph::new(DenseMatrix::zeros(2, 0), [], vec![0, 0], 2, masks()).is_err()
        );
    }

    #[test]
    fn mean_aggregator_adjoint() {
        let g = graph(4, &[(0, 1), (0, 2), (0, 3)]);
        let agg = MeanAggregator::new(&g);
        let m = agg.forward.to_dense();
        assert_eq!(m.get(0, 1), 1.0 / 3.0);
        assert_eq!(m.get(1, 0), 1.0);
        let z = DenseMatrix::from_fn(4, 2, |i, j| (i * 2 + j) as f64);
        let want = m.t_matmul(&z).unwrap();
        assert!(agg.apply_transpose(&z).unwrap().max_abs_diff(&want) < 1e-15);
    }

    fn edge_lists() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
        (1usize..24).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 0..60)))
    }

    proptest! {
        #[test]
        fn csr_matches_dense_oracle((n, edges) in edge_lists(), seed in 0u64..1000) {
            let adj = normalize_adjacency(&graph(n, &edges));
            let oracle = dense_oracle(n, &edges);
            prop_assert!(adj.to_dense().max_abs_diff(&oracle) < 1e-14);
            let z = DenseMatrix::from_fn(n, 3, |i, j| ((i * 31 + j * 7) as u64 ^ seed) as f64 % 5.0 - 2.0);
            let want = oracle.matmul(&z).unwrap();
            prop_assert!(aggregate(&adj, &z).unwrap().max_abs_diff(&want) < 1e-12);
            let m = adj.matrix();
            for r in 0..n {
                prop_assert!(m.get(r, r) > 0.0);
                for (c, v) in m.row(r) {
                    prop_assert!(v > 0.0 && v <= 1.0);
                    prop_assert_eq!(v, m.get(c, r));
                }
            }
        }

        #[test]
        fn aggregate_is_linear((n, edges) in edge_lists(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let adj = normalize_adjacency(&graph(n, &edges));
            let z1 = DenseMatrix::from_fn(n, 2, |i, j| (i as f64 * 0.37 + j as f64).sin());
            let z2 = DenseMatrix::from_fn(n, 2, |i, j| (i as f64 * 1.3 - j as f64).cos());
            let lhs = aggregate(&adj, &z1.scale(a).add(&z2.scale(b)).unwrap()).unwrap();
            let rhs = aggregate(&adj, &z1).unwrap().scale(a).add(&aggregate(&adj, &z2).unwrap().scale(b)).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-9);
        }
    }
}
