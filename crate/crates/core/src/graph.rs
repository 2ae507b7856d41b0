//! Edge sets, spanning trees and Dempster covariance selection.
//!
//! Covariance selection is carried out on the precision matrix: starting
//! from `diag(Σ_X)⁻¹`, each edge `(i, j)` adds the inverse of the 2×2
//! principal submatrix on `{i, j}` and removes the two 1×1 inverses it
//! double counts. For a tree the result keeps the diagonal and the edge
//! correlations of Σ_X and has zero precision off the tree.

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;

use nalgebra::{Cholesky, DMatrix};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::CorrelationMatrix;

/// A set of undirected edges over `n` vertices, kept in insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeSet {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl EdgeSet {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(Error::InvalidStructure(format!(
                    "edge ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidStructure(format!("self-loop at vertex {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidStructure(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(Self { n, edges })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, edges: Vec::new() }
    }

    /// Every pair `(i, j)` with `i < j`.
    pub fn complete(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        Self { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.edges
            .iter()
            .any(|&(a, b)| (a == u && b == v) || (a == v && b == u))
    }

    /// Edges as `(min, max)` pairs in lexicographic order.
    pub fn canonical(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = self.edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
        out.sort_unstable();
        out
    }

    /// Parses the edge-list text format: one `u,v` pair per line, 0-based,
    /// with `#` comments and blank lines ignored.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: idx + 1,
                message,
            };
            let mut parts = line.split(',');
            let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(parse_err(format!("expected `u,v`, found `{line}`")));
            };
            let u = a
                .trim()
                .parse::<usize>()
                .map_err(|e| parse_err(format!("bad vertex `{}`: {e}", a.trim())))?;
            let v = b
                .trim()
                .parse::<usize>()
                .map_err(|e| parse_err(format!("bad vertex `{}`: {e}", b.trim())))?;
            edges.push((u, v));
        }
        Self::new(n, edges)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u},{v}");
        }
        out
    }
}

/// An edge set with exactly `n − 1` edges forming a spanning tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct TreeStructure(EdgeSet);

impl TreeStructure {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        Self::try_from(EdgeSet::new(n, edges)?)
    }

    pub fn edge_set(&self) -> &EdgeSet {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.0.edges
    }

    pub fn canonical(&self) -> Vec<(usize, usize)> {
        self.0.canonical()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n()];
        for &(u, v) in self.edges() {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// Star centred at `hub`.
    pub fn star(n: usize, hub: usize) -> Result<Self> {
        Self::new(n, (0..n).filter(|&v| v != hub).map(|v| (hub, v)).collect())
    }

    /// Path `0 − 1 − … − (n−1)`.
    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|v| (v - 1, v)).collect())
    }
}

impl TryFrom<EdgeSet> for TreeStructure {
    type Error = Error;

    fn try_from(set: EdgeSet) -> Result<Self> {
        let n = set.n;
        if n == 0 {
            return Err(Error::InvalidStructure("tree needs at least one vertex".into()));
        }
        if set.len() != n - 1 {
            return Err(Error::InvalidStructure(format!(
                "a spanning tree on {n} vertices has {} edges, found {}",
                n - 1,
                set.len()
            )));
        }
        let mut uf = UnionFind::new(n);
        for &(u, v) in &set.edges {
            if !uf.union(u, v) {
                return Err(Error::InvalidStructure(format!("edge ({u}, {v}) closes a cycle")));
            }
        }
        Ok(Self(set))
    }
}

impl From<TreeStructure> for EdgeSet {
    fn from(t: TreeStructure) -> Self {
        t.0
    }
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already connected.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// A model covariance Σ_M and the structure it was selected for.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelCovariance {
    base: CorrelationMatrix,
    structure: EdgeSet,
}

impl ModelCovariance {
    pub fn base(&self) -> &CorrelationMatrix {
        &self.base
    }

    pub fn structure(&self) -> &EdgeSet {
        &self.structure
    }

    pub fn into_parts(self) -> (CorrelationMatrix, EdgeSet) {
        (self.base, self.structure)
    }

    pub(crate) fn from_parts(base: CorrelationMatrix, structure: EdgeSet) -> Self {
        Self { base, structure }
    }
}

fn check_dims(sigma: &CorrelationMatrix, structure: &EdgeSet) -> Result<()> {
    if structure.n() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            found: structure.n(),
        });
    }
    Ok(())
}

/// Adds edge `(i, j)` to the precision matrix in place.
fn apply_edge(sigma: &CorrelationMatrix, precision: &mut DMatrix<f64>, i: usize, j: usize) -> Result<()> {
    let (sii, sjj, sij) = (sigma.get(i, i), sigma.get(j, j), sigma.get(i, j));
    let det = sii * sjj - sij * sij;
    if !(det > 1e-14 * sii * sjj) {
        return Err(Error::SingularSubmatrix {
            u: i,
            v: j,
            rho: sij / (sii * sjj).sqrt(),
        });
    }
    precision[(i, i)] += sjj / det - 1.0 / sii;
    precision[(j, j)] += sii / det - 1.0 / sjj;
    precision[(i, j)] -= sij / det;
    precision[(j, i)] -= sij / det;
    Ok(())
}

fn initial_precision(sigma: &CorrelationMatrix) -> DMatrix<f64> {
    let n = sigma.dim();
    DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 / sigma.get(i, i) } else { 0.0 })
}

fn invert_precision(precision: DMatrix<f64>) -> Result<CorrelationMatrix> {
    let n = precision.nrows();
    let chol = Cholesky::new(precision).ok_or_else(|| {
        Error::InvalidStructure("selected precision matrix is not positive definite".into())
    })?;
    let inv = chol.solve(&DMatrix::identity(n, n));
    Ok(CorrelationMatrix::from_trusted((&inv + inv.transpose()) * 0.5))
}

/// Projects Σ_X onto `structure` by the edge-by-edge precision recursion.
///
/// The selection rules are guaranteed for trees (and decomposable
/// structures); for other edge sets call [`verify_selection_rules`] on the
/// result.
pub fn covariance_select(sigma: &CorrelationMatrix, structure: &EdgeSet) -> Result<ModelCovariance> {
    check_dims(sigma, structure)?;
    let mut precision = initial_precision(sigma);
    for &(i, j) in structure.edges() {
        apply_edge(sigma, &mut precision, i, j)?;
    }
    Ok(ModelCovariance {
        base: invert_precision(precision)?,
        structure: structure.clone(),
    })
}

/// The models `Σ_{X_0}, …, Σ_{X_r}` after each prefix of the edge list.
/// Element 0 is `diag(Σ_X)`.
pub fn selection_path(sigma: &CorrelationMatrix, structure: &EdgeSet) -> Result<Vec<ModelCovariance>> {
    check_dims(sigma, structure)?;
    let n = sigma.dim();
    let mut precision = initial_precision(sigma);
    let mut out = Vec::with_capacity(structure.len() + 1);
    out.push(ModelCovariance {
        base: invert_precision(precision.clone())?,
        structure: EdgeSet::empty(n),
    });
    for (r, &(i, j)) in structure.edges().iter().enumerate() {
        apply_edge(sigma, &mut precision, i, j)?;
        out.push(ModelCovariance {
            base: invert_precision(precision.clone())?,
            structure: EdgeSet {
                n,
                edges: structure.edges()[..=r].to_vec(),
            },
        });
    }
    Ok(out)
}

/// Closed form for trees: the model correlation between `u` and `v` is the
/// product of Σ_X correlations along the tree path joining them.
pub fn tree_path_product(sigma: &CorrelationMatrix, tree: &TreeStructure) -> Result<ModelCovariance> {
    check_dims(sigma, tree.edge_set())?;
    let n = tree.n();
    let adj = tree.adjacency();
    let mut m = DMatrix::identity(n, n);
    let mut queue = VecDeque::with_capacity(n);
    for root in 0..n {
        let mut visited = vec![false; n];
        visited[root] = true;
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !visited[v] {
                    visited[v] = true;
                    m[(root, v)] = m[(root, u)] * sigma.get(u, v);
                    queue.push_back(v);
                }
            }
        }
    }
    Ok(ModelCovariance {
        base: CorrelationMatrix::from_trusted(m),
        structure: tree.edge_set().clone(),
    })
}

/// Largest violation of each of the three covariance-selection rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionReport {
    /// `max |Σ_M[i][i] − Σ_X[i][i]|`
    pub diagonal: f64,
    /// `max |Σ_M[i][j] − Σ_X[i][j]|` over edges of the structure.
    pub in_structure: f64,
    /// `max |(Σ_M⁻¹)[i][j]|` over non-edges `i ≠ j`.
    pub inverse_zero: f64,
}

impl SelectionReport {
    pub fn max(&self) -> f64 {
        self.diagonal.max(self.in_structure).max(self.inverse_zero)
    }
}

pub fn verify_selection_rules(sigma: &CorrelationMatrix, model: &ModelCovariance) -> Result<SelectionReport> {
    let n = sigma.dim();
    if model.base.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: model.base.dim(),
        });
    }
    let diagonal = (0..n)
        .map(|i| (model.base.get(i, i) - sigma.get(i, i)).abs())
        .fold(0.0, f64::max);
    let in_structure = model
        .structure
        .edges()
        .iter()
        .map(|&(u, v)| (model.base.get(u, v) - sigma.get(u, v)).abs())
        .fold(0.0, f64::max);

    let mut in_set = vec![false; n * n];
    for &(u, v) in model.structure.edges() {
        in_set[u * n + v] = true;
        in_set[v * n + u] = true;
    }
    let precision = model
        .base
        .cholesky()?
        .solve(&DMatrix::identity(n, n));
    let mut inverse_zero = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j && !in_set[i * n + j] {
                inverse_zero = inverse_zero.max(precision[(i, j)].abs());
            }
        }
    }
    Ok(SelectionReport {
        diagonal,
        in_structure,
        inverse_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::toeplitz_equicorrelation;
    use crate::reference::{four_node_sigma, four_node_tree, FOUR_NODE_MODEL};

    #[test]
    fn edge_set_validation() {
        assert!(EdgeSet::new(3, vec![(0, 3)]).is_err());
        assert!(EdgeSet::new(3, vec![(1, 1)]).is_err());
        assert!(EdgeSet::new(3, vec![(0, 1), (1, 0)]).is_err());
        assert!(TreeStructure::new(3, vec![(0, 1)]).is_err());
        assert!(TreeStructure::new(4, vec![(0, 1), (1, 2), (2, 0)]).is_err());
        assert!(TreeStructure::new(4, vec![(0, 1), (2, 3), (1, 2)]).is_ok());
    }

    #[test]
    fn parse_edge_list() {
        let text = "# tree\n0,1\n\n 0 , 2 # hub\n2,3\n";
        let set = EdgeSet::parse(text, 4).unwrap();
        assert_eq!(set.edges(), &[(0, 1), (0, 2), (2, 3)]);
        assert_eq!(EdgeSet::parse(&set.to_text(), 4).unwrap(), set);

        match EdgeSet::parse("0,1\n1;2\n", 3) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(EdgeSet::parse("0,x\n", 3), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn empty_structure_gives_identity() {
        let s = four_node_sigma();
        let m = covariance_select(&s, &EdgeSet::empty(4)).unwrap();
        assert!((m.base().as_matrix() - DMatrix::identity(4, 4)).amax() < 1e-15);
    }

    #[test]
    fn four_node_tree_matches_published_model() {
        let s = four_node_sigma();
        let m = covariance_select(&s, four_node_tree().edge_set()).unwrap();
        for (i, row) in FOUR_NODE_MODEL.iter().enumerate() {
            for (j, &want) in row.iter().enumerate() {
                assert!((m.base().get(i, j) - want).abs() < 5e-4, "({i},{j})");
            }
        }
        assert!((m.base().get(1, 3) - 0.567).abs() < 1e-12);
    }

    #[test]
    fn chain_on_toeplitz_is_power_of_rho() {
        let s = toeplitz_equicorrelation(4, 0.5).unwrap();
        let m = covariance_select(&s, TreeStructure::path(4).unwrap().edge_set()).unwrap();
        assert!((m.base().get(0, 3) - 0.125).abs() < 1e-12);
    }

    #[test]
    fn path_product_examples() {
        let s = four_node_sigma();
        let m = tree_path_product(&s, &four_node_tree()).unwrap();
        assert_eq!(m.base().get(0, 1), s.get(0, 1));
        assert!((m.base().get(1, 3) - 0.9 * 0.9 * 0.7).abs() < 1e-15);

        let t = toeplitz_equicorrelation(5, 0.3).unwrap();
        let star = tree_path_product(&t, &TreeStructure::star(5, 0).unwrap()).unwrap();
        assert!((star.base().get(2, 4) - 0.09).abs() < 1e-15);
    }

    #[test]
    fn selection_rule_report() {
        let s = four_node_sigma();
        let m = covariance_select(&s, four_node_tree().edge_set()).unwrap();
        assert!(verify_selection_rules(&s, &m).unwrap().max() <= 1e-8);

        let full = ModelCovariance::from_parts(s.clone(), EdgeSet::complete(4));
        let r = verify_selection_rules(&s, &full).unwrap();
        assert_eq!(r.max(), 0.0);

        let ident = ModelCovariance::from_parts(
            CorrelationMatrix::identity(4),
            TreeStructure::path(4).unwrap().into(),
        );
        let r = verify_selection_rules(&s, &ident).unwrap();
        assert!(r.in_structure >= 0.3);
        assert!((r.in_structure - 0.9).abs() < 1e-15);
    }

    #[test]
    fn singular_edge_is_rejected() {
        // Unit-diagonal but only positive semidefinite; bypass validation.
        let s = CorrelationMatrix::from_trusted(DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        ));
        let err = covariance_select(&s, &EdgeSet::new(3, vec![(0, 1)]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::SingularSubmatrix { u: 0, v: 1, .. }));
    }

    #[test]
    fn order_independent_on_trees() {
        let s = four_node_sigma();
        let a = covariance_select(&s, &EdgeSet::new(4, vec![(0, 1), (0, 2), (2, 3)]).unwrap()).unwrap();
        let b = covariance_select(&s, &EdgeSet::new(4, vec![(3, 2), (1, 0), (2, 0)]).unwrap()).unwrap();
        assert!((a.base().as_matrix() - b.base().as_matrix()).amax() < 1e-12);
    }

    #[test]
    fn cyclic_structure_is_flagged_not_hidden() {
        let s = four_node_sigma();
        let cycle = EdgeSet::new(4, vec![(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        match covariance_select(&s, &cycle) {
            Ok(m) => {
                let r = verify_selection_rules(&s, &m).unwrap();
                assert!(r.max() > 1e-6, "cycle unexpectedly conforms: {r:?}");
            }
            Err(Error::InvalidStructure(_)) => {}
            Err(e) => panic!("unexpected {e:?}"),
        }
    }
}
