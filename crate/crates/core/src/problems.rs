//! Benchmark problem families: Poisson grids, graph Laplacians with a
//! Dirichlet boundary, and shifted Laplacians.
//!
//! Every problem is an edge-weighted graph. The operator for weights `w` is
//! the interior block of `E diag(w) Eᵀ` plus `γI`, where `E` is the signed
//! incidence matrix.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rand::seq::index;
use rand::Rng as _;

use crate::linalg::{factorize, CsrMatrix, SpdOperator};
use crate::rng::{substream, Purpose};
use crate::{Error, Result};

/// Boundary size used for graph problems when none is given.
pub const DEFAULT_BOUNDARY: usize = 6;

const BOUNDARY_ATTEMPTS: usize = 100;

/// Random geometric graph on 200 vertices, unit weights.
pub const GEOMETRIC_200: &str = include_str!("../data/geometric-200.edges");
/// Preferential-attachment graph on 300 vertices, unit weights.
pub const ATTACHMENT_300: &str = include_str!("../data/attachment-300.edges");

/// Vertices, oriented edges and the Dirichlet boundary of a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidenceStructure {
    vertices: usize,
    edges: Vec<(usize, usize)>,
    boundary: Vec<usize>,
}

impl IncidenceStructure {
    /// Graph without boundary vertices.
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(u, v) in &edges {
            if u >= vertices || v >= vertices {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) references a vertex outside 0..{vertices}"
                )));
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop at vertex {u}")));
            }
        }
        Ok(Self { vertices, edges, boundary: Vec::new() })
    }

    /// Path graph `0 - 1 - … - (vertices - 1)`.
    pub fn path(vertices: usize) -> Self {
        let edges = (1..vertices).map(|i| (i - 1, i)).collect();
        Self { vertices, edges, boundary: Vec::new() }
    }

    /// Replaces the boundary set. Duplicates are removed.
    pub fn with_boundary(mut self, mut boundary: Vec<usize>) -> Result<Self> {
        boundary.sort_unstable();
        boundary.dedup();
        if let Some(&v) = boundary.last() {
            if v >= self.vertices {
                return Err(Error::InvalidParameter(format!(
                    "boundary vertex {v} outside 0..{}",
                    self.vertices
                )));
            }
        }
        self.boundary = boundary;
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted boundary vertices.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    /// Sorted interior vertices.
    pub fn interior(&self) -> Vec<usize> {
        let mut is_boundary = vec![false; self.vertices];
        for &v in &self.boundary {
            is_boundary[v] = true;
        }
        (0..self.vertices).filter(|&v| !is_boundary[v]).collect()
    }
}

#[derive(Clone, Copy, Debug)]
struct EdgeSlots {
    diag_u: Option<usize>,
    diag_v: Option<usize>,
    off: Option<(usize, usize)>,
}

/// Precomputed map from edge weights to the sparse interior operator.
#[derive(Clone, Debug)]
pub struct Assembly {
    pattern: CsrMatrix,
    diag: Vec<usize>,
    slots: Vec<EdgeSlots>,
    gamma: f64,
}

impl Assembly {
    pub fn new(structure: &IncidenceStructure, gamma: f64) -> Self {
        let interior = structure.interior();
        let mut local = vec![None; structure.vertices];
        for (i, &v) in interior.iter().enumerate() {
            local[v] = Some(i);
        }
        let n = interior.len();
        let mut triplets: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 0.0)).collect();
        for &(u, v) in &structure.edges {
            if let (Some(i), Some(j)) = (local[u], local[v]) {
                triplets.push((i, j, 0.0));
                triplets.push((j, i, 0.0));
            }
        }
        let pattern = CsrMatrix::from_triplets(n, &triplets);
        let diag = (0..n).map(|i| pattern.position(i, i).expect("diagonal is stored")).collect::<Vec<_>>();
        let slots = structure
            .edges
            .iter()
            .map(|&(u, v)| {
                let (lu, lv) = (local[u], local[v]);
                EdgeSlots {
                    diag_u: lu.map(|i| diag[i]),
                    diag_v: lv.map(|j| diag[j]),
                    off: lu.zip(lv).map(|(i, j)| {
                        (pattern.position(i, j).expect("edge is stored"), pattern.position(j, i).expect("edge is stored"))
                    }),
                }
            })
            .collect();
        Self { pattern, diag, slots, gamma }
    }

    pub fn dim(&self) -> usize {
        self.pattern.dim()
    }

    pub fn edge_count(&self) -> usize {
        self.slots.len()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Interior operator for edge weights `weights`.
    pub fn assemble(&self, weights: &[f64]) -> Result<SpdOperator> {
        if weights.len() != self.slots.len() {
            return Err(Error::StructureMismatch { expected: self.slots.len(), found: weights.len() });
        }
        let mut m = self.pattern.clone();
        let values = m.values_mut();
        values.iter_mut().for_each(|x| *x = 0.0);
        for &d in &self.diag {
            values[d] = self.gamma;
        }
        for (s, &w) in self.slots.iter().zip(weights) {
            if let Some(d) = s.diag_u {
                values[d] += w;
            }
            if let Some(d) = s.diag_v {
                values[d] += w;
            }
            if let Some((a, b)) = s.off {
                values[a] -= w;
                values[b] -= w;
            }
        }
        Ok(SpdOperator::from_csr_unchecked(m))
    }
}

/// A benchmark problem: graph, true weights, shift and right-hand-side sign.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    name: String,
    structure: IncidenceStructure,
    weights: Vec<f64>,
    gamma: f64,
    negate_rhs: bool,
    assembly: Arc<Assembly>,
}

impl ProblemInstance {
    fn build(
        name: String,
        structure: IncidenceStructure,
        weights: Vec<f64>,
        gamma: f64,
        negate_rhs: bool,
    ) -> Result<Self> {
        if weights.len() != structure.edge_count() {
            return Err(Error::StructureMismatch { expected: structure.edge_count(), found: weights.len() });
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidParameter(format!("edge weight {w} is not positive")));
        }
        let assembly = Arc::new(Assembly::new(&structure, gamma));
        if assembly.dim() == 0 {
            return Err(Error::InvalidSize("problem has no interior vertices".into()));
        }
        Ok(Self { name, structure, weights, gamma, negate_rhs, assembly })
    }

    /// Path with `n` interior vertices and both endpoints on the boundary.
    pub fn grid_1d(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("1D grid needs at least one interior point".into()));
        }
        let structure = IncidenceStructure::path(n + 2).with_boundary(vec![0, n + 1])?;
        let weights = vec![1.0; structure.edge_count()];
        Self::build(format!("poisson1d n={n}"), structure, weights, 0.0, true)
    }

    /// `nx × ny` interior grid with a five-point stencil and the outer ring
    /// as boundary. Edges between two boundary vertices are omitted.
    pub fn grid_2d(nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidSize(format!("2D grid {nx}x{ny} has no interior")));
        }
        let (w, h) = (nx + 2, ny + 2);
        let id = |x: usize, y: usize| y * w + x;
        let on_ring = |x: usize, y: usize| x == 0 || y == 0 || x == w - 1 || y == h - 1;
        let mut edges = Vec::new();
        let mut boundary = Vec::new();
        for y in 0..h {
            for x in 0..w {
                if on_ring(x, y) {
                    boundary.push(id(x, y));
                }
                if x + 1 < w && !(on_ring(x, y) && on_ring(x + 1, y)) {
                    edges.push((id(x, y), id(x + 1, y)));
                }
                if y + 1 < h && !(on_ring(x, y) && on_ring(x, y + 1)) {
                    edges.push((id(x, y), id(x, y + 1)));
                }
            }
        }
        let structure = IncidenceStructure::new(w * h, edges)?.with_boundary(boundary)?;
        let weights = vec![1.0; structure.edge_count()];
        Self::build(format!("poisson2d {nx}x{ny}"), structure, weights, 0.0, true)
    }

    /// Graph Laplacian restricted to the interior of `structure`.
    pub fn dirichlet(structure: IncidenceStructure, weights: Vec<f64>) -> Result<Self> {
        if structure.boundary().is_empty() {
            return Err(Error::InvalidParameter("Dirichlet problem needs a nonempty boundary".into()));
        }
        let name = format!("graph V={} E={} boundary={}", structure.vertices, structure.edge_count(), structure.boundary.len());
        Self::build(name, structure, weights, 0.0, false)
    }

    /// `L + γI` on all vertices of `structure`; any boundary is dropped.
    pub fn shifted(structure: IncidenceStructure, weights: Vec<f64>, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidShift(gamma));
        }
        let structure = structure.with_boundary(Vec::new())?;
        let name = format!("sparsify V={} E={} gamma={gamma}", structure.vertices, structure.edge_count());
        Self::build(name, structure, weights, gamma, false)
    }

    /// One edge into a boundary vertex, so the operator is the `1 × 1` matrix `[weight]`.
    pub fn scalar(weight: f64) -> Result<Self> {
        let structure = IncidenceStructure::path(2).with_boundary(vec![1])?;
        Self::build("scalar".into(), structure, vec![weight], 0.0, false)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn structure(&self) -> &IncidenceStructure {
        &self.structure
    }

    /// True edge weights `ω*`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Whether the right-hand side is negated before solving (Poisson problems).
    pub fn negate_rhs(&self) -> bool {
        self.negate_rhs
    }

    pub fn dim(&self) -> usize {
        self.assembly.dim()
    }

    pub fn assembly(&self) -> &Arc<Assembly> {
        &self.assembly
    }

    pub fn operator(&self, weights: &[f64]) -> Result<SpdOperator> {
        self.assembly.assemble(weights)
    }

    /// Ground-truth operator `A`.
    pub fn truth(&self) -> Result<SpdOperator> {
        self.assembly.assemble(&self.weights)
    }
}

/// Parses an edge list: one `u v [w]` per line, separated by whitespace or
/// commas. Lines starting with `%` or `#` are comments. Ids are 0-based if
/// the smallest id is 0 and 1-based otherwise. Repeated edges are merged by
/// summing weights.
pub fn parse_edge_list(text: &str) -> Result<(IncidenceStructure, Vec<f64>)> {
    let mut raw: Vec<(usize, u64, u64, f64)> = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') || t.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = t.split(|c: char| c.is_whitespace() || c == ',').filter(|f| !f.is_empty()).collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(Error::Parse { line: line_no, message: format!("expected 2 or 3 fields, found {}", fields.len()) });
        }
        let id = |f: &str| {
            f.parse::<u64>()
                .map_err(|_| Error::Parse { line: line_no, message: format!("invalid vertex id {f:?}") })
        };
        let (u, v) = (id(fields[0])?, id(fields[1])?);
        if u == v {
            return Err(Error::SelfLoop { line: line_no });
        }
        let w = match fields.get(2) {
            None => 1.0,
            Some(f) => match f.parse::<f64>() {
                Ok(w) if w.is_finite() && w > 0.0 => w,
                _ => return Err(Error::Parse { line: line_no, message: format!("invalid weight {f:?}") }),
            },
        };
        raw.push((line_no, u, v, w));
    }
    let Some(min_id) = raw.iter().map(|&(_, u, v, _)| u.min(v)).min() else {
        return Err(Error::EmptyGraph);
    };
    let offset = u64::from(min_id > 0);
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    let mut vertices = 0;
    for (line, u, v, w) in raw {
        let to_index = |x: u64| {
            usize::try_from(x - offset).map_err(|_| Error::Parse { line, message: format!("vertex id {x} too large") })
        };
        let (u, v) = (to_index(u)?, to_index(v)?);
        vertices = vertices.max(u.max(v) + 1);
        let key = (u.min(v), u.max(v));
        match index.get(&key) {
            Some(&e) => weights[e] += w,
            None => {
                index.insert(key, edges.len());
                edges.push((u, v));
                weights.push(w);
            }
        }
    }
    Ok((IncidenceStructure::new(vertices, edges)?, weights))
}

/// Reads and parses an edge-list file.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<(IncidenceStructure, Vec<f64>)> {
    parse_edge_list(&std::fs::read_to_string(path)?)
}

/// Writes `structure` in the edge-list format, 0-based. Weights equal to 1 are
/// omitted.
pub fn format_edge_list(structure: &IncidenceStructure, weights: &[f64], header: &str) -> String {
    let mut out = String::new();
    for line in header.lines() {
        let _ = writeln!(out, "% {line}");
    }
    for (&(u, v), &w) in structure.edges.iter().zip(weights) {
        if w == 1.0 {
            let _ = writeln!(out, "{u} {v}");
        } else {
            let _ = writeln!(out, "{u} {v} {w}");
        }
    }
    out
}

/// Chooses `count` boundary vertices uniformly at random such that the
/// unit-weight interior minor is positive definite, retrying up to 100 times.
pub fn select_boundary(structure: &IncidenceStructure, count: usize, seed: u64) -> Result<IncidenceStructure> {
    if count >= structure.vertices {
        return Err(Error::InvalidParameter(format!(
            "boundary count {count} must be below the vertex count {}",
            structure.vertices
        )));
    }
    if count == 0 {
        return structure.clone().with_boundary(Vec::new());
    }
    let mut rng = substream(seed, 0, Purpose::Boundary);
    let unit = vec![1.0; structure.edge_count()];
    for _ in 0..BOUNDARY_ATTEMPTS {
        let chosen = index::sample(&mut rng, structure.vertices, count).into_vec();
        let candidate = structure.clone().with_boundary(chosen)?;
        let op = Assembly::new(&candidate, 0.0).assemble(&unit)?;
        if factorize(&op).is_ok() {
            return Ok(candidate);
        }
    }
    Err(Error::CannotStabilize(BOUNDARY_ATTEMPTS))
}

struct DisjointSets(Vec<usize>);

impl DisjointSets {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
        ra != rb
    }
}

/// Random geometric graph: `n` uniform points in the unit square, joined when
/// closer than `radius`. Components are then chained along the x-order so the
/// graph is connected.
pub fn random_geometric(n: usize, radius: f64, seed: u64) -> Result<IncidenceStructure> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("geometric graph needs at least 2 vertices, got {n}")));
    }
    let mut rng = substream(seed, 0, Purpose::Graph);
    let points: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
    let mut sets = DisjointSets((0..n).collect());
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (dx, dy) = (points[i].0 - points[j].0, points[i].1 - points[j].1);
            if dx * dx + dy * dy < radius * radius {
                edges.push((i, j));
                sets.union(i, j);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| points[a].0.total_cmp(&points[b].0));
    for pair in order.windows(2) {
        if sets.union(pair[0], pair[1]) {
            edges.push((pair[0].min(pair[1]), pair[0].max(pair[1])));
        }
    }
    IncidenceStructure::new(n, edges)
}

/// Preferential attachment: a clique on `m + 1` vertices, then each new
/// vertex links to `m` distinct earlier vertices chosen proportionally to
/// degree.
pub fn preferential_attachment(n: usize, m: usize, seed: u64) -> Result<IncidenceStructure> {
    if m == 0 || n <= m {
        return Err(Error::InvalidSize(format!("preferential attachment needs n > m >= 1, got n={n}, m={m}")));
    }
    let mut rng = substream(seed, 0, Purpose::Graph);
    let mut edges = Vec::new();
    let mut ends = Vec::new();
    for i in 0..=m {
        for j in 0..i {
            edges.push((j, i));
            ends.extend([j, i]);
        }
    }
    for v in m + 1..n {
        let mut targets: Vec<usize> = Vec::with_capacity(m);
        while targets.len() < m {
            let t = ends[rng.random_range(0..ends.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for t in targets {
            edges.push((t, v));
            ends.extend([t, v]);
        }
    }
    IncidenceStructure::new(n, edges)
}

/// Regenerates the bundled graph files.
pub fn bundled_sources() -> Result<[(&'static str, String); 2]> {
    let geometric = random_geometric(200, 0.12, 20)?;
    let attachment = preferential_attachment(300, 2, 30)?;
    Ok([
        (
            "geometric-200.edges",
            format_edge_list(
                &geometric,
                &vec![1.0; geometric.edge_count()],
                "random geometric graph, n=200, radius=0.12, seed=20",
            ),
        ),
        (
            "attachment-300.edges",
            format_edge_list(
                &attachment,
                &vec![1.0; attachment.edge_count()],
                "preferential attachment graph, n=300, m=2, seed=30",
            ),
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn tridiag(n: usize, scale: f64) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => 2.0 * scale,
            1 => -scale,
            _ => 0.0,
        })
    }

    /// Dense `(E W Eᵀ)` restricted to the interior, plus `γI`.
    fn brute_force(structure: &IncidenceStructure, weights: &[f64], gamma: f64) -> DMatrix<f64> {
        let nv = structure.vertex_count();
        let mut e = DMatrix::zeros(nv, structure.edge_count());
        for (k, &(u, v)) in structure.edges().iter().enumerate() {
            e[(u, k)] = 1.0;
            e[(v, k)] = -1.0;
        }
        let full = &e * DMatrix::from_diagonal(&weights.to_vec().into()) * e.transpose();
        let interior = structure.interior();
        DMatrix::from_fn(interior.len(), interior.len(), |i, j| {
            full[(interior[i], interior[j])] + if i == j { gamma } else { 0.0 }
        })
    }

    #[test]
    fn grid_1d_operators() {
        assert_eq!(ProblemInstance::grid_1d(1).unwrap().truth().unwrap().to_dense(), DMatrix::from_element(1, 1, 2.0));
        let p = ProblemInstance::grid_1d(3).unwrap();
        assert_eq!(p.truth().unwrap().to_dense(), tridiag(3, 1.0));
        assert_eq!(p.operator(&[2.0; 4]).unwrap().to_dense(), tridiag(3, 2.0));
        assert!(p.negate_rhs());
        assert!(matches!(ProblemInstance::grid_1d(0), Err(Error::InvalidSize(_))));
    }

    #[test]
    fn grid_2d_operators() {
        let one = ProblemInstance::grid_2d(1, 1).unwrap().truth().unwrap().to_dense();
        assert_eq!(one, DMatrix::from_element(1, 1, 4.0));

        let a = ProblemInstance::grid_2d(2, 2).unwrap().truth().unwrap().to_dense();
        assert!((0..4).all(|i| a[(i, i)] == 4.0));
        let couplings = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).filter(|&(i, j)| i != j && a[(i, j)] == -1.0);
        assert_eq!(couplings.count(), 8);
        assert_eq!(a.iter().filter(|&&x| x != 0.0).count(), 12);

        let row = ProblemInstance::grid_2d(3, 1).unwrap().truth().unwrap().to_dense();
        assert_eq!(row, tridiag(3, 1.0) + DMatrix::identity(3, 3) * 2.0);
        assert!(ProblemInstance::grid_2d(0, 3).is_err());
    }

    #[test]
    fn assembly_matches_brute_force() {
        let g = random_geometric(30, 0.3, 5).unwrap().with_boundary(vec![0, 7, 12]).unwrap();
        let weights: Vec<f64> = (0..g.edge_count()).map(|k| 0.5 + (k % 7) as f64 * 0.3).collect();
        let a = ProblemInstance::dirichlet(g.clone(), weights.clone()).unwrap();
        let diff = a.truth().unwrap().to_dense() - brute_force(&g, &weights, 0.0);
        assert!(diff.amax() < 1e-14);

        let s = ProblemInstance::shifted(g.clone(), weights.clone(), 0.5).unwrap();
        let full = g.with_boundary(Vec::new()).unwrap();
        let diff = s.truth().unwrap().to_dense() - brute_force(&full, &weights, 0.5);
        assert!(diff.amax() < 1e-14);
    }

    #[test]
    fn shifted_examples() {
        let edge = IncidenceStructure::path(2);
        let a = ProblemInstance::shifted(edge.clone(), vec![1.0], 1.0).unwrap().truth().unwrap().to_dense();
        assert_eq!(a, DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]));

        let empty = IncidenceStructure::new(2, Vec::new()).unwrap();
        let a = ProblemInstance::shifted(empty, Vec::new(), 1.0).unwrap().truth().unwrap().to_dense();
        assert_eq!(a, DMatrix::identity(2, 2));

        assert!(matches!(ProblemInstance::shifted(edge.clone(), vec![1.0], 0.0), Err(Error::InvalidShift(_))));
        assert!(ProblemInstance::dirichlet(edge, vec![1.0]).is_err());
    }

    #[test]
    fn scalar_instance() {
        let p = ProblemInstance::scalar(1.5).unwrap();
        assert_eq!(p.dim(), 1);
        assert_eq!(p.truth().unwrap().get(0, 0), 1.5);
    }

    #[test]
    fn assembly_checks_length() {
        let p = ProblemInstance::grid_1d(3).unwrap();
        assert!(matches!(p.operator(&[1.0; 3]), Err(Error::StructureMismatch { expected: 4, found: 3 })));
    }

    #[test]
    fn parse_examples() {
        let (s, w) = parse_edge_list("0 1\n1 2\n").unwrap();
        assert_eq!(s, IncidenceStructure::path(3));
        assert_eq!(w, vec![1.0, 1.0]);

        let (s1, w1) = parse_edge_list("1 2 0.5\n2 3 0.5\n").unwrap();
        assert_eq!(s1, s);
        assert_eq!(w1, vec![0.5, 0.5]);

        let (s2, w2) = parse_edge_list("% header\n# more\n\n0\t1\n1 ,\t2\n").unwrap();
        assert_eq!((s2, w2), (s, w));
    }

    #[test]
    fn parse_merges_duplicates() {
        let (s, w) = parse_edge_list("0 1 1\n1 0 2.5\n1 2\n").unwrap();
        assert_eq!(s.edge_count(), 2);
        assert_eq!(w, vec![3.5, 1.0]);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_edge_list("0 1\n2 2\n"), Err(Error::SelfLoop { line: 2 })));
        assert!(matches!(parse_edge_list("% nothing\n"), Err(Error::EmptyGraph)));
        assert!(matches!(parse_edge_list("0 1\n0 x\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_edge_list("0 1 -1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_edge_list("0 1 1 1\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn format_round_trip() {
        let g = preferential_attachment(20, 2, 1).unwrap();
        let w: Vec<f64> = (0..g.edge_count()).map(|k| if k % 2 == 0 { 1.0 } else { 0.25 }).collect();
        let text = format_edge_list(&g, &w, "test");
        assert_eq!(parse_edge_list(&text).unwrap(), (g, w));
    }

    #[test]
    fn boundary_selection() {
        let path = IncidenceStructure::path(5);
        let fixed = path.clone().with_boundary(vec![4, 0]).unwrap();
        assert_eq!(fixed.interior(), vec![1, 2, 3]);

        let a = select_boundary(&path, 2, 9).unwrap();
        let b = select_boundary(&path, 2, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.boundary().len(), 2);
        assert!(select_boundary(&path, 0, 9).unwrap().boundary().is_empty());
        assert!(select_boundary(&path, 5, 9).is_err());
    }

    #[test]
    fn boundary_selection_fails_on_unreachable_component() {
        let g = IncidenceStructure::new(4, vec![(0, 1)]).unwrap();
        assert!(matches!(select_boundary(&g, 1, 3), Err(Error::CannotStabilize(100))));
    }

    #[test]
    fn generated_graphs_are_connected() {
        for g in [random_geometric(200, 0.12, 20).unwrap(), preferential_attachment(300, 2, 30).unwrap()] {
            let mut sets = DisjointSets((0..g.vertex_count()).collect());
            for &(u, v) in g.edges() {
                sets.union(u, v);
            }
            let root = sets.find(0);
            assert!((0..g.vertex_count()).all(|v| sets.find(v) == root));
        }
    }

    #[test]
    fn bundled_files_match_generators() {
        let [(_, geometric), (_, attachment)] = bundled_sources().unwrap();
        assert_eq!(geometric, GEOMETRIC_200);
        assert_eq!(attachment, ATTACHMENT_300);
    }
}
