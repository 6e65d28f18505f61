//! Simplicial complexes over bitmask-encoded vertex sets.
//!
//! Conventions used by every module downstream: vertex `i` (1-based in all
//! external formats) maps to qubit `i-1` and to bit `i-1` of a mask; a simplex
//! is a nonzero mask; its computational-basis index is the integer value of the
//! mask; a k-simplex has `popcount(mask) == k + 1`. The empty set is never a
//! member.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

/// Hard cap so masks fit in `u32` and `2^n` fits in `u64`.
pub const MAX_VERTICES: usize = 32;

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("point {index} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("epsilon must be finite and >= 0, got {0}")]
    BadEpsilon(f64),
    #[error("unknown metric `{0}` (expected euclidean, manhattan or chebyshev)")]
    UnknownMetric(String),
    #[error("vertex count must be at least 1")]
    NoVertices,
    #[error("vertex count {0} exceeds the supported maximum of {MAX_VERTICES}")]
    TooManyVertices(usize),
    #[error("vertex index {vertex} out of range 1..={n}")]
    VertexOutOfRange { vertex: i64, n: usize },
    #[error("simplex list contains an empty simplex")]
    EmptySimplex,
    #[error("vertices {0:?} are not covered by any simplex; declare them as explicit 0-simplices")]
    UncoveredVertices(Vec<usize>),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Distance function used for Vietoris-Rips edge selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Manhattan,
    Chebyshev,
}

impl Metric {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::Chebyshev => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
        }
    }
}

impl FromStr for Metric {
    type Err = ComplexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" => Ok(Metric::Euclidean),
            "manhattan" => Ok(Metric::Manhattan),
            "chebyshev" => Ok(Metric::Chebyshev),
            other => Err(ComplexError::UnknownMetric(other.to_string())),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Euclidean => write!(f, "euclidean"),
            Metric::Manhattan => write!(f, "manhattan"),
            Metric::Chebyshev => write!(f, "chebyshev"),
        }
    }
}

/// A finite set of points in a common ambient dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self, ComplexError> {
        if points.is_empty() {
            return Err(ComplexError::EmptyCloud);
        }
        let dim = points[0].len();
        for (index, p) in points.iter().enumerate() {
            if p.len() != dim || dim == 0 {
                return Err(ComplexError::DimensionMismatch {
                    index,
                    got: p.len(),
                    expected: dim,
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(ComplexError::NonFinite { index });
            }
        }
        if points.len() > MAX_VERTICES {
            return Err(ComplexError::TooManyVertices(points.len()));
        }
        Ok(PointCloud { points })
    }

    /// Reads one point per row, columns as coordinates. A first row that does
    /// not parse as numbers is treated as a header and skipped.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self, ComplexError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let mut points = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let parsed: Result<Vec<f64>, _> = record.iter().map(|f| f.parse::<f64>()).collect();
            match parsed {
                Ok(row) => points.push(row),
                // only the first row may be non-numeric (header)
                Err(_) if i == 0 => continue,
                Err(_) => return Err(ComplexError::NonFinite { index: i }),
            }
        }
        PointCloud::new(points)
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<Self, ComplexError> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn distance(&self, i: usize, j: usize, metric: Metric) -> f64 {
        metric.distance(&self.points[i], &self.points[j])
    }
}

/// A downward-closed family of nonempty vertex subsets.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialComplex {
    n: usize,
    simplices: BTreeSet<u32>,
    /// Filtration scale when built from a point cloud.
    pub epsilon: Option<f64>,
    /// Metric name when built from a point cloud.
    pub metric_name: Option<String>,
}

impl SimplicialComplex {
    /// Builds from arbitrary simplices, completing the downward closure and
    /// rejecting vertices that appear in none of them.
    pub fn from_masks<I: IntoIterator<Item = u32>>(n: usize, masks: I) -> Result<Self, ComplexError> {
        if n == 0 {
            return Err(ComplexError::NoVertices);
        }
        if n > MAX_VERTICES {
            return Err(ComplexError::TooManyVertices(n));
        }
        let full: u64 = (1u64 << n) - 1;
        let mut set = BTreeSet::new();
        let mut covered: u64 = 0;
        for mask in masks {
            if mask == 0 {
                return Err(ComplexError::EmptySimplex);
            }
            if u64::from(mask) & !full != 0 {
                let vertex = i64::from(32 - mask.leading_zeros());
                return Err(ComplexError::VertexOutOfRange { vertex, n });
            }
            covered |= u64::from(mask);
            let mut s = mask;
            while s != 0 {
                set.insert(s);
                s = (s - 1) & mask;
            }
        }
        if covered != full {
            let missing = (0..n).filter(|v| covered & (1 << v) == 0).map(|v| v + 1).collect();
            return Err(ComplexError::UncoveredVertices(missing));
        }
        Ok(SimplicialComplex {
            n,
            simplices: set,
            epsilon: None,
            metric_name: None,
        })
    }

    /// Convenience constructor from 1-based vertex lists.
    pub fn from_maximal(n: usize, maximal: &[&[usize]]) -> Result<Self, ComplexError> {
        let mut masks = Vec::with_capacity(maximal.len());
        for simplex in maximal {
            masks.push(vertices_to_mask(simplex.iter().map(|&v| v as i64), n)?);
        }
        Self::from_masks(n, masks)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn contains(&self, mask: u32) -> bool {
        self.simplices.contains(&mask)
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// All simplex masks in ascending order; these are exactly the
    /// computational-basis indices spanned by the complex projector.
    pub fn all_masks(&self) -> Vec<u32> {
        self.simplices.iter().copied().collect()
    }

    /// Masks of the k-simplices in ascending order.
    pub fn simplices_of_order(&self, k: usize) -> Vec<u32> {
        let want = (k + 1) as u32;
        self.simplices
            .iter()
            .copied()
            .filter(|m| m.count_ones() == want)
            .collect()
    }

    /// Number of k-simplices.
    pub fn s_count(&self, k: usize) -> usize {
        self.simplices_of_order(k).len()
    }

    /// Largest k with at least one k-simplex.
    pub fn max_order(&self) -> usize {
        self.simplices
            .iter()
            .map(|m| m.count_ones() as usize - 1)
            .max()
            .unwrap_or(0)
    }

    /// Basis-state indices spanned by the order-k block of the complex
    /// projector; identical to [`Self::simplices_of_order`] by the mask
    /// encoding.
    pub fn projector_basis(&self, k: usize) -> Vec<u32> {
        self.simplices_of_order(k)
    }

    /// The constant `2^n - |S_k|`: the dimension of everything outside the
    /// order-k block, which enters the trace signal as a frozen contribution.
    pub fn complement_constant(&self, k: usize) -> u64 {
        (1u64 << self.n) - self.s_count(k) as u64
    }
}

fn vertices_to_mask<I: IntoIterator<Item = i64>>(vertices: I, n: usize) -> Result<u32, ComplexError> {
    let mut mask = 0u32;
    let mut any = false;
    for v in vertices {
        if v < 1 || v > n as i64 {
            return Err(ComplexError::VertexOutOfRange { vertex: v, n });
        }
        mask |= 1 << (v - 1);
        any = true;
    }
    if !any {
        return Err(ComplexError::EmptySimplex);
    }
    Ok(mask)
}

fn clique_masks(n: usize, adj: &[u32], max_order: usize) -> BTreeSet<u32> {
    let mut simplices: BTreeSet<u32> = (0..n).map(|v| 1u32 << v).collect();
    // grow cliques by their highest vertex only, so each is produced once
    let mut frontier: Vec<u32> = simplices.iter().copied().collect();
    for _ in 0..max_order {
        let mut next = Vec::new();
        for &m in &frontier {
            let top = (31 - m.leading_zeros()) as usize;
            for v in (top + 1)..n {
                if adj[v] & m == m {
                    next.push(m | (1 << v));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        simplices.extend(next.iter().copied());
        frontier = next;
    }
    simplices
}

/// Builds the clique (Vietoris-Rips) complex of the `d <= epsilon` graph: a
/// vertex subset is a simplex iff all pairwise distances are within epsilon.
/// The comparison is inclusive and exact on computed doubles. `max_order`
/// caps the simplex order (defaults to `n - 1`).
pub fn build_vietoris_rips(
    cloud: &PointCloud,
    metric: Metric,
    epsilon: f64,
    max_order: Option<usize>,
) -> Result<SimplicialComplex, ComplexError> {
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(ComplexError::BadEpsilon(epsilon));
    }
    let n = cloud.len();
    if n == 0 {
        return Err(ComplexError::EmptyCloud);
    }
    let mut adj = vec![0u32; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if cloud.distance(i, j, metric) <= epsilon {
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            }
        }
    }
    let cap = max_order.unwrap_or(n - 1).min(n - 1);
    Ok(SimplicialComplex {
        n,
        simplices: clique_masks(n, &adj, cap),
        epsilon: Some(epsilon),
        metric_name: Some(metric.to_string()),
    })
}

/// Clique (flag) complex of an explicit graph given by 1-based edges: every
/// vertex is a 0-simplex and every clique of the graph is filled in.
pub fn clique_complex(n: usize, edges: &[(usize, usize)]) -> Result<SimplicialComplex, ComplexError> {
    if n == 0 {
        return Err(ComplexError::NoVertices);
    }
    if n > MAX_VERTICES {
        return Err(ComplexError::TooManyVertices(n));
    }
    let mut adj = vec![0u32; n];
    for &(a, b) in edges {
        for v in [a, b] {
            if v < 1 || v > n {
                return Err(ComplexError::VertexOutOfRange {
                    vertex: v as i64,
                    n,
                });
            }
        }
        if a != b {
            adj[a - 1] |= 1 << (b - 1);
            adj[b - 1] |= 1 << (a - 1);
        }
    }
    Ok(SimplicialComplex {
        n,
        simplices: clique_masks(n, &adj, n - 1),
        epsilon: None,
        metric_name: None,
    })
}

#[derive(Deserialize)]
struct ExplicitComplex {
    n: usize,
    maximal: Vec<Vec<i64>>,
}

/// Parses an explicit complex from a JSON document
/// `{"n": int, "maximal": [[int, ...], ...]}` with 1-based vertex indices.
/// The downward closure is completed automatically; every vertex must appear
/// in at least one listed simplex.
pub fn parse_complex(json: &str) -> Result<SimplicialComplex, ComplexError> {
    let raw: ExplicitComplex = serde_json::from_str(json)?;
    if raw.n == 0 {
        return Err(ComplexError::NoVertices);
    }
    if raw.n > MAX_VERTICES {
        return Err(ComplexError::TooManyVertices(raw.n));
    }
    let mut masks = Vec::with_capacity(raw.maximal.len());
    for simplex in &raw.maximal {
        masks.push(vertices_to_mask(simplex.iter().copied(), raw.n)?);
    }
    SimplicialComplex::from_masks(raw.n, masks)
}

pub fn parse_complex_path<P: AsRef<Path>>(path: P) -> Result<SimplicialComplex, ComplexError> {
    parse_complex(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cloud(points: &[&[f64]]) -> PointCloud {
        PointCloud::new(points.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn rips_excludes_pair_beyond_epsilon() {
        let c = cloud(&[&[0.0], &[1.0]]);
        let cx = build_vietoris_rips(&c, Metric::Euclidean, 0.5, None).unwrap();
        assert_eq!(cx.s_count(0), 2);
        assert_eq!(cx.s_count(1), 0);
    }

    #[test]
    fn rips_inclusive_at_boundary_distance() {
        let c = cloud(&[&[0.0], &[1.0]]);
        let cx = build_vietoris_rips(&c, Metric::Euclidean, 1.0, None).unwrap();
        assert_eq!(cx.s_count(0), 2);
        assert_eq!(cx.s_count(1), 1);
    }

    #[test]
    fn rips_fills_equilateral_triangle() {
        let h = 3f64.sqrt() / 2.0;
        let c = cloud(&[&[0.0, 0.0], &[1.0, 0.0], &[0.5, h]]);
        let cx = build_vietoris_rips(&c, Metric::Euclidean, 1.0 + 1e-12, None).unwrap();
        assert_eq!(cx.s_count(0), 3);
        assert_eq!(cx.s_count(1), 3);
        assert_eq!(cx.s_count(2), 1);
    }

    #[test]
    fn rips_max_order_caps_clique_growth() {
        let h = 3f64.sqrt() / 2.0;
        let c = cloud(&[&[0.0, 0.0], &[1.0, 0.0], &[0.5, h]]);
        let cx = build_vietoris_rips(&c, Metric::Euclidean, 1.1, Some(1)).unwrap();
        assert_eq!(cx.s_count(1), 3);
        assert_eq!(cx.s_count(2), 0);
    }

    #[test]
    fn metric_distances_disagree_where_expected() {
        let a = [0.0, 0.0];
        let b = [1.0, 1.0];
        assert!((Metric::Euclidean.distance(&a, &b) - 2f64.sqrt()).abs() < 1e-15);
        assert!((Metric::Manhattan.distance(&a, &b) - 2.0).abs() < 1e-15);
        assert!((Metric::Chebyshev.distance(&a, &b) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parse_two_edges_complex() {
        let cx = parse_complex(r#"{"n": 4, "maximal": [[1,2],[3,4]]}"#).unwrap();
        assert_eq!(cx.s_count(0), 4);
        assert_eq!(cx.s_count(1), 2);
        assert_eq!(cx.projector_basis(1), vec![0b0011, 0b1100]);
    }

    #[test]
    fn parse_five_edges_on_four_vertices() {
        let cx = parse_complex(r#"{"n": 4, "maximal": [[1,3],[1,4],[2,3],[2,4],[3,4]]}"#).unwrap();
        assert_eq!(cx.s_count(1), 5);
        assert_eq!(cx.s_count(2), 0);
    }

    #[test]
    fn parse_single_vertex() {
        let cx = parse_complex(r#"{"n": 1, "maximal": [[1]]}"#).unwrap();
        assert_eq!(cx.s_count(0), 1);
        assert_eq!(cx.complement_constant(0), 1);
    }

    #[test]
    fn parse_rejects_uncovered_vertex() {
        let err = parse_complex(r#"{"n": 3, "maximal": [[1,2]]}"#).unwrap_err();
        assert!(matches!(err, ComplexError::UncoveredVertices(v) if v == vec![3]));
    }

    #[test]
    fn parse_rejects_out_of_range_vertex() {
        let err = parse_complex(r#"{"n": 2, "maximal": [[1,5]]}"#).unwrap_err();
        assert!(matches!(err, ComplexError::VertexOutOfRange { vertex: 5, n: 2 }));
    }

    #[test]
    fn closure_completes_faces_of_a_triangle() {
        let cx = SimplicialComplex::from_maximal(3, &[&[1, 2, 3]]).unwrap();
        assert_eq!(cx.len(), 7);
        assert_eq!(cx.simplices_of_order(1), vec![0b011, 0b101, 0b110]);
    }

    #[test]
    fn complement_constant_matches_definition() {
        let cx = SimplicialComplex::from_maximal(4, &[&[1, 3], &[1, 4], &[2, 3], &[2, 4], &[3, 4]])
            .unwrap();
        assert_eq!(cx.complement_constant(1), 16 - 5);
        assert_eq!(cx.complement_constant(3), 16);
    }

    #[test]
    fn clique_complex_fills_triangles_and_keeps_isolated_vertices() {
        let cx = clique_complex(4, &[(1, 2), (2, 3), (1, 3)]).unwrap();
        assert_eq!(cx.s_count(0), 4);
        assert_eq!(cx.s_count(1), 3);
        assert_eq!(cx.s_count(2), 1);
        let empty = clique_complex(3, &[]).unwrap();
        assert_eq!(empty.s_count(0), 3);
        assert_eq!(empty.len(), 3);
    }

    #[test]
    fn csv_reader_skips_optional_header() {
        let with_header = "x,y\n0.0,0.0\n3.5,1.0\n";
        let cloud = PointCloud::from_csv_reader(with_header.as_bytes()).unwrap();
        assert_eq!(cloud.len(), 2);
        assert_eq!(cloud.points()[1], vec![3.5, 1.0]);
        let bare = "0.0,0.0\n3.5,1.0\n";
        assert_eq!(PointCloud::from_csv_reader(bare.as_bytes()).unwrap(), cloud);
    }

    fn arb_maximal(n: usize) -> impl Strategy<Value = Vec<u32>> {
        let full = (1u32 << n) - 1;
        prop::collection::vec(1..=full, 1..6)
    }

    proptest! {
        #[test]
        fn closure_contains_every_face(masks in arb_maximal(5)) {
            let mut masks = masks;
            masks.push((1 << 5) - 1); // cover all vertices
            let cx = SimplicialComplex::from_masks(5, masks).unwrap();
            for m in cx.all_masks() {
                if m.count_ones() > 1 {
                    for v in 0..5 {
                        if m & (1 << v) != 0 {
                            prop_assert!(cx.contains(m & !(1 << v)));
                        }
                    }
                }
            }
        }

        #[test]
        fn simplex_counts_bounded_by_binomials(masks in arb_maximal(5)) {
            let mut masks = masks;
            masks.push((1 << 5) - 1);
            let cx = SimplicialComplex::from_masks(5, masks).unwrap();
            let choose = [5usize, 10, 10, 5, 1];
            for k in 0..5 {
                prop_assert!(cx.s_count(k) <= choose[k]);
                let basis = cx.projector_basis(k);
                prop_assert!(basis.iter().all(|m| m.count_ones() as usize == k + 1));
                prop_assert!(basis.windows(2).all(|w| w[0] < w[1]));
            }
        }

        #[test]
        fn rips_is_monotone_in_epsilon(
            coords in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 2), 2..6),
            e1 in 0.0f64..2.0,
            de in 0.0f64..2.0,
        ) {
            let cloud = PointCloud::new(coords).unwrap();
            let small = build_vietoris_rips(&cloud, Metric::Euclidean, e1, None).unwrap();
            let large = build_vietoris_rips(&cloud, Metric::Euclidean, e1 + de, None).unwrap();
            for m in small.all_masks() {
                prop_assert!(large.contains(m));
            }
        }
    }
}
