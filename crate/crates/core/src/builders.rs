//! Filtered complexes built from parameter vectors.
//!
//! Every builder assigns dense vertex ids `0..N` in input order and returns
//! a complex that passes [`FilteredComplex::validate`].

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use spade::{DelaunayTriangulation, HasPosition, Point2, Triangulation};

use crate::complex::{FilteredComplex, Simplex, Vertex};
use crate::error::{Error, Result};

/// Points in `R^dim`, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointCloudJson", into = "PointCloudJson")]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

/// `{"dim": 2, "points": [[x, y], ...]}`
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointCloudJson {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("point dimension must be positive".into()));
        }
        if coords.len() % dim != 0 {
            return Err(Error::Arity {
                expected: coords.len().div_ceil(dim) * dim,
                got: coords.len(),
            });
        }
        if let Some(&x) = coords.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(x));
        }
        Ok(PointCloud { dim, coords })
    }

    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let dim = points.first().map_or(2, |p| p.as_ref().len());
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::Arity {
                    expected: dim,
                    got: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        PointCloud::new(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        euclidean(self.point(i), self.point(j))
    }

    pub fn select(&self, indices: &[usize]) -> PointCloud {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        PointCloud {
            dim: self.dim,
            coords,
        }
    }
}

impl TryFrom<PointCloudJson> for PointCloud {
    type Error = Error;

    fn try_from(wire: PointCloudJson) -> Result<Self> {
        let mut coords = Vec::with_capacity(wire.points.len() * wire.dim);
        for p in &wire.points {
            if p.len() != wire.dim {
                return Err(Error::Arity {
                    expected: wire.dim,
                    got: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        PointCloud::new(wire.dim, coords)
    }
}

impl From<PointCloud> for PointCloudJson {
    fn from(cloud: PointCloud) -> Self {
        PointCloudJson {
            dim: cloud.dim,
            points: cloud.points().map(<[f64]>::to_vec).collect(),
        }
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A symmetric, non-negative matrix with zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::InvalidMetric(format!(
                    "row of length {} in a {n}x{n} matrix",
                    row.len()
                )));
            }
            entries.extend_from_slice(row);
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::InvalidMetric(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let d = entries[i * n + j];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidMetric(format!("entry ({i},{j}) = {d}")));
                }
                if d != entries[j * n + i] {
                    return Err(Error::InvalidMetric(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(DistanceMatrix { n, entries })
    }

    pub fn from_points(cloud: &PointCloud) -> Self {
        let n = cloud.len();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = cloud.distance(i, j);
                entries[i * n + j] = d;
                entries[j * n + i] = d;
            }
        }
        DistanceMatrix { n, entries }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }
}

/// An unfiltered simplicial complex on vertices `0..num_vertices`.
#[derive(Clone, Debug, PartialEq)]
pub struct Skeleton {
    num_vertices: usize,
    simplices: Vec<Simplex>,
}

impl Skeleton {
    /// Checks closure under faces and that the vertices are exactly
    /// `0..num_vertices`.
    pub fn new(simplices: Vec<Simplex>) -> Result<Self> {
        let set: HashSet<&Simplex> = simplices.iter().collect();
        for s in &simplices {
            if let Some(face) = s.proper_faces().find(|f| !set.contains(f)) {
                return Err(Error::InvalidSimplex(format!("face {face} of {s} is missing")));
            }
        }
        let num_vertices = simplices.iter().filter(|s| s.dim() == 0).count();
        if let Some(s) = simplices
            .iter()
            .find(|s| s.vertices().iter().any(|&v| v as usize >= num_vertices))
        {
            return Err(Error::InvalidSimplex(format!(
                "{s} uses a vertex outside 0..{num_vertices}"
            )));
        }
        Ok(Skeleton {
            num_vertices,
            simplices,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }
}

/// The path `v0 - v1 - ... - v(n-1)`.
pub fn line_graph_skeleton(n: usize) -> Result<Skeleton> {
    if n == 0 {
        return Err(Error::EmptyInput("line graph needs at least one vertex"));
    }
    let mut simplices: Vec<Simplex> = (0..n as Vertex).map(Simplex::vertex).collect();
    simplices.extend((1..n as Vertex).map(|i| Simplex::edge(i - 1, i)));
    Ok(Skeleton {
        num_vertices: n,
        simplices,
    })
}

/// Each simplex gets the largest value among its vertices.
pub fn lower_star(skeleton: &Skeleton, vertex_values: &[f64]) -> Result<FilteredComplex> {
    if vertex_values.len() != skeleton.num_vertices {
        return Err(Error::Arity {
            expected: skeleton.num_vertices,
            got: vertex_values.len(),
        });
    }
    let mut complex = FilteredComplex::with_capacity(skeleton.simplices.len());
    for s in &skeleton.simplices {
        let value = s
            .vertices()
            .iter()
            .map(|&v| vertex_values[v as usize])
            .fold(f64::NEG_INFINITY, f64::max);
        complex.insert(s.clone(), value)?;
    }
    Ok(complex)
}

/// Flag complex up to dimension `max_dim` on `n` vertices. Vertices enter
/// at 0, edge `{i, j}` at `weight(i, j)` when that is at most `max_scale`,
/// and higher simplices at their largest edge.
fn flag_complex<W: Fn(usize, usize) -> f64>(
    n: usize,
    weight: W,
    max_scale: f64,
    max_dim: usize,
) -> Result<FilteredComplex> {
    let mut w = vec![f64::INFINITY; n * n];
    let mut upper: Vec<Vec<u32>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let d = weight(i, j);
            if d <= max_scale {
                w[i * n + j] = d;
                w[j * n + i] = d;
                upper[i].push(j as u32);
            }
        }
    }

    let mut complex = FilteredComplex::new();
    for i in 0..n {
        complex.insert(Simplex::vertex(i as Vertex), 0.0)?;
    }
    if max_dim == 0 {
        return Ok(complex);
    }

    fn expand(
        complex: &mut FilteredComplex,
        w: &[f64],
        n: usize,
        simplex: &mut Vec<u32>,
        value: f64,
        candidates: &[u32],
        remaining: usize,
    ) -> Result<()> {
        for &c in candidates {
            let cu = c as usize;
            let v = simplex
                .iter()
                .map(|&s| w[s as usize * n + cu])
                .fold(value, f64::max);
            simplex.push(c);
            complex.insert(Simplex::from_sorted(simplex), v)?;
            if remaining > 1 {
                let next: Vec<u32> = candidates
                    .iter()
                    .copied()
                    .filter(|&d| d > c && w[cu * n + d as usize].is_finite())
                    .collect();
                if !next.is_empty() {
                    expand(complex, w, n, simplex, v, &next, remaining - 1)?;
                }
            }
            simplex.pop();
        }
        Ok(())
    }

    let mut simplex = Vec::with_capacity(max_dim + 1);
    for i in 0..n {
        simplex.push(i as u32);
        expand(&mut complex, &w, n, &mut simplex, 0.0, &upper[i], max_dim)?;
        simplex.pop();
    }
    Ok(complex)
}

/// Distance to a piecewise-linear curve through `vertices`: consecutive
/// edges enter at 0, every other edge at the Euclidean distance, and higher
/// simplices (up to dimension `max_degree + 1`) at their largest edge. The
/// last vertex is not joined to the first at 0.
pub fn curve_complex(vertices: &[[f64; 2]], max_degree: usize) -> Result<FilteredComplex> {
    if vertices.len() < 3 {
        return Err(Error::TooSmall {
            needed: 3,
            got: vertices.len(),
        });
    }
    if let Some(&x) = vertices.iter().flatten().find(|x| !x.is_finite()) {
        return Err(Error::NonFinite(x));
    }
    flag_complex(
        vertices.len(),
        |i, j| {
            if j == i + 1 {
                0.0
            } else {
                euclidean(&vertices[i], &vertices[j])
            }
        },
        f64::INFINITY,
        max_degree + 1,
    )
}

/// Rips filtration of a point cloud, truncated at `max_scale`.
pub fn rips(points: &PointCloud, max_scale: f64, max_degree: usize) -> Result<FilteredComplex> {
    rips_from_distances(&DistanceMatrix::from_points(points), max_scale, max_degree)
}

/// Rips filtration from a distance matrix. `max_scale == 0` gives isolated
/// vertices.
pub fn rips_from_distances(
    distances: &DistanceMatrix,
    max_scale: f64,
    max_degree: usize,
) -> Result<FilteredComplex> {
    if !(max_scale >= 0.0) {
        return Err(Error::Domain(format!("max_scale must be non-negative, got {max_scale}")));
    }
    let max_dim = if max_scale == 0.0 { 0 } else { max_degree + 1 };
    flag_complex(distances.len(), |i, j| distances.get(i, j), max_scale, max_dim)
}

/// The subset `{y : |B_delta(y) ∩ Y| / |Y| >= epsilon}`, as indices into
/// `points`. Each point counts itself.
pub fn density_threshold_indices(points: &PointCloud, delta: f64, epsilon: f64) -> Result<Vec<usize>> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::Domain(format!("delta must be non-negative, got {delta}")));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Domain(format!("epsilon must lie in [0, 1], got {epsilon}")));
    }
    let n = points.len();
    let total = n as f64;
    Ok((0..n)
        .filter(|&i| {
            let count = (0..n).filter(|&j| points.distance(i, j) <= delta).count();
            count as f64 / total >= epsilon
        })
        .collect())
}

pub fn density_threshold(points: &PointCloud, delta: f64, epsilon: f64) -> Result<PointCloud> {
    let keep = density_threshold_indices(points, delta, epsilon)?;
    Ok(points.select(&keep))
}

/// Maps an angle into the fundamental interval `[-pi, pi)`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y >= PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Function values sampled at points of the flat torus `[-pi, pi)^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusSample {
    uv: Vec<[f64; 2]>,
    z: Vec<f64>,
}

/// `{"dim": 2, "points": [[u, v], ...], "z": [...]}`
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TorusSampleJson {
    pub dim: usize,
    pub points: Vec<[f64; 2]>,
    pub z: Vec<f64>,
}

impl TorusSample {
    /// Coordinates are reduced into the fundamental domain.
    pub fn new(uv: Vec<[f64; 2]>, z: Vec<f64>) -> Result<Self> {
        if uv.len() != z.len() {
            return Err(Error::Arity {
                expected: uv.len(),
                got: z.len(),
            });
        }
        if let Some(&x) = uv.iter().flatten().chain(&z).find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(x));
        }
        let uv = uv
            .into_iter()
            .map(|[u, v]| [wrap_angle(u), wrap_angle(v)])
            .collect();
        Ok(TorusSample { uv, z })
    }

    /// Reads interleaved `(u, v, z)` triples.
    pub fn from_flat(a: &[f64]) -> Result<Self> {
        if a.len() % 3 != 0 {
            return Err(Error::Arity {
                expected: a.len().div_ceil(3) * 3,
                got: a.len(),
            });
        }
        let uv = a.chunks_exact(3).map(|c| [c[0], c[1]]).collect();
        let z = a.chunks_exact(3).map(|c| c[2]).collect();
        TorusSample::new(uv, z)
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.uv
            .iter()
            .zip(&self.z)
            .flat_map(|(&[u, v], &z)| [u, v, z])
            .collect()
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn uv(&self) -> &[[f64; 2]] {
        &self.uv
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn to_json(&self) -> TorusSampleJson {
        TorusSampleJson {
            dim: 2,
            points: self.uv.clone(),
            z: self.z.clone(),
        }
    }
}

impl TryFrom<TorusSampleJson> for TorusSample {
    type Error = Error;

    fn try_from(wire: TorusSampleJson) -> Result<Self> {
        if wire.dim != 2 {
            return Err(Error::Arity {
                expected: 2,
                got: wire.dim,
            });
        }
        TorusSample::new(wire.points, wire.z)
    }
}

struct TiledPoint {
    position: Point2<f64>,
    id: u32,
    tile: (i8, i8),
}

impl HasPosition for TiledPoint {
    type Scalar = f64;

    fn position(&self) -> Point2<f64> {
        self.position
    }
}

type Offset = (i8, i8);

/// A triangle of the periodic triangulation up to translation: vertex ids
/// ascending, with lattice offsets relative to the first vertex.
type TriangleClass = [(u32, Offset); 3];

fn relative(a: Offset, b: Offset) -> Offset {
    (a.0 - b.0, a.1 - b.1)
}

/// Delaunay triangulation of the flat torus on the sample's `(u, v)`
/// points, lower-star filtered by `z`.
///
/// The fundamental domain is tiled 3x3 and triangulated in the plane;
/// triangles touching the central copy are identified up to translation.
/// The result must be a closed simplicial surface with Euler characteristic
/// 0. Samples too sparse or too symmetric for that (for instance four points
/// on a square lattice, whose periodic triangulation repeats vertex sets)
/// are reported as degenerate.
pub fn torus_mesh(sample: &TorusSample) -> Result<FilteredComplex> {
    let n = sample.len();
    if n < 4 {
        return Err(Error::TooSmall { needed: 4, got: n });
    }
    let period = 2.0 * PI;
    let mut tiled = Vec::with_capacity(9 * n);
    for (id, &[u, v]) in sample.uv.iter().enumerate() {
        for a in -1i8..=1 {
            for b in -1i8..=1 {
                tiled.push(TiledPoint {
                    position: Point2::new(u + period * a as f64, v + period * b as f64),
                    id: id as u32,
                    tile: (a, b),
                });
            }
        }
    }
    let triangulation: DelaunayTriangulation<TiledPoint> = DelaunayTriangulation::bulk_load(tiled)
        .map_err(|e| Error::Degenerate(format!("triangulation failed: {e:?}")))?;
    if triangulation.num_vertices() != 9 * n {
        return Err(Error::Degenerate("coincident sample points".into()));
    }

    let mut classes: HashSet<TriangleClass> = HashSet::new();
    for face in triangulation.inner_faces() {
        let mut vs: [(u32, Offset); 3] = face.vertices().map(|v| (v.data().id, v.data().tile));
        if !vs.iter().any(|&(_, t)| t == (0, 0)) {
            continue;
        }
        vs.sort_by_key(|&(id, _)| id);
        if vs[0].0 == vs[1].0 || vs[1].0 == vs[2].0 {
            return Err(Error::Degenerate(
                "a triangle uses two copies of one point".into(),
            ));
        }
        let base = vs[0].1;
        classes.insert([
            (vs[0].0, (0, 0)),
            (vs[1].0, relative(vs[1].1, base)),
            (vs[2].0, relative(vs[2].1, base)),
        ]);
    }

    // Translation classes must correspond one-to-one with vertex sets, and
    // every edge must be shared by exactly two triangles.
    let mut triangle_sets: HashMap<[u32; 3], TriangleClass> = HashMap::new();
    let mut edge_classes: HashMap<(u32, u32, Offset), usize> = HashMap::new();
    for class in &classes {
        let ids = [class[0].0, class[1].0, class[2].0];
        if triangle_sets.insert(ids, *class).is_some() {
            return Err(Error::Degenerate(format!(
                "vertex set {ids:?} spans two distinct triangles"
            )));
        }
        for (x, y) in [(0, 1), (0, 2), (1, 2)] {
            let key = (class[x].0, class[y].0, relative(class[y].1, class[x].1));
            *edge_classes.entry(key).or_default() += 1;
        }
    }
    let mut edge_sets: HashSet<(u32, u32)> = HashSet::new();
    for (&(a, b, _), &count) in &edge_classes {
        if count != 2 {
            return Err(Error::Degenerate(format!(
                "edge {{{a},{b}}} lies in {count} triangles"
            )));
        }
        if !edge_sets.insert((a, b)) {
            return Err(Error::Degenerate(format!(
                "vertex pair {{{a},{b}}} spans two distinct edges"
            )));
        }
    }
    let euler = n as i64 - edge_sets.len() as i64 + triangle_sets.len() as i64;
    if euler != 0 {
        return Err(Error::Degenerate(format!(
            "periodic triangulation has Euler characteristic {euler}"
        )));
    }

    let mut simplices: Vec<Simplex> = (0..n as Vertex).map(Simplex::vertex).collect();
    let mut edges: Vec<_> = edge_sets.into_iter().collect();
    edges.sort_unstable();
    simplices.extend(edges.into_iter().map(|(a, b)| Simplex::edge(a, b)));
    let mut triangles: Vec<_> = triangle_sets.into_keys().collect();
    triangles.sort_unstable();
    simplices.extend(triangles.iter().map(|t| Simplex::from_sorted(t)));

    let skeleton = Skeleton {
        num_vertices: n,
        simplices,
    };
    lower_star(&skeleton, &sample.z)
}
