//! Real-valued summaries of persistence computations.
//!
//! A [`SummarySpec`] pairs a computation (a parameter vector to a filtered
//! complex to a diagram) with a functional on the diagram. Inputs for which
//! the computation is undefined are sent to the empty state, which every
//! functional maps to 0.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::builders::{
    curve_complex, density_threshold_indices, line_graph_skeleton, lower_star, rips, torus_mesh,
    PointCloud, PointCloudJson, Skeleton, TorusSample,
};
use crate::complex::{FilteredComplex, Simplex, Vertex};
use crate::error::{Error, Result};
use crate::reduction::{persistence, EssentialMode, PersistenceDiagram, PersistencePair};

/// A real-valued function of a parameter vector.
pub trait Summary: Sync {
    fn arity(&self) -> usize;

    fn evaluate(&self, a: &[f64]) -> Result<f64>;
}

fn finite_persistence(p: &PersistencePair) -> f64 {
    if p.death.is_finite() {
        p.death - p.birth
    } else {
        0.0
    }
}

/// Persistence of the class created by vertex `x`, or 0.
pub fn persistence_at_vertex(diagram: &PersistenceDiagram, x: Vertex) -> f64 {
    persistence_at_simplex(diagram, &Simplex::vertex(x))
}

/// Persistence of the class created by `simplex`, or 0.
pub fn persistence_at_simplex(diagram: &PersistenceDiagram, simplex: &Simplex) -> f64 {
    diagram.created_by(simplex).map_or(0.0, finite_persistence)
}

/// Persistence of the pair whose stored representative is exactly `cycle`
/// (compared as a set of simplices), or 0.
pub fn persistence_of_cycle(diagram: &PersistenceDiagram, cycle: &[Simplex]) -> f64 {
    if cycle.is_empty() {
        return 0.0;
    }
    let mut wanted = cycle.to_vec();
    wanted.sort();
    wanted.dedup();
    diagram
        .iter()
        .find(|p| {
            p.cycle.as_ref().is_some_and(|c| {
                let mut c = c.clone();
                c.sort();
                c == wanted
            })
        })
        .map_or(0.0, finite_persistence)
}

/// Largest finite persistence, or 0.
pub fn max_persistence(diagram: &PersistenceDiagram) -> f64 {
    diagram.iter().map(finite_persistence).fold(0.0, f64::max)
}

/// Length of the longest finite bar if its creator satisfies `in_region`,
/// else 0. Equal lengths go to the earlier birth, then the smaller creator.
pub fn region_longest_bar<F: Fn(&Simplex) -> bool>(diagram: &PersistenceDiagram, in_region: F) -> f64 {
    let longest = diagram
        .iter()
        .filter(|p| p.death.is_finite())
        .min_by(|a, b| {
            finite_persistence(b)
                .total_cmp(&finite_persistence(a))
                .then_with(|| a.birth.total_cmp(&b.birth))
                .then_with(|| a.creator.cmp(&b.creator))
        });
    match longest {
        Some(p) if in_region(&p.creator) => finite_persistence(p),
        _ => 0.0,
    }
}

/// An axis-aligned box `[u0, u1) x [v0, v1)` in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub u: [f64; 2],
    pub v: [f64; 2],
}

impl Region {
    /// `{u < 0, v >= 0}` in the fundamental domain `[-pi, pi)^2`.
    pub const SECOND_QUADRANT: Region = Region {
        u: [-PI, 0.0],
        v: [0.0, PI],
    };

    pub fn contains(&self, [u, v]: [f64; 2]) -> bool {
        (self.u[0]..self.u[1]).contains(&u) && (self.v[0]..self.v[1]).contains(&v)
    }
}

/// The diagram functional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Functional {
    Vertex(Vertex),
    Simplex(Simplex),
    Cycle(Vec<Simplex>),
    MaxPersistence,
    RegionLongestBar(Region),
}

impl Functional {
    pub fn apply<F: Fn(Vertex) -> Option<[f64; 2]>>(
        &self,
        diagram: &PersistenceDiagram,
        position: F,
    ) -> f64 {
        match self {
            Functional::Vertex(x) => persistence_at_vertex(diagram, *x),
            Functional::Simplex(s) => persistence_at_simplex(diagram, s),
            Functional::Cycle(c) => persistence_of_cycle(diagram, c),
            Functional::MaxPersistence => max_persistence(diagram),
            Functional::RegionLongestBar(region) => region_longest_bar(diagram, |s| {
                s.dim() == 0 && position(s.vertices()[0]).is_some_and(|p| region.contains(p))
            }),
        }
    }
}

/// Short labels: `vertex:4`, `simplex:0,8`, `max-persistence`,
/// `region:u0,u1,v0,v1`, `second-quadrant`.
impl FromStr for Functional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("unrecognized summary {s:?}"));
        let numbers = |rest: &str| -> Result<Vec<f64>> {
            rest.split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
                .collect()
        };
        match s.split_once(':') {
            None if s == "max-persistence" => Ok(Functional::MaxPersistence),
            None if s == "second-quadrant" => Ok(Functional::RegionLongestBar(Region::SECOND_QUADRANT)),
            Some(("vertex", x)) => x.trim().parse().map(Functional::Vertex).map_err(|_| bad()),
            Some(("simplex", xs)) => {
                let vs: Vec<Vertex> = xs
                    .split(',')
                    .map(|x| x.trim().parse().map_err(|_| bad()))
                    .collect::<Result<_>>()?;
                Ok(Functional::Simplex(Simplex::new(vs)?))
            }
            Some(("region", xs)) => match numbers(xs)?[..] {
                [u0, u1, v0, v1] => Ok(Functional::RegionLongestBar(Region {
                    u: [u0, u1],
                    v: [v0, v1],
                })),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::Vertex(x) => write!(f, "vertex:{x}"),
            Functional::Simplex(s) => {
                let vs: Vec<String> = s.vertices().iter().map(|v| v.to_string()).collect();
                write!(f, "simplex:{}", vs.join(","))
            }
            Functional::Cycle(c) => write!(f, "cycle:{}", c.len()),
            Functional::MaxPersistence => f.write_str("max-persistence"),
            Functional::RegionLongestBar(r) => {
                write!(f, "region:{},{},{},{}", r.u[0], r.u[1], r.v[0], r.v[1])
            }
        }
    }
}

/// Memoized results of the density-threshold pipeline, keyed by the
/// surviving subset of the base cloud.
#[derive(Debug, Default)]
pub struct SubsetCache {
    entries: Mutex<HashMap<Vec<u32>, Arc<OnceLock<f64>>>>,
}

impl SubsetCache {
    fn get_or_compute<F: FnOnce() -> f64>(&self, key: Vec<u32>, compute: F) -> f64 {
        let cell = {
            let mut entries = self.entries.lock().unwrap_or_else(|e| e.into_inner());
            Arc::clone(entries.entry(key).or_default())
        };
        *cell.get_or_init(compute)
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The parameter-vector-to-complex stage.
#[derive(Debug)]
pub enum Computation {
    /// Lower-star filtration of a path; one value per vertex.
    LineGraphLowerStar { skeleton: Skeleton },
    /// Distance to a polygonal curve; `(x, y)` per vertex.
    Curve { vertices: usize },
    /// Rips filtration of `points` points in `R^dim`.
    Rips {
        points: usize,
        dim: usize,
        max_scale: f64,
    },
    /// Periodic Delaunay lower-star filtration; `(u, v, z)` per vertex.
    Torus { points: usize },
    /// Rips filtration of the density-thresholded base cloud; parameters
    /// are `(delta, epsilon)`.
    DensityThresholdRips {
        cloud: PointCloud,
        max_scale: f64,
        cache: Option<SubsetCache>,
    },
}

impl Computation {
    pub fn line_graph(vertices: usize) -> Result<Self> {
        Ok(Computation::LineGraphLowerStar {
            skeleton: line_graph_skeleton(vertices)?,
        })
    }

    pub fn density_threshold_rips(cloud: PointCloud, max_scale: f64, memoize: bool) -> Self {
        Computation::DensityThresholdRips {
            cloud,
            max_scale,
            cache: memoize.then(SubsetCache::default),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Computation::LineGraphLowerStar { .. } => "line-graph-lower-star",
            Computation::Curve { .. } => "curve",
            Computation::Rips { .. } => "rips",
            Computation::Torus { .. } => "torus",
            Computation::DensityThresholdRips { .. } => "density-threshold-rips",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Computation::LineGraphLowerStar { skeleton } => skeleton.num_vertices(),
            Computation::Curve { vertices } => 2 * vertices,
            Computation::Rips { points, dim, .. } => points * dim,
            Computation::Torus { points } => 3 * points,
            Computation::DensityThresholdRips { .. } => 2,
        }
    }

    fn has_positions(&self) -> bool {
        !matches!(self, Computation::LineGraphLowerStar { .. })
    }
}

/// A summary `p ∘ H` of a persistence computation.
#[derive(Debug)]
pub struct SummarySpec {
    computation: Computation,
    functional: Functional,
    degree: usize,
    essential: EssentialMode,
}

impl SummarySpec {
    pub fn new(
        computation: Computation,
        functional: Functional,
        degree: usize,
        essential: EssentialMode,
    ) -> Result<Self> {
        if matches!(functional, Functional::RegionLongestBar(_)) && !computation.has_positions() {
            return Err(Error::Domain(format!(
                "region summaries need vertex coordinates, which {} does not provide",
                computation.name()
            )));
        }
        if let EssentialMode::Truncate(m) = essential {
            if !m.is_finite() {
                return Err(Error::NonFinite(m));
            }
        }
        Ok(SummarySpec {
            computation,
            functional,
            degree,
            essential,
        })
    }

    pub fn computation(&self) -> &Computation {
        &self.computation
    }

    pub fn functional(&self) -> &Functional {
        &self.functional
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn essential(&self) -> EssentialMode {
        self.essential
    }

    /// A label for tables, e.g. `vertex:4`.
    pub fn id(&self) -> String {
        self.functional.to_string()
    }

    fn diagram(&self, complex: &FilteredComplex) -> Result<PersistenceDiagram> {
        let want_cycles = matches!(self.functional, Functional::Cycle(_));
        persistence(complex, self.degree, self.essential, want_cycles)
    }

    fn apply_to_points(&self, cloud: &PointCloud, max_scale: f64) -> Result<f64> {
        let complex = rips(cloud, max_scale, self.degree)?;
        let diagram = self.diagram(&complex)?;
        Ok(self.functional.apply(&diagram, |v| {
            let p = cloud.point(v as usize);
            Some([p[0], p.get(1).copied().unwrap_or(0.0)])
        }))
    }

    fn compute(&self, a: &[f64]) -> Result<f64> {
        match &self.computation {
            Computation::LineGraphLowerStar { skeleton } => {
                let diagram = self.diagram(&lower_star(skeleton, a)?)?;
                Ok(self.functional.apply(&diagram, |_| None))
            }
            Computation::Curve { .. } => {
                let vertices: Vec<[f64; 2]> = a.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
                let diagram = self.diagram(&curve_complex(&vertices, self.degree)?)?;
                Ok(self
                    .functional
                    .apply(&diagram, |v| vertices.get(v as usize).copied()))
            }
            Computation::Rips { dim, max_scale, .. } => {
                self.apply_to_points(&PointCloud::new(*dim, a.to_vec())?, *max_scale)
            }
            Computation::Torus { .. } => {
                let sample = TorusSample::from_flat(a)?;
                let diagram = self.diagram(&torus_mesh(&sample)?)?;
                Ok(self
                    .functional
                    .apply(&diagram, |v| sample.uv().get(v as usize).copied()))
            }
            Computation::DensityThresholdRips {
                cloud,
                max_scale,
                cache,
            } => {
                let keep = density_threshold_indices(cloud, a[0], a[1])?;
                if keep.is_empty() {
                    return Ok(0.0);
                }
                let run = || {
                    self.apply_to_points(&cloud.select(&keep), *max_scale)
                        .unwrap_or(0.0)
                };
                Ok(match cache {
                    Some(cache) => {
                        cache.get_or_compute(keep.iter().map(|&i| i as u32).collect(), run)
                    }
                    None => run(),
                })
            }
        }
    }

    /// `h(a)`. Only an arity mismatch is an error; every other failure of
    /// the computation yields 0.
    pub fn eval(&self, a: &[f64]) -> Result<f64> {
        let arity = self.computation.arity();
        if a.len() != arity {
            return Err(Error::Arity {
                expected: arity,
                got: a.len(),
            });
        }
        Ok(self.compute(a).unwrap_or(0.0))
    }
}

impl Summary for SummarySpec {
    fn arity(&self) -> usize {
        self.computation.arity()
    }

    fn evaluate(&self, a: &[f64]) -> Result<f64> {
        self.eval(a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComputationKind {
    LineGraphLowerStar,
    Curve,
    Rips,
    Torus,
    DensityThresholdRips,
}

/// Summary configuration file:
///
/// ```json
/// {"computation": "line-graph-lower-star", "functional": {"vertex": 4},
///  "degree": 0, "essential": "extended"}
/// ```
///
/// Sizes omitted from the file are inferred from the parameter vector.
/// `rips` additionally takes `dim` (default 2) and `max_scale`;
/// `density-threshold-rips` takes `cloud` and `max_scale`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryConfig {
    pub computation: ComputationKind,
    pub functional: Functional,
    #[serde(default)]
    pub degree: usize,
    #[serde(default)]
    pub essential: EssentialMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cloud: Option<PointCloudJson>,
    #[serde(default)]
    pub memoize: bool,
}

impl SummaryConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Builds the summary for parameter vectors of length `params`.
    pub fn build(&self, params: usize) -> Result<SummarySpec> {
        let per = |k: usize| -> Result<usize> {
            if params % k != 0 {
                return Err(Error::Arity {
                    expected: params.div_ceil(k) * k,
                    got: params,
                });
            }
            Ok(params / k)
        };
        let max_scale = || {
            self.max_scale
                .ok_or_else(|| Error::Domain(format!("{:?} needs max_scale", self.computation)))
        };
        let computation = match self.computation {
            ComputationKind::LineGraphLowerStar => {
                Computation::line_graph(self.vertices.unwrap_or(params))?
            }
            ComputationKind::Curve => Computation::Curve {
                vertices: self.vertices.map_or_else(|| per(2), Ok)?,
            },
            ComputationKind::Rips => {
                let dim = self.dim.unwrap_or(2);
                if dim == 0 {
                    return Err(Error::Domain("rips needs dim >= 1".into()));
                }
                Computation::Rips {
                    points: self.vertices.map_or_else(|| per(dim), Ok)?,
                    dim,
                    max_scale: max_scale()?,
                }
            }
            ComputationKind::Torus => Computation::Torus {
                points: self.vertices.map_or_else(|| per(3), Ok)?,
            },
            ComputationKind::DensityThresholdRips => {
                let cloud = self
                    .cloud
                    .clone()
                    .ok_or_else(|| Error::Domain("density-threshold-rips needs a cloud".into()))?;
                Computation::density_threshold_rips(cloud.try_into()?, max_scale()?, self.memoize)
            }
        };
        SummarySpec::new(computation, self.functional.clone(), self.degree, self.essential)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(values: &[f64], functional: Functional) -> f64 {
        SummarySpec::new(
            Computation::line_graph(values.len()).unwrap(),
            functional,
            0,
            EssentialMode::Extended,
        )
        .unwrap()
        .eval(values)
        .unwrap()
    }

    const A: [f64; 7] = [10.0, 11.0, 12.5, 13.0, 9.9, 20.0, 1.0];

    #[test]
    fn vertex_persistence_on_line_graph() {
        assert_eq!(line(&A, Functional::Vertex(4)), 20.0 - 9.9);
        assert_eq!(line(&A, Functional::Vertex(0)), 3.0);
        assert_eq!(line(&A, Functional::Vertex(1)), 0.0);
        let swapped = [9.9, 11.0, 12.5, 13.0, 10.0, 20.0, 1.0];
        assert_eq!(line(&swapped, Functional::Vertex(4)), 3.0);
    }

    #[test]
    fn isolated_minimum() {
        let a = [5.0, 1.1, 1.0, 1.05, 15.0];
        assert_eq!(line(&a, Functional::Vertex(2)), 14.0);
        for i in [0, 1, 3, 4] {
            assert_eq!(line(&a, Functional::Vertex(i)), 0.0);
        }
    }

    #[test]
    fn arity_is_checked() {
        let spec = SummarySpec::new(
            Computation::line_graph(3).unwrap(),
            Functional::MaxPersistence,
            0,
            EssentialMode::Extended,
        )
        .unwrap();
        assert!(matches!(spec.eval(&[1.0]), Err(Error::Arity { .. })));
    }

    #[test]
    fn empty_threshold_maps_to_zero() {
        let cloud = PointCloud::new(1, vec![0.0, 0.1, 5.0]).unwrap();
        let spec = SummarySpec::new(
            Computation::density_threshold_rips(cloud, 1.0, false),
            Functional::MaxPersistence,
            1,
            EssentialMode::Extended,
        )
        .unwrap();
        assert_eq!(spec.eval(&[0.5, 1.1]).unwrap(), 0.0);
        assert_eq!(spec.eval(&[-1.0, 0.5]).unwrap(), 0.0);
    }

    #[test]
    fn max_persistence_edge_cases() {
        assert_eq!(max_persistence(&PersistenceDiagram::empty(1)), 0.0);
        let mut d = PersistenceDiagram::empty(0);
        d.pairs.push(PersistencePair {
            birth: 1.0,
            death: 1.0,
            degree: 0,
            creator: Simplex::vertex(0),
            killer: None,
            cycle: None,
            essential: false,
        });
        assert_eq!(max_persistence(&d), 0.0);
        assert_eq!(persistence_of_cycle(&d, &[]), 0.0);
    }

    #[test]
    fn region_requires_coordinates() {
        assert!(SummarySpec::new(
            Computation::line_graph(3).unwrap(),
            Functional::RegionLongestBar(Region::SECOND_QUADRANT),
            0,
            EssentialMode::Extended,
        )
        .is_err());
    }

    #[test]
    fn second_quadrant_bounds() {
        let q = Region::SECOND_QUADRANT;
        assert!(q.contains([-1.0, 1.0]));
        assert!(q.contains([-PI, 0.0]));
        assert!(!q.contains([0.0, 1.0]));
        assert!(!q.contains([-1.0, -1.0]));
    }

    #[test]
    fn functional_labels_round_trip() {
        for s in ["vertex:4", "simplex:0,8", "max-persistence", "region:-1,0,0,1"] {
            assert_eq!(s.parse::<Functional>().unwrap().to_string(), s);
        }
        assert!("vertex:x".parse::<Functional>().is_err());
        assert!("median".parse::<Functional>().is_err());
    }

    #[test]
    fn config_wire_format() {
        let cfg = SummaryConfig::from_json_str(
            r#"{"computation": "line-graph-lower-star", "functional": {"vertex": 4}, "degree": 0, "essential": "extended"}"#,
        )
        .unwrap();
        let spec = cfg.build(7).unwrap();
        assert_eq!(spec.eval(&A).unwrap(), 20.0 - 9.9);
        let cfg = SummaryConfig::from_json_str(
            r#"{"computation": "curve", "functional": {"simplex": [0, 8]}, "degree": 1, "essential": {"truncate": 50.0}}"#,
        )
        .unwrap();
        assert_eq!(cfg.build(18).unwrap().arity(), 18);
        assert!(cfg.build(17).is_err());
    }
}
