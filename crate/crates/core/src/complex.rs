//! Finite filtered abstract simplicial complexes.
//!
//! A [`FilteredComplex`] stores simplices together with their filtration
//! values. [`FilteredComplex::validate`] checks closure under faces and
//! monotonicity of the values; [`FilteredComplex::sorted_filtration`]
//! produces the canonical total order consumed by the reduction code.
//!
//! The canonical order sorts by `(value, dimension, vertex list)`. Any order
//! refining the values and putting faces first is a valid filtration order;
//! fixing one makes creator attribution reproducible.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Vertex identifier. Builders assign dense ids `0..N`.
pub type Vertex = u32;

/// A nonempty, strictly increasing list of vertices.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vertex>", into = "Vec<Vertex>")]
pub struct Simplex(SmallVec<[Vertex; 4]>);

impl Simplex {
    /// Builds a simplex from vertices in any order. Duplicates and empty
    /// lists are rejected.
    pub fn new<I: IntoIterator<Item = Vertex>>(vertices: I) -> Result<Self> {
        let mut v: SmallVec<[Vertex; 4]> = vertices.into_iter().collect();
        if v.is_empty() {
            return Err(Error::InvalidSimplex("empty vertex list".into()));
        }
        v.sort_unstable();
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSimplex(format!("repeated vertex in {v:?}")));
        }
        Ok(Simplex(v))
    }

    pub fn vertex(v: Vertex) -> Self {
        Simplex(smallvec::smallvec![v])
    }

    pub fn edge(a: Vertex, b: Vertex) -> Self {
        assert_ne!(a, b, "edge endpoints must differ");
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        Simplex(smallvec::smallvec![a, b])
    }

    /// Builds from an already sorted, duplicate-free slice.
    pub(crate) fn from_sorted(v: &[Vertex]) -> Self {
        debug_assert!(!v.is_empty() && v.windows(2).all(|w| w[0] < w[1]));
        Simplex(SmallVec::from_slice(v))
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Codimension-one faces, in the order obtained by dropping each vertex
    /// in turn. Empty for vertices.
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = if self.0.len() > 1 { self.0.len() } else { 0 };
        (0..n).map(move |skip| {
            Simplex(
                self.0
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect(),
            )
        })
    }

    /// All nonempty proper faces.
    pub fn proper_faces(&self) -> impl Iterator<Item = Simplex> + '_ {
        let k = self.0.len();
        let full = (1u64 << k) - 1;
        (1..full).map(move |mask| {
            Simplex(
                (0..k)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| self.0[i])
                    .collect(),
            )
        })
    }

    pub fn is_face_of(&self, other: &Simplex) -> bool {
        self.0.iter().all(|v| other.0.binary_search(v).is_ok())
    }
}

impl TryFrom<Vec<Vertex>> for Simplex {
    type Error = Error;

    fn try_from(v: Vec<Vertex>) -> Result<Self> {
        Simplex::new(v)
    }
}

impl From<Simplex> for Vec<Vertex> {
    fn from(s: Simplex) -> Self {
        s.0.into_vec()
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

/// A face that some stored simplex requires but that is not stored.
#[derive(Clone, Debug, PartialEq)]
pub struct MissingFace {
    pub face: Simplex,
    pub coface: Simplex,
}

/// A face whose value exceeds the value of a simplex containing it.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotonicityViolation {
    pub face: Simplex,
    pub face_value: f64,
    pub coface: Simplex,
    pub coface_value: f64,
}

/// Outcome of [`FilteredComplex::validate`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub missing_faces: Vec<MissingFace>,
    pub monotonicity: Vec<MonotonicityViolation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.missing_faces.is_empty() && self.monotonicity.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} missing face(s), {} monotonicity violation(s)",
            self.missing_faces.len(),
            self.monotonicity.len()
        )?;
        if let Some(m) = self.missing_faces.first() {
            write!(f, "; first missing face {} of {}", m.face, m.coface)?;
        }
        if let Some(m) = self.monotonicity.first() {
            write!(
                f,
                "; first violation f({}) = {} > f({}) = {}",
                m.face, m.face_value, m.coface, m.coface_value
            )?;
        }
        Ok(())
    }
}

/// Simplices with finite filtration values.
///
/// Re-inserting an existing simplex replaces its value. The complex is not
/// required to be valid while it is being built; consumers call
/// [`validate`](Self::validate) or go through
/// [`sorted_filtration`](Self::sorted_filtration), which refuses invalid
/// input.
#[derive(Clone, Debug, Default)]
pub struct FilteredComplex {
    simplices: Vec<Simplex>,
    values: Vec<f64>,
    index: HashMap<Simplex, usize>,
}

impl FilteredComplex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        FilteredComplex {
            simplices: Vec::with_capacity(n),
            values: Vec::with_capacity(n),
            index: HashMap::with_capacity(n),
        }
    }

    /// Adds (or re-values) the simplex spanned by `vertices` and returns its
    /// handle.
    pub fn add_simplex<I: IntoIterator<Item = Vertex>>(
        &mut self,
        vertices: I,
        value: f64,
    ) -> Result<usize> {
        self.insert(Simplex::new(vertices)?, value)
    }

    pub fn insert(&mut self, simplex: Simplex, value: f64) -> Result<usize> {
        if !value.is_finite() {
            return Err(Error::NonFinite(value));
        }
        if let Some(&i) = self.index.get(&simplex) {
            self.values[i] = value;
            return Ok(i);
        }
        let i = self.simplices.len();
        self.index.insert(simplex.clone(), i);
        self.simplices.push(simplex);
        self.values.push(value);
        Ok(i)
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn simplex(&self, handle: usize) -> &Simplex {
        &self.simplices[handle]
    }

    pub fn value(&self, handle: usize) -> f64 {
        self.values[handle]
    }

    pub fn handle(&self, simplex: &Simplex) -> Option<usize> {
        self.index.get(simplex).copied()
    }

    pub fn value_of(&self, simplex: &Simplex) -> Option<f64> {
        self.handle(simplex).map(|i| self.values[i])
    }

    pub fn contains(&self, simplex: &Simplex) -> bool {
        self.index.contains_key(simplex)
    }

    /// Simplices in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (&Simplex, f64)> {
        self.simplices.iter().zip(self.values.iter().copied())
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.simplices.iter().map(Simplex::dim).max()
    }

    pub fn max_value(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::max)
    }

    pub fn count_dim(&self, dim: usize) -> usize {
        self.simplices.iter().filter(|s| s.dim() == dim).count()
    }

    /// Alternating count of simplices by dimension.
    pub fn euler_characteristic(&self) -> i64 {
        self.simplices
            .iter()
            .map(|s| if s.dim() % 2 == 0 { 1 } else { -1 })
            .sum()
    }

    /// Reports every missing face and every monotonicity violation.
    pub fn validate(&self) -> ValidationReport {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            let (sa, sb) = (&self.simplices[a], &self.simplices[b]);
            sa.dim().cmp(&sb.dim()).then_with(|| sa.cmp(sb))
        });

        let mut missing: BTreeSet<Simplex> = BTreeSet::new();
        let mut report = ValidationReport::default();
        for &i in &order {
            let sigma = &self.simplices[i];
            let value = self.values[i];
            for tau in sigma.proper_faces() {
                match self.index.get(&tau) {
                    None => {
                        if missing.insert(tau.clone()) {
                            report.missing_faces.push(MissingFace {
                                face: tau,
                                coface: sigma.clone(),
                            });
                        }
                    }
                    Some(&j) if self.values[j] > value => {
                        report.monotonicity.push(MonotonicityViolation {
                            face: tau,
                            face_value: self.values[j],
                            coface: sigma.clone(),
                            coface_value: value,
                        });
                    }
                    Some(_) => {}
                }
            }
        }
        report
    }

    pub fn check(&self) -> Result<()> {
        let report = self.validate();
        if report.is_ok() {
            Ok(())
        } else {
            Err(Error::Validation(report))
        }
    }

    /// The canonical total order. Fails on invalid complexes.
    pub fn sorted_filtration(&self) -> Result<Filtration<'_>> {
        self.check()?;
        Ok(self.sorted_filtration_unchecked())
    }

    /// Same order without validation; for builders whose output is valid by
    /// construction.
    pub(crate) fn sorted_filtration_unchecked(&self) -> Filtration<'_> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.filtration_cmp(a, b));
        let mut position = vec![0; order.len()];
        for (p, &i) in order.iter().enumerate() {
            position[i] = p;
        }
        Filtration {
            complex: self,
            order,
            position,
        }
    }

    fn filtration_cmp(&self, a: usize, b: usize) -> Ordering {
        let (sa, sb) = (&self.simplices[a], &self.simplices[b]);
        self.values[a]
            .partial_cmp(&self.values[b])
            .expect("filtration values are finite")
            .then_with(|| sa.dim().cmp(&sb.dim()))
            .then_with(|| sa.cmp(sb))
    }

    /// Returns a copy with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= factor;
            if !v.is_finite() {
                return Err(Error::NonFinite(*v));
            }
        }
        Ok(out)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let wire: ComplexJson = serde_json::from_str(s)?;
        wire.try_into()
    }

    pub fn from_json_reader<R: Read>(r: R) -> Result<Self> {
        let wire: ComplexJson = serde_json::from_reader(r)?;
        wire.try_into()
    }

    pub fn to_json(&self) -> ComplexJson {
        let filtration = self.sorted_filtration_unchecked();
        ComplexJson {
            simplices: filtration
                .iter()
                .map(|(s, f)| SimplexJson { v: s.clone(), f })
                .collect(),
        }
    }
}

impl PartialEq for FilteredComplex {
    /// Equal as sets of valued simplices, regardless of insertion order.
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len()
            && self
                .iter()
                .all(|(s, f)| other.value_of(s).is_some_and(|g| g == f))
    }
}

/// JSON wire format: `{"simplices": [{"v": [0, 1], "f": 11.0}, ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexJson {
    pub simplices: Vec<SimplexJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimplexJson {
    pub v: Simplex,
    pub f: f64,
}

impl TryFrom<ComplexJson> for FilteredComplex {
    type Error = Error;

    fn try_from(wire: ComplexJson) -> Result<Self> {
        let mut complex = FilteredComplex::with_capacity(wire.simplices.len());
        for s in wire.simplices {
            complex.insert(s.v, s.f)?;
        }
        Ok(complex)
    }
}

/// A valid complex together with its canonical order.
#[derive(Clone, Debug)]
pub struct Filtration<'a> {
    complex: &'a FilteredComplex,
    order: Vec<usize>,
    position: Vec<usize>,
}

impl<'a> Filtration<'a> {
    pub fn complex(&self) -> &'a FilteredComplex {
        self.complex
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn simplex(&self, pos: usize) -> &'a Simplex {
        &self.complex.simplices[self.order[pos]]
    }

    pub fn value(&self, pos: usize) -> f64 {
        self.complex.values[self.order[pos]]
    }

    pub fn handle(&self, pos: usize) -> usize {
        self.order[pos]
    }

    /// Position of the simplex with the given handle.
    pub fn position_of_handle(&self, handle: usize) -> usize {
        self.position[handle]
    }

    pub fn position(&self, simplex: &Simplex) -> Option<usize> {
        self.complex.handle(simplex).map(|h| self.position[h])
    }

    /// Simplices and values in filtration order.
    pub fn iter(&self) -> impl Iterator<Item = (&'a Simplex, f64)> + '_ {
        let complex = self.complex;
        self.order
            .iter()
            .map(move |&i| (&complex.simplices[i], complex.values[i]))
    }

    /// Positions of the facets of the simplex at `pos`, ascending.
    pub fn facet_positions(&self, pos: usize) -> SmallVec<[usize; 4]> {
        let mut out: SmallVec<[usize; 4]> = self
            .simplex(pos)
            .facets()
            .map(|f| self.position(&f).expect("complex is closed under faces"))
            .collect();
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complex(items: &[(&[Vertex], f64)]) -> FilteredComplex {
        let mut c = FilteredComplex::new();
        for (v, f) in items {
            c.add_simplex(v.iter().copied(), *f).unwrap();
        }
        c
    }

    #[test]
    fn add_single_vertex() {
        let c = complex(&[(&[1], 10.0)]);
        assert_eq!(c.len(), 1);
        assert_eq!(c.value_of(&Simplex::vertex(1)), Some(10.0));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn edge_after_vertices_is_valid() {
        let c = complex(&[(&[1], 10.0), (&[2], 11.0), (&[1, 2], 11.0)]);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn low_edge_is_stored_but_reported() {
        let c = complex(&[(&[1], 10.0), (&[2], 11.0), (&[1, 2], 5.0)]);
        assert_eq!(c.value_of(&Simplex::edge(1, 2)), Some(5.0));
        let report = c.validate();
        assert!(report.missing_faces.is_empty());
        assert_eq!(report.monotonicity.len(), 2);
    }

    #[test]
    fn readding_replaces_value() {
        let mut c = complex(&[(&[0], 1.0)]);
        let h = c.add_simplex([0], 3.0).unwrap();
        assert_eq!(h, 0);
        assert_eq!(c.len(), 1);
        assert_eq!(c.value(0), 3.0);
    }

    #[test]
    fn empty_vertex_list_rejected() {
        let mut c = FilteredComplex::new();
        assert!(matches!(
            c.add_simplex(Vec::<Vertex>::new(), 0.0),
            Err(Error::InvalidSimplex(_))
        ));
        assert!(matches!(c.add_simplex([0], f64::NAN), Err(Error::NonFinite(_))));
    }

    #[test]
    fn validate_examples() {
        assert!(complex(&[(&[1], 0.0), (&[2], 0.0), (&[1, 2], 1.0)])
            .validate()
            .is_ok());

        let r = complex(&[(&[1, 2], 1.0)]).validate();
        assert_eq!(r.missing_faces.len(), 2);
        assert!(r.monotonicity.is_empty());

        let r = complex(&[(&[1], 3.0), (&[1, 2], 1.0), (&[2], 0.0)]).validate();
        assert!(r.missing_faces.is_empty());
        assert_eq!(r.monotonicity.len(), 1);
        assert_eq!(r.monotonicity[0].face, Simplex::vertex(1));
    }

    #[test]
    fn dimension_breaks_value_ties() {
        let c = complex(&[(&[1, 2], 0.0), (&[2], 0.0), (&[1], 0.0)]);
        let f = c.sorted_filtration().unwrap();
        let order: Vec<_> = f.iter().map(|(s, _)| s.clone()).collect();
        assert_eq!(
            order,
            vec![Simplex::vertex(1), Simplex::vertex(2), Simplex::edge(1, 2)]
        );
    }

    #[test]
    fn sorted_by_value_first() {
        let c = complex(&[(&[1, 2], 2.0), (&[2], 2.0), (&[1], 1.0)]);
        let f = c.sorted_filtration().unwrap();
        let order: Vec<_> = f.iter().map(|(s, _)| s.clone()).collect();
        assert_eq!(
            order,
            vec![Simplex::vertex(1), Simplex::vertex(2), Simplex::edge(1, 2)]
        );
    }

    #[test]
    fn invalid_complex_has_no_filtration() {
        let c = complex(&[(&[1, 2], 1.0)]);
        assert!(matches!(c.sorted_filtration(), Err(Error::Validation(_))));
    }

    #[test]
    fn json_rejects_bad_input() {
        assert!(FilteredComplex::from_json_str(r#"{"simplices": [{"v": [], "f": 0.0}]}"#).is_err());
        assert!(FilteredComplex::from_json_str(r#"{"simplices": [{"v": [0], "f": 1e400}]}"#).is_err());
        assert!(FilteredComplex::from_json_str(r#"{"simplices": [{"v": [0], "f": NaN}]}"#).is_err());
        let c = FilteredComplex::from_json_str(
            r#"{"simplices": [{"v": [0], "f": 0.0}, {"v": [1, 0], "f": 2.5}, {"v": [1], "f": 1.0}]}"#,
        )
        .unwrap();
        assert_eq!(c.value_of(&Simplex::edge(0, 1)), Some(2.5));
        let back = serde_json::to_string(&c.to_json()).unwrap();
        assert_eq!(FilteredComplex::from_json_str(&back).unwrap(), c);
    }

    #[test]
    fn simplex_faces() {
        let s = Simplex::new([2, 0, 1]).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.facets().count(), 3);
        assert_eq!(s.proper_faces().count(), 6);
        assert!(Simplex::edge(0, 2).is_face_of(&s));
        assert!(Simplex::new([1, 1]).is_err());
    }
}
