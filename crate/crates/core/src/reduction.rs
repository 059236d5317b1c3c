//! Persistence pairing over the two-element field.
//!
//! Degree 0 is computed with a union-find sweep over the canonical order.
//! Higher degrees use column reduction: when representative cycles are
//! requested the boundary matrix is reduced (with clearing, top dimension
//! first); otherwise the coboundary matrix is reduced, which pairs the same
//! simplices and is much cheaper on Rips-type complexes. The pairing of
//! simplices is determined by the total order alone, so all routes agree.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::complex::{FilteredComplex, Filtration, Simplex};
use crate::error::{Error, Result};

/// How classes that never die are closed off.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EssentialMode {
    /// Death at `+inf` in every degree.
    Infinite,
    /// Degree 0: each component's essential class is paired with the
    /// largest filtration value in that component. Higher degrees keep
    /// `+inf`.
    #[default]
    Extended,
    /// Every essential class dies at the given value, which must be at
    /// least the maximum filtration value.
    Truncate(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PersistencePair {
    pub birth: f64,
    pub death: f64,
    pub degree: usize,
    /// The positive simplex whose addition creates the class.
    pub creator: Simplex,
    /// The negative simplex whose addition kills it; `None` for essential
    /// classes.
    pub killer: Option<Simplex>,
    /// A representative cycle containing the creator, when requested.
    pub cycle: Option<Vec<Simplex>>,
    pub essential: bool,
}

impl PersistencePair {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PersistenceDiagram {
    pub degree: usize,
    pub pairs: Vec<PersistencePair>,
}

impl PersistenceDiagram {
    pub fn empty(degree: usize) -> Self {
        PersistenceDiagram {
            degree,
            pairs: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PersistencePair> {
        self.pairs.iter()
    }

    /// Pairs with positive persistence, longest first; ties go to the
    /// earlier birth, then the smaller creator.
    pub fn offdiagonal(&self) -> Vec<&PersistencePair> {
        let mut out: Vec<_> = self.pairs.iter().filter(|p| p.persistence() > 0.0).collect();
        out.sort_by(|a, b| {
            b.persistence()
                .partial_cmp(&a.persistence())
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.birth.partial_cmp(&b.birth).unwrap_or(Ordering::Equal))
                .then_with(|| a.creator.cmp(&b.creator))
        });
        out
    }

    pub fn created_by(&self, simplex: &Simplex) -> Option<&PersistencePair> {
        self.pairs.iter().find(|p| &p.creator == simplex)
    }

    pub fn to_json(&self) -> DiagramJson {
        DiagramJson {
            degree: self.degree,
            pairs: self
                .pairs
                .iter()
                .map(|p| PairJson {
                    birth: p.birth,
                    death: p.death.is_finite().then_some(p.death),
                    creator: p.creator.clone(),
                    killer: p.killer.clone(),
                    cycle: p.cycle.clone(),
                    essential: p.essential,
                })
                .collect(),
        }
    }
}

/// Diagram wire format. `death: null` encodes `+inf`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagramJson {
    pub degree: usize,
    pub pairs: Vec<PairJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairJson {
    pub birth: f64,
    pub death: Option<f64>,
    pub creator: Simplex,
    #[serde(default)]
    pub killer: Option<Simplex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle: Option<Vec<Simplex>>,
    #[serde(default)]
    pub essential: bool,
}

impl From<DiagramJson> for PersistenceDiagram {
    fn from(wire: DiagramJson) -> Self {
        let degree = wire.degree;
        PersistenceDiagram {
            degree,
            pairs: wire
                .pairs
                .into_iter()
                .map(|p| PersistencePair {
                    birth: p.birth,
                    death: p.death.unwrap_or(f64::INFINITY),
                    degree,
                    creator: p.creator,
                    killer: p.killer,
                    cycle: p.cycle,
                    essential: p.essential,
                })
                .collect(),
        }
    }
}

/// Diagrams for degrees `0..=max_degree`. Essential classes die at `+inf`.
pub fn reduce(
    complex: &FilteredComplex,
    max_degree: usize,
    want_cycles: bool,
) -> Result<Vec<PersistenceDiagram>> {
    let filtration = complex.sorted_filtration()?;
    Ok(compute(&filtration, max_degree, want_cycles).diagrams)
}

/// Degree-0 diagram from the union-find sweep, with essential classes
/// closed according to `mode`.
pub fn zero_dim(complex: &FilteredComplex, mode: EssentialMode) -> Result<PersistenceDiagram> {
    persistence(complex, 0, mode, false)
}

/// The degree-`degree` diagram with essential classes closed by `mode`.
pub fn persistence(
    complex: &FilteredComplex,
    degree: usize,
    mode: EssentialMode,
    want_cycles: bool,
) -> Result<PersistenceDiagram> {
    let filtration = complex.sorted_filtration()?;
    persistence_of(&filtration, degree, mode, want_cycles)
}

pub(crate) fn persistence_of(
    filtration: &Filtration<'_>,
    degree: usize,
    mode: EssentialMode,
    want_cycles: bool,
) -> Result<PersistenceDiagram> {
    if let EssentialMode::Truncate(m) = mode {
        let max = filtration.complex().max_value().unwrap_or(f64::NEG_INFINITY);
        if !(m >= max) {
            return Err(Error::InvalidTruncation { value: m, max });
        }
    }
    let mut computed = compute(filtration, degree, want_cycles);
    let mut diagram = computed.diagrams.swap_remove(degree);
    close_essential(&mut diagram, mode, &computed.component_max);
    Ok(diagram)
}

fn close_essential(diagram: &mut PersistenceDiagram, mode: EssentialMode, component_max: &[f64]) {
    match mode {
        EssentialMode::Infinite => {}
        EssentialMode::Truncate(m) => {
            for p in diagram.pairs.iter_mut().filter(|p| p.essential) {
                p.death = m;
            }
        }
        EssentialMode::Extended if diagram.degree == 0 => {
            for (p, &max) in diagram
                .pairs
                .iter_mut()
                .filter(|p| p.essential)
                .zip(component_max)
            {
                p.death = max;
            }
        }
        EssentialMode::Extended => {}
    }
}

pub(crate) struct Computed {
    pub diagrams: Vec<PersistenceDiagram>,
    /// Largest value in the component of each essential degree-0 class, in
    /// the order those classes appear in `diagrams[0]`.
    pub component_max: Vec<f64>,
}

pub(crate) fn compute(filtration: &Filtration<'_>, max_degree: usize, want_cycles: bool) -> Computed {
    let zero = union_find(filtration, want_cycles);
    let mut diagrams = vec![zero.diagram];
    if max_degree >= 1 {
        let by_dim = positions_by_dim(filtration, max_degree + 1);
        if want_cycles {
            diagrams.extend(homology_with_cycles(filtration, &by_dim, max_degree));
        } else {
            let mut cleared = zero.killers;
            for p in 1..=max_degree {
                let (diagram, killers) = cohomology_degree(filtration, &by_dim, p, &cleared);
                diagrams.push(diagram);
                cleared = killers;
            }
        }
    }
    Computed {
        diagrams,
        component_max: zero.component_max,
    }
}

struct ZeroDim {
    diagram: PersistenceDiagram,
    killers: Vec<bool>,
    component_max: Vec<f64>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Elder-rule sweep. A component is identified by its oldest vertex, so
/// comparing roots by filtration position kills the younger component and
/// resolves equal births in favour of the earlier vertex.
fn union_find(filtration: &Filtration<'_>, want_cycles: bool) -> ZeroDim {
    let n = filtration.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut killers = vec![false; n];
    let mut pairs = Vec::new();

    for pos in 0..n {
        let simplex = filtration.simplex(pos);
        if simplex.dim() != 1 {
            continue;
        }
        let v = simplex.vertices();
        let a = filtration
            .position(&Simplex::vertex(v[0]))
            .expect("closed complex");
        let b = filtration
            .position(&Simplex::vertex(v[1]))
            .expect("closed complex");
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            continue;
        }
        let (older, younger) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[younger] = older;
        killers[pos] = true;
        let creator = filtration.simplex(younger).clone();
        let cycle = want_cycles.then(|| {
            let mut c = vec![filtration.simplex(older).clone(), creator.clone()];
            c.sort();
            c
        });
        pairs.push(PersistencePair {
            birth: filtration.value(younger),
            death: filtration.value(pos),
            degree: 0,
            creator,
            killer: Some(simplex.clone()),
            cycle,
            essential: false,
        });
    }

    let mut root_max: HashMap<usize, f64> = HashMap::new();
    for pos in 0..n {
        let first = filtration.simplex(pos).vertices()[0];
        let vpos = filtration
            .position(&Simplex::vertex(first))
            .expect("closed complex");
        let root = find(&mut parent, vpos);
        let entry = root_max.entry(root).or_insert(f64::NEG_INFINITY);
        *entry = entry.max(filtration.value(pos));
    }

    let mut component_max = Vec::new();
    for pos in 0..n {
        if filtration.simplex(pos).dim() == 0 && parent[pos] == pos {
            let creator = filtration.simplex(pos).clone();
            pairs.push(PersistencePair {
                birth: filtration.value(pos),
                death: f64::INFINITY,
                degree: 0,
                cycle: want_cycles.then(|| vec![creator.clone()]),
                creator,
                killer: None,
                essential: true,
            });
            component_max.push(root_max[&pos]);
        }
    }

    ZeroDim {
        diagram: PersistenceDiagram { degree: 0, pairs },
        killers,
        component_max,
    }
}

fn positions_by_dim(filtration: &Filtration<'_>, top: usize) -> Vec<Vec<usize>> {
    let mut by_dim = vec![Vec::new(); top + 1];
    for pos in 0..filtration.len() {
        let d = filtration.simplex(pos).dim();
        if d <= top {
            by_dim[d].push(pos);
        }
    }
    by_dim
}

/// Symmetric difference of two ascending index lists.
pub(crate) fn add_columns(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Degree-`p` pairs from the coboundary matrix: `p`-simplices are processed
/// latest first and each column's pivot is its earliest coface. Simplices
/// in `cleared` kill degree-`p - 1` classes and are skipped.
fn cohomology_degree(
    filtration: &Filtration<'_>,
    by_dim: &[Vec<usize>],
    p: usize,
    cleared: &[bool],
) -> (PersistenceDiagram, Vec<bool>) {
    let n = filtration.len();
    let mut coboundary: HashMap<usize, Vec<u32>> = HashMap::new();
    if let Some(cofaces) = by_dim.get(p + 1) {
        for &t in cofaces {
            for f in filtration.facet_positions(t) {
                coboundary.entry(f).or_default().push(t as u32);
            }
        }
    }

    let mut owner: HashMap<u32, Vec<u32>> = HashMap::new();
    let mut killers = vec![false; n];
    let mut pairs = Vec::new();
    for &sigma in by_dim[p].iter().rev() {
        if cleared[sigma] {
            continue;
        }
        let mut column = coboundary.remove(&sigma).unwrap_or_default();
        while let Some(&pivot) = column.first() {
            match owner.get(&pivot) {
                Some(other) => column = add_columns(&column, other),
                None => break,
            }
        }
        let creator = filtration.simplex(sigma).clone();
        match column.first().copied() {
            Some(pivot) => {
                let tau = pivot as usize;
                killers[tau] = true;
                pairs.push(PersistencePair {
                    birth: filtration.value(sigma),
                    death: filtration.value(tau),
                    degree: p,
                    creator,
                    killer: Some(filtration.simplex(tau).clone()),
                    cycle: None,
                    essential: false,
                });
                owner.insert(pivot, column);
            }
            None => pairs.push(PersistencePair {
                birth: filtration.value(sigma),
                death: f64::INFINITY,
                degree: p,
                creator,
                killer: None,
                cycle: None,
                essential: true,
            }),
        }
    }
    pairs.sort_by_key(|pair| {
        filtration
            .position(&pair.creator)
            .expect("creator is in the complex")
    });
    (PersistenceDiagram { degree: p, pairs }, killers)
}

/// Boundary-matrix reduction for degrees `1..=max_degree`, recording a
/// representative cycle for every pair. Finite classes use the reduced
/// column of their killer; essential classes use the accumulated chain of
/// their creator. Dimensions are reduced top down so that creators found in
/// dimension `d + 1` can be cleared from dimension `d`.
fn homology_with_cycles(
    filtration: &Filtration<'_>,
    by_dim: &[Vec<usize>],
    max_degree: usize,
) -> Vec<PersistenceDiagram> {
    let n = filtration.len();
    let chain_to_simplices = |chain: &[u32]| -> Vec<Simplex> {
        chain
            .iter()
            .map(|&x| filtration.simplex(x as usize).clone())
            .collect()
    };
    let mut per_degree: Vec<Vec<(usize, PersistencePair)>> = vec![Vec::new(); max_degree + 1];
    let mut cleared = vec![false; n];

    for d in (1..=max_degree + 1).rev() {
        let track_chains = d <= max_degree;
        let mut pivot_owner: Vec<Option<u32>> = vec![None; n];
        let mut reduced: HashMap<u32, Vec<u32>> = HashMap::new();
        let mut chains: HashMap<u32, Vec<u32>> = HashMap::new();
        let mut next_cleared = vec![false; n];

        for &j in &by_dim[d] {
            if cleared[j] {
                continue;
            }
            let mut column: Vec<u32> = filtration
                .facet_positions(j)
                .iter()
                .map(|&x| x as u32)
                .collect();
            let mut chain: Vec<u32> = if track_chains { vec![j as u32] } else { Vec::new() };
            while let Some(&low) = column.last() {
                let Some(k) = pivot_owner[low as usize] else { break };
                column = add_columns(&column, &reduced[&k]);
                if track_chains {
                    chain = add_columns(&chain, &chains[&k]);
                }
            }
            match column.last().copied() {
                Some(low) => {
                    let low = low as usize;
                    pivot_owner[low] = Some(j as u32);
                    next_cleared[low] = true;
                    if d >= 2 {
                        per_degree[d - 1].push((
                            low,
                            PersistencePair {
                                birth: filtration.value(low),
                                death: filtration.value(j),
                                degree: d - 1,
                                creator: filtration.simplex(low).clone(),
                                killer: Some(filtration.simplex(j).clone()),
                                cycle: Some(chain_to_simplices(&column)),
                                essential: false,
                            },
                        ));
                    }
                    reduced.insert(j as u32, column);
                    if track_chains {
                        chains.insert(j as u32, chain);
                    }
                }
                None if track_chains => per_degree[d].push((
                    j,
                    PersistencePair {
                        birth: filtration.value(j),
                        death: f64::INFINITY,
                        degree: d,
                        creator: filtration.simplex(j).clone(),
                        killer: None,
                        cycle: Some(chain_to_simplices(&chain)),
                        essential: true,
                    },
                )),
                None => {}
            }
        }
        cleared = next_cleared;
    }

    per_degree
        .into_iter()
        .enumerate()
        .skip(1)
        .map(|(degree, mut pairs)| {
            pairs.sort_by_key(|(pos, _)| *pos);
            PersistenceDiagram {
                degree,
                pairs: pairs.into_iter().map(|(_, p)| p).collect(),
            }
        })
        .collect()
}
