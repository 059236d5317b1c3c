//! Bottleneck distance between persistence diagrams.

use crate::error::{Error, Result};
use crate::reduction::PersistenceDiagram;

/// A diagram as a multiset of off-diagonal points plus points at infinity.
/// The diagonal is implicit.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AugmentedDiagram {
    finite: Vec<(f64, f64)>,
    infinite: Vec<f64>,
}

impl AugmentedDiagram {
    /// Points on the diagonal are dropped; `death = +inf` marks an
    /// essential point.
    pub fn new<I: IntoIterator<Item = (f64, f64)>>(points: I) -> Result<Self> {
        let mut diagram = AugmentedDiagram::default();
        for (birth, death) in points {
            if !birth.is_finite() {
                return Err(Error::NonFinite(birth));
            }
            if death.is_nan() || death < birth {
                return Err(Error::Domain(format!("point ({birth}, {death}) lies below the diagonal")));
            }
            if death == f64::INFINITY {
                diagram.infinite.push(birth);
            } else if death > birth {
                diagram.finite.push((birth, death));
            }
        }
        diagram.infinite.sort_by(f64::total_cmp);
        Ok(diagram)
    }

    pub fn finite(&self) -> &[(f64, f64)] {
        &self.finite
    }

    pub fn infinite(&self) -> &[f64] {
        &self.infinite
    }
}

impl From<&PersistenceDiagram> for AugmentedDiagram {
    fn from(diagram: &PersistenceDiagram) -> Self {
        let mut out = AugmentedDiagram::default();
        for p in &diagram.pairs {
            if p.death == f64::INFINITY {
                out.infinite.push(p.birth);
            } else if p.death > p.birth {
                out.finite.push((p.birth, p.death));
            }
        }
        out.infinite.sort_by(f64::total_cmp);
        out
    }
}

fn sup_dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

fn to_diagonal(a: (f64, f64)) -> f64 {
    (a.1 - a.0) / 2.0
}

/// `W_inf(a, b)`. Returns `+inf` when the diagrams have different numbers of
/// points at infinity.
pub fn bottleneck(a: &AugmentedDiagram, b: &AugmentedDiagram) -> f64 {
    if a.infinite.len() != b.infinite.len() {
        return f64::INFINITY;
    }
    let essential = a
        .infinite
        .iter()
        .zip(&b.infinite)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);

    let (p, q) = (&a.finite, &b.finite);
    let mut candidates: Vec<f64> = Vec::with_capacity(p.len() * q.len() + p.len() + q.len() + 1);
    candidates.push(0.0);
    candidates.extend(p.iter().chain(q).map(|&x| to_diagonal(x)));
    for &x in p {
        candidates.extend(q.iter().map(|&y| sup_dist(x, y)));
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // The largest candidate is always feasible: match everything to the
    // diagonal.
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching_within(p, q, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo].max(essential)
}

/// Whether the points of `p` and `q` can be matched to each other or to the
/// diagonal with every cost at most `eps`.
///
/// Left vertices are `p` followed by diagonal copies of `q`; right vertices
/// are `q` followed by diagonal copies of `p`.
fn perfect_matching_within(p: &[(f64, f64)], q: &[(f64, f64)], eps: f64) -> bool {
    let (n, m) = (p.len(), q.len());
    let size = n + m;
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); size];
    for (i, &x) in p.iter().enumerate() {
        for (j, &y) in q.iter().enumerate() {
            if sup_dist(x, y) <= eps {
                adjacency[i].push(j);
            }
        }
        if to_diagonal(x) <= eps {
            adjacency[i].push(m + i);
        }
    }
    for (j, &y) in q.iter().enumerate() {
        let left = n + j;
        if to_diagonal(y) <= eps {
            adjacency[left].push(j);
        }
        adjacency[left].extend(m..m + n);
    }
    hopcroft_karp(&adjacency, size) == size
}

fn hopcroft_karp(adjacency: &[Vec<usize>], right_size: usize) -> usize {
    const FREE: usize = usize::MAX;
    let left_size = adjacency.len();
    let mut match_left = vec![FREE; left_size];
    let mut match_right = vec![FREE; right_size];
    let mut layer = vec![0usize; left_size];
    let mut matched = 0;

    loop {
        // Layer the free left vertices and everything reachable from them
        // along alternating paths.
        let mut queue = std::collections::VecDeque::new();
        for u in 0..left_size {
            if match_left[u] == FREE {
                layer[u] = 0;
                queue.push_back(u);
            } else {
                layer[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                let w = match_right[v];
                if w == FREE {
                    found = true;
                } else if layer[w] == usize::MAX {
                    layer[w] = layer[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            return matched;
        }

        fn augment(
            u: usize,
            adjacency: &[Vec<usize>],
            layer: &mut [usize],
            match_left: &mut [usize],
            match_right: &mut [usize],
        ) -> bool {
            for &v in &adjacency[u] {
                let w = match_right[v];
                let next = w == usize::MAX
                    || (layer[w] == layer[u] + 1
                        && augment(w, adjacency, layer, match_left, match_right));
                if next {
                    match_left[u] = v;
                    match_right[v] = u;
                    return true;
                }
            }
            layer[u] = usize::MAX;
            false
        }

        for u in 0..left_size {
            if match_left[u] == FREE
                && augment(u, adjacency, &mut layer, &mut match_left, &mut match_right)
            {
                matched += 1;
            }
        }
    }
}
