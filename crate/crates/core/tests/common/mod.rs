#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use phstab::complex::{FilteredComplex, Simplex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A pairing record that ignores cycles: (degree, creator, killer).
pub type Pairing = BTreeSet<(usize, Vec<u32>, Option<Vec<u32>>)>;

/// Canonical order computed independently of the library.
pub fn naive_order(c: &FilteredComplex) -> Vec<(Simplex, f64)> {
    let mut all: Vec<(Simplex, f64)> = c.iter().map(|(s, f)| (s.clone(), f)).collect();
    all.sort_by(|(a, fa), (b, fb)| {
        fa.partial_cmp(fb)
            .unwrap()
            .then(a.dim().cmp(&b.dim()))
            .then(a.vertices().cmp(b.vertices()))
    });
    all
}

/// Textbook left-to-right column reduction without any optimization.
pub fn naive_pairing(c: &FilteredComplex, max_degree: usize) -> Pairing {
    let order = naive_order(c);
    let index: HashMap<&Simplex, usize> = order.iter().enumerate().map(|(i, (s, _))| (s, i)).collect();
    let mut columns: Vec<BTreeSet<usize>> = Vec::new();
    let mut low_owner: HashMap<usize, usize> = HashMap::new();
    let mut out = Pairing::new();
    let mut paired = vec![false; order.len()];
    for (j, (s, _)) in order.iter().enumerate() {
        let mut col: BTreeSet<usize> = s.facets().map(|f| index[&f]).collect();
        while let Some(&low) = col.iter().next_back() {
            match low_owner.get(&low) {
                Some(&k) => {
                    let other = columns[k].clone();
                    col = col.symmetric_difference(&other).copied().collect();
                }
                None => break,
            }
        }
        if let Some(&low) = col.iter().next_back() {
            low_owner.insert(low, j);
            paired[low] = true;
            paired[j] = true;
            let creator = &order[low].0;
            if creator.dim() <= max_degree {
                out.insert((creator.dim(), creator.vertices().to_vec(), Some(s.vertices().to_vec())));
            }
        }
        columns.push(col);
    }
    for (j, (s, _)) in order.iter().enumerate() {
        if !paired[j] && s.dim() <= max_degree {
            out.insert((s.dim(), s.vertices().to_vec(), None));
        }
    }
    out
}

pub fn library_pairing(diagrams: &[phstab::reduction::PersistenceDiagram]) -> Pairing {
    diagrams
        .iter()
        .flat_map(|d| d.iter())
        .map(|p| {
            (
                p.degree,
                p.creator.vertices().to_vec(),
                p.killer.as_ref().map(|k| k.vertices().to_vec()),
            )
        })
        .collect()
}

/// A random valid filtered complex on at most `max_vertices` vertices with
/// simplices up to dimension 3. Values are small integers so that ties are
/// common.
pub fn random_complex(seed: u64, max_vertices: u32) -> FilteredComplex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_vertices);
    let density: f64 = rng.random_range(0.3..1.0);
    let mut c = FilteredComplex::new();
    for v in 0..n {
        c.add_simplex([v], rng.random_range(0..4) as f64).unwrap();
    }
    let mut previous: Vec<Simplex> = (0..n).map(Simplex::vertex).collect();
    for _dim in 1..=3 {
        let mut next = Vec::new();
        let mut candidates: BTreeSet<Simplex> = BTreeSet::new();
        for s in &previous {
            for v in (s.vertices().last().unwrap() + 1)..n {
                let mut vs = s.vertices().to_vec();
                vs.push(v);
                candidates.insert(Simplex::new(vs).unwrap());
            }
        }
        for s in candidates {
            let Some(base) = s.facets().map(|f| c.value_of(&f)).collect::<Option<Vec<f64>>>() else {
                continue;
            };
            if rng.random::<f64>() < density {
                let value = base.into_iter().fold(f64::NEG_INFINITY, f64::max) + rng.random_range(0..3) as f64;
                c.insert(s.clone(), value).unwrap();
                next.push(s);
            }
        }
        previous = next;
    }
    c
}

/// Boundary of a chain over the two-element field.
pub fn boundary(chain: &[Simplex]) -> BTreeSet<Simplex> {
    let mut out = BTreeSet::new();
    for s in chain {
        if s.dim() == 0 {
            continue;
        }
        for f in s.facets() {
            if !out.remove(&f) {
                out.insert(f);
            }
        }
    }
    out
}
