use phstab::builders::{line_graph_skeleton, lower_star};
use phstab::metrics::{bottleneck, AugmentedDiagram};
use phstab::reduction::{zero_dim, EssentialMode};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Minimum over every partial matching of the max cost, with unmatched
/// points sent to the diagonal.
fn exhaustive(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    fn go(i: usize, a: &[(f64, f64)], b: &[(f64, f64)], used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if acc >= *best {
            return;
        }
        if i == a.len() {
            let rest = b
                .iter()
                .zip(used.iter())
                .filter(|(_, &u)| !u)
                .map(|(p, _)| (p.1 - p.0) / 2.0)
                .fold(acc, f64::max);
            *best = best.min(rest);
            return;
        }
        let p = a[i];
        go(i + 1, a, b, used, acc.max((p.1 - p.0) / 2.0), best);
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                let cost = (p.0 - b[j].0).abs().max((p.1 - b[j].1).abs());
                go(i + 1, a, b, used, acc.max(cost), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(0, a, b, &mut vec![false; b.len()], 0.0, &mut best);
    best
}

fn random_points(rng: &mut ChaCha8Rng, max: usize) -> Vec<(f64, f64)> {
    let n = rng.random_range(0..=max);
    (0..n)
        .map(|_| {
            let b = rng.random_range(0..10) as f64 / 2.0;
            (b, b + rng.random_range(1..8) as f64 / 2.0)
        })
        .collect()
}

fn diagram(points: &[(f64, f64)]) -> AugmentedDiagram {
    AugmentedDiagram::new(points.iter().copied()).unwrap()
}

#[test]
fn matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..500 {
        let a = random_points(&mut rng, 5);
        let b = random_points(&mut rng, 5);
        assert_eq!(bottleneck(&diagram(&a), &diagram(&b)), exhaustive(&a, &b), "{a:?} {b:?}");
    }
}

#[test]
fn lower_star_stability() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let skeleton = line_graph_skeleton(20).unwrap();
    for _ in 0..1000 {
        let f: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g: Vec<f64> = f.iter().map(|x| x + rng.random_range(-0.3..0.3)).collect();
        let sup = f.iter().zip(&g).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        for mode in [EssentialMode::Infinite, EssentialMode::Extended] {
            let df = zero_dim(&lower_star(&skeleton, &f).unwrap(), mode).unwrap();
            let dg = zero_dim(&lower_star(&skeleton, &g).unwrap(), mode).unwrap();
            let w = bottleneck(&(&df).into(), &(&dg).into());
            assert!(w <= sup, "W = {w} > {sup}");
        }
    }
}

proptest! {
    #[test]
    fn metric_axioms(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (
            diagram(&random_points(&mut rng, 6)),
            diagram(&random_points(&mut rng, 6)),
            diagram(&random_points(&mut rng, 6)),
        );
        prop_assert_eq!(bottleneck(&a, &a), 0.0);
        prop_assert_eq!(bottleneck(&a, &b), bottleneck(&b, &a));
        prop_assert!(bottleneck(&a, &c) <= bottleneck(&a, &b) + bottleneck(&b, &c));
        if bottleneck(&a, &b) == 0.0 {
            let mut x = a.finite().to_vec();
            let mut y = b.finite().to_vec();
            x.sort_by(|p, q| p.partial_cmp(q).unwrap());
            y.sort_by(|p, q| p.partial_cmp(q).unwrap());
            prop_assert_eq!(x, y);
        }
    }

    #[test]
    fn permutation_does_not_matter(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_points(&mut rng, 6);
        let mut shuffled = a.clone();
        shuffled.reverse();
        prop_assert_eq!(bottleneck(&diagram(&a), &diagram(&shuffled)), 0.0);
    }
}
