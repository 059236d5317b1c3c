use std::f64::consts::PI;

use phstab::kernels::*;
use phstab::rng::stream_rng;
use proptest::prelude::*;
use rand::Rng;

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}

fn spec(family: KernelFamily, dim: usize, a: f64) -> KernelSpec {
    KernelSpec::new(family, dim, a).unwrap()
}

fn mass_1d(k: &KernelSpec) -> f64 {
    let a = k.bandwidth();
    let f = |x: f64| k.density(&[x]).unwrap();
    if k.family().is_compact() {
        simpson(&f, -a, 0.0, 20_000) + simpson(&f, 0.0, a, 20_000)
    } else {
        simpson(&f, -12.0 * a, 12.0 * a, 40_000)
    }
}

fn mass_2d(k: &KernelSpec) -> f64 {
    let a = k.bandwidth();
    if k.family().is_compact() {
        // x = a sin(theta) removes the square-root behaviour of the chord
        // length at the edge of the support.
        simpson(
            |theta: f64| {
                let x = a * theta.sin();
                let half = (a * a - x * x).max(0.0).sqrt();
                a * theta.cos() * simpson(|y| k.density(&[x, y]).unwrap(), -half, half, 2000)
            },
            -PI / 2.0,
            PI / 2.0,
            2000,
        )
    } else {
        let r = 12.0 * a;
        simpson(|x| simpson(|y| k.density(&[x, y]).unwrap(), -r, r, 2000), -r, r, 2000)
    }
}

#[test]
fn densities_integrate_to_one() {
    for family in KernelFamily::ALL {
        for a in [0.3, 1.0, 2.5] {
            let m1 = mass_1d(&spec(family, 1, a));
            assert!((m1 - 1.0).abs() < 1e-6, "{family} 1-D mass {m1}");
            let m2 = mass_2d(&spec(family, 2, a));
            assert!((m2 - 1.0).abs() < 1e-6, "{family} 2-D mass {m2}");
        }
    }
}

#[test]
fn densities_have_mean_zero() {
    for family in KernelFamily::ALL {
        let k = spec(family, 1, 0.8);
        let m = simpson(|x| x * k.density(&[x]).unwrap(), -10.0, 10.0, 40_000);
        assert!(m.abs() < 1e-8);
    }
}

#[test]
fn compact_kernels_are_lipschitz() {
    let mut rng = stream_rng(17, 0);
    for dim in 1..=4 {
        for family in [KernelFamily::Triangular, KernelFamily::Epanechnikov] {
            let k = spec(family, dim, rng.random_range(0.1..2.0));
            let lip = k.density_lipschitz().unwrap();
            for _ in 0..10_000 {
                let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.2..1.2) * k.bandwidth()).collect();
                let y: Vec<f64> = x.iter().map(|v| v + rng.random_range(-0.3..0.3) * k.bandwidth()).collect();
                let dist = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                let diff = (k.density(&x).unwrap() - k.density(&y).unwrap()).abs();
                assert!(diff <= lip * dist * (1.0 + 1e-12) + 1e-15);
            }
        }
    }
}

fn normal_cdf(x: f64) -> f64 {
    0.5 + simpson(|s| (-0.5 * s * s).exp(), 0.0, x, 20_000) / (2.0 * PI).sqrt()
}

#[test]
fn gaussian_shift_modulus() {
    let mut rng = stream_rng(5, 0);
    for dim in [1, 2, 3] {
        let k = spec(KernelFamily::Gaussian, dim, 0.4);
        for probe in 0..300 {
            let t: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = t.iter().map(|v| v * v).sum::<f64>().sqrt();
            let est = l1_shift_mc(&k, &t, 2000, probe).unwrap();
            let bound = 2.0 * norm / (0.4 * (2.0 * PI).sqrt());
            assert!(est.estimate <= bound + 3.0 * est.stderr);
            // Closed form of the modulus.
            let exact = 2.0 * (2.0 * normal_cdf(norm / 0.8) - 1.0);
            assert!((est.estimate - exact).abs() <= 5.0 * est.stderr + 1e-12);
        }
    }
}

#[test]
fn gaussian_l1_distance_against_quadrature() {
    let k1 = spec(KernelFamily::Gaussian, 1, 1.0);
    let k2 = spec(KernelFamily::Gaussian, 1, 2.0);
    let c = (8.0 * 2f64.ln() / 3.0).sqrt();
    let f = |x: f64| (k1.density(&[x]).unwrap() - k2.density(&[x]).unwrap()).abs();
    let oracle = simpson(&f, -40.0, -c, 40_000) + simpson(&f, -c, c, 40_000) + simpson(&f, c, 40.0, 40_000);
    assert!((oracle - 0.645_28).abs() < 1e-4);
    let est = l1_distance_mc(&k1, &k2, 200_000, 8).unwrap();
    assert!((est.estimate - oracle).abs() < 4.0 * est.stderr, "{} vs {}", est.estimate, oracle);
}

proptest! {
    #[test]
    fn bandwidth_scaling(
        family_index in 0usize..3,
        dim in 1usize..5,
        a in 0.05f64..5.0,
        x in proptest::collection::vec(-3.0f64..3.0, 4),
    ) {
        let family = KernelFamily::ALL[family_index];
        let x = &x[..dim];
        let scaled: Vec<f64> = x.iter().map(|v| v / a).collect();
        let lhs = spec(family, dim, a).density(x).unwrap();
        let rhs = a.powi(-(dim as i32)) * spec(family, dim, 1.0).density(&scaled).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300));
    }

    #[test]
    fn draws_are_deterministic(seed in any::<u64>(), stream in any::<u64>()) {
        for family in KernelFamily::ALL {
            let k = spec(family, 3, 0.2);
            prop_assert_eq!(k.sample(&mut stream_rng(seed, stream)), k.sample(&mut stream_rng(seed, stream)));
        }
    }
}
