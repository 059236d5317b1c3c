//! Smoothing kernels on `R^d`.
//!
//! All three families are radial: `K_a(x) = a^-d K(x / a)` where `K` is the
//! unit-bandwidth profile. The triangular and Epanechnikov kernels are
//! supported on the closed ball of radius `a`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Triangular,
    Epanechnikov,
    Gaussian,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 3] = [
        KernelFamily::Triangular,
        KernelFamily::Epanechnikov,
        KernelFamily::Gaussian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Triangular => "triangular",
            KernelFamily::Epanechnikov => "epanechnikov",
            KernelFamily::Gaussian => "gaussian",
        }
    }

    pub fn is_compact(self) -> bool {
        !matches!(self, KernelFamily::Gaussian)
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KernelFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown kernel family {s:?}")))
    }
}

impl std::fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let mut v = if d % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if d % 2 == 0 { 2 } else { 3 };
    while k <= d {
        v *= 2.0 * PI / k as f64;
        k += 2;
    }
    v
}

/// `{"family": "gaussian", "dim": 7, "bandwidth": 0.05}`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelSpecJson", into = "KernelSpecJson")]
pub struct KernelSpec {
    family: KernelFamily,
    dim: usize,
    bandwidth: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KernelSpecJson {
    pub family: KernelFamily,
    pub dim: usize,
    pub bandwidth: f64,
}

impl TryFrom<KernelSpecJson> for KernelSpec {
    type Error = Error;

    fn try_from(wire: KernelSpecJson) -> Result<Self> {
        KernelSpec::new(wire.family, wire.dim, wire.bandwidth)
    }
}

impl From<KernelSpec> for KernelSpecJson {
    fn from(k: KernelSpec) -> Self {
        KernelSpecJson {
            family: k.family,
            dim: k.dim,
            bandwidth: k.bandwidth,
        }
    }
}

impl KernelSpec {
    pub fn new(family: KernelFamily, dim: usize, bandwidth: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("kernel dimension must be at least 1".into()));
        }
        check_bandwidth(bandwidth)?;
        Ok(KernelSpec {
            family,
            dim,
            bandwidth,
        })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn with_bandwidth(&self, bandwidth: f64) -> Result<Self> {
        KernelSpec::new(self.family, self.dim, bandwidth)
    }

    /// Density as a function of the distance `r` from the origin.
    pub fn radial_density(&self, r: f64) -> f64 {
        let d = self.dim as f64;
        let a = self.bandwidth;
        let t = r / a;
        match self.family {
            KernelFamily::Triangular if t <= 1.0 => {
                (d + 1.0) / (a.powi(self.dim as i32) * unit_ball_volume(self.dim)) * (1.0 - t)
            }
            KernelFamily::Epanechnikov if t <= 1.0 => {
                (d + 2.0) / (2.0 * a.powi(self.dim as i32) * unit_ball_volume(self.dim))
                    * (1.0 - t * t)
            }
            KernelFamily::Gaussian => {
                (-0.5 * t * t).exp() / (a.powi(self.dim as i32) * (2.0 * PI).powf(d / 2.0))
            }
            _ => 0.0,
        }
    }

    pub fn density(&self, x: &[f64]) -> Result<f64> {
        self.check_arity(x.len())?;
        Ok(self.radial_density(norm(x)))
    }

    fn check_arity(&self, got: usize) -> Result<()> {
        if got != self.dim {
            return Err(Error::Arity {
                expected: self.dim,
                got,
            });
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.sample_into(rng, &mut out);
        out
    }

    /// Overwrites `out` (of length `dim`) with one draw.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        for x in out.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        if self.family == KernelFamily::Gaussian {
            for x in out.iter_mut() {
                *x *= self.bandwidth;
            }
            return;
        }
        let mut len = norm(out);
        while len == 0.0 {
            for x in out.iter_mut() {
                *x = rng.sample(StandardNormal);
            }
            len = norm(out);
        }
        let u: f64 = rng.random();
        let r = self.bandwidth * unit_radius(self.family, self.dim, u);
        for x in out.iter_mut() {
            *x *= r / len;
        }
    }

    /// Lipschitz constant of the density itself, for the compact families.
    pub fn density_lipschitz(&self) -> Option<f64> {
        let d = self.dim as f64;
        let scale = self.bandwidth.powi(self.dim as i32 + 1) * unit_ball_volume(self.dim);
        match self.family {
            KernelFamily::Triangular => Some((d + 1.0) / scale),
            KernelFamily::Epanechnikov => Some((d + 2.0) / scale),
            KernelFamily::Gaussian => None,
        }
    }

    /// Lipschitz constant of `h * K` when `|h| <= sup_bound`. For the compact
    /// families the constant holds on `B_a(x)` given the bound on
    /// `B_2a(x)`.
    pub fn smoothing_bound(&self, sup_bound: f64) -> Result<f64> {
        let (m, a, dim) = (sup_bound, self.bandwidth, self.dim);
        match self.family {
            KernelFamily::Triangular => LipschitzBound::Triangular {
                sup_bound: m,
                bandwidth: a,
                dim,
            },
            KernelFamily::Epanechnikov => LipschitzBound::Epanechnikov {
                sup_bound: m,
                bandwidth: a,
                dim,
            },
            KernelFamily::Gaussian => LipschitzBound::Gaussian {
                sup_bound: m,
                bandwidth: a,
            },
        }
        .constant()
    }
}

fn check_bandwidth(a: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("bandwidth must be positive, got {a}")));
    }
    Ok(())
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Radius `t` in `[0, 1]` with `P(|X| <= t) = u` for the unit compact kernel.
fn unit_radius(family: KernelFamily, dim: usize, u: f64) -> f64 {
    match (family, dim) {
        (KernelFamily::Triangular, 1) => 1.0 - (1.0 - u).sqrt(),
        (KernelFamily::Epanechnikov, 2) => (1.0 - (1.0 - u).sqrt()).sqrt(),
        _ => {
            let d = dim as i32;
            let df = dim as f64;
            let cdf = |t: f64| match family {
                KernelFamily::Triangular => (df + 1.0) * t.powi(d) - df * t.powi(d + 1),
                _ => ((df + 2.0) * t.powi(d) - df * t.powi(d + 2)) / 2.0,
            };
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..128 {
                if hi - lo <= 1e-12 * hi {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if cdf(mid) < u {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    }
}

/// The closed-form Lipschitz constants for `h * K`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LipschitzBound {
    /// `h` integrable with `||h||_1 = l1_norm` and a `kernel_lipschitz`
    /// kernel.
    Integrable { l1_norm: f64, kernel_lipschitz: f64 },
    /// `|h| <= sup_bound` on `B_2a(x)` and a `kernel_lipschitz` kernel
    /// supported in `B_a(0)`; holds on `B_a(x)`.
    CompactSupport {
        sup_bound: f64,
        bandwidth: f64,
        dim: usize,
        kernel_lipschitz: f64,
    },
    /// `|h| <= sup_bound` and `∫|K(s+t) - K(s)| ds <= l1_modulus |t|`.
    Bounded { sup_bound: f64, l1_modulus: f64 },
    Triangular { sup_bound: f64, bandwidth: f64, dim: usize },
    Epanechnikov { sup_bound: f64, bandwidth: f64, dim: usize },
    Gaussian { sup_bound: f64, bandwidth: f64 },
}

impl LipschitzBound {
    pub fn constant(&self) -> Result<f64> {
        let nonneg = |name: &str, x: f64| {
            if x >= 0.0 && x.is_finite() {
                Ok(x)
            } else {
                Err(Error::Domain(format!("{name} must be non-negative, got {x}")))
            }
        };
        match *self {
            LipschitzBound::Integrable {
                l1_norm,
                kernel_lipschitz,
            } => Ok(nonneg("l1 norm", l1_norm)? * nonneg("kernel constant", kernel_lipschitz)?),
            LipschitzBound::CompactSupport {
                sup_bound,
                bandwidth,
                dim,
                kernel_lipschitz,
            } => {
                check_bandwidth(bandwidth)?;
                Ok(2.0
                    * nonneg("bound", sup_bound)?
                    * nonneg("kernel constant", kernel_lipschitz)?
                    * bandwidth.powi(dim as i32)
                    * unit_ball_volume(dim))
            }
            LipschitzBound::Bounded {
                sup_bound,
                l1_modulus,
            } => Ok(nonneg("bound", sup_bound)? * nonneg("modulus", l1_modulus)?),
            LipschitzBound::Triangular {
                sup_bound,
                bandwidth,
                dim,
            } => {
                check_bandwidth(bandwidth)?;
                Ok(2.0 * nonneg("bound", sup_bound)? * (dim as f64 + 1.0) / bandwidth)
            }
            LipschitzBound::Epanechnikov {
                sup_bound,
                bandwidth,
                dim,
            } => {
                check_bandwidth(bandwidth)?;
                Ok(2.0 * nonneg("bound", sup_bound)? * (dim as f64 + 2.0) / bandwidth)
            }
            LipschitzBound::Gaussian {
                sup_bound,
                bandwidth,
            } => {
                check_bandwidth(bandwidth)?;
                Ok((2.0 / PI).sqrt() * nonneg("bound", sup_bound)? / bandwidth)
            }
        }
    }
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct L1Estimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
}

fn mixture_l1<F1, F2, S1, S2>(
    n_samples: usize,
    seed: u64,
    dim: usize,
    f1: F1,
    f2: F2,
    s1: S1,
    s2: S2,
) -> Result<L1Estimate>
where
    F1: Fn(&[f64]) -> f64,
    F2: Fn(&[f64]) -> f64,
    S1: Fn(&mut rand_chacha::ChaCha8Rng, &mut [f64]),
    S2: Fn(&mut rand_chacha::ChaCha8Rng, &mut [f64]),
{
    if n_samples == 0 {
        return Err(Error::Domain("at least one sample is required".into()));
    }
    let mut rng = stream_rng(seed, 0);
    let mut x = vec![0.0; dim];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n_samples {
        if rng.random::<bool>() {
            s1(&mut rng, &mut x);
        } else {
            s2(&mut rng, &mut x);
        }
        let (p, q) = (f1(&x), f2(&x));
        let w = if p == q { 0.0 } else { 2.0 * (p - q).abs() / (p + q) };
        sum += w;
        sum_sq += w * w;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let stderr = if n_samples > 1 {
        ((sum_sq - n * mean * mean).max(0.0) / (n - 1.0) / n).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(L1Estimate {
        estimate: mean,
        stderr,
        samples: n_samples,
    })
}

/// Estimates `∫|K1 - K2|` by importance sampling from `(K1 + K2) / 2`.
pub fn l1_distance_mc(k1: &KernelSpec, k2: &KernelSpec, n_samples: usize, seed: u64) -> Result<L1Estimate> {
    k1.check_arity(k2.dim)?;
    if k1 == k2 {
        return Ok(L1Estimate {
            estimate: 0.0,
            stderr: 0.0,
            samples: n_samples,
        });
    }
    mixture_l1(
        n_samples,
        seed,
        k1.dim,
        |x| k1.radial_density(norm(x)),
        |x| k2.radial_density(norm(x)),
        |rng, x| k1.sample_into(rng, x),
        |rng, x| k2.sample_into(rng, x),
    )
}

/// Estimates `∫|K(s + t) - K(s)| ds`.
pub fn l1_shift_mc(k: &KernelSpec, t: &[f64], n_samples: usize, seed: u64) -> Result<L1Estimate> {
    k.check_arity(t.len())?;
    let shifted = |x: &[f64]| {
        let r = x.iter().zip(t).map(|(a, b)| (a + b) * (a + b)).sum::<f64>().sqrt();
        k.radial_density(r)
    };
    mixture_l1(
        n_samples,
        seed,
        k.dim,
        shifted,
        |x| k.radial_density(norm(x)),
        |rng, x| {
            k.sample_into(rng, x);
            for (a, b) in x.iter_mut().zip(t) {
                *a -= b;
            }
        },
        |rng, x| k.sample_into(rng, x),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(family: KernelFamily, dim: usize, a: f64) -> KernelSpec {
        KernelSpec::new(family, dim, a).unwrap()
    }

    #[test]
    fn ball_volumes() {
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn density_examples() {
        let g = spec(KernelFamily::Gaussian, 1, 1.0);
        assert!((g.density(&[0.0]).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
        let t = spec(KernelFamily::Triangular, 1, 2.0);
        assert_eq!(t.density(&[0.0]).unwrap(), 0.5);
        let e = spec(KernelFamily::Epanechnikov, 1, 1.0);
        assert_eq!(e.density(&[1.0]).unwrap(), 0.0);
        assert_eq!(e.density(&[-1.0]).unwrap(), 0.0);
        assert!(matches!(e.density(&[0.0, 0.0]), Err(Error::Arity { .. })));
    }

    #[test]
    fn bound_examples() {
        let g = LipschitzBound::Gaussian {
            sup_bound: 14.0,
            bandwidth: 0.5,
        };
        assert!((g.constant().unwrap() - 22.340_767_702_480_23).abs() < 1e-12);
        let t = LipschitzBound::Triangular {
            sup_bound: 1.0,
            bandwidth: 1.0,
            dim: 1,
        };
        assert_eq!(t.constant().unwrap(), 4.0);
        let p = LipschitzBound::Integrable {
            l1_norm: 2.0,
            kernel_lipschitz: 3.0,
        };
        assert_eq!(p.constant().unwrap(), 6.0);
        let bad = LipschitzBound::Gaussian {
            sup_bound: 1.0,
            bandwidth: 0.0,
        };
        assert!(matches!(bad.constant(), Err(Error::Domain(_))));
    }

    #[test]
    fn compact_bound_agrees_with_corollaries() {
        for dim in 1..5 {
            for family in [KernelFamily::Triangular, KernelFamily::Epanechnikov] {
                let k = spec(family, dim, 0.3);
                let general = LipschitzBound::CompactSupport {
                    sup_bound: 2.0,
                    bandwidth: 0.3,
                    dim,
                    kernel_lipschitz: k.density_lipschitz().unwrap(),
                }
                .constant()
                .unwrap();
                let specific = k.smoothing_bound(2.0).unwrap();
                assert!((general - specific).abs() < 1e-9 * specific);
            }
        }
    }

    #[test]
    fn compact_samples_stay_in_support() {
        let mut rng = stream_rng(1, 0);
        for dim in 1..5 {
            for family in [KernelFamily::Triangular, KernelFamily::Epanechnikov] {
                let k = spec(family, dim, 0.7);
                for _ in 0..2000 {
                    assert!(norm(&k.sample(&mut rng)) <= 0.7);
                }
            }
        }
    }

    #[test]
    fn radial_cdf_inverts() {
        for dim in 1..6 {
            for u in [0.0, 1e-6, 0.3, 0.5, 0.999] {
                let t = unit_radius(KernelFamily::Triangular, dim, u);
                let d = dim as f64;
                let f = (d + 1.0) * t.powi(dim as i32) - d * t.powi(dim as i32 + 1);
                assert!((f - u).abs() < 1e-9, "dim {dim} u {u} f {f}");
                let t = unit_radius(KernelFamily::Epanechnikov, dim, u);
                let f = ((d + 2.0) * t.powi(dim as i32) - d * t.powi(dim as i32 + 2)) / 2.0;
                assert!((f - u).abs() < 1e-9, "dim {dim} u {u} f {f}");
            }
        }
    }

    #[test]
    fn gaussian_moments() {
        let k = spec(KernelFamily::Gaussian, 1, 0.5);
        let mut rng = stream_rng(11, 0);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| k.sample(&mut rng)[0]).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 4.0 * 0.5 / (n as f64).sqrt());
        assert!((var - 0.25).abs() < 0.05 * 0.25);
    }

    #[test]
    fn sampling_is_reproducible() {
        let k = spec(KernelFamily::Gaussian, 3, 0.2);
        assert_eq!(k.sample(&mut stream_rng(5, 2)), k.sample(&mut stream_rng(5, 2)));
    }

    #[test]
    fn identical_kernels_have_zero_distance() {
        let k = spec(KernelFamily::Epanechnikov, 2, 0.4);
        assert_eq!(l1_distance_mc(&k, &k, 100, 0).unwrap().estimate, 0.0);
        let t = spec(KernelFamily::Triangular, 1, 1.0);
        let e = spec(KernelFamily::Epanechnikov, 1, 1.0);
        let est = l1_distance_mc(&t, &e, 10_000, 3).unwrap();
        assert!(est.estimate > 0.0 && est.estimate <= 2.0);
    }

    #[test]
    fn family_names_round_trip() {
        for f in KernelFamily::ALL {
            assert_eq!(f.name().parse::<KernelFamily>().unwrap(), f);
        }
        let json = r#"{"family": "gaussian", "dim": 7, "bandwidth": 0.05}"#;
        let k: KernelSpec = serde_json::from_str(json).unwrap();
        assert_eq!(k, spec(KernelFamily::Gaussian, 7, 0.05));
        assert!(serde_json::from_str::<KernelSpec>(r#"{"family": "gaussian", "dim": 1, "bandwidth": -1}"#).is_err());
    }
}
