//! Monte-Carlo estimation of smoothed summaries `g = h * K`.
//!
//! `g(a)` is estimated by the mean of `h(a - e_i)` over draws `e_i ~ K`.
//! Draw `i` always comes from stream `i` of the seed's generator and the
//! mean is summed in trial order, so estimates are bit-identical for any
//! number of worker threads.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelSpec, LipschitzBound};
use crate::rng::{derived_seed, stream_rng};
use crate::summaries::Summary;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials)`; `+inf` (serialized
    /// as `null`) for a single trial.
    #[serde(with = "infinite_as_null")]
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
    pub bandwidth: f64,
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl SmoothEstimate {
    pub fn from_values(values: &[f64], seed: u64, bandwidth: f64) -> Self {
        let m = values.len();
        let mut sum = 0.0;
        for &x in values {
            sum += x;
        }
        let mean = sum / m as f64;
        let stderr = if m > 1 {
            let mut ss = 0.0;
            for &x in values {
                ss += (x - mean) * (x - mean);
            }
            (ss / (m - 1) as f64 / m as f64).sqrt()
        } else {
            f64::INFINITY
        };
        SmoothEstimate {
            mean,
            stderr,
            trials: m,
            seed,
            bandwidth,
        }
    }
}

/// `a - e` for the draw `e` of trial `trial`.
pub fn perturbed_input(a: &[f64], kernel: &KernelSpec, seed: u64, trial: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, trial);
    let mut x = kernel.sample(&mut rng);
    for (xi, ai) in x.iter_mut().zip(a) {
        *xi = ai - *xi;
    }
    x
}

fn check_inputs<S: Summary + ?Sized>(summary: &S, a: &[f64], kernel: &KernelSpec, trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    if a.len() != summary.arity() {
        return Err(Error::Arity {
            expected: summary.arity(),
            got: a.len(),
        });
    }
    if kernel.dim() != a.len() {
        return Err(Error::Arity {
            expected: a.len(),
            got: kernel.dim(),
        });
    }
    Ok(())
}

/// The per-trial values `h(a - e_i)`, in trial order.
pub fn trial_values<S: Summary + ?Sized>(
    summary: &S,
    a: &[f64],
    kernel: &KernelSpec,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_inputs(summary, a, kernel, trials)?;
    (0..trials as u64)
        .into_par_iter()
        .map(|i| summary.evaluate(&perturbed_input(a, kernel, seed, i)))
        .collect()
}

pub fn smooth<S: Summary + ?Sized>(
    summary: &S,
    a: &[f64],
    kernel: &KernelSpec,
    trials: usize,
    seed: u64,
) -> Result<SmoothEstimate> {
    let values = trial_values(summary, a, kernel, trials, seed)?;
    Ok(SmoothEstimate::from_values(&values, seed, kernel.bandwidth()))
}

/// One estimate per bandwidth; row `k` uses seed `derived_seed(seed, k)`.
pub fn sweep<S: Summary + ?Sized>(
    summary: &S,
    a: &[f64],
    family: KernelFamily,
    alphas: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<SmoothEstimate>> {
    if alphas.is_empty() {
        return Err(Error::EmptyInput("bandwidth list"));
    }
    alphas
        .iter()
        .enumerate()
        .map(|(k, &alpha)| {
            let kernel = KernelSpec::new(family, a.len(), alpha)?;
            smooth(summary, a, &kernel, trials, derived_seed(seed, k as u64))
        })
        .collect()
}

/// Runs `f` on a pool of `threads` workers, or on the global pool when
/// `threads` is `None`.
pub fn with_threads<R: Send, F: FnOnce() -> R + Send>(threads: Option<usize>, f: F) -> Result<R> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Domain(format!("cannot start {n} worker threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Smallest bandwidth for which `h * K` is `target_lipschitz`-Lipschitz
/// given `|h| <= sup_bound`, and at least `noise_level`.
pub fn min_bandwidth(
    family: KernelFamily,
    dim: usize,
    sup_bound: f64,
    target_lipschitz: f64,
    noise_level: f64,
) -> Result<f64> {
    if target_lipschitz == 0.0 {
        return Err(Error::UnboundedBandwidth);
    }
    for (name, x) in [
        ("bound", sup_bound),
        ("Lipschitz target", target_lipschitz),
        ("noise level", noise_level),
    ] {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("{name} must be non-negative, got {x}")));
        }
    }
    // Each family's constant has the form c / alpha.
    let c = match family {
        KernelFamily::Triangular => LipschitzBound::Triangular {
            sup_bound,
            bandwidth: 1.0,
            dim,
        },
        KernelFamily::Epanechnikov => LipschitzBound::Epanechnikov {
            sup_bound,
            bandwidth: 1.0,
            dim,
        },
        KernelFamily::Gaussian => LipschitzBound::Gaussian {
            sup_bound,
            bandwidth: 1.0,
        },
    }
    .constant()?;
    let alpha = (c / target_lipschitz).max(noise_level);
    if alpha <= 0.0 {
        return Err(Error::Domain("the requirements allow any positive bandwidth".into()));
    }
    Ok(alpha)
}

pub const SWEEP_HEADER: &str = "alpha,summary_id,mean,stderr,trials,seed";

fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

/// Writes sweep rows with 17 significant digits. An infinite standard
/// error is written as `null`.
pub fn write_sweep_csv<W: Write>(mut w: W, summary_id: &str, rows: &[SmoothEstimate]) -> Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            float(row.bandwidth),
            summary_id,
            float(row.mean),
            float(row.stderr),
            row.trials,
            row.seed
        )?;
    }
    Ok(())
}

/// Reads rows written by [`write_sweep_csv`], returning the summary id of
/// each row alongside it.
pub fn read_sweep_csv(text: &str) -> Result<Vec<(String, SmoothEstimate)>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(SWEEP_HEADER) {
        return Err(Error::Domain("missing sweep header".into()));
    }
    let parse = |s: &str| -> Result<f64> {
        if s == "null" {
            return Ok(f64::INFINITY);
        }
        s.parse()
            .map_err(|_| Error::Domain(format!("bad number {s:?} in sweep table")))
    };
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            let [alpha, id, mean, stderr, trials, seed] = fields[..] else {
                return Err(Error::Domain(format!("bad sweep row {line:?}")));
            };
            let bad = |_| Error::Domain(format!("bad sweep row {line:?}"));
            Ok((
                id.to_string(),
                SmoothEstimate {
                    mean: parse(mean)?,
                    stderr: parse(stderr)?,
                    trials: trials.parse().map_err(bad)?,
                    seed: seed.parse().map_err(bad)?,
                    bandwidth: parse(alpha)?,
                },
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelFamily::*;

    struct Constant(f64, usize);

    impl Summary for Constant {
        fn arity(&self) -> usize {
            self.1
        }

        fn evaluate(&self, _: &[f64]) -> Result<f64> {
            Ok(self.0)
        }
    }

    #[test]
    fn constant_summary() {
        let k = KernelSpec::new(Gaussian, 2, 0.3).unwrap();
        let est = smooth(&Constant(2.5, 2), &[0.0, 1.0], &k, 50, 9).unwrap();
        assert_eq!(est.mean, 2.5);
        assert_eq!(est.stderr, 0.0);
        assert_eq!(est.trials, 50);
    }

    #[test]
    fn single_trial_has_no_error_estimate() {
        let k = KernelSpec::new(Gaussian, 1, 0.3).unwrap();
        let est = smooth(&Constant(1.0, 1), &[0.0], &k, 1, 0).unwrap();
        assert_eq!(est.stderr, f64::INFINITY);
        let json = serde_json::to_string(&est).unwrap();
        assert!(json.contains("\"stderr\":null"));
    }

    #[test]
    fn rejects_bad_inputs() {
        let k = KernelSpec::new(Gaussian, 1, 0.3).unwrap();
        assert!(smooth(&Constant(1.0, 1), &[0.0], &k, 0, 0).is_err());
        assert!(matches!(
            smooth(&Constant(1.0, 2), &[0.0], &k, 5, 0),
            Err(Error::Arity { .. })
        ));
        assert!(sweep(&Constant(1.0, 1), &[0.0], Gaussian, &[], 5, 0).is_err());
    }

    #[test]
    fn min_bandwidth_examples() {
        let g = min_bandwidth(Gaussian, 1, 1.0, 1.0, 0.0).unwrap();
        assert!((g - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
        assert_eq!(min_bandwidth(Triangular, 1, 1.0, 1.0, 0.0).unwrap(), 4.0);
        assert_eq!(min_bandwidth(Gaussian, 1, 1.0, 1.0, 2.0).unwrap(), 2.0);
        assert!(matches!(
            min_bandwidth(Gaussian, 1, 1.0, 0.0, 2.0),
            Err(Error::UnboundedBandwidth)
        ));
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            SmoothEstimate {
                mean: 0.1 + 0.2,
                stderr: 1e-3 / 3.0,
                trials: 10,
                seed: u64::MAX,
                bandwidth: 0.001,
            },
            SmoothEstimate {
                mean: 1.0,
                stderr: f64::INFINITY,
                trials: 1,
                seed: 0,
                bandwidth: 0.1,
            },
        ];
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, "vertex:4", &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(SWEEP_HEADER));
        assert!(text.contains(",null,1,0"));
        let back = read_sweep_csv(&text).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].0, "vertex:4");
        assert_eq!(back[0].1, rows[0]);
        assert_eq!(back[1].1, rows[1]);
    }
}
