//! The five built-in experiments and the artifacts each one writes.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use phstab::builders::{torus_mesh, PointCloud, PointCloudJson, TorusSample};
use phstab::complex::Simplex;
use phstab::error::Result;
use phstab::kernels::{KernelFamily, KernelSpec};
use phstab::reduction::{persistence, EssentialMode};
use phstab::rng::{derived_seed, stream_rng};
use phstab::stabilize::{perturbed_input, sweep, write_sweep_csv, SmoothEstimate};
use phstab::summaries::{Computation, Functional, Region, SummarySpec};

use crate::grid::Grid;
use crate::svg::{heat_map, line_plot, sweep_plot, Series};
use crate::CliError;

pub const NAMES: [&str; 5] = ["line1", "line2", "curve", "torus", "denoise"];

/// Vertex values of the seven-vertex line graph.
pub const LINE1_INPUT: [f64; 7] = [10.0, 11.0, 12.5, 13.0, 9.9, 20.0, 1.0];

/// Vertex values of the five-vertex line graph with a flat minimum.
pub const LINE2_INPUT: [f64; 5] = [5.0, 1.1, 1.0, 1.05, 15.0];

/// The nine curve vertices, flattened as `x0, y0, x1, y1, ...`.
pub const CURVE_INPUT: [f64; 18] = [
    0.0, 0.1, 1.0, 1.0, 2.0, 0.12, 7.0, 5.0, 12.0, 0.0, 7.0, -5.0, 2.0, -0.12, 1.0, -1.0, 0.0, -0.1,
];

/// Keeps the sample stream clear of the trial streams `0..M`.
const SAMPLE_STREAM: u64 = u64::MAX;

/// The torus height function `sin u sin v`, damped by 0.9 on `{u < 0, v < 0}`.
pub fn torus_function(u: f64, v: f64) -> f64 {
    let damp = if u < 0.0 && v < 0.0 { 0.9 } else { 0.0 };
    u.sin() * v.sin() * (1.0 - damp)
}

/// `n` uniform points on `[-pi, pi)^2` with heights from [`torus_function`].
pub fn torus_sample(n: usize, seed: u64) -> Result<TorusSample> {
    let mut rng = stream_rng(seed, SAMPLE_STREAM);
    let uv: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.random_range(-PI..PI), rng.random_range(-PI..PI)])
        .collect();
    let z = uv.iter().map(|&[u, v]| torus_function(u, v)).collect();
    TorusSample::new(uv, z)
}

/// 150 points jittered off the unit circle plus three points near its centre.
pub fn noisy_circle(seed: u64) -> PointCloud {
    let mut rng = stream_rng(seed, SAMPLE_STREAM);
    let mut points = Vec::with_capacity(153);
    for i in 0..150 {
        let t = 2.0 * PI * i as f64 / 150.0;
        let r = 1.0 + rng.random_range(-0.05..0.05);
        points.push([r * t.cos(), r * t.sin()]);
    }
    for k in 0..3 {
        let t = 2.0 * PI * k as f64 / 3.0 + rng.random_range(-0.1..0.1);
        points.push([0.12 * t.cos(), 0.12 * t.sin()]);
    }
    PointCloud::from_points(&points).expect("finite points")
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSeries {
    pub id: String,
    pub rows: Vec<SmoothEstimate>,
}

impl SweepSeries {
    pub fn csv(&self) -> String {
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &self.id, &self.rows).expect("writing to memory");
        String::from_utf8(buf).expect("ascii table")
    }
}

fn gaussian_sweeps(
    input: &[f64],
    summaries: Vec<SummarySpec>,
    alphas: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<SweepSeries>> {
    summaries
        .iter()
        .enumerate()
        .map(|(j, s)| {
            Ok(SweepSeries {
                id: s.id(),
                rows: sweep(s, input, KernelFamily::Gaussian, alphas, trials, derived_seed(seed, j as u64))?,
            })
        })
        .collect()
}

/// Row-wise sum of independent series; standard errors add in quadrature.
pub fn sum_series(series: &[SweepSeries], seed: u64) -> SweepSeries {
    let rows = (0..series[0].rows.len())
        .map(|k| {
            let mean = series.iter().map(|s| s.rows[k].mean).sum();
            let var: f64 = series.iter().map(|s| s.rows[k].stderr.powi(2)).sum();
            SmoothEstimate {
                mean,
                stderr: var.sqrt(),
                trials: series[0].rows[k].trials,
                seed,
                bandwidth: series[0].rows[k].bandwidth,
            }
        })
        .collect();
    SweepSeries {
        id: "sum".into(),
        rows,
    }
}

/// Vertex-persistence sweeps on a line graph, one independent series per
/// vertex followed by their sum.
pub fn line_sweeps(
    input: &[f64],
    vertices: &[u32],
    alphas: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<SweepSeries>> {
    let summaries = vertices
        .iter()
        .map(|&v| {
            SummarySpec::new(
                Computation::line_graph(input.len())?,
                Functional::Vertex(v),
                0,
                EssentialMode::Extended,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mut series = gaussian_sweeps(input, summaries, alphas, trials, seed)?;
    let sum = sum_series(&series, seed);
    series.push(sum);
    Ok(series)
}

/// Degree-1 persistence sweeps of the two curve loops.
pub fn curve_sweeps(alphas: &[f64], trials: usize, seed: u64) -> Result<Vec<SweepSeries>> {
    let summaries = [Simplex::edge(0, 8), Simplex::edge(2, 6)]
        .into_iter()
        .map(|s| {
            SummarySpec::new(
                Computation::Curve { vertices: 9 },
                Functional::Simplex(s),
                1,
                EssentialMode::Extended,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    gaussian_sweeps(&CURVE_INPUT, summaries, alphas, trials, seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bar {
    pub birth: f64,
    pub death: f64,
    /// `(u, v)` of the creating vertex.
    pub creator: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TorusTrial {
    pub trial: usize,
    pub h: f64,
    pub running_mean: f64,
    /// The longest degree-0 bar of the perturbed surface, if it was meshed.
    pub bar: Option<Bar>,
}

#[derive(Clone, Debug)]
pub struct TorusRun {
    pub sample: TorusSample,
    pub trials: Vec<TorusTrial>,
}

impl TorusRun {
    pub fn mean(&self) -> f64 {
        self.trials.last().map_or(0.0, |t| t.running_mean)
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("trial,h,running_mean,birth,death,creator_u,creator_v\n");
        let f = |x: f64| format!("{x:.16e}");
        for t in &self.trials {
            let bar = t.bar.map_or_else(
                || "null,null,null,null".to_string(),
                |b| format!("{},{},{},{}", f(b.birth), f(b.death), f(b.creator[0]), f(b.creator[1])),
            );
            let _ = writeln!(out, "{},{},{},{}", t.trial, f(t.h), f(t.running_mean), bar);
        }
        out
    }
}

fn torus_trial(sample: &[f64], kernel: &KernelSpec, functional: &Functional, seed: u64, trial: usize) -> (f64, Option<Bar>) {
    let x = perturbed_input(sample, kernel, seed, trial as u64);
    let Ok(perturbed) = TorusSample::from_flat(&x) else {
        return (0.0, None);
    };
    let diagram = match torus_mesh(&perturbed).and_then(|c| persistence(&c, 0, EssentialMode::Extended, false)) {
        Ok(d) => d,
        Err(_) => return (0.0, None),
    };
    let position = |v: u32| perturbed.uv().get(v as usize).copied();
    let h = functional.apply(&diagram, position);
    let bar = diagram
        .iter()
        .filter(|p| p.death.is_finite())
        .max_by(|a, b| {
            a.persistence()
                .total_cmp(&b.persistence())
                .then_with(|| b.birth.total_cmp(&a.birth))
                .then_with(|| b.creator.cmp(&a.creator))
        })
        .and_then(|p| {
            Some(Bar {
                birth: p.birth,
                death: p.death,
                creator: position(p.creator.vertices()[0])?,
            })
        });
    (h, bar)
}

/// `trials` perturbations of an `n`-point torus sample by a Gaussian of
/// standard deviation `bandwidth` in all `3n` coordinates.
pub fn torus_run(n: usize, trials: usize, bandwidth: f64, seed: u64) -> Result<TorusRun> {
    if trials == 0 {
        return Err(phstab::error::Error::Domain("at least one trial is required".into()));
    }
    let sample = torus_sample(n, seed)?;
    let flat = sample.to_flat();
    let kernel = KernelSpec::new(KernelFamily::Gaussian, flat.len(), bandwidth)?;
    let functional = Functional::RegionLongestBar(Region::SECOND_QUADRANT);
    let outcomes: Vec<(f64, Option<Bar>)> = (0..trials)
        .into_par_iter()
        .map(|i| torus_trial(&flat, &kernel, &functional, seed, i))
        .collect();
    let mut sum = 0.0;
    let trials = outcomes
        .into_iter()
        .enumerate()
        .map(|(i, (h, bar))| {
            sum += h;
            TorusTrial {
                trial: i,
                h,
                running_mean: sum / (i + 1) as f64,
                bar,
            }
        })
        .collect();
    Ok(TorusRun { sample, trials })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DenoiseCell {
    pub delta: f64,
    pub epsilon: f64,
    /// Max persistence at exactly `(delta, epsilon)`.
    pub raw: f64,
    pub estimate: SmoothEstimate,
}

pub const DENOISE_HEADER: &str = "delta,epsilon,raw,mean,stderr,trials,seed";

pub fn denoise_csv(cells: &[DenoiseCell]) -> String {
    let f = |x: f64| if x.is_finite() { format!("{x:.16e}") } else { "null".into() };
    let mut out = format!("{DENOISE_HEADER}\n");
    for c in cells {
        let e = &c.estimate;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            f(c.delta),
            f(c.epsilon),
            f(c.raw),
            f(e.mean),
            f(e.stderr),
            e.trials,
            e.seed
        );
    }
    out
}

/// Degree-1 max persistence of the Rips complex of the density-thresholded
/// cloud.
pub fn denoise_summary(cloud: PointCloud, max_scale: f64) -> Result<SummarySpec> {
    SummarySpec::new(
        Computation::density_threshold_rips(cloud, max_scale, true),
        Functional::MaxPersistence,
        1,
        EssentialMode::Extended,
    )
}

/// Raw and smoothed values over the `(delta, epsilon)` grid, row-major in
/// `delta`. Cell `k` uses seed `derived_seed(seed, k)`.
pub fn denoise_run(
    summary: &SummarySpec,
    deltas: &[f64],
    epsilons: &[f64],
    bandwidth: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<DenoiseCell>> {
    let kernel = KernelSpec::new(KernelFamily::Gaussian, 2, bandwidth)?;
    let mut cells = Vec::with_capacity(deltas.len() * epsilons.len());
    for &delta in deltas {
        for &epsilon in epsilons {
            let k = cells.len() as u64;
            let a = [delta, epsilon];
            cells.push(DenoiseCell {
                delta,
                epsilon,
                raw: summary.eval(&a)?,
                estimate: phstab::stabilize::smooth(summary, &a, &kernel, trials, derived_seed(seed, k))?,
            });
        }
    }
    Ok(cells)
}

/// Settings shared by every experiment; unset values take the experiment's
/// defaults.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Settings {
    pub trials: Option<usize>,
    pub seed: u64,
    pub alphas: Option<Grid>,
    pub bandwidth: Option<f64>,
    pub n: Option<usize>,
    pub deltas: Option<Grid>,
    pub epsilons: Option<Grid>,
    pub max_scale: Option<f64>,
}

/// One output file.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    fn new(name: &str, contents: String) -> Self {
        Artifact {
            name: name.into(),
            contents,
        }
    }
}

/// Everything an experiment writes, manifest last.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// One line for the terminal.
    pub summary: String,
}

fn sweep_grid(settings: &Settings, default: Grid) -> Grid {
    match (settings.alphas, settings.bandwidth) {
        (Some(g), _) => g,
        (None, Some(a)) => Grid::single(a),
        (None, None) => default,
    }
}

fn positive_trials(trials: usize) -> std::result::Result<usize, CliError> {
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    Ok(trials)
}

fn pretty(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn manifest(name: &str, settings: &Settings, config: serde_json::Value, artifacts: &[Artifact]) -> Artifact {
    let files: Vec<&str> = artifacts.iter().map(|a| a.name.as_str()).collect();
    Artifact::new(
        "manifest.json",
        pretty(&json!({
            "experiment": name,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": settings.seed,
            "settings": settings,
            "config": config,
            "files": files,
        })),
    )
}

fn sweep_outcome(
    name: &str,
    title: &str,
    settings: &Settings,
    input: &[f64],
    grid: Grid,
    trials: usize,
    series: Vec<SweepSeries>,
) -> Outcome {
    let mut artifacts = vec![Artifact::new("input.json", pretty(&input))];
    let mut tables = Vec::new();
    for s in &series {
        let csv = s.csv();
        tables.push(csv.clone());
        artifacts.push(Artifact::new(&format!("{}.csv", s.id.replace([':', ','], "-")), csv));
    }
    let refs: Vec<&str> = tables.iter().map(String::as_str).collect();
    artifacts.push(Artifact::new("sweep.svg", sweep_plot(title, &refs).expect("freshly written tables")));
    let config = json!({
        "kernel": "gaussian",
        "alphas": grid,
        "trials": trials,
        "summaries": series.iter().map(|s| s.id.clone()).collect::<Vec<_>>(),
    });
    artifacts.push(manifest(name, settings, config, &artifacts));
    let last = series
        .iter()
        .map(|s| {
            let r = s.rows.last().expect("non-empty grid");
            format!("{} = {:.4} ± {:.4}", s.id, r.mean, r.stderr)
        })
        .collect::<Vec<_>>()
        .join(", ");
    Outcome {
        artifacts,
        summary: format!("{name}: at alpha = {}: {last}", grid.stop),
    }
}

pub fn run(name: &str, settings: &Settings) -> std::result::Result<Outcome, CliError> {
    match name {
        "line1" | "line2" => {
            let (input, vertices, title): (&[f64], &[u32], _) = if name == "line1" {
                (&LINE1_INPUT, &[4, 0], "Seven-vertex line graph")
            } else {
                (&LINE2_INPUT, &[1, 2, 3], "Line graph with a flat minimum")
            };
            let grid = sweep_grid(settings, Grid::new(0.001, 0.1, 100).expect("valid grid"));
            let trials = positive_trials(settings.trials.unwrap_or(1000))?;
            let series = line_sweeps(input, vertices, &grid.values(), trials, settings.seed)?;
            Ok(sweep_outcome(name, title, settings, input, grid, trials, series))
        }
        "curve" => {
            let grid = sweep_grid(settings, Grid::new(0.0001, 0.01, 100).expect("valid grid"));
            let trials = positive_trials(settings.trials.unwrap_or(1000))?;
            let series = curve_sweeps(&grid.values(), trials, settings.seed)?;
            Ok(sweep_outcome(name, "Distance to a curve", settings, &CURVE_INPUT, grid, trials, series))
        }
        "torus" => {
            let n = settings.n.unwrap_or(1000);
            let trials = positive_trials(settings.trials.unwrap_or(100))?;
            let bandwidth = settings.bandwidth.unwrap_or(0.2);
            let run = torus_run(n, trials, bandwidth, settings.seed)?;
            let csv = run.csv();
            let series = [
                Series {
                    label: "h".into(),
                    points: run.trials.iter().map(|t| (t.trial as f64, t.h, f64::NAN)).collect(),
                },
                Series {
                    label: "running mean".into(),
                    points: run.trials.iter().map(|t| (t.trial as f64, t.running_mean, f64::NAN)).collect(),
                },
            ];
            let mut artifacts = vec![
                Artifact::new("sample.json", pretty(&run.sample.to_json())),
                Artifact::new("trials.csv", csv),
                Artifact::new(
                    "running_mean.svg",
                    line_plot("Second-quadrant longest bar", "trial", "value", &series),
                ),
            ];
            let zero = run.trials.iter().filter(|t| t.h == 0.0).count();
            let config = json!({ "n": n, "trials": trials, "kernel": "gaussian", "bandwidth": bandwidth });
            artifacts.push(manifest(name, settings, config, &artifacts));
            Ok(Outcome {
                artifacts,
                summary: format!(
                    "torus: mean {:.4} over {trials} trials, {zero} with h = 0",
                    run.mean()
                ),
            })
        }
        "denoise" => {
            let trials = positive_trials(settings.trials.unwrap_or(100))?;
            let bandwidth = settings.bandwidth.unwrap_or(0.005);
            let max_scale = settings.max_scale.unwrap_or(1.9);
            let deltas = settings.deltas.unwrap_or(Grid::new(0.1, 0.3, 5).expect("valid grid"));
            let epsilons = settings.epsilons.unwrap_or(Grid::new(0.005, 0.025, 5).expect("valid grid"));
            let cloud = noisy_circle(settings.seed);
            let summary = denoise_summary(cloud.clone(), max_scale)?;
            let cells = denoise_run(&summary, &deltas.values(), &epsilons.values(), bandwidth, trials, settings.seed)?;
            let raw_cells: Vec<_> = cells.iter().map(|c| (c.delta, c.epsilon, c.raw)).collect();
            let smooth_cells: Vec<_> = cells.iter().map(|c| (c.delta, c.epsilon, c.estimate.mean)).collect();
            let mut artifacts = vec![
                Artifact::new("cloud.json", pretty(&PointCloudJson::from(cloud.clone()))),
                Artifact::new("grid.csv", denoise_csv(&cells)),
                Artifact::new("raw.svg", heat_map("Max persistence after thresholding", "delta", "epsilon", &raw_cells)),
                Artifact::new("smoothed.svg", heat_map("Smoothed max persistence", "delta", "epsilon", &smooth_cells)),
            ];
            let unthresholded = summary.eval(&[0.0, 0.0])?;
            let best = cells.iter().map(|c| c.estimate.mean).fold(0.0, f64::max);
            let config = json!({
                "points": cloud.len(),
                "max_scale": max_scale,
                "deltas": deltas,
                "epsilons": epsilons,
                "kernel": "gaussian",
                "bandwidth": bandwidth,
                "trials": trials,
            });
            artifacts.push(manifest(name, settings, config, &artifacts));
            Ok(Outcome {
                artifacts,
                summary: format!(
                    "denoise: unthresholded {unthresholded:.4}, best smoothed {best:.4} over {} cells",
                    cells.len()
                ),
            })
        }
        other => Err(CliError::Usage(format!(
            "unknown experiment {other:?}; valid names: {}",
            NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_function_values() {
        assert!((torus_function(PI / 2.0, PI / 2.0) - 1.0).abs() < 1e-15);
        assert!((torus_function(-PI / 2.0, PI / 2.0) + 1.0).abs() < 1e-15);
        assert!((torus_function(-PI / 2.0, -PI / 2.0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn samples_are_seeded() {
        assert_eq!(torus_sample(50, 1).unwrap().to_flat(), torus_sample(50, 1).unwrap().to_flat());
        assert_ne!(torus_sample(50, 1).unwrap().to_flat(), torus_sample(50, 2).unwrap().to_flat());
        assert_eq!(noisy_circle(4).coords(), noisy_circle(4).coords());
        assert_eq!(noisy_circle(4).len(), 153);
    }

    #[test]
    fn sum_of_series() {
        let row = |mean, stderr| SmoothEstimate {
            mean,
            stderr,
            trials: 10,
            seed: 1,
            bandwidth: 0.1,
        };
        let a = SweepSeries {
            id: "a".into(),
            rows: vec![row(1.0, 0.3)],
        };
        let b = SweepSeries {
            id: "b".into(),
            rows: vec![row(2.0, 0.4)],
        };
        let s = sum_series(&[a, b], 5);
        assert_eq!(s.rows[0].mean, 3.0);
        assert!((s.rows[0].stderr - 0.5).abs() < 1e-15);
        assert_eq!(s.rows[0].seed, 5);
    }

    #[test]
    fn unknown_name_lists_choices() {
        let err = run("circle", &Settings::default()).unwrap_err();
        assert!(err.to_string().contains("line1, line2, curve, torus, denoise"));
    }

    #[test]
    fn line_experiment_artifacts() {
        let settings = Settings {
            trials: Some(20),
            seed: 7,
            alphas: Some("0.01:0.05:3".parse().unwrap()),
            ..Settings::default()
        };
        let out = run("line1", &settings).unwrap();
        let names: Vec<&str> = out.artifacts.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(
            names,
            ["input.json", "vertex-4.csv", "vertex-0.csv", "sum.csv", "sweep.svg", "manifest.json"]
        );
        assert_eq!(out.artifacts[1].contents.lines().count(), 4);
        let again = run("line1", &settings).unwrap();
        assert_eq!(out.artifacts, again.artifacts);
    }
}
