//! Batch experiments: parameter sweeps, peak scaling, few-level truncation
//! and the Landau-Zener classifier. Jobs are described by JSON documents and
//! produce CSV or JSON output.
//!
//! Grid points run on a bounded worker pool. Each point is evaluated
//! single-threaded and rows are emitted in grid order, so output bytes do not
//! depend on the worker count.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::{self, GibbsEnsemble, PURIFICATION_CAP, PURIFIED_REDUCED_CAP};
use crate::landau_zener::{self, sampled_extrema, ExtremumKind, LzReport};
use crate::linalg::SpectralDecomposition;
use crate::spin::{ModelDocument, ModelFamily, SpinChainModel, SubsystemSpec, MAX_SITES};
use crate::susceptibility::{self, LqtsResult, Method, LQTS_RESOLUTION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

/// Process exit code for an error that aborted a job.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ResourceCap(_) | Error::PurificationCap { .. } | Error::DimensionTooLarge { .. } => {
            EXIT_RESOURCE
        }
        _ => EXIT_CONFIG,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// `count` points from `min` to `max`, both included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn linear(min: f64, max: f64, count: usize) -> Self {
        Self {
            min,
            max,
            count,
            spacing: Spacing::Linear,
        }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        if self.count < 2 {
            return Err(Error::Config(format!(
                "grid needs at least 2 points, got {}",
                self.count
            )));
        }
        if !self.min.is_finite() || !self.max.is_finite() || !(self.max > self.min) {
            return Err(Error::Config(format!(
                "grid bounds {}..{}",
                self.min, self.max
            )));
        }
        let last = (self.count - 1) as f64;
        match self.spacing {
            Spacing::Linear => Ok((0..self.count)
                .map(|i| {
                    if i + 1 == self.count {
                        self.max
                    } else {
                        self.min + (self.max - self.min) * i as f64 / last
                    }
                })
                .collect()),
            Spacing::Log => {
                if !(self.min > 0.0) {
                    return Err(Error::Config("log grid needs a positive minimum".into()));
                }
                let (a, b) = (self.min.ln(), self.max.ln());
                Ok((0..self.count)
                    .map(|i| {
                        if i == 0 {
                            self.min
                        } else if i + 1 == self.count {
                            self.max
                        } else {
                            (a + (b - a) * i as f64 / last).exp()
                        }
                    })
                    .collect())
            }
        }
    }

    /// Parses `min:max:count` with an optional `:log` or `:linear` suffix.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || Error::Config(format!("grid {text:?} is not min:max:count[:log]"));
        if parts.len() != 3 && parts.len() != 4 {
            return Err(bad());
        }
        let min = parts[0].trim().parse().map_err(|_| bad())?;
        let max = parts[1].trim().parse().map_err(|_| bad())?;
        let count = parts[2].trim().parse().map_err(|_| bad())?;
        let spacing = match parts.get(3).map(|s| s.trim()) {
            None | Some("linear") => Spacing::Linear,
            Some("log") => Spacing::Log,
            Some(_) => return Err(bad()),
        };
        Ok(Self {
            min,
            max,
            count,
            spacing,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "h")]
    H,
    #[serde(rename = "delta")]
    Delta,
    #[serde(rename = "beta")]
    Beta,
    #[serde(rename = "n_A")]
    WindowSize,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::H => "h",
            SweepParam::Delta => "delta",
            SweepParam::Beta => "beta",
            SweepParam::WindowSize => "n_A",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub grid: GridSpec,
}

/// Command-line overrides shared by all jobs.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub sites: Option<usize>,
    pub beta: Option<f64>,
    pub grid: Option<GridSpec>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub methods: Option<Vec<Method>>,
}

fn default_workers() -> usize {
    1
}

fn default_methods() -> Vec<Method> {
    vec![Method::Schmidt]
}

fn check_sites(sites: usize) -> Result<()> {
    if sites > MAX_SITES {
        return Err(Error::ResourceCap(format!(
            "L = {sites} needs a {}-dimensional Hilbert space; at most L = {MAX_SITES} is supported",
            1u64 << sites.min(63)
        )));
    }
    Ok(())
}

fn build_model(doc: &ModelDocument) -> Result<SpinChainModel> {
    check_sites(doc.sites)?;
    SpinChainModel::try_from(doc.clone())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Config(format!(
            "beta must be positive and finite, got {beta}"
        )));
    }
    Ok(())
}

fn check_workers(workers: usize) -> Result<()> {
    if workers == 0 {
        return Err(Error::Config("workers must be >= 1".into()));
    }
    Ok(())
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::ResourceCap(e.to_string()))
}

/// A sweep of one parameter over a grid, evaluating the LQTS of several
/// windows with several methods at every point.
///
/// ```json
/// {"model": {"family": "ising", "L": 8},
///  "beta": 9.0,
///  "sweep": {"param": "h", "grid": {"min": 0, "max": 2, "count": 41}},
///  "subsystems": [1, 2, 4, 8],
///  "methods": ["schmidt"],
///  "workers": 4}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepJob {
    pub model: ModelDocument,
    pub beta: f64,
    pub sweep: SweepSpec,
    /// Window sizes `n_A`; all windows start at `window_start`. Defaults to
    /// every size from 1 to `L`.
    #[serde(default)]
    pub subsystems: Vec<usize>,
    #[serde(default)]
    pub window_start: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl SweepJob {
    pub fn from_json(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(l) = o.sites {
            self.model.sites = l;
        }
        if let Some(b) = o.beta {
            self.beta = b;
        }
        if let Some(g) = o.grid {
            self.sweep.grid = g;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        if let Some(w) = o.workers {
            self.workers = w;
        }
        if let Some(m) = &o.methods {
            self.methods = m.clone();
        }
    }

    fn window_sizes(&self, sites: usize) -> Vec<usize> {
        if self.subsystems.is_empty() {
            (1..=sites).collect()
        } else {
            self.subsystems.clone()
        }
    }

    /// Checks the job before any work is done.
    pub fn validate(&self) -> Result<SpinChainModel> {
        let model = build_model(&self.model)?;
        let l = model.sites();
        check_beta(self.beta)?;
        check_workers(self.workers)?;
        if self.methods.is_empty() {
            return Err(Error::Config("no methods requested".into()));
        }
        let grid = self.sweep.grid.points()?;
        let family_param = model.family().parameter().0;
        let sizes: Vec<usize> = match self.sweep.param {
            SweepParam::H | SweepParam::Delta => {
                if self.sweep.param.name() != family_param {
                    return Err(Error::Config(format!(
                        "{} models cannot sweep `{}`",
                        model.family().name(),
                        self.sweep.param
                    )));
                }
                for &p in &grid {
                    model.with_family(model.family().with_parameter(p))?;
                }
                self.window_sizes(l)
            }
            SweepParam::Beta => {
                for &b in &grid {
                    check_beta(b)?;
                }
                self.window_sizes(l)
            }
            SweepParam::WindowSize => grid
                .iter()
                .map(|&v| window_size(v))
                .collect::<Result<_>>()?,
        };
        for &n in &sizes {
            SubsystemSpec::new(l, self.window_start, n)
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.methods.contains(&Method::EigenDifference) {
            let dim = model.dim();
            if dim * dim > PURIFICATION_CAP {
                return Err(Error::ResourceCap(format!(
                    "eigendiff needs a purification of dimension {} above the cap {PURIFICATION_CAP}",
                    dim * dim
                )));
            }
            let worst = sizes.iter().map(|&n| dim << (l - n)).max().unwrap_or(0);
            if worst > PURIFIED_REDUCED_CAP {
                return Err(Error::ResourceCap(format!(
                    "eigendiff needs a dense operator of dimension {worst}"
                )));
            }
        }
        Ok(model)
    }
}

fn window_size(v: f64) -> Result<usize> {
    let n = v.round();
    if (v - n).abs() > 1e-9 || n < 1.0 {
        return Err(Error::Config(format!(
            "n_A grid value {v} is not a positive integer"
        )));
    }
    Ok(n as usize)
}

/// Numbers reported by one row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowValues {
    pub lqts_beta: f64,
    pub heat_capacity: f64,
    pub complement_qfi: f64,
    pub dropped_lambda_mass: f64,
}

impl From<&LqtsResult> for RowValues {
    fn from(r: &LqtsResult) -> Self {
        Self {
            lqts_beta: r.lqts_beta,
            heat_capacity: r.heat_capacity,
            complement_qfi: r.complement_qfi,
            dropped_lambda_mass: r.dropped_lambda_mass,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub family: &'static str,
    pub sites: usize,
    pub coupling: f64,
    pub param_name: &'static str,
    pub param_value: f64,
    pub beta: f64,
    pub n_a: usize,
    pub method: Method,
    pub outcome: std::result::Result<RowValues, String>,
}

pub const SWEEP_HEADER: [&str; 13] = [
    "family",
    "L",
    "J",
    "param_name",
    "param_value",
    "beta",
    "n_A",
    "method",
    "lqts_beta",
    "heat_capacity",
    "complement_qfi",
    "dropped_lambda_mass",
    "error",
];

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
}

impl SweepOutput {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }

    pub fn exit_code(&self) -> i32 {
        if self.failed_rows() > 0 {
            EXIT_PARTIAL
        } else {
            EXIT_OK
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SWEEP_HEADER).map_err(csv_error)?;
        for r in &self.rows {
            let mut rec = vec![
                r.family.to_string(),
                r.sites.to_string(),
                r.coupling.to_string(),
                r.param_name.to_string(),
                r.param_value.to_string(),
                r.beta.to_string(),
                r.n_a.to_string(),
                r.method.to_string(),
            ];
            match &r.outcome {
                Ok(v) => rec.extend([
                    v.lqts_beta.to_string(),
                    v.heat_capacity.to_string(),
                    v.complement_qfi.to_string(),
                    v.dropped_lambda_mass.to_string(),
                    String::new(),
                ]),
                Err(e) => {
                    rec.extend(std::iter::repeat_n(String::new(), 4));
                    rec.push(e.clone());
                }
            }
            w.write_record(&rec).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Evaluates one window with one method.
pub fn evaluate(ens: &GibbsEnsemble, sub: &SubsystemSpec, method: Method) -> Result<LqtsResult> {
    match method {
        Method::Schmidt => susceptibility::lqts(ens, sub),
        Method::EigenDifference => susceptibility::lqts_eigendiff(ens, sub),
        Method::Fidelity => {
            let steps = susceptibility::default_fidelity_steps(ens.beta());
            let value = susceptibility::lqts_fidelity_oracle(ens, sub, &steps)?;
            Ok(LqtsResult::from_value(
                value,
                ens.energy_variance(),
                Method::Fidelity,
            ))
        }
    }
}

struct PointSetup {
    ensemble: Result<GibbsEnsemble>,
    param_value: f64,
    beta: f64,
    sizes: Vec<usize>,
}

/// Runs a validated sweep. Failures at single points become error rows.
pub fn run_sweep(job: &SweepJob) -> Result<SweepOutput> {
    let model = job.validate()?;
    let grid = job.sweep.grid.points()?;
    let l = model.sites();
    let shared: Option<Arc<SpectralDecomposition>> = match job.sweep.param {
        SweepParam::Beta | SweepParam::WindowSize => Some(Arc::new(model.diagonalize()?)),
        _ => None,
    };
    let setup = |value: f64| -> PointSetup {
        let (spectrum, beta, sizes) = match job.sweep.param {
            SweepParam::H | SweepParam::Delta => (
                model
                    .with_family(model.family().with_parameter(value))
                    .and_then(|m| m.diagonalize())
                    .map(Arc::new),
                job.beta,
                job.window_sizes(l),
            ),
            SweepParam::Beta => (
                Ok(Arc::clone(shared.as_ref().unwrap())),
                value,
                job.window_sizes(l),
            ),
            SweepParam::WindowSize => (
                Ok(Arc::clone(shared.as_ref().unwrap())),
                job.beta,
                vec![window_size(value).unwrap_or(1)],
            ),
        };
        PointSetup {
            ensemble: spectrum.and_then(|s| gibbs::gibbs(s, beta)),
            param_value: value,
            beta,
            sizes,
        }
    };
    let evaluate_point = |value: f64| -> Vec<SweepRow> {
        let p = setup(value);
        let mut rows = Vec::new();
        for &n in &p.sizes {
            for &method in &job.methods {
                let outcome = p
                    .ensemble
                    .as_ref()
                    .map_err(Clone::clone)
                    .and_then(|ens| {
                        let sub = SubsystemSpec::new(l, job.window_start, n)?;
                        evaluate(ens, &sub, method)
                    })
                    .map(|r| RowValues::from(&r))
                    .map_err(|e| e.to_string());
                rows.push(SweepRow {
                    family: model.family().name(),
                    sites: l,
                    coupling: model.coupling(),
                    param_name: job.sweep.param.name(),
                    param_value: p.param_value,
                    beta: p.beta,
                    n_a: n,
                    method,
                    outcome,
                });
            }
        }
        rows
    };
    let per_point: Vec<Vec<SweepRow>> =
        pool(job.workers)?.install(|| grid.par_iter().map(|&v| evaluate_point(v)).collect());
    Ok(SweepOutput {
        rows: per_point.into_iter().flatten().collect(),
    })
}

/// Peak (or trough) scaling of the LQTS with window size at `beta = 3L/4`.
///
/// Each window's extremum is the most pronounced interior local extremum of
/// the requested kind on the grid, refined by a parabola through its
/// neighbours. Without one, the grid's global extremum is used and flagged
/// as lying on the boundary.
///
/// ```json
/// {"family": "ising", "sizes": [8, 10],
///  "grid": {"min": 0.2, "max": 1.6, "count": 41}}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingJob {
    pub family: String,
    pub sizes: Vec<usize>,
    #[serde(rename = "J", default = "one")]
    pub coupling: f64,
    /// Grid of `h` (Ising) or `delta` (XXZ).
    pub grid: GridSpec,
    /// `max` for Ising peaks and `min` for XXZ troughs unless given.
    #[serde(default)]
    pub extremum: Option<ExtremumKind>,
    /// Window sizes to locate. Defaults to `1..=L/2`.
    #[serde(default)]
    pub subsystems: Option<Vec<usize>>,
    /// Fixed `beta` instead of `3L/4`.
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

impl ScalingJob {
    pub fn from_json(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(l) = o.sites {
            self.sizes = vec![l];
        }
        if let Some(b) = o.beta {
            self.beta = Some(b);
        }
        if let Some(g) = o.grid {
            self.grid = g;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        if let Some(w) = o.workers {
            self.workers = w;
        }
    }

    fn family_at(&self, value: f64) -> Result<ModelFamily> {
        match self.family.to_ascii_lowercase().as_str() {
            "ising" => Ok(ModelFamily::Ising { h: value }),
            "xxz" => Ok(ModelFamily::Xxz { delta: value }),
            other => Err(Error::Config(format!("unknown family `{other}`"))),
        }
    }

    fn kind(&self) -> Result<ExtremumKind> {
        Ok(self.extremum.unwrap_or(match self.family_at(0.0)? {
            ModelFamily::Ising { .. } => ExtremumKind::Max,
            ModelFamily::Xxz { .. } => ExtremumKind::Min,
        }))
    }

    pub fn validate(&self) -> Result<()> {
        self.family_at(0.0)?;
        if self.sizes.is_empty() {
            return Err(Error::Config("no chain sizes given".into()));
        }
        for &l in &self.sizes {
            check_sites(l)?;
            SpinChainModel::with_options(self.family_at(0.0)?, l, self.coupling, true)?;
            for n in self.windows(l) {
                SubsystemSpec::new(l, 0, n).map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        if let Some(b) = self.beta {
            check_beta(b)?;
        }
        check_workers(self.workers)?;
        self.grid.points()?;
        Ok(())
    }

    fn windows(&self, sites: usize) -> Vec<usize> {
        match &self.subsystems {
            Some(list) => list.clone(),
            None => (1..=sites / 2).collect(),
        }
    }
}

/// Located extremum of the LQTS of one window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub n_a: usize,
    /// Parameter value at the extremum.
    pub location: f64,
    pub value: f64,
    /// The extremum sits on the edge of the grid.
    pub on_boundary: bool,
    /// Interior, with `2 n_A <= L` and a value above [`LQTS_RESOLUTION`].
    pub used_in_fit: bool,
}

/// Power-law fit `value ~ (n_A / L)^alpha`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    pub family: String,
    pub sites: usize,
    pub beta: f64,
    pub kind: ExtremumKind,
    pub points: Vec<ScalingPoint>,
    pub alpha: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    /// Window sizes entering the fit.
    pub window: Vec<usize>,
}

/// Least-squares line through `(x, y)`: slope, intercept and RMS residual.
pub fn fit_line(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - (slope * p.0 + intercept);
            r * r
        })
        .sum();
    (slope, intercept, (ss / n).sqrt())
}

/// Vertex of the parabola through three points.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<f64> {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let curvature = (d2 - d1) / (x[2] - x[0]);
    if curvature == 0.0 || !curvature.is_finite() {
        return None;
    }
    let v = 0.5 * (x[0] + x[1]) - d1 / (2.0 * curvature);
    (v > x[0] && v < x[2]).then_some(v)
}

fn lqts_at(
    family: ModelFamily,
    sites: usize,
    coupling: f64,
    beta: f64,
    windows: &[usize],
) -> Result<Vec<f64>> {
    let model = SpinChainModel::with_options(family, sites, coupling, true)?;
    let ens = gibbs::gibbs(Arc::new(model.diagonalize()?), beta)?;
    windows
        .iter()
        .map(|&n| Ok(susceptibility::lqts(&ens, &SubsystemSpec::leading(sites, n)?)?.lqts_beta))
        .collect()
}

/// Locates the extremum of every window's LQTS curve for each chain size
/// and fits the power law over windows with `n_A <= L/2`.
pub fn run_peak_scaling(job: &ScalingJob) -> Result<Vec<ScalingFit>> {
    job.validate()?;
    let kind = job.kind()?;
    let grid = job.grid.points()?;
    let workers = pool(job.workers)?;
    let mut fits = Vec::new();
    for &l in &job.sizes {
        let beta = job.beta.unwrap_or(0.75 * l as f64);
        let windows = job.windows(l);
        let curves: Vec<Vec<f64>> = workers.install(|| {
            grid.par_iter()
                .map(|&v| lqts_at(job.family_at(v)?, l, job.coupling, beta, &windows))
                .collect::<Result<_>>()
        })?;
        let located: Vec<(usize, Option<f64>)> = (0..windows.len())
            .map(|w| {
                let col: Vec<f64> = curves.iter().map(|c| c[w]).collect();
                let better = |a: f64, b: f64| match kind {
                    ExtremumKind::Max => a > b,
                    ExtremumKind::Min => a < b,
                };
                let pick = |it: &mut dyn Iterator<Item = usize>| {
                    it.reduce(|b, i| if better(col[i], col[b]) { i } else { b })
                };
                let interior = pick(
                    &mut sampled_extrema(&col)
                        .into_iter()
                        .filter(|e| e.1 == kind)
                        .map(|e| e.0),
                );
                let best = interior.unwrap_or_else(|| pick(&mut (0..col.len())).unwrap_or(0));
                let vertex = if best == 0 || best + 1 == col.len() {
                    None
                } else {
                    parabola_vertex(
                        [grid[best - 1], grid[best], grid[best + 1]],
                        [col[best - 1], col[best], col[best + 1]],
                    )
                };
                (best, vertex)
            })
            .collect();
        let refined: Vec<Option<f64>> = workers.install(|| {
            located
                .par_iter()
                .enumerate()
                .map(|(w, &(_, vertex))| match vertex {
                    Some(v) => lqts_at(job.family_at(v)?, l, job.coupling, beta, &windows[w..=w])
                        .map(|r| Some(r[0])),
                    None => Ok(None),
                })
                .collect::<Result<_>>()
        })?;
        let mut points = Vec::new();
        for (w, &n) in windows.iter().enumerate() {
            let (best, vertex) = located[w];
            let grid_value = curves[best][w];
            let on_boundary = best == 0 || best + 1 == grid.len();
            let (location, value) = match (vertex, refined[w]) {
                (Some(x), Some(y))
                    if match kind {
                        ExtremumKind::Max => y >= grid_value,
                        ExtremumKind::Min => y <= grid_value,
                    } =>
                {
                    (x, y)
                }
                _ => (grid[best], grid_value),
            };
            let used_in_fit = !on_boundary && 2 * n <= l && value > LQTS_RESOLUTION;
            points.push(ScalingPoint {
                n_a: n,
                location,
                value,
                on_boundary,
                used_in_fit,
            });
        }
        let data: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| p.used_in_fit)
            .map(|p| ((p.n_a as f64 / l as f64).ln(), p.value.ln()))
            .collect();
        let (alpha, intercept, residual) = if data.len() >= 3 {
            fit_line(&data)
        } else {
            (f64::NAN, f64::NAN, f64::NAN)
        };
        fits.push(ScalingFit {
            family: job.family.to_ascii_lowercase(),
            sites: l,
            beta,
            kind,
            window: points
                .iter()
                .filter(|p| p.used_in_fit)
                .map(|p| p.n_a)
                .collect(),
            points,
            alpha,
            intercept,
            residual,
        });
    }
    Ok(fits)
}

/// Heat capacity of the lowest `k` levels against the full one.
///
/// ```json
/// {"model": {"family": "ising", "L": 8}, "beta": 9.0,
///  "sweep": {"param": "h", "grid": {"min": 0, "max": 2, "count": 41}},
///  "k_levels": [2, 3]}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FewLevelJob {
    pub model: ModelDocument,
    pub beta: f64,
    pub sweep: SweepSpec,
    pub k_levels: Vec<usize>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// Number of energy gaps reported per grid point.
pub const FEW_LEVEL_GAPS: usize = 3;

pub const FEW_LEVEL_HEADER: [&str; 13] = [
    "family",
    "L",
    "J",
    "param_name",
    "param_value",
    "beta",
    "k_levels",
    "truncated_variance",
    "full_variance",
    "gap_1",
    "gap_2",
    "gap_3",
    "error",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FewLevelValues {
    pub truncated_variance: f64,
    pub full_variance: f64,
    pub gaps: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FewLevelRow {
    pub family: &'static str,
    pub sites: usize,
    pub coupling: f64,
    pub param_name: &'static str,
    pub param_value: f64,
    pub beta: f64,
    pub k_levels: usize,
    pub outcome: std::result::Result<FewLevelValues, String>,
}

impl FewLevelJob {
    pub fn from_json(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(l) = o.sites {
            self.model.sites = l;
        }
        if let Some(b) = o.beta {
            self.beta = b;
        }
        if let Some(g) = o.grid {
            self.sweep.grid = g;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        if let Some(w) = o.workers {
            self.workers = w;
        }
    }

    pub fn validate(&self) -> Result<SpinChainModel> {
        let model = build_model(&self.model)?;
        check_beta(self.beta)?;
        check_workers(self.workers)?;
        let family_param = model.family().parameter().0;
        if self.sweep.param.name() != family_param {
            return Err(Error::Config(format!(
                "few-level sweeps run over `{family_param}` for {} models",
                model.family().name()
            )));
        }
        for p in self.sweep.grid.points()? {
            model.with_family(model.family().with_parameter(p))?;
        }
        if self.k_levels.is_empty() || self.k_levels.contains(&0) {
            return Err(Error::Config(
                "k_levels must be a nonempty list of positive counts".into(),
            ));
        }
        Ok(model)
    }
}

pub fn run_few_level(job: &FewLevelJob) -> Result<Vec<FewLevelRow>> {
    let model = job.validate()?;
    let grid = job.sweep.grid.points()?;
    let point = |value: f64| -> Vec<FewLevelRow> {
        let spectrum = model
            .with_family(model.family().with_parameter(value))
            .and_then(|m| m.diagonalize());
        job.k_levels
            .iter()
            .map(|&k| {
                let outcome = spectrum
                    .as_ref()
                    .map_err(Clone::clone)
                    .and_then(|spec| {
                        let full =
                            gibbs::gibbs(Arc::new(spec.clone()), job.beta)?.energy_variance();
                        Ok(FewLevelValues {
                            truncated_variance: gibbs::truncated_energy_variance(
                                spec, k, job.beta, None,
                            )?,
                            full_variance: full,
                            gaps: gibbs::level_gaps(spec, FEW_LEVEL_GAPS, None)?,
                        })
                    })
                    .map_err(|e| e.to_string());
                FewLevelRow {
                    family: model.family().name(),
                    sites: model.sites(),
                    coupling: model.coupling(),
                    param_name: job.sweep.param.name(),
                    param_value: value,
                    beta: job.beta,
                    k_levels: k,
                    outcome,
                }
            })
            .collect()
    };
    let rows: Vec<Vec<FewLevelRow>> =
        pool(job.workers)?.install(|| grid.par_iter().map(|&v| point(v)).collect());
    Ok(rows.into_iter().flatten().collect())
}

pub fn write_few_level_csv<W: Write>(rows: &[FewLevelRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FEW_LEVEL_HEADER).map_err(csv_error)?;
    for r in rows {
        let mut rec = vec![
            r.family.to_string(),
            r.sites.to_string(),
            r.coupling.to_string(),
            r.param_name.to_string(),
            r.param_value.to_string(),
            r.beta.to_string(),
            r.k_levels.to_string(),
        ];
        match &r.outcome {
            Ok(v) => {
                rec.push(v.truncated_variance.to_string());
                rec.push(v.full_variance.to_string());
                for g in 0..FEW_LEVEL_GAPS {
                    rec.push(v.gaps.get(g).map(|x| x.to_string()).unwrap_or_default());
                }
                rec.push(String::new());
            }
            Err(e) => {
                rec.extend(std::iter::repeat_n(String::new(), 2 + FEW_LEVEL_GAPS));
                rec.push(e.clone());
            }
        }
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Two-level classification of a gap profile read from a file of
/// `gamma,delta_e` lines.
///
/// ```json
/// {"beta": 9.0, "n0": 1, "n1": 1, "profile": "gaps.csv"}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LzJob {
    pub beta: f64,
    #[serde(default = "one_u32")]
    pub n0: u32,
    #[serde(default = "one_u32")]
    pub n1: u32,
    /// Relative paths are resolved against the directory of the job file.
    pub profile: PathBuf,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn one_u32() -> u32 {
    1
}

impl LzJob {
    pub fn from_json(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(b) = o.beta {
            self.beta = b;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
    }

    /// Makes a relative profile path relative to `base`.
    pub fn resolve_against(&mut self, base: &Path) {
        if self.profile.is_relative() {
            self.profile = base.join(&self.profile);
        }
    }
}

pub fn run_lz(job: &LzJob) -> Result<LzReport> {
    check_beta(job.beta)?;
    let text = std::fs::read_to_string(&job.profile)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", job.profile.display())))?;
    let profile = landau_zener::parse_gap_profile(&text)?;
    landau_zener::lz_classify_sweep(&profile, job.n0, job.n1, job.beta)
}
