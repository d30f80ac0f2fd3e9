//! Bias, dimension and sample-size sweeps over synthetic ground truths.
//!
//! Each (grid point, seed) pair is an independent job: it generates a ground
//! truth, samples data, runs every configured method and emits one record per
//! method. Jobs run in parallel and results are gathered in job order, so the
//! output does not depend on scheduling.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{normalized_error, rewire};
use crate::datagen::{
    self, karate, EdgeWeights, FairGraphSpec, GroundTruth, PrecisionMode, RngSeed,
};
use crate::error::{Error, Result};
use crate::fairness;
use crate::linalg;
use crate::model::{ExperimentRecord, PenaltyKind, SolverConfig, SymMatrix};
use crate::solver;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Vary the bias mixing weight `beta`.
    Bias,
    /// Vary the number of nodes `p`.
    Dim,
    /// Vary the number of observations `n`.
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    /// Sign-balanced ER graph screened for negligible bias.
    FairEr { avg_degree: f64, diag_load: f64 },
    /// The karate club with unit weights as a loaded-adjacency precision; `p` is fixed at 34.
    Karate { diag_load: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Graphical lasso.
    Gl,
    /// Group-wise fair penalty.
    Fgl,
    /// Node-wise fair penalty.
    Nfgl,
    /// Graphical lasso followed by random rewiring of this many edges.
    Rwgl(usize),
}

impl Method {
    pub fn name(&self) -> String {
        match self {
            Method::Gl => "GL".into(),
            Method::Fgl => "FGL".into(),
            Method::Nfgl => "NFGL".into(),
            Method::Rwgl(n) => format!("RWGL-{n}"),
        }
    }

    /// Parses `GL`, `FGL`, `NFGL` or `RWGL-<n>`, case-insensitively.
    pub fn parse(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        match up.as_str() {
            "GL" => Ok(Method::Gl),
            "FGL" => Ok(Method::Fgl),
            "NFGL" => Ok(Method::Nfgl),
            _ => up
                .strip_prefix("RWGL-")
                .and_then(|n| n.parse().ok())
                .map(Method::Rwgl)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown method '{s}'"))),
        }
    }
}

/// How the l1 weight is set at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mu1Rule {
    Fixed(f64),
    /// `c sqrt(ln p / n)`.
    Scaled(f64),
}

impl Mu1Rule {
    pub fn value(self, p: usize, n: usize) -> f64 {
        match self {
            Mu1Rule::Fixed(v) => v,
            Mu1Rule::Scaled(c) => c * ((p as f64).ln() / n as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub scenario: Scenario,
    pub source: GraphSource,
    /// Node counts; only the first is used unless the scenario is `Dim`.
    pub p: Vec<usize>,
    /// Sample sizes; only the first is used unless the scenario is `Sample`.
    pub n: Vec<usize>,
    /// Bias weights; used only by the `Bias` scenario.
    pub betas: Vec<f64>,
    pub g: usize,
    pub n_seeds: usize,
    pub base_seed: RngSeed,
    pub methods: Vec<Method>,
    pub mu1: Mu1Rule,
    /// Candidate bias weights for FGL; the one with the lowest error is reported.
    pub fgl_mu2: Vec<f64>,
    /// Candidate bias weights for NFGL.
    pub nfgl_mu2: Vec<f64>,
    /// Solver settings shared by every method; penalty and weights are overridden.
    pub solver: SolverConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Bias,
            source: GraphSource::FairEr { avg_degree: 10.0, diag_load: 1.0 },
            p: vec![50],
            n: vec![2000],
            betas: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            g: 2,
            n_seeds: 20,
            base_seed: RngSeed(0),
            methods: vec![Method::Gl, Method::Fgl, Method::Nfgl, Method::Rwgl(150), Method::Rwgl(300)],
            mu1: Mu1Rule::Scaled(0.1),
            fgl_mu2: vec![1e2, 1e3, 1e4],
            nfgl_mu2: vec![1e1, 1e2, 1e3],
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct GridPoint {
    p: usize,
    n: usize,
    beta: Option<f64>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        let varied_empty = match self.scenario {
            Scenario::Bias => self.betas.is_empty(),
            Scenario::Dim => self.p.is_empty(),
            Scenario::Sample => self.n.is_empty(),
        };
        if varied_empty {
            return bad("sweep grid is empty");
        }
        if self.n.is_empty() || (self.p.is_empty() && !matches!(self.source, GraphSource::Karate { .. })) {
            return bad("p and n need at least one value");
        }
        if self.n.iter().any(|&n| n < 2) {
            return bad("every n must be at least 2");
        }
        if self.betas.iter().any(|b| !(0.0..=1.0).contains(b)) {
            return bad("every beta must lie in [0, 1]");
        }
        if self.n_seeds == 0 {
            return bad("need at least one seed");
        }
        if self.methods.is_empty() {
            return bad("need at least one method");
        }
        if self.methods.contains(&Method::Fgl) && self.fgl_mu2.is_empty() {
            return bad("FGL needs at least one mu2 value");
        }
        if self.methods.contains(&Method::Nfgl) && self.nfgl_mu2.is_empty() {
            return bad("NFGL needs at least one mu2 value");
        }
        if self.fgl_mu2.iter().chain(&self.nfgl_mu2).any(|m| !(*m >= 0.0)) {
            return bad("mu2 values must be nonnegative");
        }
        Ok(())
    }

    fn points(&self) -> Vec<GridPoint> {
        let p0 = match self.source {
            GraphSource::Karate { .. } => karate::KARATE_NODES,
            GraphSource::FairEr { .. } => self.p[0],
        };
        let n0 = self.n[0];
        match self.scenario {
            Scenario::Bias => self.betas.iter().map(|&b| GridPoint { p: p0, n: n0, beta: Some(b) }).collect(),
            Scenario::Dim => match self.source {
                GraphSource::Karate { .. } => vec![GridPoint { p: p0, n: n0, beta: None }],
                GraphSource::FairEr { .. } => {
                    self.p.iter().map(|&p| GridPoint { p, n: n0, beta: None }).collect()
                }
            },
            Scenario::Sample => self.n.iter().map(|&n| GridPoint { p: p0, n, beta: None }).collect(),
        }
    }

    fn group_count(&self) -> usize {
        match self.source {
            GraphSource::Karate { .. } => 2,
            GraphSource::FairEr { .. } => self.g,
        }
    }
}

/// Records from a sweep together with the measured bias of each job's data.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub records: Vec<ExperimentRecord>,
    /// Per job, in job order: normalized bias of the precision implied by the
    /// population covariance the samples were drawn from (NaN if generation failed).
    pub data_bias: Vec<DataBias>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DataBias {
    pub p: usize,
    pub n: usize,
    pub beta: Option<f64>,
    pub seed: u64,
    pub normalized_bias: f64,
}

const TAG_TRUTH: u64 = 11;
const TAG_BIAS: u64 = 12;
const TAG_SAMPLE: u64 = 13;
const TAG_REWIRE: u64 = 14;

fn ground_truth(cfg: &SweepConfig, p: usize, seed: RngSeed) -> Result<GroundTruth> {
    match cfg.source {
        GraphSource::FairEr { avg_degree, diag_load } => datagen::fair_ground_truth(
            FairGraphSpec { p, g: cfg.g, avg_degree, diag_load },
            seed.derive(TAG_TRUTH).derive(p as u64),
        ),
        GraphSource::Karate { diag_load } => {
            let adj = karate::karate_adjacency();
            let theta0 = datagen::precision_from_graph(
                &adj,
                PrecisionMode::LoadedAdjacency,
                EdgeWeights::AsGiven,
                seed,
                diag_load,
            )?;
            GroundTruth::new(adj, theta0, karate::karate_factions(), 0.0)
        }
    }
}

struct Fit {
    theta: SymMatrix,
    mu2: f64,
    runtime_s: f64,
    error: f64,
}

fn fit(s: &SymMatrix, gt: &GroundTruth, cfg: &SolverConfig) -> Result<Fit> {
    let start = Instant::now();
    let res = solver::fista_solve(s, &gt.z, cfg, None)?;
    let runtime_s = start.elapsed().as_secs_f64();
    let error = normalized_error(&res.theta, &gt.theta0)?;
    Ok(Fit { theta: res.theta, mu2: cfg.effective_mu2(), runtime_s, error })
}

/// Fits every candidate `mu2` and keeps the one with the smallest error.
fn tuned_fit(s: &SymMatrix, gt: &GroundTruth, base: &SolverConfig, penalty: PenaltyKind, grid: &[f64]) -> Result<Fit> {
    let mut best: Option<Fit> = None;
    for &mu2 in grid {
        let f = fit(s, gt, &SolverConfig { penalty, mu2, ..base.clone() })?;
        if best.as_ref().is_none_or(|b| f.error < b.error) {
            best = Some(f);
        }
    }
    Ok(best.expect("grid checked nonempty"))
}

fn record(method: &Method, pt: GridPoint, g: usize, seed: u64, mu1: f64, outcome: Result<(f64, f64, f64, f64)>) -> ExperimentRecord {
    let base = ExperimentRecord {
        method: method.name(),
        p: pt.p,
        n: pt.n,
        g,
        seed,
        mu1,
        mu2: 0.0,
        beta: pt.beta,
        error: f64::NAN,
        bias: f64::NAN,
        runtime_s: f64::NAN,
        failure: None,
    };
    match outcome {
        Ok((mu2, error, bias, runtime_s)) => ExperimentRecord { mu2, error, bias, runtime_s, ..base },
        Err(e) => ExperimentRecord { failure: Some(e.to_string()), ..base },
    }
}

fn run_job(cfg: &SweepConfig, pt: GridPoint, seed_index: u64) -> (Vec<ExperimentRecord>, DataBias) {
    let seed = cfg.base_seed.derive(seed_index);
    let g = cfg.group_count();
    let mu1 = cfg.mu1.value(pt.p, pt.n);
    let mut data_bias = DataBias { p: pt.p, n: pt.n, beta: pt.beta, seed: seed_index, normalized_bias: f64::NAN };

    let prepared = (|| -> Result<(GroundTruth, SymMatrix)> {
        let gt = ground_truth(cfg, pt.p, seed)?;
        let sigma = match pt.beta {
            Some(b) => datagen::inject_bias(&gt, b, seed.derive(TAG_BIAS))?,
            None => gt.sigma0.clone(),
        };
        let implied = linalg::spd_factor(&sigma)?.inverse;
        data_bias.normalized_bias = fairness::normalized_bias(&implied, &gt.z).unwrap_or(f64::NAN);
        let x = datagen::sample_from_covariance(&sigma, pt.n, seed.derive(TAG_SAMPLE))?;
        let s = datagen::sample_covariance(&x, false, false)?;
        Ok((gt, s))
    })();
    let (gt, s) = match prepared {
        Ok(v) => v,
        Err(e) => {
            let recs = cfg
                .methods
                .iter()
                .map(|m| record(m, pt, g, seed_index, mu1, Err(e.clone())))
                .collect();
            return (recs, data_bias);
        }
    };

    let base = SolverConfig { mu1, ..cfg.solver.clone() };
    let scored = |f: Result<Fit>| -> Result<(f64, f64, f64, f64)> {
        let f = f?;
        let bias = fairness::normalized_bias(&f.theta, &gt.z)?;
        Ok((f.mu2, f.error, bias, f.runtime_s))
    };

    let needs_gl = cfg.methods.iter().any(|m| matches!(m, Method::Gl | Method::Rwgl(_)));
    let gl = if needs_gl {
        Some(fit(&s, &gt, &SolverConfig { penalty: PenaltyKind::None, mu2: 0.0, ..base.clone() }))
    } else {
        None
    };

    let records = cfg
        .methods
        .iter()
        .map(|m| {
            let outcome = match m {
                Method::Gl => match gl.as_ref().expect("fitted above") {
                    Ok(f) => scored(Ok(Fit { theta: f.theta.clone(), ..*f })),
                    Err(e) => Err(e.clone()),
                },
                Method::Fgl => scored(tuned_fit(&s, &gt, &base, PenaltyKind::GroupDp, &cfg.fgl_mu2)),
                Method::Nfgl => scored(tuned_fit(&s, &gt, &base, PenaltyKind::NodeDp, &cfg.nfgl_mu2)),
                Method::Rwgl(budget) => match gl.as_ref().expect("fitted above") {
                    Ok(f) => {
                        let start = Instant::now();
                        let k = rewire::rwgl_rewire_count(*budget, f.theta.offdiag_nnz());
                        let rewired = rewire::rwgl_rewire(&f.theta, k, seed.derive(TAG_REWIRE).derive(*budget as u64));
                        let extra = start.elapsed().as_secs_f64();
                        rewired.and_then(|theta| {
                            let error = normalized_error(&theta, &gt.theta0)?;
                            scored(Ok(Fit { theta, mu2: 0.0, runtime_s: f.runtime_s + extra, error }))
                        })
                    }
                    Err(e) => Err(e.clone()),
                },
            };
            record(m, pt, g, seed_index, mu1, outcome)
        })
        .collect();
    (records, data_bias)
}

/// Runs every grid point for every seed. Failed runs are kept as flagged
/// records; only an invalid configuration is an error.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    cfg.solver.validate()?;
    let jobs: Vec<(GridPoint, u64)> = cfg
        .points()
        .into_iter()
        .flat_map(|pt| (0..cfg.n_seeds as u64).map(move |s| (pt, s)))
        .collect();
    let results: Vec<_> = jobs.par_iter().map(|&(pt, s)| run_job(cfg, pt, s)).collect();
    let mut out = SweepOutput { records: Vec::new(), data_bias: Vec::new() };
    for (recs, db) in results {
        out.records.extend(recs);
        out.data_bias.push(db);
    }
    Ok(out)
}

/// Per method and grid point aggregates over seeds; failed runs are counted and skipped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: String,
    pub p: usize,
    pub n: usize,
    pub g: usize,
    pub beta: Option<f64>,
    pub runs: usize,
    pub failures: usize,
    pub mean_error: f64,
    pub median_error: f64,
    pub mean_bias: f64,
    pub median_bias: f64,
    pub mean_runtime_s: f64,
    pub median_runtime_s: f64,
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Groups records by (method, p, n, g, beta) in order of first appearance.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    type Key = (String, usize, usize, usize, Option<u64>);
    let mut order: Vec<Key> = Vec::new();
    let mut groups: HashMap<Key, Vec<&ExperimentRecord>> = HashMap::new();
    for r in records {
        let key = (r.method.clone(), r.p, r.n, r.g, r.beta.map(f64::to_bits));
        groups.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            Vec::new()
        }).push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let rs = &groups[&key];
            let ok: Vec<_> = rs.iter().filter(|r| r.is_ok()).collect();
            let col = |f: fn(&ExperimentRecord) -> f64| ok.iter().map(|r| f(r)).collect::<Vec<_>>();
            let (e, b, t) = (col(|r| r.error), col(|r| r.bias), col(|r| r.runtime_s));
            SummaryRow {
                method: key.0,
                p: key.1,
                n: key.2,
                g: key.3,
                beta: key.4.map(f64::from_bits),
                runs: rs.len(),
                failures: rs.len() - ok.len(),
                mean_error: mean(&e),
                median_error: median(&e),
                mean_bias: mean(&b),
                median_bias: median(&b),
                mean_runtime_s: mean(&t),
                median_runtime_s: median(&t),
            }
        })
        .collect()
}
