use std::path::Path;
use std::time::Instant;

use fairglasso::datagen::{self, FairGraphSpec, RngSeed};
use fairglasso::eval::{self, GraphSource, Method, Mu1Rule, Scenario, SignRatios, SweepConfig};
use fairglasso::{fairness, solver, GroupAssignment, PenaltyKind, SolverConfig, SymMatrix};
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::json;

use crate::io::{self, with_suffix};
use crate::manifest::{self, RunManifest};
use crate::{BenchArgs, CliError, Command, EstimateArgs, EvalArgs, ReplayArgs, ScenarioArg, SourceArg, SynthArgs};

pub fn execute(cmd: &Command, args: &[String]) -> Result<(), CliError> {
    match cmd {
        Command::Estimate(a) => estimate(a, args),
        Command::Synth(a) => synth(a, args),
        Command::Eval(a) => evaluate(a, args),
        Command::Bench(a) => bench(a, args),
        Command::Replay(a) => replay(a),
    }
}

fn groups_for(path: &Path, p: usize) -> Result<(GroupAssignment, Vec<String>), CliError> {
    let labels = io::read_labels(path)?;
    if labels.len() != p {
        return Err(CliError::Input(format!(
            "{}: {} labels for {p} variables",
            path.display(),
            labels.len()
        )));
    }
    GroupAssignment::from_raw_labels(&labels).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[derive(Debug, Serialize)]
struct EstimateMetrics {
    p: usize,
    n: usize,
    g: usize,
    iterations: usize,
    converged: bool,
    final_objective: f64,
    bias_group: f64,
    bias_node: f64,
    /// Absent when the estimate has no off-diagonal entries.
    #[serde(skip_serializing_if = "Option::is_none")]
    normalized_bias: Option<f64>,
    model_fit_sample: f64,
    lipschitz_used: f64,
    alpha_used: f64,
    momentum_resets: usize,
    group_labels: Vec<String>,
}

fn estimate(a: &EstimateArgs, args: &[String]) -> Result<(), CliError> {
    let rows = io::read_numeric_csv(&a.observations, a.header)?;
    let (n, p) = (rows.len(), rows[0].len());
    if n < 2 {
        return Err(CliError::Input(format!("{}: need at least 2 observations, got {n}", a.observations.display())));
    }
    if p < 4 {
        return Err(CliError::Input(format!("{}: need at least 4 variables, got {p}", a.observations.display())));
    }
    let (z, names) = groups_for(&a.groups, p)?;
    let x = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    let s = datagen::sample_covariance(&x, !a.no_center, a.unbiased_cov)?;
    let cfg = a.solver.config();
    let res = solver::fista_solve(&s, &z, &cfg, None)?;

    let metrics = EstimateMetrics {
        p,
        n,
        g: z.g(),
        iterations: res.iterations,
        converged: res.converged,
        final_objective: res.final_objective,
        bias_group: fairness::bias_group(&res.theta, &z),
        bias_node: fairness::bias_node(&res.theta, &z),
        normalized_bias: fairness::normalized_bias(&res.theta, &z).ok(),
        model_fit_sample: eval::model_fit(&res.theta, &s)?,
        lipschitz_used: res.lipschitz_used,
        alpha_used: res.alpha_used,
        momentum_resets: res.momentum_resets,
        group_labels: names,
    };
    io::write_atomic(&with_suffix(&a.out, "theta.csv"), io::matrix_csv(&res.theta).as_bytes())?;
    io::write_json(&with_suffix(&a.out, "metrics.json"), &metrics)?;
    let config = json!({
        "solver": cfg,
        "observations": a.observations,
        "groups": a.groups,
        "header": a.header,
        "center": !a.no_center,
        "unbiased_cov": a.unbiased_cov,
        "out": a.out,
    });
    RunManifest::new("estimate", args, config, None).write(&with_suffix(&a.out, "manifest.json"))?;
    println!(
        "estimate: p={p} n={n} iterations={} converged={} objective={}",
        res.iterations, res.converged, res.final_objective
    );
    Ok(())
}

pub const SWEEP_HEADER: [&str; 11] = ["method", "p", "n", "g", "seed", "mu1", "mu2", "beta", "error", "bias", "runtime_s"];
pub const SUMMARY_HEADER: [&str; 13] = [
    "method", "p", "n", "g", "beta", "runs", "failures", "mean_error", "median_error", "mean_bias",
    "median_bias", "mean_runtime_s", "median_runtime_s",
];
pub const DATA_BIAS_HEADER: [&str; 5] = ["p", "n", "beta", "seed", "normalized_bias"];

fn sweep_config(a: &SynthArgs) -> Result<SweepConfig, CliError> {
    let methods = a
        .methods
        .iter()
        .map(|m| Method::parse(m))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepConfig {
        scenario: match a.scenario {
            ScenarioArg::Bias => Scenario::Bias,
            ScenarioArg::Dim => Scenario::Dim,
            ScenarioArg::Sample => Scenario::Sample,
        },
        source: match a.source {
            SourceArg::Er => GraphSource::FairEr { avg_degree: a.avg_degree, diag_load: a.diag_load },
            SourceArg::Karate => GraphSource::Karate { diag_load: a.diag_load },
        },
        p: a.p.clone(),
        n: a.n.clone(),
        betas: a.betas.clone(),
        g: a.g,
        n_seeds: a.seeds,
        base_seed: RngSeed(a.base_seed),
        methods,
        mu1: match a.mu1 {
            Some(v) => Mu1Rule::Fixed(v),
            None => Mu1Rule::Scaled(a.mu1_scale),
        },
        fgl_mu2: a.fgl_mu2.clone(),
        nfgl_mu2: a.nfgl_mu2.clone(),
        solver: SolverConfig {
            epsilon: a.epsilon,
            max_iter: a.max_iter,
            tol: a.tol,
            ..SolverConfig::default()
        },
    })
}

fn synth(a: &SynthArgs, args: &[String]) -> Result<(), CliError> {
    let cfg = sweep_config(a)?;
    let out = eval::run_sweep(&cfg)?;
    let time = |t: f64| if a.no_timing { 0.0 } else { t };

    let rows: Vec<Vec<String>> = out
        .records
        .iter()
        .map(|r| {
            vec![
                r.method.clone(),
                r.p.to_string(),
                r.n.to_string(),
                r.g.to_string(),
                r.seed.to_string(),
                r.mu1.to_string(),
                r.mu2.to_string(),
                fmt_opt(r.beta),
                r.error.to_string(),
                r.bias.to_string(),
                time(r.runtime_s).to_string(),
            ]
        })
        .collect();
    io::write_atomic(&with_suffix(&a.out, "sweep.csv"), io::table_csv(&SWEEP_HEADER, &rows)?.as_bytes())?;

    let summary: Vec<Vec<String>> = eval::summarize(&out.records)
        .into_iter()
        .map(|s| {
            vec![
                s.method,
                s.p.to_string(),
                s.n.to_string(),
                s.g.to_string(),
                fmt_opt(s.beta),
                s.runs.to_string(),
                s.failures.to_string(),
                s.mean_error.to_string(),
                s.median_error.to_string(),
                s.mean_bias.to_string(),
                s.median_bias.to_string(),
                time(s.mean_runtime_s).to_string(),
                time(s.median_runtime_s).to_string(),
            ]
        })
        .collect();
    io::write_atomic(&with_suffix(&a.out, "summary.csv"), io::table_csv(&SUMMARY_HEADER, &summary)?.as_bytes())?;

    let data: Vec<Vec<String>> = out
        .data_bias
        .iter()
        .map(|d| vec![d.p.to_string(), d.n.to_string(), fmt_opt(d.beta), d.seed.to_string(), d.normalized_bias.to_string()])
        .collect();
    io::write_atomic(&with_suffix(&a.out, "data_bias.csv"), io::table_csv(&DATA_BIAS_HEADER, &data)?.as_bytes())?;

    let config = json!({ "sweep": cfg, "no_timing": a.no_timing, "out": a.out });
    RunManifest::new("synth", args, config, Some(a.base_seed)).write(&with_suffix(&a.out, "manifest.json"))?;
    let failed = out.records.iter().filter(|r| !r.is_ok()).count();
    println!("synth: {} records, {failed} failed", out.records.len());
    Ok(())
}

#[derive(Debug, Serialize)]
struct EvalMetrics {
    p: usize,
    g: usize,
    bias_group: f64,
    bias_node: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    normalized_bias: Option<f64>,
    edge_threshold: f64,
    sign_ratios: SignRatios,
    /// Absent when the matrix has no off-diagonal entries.
    #[serde(skip_serializing_if = "Option::is_none")]
    modularity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    normalized_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    model_fit: Option<f64>,
}

fn evaluate(a: &EvalArgs, args: &[String]) -> Result<(), CliError> {
    let theta = io::read_sym_matrix(&a.theta, a.header)?;
    let p = theta.dim();
    let (z, _) = groups_for(&a.groups, p)?;
    let read_same_size = |path: &Path| -> Result<SymMatrix, CliError> {
        let m = io::read_sym_matrix(path, a.header)?;
        if m.dim() != p {
            return Err(CliError::Input(format!("{}: {}x{} matrix, expected {p}x{p}", path.display(), m.dim(), m.dim())));
        }
        Ok(m)
    };
    let normalized_error = match &a.theta0 {
        Some(path) => Some(eval::normalized_error(&theta, &read_same_size(path)?)?),
        None => None,
    };
    let model_fit = match &a.sigma {
        Some(path) => Some(eval::model_fit(&theta, &read_same_size(path)?)?),
        None => None,
    };
    let threshold = a.threshold.unwrap_or_else(|| eval::default_edge_threshold(&theta));
    let metrics = EvalMetrics {
        p,
        g: z.g(),
        bias_group: fairness::bias_group(&theta, &z),
        bias_node: fairness::bias_node(&theta, &z),
        normalized_bias: fairness::normalized_bias(&theta, &z).ok(),
        edge_threshold: threshold,
        sign_ratios: eval::sign_ratios(&theta, &z, threshold)?,
        modularity: eval::modularity(&theta, &z).ok(),
        normalized_error,
        model_fit,
    };
    io::write_json(&with_suffix(&a.out, "metrics.json"), &metrics)?;
    let config = json!({
        "theta": a.theta,
        "groups": a.groups,
        "theta0": a.theta0,
        "sigma": a.sigma,
        "header": a.header,
        "threshold": threshold,
        "out": a.out,
    });
    RunManifest::new("eval", args, config, None).write(&with_suffix(&a.out, "manifest.json"))?;
    println!(
        "eval: p={p} bias_group={} modularity={}",
        metrics.bias_group,
        metrics.modularity.map_or("n/a".into(), |m| m.to_string())
    );
    Ok(())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub const BENCH_HEADER: [&str; 4] = ["p", "method", "median_runtime_s", "iterations"];

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub p: usize,
    pub method: String,
    pub median_runtime_s: f64,
    pub iterations: f64,
}

/// Times the solver on fair ER problems with a fixed iteration budget.
pub fn bench_rows(a: &BenchArgs) -> Result<Vec<BenchRow>, CliError> {
    if a.p.is_empty() || a.mu2.is_empty() || a.seeds == 0 || a.iters == 0 {
        return Err(CliError::Input("bench needs at least one size, bias weight, seed and iteration".into()));
    }
    let mut rows = Vec::new();
    for &p in &a.p {
        let mut problems = Vec::new();
        for s in 0..a.seeds as u64 {
            let seed = RngSeed(a.seed).derive(p as u64).derive(s);
            let spec = FairGraphSpec { p, g: 2, avg_degree: 10f64.min((p - 1) as f64 / 2.0), diag_load: 1.0 };
            let gt = datagen::fair_ground_truth(spec, seed)?;
            let x = datagen::sample_from_covariance(&gt.sigma0, a.samples_per_node * p, seed)?;
            problems.push((datagen::sample_covariance(&x, false, false)?, gt.z));
        }
        for &mu2 in &a.mu2 {
            let cfg = SolverConfig {
                mu1: a.mu1,
                mu2,
                penalty: PenaltyKind::GroupDp,
                max_iter: a.iters,
                tol: f64::MIN_POSITIVE,
                ..SolverConfig::default()
            };
            let mut times = Vec::new();
            let mut iters = Vec::new();
            for (s, z) in &problems {
                let start = Instant::now();
                let res = solver::fista_solve(s, z, &cfg, None)?;
                times.push(start.elapsed().as_secs_f64());
                iters.push(res.iterations as f64);
            }
            rows.push(BenchRow {
                p,
                method: format!("FGL-{mu2}"),
                median_runtime_s: eval::sweep::median(&times),
                iterations: eval::sweep::median(&iters),
            });
        }
    }
    Ok(rows)
}

/// Slope per method, in order of first appearance.
pub fn bench_slopes(rows: &[BenchRow]) -> Vec<(String, f64)> {
    let mut methods: Vec<String> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method) {
            methods.push(r.method.clone());
        }
    }
    methods
        .into_iter()
        .map(|m| {
            let sel: Vec<&BenchRow> = rows.iter().filter(|r| r.method == m).collect();
            let x: Vec<f64> = sel.iter().map(|r| r.p as f64).collect();
            let y: Vec<f64> = sel.iter().map(|r| r.median_runtime_s).collect();
            (m, log_log_slope(&x, &y))
        })
        .collect()
}

fn bench(a: &BenchArgs, args: &[String]) -> Result<(), CliError> {
    let rows = bench_rows(a)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.p.to_string(), r.method.clone(), r.median_runtime_s.to_string(), r.iterations.to_string()])
        .collect();
    io::write_atomic(&with_suffix(&a.out, "bench.csv"), io::table_csv(&BENCH_HEADER, &table)?.as_bytes())?;
    let config = json!({
        "p": a.p,
        "seeds": a.seeds,
        "iters": a.iters,
        "mu1": a.mu1,
        "mu2": a.mu2,
        "samples_per_node": a.samples_per_node,
        "out": a.out,
    });
    RunManifest::new("bench", args, config, Some(a.seed)).write(&with_suffix(&a.out, "manifest.json"))?;
    if a.p.len() >= 2 {
        for (m, slope) in bench_slopes(&rows) {
            println!("bench: {m} log-log slope {slope:.3}");
        }
    }
    Ok(())
}

fn replay(a: &ReplayArgs) -> Result<(), CliError> {
    let m = RunManifest::read(&a.manifest)?;
    let args = match &a.out {
        Some(out) => manifest::override_out(&m.args, out),
        None => m.args.clone(),
    };
    if args.first().map(String::as_str) == Some("replay") {
        return Err(CliError::Input("manifest records a replay; refusing to recurse".into()));
    }
    crate::run_args(&args)
}
