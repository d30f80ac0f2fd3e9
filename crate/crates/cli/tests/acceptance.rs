//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use fairglasso::datagen::{self, FairGraphSpec, RngSeed};
use fairglasso::eval::{run_sweep, GraphSource, Method, Scenario, SweepConfig};
use fairglasso::fairness::{bias_group, bias_node, grad_bias_group, grad_bias_node};
use fairglasso::solver::{default_init, fista_solve, fista_solve_observed, project_feasible, smooth_grad, smooth_value};
use fairglasso::{linalg, ExperimentRecord, GroupAssignment, PenaltyKind, SolverConfig, StepRule, SymMatrix};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn random_sym(rng: &mut ChaCha8Rng, p: usize, diag: f64) -> SymMatrix {
    SymMatrix::from_upper_fn(p, |i, j| {
        let v: f64 = rng.random_range(-1.0..1.0);
        if i == j {
            diag + v
        } else {
            v
        }
    })
}

fn contiguous(p: usize, g: usize) -> GroupAssignment {
    GroupAssignment::from_labels((0..p).map(|i| i * g / p).collect()).unwrap()
}

fn fair_covariance(p: usize, n: usize, seed: u64) -> (SymMatrix, GroupAssignment) {
    let gt = datagen::fair_ground_truth(FairGraphSpec { p, g: 2, avg_degree: 4.0, diag_load: 1.0 }, RngSeed(seed)).unwrap();
    let x = datagen::sample_from_covariance(&gt.sigma0, n, RngSeed(seed).derive(99)).unwrap();
    (datagen::sample_covariance(&x, false, false).unwrap(), gt.z)
}

// ---------------------------------------------------------------- 1

fn fd_gradient(theta: &SymMatrix, h: f64, f: impl Fn(&SymMatrix) -> f64) -> SymMatrix {
    let p = theta.dim();
    let mut g = DMatrix::zeros(p, p);
    for j in 0..p {
        for i in 0..=j {
            let bump = |s: f64| {
                let mut m = theta.as_matrix().clone();
                m[(i, j)] += s;
                if i != j {
                    m[(j, i)] += s;
                }
                SymMatrix::new(m).unwrap()
            };
            let d = (f(&bump(h)) - f(&bump(-h))) / (2.0 * h);
            let v = if i == j { d } else { d / 2.0 };
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    SymMatrix::new(g).unwrap()
}

fn rel_err(a: &SymMatrix, b: &SymMatrix) -> f64 {
    (a - b).frobenius_norm() / b.frobenius_norm().max(1e-300)
}

fn gradients() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let g = [2, 3, 5][k % 3];
        let z = contiguous(20, g);
        let theta = random_sym(&mut rng, 20, 0.0);
        worst = worst.max(rel_err(&grad_bias_group(&theta, &z), &fd_gradient(&theta, 1e-5, |t| bias_group(t, &z))));
        worst = worst.max(rel_err(&grad_bias_node(&theta, &z), &fd_gradient(&theta, 1e-5, |t| bias_node(t, &z))));

        let pd = random_sym(&mut rng, 20, 10.0);
        let root = random_sym(&mut rng, 20, 0.0);
        let sigma = SymMatrix::new(root.as_matrix() * root.as_matrix()).unwrap().add_diagonal(0.1);
        let penalty = [PenaltyKind::GroupDp, PenaltyKind::NodeDp][k % 2];
        let cfg = SolverConfig { mu2: 3.0, penalty, epsilon: 1e-3, ..Default::default() };
        let fd = fd_gradient(&pd, 1e-5, |t| smooth_value(t, &sigma, &z, &cfg).unwrap());
        worst = worst.max(rel_err(&smooth_grad(&pd, &sigma, &z, &cfg).unwrap(), &fd));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst < 1e-5 && secs < 10.0, format!("max relative error {worst:.2e}, {secs:.1}s"))
}

// ---------------------------------------------------------------- 2

fn convergence() -> Outcome {
    let start = Instant::now();
    let mut gap_violations = 0;
    let (mut over_alpha, mut times_alpha) = (0usize, 0usize);
    let mut unconverged = 0;
    for inst in 0..10u64 {
        let (s, z) = fair_covariance(20, 200, 500 + inst);
        let base = SolverConfig { mu1: 0.05, mu2: 2.0, epsilon: 0.5, step: StepRule::Lipschitz, ..Default::default() };
        let star = fista_solve(&s, &z, &SolverConfig { tol: 1e-12, max_iter: 200_000, ..base.clone() }, None).unwrap();
        unconverged += usize::from(!star.converged);
        let alpha = star.alpha_used;
        let r0 = (&default_init(&s, base.epsilon, alpha).unwrap() - &star.theta).frobenius_norm().powi(2);
        let mut l = 0.0;
        let cfg = SolverConfig { tol: f64::MIN_POSITIVE, max_iter: 500, ..base };
        fista_solve_observed(&s, &z, &cfg, None, |v| {
            l = v.lipschitz;
            let k1 = (v.k + 1) as f64;
            let gap = v.objective - star.final_objective;
            if gap > 2.0 * v.lipschitz * r0 / (k1 * k1) + 1e-10 {
                gap_violations += 1;
            }
            let dist = (v.theta - &star.theta).frobenius_norm().powi(2);
            over_alpha += usize::from(dist > 4.0 * v.lipschitz * r0 / (alpha * k1 * k1) + 1e-10);
            times_alpha += usize::from(dist > 4.0 * v.lipschitz * alpha * r0 / (k1 * k1) + 1e-10);
        })
        .unwrap();
        assert!(l > 0.0);
    }
    let secs = start.elapsed().as_secs_f64();
    println!(
        "  iterate bound over 5000 iterates: 4L/alpha reading violated {over_alpha} times, 4L*alpha reading violated {times_alpha} times"
    );
    outcome(
        gap_violations == 0 && secs < 60.0,
        format!("{gap_violations} objective-gap violations, {unconverged} reference runs hit max_iter, {secs:.1}s"),
    )
}

// ---------------------------------------------------------------- 3

/// Plain projected proximal gradient on tr(S T) - logdet(T + eps I) + mu1 |T_offdiag|_1,
/// written against nalgebra alone.
fn ista_oracle(s: &DMatrix<f64>, mu1: f64, eps: f64, alpha: f64) -> DMatrix<f64> {
    let p = s.nrows();
    let id = DMatrix::<f64>::identity(p, p);
    let smooth = |t: &DMatrix<f64>| -> Option<f64> {
        let chol = (t + &id * eps).cholesky()?;
        let logdet: f64 = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        Some((s * t).trace() - logdet)
    };
    let grad = |t: &DMatrix<f64>| s - (t + &id * eps).try_inverse().unwrap();
    let prox = |m: &DMatrix<f64>, lam: f64| {
        let mut out = m.clone();
        for j in 0..p {
            for i in 0..p {
                if i != j {
                    let v = m[(i, j)];
                    out[(i, j)] = v.signum() * (v.abs() - lam).max(0.0);
                }
            }
        }
        let e = SymmetricEigen::new(out);
        let clipped = e.eigenvalues.map(|l| l.clamp(0.0, alpha.sqrt()));
        let r = &e.eigenvectors * DMatrix::from_diagonal(&clipped) * e.eigenvectors.transpose();
        (&r + r.transpose()) * 0.5
    };
    let mut t = DMatrix::from_diagonal(&s.diagonal().map(|d| 1.0 / d));
    let mut step = 1.0;
    for _ in 0..200_000 {
        let f = smooth(&t).unwrap();
        let g = grad(&t);
        step *= 2.0;
        let next = loop {
            let cand = prox(&(&t - &g * step), step * mu1);
            let d = &cand - &t;
            if let Some(fc) = smooth(&cand) {
                if fc <= f + g.dot(&d) + d.norm_squared() / (2.0 * step) {
                    break cand;
                }
            }
            step *= 0.5;
        };
        let change = (&next - &t).norm();
        t = next;
        if change < 1e-13 {
            break;
        }
    }
    t
}

fn kkt_residual(theta: &SymMatrix, s: &SymMatrix, mu1: f64, eps: f64) -> f64 {
    let g = s.as_matrix() - linalg::spd_factor(&theta.add_diagonal(eps)).unwrap().inverse.as_matrix();
    let p = theta.dim();
    let mut worst = 0.0f64;
    for i in 0..p {
        for j in 0..p {
            let r = if i == j {
                g[(i, j)].abs()
            } else if theta.get(i, j).abs() > 1e-9 {
                (g[(i, j)] + mu1 * theta.get(i, j).signum()).abs()
            } else {
                (g[(i, j)].abs() - mu1).max(0.0)
            };
            worst = worst.max(r);
        }
    }
    worst
}

fn glasso_reduction() -> Outcome {
    let (mu1, eps) = (0.1, 1e-4);
    let (mut dist, mut kkt) = (0.0f64, 0.0f64);
    for inst in 0..10u64 {
        let (s, z) = fair_covariance(15, 60, 900 + inst);
        let cfg = SolverConfig { mu1, mu2: 0.0, epsilon: eps, tol: 1e-12, max_iter: 200_000, ..Default::default() };
        let res = fista_solve(&s, &z, &cfg, None).unwrap();
        let oracle = ista_oracle(s.as_matrix(), mu1, eps, res.alpha_used);
        dist = dist.max((res.theta.as_matrix() - oracle).norm());
        kkt = kkt.max(kkt_residual(&res.theta, &s, mu1, eps));
    }
    outcome(dist <= 1e-5 && kkt <= 1e-4, format!("max Frobenius gap {dist:.2e}, max KKT residual {kkt:.2e}"))
}

// ---------------------------------------------------------------- 4-6

type Key = (usize, Option<u64>, u64);

/// Groups records by (n, beta bits, seed) and method.
fn by_job(records: &[ExperimentRecord]) -> BTreeMap<Key, BTreeMap<String, &ExperimentRecord>> {
    let mut out: BTreeMap<Key, BTreeMap<String, &ExperimentRecord>> = BTreeMap::new();
    for r in records {
        out.entry((r.n, r.beta.map(f64::to_bits), r.seed)).or_default().insert(r.method.clone(), r);
    }
    out
}

fn medians(records: &[ExperimentRecord], method: &str, keep: impl Fn(&ExperimentRecord) -> bool) -> f64 {
    let v: Vec<f64> = records.iter().filter(|r| r.method == method && keep(r)).map(|r| r.error).collect();
    median(v)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    }
}

fn bias_tradeoff() -> Outcome {
    let start = Instant::now();
    let cfg = SweepConfig { methods: vec![Method::Gl, Method::Fgl], ..Default::default() };
    let out = run_sweep(&cfg).unwrap();
    let jobs = by_job(&out.records);
    let mut pass = true;
    let mut parts = Vec::new();
    for beta in [0.2, 0.3, 0.4, 0.5] {
        let at = |r: &ExperimentRecord| r.beta == Some(beta);
        let (mut wins, mut total) = (0, 0);
        for ((_, b, _), m) in &jobs {
            if *b == Some(f64::to_bits(beta)) {
                total += 1;
                wins += usize::from(m["FGL"].bias < m["GL"].bias);
            }
        }
        let (ef, eg) = (medians(&out.records, "FGL", at), medians(&out.records, "GL", at));
        pass &= wins * 10 >= total * 9 && ef <= eg;
        parts.push(format!("beta {beta}: bias wins {wins}/{total}, median error FGL {ef:.3} vs GL {eg:.3}"));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 900.0;
    outcome(pass, format!("{}; {secs:.0}s", parts.join("; ")))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn error_rate() -> Outcome {
    let start = Instant::now();
    let ns = [500, 2000, 8000];
    let cfg = SweepConfig {
        scenario: Scenario::Sample,
        n: ns.to_vec(),
        n_seeds: 30,
        methods: vec![Method::Gl, Method::Fgl],
        fgl_mu2: vec![10.0],
        ..Default::default()
    };
    let out = run_sweep(&cfg).unwrap();
    let curve = |m: &str| ns.iter().map(|&n| medians(&out.records, m, |r| r.n == n)).collect::<Vec<_>>();
    let (gl, fgl) = (curve("GL"), curve("FGL"));
    let close = gl.iter().zip(&fgl).all(|(g, f)| (f - g).abs() <= 0.1 * g);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        strictly_decreasing(&gl) && strictly_decreasing(&fgl) && close && secs < 1200.0,
        format!("median error GL {gl:.3?}, FGL(mu2=10) {fgl:.3?}; {secs:.0}s"),
    )
}

fn karate() -> Outcome {
    let start = Instant::now();
    let ns = [100, 1000, 10000];
    let cfg = SweepConfig {
        scenario: Scenario::Sample,
        source: GraphSource::Karate { diag_load: 1.0 },
        n: ns.to_vec(),
        n_seeds: 30,
        methods: vec![Method::Gl, Method::Fgl],
        ..Default::default()
    };
    let out = run_sweep(&cfg).unwrap();
    let jobs = by_job(&out.records);
    let (mut wins, mut total) = (0, 0);
    for ((n, _, _), m) in &jobs {
        if *n == 10000 {
            total += 1;
            wins += usize::from(m["FGL"].bias < m["GL"].bias);
        }
    }
    let gl: Vec<f64> = ns.iter().map(|&n| medians(&out.records, "GL", |r| r.n == n)).collect();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        wins * 10 >= total * 9 && strictly_decreasing(&gl) && secs < 600.0,
        format!("bias wins at n=1e4 {wins}/{total}, median GL error {gl:.3?}; {secs:.0}s"),
    )
}

// ---------------------------------------------------------------- 7

fn hand_values() -> Outcome {
    let z = GroupAssignment::from_labels(vec![0, 0, 1, 1]).unwrap();
    let build = |w: f64, c: f64| SymMatrix::from_upper_fn(4, |i, j| if i == j { 1.0 } else if z.same_group(i, j) { w } else { c });
    let mut worst = 0.0f64;
    for (w, c) in [(0.7, 0.2), (-1.3, 0.4), (2.5, -0.5), (0.0, 1.0)] {
        let t = build(w, c);
        worst = worst.max((bias_group(&t, &z) - (w - c).powi(2)).abs());
        worst = worst.max((bias_node(&t, &z) - (w / 2.0 - c).powi(2)).abs());
    }
    let balanced = [bias_group(&build(0.6, 0.6), &z), bias_node(&build(0.6, 0.3), &z), bias_group(&SymMatrix::identity(4), &z), bias_node(&SymMatrix::identity(4), &z)];
    let zero = balanced.iter().all(|v| v.abs() <= 1e-12);
    outcome(worst <= 1e-12 && zero, format!("max deviation {worst:.1e}, balanced values {balanced:?}"))
}

// ---------------------------------------------------------------- 8, 10

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fairglasso"))
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let out = bin().args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    } else {
        Err(String::from_utf8_lossy(&out.stderr).into_owned())
    }
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{}.{suffix}", prefix.display()))
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let (lx, ly): (Vec<f64>, Vec<f64>) = (x.iter().map(|v| v.ln()).collect(), y.iter().map(|v| v.ln()).collect());
    let (mx, my) = (lx.iter().sum::<f64>() / lx.len() as f64, ly.iter().sum::<f64>() / ly.len() as f64);
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

fn scaling(dir: &Path) -> Outcome {
    let out = dir.join("bench");
    if let Err(e) = run_cli(&["bench", "--p", "50,100,200", "--out", out.to_str().unwrap()]) {
        return outcome(false, format!("bench failed: {e}"));
    }
    let text = fs::read_to_string(suffixed(&out, "bench.csv")).unwrap();
    let mut series: BTreeMap<String, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let e = series.entry(f[1].to_string()).or_default();
        e.0.push(f[0].parse().unwrap());
        e.1.push(f[2].parse().unwrap());
    }
    let slopes: Vec<(String, f64)> = series.into_iter().map(|(m, (x, y))| (m, slope(&x, &y))).collect();
    let pass = !slopes.is_empty() && slopes.iter().all(|(_, s)| (2.0..=3.6).contains(s));
    let detail = slopes.iter().map(|(m, s)| format!("{m} slope {s:.2}")).collect::<Vec<_>>().join(", ");
    outcome(pass, detail)
}

/// Drops the timestamp from a manifest.
fn without_timestamp(bytes: &[u8]) -> Vec<u8> {
    let mut v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
    v.as_object_mut().unwrap().remove("timestamp");
    serde_json::to_vec(&v).unwrap()
}

/// Blanks the runtime column of a bench table.
fn without_runtimes(bytes: &[u8]) -> Vec<u8> {
    String::from_utf8_lossy(bytes)
        .lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f[2] = "";
            f.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
        .into_bytes()
}

fn snapshot(prefix: &Path, suffixes: &[&str]) -> Vec<(String, Vec<u8>)> {
    suffixes
        .iter()
        .map(|s| {
            let bytes = fs::read(suffixed(prefix, s)).unwrap_or_default();
            let bytes = match *s {
                "manifest.json" => without_timestamp(&bytes),
                "bench.csv" => without_runtimes(&bytes),
                _ => bytes,
            };
            (s.to_string(), bytes)
        })
        .collect()
}

fn determinism(dir: &Path) -> Outcome {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let fx = |n: &str| fixtures.join(n).to_str().unwrap().to_string();
    let p = |n: &str| dir.join(n).to_str().unwrap().to_string();
    let est = p("det_est");
    let cases: Vec<(Vec<String>, String, Vec<&str>)> = vec![
        (
            ["estimate", &fx("toy_observations.csv"), &fx("toy_groups.txt"), "--header", "--mu1", "0.1", "--mu2", "2", "--out", &est].map(String::from).to_vec(),
            est.clone(),
            vec!["theta.csv", "metrics.json", "manifest.json"],
        ),
        (
            ["eval", &fx("karate_adjacency.csv"), &fx("karate_factions.txt"), "--out", &p("det_eval")].map(String::from).to_vec(),
            p("det_eval"),
            vec!["metrics.json", "manifest.json"],
        ),
        (
            ["synth", "--scenario", "bias", "--p", "12", "--avg-degree", "3", "--betas", "0,0.5", "--seeds", "2", "--methods", "GL,FGL,NFGL,RWGL-150", "--fgl-mu2", "1,10", "--nfgl-mu2", "1", "--no-timing", "--out", &p("det_synth")]
                .map(String::from)
                .to_vec(),
            p("det_synth"),
            vec!["sweep.csv", "summary.csv", "data_bias.csv", "manifest.json"],
        ),
        (
            ["bench", "--p", "12,16", "--seeds", "1", "--iters", "5", "--out", &p("det_bench")].map(String::from).to_vec(),
            p("det_bench"),
            vec!["bench.csv", "manifest.json"],
        ),
        (
            ["replay", &format!("{est}.manifest.json"), "--out", &p("det_replay")].map(String::from).to_vec(),
            p("det_replay"),
            vec!["theta.csv", "metrics.json", "manifest.json"],
        ),
    ];
    let mut mismatches = Vec::new();
    for (args, prefix, suffixes) in &cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let mut snaps = Vec::new();
        for _ in 0..2 {
            if let Err(e) = run_cli(&args) {
                return outcome(false, format!("{} failed: {}", args[0], e.trim()));
            }
            snaps.push(snapshot(Path::new(prefix), suffixes));
        }
        for ((name, a), (_, b)) in snaps[0].iter().zip(&snaps[1]) {
            if a.is_empty() || a != b {
                mismatches.push(format!("{} {name}", args[0]));
            }
        }
    }
    let n = cases.len();
    if mismatches.is_empty() {
        outcome(true, format!("{n} commands reproduced byte for byte"))
    } else {
        outcome(false, format!("differences in {}", mismatches.join(", ")))
    }
}

// ---------------------------------------------------------------- 9

fn random_feasible(rng: &mut ChaCha8Rng, p: usize, alpha: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
    let q = g.qr().q();
    let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(p, |_, _| rng.random_range(0.0..alpha.sqrt())));
    let m = &q * lam * q.transpose();
    (&m + m.transpose()) * 0.5
}

fn projection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let alpha = 4.0;
    let mut failures = 0;
    let mut idem = 0.0f64;
    for _ in 0..20 {
        let x = random_sym(&mut rng, 6, 0.0).scale(3.0);
        let proj = project_feasible(&x, alpha).unwrap();
        let ev = linalg::eigenvalues(&proj).unwrap();
        let feasible = ev[0] >= -1e-10 && ev[5] <= alpha.sqrt() + 1e-10;
        idem = idem.max((&project_feasible(&proj, alpha).unwrap() - &proj).frobenius_norm());
        let d = (x.as_matrix() - proj.as_matrix()).norm();
        let beaten = (0..1000).any(|_| (x.as_matrix() - random_feasible(&mut rng, 6, alpha)).norm() < d);
        failures += usize::from(!feasible || beaten);
    }
    outcome(failures == 0 && idem <= 1e-10, format!("{failures} failed trials, idempotence gap {idem:.1e}"))
}

// ----------------------------------------------------------------

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let criteria: Vec<(&str, Check)> = vec![
        ("gradient correctness", Box::new(gradients)),
        ("accelerated convergence bound", Box::new(convergence)),
        ("graphical lasso reduction", Box::new(glasso_reduction)),
        ("fairness-accuracy tradeoff under injected bias", Box::new(bias_tradeoff)),
        ("error decreases with sample size", Box::new(error_rate)),
        ("karate club scenario", Box::new(karate)),
        ("bias metric hand values", Box::new(hand_values)),
        ("runtime scaling", Box::new(|| scaling(dir.path()))),
        ("projection correctness", Box::new(projection)),
        ("CLI determinism", Box::new(|| determinism(dir.path()))),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != i + 1) {
            continue;
        }
        let o = check();
        failed += usize::from(!o.pass);
        println!("criterion {}: {} {name} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
