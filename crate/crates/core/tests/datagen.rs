//! Statistical checks of the generators.

use fairglasso::datagen::{self, ErGraphSpec, FairGraphSpec, GroupMode, RngSeed};
use fairglasso::fairness::{bias_group, normalized_bias};
use fairglasso::{linalg, SymMatrix};

#[test]
fn er_edge_counts_match_expectation() {
    let (p, d) = (100usize, 10.0);
    let pairs = (p * (p - 1) / 2) as f64;
    let prob = d / (p - 1) as f64;
    let (mean, sd) = (pairs * prob, (pairs * prob * (1.0 - prob)).sqrt());
    let mut total = 0.0;
    for seed in 0..50 {
        let e = datagen::er_graph(p, d, RngSeed(seed)).unwrap().offdiag_nnz() as f64;
        assert!((e - mean).abs() <= 4.0 * sd, "seed {seed}: {e} edges");
        total += e;
    }
    // the mean of 50 draws has standard deviation sd / sqrt(50)
    assert!((total / 50.0 - mean).abs() <= 3.0 * sd / 50f64.sqrt());
}

#[test]
fn within_and_across_densities_match() {
    let (p, d) = (60usize, 6.0);
    let z = datagen::assign_groups(p, 2, GroupMode::Contiguous, RngSeed(0)).unwrap();
    let (mut within, mut across, mut nw, mut na) = (0.0, 0.0, 0.0, 0.0);
    for seed in 0..40 {
        let a = datagen::er_graph(p, d, RngSeed(seed)).unwrap();
        for i in 0..p {
            for j in i + 1..p {
                let e = f64::from(u8::from(a.get(i, j) != 0.0));
                if z.same_group(i, j) {
                    within += e;
                    nw += 1.0;
                } else {
                    across += e;
                    na += 1.0;
                }
            }
        }
    }
    let prob = d / (p - 1) as f64;
    let se = (prob * (1.0 - prob) * (1.0 / nw + 1.0 / na)).sqrt();
    assert!((within / nw - across / na).abs() <= 4.0 * se);
}

#[test]
fn sample_covariance_converges() {
    let theta = SymMatrix::identity(3);
    let err_at = |n: usize, seed: u64| {
        let x = datagen::sample_gaussian(&theta, n, 0.0, RngSeed(seed)).unwrap();
        let s = datagen::sample_covariance(&x, false, false).unwrap();
        let mean_dev = (0..3).map(|j| x.column(j).mean().abs()).fold(0.0, f64::max);
        ((&s - &theta).as_matrix().amax(), mean_dev)
    };
    let n = 100_000;
    let (cov, mean) = err_at(n, 1);
    assert!(cov < 0.02, "{cov}");
    assert!(mean < 4.0 / (n as f64).sqrt(), "{mean}");

    // averaged error shrinks like n^{-1/2}: a 100x larger sample cuts it about 10x
    let avg = |n: usize| (0..10).map(|s| err_at(n, 100 + s).0).sum::<f64>() / 10.0;
    let ratio = avg(1_000) / avg(100_000);
    assert!((5.0..20.0).contains(&ratio), "{ratio}");
}

#[test]
fn bias_injection_raises_group_bias() {
    let spec = FairGraphSpec { p: 30, g: 2, avg_degree: 4.0, diag_load: 1.0 };
    for seed in 0..50 {
        let gt = datagen::fair_ground_truth(spec, RngSeed(seed)).unwrap();
        let biased = datagen::biased_precision(&gt, RngSeed(seed)).unwrap();
        assert!(bias_group(&biased, &gt.z) > bias_group(&gt.theta0, &gt.z), "seed {seed}");
    }
}

#[test]
fn injected_covariances_stay_positive_definite() {
    let spec = FairGraphSpec { p: 30, g: 2, avg_degree: 4.0, diag_load: 1.0 };
    for seed in 0..20 {
        let gt = datagen::fair_ground_truth(spec, RngSeed(seed)).unwrap();
        for k in 0..=5 {
            let sigma = datagen::inject_bias(&gt, k as f64 / 10.0, RngSeed(seed)).unwrap();
            assert!(linalg::min_eigenvalue(&sigma).unwrap() > 0.0, "seed {seed}, beta {k}/10");
        }
        assert_eq!(datagen::inject_bias(&gt, 0.0, RngSeed(seed)).unwrap(), gt.sigma0);
    }
}

#[test]
fn fair_ground_truth_is_fair() {
    for seed in 0..20 {
        let gt = datagen::fair_ground_truth(FairGraphSpec { p: 50, g: 2, avg_degree: 10.0, diag_load: 1.0 }, RngSeed(seed)).unwrap();
        assert!(normalized_bias(&gt.theta0, &gt.z).unwrap() < datagen::FAIR_NORMALIZED_BIAS);
        assert!(linalg::min_eigenvalue(&gt.theta0).unwrap() > 0.0);
    }
}

#[test]
fn relabelling_groups_leaves_bias_distribution_unchanged() {
    // contiguous and shuffled group labels see the same ER law, so mean H agrees
    let mean_h = |mode: GroupMode| {
        (0..200)
            .map(|seed| {
                let gt = datagen::er_ground_truth(ErGraphSpec { p: 20, avg_degree: 4.0, groups: mode, ..Default::default() }, RngSeed(seed)).unwrap();
                bias_group(&gt.theta0, &gt.z)
            })
            .collect::<Vec<_>>()
    };
    let (a, b) = (mean_h(GroupMode::Contiguous), mean_h(GroupMode::Random));
    let stats = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        (m, var / v.len() as f64)
    };
    let ((ma, va), (mb, vb)) = (stats(&a), stats(&b));
    assert!((ma - mb).abs() <= 4.0 * (va + vb).sqrt(), "{ma} vs {mb}");
}

#[test]
fn generators_are_deterministic() {
    let spec = FairGraphSpec { p: 40, g: 3, avg_degree: 5.0, diag_load: 1.0 };
    let a = datagen::fair_ground_truth(spec, RngSeed(9)).unwrap();
    let b = datagen::fair_ground_truth(spec, RngSeed(9)).unwrap();
    assert_eq!(a, b);
    let xa = datagen::sample_from_covariance(&a.sigma0, 50, RngSeed(3)).unwrap();
    let xb = datagen::sample_from_covariance(&b.sigma0, 50, RngSeed(3)).unwrap();
    assert_eq!(xa, xb);
    assert_ne!(xa, datagen::sample_from_covariance(&a.sigma0, 50, RngSeed(4)).unwrap());
}
