use serde::{Deserialize, Serialize};

use super::SymMatrix;
use crate::error::{Error, Result};

/// Which bias penalty enters the smooth part of the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyKind {
    /// Plain graphical lasso; `mu2` is ignored.
    None,
    /// Group-wise demographic-parity gap `H`.
    #[default]
    GroupDp,
    /// Node-wise gap `H_node`.
    NodeDp,
}

/// Which Lipschitz constant to use for the group penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LipschitzMode {
    /// Largest eigenvalue of the penalty Hessian, by power iteration.
    Exact,
    /// Sum of squared spectral norms of the pair matrices.
    #[default]
    UpperBound,
}

/// How the proximal-gradient step length is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// Fixed step `1/L` with `L` the global Lipschitz constant of the smooth part.
    Lipschitz,
    /// Backtracking on a local estimate of `L`: each iteration first scales the
    /// previous estimate by `shrink`, then multiplies it by `growth` until the
    /// quadratic upper bound holds. Never exceeds the global constant.
    /// `shrink = 1` keeps the estimate nondecreasing.
    Backtracking { growth: f64, shrink: f64 },
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::Backtracking { growth: 2.0, shrink: 0.8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// `||X_k - X_{k-1}||_F / max(||X_{k-1}||_F, 1e-12) < tol`.
    #[default]
    IterateChange,
    /// `|F_k - F_{k-1}| / max(|F_{k-1}|, 1e-12) < tol`.
    ObjectiveChange,
}

/// Hyperparameters of the penalized likelihood and of the accelerated solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Weight of the off-diagonal l1 penalty.
    pub mu1: f64,
    /// Weight of the bias penalty.
    pub mu2: f64,
    /// Loading in `log det(Theta + epsilon I)`.
    pub epsilon: f64,
    /// Bound on the squared spectral norm. `None` derives it from the sample
    /// covariance as `(10 / max(lambda_min, 1e-3))^2`.
    pub alpha: Option<f64>,
    pub penalty: PenaltyKind,
    pub max_iter: usize,
    pub tol: f64,
    pub lipschitz_mode: LipschitzMode,
    pub step: StepRule,
    pub stop: StopRule,
    /// Function-value momentum restart. Not part of the plain accelerated scheme.
    pub restart: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mu1: 0.0,
            mu2: 0.0,
            epsilon: 1e-4,
            alpha: None,
            penalty: PenaltyKind::GroupDp,
            max_iter: 5000,
            tol: 1e-6,
            lipschitz_mode: LipschitzMode::UpperBound,
            step: StepRule::default(),
            stop: StopRule::IterateChange,
            restart: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.mu1 >= 0.0 && self.mu1.is_finite()) {
            return bad(format!("mu1 must be a finite nonnegative number, got {}", self.mu1));
        }
        if !(self.mu2 >= 0.0 && self.mu2.is_finite()) {
            return bad(format!("mu2 must be a finite nonnegative number, got {}", self.mu2));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return bad(format!("alpha must be positive, got {a}"));
            }
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive".into());
        }
        if let StepRule::Backtracking { growth, shrink } = self.step {
            if !(growth > 1.0 && growth.is_finite()) {
                return bad(format!("backtracking growth must exceed 1, got {growth}"));
            }
            if !(shrink > 0.0 && shrink <= 1.0) {
                return bad(format!("backtracking shrink must lie in (0, 1], got {shrink}"));
            }
        }
        Ok(())
    }

    /// The bias weight that actually applies, zero when the penalty is off.
    pub fn effective_mu2(&self) -> f64 {
        match self.penalty {
            PenaltyKind::None => 0.0,
            _ => self.mu2,
        }
    }

    /// Default spectral bound for a sample covariance with smallest eigenvalue `lambda_min`.
    pub fn default_alpha(lambda_min: f64) -> f64 {
        (10.0 / lambda_min.max(1e-3)).powi(2)
    }
}

/// Output of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub theta: SymMatrix,
    pub iterations: usize,
    pub converged: bool,
    /// `F(Theta_k)` for `k = 1..=iterations`.
    pub objective_trace: Vec<f64>,
    pub final_objective: f64,
    /// Global constant for the fixed rule, final local estimate for backtracking.
    pub lipschitz_used: f64,
    pub alpha_used: f64,
    /// Number of times the extrapolated point left the domain and momentum was reset.
    pub momentum_resets: usize,
}

/// One row of a benchmark sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub method: String,
    pub p: usize,
    pub n: usize,
    pub g: usize,
    pub seed: u64,
    pub mu1: f64,
    pub mu2: f64,
    pub beta: Option<f64>,
    pub error: f64,
    pub bias: f64,
    pub runtime_s: f64,
    /// Set when the run failed; `error` and `bias` are NaN in that case.
    pub failure: Option<String>,
}

impl ExperimentRecord {
    pub fn is_ok(&self) -> bool {
        self.failure.is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        SolverConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let base = SolverConfig::default();
        for cfg in [
            SolverConfig { epsilon: 0.0, ..base.clone() },
            SolverConfig { alpha: Some(-1.0), ..base.clone() },
            SolverConfig { tol: 0.0, ..base.clone() },
            SolverConfig { mu1: -0.1, ..base.clone() },
            SolverConfig { mu2: f64::NAN, ..base.clone() },
            SolverConfig { max_iter: 0, ..base.clone() },
            SolverConfig { step: StepRule::Backtracking { growth: 1.0, shrink: 1.0 }, ..base.clone() },
        ] {
            assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))), "{cfg:?}");
        }
    }

    #[test]
    fn penalty_none_zeroes_mu2() {
        let cfg = SolverConfig { mu2: 3.0, penalty: PenaltyKind::None, ..Default::default() };
        assert_eq!(cfg.effective_mu2(), 0.0);
    }

    #[test]
    fn default_alpha_floors_small_eigenvalues() {
        assert_eq!(SolverConfig::default_alpha(0.5), 400.0);
        assert!((SolverConfig::default_alpha(0.0) - 1e8).abs() < 1e-4);
    }
}
