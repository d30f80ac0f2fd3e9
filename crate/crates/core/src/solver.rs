//! Penalized maximum-likelihood objective and its accelerated proximal-gradient solver.
//!
//! The problem is
//!
//! ```text
//! minimize   tr(S T) - log det(T + eps I) + mu1 ||T_offdiag||_1 + mu2 R(T)
//! subject to T PSD, ||T||_2^2 <= alpha
//! ```
//!
//! with `R` one of the bias metrics in [`crate::fairness`]. Each iteration takes
//! a gradient step on the smooth part from the extrapolated point, soft-thresholds
//! the off-diagonal entries, projects onto the feasible set, and updates the
//! momentum sequence `t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2`.

use crate::error::{Error, Result};
use crate::fairness;
use crate::linalg;
use crate::model::{
    EstimateResult, GroupAssignment, PenaltyKind, SolverConfig, StepRule, StopRule, SymMatrix,
};

/// Eigenvalue tolerance when checking that an input covariance is PSD.
pub const PSD_TOLERANCE: f64 = 1e-8;

fn check_inputs(sigma_hat: &SymMatrix, z: &GroupAssignment) -> Result<()> {
    if sigma_hat.dim() != z.p() {
        return Err(Error::DimensionMismatch {
            expected: z.p(),
            actual: sigma_hat.dim(),
        });
    }
    Ok(())
}

/// The smooth part `f(T) = tr(S T) - log det(T + eps I) + mu2 R(T)`.
#[derive(Debug, Clone)]
struct SmoothPart<'a> {
    sigma_hat: &'a SymMatrix,
    z: &'a GroupAssignment,
    epsilon: f64,
    mu2: f64,
    penalty: PenaltyKind,
}

impl<'a> SmoothPart<'a> {
    fn new(sigma_hat: &'a SymMatrix, z: &'a GroupAssignment, cfg: &SolverConfig) -> Self {
        Self {
            sigma_hat,
            z,
            epsilon: cfg.epsilon,
            mu2: cfg.effective_mu2(),
            penalty: cfg.penalty,
        }
    }

    fn penalty_value(&self, theta: &SymMatrix) -> f64 {
        if self.mu2 == 0.0 {
            return 0.0;
        }
        match self.penalty {
            PenaltyKind::None => 0.0,
            PenaltyKind::GroupDp => self.mu2 * fairness::bias_group(theta, self.z),
            PenaltyKind::NodeDp => self.mu2 * fairness::bias_node(theta, self.z),
        }
    }

    fn penalty_grad(&self, theta: &SymMatrix) -> Option<SymMatrix> {
        if self.mu2 == 0.0 {
            return None;
        }
        match self.penalty {
            PenaltyKind::None => None,
            PenaltyKind::GroupDp => Some(fairness::grad_bias_group(theta, self.z).scale(self.mu2)),
            PenaltyKind::NodeDp => Some(fairness::grad_bias_node(theta, self.z).scale(self.mu2)),
        }
    }

    fn value(&self, theta: &SymMatrix) -> Result<f64> {
        let log_det = linalg::log_det_spd(&theta.add_diagonal(self.epsilon))?;
        Ok(self.sigma_hat.dot(theta) - log_det + self.penalty_value(theta))
    }

    fn value_and_grad(&self, theta: &SymMatrix) -> Result<(f64, SymMatrix)> {
        let factor = linalg::spd_factor(&theta.add_diagonal(self.epsilon))?;
        let value = self.sigma_hat.dot(theta) - factor.log_det + self.penalty_value(theta);
        let mut grad = self.sigma_hat - &factor.inverse;
        if let Some(pg) = self.penalty_grad(theta) {
            grad = &grad + &pg;
        }
        Ok((value, grad))
    }
}

/// Full objective `F(T)`.
pub fn objective(
    theta: &SymMatrix,
    sigma_hat: &SymMatrix,
    z: &GroupAssignment,
    cfg: &SolverConfig,
) -> Result<f64> {
    check_inputs(sigma_hat, z)?;
    let f = SmoothPart::new(sigma_hat, z, cfg).value(theta)?;
    Ok(f + cfg.mu1 * theta.offdiag_l1())
}

/// Gradient of the smooth part: `S - (T + eps I)^{-1}` plus `mu2` times the bias gradient.
pub fn smooth_grad(
    theta: &SymMatrix,
    sigma_hat: &SymMatrix,
    z: &GroupAssignment,
    cfg: &SolverConfig,
) -> Result<SymMatrix> {
    check_inputs(sigma_hat, z)?;
    Ok(SmoothPart::new(sigma_hat, z, cfg).value_and_grad(theta)?.1)
}

/// Value of the smooth part `f`, without the l1 term.
pub fn smooth_value(
    theta: &SymMatrix,
    sigma_hat: &SymMatrix,
    z: &GroupAssignment,
    cfg: &SolverConfig,
) -> Result<f64> {
    check_inputs(sigma_hat, z)?;
    SmoothPart::new(sigma_hat, z, cfg).value(theta)
}

/// Off-diagonal soft-thresholding `sign(x) max(|x| - lambda, 0)`; the diagonal is untouched.
pub fn soft_threshold(x: &SymMatrix, lambda: f64) -> SymMatrix {
    if lambda == 0.0 {
        return x.clone();
    }
    x.map_offdiag(|v| {
        let m = v.abs() - lambda;
        if m > 0.0 {
            m.copysign(v)
        } else {
            0.0
        }
    })
}

/// Frobenius projection onto `{T PSD, ||T||_2 <= sqrt(alpha)}` by clipping eigenvalues to `[0, sqrt(alpha)]`.
///
/// Points that are already feasible (Cholesky succeeds and the row-sum bound
/// is below `sqrt(alpha)`) are returned unchanged without a decomposition.
pub fn project_feasible(x: &SymMatrix, alpha: f64) -> Result<SymMatrix> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    let cap = alpha.sqrt();
    if linalg::inf_norm(x) <= cap && linalg::is_positive_definite(x) {
        return Ok(x.clone());
    }
    let eig = linalg::eigen(x)?;
    Ok(eig.recompose_with(|v| v.max(0.0).min(cap)))
}

/// Next momentum scalar `(1 + sqrt(1 + 4 t^2)) / 2`.
pub fn next_momentum(t: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
}

/// Global Lipschitz constant of the smooth part for this configuration.
pub fn lipschitz_constant(z: &GroupAssignment, cfg: &SolverConfig) -> Result<f64> {
    match cfg.penalty {
        PenaltyKind::None => Ok(1.0 / (cfg.epsilon * cfg.epsilon)),
        PenaltyKind::GroupDp => {
            fairness::lipschitz_group(z, cfg.effective_mu2(), cfg.epsilon, cfg.lipschitz_mode)
        }
        PenaltyKind::NodeDp => fairness::lipschitz_node(z, cfg.effective_mu2(), cfg.epsilon),
    }
}

/// Resolves the spectral bound: the configured one, or `(10 / max(lambda_min(S), 1e-3))^2`.
pub fn resolve_alpha(sigma_hat: &SymMatrix, cfg: &SolverConfig) -> Result<f64> {
    match cfg.alpha {
        Some(a) => Ok(a),
        None => Ok(SolverConfig::default_alpha(linalg::min_eigenvalue(sigma_hat)?)),
    }
}

/// Default starting point: the projection of `diag(1 / (S_ii + eps))`.
pub fn default_init(sigma_hat: &SymMatrix, epsilon: f64, alpha: f64) -> Result<SymMatrix> {
    let diag: Vec<f64> = sigma_hat.diagonal().iter().map(|s| 1.0 / (s + epsilon)).collect();
    project_feasible(&SymMatrix::from_diagonal(&diag), alpha)
}

/// Iterate bookkeeping for the accelerated scheme.
#[derive(Debug, Clone)]
pub struct SolverState {
    /// Previous projected iterate.
    pub theta_prev: SymMatrix,
    /// Current projected iterate.
    pub theta_curr: SymMatrix,
    /// Extrapolated point where the next gradient is taken.
    pub theta_momentum: SymMatrix,
    pub t_curr: f64,
    pub k: usize,
}

impl SolverState {
    pub fn new(init: SymMatrix) -> Self {
        Self {
            theta_prev: init.clone(),
            theta_curr: init.clone(),
            theta_momentum: init,
            t_curr: 1.0,
            k: 1,
        }
    }

    /// Accepts a new projected iterate and extrapolates.
    pub fn advance(&mut self, next: SymMatrix) {
        let t_next = next_momentum(self.t_curr);
        let beta = (self.t_curr - 1.0) / t_next;
        let step = &next - &self.theta_curr;
        self.theta_momentum = &next + &step.scale(beta);
        self.theta_prev = std::mem::replace(&mut self.theta_curr, next);
        self.t_curr = t_next;
        self.k += 1;
    }

    /// Drops the momentum: extrapolate from the current iterate only.
    pub fn reset_momentum(&mut self) {
        self.theta_momentum = self.theta_curr.clone();
        self.t_curr = 1.0;
    }
}

/// What an observer sees after each iteration.
#[derive(Debug)]
pub struct IterationView<'a> {
    pub k: usize,
    pub theta: &'a SymMatrix,
    pub objective: f64,
    pub lipschitz: f64,
}

/// Solves the penalized problem. `init`, when given, must be feasible.
pub fn fista_solve(
    sigma_hat: &SymMatrix,
    z: &GroupAssignment,
    cfg: &SolverConfig,
    init: Option<&SymMatrix>,
) -> Result<EstimateResult> {
    fista_solve_observed(sigma_hat, z, cfg, init, |_| {})
}

/// [`fista_solve`] with a callback invoked after every iteration.
pub fn fista_solve_observed(
    sigma_hat: &SymMatrix,
    z: &GroupAssignment,
    cfg: &SolverConfig,
    init: Option<&SymMatrix>,
    mut observe: impl FnMut(&IterationView<'_>),
) -> Result<EstimateResult> {
    cfg.validate()?;
    check_inputs(sigma_hat, z)?;
    let eigs = linalg::eigenvalues(sigma_hat)?;
    if eigs[0] < -PSD_TOLERANCE {
        return Err(Error::CovarianceNotPsd { min_eigenvalue: eigs[0] });
    }
    let alpha = cfg.alpha.unwrap_or_else(|| SolverConfig::default_alpha(eigs[0]));
    let global_l = lipschitz_constant(z, cfg)?;
    if !(global_l > 0.0 && global_l.is_finite()) {
        return Err(Error::InvalidConfig(format!("Lipschitz constant must be positive, got {global_l}")));
    }

    let start = match init {
        Some(t) => {
            if t.dim() != z.p() {
                return Err(Error::DimensionMismatch { expected: z.p(), actual: t.dim() });
            }
            let ev = linalg::eigenvalues(t)?;
            let top = ev[ev.len() - 1].abs().max(ev[0].abs());
            if ev[0] < -PSD_TOLERANCE || top * top > alpha * (1.0 + 1e-8) {
                return Err(Error::InvalidArgument("initial point is not feasible".into()));
            }
            t.clone()
        }
        None => default_init(sigma_hat, cfg.epsilon, alpha)?,
    };

    let smooth = SmoothPart::new(sigma_hat, z, cfg);
    let mut lip = match cfg.step {
        StepRule::Lipschitz => global_l,
        StepRule::Backtracking { .. } => {
            // curvature of -log det at the start, plus the penalty share of the global constant
            let lam_min = linalg::min_eigenvalue(&start)?.max(0.0) + cfg.epsilon;
            let penalty_share = global_l - 1.0 / (cfg.epsilon * cfg.epsilon);
            (1.0 / (lam_min * lam_min) + penalty_share).min(global_l)
        }
    };

    let mut state = SolverState::new(start);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut resets = 0usize;
    let mut prev_objective = f64::INFINITY;

    for k in 1..=cfg.max_iter {
        if let StepRule::Backtracking { shrink, .. } = cfg.step {
            if k > 1 {
                lip = (lip * shrink).max(f64::MIN_POSITIVE);
            }
        }
        let (fy, grad) = match smooth.value_and_grad(&state.theta_momentum) {
            Ok(v) => v,
            Err(Error::NotPositiveDefinite) => {
                // the extrapolated point left the domain of log det
                resets += 1;
                state.reset_momentum();
                smooth.value_and_grad(&state.theta_momentum)?
            }
            Err(e) => return Err(e),
        };

        let (candidate, f_candidate) = loop {
            let step = &state.theta_momentum - &grad.scale(1.0 / lip);
            let x = project_feasible(&soft_threshold(&step, cfg.mu1 / lip), alpha)?;
            let fx = match smooth.value(&x) {
                Ok(v) => v,
                Err(Error::NotPositiveDefinite) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            match cfg.step {
                StepRule::Lipschitz => break (x, fx),
                StepRule::Backtracking { growth, .. } => {
                    let d = &x - &state.theta_momentum;
                    let model = fy + grad.dot(&d) + 0.5 * lip * d.dot(&d);
                    let slack = 1e-12 * (1.0 + fy.abs());
                    if fx <= model + slack || lip >= global_l {
                        break (x, fx);
                    }
                    lip = (lip * growth).min(global_l);
                }
            }
        };
        if !f_candidate.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }

        let objective = f_candidate + cfg.mu1 * candidate.offdiag_l1();
        trace.push(objective);
        observe(&IterationView {
            k,
            theta: &candidate,
            objective,
            lipschitz: lip,
        });

        let change = match cfg.stop {
            StopRule::IterateChange => {
                let denom = state.theta_curr.frobenius_norm().max(1e-12);
                (&candidate - &state.theta_curr).frobenius_norm() / denom
            }
            StopRule::ObjectiveChange => {
                (objective - prev_objective).abs() / prev_objective.abs().max(1e-12)
            }
        };
        let restart = cfg.restart && objective > prev_objective;
        prev_objective = objective;
        state.advance(candidate);
        if restart {
            state.reset_momentum();
        }
        if change < cfg.tol {
            converged = true;
            break;
        }
    }

    let final_objective = *trace.last().expect("max_iter >= 1");
    Ok(EstimateResult {
        iterations: trace.len(),
        theta: state.theta_curr,
        converged,
        objective_trace: trace,
        final_objective,
        lipschitz_used: lip,
        alpha_used: alpha,
        momentum_resets: resets,
    })
}
