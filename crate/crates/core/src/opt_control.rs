//! Online gradient control toward the time-varying optimizers of a convex
//! cost, with a certified step-size bound and numerically checkable
//! Lyapunov decrease diagnostics.
//!
//! The controller is `u_{k+1} = u_k - eta (grad_phi(u_k) + G' grad_psi(y_k))`
//! and consumes only the estimated steady-state gain and output
//! measurements. The true plant matrices enter exclusively through the
//! evaluation path: optimizers, tracking errors and the decrease
//! diagnostics.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::linalg::{self, spectral_norm};
use crate::lti::{solve_discrete_lyapunov, LtiSystem};

/// Input-norm threshold at which a closed-loop run is declared diverged.
const DIVERGENCE_LIMIT: f64 = 1e8;

/// Costs usable by the controller: differentiable input and output losses
/// with declared smoothness constants.
///
/// `pl_constant` may be a declared lower bound on the true PL constant of
/// the composite objective `phi(u) + psi(G u + H w)`.
pub trait CostModel {
    fn phi(&self, u: &DVector<f64>) -> f64;
    fn psi(&self, y: &DVector<f64>) -> f64;
    fn grad_phi(&self, u: &DVector<f64>) -> DVector<f64>;
    fn grad_psi(&self, y: &DVector<f64>) -> DVector<f64>;
    /// Lipschitz constant of `grad_phi`.
    fn lipschitz_phi(&self) -> f64;
    /// Lipschitz constant of `grad_psi`.
    fn lipschitz_psi(&self) -> f64;
    /// PL constant of the composite objective for the given gain map.
    fn pl_constant(&self, g: &DMatrix<f64>) -> f64;
}

/// Quadratic input/output cost `u' Q_u u + (y - y_ref)' Q_y (y - y_ref)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticCost {
    q_u: DMatrix<f64>,
    q_y: DMatrix<f64>,
    y_ref: DVector<f64>,
}

impl QuadraticCost {
    pub fn new(q_u: DMatrix<f64>, q_y: DMatrix<f64>, y_ref: DVector<f64>) -> Result<Self> {
        if q_y.nrows() != y_ref.len() {
            return Err(Error::DimensionMismatch(
                "Q_y and y_ref dimensions disagree".into(),
            ));
        }
        if !linalg::is_symmetric_positive_definite(&q_u, 1e-12) {
            return Err(Error::ContractViolation(
                "Q_u must be symmetric positive definite".into(),
            ));
        }
        if !linalg::is_symmetric_positive_definite(&q_y, 1e-12) {
            return Err(Error::ContractViolation(
                "Q_y must be symmetric positive definite".into(),
            ));
        }
        Ok(Self { q_u, q_y, y_ref })
    }

    pub fn q_u(&self) -> &DMatrix<f64> {
        &self.q_u
    }
    pub fn q_y(&self) -> &DMatrix<f64> {
        &self.q_y
    }
    pub fn y_ref(&self) -> &DVector<f64> {
        &self.y_ref
    }

    pub fn input_dim(&self) -> usize {
        self.q_u.nrows()
    }
    pub fn output_dim(&self) -> usize {
        self.q_y.nrows()
    }
}

impl CostModel for QuadraticCost {
    fn phi(&self, u: &DVector<f64>) -> f64 {
        (u.transpose() * &self.q_u * u)[(0, 0)]
    }

    fn psi(&self, y: &DVector<f64>) -> f64 {
        let d = y - &self.y_ref;
        (d.transpose() * &self.q_y * &d)[(0, 0)]
    }

    fn grad_phi(&self, u: &DVector<f64>) -> DVector<f64> {
        2.0 * &self.q_u * u
    }

    fn grad_psi(&self, y: &DVector<f64>) -> DVector<f64> {
        2.0 * &self.q_y * (y - &self.y_ref)
    }

    fn lipschitz_phi(&self) -> f64 {
        2.0 * linalg::max_symmetric_eigenvalue(&self.q_u)
    }

    fn lipschitz_psi(&self) -> f64 {
        2.0 * linalg::max_symmetric_eigenvalue(&self.q_y)
    }

    fn pl_constant(&self, g: &DMatrix<f64>) -> f64 {
        let normal = &self.q_u + g.transpose() * &self.q_y * g;
        linalg::min_symmetric_eigenvalue(&normal)
    }
}

/// Compact set of optimizers. The quadratic costs shipped here are strongly
/// convex, so the set is a singleton; the Hausdorff distance between
/// consecutive sets then reduces to the optimizer displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerSet {
    points: Vec<DVector<f64>>,
}

impl OptimizerSet {
    pub fn singleton(u: DVector<f64>) -> Self {
        Self { points: vec![u] }
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    /// Hausdorff distance between two nonempty compact sets of points.
    pub fn hausdorff_distance(&self, other: &OptimizerSet) -> f64 {
        let directed = |from: &[DVector<f64>], to: &[DVector<f64>]| -> f64 {
            from.iter()
                .map(|a| {
                    to.iter()
                        .map(|b| (a - b).norm())
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0_f64, f64::max)
        };
        directed(&self.points, &other.points).max(directed(&other.points, &self.points))
    }
}

/// One step of the online gradient controller.
pub fn controller_step(
    u: &DVector<f64>,
    y: &DVector<f64>,
    g_hat: &DMatrix<f64>,
    cost: &dyn CostModel,
    eta: f64,
) -> Result<DVector<f64>> {
    if g_hat.nrows() != y.len() || g_hat.ncols() != u.len() {
        return Err(Error::DimensionMismatch(format!(
            "gain is {}x{}, but y has length {} and u has length {}",
            g_hat.nrows(),
            g_hat.ncols(),
            y.len(),
            u.len()
        )));
    }
    if eta < 0.0 {
        return Err(Error::ContractViolation(
            "step size must be nonnegative".into(),
        ));
    }
    Ok(u - eta * (cost.grad_phi(u) + g_hat.transpose() * cost.grad_psi(y)))
}

/// Optimizer of the quadratic steady-state objective for a fixed
/// disturbance: solves `(Q_u + G' Q_y G) u = G' Q_y (y_ref - H w)`.
pub fn optimizer(
    cost: &QuadraticCost,
    g: &DMatrix<f64>,
    h: &DMatrix<f64>,
    w: &DVector<f64>,
) -> Result<DVector<f64>> {
    if h.ncols() != w.len() || h.nrows() != g.nrows() {
        return Err(Error::DimensionMismatch(
            "disturbance map and disturbance dimensions disagree".into(),
        ));
    }
    let normal = &cost.q_u + g.transpose() * &cost.q_y * g;
    let rhs = g.transpose() * &cost.q_y * (&cost.y_ref - h * w);
    normal
        .cholesky()
        .map(|chol| chol.solve(&rhs))
        .ok_or_else(|| {
            Error::ContractViolation(
                "normal matrix of the optimizer is not positive definite".into(),
            )
        })
}

/// Step-size certificate: the constants of the convergence bound together
/// with the Lyapunov pair used to build them.
#[derive(Debug, Clone)]
pub struct StepSizeCertificate {
    pub epsilon: f64,
    pub q: DMatrix<f64>,
    pub p: DMatrix<f64>,
    /// Composite gradient Lipschitz constant `l_phi + ||G||^2 l_psi`.
    pub ell: f64,
    /// `a = 0.5 l_psi^2 ||C||^2 ||G||^2`.
    pub a: f64,
    /// `b = 2 ||A' P Gbar||^2 / (eps lmin(Q)) + ||Gbar' P Gbar||`.
    pub b: f64,
    pub lambda_min_q: f64,
    /// Certified bound `(1 - eps) / (l/2 + b)`.
    pub eta_star: f64,
    /// Step-size bound `2 / l` of the static gradient method.
    pub eta_static: f64,
}

impl StepSizeCertificate {
    /// JSON document with all scalar constants of the certificate.
    pub fn to_json_string(&self) -> String {
        serde_json::json!({
            "epsilon": self.epsilon,
            "ell": self.ell,
            "a": self.a,
            "b": self.b,
            "lambda_min_q": self.lambda_min_q,
            "eta_star": self.eta_star,
            "eta_static": self.eta_static,
        })
        .to_string()
    }
}

/// Computes the step-size certificate for a plant/cost pair.
///
/// When `q` is omitted it is set to `kappa I` with
/// `kappa = 1.01 a / (eps (1 - eps))`, which satisfies the eigenvalue
/// condition with a 1 percent margin. All matrix norms are spectral norms.
pub fn step_size_certificate(
    sys: &LtiSystem,
    cost: &dyn CostModel,
    g: &DMatrix<f64>,
    epsilon: f64,
    q: Option<DMatrix<f64>>,
) -> Result<StepSizeCertificate> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::ContractViolation(
            "epsilon must lie in the open interval (0, 1)".into(),
        ));
    }
    let n = sys.state_dim();
    let g_norm = spectral_norm(g);
    let c_norm = spectral_norm(sys.c());
    let ell = cost.lipschitz_phi() + g_norm.powi(2) * cost.lipschitz_psi();
    let a = 0.5 * cost.lipschitz_psi().powi(2) * c_norm.powi(2) * g_norm.powi(2);
    let required = a / (epsilon * (1.0 - epsilon));

    let q = match q {
        Some(q) => q,
        None => {
            let kappa = if required > 0.0 { 1.01 * required } else { 1.0 };
            DMatrix::identity(n, n) * kappa
        }
    };
    if q.nrows() != n || q.ncols() != n {
        return Err(Error::DimensionMismatch("Q must be n x n".into()));
    }
    let lambda_min_q = linalg::min_symmetric_eigenvalue(&q);
    if lambda_min_q <= required {
        return Err(Error::CertificateCondition {
            lambda_min: lambda_min_q,
            required,
        });
    }

    let p = solve_discrete_lyapunov(sys.a(), &q)?;
    let g_bar = linalg::solve_i_minus_a(sys.a(), sys.b())?;
    let at_p_gbar = sys.a().transpose() * &p * &g_bar;
    let gbar_p_gbar = g_bar.transpose() * &p * &g_bar;
    let b = 2.0 * spectral_norm(&at_p_gbar).powi(2) / (epsilon * lambda_min_q)
        + spectral_norm(&gbar_p_gbar);
    let eta_star = (1.0 - epsilon) / (ell / 2.0 + b);
    let eta_static = 2.0 / ell;

    Ok(StepSizeCertificate {
        epsilon,
        q,
        p,
        ell,
        a,
        b,
        lambda_min_q,
        eta_star,
        eta_static,
    })
}

/// Terminal status of a closed-loop run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedLoopStatus {
    Completed,
    /// The input norm crossed the divergence threshold at this step.
    Diverged {
        step: usize,
    },
}

/// Per-step history of a closed-loop run, including the evaluation-only
/// optimizer trajectory and tracking errors.
#[derive(Debug, Clone)]
pub struct ClosedLoopRecord {
    pub eta: f64,
    pub horizon: usize,
    pub status: ClosedLoopStatus,
    pub inputs: Vec<DVector<f64>>,
    pub states: Vec<DVector<f64>>,
    pub outputs: Vec<DVector<f64>>,
    pub disturbances: Vec<DVector<f64>>,
    pub optimizers: Vec<DVector<f64>>,
    /// `||(x_k, u_k) - (x*_k, u*_k)||` with `x*_k = (I-A)^{-1}(B u*_k + E w_k)`.
    pub tracking_error: Vec<f64>,
    /// Per-step Lyapunov values and decrease flags; empty until a
    /// diagnostic is attached.
    pub lyapunov_u: Vec<f64>,
    pub decrease_ok: Vec<bool>,
}

impl ClosedLoopRecord {
    /// Number of recorded steps (may be shorter than the horizon after a
    /// divergence abort).
    pub fn steps(&self) -> usize {
        self.tracking_error.len()
    }

    /// Stores the output of [`lyapunov_diagnostic`] in the record.
    pub fn attach_diagnostic(&mut self, diag: &[LyapunovStep]) {
        self.lyapunov_u = diag.iter().map(|s| s.value).collect();
        self.decrease_ok = diag.iter().map(|s| s.decrease_ok).collect();
    }

    /// CSV document `k,tracking_error,lyapunov_U,decrease_ok,norm_dw,u_..,y_..`.
    /// Lyapunov columns are left empty when no diagnostic is attached; the
    /// final `norm_dw` cell is empty because it needs the next disturbance.
    pub fn to_csv_string(&self) -> String {
        let m = self.inputs.first().map_or(0, |v| v.len());
        let p = self.outputs.first().map_or(0, |v| v.len());
        let mut out = String::from("k,tracking_error,lyapunov_U,decrease_ok,norm_dw");
        for j in 0..m {
            out.push_str(&format!(",u_{j}"));
        }
        for j in 0..p {
            out.push_str(&format!(",y_{j}"));
        }
        out.push('\n');
        for k in 0..self.steps() {
            let lyap = self
                .lyapunov_u
                .get(k)
                .map(|v| v.to_string())
                .unwrap_or_default();
            let ok = self
                .decrease_ok
                .get(k)
                .map(|v| u8::from(*v).to_string())
                .unwrap_or_default();
            let norm_dw = if k + 1 < self.disturbances.len() {
                (&self.disturbances[k + 1] - &self.disturbances[k])
                    .norm()
                    .to_string()
            } else {
                String::new()
            };
            out.push_str(&format!(
                "{},{},{},{},{}",
                k, self.tracking_error[k], lyap, ok, norm_dw
            ));
            for x in self.inputs[k].iter() {
                out.push_str(&format!(",{x}"));
            }
            for x in self.outputs[k].iter() {
                out.push_str(&format!(",{x}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Runs the plant in closed loop with the gradient controller.
///
/// The controller sees only `g_hat` and the measured outputs. The true
/// system enters through the per-step optimizer and tracking error, which
/// exist for evaluation only.
#[allow(clippy::too_many_arguments)]
pub fn run_closed_loop(
    sys: &LtiSystem,
    cost: &QuadraticCost,
    g_hat: &DMatrix<f64>,
    eta: f64,
    x0: &DVector<f64>,
    u0: &DVector<f64>,
    disturbances: &[DVector<f64>],
    horizon: usize,
) -> Result<ClosedLoopRecord> {
    let (n, m, p) = (sys.state_dim(), sys.input_dim(), sys.output_dim());
    if x0.len() != n || u0.len() != m {
        return Err(Error::DimensionMismatch(
            "x0 or u0 dimension does not match the system".into(),
        ));
    }
    if cost.input_dim() != m || cost.output_dim() != p {
        return Err(Error::DimensionMismatch(
            "cost dimensions do not match the system".into(),
        ));
    }
    if horizon == 0 {
        return Err(Error::ContractViolation("horizon must be positive".into()));
    }
    if disturbances.len() < horizon {
        return Err(Error::InsufficientData {
            needed: horizon,
            got: disturbances.len(),
        });
    }

    // evaluation-only oracle pieces
    let gains = crate::lti::steady_state_gains(sys)?;
    let i_minus_a_lu = (DMatrix::identity(n, n) - sys.a()).lu();
    let normal_chol = (&cost.q_u + gains.g.transpose() * &cost.q_y * &gains.g)
        .cholesky()
        .ok_or_else(|| {
            Error::ContractViolation(
                "normal matrix of the optimizer is not positive definite".into(),
            )
        })?;
    let gt_qy = gains.g.transpose() * &cost.q_y;

    let mut record = ClosedLoopRecord {
        eta,
        horizon,
        status: ClosedLoopStatus::Completed,
        inputs: Vec::with_capacity(horizon),
        states: Vec::with_capacity(horizon),
        outputs: Vec::with_capacity(horizon),
        disturbances: Vec::with_capacity(horizon),
        optimizers: Vec::with_capacity(horizon),
        tracking_error: Vec::with_capacity(horizon),
        lyapunov_u: Vec::new(),
        decrease_ok: Vec::new(),
    };

    let mut x = x0.clone();
    let mut u = u0.clone();
    for (k, w) in disturbances.iter().take(horizon).enumerate() {
        if w.len() != sys.disturbance_dim() {
            return Err(Error::DimensionMismatch(format!(
                "disturbance sample {k} has the wrong dimension"
            )));
        }
        if u.norm() > DIVERGENCE_LIMIT
            || !u.iter().all(|v| v.is_finite())
            || !x.iter().all(|v| v.is_finite())
        {
            record.status = ClosedLoopStatus::Diverged { step: k };
            break;
        }
        let y = sys.c() * &x;

        let u_star = normal_chol.solve(&(&gt_qy * (&cost.y_ref - &gains.h * w)));
        let x_star = i_minus_a_lu
            .solve(&(sys.b() * &u_star + sys.e() * w))
            .ok_or_else(|| Error::IllConditioned("I - A is numerically singular".into()))?;
        let err = ((&x - &x_star).norm_squared() + (&u - &u_star).norm_squared()).sqrt();

        record.inputs.push(u.clone());
        record.states.push(x.clone());
        record.outputs.push(y.clone());
        record.disturbances.push(w.clone());
        record.optimizers.push(u_star);
        record.tracking_error.push(err);

        let u_next = controller_step(&u, &y, g_hat, cost, eta)?;
        x = sys.a() * &x + sys.b() * &u + sys.e() * w;
        u = u_next;
    }
    Ok(record)
}

/// Lyapunov value and decrease flag for one step of a closed-loop record.
#[derive(Debug, Clone, Copy)]
pub struct LyapunovStep {
    /// `U_k = (f_k(u_k) - f_k(u*_k)) / eta + x~_k' P x~_k`.
    pub value: f64,
    /// Whether the certified decrease inequality holds from this step to
    /// the next. Vacuously true at the final step.
    pub decrease_ok: bool,
}

/// Evaluates the certified decrease inequality
/// `U_{k+1} - U_k <= -alpha3(z_k) + sigma(v1, v2)` along a recorded run.
///
/// `alpha3` and `sigma` are assembled from the certificate constants; `v1`
/// is the displacement of the optimizer set and `v2` the disturbance
/// increment. The reported `U_k` is the Lyapunov value under the time-`k`
/// objective; the decrease check evaluates the step-`k` endpoint the same
/// way, with the cost frozen at time `k`, which is the quantity the
/// inequality certifies. For a constant disturbance the two readings
/// coincide. A small relative slack absorbs floating-point noise when both
/// sides approach zero at equilibrium.
pub fn lyapunov_diagnostic(
    sys: &LtiSystem,
    cost: &dyn CostModel,
    g: &DMatrix<f64>,
    h: &DMatrix<f64>,
    record: &ClosedLoopRecord,
    certificate: &StepSizeCertificate,
) -> Result<Vec<LyapunovStep>> {
    let eta = record.eta;
    if eta <= 0.0 {
        return Err(Error::ContractViolation(
            "the Lyapunov diagnostic needs a positive step size".into(),
        ));
    }
    let steps = record.steps();
    if steps == 0 {
        return Ok(Vec::new());
    }

    let g_bar = linalg::solve_i_minus_a(sys.a(), sys.b())?;
    let h_bar = linalg::solve_i_minus_a(sys.a(), sys.e())?;
    let p_mat = &certificate.p;
    let eps = certificate.epsilon;
    let lambda_min_q = certificate.lambda_min_q;

    let c1 = (1.0 - eps) - eta * certificate.ell / 2.0 - eta * certificate.b;
    let c2 = (1.0 - eps) * lambda_min_q - certificate.a / eps;
    let alpha3_coeff = c1.min(c2);
    let a2 = certificate.ell / (2.0 * eta);
    let at_p_hbar = sys.a().transpose() * p_mat * &h_bar;
    let b2 = 2.0 * spectral_norm(&at_p_hbar).powi(2) / (eps * lambda_min_q)
        + spectral_norm(&(h_bar.transpose() * p_mat * &h_bar));
    let b3 = 2.0 * eta.powi(2) * spectral_norm(&(g_bar.transpose() * p_mat * &h_bar)).powi(2) / eps;

    let composite =
        |u: &DVector<f64>, w: &DVector<f64>| -> f64 { cost.phi(u) + cost.psi(&(g * u + h * w)) };
    let x_tilde_at = |k: usize| -> DVector<f64> {
        &record.states[k] - &g_bar * &record.inputs[k] - &h_bar * &record.disturbances[k]
    };

    let mut values = Vec::with_capacity(steps);
    let mut gradients = Vec::with_capacity(steps);
    let mut x_tilde_norms = Vec::with_capacity(steps);
    for k in 0..steps {
        let u = &record.inputs[k];
        let w = &record.disturbances[k];
        let x_tilde = x_tilde_at(k);
        let v = (composite(u, w) - composite(&record.optimizers[k], w)) / eta;
        let w_val = (x_tilde.transpose() * p_mat * &x_tilde)[(0, 0)];
        values.push(v + w_val);
        gradients.push(cost.grad_phi(u) + g.transpose() * cost.grad_psi(&record.outputs[k]));
        x_tilde_norms.push(x_tilde.norm());
    }

    let mut out = Vec::with_capacity(steps);
    for k in 0..steps {
        if k + 1 == steps {
            out.push(LyapunovStep {
                value: values[k],
                decrease_ok: true,
            });
            break;
        }
        let w_k = &record.disturbances[k];
        let x_tilde_next = x_tilde_at(k + 1);
        // endpoint under the time-k objective
        let next_frozen = (composite(&record.inputs[k + 1], w_k)
            - composite(&record.optimizers[k + 1], w_k))
            / eta
            + (x_tilde_next.transpose() * p_mat * &x_tilde_next)[(0, 0)];
        let v1 = OptimizerSet::singleton(record.optimizers[k + 1].clone())
            .hausdorff_distance(&OptimizerSet::singleton(record.optimizers[k].clone()));
        let v2 = (&record.disturbances[k + 1] - w_k).norm();
        let z_sq = gradients[k].norm_squared() + x_tilde_norms[k].powi(2);
        let lhs = next_frozen - values[k];
        let rhs = -alpha3_coeff * z_sq + a2 * v1.powi(2) + (b2 + b3) * v2.powi(2);
        let guard = 1e-9 * (1.0 + values[k].abs() + next_frozen.abs());
        out.push(LyapunovStep {
            value: values[k],
            decrease_ok: lhs <= rhs + guard,
        });
    }
    Ok(out)
}

/// Report of the sampled Lipschitz and PL checks.
#[derive(Debug, Clone)]
pub struct PlLipschitzReport {
    pub samples: usize,
    pub lipschitz_violations: usize,
    pub pl_violations: usize,
    /// Min over pairs of `l ||u - v|| - ||grad f(u) - grad f(v)||`.
    pub worst_lipschitz_margin: f64,
    /// Min over samples of `0.5 ||grad f(u)||^2 - mu (f(u) - f*)`.
    pub worst_pl_margin: f64,
    /// Minimizer of the composite objective found by the internal descent.
    pub minimizer: DVector<f64>,
}

/// Samples the composite objective in a ball around its minimizer and
/// checks the declared Lipschitz constant of the gradient and the declared
/// PL constant. Violations are reported, not raised.
pub fn verify_pl_and_lipschitz(
    cost: &dyn CostModel,
    g: &DMatrix<f64>,
    h: &DMatrix<f64>,
    w: &DVector<f64>,
    samples: usize,
    radius: f64,
    seed: u64,
) -> Result<PlLipschitzReport> {
    if samples < 2 {
        return Err(Error::ContractViolation("need at least 2 samples".into()));
    }
    if radius <= 0.0 {
        return Err(Error::ContractViolation("radius must be positive".into()));
    }
    let m = g.ncols();
    let ell = cost.lipschitz_phi() + spectral_norm(g).powi(2) * cost.lipschitz_psi();
    let mu = cost.pl_constant(g);

    let f = |u: &DVector<f64>| cost.phi(u) + cost.psi(&(g * u + h * w));
    let grad_f =
        |u: &DVector<f64>| cost.grad_phi(u) + g.transpose() * cost.grad_psi(&(g * u + h * w));

    // descend to the minimizer with a backtracked gradient method; the
    // declared l may understate the true constant, so the step adapts
    let mut u_star = DVector::zeros(m);
    let mut step = 0.5 / ell.max(f64::MIN_POSITIVE);
    let mut f_cur = f(&u_star);
    for _ in 0..50_000 {
        let grad = grad_f(&u_star);
        if grad.norm() <= 1e-12 * (1.0 + f_cur.abs()) {
            break;
        }
        let mut candidate = &u_star - step * &grad;
        let mut f_new = f(&candidate);
        let mut backtracks = 0;
        while f_new > f_cur && backtracks < 60 {
            step *= 0.5;
            candidate = &u_star - step * &grad;
            f_new = f(&candidate);
            backtracks += 1;
        }
        u_star = candidate;
        f_cur = f_new;
    }
    let f_star = f_cur;

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let unit = Uniform::new(0.0_f64, 1.0).expect("valid uniform range");
    let draw = |rng: &mut ChaCha20Rng| -> DVector<f64> {
        let dir = DVector::from_fn(m, |_, _| -> f64 { StandardNormal.sample(rng) });
        let norm = dir.norm().max(f64::MIN_POSITIVE);
        let scale = radius * unit.sample(rng).powf(1.0 / m as f64);
        &u_star + (scale / norm) * dir
    };

    let points: Vec<DVector<f64>> = (0..samples).map(|_| draw(&mut rng)).collect();
    let mut report = PlLipschitzReport {
        samples,
        lipschitz_violations: 0,
        pl_violations: 0,
        worst_lipschitz_margin: f64::INFINITY,
        worst_pl_margin: f64::INFINITY,
        minimizer: u_star.clone(),
    };

    for pair in points.windows(2) {
        let (u, v) = (&pair[0], &pair[1]);
        let margin = ell * (u - v).norm() - (grad_f(u) - grad_f(v)).norm();
        report.worst_lipschitz_margin = report.worst_lipschitz_margin.min(margin);
        if margin < -1e-9 * (1.0 + ell * (u - v).norm()) {
            report.lipschitz_violations += 1;
        }
    }
    for u in &points {
        let gap = f(u) - f_star;
        let margin = 0.5 * grad_f(u).norm_squared() - mu * gap;
        report.worst_pl_margin = report.worst_pl_margin.min(margin);
        if margin < -1e-9 * (1.0 + gap.abs()) {
            report.pl_violations += 1;
        }
    }
    Ok(report)
}
