//! Hankel matrices, persistency of excitation, excitation design and the
//! behavioral rank/membership diagnostics.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, Tolerances};
use crate::lti::{LtiSystem, Trajectory};

/// Cap on resampling in [`random_pe_input`]. Failure is a measure-zero
/// event for Gaussian signals; hitting the cap indicates a dimension bug.
const PE_INPUT_ATTEMPTS: usize = 10;

/// Relative residual threshold for trajectory membership.
const MEMBERSHIP_REL_TOL: f64 = 1e-7;

/// Depth-`t` block-Hankel arrangement of a vector signal.
///
/// Column `j` stacks the samples `z_j, ..., z_{j+t-1}`; the block in
/// position `(i, j)` equals the block in `(i-1, j+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelMatrix {
    depth: usize,
    width: usize,
    block_dim: usize,
    entries: DMatrix<f64>,
}

impl HankelMatrix {
    /// Depth t (number of stacked block rows).
    pub fn depth(&self) -> usize {
        self.depth
    }
    /// Width q = T - t + 1.
    pub fn width(&self) -> usize {
        self.width
    }
    /// Block dimension sigma (sample dimension of the source signal).
    pub fn block_dim(&self) -> usize {
        self.block_dim
    }
    /// The (sigma * t) x q matrix itself.
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Debug CSV export: header `t,q,sigma`, then the rows of the matrix.
    pub fn to_csv_string(&self) -> String {
        let mut out = format!(
            "t,q,sigma\n{},{},{}\n",
            self.depth, self.width, self.block_dim
        );
        for i in 0..self.entries.nrows() {
            let row: Vec<String> = (0..self.entries.ncols())
                .map(|j| self.entries[(i, j)].to_string())
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Result of a persistency-of-excitation rank test.
#[derive(Debug, Clone, PartialEq)]
pub struct PeCertificate {
    pub order: usize,
    pub rank_found: usize,
    /// Full row rank sigma * order required for persistency.
    pub rank_required: usize,
    pub smallest_singular_value: f64,
    pub is_pe: bool,
    /// Set when the signal is shorter than `min_samples` demands; the
    /// certificate then reports `is_pe = false` instead of erroring.
    pub insufficient_data: bool,
}

/// Builds the depth-`t` Hankel matrix of a signal.
pub fn build_hankel(signal: &[DVector<f64>], depth: usize) -> Result<HankelMatrix> {
    if depth == 0 {
        return Err(Error::ContractViolation(
            "Hankel depth must be positive".into(),
        ));
    }
    let t_len = signal.len();
    if t_len < depth {
        return Err(Error::InsufficientData {
            needed: depth,
            got: t_len,
        });
    }
    let sigma = signal[0].len();
    if sigma == 0 || signal.iter().any(|z| z.len() != sigma) {
        return Err(Error::DimensionMismatch(
            "signal samples must share a positive dimension".into(),
        ));
    }
    let width = t_len - depth + 1;
    let mut entries = DMatrix::zeros(sigma * depth, width);
    for j in 0..width {
        for i in 0..depth {
            entries
                .view_mut((i * sigma, j), (sigma, 1))
                .copy_from(&signal[j + i]);
        }
    }
    Ok(HankelMatrix {
        depth,
        width,
        block_dim: sigma,
        entries,
    })
}

/// Minimum signal length for persistency of excitation of the given order:
/// `(sigma + 1) * t - 1`.
pub fn min_samples(sigma: usize, order: usize) -> usize {
    (sigma + 1) * order - 1
}

/// Tests persistency of excitation of the given order.
pub fn persistency_certificate(signal: &[DVector<f64>], order: usize) -> Result<PeCertificate> {
    persistency_certificate_with(signal, order, &Tolerances::default())
}

pub fn persistency_certificate_with(
    signal: &[DVector<f64>],
    order: usize,
    tol: &Tolerances,
) -> Result<PeCertificate> {
    if order == 0 {
        return Err(Error::ContractViolation("PE order must be positive".into()));
    }
    if signal.is_empty() {
        return Err(Error::InsufficientData {
            needed: order,
            got: 0,
        });
    }
    let sigma = signal[0].len();
    let rank_required = sigma * order;
    let insufficient = signal.len() < min_samples(sigma, order);

    if signal.len() < order {
        // cannot even form the Hankel matrix
        return Ok(PeCertificate {
            order,
            rank_found: 0,
            rank_required,
            smallest_singular_value: 0.0,
            is_pe: false,
            insufficient_data: true,
        });
    }

    let hankel = build_hankel(signal, order)?;
    let info = linalg::rank_info(hankel.entries(), tol.rank_rel);
    Ok(PeCertificate {
        order,
        rank_found: info.rank,
        rank_required,
        smallest_singular_value: info.sigma_min,
        is_pe: info.rank == rank_required,
        insufficient_data: insufficient,
    })
}

/// Draws an IID Gaussian input sequence and verifies it is persistently
/// exciting of the requested order, resampling on failure. Deterministic
/// given the seed.
pub fn random_pe_input(
    m: usize,
    t_len: usize,
    order: usize,
    seed: u64,
) -> Result<Vec<DVector<f64>>> {
    if m == 0 || order == 0 {
        return Err(Error::ContractViolation(
            "signal dimension and PE order must be positive".into(),
        ));
    }
    let needed = min_samples(m, order);
    if t_len < needed {
        return Err(Error::InsufficientData { needed, got: t_len });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..PE_INPUT_ATTEMPTS {
        let signal: Vec<DVector<f64>> = (0..t_len)
            .map(|_| DVector::from_fn(m, |_, _| StandardNormal.sample(&mut rng)))
            .collect();
        if persistency_certificate(&signal, order)?.is_pe {
            return Ok(signal);
        }
    }
    Err(Error::GenerationFailed {
        attempts: PE_INPUT_ATTEMPTS,
        reason: "Gaussian input kept failing the PE certificate".into(),
    })
}

/// Rank identity of the fundamental lemma: with an input persistently
/// exciting of order `n + L`, the stacked matrix `[U_{L,q}; X_{1,q}]` has
/// rank `L m + n`. Returns whether the identity holds on the given data.
pub fn fundamental_lemma_rank_check(
    sys: &LtiSystem,
    traj: &Trajectory,
    l_window: usize,
) -> Result<bool> {
    if l_window == 0 {
        return Err(Error::ContractViolation(
            "window length L must be positive".into(),
        ));
    }
    let states = traj.states.as_ref().ok_or_else(|| {
        Error::ContractViolation("fundamental lemma rank check needs stored states".into())
    })?;
    let t_len = traj.inputs.len();
    if t_len < l_window {
        return Err(Error::InsufficientData {
            needed: l_window,
            got: t_len,
        });
    }
    let u_hankel = build_hankel(&traj.inputs, l_window)?;
    let q = u_hankel.width();
    let x_hankel = build_hankel(&states[..q], 1)?;
    let stacked = linalg::vstack(u_hankel.entries(), x_hankel.entries());
    let rank = linalg::rank_info(&stacked, Tolerances::default().rank_rel).rank;
    Ok(rank == l_window * sys.input_dim() + sys.state_dim())
}

/// Outcome of a behavioral membership test.
#[derive(Debug, Clone)]
pub struct MembershipResult {
    pub is_member: bool,
    pub residual: f64,
    /// Coefficient vector expressing the candidate in the data's span.
    pub alpha: DVector<f64>,
}

/// Tests whether a candidate `L`-long input/output pair is a trajectory of
/// the system behind `data` by solving the stacked Hankel system
/// `[U_{L,q}; Y_{L,q}] alpha = [u~; y~]` in the least-squares sense.
pub fn trajectory_membership(
    data: &Trajectory,
    candidate_u: &[DVector<f64>],
    candidate_y: &[DVector<f64>],
    l_window: usize,
) -> Result<MembershipResult> {
    if l_window == 0 {
        return Err(Error::ContractViolation(
            "window length L must be positive".into(),
        ));
    }
    if candidate_u.len() != l_window || candidate_y.len() != l_window {
        return Err(Error::DimensionMismatch(format!(
            "candidate sequences must have length L = {l_window}"
        )));
    }
    let t_len = data.inputs.len();
    let outputs = &data.outputs[..t_len.min(data.outputs.len())];

    let u_hankel = build_hankel(&data.inputs, l_window)?;
    let y_hankel = build_hankel(outputs, l_window)?;
    if u_hankel.width() != y_hankel.width() {
        // outputs one sample longer than inputs: trim to common width
        let q = u_hankel.width().min(y_hankel.width());
        let u_entries = u_hankel.entries().columns(0, q).into_owned();
        let y_entries = y_hankel.entries().columns(0, q).into_owned();
        return membership_solve(&u_entries, &y_entries, candidate_u, candidate_y);
    }
    membership_solve(
        u_hankel.entries(),
        y_hankel.entries(),
        candidate_u,
        candidate_y,
    )
}

fn membership_solve(
    u_entries: &DMatrix<f64>,
    y_entries: &DMatrix<f64>,
    candidate_u: &[DVector<f64>],
    candidate_y: &[DVector<f64>],
) -> Result<MembershipResult> {
    let m = candidate_u[0].len();
    let p = candidate_y[0].len();
    if u_entries.nrows() != m * candidate_u.len() || y_entries.nrows() != p * candidate_y.len() {
        return Err(Error::DimensionMismatch(
            "candidate sample dimensions do not match the data".into(),
        ));
    }
    let stacked = linalg::vstack(u_entries, y_entries);
    let mut rhs = DVector::zeros(stacked.nrows());
    let mut offset = 0;
    for u in candidate_u {
        rhs.rows_mut(offset, m).copy_from(u);
        offset += m;
    }
    for y in candidate_y {
        rhs.rows_mut(offset, p).copy_from(y);
        offset += p;
    }
    let (alpha, residual) = linalg::min_norm_lstsq_vec(&stacked, &rhs)?;
    Ok(MembershipResult {
        is_member: residual <= MEMBERSHIP_REL_TOL * (1.0 + rhs.norm()),
        residual,
        alpha,
    })
}
