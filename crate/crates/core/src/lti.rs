//! Discrete-time LTI plant: representation, simulation and model-based
//! oracles.
//!
//! The plant is `x_{k+1} = A x_k + B u_k + E w_k`, `y_k = C x_k` with a
//! Schur-stable `A`, a controllable `(A, B)` pair and a `C` with linearly
//! independent columns. The model-based steady-state gains computed here are
//! the ground truth against which the data-driven estimates are judged.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Tolerances};

/// Cap on rejection sampling in [`random_admissible_system`].
const GENERATION_ATTEMPTS: usize = 100;

/// State-space plant matrices `(A, B, C, E)` with validated invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    e: DMatrix<f64>,
}

impl LtiSystem {
    /// Builds a system and validates dimensions, Schur stability,
    /// controllability and the column rank of `C`.
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, e: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerances(a, b, c, e, &Tolerances::default())
    }

    pub fn with_tolerances(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        e: DMatrix<f64>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch("A must be square".into()));
        }
        if b.nrows() != n || e.nrows() != n || c.ncols() != n {
            return Err(Error::DimensionMismatch(
                "B, E must have n rows and C must have n columns".into(),
            ));
        }
        if n == 0 || b.ncols() == 0 || c.nrows() == 0 || e.ncols() == 0 {
            return Err(Error::DimensionMismatch(
                "all dimensions must be positive".into(),
            ));
        }
        if c.nrows() < n {
            return Err(Error::ContractViolation(format!(
                "C must have at least n = {n} rows for full column rank, got {}",
                c.nrows()
            )));
        }
        if !is_schur_stable_with(&a, tol) {
            return Err(Error::NotSchurStable {
                rho: linalg::spectral_radius(&a),
            });
        }
        if !is_controllable_with(&a, &b, tol)? {
            return Err(Error::ContractViolation(
                "(A, B) is not controllable".into(),
            ));
        }
        if !has_full_column_rank_with(&c, tol) {
            return Err(Error::ContractViolation(
                "C does not have full column rank".into(),
            ));
        }
        Ok(Self { a, b, c, e })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }
    pub fn e(&self) -> &DMatrix<f64> {
        &self.e
    }

    /// State dimension n.
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }
    /// Input dimension m.
    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }
    /// Output dimension p.
    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }
    /// Disturbance dimension r.
    pub fn disturbance_dim(&self) -> usize {
        self.e.ncols()
    }

    /// JSON document with dimension fields and row-major matrix arrays.
    pub fn to_json_string(&self) -> String {
        let doc = SystemJson::from(self);
        serde_json::to_string_pretty(&doc).expect("system serialization cannot fail")
    }

    /// Parses and validates a system from the JSON document format.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: SystemJson =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("system JSON: {e}")))?;
        doc.try_into()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SystemJson {
    n: usize,
    m: usize,
    p: usize,
    r: usize,
    /// Row-major entries of A (n*n), B (n*m), C (p*n), E (n*r).
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    e: Vec<f64>,
}

impl From<&LtiSystem> for SystemJson {
    fn from(sys: &LtiSystem) -> Self {
        let row_major = |m: &DMatrix<f64>| -> Vec<f64> {
            let mut v = Vec::with_capacity(m.nrows() * m.ncols());
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    v.push(m[(i, j)]);
                }
            }
            v
        };
        Self {
            n: sys.state_dim(),
            m: sys.input_dim(),
            p: sys.output_dim(),
            r: sys.disturbance_dim(),
            a: row_major(&sys.a),
            b: row_major(&sys.b),
            c: row_major(&sys.c),
            e: row_major(&sys.e),
        }
    }
}

impl TryFrom<SystemJson> for LtiSystem {
    type Error = Error;

    fn try_from(doc: SystemJson) -> Result<Self> {
        let build = |rows: usize, cols: usize, data: &[f64], name: &str| -> Result<DMatrix<f64>> {
            if data.len() != rows * cols {
                return Err(Error::Parse(format!(
                    "matrix {name}: expected {} entries, got {}",
                    rows * cols,
                    data.len()
                )));
            }
            Ok(DMatrix::from_row_slice(rows, cols, data))
        };
        LtiSystem::new(
            build(doc.n, doc.n, &doc.a, "A")?,
            build(doc.n, doc.m, &doc.b, "B")?,
            build(doc.p, doc.n, &doc.c, "C")?,
            build(doc.n, doc.r, &doc.e, "E")?,
        )
    }
}

/// Aligned input/state/output/disturbance sequences.
///
/// Outputs may have exactly one more sample than inputs: a simulation over
/// `T` inputs yields states and outputs at `T + 1` time points.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub inputs: Vec<DVector<f64>>,
    pub states: Option<Vec<DVector<f64>>>,
    pub outputs: Vec<DVector<f64>>,
    pub disturbances: Option<Vec<DVector<f64>>>,
}

impl Trajectory {
    /// Validates length bookkeeping and finiteness of every stored sample.
    pub fn new(
        inputs: Vec<DVector<f64>>,
        states: Option<Vec<DVector<f64>>>,
        outputs: Vec<DVector<f64>>,
        disturbances: Option<Vec<DVector<f64>>>,
    ) -> Result<Self> {
        let t = inputs.len();
        if outputs.len() != t && outputs.len() != t + 1 {
            return Err(Error::DimensionMismatch(format!(
                "outputs must have T or T+1 samples (T = {t}), got {}",
                outputs.len()
            )));
        }
        if let Some(states) = &states {
            if states.len() != outputs.len() {
                return Err(Error::DimensionMismatch(
                    "states and outputs must have equal length".into(),
                ));
            }
        }
        if let Some(w) = &disturbances {
            if w.len() != t {
                return Err(Error::DimensionMismatch(
                    "disturbances must have the same length as inputs".into(),
                ));
            }
        }
        let traj = Self {
            inputs,
            states,
            outputs,
            disturbances,
        };
        traj.check_finite()?;
        Ok(traj)
    }

    fn check_finite(&self) -> Result<()> {
        let all = |seq: &[DVector<f64>]| seq.iter().all(|v| v.iter().all(|x| x.is_finite()));
        let ok = all(&self.inputs)
            && all(&self.outputs)
            && self.states.as_deref().is_none_or(all)
            && self.disturbances.as_deref().is_none_or(all);
        if ok {
            Ok(())
        } else {
            Err(Error::ContractViolation(
                "trajectory contains non-finite samples".into(),
            ))
        }
    }

    /// Number of input samples T.
    pub fn input_len(&self) -> usize {
        self.inputs.len()
    }

    /// CSV document: one row per time step, header
    /// `k,u_0..,x_0..,y_0..,w_0..` with blocks omitted when absent.
    /// Cells of a block are left empty on rows past the block's length.
    pub fn to_csv_string(&self) -> String {
        let m = self.inputs.first().map_or(0, |v| v.len());
        let n = self
            .states
            .as_ref()
            .and_then(|s| s.first())
            .map_or(0, |v| v.len());
        let p = self.outputs.first().map_or(0, |v| v.len());
        let r = self
            .disturbances
            .as_ref()
            .and_then(|s| s.first())
            .map_or(0, |v| v.len());

        let mut out = String::from("k");
        for j in 0..m {
            out.push_str(&format!(",u_{j}"));
        }
        for j in 0..n {
            out.push_str(&format!(",x_{j}"));
        }
        for j in 0..p {
            out.push_str(&format!(",y_{j}"));
        }
        for j in 0..r {
            out.push_str(&format!(",w_{j}"));
        }
        out.push('\n');

        let rows = self.outputs.len().max(self.inputs.len());
        for k in 0..rows {
            out.push_str(&k.to_string());
            push_block(&mut out, self.inputs.get(k), m);
            if let Some(states) = &self.states {
                push_block(&mut out, states.get(k), n);
            }
            push_block(&mut out, self.outputs.get(k), p);
            if let Some(w) = &self.disturbances {
                push_block(&mut out, w.get(k), r);
            }
            out.push('\n');
        }
        out
    }

    /// Parses the CSV document format produced by [`Trajectory::to_csv_string`].
    pub fn from_csv_str(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty trajectory CSV".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.first() != Some(&"k") {
            return Err(Error::Parse(
                "trajectory CSV must start with a k column".into(),
            ));
        }
        let count = |prefix: &str| cols.iter().filter(|c| c.starts_with(prefix)).count();
        let (m, n, p, r) = (count("u_"), count("x_"), count("y_"), count("w_"));
        if p == 0 {
            return Err(Error::Parse("trajectory CSV has no output columns".into()));
        }
        if 1 + m + n + p + r != cols.len() {
            return Err(Error::Parse("unrecognized trajectory CSV header".into()));
        }

        let mut inputs = Vec::new();
        let mut states = Vec::new();
        let mut outputs = Vec::new();
        let mut disturbances = Vec::new();
        for (row_idx, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != cols.len() {
                return Err(Error::Parse(format!(
                    "row {row_idx}: expected {} cells, got {}",
                    cols.len(),
                    cells.len()
                )));
            }
            let mut pos = 1;
            let mut take = |width: usize, sink: &mut Vec<DVector<f64>>| -> Result<()> {
                let block = &cells[pos..pos + width];
                pos += width;
                if width == 0 || block.iter().all(|c| c.is_empty()) {
                    return Ok(());
                }
                let vals: Result<Vec<f64>> = block
                    .iter()
                    .map(|c| {
                        c.parse::<f64>()
                            .map_err(|e| Error::Parse(format!("row {row_idx}: {e}")))
                    })
                    .collect();
                sink.push(DVector::from_vec(vals?));
                Ok(())
            };
            take(m, &mut inputs)?;
            take(n, &mut states)?;
            take(p, &mut outputs)?;
            take(r, &mut disturbances)?;
        }
        Trajectory::new(
            inputs,
            (n > 0).then_some(states),
            outputs,
            (r > 0).then_some(disturbances),
        )
    }
}

fn push_block(out: &mut String, v: Option<&DVector<f64>>, width: usize) {
    match v {
        Some(v) => {
            for x in v.iter() {
                out.push_str(&format!(",{x}"));
            }
        }
        None => {
            for _ in 0..width {
                out.push(',');
            }
        }
    }
}

/// Model-based steady-state gains `G = C(I-A)^{-1}B`, `H = C(I-A)^{-1}E`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateGains {
    pub g: DMatrix<f64>,
    pub h: DMatrix<f64>,
}

/// Simulates the plant over the given input and disturbance sequences.
///
/// Returns states `x_0..x_T` and outputs `y_0..y_T` for `T` input samples.
pub fn simulate(
    sys: &LtiSystem,
    x0: &DVector<f64>,
    inputs: &[DVector<f64>],
    disturbances: &[DVector<f64>],
) -> Result<Trajectory> {
    let (n, m, r) = (sys.state_dim(), sys.input_dim(), sys.disturbance_dim());
    if x0.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "x0 has length {}, expected {n}",
            x0.len()
        )));
    }
    if inputs.len() != disturbances.len() {
        return Err(Error::ContractViolation(format!(
            "input and disturbance sequences must have equal length ({} vs {})",
            inputs.len(),
            disturbances.len()
        )));
    }
    if !x0.iter().all(|x| x.is_finite()) {
        return Err(Error::ContractViolation("x0 must be finite".into()));
    }

    let t = inputs.len();
    let mut states = Vec::with_capacity(t + 1);
    let mut outputs = Vec::with_capacity(t + 1);
    let mut x = x0.clone();
    for k in 0..=t {
        let y = &sys.c * &x;
        if !x.iter().all(|v| v.is_finite()) || !y.iter().all(|v| v.is_finite()) {
            return Err(Error::Overflow { step: k });
        }
        states.push(x.clone());
        outputs.push(y);
        if k < t {
            let u = &inputs[k];
            let w = &disturbances[k];
            if u.len() != m || w.len() != r {
                return Err(Error::DimensionMismatch(format!(
                    "sample {k}: input/disturbance dimension mismatch"
                )));
            }
            x = &sys.a * &x + &sys.b * u + &sys.e * w;
        }
    }
    Trajectory::new(
        inputs.to_vec(),
        Some(states),
        outputs,
        Some(disturbances.to_vec()),
    )
}

/// Exact steady-state gains through an LU solve of `(I - A) X = [B, E]`.
pub fn steady_state_gains(sys: &LtiSystem) -> Result<SteadyStateGains> {
    let g = &sys.c * linalg::solve_i_minus_a(&sys.a, &sys.b)?;
    let h = &sys.c * linalg::solve_i_minus_a(&sys.a, &sys.e)?;
    Ok(SteadyStateGains { g, h })
}

/// Solves the discrete Lyapunov equation `A' P A - P = -Q` for `P`.
///
/// Uses Kronecker vectorization, `(I - A'⊗A') vec(P) = vec(Q)`, which is
/// exact for the dense desk-scale systems handled here. The result is
/// explicitly symmetrized.
pub fn solve_discrete_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || q.nrows() != n || q.ncols() != n {
        return Err(Error::DimensionMismatch(
            "Lyapunov equation needs square A and Q of equal size".into(),
        ));
    }
    if !is_schur_stable(a) {
        return Err(Error::NotSchurStable {
            rho: linalg::spectral_radius(a),
        });
    }
    if !linalg::is_symmetric_positive_definite(q, 1e-12) {
        return Err(Error::ContractViolation(
            "Q must be symmetric positive definite".into(),
        ));
    }

    let at = a.transpose();
    let kron = at.kronecker(&at);
    let lhs = DMatrix::identity(n * n, n * n) - kron;
    let vec_q = DVector::from_column_slice(q.as_slice());
    let vec_p = lhs
        .lu()
        .solve(&vec_q)
        .ok_or_else(|| Error::IllConditioned("Lyapunov system is singular".into()))?;
    let p = DMatrix::from_column_slice(n, n, vec_p.as_slice());
    let p = 0.5 * (&p + p.transpose());

    let residual = (a.transpose() * &p * a - &p + q).norm();
    if residual > 1e-9 * q.norm() {
        return Err(Error::IllConditioned(format!(
            "Lyapunov residual {residual:.3e} exceeds 1e-9 * ||Q||"
        )));
    }
    Ok(p)
}

/// Schur stability: spectral radius strictly inside the unit circle.
pub fn is_schur_stable(a: &DMatrix<f64>) -> bool {
    is_schur_stable_with(a, &Tolerances::default())
}

pub fn is_schur_stable_with(a: &DMatrix<f64>, tol: &Tolerances) -> bool {
    linalg::spectral_radius(a) < 1.0 - tol.stability_margin
}

/// Controllability of `(A, B)` via the rank of `[B, AB, ..., A^{n-1}B]`.
pub fn is_controllable(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<bool> {
    is_controllable_with(a, b, &Tolerances::default())
}

pub fn is_controllable_with(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: &Tolerances) -> Result<bool> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::DimensionMismatch(
            "controllability test needs square A and row-compatible B".into(),
        ));
    }
    let m = b.ncols();
    let mut ctrb = DMatrix::zeros(n, n * m);
    let mut block = b.clone();
    for i in 0..n {
        ctrb.view_mut((0, i * m), (n, m)).copy_from(&block);
        block = a * &block;
    }
    Ok(linalg::rank_info(&ctrb, tol.rank_rel).rank == n)
}

/// Full column rank of `C` via singular values.
pub fn has_full_column_rank(c: &DMatrix<f64>) -> bool {
    has_full_column_rank_with(c, &Tolerances::default())
}

pub fn has_full_column_rank_with(c: &DMatrix<f64>, tol: &Tolerances) -> bool {
    linalg::rank_info(c, tol.rank_rel).rank == c.ncols()
}

/// Draws a random admissible system: Gaussian entries, `A` rescaled to the
/// requested spectral radius, resampled until controllability and the column
/// rank of `C` hold. Deterministic given the seed.
pub fn random_admissible_system(
    n: usize,
    m: usize,
    p: usize,
    r: usize,
    seed: u64,
    spectral_radius_target: f64,
) -> Result<LtiSystem> {
    if n == 0 || m == 0 || p == 0 || r == 0 {
        return Err(Error::ContractViolation(
            "all dimensions must be positive".into(),
        ));
    }
    if p < n {
        return Err(Error::ContractViolation(format!(
            "need p >= n for full column rank of C, got p = {p}, n = {n}"
        )));
    }
    if !(spectral_radius_target > 0.0 && spectral_radius_target < 1.0) {
        return Err(Error::ContractViolation(
            "spectral radius target must lie in (0, 1)".into(),
        ));
    }

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut gaussian = |rows: usize, cols: usize| -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
    };

    for _ in 0..GENERATION_ATTEMPTS {
        let mut a = gaussian(n, n);
        let rho = linalg::spectral_radius(&a);
        if rho < 1e-12 {
            continue;
        }
        a *= spectral_radius_target / rho;
        let b = gaussian(n, m);
        let c = gaussian(p, n);
        let e = gaussian(n, r);
        if let Ok(sys) = LtiSystem::new(a, b, c, e) {
            return Ok(sys);
        }
    }
    Err(Error::GenerationFailed {
        attempts: GENERATION_ATTEMPTS,
        reason: "admissibility invariants kept failing".into(),
    })
}
