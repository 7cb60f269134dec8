//! Independent brute-force verification of the closed forms.
//!
//! Two oracles, both deliberately ignorant of the Fisher module's algebra:
//!
//! - A truncated Fock-space construction of the modulated two-mode state
//!   (`M = 1`) whose QFI is evaluated as the symmetric-logarithmic-
//!   derivative spectral sum over the state's eigenpairs.
//! - A Monte-Carlo homodyne simulation that draws Gaussian samples from
//!   the receiver's output moments, batch-estimates the parameter by
//!   maximum likelihood, and reads the empirical Fisher information off
//!   the estimator's mean squared error.

use faer::Mat;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_distr::Distribution;
use rayon::prelude::*;

use crate::circuit::{output_moments, PhaseModel, SensorConfig};
use crate::error::{Error, Result};
use crate::fock;

/// Trace deficit above which a Fock construction is rejected.
pub const TRUNCATION_LIMIT: f64 = 1e-4;
/// Eigenpairs with `p_i + p_j` at or below this are dropped from the SLD
/// sum; below it the term is numerically zero or unstable.
pub const EIGEN_PRUNE_TOL: f64 = 1e-12;
/// Samples per maximum-likelihood batch in [`mc_homodyne`].
pub const MC_BATCH_SIZE: usize = 10;

/// A numerically represented two-mode density matrix on a truncated Fock
/// basis, with its truncation error.
#[derive(Debug, Clone)]
pub struct FockState {
    cutoff: usize,
    n_modes: usize,
    rho: Mat<C64>,
    trace_deficit: f64,
}

impl FockState {
    /// Per-mode basis size.
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn rho(&self) -> &Mat<C64> {
        &self.rho
    }

    /// `1 - Tr rho`, the weight lost to truncation.
    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    /// `Tr rho^2`.
    pub fn purity(&self) -> f64 {
        let mut p = 0.0;
        for i in 0..self.rho.nrows() {
            for j in 0..self.rho.ncols() {
                p += self.rho[(i, j)].norm_sqr();
            }
        }
        p
    }

    /// Max Hermiticity defect, `max |rho - rho^dag|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..self.rho.nrows() {
            for j in 0..self.rho.ncols() {
                d = d.max((self.rho[(i, j)] - self.rho[(j, i)].conj()).norm());
            }
        }
        d
    }
}

/// Builds the two-mode state after preparation, loss, and phase modulation
/// for an `M = 1` sensor, entirely in the truncated Fock basis.
///
/// Loss is commuted to act first (it commutes with the passive circuit):
/// the squeezed vacuum passes through the Kraus decomposition of the
/// pure-loss channel, the coherent input is displaced directly by
/// `sqrt(tau) alpha`, then the balanced gate and the phase `theta_1(x)`
/// are applied.
pub fn fock_final_state(
    cfg: &SensorConfig,
    model: &PhaseModel,
    x: f64,
    cutoff: usize,
) -> Result<FockState> {
    cfg.validate()?;
    if cfg.m != 1 {
        return Err(Error::InvalidArgument(format!(
            "the Fock oracle supports M = 1 only (got M = {})",
            cfg.m
        )));
    }
    if model.modes() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "model has {} modes, expected 1",
            model.modes()
        )));
    }
    if cutoff < 2 {
        return Err(Error::InvalidArgument(format!(
            "cutoff {cutoff} is too small"
        )));
    }

    // Mode 1: squeezed vacuum through the lossy channel.
    let sq = fock::squeeze(cutoff, cfg.r);
    let vac = Mat::<C64>::from_fn(cutoff, cutoff, |i, j| {
        if i == 0 && j == 0 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let rho1 = fock::apply_channel(
        &fock::conjugate(&sq, &vac),
        &fock::loss_kraus_ops(cutoff, cfg.tau),
    );

    // Mode 2: loss maps |alpha> to |sqrt(tau) alpha>.
    let disp = fock::displacement(cutoff, cfg.alpha * cfg.tau.sqrt());
    let c2: Vec<C64> = (0..cutoff).map(|n| disp[(n, 0)]).collect();
    let rho2 = Mat::from_fn(cutoff, cutoff, |i, j| c2[i] * c2[j].conj());

    let mut rho = fock::kron(&rho1, &rho2);
    let bs = fock::balanced_beamsplitter(cutoff);
    rho = fock::conjugate(&bs, &rho);
    let theta = model.theta(x)[0];
    rho = fock::conjugate(&fock::phase_on_mode1(cutoff, theta), &rho);
    let rho = fock::hermitize(&rho);

    let trace_deficit = 1.0 - fock::trace(&rho).re;
    if trace_deficit >= TRUNCATION_LIMIT {
        return Err(Error::Truncation {
            deficit: trace_deficit,
        });
    }
    Ok(FockState {
        cutoff,
        n_modes: 2,
        rho,
        trace_deficit,
    })
}

/// Analytic `d rho / dx`: the phase is generated by the mode-1 number
/// operator, so `d rho = i theta'(x) [n_1, rho]`, which is elementwise
/// `i theta'(x) (n1_row - n1_col) rho`.
pub fn fock_state_derivative(
    cfg: &SensorConfig,
    model: &PhaseModel,
    x: f64,
    cutoff: usize,
) -> Result<Mat<C64>> {
    let state = fock_final_state(cfg, model, x, cutoff)?;
    Ok(number_commutator_derivative(&state, model.dtheta(x)[0]))
}

/// `i dtheta [n_1, rho]` evaluated on an already-built state.
pub fn number_commutator_derivative(state: &FockState, dtheta: f64) -> Mat<C64> {
    let cutoff = state.cutoff();
    let rho = state.rho();
    Mat::from_fn(rho.nrows(), rho.ncols(), |i, j| {
        let n_diff = (i / cutoff) as f64 - (j / cutoff) as f64;
        C64::new(0.0, dtheta * n_diff) * rho[(i, j)]
    })
}

/// `d rho / dx` by central finite difference with the given step.
pub fn fock_state_derivative_fd(
    cfg: &SensorConfig,
    model: &PhaseModel,
    x: f64,
    cutoff: usize,
    step: f64,
) -> Result<Mat<C64>> {
    let plus = fock_final_state(cfg, model, x + step, cutoff)?;
    let minus = fock_final_state(cfg, model, x - step, cutoff)?;
    let (rp, rm) = (plus.rho(), minus.rho());
    Ok(Mat::from_fn(rp.nrows(), rp.ncols(), |i, j| {
        (rp[(i, j)] - rm[(i, j)]) / (2.0 * step)
    }))
}

/// QFI from the symmetric logarithmic derivative as a spectral sum,
///
/// `H = 2 sum_{i,j} |<i| d rho |j>|^2 / (p_i + p_j)`
///
/// over eigenpairs of `rho` with `p_i + p_j` above [`EIGEN_PRUNE_TOL`].
pub fn sld_qfi(rho_x: &FockState, drho: &Mat<C64>) -> Result<f64> {
    let dim = rho_x.rho().nrows();
    if drho.nrows() != dim || drho.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "drho is {}x{}, state is {dim}x{dim}",
            drho.nrows(),
            drho.ncols()
        )));
    }
    let eig = rho_x
        .rho()
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Internal(format!("eigendecomposition failed: {e:?}")))?;
    let p: Vec<f64> = (0..dim)
        .map(|k| eig.S().column_vector()[k].re.max(0.0))
        .collect();
    let basis = eig.U();
    let projected = basis.adjoint() * drho * basis;
    let mut qfi = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let weight = p[i] + p[j];
            if weight > EIGEN_PRUNE_TOL {
                qfi += 2.0 * projected[(i, j)].norm_sqr() / weight;
            }
        }
    }
    Ok(qfi)
}

/// Result of a Monte-Carlo homodyne estimation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    /// Samples actually consumed (a whole number of batches).
    pub n_samples: usize,
    pub seed: u64,
    /// Per-sample Fisher information, `1 / (batch_size * empirical_mse)`.
    pub empirical_fisher: f64,
    /// Mean squared error of the per-batch maximum-likelihood estimates.
    pub empirical_mse: f64,
}

/// Simulates homodyne records at `x_true` and estimates `x` by maximum
/// likelihood on batches of [`MC_BATCH_SIZE`] samples.
///
/// Each batch `b` draws its samples from a `ChaCha8` stream seeded with
/// `seed + b`, so results are bit-reproducible regardless of the parallel
/// schedule. The per-batch estimate solves the Gaussian likelihood with a
/// safeguarded Newton iteration started at `cfg.x0`.
pub fn mc_homodyne(
    cfg: &SensorConfig,
    model: &PhaseModel,
    x_true: f64,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    cfg.validate()?;
    if n_samples < 1000 {
        return Err(Error::InvalidArgument(format!(
            "n_samples = {n_samples} is below the minimum of 1000"
        )));
    }
    let (mean_true, var_true) = output_moments(cfg, model, x_true)?;

    // Reject configurations whose moments carry no information.
    let h = 1e-5 * x_true.abs().max(1.0);
    let (mp, vp) = output_moments(cfg, model, x_true + h)?;
    let (mm, vm) = output_moments(cfg, model, x_true - h)?;
    let sensitivity = ((mp - mm) / (2.0 * h)).abs() + ((vp - vm) / (2.0 * h)).abs();
    if sensitivity < 1e-9 {
        return Err(Error::EstimationFailure(
            "the phase model carries no information about x at x_true".into(),
        ));
    }

    let n_batches = n_samples / MC_BATCH_SIZE;
    let estimates: Vec<Result<f64>> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(b as u64));
            let normal = rand_distr::Normal::new(mean_true, var_true.sqrt())
                .map_err(|e| Error::Internal(format!("bad sampling distribution: {e}")))?;
            let samples: Vec<f64> =
                (0..MC_BATCH_SIZE).map(|_| normal.sample(&mut rng)).collect();
            batch_mle(cfg, model, &samples)
        })
        .collect();

    let mut sum_sq = 0.0;
    for est in estimates {
        let x_hat = est?;
        sum_sq += (x_hat - x_true).powi(2);
    }
    let empirical_mse = sum_sq / n_batches as f64;
    Ok(McEstimate {
        n_samples: n_batches * MC_BATCH_SIZE,
        seed,
        empirical_fisher: 1.0 / (MC_BATCH_SIZE as f64 * empirical_mse),
        empirical_mse,
    })
}

/// Negative log-likelihood of a Gaussian batch, up to a constant.
fn batch_nll(cfg: &SensorConfig, model: &PhaseModel, samples: &[f64], x: f64) -> Result<f64> {
    let (mean, var) = output_moments(cfg, model, x)?;
    if var.is_nan() || var <= 0.0 {
        return Err(Error::Internal(format!("non-positive variance {var}")));
    }
    let ss: f64 = samples.iter().map(|y| (y - mean).powi(2)).sum();
    Ok(0.5 * ss / var + 0.5 * samples.len() as f64 * var.ln())
}

/// Newton iteration on the Gaussian log-likelihood. Steps are clamped and
/// backtracked until they decrease the objective, so the search descends
/// monotonically into the likelihood basin around `x0` instead of hopping
/// between the phase map's periodic replicas.
fn batch_mle(cfg: &SensorConfig, model: &PhaseModel, samples: &[f64]) -> Result<f64> {
    let mut x = cfg.x0;
    let mut nll = batch_nll(cfg, model, samples, x)?;
    let tol = 1e-10;
    for _ in 0..100 {
        let h = 1e-6 * x.abs().max(1.0);
        let f_minus = batch_nll(cfg, model, samples, x - h)?;
        let f_plus = batch_nll(cfg, model, samples, x + h)?;
        let grad = (f_plus - f_minus) / (2.0 * h);
        let curv = (f_plus - 2.0 * nll + f_minus) / (h * h);
        let mut step = if curv > 1e-12 && curv.is_finite() {
            -grad / curv
        } else {
            -0.05 * grad.signum()
        };
        if !step.is_finite() {
            return Err(Error::EstimationFailure(
                "non-finite Newton step in the likelihood search".into(),
            ));
        }
        step = step.clamp(-0.5, 0.5);
        let mut improved = false;
        for _ in 0..40 {
            let candidate = x + step;
            let candidate_nll = batch_nll(cfg, model, samples, candidate)?;
            if candidate_nll <= nll {
                x = candidate;
                nll = candidate_nll;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved || step.abs() < tol * x.abs().max(1.0) {
            return Ok(x);
        }
    }
    Err(Error::EstimationFailure(format!(
        "maximum-likelihood search did not converge (last x = {x})"
    )))
}
