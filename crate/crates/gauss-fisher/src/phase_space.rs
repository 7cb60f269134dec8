//! Phase-space representation of multimode Gaussian states.
//!
//! An `n`-mode Gaussian state is fully described by its first-moment vector
//! `d` (length `2n`) and covariance matrix `V` (`2n x 2n`). Quadratures are
//! ordered as `(q_1 .. q_n, p_1 .. p_n)` with `hbar = 1`, so the vacuum has
//! `d = 0` and `V = I/2`. Mode-mixing unitaries act through their real
//! symplectic representation, and the uniform pure-loss channel acts as an
//! affine map on the moments.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Per-element tolerance for `V = V^T`.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Max-norm tolerance on `U^dag U - I` accepted by [`symplectic_from_unitary`].
pub const UNITARITY_TOL: f64 = 1e-10;
/// Max-norm tolerance on `S Omega S^T - Omega`.
pub const SYMPLECTIC_TOL: f64 = 1e-10;
/// Slack below 1/2 allowed for symplectic eigenvalues of physical states.
///
/// Chosen to absorb accumulated rounding across ~10 chained transforms.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// First and second moments of an `n`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    n_modes: usize,
    d: DVector<f64>,
    v: DMatrix<f64>,
}

impl GaussianState {
    /// Builds a state from its moments, checking symmetry and physicality.
    pub fn new(d: DVector<f64>, v: DMatrix<f64>) -> Result<Self> {
        let dim = d.len();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!(
                "moment vector length {dim} is not a positive even number"
            )));
        }
        if v.nrows() != dim || v.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "covariance is {}x{}, expected {dim}x{dim}",
                v.nrows(),
                v.ncols()
            )));
        }
        let asym = (&v - v.transpose()).abs().max();
        if asym > SYMMETRY_TOL {
            return Err(Error::InvalidArgument(format!(
                "covariance asymmetry {asym:.3e} exceeds {SYMMETRY_TOL:.0e}"
            )));
        }
        let nus = symplectic_eigenvalues(&v)?;
        let nu_min = nus.last().copied().unwrap_or(f64::NAN);
        if nu_min.is_nan() || nu_min < 0.5 - PHYSICALITY_TOL {
            return Err(Error::Unphysical { nu_min });
        }
        Ok(Self::from_parts_unchecked(d, v))
    }

    /// Builds a state without validation. The caller guarantees the moments
    /// describe a physical state of `d.len()/2` modes.
    pub fn from_parts_unchecked(d: DVector<f64>, v: DMatrix<f64>) -> Self {
        debug_assert_eq!(d.len() % 2, 0);
        debug_assert_eq!(v.nrows(), d.len());
        let n_modes = d.len() / 2;
        Self { n_modes, d, v }
    }

    /// The `n`-mode vacuum: `d = 0`, `V = I/2`.
    pub fn vacuum(n_modes: usize) -> Self {
        let dim = 2 * n_modes;
        Self::from_parts_unchecked(DVector::zeros(dim), DMatrix::identity(dim, dim) * 0.5)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// First-moment vector, ordered `(q_1 .. q_n, p_1 .. p_n)`.
    pub fn d(&self) -> &DVector<f64> {
        &self.d
    }

    /// Covariance matrix in the same ordering.
    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// Purity `1 / sqrt(det 2V)`; equals 1 for pure states.
    pub fn purity(&self) -> f64 {
        1.0 / (&self.v * 2.0).determinant().sqrt()
    }
}

/// Complex mode-mixing matrix of an energy-preserving (passive) unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct PassiveUnitary {
    matrix: DMatrix<C64>,
}

impl PassiveUnitary {
    /// Wraps a matrix after checking `U^dag U = I` to [`UNITARITY_TOL`].
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "mode matrix is {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let defect = unitarity_defect(&matrix);
        if defect > UNITARITY_TOL {
            return Err(Error::NotUnitary { defect });
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix without checking unitarity.
    pub fn from_matrix_unchecked(matrix: DMatrix<C64>) -> Self {
        Self { matrix }
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n_modes, n_modes),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Hermitian conjugate (the inverse mode map).
    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self * rhs` as mode maps (apply `rhs` first).
    pub fn compose(&self, rhs: &Self) -> Self {
        Self {
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

/// Max-norm of `U^dag U - I`.
pub fn unitarity_defect(matrix: &DMatrix<C64>) -> f64 {
    let n = matrix.nrows();
    let gram = matrix.adjoint() * matrix;
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            defect = defect.max((gram[(i, j)] - expect).norm());
        }
    }
    defect
}

/// Real `2n x 2n` phase-space representation of a Gaussian unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct Symplectic {
    matrix: DMatrix<f64>,
}

impl Symplectic {
    /// Wraps a matrix after checking `S Omega S^T = Omega` to [`SYMPLECTIC_TOL`].
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim || !dim.is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!(
                "symplectic candidate is {}x{}",
                dim,
                matrix.ncols()
            )));
        }
        let defect = symplectic_defect(&matrix);
        if defect > SYMPLECTIC_TOL {
            return Err(Error::NotSymplectic { defect });
        }
        Ok(Self { matrix })
    }

    pub fn from_matrix_unchecked(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Max-norm of `S Omega S^T - Omega`.
pub fn symplectic_defect(matrix: &DMatrix<f64>) -> f64 {
    let n = matrix.nrows() / 2;
    let om = omega(n);
    ((matrix * &om * matrix.transpose()) - om).abs().max()
}

/// The symplectic form `Omega = [[0, I], [-I, 0]]` for `(q, p)` ordering.
pub fn omega(n_modes: usize) -> DMatrix<f64> {
    let mut om = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        om[(k, n_modes + k)] = 1.0;
        om[(n_modes + k, k)] = -1.0;
    }
    om
}

/// Uniform pure-loss channel with transmissivity `tau`.
///
/// Acts on every mode identically: `d -> sqrt(tau) d`,
/// `V -> tau V + (1 - tau)/2 I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossChannel {
    tau: f64,
}

impl LossChannel {
    pub fn new(tau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::InvalidArgument(format!(
                "transmissivity tau = {tau} outside [0, 1]"
            )));
        }
        Ok(Self { tau })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// Real symplectic matrix of a passive unitary:
/// `S = [[Re U, -Im U], [Im U, Re U]]`.
pub fn symplectic_from_unitary(u: &PassiveUnitary) -> Result<Symplectic> {
    let defect = unitarity_defect(u.matrix());
    if defect > UNITARITY_TOL {
        return Err(Error::NotUnitary { defect });
    }
    let n = u.n_modes();
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let e = u.matrix()[(i, j)];
            s[(i, j)] = e.re;
            s[(i, n + j)] = -e.im;
            s[(n + i, j)] = e.im;
            s[(n + i, n + j)] = e.re;
        }
    }
    Ok(Symplectic::from_matrix_unchecked(s))
}

/// Evolves a state through a Gaussian unitary: `d' = S d`, `V' = S V S^T`.
pub fn apply_symplectic(state: &GaussianState, s: &Symplectic) -> Result<GaussianState> {
    if s.matrix.nrows() != state.d.len() {
        return Err(Error::DimensionMismatch(format!(
            "symplectic acts on {} quadratures, state has {}",
            s.matrix.nrows(),
            state.d.len()
        )));
    }
    let d = &s.matrix * &state.d;
    let v = &s.matrix * &state.v * s.matrix.transpose();
    Ok(GaussianState::from_parts_unchecked(d, v))
}

/// Evolves a state through the uniform pure-loss channel.
pub fn apply_uniform_loss(state: &GaussianState, ch: &LossChannel) -> GaussianState {
    let tau = ch.tau;
    let dim = state.d.len();
    let d = &state.d * tau.sqrt();
    let v = &state.v * tau + DMatrix::identity(dim, dim) * ((1.0 - tau) / 2.0);
    GaussianState::from_parts_unchecked(d, v)
}

/// The `2M`-mode probe: a squeezed vacuum in mode 1, a coherent state
/// `alpha` in mode `M + 1`, vacuum elsewhere.
///
/// With `alpha = (q0 + i p0)/sqrt(2)`, the only nonzero first moments are
/// `q0` on the q-quadrature of mode `M + 1` and `p0` on its p-quadrature;
/// the covariance is diagonal with `e^{2r}/2` on the q-quadrature of mode 1
/// and `e^{-2r}/2` on its p-quadrature.
pub fn probe_state(m: usize, r: f64, alpha: C64) -> Result<GaussianState> {
    if m == 0 {
        return Err(Error::InvalidArgument("M must be at least 1".into()));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "squeezing parameter r = {r} must be finite and nonnegative"
        )));
    }
    let n = 2 * m;
    let mut d = DVector::zeros(2 * n);
    d[m] = f64::sqrt(2.0) * alpha.re; // q of mode M + 1 (0-based index M)
    d[n + m] = f64::sqrt(2.0) * alpha.im; // p of mode M + 1
    let mut diag = DVector::from_element(2 * n, 0.5);
    diag[0] = 0.5 * (2.0 * r).exp();
    diag[n] = 0.5 * (-2.0 * r).exp();
    let v = DMatrix::from_diagonal(&diag);
    Ok(GaussianState::from_parts_unchecked(d, v))
}

/// Mean and variance of a q-quadrature homodyne measurement on `mode`
/// (0-based).
pub fn homodyne_q_distribution(state: &GaussianState, mode: usize) -> Result<(f64, f64)> {
    if mode >= state.n_modes {
        return Err(Error::InvalidArgument(format!(
            "mode index {mode} out of range for {} modes",
            state.n_modes
        )));
    }
    Ok((state.d[mode], state.v[(mode, mode)]))
}

/// Symplectic eigenvalues of a covariance matrix, sorted descending.
///
/// These are the moduli of the eigenvalues of `i Omega V`, each counted
/// once. Physical states have all of them `>= 1/2`; pure states have all
/// equal to `1/2`. Computed through the symmetric eigenproblem of
/// `V^{1/2} (-Omega V Omega) V^{1/2}`, whose eigenvalues are the squared
/// symplectic eigenvalues, each doubled.
pub fn symplectic_eigenvalues(v: &DMatrix<f64>) -> Result<Vec<f64>> {
    let dim = v.nrows();
    if v.ncols() != dim || !dim.is_multiple_of(2) {
        return Err(Error::DimensionMismatch(format!(
            "covariance is {}x{}",
            dim,
            v.ncols()
        )));
    }
    let n = dim / 2;
    let sym = (v + v.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    // V^{1/2}
    let sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let v_sqrt = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
    let om = omega(n);
    let core = &v_sqrt * (-&om * v * &om) * &v_sqrt;
    let core = (&core + core.transpose()) * 0.5;
    let mut sq: Vec<f64> = core
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .collect();
    sq.sort_by(|a, b| b.partial_cmp(a).unwrap());
    // Values come in +/- pairs of equal modulus; keep one per pair.
    Ok(sq.into_iter().step_by(2).take(n).collect())
}
