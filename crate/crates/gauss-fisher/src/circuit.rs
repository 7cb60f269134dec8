//! The distributed-phase sensor circuit.
//!
//! A scalar parameter `x` modulates phases `theta_m(x)` on the upper arms of
//! `M` Mach-Zehnder interferometers. The probe couples a squeezed vacuum and
//! a coherent state into the array through balanced Fourier gates; the
//! receiver undoes the reference phases `theta_m(x0)`, recombines the light
//! with the inverse preparation circuit, rotates the first output mode by a
//! homodyne phase `phi_H`, and measures its q-quadrature.
//!
//! The measured mode's mean and variance are available both in closed form
//! (from two matrix elements of the recombined unitary) and by full
//! phase-space propagation; the two routes agree to numerical precision.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::phase_space::{
    apply_symplectic, apply_uniform_loss, homodyne_q_distribution, probe_state,
    symplectic_from_unitary, LossChannel, PassiveUnitary,
};

/// Full description of one sensor instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorConfig {
    /// Number of modulated phases (the circuit has `2M` optical modes).
    pub m: usize,
    /// Input squeezing parameter, `r >= 0`.
    pub r: f64,
    /// Coherent amplitude. Closed-form operations require `Im alpha = 0`;
    /// a complex amplitude is only propagated through the dense path.
    pub alpha: C64,
    /// Transmissivity of the uniform pure-loss channel, in `[0, 1]`.
    pub tau: f64,
    /// Homodyne phase in radians.
    pub phi_h: f64,
    /// Reference parameter value the receiver is tuned to.
    pub x0: f64,
}

impl SensorConfig {
    pub fn new(m: usize, r: f64, alpha: C64, tau: f64, phi_h: f64, x0: f64) -> Result<Self> {
        let cfg = Self {
            m,
            r,
            alpha,
            tau,
            phi_h,
            x0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Convenience constructor for a real coherent amplitude.
    pub fn real(m: usize, r: f64, alpha: f64, tau: f64, phi_h: f64, x0: f64) -> Result<Self> {
        Self::new(m, r, C64::new(alpha, 0.0), tau, phi_h, x0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidArgument("M must be at least 1".into()));
        }
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "squeezing parameter r = {} must be finite and nonnegative",
                self.r
            )));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::InvalidArgument(format!(
                "transmissivity tau = {} outside [0, 1]",
                self.tau
            )));
        }
        if !self.n_total().is_finite() {
            return Err(Error::InvalidArgument(
                "total photon number is not finite".into(),
            ));
        }
        Ok(())
    }

    /// Mean photon number of the squeezed-vacuum input, `sinh^2 r`.
    pub fn n_squeezed(&self) -> f64 {
        self.r.sinh().powi(2)
    }

    /// Mean photon number of the coherent input, `|alpha|^2`.
    pub fn n_coherent(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    /// Total input energy `N = sinh^2 r + |alpha|^2`.
    pub fn n_total(&self) -> f64 {
        self.n_squeezed() + self.n_coherent()
    }

    /// The real amplitude, or an error if `alpha` has an imaginary part.
    pub fn real_alpha(&self) -> Result<f64> {
        if self.alpha.im != 0.0 {
            return Err(Error::ComplexAmplitude(self.alpha.im));
        }
        Ok(self.alpha.re)
    }
}

type PhaseFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// The map `x -> (theta_1(x), .., theta_M(x))` and its derivative.
///
/// The derivative is analytic when supplied, otherwise a central finite
/// difference with step `h = max(1e-6, 1e-6 |x|)`.
#[derive(Clone)]
pub struct PhaseModel {
    modes: usize,
    theta: PhaseFn,
    dtheta: Option<PhaseFn>,
    fd_scale: f64,
}

impl fmt::Debug for PhaseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhaseModel")
            .field("modes", &self.modes)
            .field("analytic", &self.dtheta.is_some())
            .finish()
    }
}

impl PhaseModel {
    pub const DEFAULT_FD_SCALE: f64 = 1e-6;

    /// Model with an analytic derivative.
    pub fn analytic<F, G>(modes: usize, theta: F, dtheta: G) -> Self
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
        G: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            modes,
            theta: Arc::new(theta),
            dtheta: Some(Arc::new(dtheta)),
            fd_scale: Self::DEFAULT_FD_SCALE,
        }
    }

    /// Model whose derivative is taken by central finite difference.
    pub fn numeric<F>(modes: usize, theta: F) -> Self
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            modes,
            theta: Arc::new(theta),
            dtheta: None,
            fd_scale: Self::DEFAULT_FD_SCALE,
        }
    }

    /// `theta_m(x) = x` on every mode.
    pub fn equal_phases(modes: usize) -> Self {
        Self::analytic(modes, move |x| vec![x; modes], move |_| vec![1.0; modes])
    }

    /// `theta_m(x) = c_m x` with per-mode coefficients.
    pub fn linear(coeffs: Vec<f64>) -> Self {
        let modes = coeffs.len();
        let c = coeffs.clone();
        Self::analytic(
            modes,
            move |x| coeffs.iter().map(|&cm| cm * x).collect(),
            move |_| c.clone(),
        )
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Phase vector at `x`.
    pub fn theta(&self, x: f64) -> Vec<f64> {
        let th = (self.theta)(x);
        debug_assert_eq!(th.len(), self.modes);
        th
    }

    /// Derivative vector at `x`.
    pub fn dtheta(&self, x: f64) -> Vec<f64> {
        match &self.dtheta {
            Some(f) => {
                let dth = f(x);
                debug_assert_eq!(dth.len(), self.modes);
                dth
            }
            None => self.fd_dtheta(x),
        }
    }

    fn fd_step(&self, x: f64) -> f64 {
        self.fd_scale.max(self.fd_scale * x.abs())
    }

    fn fd_dtheta(&self, x: f64) -> Vec<f64> {
        let h = self.fd_step(x);
        let plus = (self.theta)(x + h);
        let minus = (self.theta)(x - h);
        plus.iter()
            .zip(&minus)
            .map(|(p, m)| (p - m) / (2.0 * h))
            .collect()
    }

    /// Checks that the declared derivative matches a central difference of
    /// `theta` at each probe point, within `max(1e-6, 1e-4 |dtheta|)`.
    pub fn check_derivative(&self, probe_points: &[f64]) -> Result<()> {
        for &x in probe_points {
            let ana = self.dtheta(x);
            let fd = self.fd_dtheta(x);
            for (m, (a, f)) in ana.iter().zip(&fd).enumerate() {
                let tol = 1e-6f64.max(1e-4 * a.abs());
                if (a - f).abs() > tol {
                    return Err(Error::InvalidArgument(format!(
                        "dtheta[{m}]({x}) = {a} disagrees with finite difference {f}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `M x M` discrete Fourier matrix, entries `e^{2 pi i j k / M} / sqrt(M)`.
pub fn fourier_gate(m: usize) -> DMatrix<C64> {
    let norm = 1.0 / (m as f64).sqrt();
    DMatrix::from_fn(m, m, |j, k| {
        let phase = 2.0 * PI * (j as f64) * (k as f64) / (m as f64);
        C64::from_polar(norm, phase)
    })
}

/// The `2M x 2M` preparation unitary
/// `(1/sqrt 2) [[F, F], [F, -F]]` with `F` the `M x M` Fourier gate.
///
/// Input mode 1 carries the squeezed vacuum, input mode `M + 1` the coherent
/// state; outputs `1..M` are the phase-modulated arms.
pub fn build_probe_circuit(m: usize) -> Result<PassiveUnitary> {
    if m == 0 {
        return Err(Error::InvalidArgument("M must be at least 1".into()));
    }
    let f = fourier_gate(m);
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut u = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let e = s * f[(i, j)];
            u[(i, j)] = e;
            u[(i, m + j)] = e;
            u[(m + i, j)] = e;
            u[(m + i, m + j)] = -e;
        }
    }
    Ok(PassiveUnitary::from_matrix_unchecked(u))
}

/// Diagonal phase unitary `diag(e^{i theta_1}, .., e^{i theta_M}, 1, .., 1)`
/// acting on `2M` modes.
pub fn build_modulation(thetas: &[f64]) -> PassiveUnitary {
    let m = thetas.len();
    let mut u = DMatrix::identity(2 * m, 2 * m);
    for (k, &th) in thetas.iter().enumerate() {
        u[(k, k)] = C64::from_polar(1.0, th);
    }
    PassiveUnitary::from_matrix_unchecked(u)
}

/// Homodyne-phase unitary `diag(e^{i phi_H}, 1, .., 1)`.
fn build_homodyne_phase(n: usize, phi_h: f64) -> PassiveUnitary {
    let mut u = DMatrix::identity(n, n);
    u[(0, 0)] = C64::from_polar(1.0, phi_h);
    PassiveUnitary::from_matrix_unchecked(u)
}

/// Dense product `U(x) = U_H U_I^dag U_{x0}^dag U_x U_I`.
pub fn system_unitary(cfg: &SensorConfig, model: &PhaseModel, x: f64) -> Result<PassiveUnitary> {
    cfg.validate()?;
    if model.modes() != cfg.m {
        return Err(Error::DimensionMismatch(format!(
            "model has {} modes, sensor expects {}",
            model.modes(),
            cfg.m
        )));
    }
    let u_i = build_probe_circuit(cfg.m)?;
    let u_x = build_modulation(&model.theta(x));
    let u_x0 = build_modulation(&model.theta(cfg.x0));
    let u_h = build_homodyne_phase(2 * cfg.m, cfg.phi_h);
    Ok(u_h
        .compose(&u_i.adjoint())
        .compose(&u_x0.adjoint())
        .compose(&u_x)
        .compose(&u_i))
}

/// Closed-form matrix elements `(U_{1,1}(x), U_{1,M+1}(x))` of the system
/// unitary:
///
/// `U_{1,1}   = (e^{i phi_H} / 2) [ (1/M) sum_m e^{i(theta_m(x) - theta_m(x0))} + 1 ]`
/// `U_{1,M+1} = (e^{i phi_H} / 2) [ (1/M) sum_m e^{i(theta_m(x) - theta_m(x0))} - 1 ]`
pub fn receiver_elements(cfg: &SensorConfig, model: &PhaseModel, x: f64) -> (C64, C64) {
    let th = model.theta(x);
    let th0 = model.theta(cfg.x0);
    let m = cfg.m as f64;
    let mean_phase: C64 = th
        .iter()
        .zip(&th0)
        .map(|(&a, &b)| C64::from_polar(1.0, a - b))
        .sum::<C64>()
        / m;
    let half = C64::from_polar(0.5, cfg.phi_h);
    let one = C64::new(1.0, 0.0);
    (half * (mean_phase + one), half * (mean_phase - one))
}

/// Mean and variance of the homodyned q-quadrature of output mode 1, in
/// closed form. Requires a real coherent amplitude.
///
/// With `q0 = sqrt(2) alpha`:
/// `mean = sqrt(tau) Re{U_{1,M+1}(x)} q0`
/// `var  = (1/2) [1 + tau Re{U_{1,1}}^2 (e^{2r} - 1) + tau Im{U_{1,1}}^2 (e^{-2r} - 1)]`
pub fn output_moments(cfg: &SensorConfig, model: &PhaseModel, x: f64) -> Result<(f64, f64)> {
    cfg.validate()?;
    let alpha = cfg.real_alpha()?;
    let (u11, u1m1) = receiver_elements(cfg, model, x);
    let q0 = f64::sqrt(2.0) * alpha;
    let mean = cfg.tau.sqrt() * u1m1.re * q0;
    let var = 0.5
        * (1.0
            + cfg.tau * u11.re.powi(2) * ((2.0 * cfg.r).exp() - 1.0)
            + cfg.tau * u11.im.powi(2) * ((-2.0 * cfg.r).exp() - 1.0));
    Ok((mean, var))
}

/// Same moments by full phase-space propagation:
/// probe state -> uniform loss -> symplectic of `U(x)` -> homodyne on mode 1.
///
/// Handles complex coherent amplitudes.
pub fn output_moments_dense(cfg: &SensorConfig, model: &PhaseModel, x: f64) -> Result<(f64, f64)> {
    let state = probe_state(cfg.m, cfg.r, cfg.alpha)?;
    let state = apply_uniform_loss(&state, &LossChannel::new(cfg.tau)?);
    let s = symplectic_from_unitary(&system_unitary(cfg, model, x)?)?;
    let state = apply_symplectic(&state, &s)?;
    homodyne_q_distribution(&state, 0)
}
