//! Closed-form quantum and classical Fisher information for the sensed
//! parameter, homodyne-phase optimization, and energy-allocation search.
//!
//! The quantum Fisher information (QFI) bounds the precision of any
//! receiver; the classical Fisher information (CFI) is what the homodyne
//! receiver actually delivers. Three operating modes fix the homodyne
//! phase: mode 1 (`phi_H = pi/2`) reads the displacement, mode 2 picks the
//! phase that maximizes the variance sensitivity, and mode 3 maximizes the
//! total CFI over `sigma = sin^2 phi_H`, falling back to mode 1 whenever
//! the interior optimum `sigma_opt` leaves the physical range.

use serde::{Deserialize, Serialize};

use crate::circuit::{output_moments_dense, PhaseModel, SensorConfig};
use crate::error::{Error, Result};

/// Below this squeezing the mode-2/3 phase optimum is numerically
/// undefined (`csch 2r` overflows); callers fall back to mode 1, which is
/// optimal for the classical probe.
pub const R_MIN: f64 = 1e-8;

/// Thermal and squeezing parameters of the probe after uniform loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossyQfiIntermediates {
    /// Mean thermal photon number of the lossy squeezed mode.
    pub n1_bar: f64,
    /// Reduced squeezing parameter after loss.
    pub s_red: f64,
    /// Cross term multiplying the squared mean phase derivative in the QFI.
    pub h: f64,
}

impl LossyQfiIntermediates {
    pub fn compute(r: f64, alpha: f64, tau: f64) -> Self {
        let (n1_bar, s_red) = qfi_intermediates(r, tau);
        Self {
            n1_bar,
            s_red,
            h: h_term(r, alpha, tau),
        }
    }
}

/// Mean and mean-square phase derivatives over the array,
/// `(1/M) sum dtheta_m` and `(1/M) sum dtheta_m^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prefactors {
    pub mean_dtheta: f64,
    pub mean_dtheta_sq: f64,
}

impl Prefactors {
    pub fn from_model(model: &PhaseModel, x: f64) -> Self {
        let d = model.dtheta(x);
        let m = d.len() as f64;
        let mean_dtheta = d.iter().sum::<f64>() / m;
        let mean_dtheta_sq = d.iter().map(|v| v * v).sum::<f64>() / m;
        debug_assert!(mean_dtheta.powi(2) <= mean_dtheta_sq * (1.0 + 1e-12) + 1e-300);
        Self {
            mean_dtheta,
            mean_dtheta_sq,
        }
    }
}

/// Mean thermal photon number and reduced squeezing of the probe's first
/// mode after loss:
///
/// `N1_bar = sqrt(tau (1 - tau) sinh^2 r + 1/4) - 1/2`
/// `s_red  = (1/4) ln[(1 + (e^{2r} - 1) tau) / (1 + (e^{-2r} - 1) tau)]`
pub fn qfi_intermediates(r: f64, tau: f64) -> (f64, f64) {
    let n1_bar = ((tau * (1.0 - tau) * r.sinh().powi(2) + 0.25).sqrt() - 0.5).max(0.0);
    let s_red = 0.25
        * ((1.0 + ((2.0 * r).exp() - 1.0) * tau) / (1.0 + ((-2.0 * r).exp() - 1.0) * tau)).ln();
    (n1_bar, s_red)
}

/// The QFI cross term `h` for a real coherent amplitude.
pub fn h_term(r: f64, alpha: f64, tau: f64) -> f64 {
    let (n1, s) = qfi_intermediates(r, tau);
    let asq = alpha * alpha;
    let k = 2.0 * n1 * (n1 + 1.0) + 1.0;
    let numerator = 8.0 * tau * asq * k * (s.sinh().powi(2) - n1)
        + 2.0 * (2.0 * asq) * k * tau * (2.0 * s).sinh()
        + (2.0 * n1 + 1.0).powi(3) * (4.0 * s).cosh()
        - 2.0 * k * (2.0 * n1 + 1.0).powi(2) * (2.0 * s).cosh()
        + 2.0 * n1
        + 1.0;
    // The denominator polynomial is (N1 + 1)^4 - N1^4 >= 1.
    numerator / (4.0 * (4.0 * n1.powi(3) + 6.0 * n1.powi(2) + 4.0 * n1 + 1.0))
}

/// QFI for the parameter `x` under uniform pure loss:
///
/// `H_x = 2 (sinh^2 s_red + tau |alpha|^2 + N1_bar cosh 2 s_red) <dtheta^2>
///        + h <dtheta>^2`
///
/// with the prefactors evaluated at `x`. Requires a real amplitude.
pub fn qfi(cfg: &SensorConfig, model: &PhaseModel, x: f64) -> Result<f64> {
    cfg.validate()?;
    check_modes(cfg, model)?;
    let alpha = cfg.real_alpha()?;
    let pf = Prefactors::from_model(model, x);
    let (n1, s) = qfi_intermediates(cfg.r, cfg.tau);
    let h = h_term(cfg.r, alpha, cfg.tau);
    Ok(
        2.0 * (s.sinh().powi(2) + cfg.tau * alpha * alpha + n1 * (2.0 * s).cosh())
            * pf.mean_dtheta_sq
            + h * pf.mean_dtheta.powi(2),
    )
}

/// Lossless QFI as a function of the input photon numbers
/// `N_s = sinh^2 r` and `N_v = |alpha|^2` (real amplitude):
///
/// `H_x = <dtheta>^2 [N_v (sqrt(N_s) + sqrt(N_s + 1))^2 + 2 N_s (N_s + 1) - N]
///        + 2 <dtheta^2> N`
///
/// Used as the independent algebraic route against the lossy form at
/// `tau = 1`.
pub fn qfi_lossless(cfg: &SensorConfig, model: &PhaseModel, x: f64) -> Result<f64> {
    cfg.validate()?;
    check_modes(cfg, model)?;
    cfg.real_alpha()?;
    let pf = Prefactors::from_model(model, x);
    let ns = cfg.n_squeezed();
    let nv = cfg.n_coherent();
    let n = ns + nv;
    Ok(
        pf.mean_dtheta.powi(2)
            * (nv * (ns.sqrt() + (ns + 1.0).sqrt()).powi(2) + 2.0 * ns * (ns + 1.0) - n)
            + 2.0 * pf.mean_dtheta_sq * n,
    )
}

/// Displacement and variance contributions `(I_d, I_V)` to the CFI at the
/// reference point `x0`, for the configured homodyne phase:
///
/// `I_d = tau <dtheta>^2 sin^2(phi_H) |alpha|^2 / D`
/// `I_V = tau^2 <dtheta>^2 sin^2(2 phi_H) sinh^2(2r) / (2 D^2)`
/// `D   = 1 - tau + tau [cos^2(phi_H) e^{2r} + sin^2(phi_H) e^{-2r}]`
pub fn cfi_components(cfg: &SensorConfig, model: &PhaseModel) -> Result<(f64, f64)> {
    cfg.validate()?;
    check_modes(cfg, model)?;
    let alpha = cfg.real_alpha()?;
    let pf = Prefactors::from_model(model, cfg.x0);
    let mdt2 = pf.mean_dtheta.powi(2);
    let sin2 = cfg.phi_h.sin().powi(2);
    let cos2 = cfg.phi_h.cos().powi(2);
    let denom =
        1.0 - cfg.tau + cfg.tau * (cos2 * (2.0 * cfg.r).exp() + sin2 * (-2.0 * cfg.r).exp());
    let i_d = cfg.tau * mdt2 * sin2 * alpha * alpha / denom;
    let i_v = cfg.tau.powi(2) * mdt2 * (2.0 * cfg.phi_h).sin().powi(2)
        * (2.0 * cfg.r).sinh().powi(2)
        / (2.0 * denom * denom);
    Ok((i_d, i_v))
}

/// Mode 1: `phi_H = pi/2`, maximum displacement sensitivity.
///
/// `I^(1) = tau <dtheta>^2 |alpha|^2 / (tau e^{-2r} + 1 - tau)`
pub fn cfi_mode1(cfg: &SensorConfig, model: &PhaseModel) -> Result<f64> {
    cfg.validate()?;
    check_modes(cfg, model)?;
    let alpha = cfg.real_alpha()?;
    let pf = Prefactors::from_model(model, cfg.x0);
    Ok(cfg.tau * pf.mean_dtheta.powi(2) * alpha * alpha
        / (cfg.tau * (-2.0 * cfg.r).exp() + 1.0 - cfg.tau))
}

/// Homodyne phase that maximizes the variance sensitivity,
/// `phi_H = (1/2) arccos(-tau sinh 2r / (1 + 2 tau sinh^2 r))`.
pub fn mode2_phase(r: f64, tau: f64) -> f64 {
    0.5 * (-tau * (2.0 * r).sinh() / (1.0 + 2.0 * tau * r.sinh().powi(2))).acos()
}

/// Mode-2 CFI value, with a flag marking the degenerate-squeezing fallback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfiMode2 {
    pub value: f64,
    /// True when `r <= R_MIN` and the value is the CFI at `phi_H = pi/4`
    /// (where `I_V = 0` identically for the classical probe).
    pub degenerate: bool,
}

/// Mode 2: variance-optimal homodyne phase.
///
/// `I_d^(2) = (1/2) tau <dtheta>^2 |alpha|^2 / (tau e^{-2r} + 1 - tau)`
/// `I_V^(2) = (1/2) tau^2 <dtheta>^2 sinh^2(2r) / (1 + 4 tau (1 - tau) sinh^2 r)`
pub fn cfi_mode2(cfg: &SensorConfig, model: &PhaseModel) -> Result<CfiMode2> {
    cfg.validate()?;
    check_modes(cfg, model)?;
    let alpha = cfg.real_alpha()?;
    if cfg.r <= R_MIN {
        let quarter = SensorConfig {
            phi_h: std::f64::consts::FRAC_PI_4,
            ..*cfg
        };
        let (i_d, i_v) = cfi_components(&quarter, model)?;
        return Ok(CfiMode2 {
            value: i_d + i_v,
            degenerate: true,
        });
    }
    let pf = Prefactors::from_model(model, cfg.x0);
    let mdt2 = pf.mean_dtheta.powi(2);
    let i_d = 0.5 * cfg.tau * mdt2 * alpha * alpha
        / (cfg.tau * (-2.0 * cfg.r).exp() + 1.0 - cfg.tau);
    let i_v = 0.5 * cfg.tau.powi(2) * mdt2 * (2.0 * cfg.r).sinh().powi(2)
        / (1.0 + 4.0 * cfg.tau * (1.0 - cfg.tau) * cfg.r.sinh().powi(2));
    Ok(CfiMode2 {
        value: i_d + i_v,
        degenerate: false,
    })
}

/// The value of `sigma = sin^2 phi_H` that maximizes the total CFI:
///
/// `sigma_opt = [1 + tau (e^{2r} - 1)] [tau sinh 2r + g]
///              / (2 tau sinh 2r [1 - tau + tau cosh 2r + g])`
/// `g = (1/2) |alpha|^2 [csch 2r + tau tanh r + tau]`
///
/// May exceed 1; signals the degenerate regime for `r <= R_MIN` or
/// `tau = 0`, in which case callers fall back to mode 1.
pub fn sigma_opt(cfg: &SensorConfig) -> Result<f64> {
    cfg.validate()?;
    let alpha = cfg.real_alpha()?;
    if cfg.r <= R_MIN || cfg.tau == 0.0 {
        return Err(Error::DegenerateSqueezing { r_min: R_MIN });
    }
    let s2r = (2.0 * cfg.r).sinh();
    let g = 0.5 * alpha * alpha * (1.0 / s2r + cfg.tau * cfg.r.tanh() + cfg.tau);
    Ok(
        (1.0 + cfg.tau * ((2.0 * cfg.r).exp() - 1.0)) * (cfg.tau * s2r + g)
            / (2.0 * cfg.tau * s2r * (1.0 - cfg.tau + cfg.tau * (2.0 * cfg.r).cosh() + g)),
    )
}

/// Mode 3: fully optimized CFI.
///
/// Returns the interior optimum
///
/// `I^(3) = {2 tau sinh^2 2r + |alpha|^2 [1 + (e^{2r} - 1) tau]}^2 <dtheta>^2
///          / (8 sinh^2 2r [1 + 4 tau (1 - tau) sinh^2 r])`
///
/// when `sigma_opt < 1`, and the mode-1 value otherwise (including the
/// degenerate-squeezing regime). The formula is the exact value of
/// `I_d + I_V` at `sigma = sigma_opt`, verified against a numeric scan
/// over the homodyne phase.
pub fn cfi_mode3(cfg: &SensorConfig, model: &PhaseModel) -> Result<f64> {
    match sigma_opt(cfg) {
        Err(Error::DegenerateSqueezing { .. }) => cfi_mode1(cfg, model),
        Err(e) => Err(e),
        Ok(s) if s >= 1.0 => cfi_mode1(cfg, model),
        Ok(_) => {
            check_modes(cfg, model)?;
            let alpha = cfg.real_alpha()?;
            let pf = Prefactors::from_model(model, cfg.x0);
            let s2r_sq = (2.0 * cfg.r).sinh().powi(2);
            let top = 2.0 * cfg.tau * s2r_sq
                + alpha * alpha * (1.0 + ((2.0 * cfg.r).exp() - 1.0) * cfg.tau);
            Ok(top.powi(2) * pf.mean_dtheta.powi(2)
                / (8.0
                    * s2r_sq
                    * (1.0 + 4.0 * cfg.tau * (1.0 - cfg.tau) * cfg.r.sinh().powi(2))))
        }
    }
}

/// CFI at an arbitrary point `x` by central finite differences of the
/// measured mode's mean and variance:
///
/// `I(x) = (d mu / dx)^2 / V + (1/2) (dV/dx / V)^2`
///
/// Uses the dense propagation path, so complex amplitudes are allowed.
pub fn cfi_numeric(cfg: &SensorConfig, model: &PhaseModel, x: f64) -> Result<f64> {
    let h = 1e-5 * x.abs().max(1.0);
    let (mean_p, var_p) = output_moments_dense(cfg, model, x + h)?;
    let (mean_m, var_m) = output_moments_dense(cfg, model, x - h)?;
    let (_, var) = output_moments_dense(cfg, model, x)?;
    if var.is_nan() || var <= 0.0 {
        return Err(Error::Internal(format!(
            "homodyne variance {var} is not positive"
        )));
    }
    let dmean = (mean_p - mean_m) / (2.0 * h);
    let dvar = (var_p - var_m) / (2.0 * h);
    Ok(dmean * dmean / var + 0.5 * (dvar / var).powi(2))
}

/// Objective for the energy-allocation search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationObjective {
    Qfi,
    CfiMode3,
}

/// Splits a total photon budget `N` between squeezing (`N_s = eta N`) and
/// coherent light (`N_v = (1 - eta) N`) to maximize the objective at `x0`.
///
/// Coarse 101-point grid followed by golden-section refinement to `1e-6`
/// in `eta`; flat objectives tie-break to the smallest `eta`.
pub fn optimize_energy_allocation(
    n_total: f64,
    tau: f64,
    model: &PhaseModel,
    x0: f64,
    objective: AllocationObjective,
) -> Result<(f64, f64)> {
    if n_total.is_nan() || n_total <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "total photon number N = {n_total} must be positive"
        )));
    }
    let eval = |eta: f64| -> Result<f64> {
        let ns = eta * n_total;
        let nv = (1.0 - eta) * n_total;
        let cfg = SensorConfig::real(
            model.modes(),
            ns.sqrt().asinh(),
            nv.sqrt(),
            tau,
            std::f64::consts::FRAC_PI_2,
            x0,
        )?;
        match objective {
            AllocationObjective::Qfi => qfi(&cfg, model, x0),
            AllocationObjective::CfiMode3 => cfi_mode3(&cfg, model),
        }
    };

    let mut best_eta = 0.0;
    let mut best_val = eval(0.0)?;
    for k in 1..=100 {
        let eta = k as f64 / 100.0;
        let val = eval(eta)?;
        if val > best_val {
            best_val = val;
            best_eta = eta;
        }
    }

    let mut a = (best_eta - 0.01).max(0.0);
    let mut b = (best_eta + 0.01).min(1.0);
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    while b - a > 1e-6 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = eval(d)?;
        }
    }
    let mid = 0.5 * (a + b);
    let fmid = eval(mid)?;
    if fmid > best_val {
        best_val = fmid;
        best_eta = mid;
    }
    Ok((best_eta, best_val))
}

/// Everything the library knows about one sensor configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherReport {
    pub qfi: f64,
    pub cfi_d: f64,
    pub cfi_v: f64,
    pub cfi_mode1: f64,
    pub cfi_mode2: f64,
    pub cfi_mode3: f64,
    /// `None` in the degenerate-squeezing regime where the optimum is
    /// undefined and mode 3 falls back to mode 1.
    pub sigma_opt: Option<f64>,
    pub intermediates: LossyQfiIntermediates,
    pub prefactors: Prefactors,
}

impl FisherReport {
    /// Evaluates the full report at the reference point `cfg.x0`.
    pub fn compute(cfg: &SensorConfig, model: &PhaseModel) -> Result<Self> {
        let alpha = cfg.real_alpha()?;
        let (cfi_d, cfi_v) = cfi_components(cfg, model)?;
        let sigma = match sigma_opt(cfg) {
            Ok(s) => Some(s),
            Err(Error::DegenerateSqueezing { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            qfi: qfi(cfg, model, cfg.x0)?,
            cfi_d,
            cfi_v,
            cfi_mode1: cfi_mode1(cfg, model)?,
            cfi_mode2: cfi_mode2(cfg, model)?.value,
            cfi_mode3: cfi_mode3(cfg, model)?,
            sigma_opt: sigma,
            intermediates: LossyQfiIntermediates::compute(cfg.r, alpha, cfg.tau),
            prefactors: Prefactors::from_model(model, cfg.x0),
        })
    }
}

fn check_modes(cfg: &SensorConfig, model: &PhaseModel) -> Result<()> {
    if model.modes() != cfg.m {
        return Err(Error::DimensionMismatch(format!(
            "model has {} modes, sensor expects {}",
            model.modes(),
            cfg.m
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn equal_cfg(m: usize, r: f64, alpha: f64, tau: f64) -> (SensorConfig, PhaseModel) {
        let cfg = SensorConfig::real(m, r, alpha, tau, std::f64::consts::FRAC_PI_2, 0.0).unwrap();
        (cfg, PhaseModel::equal_phases(m))
    }

    #[test]
    fn intermediates_limits() {
        let r = 0.9;
        let (n1, s) = qfi_intermediates(r, 1.0);
        assert_abs_diff_eq!(n1, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s, r, epsilon = 1e-12);

        let (n1, s) = qfi_intermediates(0.0, 0.6);
        assert_abs_diff_eq!(n1, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s, 0.0, epsilon = 1e-15);

        let (n1, _) = qfi_intermediates(1.0, 0.5);
        let expect = (0.25 * 1.0f64.sinh().powi(2) + 0.25).sqrt() - 0.5;
        assert_abs_diff_eq!(n1, expect, epsilon = 1e-15);
        assert!((n1 - 0.2716).abs() < 1e-4);
    }

    #[test]
    fn h_term_vanishes_for_vacuum_probe() {
        assert_abs_diff_eq!(h_term(0.0, 0.0, 1.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h_term(0.0, 0.0, 0.3), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn h_term_matches_lossless_reduction() {
        // At tau = 1 the cross term must be
        // 2 Nv Ns + 2 Nv sqrt(Ns (Ns + 1)) + Ns + 2 Ns^2.
        for &(r, alpha) in &[(1.0f64, 0.0), (0.5, 1.3), (1.7, 2.0)] {
            let ns = r.sinh().powi(2);
            let nv = alpha * alpha;
            let expect =
                2.0 * nv * ns + 2.0 * nv * (ns * (ns + 1.0)).sqrt() + ns + 2.0 * ns * ns;
            let rel = (h_term(r, alpha, 1.0) - expect).abs() / expect.abs().max(1.0);
            assert!(rel < 1e-12, "r={r} alpha={alpha} rel={rel}");
        }
    }

    #[test]
    fn qfi_anchor_value() {
        // M = 2, equal phases, Ns = 1, Nv = 0, tau = 1 -> H = 5.
        let (cfg, model) = equal_cfg(2, 1.0f64.asinh(), 0.0, 1.0);
        let h = qfi(&cfg, &model, 0.0).unwrap();
        assert_abs_diff_eq!(h, 5.0, epsilon = 1e-10);
    }

    #[test]
    fn classical_probe_qfi() {
        let model = PhaseModel::linear(vec![0.5, -1.0, 2.0]);
        let cfg = SensorConfig::real(3, 0.0, 1.7, 1.0, 0.0, 0.0).unwrap();
        let pf = Prefactors::from_model(&model, 0.0);
        let h = qfi(&cfg, &model, 0.0).unwrap();
        assert_abs_diff_eq!(h, 2.0 * pf.mean_dtheta_sq * cfg.n_coherent(), epsilon = 1e-12);
    }

    #[test]
    fn lossy_qfi_reduces_to_lossless_at_unit_transmissivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let m = rng.random_range(1..=8usize);
            let coeffs: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
            let model = PhaseModel::linear(coeffs);
            let cfg = SensorConfig::real(
                m,
                rng.random_range(0.0..2.0),
                rng.random_range(0.0..5.0),
                1.0,
                0.0,
                0.0,
            )
            .unwrap();
            let a = qfi(&cfg, &model, 0.0).unwrap();
            let b = qfi_lossless(&cfg, &model, 0.0).unwrap();
            let rel = (a - b).abs() / b.abs().max(1e-12);
            assert!(rel < 1e-10, "m={m} rel={rel}");
        }
    }

    #[test]
    fn cfi_components_special_phases() {
        let (mut cfg, model) = equal_cfg(2, 0.8, 1.3, 0.75);
        cfg.phi_h = 0.0;
        assert_eq!(cfi_components(&cfg, &model).unwrap(), (0.0, 0.0));

        cfg.phi_h = std::f64::consts::FRAC_PI_2;
        let (i_d, i_v) = cfi_components(&cfg, &model).unwrap();
        assert_abs_diff_eq!(i_d, cfi_mode1(&cfg, &model).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(i_v, 0.0, epsilon = 1e-20);
    }

    #[test]
    fn heisenberg_scaling_anchor() {
        // tau = 1, phi_H = pi/2, Ns = 1, Nv = 1: I_d = (1 + sqrt 2)^2.
        let (cfg, model) = equal_cfg(1, 1.0f64.asinh(), 1.0, 1.0);
        let (i_d, _) = cfi_components(&cfg, &model).unwrap();
        assert_abs_diff_eq!(i_d, (1.0 + f64::sqrt(2.0)).powi(2), epsilon = 1e-10);
    }

    #[test]
    fn mode1_identities() {
        let (cfg, model) = equal_cfg(3, 0.0, 1.4, 1.0);
        assert_abs_diff_eq!(
            cfi_mode1(&cfg, &model).unwrap(),
            cfg.n_coherent(),
            epsilon = 1e-12
        );

        // tau = 1: I^(1) = <dtheta>^2 Nv (sqrt Ns + sqrt(Ns + 1))^2.
        let (cfg, model) = equal_cfg(2, 0.9, 1.1, 1.0);
        let ns = cfg.n_squeezed();
        let expect = cfg.n_coherent() * (ns.sqrt() + (ns + 1.0).sqrt()).powi(2);
        assert_abs_diff_eq!(cfi_mode1(&cfg, &model).unwrap(), expect, epsilon = 1e-10);

        let (cfg, model) = equal_cfg(2, 0.9, 0.0, 0.8);
        assert_eq!(cfi_mode1(&cfg, &model).unwrap(), 0.0);
    }

    #[test]
    fn mode2_lossless_variance_term() {
        // tau = 1, Ns = 1, alpha = 0: I_V^(2) = 2 Ns (Ns + 1) = 4.
        let (cfg, model) = equal_cfg(1, 1.0f64.asinh(), 0.0, 1.0);
        let m2 = cfi_mode2(&cfg, &model).unwrap();
        assert!(!m2.degenerate);
        assert_abs_diff_eq!(m2.value, 4.0, epsilon = 1e-10);

        let (cfg, model) = equal_cfg(1, 0.7, 0.0, 0.0);
        assert_eq!(cfi_mode2(&cfg, &model).unwrap().value, 0.0);
    }

    #[test]
    fn mode2_matches_components_at_its_phase() {
        let model = PhaseModel::linear(vec![1.0, 0.3, -0.5]);
        let mut cfg = SensorConfig::real(3, 0.8, 1.0, 0.7, 0.0, 0.0).unwrap();
        cfg.phi_h = mode2_phase(cfg.r, cfg.tau);
        let (i_d, i_v) = cfi_components(&cfg, &model).unwrap();
        let m2 = cfi_mode2(&cfg, &model).unwrap();
        let rel = (m2.value - (i_d + i_v)).abs() / m2.value;
        assert!(rel < 1e-10, "rel = {rel}");
    }

    #[test]
    fn mode2_degenerate_fallback() {
        let (cfg, model) = equal_cfg(2, 0.0, 1.5, 0.9);
        let m2 = cfi_mode2(&cfg, &model).unwrap();
        assert!(m2.degenerate);
        let quarter = SensorConfig {
            phi_h: std::f64::consts::FRAC_PI_4,
            ..cfg
        };
        let (i_d, i_v) = cfi_components(&quarter, &model).unwrap();
        assert_abs_diff_eq!(i_v, 0.0, epsilon = 1e-20);
        assert_abs_diff_eq!(m2.value, i_d, epsilon = 1e-12);
    }

    #[test]
    fn sigma_opt_closed_cases() {
        let (cfg, _) = equal_cfg(1, 0.6, 0.0, 1.0);
        let s = sigma_opt(&cfg).unwrap();
        assert_abs_diff_eq!(
            s,
            (2.0 * cfg.r).exp() / (2.0 * (2.0 * cfg.r).cosh()),
            epsilon = 1e-12
        );
        assert!(s < 1.0);

        // Coherent-dominated limit.
        let (cfg, _) = equal_cfg(1, 0.4, 1e4, 0.8);
        let s = sigma_opt(&cfg).unwrap();
        let limit = (1.0 + cfg.tau * ((2.0 * cfg.r).exp() - 1.0))
            / (2.0 * cfg.tau * (2.0 * cfg.r).sinh());
        assert!((s - limit).abs() / limit < 1e-6);
        assert!(s > 1.0);

        let (cfg, _) = equal_cfg(1, 0.0, 1.0, 0.9);
        assert!(matches!(
            sigma_opt(&cfg),
            Err(Error::DegenerateSqueezing { .. })
        ));
    }

    #[test]
    fn sigma_opt_maximizes_the_cfi() {
        // Numeric maximization oracle over sigma = sin^2 phi_H.
        for &(r, alpha, tau) in &[(0.8, 0.3, 0.9), (0.5, 0.0, 0.7), (1.2, 1.0, 1.0)] {
            let (cfg, model) = equal_cfg(2, r, alpha, tau);
            let s_opt = sigma_opt(&cfg).unwrap();
            let cap = s_opt.min(1.0);
            let at = |sigma: f64| {
                let cfg_s = SensorConfig {
                    phi_h: sigma.sqrt().asin(),
                    ..cfg
                };
                let (i_d, i_v) = cfi_components(&cfg_s, &model).unwrap();
                i_d + i_v
            };
            let best_grid = (0..=1000)
                .map(|k| at(k as f64 / 1000.0))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(
                at(cap) >= best_grid - 1e-9 * best_grid.abs(),
                "r={r} alpha={alpha} tau={tau}"
            );
        }
    }

    #[test]
    fn mode3_lossless_anchor_and_fallbacks() {
        // tau = 1, alpha = 0, Ns = 1 -> 2 Ns (Ns + 1) = 4.
        let (cfg, model) = equal_cfg(1, 1.0f64.asinh(), 0.0, 1.0);
        assert_abs_diff_eq!(cfi_mode3(&cfg, &model).unwrap(), 4.0, epsilon = 1e-10);

        let (cfg, model) = equal_cfg(2, 0.0, 1.5, 0.8);
        assert_eq!(
            cfi_mode3(&cfg, &model).unwrap(),
            cfi_mode1(&cfg, &model).unwrap()
        );
    }

    #[test]
    fn mode3_lossless_matches_photon_number_form() {
        // tau = 1: I^(3) = <dtheta>^2 [8 Ns (Ns+1) + Nv (sqrt Ns + sqrt(Ns+1))^2]^2
        //                  / (32 Ns (Ns + 1)).
        for &(r, alpha) in &[(0.8, 0.5), (1.4, 2.0), (0.3, 0.0)] {
            let (cfg, model) = equal_cfg(2, r, alpha, 1.0);
            let ns = cfg.n_squeezed();
            let nv = cfg.n_coherent();
            let tilde = (8.0 * ns * (ns + 1.0) + nv * (ns.sqrt() + (ns + 1.0).sqrt()).powi(2))
                .powi(2)
                / (32.0 * ns * (ns + 1.0));
            let got = cfi_mode3(&cfg, &model).unwrap();
            let expect = if sigma_opt(&cfg).unwrap() < 1.0 {
                tilde
            } else {
                cfi_mode1(&cfg, &model).unwrap()
            };
            let rel = (got - expect).abs() / expect;
            assert!(rel < 1e-10, "r={r} alpha={alpha} rel={rel}");
        }
    }

    #[test]
    fn mode3_equals_components_at_optimal_phase() {
        for &(r, alpha, tau) in &[(1.4, 2.0, 0.51), (0.8, 0.3, 0.9), (0.63, 0.86, 0.74)] {
            let (cfg, model) = equal_cfg(3, r, alpha, tau);
            let s_opt = sigma_opt(&cfg).unwrap();
            assert!(s_opt < 1.0, "pick configs with an interior optimum");
            let at_opt = SensorConfig {
                phi_h: s_opt.sqrt().asin(),
                ..cfg
            };
            let (i_d, i_v) = cfi_components(&at_opt, &model).unwrap();
            let m3 = cfi_mode3(&cfg, &model).unwrap();
            let rel = (m3 - (i_d + i_v)).abs() / m3;
            assert!(rel < 1e-10, "r={r} alpha={alpha} tau={tau} rel={rel}");
        }
    }

    #[test]
    fn mode3_dominates_other_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..40 {
            let (cfg, model) = equal_cfg(
                rng.random_range(1..=6usize),
                rng.random_range(0.0..1.5),
                rng.random_range(0.0..3.0),
                rng.random_range(0.0..=1.0),
            );
            let m1 = cfi_mode1(&cfg, &model).unwrap();
            let m2 = cfi_mode2(&cfg, &model).unwrap().value;
            let m3 = cfi_mode3(&cfg, &model).unwrap();
            let floor = m1.max(m2);
            assert!(m3 >= floor - 1e-9 * floor.abs() - 1e-12, "m3={m3} floor={floor}");
        }
    }

    #[test]
    fn numeric_cfi_matches_closed_form_at_reference() {
        let model = PhaseModel::linear(vec![1.0, 2.0, 3.0, 4.0]);
        let cfg = SensorConfig::real(4, 0.5, 2.0, 0.8, std::f64::consts::FRAC_PI_2, 0.0).unwrap();
        let (i_d, i_v) = cfi_components(&cfg, &model).unwrap();
        let numeric = cfi_numeric(&cfg, &model, 0.0).unwrap();
        let rel = (numeric - (i_d + i_v)).abs() / (i_d + i_v);
        assert!(rel < 1e-5, "rel = {rel}");
    }

    #[test]
    fn numeric_cfi_off_reference_classical_value() {
        // r = 0: I(x) = tau alpha^2 [ (1/M) sum dtheta_m sin(phi_H + dtheta_m (x - x0)) ]^2 * M^2 / M^2
        // evaluated directly from the derivative of the mean at constant variance.
        let coeffs = vec![1.0, 2.0];
        let model = PhaseModel::linear(coeffs.clone());
        let cfg = SensorConfig::real(2, 0.0, 1.5, 1.0, std::f64::consts::FRAC_PI_2, 0.0).unwrap();
        let x = 0.2;
        let msum: f64 = coeffs
            .iter()
            .map(|c| c * (cfg.phi_h + c * x).sin())
            .sum::<f64>()
            / coeffs.len() as f64;
        let expect = cfg.tau * cfg.n_coherent() * msum * msum;
        let got = cfi_numeric(&cfg, &model, x).unwrap();
        let rel = (got - expect).abs() / expect;
        assert!(rel < 1e-5, "got={got} expect={expect}");
    }

    #[test]
    fn numeric_cfi_of_constant_phases_is_zero() {
        let model = PhaseModel::analytic(2, |_| vec![0.4, -0.1], |_| vec![0.0, 0.0]);
        let cfg = SensorConfig::real(2, 0.3, 1.0, 0.9, 0.7, 0.0).unwrap();
        assert_abs_diff_eq!(cfi_numeric(&cfg, &model, 0.0).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn allocation_prefers_squeezing_without_loss() {
        let model = PhaseModel::equal_phases(4);
        let (eta, _) =
            optimize_energy_allocation(4.0, 1.0, &model, 0.0, AllocationObjective::CfiMode3)
                .unwrap();
        assert!(eta > 1.0 - 1e-5, "eta = {eta}");

        let (eta, _) =
            optimize_energy_allocation(50.0, 1.0, &model, 0.0, AllocationObjective::Qfi).unwrap();
        assert!(eta > 1.0 - 1e-5, "eta = {eta}");
    }

    #[test]
    fn allocation_handles_flat_objective() {
        let model = PhaseModel::equal_phases(2);
        let (eta, value) =
            optimize_energy_allocation(3.0, 0.0, &model, 0.0, AllocationObjective::CfiMode3)
                .unwrap();
        assert_eq!(eta, 0.0);
        assert_eq!(value, 0.0);
    }

    #[test]
    fn allocation_beats_endpoints() {
        let model = PhaseModel::equal_phases(4);
        for &tau in &[0.9, 0.6, 0.3] {
            let (_, value) =
                optimize_energy_allocation(8.0, tau, &model, 0.0, AllocationObjective::CfiMode3)
                    .unwrap();
            for eta in [0.0f64, 1.0] {
                let ns = eta * 8.0;
                let cfg = SensorConfig::real(
                    4,
                    ns.sqrt().asinh(),
                    (8.0 - ns).sqrt(),
                    tau,
                    std::f64::consts::FRAC_PI_2,
                    0.0,
                )
                .unwrap();
                let end = cfi_mode3(&cfg, &model).unwrap();
                assert!(value >= end - 1e-9 * end.abs(), "tau={tau} eta={eta}");
            }
        }
    }

    #[test]
    fn report_respects_cramer_rao_ordering() {
        for &(r, alpha, tau) in &[(0.7, 1.2, 0.85), (0.0, 2.0, 0.5), (1.1, 0.0, 1.0)] {
            let (cfg, model) = equal_cfg(3, r, alpha, tau);
            let report = FisherReport::compute(&cfg, &model).unwrap();
            let tol = 1e-9 * report.qfi.abs() + 1e-12;
            for v in [
                report.cfi_d + report.cfi_v,
                report.cfi_mode1,
                report.cfi_mode2,
                report.cfi_mode3,
            ] {
                assert!(v >= 0.0);
                assert!(v <= report.qfi + tol, "v={v} qfi={}", report.qfi);
            }
        }
    }
}
