//! Concrete phase models for three sensing applications: a 1D RF-photonic
//! phased array estimating an angle of incidence, beam-displacement
//! tracking through modal crosstalk, and fiber-based temperature
//! gradiometry estimating a thermal conductivity.

use crate::circuit::PhaseModel;
use crate::error::{Error, Result};
use crate::fisher::Prefactors;

/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// A 1D array of `M` RF-photonic phase modulators at pitch `b`, reading an
/// RF field of angular frequency `omega_rf` arriving at angle `phi`:
///
/// `theta_m(phi) = a sin(omega_rf (t + m b sin(phi) / c))`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfArrayModel {
    /// Amplitude-phase modulation efficiency (dimensionless).
    pub a: f64,
    /// RF angular frequency, rad/s.
    pub omega_rf: f64,
    /// Sensor pitch, m.
    pub b: f64,
    /// Number of sensors.
    pub m: usize,
    /// Evaluation time, s.
    pub t: f64,
}

impl RfArrayModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.omega_rf > 0.0 && self.b > 0.0) {
            return Err(Error::InvalidArgument(
                "RF model requires a, omega_rf, b > 0".into(),
            ));
        }
        if self.m == 0 {
            return Err(Error::InvalidArgument("RF model requires M >= 1".into()));
        }
        Ok(())
    }
}

/// Phase model for [`RfArrayModel`], with the analytic derivative
/// `d theta_m / d phi = a cos(omega_rf (t + m b sin(phi)/c)) omega_rf m b cos(phi) / c`.
pub fn rf_phase_model(model: &RfArrayModel) -> Result<PhaseModel> {
    model.validate()?;
    let RfArrayModel { a, omega_rf, b, m, t } = *model;
    let theta = move |phi: f64| -> Vec<f64> {
        (1..=m)
            .map(|k| a * (omega_rf * (t + k as f64 * b * phi.sin() / SPEED_OF_LIGHT)).sin())
            .collect()
    };
    let dtheta = move |phi: f64| -> Vec<f64> {
        (1..=m)
            .map(|k| {
                let mb = k as f64 * b;
                a * (omega_rf * (t + mb * phi.sin() / SPEED_OF_LIGHT)).cos()
                    * omega_rf
                    * mb
                    * phi.cos()
                    / SPEED_OF_LIGHT
            })
            .collect()
    };
    Ok(PhaseModel::analytic(m, theta, dtheta))
}

/// Crosstalk eigen-coefficients of a beam-displacement sensor unraveled
/// into `M` interferometers with phases `2 lambda_m delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamDisplacementModel {
    pub lambdas: Vec<f64>,
}

impl BeamDisplacementModel {
    pub fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() {
            return Err(Error::InvalidArgument(
                "beam-displacement model needs at least one coefficient".into(),
            ));
        }
        if self.lambdas.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidArgument(
                "beam-displacement coefficients must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// CFI/QFI prefactors of the beam-displacement sensor at `delta_0 = 0`:
/// `<dtheta>^2 = (1/M^2)(sum 2 lambda_m)^2`, `<dtheta^2> = (1/M) sum (2 lambda_m)^2`.
pub fn beam_displacement_prefactor(model: &BeamDisplacementModel) -> Result<Prefactors> {
    model.validate()?;
    let m = model.lambdas.len() as f64;
    let mean_dtheta = model.lambdas.iter().map(|l| 2.0 * l).sum::<f64>() / m;
    let mean_dtheta_sq = model.lambdas.iter().map(|l| (2.0 * l).powi(2)).sum::<f64>() / m;
    Ok(Prefactors {
        mean_dtheta,
        mean_dtheta_sq,
    })
}

/// Linear phase model `theta_m(delta) = 2 lambda_m delta`.
pub fn beam_phase_model(model: &BeamDisplacementModel) -> Result<PhaseModel> {
    model.validate()?;
    Ok(PhaseModel::linear(
        model.lambdas.iter().map(|l| 2.0 * l).collect(),
    ))
}

/// Fiber temperature gradiometer estimating the thermal conductivity `k`
/// of a rod from phases accumulated at times `t_m = m / w`.
///
/// The temperature field is the infinite-rod heat kernel for an initial
/// pulse of magnitude `q` at the origin,
/// `u(y, t) = q exp(-y^2 / (4 D t)) / sqrt(4 pi D t)` with diffusivity
/// `D = k / (rho c_p)`, and the fiber converts temperature to phase
/// linearly: `theta_m(k) = beta u(y0, t_m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradiometryModel {
    /// Rod density, kg/m^3.
    pub rho_density: f64,
    /// Specific heat, J/(kg K).
    pub c_p: f64,
    /// Fiber position along the rod, m.
    pub y0: f64,
    /// Source bandwidth, Hz; samples are taken at `t_m = m / w`.
    pub w: f64,
    /// Phase per kelvin, rad/K.
    pub beta: f64,
    /// Initial heat pulse magnitude, K m.
    pub q: f64,
    /// Number of temporal modes.
    pub m: usize,
}

impl GradiometryModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho_density > 0.0 && self.c_p > 0.0 && self.w > 0.0 && self.q > 0.0) {
            return Err(Error::InvalidArgument(
                "gradiometry model requires rho_density, c_p, w, q > 0".into(),
            ));
        }
        if self.m == 0 {
            return Err(Error::InvalidArgument(
                "gradiometry model requires M >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Heat-kernel temperature at `(y0, t)` for conductivity `k`.
    pub fn temperature(&self, k: f64, t: f64) -> f64 {
        let diffusivity = k / (self.rho_density * self.c_p);
        self.q * (-self.y0 * self.y0 / (4.0 * diffusivity * t)).exp()
            / (4.0 * std::f64::consts::PI * diffusivity * t).sqrt()
    }
}

/// Phase model for [`GradiometryModel`]; the derivative in `k` uses the
/// central-difference default. Sampling starts at `m = 1`, so the
/// heat-kernel singularity at `t = 0` is never evaluated.
pub fn gradiometry_phase_model(model: &GradiometryModel) -> Result<PhaseModel> {
    model.validate()?;
    let g = *model;
    Ok(PhaseModel::numeric(g.m, move |k: f64| {
        (1..=g.m)
            .map(|i| g.beta * g.temperature(k, i as f64 / g.w))
            .collect()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::SensorConfig;
    use crate::fisher;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn fig3_rf(m: usize) -> RfArrayModel {
        RfArrayModel {
            a: 0.1,
            omega_rf: 3.0e4,
            b: 10.0,
            m,
            t: 0.0,
        }
    }

    #[test]
    fn rf_derivative_at_normal_incidence() {
        // At phi = 0, t = 0: dtheta_m = a omega b m / c = 1e-4 m.
        let model = rf_phase_model(&fig3_rf(5)).unwrap();
        let d = model.dtheta(0.0);
        for (i, dm) in d.iter().enumerate() {
            assert_abs_diff_eq!(*dm, 1e-4 * (i + 1) as f64, epsilon = 1e-18);
        }
    }

    #[test]
    fn rf_derivatives_vanish_at_grazing_incidence() {
        let model = rf_phase_model(&fig3_rf(4)).unwrap();
        for dm in model.dtheta(std::f64::consts::FRAC_PI_2) {
            assert!(dm.abs() < 1e-18);
        }
    }

    #[test]
    fn rf_prefactors_close_form() {
        // <dtheta> = 1e-4 (M+1)/2, <dtheta^2> = 1e-8 (M+1)(2M+1)/6.
        let m = 8;
        let model = rf_phase_model(&fig3_rf(m)).unwrap();
        let pf = fisher::Prefactors::from_model(&model, 0.0);
        let mf = m as f64;
        assert_abs_diff_eq!(pf.mean_dtheta, 1e-4 * (mf + 1.0) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            pf.mean_dtheta_sq,
            1e-8 * (mf + 1.0) * (2.0 * mf + 1.0) / 6.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn rf_analytic_derivative_matches_finite_difference() {
        let model = rf_phase_model(&fig3_rf(6)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let points: Vec<f64> = (0..50).map(|_| rng.random_range(-1.2..1.2)).collect();
        model.check_derivative(&points).unwrap();
    }

    #[test]
    fn beam_prefactor_values() {
        let equal = BeamDisplacementModel {
            lambdas: vec![1.0, 1.0],
        };
        let pf = beam_displacement_prefactor(&equal).unwrap();
        assert_abs_diff_eq!(pf.mean_dtheta.powi(2), 4.0, epsilon = 1e-15);

        let mixed = BeamDisplacementModel {
            lambdas: vec![1.0, 2.0],
        };
        let pf = beam_displacement_prefactor(&mixed).unwrap();
        assert_abs_diff_eq!(pf.mean_dtheta.powi(2), 9.0, epsilon = 1e-15);

        assert!(beam_displacement_prefactor(&BeamDisplacementModel { lambdas: vec![] }).is_err());
    }

    #[test]
    fn beam_prefactor_matches_phase_model() {
        let model = BeamDisplacementModel {
            lambdas: vec![0.4, -1.1, 2.3],
        };
        let pf = beam_displacement_prefactor(&model).unwrap();
        let from_phases =
            fisher::Prefactors::from_model(&beam_phase_model(&model).unwrap(), 0.0);
        assert_abs_diff_eq!(pf.mean_dtheta, from_phases.mean_dtheta, epsilon = 1e-12);
        assert_abs_diff_eq!(
            pf.mean_dtheta_sq,
            from_phases.mean_dtheta_sq,
            epsilon = 1e-12
        );
    }

    #[test]
    fn beam_supermode_scaling_is_linear_in_m() {
        // lambda_m chosen so sum lambda_m ~ M^{3/2} makes <dtheta>^2 ~ M.
        let prefactor_at = |m: usize| {
            let lambdas: Vec<f64> = (1..=m).map(|k| (k as f64).sqrt()).collect();
            beam_displacement_prefactor(&BeamDisplacementModel { lambdas })
                .unwrap()
                .mean_dtheta
                .powi(2)
        };
        let ms = [4usize, 8, 16, 32, 64];
        let logs: Vec<(f64, f64)> = ms
            .iter()
            .map(|&m| ((m as f64).ln(), prefactor_at(m).ln()))
            .collect();
        let n = logs.len() as f64;
        let (sx, sy): (f64, f64) = logs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let sxx: f64 = logs.iter().map(|(x, _)| x * x).sum();
        let sxy: f64 = logs.iter().map(|(x, y)| x * y).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!((slope - 1.0).abs() < 0.1, "slope = {slope}");
    }

    fn glass_rod(m: usize) -> GradiometryModel {
        GradiometryModel {
            rho_density: 2200.0,
            c_p: 700.0,
            y0: 0.05,
            w: 10.0,
            beta: 10.0,
            q: 50.0,
            m,
        }
    }

    #[test]
    fn gradiometry_centered_fiber_analytic_derivative() {
        // y0 = 0: u = q / sqrt(4 pi D t), d theta / dk = -beta q / (2 k sqrt(4 pi D t)).
        let mut g = glass_rod(3);
        g.y0 = 0.0;
        let model = gradiometry_phase_model(&g).unwrap();
        let k = 1.4;
        let d = model.dtheta(k);
        for (i, dm) in d.iter().enumerate() {
            let t = (i + 1) as f64 / g.w;
            let diff = k / (g.rho_density * g.c_p);
            let expect = -g.beta * g.q / (2.0 * k * (4.0 * std::f64::consts::PI * diff * t).sqrt());
            assert!(
                (dm - expect).abs() / expect.abs() < 1e-6,
                "m = {i}: {dm} vs {expect}"
            );
        }
    }

    #[test]
    fn gradiometry_long_time_asymptotics() {
        // For D t >> y0^2 the kernel approaches q / sqrt(4 pi D t) and the
        // conductivity derivative is negative.
        let g = glass_rod(2);
        let k = 1e7; // enormous conductivity so D t_1 >> y0^2
        let model = gradiometry_phase_model(&g).unwrap();
        let th = model.theta(k);
        let diff = k / (g.rho_density * g.c_p);
        let flat = g.beta * g.q / (4.0 * std::f64::consts::PI * diff * (1.0 / g.w)).sqrt();
        assert!((th[0] - flat).abs() / flat < 1e-2);
        assert!(model.dtheta(k)[0] < 0.0);
    }

    #[test]
    fn gradiometry_zero_beta_carries_no_information() {
        let mut g = glass_rod(2);
        g.beta = 0.0;
        let model = gradiometry_phase_model(&g).unwrap();
        let cfg = SensorConfig::real(2, 0.4, 1.0, 0.9, std::f64::consts::FRAC_PI_2, 1.4).unwrap();
        assert_eq!(fisher::cfi_mode1(&cfg, &model).unwrap(), 0.0);
        assert_eq!(fisher::qfi(&cfg, &model, 1.4).unwrap(), 0.0);
    }

    #[test]
    fn gradiometry_cfi_continuous_in_conductivity() {
        let g = glass_rod(4);
        let model = gradiometry_phase_model(&g).unwrap();
        let mut previous: Option<f64> = None;
        for i in 0..=40 {
            // A decade of conductivities, log-spaced.
            let k = 0.5 * 10f64.powf(i as f64 / 40.0);
            let cfg =
                SensorConfig::real(4, 0.5, 1.0, 0.9, std::f64::consts::FRAC_PI_2, k).unwrap();
            let cfi = fisher::cfi_mode3(&cfg, &model).unwrap();
            assert!(cfi >= 0.0 && cfi.is_finite());
            if let Some(prev) = previous {
                let jump = (cfi - prev).abs() / prev.abs().max(1e-30);
                assert!(jump < 0.5, "discontinuity at k = {k}: {prev} -> {cfi}");
            }
            previous = Some(cfi);
        }
    }
}
