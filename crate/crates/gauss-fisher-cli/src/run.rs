//! Subcommand runners and CSV/JSON emission.

use gauss_fisher::circuit::SensorConfig;
use gauss_fisher::fisher::{
    cfi_components, cfi_mode1, cfi_mode2, cfi_mode3, cfi_numeric, optimize_energy_allocation,
    qfi, sigma_opt, FisherReport,
};
use gauss_fisher::oracle::{
    fock_final_state, mc_homodyne, number_commutator_derivative, sld_qfi,
};
use gauss_fisher::Error as LibError;
use rayon::prelude::*;
use serde_json::json;

use crate::config::RunConfig;
use crate::{CliError, OutputFormat};

fn run_error(e: LibError) -> CliError {
    CliError::Run(e.to_string())
}

/// Formats a float with Rust's shortest round-trip representation.
fn num(v: f64) -> String {
    format!("{v}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// One record with the full Fisher report at the reference point.
pub fn run_report(cfg: &RunConfig, format: OutputFormat) -> Result<String, CliError> {
    let sensor = cfg.sensor()?;
    let model = cfg.phase_model(cfg.m)?;
    let report = FisherReport::compute(&sensor, &model).map_err(run_error)?;
    match format {
        OutputFormat::Json => {
            let doc = json!({
                "sensor": {
                    "m": cfg.m,
                    "r": cfg.r,
                    "alpha": cfg.alpha,
                    "tau": cfg.tau,
                    "phi_h": cfg.phi_h,
                    "x0": cfg.x0,
                    "model": cfg.model,
                },
                "report": report,
            });
            Ok(format!("{:#}\n", doc))
        }
        OutputFormat::Csv => {
            let header = "m,r,alpha,tau,phi_h,x0,qfi,cfi_d,cfi_v,cfi_mode1,cfi_mode2,cfi_mode3,\
                          sigma_opt,n1_bar,s_red,h,mean_dtheta,mean_dtheta_sq";
            let row = [
                cfg.m.to_string(),
                num(cfg.r),
                num(cfg.alpha),
                num(cfg.tau),
                num(cfg.phi_h),
                num(cfg.x0),
                num(report.qfi),
                num(report.cfi_d),
                num(report.cfi_v),
                num(report.cfi_mode1),
                num(report.cfi_mode2),
                num(report.cfi_mode3),
                opt_num(report.sigma_opt),
                num(report.intermediates.n1_bar),
                num(report.intermediates.s_red),
                num(report.intermediates.h),
                num(report.prefactors.mean_dtheta),
                num(report.prefactors.mean_dtheta_sq),
            ]
            .join(",");
            Ok(format!("{header}\n{row}\n"))
        }
    }
}

struct SweepRow {
    axis_value: f64,
    m: usize,
    tau: f64,
    n: f64,
    eta_star: f64,
    r: f64,
    alpha: f64,
    qfi: f64,
    cfi_mode1: f64,
    cfi_mode2: f64,
    cfi_mode3: f64,
    sigma_opt: Option<f64>,
    qfi_classical: f64,
    cfi_classical: f64,
}

fn axis_values(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    let mut values = match &cfg.axis_values {
        Some(v) if !v.is_empty() => v.clone(),
        _ => {
            let n = cfg.points;
            if n == 1 {
                vec![cfg.axis_min]
            } else {
                (0..n)
                    .map(|k| {
                        cfg.axis_min
                            + (cfg.axis_max - cfg.axis_min) * k as f64 / (n - 1) as f64
                    })
                    .collect()
            }
        }
    };
    values.sort_by(|a, b| a.partial_cmp(b).expect("axis values must be comparable"));
    match cfg.axis.as_str() {
        "M" => {
            if !cfg.model_scales_with_m() {
                return Err(CliError::Config(format!(
                    "field 'axis' = M cannot rebuild model '{}' per point",
                    cfg.model
                )));
            }
            if values.iter().any(|&v| v.round() < 1.0) {
                return Err(CliError::Config(
                    "field 'axis_min': M sweep values must round to at least 1".into(),
                ));
            }
        }
        "tau" => {
            if values.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                return Err(CliError::Config(
                    "field 'axis_min'/'axis_max': tau sweep values must lie in [0, 1]".into(),
                ));
            }
        }
        "eta" => {
            if values.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                return Err(CliError::Config(
                    "field 'axis_min'/'axis_max': eta sweep values must lie in [0, 1]".into(),
                ));
            }
        }
        "N" if values.iter().any(|&v| v < 0.0) => {
            return Err(CliError::Config(
                "field 'axis_min': N sweep values must be nonnegative".into(),
            ));
        }
        _ => {}
    }
    Ok(values)
}

fn resolve_row(cfg: &RunConfig, value: f64) -> Result<SweepRow, CliError> {
    let axis = cfg.axis.as_str();
    let m = if axis == "M" {
        value.round() as usize
    } else {
        cfg.m
    };
    let tau = if axis == "tau" { value } else { cfg.tau };
    let phi_h = if axis == "phiH" { value } else { cfg.phi_h };
    let model = cfg.phase_model(m)?;

    let configured_total = cfg.r.sinh().powi(2) + cfg.alpha * cfg.alpha;
    let budget = if axis == "N" {
        value
    } else {
        cfg.n_per_mode
            .map(|e| e * m as f64)
            .or(cfg.n_total)
            .unwrap_or(configured_total)
    };

    let (eta, r, alpha) = if axis == "eta" {
        let ns = value * budget;
        (value, ns.sqrt().asinh(), (budget - ns).sqrt())
    } else if cfg.optimize_eta && budget > 0.0 {
        let (eta, _) = optimize_energy_allocation(
            budget,
            tau,
            &model,
            cfg.x0,
            cfg.allocation_objective(),
        )
        .map_err(run_error)?;
        let ns = eta * budget;
        (eta, ns.sqrt().asinh(), (budget - ns).sqrt())
    } else if axis == "N" || cfg.n_per_mode.is_some() || cfg.n_total.is_some() {
        // Rescale the configured split to the requested budget.
        let eta = if configured_total > 0.0 {
            cfg.r.sinh().powi(2) / configured_total
        } else {
            0.0
        };
        let ns = eta * budget;
        (eta, ns.sqrt().asinh(), (budget - ns).sqrt())
    } else {
        let eta = if configured_total > 0.0 {
            cfg.r.sinh().powi(2) / configured_total
        } else {
            0.0
        };
        (eta, cfg.r, cfg.alpha)
    };

    let sensor = SensorConfig::real(m, r, alpha, tau, phi_h, cfg.x0)
        .map_err(|e| CliError::Run(e.to_string()))?;
    let total = sensor.n_total();
    let classical = SensorConfig::real(m, 0.0, total.sqrt(), tau, phi_h, cfg.x0)
        .map_err(|e| CliError::Run(e.to_string()))?;

    Ok(SweepRow {
        axis_value: value,
        m,
        tau,
        n: total,
        eta_star: eta,
        r,
        alpha,
        qfi: qfi(&sensor, &model, cfg.x0).map_err(run_error)?,
        cfi_mode1: cfi_mode1(&sensor, &model).map_err(run_error)?,
        cfi_mode2: cfi_mode2(&sensor, &model).map_err(run_error)?.value,
        cfi_mode3: cfi_mode3(&sensor, &model).map_err(run_error)?,
        sigma_opt: sigma_opt(&sensor).ok(),
        qfi_classical: qfi(&classical, &model, cfg.x0).map_err(run_error)?,
        cfi_classical: cfi_mode3(&classical, &model).map_err(run_error)?,
    })
}

/// One row per sweep point, in ascending axis order.
pub fn run_sweep(cfg: &RunConfig, format: OutputFormat) -> Result<String, CliError> {
    let values = axis_values(cfg)?;
    let rows: Vec<SweepRow> = values
        .par_iter()
        .map(|&v| resolve_row(cfg, v))
        .collect::<Result<_, _>>()?;
    match format {
        OutputFormat::Csv => {
            let mut out = String::from(
                "axis_value,M,tau,N,eta_star,r,alpha,qfi,cfi_mode1,cfi_mode2,cfi_mode3,sigma_opt,qfi_classical,cfi_classical\n",
            );
            for row in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    num(row.axis_value),
                    row.m,
                    num(row.tau),
                    num(row.n),
                    num(row.eta_star),
                    num(row.r),
                    num(row.alpha),
                    num(row.qfi),
                    num(row.cfi_mode1),
                    num(row.cfi_mode2),
                    num(row.cfi_mode3),
                    opt_num(row.sigma_opt),
                    num(row.qfi_classical),
                    num(row.cfi_classical),
                ));
            }
            Ok(out)
        }
        OutputFormat::Json => {
            let docs: Vec<_> = rows
                .iter()
                .map(|row| {
                    json!({
                        "axis_value": row.axis_value,
                        "M": row.m,
                        "tau": row.tau,
                        "N": row.n,
                        "eta_star": row.eta_star,
                        "r": row.r,
                        "alpha": row.alpha,
                        "qfi": row.qfi,
                        "cfi_mode1": row.cfi_mode1,
                        "cfi_mode2": row.cfi_mode2,
                        "cfi_mode3": row.cfi_mode3,
                        "sigma_opt": row.sigma_opt,
                        "qfi_classical": row.qfi_classical,
                        "cfi_classical": row.cfi_classical,
                    })
                })
                .collect();
            Ok(format!("{:#}\n", serde_json::Value::Array(docs)))
        }
    }
}

fn comparison_record(
    closed_form: f64,
    oracle_value: f64,
    threshold: f64,
    format: OutputFormat,
) -> String {
    let relative_error = (oracle_value - closed_form).abs() / closed_form;
    let pass = relative_error < threshold;
    match format {
        OutputFormat::Json => format!(
            "{:#}\n",
            json!({
                "closed_form": closed_form,
                "oracle_value": oracle_value,
                "relative_error": relative_error,
                "pass": pass,
            })
        ),
        OutputFormat::Csv => format!(
            "closed_form,oracle_value,relative_error,pass\n{},{},{},{}\n",
            num(closed_form),
            num(oracle_value),
            num(relative_error),
            pass
        ),
    }
}

/// Fock-space SLD oracle against the closed-form QFI (`M = 1` only).
pub fn run_oracle(cfg: &RunConfig, format: OutputFormat) -> Result<String, CliError> {
    if cfg.m != 1 {
        return Err(CliError::Config(format!(
            "field 'm' must be 1 for the Fock oracle (got {})",
            cfg.m
        )));
    }
    let sensor = cfg.sensor()?;
    let model = cfg.phase_model(1)?;
    let closed = qfi(&sensor, &model, cfg.x0).map_err(run_error)?;
    if closed < 1e-12 {
        return Err(CliError::Run(
            "zero-information configuration: the closed-form QFI vanishes".into(),
        ));
    }
    let state = fock_final_state(&sensor, &model, cfg.x0, cfg.cutoff).map_err(run_error)?;
    let drho = number_commutator_derivative(&state, model.dtheta(cfg.x0)[0]);
    let sld = sld_qfi(&state, &drho).map_err(run_error)?;
    Ok(comparison_record(closed, sld, cfg.oracle_threshold, format))
}

/// Monte-Carlo homodyne estimation against the CFI at the configured
/// homodyne phase: the closed form at the reference point, or its
/// finite-difference extension when `x_true` differs from `x0`.
pub fn run_montecarlo(cfg: &RunConfig, seed: u64, format: OutputFormat) -> Result<String, CliError> {
    let sensor = cfg.sensor()?;
    let model = cfg.phase_model(cfg.m)?;
    let x_true = cfg.x_true.unwrap_or(cfg.x0);
    let closed = if x_true == cfg.x0 {
        let (i_d, i_v) = cfi_components(&sensor, &model).map_err(run_error)?;
        i_d + i_v
    } else {
        cfi_numeric(&sensor, &model, x_true).map_err(run_error)?
    };
    if closed < 1e-12 {
        return Err(CliError::Run(
            "zero-information configuration: the reference CFI vanishes".into(),
        ));
    }
    let estimate =
        mc_homodyne(&sensor, &model, x_true, cfg.samples, seed).map_err(run_error)?;
    Ok(comparison_record(
        closed,
        estimate.empirical_fisher,
        cfg.mc_threshold,
        format,
    ))
}
