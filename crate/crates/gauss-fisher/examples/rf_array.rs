//! Fisher information of an RF-photonic phased array versus array size,
//! with the photon budget growing linearly in the number of sensors and
//! the squeezed-vacuum fraction optimized per point.

use gauss_fisher::applications::{rf_phase_model, RfArrayModel};
use gauss_fisher::circuit::SensorConfig;
use gauss_fisher::fisher::{cfi_mode3, optimize_energy_allocation, qfi, AllocationObjective};

fn main() {
    let tau = 0.9;
    let energy_per_sensor = 1.0f64.sinh().powi(2);
    println!("{:>4} {:>10} {:>14} {:>14} {:>14}", "M", "eta*", "QFI", "CFI mode 3", "classical");
    for m in [4usize, 8, 16, 32, 64] {
        let rf = RfArrayModel {
            a: 0.1,
            omega_rf: 3.0e4,
            b: 10.0,
            m,
            t: 0.0,
        };
        let model = rf_phase_model(&rf).unwrap();
        let budget = m as f64 * energy_per_sensor;
        let (eta, best) =
            optimize_energy_allocation(budget, tau, &model, 0.0, AllocationObjective::CfiMode3)
                .unwrap();
        let ns = eta * budget;
        let cfg = SensorConfig::real(
            m,
            ns.sqrt().asinh(),
            (budget - ns).sqrt(),
            tau,
            std::f64::consts::FRAC_PI_2,
            0.0,
        )
        .unwrap();
        let classical =
            SensorConfig::real(m, 0.0, budget.sqrt(), tau, std::f64::consts::FRAC_PI_2, 0.0)
                .unwrap();
        println!(
            "{m:>4} {eta:>10.4} {:>14.6e} {best:>14.6e} {:>14.6e}",
            qfi(&cfg, &model, 0.0).unwrap(),
            cfi_mode3(&classical, &model).unwrap(),
        );
    }
}
