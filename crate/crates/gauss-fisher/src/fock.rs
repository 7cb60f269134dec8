//! Truncated Fock-space operators for the brute-force oracle.
//!
//! Everything here works on dense matrices over a per-mode Fock basis
//! `|0>, .., |cutoff - 1>`; two-mode operators live on the Kronecker
//! product space with mode 1 as the major index (`|n1, n2>` maps to row
//! `n1 * cutoff + n2`). Conventions match the phase-space module: a
//! passive modal matrix `U` sends coherent amplitudes to `U alpha`, and
//! `squeeze(r)` stretches the q-quadrature by `e^r`.

use faer::Mat;
use num_complex::Complex64 as C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Annihilation operator, `a[n-1, n] = sqrt(n)`.
pub fn annihilation(dim: usize) -> Mat<C64> {
    Mat::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    })
}

/// Number operator, `diag(0, 1, .., dim - 1)`.
pub fn number_operator(dim: usize) -> Mat<C64> {
    Mat::from_fn(dim, dim, |i, j| {
        if i == j {
            C64::new(i as f64, 0.0)
        } else {
            ZERO
        }
    })
}

pub fn identity(dim: usize) -> Mat<C64> {
    Mat::from_fn(dim, dim, |i, j| if i == j { ONE } else { ZERO })
}

/// Kronecker product with the first factor on mode 1 (major index).
pub fn kron(a: &Mat<C64>, b: &Mat<C64>) -> Mat<C64> {
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

pub fn scaled(m: &Mat<C64>, s: C64) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}

pub fn trace(m: &Mat<C64>) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// `(m + m^dag) / 2`.
pub fn hermitize(m: &Mat<C64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        (m[(i, j)] + m[(j, i)].conj()) * 0.5
    })
}

/// `u rho u^dag`.
pub fn conjugate(u: &Mat<C64>, rho: &Mat<C64>) -> Mat<C64> {
    u * rho * u.adjoint()
}

/// `exp(i h)` for Hermitian `h`, through its eigendecomposition.
pub fn unitary_from_generator(h: &Mat<C64>) -> Mat<C64> {
    let dim = h.nrows();
    let eig = hermitize(h)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("Hermitian eigendecomposition failed");
    let u = eig.U();
    let phases: Vec<C64> = (0..dim)
        .map(|k| C64::from_polar(1.0, eig.S().column_vector()[k].re))
        .collect();
    Mat::from_fn(dim, dim, |i, j| {
        (0..dim)
            .map(|k| u[(i, k)] * phases[k] * u[(j, k)].conj())
            .sum()
    })
}

/// Displacement operator `D(beta) = exp(beta a^dag - beta* a)`.
pub fn displacement(dim: usize, beta: C64) -> Mat<C64> {
    let a = annihilation(dim);
    let minus_i = C64::new(0.0, -1.0);
    // beta a^dag - beta* a = i h with h Hermitian.
    let h = Mat::from_fn(dim, dim, |i, j| {
        minus_i * (beta * a[(j, i)].conj() - beta.conj() * a[(i, j)])
    });
    unitary_from_generator(&h)
}

/// Squeezing operator `S(r) = exp((r/2)(a^dag^2 - a^2))`; for `r > 0` the
/// q-quadrature variance of `S(r)|0>` is `e^{2r}/2`.
pub fn squeeze(dim: usize, r: f64) -> Mat<C64> {
    let a = annihilation(dim);
    let a2 = &a * &a;
    let minus_i = C64::new(0.0, -1.0);
    let h = Mat::from_fn(dim, dim, |i, j| {
        minus_i * (a2[(j, i)].conj() - a2[(i, j)]) * (r / 2.0)
    });
    unitary_from_generator(&h)
}

/// Fock amplitudes of the coherent state `|beta>`.
pub fn coherent_vector(dim: usize, beta: C64) -> Vec<C64> {
    let norm = (-0.5 * beta.norm_sqr()).exp();
    let mut amp = C64::new(norm, 0.0);
    (0..dim)
        .map(|n| {
            if n > 0 {
                amp *= beta / (n as f64).sqrt();
            }
            amp
        })
        .collect()
}

/// Single-mode thermal state `diag(nbar^n / (nbar + 1)^{n+1})`.
pub fn thermal_state(dim: usize, nbar: f64) -> Mat<C64> {
    Mat::from_fn(dim, dim, |i, j| {
        if i == j {
            C64::new(nbar.powi(i as i32) / (nbar + 1.0).powi(i as i32 + 1), 0.0)
        } else {
            ZERO
        }
    })
}

/// Kraus operators of the pure-loss channel,
/// `K_k = sqrt((1 - tau)^k / k!) tau^{n_hat / 2} a^k`, for `k < dim`.
pub fn loss_kraus_ops(dim: usize, tau: f64) -> Vec<Mat<C64>> {
    let a = annihilation(dim);
    let mut a_pow = identity(dim);
    let mut ops = Vec::with_capacity(dim);
    let mut log_coef = 0.0f64; // ln[(1 - tau)^k / k!]
    for k in 0..dim {
        if k > 0 {
            if tau >= 1.0 {
                break; // only K_0 survives for a lossless channel
            }
            log_coef += (1.0 - tau).ln() - (k as f64).ln();
            a_pow = &a_pow * &a;
        }
        let coef = (0.5 * log_coef).exp();
        ops.push(Mat::from_fn(dim, dim, |i, j| {
            // tau^{n/2} acts on the left with n = i.
            a_pow[(i, j)] * coef * tau.powf(i as f64 / 2.0)
        }));
    }
    ops
}

/// `sum_k K_k rho K_k^dag`.
pub fn apply_channel(rho: &Mat<C64>, kraus: &[Mat<C64>]) -> Mat<C64> {
    let mut out = Mat::<C64>::zeros(rho.nrows(), rho.ncols());
    for k in kraus {
        out += conjugate(k, rho);
    }
    out
}

/// Two-mode balanced gate implementing the modal map
/// `(1/sqrt 2) [[1, 1], [1, -1]]`, exact on every total-photon sector.
///
/// The gate conserves total photon number, so it is assembled sector by
/// sector: on sector `N` the generator `G11 n1 + G22 n2 + G12 (a1^dag a2 +
/// a2^dag a1)` is a real symmetric tridiagonal matrix whose exponential is
/// taken through its eigendecomposition. Sector states with a mode index
/// at or above the cutoff are dropped, which loses only the corner weight
/// already excluded by the truncation.
pub fn balanced_beamsplitter(dim: usize) -> Mat<C64> {
    use nalgebra::DMatrix;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    // Modal H = (1/sqrt2)[[1, 1], [1, -1]] satisfies H^2 = I, so
    // H = exp(i G) with G = (pi/2)(I - H).
    let g11 = FRAC_PI_2 * (1.0 - FRAC_1_SQRT_2);
    let g22 = FRAC_PI_2 * (1.0 + FRAC_1_SQRT_2);
    let g12 = -FRAC_PI_2 * FRAC_1_SQRT_2;

    let full = dim * dim;
    let mut bs = Mat::<C64>::zeros(full, full);
    for total in 0..=(2 * (dim - 1)) {
        let sector = total + 1; // states |j, total - j>, j = 0..=total
        let mut gen = DMatrix::<f64>::zeros(sector, sector);
        for j in 0..sector {
            gen[(j, j)] = g11 * j as f64 + g22 * (total - j) as f64;
            if j + 1 < sector {
                let coupling = g12 * (((j + 1) * (total - j)) as f64).sqrt();
                gen[(j, j + 1)] = coupling;
                gen[(j + 1, j)] = coupling;
            }
        }
        let eig = gen.symmetric_eigen();
        for jr in 0..sector {
            if jr >= dim || total - jr >= dim {
                continue;
            }
            let row = jr * dim + (total - jr);
            for jc in 0..sector {
                if jc >= dim || total - jc >= dim {
                    continue;
                }
                let col = jc * dim + (total - jc);
                let mut e = ZERO;
                for k in 0..sector {
                    let phase = C64::from_polar(1.0, eig.eigenvalues[k]);
                    e += phase * eig.eigenvectors[(jr, k)] * eig.eigenvectors[(jc, k)];
                }
                bs[(row, col)] = e;
            }
        }
    }
    bs
}

/// Two-mode phase `exp(i theta n_hat_1)` (diagonal).
pub fn phase_on_mode1(dim: usize, theta: f64) -> Mat<C64> {
    let full = dim * dim;
    Mat::from_fn(full, full, |i, j| {
        if i == j {
            C64::from_polar(1.0, theta * (i / dim) as f64)
        } else {
            ZERO
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &Mat<C64>, b: &Mat<C64>) -> f64 {
        let mut d = 0.0f64;
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                d = d.max((a[(i, j)] - b[(i, j)]).norm());
            }
        }
        d
    }

    #[test]
    fn annihilation_elements() {
        let a = annihilation(4);
        assert_eq!(a[(0, 1)].re, 1.0);
        assert!((a[(1, 2)].re - 2.0f64.sqrt()).abs() < 1e-15);
        assert!((a[(2, 3)].re - 3.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(a[(1, 0)], ZERO);
    }

    #[test]
    fn displacement_generates_coherent_state() {
        let dim = 40;
        let beta = C64::new(0.7, -0.4);
        let d = displacement(dim, beta);
        let expect = coherent_vector(dim, beta);
        for n in 0..dim {
            assert!(
                (d[(n, 0)] - expect[n]).norm() < 1e-10,
                "n = {n}: {} vs {}",
                d[(n, 0)],
                expect[n]
            );
        }
    }

    #[test]
    fn squeeze_stretches_the_q_quadrature() {
        let dim = 60;
        let r = 0.3;
        let s = squeeze(dim, r);
        let a = annihilation(dim);
        let q = scaled(
            &(&a + a.adjoint().to_owned()),
            C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        );
        let q2 = &q * &q;
        let p = scaled(
            &(&a - a.adjoint().to_owned()),
            C64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2),
        );
        let p2 = &p * &p;
        let mut var_q = ZERO;
        let mut var_p = ZERO;
        for n in 0..dim {
            for m in 0..dim {
                var_q += s[(n, 0)].conj() * q2[(n, m)] * s[(m, 0)];
                var_p += s[(n, 0)].conj() * p2[(n, m)] * s[(m, 0)];
            }
        }
        assert!((var_q.re - (2.0 * r).exp() / 2.0).abs() < 1e-8);
        assert!((var_p.re - (-2.0 * r).exp() / 2.0).abs() < 1e-8);
    }

    #[test]
    fn kraus_operators_are_complete() {
        let dim = 25;
        for &tau in &[0.0, 0.35, 0.8, 1.0] {
            let ops = loss_kraus_ops(dim, tau);
            let mut sum = Mat::<C64>::zeros(dim, dim);
            for k in &ops {
                sum += k.adjoint() * k;
            }
            assert!(max_abs_diff(&sum, &identity(dim)) < 1e-12, "tau = {tau}");
        }
    }

    #[test]
    fn loss_attenuates_coherent_states() {
        let dim = 35;
        let (beta, tau) = (C64::new(1.1, 0.3), 0.6f64);
        let c = coherent_vector(dim, beta);
        let rho = Mat::from_fn(dim, dim, |i, j| c[i] * c[j].conj());
        let lossy = apply_channel(&rho, &loss_kraus_ops(dim, tau));
        let ct = coherent_vector(dim, beta * tau.sqrt());
        let expect = Mat::from_fn(dim, dim, |i, j| ct[i] * ct[j].conj());
        assert!(max_abs_diff(&lossy, &expect) < 1e-10);
    }

    #[test]
    fn loss_turns_squeezed_vacuum_thermal() {
        // The spectrum after loss must be thermal with
        // nbar = sqrt(tau(1 - tau) sinh^2 r + 1/4) - 1/2.
        let dim = 40;
        let (r, tau) = (0.5, 0.7);
        let s = squeeze(dim, r);
        let vac = Mat::from_fn(dim, dim, |i, j| if i == 0 && j == 0 { ONE } else { ZERO });
        let rho = apply_channel(&conjugate(&s, &vac), &loss_kraus_ops(dim, tau));
        let eig = hermitize(&rho)
            .self_adjoint_eigen(faer::Side::Lower)
            .unwrap();
        let mut evs: Vec<f64> = (0..dim).map(|k| eig.S().column_vector()[k].re).collect();
        evs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let nbar = (tau * (1.0 - tau) * r.sinh().powi(2) + 0.25).sqrt() - 0.5;
        for (n, ev) in evs.iter().take(6).enumerate() {
            let expect = nbar.powi(n as i32) / (nbar + 1.0).powi(n as i32 + 1);
            assert!((ev - expect).abs() < 1e-8, "n = {n}: {ev} vs {expect}");
        }
    }

    #[test]
    fn beamsplitter_maps_coherent_to_coherent() {
        let dim = 25;
        let bs = balanced_beamsplitter(dim);
        let (b1, b2) = (C64::new(0.8, 0.0), C64::new(0.3, -0.5));
        let c1 = coherent_vector(dim, b1);
        let c2 = coherent_vector(dim, b2);
        let mut joint = vec![ZERO; dim * dim];
        for n1 in 0..dim {
            for n2 in 0..dim {
                joint[n1 * dim + n2] = c1[n1] * c2[n2];
            }
        }
        let mut out = vec![ZERO; dim * dim];
        for i in 0..dim * dim {
            for j in 0..dim * dim {
                out[i] += bs[(i, j)] * joint[j];
            }
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let e1 = coherent_vector(dim, (b1 + b2) * s);
        let e2 = coherent_vector(dim, (b1 - b2) * s);
        for n1 in 0..dim - 5 {
            for n2 in 0..dim - 5 {
                let expect = e1[n1] * e2[n2];
                assert!((out[n1 * dim + n2] - expect).norm() < 1e-8, "({n1},{n2})");
            }
        }
    }

    #[test]
    fn beamsplitter_is_unitary_on_complete_sectors() {
        let dim = 12;
        let bs = balanced_beamsplitter(dim);
        let gram = bs.adjoint() * &bs;
        // Columns whose total photon number fits entirely under the cutoff
        // must be exactly normalized and orthogonal.
        for j1 in 0..dim * dim {
            if j1 / dim + j1 % dim >= dim {
                continue;
            }
            for j2 in 0..dim * dim {
                if j2 / dim + j2 % dim >= dim {
                    continue;
                }
                let expect = if j1 == j2 { ONE } else { ZERO };
                assert!((gram[(j1, j2)] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn phase_operator_is_diagonal_number_phase() {
        let dim = 3;
        let p = phase_on_mode1(dim, 0.4);
        for n1 in 0..dim {
            for n2 in 0..dim {
                let i = n1 * dim + n2;
                let expect = C64::from_polar(1.0, 0.4 * n1 as f64);
                assert!((p[(i, i)] - expect).norm() < 1e-15);
            }
        }
    }
}
