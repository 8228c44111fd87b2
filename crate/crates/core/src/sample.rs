//! Seeded random sampling of states, channels, generators and gauges,
//! shared by the diagnostics and the test suites.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::elimination::GaugeMap;
use crate::superop::{partial_trace_a_op, CMat, Operator, SuperOperator};

/// Standard complex Gaussian via Box-Muller.
pub fn gaussian_c64(rng: &mut ChaCha8Rng) -> C64 {
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    C64::new(r * th.cos(), r * th.sin())
}

/// Haar-random qubit state vector.
pub fn haar_qubit_state(rng: &mut ChaCha8Rng) -> [C64; 2] {
    let v = [gaussian_c64(rng), gaussian_c64(rng)];
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

/// Random operator with independent Gaussian entries.
pub fn random_operator(dim: usize, rng: &mut ChaCha8Rng) -> Operator {
    Operator::from_fn(dim, |_, _| gaussian_c64(rng))
}

/// Random Hermitian operator.
pub fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> Operator {
    random_operator(dim, rng).hermitize()
}

/// Haar-random isometry with `cols` orthonormal columns in dimension `rows`,
/// built by Gram-Schmidt (with one re-orthogonalization pass) on Gaussian
/// columns.
pub fn haar_isometry(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMat {
    assert!(cols <= rows);
    let mut v = CMat::zeros((rows, cols));
    for j in 0..cols {
        let mut col: Vec<C64> = (0..rows).map(|_| gaussian_c64(rng)).collect();
        for _pass in 0..2 {
            for k in 0..j {
                let mut overlap = C64::new(0.0, 0.0);
                for i in 0..rows {
                    overlap += v[[i, k]].conj() * col[i];
                }
                for i in 0..rows {
                    let vk = v[[i, k]];
                    col[i] -= overlap * vk;
                }
            }
        }
        let n = col.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for i in 0..rows {
            v[[i, j]] = col[i] / n;
        }
    }
    v
}

/// Random qubit channel by the Stinespring construction: a Haar-random
/// isometry into system (x) environment with an 8-dimensional environment,
/// followed by the environment trace. Always a valid trace-preserving
/// completely positive map; no rejection needed.
pub fn random_kraus_channel(rng: &mut ChaCha8Rng) -> SuperOperator {
    const ENV: usize = 8;
    let v = haar_isometry(ENV * 2, 2, rng); // environment is the traced (first) factor
    SuperOperator::from_op_action(2, 2, |x| {
        // V X V^dagger on env (x) sys, then trace out the environment.
        let mut big = CMat::zeros((ENV * 2, ENV * 2));
        for r in 0..ENV * 2 {
            for c in 0..ENV * 2 {
                let mut s = C64::new(0.0, 0.0);
                for a in 0..2 {
                    for b in 0..2 {
                        s += v[[r, a]] * x.mat()[[a, b]] * v[[c, b]].conj();
                    }
                }
                big[[r, c]] = s;
            }
        }
        partial_trace_a_op(&Operator::new(big).unwrap(), ENV, 2).unwrap()
    })
}

/// Random trace-annihilating, Hermiticity-preserving qubit generator built
/// from random GKS data over the traceless basis (sigma_-, sigma_+,
/// sigma_z/sqrt(2)). The 3x3 coefficient matrix is Hermitian with
/// eigenvalues drawn from [-1, -margin] u [margin, 1], so the Lindblad
/// verdict is bounded away from the boundary. Returns the generator and
/// whether it is of Lindblad form (all eigenvalues positive).
pub fn random_generator(rng: &mut ChaCha8Rng, margin: f64) -> (SuperOperator, bool) {
    let u = haar_isometry(3, 3, rng);
    let mut all_positive = true;
    let mut eigs = [0.0f64; 3];
    for e in eigs.iter_mut() {
        let mag = margin + (1.0 - margin) * rng.gen::<f64>();
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        *e = sign * mag;
        if *e < 0.0 {
            all_positive = false;
        }
    }
    let mut gamma = CMat::zeros((3, 3));
    for i in 0..3 {
        for j in 0..3 {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..3 {
                s += u[[i, k]] * C64::new(eigs[k], 0.0) * u[[j, k]].conj();
            }
            gamma[[i, j]] = s;
        }
    }
    let h = {
        let raw = random_hermitian(2, rng);
        let tr = raw.trace() / C64::new(2.0, 0.0);
        raw.sub(&Operator::identity(2).scale(tr))
    };
    (crate::cp::generator_from_gks(&h, &gamma), all_positive)
}

/// Random Hermiticity-preserving gauge map with a single first-order term,
/// scaled to the requested norm.
pub fn random_gauge(rng: &mut ChaCha8Rng, norm: f64) -> GaugeMap {
    // Hermiticity-preserving map: X -> sum c_ij B_i X B_j^dagger with a
    // random Hermitian coefficient matrix over an operator basis.
    let basis: Vec<Operator> = (0..4)
        .map(|j| {
            let (c, r) = (j / 2, j % 2);
            Operator::matrix_unit(2, r, c)
        })
        .collect();
    let mut coeff = CMat::zeros((4, 4));
    for i in 0..4 {
        for j in 0..=i {
            let v = if i == j {
                C64::new(gaussian_c64(rng).re, 0.0)
            } else {
                gaussian_c64(rng)
            };
            coeff[[i, j]] = v;
            coeff[[j, i]] = v.conj();
        }
    }
    let g = SuperOperator::from_op_action(2, 2, |x| {
        let mut acc = Operator::zeros(2);
        for i in 0..4 {
            for j in 0..4 {
                if coeff[[i, j]] == C64::new(0.0, 0.0) {
                    continue;
                }
                acc = acc.add(
                    &basis[i]
                        .matmul(x)
                        .matmul(&basis[j].dagger())
                        .scale(coeff[[i, j]]),
                );
            }
        }
        acc
    });
    let scale = norm / g.norm_fro().max(1e-12);
    GaugeMap::from_orders(vec![g.scale(C64::new(scale, 0.0))]).expect("qubit dims")
}
