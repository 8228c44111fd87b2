//! Closed-form coefficient formulas and the second-order assignment map,
//! used as independent oracles for the numeric elimination engine.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cp::QubitGeneratorCoeffs;
use crate::error::{Error, Result};
use crate::model::{oscillator_ops, thermal_state, JCParams};
use crate::qubit;
use crate::superop::{Operator, SuperOperator};

const I: C64 = C64::new(0.0, 1.0);

/// Fourth-order reduced-generator coefficients for the oscillator-qubit
/// model, with the inputs echoed and intermediate quantities exposed.
#[derive(Clone, Debug, serde::Serialize)]
pub struct FourthOrderCoeffs {
    pub delta_a: f64,
    pub gamma: f64,
    pub n_th: f64,
    pub g: f64,
    /// n_+ = n_th (upward) and n_- = 1 + n_th (downward) bath factors.
    pub n_plus: f64,
    pub n_minus: f64,
    /// gamma_bar = gamma + 2 i delta_a.
    pub gamma_bar: (f64, f64),
    pub b_minus: (f64, f64),
    pub b_plus: (f64, f64),
    pub omega_b4: f64,
    pub gamma_minus4: f64,
    pub gamma_plus4: f64,
    pub gamma_phi4: f64,
    /// Second-order-only parts.
    pub gamma_minus2: f64,
    pub gamma_plus2: f64,
    pub omega_b2: f64,
}

impl FourthOrderCoeffs {
    pub fn generator_coeffs(&self) -> QubitGeneratorCoeffs {
        QubitGeneratorCoeffs {
            omega_b: self.omega_b4,
            gamma_minus: self.gamma_minus4,
            gamma_plus: self.gamma_plus4,
            gamma_phi: self.gamma_phi4,
        }
    }

    pub fn second_order_coeffs(&self) -> QubitGeneratorCoeffs {
        QubitGeneratorCoeffs {
            omega_b: self.omega_b2,
            gamma_minus: self.gamma_minus2,
            gamma_plus: self.gamma_plus2,
            gamma_phi: 0.0,
        }
    }
}

/// Evaluate the fourth-order coefficient formulas.
///
/// b_pm = 2 g^2 n_pm / gb + 8 g^4 n_pm^2 / gb^3
///        + 8 g^4 n_+ n_- (1 + 8 i gamma delta / |gb|^2) / (gb^* |gb|^2),
/// omega_B = Im(b_- + b_+), gamma_pm = 2 Re(b_pm), and the pure dephasing
/// rate carries the quartic polynomial in x = 2 delta / gamma whose sign
/// controls the negativity region.
pub fn fourth_order_coeffs(params: &JCParams) -> Result<FourthOrderCoeffs> {
    params.validate()?;
    let (g, gamma, delta) = (params.g, params.gamma, params.delta_a);
    let n_plus = params.n_th;
    let n_minus = 1.0 + params.n_th;
    let gb = C64::new(gamma, 2.0 * delta);
    let gb_abs2 = gb.norm_sqr();
    let g2 = g * g;
    let g4 = g2 * g2;

    let b = |n_pm: f64| -> C64 {
        C64::new(2.0 * g2 * n_pm, 0.0) / gb
            + C64::new(8.0 * g4 * n_pm * n_pm, 0.0) / (gb * gb * gb)
            + C64::new(8.0 * g4 * n_plus * n_minus, 0.0)
                * (C64::new(1.0, 0.0) + I * (8.0 * gamma * delta / gb_abs2))
                / (gb.conj() * gb_abs2)
    };
    let b_minus = b(n_minus);
    let b_plus = b(n_plus);

    let x = 2.0 * delta / gamma;
    let x2 = x * x;
    let poly = 3.0 - 6.0 * x2 - x2 * x2;
    let gamma_phi4 =
        -8.0 * g4 * n_plus * n_minus * poly / (gamma.powi(3) * (1.0 + x2).powi(3));

    Ok(FourthOrderCoeffs {
        delta_a: delta,
        gamma,
        n_th: params.n_th,
        g,
        n_plus,
        n_minus,
        gamma_bar: (gb.re, gb.im),
        b_minus: (b_minus.re, b_minus.im),
        b_plus: (b_plus.re, b_plus.im),
        omega_b4: (b_minus + b_plus).im,
        gamma_minus4: 2.0 * b_minus.re,
        gamma_plus4: 2.0 * b_plus.re,
        gamma_phi4,
        gamma_minus2: 4.0 * g2 * gamma * n_minus / gb_abs2,
        gamma_plus2: 4.0 * g2 * gamma * n_plus / gb_abs2,
        omega_b2: (C64::new(2.0 * g2 * (n_minus + n_plus), 0.0) / gb).im,
    })
}

/// Detuning threshold |delta|/gamma below which the dephasing rate turns
/// negative (for n_th > 0): the positive root of 3 - 6 x^2 - x^4 in
/// x = 2 delta / gamma, i.e. sqrt(2 sqrt(3) - 3) / 2.
pub fn delta_threshold() -> f64 {
    // Root of u^2 + 6u - 3 = 0 with u = x^2.
    let u = -3.0 + 2.0 * 3.0f64.sqrt();
    u.sqrt() / 2.0
}

/// Sign region of the fourth-order dephasing rate: true iff gamma_phi4 < 0.
pub fn phi_negativity_region(delta_over_gamma: f64, n_th: f64) -> bool {
    n_th > 0.0 && delta_over_gamma.abs() < delta_threshold()
}

/// Pieces of the second-order assignment map at zero detuning, graded by
/// powers of g. `terms[k]` carries exactly g^k; the exact three-term map is
/// the sum of all five, while the expansion to second order is
/// terms[0] + terms[1] + terms[2]. (The product form generates spurious g^3
/// and g^4 pieces that are excluded when comparing against the order-2
/// truncation of the numeric assignment map.)
pub struct AssignmentTerms {
    pub terms: [SuperOperator; 5],
}

impl AssignmentTerms {
    pub fn full(&self) -> SuperOperator {
        let mut acc = self.terms[0].clone();
        for t in &self.terms[1..] {
            acc = acc.add(t).expect("uniform dims");
        }
        acc
    }

    pub fn up_to_second_order(&self) -> SuperOperator {
        self.terms[0]
            .add(&self.terms[1])
            .and_then(|s| s.add(&self.terms[2]))
            .expect("uniform dims")
    }
}

/// Assemble the three-term second-order assignment map
/// K(rho_B) = V (rho_bar (x) rho_B) V^dag
///          - (4 g^2 (1+n_th)/gamma^2) (I (x) sigma_-) (rho_bar (x) rho_B) (I (x) sigma_-)^dag
///          - (4 g^2 n_th/gamma^2) (I (x) sigma_+) (rho_bar (x) rho_B) (I (x) sigma_+)^dag,
/// with V = I - (2ig/gamma)(a^dag sigma_- + a sigma_+)
///        - (2 g^2/gamma^2)(a^dag a - n_th) (x) I_B,
/// graded by powers of g. Requires delta_a = 0.
pub fn assignment_second_order_terms(params: &JCParams) -> Result<AssignmentTerms> {
    params.validate()?;
    if params.delta_a != 0.0 {
        return Err(Error::RequiresZeroDetuning(params.delta_a));
    }
    let cutoff = params.cutoff();
    let dim_a = cutoff + 1;
    let (a, adag, num) = oscillator_ops(cutoff);
    let rho_bar = thermal_state(cutoff, params.n_th);
    let id_b = qubit::identity2();
    let id_a = Operator::identity(dim_a);

    let g_over = params.g / params.gamma;
    let coupling = adag.kron(&qubit::sigma_minus()).add(&a.kron(&qubit::sigma_plus()));
    // W carries g^1, Y carries g^2.
    let w = coupling.scale(-2.0 * I * g_over);
    let w_dag = w.dagger();
    let y = num
        .sub(&id_a.scale(C64::new(params.n_th, 0.0)))
        .kron(&id_b)
        .scale(C64::new(-2.0 * g_over * g_over, 0.0));
    let sm = id_a.kron(&qubit::sigma_minus());
    let sp = id_a.kron(&qubit::sigma_plus());
    let c_minus = C64::new(-4.0 * g_over * g_over * (1.0 + params.n_th), 0.0);
    let c_plus = C64::new(-4.0 * g_over * g_over * params.n_th, 0.0);

    let d_tot = dim_a * 2;
    let embed = |rho: &Operator| rho_bar.kron(rho);
    let t0 = SuperOperator::from_op_action(2, d_tot, |rho| embed(rho));
    let t1 = SuperOperator::from_op_action(2, d_tot, |rho| {
        let e = embed(rho);
        w.matmul(&e).add(&e.matmul(&w_dag))
    });
    let t2 = SuperOperator::from_op_action(2, d_tot, |rho| {
        let e = embed(rho);
        let mut out = w.matmul(&e).matmul(&w_dag);
        out = out.add(&y.matmul(&e)).add(&e.matmul(&y));
        out = out.add(&sm.matmul(&e).matmul(&sm.dagger()).scale(c_minus));
        out.add(&sp.matmul(&e).matmul(&sp.dagger()).scale(c_plus))
    });
    let t3 = SuperOperator::from_op_action(2, d_tot, |rho| {
        let e = embed(rho);
        w.matmul(&e).matmul(&y).add(&y.matmul(&e).matmul(&w_dag))
    });
    let t4 = SuperOperator::from_op_action(2, d_tot, |rho| {
        let e = embed(rho);
        y.matmul(&e).matmul(&y)
    });
    Ok(AssignmentTerms { terms: [t0, t1, t2, t3, t4] })
}

/// The exact three-term map of the second-order assignment (all spurious
/// higher powers of g included).
pub fn assignment_second_order(params: &JCParams) -> Result<SuperOperator> {
    Ok(assignment_second_order_terms(params)?.full())
}

/// Matrix element <0, psi | K(rho_B) | 0, psi> of the second-order
/// assignment, evaluated in closed form: with p_k = <k|rho_bar|k> and
/// psi_pm = sigma_pm psi,
///
///   alpha^2 p_0 <psi|rho|psi> + (4g^2/gamma^2) (p_1 - n_th p_0) <psi_-|rho|psi_->
///   - (4g^2 (1+n_th)/gamma^2) p_0 <psi_+|rho|psi_+>,
///
/// where alpha = 1 + 2 g^2 n_th / gamma^2. For psi in the kernel of a pure
/// rho_B the value is strictly negative (p_1 - n_th p_0 < 0 for n_th > 0).
pub fn negativity_element(psi: [C64; 2], rho_b: &Operator, params: &JCParams) -> Result<f64> {
    params.validate()?;
    if params.delta_a != 0.0 {
        return Err(Error::RequiresZeroDetuning(params.delta_a));
    }
    if rho_b.dim() != 2 {
        return Err(Error::DimensionMismatch("negativity_element expects a qubit state".into()));
    }
    let rho_bar = thermal_state(params.cutoff(), params.n_th);
    let p0 = rho_bar.mat()[[0, 0]].re;
    let p1 = rho_bar.mat()[[1, 1]].re;
    let g_over2 = (params.g / params.gamma).powi(2);
    let alpha = 1.0 + 2.0 * g_over2 * params.n_th;

    let quad = |v: [C64; 2]| -> f64 {
        let m = rho_b.mat();
        let mut s = C64::new(0.0, 0.0);
        for r in 0..2 {
            for c in 0..2 {
                s += v[r].conj() * m[[r, c]] * v[c];
            }
        }
        s.re
    };
    // sigma_- psi = (psi_1, 0), sigma_+ psi = (0, psi_0).
    let psi_minus = [psi[1], C64::new(0.0, 0.0)];
    let psi_plus = [C64::new(0.0, 0.0), psi[0]];

    Ok(alpha * alpha * p0 * quad(psi)
        + 4.0 * g_over2 * (p1 - params.n_th * p0) * quad(psi_minus)
        - 4.0 * g_over2 * (1.0 + params.n_th) * p0 * quad(psi_plus))
}

/// Report of scanning the image of the second-order assignment over qubit
/// states: pure states map outside the positive cone while sufficiently
/// mixed states stay inside; the crossing radius is located by bisection
/// along fixed Bloch directions.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ImageScanReport {
    pub n_pure_samples: usize,
    /// How many sampled pure states produced a non-PSD composite.
    pub pure_non_psd: usize,
    pub pure_min_eig_worst: f64,
    pub pure_min_eig_best: f64,
    pub maximally_mixed_min_eig: f64,
    /// (direction label, Bloch radius at which min eig crosses zero).
    pub radius_thresholds: Vec<(String, f64)>,
}

/// Scan pure and mixed states through the second-order assignment map.
pub fn image_boundary_scan(
    params: &JCParams,
    n_samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<ImageScanReport> {
    let k = assignment_second_order(params)?;
    let min_eig_of = |rho: &Operator| -> Result<f64> {
        k.apply(rho)?.hermitize().min_eigval_hermitian()
    };

    let mut non_psd = 0usize;
    let mut worst = f64::INFINITY;
    let mut best = f64::NEG_INFINITY;
    for _ in 0..n_samples {
        let psi = haar_qubit_state(rng);
        let rho = qubit::pure_state(psi[0], psi[1]);
        let e = min_eig_of(&rho)?;
        if e < 0.0 {
            non_psd += 1;
        }
        worst = worst.min(e);
        best = best.max(e);
    }

    let mixed = min_eig_of(&qubit::state_from_bloch([0.0, 0.0, 0.0]))?;

    let mut thresholds = Vec::new();
    for (label, dir) in [
        ("+z", [0.0, 0.0, 1.0]),
        ("-z", [0.0, 0.0, -1.0]),
        ("+x", [1.0, 0.0, 0.0]),
        ("+y", [0.0, 1.0, 0.0]),
    ] {
        let f = |r: f64| -> Result<f64> {
            min_eig_of(&qubit::state_from_bloch([r * dir[0], r * dir[1], r * dir[2]]))
        };
        // min eig is positive at the center and negative at the surface;
        // bisect for the crossing.
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        if f(lo)? <= 0.0 || f(hi)? >= 0.0 {
            thresholds.push((label.to_string(), f64::NAN));
            continue;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if f(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        thresholds.push((label.to_string(), 0.5 * (lo + hi)));
    }

    Ok(ImageScanReport {
        n_pure_samples: n_samples,
        pure_non_psd: non_psd,
        pure_min_eig_worst: worst,
        pure_min_eig_best: best,
        maximally_mixed_min_eig: mixed,
        radius_thresholds: thresholds,
    })
}

/// Haar-random qubit state vector.
pub fn haar_qubit_state(rng: &mut ChaCha8Rng) -> [C64; 2] {
    let gauss = |rng: &mut ChaCha8Rng| {
        // Box-Muller.
        let u1: f64 = rng.gen::<f64>().max(1e-300);
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        (r * (2.0 * std::f64::consts::PI * u2).cos(), r * (2.0 * std::f64::consts::PI * u2).sin())
    };
    let (a, b) = gauss(rng);
    let (c, d) = gauss(rng);
    let v = [C64::new(a, b), C64::new(c, d)];
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}
