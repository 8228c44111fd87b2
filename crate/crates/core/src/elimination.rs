//! Order-by-order adiabatic elimination of the fast subsystem.
//!
//! Expanding the assignment map K and the reduced generator L_s in the
//! timescale separation eps, the order-n block of the invariance relation
//! K(L_s(rho_s)) = L_tot(K(rho_s)) reads
//!
//!   (L_A (x) I_B)(K_n(rho_s)) = rho_bar (x) L_{s,n}(rho_s) - M_n(rho_s),
//!
//!   M_n = (I_A (x) L_B + L_int)(K_{n-1}) - sum_{k=1..n} K_k . L_{s,n-k},
//!
//! starting from K_0 = rho_bar (x) id, L_{s,0} = 0. Applying tr_A to both
//! sides annihilates the left side, which forces L_{s,n} = tr_A . M_n; the
//! remaining linear equation is solved with the gauge constraint
//! tr_A . K_n = 0 (partial-trace parametrization). The solve reuses the
//! model's bordered factorization of L_A block by block over qubit indices.
//!
//! Everything here is expressed in bookkeeping units: L_int enters with unit
//! strength (gamma-scaled) and physical maps are recovered by summing with
//! eps = |g|/gamma.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lapack;
use crate::model::{JCParams, LindbladModel};
use crate::superop::{partial_trace_a_op, CMat, CVec, Operator, SuperOperator};
use crate::tol::Tolerances;

/// Per-order elimination data in the partial-trace gauge.
#[derive(Clone, Debug)]
pub struct EliminationResult {
    pub order: usize,
    /// K_n as maps from the qubit operator space to the composite operator
    /// space, indices 0..=order.
    pub k_maps: Vec<SuperOperator>,
    /// L_{s,n} on the qubit operator space, indices 0..=order.
    pub ls_maps: Vec<SuperOperator>,
    /// Gauge in which the recursion was solved.
    pub gauge: GaugeChoice,
    /// Max relative residual of the constrained solve at each order.
    pub residual_per_order: Vec<f64>,
    /// Oscillator Hilbert dimension used.
    pub dim_a: usize,
    /// Parameters of the model the recursion was run on.
    pub params: JCParams,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeChoice {
    /// Partial-trace parametrization, G = 0.
    Zero,
}

impl EliminationResult {
    /// K_n applied to the j-th qubit matrix unit, as a composite operator.
    pub fn k_col(&self, n: usize, j: usize) -> Operator {
        let col = self.k_maps[n].matrix().column(j).to_owned();
        Operator::devectorize(&col, self.dim_a * 2).expect("stored dims consistent")
    }

    /// L_{s,n} applied to the j-th qubit matrix unit.
    pub fn ls_col(&self, n: usize, j: usize) -> Operator {
        let col = self.ls_maps[n].matrix().column(j).to_owned();
        Operator::devectorize(&col, 2).expect("stored dims consistent")
    }

    /// Truncated assignment map K(eps) = sum eps^n K_n.
    pub fn assignment_map(&self, eps: f64) -> SuperOperator {
        truncated_sum(&self.k_maps, eps)
    }

    /// Truncated reduced generator L_s(eps) = sum eps^n L_{s,n}.
    ///
    /// With eps = |g|/gamma this is the physical slow-qubit generator.
    pub fn reduced_generator(&self, eps: f64) -> SuperOperator {
        truncated_sum(&self.ls_maps, eps)
    }
}

fn truncated_sum(maps: &[SuperOperator], eps: f64) -> SuperOperator {
    let mut acc = maps[0].clone();
    let mut w = 1.0f64;
    for m in &maps[1..] {
        w *= eps;
        acc = acc.add(&m.scale(C64::new(w, 0.0))).expect("uniform dims");
    }
    acc
}

/// Run the recursion up to the requested order in the G = 0 gauge.
pub fn eliminate(model: &LindbladModel, order: usize, tol: &Tolerances) -> Result<EliminationResult> {
    let d_b = 2usize;
    let rho_bar = model.steady_state().clone();

    // Columns of K_n and L_{s,n} over the qubit matrix-unit basis, in
    // vectorization order (unit j has its 1 at vec index j).
    let mut k_cols: Vec<Vec<Operator>> = Vec::with_capacity(order + 1);
    let mut ls_cols: Vec<Vec<Operator>> = Vec::with_capacity(order + 1);
    let mut residuals = vec![0.0f64; order + 1];

    let units: Vec<Operator> = (0..d_b * d_b)
        .map(|j| {
            let (c, r) = (j / d_b, j % d_b);
            Operator::matrix_unit(d_b, r, c)
        })
        .collect();

    k_cols.push(units.iter().map(|e| rho_bar.kron(e)).collect());
    ls_cols.push(units.iter().map(|_| Operator::zeros(d_b)).collect());

    for n in 1..=order {
        let mut k_n = Vec::with_capacity(4);
        let mut ls_n = Vec::with_capacity(4);
        let mut worst = 0.0f64;
        for j in 0..4 {
            // M_n(E_j); the k = n term vanishes because L_{s,0} = 0.
            let mut m_n = model.apply_lint_unit(&k_cols[n - 1][j]);
            for k in 1..n {
                let y = &ls_cols[n - k][j];
                m_n = m_n.sub(&apply_k(&k_cols[k], y));
            }
            let ls = partial_trace_a_op(&m_n, model.dim_a, d_b)?;
            let rhs = rho_bar.kron(&ls).sub(&m_n);
            let (x, _mult) = model.solve_fast_lifted(&rhs)?;
            let resid = model.apply_la_lifted(&x).sub(&rhs).norm_fro();
            let rel = resid / rhs.norm_fro().max(f64::MIN_POSITIVE);
            let threshold = tol.residual_rel;
            if rel > threshold && resid > threshold {
                return Err(Error::NotSolvable { residual: rel, tol: threshold });
            }
            worst = worst.max(rel.min(resid));
            k_n.push(x);
            ls_n.push(ls);
        }
        residuals[n] = worst;
        k_cols.push(k_n);
        ls_cols.push(ls_n);
    }

    let d_tot = model.dim_total();
    let k_maps = k_cols
        .iter()
        .map(|cols| assemble(cols, d_b, d_tot))
        .collect::<Vec<_>>();
    let ls_maps = ls_cols
        .iter()
        .map(|cols| assemble(cols, d_b, d_b))
        .collect::<Vec<_>>();

    Ok(EliminationResult {
        order,
        k_maps,
        ls_maps,
        gauge: GaugeChoice::Zero,
        residual_per_order: residuals,
        dim_a: model.dim_a,
        params: model.params.clone(),
    })
}

/// Apply a map given by its matrix-unit columns to an arbitrary qubit
/// operator (linear combination of the stored columns).
fn apply_k(cols: &[Operator], y: &Operator) -> Operator {
    let yv = y.vectorize();
    let mut acc = cols[0].scale(yv[0]);
    for j in 1..cols.len() {
        if yv[j] != C64::new(0.0, 0.0) {
            acc = acc.add(&cols[j].scale(yv[j]));
        }
    }
    acc
}

fn assemble(cols: &[Operator], d_in: usize, d_out: usize) -> SuperOperator {
    let mut m = CMat::zeros((d_out * d_out, d_in * d_in));
    for (j, x) in cols.iter().enumerate() {
        m.column_mut(j).assign(&x.vectorize());
    }
    SuperOperator::new(d_in, d_out, m).expect("assembled dims consistent")
}

/// Operator norm of K(eps) . L_s(eps) - L_tot(eps) . K(eps) over the
/// truncated sums, measured as the largest singular value of the map on
/// vectorized qubit operators. Decays as O(eps^(order+1)) when the recursion
/// is consistent.
pub fn invariance_residual(res: &EliminationResult, eps: f64, model: &LindbladModel) -> f64 {
    let mut w_cols: Vec<CVec> = Vec::with_capacity(4);
    // Truncated columns K(eps)(E_j).
    let k_eps: Vec<Operator> = (0..4)
        .map(|j| {
            let mut acc = res.k_col(0, j);
            let mut w = 1.0;
            for n in 1..=res.order {
                w *= eps;
                acc = acc.add(&res.k_col(n, j).scale(C64::new(w, 0.0)));
            }
            acc
        })
        .collect();
    for j in 0..4 {
        // L_s(eps)(E_j).
        let mut ls_e = res.ls_col(0, j);
        let mut w = 1.0;
        for n in 1..=res.order {
            w *= eps;
            ls_e = ls_e.add(&res.ls_col(n, j).scale(C64::new(w, 0.0)));
        }
        // K(eps)(L_s(eps)(E_j)) by linearity over the stored columns.
        let k_ls = apply_k(&k_eps, &ls_e);
        // L_tot(eps)(K(eps)(E_j)) in bookkeeping units.
        let ltot_k = model
            .apply_la_lifted(&k_eps[j])
            .add(&model.apply_lint_unit(&k_eps[j]).scale(C64::new(eps, 0.0)));
        w_cols.push(ltot_k.sub(&k_ls).vectorize());
    }
    // sigma_max via the 4x4 Gram matrix.
    let mut gram = CMat::zeros((4, 4));
    for i in 0..4 {
        for j in 0..4 {
            let mut s = C64::new(0.0, 0.0);
            for (u, v) in w_cols[i].iter().zip(w_cols[j].iter()) {
                s += u.conj() * v;
            }
            gram[[i, j]] = s;
        }
    }
    let eigs = lapack::eigh(&gram).expect("4x4 Hermitian eig");
    eigs.0[3].max(0.0).sqrt()
}

/// Linear, time-independent gauge freedom: G = sum_{n>=1} eps^n G_n on the
/// qubit operator space.
#[derive(Clone, Debug)]
pub struct GaugeMap {
    orders: Vec<SuperOperator>,
}

impl GaugeMap {
    /// `orders[m]` is G_{m+1}; every entry must act on the qubit space.
    pub fn from_orders(orders: Vec<SuperOperator>) -> Result<Self> {
        for g in &orders {
            if g.dim_in() != 2 || g.dim_out() != 2 {
                return Err(Error::DimensionMismatch(
                    "gauge superoperators must act on the qubit operator space".into(),
                ));
            }
        }
        Ok(GaugeMap { orders })
    }

    pub fn zero() -> Self {
        GaugeMap { orders: Vec::new() }
    }

    /// Matrix of I_B + G at the working eps.
    pub fn one_plus_g(&self, eps: f64) -> CMat {
        let mut t = lapack::identity(4);
        let mut w = 1.0f64;
        for g in &self.orders {
            w *= eps;
            t = t + g.matrix().mapv(|v| v * C64::new(w, 0.0));
        }
        t
    }
}

/// Transform the G = 0 results into the gauge G:
/// K^G = K . (I + G) and L_s^G = (I + G)^-1 . L_s . (I + G).
///
/// Returns `SingularGauge` when the condition number of (I + G) exceeds
/// `tol.gauge_cond_max`.
pub fn apply_gauge(
    res: &EliminationResult,
    gauge: &GaugeMap,
    eps: f64,
    tol: &Tolerances,
) -> Result<(SuperOperator, SuperOperator)> {
    let t = gauge.one_plus_g(eps);
    let sv = lapack::singular_values(&t)?;
    let cond = if sv[3] > 0.0 { sv[0] / sv[3] } else { f64::INFINITY };
    if cond > tol.gauge_cond_max {
        return Err(Error::SingularGauge { cond, max: tol.gauge_cond_max });
    }
    let t_super = SuperOperator::new(2, 2, t.clone())?;
    let k_g = res.assignment_map(eps).compose(&t_super)?;
    let ls = res.reduced_generator(eps);
    // L_s^G = T^-1 (L_s T): solve T X = L_s T column by column.
    let ls_t = lapack::matmul(ls.matrix(), &t);
    let lu = lapack::LuFactor::new(&t)?;
    let mut out = CMat::zeros((4, 4));
    for j in 0..4 {
        let col: Vec<C64> = (0..4).map(|i| ls_t[[i, j]]).collect();
        let x = lu.solve(&col)?;
        for i in 0..4 {
            out[[i, j]] = x[i];
        }
    }
    Ok((k_g, SuperOperator::new(2, 2, out)?))
}

/// JSON-friendly encodings of complex matrices and elimination results
/// (complex entries as [re, im] pairs, row-major, with explicit dims).
pub mod encode {
    use super::*;

    #[derive(Serialize)]
    pub struct MatrixJson {
        pub dims: [usize; 2],
        /// Row-major [re, im] pairs.
        pub data: Vec<[f64; 2]>,
    }

    impl MatrixJson {
        pub fn from_cmat(m: &CMat) -> Self {
            MatrixJson {
                dims: [m.nrows(), m.ncols()],
                data: m.iter().map(|v| [v.re, v.im]).collect(),
            }
        }
    }

    #[derive(Serialize)]
    pub struct SuperOpJson {
        pub hilbert_dim_in: usize,
        pub hilbert_dim_out: usize,
        pub matrix: MatrixJson,
    }

    impl SuperOpJson {
        pub fn from_superop(s: &SuperOperator) -> Self {
            SuperOpJson {
                hilbert_dim_in: s.dim_in(),
                hilbert_dim_out: s.dim_out(),
                matrix: MatrixJson::from_cmat(s.matrix()),
            }
        }
    }

    #[derive(Serialize)]
    pub struct EliminationJson {
        pub params: JCParams,
        pub fock_cutoff: usize,
        pub order: usize,
        pub gauge: GaugeChoice,
        pub residual_per_order: Vec<f64>,
        pub k_maps: Vec<SuperOpJson>,
        pub ls_maps: Vec<SuperOpJson>,
    }

    impl EliminationJson {
        pub fn from_result(r: &EliminationResult) -> Self {
            EliminationJson {
                params: r.params.clone(),
                fock_cutoff: r.dim_a - 1,
                order: r.order,
                gauge: r.gauge,
                residual_per_order: r.residual_per_order.clone(),
                k_maps: r.k_maps.iter().map(SuperOpJson::from_superop).collect(),
                ls_maps: r.ls_maps.iter().map(SuperOpJson::from_superop).collect(),
            }
        }
    }
}
