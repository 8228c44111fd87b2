//! Vectorized superoperator algebra on finite-dimensional operator spaces:
//! construction, composition, spectra, constrained inversion and partial
//! traces.
//!
//! Vectorization convention (fixed repo-wide): column stacking. The entry
//! X[r, c] of a d x d operator lands at vec index `c*d + r`, and the matrix
//! of the map X -> A X B is kron(B^T, A). Tensor products order the fast
//! subsystem A first: kron(A, B) carries A on the coarse index.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lapack;
use crate::tol::Tolerances;

pub type CMat = Array2<C64>;
pub type CVec = Array1<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Complex square matrix on a finite Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    m: CMat,
}

impl Operator {
    pub fn new(m: CMat) -> Result<Self> {
        let (r, c) = m.dim();
        if r != c {
            return Err(Error::DimensionMismatch(format!(
                "operator must be square, got {r}x{c}"
            )));
        }
        Ok(Operator { m })
    }

    pub fn zeros(dim: usize) -> Self {
        Operator { m: CMat::zeros((dim, dim)) }
    }

    pub fn identity(dim: usize) -> Self {
        Operator { m: lapack::identity(dim) }
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        Operator { m: CMat::from_shape_fn((dim, dim), |(r, c)| f(r, c)) }
    }

    /// Matrix unit |r><c|.
    pub fn matrix_unit(dim: usize, r: usize, c: usize) -> Self {
        let mut m = CMat::zeros((dim, dim));
        m[[r, c]] = ONE;
        Operator { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn mat(&self) -> &CMat {
        &self.m
    }

    pub fn into_mat(self) -> CMat {
        self.m
    }

    pub fn dagger(&self) -> Self {
        Operator { m: self.m.t().mapv(|v| v.conj()) }
    }

    pub fn trace(&self) -> C64 {
        self.m.diag().sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        Operator { m: &self.m + &other.m }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Operator { m: &self.m - &other.m }
    }

    pub fn scale(&self, s: C64) -> Self {
        Operator { m: self.m.mapv(|v| v * s) }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Operator { m: lapack::matmul(&self.m, &other.m) }
    }

    /// Tensor product; `self` carries the coarse index.
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim(), other.dim());
        let d = da * db;
        let mut m = CMat::zeros((d, d));
        for ((ra, ca), va) in self.m.indexed_iter() {
            if *va == ZERO {
                continue;
            }
            for ((rb, cb), vb) in other.m.indexed_iter() {
                m[[ra * db + rb, ca * db + cb]] = *va * *vb;
            }
        }
        Operator { m }
    }

    pub fn norm_fro(&self) -> f64 {
        self.m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_max(&self) -> f64 {
        self.m.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Max-entry deviation from Hermiticity.
    pub fn herm_defect(&self) -> f64 {
        let mut d = 0.0f64;
        for r in 0..self.dim() {
            for c in r..self.dim() {
                d = d.max((self.m[[r, c]] - self.m[[c, r]].conj()).norm());
            }
        }
        d
    }

    pub fn is_hermitian(&self, tol: &Tolerances) -> bool {
        self.herm_defect() <= tol.herm_rel * self.norm_max().max(1.0)
    }

    /// Replace by the Hermitian part (X + X^dagger)/2.
    pub fn hermitize(&self) -> Self {
        let h = self.dagger();
        self.add(&h).scale(C64::new(0.5, 0.0))
    }

    /// Eigenvalues assuming Hermiticity (ascending).
    pub fn eigvals_hermitian(&self) -> Result<Array1<f64>> {
        Ok(lapack::eigh(&self.m)?.0)
    }

    pub fn min_eigval_hermitian(&self) -> Result<f64> {
        let w = self.eigvals_hermitian()?;
        Ok(w[0])
    }

    /// Trace norm (sum of singular values); for Hermitian input this is the
    /// sum of absolute eigenvalues.
    pub fn trace_norm(&self) -> Result<f64> {
        Ok(lapack::singular_values(&self.m)?.sum())
    }

    /// Column-stacked vector form.
    pub fn vectorize(&self) -> CVec {
        let d = self.dim();
        let mut v = CVec::zeros(d * d);
        for ((r, c), x) in self.m.indexed_iter() {
            v[c * d + r] = *x;
        }
        v
    }

    /// Inverse of [`Operator::vectorize`].
    pub fn devectorize(v: &CVec, dim: usize) -> Result<Self> {
        if v.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "devectorize: vector length {} does not match dim {dim}",
                v.len()
            )));
        }
        Ok(Operator::from_fn(dim, |r, c| v[c * dim + r]))
    }
}

/// Partial trace over the first (A) factor of a composite operator.
pub fn partial_trace_a_op(x: &Operator, d_a: usize, d_b: usize) -> Result<Operator> {
    if x.dim() != d_a * d_b {
        return Err(Error::DimensionMismatch(format!(
            "partial trace: operator dim {} is not {d_a}*{d_b}",
            x.dim()
        )));
    }
    let m = x.mat();
    Ok(Operator::from_fn(d_b, |rb, cb| {
        (0..d_a).map(|a| m[[a * d_b + rb, a * d_b + cb]]).sum()
    }))
}

/// Linear map on an operator space, stored as a matrix acting on
/// column-stacked operators. `d_in`/`d_out` are Hilbert-space dimensions;
/// the matrix has shape (d_out^2, d_in^2).
#[derive(Clone, Debug)]
pub struct SuperOperator {
    d_in: usize,
    d_out: usize,
    m: CMat,
}

impl SuperOperator {
    pub fn new(d_in: usize, d_out: usize, m: CMat) -> Result<Self> {
        if m.dim() != (d_out * d_out, d_in * d_in) {
            return Err(Error::DimensionMismatch(format!(
                "superoperator matrix shape {:?} does not match ({}, {})",
                m.dim(),
                d_out * d_out,
                d_in * d_in
            )));
        }
        Ok(SuperOperator { d_in, d_out, m })
    }

    pub fn identity(d: usize) -> Self {
        SuperOperator { d_in: d, d_out: d, m: lapack::identity(d * d) }
    }

    pub fn zero(d_in: usize, d_out: usize) -> Self {
        SuperOperator { d_in, d_out, m: CMat::zeros((d_out * d_out, d_in * d_in)) }
    }

    /// Hilbert-space dimension of the input operators.
    pub fn dim_in(&self) -> usize {
        self.d_in
    }

    /// Hilbert-space dimension of the output operators.
    pub fn dim_out(&self) -> usize {
        self.d_out
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    /// Assemble from an action on operators, column by column over matrix
    /// units.
    pub fn from_op_action(
        d_in: usize,
        d_out: usize,
        f: impl Fn(&Operator) -> Operator,
    ) -> Self {
        let n_in = d_in * d_in;
        let mut m = CMat::zeros((d_out * d_out, n_in));
        for j in 0..n_in {
            let (c, r) = (j / d_in, j % d_in);
            let e = Operator::matrix_unit(d_in, r, c);
            let out = f(&e).vectorize();
            m.column_mut(j).assign(&out);
        }
        SuperOperator { d_in, d_out, m }
    }

    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        if x.dim() != self.d_in {
            return Err(Error::DimensionMismatch(format!(
                "apply: operator dim {} does not match superoperator input dim {}",
                x.dim(),
                self.d_in
            )));
        }
        let v = lapack::matvec(&self.m, &x.vectorize());
        Operator::devectorize(&v, self.d_out)
    }

    pub fn apply_vec(&self, v: &CVec) -> Result<CVec> {
        if v.len() != self.d_in * self.d_in {
            return Err(Error::DimensionMismatch(format!(
                "apply_vec: length {} does not match {}",
                v.len(),
                self.d_in * self.d_in
            )));
        }
        Ok(lapack::matvec(&self.m, v))
    }

    /// Composition `self . other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if other.d_out != self.d_in {
            return Err(Error::DimensionMismatch(format!(
                "compose: inner dims {} and {} differ",
                other.d_out, self.d_in
            )));
        }
        Ok(SuperOperator {
            d_in: other.d_in,
            d_out: self.d_out,
            m: lapack::matmul(&self.m, &other.m),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.d_in != other.d_in || self.d_out != other.d_out {
            return Err(Error::DimensionMismatch("superoperator add".into()));
        }
        Ok(SuperOperator { d_in: self.d_in, d_out: self.d_out, m: &self.m + &other.m })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.d_in != other.d_in || self.d_out != other.d_out {
            return Err(Error::DimensionMismatch("superoperator sub".into()));
        }
        Ok(SuperOperator { d_in: self.d_in, d_out: self.d_out, m: &self.m - &other.m })
    }

    pub fn scale(&self, s: C64) -> Self {
        SuperOperator { d_in: self.d_in, d_out: self.d_out, m: self.m.mapv(|v| v * s) }
    }

    pub fn norm_one(&self) -> f64 {
        lapack::one_norm(&self.m)
    }

    pub fn norm_fro(&self) -> f64 {
        self.m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_max(&self) -> f64 {
        self.m.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest singular value (operator norm on vectorized operators).
    pub fn norm_spectral(&self) -> Result<f64> {
        let s = lapack::singular_values(&self.m)?;
        Ok(if s.is_empty() { 0.0 } else { s[0] })
    }

    /// The map X -> A X B. Its matrix is kron(B^T, A).
    pub fn sandwich(a: &Operator, b: &Operator) -> Self {
        let d = a.dim();
        debug_assert_eq!(d, b.dim());
        let mut m = CMat::zeros((d * d, d * d));
        // kron(B^T, A)[(cb*d + ra), (rb*d + ca)] = B[rb, cb] A[ra, ca]
        for ((rb, cb), vb) in b.mat().indexed_iter() {
            if *vb == ZERO {
                continue;
            }
            for ((ra, ca), va) in a.mat().indexed_iter() {
                m[[cb * d + ra, rb * d + ca]] = *vb * *va;
            }
        }
        SuperOperator { d_in: d, d_out: d, m }
    }

    /// The map X -> K X.
    pub fn left_mul(k: &Operator) -> Self {
        Self::sandwich(k, &Operator::identity(k.dim()))
    }

    /// The map X -> X K.
    pub fn right_mul(k: &Operator) -> Self {
        Self::sandwich(&Operator::identity(k.dim()), k)
    }

    /// Commutator superoperator X -> H X - X H.
    ///
    /// Callers supply the -i factor where a Hamiltonian term is meant.
    pub fn commutator(h: &Operator) -> Self {
        Self::left_mul(h).sub(&Self::right_mul(h)).expect("same dims")
    }

    /// Dissipator X -> L X L^dag - (L^dag L X + X L^dag L)/2.
    pub fn dissipator(l: &Operator) -> Self {
        let ldag = l.dagger();
        let ldl = ldag.matmul(l);
        let half = C64::new(0.5, 0.0);
        Self::sandwich(l, &ldag)
            .sub(&Self::left_mul(&ldl).scale(half))
            .expect("same dims")
            .sub(&Self::right_mul(&ldl).scale(half))
            .expect("same dims")
    }

    /// Lift a superoperator on A to the composite A (x) B space:
    /// the result acts as S on the A factor and as identity on B.
    pub fn lift_a(s: &Self, d_b: usize) -> Result<Self> {
        if s.d_in != s.d_out {
            return Err(Error::DimensionMismatch("lift_a requires a square superoperator".into()));
        }
        let d_a = s.d_in;
        let d = d_a * d_b;
        let mut m = CMat::zeros((d * d, d * d));
        for ((va_o, va_i), val) in s.m.indexed_iter() {
            if *val == ZERO {
                continue;
            }
            let (ca_o, ra_o) = (va_o / d_a, va_o % d_a);
            let (ca_i, ra_i) = (va_i / d_a, va_i % d_a);
            for rb in 0..d_b {
                for cb in 0..d_b {
                    let vo = (ca_o * d_b + cb) * d + (ra_o * d_b + rb);
                    let vi = (ca_i * d_b + cb) * d + (ra_i * d_b + rb);
                    m[[vo, vi]] = *val;
                }
            }
        }
        Ok(SuperOperator { d_in: d, d_out: d, m })
    }

    /// Lift a superoperator on B to the composite A (x) B space.
    pub fn lift_b(s: &Self, d_a: usize) -> Result<Self> {
        if s.d_in != s.d_out {
            return Err(Error::DimensionMismatch("lift_b requires a square superoperator".into()));
        }
        let d_b = s.d_in;
        let d = d_a * d_b;
        let mut m = CMat::zeros((d * d, d * d));
        for ((vb_o, vb_i), val) in s.m.indexed_iter() {
            if *val == ZERO {
                continue;
            }
            let (cb_o, rb_o) = (vb_o / d_b, vb_o % d_b);
            let (cb_i, rb_i) = (vb_i / d_b, vb_i % d_b);
            for ra in 0..d_a {
                for ca in 0..d_a {
                    let vo = (ca * d_b + cb_o) * d + (ra * d_b + rb_o);
                    let vi = (ca * d_b + cb_i) * d + (ra * d_b + rb_i);
                    m[[vo, vi]] = *val;
                }
            }
        }
        Ok(SuperOperator { d_in: d, d_out: d, m })
    }

    /// Partial trace over A as a superoperator from the composite operator
    /// space to the B operator space.
    pub fn partial_trace_a(d_a: usize, d_b: usize) -> Self {
        let d = d_a * d_b;
        let mut m = CMat::zeros((d_b * d_b, d * d));
        for rb in 0..d_b {
            for cb in 0..d_b {
                let vb = cb * d_b + rb;
                for a in 0..d_a {
                    let v = (a * d_b + cb) * d + (a * d_b + rb);
                    m[[vb, v]] = ONE;
                }
            }
        }
        SuperOperator { d_in: d, d_out: d_b, m }
    }

    /// Max deviation of tr(S(X)) from 0 over the matrix-unit basis
    /// (trace-annihilation defect).
    pub fn trace_defect(&self) -> f64 {
        let d = self.d_out;
        let mut worst = 0.0f64;
        for j in 0..self.d_in * self.d_in {
            let mut t = ZERO;
            for i in 0..d {
                t += self.m[[i * d + i, j]];
            }
            worst = worst.max(t.norm());
        }
        worst
    }

    /// Max deviation of tr(S(X)) from tr(X) over the matrix-unit basis
    /// (trace-preservation defect).
    pub fn trace_preservation_defect(&self) -> f64 {
        let (d_in, d_out) = (self.d_in, self.d_out);
        let mut worst = 0.0f64;
        for j in 0..d_in * d_in {
            let (c, r) = (j / d_in, j % d_in);
            let expect = if r == c { ONE } else { ZERO };
            let mut t = ZERO;
            for i in 0..d_out {
                t += self.m[[i * d_out + i, j]];
            }
            worst = worst.max((t - expect).norm());
        }
        worst
    }

    /// Hermiticity-preservation defect: max entrywise deviation of
    /// S(X^dag) from S(X)^dag, evaluated on the matrix level via the
    /// dagger permutation of vec indices.
    pub fn herm_preserving_defect(&self) -> f64 {
        let (d_in, d_out) = (self.d_in, self.d_out);
        let swap = |v: usize, d: usize| -> usize {
            let (c, r) = (v / d, v % d);
            r * d + c
        };
        let mut worst = 0.0f64;
        for ((vo, vi), val) in self.m.indexed_iter() {
            let mirrored = self.m[[swap(vo, d_out), swap(vi, d_in)]].conj();
            worst = worst.max((*val - mirrored).norm());
        }
        worst
    }

    /// Full eigendecomposition. `zero_index` is set when exactly one
    /// eigenvalue lies within `tol.zero_rel * norm(S)` of zero.
    pub fn spectrum(&self, tol: &Tolerances) -> Result<SpectralData> {
        if self.d_in != self.d_out {
            return Err(Error::DimensionMismatch("spectrum requires a square superoperator".into()));
        }
        let (w, v) = lapack::eig(&self.m)?;
        let scale = self.norm_one().max(f64::MIN_POSITIVE);
        let zero_tol = tol.zero_rel * scale;
        let candidates: Vec<usize> = w
            .iter()
            .enumerate()
            .filter(|(_, lam)| lam.norm() <= zero_tol)
            .map(|(i, _)| i)
            .collect();
        let zero_index = if candidates.len() == 1 { Some(candidates[0]) } else { None };
        Ok(SpectralData {
            eigenvalues: w.to_vec(),
            right_vectors: v,
            zero_index,
            zero_tol,
        })
    }
}

/// Eigendecomposition of a superoperator with bookkeeping for the zero mode.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub eigenvalues: Vec<C64>,
    /// Right eigenvectors as columns, aligned with `eigenvalues`.
    pub right_vectors: CMat,
    /// Index of the eigenvalue identified as 0, when it is unique.
    pub zero_index: Option<usize>,
    /// Absolute tolerance used to identify the zero mode.
    pub zero_tol: f64,
}

impl SpectralData {
    /// Number of eigenvalues within the zero tolerance.
    pub fn zero_candidates(&self) -> usize {
        self.eigenvalues.iter().filter(|l| l.norm() <= self.zero_tol).count()
    }

    /// Index of the unique zero eigenvalue, or `ZeroNotSimple`.
    pub fn require_simple_zero(&self) -> Result<usize> {
        match self.zero_index {
            Some(i) => Ok(i),
            None => Err(Error::ZeroNotSimple {
                count: self.zero_candidates(),
                tol: self.zero_tol,
            }),
        }
    }

    /// Smallest decay rate -Re(lambda) over the non-zero modes.
    pub fn spectral_gap(&self) -> f64 {
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != self.zero_index)
            .map(|(_, l)| -l.re)
            .fold(f64::INFINITY, f64::min)
    }

    /// Sum of eigenvalues (equals the matrix trace).
    pub fn eigenvalue_sum(&self) -> C64 {
        self.eigenvalues.iter().sum()
    }
}

/// Data fixing the underdetermined directions of a singular solve:
/// `completion` columns span a complement of the image (they absorb any
/// inconsistent component of the right-hand side), and `constraints` rows fix
/// the kernel component of the solution (the returned X satisfies C X = 0).
#[derive(Clone, Debug)]
pub struct KernelSpec {
    pub completion: CMat,
    pub constraints: CMat,
}

impl KernelSpec {
    /// One-dimensional kernel: a single completion column and constraint row.
    pub fn simple(completion: CVec, constraint: CVec) -> Self {
        let n = completion.len();
        assert_eq!(n, constraint.len());
        let mut comp = CMat::zeros((n, 1));
        comp.column_mut(0).assign(&completion);
        let mut cons = CMat::zeros((1, n));
        cons.row_mut(0).assign(&constraint);
        KernelSpec { completion: comp, constraints: cons }
    }

    pub fn rank(&self) -> usize {
        self.completion.ncols()
    }
}

/// Bordered LU solver for a singular superoperator with known kernel data.
///
/// Factorizes [[S, U], [C, 0]] once; each solve of S x = y with C x = 0 is a
/// pair of triangular substitutions. The multiplier on the U columns measures
/// the component of y outside the image of S.
pub struct ConstrainedSolver {
    n: usize,
    k: usize,
    lu: lapack::LuFactor,
}

impl ConstrainedSolver {
    pub fn new(s: &SuperOperator, spec: &KernelSpec) -> Result<Self> {
        if s.d_in != s.d_out {
            return Err(Error::DimensionMismatch(
                "constrained solve requires a square superoperator".into(),
            ));
        }
        Self::from_matrix(&s.m, spec)
    }

    /// Build from the raw superoperator matrix (order n = d^2).
    pub fn from_matrix(m: &CMat, spec: &KernelSpec) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::DimensionMismatch("constrained solve: matrix not square".into()));
        }
        let k = spec.rank();
        if spec.completion.nrows() != n || spec.constraints.ncols() != n {
            return Err(Error::DimensionMismatch("kernel spec does not match matrix".into()));
        }
        let nb = n + k;
        let mut b = lapack::zeros_col_major(nb);
        for ((r, c), v) in m.indexed_iter() {
            b[[r, c]] = *v;
        }
        for j in 0..k {
            for i in 0..n {
                b[[i, n + j]] = spec.completion[[i, j]];
                b[[n + j, i]] = spec.constraints[[j, i]];
            }
        }
        let anorm = b
            .columns()
            .into_iter()
            .map(|col| col.iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        // The array was allocated in Fortran layout, so the raw buffer is
        // already column-major.
        let data = b.into_raw_vec();
        let lu = lapack::LuFactor::from_col_major(nb, data, anorm)?;
        Ok(ConstrainedSolver { n, k, lu })
    }

    /// Solve S x = y with C x = c_rhs. Returns (x, multipliers).
    pub fn solve_with(&self, y: &CVec, c_rhs: &[C64]) -> Result<(CVec, Vec<C64>)> {
        if y.len() != self.n || c_rhs.len() != self.k {
            return Err(Error::DimensionMismatch("constrained solve: rhs size".into()));
        }
        let mut rhs = Vec::with_capacity(self.n + self.k);
        rhs.extend(y.iter().copied());
        rhs.extend(c_rhs.iter().copied());
        let sol = self.lu.solve(&rhs)?;
        let x = CVec::from_vec(sol[..self.n].to_vec());
        let lam = sol[self.n..].to_vec();
        Ok((x, lam))
    }

    /// Solve S x = y with the kernel component removed (C x = 0).
    pub fn solve(&self, y: &CVec) -> Result<(CVec, Vec<C64>)> {
        self.solve_with(y, &vec![ZERO; self.k])
    }

    /// Reciprocal condition estimate of the bordered matrix.
    pub fn rcond(&self) -> Result<f64> {
        self.lu.rcond()
    }
}

/// One-shot constrained solve with residual verification.
///
/// Returns X with S X = Y (relative residual <= `tol.residual_rel`) and the
/// kernel component removed as specified. Fails with `NotSolvable` when the
/// least-norm-style solution leaves a residual above tolerance, which signals
/// either a right-hand side outside the image or kernel data that does not
/// match the operator.
pub fn constrained_solve(
    s: &SuperOperator,
    y: &CVec,
    spec: &KernelSpec,
    tol: &Tolerances,
) -> Result<CVec> {
    let solver = ConstrainedSolver::new(s, spec)?;
    let (x, _lam) = solver.solve(y)?;
    let y_norm = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let r = s.apply_vec(&x)? - y;
    let r_norm = r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let threshold = tol.residual_rel * y_norm.max(f64::MIN_POSITIVE);
    if r_norm > threshold {
        return Err(Error::NotSolvable { residual: r_norm, tol: threshold });
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_operator(dim: usize, rng: &mut ChaCha8Rng) -> Operator {
        Operator::from_fn(dim, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
    }

    #[test]
    fn vectorize_identity() {
        let v = Operator::identity(2).vectorize();
        assert_eq!(v.to_vec(), vec![c(1.0, 0.0), ZERO, ZERO, c(1.0, 0.0)]);
    }

    #[test]
    fn vectorize_convention_on_matrix_units() {
        // Column stacking: |r><c| lands at index c*d + r.
        for r in 0..2 {
            for cidx in 0..2 {
                let v = Operator::matrix_unit(2, r, cidx).vectorize();
                for i in 0..4 {
                    let expect = if i == cidx * 2 + r { 1.0 } else { 0.0 };
                    assert_eq!(v[i], c(expect, 0.0));
                }
            }
        }
    }

    #[test]
    fn devectorize_roundtrip_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in [2usize, 3, 5] {
            let x = random_operator(dim, &mut rng);
            let back = Operator::devectorize(&x.vectorize(), dim).unwrap();
            // Bitwise round trip.
            assert_eq!(x, back);
        }
    }

    #[test]
    fn sandwich_matches_direct_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_operator(3, &mut rng);
        let b = random_operator(3, &mut rng);
        let x = random_operator(3, &mut rng);
        let via_superop = SuperOperator::sandwich(&a, &b).apply(&x).unwrap();
        let direct = a.matmul(&x).matmul(&b);
        assert!(via_superop.sub(&direct).norm_max() < 1e-13);
    }

    #[test]
    fn commutator_identity_is_zero() {
        let s = SuperOperator::commutator(&Operator::identity(4));
        assert!(s.norm_max() == 0.0);
    }

    #[test]
    fn commutator_sigma_z_ladder() {
        let s = SuperOperator::commutator(&qubit::sigma_z());
        let out = s.apply(&qubit::sigma_plus()).unwrap();
        assert!(out.sub(&qubit::sigma_plus().scale(c(2.0, 0.0))).norm_max() < 1e-15);
        let out_z = s.apply(&qubit::sigma_z()).unwrap();
        assert!(out_z.norm_max() < 1e-15);
    }

    #[test]
    fn dissipator_identity_is_zero() {
        let s = SuperOperator::dissipator(&Operator::identity(3));
        assert!(s.norm_max() < 1e-15);
    }

    #[test]
    fn dissipator_decays_excited_population() {
        let s = SuperOperator::dissipator(&qubit::sigma_minus());
        let out = s.apply(&qubit::excited()).unwrap();
        let expect = qubit::ground().sub(&qubit::excited());
        assert!(out.sub(&expect).norm_max() < 1e-15);
    }

    #[test]
    fn trace_annihilation_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let l = random_operator(3, &mut rng);
            let h = random_operator(3, &mut rng).hermitize();
            let d = SuperOperator::dissipator(&l);
            let com = SuperOperator::commutator(&h);
            for _ in 0..5 {
                let x = random_operator(3, &mut rng);
                let scale = x.norm_fro();
                assert!(d.apply(&x).unwrap().trace().norm() <= 1e-12 * scale.max(1.0));
                assert!(com.apply(&x).unwrap().trace().norm() <= 1e-12 * scale.max(1.0));
            }
            assert!(d.trace_defect() < 1e-12);
            assert!(d.herm_preserving_defect() < 1e-12);
        }
    }

    #[test]
    fn lift_identity_is_identity() {
        let s = SuperOperator::identity(3);
        let lifted = SuperOperator::lift_a(&s, 2).unwrap();
        assert!(lifted.sub(&SuperOperator::identity(6)).unwrap().norm_max() < 1e-15);
    }

    #[test]
    fn lift_a_of_commutator_matches_composite_commutator() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let h = random_operator(3, &mut rng).hermitize();
        let lifted = SuperOperator::lift_a(&SuperOperator::commutator(&h), 2).unwrap();
        let direct = SuperOperator::commutator(&h.kron(&Operator::identity(2)));
        assert!(lifted.sub(&direct).unwrap().norm_max() < 1e-13);
    }

    #[test]
    fn lift_acts_on_product_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s_a = SuperOperator::dissipator(&random_operator(3, &mut rng));
        let t_b = SuperOperator::commutator(&random_operator(2, &mut rng).hermitize());
        let xa = random_operator(3, &mut rng);
        let xb = random_operator(2, &mut rng);
        let lifted_a = SuperOperator::lift_a(&s_a, 2).unwrap();
        let lifted_b = SuperOperator::lift_b(&t_b, 3).unwrap();
        let out_a = lifted_a.apply(&xa.kron(&xb)).unwrap();
        let expect_a = s_a.apply(&xa).unwrap().kron(&xb);
        assert!(out_a.sub(&expect_a).norm_max() < 1e-13);
        let out_b = lifted_b.apply(&xa.kron(&xb)).unwrap();
        let expect_b = xa.kron(&t_b.apply(&xb).unwrap());
        assert!(out_b.sub(&expect_b).norm_max() < 1e-13);
        // Lifts from the two factors commute.
        let ab = lifted_a.compose(&lifted_b).unwrap();
        let ba = lifted_b.compose(&lifted_a).unwrap();
        assert!(ab.sub(&ba).unwrap().norm_max() < 1e-12);
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rho_a = {
            let x = random_operator(3, &mut rng);
            let h = x.matmul(&x.dagger());
            h.scale(C64::new(1.0, 0.0) / h.trace())
        };
        let xb = random_operator(2, &mut rng);
        let p = SuperOperator::partial_trace_a(3, 2);
        let out = p.apply(&rho_a.kron(&xb)).unwrap();
        assert!(out.sub(&xb).norm_max() < 1e-13);
        assert!(p.trace_preservation_defect() < 1e-15);
        // Operator-level partial trace agrees with the superoperator.
        let x = random_operator(6, &mut rng);
        let lhs = partial_trace_a_op(&x, 3, 2).unwrap();
        let rhs = p.apply(&x).unwrap();
        assert!(lhs.sub(&rhs).norm_max() < 1e-14);
    }

    #[test]
    fn partial_trace_of_bell_projector() {
        // Maximally entangled two-qubit projector traces to I/2.
        let mut bell = Operator::zeros(4);
        let pairs = [(0usize, 0usize), (3, 3), (0, 3), (3, 0)];
        let m = {
            let mut m = bell.into_mat();
            for (r, cidx) in pairs {
                m[[r, cidx]] = c(0.5, 0.0);
            }
            m
        };
        bell = Operator::new(m).unwrap();
        let out = SuperOperator::partial_trace_a(2, 2).apply(&bell).unwrap();
        assert!(out.sub(&Operator::identity(2).scale(c(0.5, 0.0))).norm_max() < 1e-15);
    }

    #[test]
    fn spectrum_of_qubit_decay() {
        let gamma = 0.7;
        let s = SuperOperator::dissipator(&qubit::sigma_minus()).scale(c(gamma, 0.0));
        let tol = Tolerances::default();
        let sd = s.spectrum(&tol).unwrap();
        let mut re: Vec<f64> = sd.eigenvalues.iter().map(|l| l.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = [-gamma, -gamma / 2.0, -gamma / 2.0, 0.0];
        for (got, want) in re.iter().zip(expect.iter()) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert_eq!(sd.require_simple_zero().unwrap(), sd.zero_index.unwrap());
        // Eigenvalue sum equals the matrix trace.
        let tr: C64 = s.matrix().diag().sum();
        assert!((sd.eigenvalue_sum() - tr).norm() <= 1e-10 * tr.norm().max(1.0));
    }

    #[test]
    fn spectrum_of_hamiltonian_commutator_is_imaginary() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = random_operator(3, &mut rng).hermitize();
        let s = SuperOperator::commutator(&h).scale(c(0.0, -1.0));
        let sd = s.spectrum(&Tolerances::default()).unwrap();
        for l in &sd.eigenvalues {
            assert!(l.re.abs() < 1e-12);
        }
    }

    #[test]
    fn constrained_solve_zero_rhs() {
        let s = SuperOperator::dissipator(&qubit::sigma_minus());
        let spec = KernelSpec::simple(
            qubit::ground().vectorize(),
            Operator::identity(2).vectorize(),
        );
        let x = constrained_solve(&s, &CVec::zeros(4), &spec, &Tolerances::default()).unwrap();
        assert!(x.iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn constrained_solve_invertible_matches_direct() {
        // With an invertible S (no kernel), an empty-rank spec reduces to a
        // plain solve.
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let mut m = CMat::zeros((4, 4));
        for v in m.iter_mut() {
            *v = c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        for i in 0..4 {
            m[[i, i]] += c(3.0, 0.0);
        }
        let s = SuperOperator::new(2, 2, m.clone()).unwrap();
        let y = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 0.5), c(0.3, 0.0)]);
        let spec = KernelSpec { completion: CMat::zeros((4, 0)), constraints: CMat::zeros((0, 4)) };
        let x = constrained_solve(&s, &y, &spec, &Tolerances::default()).unwrap();
        let direct = crate::lapack::solve(&m, &y).unwrap();
        for i in 0..4 {
            assert!((x[i] - direct[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn constrained_solve_rank_deficient_matches_pseudoinverse() {
        // S = gamma D[sigma_-] has a one-dimensional kernel along vec(|0><0|).
        // Compare against the SVD pseudoinverse solution with the same kernel
        // normalization (trace component removed).
        let gamma = 1.3;
        let s = SuperOperator::dissipator(&qubit::sigma_minus()).scale(c(gamma, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let x0 = random_operator(2, &mut rng);
        let y = s.apply(&x0).unwrap().vectorize(); // guaranteed in the image
        let spec = KernelSpec::simple(
            qubit::ground().vectorize(),
            Operator::identity(2).vectorize(),
        );
        let tol = Tolerances::default();
        let x = constrained_solve(&s, &y, &spec, &tol).unwrap();
        // Pseudoinverse via explicit eigen-decomposition oracle: since x0
        // solves S x = y, the family of solutions is x0 + c vec(|0><0|);
        // removing the trace picks c = -tr(x0).
        let x0v = x0.vectorize();
        let tr_x0 = x0v[0] + x0v[3];
        let mut expect = x0v.clone();
        expect[0] -= tr_x0;
        for i in 0..4 {
            assert!((x[i] - expect[i]).norm() < 1e-11);
        }
        // Constraint: trace of solution vanishes.
        assert!((x[0] + x[3]).norm() < 1e-12);
    }

    #[test]
    fn constrained_solve_rejects_inconsistent_rhs() {
        let s = SuperOperator::dissipator(&qubit::sigma_minus());
        // tr(Y) != 0 cannot be in the image of a trace-annihilating map.
        let y = Operator::identity(2).vectorize();
        let spec = KernelSpec::simple(
            qubit::ground().vectorize(),
            Operator::identity(2).vectorize(),
        );
        let err = constrained_solve(&s, &y, &spec, &Tolerances::default()).unwrap_err();
        assert!(matches!(err, Error::NotSolvable { .. }));
    }
}
