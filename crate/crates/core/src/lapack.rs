//! Thin safe wrappers around the system LAPACK/BLAS (OpenBLAS) for dense
//! complex linear algebra: matrix products, LU factor/solve, general and
//! Hermitian eigendecomposition, and singular values.
//!
//! LAPACK is column-major; the wrappers accept row-major `ndarray` arrays and
//! convert at the boundary. Matrix products avoid copies via the transpose
//! identity (a row-major matrix is its own transpose viewed column-major).

use ndarray::{Array1, Array2, ShapeBuilder};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

extern "C" {
    fn zgemm_(
        transa: *const u8,
        transb: *const u8,
        m: *const i32,
        n: *const i32,
        k: *const i32,
        alpha: *const C64,
        a: *const C64,
        lda: *const i32,
        b: *const C64,
        ldb: *const i32,
        beta: *const C64,
        c: *mut C64,
        ldc: *const i32,
    );
    fn zgetrf_(
        m: *const i32,
        n: *const i32,
        a: *mut C64,
        lda: *const i32,
        ipiv: *mut i32,
        info: *mut i32,
    );
    fn zgetrs_(
        trans: *const u8,
        n: *const i32,
        nrhs: *const i32,
        a: *const C64,
        lda: *const i32,
        ipiv: *const i32,
        b: *mut C64,
        ldb: *const i32,
        info: *mut i32,
    );
    fn zgecon_(
        norm: *const u8,
        n: *const i32,
        a: *const C64,
        lda: *const i32,
        anorm: *const f64,
        rcond: *mut f64,
        work: *mut C64,
        rwork: *mut f64,
        info: *mut i32,
    );
    fn zgeev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut C64,
        lda: *const i32,
        w: *mut C64,
        vl: *mut C64,
        ldvl: *const i32,
        vr: *mut C64,
        ldvr: *const i32,
        work: *mut C64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
    fn zheev_(
        jobz: *const u8,
        uplo: *const u8,
        n: *const i32,
        a: *mut C64,
        lda: *const i32,
        w: *mut f64,
        work: *mut C64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
    fn zgesvd_(
        jobu: *const u8,
        jobvt: *const u8,
        m: *const i32,
        n: *const i32,
        a: *mut C64,
        lda: *const i32,
        s: *mut f64,
        u: *mut C64,
        ldu: *const i32,
        vt: *mut C64,
        ldvt: *const i32,
        work: *mut C64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

fn lapack_err(routine: &str, info: i32) -> Error {
    Error::LinAlg(format!("{routine} failed with info = {info}"))
}

/// Copy a row-major matrix into a freshly allocated column-major buffer.
fn to_col_major(a: &Array2<C64>) -> Vec<C64> {
    let (rows, cols) = a.dim();
    let mut buf = vec![ZERO; rows * cols];
    for (idx, v) in a.indexed_iter() {
        buf[idx.1 * rows + idx.0] = *v;
    }
    buf
}

/// Rebuild a row-major matrix from a column-major buffer.
fn from_col_major(buf: &[C64], rows: usize, cols: usize) -> Array2<C64> {
    Array2::from_shape_fn((rows, cols), |(r, c)| buf[c * rows + r])
}

/// Dense complex matrix product `a * b` via zgemm.
///
/// Row-major inputs are passed without copying: computing the column-major
/// product B^T A^T yields C^T, which is C in row-major storage.
pub fn matmul(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (m, k) = a.dim();
    let (k2, n) = b.dim();
    assert_eq!(k, k2, "matmul: inner dimensions {k} and {k2} differ");
    if m == 0 || n == 0 || k == 0 {
        return Array2::zeros((m, n));
    }
    let a_s = a.as_standard_layout();
    let b_s = b.as_standard_layout();
    let mut c = Array2::<C64>::zeros((m, n));
    let (mi, ni, ki) = (m as i32, n as i32, k as i32);
    unsafe {
        zgemm_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &ni,
            &mi,
            &ki,
            &ONE,
            b_s.as_ptr(),
            &ni,
            a_s.as_ptr(),
            &ki,
            &ZERO,
            c.as_mut_ptr(),
            &ni,
        );
    }
    c
}

/// Matrix-vector product `a * x`.
pub fn matvec(a: &Array2<C64>, x: &Array1<C64>) -> Array1<C64> {
    let (m, k) = a.dim();
    assert_eq!(k, x.len(), "matvec: dimensions {k} and {} differ", x.len());
    let xm = x.view().into_shape((k, 1)).unwrap().to_owned();
    let y = matmul(a, &xm);
    y.into_shape(m).unwrap()
}

/// LU factorization (zgetrf) of a square matrix, reusable for many solves.
pub struct LuFactor {
    n: usize,
    /// Factored matrix, column-major.
    lu: Vec<C64>,
    ipiv: Vec<i32>,
    /// 1-norm of the original matrix, for condition estimates.
    anorm: f64,
}

impl LuFactor {
    /// Factorize a square row-major matrix.
    pub fn new(a: &Array2<C64>) -> Result<Self> {
        let (n, n2) = a.dim();
        if n != n2 {
            return Err(Error::DimensionMismatch(format!(
                "LU factorization requires a square matrix, got {n}x{n2}"
            )));
        }
        let anorm = one_norm(a);
        let lu = to_col_major(a);
        Self::from_col_major(n, lu, anorm)
    }

    /// Factorize a square matrix already stored column-major, in place.
    pub fn from_col_major(n: usize, mut lu: Vec<C64>, anorm: f64) -> Result<Self> {
        assert_eq!(lu.len(), n * n);
        let ipiv = Self::factorize(n, lu.as_mut_slice())?;
        Ok(LuFactor { n, lu, ipiv, anorm })
    }

    fn factorize(n: usize, buf: &mut [C64]) -> Result<Vec<i32>> {
        let ni = n as i32;
        let mut info = 0i32;
        let mut ipiv = vec![0i32; n];
        unsafe { zgetrf_(&ni, &ni, buf.as_mut_ptr(), &ni, ipiv.as_mut_ptr(), &mut info) };
        if info < 0 {
            return Err(lapack_err("zgetrf", info));
        }
        if info > 0 {
            return Err(Error::LinAlg(format!(
                "zgetrf: matrix is exactly singular (U[{0},{0}] = 0)",
                info - 1
            )));
        }
        Ok(ipiv)
    }

    /// Solve `A x = b` for one right-hand side.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        assert_eq!(b.len(), self.n);
        let mut x = b.to_vec();
        let ni = self.n as i32;
        let one = 1i32;
        let mut info = 0i32;
        unsafe {
            zgetrs_(
                b"N".as_ptr(),
                &ni,
                &one,
                self.lu.as_ptr(),
                &ni,
                self.ipiv.as_ptr(),
                x.as_mut_ptr(),
                &ni,
                &mut info,
            );
        }
        if info != 0 {
            return Err(lapack_err("zgetrs", info));
        }
        Ok(x)
    }

    /// Reciprocal 1-norm condition number estimate (zgecon).
    pub fn rcond(&self) -> Result<f64> {
        let ni = self.n as i32;
        let mut rcond = 0.0f64;
        let mut work = vec![ZERO; 2 * self.n];
        let mut rwork = vec![0.0f64; 2 * self.n];
        let mut info = 0i32;
        unsafe {
            zgecon_(
                b"1".as_ptr(),
                &ni,
                self.lu.as_ptr(),
                &ni,
                &self.anorm,
                &mut rcond,
                work.as_mut_ptr(),
                rwork.as_mut_ptr(),
                &mut info,
            );
        }
        if info != 0 {
            return Err(lapack_err("zgecon", info));
        }
        Ok(rcond)
    }
}

/// Solve `A x = b` once (LU factorization is not retained).
pub fn solve(a: &Array2<C64>, b: &Array1<C64>) -> Result<Array1<C64>> {
    let f = LuFactor::new(a)?;
    let x = f.solve(b.as_slice().expect("contiguous"))?;
    Ok(Array1::from_vec(x))
}

/// Full eigendecomposition of a general complex square matrix (zgeev).
///
/// Returns `(eigenvalues, right_eigenvectors)`; eigenvector `j` is column `j`.
pub fn eig(a: &Array2<C64>) -> Result<(Array1<C64>, Array2<C64>)> {
    let (n, n2) = a.dim();
    if n != n2 {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition requires a square matrix, got {n}x{n2}"
        )));
    }
    if n == 0 {
        return Ok((Array1::zeros(0), Array2::zeros((0, 0))));
    }
    let mut af = to_col_major(a);
    let ni = n as i32;
    let mut w = vec![ZERO; n];
    let mut vr = vec![ZERO; n * n];
    let mut rwork = vec![0.0f64; 2 * n];
    let mut info = 0i32;
    // Workspace query.
    let mut work_query = [ZERO];
    let lwork_query = -1i32;
    unsafe {
        zgeev_(
            b"N".as_ptr(),
            b"V".as_ptr(),
            &ni,
            af.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            std::ptr::null_mut(),
            &1,
            vr.as_mut_ptr(),
            &ni,
            work_query.as_mut_ptr(),
            &lwork_query,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(lapack_err("zgeev (workspace query)", info));
    }
    let lwork = work_query[0].re as i32;
    let mut work = vec![ZERO; lwork.max(1) as usize];
    unsafe {
        zgeev_(
            b"N".as_ptr(),
            b"V".as_ptr(),
            &ni,
            af.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            std::ptr::null_mut(),
            &1,
            vr.as_mut_ptr(),
            &ni,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(lapack_err("zgeev", info));
    }
    Ok((Array1::from_vec(w), from_col_major(&vr, n, n)))
}

/// Eigendecomposition of a Hermitian matrix (zheev).
///
/// Returns eigenvalues in ascending order and the corresponding orthonormal
/// eigenvectors as columns. Only the Hermitian part of the input is read.
pub fn eigh(a: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let (n, n2) = a.dim();
    if n != n2 {
        return Err(Error::DimensionMismatch(format!(
            "Hermitian eigendecomposition requires a square matrix, got {n}x{n2}"
        )));
    }
    if n == 0 {
        return Ok((Array1::zeros(0), Array2::zeros((0, 0))));
    }
    let mut af = to_col_major(a);
    let ni = n as i32;
    let mut w = vec![0.0f64; n];
    let mut rwork = vec![0.0f64; (3 * n).max(1)];
    let mut info = 0i32;
    let mut work_query = [ZERO];
    let lwork_query = -1i32;
    unsafe {
        zheev_(
            b"V".as_ptr(),
            b"L".as_ptr(),
            &ni,
            af.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work_query.as_mut_ptr(),
            &lwork_query,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(lapack_err("zheev (workspace query)", info));
    }
    let lwork = work_query[0].re as i32;
    let mut work = vec![ZERO; lwork.max(1) as usize];
    unsafe {
        zheev_(
            b"V".as_ptr(),
            b"L".as_ptr(),
            &ni,
            af.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(lapack_err("zheev", info));
    }
    Ok((Array1::from_vec(w), from_col_major(&af, n, n)))
}

/// Singular values of a rectangular complex matrix, descending (zgesvd).
pub fn singular_values(a: &Array2<C64>) -> Result<Array1<f64>> {
    let (m, n) = a.dim();
    let mn = m.min(n);
    if mn == 0 {
        return Ok(Array1::zeros(0));
    }
    let mut af = to_col_major(a);
    let (mi, ni) = (m as i32, n as i32);
    let mut s = vec![0.0f64; mn];
    let mut rwork = vec![0.0f64; 5 * mn];
    let mut info = 0i32;
    let mut work_query = [ZERO];
    let lwork_query = -1i32;
    unsafe {
        zgesvd_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &mi,
            &ni,
            af.as_mut_ptr(),
            &mi,
            s.as_mut_ptr(),
            std::ptr::null_mut(),
            &1,
            std::ptr::null_mut(),
            &1,
            work_query.as_mut_ptr(),
            &lwork_query,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(lapack_err("zgesvd (workspace query)", info));
    }
    let lwork = work_query[0].re as i32;
    let mut work = vec![ZERO; lwork.max(1) as usize];
    unsafe {
        zgesvd_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &mi,
            &ni,
            af.as_mut_ptr(),
            &mi,
            s.as_mut_ptr(),
            std::ptr::null_mut(),
            &1,
            std::ptr::null_mut(),
            &1,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(lapack_err("zgesvd", info));
    }
    Ok(Array1::from_vec(s))
}

/// Matrix 1-norm (maximum absolute column sum).
pub fn one_norm(a: &Array2<C64>) -> f64 {
    a.columns()
        .into_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Build an identity matrix.
pub fn identity(n: usize) -> Array2<C64> {
    Array2::from_diag(&Array1::from_elem(n, ONE))
}

/// Allocate a column-major zero matrix of the given order (helper for
/// building LAPACK inputs in place).
pub fn zeros_col_major(n: usize) -> Array2<C64> {
    Array2::zeros((n, n).f())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn matmul_small() {
        let a = array![[c(1.0, 0.0), c(0.0, 1.0)], [c(2.0, 0.0), c(0.0, 0.0)]];
        let b = array![[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, -1.0)]];
        let m = matmul(&a, &b);
        assert_eq!(m[[0, 0]], c(0.0, 1.0));
        assert_eq!(m[[0, 1]], c(2.0, 0.0));
        assert_eq!(m[[1, 0]], c(0.0, 0.0));
        assert_eq!(m[[1, 1]], c(2.0, 0.0));
    }

    #[test]
    fn lu_roundtrip() {
        let a = array![
            [c(4.0, 1.0), c(1.0, 0.0), c(0.0, 2.0)],
            [c(0.0, -1.0), c(3.0, 0.0), c(1.0, 1.0)],
            [c(2.0, 0.0), c(0.5, 0.5), c(5.0, -1.0)]
        ];
        let x = Array1::from_vec(vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.25, -1.0)]);
        let b = matvec(&a, &x);
        let xs = solve(&a, &b).unwrap();
        for (u, v) in xs.iter().zip(x.iter()) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn eig_diagonal() {
        let a = array![[c(2.0, 1.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 3.0)]];
        let (w, v) = eig(&a).unwrap();
        let mut ws: Vec<C64> = w.to_vec();
        ws.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((ws[0] - c(-1.0, 3.0)).norm() < 1e-14);
        assert!((ws[1] - c(2.0, 1.0)).norm() < 1e-14);
        // Residual check A v = w v.
        for j in 0..2 {
            let vj = v.column(j).to_owned();
            let av = matvec(&a, &vj);
            for i in 0..2 {
                assert!((av[i] - w[j] * vj[i]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn eigh_orders_ascending() {
        let a = array![[c(2.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(2.0, 0.0)]];
        let (w, _) = eigh(&a).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-14);
        assert!((w[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn svd_rank_one() {
        let a = array![[c(3.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]];
        let s = singular_values(&a).unwrap();
        assert!((s[0] - 3.0).abs() < 1e-14);
        assert!(s[1].abs() < 1e-14);
    }
}
