//! Dense complex matrix helpers on top of faer.

use faer::{c64, Mat, Side};

use crate::error::{Error, Result};

pub type CMat = Mat<c64>;

pub const I: c64 = c64 { re: 0.0, im: 1.0 };

pub fn cr(re: f64) -> c64 {
    c64::new(re, 0.0)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    Mat::zeros(r, c)
}

pub fn eye(n: usize) -> CMat {
    Mat::identity(n, n)
}

pub fn from_rows(rows: &[&[c64]]) -> CMat {
    Mat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}

pub fn col(v: &[c64]) -> CMat {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

pub fn col_vec(m: &CMat, j: usize) -> Vec<c64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

pub fn diag(v: &[c64]) -> CMat {
    Mat::from_fn(v.len(), v.len(), |i, j| if i == j { v[i] } else { c64::new(0.0, 0.0) })
}

pub fn adjoint(a: &CMat) -> CMat {
    a.adjoint().to_owned()
}

pub fn herm(a: &CMat) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

pub fn scale(a: &CMat, s: c64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

pub fn trace(a: &CMat) -> c64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// tr(AB) without forming the product.
pub fn trace_prod(a: &CMat, b: &CMat) -> c64 {
    let mut s = c64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

pub fn max_abs(a: &CMat) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

pub fn frob(a: &CMat) -> f64 {
    a.norm_l2()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn outer(u: &[c64], v: &[c64]) -> CMat {
    Mat::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
}

/// Hermitian eigendecomposition with eigenvalues sorted in descending order.
pub fn eigh_desc(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((vec![], zeros(0, 0)));
    }
    let h = herm(a);
    let e = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigendecomposition: {e:?}")))?;
    let s = e.S();
    let u = e.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[j].re.partial_cmp(&s[i].re).unwrap_or(std::cmp::Ordering::Equal));
    let w = order.iter().map(|&i| s[i].re).collect();
    let v = Mat::from_fn(n, n, |i, j| u[(i, order[j])]);
    Ok((w, v))
}

pub fn eigvalsh(a: &CMat) -> Result<Vec<f64>> {
    Ok(eigh_desc(a)?.0)
}

/// Lower Cholesky factor of a Hermitian positive definite matrix, None if not PD.
pub fn cholesky(a: &CMat) -> Option<CMat> {
    let h = herm(a);
    h.llt(Side::Lower).ok().map(|l| l.L().to_owned())
}

/// Inverse of a Hermitian positive definite matrix.
pub fn inv_hpd(a: &CMat) -> Result<CMat> {
    use faer::linalg::solvers::DenseSolveCore;
    let h = herm(a);
    let l = h
        .llt(Side::Lower)
        .map_err(|_| Error::Numerical("matrix not positive definite".into()))?;
    Ok(herm(&l.inverse()))
}

/// Inverse of a lower triangular matrix.
pub fn inv_lower(l: &CMat) -> CMat {
    let n = l.nrows();
    let mut x = eye(n);
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(
        l.as_ref(),
        x.as_mut(),
        faer::Par::Seq,
    );
    x
}

/// Matrix function of a Hermitian matrix through its eigendecomposition.
pub fn herm_fn(a: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let (w, v) = eigh_desc(a)?;
    let n = w.len();
    let fw: Vec<c64> = w.iter().map(|&x| cr(f(x))).collect();
    let vd = Mat::from_fn(n, n, |i, j| v[(i, j)] * fw[j]);
    Ok(&vd * v.adjoint())
}

/// exp(i t H) for Hermitian H.
pub fn expi_herm(h: &CMat, t: f64) -> Result<CMat> {
    let (w, v) = eigh_desc(h)?;
    let n = w.len();
    let vd = Mat::from_fn(n, n, |i, j| v[(i, j)] * c64::from_polar(1.0, t * w[j]));
    Ok(&vd * v.adjoint())
}

/// Partial trace over the first tensor factor of C^{d1} ⊗ C^{d2}.
pub fn ptrace_first(x: &CMat, d1: usize, d2: usize) -> CMat {
    Mat::from_fn(d2, d2, |a, b| (0..d1).map(|i| x[(i * d2 + a, i * d2 + b)]).sum())
}

/// Partial trace over the second tensor factor of C^{d1} ⊗ C^{d2}.
pub fn ptrace_second(x: &CMat, d1: usize, d2: usize) -> CMat {
    Mat::from_fn(d1, d1, |a, b| (0..d2).map(|i| x[(a * d2 + i, b * d2 + i)]).sum())
}

/// Block (a,b) of size d2×d2 of a (d1 d2)×(d1 d2) matrix.
pub fn block(x: &CMat, d2: usize, a: usize, b: usize) -> CMat {
    Mat::from_fn(d2, d2, |i, j| x[(a * d2 + i, b * d2 + j)])
}

/// Embed a complex Hermitian n×n matrix as the real symmetric 2n×2n matrix [[Re, -Im], [Im, Re]].
pub fn real_embed(h: &CMat) -> Mat<f64> {
    let n = h.nrows();
    Mat::from_fn(2 * n, 2 * n, |i, j| {
        let z = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Inverse of `real_embed`; averages the two redundant copies.
pub fn real_unembed(r: &Mat<f64>) -> CMat {
    let n = r.nrows() / 2;
    Mat::from_fn(n, n, |i, j| {
        let re = 0.5 * (r[(i, j)] + r[(i + n, j + n)]);
        let im = 0.5 * (r[(i + n, j)] - r[(i, j + n)]);
        c64::new(re, im)
    })
}
