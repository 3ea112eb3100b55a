//! Dense complex matrix helpers shared by the Lie and moduli code.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Matrix unit `E_ij` (zero based).
pub fn unit(n: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(i, j)] = ONE;
    m
}

pub fn commutator(x: &CMat, y: &CMat) -> CMat {
    x * y - y * x
}

/// Frobenius norm.
pub fn fnorm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn is_strictly_upper(m: &CMat) -> bool {
    (0..m.nrows()).all(|i| (0..=i).all(|j| m[(i, j)] == ZERO))
}

pub fn is_upper(m: &CMat) -> bool {
    (0..m.nrows()).all(|i| (0..i).all(|j| m[(i, j)] == ZERO))
}

/// Exponential of a nilpotent matrix by its terminating series.
pub fn exp_nilpotent(x: &CMat) -> CMat {
    let n = x.nrows();
    let mut out = CMat::identity(n, n);
    let mut term = CMat::identity(n, n);
    for k in 1..n.max(1) {
        term = &term * x / C64::from(k as f64);
        if term.iter().all(|z| *z == ZERO) {
            break;
        }
        out += &term;
    }
    out
}

/// Logarithm of a unipotent matrix by the terminating Mercator series.
pub fn log_unipotent(u: &CMat) -> CMat {
    let n = u.nrows();
    let y = u - CMat::identity(n, n);
    let mut out = CMat::zeros(n, n);
    let mut power = CMat::identity(n, n);
    for k in 1..n.max(1) {
        power = &power * &y;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        out += &power * C64::from(sign / k as f64);
    }
    out
}

/// General matrix exponential: scaling and squaring with a Taylor core.
pub fn expm(x: &CMat) -> CMat {
    let n = x.nrows();
    let norm = x.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
    let mut s = 0u32;
    while norm * 0.5f64.powi(s as i32) > 0.5 && s < 60 {
        s += 1;
    }
    let scale = 0.5f64.powi(s as i32);
    let a = x * C64::from(scale);
    let mut out = CMat::identity(n, n);
    let mut term = CMat::identity(n, n);
    for k in 1..=20 {
        term = &term * &a / C64::from(k as f64);
        out += &term;
        if fnorm(&term) <= 1e-18 * fnorm(&out) {
            break;
        }
    }
    for _ in 0..s {
        out = &out * &out;
    }
    out
}

/// `exp(x)`, choosing the exact series when `x` is strictly upper triangular.
pub fn exp_auto(x: &CMat) -> CMat {
    if is_strictly_upper(x) {
        exp_nilpotent(x)
    } else {
        expm(x)
    }
}

/// Inverse of an upper triangular matrix by back substitution.
pub fn inverse_upper(m: &CMat) -> Option<CMat> {
    let n = m.nrows();
    if (0..n).any(|i| m[(i, i)] == ZERO) {
        return None;
    }
    let mut inv = CMat::zeros(n, n);
    for col in 0..n {
        for i in (0..=col).rev() {
            let mut acc = if i == col { ONE } else { ZERO };
            for k in i + 1..=col {
                acc -= m[(i, k)] * inv[(k, col)];
            }
            inv[(i, col)] = acc / m[(i, i)];
        }
    }
    Some(inv)
}

/// Numerical rank with relative threshold `tol` on singular values.
pub fn rank(m: &CMat, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > tol * top).count()
}

/// Orthonormal basis of the right null space, columns of the result.
pub fn nullspace(m: &CMat, tol: f64) -> CMat {
    let cols = m.ncols();
    if cols == 0 {
        return CMat::zeros(0, 0);
    }
    let rows = m.nrows().max(cols);
    let mut padded = CMat::zeros(rows, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = if top == 0.0 { 0.0 } else { tol * top.max(1.0) };
    let keep: Vec<usize> = (0..cols)
        .filter(|&k| svd.singular_values[k] <= cut)
        .collect();
    let mut out = CMat::zeros(cols, keep.len());
    for (c_idx, &k) in keep.iter().enumerate() {
        for r in 0..cols {
            out[(r, c_idx)] = vt[(k, r)].conj();
        }
    }
    out
}

/// Minimum-norm least-squares solve via SVD; singular values below `tol`
/// times the largest are treated as zero.
pub fn lstsq(a: &CMat, b: &CMat, tol: f64) -> CMat {
    let svd = a.clone().svd(true, true);
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.solve(b, tol * top).unwrap_or_else(|_| CMat::zeros(a.ncols(), b.ncols()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nilpotent_exp_log_roundtrip() {
        let mut x = CMat::zeros(3, 3);
        x[(0, 1)] = c(1.5, -0.2);
        x[(1, 2)] = c(-0.3, 2.0);
        x[(0, 2)] = c(0.7, 0.1);
        let back = log_unipotent(&exp_nilpotent(&x));
        assert!(fnorm(&(back - &x)) < 1e-14);
    }

    #[test]
    fn expm_diagonal() {
        let x = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 2.0)]));
        let e = expm(&x);
        assert!((e[(0, 0)] - c(1.0f64.exp(), 0.0)).norm() < 1e-14);
        assert!((e[(1, 1)] - c(0.0, 2.0).exp()).norm() < 1e-14);
    }

    #[test]
    fn expm_agrees_with_nilpotent_series() {
        let mut x = CMat::zeros(3, 3);
        x[(0, 1)] = c(3.0, 1.0);
        x[(1, 2)] = c(-2.0, 0.5);
        assert!(fnorm(&(expm(&x) - exp_nilpotent(&x))) < 1e-12);
    }

    #[test]
    fn upper_inverse() {
        let mut m = CMat::identity(3, 3) * c(2.0, 1.0);
        m[(0, 2)] = c(1.0, -1.0);
        m[(1, 2)] = c(0.5, 0.0);
        let inv = inverse_upper(&m).unwrap();
        assert!(fnorm(&(&m * inv - CMat::identity(3, 3))) < 1e-14);
    }

    #[test]
    fn nullspace_of_rank_one() {
        let m = CMat::from_row_slice(1, 2, &[ONE, -ONE]);
        let ns = nullspace(&m, 1e-12);
        assert_eq!(ns.ncols(), 1);
        assert!((ns[(0, 0)] - ns[(1, 0)]).norm() < 1e-14);
    }
}
