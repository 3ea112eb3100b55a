use crate::linalg::C64;
use std::f64::consts::PI;

/// Shifts at or below this size are snapped to zero.
pub const SHIFT_SNAP: f64 = 1e-9;

/// Per-entry frequency shifts of a character-twisted bundle.
///
/// Entry `(i,j)` of a twisted section has Fourier modes `m + s_ij` with
/// `m ∈ ℤ^{2g}`. The reduced shift lies in `[-½, ½]`; `wrap` records the
/// integer part removed, which is the relabeling used by the transfer to
/// global forms.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyShift {
    pub n: usize,
    pub dim: usize,
    shift: Vec<f64>,
    wrap: Vec<i64>,
}

impl FrequencyShift {
    pub fn trivial(n: usize, dim: usize) -> Self {
        FrequencyShift { n, dim, shift: vec![0.0; n * n * dim], wrap: vec![0; n * n * dim] }
    }

    /// From holonomy angles: `z_{λ_l} = diag(e^{iθ[l][i]})`, sections obey
    /// `α(x + λ) = Ad z_λ⁻¹ α(x)`.
    pub fn from_angles(n: usize, theta: &[Vec<f64>]) -> Self {
        let dim = theta.len();
        let mut out = Self::trivial(n, dim);
        for i in 0..n {
            for j in 0..n {
                for l in 0..dim {
                    let raw = -(theta[l][i] - theta[l][j]) / (2.0 * PI);
                    let r = raw.round();
                    let mut s = raw - r;
                    if s.abs() <= SHIFT_SNAP {
                        s = 0.0;
                    }
                    let k = (i * n + j) * dim + l;
                    out.shift[k] = s;
                    out.wrap[k] = r as i64;
                }
            }
        }
        out
    }

    pub fn get(&self, i: usize, j: usize) -> &[f64] {
        let k = (i * self.n + j) * self.dim;
        &self.shift[k..k + self.dim]
    }

    pub fn wrap(&self, i: usize, j: usize) -> &[i64] {
        let k = (i * self.n + j) * self.dim;
        &self.wrap[k..k + self.dim]
    }

    pub fn is_trivial_entry(&self, i: usize, j: usize) -> bool {
        self.get(i, j).iter().all(|s| *s == 0.0)
    }

    pub fn is_untwisted(&self) -> bool {
        self.shift.iter().all(|s| *s == 0.0) && self.wrap.iter().all(|w| *w == 0)
    }

    /// Integer offset `s_ik + s_kj − s_ij` of a product landing in entry `(i,j)`.
    pub fn product_offset(&self, i: usize, k: usize, j: usize) -> Vec<i64> {
        let (a, b, c) = (self.get(i, k), self.get(k, j), self.get(i, j));
        (0..self.dim).map(|l| (a[l] + b[l] - c[l]).round() as i64).collect()
    }

    /// Shifted frequency `m + s_ij`.
    pub fn frequency(&self, i: usize, j: usize, m: &[i64]) -> Vec<f64> {
        m.iter().zip(self.get(i, j)).map(|(&ml, &s)| ml as f64 + s).collect()
    }

    /// Character value `e^{2πi s_ij,l}` picked up across generator `l`.
    pub fn character(&self, i: usize, j: usize, l: usize) -> C64 {
        C64::from_polar(1.0, 2.0 * PI * self.get(i, j)[l])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antisymmetric_and_diagonal_free() {
        let theta = vec![vec![0.3, -1.1, 2.0], vec![0.0, 0.7, -2.9]];
        let s = FrequencyShift::from_angles(3, &theta);
        for i in 0..3 {
            assert!(s.is_trivial_entry(i, i));
            for j in 0..3 {
                for l in 0..2 {
                    let sum = s.get(i, j)[l] + s.get(j, i)[l];
                    assert!((sum - sum.round()).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn full_turn_is_trivial_with_wrap() {
        let theta = vec![vec![2.0 * PI, 0.0], vec![0.0, 0.0]];
        let s = FrequencyShift::from_angles(2, &theta);
        assert!(s.is_trivial_entry(0, 1));
        assert_eq!(s.wrap(0, 1), &[-1, 0]);
    }
}
