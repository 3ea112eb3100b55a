use crate::linalg::C64;
use rustfft::{Fft, FftPlanner};
use std::fmt;
use std::sync::Arc;

/// `d`-dimensional periodic grid with `n` points per axis.
pub struct Grid {
    pub n: usize,
    pub d: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid({}^{})", self.n, self.d)
    }
}

impl Grid {
    pub fn new(n: usize, d: usize) -> Self {
        let mut planner = FftPlanner::new();
        Grid { n, d, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid index of an integer frequency (wrapped modulo `n`).
    pub fn index_of(&self, m: &[i64]) -> usize {
        let n = self.n as i64;
        let mut idx = 0;
        let mut stride = 1;
        for &ml in m {
            idx += ml.rem_euclid(n) as usize * stride;
            stride *= self.n;
        }
        idx
    }

    /// Signed frequency stored at grid index `idx`.
    pub fn freq_of(&self, mut idx: usize) -> Vec<i64> {
        let n = self.n;
        (0..self.d)
            .map(|_| {
                let r = idx % n;
                idx /= n;
                if r <= n / 2 {
                    r as i64
                } else {
                    r as i64 - n as i64
                }
            })
            .collect()
    }

    /// Lattice coordinates of grid point `idx`.
    pub fn point(&self, mut idx: usize) -> Vec<f64> {
        let n = self.n;
        (0..self.d)
            .map(|_| {
                let r = idx % n;
                idx /= n;
                r as f64 / n as f64
            })
            .collect()
    }

    /// Coefficients to samples: `f(j/n) = Σ c_m e^{2πi⟨m, j/n⟩}`.
    pub fn synthesize(&self, data: &mut [C64]) {
        self.transform(data, true);
    }

    /// Samples to coefficients, normalized by `n^d`.
    pub fn analyze(&self, data: &mut [C64]) {
        self.transform(data, false);
        let s = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }

    fn transform(&self, data: &mut [C64], inverse: bool) {
        let n = self.n;
        let total = self.len();
        debug_assert_eq!(data.len(), total);
        let plan = if inverse { &self.inv } else { &self.fwd };
        let mut buf = vec![C64::new(0.0, 0.0); total];
        let mut scratch = vec![C64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for axis in 0..self.d {
            let stride = n.pow(axis as u32);
            if stride == 1 {
                for line in data.chunks_exact_mut(n) {
                    if line.iter().any(|z| z.re != 0.0 || z.im != 0.0) {
                        plan.process_with_scratch(line, &mut scratch);
                    }
                }
                continue;
            }
            let block = stride * n;
            for (src, dst) in data.chunks_exact_mut(block).zip(buf.chunks_exact_mut(block)) {
                for k in 0..n {
                    for lo in 0..stride {
                        dst[lo * n + k] = src[k * stride + lo];
                    }
                }
                for line in dst.chunks_exact_mut(n) {
                    if line.iter().any(|z| z.re != 0.0 || z.im != 0.0) {
                        plan.process_with_scratch(line, &mut scratch);
                    }
                }
                for k in 0..n {
                    for lo in 0..stride {
                        src[k * stride + lo] = dst[lo * n + k];
                    }
                }
            }
        }
    }
}
