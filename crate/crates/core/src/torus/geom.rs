use super::fft::Grid;
use crate::error::{Error, Result};
use crate::linalg::{c, C64};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

/// Largest supported complex dimension.
pub const MAX_G: usize = 3;

/// Flat complex torus `ℂ^g/Λ` with the standard Kähler metric.
///
/// Points are addressed by lattice coordinates `t ∈ [0,1)^{2g}` with
/// `z = P t`, where `P` is the `g×2g` period matrix. Fourier modes are
/// `e^{2πi⟨ν,t⟩}`.
#[derive(Debug)]
pub struct TorusGeom {
    pub g: usize,
    /// `periods[k][l]` is the `k`-th coordinate of the `l`-th generator.
    pub periods: Vec<Vec<C64>>,
    pub cutoff: usize,
    /// Sampling resolution per real dimension for grid evaluations.
    pub grid: usize,
    /// Real `2g×2g` matrix: rows `Re z_k` then `Im z_k`.
    pub real: Vec<Vec<f64>>,
    pub real_inv: Vec<Vec<f64>>,
    /// `dt_l = Σ_k A[l][k] dz_k + conj(A[l][k]) dz̄_k`.
    pub a_coef: Vec<Vec<C64>>,
    product_grid: OnceLock<Arc<Grid>>,
    grid_indices: OnceLock<Arc<Vec<usize>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeometryFile {
    pub format_version: u32,
    pub g: usize,
    pub periods: Vec<Vec<[f64; 2]>>,
    pub cutoff: usize,
    #[serde(default)]
    pub grid: Option<usize>,
}

/// Builds the geometry; the grid defaults to `3·cutoff + 1`.
pub fn make_torus(g: usize, periods: Vec<Vec<C64>>, cutoff: usize) -> Result<Arc<TorusGeom>> {
    make_torus_with_grid(g, periods, cutoff, 3 * cutoff + 1)
}

pub fn make_torus_with_grid(
    g: usize,
    periods: Vec<Vec<C64>>,
    cutoff: usize,
    grid: usize,
) -> Result<Arc<TorusGeom>> {
    if g == 0 || g > MAX_G {
        return Err(Error::InvalidGeometry(format!("complex dimension {g} not in 1..={MAX_G}")));
    }
    if cutoff == 0 {
        return Err(Error::InvalidGeometry("cutoff must be at least 1".into()));
    }
    if grid < 3 * cutoff {
        return Err(Error::InvalidGeometry(format!("grid {grid} below 3·cutoff = {}", 3 * cutoff)));
    }
    if periods.len() != g || periods.iter().any(|r| r.len() != 2 * g) {
        return Err(Error::InvalidGeometry(format!("period matrix must be {g}×{}", 2 * g)));
    }
    let d = 2 * g;
    let mut real = DMatrix::<f64>::zeros(d, d);
    for k in 0..g {
        for l in 0..d {
            real[(k, l)] = periods[k][l].re;
            real[(g + k, l)] = periods[k][l].im;
        }
    }
    let det = real.determinant();
    let scale: f64 = real.iter().map(|x| x.abs()).fold(0.0, f64::max).powi(d as i32);
    if det.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateLattice("generators are not ℝ-linearly independent".into()));
    }
    if det < 0.0 {
        return Err(Error::DegenerateLattice(
            "generators are negatively oriented (for g = 1 this means Im τ ≤ 0)".into(),
        ));
    }
    let inv = real.clone().try_inverse().ok_or_else(|| Error::DegenerateLattice("singular".into()))?;
    let to_rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
        (0..d).map(|i| (0..d).map(|j| m[(i, j)]).collect()).collect()
    };
    let real_inv = to_rows(&inv);
    let a_coef = (0..d)
        .map(|l| (0..g).map(|k| c(real_inv[l][k], -real_inv[l][g + k]) * 0.5).collect())
        .collect();
    Ok(Arc::new(TorusGeom {
        g,
        periods,
        cutoff,
        grid,
        real: to_rows(&real),
        real_inv,
        a_coef,
        product_grid: OnceLock::new(),
        grid_indices: OnceLock::new(),
    }))
}

/// `ℂ/(ℤ + τℤ)`.
pub fn elliptic_curve(tau: C64, cutoff: usize) -> Result<Arc<TorusGeom>> {
    make_torus(1, vec![vec![c(1.0, 0.0), tau]], cutoff)
}

/// Product of `g` copies of the square curve `ℂ/(ℤ + iℤ)`.
pub fn square_product(g: usize, cutoff: usize) -> Result<Arc<TorusGeom>> {
    let mut p = vec![vec![c(0.0, 0.0); 2 * g]; g];
    for k in 0..g {
        p[k][k] = c(1.0, 0.0);
        p[k][g + k] = c(0.0, 1.0);
    }
    make_torus(g, p, cutoff)
}

impl TorusGeom {
    /// Real dimension `2g`.
    pub fn dim(&self) -> usize {
        2 * self.g
    }

    pub fn side(&self) -> usize {
        2 * self.cutoff + 1
    }

    pub fn num_modes(&self) -> usize {
        self.side().pow(self.dim() as u32)
    }

    pub fn mode_index(&self, m: &[i64]) -> Option<usize> {
        let k = self.cutoff as i64;
        let mut idx = 0usize;
        let mut stride = 1usize;
        for &ml in m {
            if ml.abs() > k {
                return None;
            }
            idx += (ml + k) as usize * stride;
            stride *= self.side();
        }
        Some(idx)
    }

    pub fn mode(&self, mut idx: usize) -> Vec<i64> {
        let side = self.side();
        let k = self.cutoff as i64;
        (0..self.dim())
            .map(|_| {
                let r = (idx % side) as i64 - k;
                idx /= side;
                r
            })
            .collect()
    }

    pub fn zero_mode(&self) -> usize {
        self.mode_index(&vec![0; self.dim()]).expect("origin is in band")
    }

    /// Symbols of `∂_{z_k}` and `∂_{z̄_k}` on `e^{2πi⟨ν,t⟩}`.
    pub fn symbols(&self, nu: &[f64]) -> (Vec<C64>, Vec<C64>) {
        let g = self.g;
        let mut sigma = vec![c(0.0, 0.0); g];
        let mut tau = vec![c(0.0, 0.0); g];
        for k in 0..g {
            let mut s = c(0.0, 0.0);
            for (l, &v) in nu.iter().enumerate() {
                s += self.a_coef[l][k] * v;
            }
            sigma[k] = s * c(0.0, 2.0 * PI);
            tau[k] = s.conj() * c(0.0, 2.0 * PI);
        }
        (sigma, tau)
    }

    /// Eigenvalue of the Laplacian `Δ = dd* + d*d` on `e^{2πi⟨ν,t⟩}`.
    pub fn laplace_symbol(&self, nu: &[f64]) -> f64 {
        let d = self.dim();
        let mut s = 0.0;
        for a in 0..d {
            let mut v = 0.0;
            for (l, &x) in nu.iter().enumerate() {
                v += self.real_inv[l][a] * x;
            }
            s += v * v;
        }
        4.0 * PI * PI * s
    }

    /// `P n` for integer lattice coordinates `n`.
    pub fn lattice_vector(&self, n: &[f64]) -> Vec<C64> {
        (0..self.g)
            .map(|k| n.iter().enumerate().map(|(l, &x)| self.periods[k][l] * x).sum())
            .collect()
    }

    /// Lattice coordinates of a point of `ℂ^g`.
    pub fn to_lattice_coords(&self, z: &[C64]) -> Vec<f64> {
        let g = self.g;
        let d = self.dim();
        (0..d)
            .map(|l| {
                (0..g).map(|k| self.real_inv[l][k] * z[k].re + self.real_inv[l][g + k] * z[k].im).sum()
            })
            .collect()
    }

    /// `Π_{0,1}(2πi dt_l)` as coefficient vectors over `dz̄_k`; these span the
    /// lattice whose quotient is the Picard torus.
    pub fn picard_generators(&self) -> Vec<Vec<C64>> {
        (0..self.dim())
            .map(|l| (0..self.g).map(|k| self.a_coef[l][k].conj() * c(0.0, 2.0 * PI)).collect())
            .collect()
    }

    /// `(2πi dt_l)` split into `dz` and `dz̄` coefficients.
    pub fn dt_coefficients(&self, l: usize) -> (Vec<C64>, Vec<C64>) {
        let a: Vec<C64> = (0..self.g).map(|k| self.a_coef[l][k]).collect();
        let b: Vec<C64> = a.iter().map(|z| z.conj()).collect();
        (a, b)
    }

    /// Padded grid on which quadratic products are exact.
    pub fn product_grid(&self) -> Arc<Grid> {
        self.product_grid
            .get_or_init(|| Arc::new(Grid::new(4 * self.cutoff + 1, self.dim())))
            .clone()
    }

    /// Same torus at another cutoff.
    pub fn with_cutoff(&self, cutoff: usize) -> Result<Arc<TorusGeom>> {
        make_torus(self.g, self.periods.clone(), cutoff)
    }

    /// Product grid index of every band mode.
    pub fn product_grid_indices(&self) -> Arc<Vec<usize>> {
        self.grid_indices
            .get_or_init(|| {
                let grid = self.product_grid();
                Arc::new((0..self.num_modes()).map(|m| grid.index_of(&self.mode(m))).collect())
            })
            .clone()
    }

    pub fn same_as(&self, other: &TorusGeom) -> bool {
        self.g == other.g && self.cutoff == other.cutoff && self.periods == other.periods
    }

    pub fn to_file(&self) -> GeometryFile {
        GeometryFile {
            format_version: 1,
            g: self.g,
            periods: self.periods.iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect(),
            cutoff: self.cutoff,
            grid: Some(self.grid),
        }
    }

    pub fn from_file(f: &GeometryFile) -> Result<Arc<TorusGeom>> {
        let periods = f.periods.iter().map(|r| r.iter().map(|p| c(p[0], p[1])).collect()).collect();
        make_torus_with_grid(f.g, periods, f.cutoff, f.grid.unwrap_or(3 * f.cutoff + 1))
    }
}
