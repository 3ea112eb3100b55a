use super::frame::{self, Mask};
use super::shift::FrequencyShift;
use super::TorusGeom;
use crate::error::{Error, Result};
use crate::lie::GroupSpec;
use crate::linalg::{CMat, C64, ZERO};
use std::f64::consts::PI;
use std::sync::Arc;

/// Band-limited matrix-valued differential form of fixed degree.
///
/// Coefficients are stored per frame, per upper triangular entry `(i ≤ j)`,
/// per Fourier mode. Degree-0 forms double as matrix-valued functions,
/// including group-valued ones.
#[derive(Clone, Debug)]
pub struct LieForm {
    pub geom: Arc<TorusGeom>,
    pub spec: Arc<GroupSpec>,
    pub shift: Arc<FrequencyShift>,
    pub degree: usize,
    frames: Vec<Mask>,
    data: Vec<C64>,
}

/// Index of entry `(i,j)`, `i ≤ j`, in row-major upper triangular order.
pub fn entry_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    i * n - i * (i + 1) / 2 + j
}

pub fn entries(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            v.push((i, j));
        }
    }
    v
}

impl LieForm {
    pub fn zeros(
        geom: Arc<TorusGeom>,
        spec: Arc<GroupSpec>,
        shift: Arc<FrequencyShift>,
        degree: usize,
    ) -> Self {
        let frames = frame::frames(geom.g, degree);
        let n = spec.ambient_dim;
        let len = frames.len() * n * (n + 1) / 2 * geom.num_modes();
        LieForm { geom, spec, shift, degree, frames, data: vec![ZERO; len] }
    }

    pub fn untwisted(geom: Arc<TorusGeom>, spec: Arc<GroupSpec>, degree: usize) -> Self {
        let shift = Arc::new(FrequencyShift::trivial(spec.ambient_dim, geom.dim()));
        Self::zeros(geom, spec, shift, degree)
    }

    /// Same geometry, group and twist, other degree.
    pub fn zeros_like(&self, degree: usize) -> Self {
        Self::zeros(self.geom.clone(), self.spec.clone(), self.shift.clone(), degree)
    }

    /// Constant form `Σ matrices ⊗ frames`.
    pub fn constant(
        geom: Arc<TorusGeom>,
        spec: Arc<GroupSpec>,
        shift: Arc<FrequencyShift>,
        degree: usize,
        parts: &[(Mask, CMat)],
    ) -> Result<Self> {
        let mut f = Self::zeros(geom, spec, shift, degree);
        let zero = f.geom.zero_mode();
        for (mask, m) in parts {
            let fi = f.frame_index(*mask).ok_or_else(|| {
                Error::Incompatible(format!("frame {mask:#b} is not of degree {degree}"))
            })?;
            f.add_matrix(fi, zero, m);
        }
        Ok(f)
    }

    pub fn n(&self) -> usize {
        self.spec.ambient_dim
    }

    pub fn frames(&self) -> &[Mask] {
        &self.frames
    }

    pub fn frame_index(&self, mask: Mask) -> Option<usize> {
        self.frames.iter().position(|m| *m == mask)
    }

    pub fn num_entries(&self) -> usize {
        let n = self.n();
        n * (n + 1) / 2
    }

    pub fn num_modes(&self) -> usize {
        self.geom.num_modes()
    }

    fn offset(&self, frame: usize, entry: usize) -> usize {
        (frame * self.num_entries() + entry) * self.num_modes()
    }

    /// Coefficients of one frame and entry over all modes.
    pub fn slice(&self, frame: usize, i: usize, j: usize) -> &[C64] {
        let o = self.offset(frame, entry_index(self.n(), i, j));
        &self.data[o..o + self.num_modes()]
    }

    pub fn slice_mut(&mut self, frame: usize, i: usize, j: usize) -> &mut [C64] {
        let o = self.offset(frame, entry_index(self.n(), i, j));
        let nm = self.num_modes();
        &mut self.data[o..o + nm]
    }

    pub fn get(&self, frame: usize, i: usize, j: usize, mode: usize) -> C64 {
        self.data[self.offset(frame, entry_index(self.n(), i, j)) + mode]
    }

    pub fn set(&mut self, frame: usize, i: usize, j: usize, mode: usize, v: C64) {
        let o = self.offset(frame, entry_index(self.n(), i, j)) + mode;
        self.data[o] = v;
    }

    pub fn add_at(&mut self, frame: usize, i: usize, j: usize, mode: usize, v: C64) {
        let o = self.offset(frame, entry_index(self.n(), i, j)) + mode;
        self.data[o] += v;
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    /// Matrix of coefficients at one frame and mode.
    pub fn matrix_at(&self, frame: usize, mode: usize) -> CMat {
        let n = self.n();
        let mut m = CMat::zeros(n, n);
        for (i, j) in entries(n) {
            m[(i, j)] = self.get(frame, i, j, mode);
        }
        m
    }

    pub fn add_matrix(&mut self, frame: usize, mode: usize, m: &CMat) {
        for (i, j) in entries(self.n()) {
            self.add_at(frame, i, j, mode, m[(i, j)]);
        }
    }

    /// Copies the coefficients onto another cutoff of the same torus,
    /// returning the norm of what does not fit.
    pub fn rebase(&self, geom: Arc<TorusGeom>) -> (LieForm, f64) {
        let mut out = LieForm::zeros(geom.clone(), self.spec.clone(), self.shift.clone(), self.degree);
        let weight = f64::from(1u32 << self.degree);
        let mut tail = 0.0;
        for fi in 0..self.frames.len() {
            for (i, j) in entries(self.n()) {
                for (m, z) in self.slice(fi, i, j).iter().enumerate() {
                    if *z == ZERO {
                        continue;
                    }
                    match geom.mode_index(&self.geom.mode(m)) {
                        Some(k) => out.set(fi, i, j, k, *z),
                        None => tail += z.norm_sqr() * weight,
                    }
                }
            }
        }
        (out, tail.sqrt())
    }

    /// Shifted frequency of a stored coefficient.
    pub fn frequency(&self, i: usize, j: usize, mode: usize) -> Vec<f64> {
        self.shift.frequency(i, j, &self.geom.mode(mode))
    }

    pub fn is_zero_frequency(&self, i: usize, j: usize, mode: usize) -> bool {
        mode == self.geom.zero_mode() && self.shift.is_trivial_entry(i, j)
    }

    /// `L²` norm with `|dz_k|² = |dz̄_k|² = 2` and unit torus volume.
    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    pub fn inner(&self, other: &LieForm) -> C64 {
        let weight = f64::from(1u32 << self.degree);
        self.data.iter().zip(&other.data).map(|(a, b)| a * b.conj()).sum::<C64>() * weight
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn compatible(&self, other: &LieForm) -> Result<()> {
        if !(Arc::ptr_eq(&self.geom, &other.geom) || self.geom.same_as(&other.geom)) {
            return Err(Error::Incompatible("different tori".into()));
        }
        if *self.spec != *other.spec {
            return Err(Error::SpecMismatch(format!("{} vs {}", self.spec.family, other.spec.family)));
        }
        if !(Arc::ptr_eq(&self.shift, &other.shift) || *self.shift == *other.shift) {
            return Err(Error::Incompatible("different twists".into()));
        }
        Ok(())
    }

    fn same_shape(&self, other: &LieForm) -> Result<()> {
        self.compatible(other)?;
        if self.degree != other.degree {
            return Err(Error::Incompatible(format!("degrees {} and {}", self.degree, other.degree)));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &LieForm) -> Result<LieForm> {
        self.same_shape(other)?;
        let mut out = self.clone();
        out.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
        Ok(out)
    }

    pub fn try_sub(&self, other: &LieForm) -> Result<LieForm> {
        self.same_shape(other)?;
        let mut out = self.clone();
        out.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a -= b);
        Ok(out)
    }

    pub fn add(&self, other: &LieForm) -> LieForm {
        self.try_add(other).expect("compatible forms")
    }

    pub fn sub(&self, other: &LieForm) -> LieForm {
        self.try_sub(other).expect("compatible forms")
    }

    pub fn scale(&self, s: C64) -> LieForm {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|a| *a *= s);
        out
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &LieForm) -> f64 {
        self.sub(other).norm()
    }

    /// Restriction to frames of type `(p,q)`.
    pub fn type_project(&self, p: usize, q: usize) -> Result<LieForm> {
        if p + q != self.degree {
            return Err(Error::Incompatible(format!("({p},{q}) on a {}-form", self.degree)));
        }
        let g = self.geom.g;
        let mut out = self.clone();
        let block = self.num_entries() * self.num_modes();
        for (fi, &mask) in self.frames.iter().enumerate() {
            if frame::bidegree(g, mask) != (p, q) {
                out.data[fi * block..(fi + 1) * block].iter_mut().for_each(|z| *z = ZERO);
            }
        }
        Ok(out)
    }

    /// Keeps entries selected by `keep(i, j)`.
    pub fn filter_entries(&self, keep: impl Fn(usize, usize) -> bool) -> LieForm {
        let mut out = self.clone();
        for fi in 0..self.frames.len() {
            for (i, j) in entries(self.n()) {
                if !keep(i, j) {
                    out.slice_mut(fi, i, j).iter_mut().for_each(|z| *z = ZERO);
                }
            }
        }
        out
    }

    /// Diagonal (`𝔰`) part.
    pub fn diagonal_part(&self) -> LieForm {
        self.filter_entries(|i, j| i == j)
    }

    /// Strictly upper triangular (`𝔫`) part.
    pub fn nilpotent_part(&self) -> LieForm {
        self.filter_entries(|i, j| i < j)
    }

    /// Part on entries of filtration level `k`.
    pub fn level_part(&self, k: i32) -> LieForm {
        let spec = self.spec.clone();
        self.filter_entries(|i, j| spec.entry_level(i, j) == k)
    }

    /// Projection onto the zero shifted frequency.
    pub fn harmonic_part(&self) -> LieForm {
        let mut out = self.zeros_like(self.degree);
        let zero = self.geom.zero_mode();
        for fi in 0..self.frames.len() {
            for (i, j) in entries(self.n()) {
                if self.shift.is_trivial_entry(i, j) {
                    out.set(fi, i, j, zero, self.get(fi, i, j, zero));
                }
            }
        }
        out
    }

    pub fn is_harmonic(&self, tol: f64) -> bool {
        self.sub(&self.harmonic_part()).norm() <= tol * (1.0 + self.norm())
    }

    /// Value at lattice coordinates `t`, one matrix per frame.
    pub fn eval(&self, t: &[f64]) -> Vec<CMat> {
        let n = self.n();
        let nm = self.num_modes();
        let phases: Vec<Vec<C64>> = entries(n)
            .iter()
            .map(|&(i, j)| {
                (0..nm)
                    .map(|m| {
                        let nu = self.frequency(i, j, m);
                        let arg: f64 = nu.iter().zip(t).map(|(a, b)| a * b).sum();
                        C64::from_polar(1.0, 2.0 * PI * arg)
                    })
                    .collect()
            })
            .collect();
        (0..self.frames.len())
            .map(|fi| {
                let mut m = CMat::zeros(n, n);
                for (e, &(i, j)) in entries(n).iter().enumerate() {
                    let s = self.slice(fi, i, j);
                    m[(i, j)] = s.iter().zip(&phases[e]).map(|(a, b)| a * b).sum();
                }
                m
            })
            .collect()
    }

    /// Largest `|m|∞` carrying a coefficient above `tol`.
    pub fn band(&self, tol: f64) -> usize {
        let nm = self.num_modes();
        let mut b = 0;
        for (k, z) in self.data.iter().enumerate() {
            if z.norm() > tol {
                let m = self.geom.mode(k % nm);
                b = b.max(m.iter().map(|x| x.unsigned_abs() as usize).max().unwrap_or(0));
            }
        }
        b
    }

    /// Nonzero `(frame, i, j, m, value)` records.
    pub fn records(&self) -> Vec<(Mask, usize, usize, Vec<i64>, C64)> {
        let mut out = Vec::new();
        for (fi, &mask) in self.frames.iter().enumerate() {
            for (i, j) in entries(self.n()) {
                for (m, z) in self.slice(fi, i, j).iter().enumerate() {
                    if *z != ZERO {
                        out.push((mask, i, j, self.geom.mode(m), *z));
                    }
                }
            }
        }
        out
    }

    /// Distance of every coefficient matrix from `𝔤`.
    pub fn algebra_defect(&self) -> f64 {
        let mut s = 0.0;
        for fi in 0..self.frames.len() {
            for m in 0..self.num_modes() {
                let mat = self.matrix_at(fi, m);
                if mat.iter().any(|z| *z != ZERO) {
                    s += self.spec.algebra_defect(&mat).powi(2);
                }
            }
        }
        s.sqrt()
    }
}
