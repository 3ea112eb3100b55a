//! Grid evaluation of gauge maps and their logarithmic derivative.

use super::gauge::{GaugeFactor, GaugeMap};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64, ZERO};
use crate::torus::fft::Grid;
use crate::torus::form::entries;
use crate::torus::{LieForm, TorusGeom};
use nalgebra::DVector;
use std::f64::consts::PI;
use std::sync::Arc;

/// Matrix samples of a twisted degree-0 form or map on a product grid.
struct Sampler {
    geom: Arc<TorusGeom>,
    grid: Arc<Grid>,
    /// `e^{2πi⟨s_ij, t⟩}` per entry, `None` on untwisted entries.
    phase: Vec<Option<Vec<C64>>>,
    n: usize,
}

impl Sampler {
    fn new(geom: Arc<TorusGeom>, map: &GaugeMap) -> Self {
        let grid = geom.product_grid();
        let n = map.spec.ambient_dim;
        let phase = entries(n)
            .into_iter()
            .map(|(i, j)| {
                if map.shift.is_trivial_entry(i, j) {
                    return None;
                }
                let s = map.shift.get(i, j);
                Some(
                    (0..grid.len())
                        .map(|idx| {
                            let t = grid.point(idx);
                            let arg: f64 = s.iter().zip(&t).map(|(a, b)| a * b).sum();
                            C64::from_polar(1.0, 2.0 * PI * arg)
                        })
                        .collect(),
                )
            })
            .collect();
        Sampler { geom, grid, phase, n }
    }

    fn points(&self) -> usize {
        self.grid.len()
    }

    /// Samples of frame `fi` of `f`, which must live on `self.geom`.
    fn sample(&self, f: &LieForm, fi: usize) -> Vec<CMat> {
        let idx = self.geom.product_grid_indices();
        let mut out = vec![CMat::zeros(self.n, self.n); self.points()];
        for (e, (i, j)) in entries(self.n).into_iter().enumerate() {
            let s = f.slice(fi, i, j);
            if s.iter().all(|z| *z == ZERO) {
                continue;
            }
            let mut buf = vec![ZERO; self.points()];
            for (m, z) in s.iter().enumerate() {
                buf[idx[m]] = *z;
            }
            self.grid.synthesize(&mut buf);
            if let Some(p) = &self.phase[e] {
                buf.iter_mut().zip(p).for_each(|(b, q)| *b *= q);
            }
            for (o, b) in out.iter_mut().zip(&buf) {
                o[(i, j)] = *b;
            }
        }
        out
    }

    /// Fourier coefficients of entry `e` of the samples, indexed by grid slot.
    fn analyze(&self, vals: &[CMat], e: usize, i: usize, j: usize) -> Vec<C64> {
        let mut buf: Vec<C64> = vals.iter().map(|v| v[(i, j)]).collect();
        if let Some(p) = &self.phase[e] {
            buf.iter_mut().zip(p).for_each(|(b, q)| *b *= q.conj());
        }
        self.grid.analyze(&mut buf);
        buf
    }
}

fn factor_samples(s: &Sampler, f: &GaugeFactor) -> Result<Vec<CMat>> {
    Ok(match f {
        GaugeFactor::Constant(m) => vec![m.clone(); s.points()],
        GaugeFactor::Character(mv) => (0..s.points())
            .map(|idx| {
                let t = s.grid.point(idx);
                let d: Vec<C64> = mv
                    .iter()
                    .map(|mi| {
                        let arg: f64 = mi.iter().zip(&t).map(|(a, b)| *a as f64 * b).sum();
                        C64::from_polar(1.0, 2.0 * PI * arg)
                    })
                    .collect();
                CMat::from_diagonal(&DVector::from_vec(d))
            })
            .collect(),
        GaugeFactor::Exp(x) => {
            let (xw, tail) = x.rebase(s.geom.clone());
            if tail > 0.0 {
                return Err(Error::BandOverflow { tail, norm: x.norm() });
            }
            let diagonal = x.nilpotent_part().norm() == 0.0;
            s.sample(&xw, 0)
                .into_iter()
                .map(|v| {
                    if diagonal {
                        CMat::from_diagonal(&v.diagonal().map(|z| z.exp()))
                    } else {
                        linalg::exp_nilpotent(&v)
                    }
                })
                .collect()
        }
    })
}

/// `(dg) g⁻¹` from grid samples of `g`, differentiated spectrally on a band
/// of `wide` modes and truncated to the cutoff of `g`.
pub fn log_derivative(g: &GaugeMap, wide: usize) -> Result<LieForm> {
    let geom = g.geom.with_cutoff(wide.max(g.geom.cutoff))?;
    let s = Sampler::new(geom.clone(), g);
    let n = s.n;
    let mut vals = vec![CMat::identity(n, n); s.points()];
    for f in &g.factors {
        let fv = factor_samples(&s, f)?;
        vals.iter_mut().zip(&fv).for_each(|(v, w)| *v = &*v * w);
    }
    let inv: Vec<CMat> = vals
        .iter()
        .map(|v| linalg::inverse_upper(v).ok_or(Error::Singular))
        .collect::<Result<_>>()?;

    let mut out = LieForm::zeros(g.geom.clone(), g.spec.clone(), g.shift.clone(), 1);
    let frames = out.frames().to_vec();
    let gg = geom.g;
    let kw = geom.cutoff as i64;
    let mut dvals = vec![vec![CMat::zeros(n, n); s.points()]; frames.len()];
    let (mut total, mut tail) = (0.0, 0.0);
    for (e, (i, j)) in entries(n).into_iter().enumerate() {
        let coef = s.analyze(&vals, e, i, j);
        let shift = g.shift.get(i, j);
        let mut bufs = vec![vec![ZERO; s.points()]; frames.len()];
        for (idx, z) in coef.iter().enumerate() {
            if *z == ZERO {
                continue;
            }
            let m = s.grid.freq_of(idx);
            total += z.norm_sqr();
            if m.iter().any(|x| x.abs() > kw) {
                tail += z.norm_sqr();
            }
            let nu: Vec<f64> = m.iter().zip(shift).map(|(a, b)| *a as f64 + b).collect();
            let (sigma, tau) = geom.symbols(&nu);
            for (fi, &mask) in frames.iter().enumerate() {
                let k = mask.trailing_zeros() as usize;
                let sym = if k < gg { sigma[k] } else { tau[k - gg] };
                bufs[fi][idx] = sym * z;
            }
        }
        for (fi, mut buf) in bufs.into_iter().enumerate() {
            s.grid.synthesize(&mut buf);
            if let Some(p) = &s.phase[e] {
                buf.iter_mut().zip(p).for_each(|(b, q)| *b *= q);
            }
            for (d, b) in dvals[fi].iter_mut().zip(&buf) {
                d[(i, j)] = *b;
            }
        }
    }
    if tail.sqrt() > 1e-10 * total.sqrt() {
        return Err(Error::BandOverflow { tail: tail.sqrt(), norm: total.sqrt() });
    }
    for (fi, dv) in dvals.iter().enumerate() {
        let prod: Vec<CMat> = dv.iter().zip(&inv).map(|(a, b)| a * b).collect();
        for (e, (i, j)) in entries(n).into_iter().enumerate() {
            let coef = s.analyze(&prod, e, i, j);
            for (idx, z) in coef.iter().enumerate() {
                if let Some(k) = g.geom.mode_index(&s.grid.freq_of(idx)) {
                    out.set(fi, i, j, k, *z);
                }
            }
        }
    }
    Ok(out)
}
