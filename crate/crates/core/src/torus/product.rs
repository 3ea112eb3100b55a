//! Pointwise matrix products of forms on the padded grid.
//!
//! The grid has `4K+1` points per axis, so the product of two band-`K`
//! trigonometric polynomials is computed without aliasing. The result is
//! then truncated to the band; the discarded energy is reported.

use super::form::{entries, entry_index, LieForm};
use super::frame::wedge_sign;
use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};
use std::collections::HashMap;

/// Relative tail tolerated by strict products.
pub const BAND_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    /// Galerkin truncation to the band.
    Project,
    /// Error if the truncated tail exceeds [`BAND_TOL`].
    Strict,
}

/// Product together with the norm of the discarded tail.
#[derive(Clone, Debug)]
pub struct Product {
    pub form: LieForm,
    pub tail: f64,
    pub full_norm: f64,
}

/// Grid samples of every nonzero (frame, entry) slice.
pub(crate) fn synthesize_all(a: &LieForm) -> HashMap<(usize, usize), Vec<C64>> {
    let grid = a.geom.product_grid();
    let mut out = HashMap::new();
    let modes = a.geom.product_grid_indices();
    for fi in 0..a.frames().len() {
        for (i, j) in entries(a.n()) {
            let s = a.slice(fi, i, j);
            if s.iter().all(|z| *z == ZERO) {
                continue;
            }
            let mut buf = vec![ZERO; grid.len()];
            for (m, z) in s.iter().enumerate() {
                buf[modes[m]] = *z;
            }
            grid.synthesize(&mut buf);
            out.insert((fi, entry_index(a.n(), i, j)), buf);
        }
    }
    out
}

/// Accumulated grid values keyed by (frame, entry, integer offset).
pub(crate) type Accumulator = HashMap<(usize, usize, Vec<i64>), Vec<C64>>;

/// Analyzes accumulated grid values into `out`, returning the tail energy.
pub(crate) fn collect(acc: Accumulator, out: &mut LieForm) -> (f64, f64) {
    let grid = out.geom.product_grid();
    let weight = f64::from(1u32 << out.degree);
    let n = out.n();
    let ents = entries(n);
    let mut tail = 0.0;
    let mut total = 0.0;
    let mut keys: Vec<_> = acc.into_iter().collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0));
    let (side, k) = (out.geom.side(), out.geom.cutoff as i64);
    let (gn, d) = (grid.n, grid.d);
    for ((fo, e, shift), mut buf) in keys {
        grid.analyze(&mut buf);
        let (i, j) = ents[e];
        for (idx, z) in buf.iter().enumerate() {
            if *z == ZERO {
                continue;
            }
            total += z.norm_sqr() * weight;
            let (mut rem, mut mi, mut stride, mut inside) = (idx, 0usize, 1usize, true);
            for s in shift.iter().take(d) {
                let r = rem % gn;
                rem /= gn;
                let f = if r <= gn / 2 { r as i64 } else { r as i64 - gn as i64 } + s;
                if f.abs() > k {
                    inside = false;
                    break;
                }
                mi += (f + k) as usize * stride;
                stride *= side;
            }
            if inside {
                out.add_at(fo, i, j, mi, *z);
            } else {
                tail += z.norm_sqr() * weight;
            }
        }
    }
    (tail.sqrt(), total.sqrt())
}

/// `α ∧ β` with matrix multiplication of coefficients.
pub fn wedge_product(alpha: &LieForm, beta: &LieForm) -> Result<Product> {
    alpha.compatible(beta)?;
    let n = alpha.n();
    let mut out = alpha.zeros_like(alpha.degree + beta.degree);
    if out.frames().is_empty() {
        return Ok(Product { form: out, tail: 0.0, full_norm: 0.0 });
    }
    let ga = synthesize_all(alpha);
    let gb = synthesize_all(beta);
    let grid = alpha.geom.product_grid();
    let mut acc: Accumulator = HashMap::new();
    for (fa, &ma) in alpha.frames().iter().enumerate() {
        for (fb, &mb) in beta.frames().iter().enumerate() {
            let Some(sign) = wedge_sign(ma, mb) else { continue };
            let fo = out.frame_index(ma | mb).expect("frame");
            for i in 0..n {
                for j in i..n {
                    for k in i..=j {
                        let (Some(x), Some(y)) = (
                            ga.get(&(fa, entry_index(n, i, k))),
                            gb.get(&(fb, entry_index(n, k, j))),
                        ) else {
                            continue;
                        };
                        let off = alpha.shift.product_offset(i, k, j);
                        let buf = acc
                            .entry((fo, entry_index(n, i, j), off))
                            .or_insert_with(|| vec![ZERO; grid.len()]);
                        for ((b, u), v) in buf.iter_mut().zip(x).zip(y) {
                            *b += u * v * sign;
                        }
                    }
                }
            }
        }
    }
    let (tail, full_norm) = collect(acc, &mut out);
    Ok(Product { form: out, tail, full_norm })
}

impl Product {
    pub fn check(self, mode: Truncation) -> Result<LieForm> {
        if mode == Truncation::Strict && self.tail > 1e-14 && self.tail > BAND_TOL * self.full_norm {
            return Err(Error::BandOverflow { tail: self.tail, norm: self.full_norm });
        }
        Ok(self.form)
    }
}

/// Strict `α ∧ β`.
pub fn wedge(alpha: &LieForm, beta: &LieForm) -> Result<LieForm> {
    wedge_product(alpha, beta)?.check(Truncation::Strict)
}

/// Graded bracket `[α,β] = α∧β − (−1)^{|α||β|} β∧α`.
pub fn bracket_with(alpha: &LieForm, beta: &LieForm, mode: Truncation) -> Result<LieForm> {
    let ab = wedge_product(alpha, beta)?;
    let ba = wedge_product(beta, alpha)?;
    let sign = if (alpha.degree * beta.degree) % 2 == 0 { 1.0 } else { -1.0 };
    let tail = (ab.tail.powi(2) + ba.tail.powi(2)).sqrt();
    let full = (ab.full_norm.powi(2) + ba.full_norm.powi(2)).sqrt();
    let form = ab.form.sub(&ba.form.scale(C64::from(sign)));
    Product { form, tail, full_norm: full }.check(mode)
}

/// Galerkin bracket: exact product truncated to the band.
pub fn bracket(alpha: &LieForm, beta: &LieForm) -> Result<LieForm> {
    bracket_with(alpha, beta, Truncation::Project)
}

/// Bracket that refuses to truncate.
pub fn bracket_strict(alpha: &LieForm, beta: &LieForm) -> Result<LieForm> {
    bracket_with(alpha, beta, Truncation::Strict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{build_group, Family};
    use crate::linalg::{c, unit, CMat};
    use crate::torus::{elliptic_curve, LieForm};
    use std::sync::Arc;

    #[test]
    fn constant_bracket_expansion() {
        let geom = elliptic_curve(c(0.0, 1.0), 2).unwrap();
        let spec = Arc::new(build_group(Family::Triangular(2)).unwrap());
        let shift = LieForm::untwisted(geom.clone(), spec.clone(), 1).shift.clone();
        let a = unit(2, 0, 0) * c(2.0, 0.0) + unit(2, 1, 1) * c(0.5, 0.0);
        let b = unit(2, 0, 1) * c(1.0, 1.0);
        let f = LieForm::constant(geom, spec, shift, 1, &[(1, a.clone()), (2, b.clone())]).unwrap();
        let br = bracket_strict(&f, &f).unwrap();
        let expect: CMat = (&a * &b - &b * &a) * c(2.0, 0.0);
        assert!((br.matrix_at(0, br.geom.zero_mode()) - expect).norm() < 1e-13);
    }

    #[test]
    fn mode_products_are_exact() {
        let geom = elliptic_curve(c(0.0, 1.0), 3).unwrap();
        let spec = Arc::new(build_group(Family::Triangular(2)).unwrap());
        let mut f = LieForm::untwisted(geom.clone(), spec, 0);
        let m1 = geom.mode_index(&[1, 2]).unwrap();
        let m2 = geom.mode_index(&[-3, 1]).unwrap();
        f.set(0, 0, 0, m1, c(1.0, 0.0));
        f.set(0, 0, 1, m2, c(0.0, 1.0));
        let p = wedge_product(&f, &f).unwrap();
        assert!((p.tail - 1.0).abs() < 1e-12);
        let m12 = geom.mode_index(&[-2, 3]).unwrap();
        assert!((p.form.get(0, 0, 1, m12) - c(0.0, 1.0)).norm() < 1e-13);
        assert!(matches!(wedge(&f, &f), Err(Error::BandOverflow { .. })));
    }
}
