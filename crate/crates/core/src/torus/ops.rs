use super::form::{entries, LieForm};
use super::frame::{self, insert_sign};
use super::shift::FrequencyShift;
use super::TorusGeom;
use crate::error::{Error, Result};
use crate::lie::GroupSpec;
use crate::linalg::{C64, ZERO};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Diff {
    D,
    Del,
    DelBar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Laplacian {
    Full,
    Del,
    DelBar,
}

impl Diff {
    fn parts(self) -> (bool, bool) {
        match self {
            Diff::D => (true, true),
            Diff::Del => (true, false),
            Diff::DelBar => (false, true),
        }
    }
}

/// Applies `d`, `∂` or `∂̄` mode by mode.
pub fn differential(alpha: &LieForm, which: Diff) -> LieForm {
    let (holo, anti) = which.parts();
    let g = alpha.geom.g;
    let mut out = alpha.zeros_like(alpha.degree + 1);
    if out.frames().is_empty() {
        return out;
    }
    for (fi, &mask) in alpha.frames().iter().enumerate() {
        for (i, j) in entries(alpha.n()) {
            for (m, &coef) in alpha.slice(fi, i, j).iter().enumerate() {
                if coef == ZERO {
                    continue;
                }
                let (sigma, tau) = alpha.geom.symbols(&alpha.frequency(i, j, m));
                for k in 0..g {
                    if holo && mask & (1 << k) == 0 {
                        let fo = out.frame_index(mask | (1 << k)).expect("frame");
                        out.add_at(fo, i, j, m, sigma[k] * coef * insert_sign(k, mask));
                    }
                    let kb = g + k;
                    if anti && mask & (1 << kb) == 0 {
                        let fo = out.frame_index(mask | (1 << kb)).expect("frame");
                        out.add_at(fo, i, j, m, tau[k] * coef * insert_sign(kb, mask));
                    }
                }
            }
        }
    }
    out
}

/// `L²` adjoints `d*`, `∂*`, `∂̄*` under the flat Kähler metric.
pub fn adjoint(alpha: &LieForm, which: Diff) -> LieForm {
    let (holo, anti) = which.parts();
    let g = alpha.geom.g;
    if alpha.degree == 0 {
        return alpha.zeros_like(0).scale(ZERO);
    }
    let mut out = alpha.zeros_like(alpha.degree - 1);
    for (fi, &mask) in alpha.frames().iter().enumerate() {
        for (i, j) in entries(alpha.n()) {
            for (m, &coef) in alpha.slice(fi, i, j).iter().enumerate() {
                if coef == ZERO {
                    continue;
                }
                let (sigma, tau) = alpha.geom.symbols(&alpha.frequency(i, j, m));
                for k in 0..g {
                    if holo && mask & (1 << k) != 0 {
                        let rest = mask & !(1 << k);
                        let fo = out.frame_index(rest).expect("frame");
                        out.add_at(fo, i, j, m, tau[k] * coef * (-2.0 * insert_sign(k, rest)));
                    }
                    let kb = g + k;
                    if anti && mask & (1 << kb) != 0 {
                        let rest = mask & !(1 << kb);
                        let fo = out.frame_index(rest).expect("frame");
                        out.add_at(fo, i, j, m, sigma[k] * coef * (-2.0 * insert_sign(kb, rest)));
                    }
                }
            }
        }
    }
    out
}

/// Laplacians computed by composing the first order operators.
pub fn laplacian(alpha: &LieForm, which: Laplacian) -> LieForm {
    let op = match which {
        Laplacian::Full => Diff::D,
        Laplacian::Del => Diff::Del,
        Laplacian::DelBar => Diff::DelBar,
    };
    let a = differential(&adjoint(alpha, op), op);
    let b = adjoint(&differential(alpha, op), op);
    if alpha.degree == 0 {
        return b;
    }
    a.add(&b)
}

/// Multiplies each coefficient by `f(ν)` of its shifted frequency.
pub fn map_modes(alpha: &LieForm, f: impl Fn(&[f64]) -> C64) -> LieForm {
    let mut out = alpha.clone();
    for fi in 0..alpha.frames().len() {
        for (i, j) in entries(alpha.n()) {
            for m in 0..alpha.num_modes() {
                let c = alpha.get(fi, i, j, m);
                if c != ZERO {
                    out.set(fi, i, j, m, c * f(&alpha.frequency(i, j, m)));
                }
            }
        }
    }
    out
}

/// Green operator: inverse Laplacian off the harmonic modes, zero on them.
pub fn green(alpha: &LieForm) -> LieForm {
    let geom = alpha.geom.clone();
    map_modes(alpha, |nu| {
        let l = geom.laplace_symbol(nu);
        if nu.iter().all(|x| *x == 0.0) {
            ZERO
        } else {
            C64::from(1.0 / l)
        }
    })
}

/// `α = harmonic + d(exact_potential) + d*(coexact_potential)`.
#[derive(Clone, Debug)]
pub struct HodgeSplit {
    pub harmonic: LieForm,
    pub exact_potential: LieForm,
    pub coexact_potential: LieForm,
    pub residual: f64,
}

impl HodgeSplit {
    pub fn exact_part(&self) -> LieForm {
        if self.harmonic.degree == 0 {
            return self.harmonic.zeros_like(0);
        }
        differential(&self.exact_potential, Diff::D)
    }

    pub fn coexact_part(&self) -> LieForm {
        adjoint(&self.coexact_potential, Diff::D)
    }
}

pub fn hodge_decompose(alpha: &LieForm) -> HodgeSplit {
    let harmonic = alpha.harmonic_part();
    let g_alpha = green(alpha);
    let exact_potential = adjoint(&g_alpha, Diff::D);
    let coexact_potential = differential(&g_alpha, Diff::D);
    let mut split = HodgeSplit {
        harmonic,
        exact_potential,
        coexact_potential,
        residual: 0.0,
    };
    let rebuilt = split.harmonic.add(&split.exact_part());
    let rebuilt = if alpha.degree < 2 * alpha.geom.g {
        rebuilt.add(&split.coexact_part())
    } else {
        rebuilt
    };
    split.residual = alpha.distance(&rebuilt);
    split
}

/// `sqrt(Σ λ(ν)|c|²)`: the size of a first derivative of `α`.
pub fn gradient_scale(alpha: &LieForm) -> f64 {
    let geom = alpha.geom.clone();
    map_modes(alpha, |nu| C64::from(geom.laplace_symbol(nu).sqrt())).norm()
}

pub const DDBAR_HARMONIC_TOL: f64 = 1e-11;

/// Solves `∂∂̄ψ = φ` for a `d`-closed `(p,q)`-form with `p, q ≥ 1`.
pub fn solve_ddbar(phi: &LieForm) -> Result<LieForm> {
    solve_ddbar_tol(phi, DDBAR_HARMONIC_TOL)
}

pub fn solve_ddbar_tol(phi: &LieForm, harmonic_tol: f64) -> Result<LieForm> {
    let g = phi.geom.g;
    if phi.degree < 2 {
        return Err(Error::Precondition("∂∂̄ needs a form of degree at least 2".into()));
    }
    for (fi, &mask) in phi.frames().iter().enumerate() {
        let (p, q) = frame::bidegree(g, mask);
        if p == 0 || q == 0 {
            let part: f64 = entries(phi.n())
                .iter()
                .flat_map(|&(i, j)| phi.slice(fi, i, j).iter())
                .map(|z| z.norm_sqr())
                .sum();
            if part > 0.0 {
                return Err(Error::Precondition(format!(
                    "component {} is not of type (p,q) with p,q ≥ 1",
                    frame::frame_name(g, mask)
                )));
            }
        }
    }
    let norm = phi.norm();
    let closed = differential(phi, Diff::D).norm();
    if closed > 1e-9 * (gradient_scale(phi) + norm) {
        return Err(Error::Precondition(format!("form is not closed: ‖dφ‖ = {closed:e}")));
    }
    let harm = phi.harmonic_part().norm();
    if harm > harmonic_tol * (1.0 + norm) {
        return Err(Error::HarmonicObstruction { norm: harm, level: None });
    }
    let geom = phi.geom.clone();
    let step = adjoint(&adjoint(phi, Diff::Del), Diff::DelBar);
    Ok(map_modes(&step, |nu| {
        if nu.iter().all(|x| *x == 0.0) {
            ZERO
        } else {
            let mu = 0.5 * geom.laplace_symbol(nu);
            C64::from(1.0 / (mu * mu))
        }
    }))
}

/// Constant forms `X ⊗ e_I` for basis elements `X` of `𝔤` on untwisted
/// entries and frames `e_I` of type `(p,q)`.
pub fn twisted_harmonic_basis(
    geom: &Arc<TorusGeom>,
    spec: &Arc<GroupSpec>,
    shift: &Arc<FrequencyShift>,
    bidegree: (usize, usize),
) -> Vec<LieForm> {
    let (p, q) = bidegree;
    let masks: Vec<_> = frame::frames(geom.g, p + q)
        .into_iter()
        .filter(|m| frame::bidegree(geom.g, *m) == (p, q))
        .collect();
    let mut out = Vec::new();
    for (x, &(i, j)) in spec.basis().iter().zip(spec.lead_entries()) {
        if !shift.is_trivial_entry(i, j) {
            continue;
        }
        for &mask in &masks {
            let f = LieForm::constant(
                geom.clone(),
                spec.clone(),
                shift.clone(),
                p + q,
                &[(mask, x.clone())],
            )
            .expect("frame of matching degree");
            out.push(f);
        }
    }
    out
}
