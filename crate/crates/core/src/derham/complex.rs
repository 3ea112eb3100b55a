use super::gauge::Flavor;
use crate::error::{Error, Result};
use crate::torus::{differential, wedge_product, Diff, LieForm};

/// Relative flatness threshold, scaled by `1 + ‖α‖²`.
pub const FLAT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Curvature {
    pub form: LieForm,
    /// Norm including the part of `α∧α` outside the band.
    pub norm: f64,
    pub flat: bool,
}

/// `δ₁(α) = dα − α∧α`, or `∂̄α − α∧α` on `(0,1)`-forms.
pub fn curvature(alpha: &LieForm, flavor: Flavor) -> Result<Curvature> {
    if alpha.degree != 1 {
        return Err(Error::Incompatible("curvature needs a 1-form".into()));
    }
    let op = match flavor {
        Flavor::DeRham => Diff::D,
        Flavor::Dolbeault => {
            if alpha.type_project(1, 0)?.norm() > 0.0 {
                return Err(Error::Incompatible("Dolbeault curvature needs a (0,1)-form".into()));
            }
            Diff::DelBar
        }
    };
    let sq = wedge_product(alpha, alpha)?;
    let form = differential(alpha, op).sub(&sq.form);
    let norm = (form.norm().powi(2) + sq.tail.powi(2)).sqrt();
    let a = alpha.norm();
    Ok(Curvature { flat: norm <= FLAT_TOL * (1.0 + a * a), form, norm })
}

/// `Π_{p,q}`.
pub fn type_project(alpha: &LieForm, p: usize, q: usize) -> Result<LieForm> {
    alpha.type_project(p, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{build_group, Family};
    use crate::linalg::{c, commutator, unit};
    use crate::torus::elliptic_curve;
    use std::sync::Arc;

    #[test]
    fn constant_curvature_is_minus_bracket() {
        let geom = elliptic_curve(c(0.0, 1.0), 2).unwrap();
        let spec = Arc::new(build_group(Family::Triangular(2)).unwrap());
        let shift = LieForm::untwisted(geom.clone(), spec.clone(), 1).shift.clone();
        let a = unit(2, 0, 0) * c(1.5, 0.0);
        let b = unit(2, 0, 1) * c(0.0, 2.0);
        let f = LieForm::constant(geom, spec, shift, 1, &[(1, a.clone()), (2, b.clone())]).unwrap();
        let k = curvature(&f, Flavor::DeRham).unwrap();
        let expect = -commutator(&a, &b);
        assert!((k.form.matrix_at(0, k.form.geom.zero_mode()) - expect).norm() < 1e-13);
        assert!(!k.flat);
        assert!(curvature(&f.scale(c(0.0, 0.0)), Flavor::DeRham).unwrap().flat);
    }
}
