use crate::error::{Error, Result};
use crate::lie::GroupSpec;
use crate::linalg::{c, CMat, C64, ZERO};
use crate::torus::product::BAND_TOL;
use crate::torus::{FrequencyShift, LieForm, TorusGeom, Truncation};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// A class `ζ ∈ H^{0,1}(M, S)` given by its constant representative `χ`.
///
/// `γ = −χ̄ + χ` is the `𝔨`-valued flat connection with holonomy
/// `z_λ = exp(γ(λ))`. Sections of the twisted adjoint bundle are stored as
/// equivariant functions with `α(x + λ) = Ad z_λ⁻¹ α(x)`; the transfer
/// `r_γ(α) = Ad u(α) + γ` with `u = exp(Γ)`, `dΓ = γ`, turns them into
/// global forms.
#[derive(Clone, Debug)]
pub struct TwistContext {
    pub geom: Arc<TorusGeom>,
    pub spec: Arc<GroupSpec>,
    /// `chi[k][i]`: coefficient of `dz̄_k` on diagonal entry `i`.
    pub chi: Vec<Vec<C64>>,
    pub gamma: LieForm,
    /// `theta[l][i]`: holonomy angle of entry `i` along generator `l`.
    pub theta: Vec<Vec<f64>>,
    pub holonomy: Vec<CMat>,
    pub shift: Arc<FrequencyShift>,
}

fn diag_form(
    geom: &Arc<TorusGeom>,
    spec: &Arc<GroupSpec>,
    dz: &[Vec<C64>],
    dzb: &[Vec<C64>],
) -> LieForm {
    let g = geom.g;
    let n = spec.ambient_dim;
    let mut parts = Vec::new();
    for k in 0..g {
        let a = CMat::from_diagonal(&DVector::from_vec(dz[k].clone()));
        let b = CMat::from_diagonal(&DVector::from_vec(dzb[k].clone()));
        parts.push((1u8 << k, a));
        parts.push((1u8 << (g + k), b));
    }
    let shift = Arc::new(FrequencyShift::trivial(n, geom.dim()));
    LieForm::constant(geom.clone(), spec.clone(), shift, 1, &parts).expect("degree one frames")
}

/// Reads `χ` from a constant diagonal `(0,1)`-form.
pub fn chi_coefficients(chi: &LieForm) -> Result<Vec<Vec<C64>>> {
    let g = chi.geom.g;
    let n = chi.n();
    if chi.degree != 1 {
        return Err(Error::InvalidTwist("χ must be a 1-form".into()));
    }
    let zero = chi.geom.zero_mode();
    let harm = chi.harmonic_part();
    if chi.distance(&harm) > 0.0 {
        return Err(Error::InvalidTwist("χ must be constant".into()));
    }
    if chi.nilpotent_part().norm() > 0.0 {
        return Err(Error::InvalidTwist("χ must be diagonal (𝔰-valued)".into()));
    }
    if chi.type_project(1, 0)?.norm() > 0.0 {
        return Err(Error::InvalidTwist("χ must be of type (0,1)".into()));
    }
    Ok((0..g)
        .map(|k| {
            let fi = chi.frame_index(1 << (g + k)).expect("frame");
            (0..n).map(|i| chi.get(fi, i, i, zero)).collect()
        })
        .collect())
}

pub fn make_twist(chi: &LieForm) -> Result<TwistContext> {
    let coeffs = chi_coefficients(chi)?;
    make_twist_from(chi.geom.clone(), chi.spec.clone(), coeffs)
}

/// Builds the context from `chi[k][i]`.
pub fn make_twist_from(
    geom: Arc<TorusGeom>,
    spec: Arc<GroupSpec>,
    chi: Vec<Vec<C64>>,
) -> Result<TwistContext> {
    let g = geom.g;
    let n = spec.ambient_dim;
    if chi.len() != g || chi.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidTwist(format!("χ needs {g} diagonal vectors of length {n}")));
    }
    for row in &chi {
        let d = CMat::from_diagonal(&DVector::from_vec(row.clone()));
        if spec.algebra_defect(&d) > 1e-12 * (1.0 + d.norm()) {
            return Err(Error::InvalidTwist(format!("χ is not 𝔰-valued for {}", spec.family)));
        }
    }
    let dz: Vec<Vec<C64>> = chi.iter().map(|r| r.iter().map(|z| -z.conj()).collect()).collect();
    let gamma = diag_form(&geom, &spec, &dz, &chi);
    let theta: Vec<Vec<f64>> = (0..geom.dim())
        .map(|l| {
            (0..n)
                .map(|i| {
                    let s: C64 = (0..g).map(|k| chi[k][i] * geom.periods[k][l].conj()).sum();
                    2.0 * s.im
                })
                .collect()
        })
        .collect();
    let holonomy = theta
        .iter()
        .map(|row| {
            CMat::from_diagonal(&DVector::from_vec(
                row.iter().map(|t| C64::from_polar(1.0, *t)).collect(),
            ))
        })
        .collect();
    let shift = Arc::new(FrequencyShift::from_angles(n, &theta));
    Ok(TwistContext { geom, spec, chi, gamma, theta, holonomy, shift })
}

/// The untwisted context `χ = 0`.
pub fn trivial_twist(geom: Arc<TorusGeom>, spec: Arc<GroupSpec>) -> TwistContext {
    let n = spec.ambient_dim;
    let g = geom.g;
    make_twist_from(geom, spec, vec![vec![ZERO; n]; g]).expect("zero twist is valid")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    ToGlobal,
    ToTwisted,
}

/// Relabels entry `(i,j)` by `sign · wrap_ij`, failing on band overflow.
fn relabel(alpha: &LieForm, shift: Arc<FrequencyShift>, sign: i64, mode: Truncation) -> Result<LieForm> {
    let geom = alpha.geom.clone();
    let mut out = LieForm::zeros(geom.clone(), alpha.spec.clone(), shift.clone(), alpha.degree);
    let wraps = if sign < 0 { alpha.shift.clone() } else { shift.clone() };
    let mut tail = 0.0;
    for fi in 0..alpha.frames().len() {
        for (i, j) in crate::torus::form::entries(alpha.n()) {
            let w = wraps.wrap(i, j);
            for (m, z) in alpha.slice(fi, i, j).iter().enumerate() {
                if *z == ZERO {
                    continue;
                }
                let mv: Vec<i64> = geom.mode(m).iter().zip(w).map(|(a, b)| a + sign * b).collect();
                match geom.mode_index(&mv) {
                    Some(k) => out.set(fi, i, j, k, *z),
                    None => tail += z.norm_sqr(),
                }
            }
        }
    }
    let tail = tail.sqrt();
    if mode == Truncation::Strict && tail > 1e-14 && tail > BAND_TOL * alpha.norm() {
        return Err(Error::BandOverflow { tail, norm: alpha.norm() });
    }
    Ok(out)
}

impl TwistContext {
    pub fn is_trivial(&self) -> bool {
        self.shift.is_untwisted()
    }

    /// Zero form of the given degree in the twisted frame.
    pub fn twisted_zeros(&self, degree: usize) -> LieForm {
        LieForm::zeros(self.geom.clone(), self.spec.clone(), self.shift.clone(), degree)
    }

    pub fn global_zeros(&self, degree: usize) -> LieForm {
        LieForm::untwisted(self.geom.clone(), self.spec.clone(), degree)
    }

    /// `r_γ` and its inverse; `γ` is added or removed on 1-forms only.
    pub fn transfer(&self, alpha: &LieForm, dir: Direction) -> Result<LieForm> {
        self.transfer_with(alpha, dir, Truncation::Strict)
    }

    /// [`Self::transfer`]; with [`Truncation::Project`] modes pushed out of
    /// the band by the relabelling are dropped.
    pub fn transfer_with(&self, alpha: &LieForm, dir: Direction, mode: Truncation) -> Result<LieForm> {
        match dir {
            Direction::ToGlobal => {
                if *alpha.shift != *self.shift {
                    return Err(Error::Incompatible("form is not in this twisted frame".into()));
                }
                let trivial = Arc::new(FrequencyShift::trivial(alpha.n(), self.geom.dim()));
                let out = relabel(alpha, trivial, -1, mode)?;
                Ok(if alpha.degree == 1 { out.add(&self.gamma) } else { out })
            }
            Direction::ToTwisted => {
                if !alpha.shift.is_untwisted() {
                    return Err(Error::Incompatible("form is not global".into()));
                }
                let base = if alpha.degree == 1 { alpha.try_sub(&self.gamma)? } else { alpha.clone() };
                relabel(&base, self.shift.clone(), 1, mode)
            }
        }
    }

    /// Real coordinates of a diagonal `(0,1)` coefficient column in the
    /// Picard generators: `b = Σ_l m_l w_l`.
    pub fn picard_coordinates(geom: &TorusGeom, b: &[C64]) -> Vec<f64> {
        let g = geom.g;
        let d = geom.dim();
        let w = geom.picard_generators();
        let mut a = DMatrix::<f64>::zeros(d, d);
        let mut rhs = DVector::<f64>::zeros(d);
        for k in 0..g {
            for l in 0..d {
                a[(k, l)] = w[l][k].re;
                a[(g + k, l)] = w[l][k].im;
            }
            rhs[k] = b[k].re;
            rhs[g + k] = b[k].im;
        }
        let sol = a.lu().solve(&rhs).expect("Picard generators are independent");
        sol.iter().copied().collect()
    }

    /// Whether `χ` lies in the Picard lattice, i.e. the flat bundle is trivial.
    pub fn in_picard_lattice(&self, tol: f64) -> bool {
        (0..self.spec.ambient_dim).all(|i| {
            let col: Vec<C64> = self.chi.iter().map(|r| r[i]).collect();
            Self::picard_coordinates(&self.geom, &col).iter().all(|x| (x - x.round()).abs() <= tol)
        })
    }
}

/// `γ = −ω̄ + ω` for a constant diagonal `(0,1)`-form `ω`.
pub fn picard_lift(omega01: &LieForm) -> Result<LieForm> {
    let coeffs = chi_coefficients(omega01)?;
    let dz: Vec<Vec<C64>> = coeffs.iter().map(|r| r.iter().map(|z| -z.conj()).collect()).collect();
    Ok(diag_form(&omega01.geom, &omega01.spec, &dz, &coeffs))
}

/// `ω ↦ ω − ω̄` restricted to the harmonic diagonal `(0,1)` data: the inverse
/// of [`picard_lift`] is the `(0,1)` projection.
pub fn picard_project(gamma: &LieForm) -> Result<LieForm> {
    gamma.type_project(0, 1)
}

/// Anti-Hermitian defect `‖γ + γ*‖` of a constant diagonal 1-form, evaluated
/// on the real tangent basis.
pub fn k_reality_defect(gamma: &LieForm) -> f64 {
    let g = gamma.geom.g;
    let zero = gamma.geom.zero_mode();
    let mut s = 0.0;
    for k in 0..g {
        let a = gamma.matrix_at(gamma.frame_index(1 << k).expect("frame"), zero);
        let b = gamma.matrix_at(gamma.frame_index(1 << (g + k)).expect("frame"), zero);
        // γ(∂_x) = a + b, γ(∂_y) = i(a − b)
        for v in [&a + &b, (&a - &b) * c(0.0, 1.0)] {
            s += (&v + v.adjoint()).norm_squared();
        }
    }
    s.sqrt()
}
