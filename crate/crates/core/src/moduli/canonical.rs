use crate::derham::{curvature, Direction, Flavor, GaugeFactor, GaugeMap, TwistContext};
use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};
use crate::torus::form::entries;
use crate::torus::{differential, hodge_decompose, solve_ddbar_tol, Diff, LieForm, Truncation};

/// Relative flatness tolerance for inputs, scaled by `1 + ‖ω‖²`.
pub const INPUT_FLAT_TOL: f64 = 1e-8;

/// Relative size of a harmonic residue that counts as an obstruction.
pub const OBSTRUCTION_TOL: f64 = 1e-10;

/// Distance of Picard coordinates from integers tolerated for a twist match.
pub const PICARD_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct CanonicalForm {
    /// Global gauge with `ρ(gauge)ω = r_γ(ψ + ∂h)`.
    pub gauge: GaugeMap,
    /// Harmonic, in the twisted frame.
    pub psi: LieForm,
    /// Degree 0, twisted frame, zero harmonic part.
    pub h: LieForm,
    /// `r_γ(ψ + ∂h)`.
    pub omega: LieForm,
    /// `‖δ₁(ψ + ∂h)‖`.
    pub flat_residual: f64,
    /// `‖ρ(gauge)ω − r_γ(ψ + ∂h)‖`; zero for reconstructed forms.
    pub gauge_residual: f64,
    /// Non-harmonic remainder that was not absorbed into `ψ + ∂h`.
    pub split_residual: f64,
}

/// Residuals of the rigidity properties of a canonical form.
#[derive(Clone, Copy, Debug, Default)]
pub struct RigidityResiduals {
    /// Distance of `Π_{0,1}ψ` from its harmonic part.
    pub eta_harmonic: f64,
    /// Off-`𝔫` part of `Π_{0,1}ψ`.
    pub eta_diagonal: f64,
    pub del_eta: f64,
    pub eta_bracket: f64,
    pub del_alpha: f64,
    /// `‖dα − [η, α]‖`.
    pub d_alpha: f64,
}

impl CanonicalForm {
    /// `ψ + ∂h` in the twisted frame.
    pub fn twisted_omega(&self) -> LieForm {
        self.psi.add(&differential(&self.h, Diff::Del))
    }

    pub fn rigidity(&self) -> Result<RigidityResiduals> {
        let w = self.twisted_omega();
        let eta = w.type_project(0, 1)?;
        let alpha = w.type_project(1, 0)?;
        let br = |a: &LieForm, b: &LieForm| crate::torus::bracket_with(a, b, Truncation::Project);
        Ok(RigidityResiduals {
            eta_harmonic: eta.distance(&eta.harmonic_part()),
            eta_diagonal: eta.diagonal_part().norm(),
            del_eta: differential(&eta, Diff::Del).norm(),
            eta_bracket: br(&eta, &eta)?.norm(),
            del_alpha: differential(&alpha, Diff::Del).norm(),
            d_alpha: differential(&alpha, Diff::D).distance(&br(&eta, &alpha)?),
        })
    }
}

fn flat_input(omega: &LieForm, ctx: &TwistContext) -> Result<()> {
    if omega.degree != 1 {
        return Err(Error::Incompatible("connection must be a 1-form".into()));
    }
    if !omega.shift.is_untwisted() {
        return Err(Error::Incompatible("connection must be given in the global frame".into()));
    }
    if !omega.geom.same_as(&ctx.geom) {
        return Err(Error::Incompatible("connection and twist live on different tori".into()));
    }
    if *omega.spec != *ctx.spec {
        return Err(Error::SpecMismatch(format!("{} vs {}", omega.spec.family, ctx.spec.family)));
    }
    let k = curvature(omega, Flavor::DeRham)?;
    let a = omega.norm();
    if k.norm > INPUT_FLAT_TOL * (1.0 + a * a) {
        return Err(Error::NonFlat(k.norm));
    }
    Ok(())
}

/// Per-mode inverse of `∂̄` (`bar = true`) or `∂` on a 1-form of matching
/// type: the least-squares potential, zero on harmonic modes.
pub(crate) fn invert_first_order(beta: &LieForm, bar: bool) -> LieForm {
    let g = beta.geom.g;
    let mut out = beta.zeros_like(0);
    let frames: Vec<usize> = (0..g)
        .map(|k| beta.frame_index(1 << (if bar { g + k } else { k })).expect("degree one frame"))
        .collect();
    for (i, j) in entries(beta.n()) {
        for m in 0..beta.num_modes() {
            let nu = beta.frequency(i, j, m);
            if nu.iter().all(|x| *x == 0.0) {
                continue;
            }
            let (sigma, tau) = beta.geom.symbols(&nu);
            let sym = if bar { tau } else { sigma };
            let den: f64 = sym.iter().map(|s| s.norm_sqr()).sum();
            let num: C64 = frames.iter().zip(&sym).map(|(&fi, s)| s.conj() * beta.get(fi, i, j, m)).sum();
            if num != ZERO {
                out.set(0, i, j, m, num / den);
            }
        }
    }
    out
}

/// Integer Picard coordinates of the diagonal `(0,1)` harmonic class of
/// `omega` relative to `χ`.
fn picard_winding(omega: &LieForm, ctx: &TwistContext) -> Result<Vec<Vec<i64>>> {
    let g = ctx.geom.g;
    let n = omega.n();
    let zero = ctx.geom.zero_mode();
    let mut m = vec![vec![0i64; ctx.geom.dim()]; n];
    for (i, row) in m.iter_mut().enumerate() {
        let col: Vec<C64> = (0..g)
            .map(|k| {
                let fi = omega.frame_index(1 << (g + k)).expect("frame");
                omega.get(fi, i, i, zero) - ctx.chi[k][i]
            })
            .collect();
        let coords = TwistContext::picard_coordinates(&ctx.geom, &col);
        for (l, x) in coords.iter().enumerate() {
            if (x - x.round()).abs() > PICARD_TOL {
                return Err(Error::TwistMismatch(format!(
                    "diagonal class of entry {} differs from χ by a non-lattice vector (coordinate {x})",
                    i + 1
                )));
            }
            row[l] = x.round() as i64;
        }
    }
    Ok(m)
}

/// Gauges a flat global connection into canonical position for `ctx`.
pub fn canonicalize(omega: &LieForm, ctx: &TwistContext) -> Result<CanonicalForm> {
    flat_input(omega, ctx)?;
    let mode = Truncation::Project;
    let mut gauge = GaugeMap::untwisted_identity(ctx.geom.clone(), ctx.spec.clone());
    let mut w = omega.clone();
    let prepend = |gauge: &mut GaugeMap, f: GaugeFactor| -> Result<()> {
        let mut next = GaugeMap::untwisted_identity(ctx.geom.clone(), ctx.spec.clone());
        next.push(f)?;
        *gauge = next.compose(gauge)?;
        Ok(())
    };

    let potential = hodge_decompose(&w.diagonal_part()).exact_potential;
    if potential.norm() > 0.0 {
        let f = GaugeFactor::Exp(potential.scale(C64::from(-1.0)));
        let step = GaugeMap::untwisted_identity(ctx.geom.clone(), ctx.spec.clone()).with(f.clone())?;
        w = step.apply_with(&w, Flavor::DeRham, mode)?;
        prepend(&mut gauge, f)?;
    }
    let wind = picard_winding(&w, ctx)?;
    if wind.iter().flatten().any(|x| *x != 0) {
        let f = GaugeFactor::Character(wind.iter().map(|r| r.iter().map(|x| -x).collect()).collect());
        let step = GaugeMap::untwisted_identity(ctx.geom.clone(), ctx.spec.clone()).with(f.clone())?;
        w = step.apply_with(&w, Flavor::DeRham, mode)?;
        prepend(&mut gauge, f)?;
    }

    let mut a = ctx.transfer_with(&w, Direction::ToTwisted, mode)?;
    for k in 1..=ctx.spec.max_level() {
        let b = a.type_project(0, 1)?.level_part(k);
        let x = invert_first_order(&b.sub(&b.harmonic_part()), true);
        if x.norm() == 0.0 {
            continue;
        }
        let minus = x.scale(C64::from(-1.0));
        let step = GaugeMap::identity(ctx.geom.clone(), ctx.spec.clone(), ctx.shift.clone())
            .with(GaugeFactor::Exp(minus.clone()))?;
        a = step.apply_with(&a, Flavor::DeRham, mode)?;
        prepend(&mut gauge, GaugeFactor::Exp(ctx.transfer_with(&minus, Direction::ToGlobal, mode)?))?;
    }

    let psi = a.harmonic_part();
    let rest = a.sub(&psi);
    let h = invert_first_order(&rest.type_project(1, 0)?, false);
    let twisted = psi.add(&differential(&h, Diff::Del));
    let split_residual = rest.distance(&differential(&h, Diff::Del));
    let flat_residual = curvature(&twisted, Flavor::DeRham)?.norm;
    let canonical = ctx.transfer_with(&twisted, Direction::ToGlobal, mode)?;
    let gauge_residual = gauge.apply_with(omega, Flavor::DeRham, mode)?.distance(&canonical);
    Ok(CanonicalForm {
        gauge,
        psi,
        h,
        omega: canonical,
        flat_residual,
        gauge_residual,
        split_residual,
    })
}

fn check_harmonic_input(psi: &LieForm, ctx: &TwistContext) -> Result<()> {
    if psi.degree != 1 {
        return Err(Error::Incompatible("ψ must be a 1-form".into()));
    }
    if *psi.shift != *ctx.shift || !psi.geom.same_as(&ctx.geom) || *psi.spec != *ctx.spec {
        return Err(Error::Incompatible("ψ is not in the twisted frame of the context".into()));
    }
    if psi.distance(&psi.harmonic_part()) > 0.0 {
        return Err(Error::Precondition("ψ must be harmonic".into()));
    }
    if psi.type_project(0, 1)?.diagonal_part().norm() > 0.0 {
        return Err(Error::Precondition("the (0,1)-part of ψ must be 𝔫-valued".into()));
    }
    Ok(())
}

/// The flat form `ψ + ∂h` of an admissible harmonic `ψ`, built up the
/// nilpotency filtration.
pub fn reconstruct(psi: &LieForm, ctx: &TwistContext) -> Result<CanonicalForm> {
    check_harmonic_input(psi, ctx)?;
    let scale = 1.0 + psi.norm().powi(2);
    let mut h = psi.zeros_like(0);
    for k in 0..=ctx.spec.max_level() {
        let w = psi.add(&differential(&h, Diff::Del));
        let kk = curvature(&w, Flavor::DeRham)?.form.level_part(k);
        if kk.norm() == 0.0 {
            continue;
        }
        let harm = kk.harmonic_part().norm();
        if harm > OBSTRUCTION_TOL * scale {
            return Err(Error::HarmonicObstruction { norm: harm, level: Some(k) });
        }
        let rest = kk.sub(&kk.harmonic_part());
        if rest.norm() <= OBSTRUCTION_TOL * scale {
            continue;
        }
        let mixed = rest.type_project(1, 1)?;
        let hk = solve_ddbar_tol(&mixed, f64::INFINITY)?;
        h = h.add(&hk.level_part(k));
    }
    let twisted = psi.add(&differential(&h, Diff::Del));
    let flat_residual = curvature(&twisted, Flavor::DeRham)?.norm;
    let omega = ctx.transfer_with(&twisted, Direction::ToGlobal, Truncation::Project)?;
    Ok(CanonicalForm {
        gauge: GaugeMap::untwisted_identity(ctx.geom.clone(), ctx.spec.clone()),
        psi: psi.clone(),
        h,
        omega,
        flat_residual,
        gauge_residual: 0.0,
        split_residual: 0.0,
    })
}
