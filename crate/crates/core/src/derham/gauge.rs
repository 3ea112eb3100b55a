use crate::error::{Error, Result};
use crate::lie::GroupSpec;
use crate::linalg::{self, c, CMat, C64, ONE, ZERO};
use crate::torus::form::{entries, entry_index};
use crate::torus::product::{collect, synthesize_all, Accumulator, Product, Truncation};
use crate::torus::{differential, wedge, wedge_product, Diff, FrequencyShift, LieForm, TorusGeom};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    DeRham,
    Dolbeault,
}

/// One factor of a gauge map.
#[derive(Clone, Debug)]
pub enum GaugeFactor {
    Constant(CMat),
    /// `exp(F)` for a degree-0 form `F` that is either `𝔫`-valued or diagonal.
    Exp(LieForm),
    /// `x ↦ diag(e^{2πi⟨m_i, t⟩})` with integer `m_i ∈ ℤ^{2g}`.
    Character(Vec<Vec<i64>>),
}

/// A map `M → G` stored as an ordered product of factors.
#[derive(Clone, Debug)]
pub struct GaugeMap {
    pub geom: Arc<TorusGeom>,
    pub spec: Arc<GroupSpec>,
    pub shift: Arc<FrequencyShift>,
    pub factors: Vec<GaugeFactor>,
}

const GROUP_TOL: f64 = 1e-11;

/// Relative tail tolerated when a gauge action is truncated to the band.
pub const GAUGE_TAIL_TOL: f64 = 1e-10;

/// Tails below this are rounding noise whatever the norm of the result.
const TAIL_FLOOR: f64 = 1e-13;

fn overflows(tail: f64, norm: f64) -> bool {
    tail > TAIL_FLOOR && tail > GAUGE_TAIL_TOL * norm
}
fn within_band(p: Product, mode: Truncation) -> Result<LieForm> {
    if mode == Truncation::Strict && overflows(p.tail, p.full_norm) {
        return Err(Error::BandOverflow { tail: p.tail, norm: p.full_norm });
    }
    Ok(p.form)
}

fn exp_kind(f: &LieForm) -> Result<bool> {
    let nil = f.nilpotent_part().norm();
    let diag = f.diagonal_part().norm();
    if nil > 0.0 && diag > 0.0 {
        return Err(Error::InvalidGauge("exp factor must be 𝔫-valued or diagonal, not mixed".into()));
    }
    Ok(diag == 0.0)
}

fn identity_form(like: &LieForm) -> LieForm {
    let mut one = like.zeros_like(0);
    let z = one.geom.zero_mode();
    for i in 0..one.n() {
        one.set(0, i, i, z, ONE);
    }
    one
}

/// `exp(F)` for nilpotent `F` by the terminating series, products exact.
pub fn exp_nilpotent_form(f: &LieForm) -> Result<LieForm> {
    exp_nilpotent_with(f, Truncation::Strict)
}

fn exp_nilpotent_with(f: &LieForm, mode: Truncation) -> Result<LieForm> {
    let mut out = identity_form(f);
    let mut term = identity_form(f);
    for k in 1..f.n() {
        term = wedge_product(&term, f)?.check(mode)?.scale(C64::from(1.0 / k as f64));
        out = out.add(&term);
    }
    Ok(out)
}

/// Grid samples of the diagonal slices of a degree-0 form.
fn diagonal_samples(f: &LieForm) -> Vec<Vec<C64>> {
    let grid = f.geom.product_grid();
    let all = synthesize_all(f);
    (0..f.n())
        .map(|i| all.get(&(0, entry_index(f.n(), i, i))).cloned().unwrap_or(vec![ZERO; grid.len()]))
        .collect()
}

/// `exp(±F)` for diagonal `F`, evaluated pointwise and truncated to the band.
fn exp_diagonal_form(f: &LieForm, sign: f64) -> Result<LieForm> {
    let samples = diagonal_samples(f);
    let mut acc: Accumulator = HashMap::new();
    let zero = vec![0i64; f.geom.dim()];
    for (i, s) in samples.iter().enumerate() {
        let buf: Vec<C64> = s.iter().map(|z| (z * sign).exp()).collect();
        acc.insert((0, entry_index(f.n(), i, i), zero.clone()), buf);
    }
    let mut out = f.zeros_like(0);
    let (tail, full) = collect(acc, &mut out);
    if overflows(tail, full) {
        return Err(Error::BandOverflow { tail, norm: full });
    }
    Ok(out)
}

fn character_form(like: &LieForm, m: &[Vec<i64>]) -> Result<LieForm> {
    let mut out = like.zeros_like(0);
    for (i, mi) in m.iter().enumerate() {
        let idx = out
            .geom
            .mode_index(mi)
            .ok_or(Error::BandOverflow { tail: 1.0, norm: 1.0 })?;
        out.set(0, i, i, idx, ONE);
    }
    Ok(out)
}

impl GaugeFactor {
    pub fn inverse(&self) -> Result<GaugeFactor> {
        Ok(match self {
            GaugeFactor::Constant(m) => {
                GaugeFactor::Constant(linalg::inverse_upper(m).ok_or(Error::Singular)?)
            }
            GaugeFactor::Exp(f) => GaugeFactor::Exp(f.scale(C64::from(-1.0))),
            GaugeFactor::Character(m) => {
                GaugeFactor::Character(m.iter().map(|v| v.iter().map(|x| -x).collect()).collect())
            }
        })
    }

    /// `Ad f(α)`.
    pub fn ad(&self, alpha: &LieForm) -> Result<LieForm> {
        self.ad_with(alpha, Truncation::Strict)
    }

    /// `Ad f(α)`; with [`Truncation::Project`] band overflow is discarded.
    pub fn ad_with(&self, alpha: &LieForm, mode: Truncation) -> Result<LieForm> {
        match self {
            GaugeFactor::Constant(m) => {
                let inv = linalg::inverse_upper(m).ok_or(Error::Singular)?;
                let mut out = alpha.zeros_like(alpha.degree);
                for fi in 0..alpha.frames().len() {
                    for k in 0..alpha.num_modes() {
                        let a = alpha.matrix_at(fi, k);
                        if a.iter().all(|z| *z == ZERO) {
                            continue;
                        }
                        let b = m * a * &inv;
                        for (i, j) in entries(alpha.n()) {
                            out.set(fi, i, j, k, b[(i, j)]);
                        }
                    }
                }
                Ok(out)
            }
            GaugeFactor::Character(mv) => {
                let geom = alpha.geom.clone();
                let mut out = alpha.zeros_like(alpha.degree);
                let mut tail = 0.0;
                for fi in 0..alpha.frames().len() {
                    for (i, j) in entries(alpha.n()) {
                        for (k, z) in alpha.slice(fi, i, j).iter().enumerate() {
                            if *z == ZERO {
                                continue;
                            }
                            let m: Vec<i64> = geom
                                .mode(k)
                                .iter()
                                .enumerate()
                                .map(|(l, x)| x + mv[i][l] - mv[j][l])
                                .collect();
                            match geom.mode_index(&m) {
                                Some(t) => out.set(fi, i, j, t, *z),
                                None => tail += z.norm_sqr(),
                            }
                        }
                    }
                }
                let tail = tail.sqrt();
                if mode == Truncation::Strict && overflows(tail, alpha.norm()) {
                    return Err(Error::BandOverflow { tail, norm: alpha.norm() });
                }
                Ok(out)
            }
            GaugeFactor::Exp(f) => {
                if exp_kind(f)? {
                    let g = exp_nilpotent_with(f, mode)?;
                    let ginv = exp_nilpotent_with(&f.scale(C64::from(-1.0)), mode)?;
                    let left = within_band(wedge_product(&g, alpha)?, mode)?;
                    within_band(wedge_product(&left, &ginv)?, mode)
                } else {
                    ad_diagonal_exp(f, alpha, mode)
                }
            }
        }
    }

    /// `δ₀(f) = (df) f⁻¹`.
    pub fn delta0(&self, like: &LieForm) -> Result<LieForm> {
        self.delta0_with(like, Truncation::Strict)
    }

    pub fn delta0_with(&self, like: &LieForm, mode: Truncation) -> Result<LieForm> {
        let geom = like.geom.clone();
        match self {
            GaugeFactor::Constant(_) => Ok(like.zeros_like(1)),
            GaugeFactor::Character(mv) => {
                let g = geom.g;
                let mut out = like.zeros_like(1);
                let z = geom.zero_mode();
                for (i, mi) in mv.iter().enumerate() {
                    for k in 0..g {
                        let mut a = ZERO;
                        for (l, &ml) in mi.iter().enumerate() {
                            a += geom.a_coef[l][k] * ml as f64;
                        }
                        let two_pi_i = c(0.0, 2.0 * PI);
                        out.set(out.frame_index(1 << k).expect("frame"), i, i, z, two_pi_i * a);
                        out.set(out.frame_index(1 << (g + k)).expect("frame"), i, i, z, two_pi_i * a.conj());
                    }
                }
                Ok(out)
            }
            GaugeFactor::Exp(f) => {
                if exp_kind(f)? {
                    let g = exp_nilpotent_with(f, mode)?;
                    let ginv = exp_nilpotent_with(&f.scale(C64::from(-1.0)), mode)?;
                    within_band(wedge_product(&differential(&g, Diff::D), &ginv)?, mode)
                } else {
                    Ok(differential(f, Diff::D))
                }
            }
        }
    }

    /// The factor as a degree-0 group-valued form.
    pub fn value(&self, like: &LieForm) -> Result<LieForm> {
        match self {
            GaugeFactor::Constant(m) => LieForm::constant(
                like.geom.clone(),
                like.spec.clone(),
                like.shift.clone(),
                0,
                &[(0, m.clone())],
            ),
            GaugeFactor::Character(mv) => character_form(like, mv),
            GaugeFactor::Exp(f) => {
                if exp_kind(f)? {
                    exp_nilpotent_form(f)
                } else {
                    exp_diagonal_form(f, 1.0)
                }
            }
        }
    }

    pub fn eval_at(&self, t: &[f64]) -> CMat {
        match self {
            GaugeFactor::Constant(m) => m.clone(),
            GaugeFactor::Exp(f) => linalg::exp_auto(&f.eval(t)[0]),
            GaugeFactor::Character(mv) => {
                let d: Vec<C64> = mv
                    .iter()
                    .map(|mi| {
                        let arg: f64 = mi.iter().zip(t).map(|(a, b)| *a as f64 * b).sum();
                        C64::from_polar(1.0, 2.0 * PI * arg)
                    })
                    .collect();
                CMat::from_diagonal(&nalgebra::DVector::from_vec(d))
            }
        }
    }
}

/// `Ad exp(F)` for diagonal `F`: entry `(i,j)` times `e^{F_i − F_j}`.
fn ad_diagonal_exp(f: &LieForm, alpha: &LieForm, mode: Truncation) -> Result<LieForm> {
    let n = alpha.n();
    let fs = diagonal_samples(f);
    let samples = synthesize_all(alpha);
    let mut acc: Accumulator = HashMap::new();
    let zero = vec![0i64; alpha.geom.dim()];
    for ((fi, e), buf) in samples {
        let (i, j) = entries(n)[e];
        let scaled: Vec<C64> = buf
            .iter()
            .zip(&fs[i])
            .zip(&fs[j])
            .map(|((a, x), y)| a * (x - y).exp())
            .collect();
        acc.insert((fi, e, zero.clone()), scaled);
    }
    let mut out = alpha.zeros_like(alpha.degree);
    let (tail, full) = collect(acc, &mut out);
    if mode == Truncation::Strict && overflows(tail, full) {
        return Err(Error::BandOverflow { tail, norm: full });
    }
    Ok(out)
}

impl GaugeMap {
    pub fn identity(geom: Arc<TorusGeom>, spec: Arc<GroupSpec>, shift: Arc<FrequencyShift>) -> Self {
        GaugeMap { geom, spec, shift, factors: Vec::new() }
    }

    pub fn untwisted_identity(geom: Arc<TorusGeom>, spec: Arc<GroupSpec>) -> Self {
        let shift = Arc::new(FrequencyShift::trivial(spec.ambient_dim, geom.dim()));
        Self::identity(geom, spec, shift)
    }

    /// Validates and appends `factor` on the right.
    pub fn push(&mut self, factor: GaugeFactor) -> Result<()> {
        let n = self.spec.ambient_dim;
        match &factor {
            GaugeFactor::Constant(m) => {
                match self.spec.group_defect(m) {
                    Some(d) if d <= GROUP_TOL * (1.0 + m.norm()).powi(2) => {}
                    _ => return Err(Error::InvalidGauge("constant factor is not in G".into())),
                }
                for (i, j) in entries(n) {
                    if i != j && m[(i, j)] != ZERO && !self.shift.is_trivial_entry(i, j) {
                        return Err(Error::InvalidGauge(format!(
                            "constant factor does not commute with the twist at ({},{})",
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
            GaugeFactor::Exp(f) => {
                if f.degree != 0 {
                    return Err(Error::InvalidGauge("exp factor must be a function".into()));
                }
                if !self.geom.same_as(&f.geom) || *self.spec != *f.spec || *self.shift != *f.shift {
                    return Err(Error::InvalidGauge("exp factor lives on another bundle".into()));
                }
                exp_kind(f)?;
                let defect = f.algebra_defect();
                if defect > GROUP_TOL * (1.0 + f.norm()) {
                    return Err(Error::InvalidGauge(format!("exp factor leaves 𝔤 by {defect:e}")));
                }
            }
            GaugeFactor::Character(mv) => {
                if mv.len() != n || mv.iter().any(|v| v.len() != self.geom.dim()) {
                    return Err(Error::InvalidGauge("character needs one ℤ^{2g} vector per entry".into()));
                }
                for l in 0..self.geom.dim() {
                    let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(
                        mv.iter().map(|v| C64::from(v[l] as f64)).collect(),
                    ));
                    if self.spec.algebra_defect(&d) > 0.0 {
                        return Err(Error::InvalidGauge("character does not take values in S".into()));
                    }
                }
            }
        }
        self.factors.push(factor);
        Ok(())
    }

    pub fn with(mut self, factor: GaugeFactor) -> Result<Self> {
        self.push(factor)?;
        Ok(self)
    }

    /// `self · other`.
    pub fn compose(&self, other: &GaugeMap) -> Result<GaugeMap> {
        let mut out = self.clone();
        for f in &other.factors {
            out.push(f.clone())?;
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<GaugeMap> {
        let mut out = GaugeMap::identity(self.geom.clone(), self.spec.clone(), self.shift.clone());
        for f in self.factors.iter().rev() {
            out.factors.push(f.inverse()?);
        }
        Ok(out)
    }

    fn template(&self) -> LieForm {
        LieForm::zeros(self.geom.clone(), self.spec.clone(), self.shift.clone(), 0)
    }

    /// `Ad g(α)`.
    pub fn ad(&self, alpha: &LieForm) -> Result<LieForm> {
        self.ad_with(alpha, Truncation::Strict)
    }

    pub fn ad_with(&self, alpha: &LieForm, mode: Truncation) -> Result<LieForm> {
        let mut out = alpha.clone();
        for f in self.factors.iter().rev() {
            out = f.ad_with(&out, mode)?;
        }
        Ok(out)
    }

    /// `δ₀(g)` through the crossed homomorphism law, factor by factor.
    pub fn delta0(&self, flavor: Flavor) -> Result<LieForm> {
        self.delta0_with(flavor, Truncation::Strict)
    }

    pub fn delta0_with(&self, flavor: Flavor, mode: Truncation) -> Result<LieForm> {
        let like = self.template();
        let mut d = like.zeros_like(1);
        for f in self.factors.iter().rev() {
            d = f.delta0_with(&like, mode)?.add(&f.ad_with(&d, mode)?);
        }
        match flavor {
            Flavor::DeRham => Ok(d),
            Flavor::Dolbeault => d.type_project(0, 1),
        }
    }

    /// `ρ(g)(α) = Ad g(α) + δ₀(g)`, or its Dolbeault counterpart on `(0,1)`-forms.
    pub fn apply(&self, alpha: &LieForm, flavor: Flavor) -> Result<LieForm> {
        self.apply_with(alpha, flavor, Truncation::Strict)
    }

    /// Gauge action; [`Truncation::Project`] gives the Galerkin action.
    pub fn apply_with(&self, alpha: &LieForm, flavor: Flavor, mode: Truncation) -> Result<LieForm> {
        if alpha.degree != 1 {
            return Err(Error::Incompatible("gauge action is defined on 1-forms".into()));
        }
        if flavor == Flavor::Dolbeault && alpha.type_project(1, 0)?.norm() > 0.0 {
            return Err(Error::Incompatible("Dolbeault action needs a (0,1)-form".into()));
        }
        alpha.compatible(&self.template())?;
        Ok(self.ad_with(alpha, mode)?.add(&self.delta0_with(flavor, mode)?))
    }

    /// The map as a degree-0 form, products taken strictly.
    pub fn value(&self) -> Result<LieForm> {
        let like = self.template();
        let mut out = identity_form(&like);
        for f in &self.factors {
            out = wedge(&out, &f.value(&like)?)?;
        }
        Ok(out)
    }

    /// The same map over another cutoff of the torus.
    pub fn rebase(&self, geom: Arc<TorusGeom>) -> Result<GaugeMap> {
        let mut out = GaugeMap::identity(geom.clone(), self.spec.clone(), self.shift.clone());
        for f in &self.factors {
            out.factors.push(match f {
                GaugeFactor::Exp(x) => {
                    let (y, tail) = x.rebase(geom.clone());
                    if tail > 0.0 {
                        return Err(Error::BandOverflow { tail, norm: x.norm() });
                    }
                    GaugeFactor::Exp(y)
                }
                other => other.clone(),
            });
        }
        Ok(out)
    }

    /// `δ₀(g) = (dg) g⁻¹` from grid samples of `g`, bypassing the factor law.
    pub fn delta0_direct(&self) -> Result<LieForm> {
        let k = self.geom.cutoff;
        let wide = if self.geom.g == 1 { 2 * k + self.spec.ambient_dim } else { k };
        super::pointwise::log_derivative(self, wide)
    }

    pub fn eval_at(&self, t: &[f64]) -> CMat {
        let n = self.spec.ambient_dim;
        self.factors.iter().fold(CMat::identity(n, n), |acc, f| acc * f.eval_at(t))
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }
}

/// `‖δ₀(gh) − δ₀(g) − Ad g(δ₀(h))‖` with `δ₀(gh)` from the full product.
pub fn check_crossed_hom(g: &GaugeMap, h: &GaugeMap) -> Result<f64> {
    let gh = g.compose(h)?;
    let lhs = gh.delta0_direct()?;
    let rhs = g.delta0(Flavor::DeRham)?.add(&g.ad(&h.delta0(Flavor::DeRham)?)?);
    Ok(lhs.distance(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{build_group, Family};
    use crate::torus::elliptic_curve;

    fn setup() -> (Arc<TorusGeom>, Arc<GroupSpec>) {
        (elliptic_curve(c(0.0, 1.0), 6).unwrap(), Arc::new(build_group(Family::Triangular(2)).unwrap()))
    }

    #[test]
    fn character_delta0_is_constant_form() {
        let (geom, spec) = setup();
        let g = GaugeMap::untwisted_identity(geom.clone(), spec)
            .with(GaugeFactor::Character(vec![vec![1, 0], vec![0, 0]]))
            .unwrap();
        let d = g.delta0(Flavor::DeRham).unwrap();
        // d e^{2πi x} = 2πi dx = πi (dz + dz̄) on the square curve
        let z = geom.zero_mode();
        assert!((d.get(0, 0, 0, z) - c(0.0, PI)).norm() < 1e-13);
        assert!((d.get(1, 0, 0, z) - c(0.0, PI)).norm() < 1e-13);
        assert!(d.distance(&g.delta0_direct().unwrap()) < 1e-12);
    }

    #[test]
    fn inverse_cancels() {
        let (geom, spec) = setup();
        let mut f = LieForm::untwisted(geom.clone(), spec.clone(), 0);
        f.set(0, 0, 1, geom.mode_index(&[1, 0]).unwrap(), c(0.3, 0.1));
        let g = GaugeMap::untwisted_identity(geom, spec)
            .with(GaugeFactor::Exp(f))
            .unwrap()
            .with(GaugeFactor::Character(vec![vec![0, 1], vec![1, 0]]))
            .unwrap();
        let id = g.compose(&g.inverse().unwrap()).unwrap();
        assert!(id.delta0(Flavor::DeRham).unwrap().norm() < 1e-12);
        let e = id.eval_at(&[0.2, 0.7]);
        assert!((e - CMat::identity(2, 2)).norm() < 1e-13);
    }

    #[test]
    fn mixed_exponent_rejected() {
        let (geom, spec) = setup();
        let mut f = LieForm::untwisted(geom.clone(), spec.clone(), 0);
        f.set(0, 0, 1, 0, ONE);
        f.set(0, 0, 0, 0, ONE);
        assert!(GaugeMap::untwisted_identity(geom, spec).with(GaugeFactor::Exp(f)).is_err());
    }
}
