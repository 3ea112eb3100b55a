use crate::derham::{curvature, Flavor, TwistContext};
use crate::error::{Error, Result};
use crate::linalg::{self, commutator, fnorm, CMat, C64};
use crate::torus::LieForm;
use serde::Serialize;

/// Agreement between successive step doublings at which integration stops.
pub const REFINE_TOL: f64 = 1e-9;
const MIN_STEPS: usize = 16;
const MAX_STEPS: usize = 1 << 14;

#[derive(Clone, Debug)]
pub struct Holonomy {
    pub value: CMat,
    pub steps: usize,
    /// Difference between the last two refinements.
    pub refinement: f64,
}

/// `ω(v)` at lattice point `t` for a tangent vector with lattice coordinates `n`.
fn contract(omega: &LieForm, t: &[f64], n: &[f64]) -> CMat {
    let g = omega.geom.g;
    let dz = omega.geom.lattice_vector(n);
    let vals = omega.eval(t);
    let size = omega.n();
    let mut out = CMat::zeros(size, size);
    for k in 0..g {
        let a = omega.frame_index(1 << k).expect("frame");
        let b = omega.frame_index(1 << (g + k)).expect("frame");
        out += &vals[a] * dz[k] + &vals[b] * dz[k].conj();
    }
    out
}

/// Fourth order Magnus integration of `dc = ω c` along `s ↦ s n`, `s ∈ [0,1]`.
fn transport(omega: &LieForm, n: &[f64], steps: usize) -> CMat {
    let size = omega.n();
    let h = 1.0 / steps as f64;
    let off = 3f64.sqrt() / 6.0;
    let mut c = CMat::identity(size, size);
    for s in 0..steps {
        let s0 = s as f64 * h;
        let at = |u: f64| -> CMat {
            let t: Vec<f64> = n.iter().map(|x| x * u).collect();
            contract(omega, &t, n)
        };
        let a1 = at(s0 + h * (0.5 - off));
        let a2 = at(s0 + h * (0.5 + off));
        let big = (&a1 + &a2) * C64::from(h / 2.0) + commutator(&a2, &a1) * C64::from(3f64.sqrt() / 12.0 * h * h);
        c = linalg::expm(&big) * c;
    }
    c
}

fn require_flat(omega: &LieForm) -> Result<()> {
    if omega.degree != 1 {
        return Err(Error::Incompatible("holonomy needs a 1-form".into()));
    }
    if !omega.shift.is_untwisted() {
        return Err(Error::Incompatible("holonomy needs a global connection".into()));
    }
    let k = curvature(omega, Flavor::DeRham)?;
    let a = omega.norm();
    if k.norm > super::canonical::INPUT_FLAT_TOL * (1.0 + a * a) {
        return Err(Error::NonFlat(k.norm));
    }
    Ok(())
}

/// Parallel transport of `dc = ω·c`, `c(0) = 1`, around the loop of lattice vector `lambda`.
pub fn holonomy(omega: &LieForm, lambda: &[i64]) -> Result<Holonomy> {
    require_flat(omega)?;
    if lambda.len() != omega.geom.dim() {
        return Err(Error::Incompatible(format!("lattice vector needs {} coordinates", omega.geom.dim())));
    }
    let n: Vec<f64> = lambda.iter().map(|x| *x as f64).collect();
    let mut steps = MIN_STEPS;
    let mut prev = transport(omega, &n, steps);
    loop {
        steps *= 2;
        let next = transport(omega, &n, steps);
        let diff = fnorm(&(&next - &prev));
        if diff <= REFINE_TOL * fnorm(&next).max(1.0) || steps >= MAX_STEPS {
            return Ok(Holonomy { value: next, steps, refinement: diff });
        }
        prev = next;
    }
}

/// Holonomies along the `2g` lattice generators.
pub fn generator_holonomies(omega: &LieForm) -> Result<Vec<Holonomy>> {
    let d = omega.geom.dim();
    (0..d)
        .map(|l| {
            let mut e = vec![0i64; d];
            e[l] = 1;
            holonomy(omega, &e)
        })
        .collect()
}

/// `exp(ω(λ))` for a constant connection.
pub fn constant_holonomy(omega: &LieForm, lambda: &[i64]) -> Result<CMat> {
    if omega.distance(&omega.harmonic_part()) > 0.0 || !omega.shift.is_untwisted() {
        return Err(Error::Precondition("closed form holonomy needs a constant global connection".into()));
    }
    let n: Vec<f64> = lambda.iter().map(|x| *x as f64).collect();
    Ok(linalg::expm(&contract(omega, &vec![0.0; n.len()], &n)))
}

/// Largest `‖h_a h_b − h_b h_a‖` over pairs of holonomies.
pub fn commutator_defect(hols: &[CMat]) -> f64 {
    let mut worst: f64 = 0.0;
    for (a, x) in hols.iter().enumerate() {
        for y in &hols[a + 1..] {
            worst = worst.max(fnorm(&commutator(x, y)));
        }
    }
    worst
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacterCheck {
    /// `‖holonomy(γ, λ_l) − z_l‖` per generator.
    pub residuals: Vec<f64>,
    pub max: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub const CHARACTER_TOL: f64 = 1e-10;

/// Compares the transported holonomy of `γ` with the character of `ctx`.
pub fn holonomy_character_check(ctx: &TwistContext) -> Result<CharacterCheck> {
    let hols = generator_holonomies(&ctx.gamma)?;
    let residuals: Vec<f64> = hols.iter().zip(&ctx.holonomy).map(|(h, z)| fnorm(&(&h.value - z))).collect();
    let max = residuals.iter().cloned().fold(0.0, f64::max);
    Ok(CharacterCheck { residuals, max, tolerance: CHARACTER_TOL, pass: max <= CHARACTER_TOL })
}
