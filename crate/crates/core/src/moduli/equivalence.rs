use super::canonical::canonicalize;
use crate::derham::TwistContext;
use crate::error::{Error, Result};
use crate::lie::{Family, GroupSpec};
use crate::linalg::{self, c, fnorm, CMat, C64, ZERO};
use crate::sample;
use crate::torus::LieForm;
use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub const ACCEPT_TOL: f64 = 1e-8;
pub const REJECT_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Equivalent,
    Inequivalent,
    Undecided,
}

#[derive(Clone, Debug)]
pub struct Equivalence {
    pub decision: Decision,
    /// Flat section `a` with `Ad a(ψ₁) = ψ₂`.
    pub witness: Option<CMat>,
    /// `‖Ad a(ψ₁) − ψ₂‖ / (1 + ‖ψ₂‖)` for the witness, or the best residual found.
    pub residual: f64,
    pub method: &'static str,
}

/// Canonicalizes both connections and compares their harmonic parts.
pub fn equivalent(omega1: &LieForm, omega2: &LieForm, ctx: &TwistContext, seed: u64) -> Result<Equivalence> {
    let c1 = canonicalize(omega1, ctx)?;
    let c2 = canonicalize(omega2, ctx)?;
    equivalent_harmonic(&c1.psi, &c2.psi, seed)
}

/// The constant coefficient matrices of a harmonic 1-form, one per frame.
fn frame_matrices(psi: &LieForm) -> Vec<CMat> {
    let z = psi.geom.zero_mode();
    (0..psi.frames().len()).map(|fi| psi.matrix_at(fi, z)).collect()
}

/// Entries a flat section may occupy: upper triangular entries with trivial shift.
fn section_entries(psi: &LieForm) -> Vec<(usize, usize)> {
    let n = psi.n();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            if psi.shift.is_trivial_entry(i, j) {
                out.push((i, j));
            }
        }
    }
    out
}

fn relative_residual(a: &CMat, p1: &[CMat], p2: &[CMat]) -> Option<f64> {
    let inv = linalg::inverse_upper(a)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in p1.iter().zip(p2) {
        num += fnorm(&(a * x * &inv - y)).powi(2);
        den += fnorm(y).powi(2);
    }
    Some(num.sqrt() / (1.0 + den.sqrt()))
}

/// Matrices `a` on `pattern` with `a P₁ = P₂ a` for every frame, as columns.
fn intertwiners(pattern: &[(usize, usize)], p1: &[CMat], p2: &[CMat], n: usize) -> CMat {
    let rows = p1.len() * n * n;
    let mut m = CMat::zeros(rows.max(1), pattern.len());
    for (col, &(i, j)) in pattern.iter().enumerate() {
        let e = linalg::unit(n, i, j);
        for (f, (x, y)) in p1.iter().zip(p2).enumerate() {
            let r = &e * x - y * &e;
            for (k, z) in r.iter().enumerate() {
                m[(f * n * n + k, col)] = *z;
            }
        }
    }
    linalg::nullspace(&m, 1e-10)
}

fn matrix_from(pattern: &[(usize, usize)], v: &DVector<C64>, n: usize) -> CMat {
    let mut a = CMat::zeros(n, n);
    for (k, &(i, j)) in pattern.iter().enumerate() {
        a[(i, j)] = v[k];
    }
    a
}

/// Decides `ψ₂ = Ad a(ψ₁)` for a flat section `a` of the twisted bundle.
pub fn equivalent_harmonic(psi1: &LieForm, psi2: &LieForm, seed: u64) -> Result<Equivalence> {
    psi1.compatible(psi2)?;
    for p in [psi1, psi2] {
        if p.distance(&p.harmonic_part()) > 0.0 {
            return Err(Error::Precondition("equivalence needs harmonic forms".into()));
        }
    }
    let n = psi1.n();
    let p1 = frame_matrices(psi1);
    let p2 = frame_matrices(psi2);
    let pattern = section_entries(psi1);
    let diag_pos: Vec<usize> = (0..n).map(|i| pattern.iter().position(|&e| e == (i, i)).expect("diagonal")).collect();

    let null = intertwiners(&pattern, &p1, &p2, n);
    let reach = |i: usize| (0..null.ncols()).map(|k| null[(diag_pos[i], k)].norm()).fold(0.0, f64::max);
    if null.ncols() == 0 || (0..n).any(|i| reach(i) < 1e-8) {
        let residual = if null.ncols() == 0 { 1.0 } else { (0..n).map(reach).fold(1.0, f64::min) };
        return Ok(Equivalence { decision: Decision::Inequivalent, witness: None, residual, method: "linear" });
    }
    let mut rng = sample::rng(seed);
    let spec = &psi1.spec;
    if matches!(spec.family, Family::Triangular(_)) {
        let mut best: Option<(f64, CMat)> = None;
        for _ in 0..8 {
            let w: DVector<C64> = DVector::from_fn(null.ncols(), |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let mut a = matrix_from(&pattern, &(&null * w), n);
            let d = a[(0, 0)];
            a /= d;
            if let Some(r) = relative_residual(&a, &p1, &p2) {
                if best.as_ref().map_or(true, |(b, _)| r < *b) {
                    best = Some((r, a));
                }
            }
        }
        let (residual, a) = best.ok_or(Error::Singular)?;
        let decision = if residual <= ACCEPT_TOL { Decision::Equivalent } else { Decision::Undecided };
        return Ok(Equivalence { decision, witness: Some(a), residual, method: "linear" });
    }
    Ok(newton_search(spec, &pattern, &p1, &p2, &mut rng))
}

/// Gauss–Newton over `a = exp(H) exp(Y)` with `H ∈ 𝔰`, `Y ∈ 𝔫` on the section pattern.
fn newton_search<R: Rng>(
    spec: &GroupSpec,
    pattern: &[(usize, usize)],
    p1: &[CMat],
    p2: &[CMat],
    rng: &mut R,
) -> Equivalence {
    let n = spec.ambient_dim;
    let basis: Vec<CMat> = spec
        .basis()
        .into_iter()
        .zip(spec.lead_entries())
        .filter(|(_, e)| pattern.contains(e))
        .map(|(b, _)| b)
        .collect();
    let split = |x: &DVector<C64>| -> CMat {
        let mut h = CMat::zeros(n, n);
        let mut y = CMat::zeros(n, n);
        for (b, v) in basis.iter().zip(x.iter()) {
            if linalg::is_strictly_upper(b) {
                y += b * *v;
            } else {
                h += b * *v;
            }
        }
        linalg::expm(&h) * linalg::exp_nilpotent(&y)
    };
    let resid = |x: &DVector<C64>| -> DVector<C64> {
        let a = split(x);
        let inv = linalg::inverse_upper(&a).expect("exp is invertible");
        let mut out = Vec::with_capacity(p1.len() * n * n);
        for (u, v) in p1.iter().zip(p2) {
            out.extend((&a * u * &inv - v).iter().copied());
        }
        DVector::from_vec(out)
    };
    let scale = 1.0 + p2.iter().map(|m| fnorm(m).powi(2)).sum::<f64>().sqrt();
    let dim = basis.len();
    let mut best = (f64::INFINITY, CMat::identity(n, n));
    for start in 0..24 {
        let mut x: DVector<C64> = if start == 0 {
            DVector::from_element(dim, ZERO)
        } else {
            DVector::from_fn(dim, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        };
        let mut r = resid(&x);
        for _ in 0..100 {
            if r.norm() / scale <= 1e-14 {
                break;
            }
            let h = 1e-7;
            let mut jac = CMat::zeros(r.len(), dim);
            for k in 0..dim {
                let mut xp = x.clone();
                xp[k] += C64::from(h);
                let col = (resid(&xp) - &r) / C64::from(h);
                jac.set_column(k, &col);
            }
            let rhs = CMat::from_column_slice(r.len(), 1, r.as_slice());
            let step = linalg::lstsq(&jac, &rhs, 1e-7);
            let dx = DVector::from_column_slice(step.as_slice());
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1e-3 {
                let xn = &x - &dx * C64::from(t);
                let rn = resid(&xn);
                if rn.norm() < r.norm() {
                    x = xn;
                    r = rn;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        let res = r.norm() / scale;
        if res < best.0 {
            best = (res, split(&x));
        }
        if best.0 <= ACCEPT_TOL * 1e-3 {
            break;
        }
    }
    let decision = if best.0 <= ACCEPT_TOL {
        Decision::Equivalent
    } else if best.0 >= REJECT_TOL {
        Decision::Inequivalent
    } else {
        Decision::Undecided
    };
    Equivalence {
        decision,
        witness: (decision == Decision::Equivalent).then_some(best.1),
        residual: best.0,
        method: "gauss-newton",
    }
}
