//! Seeded randomized check suites over a geometry and a group.
//!
//! Each suite runs a number of trials and reports, per identity, the worst
//! residual seen against its tolerance.

use crate::derham::identities::*;
use crate::derham::{make_twist_from, picard_lift, picard_project, k_reality_defect, TwistContext};
use crate::error::{Error, Result};
use crate::lie::GroupSpec;
use crate::linalg::C64;
use crate::moduli::holonomy_character_check;
use crate::report::CheckRecord;
use crate::sample::{self, EntryFilter, FormSampler, GaugeSampler};
use crate::torus::frame::binomial;
use crate::torus::{
    differential, hodge_decompose, laplacian, solve_ddbar, twisted_harmonic_basis, Diff, FrequencyShift,
    Laplacian, LieForm, TorusGeom,
};
use rand::Rng;
use std::sync::Arc;

pub const IDENTITY_TOL: f64 = 1e-9;
pub const KAHLER_TOL: f64 = 1e-10;
pub const NILPOTENT_OP_TOL: f64 = 1e-12;
pub const HOLOMORPHIC_TOL: f64 = 1e-12;
pub const DDBAR_TOL: f64 = 1e-8;
pub const SPLIT_TOL: f64 = 1e-9;
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
pub const TRANSFER_TYPE_TOL: f64 = 1e-10;
pub const ROUNDTRIP_TOL: f64 = 1e-11;
pub const CHARACTER_TOL: f64 = 1e-10;

/// Worst value per named check, in first-seen order.
#[derive(Default)]
pub struct Worst {
    items: Vec<(String, f64, f64)>,
}

impl Worst {
    pub fn see(&mut self, name: &str, value: f64, tol: f64) {
        let value = if value.is_nan() { f64::INFINITY } else { value };
        match self.items.iter_mut().find(|(n, _, _)| n == name) {
            Some(item) => item.1 = item.1.max(value),
            None => self.items.push((name.to_string(), value, tol)),
        }
    }

    pub fn records(self, prefix: &str) -> Vec<CheckRecord> {
        self.items
            .into_iter()
            .map(|(n, v, t)| CheckRecord::at_most(format!("{prefix}{n}"), v, t))
            .collect()
    }
}

/// Random `𝔰`-valued `χ[k][i]` with entries of size about `amp`.
pub fn random_chi<R: Rng + ?Sized>(rng: &mut R, geom: &TorusGeom, spec: &GroupSpec, amp: f64) -> Vec<Vec<C64>> {
    (0..geom.g)
        .map(|_| {
            let d = sample::random_algebra(rng, spec, |i, j| i == j) * C64::from(amp);
            (0..spec.ambient_dim).map(|i| d[(i, i)]).collect()
        })
        .collect()
}

/// `χ` in the Picard lattice: entry `i` is `Σ_l m[i][l] w_l`.
pub fn lattice_chi<R: Rng + ?Sized>(rng: &mut R, geom: &TorusGeom, spec: &GroupSpec, max: i64) -> Vec<Vec<C64>> {
    let m = sample::random_character(rng, spec, geom.dim(), max);
    let w = geom.picard_generators();
    (0..geom.g)
        .map(|k| {
            (0..spec.ambient_dim)
                .map(|i| (0..geom.dim()).map(|l| w[l][k] * m[i][l] as f64).sum())
                .collect()
        })
        .collect()
}

/// Gauge, action, curvature and transfer identities on random data.
pub fn operator_identities(
    geom: &Arc<TorusGeom>,
    spec: &Arc<GroupSpec>,
    ctx: &TwistContext,
    seed: u64,
    trials: usize,
) -> Result<Vec<CheckRecord>> {
    let mut rng = sample::rng(seed);
    let shift = Arc::new(FrequencyShift::trivial(spec.ambient_dim, geom.dim()));
    let samplers = GaugeSampler::fitted(geom);
    if samplers.is_empty() {
        return Err(Error::Precondition(format!("cutoff {} is too small for random gauges", geom.cutoff)));
    }
    let mut w = Worst::default();
    for t in 0..trials {
        let gs = samplers[t % samplers.len()];
        let g = sample::random_gauge(&mut rng, geom, spec, &shift, &gs);
        let hs = gs.partner(geom.cutoff);
        let h = sample::random_gauge(&mut rng, geom, spec, &shift, &hs);
        let fs = FormSampler { band: gs.data_band, ..FormSampler::default() };
        let a = sample::random_form(&mut rng, geom, spec, &shift, 1, &fs);
        let s = (1.0 + a.norm()).powi(2);
        w.see("leibniz", leibniz_residual(&g, &a)? / s, IDENTITY_TOL);
        w.see("crossed_homomorphism", crossed_hom_residual(&g, &h)?, IDENTITY_TOL);
        w.see("action", action_residual(&g, &h, &a)? / s, IDENTITY_TOL);
        w.see("equivariance", equivariance_residual(&g, &a)? / s, IDENTITY_TOL);
        w.see("type_projection", type_residual(&g, &a)? / s, IDENTITY_TOL);
        w.see("pure_gauge_flat", pure_gauge_residual(&g)?, IDENTITY_TOL);

        let b = sample::random_form(&mut rng, geom, spec, &ctx.shift, 1, &FormSampler::default());
        let f = sample::random_form(&mut rng, geom, spec, &ctx.shift, 0, &FormSampler::default());
        w.see("transfer_roundtrip", transfer_roundtrip_residual(ctx, &b)? / (1.0 + b.norm()), ROUNDTRIP_TOL);
        w.see("transfer_type", transfer_type_residual(ctx, &b)? / (1.0 + b.norm()), TRANSFER_TYPE_TOL);
        let sb = (1.0 + b.norm()).powi(2);
        w.see("twisted_differential", twisted_differential_residual(ctx, &b)? / sb, IDENTITY_TOL);
        w.see("twisted_differential_functions", twisted_differential_residual(ctx, &f)? / (1.0 + f.norm()), IDENTITY_TOL);
    }
    Ok(w.records("identity."))
}

fn nonzero_form<R: Rng + ?Sized>(rng: &mut R, geom: &Arc<TorusGeom>, spec: &Arc<GroupSpec>, shift: &Arc<FrequencyShift>, degree: usize, opts: &FormSampler) -> LieForm {
    loop {
        let f = sample::random_form(rng, geom, spec, shift, degree, opts);
        if f.norm() > 0.0 {
            return f;
        }
    }
}

/// `d² = ∂² = ∂̄² = ∂∂̄ + ∂̄∂ = 0`, the Kähler identity and the Hodge split.
pub fn hodge_identities(geom: &Arc<TorusGeom>, spec: &Arc<GroupSpec>, shift: &Arc<FrequencyShift>, seed: u64, trials: usize) -> Result<Vec<CheckRecord>> {
    let mut rng = sample::rng(seed);
    let mut w = Worst::default();
    let top = geom.dim();
    for t in 0..trials {
        let degree = t % (top + 1);
        let opts = FormSampler { band: geom.cutoff as i64, amp: 1.0, ..FormSampler::default() };
        let a = nonzero_form(&mut rng, geom, spec, shift, degree, &opts);
        let lap = laplacian(&a, Laplacian::Full);
        let scale = a.norm() + lap.norm();
        let d2 = |x: Diff, y: Diff| differential(&differential(&a, x), y);
        w.see("d_squared", d2(Diff::D, Diff::D).norm() / scale, NILPOTENT_OP_TOL);
        w.see("del_squared", d2(Diff::Del, Diff::Del).norm() / scale, NILPOTENT_OP_TOL);
        w.see("delbar_squared", d2(Diff::DelBar, Diff::DelBar).norm() / scale, NILPOTENT_OP_TOL);
        w.see("del_delbar_anticommute", d2(Diff::DelBar, Diff::Del).add(&d2(Diff::Del, Diff::DelBar)).norm() / scale, NILPOTENT_OP_TOL);
        let l_del = laplacian(&a, Laplacian::Del).scale(C64::from(2.0));
        let l_bar = laplacian(&a, Laplacian::DelBar).scale(C64::from(2.0));
        w.see("kahler_del", lap.distance(&l_del) / a.norm(), KAHLER_TOL);
        w.see("kahler_delbar", lap.distance(&l_bar) / a.norm(), KAHLER_TOL);

        let split = hodge_decompose(&a);
        w.see("hodge_reconstruction", split.residual / a.norm(), SPLIT_TOL);
        let parts = [split.harmonic.clone(), split.exact_part(), split.coexact_part()];
        let n2 = a.norm().powi(2);
        for (x, y, name) in [(0, 1, "harmonic_exact"), (0, 2, "harmonic_coexact"), (1, 2, "exact_coexact")] {
            if parts[x].degree == parts[y].degree {
                w.see(&format!("orthogonal_{name}"), parts[x].inner(&parts[y]).norm() / n2, ORTHOGONALITY_TOL);
            }
        }
        w.see("harmonic_in_kernel", laplacian(&split.harmonic, Laplacian::Full).norm() / a.norm(), KAHLER_TOL);
    }
    Ok(w.records("hodge."))
}

/// Holomorphy of harmonic `(p,0)` forms, the `∂∂̄` solver and its obstruction.
pub fn ddbar_checks(geom: &Arc<TorusGeom>, spec: &Arc<GroupSpec>, seed: u64, trials: usize) -> Result<Vec<CheckRecord>> {
    let mut rng = sample::rng(seed);
    let g = geom.g;
    let shift = Arc::new(FrequencyShift::trivial(spec.ambient_dim, geom.dim()));
    let mut w = Worst::default();
    for t in 0..trials {
        let p = 1 + t % g;
        let opts = |bd| FormSampler { band: geom.cutoff as i64, amp: 1.0, entries: EntryFilter::All, bidegree: Some(bd) };
        let a = nonzero_form(&mut rng, geom, spec, &shift, p, &opts((p, 0))).harmonic_part();
        let b = nonzero_form(&mut rng, geom, spec, &shift, p, &opts((0, p))).harmonic_part();
        w.see("harmonic_p0_delbar", differential(&a, Diff::DelBar).norm() / (1.0 + a.norm()), HOLOMORPHIC_TOL);
        w.see("harmonic_0q_del", differential(&b, Diff::Del).norm() / (1.0 + b.norm()), HOLOMORPHIC_TOL);

        let (pp, qq) = (t % g, (t / g) % g);
        let f = nonzero_form(&mut rng, geom, spec, &shift, pp + qq, &opts((pp, qq)));
        let phi = differential(&differential(&f, Diff::DelBar), Diff::Del);
        if phi.norm() == 0.0 {
            continue;
        }
        let psi = solve_ddbar(&phi)?;
        let back = differential(&differential(&psi, Diff::DelBar), Diff::Del);
        w.see("ddbar_equation", back.distance(&phi) / phi.norm(), DDBAR_TOL);
        if pp + qq == 0 {
            let pinned = f.sub(&f.harmonic_part());
            w.see("ddbar_recovery", psi.distance(&pinned) / pinned.norm().max(1.0), DDBAR_TOL);
        }
    }
    let mut out = w.records("ddbar.");
    let mask = (1u8) | (1u8 << g);
    let x = sample::random_algebra(&mut rng, spec, |_, _| true);
    let constant = LieForm::constant(geom.clone(), spec.clone(), shift, 2, &[(mask, x)])?;
    let rejected = matches!(solve_ddbar(&constant), Err(Error::HarmonicObstruction { .. }));
    out.push(CheckRecord::holds("ddbar.constant_11_obstructed", rejected));
    Ok(out)
}

/// Independent count of harmonic twisted forms: trivial-character entries
/// read off the holonomy matrices, times the number of frames.
pub fn expected_twisted_dimension(ctx: &TwistContext, bidegree: (usize, usize)) -> usize {
    let spec = &ctx.spec;
    let trivial = spec
        .lead_entries()
        .iter()
        .filter(|&&(i, j)| ctx.holonomy.iter().all(|z| (z[(i, i)] * z[(j, j)].conj() - 1.0).norm() < 1e-9))
        .count();
    trivial * binomial(ctx.geom.g, bidegree.0) * binomial(ctx.geom.g, bidegree.1)
}

/// Harmonic dimension of the twisted bundle against the character oracle,
/// over `random` generic and `lattice` Picard-lattice twists.
pub fn twisted_dichotomy(geom: &Arc<TorusGeom>, spec: &Arc<GroupSpec>, seed: u64, random: usize, lattice: usize) -> Result<Vec<CheckRecord>> {
    let mut rng = sample::rng(seed);
    let g = geom.g;
    let mut bidegrees = vec![(0, 1), (1, 0), (1, 1)];
    if g > 1 {
        bidegrees.push((0, 2));
    }
    let full: Vec<usize> = bidegrees.iter().map(|&(p, q)| spec.dim() * binomial(g, p) * binomial(g, q)).collect();
    let mut mismatches = 0;
    let mut lattice_jumps = 0;
    let mut generic_drops = 0;
    let mut generic_total = 0;
    for t in 0..random + lattice {
        let on_lattice = t >= random;
        let chi = if on_lattice { lattice_chi(&mut rng, geom, spec, 2) } else { random_chi(&mut rng, geom, spec, 0.4) };
        let ctx = make_twist_from(geom.clone(), spec.clone(), chi)?;
        for (&bd, &fd) in bidegrees.iter().zip(&full) {
            let got = twisted_harmonic_basis(geom, spec, &ctx.shift, bd).len();
            if got != expected_twisted_dimension(&ctx, bd) {
                mismatches += 1;
            }
            if on_lattice && got != fd {
                lattice_jumps += 1;
            }
            if !on_lattice {
                generic_total += 1;
                if got < fd {
                    generic_drops += 1;
                }
            }
        }
        if on_lattice && !ctx.in_picard_lattice(1e-9) {
            mismatches += 1;
        }
    }
    let mut out = vec![
        CheckRecord::exact("twist.dimension_mismatches", mismatches, 0),
        CheckRecord::exact("twist.lattice_not_full", lattice_jumps, 0),
    ];
    if spec.nilpotent_basis.is_empty() {
        return Ok(out);
    }
    out.push(CheckRecord::holds("twist.generic_dimension_drops", generic_drops == generic_total));
    Ok(out)
}

/// `Π_{0,1}` and the Picard lift as mutually inverse maps, `𝔨`-reality of
/// the lift, and the character of the twist against transported holonomy.
pub fn picard_checks(geom: &Arc<TorusGeom>, spec: &Arc<GroupSpec>, seed: u64, trials: usize) -> Result<Vec<CheckRecord>> {
    let mut rng = sample::rng(seed);
    let g = geom.g;
    let shift = Arc::new(FrequencyShift::trivial(spec.ambient_dim, geom.dim()));
    let mut w = Worst::default();
    for t in 0..trials {
        let chi = if t % 4 == 3 { lattice_chi(&mut rng, geom, spec, 1) } else { random_chi(&mut rng, geom, spec, 0.3) };
        let parts: Vec<_> = (0..g)
            .map(|k| {
                let d = nalgebra::DVector::from_vec(chi[k].clone());
                (1u8 << (g + k), crate::linalg::CMat::from_diagonal(&d))
            })
            .collect();
        let omega = LieForm::constant(geom.clone(), spec.clone(), shift.clone(), 1, &parts)?;
        let gamma = picard_lift(&omega)?;
        w.see("project_after_lift", picard_project(&gamma)?.distance(&omega), 0.0);
        w.see("lift_after_project", picard_lift(&picard_project(&gamma)?)?.distance(&gamma), 0.0);
        w.see("k_reality", k_reality_defect(&gamma), 0.0);
        let ctx = make_twist_from(geom.clone(), spec.clone(), chi)?;
        w.see("gamma_is_lift", ctx.gamma.distance(&gamma), 0.0);
        if t < trials.min(8) {
            let r = holonomy_character_check(&ctx)?;
            w.see("holonomy_character", r.max, CHARACTER_TOL);
        }
    }
    Ok(w.records("picard."))
}

pub const JACOBI_TOL: f64 = 1e-12;
pub const EXP_LOG_TOL: f64 = 1e-12;
pub const AD_HOM_TOL: f64 = 1e-11;

/// Jacobi, nilpotent exp/log, `Ad` as a homomorphism, and invariance of the
/// `𝔰`-component under `Ad`, on random elements of the group.
pub fn lie_identities(spec: &Arc<GroupSpec>, seed: u64, trials: usize) -> Result<Vec<CheckRecord>> {
    use crate::lie::{adjoint, exp_element, log_unipotent, semidirect_split, AlgebraElement};
    use crate::linalg::{commutator, fnorm};
    let mut rng = sample::rng(seed);
    let mut w = Worst::default();
    let elem = |m| AlgebraElement::new(spec.clone(), m);
    for _ in 0..trials {
        let [x, y, z] = [0; 3].map(|_| sample::random_algebra(&mut rng, spec, |_, _| true));
        let jac = commutator(&x, &commutator(&y, &z)) + commutator(&y, &commutator(&z, &x)) + commutator(&z, &commutator(&x, &y));
        let s = fnorm(&x) * fnorm(&y) * fnorm(&z);
        w.see("jacobi", fnorm(&jac) / s.max(1.0), JACOBI_TOL);

        let amp: f64 = rng.gen_range(0.1..10.0);
        let nil = sample::random_algebra(&mut rng, spec, |i, j| i < j);
        let nil = &nil * C64::from(amp / fnorm(&nil).max(f64::MIN_POSITIVE));
        let back = log_unipotent(&exp_element(&elem(nil.clone())?))?;
        w.see("exp_log_nilpotent", fnorm(&(&back.matrix - &nil)), EXP_LOG_TOL * (1.0 + amp));

        let g = exp_element(&elem(sample::random_algebra(&mut rng, spec, |_, _| true) * C64::from(0.5))?);
        let h = exp_element(&elem(sample::random_algebra(&mut rng, spec, |_, _| true) * C64::from(0.5))?);
        let xe = elem(x.clone())?;
        let lhs = adjoint(&g.mul(&h)?, &xe)?;
        let rhs = adjoint(&g, &adjoint(&h, &xe)?)?;
        w.see("ad_homomorphism", fnorm(&(&lhs.matrix - &rhs.matrix)) / fnorm(&x), AD_HOM_TOL);
        let moved = semidirect_split(&adjoint(&g, &xe)?).1;
        let orig = semidirect_split(&xe).1;
        w.see("ad_fixes_torus_part", fnorm(&(&moved.matrix - &orig.matrix)) / fnorm(&x), AD_HOM_TOL);
    }
    let mut out = w.records("lie.");
    out.push(CheckRecord::holds("lie.structure_invariants", spec.check_invariants().is_ok()));
    Ok(out)
}
