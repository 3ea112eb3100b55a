use flatmoduli::derham::make_twist_from;
use flatmoduli::lie::{build_group, Family, GroupSpec};
use flatmoduli::linalg::{c, unit, CMat, C64};
use flatmoduli::sample::{self, FormSampler};
use flatmoduli::torus::*;
use flatmoduli::Error;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

fn group(f: Family) -> Arc<GroupSpec> {
    Arc::new(build_group(f).unwrap())
}

fn trivial(geom: &Arc<TorusGeom>, spec: &Arc<GroupSpec>) -> Arc<FrequencyShift> {
    Arc::new(FrequencyShift::trivial(spec.ambient_dim, geom.dim()))
}

/// Scalar single mode `e^{2πi⟨m,t⟩}` on frame `mask`.
fn mode_form(geom: &Arc<TorusGeom>, m: &[i64], degree: usize, mask: u8) -> LieForm {
    let spec = group(Family::Triangular(1));
    let mut f = LieForm::zeros(geom.clone(), spec.clone(), trivial(geom, &spec), degree);
    let fi = f.frame_index(mask).unwrap();
    f.set(fi, 0, 0, geom.mode_index(m).unwrap(), c(1.0, 0.0));
    f
}

fn at(f: &LieForm, z: C64) -> C64 {
    let t = f.geom.to_lattice_coords(&[z]);
    f.eval(&t)[0][(0, 0)]
}

/// Fourth order central difference of `h ↦ f(z + h·dir)`.
fn diff4(f: &LieForm, z: C64, dir: C64) -> C64 {
    let h = 1e-3;
    let p = |s: f64| at(f, z + dir * s * h);
    (p(-2.0) - p(-1.0) * 8.0 + p(1.0) * 8.0 - p(2.0)) / (12.0 * h)
}

#[test]
fn geometry_examples() {
    let sq = elliptic_curve(c(0.0, 1.0), 8).unwrap();
    assert_eq!(sq.num_modes(), 17 * 17);
    let back = sq.to_lattice_coords(&sq.lattice_vector(&[3.0, -2.0]));
    assert!((back[0] - 3.0).abs() < 1e-14 && (back[1] + 2.0).abs() < 1e-14);
    assert!(elliptic_curve(c(0.3, -1.0), 8).is_err());
    assert!(elliptic_curve(c(2.0, 0.0), 8).is_err());

    let prod = square_product(2, 2).unwrap();
    let t1 = group(Family::Triangular(1));
    let sh = trivial(&prod, &t1);
    let h10 = twisted_harmonic_basis(&prod, &t1, &sh, (1, 0)).len();
    let h01 = twisted_harmonic_basis(&prod, &t1, &sh, (0, 1)).len();
    assert_eq!(h10 + h01, 4);
}

#[test]
fn delbar_of_single_mode_matches_finite_differences() {
    let geom = elliptic_curve(c(0.5, 1.0), 4).unwrap();
    let f = mode_form(&geom, &[1, -2], 0, 0);
    let fdz = mode_form(&geom, &[1, -2], 1, 0b01);
    let out = differential(&fdz, Diff::DelBar);
    let nonzero = out.data().iter().filter(|z| z.norm() > 0.0).count();
    assert_eq!(nonzero, 1);
    for z in [c(0.1, 0.2), c(0.37, 0.81), c(-0.4, 0.05)] {
        let dbar = (diff4(&f, z, c(1.0, 0.0)) + diff4(&f, z, c(0.0, 1.0)) * c(0.0, 1.0)) * 0.5;
        // ∂̄f dz̄ ∧ dz = −∂̄f dz ∧ dz̄
        let got = at(&out, z);
        assert!((got + dbar).norm() <= 1e-8 * dbar.norm(), "{got} vs {dbar}");
    }
}

#[test]
fn laplacian_eigenvalue_matches_finite_differences() {
    let geom = elliptic_curve(c(0.5, 1.0), 4).unwrap();
    for m in [[1i64, 0], [2, -1], [0, 3]] {
        let f = mode_form(&geom, &m, 0, 0);
        let lap = laplacian(&f, Laplacian::Full);
        let z = c(0.23, 0.61);
        let h = 1e-3;
        let p = |w: C64| at(&f, w);
        let second = |dir: C64| {
            (-p(z + dir * 2.0 * h) + p(z + dir * h) * 16.0 - p(z) * 30.0 + p(z - dir * h) * 16.0 - p(z - dir * 2.0 * h))
                / (12.0 * h * h)
        };
        let fd = -(second(c(1.0, 0.0)) + second(c(0.0, 1.0))) / p(z);
        let lambda = at(&lap, z) / p(z);
        assert!(lambda.im.abs() < 1e-9 && lambda.re > 0.0);
        assert!((lambda - fd).norm() <= 1e-6 * lambda.norm(), "{m:?}: {lambda} vs {fd}");
        assert!((lambda.re - geom.laplace_symbol(&[m[0] as f64, m[1] as f64])).abs() < 1e-9);
    }
}

#[test]
fn constant_forms() {
    let geom = elliptic_curve(c(0.0, 1.0), 4).unwrap();
    let spec = group(Family::Triangular(2));
    let sh = trivial(&geom, &spec);
    let a = &unit(2, 0, 0) * c(0.3, 0.1) + &unit(2, 0, 1) * c(-1.0, 0.5);
    let b = &unit(2, 1, 1) * c(0.7, 0.0) + &unit(2, 0, 1) * c(0.2, 0.2);
    let alpha = LieForm::constant(geom.clone(), spec.clone(), sh.clone(), 1, &[(0b01, a.clone()), (0b10, b.clone())]).unwrap();
    assert_eq!(differential(&alpha, Diff::D).norm(), 0.0);
    assert_eq!(laplacian(&alpha, Laplacian::Full).norm(), 0.0);

    let only_dz = LieForm::constant(geom.clone(), spec.clone(), sh.clone(), 1, &[(0b01, a.clone())]).unwrap();
    assert!(bracket(&only_dz, &only_dz).unwrap().norm() < 1e-15);
    let sq = bracket(&alpha, &alpha).unwrap();
    let ab: CMat = &a * &b - &b * &a;
    let want = LieForm::constant(geom.clone(), spec.clone(), sh.clone(), 2, &[(0b11, ab * c(2.0, 0.0))]).unwrap();
    assert!(sq.distance(&want) < 1e-14);

    let split = hodge_decompose(&alpha);
    assert_eq!(split.harmonic.distance(&alpha), 0.0);
    assert_eq!(split.exact_potential.norm(), 0.0);
    assert_eq!(split.coexact_potential.norm(), 0.0);
}

#[test]
fn exact_form_recovers_its_potential() {
    let geom = elliptic_curve(c(0.5, 1.0), 6).unwrap();
    let spec = group(Family::Triangular(2));
    let sh = trivial(&geom, &spec);
    let mut f = LieForm::zeros(geom.clone(), spec.clone(), sh, 0);
    f.set(0, 0, 1, geom.mode_index(&[2, -1]).unwrap(), c(0.4, -1.1));
    let split = hodge_decompose(&differential(&f, Diff::D));
    assert!(split.harmonic.norm() < 1e-15);
    assert!(split.exact_potential.distance(&f) <= 1e-10 * f.norm());
}

#[test]
fn twisted_entries_have_no_harmonic_part() {
    let geom = elliptic_curve(c(0.0, 1.0), 4).unwrap();
    let spec = group(Family::Triangular(2));
    let ctx = make_twist_from(geom.clone(), spec.clone(), vec![vec![c(0.31, 0.0), c(0.0, 0.0)]]).unwrap();
    assert!(!ctx.shift.is_trivial_entry(0, 1));
    let x = &unit(2, 0, 1) + &unit(2, 0, 0);
    let alpha = LieForm::constant(geom.clone(), spec.clone(), ctx.shift.clone(), 1, &[(0b10, x)]).unwrap();
    let h = hodge_decompose(&alpha).harmonic;
    let fi = h.frame_index(0b10).unwrap();
    assert!(h.slice(fi, 0, 1).iter().all(|z| *z == c(0.0, 0.0)));
    assert!(h.slice(fi, 0, 0).iter().any(|z| z.norm() > 0.0));

    let b01 = twisted_harmonic_basis(&geom, &spec, &ctx.shift, (0, 1));
    assert_eq!(b01.len(), 2);
    let triv = twisted_harmonic_basis(&geom, &spec, &trivial(&geom, &spec), (0, 1));
    assert_eq!(triv.len(), 3);
}

#[test]
fn ddbar_solver_examples() {
    let geom = elliptic_curve(c(0.0, 1.0), 4).unwrap();
    let spec = group(Family::Triangular(2));
    let sh = trivial(&geom, &spec);
    let zero = LieForm::zeros(geom.clone(), spec.clone(), sh.clone(), 2);
    assert_eq!(solve_ddbar(&zero).unwrap().norm(), 0.0);
    let constant = LieForm::constant(geom.clone(), spec.clone(), sh.clone(), 2, &[(0b11, unit(2, 0, 1))]).unwrap();
    assert!(matches!(solve_ddbar(&constant), Err(Error::HarmonicObstruction { .. })));

    let mut rng = sample::rng(9);
    let opts = FormSampler { band: 4, amp: 1.0, ..FormSampler::default() };
    let f = sample::random_form(&mut rng, &geom, &spec, &sh, 0, &opts);
    let phi = differential(&differential(&f, Diff::DelBar), Diff::Del);
    let psi = solve_ddbar(&phi).unwrap();
    let pinned = f.sub(&f.harmonic_part());
    assert!(psi.distance(&pinned) <= 1e-8 * pinned.norm());
    assert_eq!(psi.harmonic_part().norm(), 0.0);
}

struct Case {
    geom: Arc<TorusGeom>,
    spec: Arc<GroupSpec>,
    shift: Arc<FrequencyShift>,
}

fn case(k: usize) -> Case {
    let (geom, fam, chi) = match k {
        0 => (elliptic_curve(c(0.0, 1.0), 6).unwrap(), Family::Triangular(2), None),
        1 => (elliptic_curve(c(0.5, 1.0), 6).unwrap(), Family::Triangular(3), Some(vec![vec![c(0.21, -0.13), c(0.0, 0.0), c(-0.4, 0.3)]])),
        2 => (elliptic_curve(c(0.5, 1.0), 4).unwrap(), Family::BorelSp(4), None),
        _ => (square_product(2, 2).unwrap(), Family::Triangular(2), Some(vec![vec![c(0.3, 0.1), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-0.2, 0.0)]])),
    };
    let spec = group(fam);
    let shift = match chi {
        Some(chi) => make_twist_from(geom.clone(), spec.clone(), chi).unwrap().shift,
        None => trivial(&geom, &spec),
    };
    Case { geom, spec, shift }
}

fn random(cs: &Case, seed: u64, degree: usize, band: i64) -> LieForm {
    let mut rng = sample::rng(seed);
    let opts = FormSampler { band, amp: 1.0, ..FormSampler::default() };
    loop {
        let f = sample::random_form(&mut rng, &cs.geom, &cs.spec, &cs.shift, degree, &opts);
        if f.norm() > 0.0 {
            return f;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn differentials_square_to_zero(k in 0usize..4, seed in any::<u64>(), deg in 0usize..3) {
        let cs = case(k);
        let a = random(&cs, seed, deg, cs.geom.cutoff as i64);
        let scale = a.norm() + laplacian(&a, Laplacian::Full).norm();
        let dd = |x: Diff, y: Diff| differential(&differential(&a, x), y);
        prop_assert!(dd(Diff::D, Diff::D).norm() <= 1e-12 * scale);
        prop_assert!(dd(Diff::Del, Diff::Del).norm() <= 1e-12 * scale);
        prop_assert!(dd(Diff::DelBar, Diff::DelBar).norm() <= 1e-12 * scale);
        prop_assert!(dd(Diff::Del, Diff::DelBar).add(&dd(Diff::DelBar, Diff::Del)).norm() <= 1e-12 * scale);
    }

    #[test]
    fn kahler_identity(k in 0usize..4, seed in any::<u64>(), deg in 0usize..3) {
        let cs = case(k);
        let a = random(&cs, seed, deg, cs.geom.cutoff as i64);
        let full = laplacian(&a, Laplacian::Full);
        let two = C64::from(2.0);
        prop_assert!(full.distance(&laplacian(&a, Laplacian::Del).scale(two)) <= 1e-10 * a.norm());
        prop_assert!(full.distance(&laplacian(&a, Laplacian::DelBar).scale(two)) <= 1e-10 * a.norm());
    }

    #[test]
    fn hodge_split_is_orthogonal(k in 0usize..4, seed in any::<u64>(), deg in 0usize..3) {
        let cs = case(k);
        let a = random(&cs, seed, deg, cs.geom.cutoff as i64);
        let s = hodge_decompose(&a);
        let rebuilt = s.harmonic.add(&s.exact_part()).add(&s.coexact_part());
        prop_assert!(rebuilt.distance(&a) <= 1e-9 * a.norm());
        prop_assert!(s.residual <= 1e-9 * a.norm());
        let n2 = a.norm().powi(2);
        let parts = [s.harmonic.clone(), s.exact_part(), s.coexact_part()];
        for (x, y) in [(0, 1), (0, 2), (1, 2)] {
            prop_assert!(parts[x].inner(&parts[y]).norm() <= 1e-10 * n2);
        }
        prop_assert!(laplacian(&s.harmonic, Laplacian::Full).norm() <= 1e-10 * a.norm());
        prop_assert_eq!(hodge_decompose(&s.harmonic).harmonic.distance(&s.harmonic), 0.0);
    }

    #[test]
    fn harmonic_forms_are_holomorphic(k in 0usize..4, seed in any::<u64>(), p in 1usize..3) {
        let cs = case(k);
        let p = p.min(cs.geom.g);
        let mut rng = sample::rng(seed);
        let opts = |bd| FormSampler { band: 2, amp: 1.0, bidegree: Some(bd), ..FormSampler::default() };
        let a = sample::random_form(&mut rng, &cs.geom, &cs.spec, &cs.shift, p, &opts((p, 0))).harmonic_part();
        let b = sample::random_form(&mut rng, &cs.geom, &cs.spec, &cs.shift, p, &opts((0, p))).harmonic_part();
        prop_assert!(differential(&a, Diff::DelBar).norm() <= 1e-12 * (1.0 + a.norm()));
        prop_assert!(differential(&b, Diff::Del).norm() <= 1e-12 * (1.0 + b.norm()));
    }

    #[test]
    fn bracket_is_graded_antisymmetric(k in 0usize..4, seed in any::<u64>(), da in 0usize..2, db in 0usize..2) {
        let cs = case(k);
        let band = cs.geom.cutoff as i64 / 2;
        let a = random(&cs, seed, da, band);
        let b = random(&cs, seed ^ 0xabc, db, band);
        let ab = bracket_strict(&a, &b).unwrap();
        let ba = bracket_strict(&b, &a).unwrap();
        let sign = if (da * db) % 2 == 0 { -1.0 } else { 1.0 };
        prop_assert!(ab.distance(&ba.scale(C64::from(sign))) <= 1e-11 * (1.0 + ab.norm()));
    }

    #[test]
    fn leibniz_rule(k in 0usize..4, seed in any::<u64>(), da in 0usize..2, db in 0usize..2) {
        let cs = case(k);
        let band = cs.geom.cutoff as i64 / 2;
        let a = random(&cs, seed, da, band);
        let b = random(&cs, seed ^ 0x123, db, band);
        let lhs = differential(&bracket_strict(&a, &b).unwrap(), Diff::D);
        let s = if da % 2 == 0 { 1.0 } else { -1.0 };
        let rhs = bracket_strict(&differential(&a, Diff::D), &b).unwrap()
            .add(&bracket_strict(&a, &differential(&b, Diff::D)).unwrap().scale(C64::from(s)));
        prop_assert!(lhs.distance(&rhs) <= 1e-9 * (1.0 + a.norm() * b.norm()));
    }
}

#[test]
fn single_modes_have_exact_symbols() {
    let geom = elliptic_curve(c(0.0, 1.0), 3).unwrap();
    let f = mode_form(&geom, &[1, 1], 0, 0);
    let df = differential(&f, Diff::Del);
    let fi = df.frame_index(0b01).unwrap();
    let got = df.get(fi, 0, 0, geom.mode_index(&[1, 1]).unwrap());
    // ∂_z e^{2πi(x+y)} = πi(1 − i)·e^{2πi(x+y)}
    let want = c(0.0, PI) * c(1.0, -1.0);
    assert!((got - want).norm() < 1e-14);
}
