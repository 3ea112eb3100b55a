use super::equivalence::{equivalent_harmonic, Decision};
use crate::derham::TwistContext;
use crate::error::{Error, Result};
use crate::lie::{hodge_certificate, verify_certificate};
use crate::linalg::{self, c, CMat, C64, ZERO};
use crate::sample;
use crate::torus::frame::{self, Mask};
use crate::torus::form::entries;
use crate::torus::{bracket, LieForm};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub const CONE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    /// `(1,0)`-part in `𝔤`, `(0,1)`-part in `𝔫`.
    Full,
    /// Both parts in `𝔫`.
    Unipotent,
}

/// `Q_c(x) = Σ_{a,b} coeffs[c][a][b] x_a x_b`: the harmonic part of `[ψ,ψ]`.
#[derive(Clone, Debug)]
pub struct ConstraintTensor {
    /// Harmonic 2-form component names, `E_ij·frame`.
    pub components: Vec<String>,
    pub coeffs: Vec<Vec<Vec<C64>>>,
    /// Number of independent quadratic equations.
    pub rank: usize,
    /// Row-reduced equations in the coordinate names.
    pub equations: Vec<String>,
}

impl ConstraintTensor {
    pub fn evaluate(&self, x: &[C64]) -> Vec<C64> {
        self.coeffs
            .iter()
            .map(|t| {
                let mut s = ZERO;
                for (a, row) in t.iter().enumerate() {
                    for (b, z) in row.iter().enumerate() {
                        if *z != ZERO {
                            s += z * x[a] * x[b];
                        }
                    }
                }
                s
            })
            .collect()
    }

    pub fn residual(&self, x: &[C64]) -> f64 {
        self.evaluate(x).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn jacobian(&self, x: &[C64]) -> CMat {
        let d = x.len();
        let mut j = CMat::zeros(self.coeffs.len(), d);
        for (ci, t) in self.coeffs.iter().enumerate() {
            for a in 0..d {
                let mut s = ZERO;
                for b in 0..d {
                    s += (t[a][b] + t[b][a]) * x[b];
                }
                j[(ci, a)] = s;
            }
        }
        j
    }
}

#[derive(Clone, Debug)]
pub struct Symmetry {
    /// Dimension of the group of flat sections.
    pub dimension: usize,
    /// Entries a flat section may occupy.
    pub entries: Vec<(usize, usize)>,
    pub description: String,
}

#[derive(Clone, Debug)]
pub struct Sample {
    pub coords: Vec<C64>,
    pub residual: f64,
    /// Index of the first sample in the same orbit.
    pub orbit: usize,
    /// Whether every comparison made for the label was decided.
    pub decided: bool,
}

#[derive(Clone, Debug)]
pub struct ModuliDescription {
    pub sector: Sector,
    pub names: Vec<String>,
    pub ambient_basis: Vec<LieForm>,
    pub constraints: ConstraintTensor,
    pub symmetry: Symmetry,
    pub samples: Vec<Sample>,
}

impl ModuliDescription {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_basis.len()
    }

    /// `Σ x_a e_a`.
    pub fn form(&self, x: &[C64]) -> LieForm {
        let mut out = self.ambient_basis[0].zeros_like(1);
        for (e, z) in self.ambient_basis.iter().zip(x) {
            out = out.add(&e.scale(*z));
        }
        out
    }
}

fn coordinate_name(kind: char, i: usize, j: usize, k: usize, g: usize) -> String {
    if g == 1 {
        format!("{kind}{}{}", i + 1, j + 1)
    } else {
        format!("{kind}{}{}_{}", i + 1, j + 1, k + 1)
    }
}

/// Harmonic ambient space of the sector, with coordinate names.
fn ambient(ctx: &TwistContext, sector: Sector) -> (Vec<String>, Vec<LieForm>) {
    let g = ctx.geom.g;
    let spec = &ctx.spec;
    let mut items: Vec<(usize, usize, usize, usize, String, LieForm)> = Vec::new();
    for (x, &(i, j)) in spec.basis().iter().zip(spec.lead_entries()) {
        if !ctx.shift.is_trivial_entry(i, j) {
            continue;
        }
        let nil = i < j;
        for k in 0..g {
            for (part, kind, mask) in [(0, 'a', 1u8 << k), (1, 'b', 1u8 << (g + k))] {
                let keep = match (sector, part) {
                    (Sector::Full, 0) => true,
                    _ => nil,
                };
                if !keep {
                    continue;
                }
                let f = LieForm::constant(ctx.geom.clone(), spec.clone(), ctx.shift.clone(), 1, &[(mask, x.clone())])
                    .expect("degree one frame");
                items.push((part, k, i, j, coordinate_name(kind, i, j, k, g), f));
            }
        }
    }
    items.sort_by_key(|t| (t.0, t.2, t.3, t.1));
    items.into_iter().map(|t| (t.4, t.5)).unzip()
}

fn constraint_tensor(basis: &[LieForm], names: &[String], ctx: &TwistContext) -> Result<ConstraintTensor> {
    let g = ctx.geom.g;
    let n = ctx.spec.ambient_dim;
    let small = ctx.geom.with_cutoff(1)?;
    let reduced: Vec<LieForm> = basis.iter().map(|b| b.rebase(small.clone()).0).collect();
    let masks: Vec<Mask> = frame::frames(g, 2);
    let mut comps: Vec<(usize, usize, usize)> = Vec::new();
    for (fi, _) in masks.iter().enumerate() {
        for (i, j) in entries(n) {
            if ctx.shift.is_trivial_entry(i, j) && ctx.spec.allowed(i, j) {
                comps.push((fi, i, j));
            }
        }
    }
    let d = basis.len();
    let mut coeffs = vec![vec![vec![ZERO; d]; d]; comps.len()];
    let zero = small.zero_mode();
    for a in 0..d {
        for b in a..d {
            let br = bracket(&reduced[a], &reduced[b])?.harmonic_part();
            let fidx: Vec<usize> = masks.iter().map(|m| br.frame_index(*m).expect("frame")).collect();
            for (ci, &(fi, i, j)) in comps.iter().enumerate() {
                let v = br.get(fidx[fi], i, j, zero);
                if v == ZERO {
                    continue;
                }
                coeffs[ci][a][b] = v;
                coeffs[ci][b][a] = v;
            }
        }
    }
    let components = comps
        .iter()
        .map(|&(fi, i, j)| format!("E{}{}·{}", i + 1, j + 1, frame::frame_name(g, masks[fi])))
        .collect();
    let (rank, equations) = normal_form(&coeffs, names);
    Ok(ConstraintTensor { components, coeffs, rank, equations })
}

/// Gauss–Jordan reduction of the equations as linear forms in the monomials.
fn normal_form(coeffs: &[Vec<Vec<C64>>], names: &[String]) -> (usize, Vec<String>) {
    let d = names.len();
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|a| (a..d).map(move |b| (a, b))).collect();
    let mut m = CMat::zeros(coeffs.len(), pairs.len());
    for (ci, t) in coeffs.iter().enumerate() {
        for (p, &(a, b)) in pairs.iter().enumerate() {
            m[(ci, p)] = if a == b { t[a][a] } else { t[a][b] + t[b][a] };
        }
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tol = 1e-10 * scale.max(1e-300);
    let mut row = 0;
    for col in 0..m.ncols() {
        if row == m.nrows() {
            break;
        }
        let (piv, best) = (row..m.nrows())
            .map(|r| (r, m[(r, col)].norm()))
            .fold((row, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= tol {
            continue;
        }
        m.swap_rows(row, piv);
        let p = m[(row, col)];
        for k in 0..m.ncols() {
            m[(row, k)] /= p;
        }
        for r in 0..m.nrows() {
            if r != row {
                let f = m[(r, col)];
                if f != ZERO {
                    for k in 0..m.ncols() {
                        let v = m[(row, k)];
                        m[(r, k)] -= f * v;
                    }
                }
            }
        }
        row += 1;
    }
    let equations = (0..row)
        .map(|r| {
            let terms: Vec<(usize, usize, C64)> = pairs
                .iter()
                .enumerate()
                .filter(|(p, _)| m[(r, *p)].norm() > 1e-10)
                .map(|(p, &(a, b))| (a, b, m[(r, p)]))
                .collect();
            format_equation(&terms, names)
        })
        .collect();
    (row, equations)
}

fn format_coef(z: C64) -> String {
    let snap = |x: f64| if (x - x.round()).abs() < 1e-10 { x.round() } else { x };
    let (re, im) = (snap(z.re), snap(z.im));
    if im == 0.0 {
        format!("{re}")
    } else if re == 0.0 {
        format!("{im}i")
    } else {
        format!("({re}{:+}i)", im)
    }
}

/// `Σ c·u` with unit coefficients printed bare.
fn format_linear(terms: &[(String, C64)]) -> String {
    let mut out = String::new();
    for (k, (name, z)) in terms.iter().enumerate() {
        let real_sign = z.im.abs() < 1e-10;
        let (sign, mag) = if real_sign && z.re < 0.0 { ("-", -*z) } else { ("+", *z) };
        let coef = if (mag - C64::from(1.0)).norm() < 1e-10 { String::new() } else { format!("{}*", format_coef(mag)) };
        if k == 0 {
            out.push_str(&format!("{}{coef}{name}", if sign == "-" { "-" } else { "" }));
        } else {
            out.push_str(&format!(" {sign} {coef}{name}"));
        }
    }
    out
}

/// One equation, factored as `(linear)*x` when a variable divides every monomial.
fn format_equation(terms: &[(usize, usize, C64)], names: &[String]) -> String {
    let lead = terms[0].2;
    let terms: Vec<(usize, usize, C64)> = terms.iter().map(|&(a, b, z)| (a, b, z / lead)).collect();
    let common = (0..names.len()).rev().find(|&v| terms.iter().all(|&(a, b, _)| a == v || b == v));
    match common {
        Some(v) if terms.len() > 1 => {
            let lin: Vec<(String, C64)> =
                terms.iter().map(|&(a, b, z)| (names[if a == v { b } else { a }].clone(), z)).collect();
            format!("({})*{} = 0", format_linear(&lin), names[v])
        }
        _ => {
            let mono: Vec<(String, C64)> = terms
                .iter()
                .map(|&(a, b, z)| {
                    let name = if a == b { format!("{}^2", names[a]) } else { format!("{}*{}", names[a], names[b]) };
                    (name, z)
                })
                .collect();
            format!("{} = 0", format_linear(&mono))
        }
    }
}

fn symmetry(ctx: &TwistContext) -> Symmetry {
    let spec = &ctx.spec;
    let dimension = spec.lead_entries().iter().filter(|&&(i, j)| ctx.shift.is_trivial_entry(i, j)).count();
    let entries: Vec<(usize, usize)> = entries(spec.ambient_dim)
        .into_iter()
        .filter(|&(i, j)| ctx.shift.is_trivial_entry(i, j))
        .collect();
    let description = if ctx.is_trivial() {
        format!("constant elements of {} acting by conjugation", spec.family)
    } else {
        format!("elements of {} commuting with the holonomy character, acting by conjugation", spec.family)
    };
    Symmetry { dimension, entries, description }
}

/// Projects a random start onto the cone `Q = 0` by Gauss–Newton steps.
fn project_to_cone<R: Rng>(t: &ConstraintTensor, d: usize, rng: &mut R) -> Option<(Vec<C64>, f64)> {
    let mut x: Vec<C64> = (0..d)
        .map(|_| if rng.gen_bool(0.3) { ZERO } else { c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) })
        .collect();
    if t.coeffs.is_empty() {
        return Some((x, 0.0));
    }
    for _ in 0..100 {
        let r = t.evaluate(&x);
        let norm = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 1e-14 {
            break;
        }
        let j = t.jacobian(&x);
        let rhs = CMat::from_column_slice(r.len(), 1, &r);
        let step = linalg::lstsq(&j, &rhs, 1e-12);
        for (xi, s) in x.iter_mut().zip(step.iter()) {
            *xi -= s;
        }
    }
    let res = t.residual(&x);
    (res <= CONE_TOL).then_some((x, res))
}

/// Harmonic ambient space, quadratic constraints, symmetry group and
/// labelled sample points of the moduli of flat connections in `ctx`.
pub fn admissible_set(ctx: &TwistContext, sector: Sector, samples: usize, seed: u64) -> Result<ModuliDescription> {
    let cert = hodge_certificate(&ctx.spec)?;
    if !verify_certificate(&cert).passed() {
        return Err(Error::UnsupportedGroup(format!("{} has no verified Hodge certificate", ctx.spec.family)));
    }
    let (names, basis) = ambient(ctx, sector);
    if basis.is_empty() {
        return Err(Error::Precondition("the ambient space is zero".into()));
    }
    let constraints = constraint_tensor(&basis, &names, ctx)?;
    let mut desc = ModuliDescription {
        sector,
        names,
        ambient_basis: basis,
        constraints,
        symmetry: symmetry(ctx),
        samples: Vec::new(),
    };
    let mut rng = sample::rng(seed);
    let d = desc.ambient_dim();
    let mut attempts = 0;
    while desc.samples.len() < samples && attempts < 20 * samples.max(1) {
        attempts += 1;
        let Some((coords, residual)) = project_to_cone(&desc.constraints, d, &mut rng) else { continue };
        let psi = desc.form(&coords);
        let mut orbit = desc.samples.len();
        let mut decided = true;
        for (k, s) in desc.samples.iter().enumerate() {
            if s.orbit != k {
                continue;
            }
            let e = equivalent_harmonic(&desc.form(&s.coords), &psi, seed ^ k as u64)?;
            match e.decision {
                Decision::Equivalent => {
                    orbit = k;
                    break;
                }
                Decision::Undecided => decided = false,
                Decision::Inequivalent => {}
            }
        }
        desc.samples.push(Sample { coords, residual, orbit, decided });
    }
    Ok(desc)
}

/// Coordinates of a harmonic form in the ambient basis, with the distance
/// of the form from the ambient span.
pub fn coordinates(desc: &ModuliDescription, psi: &LieForm) -> (Vec<C64>, f64) {
    let z = psi.geom.zero_mode();
    let x: Vec<C64> = desc
        .ambient_basis
        .iter()
        .map(|e| {
            let (fi, i, j) = lead_of(e);
            psi.get(fi, i, j, z) / e.get(fi, i, j, z)
        })
        .collect();
    let back = desc.form(&x);
    (x, back.distance(psi))
}

fn lead_of(e: &LieForm) -> (usize, usize, usize) {
    let z = e.geom.zero_mode();
    for fi in 0..e.frames().len() {
        let lead = e.spec.lead_entries().iter().find(|&&(i, j)| e.get(fi, i, j, z) != ZERO);
        if let Some(&(i, j)) = lead {
            return (fi, i, j);
        }
    }
    unreachable!("basis forms are nonzero")
}
