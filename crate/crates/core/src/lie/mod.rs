//! Solvable matrix groups `G = N ⋊ S` in upper triangular realizations.
//!
//! Three families are built: the full triangular group `T_n`, and the Borel
//! subgroups of `Sp_{2n}` and `SO_m` realized through antidiagonal bilinear
//! forms, so that the Borel subgroup is the upper triangular part of the
//! classical group.

mod certificate;
mod element;

pub use certificate::{
    certify, hodge_certificate, verify_certificate, CertCheck, CertificateReport, CertificateStep,
    HodgeCertificate, Modification, ModificationKind, QMat, Terminal, Verdict,
};
pub use element::{
    adjoint, bracket, exp_element, log_unipotent, semidirect_split, AlgebraElement, GroupElement,
};

use crate::error::{Error, Result};
use crate::linalg::{commutator, fnorm, rank, unit, CMat, C64, ONE, ZERO};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Largest ambient matrix size a group may be built with.
pub const MAX_AMBIENT: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", content = "size")]
pub enum Family {
    /// Invertible upper triangular `n×n` matrices.
    Triangular(usize),
    /// Borel subgroup of `Sp_{2n}`; the payload is the ambient size `2n`.
    BorelSp(usize),
    /// Borel subgroup of `SO_m`; the payload is the ambient size `m`.
    BorelSO(usize),
}

impl Family {
    pub fn ambient_dim(&self) -> usize {
        match *self {
            Family::Triangular(n) | Family::BorelSp(n) | Family::BorelSO(n) => n,
        }
    }

    /// Parses names such as `T3`, `Triangular(3)`, `BorelSp(4)`, `Sp4`, `SO5`.
    pub fn parse(family: &str, size: usize) -> std::result::Result<Family, String> {
        let key: String = family
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "t" | "triangular" | "borelgl" | "gl" => Ok(Family::Triangular(size)),
            "sp" | "borelsp" | "c" => Ok(Family::BorelSp(size)),
            "so" | "borelso" | "b" | "d" => Ok(Family::BorelSO(size)),
            _ => Err(family.to_string()),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Triangular(n) => write!(f, "Triangular({n})"),
            Family::BorelSp(n) => write!(f, "BorelSp({n})"),
            Family::BorelSO(n) => write!(f, "BorelSO({n})"),
        }
    }
}

/// The maximal compact torus `K ≅ U(1)^rank` inside `S`.
#[derive(Clone, Debug)]
pub struct CompactForm {
    pub rank: usize,
    /// Real diagonal generators `H`; `K = exp(i·span_ℝ H)`.
    pub generators: Vec<CMat>,
}

/// A solvable matrix group with its decomposition data.
#[derive(Clone, Debug)]
pub struct GroupSpec {
    pub family: Family,
    pub ambient_dim: usize,
    /// Basis of `𝔫`, one normalized root vector per positive root.
    pub nilpotent_basis: Vec<CMat>,
    /// Basis of `𝔰`, real diagonal matrices.
    pub torus_basis: Vec<CMat>,
    /// Lower central series depth of each `nilpotent_basis` element.
    pub filtration_level: Vec<i32>,
    pub compact_form: CompactForm,
    /// Integer grading; entry `(i,j)` has level `weights[i] - weights[j]`.
    pub weights: Vec<i32>,
    /// Antidiagonal form `J` with `𝔤 = {X upper : XᵀJ + JX = 0}`.
    pub form: Option<CMat>,
    /// Abelian unipotent normal subalgebra peeled first by the certificate.
    pub abelian_step: Vec<CMat>,
    leads: Vec<(usize, usize)>,
    pattern: Vec<bool>,
}

impl PartialEq for GroupSpec {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family
    }
}

impl GroupSpec {
    pub fn n(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.nilpotent_basis.len() + self.torus_basis.len()
    }

    pub fn rank(&self) -> usize {
        self.torus_basis.len()
    }

    /// Full basis of `𝔤`: nilpotent elements first.
    pub fn basis(&self) -> Vec<CMat> {
        let mut b = self.nilpotent_basis.clone();
        b.extend(self.torus_basis.iter().cloned());
        b
    }

    /// Entry that carries the coordinate of each basis element of [`Self::basis`].
    pub fn lead_entries(&self) -> &[(usize, usize)] {
        &self.leads
    }

    /// Whether entry `(i,j)` may be nonzero in `𝔤`.
    pub fn allowed(&self, i: usize, j: usize) -> bool {
        self.pattern[i * self.ambient_dim + j]
    }

    pub fn entry_level(&self, i: usize, j: usize) -> i32 {
        self.weights[i] - self.weights[j]
    }

    pub fn max_level(&self) -> i32 {
        self.filtration_level.iter().copied().max().unwrap_or(0)
    }

    /// `θ(X) = −J⁻¹XᵀJ`; the identity for the triangular family.
    pub fn involution(&self, x: &CMat) -> CMat {
        match &self.form {
            None => x.clone(),
            Some(j) => {
                let jinv = j.clone().try_inverse().expect("form is invertible");
                -(jinv * x.transpose() * j)
            }
        }
    }

    /// Deviation of `x` from `𝔤`: zero pattern violations plus `‖θX − X‖`.
    pub fn algebra_defect(&self, x: &CMat) -> f64 {
        let n = self.ambient_dim;
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if !self.allowed(i, j) {
                    off += x[(i, j)].norm_sqr();
                }
            }
        }
        let rel = if self.form.is_some() { fnorm(&(self.involution(x) - x)).powi(2) } else { 0.0 };
        (off + rel).sqrt()
    }

    pub fn contains_algebra(&self, x: &CMat, tol: f64) -> bool {
        x.nrows() == self.ambient_dim
            && self.algebra_defect(x) <= tol * (1.0 + fnorm(x))
    }

    /// Orthogonal projection onto `𝔤` (pattern, then symmetrization under `θ`).
    pub fn project_algebra(&self, x: &CMat) -> CMat {
        let n = self.ambient_dim;
        let mut y = x.clone();
        for i in 0..n {
            for j in 0..n {
                if !self.allowed(i, j) {
                    y[(i, j)] = ZERO;
                }
            }
        }
        if self.form.is_some() {
            y = (self.involution(&y) + &y) * C64::from(0.5);
        }
        y
    }

    /// Coordinates of `x` in [`Self::basis`].
    pub fn coordinates(&self, x: &CMat) -> Vec<C64> {
        self.leads.iter().map(|&(i, j)| x[(i, j)]).collect()
    }

    pub fn from_coordinates(&self, coords: &[C64]) -> CMat {
        let n = self.ambient_dim;
        let mut out = CMat::zeros(n, n);
        for (b, c) in self.basis().iter().zip(coords) {
            out += b * *c;
        }
        out
    }

    /// Membership in `G`: upper triangular with nonzero diagonal, and `gᵀJg = J`.
    pub fn group_defect(&self, g: &CMat) -> Option<f64> {
        let n = self.ambient_dim;
        if g.nrows() != n || (0..n).any(|i| g[(i, i)] == ZERO) {
            return None;
        }
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..i {
                off += g[(i, j)].norm_sqr();
            }
        }
        if let Some(j) = &self.form {
            off += fnorm(&(g.transpose() * j * g - j)).powi(2);
        }
        Some(off.sqrt())
    }

    /// Checks the structural invariants exactly on the basis.
    pub fn check_invariants(&self) -> Result<()> {
        let nb = &self.nilpotent_basis;
        let all = self.basis();
        let span_n = stack(nb);
        let rank_n = rank(&span_n, 1e-12);
        for x in nb {
            for y in &all {
                let br = commutator(x, y);
                if fnorm(&br) > 0.0 && rank(&stack_with(nb, &br), 1e-12) != rank_n {
                    return Err(Error::UnsupportedGroup(format!(
                        "{}: nilpotent part is not an ideal",
                        self.family
                    )));
                }
            }
        }
        for x in &self.torus_basis {
            for y in &self.torus_basis {
                if fnorm(&commutator(x, y)) != 0.0 {
                    return Err(Error::UnsupportedGroup(format!("{}: 𝔰 not abelian", self.family)));
                }
            }
        }
        if rank(&stack(&all), 1e-12) != all.len() {
            return Err(Error::UnsupportedGroup(format!("{}: sum is not direct", self.family)));
        }
        for (a, x) in nb.iter().enumerate() {
            for (b, y) in nb.iter().enumerate() {
                let br = commutator(x, y);
                let lvl = self.filtration_level[a] + self.filtration_level[b];
                let coords = self.coordinates(&br);
                for (k, cf) in coords.iter().enumerate().take(nb.len()) {
                    if cf.norm() > 0.0 && self.filtration_level[k] < lvl {
                        return Err(Error::UnsupportedGroup(format!(
                            "{}: filtration not respected",
                            self.family
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn stack(mats: &[CMat]) -> CMat {
    let n2 = mats.first().map(|m| m.len()).unwrap_or(0);
    let mut out = CMat::zeros(mats.len(), n2);
    for (r, m) in mats.iter().enumerate() {
        for (k, z) in m.iter().enumerate() {
            out[(r, k)] = *z;
        }
    }
    out
}

fn stack_with(mats: &[CMat], extra: &CMat) -> CMat {
    let mut v = mats.to_vec();
    v.push(extra.clone());
    stack(&v)
}

fn antidiagonal(n: usize, symplectic: bool) -> CMat {
    let mut j = CMat::zeros(n, n);
    for i in 0..n {
        let sign = if symplectic && i >= n / 2 { -1.0 } else { 1.0 };
        j[(i, n - 1 - i)] = C64::from(sign);
    }
    j
}

/// Builds the group with verified invariants.
pub fn build_group(family: Family) -> Result<GroupSpec> {
    let n = family.ambient_dim();
    let spec = match family {
        Family::Triangular(k) if (1..=MAX_AMBIENT).contains(&k) => {
            let weights: Vec<i32> = (0..n).map(|i| (n - i) as i32).collect();
            build_from_form(family, None, weights)
        }
        Family::BorelSp(k) if k % 2 == 0 && (2..=MAX_AMBIENT).contains(&k) => {
            let h = k / 2;
            // doubled weights keep the grading integral; halved afterwards
            let weights: Vec<i32> = (0..n)
                .map(|i| if i < h { (2 * (h - i) - 1) as i32 } else { -((2 * (i - h) + 1) as i32) })
                .collect();
            let mut spec = build_from_form(family, Some(antidiagonal(n, true)), weights)?;
            spec.filtration_level.iter_mut().for_each(|l| *l /= 2);
            spec.weights.iter_mut().for_each(|w| *w = (*w + 1).div_euclid(2));
            Ok(spec)
        }
        Family::BorelSO(k) if (3..=MAX_AMBIENT).contains(&k) => {
            let h = k / 2;
            let weights: Vec<i32> = if k % 2 == 1 {
                (0..n).map(|i| h as i32 - i as i32).collect()
            } else {
                (0..n)
                    .map(|i| if i < h { (h - 1 - i) as i32 } else { -((i - h) as i32) })
                    .collect()
            };
            build_from_form(family, Some(antidiagonal(n, false)), weights)
        }
        _ => Err(Error::UnsupportedGroup(format!(
            "{family}: sizes up to {MAX_AMBIENT} are supported (even for Sp, at least 3 for SO)"
        ))),
    }?;
    spec.check_invariants()?;
    Ok(spec)
}

fn build_from_form(family: Family, form: Option<CMat>, weights: Vec<i32>) -> Result<GroupSpec> {
    let n = family.ambient_dim();
    let theta = |x: &CMat| -> CMat {
        match &form {
            None => x.clone(),
            Some(j) => {
                let jinv = j.clone().try_inverse().expect("form is invertible");
                -(jinv * x.transpose() * j)
            }
        }
    };
    let mut seen = vec![false; n * n];
    let mut nil = Vec::new();
    let mut nil_leads = Vec::new();
    let mut levels = Vec::new();
    let mut tor = Vec::new();
    let mut tor_leads = Vec::new();
    for d in 0..n {
        for i in 0..n - d {
            let j = i + d;
            if seen[i * n + j] {
                continue;
            }
            let e = unit(n, i, j);
            let v = if form.is_some() { &e + theta(&e) } else { e };
            for (k, z) in v.iter().enumerate() {
                if *z != ZERO {
                    // column major storage
                    seen[(k % n) * n + k / n] = true;
                }
            }
            if fnorm(&v) == 0.0 {
                continue;
            }
            let v = &v / v[(i, j)];
            if d == 0 {
                tor.push(v);
                tor_leads.push((i, i));
            } else {
                nil.push(v);
                nil_leads.push((i, j));
                levels.push(weights[i] - weights[j]);
            }
        }
    }
    let mut pattern = vec![false; n * n];
    for m in nil.iter().chain(tor.iter()) {
        for i in 0..n {
            for j in 0..n {
                if m[(i, j)] != ZERO {
                    pattern[i * n + j] = true;
                }
            }
        }
    }
    let abelian_step = match family {
        Family::Triangular(_) => nil
            .iter()
            .zip(&nil_leads)
            .filter(|(_, &(_, j))| j == n - 1)
            .map(|(m, _)| m.clone())
            .collect(),
        Family::BorelSp(_) => nil
            .iter()
            .zip(&nil_leads)
            .filter(|(_, &(i, j))| i < n / 2 && j >= n / 2)
            .map(|(m, _)| m.clone())
            .collect(),
        Family::BorelSO(_) => nil
            .iter()
            .zip(&nil_leads)
            .filter(|(_, &(i, _))| i == 0)
            .map(|(m, _)| m.clone())
            .collect(),
    };
    let compact_form = CompactForm { rank: tor.len(), generators: tor.clone() };
    let mut leads = nil_leads;
    leads.extend(tor_leads);
    Ok(GroupSpec {
        family,
        ambient_dim: n,
        nilpotent_basis: nil,
        torus_basis: tor,
        filtration_level: levels,
        compact_form,
        weights,
        form,
        abelian_step,
        leads,
        pattern,
    })
}

/// Identity matrix of the ambient size.
pub fn identity(spec: &GroupSpec) -> CMat {
    CMat::identity(spec.ambient_dim, spec.ambient_dim) * ONE
}
