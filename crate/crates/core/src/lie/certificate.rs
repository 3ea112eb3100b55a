//! Hodge-property certificates: chains of abelian unipotent ideals checked
//! in exact rational arithmetic.

use super::{build_group, Family, GroupSpec};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use num_rational::Rational64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::HashMap;

/// Square rational matrix, row major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMat {
    pub n: usize,
    pub data: Vec<Rational64>,
}

impl QMat {
    pub fn zeros(n: usize) -> Self {
        QMat { n, data: vec![Rational64::from_integer(0); n * n] }
    }

    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n);
        m.data[i * n + j] = Rational64::from_integer(1);
        m
    }

    /// Exact conversion; entries must be real integers or halves.
    pub fn from_cmat(m: &CMat) -> Result<Self> {
        let n = m.nrows();
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let z = m[(i, j)];
                let twice = 2.0 * z.re;
                if z.im != 0.0 || twice.fract() != 0.0 || twice.abs() > 1e12 {
                    return Err(Error::Format(format!("entry ({i},{j}) is not a small rational")));
                }
                out.data[i * n + j] = Rational64::new(twice as i64, 2);
            }
        }
        Ok(out)
    }

    pub fn get(&self, i: usize, j: usize) -> Rational64 {
        self.data[i * self.n + j]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| *x == Rational64::from_integer(0))
    }

    pub fn mul(&self, o: &QMat) -> QMat {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == Rational64::from_integer(0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * o.get(k, j);
                }
            }
        }
        out
    }

    pub fn sub(&self, o: &QMat) -> QMat {
        QMat { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() }
    }

    pub fn bracket(&self, o: &QMat) -> QMat {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j) == Rational64::from_integer(0)))
    }

    pub fn is_strictly_upper(&self) -> bool {
        (0..self.n).all(|i| (0..=i).all(|j| self.get(i, j) == Rational64::from_integer(0)))
    }
}

impl Serialize for QMat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> =
            (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j).to_string()).collect()).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QMat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<String>> = Vec::deserialize(d)?;
        let n = rows.len();
        let mut out = QMat::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(serde::de::Error::custom("matrix is not square"));
            }
            for (j, s) in row.iter().enumerate() {
                out.data[i * n + j] = s.parse().map_err(serde::de::Error::custom)?;
            }
        }
        Ok(out)
    }
}

/// Rank of a family of matrices viewed as vectors, by exact elimination.
fn span_rank(mats: &[&QMat]) -> usize {
    let Some(first) = mats.first() else { return 0 };
    let width = first.data.len();
    let mut rows: Vec<Vec<Rational64>> = mats.iter().map(|m| m.data.clone()).collect();
    let zero = Rational64::from_integer(0);
    let mut r = 0;
    for col in 0..width {
        let Some(p) = (r..rows.len()).find(|&k| rows[k][col] != zero) else { continue };
        rows.swap(r, p);
        let pivot = rows[r][col];
        for k in 0..rows.len() {
            if k != r && rows[k][col] != zero {
                let f = rows[k][col] / pivot;
                for c in col..width {
                    let v = rows[r][c];
                    rows[k][c] -= f * v;
                }
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

fn in_span(basis: &[QMat], v: &QMat) -> bool {
    if v.is_zero() {
        return true;
    }
    let refs: Vec<&QMat> = basis.iter().collect();
    let mut with = refs.clone();
    with.push(v);
    span_rank(&with) == span_rank(&refs)
}

fn same_span(a: &[QMat], b: &[QMat]) -> bool {
    let ra: Vec<&QMat> = a.iter().collect();
    let rb: Vec<&QMat> = b.iter().collect();
    let mut both = ra.clone();
    both.extend(rb.iter().copied());
    let r = span_rank(&both);
    r == span_rank(&ra) && r == span_rank(&rb)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateStep {
    pub label: String,
    /// Basis of the algebra this step decomposes.
    pub ambient: Vec<QMat>,
    /// Abelian unipotent ideal.
    pub b: Vec<QMat>,
    /// Complementary subalgebra.
    pub a: Vec<QMat>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModificationKind {
    /// Quotient of the step's complement by a central subtorus.
    CentralQuotient,
    /// Restriction to a subtorus of `S`.
    SubtorusRestriction,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Modification {
    /// Index of the step whose complement is modified.
    pub step: usize,
    pub kind: ModificationKind,
    pub basis: Vec<QMat>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Terminal {
    Torus,
    KnownHodgeGroup(Family),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HodgeCertificate {
    pub family: Family,
    /// Basis of the Lie algebra being certified.
    pub algebra: Vec<QMat>,
    pub chain: Vec<CertificateStep>,
    pub terminal: Terminal,
    /// Algebra left after the last step and its modifications.
    pub terminal_algebra: Vec<QMat>,
    pub modifications: Vec<Modification>,
}

impl HodgeCertificate {
    pub fn b_dims(&self) -> Vec<usize> {
        self.chain.iter().map(|s| s.b.len()).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CertCheck {
    pub name: String,
    pub step: Option<usize>,
    pub pass: bool,
    pub violations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub checks: Vec<CertCheck>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn check(&self, name: &str) -> Option<&CertCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Outcome of asking for a certificate by family name.
#[derive(Clone, Debug)]
pub enum Verdict {
    Certified(Box<HodgeCertificate>, CertificateReport),
    Failed(Box<HodgeCertificate>, CertificateReport),
    /// No certificate is known; this never means the property fails.
    Unknown(String),
}

fn lookup(spec: &GroupSpec) -> Result<HashMap<(usize, usize), QMat>> {
    let mut out = HashMap::new();
    for (m, lead) in spec.basis().iter().zip(spec.lead_entries()) {
        out.insert(*lead, QMat::from_cmat(m)?);
    }
    Ok(out)
}

/// Peels the last column of a triangular block, one step per column.
fn triangular_chain(
    size: usize,
    lift: &dyn Fn(usize, usize) -> QMat,
    label: &str,
    steps: &mut Vec<CertificateStep>,
    mods: &mut Vec<Modification>,
) -> Vec<QMat> {
    let block = |k: usize| -> Vec<QMat> {
        let mut v = Vec::new();
        for j in 0..=k {
            for i in 0..=j {
                v.push(lift(i, j));
            }
        }
        v
    };
    for k in (1..size).rev() {
        let ambient = block(k);
        let b: Vec<QMat> = (0..k).map(|i| lift(i, k)).collect();
        let mut a = block(k - 1);
        a.push(lift(k, k));
        mods.push(Modification {
            step: steps.len(),
            kind: ModificationKind::CentralQuotient,
            basis: vec![lift(k, k)],
        });
        steps.push(CertificateStep { label: format!("{label}: column {}", k + 1), ambient, b, a });
    }
    if size == 0 {
        Vec::new()
    } else {
        vec![lift(0, 0)]
    }
}

/// Builds the certificate chain for a built group.
pub fn hodge_certificate(spec: &GroupSpec) -> Result<HodgeCertificate> {
    let n = spec.ambient_dim;
    let basis = lookup(spec)?;
    let algebra: Vec<QMat> = spec.basis().iter().map(QMat::from_cmat).collect::<Result<_>>()?;
    let mut chain = Vec::new();
    let mut mods = Vec::new();
    let terminal_algebra = match spec.family {
        Family::Triangular(_) => {
            triangular_chain(n, &|i, j| QMat::unit(n, i, j), "T", &mut chain, &mut mods)
        }
        Family::BorelSp(_) => {
            let h = n / 2;
            let u: Vec<QMat> = spec.abelian_step.iter().map(QMat::from_cmat).collect::<Result<_>>()?;
            let a: Vec<QMat> = spec
                .lead_entries()
                .iter()
                .filter(|(i, j)| *i < h && *j < h)
                .map(|l| basis[l].clone())
                .collect();
            chain.push(CertificateStep { label: "Siegel radical".into(), ambient: algebra.clone(), b: u, a });
            let lift = |i: usize, j: usize| basis[&(i, j)].clone();
            triangular_chain(h, &lift, "Levi T", &mut chain, &mut mods)
        }
        Family::BorelSO(_) => {
            let mut r = 0;
            let mut current = algebra.clone();
            while n - 2 * r >= 3 {
                let inner = |l: &(usize, usize)| l.0 > r && l.1 < n - 1 - r;
                let b: Vec<QMat> = spec
                    .lead_entries()
                    .iter()
                    .filter(|(i, j)| *i == r && *j > r && *j < n - r)
                    .map(|l| basis[l].clone())
                    .collect();
                let rest: Vec<QMat> =
                    spec.lead_entries().iter().filter(|l| inner(l)).map(|l| basis[l].clone()).collect();
                let central = basis[&(r, r)].clone();
                let mut a = rest.clone();
                a.push(central.clone());
                mods.push(Modification {
                    step: chain.len(),
                    kind: ModificationKind::CentralQuotient,
                    basis: vec![central],
                });
                chain.push(CertificateStep {
                    label: format!("isotropic line radical, SO({})", n - 2 * r),
                    ambient: current,
                    b,
                    a,
                });
                current = rest;
                r += 1;
            }
            current
        }
    };
    Ok(HodgeCertificate {
        family: spec.family,
        algebra,
        chain,
        terminal: Terminal::Torus,
        terminal_algebra,
        modifications: mods,
    })
}

fn push(checks: &mut Vec<CertCheck>, name: &str, step: Option<usize>, violations: usize) {
    checks.push(CertCheck { name: name.to_string(), step, pass: violations == 0, violations });
}

/// Checks every condition of the chain exactly; failures are reported, not raised.
pub fn verify_certificate(cert: &HodgeCertificate) -> CertificateReport {
    let mut checks = Vec::new();
    let first = cert.chain.first().map(|s| s.ambient.clone()).unwrap_or(cert.terminal_algebra.clone());
    push(&mut checks, "root_matches_algebra", None, usize::from(!same_span(&first, &cert.algebra)));
    for (k, step) in cert.chain.iter().enumerate() {
        let mut v = 0;
        for x in &step.b {
            for y in &step.b {
                if !x.bracket(y).is_zero() {
                    v += 1;
                }
            }
        }
        push(&mut checks, "b_abelian", Some(k), v);
        let v = step.b.iter().filter(|x| !x.is_strictly_upper()).count();
        push(&mut checks, "b_unipotent", Some(k), v);
        let mut v = 0;
        for x in &step.ambient {
            for y in &step.b {
                if !in_span(&step.b, &x.bracket(y)) {
                    v += 1;
                }
            }
        }
        push(&mut checks, "b_ideal", Some(k), v);
        let mut v = 0;
        for x in &step.a {
            for y in &step.a {
                if !in_span(&step.a, &x.bracket(y)) {
                    v += 1;
                }
            }
        }
        push(&mut checks, "a_subalgebra", Some(k), v);
        let mut all = step.b.clone();
        all.extend(step.a.iter().cloned());
        let refs: Vec<&QMat> = all.iter().collect();
        let direct = span_rank(&refs) == all.len() && same_span(&all, &step.ambient);
        push(&mut checks, "direct_sum", Some(k), usize::from(!direct));

        // what the next step must decompose
        let expected = step.a.clone();
        let mut removed: Vec<QMat> = Vec::new();
        for m in cert.modifications.iter().filter(|m| m.step == k) {
            let mut v = 0;
            for c in &m.basis {
                if !c.is_diagonal() || !in_span(&step.a, c) {
                    v += 1;
                }
                if m.kind == ModificationKind::CentralQuotient {
                    v += step.a.iter().filter(|x| !x.bracket(c).is_zero()).count();
                }
            }
            push(&mut checks, "modification_valid", Some(k), v);
            removed.extend(m.basis.iter().cloned());
        }
        let next =
            cert.chain.get(k + 1).map(|s| s.ambient.clone()).unwrap_or(cert.terminal_algebra.clone());
        if !removed.is_empty() {
            let mut joined = next.clone();
            joined.extend(removed.iter().cloned());
            let refs: Vec<&QMat> = joined.iter().collect();
            let ok = span_rank(&refs) == span_rank(&next.iter().collect::<Vec<_>>()) + removed.len()
                && same_span(&joined, &expected)
                && next.iter().all(|x| in_span(&expected, x));
            push(&mut checks, "chain_link", Some(k), usize::from(!ok));
        } else {
            push(&mut checks, "chain_link", Some(k), usize::from(!same_span(&next, &expected)));
        }
    }
    let term = &cert.terminal_algebra;
    let v = match &cert.terminal {
        Terminal::Torus => {
            let mut v = term.iter().filter(|x| !x.is_diagonal()).count();
            for x in term {
                v += term.iter().filter(|y| !x.bracket(y).is_zero()).count();
            }
            v
        }
        Terminal::KnownHodgeGroup(fam) => match build_group(*fam).and_then(|s| hodge_certificate(&s)) {
            Ok(c) if verify_certificate(&c).passed() && c.algebra.len() == term.len() => 0,
            _ => 1,
        },
    };
    push(&mut checks, "terminal", None, v);
    CertificateReport { checks }
}

/// Certificate lookup by family name; exceptional types give [`Verdict::Unknown`].
pub fn certify(family: &str, size: usize) -> Verdict {
    let fam = match Family::parse(family, size) {
        Ok(f) => f,
        Err(name) => {
            return Verdict::Unknown(format!("no matrix model or certificate is known for {name}"));
        }
    };
    let spec = match build_group(fam) {
        Ok(s) => s,
        Err(e) => return Verdict::Unknown(e.to_string()),
    };
    match hodge_certificate(&spec) {
        Ok(cert) => {
            let report = verify_certificate(&cert);
            if report.passed() {
                Verdict::Certified(Box::new(cert), report)
            } else {
                Verdict::Failed(Box::new(cert), report)
            }
        }
        Err(e) => Verdict::Unknown(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cert(f: Family) -> HodgeCertificate {
        hodge_certificate(&build_group(f).unwrap()).unwrap()
    }

    #[test]
    fn t1_is_a_torus() {
        let c = cert(Family::Triangular(1));
        assert!(c.chain.is_empty());
        assert_eq!(c.terminal, Terminal::Torus);
        assert!(verify_certificate(&c).passed());
    }

    #[test]
    fn t3_chain_dims() {
        let c = cert(Family::Triangular(3));
        assert_eq!(c.b_dims(), vec![2, 1]);
        assert!(verify_certificate(&c).passed());
    }

    #[test]
    fn sp4_chain() {
        let c = cert(Family::BorelSp(4));
        assert_eq!(c.b_dims(), vec![3, 1]);
        let r = verify_certificate(&c);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn all_supported_groups_certify() {
        for f in [
            Family::Triangular(2),
            Family::Triangular(4),
            Family::Triangular(6),
            Family::BorelSp(2),
            Family::BorelSp(6),
            Family::BorelSO(3),
            Family::BorelSO(4),
            Family::BorelSO(5),
            Family::BorelSO(6),
        ] {
            let r = verify_certificate(&cert(f));
            assert!(r.passed(), "{f}: {r:?}");
            assert_eq!(r.violations(), 0);
        }
    }

    #[test]
    fn tampered_single_step_fails_abelian_check() {
        let mut c = cert(Family::Triangular(3));
        let n = 3;
        let b = vec![QMat::unit(n, 0, 1), QMat::unit(n, 0, 2), QMat::unit(n, 1, 2)];
        let a = (0..n).map(|i| QMat::unit(n, i, i)).collect();
        c.chain = vec![CertificateStep { label: "tampered".into(), ambient: c.algebra.clone(), b, a }];
        c.modifications.clear();
        c.terminal_algebra = (0..n).map(|i| QMat::unit(n, i, i)).collect();
        let r = verify_certificate(&c);
        assert!(!r.check("b_abelian").unwrap().pass);
    }

    #[test]
    fn exceptional_is_unknown() {
        for name in ["F4", "E8", "E6", "G2"] {
            assert!(matches!(certify(name, 8), Verdict::Unknown(_)));
        }
    }

    #[test]
    fn json_roundtrip() {
        let c = cert(Family::BorelSO(5));
        let s = serde_json::to_string(&c).unwrap();
        let back: HodgeCertificate = serde_json::from_str(&s).unwrap();
        assert!(verify_certificate(&back).passed());
    }
}
