use super::GroupSpec;
use crate::error::{Error, Result};
use crate::linalg::{self, fnorm, is_strictly_upper, CMat, ZERO};
use std::sync::Arc;

const MEMBERSHIP_TOL: f64 = 1e-11;

/// An element of `𝔤`.
#[derive(Clone, Debug)]
pub struct AlgebraElement {
    pub matrix: CMat,
    pub spec: Arc<GroupSpec>,
}

/// An element of `G`.
#[derive(Clone, Debug)]
pub struct GroupElement {
    pub matrix: CMat,
    pub spec: Arc<GroupSpec>,
}

fn same(a: &Arc<GroupSpec>, b: &Arc<GroupSpec>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a.family == b.family {
        Ok(())
    } else {
        Err(Error::SpecMismatch(format!("{} vs {}", a.family, b.family)))
    }
}

impl AlgebraElement {
    /// Validates the zero pattern exactly and the form relation to tolerance.
    pub fn new(spec: Arc<GroupSpec>, matrix: CMat) -> Result<Self> {
        let n = spec.ambient_dim;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::NotInAlgebra(format!("expected {n}×{n}")));
        }
        for i in 0..n {
            for j in 0..n {
                if !spec.allowed(i, j) && matrix[(i, j)] != ZERO {
                    return Err(Error::NotInAlgebra(format!("entry ({},{}) must vanish", i + 1, j + 1)));
                }
            }
        }
        if !spec.contains_algebra(&matrix, MEMBERSHIP_TOL) {
            return Err(Error::NotInAlgebra(format!(
                "violates the {} relation by {:e}",
                spec.family,
                spec.algebra_defect(&matrix)
            )));
        }
        Ok(AlgebraElement { matrix, spec })
    }

    pub fn zero(spec: Arc<GroupSpec>) -> Self {
        let n = spec.ambient_dim;
        AlgebraElement { matrix: CMat::zeros(n, n), spec }
    }

    pub fn is_nilpotent(&self) -> bool {
        is_strictly_upper(&self.matrix)
    }
}

impl GroupElement {
    pub fn new(spec: Arc<GroupSpec>, matrix: CMat) -> Result<Self> {
        match spec.group_defect(&matrix) {
            None => Err(Error::NotInGroup("diagonal entry vanishes or wrong size".into())),
            Some(d) if d > MEMBERSHIP_TOL * (1.0 + fnorm(&matrix)).powi(2) => {
                Err(Error::NotInGroup(format!("defect {d:e}")))
            }
            Some(_) => Ok(GroupElement { matrix, spec }),
        }
    }

    pub fn identity(spec: Arc<GroupSpec>) -> Self {
        let m = super::identity(&spec);
        GroupElement { matrix: m, spec }
    }

    pub fn inverse(&self) -> Result<GroupElement> {
        let inv = linalg::inverse_upper(&self.matrix).ok_or(Error::Singular)?;
        Ok(GroupElement { matrix: inv, spec: self.spec.clone() })
    }

    pub fn mul(&self, other: &GroupElement) -> Result<GroupElement> {
        same(&self.spec, &other.spec)?;
        Ok(GroupElement { matrix: &self.matrix * &other.matrix, spec: self.spec.clone() })
    }
}

/// `[X, Y] = XY − YX`.
pub fn bracket(x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
    same(&x.spec, &y.spec)?;
    let m = linalg::commutator(&x.matrix, &y.matrix);
    Ok(AlgebraElement { matrix: x.spec.project_pattern(m), spec: x.spec.clone() })
}

/// Matrix exponential; exact terminating series on `𝔫`.
pub fn exp_element(x: &AlgebraElement) -> GroupElement {
    GroupElement { matrix: linalg::exp_auto(&x.matrix), spec: x.spec.clone() }
}

pub fn log_unipotent(g: &GroupElement) -> Result<AlgebraElement> {
    let n = g.matrix.nrows();
    let dev = (0..n).map(|i| (g.matrix[(i, i)] - 1.0).norm()).fold(0.0, f64::max);
    if dev > 1e-12 {
        return Err(Error::NotUnipotent(dev));
    }
    let log = linalg::log_unipotent(&g.matrix);
    Ok(AlgebraElement { matrix: g.spec.project_pattern(log), spec: g.spec.clone() })
}

/// `X = X_𝔫 + X_𝔰` with `X_𝔰` the diagonal part.
pub fn semidirect_split(x: &AlgebraElement) -> (AlgebraElement, AlgebraElement) {
    let n = x.matrix.nrows();
    let mut s = CMat::zeros(n, n);
    for i in 0..n {
        s[(i, i)] = x.matrix[(i, i)];
    }
    let nil = &x.matrix - &s;
    (
        AlgebraElement { matrix: nil, spec: x.spec.clone() },
        AlgebraElement { matrix: s, spec: x.spec.clone() },
    )
}

/// `Ad g(X) = gXg⁻¹`.
pub fn adjoint(g: &GroupElement, x: &AlgebraElement) -> Result<AlgebraElement> {
    same(&g.spec, &x.spec)?;
    let inv = g.inverse()?;
    let m = &g.matrix * &x.matrix * &inv.matrix;
    Ok(AlgebraElement { matrix: x.spec.project_pattern(m), spec: x.spec.clone() })
}

impl GroupSpec {
    /// Zeroes entries outside the structural pattern.
    pub fn project_pattern(&self, mut m: CMat) -> CMat {
        let n = self.ambient_dim;
        for i in 0..n {
            for j in 0..n {
                if !self.allowed(i, j) {
                    m[(i, j)] = ZERO;
                }
            }
        }
        m
    }
}
