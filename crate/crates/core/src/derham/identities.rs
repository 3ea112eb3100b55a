//! Residuals of the structural identities of the non-abelian complexes.

use super::complex::curvature;
use super::gauge::{check_crossed_hom, Flavor, GaugeMap};
use super::twist::{Direction, TwistContext};
use crate::error::Result;
use crate::torus::{bracket_with, differential, Diff, LieForm, Truncation};

/// `‖d(Ad g α) − Ad g(dα) − [δ₀(g), Ad g α]‖`.
pub fn leibniz_residual(g: &GaugeMap, alpha: &LieForm) -> Result<f64> {
    let ad = g.ad(alpha)?;
    let lhs = differential(&ad, Diff::D);
    let rhs = g
        .ad(&differential(alpha, Diff::D))?
        .add(&bracket_with(&g.delta0(Flavor::DeRham)?, &ad, Truncation::Project)?);
    Ok(lhs.distance(&rhs))
}

pub fn crossed_hom_residual(g: &GaugeMap, h: &GaugeMap) -> Result<f64> {
    check_crossed_hom(g, h)
}

/// `‖ρ(gh)α − ρ(g)ρ(h)α‖`.
pub fn action_residual(g: &GaugeMap, h: &GaugeMap, alpha: &LieForm) -> Result<f64> {
    let gh = g.compose(h)?;
    let lhs = gh.apply(alpha, Flavor::DeRham)?;
    let rhs = g.apply(&h.apply(alpha, Flavor::DeRham)?, Flavor::DeRham)?;
    Ok(lhs.distance(&rhs))
}

/// `‖δ₁(ρ(g)α) − Ad g(δ₁α)‖`.
pub fn equivariance_residual(g: &GaugeMap, alpha: &LieForm) -> Result<f64> {
    let lhs = curvature(&g.apply(alpha, Flavor::DeRham)?, Flavor::DeRham)?;
    let rhs = g.ad(&curvature(alpha, Flavor::DeRham)?.form)?;
    Ok(lhs.form.distance(&rhs))
}

/// `‖Π_{0,1}ρ(g)α − ρ̄(g)Π_{0,1}α‖`.
pub fn type_residual(g: &GaugeMap, alpha: &LieForm) -> Result<f64> {
    let lhs = g.apply(alpha, Flavor::DeRham)?.type_project(0, 1)?;
    let rhs = g.apply(&alpha.type_project(0, 1)?, Flavor::Dolbeault)?;
    Ok(lhs.distance(&rhs))
}

/// `‖δ₁(δ₀(g))‖`, including the part of the square outside the band.
pub fn pure_gauge_residual(g: &GaugeMap) -> Result<f64> {
    Ok(curvature(&g.delta0(Flavor::DeRham)?, Flavor::DeRham)?.norm)
}

/// `r̄_χ`: the Dolbeault transfer, `Ad u` followed by adding `χ`.
pub fn transfer_dolbeault(ctx: &TwistContext, beta: &LieForm, dir: Direction) -> Result<LieForm> {
    let chi = ctx.gamma.type_project(0, 1)?;
    match dir {
        Direction::ToGlobal => {
            let out = ctx.transfer(beta, Direction::ToGlobal)?;
            Ok(out.sub(&ctx.gamma).add(&chi))
        }
        Direction::ToTwisted => {
            let base = beta.try_sub(&chi)?.add(&ctx.gamma);
            ctx.transfer(&base, Direction::ToTwisted)
        }
    }
}

/// `‖Π_{0,1} r_γ(α) − r̄_χ(Π_{0,1}α)‖` for a twisted 1-form.
pub fn transfer_type_residual(ctx: &TwistContext, alpha: &LieForm) -> Result<f64> {
    let lhs = ctx.transfer(alpha, Direction::ToGlobal)?.type_project(0, 1)?;
    let rhs = transfer_dolbeault(ctx, &alpha.type_project(0, 1)?, Direction::ToGlobal)?;
    Ok(lhs.distance(&rhs))
}

/// `‖Ad u(dα) − (d − ad γ)(Ad u α)‖` for a twisted form `α`.
pub fn twisted_differential_residual(ctx: &TwistContext, alpha: &LieForm) -> Result<f64> {
    let strip = |f: &LieForm| -> Result<LieForm> {
        let t = ctx.transfer(f, Direction::ToGlobal)?;
        Ok(if f.degree == 1 { t.sub(&ctx.gamma) } else { t })
    };
    let lhs = strip(&differential(alpha, Diff::D))?;
    let beta = strip(alpha)?;
    let rhs = differential(&beta, Diff::D).sub(&bracket_with(&ctx.gamma, &beta, Truncation::Strict)?);
    Ok(lhs.distance(&rhs))
}

/// `‖r_γ^{-1}(r_γ α) − α‖`.
pub fn transfer_roundtrip_residual(ctx: &TwistContext, alpha: &LieForm) -> Result<f64> {
    let back = ctx.transfer(&ctx.transfer(alpha, Direction::ToGlobal)?, Direction::ToTwisted)?;
    Ok(back.distance(alpha))
}

/// `‖δ₁(r_γ α)‖ − ‖δ₁ α‖`-style comparison: returns both curvature norms.
pub fn transfer_flatness(ctx: &TwistContext, alpha: &LieForm) -> Result<(f64, f64)> {
    let twisted = curvature(alpha, Flavor::DeRham)?.norm;
    let global = curvature(&ctx.transfer(alpha, Direction::ToGlobal)?, Flavor::DeRham)?.norm;
    Ok((twisted, global))
}
