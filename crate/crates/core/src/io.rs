//! Versioned JSON files: forms, gauge maps, group specifications.

use crate::derham::{GaugeFactor, GaugeMap, TwistContext};
use crate::error::{Error, Result};
use crate::lie::{Family, GroupSpec};
use crate::linalg::{c, CMat};
use crate::torus::frame::{self, Mask};
use crate::torus::{FrequencyShift, GeometryFile, LieForm, TorusGeom};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

pub const FILE_VERSION: u32 = 1;

/// Complex matrix as rows of `[re, im]` pairs.
pub type MatrixRows = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_rows(m: &CMat) -> MatrixRows {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_rows(rows: &MatrixRows) -> Result<CMat> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Format("matrix must be square".into()));
    }
    Ok(CMat::from_fn(n, n, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

/// Which bundle a form's coefficients refer to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// Untwisted, global forms.
    Global,
    /// Shifted frequencies of the twist context.
    Twisted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormRecord {
    /// One-based matrix entry `(i, j)`.
    pub entry: [usize; 2],
    /// Frame name such as `dz`, `dzb`, `dz1^dzb2` or `1`.
    pub frame: String,
    pub frequency: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormFile {
    pub format_version: u32,
    pub degree: usize,
    pub group: Family,
    pub frame: Frame,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryFile>,
    pub records: Vec<FormRecord>,
}

fn check_version(v: u32, what: &str) -> Result<()> {
    if v != FILE_VERSION {
        return Err(Error::Format(format!("{what}: unsupported format_version {v} (expected {FILE_VERSION})")));
    }
    Ok(())
}

pub fn form_to_file(f: &LieForm) -> FormFile {
    let g = f.geom.g;
    FormFile {
        format_version: FILE_VERSION,
        degree: f.degree,
        group: f.spec.family,
        frame: if f.shift.is_untwisted() { Frame::Global } else { Frame::Twisted },
        geometry: Some(f.geom.to_file()),
        records: f
            .records()
            .into_iter()
            .map(|(mask, i, j, m, z)| FormRecord {
                entry: [i + 1, j + 1],
                frame: frame::frame_name(g, mask),
                frequency: m,
                re: z.re,
                im: z.im,
            })
            .collect(),
    }
}

fn frame_mask(g: usize, degree: usize, name: &str) -> Option<Mask> {
    frame::frames(g, degree).into_iter().find(|m| frame::frame_name(g, *m) == name)
}

/// Loads a form; the shift is the context's for twisted files.
pub fn form_from_file(file: &FormFile, geom: &Arc<TorusGeom>, spec: &Arc<GroupSpec>, ctx: Option<&TwistContext>) -> Result<LieForm> {
    check_version(file.format_version, "form file")?;
    if file.group != spec.family {
        return Err(Error::SpecMismatch(format!("form is for {}, job uses {}", file.group, spec.family)));
    }
    if let Some(gf) = &file.geometry {
        if !TorusGeom::from_file(gf)?.same_as(geom) {
            return Err(Error::Incompatible("form file geometry differs from the job geometry".into()));
        }
    }
    if file.degree > geom.dim() {
        return Err(Error::Format(format!("degree {} exceeds real dimension {}", file.degree, geom.dim())));
    }
    let shift = match (file.frame, ctx) {
        (Frame::Global, _) => Arc::new(FrequencyShift::trivial(spec.ambient_dim, geom.dim())),
        (Frame::Twisted, Some(ctx)) => ctx.shift.clone(),
        (Frame::Twisted, None) => return Err(Error::Format("twisted form needs a twist context".into())),
    };
    let n = spec.ambient_dim;
    let mut out = LieForm::zeros(geom.clone(), spec.clone(), shift, file.degree);
    for (k, r) in file.records.iter().enumerate() {
        let [i, j] = r.entry;
        if i == 0 || j == 0 || i > n || j > n || !spec.allowed(i - 1, j - 1) {
            return Err(Error::Format(format!("record {k}: entry ({i},{j}) is not in the algebra of {}", spec.family)));
        }
        let mask = frame_mask(geom.g, file.degree, &r.frame)
            .ok_or_else(|| Error::Format(format!("record {k}: unknown frame {:?} for degree {}", r.frame, file.degree)))?;
        let fi = out.frame_index(mask).expect("frame of the degree");
        let m = geom
            .mode_index(&r.frequency)
            .ok_or_else(|| Error::Format(format!("record {k}: frequency {:?} outside the cutoff", r.frequency)))?;
        out.add_at(fi, i - 1, j - 1, m, c(r.re, r.im));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FactorRecord {
    Constant { matrix: MatrixRows },
    Exp { records: Vec<FormRecord> },
    Character { exponents: Vec<Vec<i64>> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeFile {
    pub format_version: u32,
    pub group: Family,
    pub frame: Frame,
    pub factors: Vec<FactorRecord>,
}

pub fn gauge_to_file(g: &GaugeMap) -> GaugeFile {
    let factors = g
        .factors
        .iter()
        .map(|f| match f {
            GaugeFactor::Constant(m) => FactorRecord::Constant { matrix: matrix_to_rows(m) },
            GaugeFactor::Exp(x) => FactorRecord::Exp { records: form_to_file(x).records },
            GaugeFactor::Character(m) => FactorRecord::Character { exponents: m.clone() },
        })
        .collect();
    GaugeFile {
        format_version: FILE_VERSION,
        group: g.spec.family,
        frame: if g.shift.is_untwisted() { Frame::Global } else { Frame::Twisted },
        factors,
    }
}

/// Rebuilds a gauge map; every factor is validated on the way in.
pub fn gauge_from_file(file: &GaugeFile, geom: &Arc<TorusGeom>, spec: &Arc<GroupSpec>, ctx: Option<&TwistContext>) -> Result<GaugeMap> {
    check_version(file.format_version, "gauge file")?;
    let mut g = match (file.frame, ctx) {
        (Frame::Global, _) => GaugeMap::untwisted_identity(geom.clone(), spec.clone()),
        (Frame::Twisted, Some(ctx)) => GaugeMap::identity(geom.clone(), spec.clone(), ctx.shift.clone()),
        (Frame::Twisted, None) => return Err(Error::Format("twisted gauge needs a twist context".into())),
    };
    for f in &file.factors {
        let factor = match f {
            FactorRecord::Constant { matrix } => GaugeFactor::Constant(matrix_from_rows(matrix)?),
            FactorRecord::Exp { records } => {
                let ff = FormFile {
                    format_version: FILE_VERSION,
                    degree: 0,
                    group: file.group,
                    frame: file.frame,
                    geometry: None,
                    records: records.clone(),
                };
                GaugeFactor::Exp(form_from_file(&ff, geom, spec, ctx)?)
            }
            FactorRecord::Character { exponents } => GaugeFactor::Character(exponents.clone()),
        };
        g.push(factor)?;
    }
    Ok(g)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupDocument {
    pub format_version: u32,
    pub family: Family,
    pub ambient_dim: usize,
    pub nilpotent_basis: Vec<MatrixRows>,
    pub torus_basis: Vec<MatrixRows>,
    pub filtration_level: Vec<i32>,
    pub compact_rank: usize,
    pub abelian_step: Vec<MatrixRows>,
}

pub fn group_document(spec: &GroupSpec) -> GroupDocument {
    let rows = |v: &[CMat]| v.iter().map(matrix_to_rows).collect();
    GroupDocument {
        format_version: FILE_VERSION,
        family: spec.family,
        ambient_dim: spec.ambient_dim,
        nilpotent_basis: rows(&spec.nilpotent_basis),
        torus_basis: rows(&spec.torus_basis),
        filtration_level: spec.filtration_level.clone(),
        compact_rank: spec.compact_form.rank,
        abelian_step: rows(&spec.abelian_step),
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derham::{make_twist_from, trivial_twist};
    use crate::lie::build_group;
    use crate::sample::{self, FormSampler, GaugeSampler};
    use crate::torus::elliptic_curve;

    #[test]
    fn form_roundtrip() {
        let geom = elliptic_curve(c(0.5, 1.0), 4).unwrap();
        let spec = Arc::new(build_group(Family::Triangular(3)).unwrap());
        let ctx = make_twist_from(geom.clone(), spec.clone(), vec![vec![c(0.2, 0.1), c(0.0, 0.0), c(-0.1, 0.0)]]).unwrap();
        let mut rng = sample::rng(1);
        let f = sample::random_form(&mut rng, &geom, &spec, &ctx.shift, 1, &FormSampler::default());
        let text = serde_json::to_string(&form_to_file(&f)).unwrap();
        let back: FormFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.frame, Frame::Twisted);
        let g = form_from_file(&back, &geom, &spec, Some(&ctx)).unwrap();
        assert_eq!(g.distance(&f), 0.0);
        assert!(form_from_file(&back, &geom, &spec, None).is_err());
    }

    #[test]
    fn bad_records_are_rejected() {
        let geom = elliptic_curve(c(0.0, 1.0), 2).unwrap();
        let spec = Arc::new(build_group(Family::Triangular(2)).unwrap());
        let rec = |entry, frame: &str, frequency| FormRecord { entry, frame: frame.into(), frequency, re: 1.0, im: 0.0 };
        for r in [rec([2, 1], "dz", vec![0, 0]), rec([1, 1], "dw", vec![0, 0]), rec([1, 2], "dz", vec![5, 0])] {
            let f = FormFile { format_version: 1, degree: 1, group: spec.family, frame: Frame::Global, geometry: None, records: vec![r] };
            assert!(matches!(form_from_file(&f, &geom, &spec, None), Err(Error::Format(_))));
        }
    }

    #[test]
    fn gauge_roundtrip() {
        let geom = elliptic_curve(c(0.0, 1.0), 8).unwrap();
        let spec = Arc::new(build_group(Family::Triangular(3)).unwrap());
        let ctx = trivial_twist(geom.clone(), spec.clone());
        let mut rng = sample::rng(4);
        let g = sample::random_gauge(&mut rng, &geom, &spec, &ctx.shift, &GaugeSampler::fitted(&geom)[0]);
        let file = gauge_to_file(&g);
        let text = serde_json::to_string(&file).unwrap();
        let back = gauge_from_file(&serde_json::from_str(&text).unwrap(), &geom, &spec, None).unwrap();
        let t = [0.3, 0.6];
        assert_eq!(back.eval_at(&t), g.eval_at(&t));
    }
}
