//! Job configuration files.

use crate::derham::{make_twist_from, trivial_twist, TwistContext};
use crate::error::{Error, Result};
use crate::lie::{build_group, Family, GroupSpec};
use crate::linalg::{c, C64};
use crate::moduli::Sector;
use crate::torus::{make_torus_with_grid, TorusGeom};
use serde::Deserialize;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_CUTOFF: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    VerifyIdentities,
    HodgeDecompose,
    Canonicalize,
    Reconstruct,
    Classify,
    Holonomy,
    CertifyHodge,
    Picard,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::VerifyIdentities,
        Command::HodgeDecompose,
        Command::Canonicalize,
        Command::Reconstruct,
        Command::Classify,
        Command::Holonomy,
        Command::CertifyHodge,
        Command::Picard,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyIdentities => "verify-identities",
            Command::HodgeDecompose => "hodge-decompose",
            Command::Canonicalize => "canonicalize",
            Command::Reconstruct => "reconstruct",
            Command::Classify => "classify",
            Command::Holonomy => "holonomy",
            Command::CertifyHodge => "certify-hodge",
            Command::Picard => "picard",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command {s:?}")))
    }
}

/// Overrides of the default tolerances.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub identity: Option<f64>,
    pub kahler: Option<f64>,
    pub ddbar: Option<f64>,
    pub flat: Option<f64>,
    pub holonomy: Option<f64>,
    pub constraint: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTorus {
    g: usize,
    period_matrix: Option<Vec<Vec<[f64; 2]>>>,
    cutoff: Option<usize>,
    grid: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    family: String,
    rank: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ChiEntry {
    Diagonal(Vec<[f64; 2]>),
    Matrix(Vec<Vec<[f64; 2]>>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTwist {
    chi: Vec<ChiEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    format_version: Option<u32>,
    command: Option<String>,
    torus: RawTorus,
    group: RawGroup,
    twist: Option<RawTwist>,
    seed: Option<u64>,
    trials: Option<usize>,
    samples: Option<usize>,
    sector: Option<Sector>,
    degree: Option<usize>,
    lattice_vector: Option<Vec<i64>>,
    tolerances: Option<Tolerances>,
    input: Option<PathBuf>,
    compare: Option<PathBuf>,
    output: Option<PathBuf>,
}

/// Torus data of a job.
#[derive(Clone, Debug)]
pub struct TorusConfig {
    pub g: usize,
    pub period_matrix: Vec<Vec<C64>>,
    pub cutoff: usize,
    pub grid: usize,
}

/// Group data of a job; the family is kept as written so that families
/// without a matrix model can still be asked for a certificate.
#[derive(Clone, Debug)]
pub struct GroupConfig {
    pub family: String,
    pub rank: usize,
}

impl GroupConfig {
    pub fn family(&self) -> Result<Family> {
        Family::parse(&self.family, self.rank)
            .map_err(|name| Error::Config(format!("group.family: no matrix model for {name:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct JobConfig {
    pub format_version: u32,
    pub command: Option<Command>,
    pub torus: TorusConfig,
    pub group: GroupConfig,
    /// `chi[k][i]`, diagonal coefficients of `dz̄_k`.
    pub chi: Option<Vec<Vec<C64>>>,
    pub seed: u64,
    pub trials: usize,
    pub samples: usize,
    pub sector: Sector,
    pub degree: usize,
    pub lattice_vector: Option<Vec<i64>>,
    pub tolerances: Tolerances,
    pub input: Option<PathBuf>,
    pub compare: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

/// Splits `T3` or `BorelSp(4)` into a family name and a trailing size.
fn split_family(s: &str) -> (String, Option<usize>) {
    let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect();
    let digits = key.chars().rev().take_while(|c| c.is_ascii_digit()).count();
    let (name, num) = key.split_at(key.len() - digits);
    (name.to_string(), num.parse().ok())
}

fn parse_chi(raw: &RawTwist, g: usize, n: Option<usize>) -> Result<Vec<Vec<C64>>> {
    if raw.chi.len() != g {
        return Err(Error::Config(format!("twist.chi: expected {g} entries (one per dz̄_k), found {}", raw.chi.len())));
    }
    let mut out = Vec::with_capacity(g);
    for (k, e) in raw.chi.iter().enumerate() {
        let row: Vec<C64> = match e {
            ChiEntry::Diagonal(d) => d.iter().map(|p| c(p[0], p[1])).collect(),
            ChiEntry::Matrix(m) => {
                let size = m.len();
                if m.iter().any(|r| r.len() != size) {
                    return Err(Error::Config(format!("twist.chi[{k}]: matrix must be square")));
                }
                for (i, r) in m.iter().enumerate() {
                    for (j, p) in r.iter().enumerate() {
                        if i != j && (p[0] != 0.0 || p[1] != 0.0) {
                            return Err(Error::Config(format!(
                                "twist.chi[{k}]: entry ({},{}) is off the diagonal; χ must be diagonal (valued in the torus part 𝔰)",
                                i + 1,
                                j + 1
                            )));
                        }
                    }
                }
                (0..size).map(|i| c(m[i][i][0], m[i][i][1])).collect()
            }
        };
        if let Some(n) = n {
            if row.len() != n {
                return Err(Error::Config(format!("twist.chi[{k}]: expected {n} diagonal entries, found {}", row.len())));
            }
        }
        out.push(row);
    }
    Ok(out)
}

/// Parses and validates a JSON job configuration.
pub fn parse_config(text: &str) -> Result<JobConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::Config(format!("schema violation: {e}")))?;
    let format_version = raw.format_version.unwrap_or(CONFIG_VERSION);
    if format_version != CONFIG_VERSION {
        return Err(Error::Config(format!("format_version: unsupported version {format_version}")));
    }
    let command = raw.command.as_deref().map(str::parse).transpose()?;

    let t = &raw.torus;
    if t.g == 0 {
        return Err(Error::Config("torus.g: must be at least 1".into()));
    }
    let pm = t.period_matrix.as_ref().ok_or_else(|| Error::Config("torus.period_matrix: missing field".into()))?;
    if pm.len() != t.g || pm.iter().any(|r| r.len() != 2 * t.g) {
        return Err(Error::Config(format!("torus.period_matrix: expected {} rows of {} complex entries", t.g, 2 * t.g)));
    }
    let cutoff = t.cutoff.unwrap_or(DEFAULT_CUTOFF);
    if cutoff == 0 {
        return Err(Error::Config("torus.cutoff: must be at least 1".into()));
    }
    let torus = TorusConfig {
        g: t.g,
        period_matrix: pm.iter().map(|r| r.iter().map(|p| c(p[0], p[1])).collect()).collect(),
        cutoff,
        grid: t.grid.unwrap_or(3 * cutoff + 1),
    };

    let (name, size) = split_family(&raw.group.family);
    let rank = match (raw.group.rank, size) {
        (Some(r), Some(s)) if r != s => {
            return Err(Error::Config(format!("group: family {:?} and rank {r} disagree", raw.group.family)));
        }
        (Some(r), _) | (None, Some(r)) => r,
        (None, None) => return Err(Error::Config("group.rank: missing field".into())),
    };
    let group = GroupConfig { family: name, rank };
    let n = group.family().ok().map(|f| f.ambient_dim());
    let chi = raw.twist.as_ref().map(|tw| parse_chi(tw, t.g, n)).transpose()?;

    for (field, path) in [("input", &raw.input), ("compare", &raw.compare)] {
        if let Some(p) = path {
            if !p.exists() {
                return Err(Error::Config(format!("{field}: file {} does not exist", p.display())));
            }
        }
    }
    if let Some(v) = &raw.lattice_vector {
        if v.len() != 2 * t.g {
            return Err(Error::Config(format!("lattice_vector: expected {} integers", 2 * t.g)));
        }
    }
    Ok(JobConfig {
        format_version,
        command,
        torus,
        group,
        chi,
        seed: raw.seed.unwrap_or(0),
        trials: raw.trials.unwrap_or(10),
        samples: raw.samples.unwrap_or(4),
        sector: raw.sector.unwrap_or(Sector::Full),
        degree: raw.degree.unwrap_or(1),
        lattice_vector: raw.lattice_vector,
        tolerances: raw.tolerances.unwrap_or_default(),
        input: raw.input,
        compare: raw.compare,
        output: raw.output,
    })
}

impl JobConfig {
    pub fn geometry(&self) -> Result<Arc<TorusGeom>> {
        let t = &self.torus;
        make_torus_with_grid(t.g, t.period_matrix.clone(), t.cutoff, t.grid)
    }

    pub fn spec(&self) -> Result<Arc<GroupSpec>> {
        Ok(Arc::new(build_group(self.group.family()?)?))
    }

    /// The configured twist, or the trivial one.
    pub fn twist(&self, geom: &Arc<TorusGeom>, spec: &Arc<GroupSpec>) -> Result<TwistContext> {
        match &self.chi {
            Some(chi) => make_twist_from(geom.clone(), spec.clone(), chi.clone()),
            None => Ok(trivial_twist(geom.clone(), spec.clone())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = r#""torus": {"g": 1, "period_matrix": [[[1, 0], [0, 1]]]}"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(&format!(r#"{{{SQUARE}, "group": {{"family": "T2"}}, "command": "verify-identities"}}"#)).unwrap();
        assert_eq!(cfg.torus.cutoff, 8);
        assert_eq!(cfg.torus.grid, 25);
        assert_eq!(cfg.group.family().unwrap(), Family::Triangular(2));
        assert_eq!(cfg.command, Some(Command::VerifyIdentities));
        assert!(cfg.chi.is_none());
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.sector, Sector::Full);
    }

    #[test]
    fn family_spellings() {
        for (f, r, want) in [("BorelSp(4)", None, Family::BorelSp(4)), ("SO", Some(5), Family::BorelSO(5)), ("Triangular", Some(3), Family::Triangular(3))] {
            let rank = r.map(|r| format!(r#", "rank": {r}"#)).unwrap_or_default();
            let cfg = parse_config(&format!(r#"{{{SQUARE}, "group": {{"family": "{f}"{rank}}}}}"#)).unwrap();
            assert_eq!(cfg.group.family().unwrap(), want);
        }
        assert!(parse_config(&format!(r#"{{{SQUARE}, "group": {{"family": "T2", "rank": 3}}}}"#)).is_err());
    }

    #[test]
    fn missing_period_matrix_names_the_field() {
        let err = parse_config(r#"{"torus": {"g": 1}, "group": {"family": "T2"}}"#).unwrap_err();
        assert!(err.to_string().contains("period_matrix"), "{err}");
    }

    #[test]
    fn non_diagonal_chi_is_rejected() {
        let text = format!(r#"{{{SQUARE}, "group": {{"family": "T2"}}, "twist": {{"chi": [[[[0.1, 0], [0.2, 0]], [[0, 0], [0, 0]]]]}}}}"#);
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("diagonal"), "{err}");
        let ok = format!(r#"{{{SQUARE}, "group": {{"family": "T2"}}, "twist": {{"chi": [[[0.1, 0], [0, 0]]]}}}}"#);
        assert_eq!(parse_config(&ok).unwrap().chi.unwrap()[0][0], c(0.1, 0.0));
    }

    #[test]
    fn schema_errors_carry_positions() {
        let err = parse_config("{\n \"torus\": {\"g\": 1, \"period_matrix\": [[[1,0],[0,1]]]},\n \"group\": {\"family\": \"T2\"},\n \"colour\": 1}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("colour") && msg.contains("line 4"), "{msg}");
        assert!(parse_config(&format!(r#"{{{SQUARE}, "group": {{"family": "T2"}}, "command": "fly"}}"#)).is_err());
    }
}
