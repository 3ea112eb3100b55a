//! Dispatch of configured jobs to the library.

use super::config::{Command, JobConfig, Tolerances};
use crate::derham::{Flavor, TwistContext};
use crate::error::{Error, Result};
use crate::io::{self, FormFile, GaugeFile};
use crate::lie::{certify, GroupSpec, Verdict};
use crate::linalg::{fnorm, CMat, C64};
use crate::moduli::*;
use crate::report::{CheckRecord, Report};
use crate::sample::{self, FormSampler, GaugeSampler};
use crate::suites;
use crate::torus::frame::frame_name;
use crate::torus::{hodge_decompose, LieForm, TorusGeom};
use serde_json::json;
use std::sync::Arc;

struct Job<'a> {
    cfg: &'a JobConfig,
    geom: Arc<TorusGeom>,
    spec: Arc<GroupSpec>,
    ctx: TwistContext,
}

fn load_form(job: &Job, path: &std::path::Path) -> Result<LieForm> {
    let file: FormFile = io::read_json(path)?;
    io::form_from_file(&file, &job.geom, &job.spec, Some(&job.ctx))
}

/// Constant coefficient matrices of a harmonic form, by frame.
fn harmonic_summary(psi: &LieForm) -> serde_json::Value {
    let z = psi.geom.zero_mode();
    let frames: Vec<_> = psi
        .frames()
        .iter()
        .enumerate()
        .map(|(fi, &mask)| json!({ "frame": frame_name(psi.geom.g, mask), "matrix": io::matrix_to_rows(&psi.matrix_at(fi, z)) }))
        .collect();
    json!(frames)
}

fn retol(records: Vec<CheckRecord>, prefix: &str, tol: Option<f64>) -> Vec<CheckRecord> {
    match tol {
        None => records,
        Some(t) => records
            .into_iter()
            .map(|r| if r.name.starts_with(prefix) { CheckRecord::at_most(r.name, r.value, t) } else { r })
            .collect(),
    }
}

fn apply_overrides(records: Vec<CheckRecord>, tol: &Tolerances) -> Vec<CheckRecord> {
    let r = retol(records, "identity.", tol.identity);
    let r = retol(r, "hodge.kahler", tol.kahler);
    let r = retol(r, "ddbar.ddbar_", tol.ddbar);
    retol(r, "holonomy.", tol.holonomy)
}

/// Random admissible harmonic form from the moduli description.
fn random_psi(job: &Job, scale: f64) -> Result<LieForm> {
    let desc = admissible_set(&job.ctx, Sector::Full, 1, job.cfg.seed)?;
    let s = desc.samples.first().ok_or_else(|| Error::Precondition("no admissible sample found".into()))?;
    Ok(desc.form(&s.coords).scale(C64::from(scale)))
}

fn random_gauge_move(job: &Job, omega: &LieForm, salt: u64) -> Result<LieForm> {
    let samplers = GaugeSampler::fitted(&job.geom);
    let gs = samplers
        .get(salt as usize % samplers.len().max(1))
        .ok_or_else(|| Error::Precondition("cutoff too small for random gauges".into()))?;
    let mut rng = sample::rng(job.cfg.seed.wrapping_add(salt));
    let g = sample::random_gauge(&mut rng, &job.geom, &job.spec, &omega.shift, gs);
    g.apply(omega, Flavor::DeRham)
}

fn verify_identities(job: &Job, report: &mut Report) -> Result<()> {
    let cfg = job.cfg;
    let trials = cfg.trials.max(1);
    let seed = cfg.seed;
    let ctx = if cfg.chi.is_some() {
        job.ctx.clone()
    } else {
        let mut rng = sample::rng(seed ^ 0x5eed);
        let chi = suites::random_chi(&mut rng, &job.geom, &job.spec, 0.3);
        crate::derham::make_twist_from(job.geom.clone(), job.spec.clone(), chi)?
    };
    report.data("trials", trials);
    let mut recs = suites::lie_identities(&job.spec, seed, trials)?;
    recs.extend(suites::operator_identities(&job.geom, &job.spec, &ctx, seed, trials)?);
    recs.extend(suites::hodge_identities(&job.geom, &job.spec, &ctx.shift, seed, trials)?);
    recs.extend(suites::ddbar_checks(&job.geom, &job.spec, seed, trials)?);
    recs.extend(suites::twisted_dichotomy(&job.geom, &job.spec, seed, trials.max(5), 5)?);
    recs.extend(suites::picard_checks(&job.geom, &job.spec, seed, trials)?);
    report.checks(apply_overrides(recs, &cfg.tolerances));
    Ok(())
}

fn hodge_decompose_cmd(job: &Job, report: &mut Report) -> Result<()> {
    let alpha = match &job.cfg.input {
        Some(p) => load_form(job, p)?,
        None => {
            let mut rng = sample::rng(job.cfg.seed);
            let opts = FormSampler { band: job.geom.cutoff as i64, amp: 1.0, ..FormSampler::default() };
            sample::random_form(&mut rng, &job.geom, &job.spec, &job.ctx.shift, job.cfg.degree.min(job.geom.dim()), &opts)
        }
    };
    let split = hodge_decompose(&alpha);
    let n = alpha.norm().max(f64::MIN_POSITIVE);
    report.data("degree", alpha.degree);
    report.data("norms", json!({ "input": alpha.norm(), "harmonic": split.harmonic.norm(),
        "exact": split.exact_part().norm(), "coexact": split.coexact_part().norm() }));
    report.check(CheckRecord::at_most("split.reconstruction", split.residual / n, suites::SPLIT_TOL));
    let parts = [split.harmonic.clone(), split.exact_part(), split.coexact_part()];
    for (x, y, name) in [(0, 1, "harmonic_exact"), (0, 2, "harmonic_coexact"), (1, 2, "exact_coexact")] {
        if parts[x].degree == parts[y].degree {
            let v = parts[x].inner(&parts[y]).norm() / (n * n);
            report.check(CheckRecord::at_most(format!("split.orthogonal_{name}"), v, suites::ORTHOGONALITY_TOL));
        }
    }
    if let Some(out) = &job.cfg.output {
        io::write_json(out, &json!({
            "format_version": io::FILE_VERSION,
            "harmonic": io::form_to_file(&split.harmonic),
            "exact_potential": io::form_to_file(&split.exact_potential),
            "coexact_potential": io::form_to_file(&split.coexact_potential),
        }))?;
    }
    Ok(())
}

fn canonical_checks(report: &mut Report, can: &CanonicalForm, flat_tol: Option<f64>) -> Result<()> {
    let scale = (1.0 + can.psi.norm()).powi(2);
    let tol = flat_tol.unwrap_or(1e-8) * scale;
    report.check(CheckRecord::at_most("canonical.flat_residual", can.flat_residual, tol));
    report.check(CheckRecord::at_most("canonical.gauge_residual", can.gauge_residual, tol));
    let r = can.rigidity()?;
    report.checks([
        CheckRecord::at_most("canonical.eta_harmonic", r.eta_harmonic, 0.0),
        CheckRecord::at_most("canonical.eta_nilpotent", r.eta_diagonal, 1e-12),
        CheckRecord::at_most("canonical.del_eta", r.del_eta, 1e-10),
        CheckRecord::at_most("canonical.eta_bracket", r.eta_bracket, 1e-9),
        CheckRecord::at_most("canonical.del_alpha", r.del_alpha, 1e-8),
        CheckRecord::at_most("canonical.d_alpha", r.d_alpha, 1e-8),
    ]);
    report.data("psi", harmonic_summary(&can.psi));
    report.data("h_norm", can.h.norm());
    Ok(())
}

fn write_canonical(path: &std::path::Path, can: &CanonicalForm) -> Result<()> {
    let gauge: GaugeFile = io::gauge_to_file(&can.gauge);
    io::write_json(path, &json!({
        "format_version": io::FILE_VERSION,
        "psi": io::form_to_file(&can.psi),
        "h": io::form_to_file(&can.h),
        "omega": io::form_to_file(&can.omega),
        "gauge": gauge,
    }))
}

fn report_equivalence(report: &mut Report, e: &Equivalence) {
    report.data("equivalence", json!({ "decision": e.decision, "method": e.method, "residual": e.residual,
        "witness": e.witness.as_ref().map(io::matrix_to_rows) }));
    match e.decision {
        Decision::Equivalent => report.check(CheckRecord::at_most("equivalence.witness_residual", e.residual, ACCEPT_TOL)),
        Decision::Inequivalent => {}
        Decision::Undecided => report.undecided("equivalence", json!({ "residual": e.residual })),
    }
}

fn canonicalize_cmd(job: &Job, report: &mut Report) -> Result<()> {
    let omega = match &job.cfg.input {
        Some(p) => load_form(job, p)?,
        None => {
            let psi = random_psi(job, 0.5)?;
            let rec = reconstruct(&psi, &job.ctx)?;
            random_gauge_move(job, &rec.omega, 1)?
        }
    };
    let can = canonicalize(&omega, &job.ctx)?;
    canonical_checks(report, &can, job.cfg.tolerances.flat)?;
    if let Some(p) = &job.cfg.compare {
        let other = load_form(job, p)?;
        let e = equivalent(&omega, &other, &job.ctx, job.cfg.seed)?;
        report_equivalence(report, &e);
    } else if job.cfg.input.is_none() {
        let again = canonicalize(&random_gauge_move(job, &omega, 2)?, &job.ctx)?;
        let e = equivalent_harmonic(&can.psi, &again.psi, job.cfg.seed)?;
        report_equivalence(report, &e);
    }
    if let Some(out) = &job.cfg.output {
        write_canonical(out, &can)?;
    }
    Ok(())
}

fn reconstruct_cmd(job: &Job, report: &mut Report) -> Result<()> {
    let psi = match &job.cfg.input {
        Some(p) => load_form(job, p)?,
        None => random_psi(job, 0.5)?,
    };
    let rec = reconstruct(&psi, &job.ctx)?;
    let scale = (1.0 + psi.norm()).powi(2);
    report.check(CheckRecord::at_most("reconstruct.flat_residual", rec.flat_residual, job.cfg.tolerances.flat.unwrap_or(1e-8) * scale));
    report.data("psi", harmonic_summary(&psi));
    report.data("h_norm", rec.h.norm());
    if let Some(out) = &job.cfg.output {
        write_canonical(out, &rec)?;
    }
    Ok(())
}

fn classify_cmd(job: &Job, report: &mut Report) -> Result<()> {
    let desc = admissible_set(&job.ctx, job.cfg.sector, job.cfg.samples, job.cfg.seed)?;
    report.data("sector", desc.sector);
    report.data("ambient_dim", desc.ambient_dim());
    report.data("coordinates", &desc.names);
    report.data("constraint_components", &desc.constraints.components);
    report.data("constraint_rank", desc.constraints.rank);
    report.data("equations", &desc.constraints.equations);
    report.data("symmetry", json!({ "dimension": desc.symmetry.dimension,
        "entries": desc.symmetry.entries.iter().map(|&(i, j)| [i + 1, j + 1]).collect::<Vec<_>>(),
        "description": desc.symmetry.description }));
    let tol = job.cfg.tolerances.constraint.unwrap_or(CONE_TOL);
    for (k, s) in desc.samples.iter().enumerate() {
        report.data(&format!("sample.{k}"), json!({
            "coords": s.coords.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "orbit": s.orbit,
        }));
        report.check(CheckRecord::at_most(format!("sample.{k}.constraint"), desc.constraints.residual(&s.coords), tol));
        if !s.decided {
            report.undecided(&format!("sample.{k}.orbit"), "orbit comparison between thresholds");
        }
    }
    let orbits = desc.samples.iter().enumerate().filter(|(k, s)| s.orbit == *k).count();
    report.data("orbits", orbits);
    if let Some(out) = &job.cfg.output {
        let basis: Vec<FormFile> = desc.ambient_basis.iter().map(io::form_to_file).collect();
        io::write_json(out, &json!({ "format_version": io::FILE_VERSION, "names": desc.names, "ambient_basis": basis }))?;
    }
    Ok(())
}

fn holonomy_cmd(job: &Job, report: &mut Report) -> Result<()> {
    let omega = match &job.cfg.input {
        Some(p) => load_form(job, p)?,
        None => {
            let psi = random_psi(job, 0.3)?;
            random_gauge_move(job, &reconstruct(&psi, &job.ctx)?.omega, 3)?
        }
    };
    let tol = job.cfg.tolerances.holonomy.unwrap_or(REFINE_TOL);
    let hols = generator_holonomies(&omega)?;
    let mut mats: Vec<CMat> = Vec::new();
    for (l, h) in hols.iter().enumerate() {
        report.data(&format!("holonomy.generator_{}", l + 1), json!({ "steps": h.steps, "matrix": io::matrix_to_rows(&h.value) }));
        let t = tol * fnorm(&h.value).max(1.0);
        report.check(CheckRecord::at_most(format!("holonomy.refinement_{}", l + 1), h.refinement, t));
        mats.push(h.value.clone());
    }
    report.check(CheckRecord::at_most("holonomy.commutators", commutator_defect(&mats), 1e-8));
    if let Some(lam) = &job.cfg.lattice_vector {
        let h = holonomy(&omega, lam)?;
        report.data("holonomy.lattice_vector", json!({ "lambda": lam, "steps": h.steps, "matrix": io::matrix_to_rows(&h.value) }));
        report.check(CheckRecord::at_most("holonomy.refinement_lambda", h.refinement, tol * fnorm(&h.value).max(1.0)));
    }
    let cc = holonomy_character_check(&job.ctx)?;
    report.check(CheckRecord::at_most("holonomy.twist_character", cc.max, cc.tolerance));
    Ok(())
}

fn certify_cmd(cfg: &JobConfig, report: &mut Report) {
    let g = &cfg.group;
    match certify(&g.family, g.rank) {
        Verdict::Certified(cert, rep) | Verdict::Failed(cert, rep) => {
            report.data("certificate", &*cert);
            report.data("b_dims", cert.b_dims());
            for c in &rep.checks {
                let name = match c.step {
                    Some(s) => format!("certificate.step{}.{}", s + 1, c.name),
                    None => format!("certificate.{}", c.name),
                };
                report.check(CheckRecord::exact(name, c.violations, 0));
            }
            report.check(CheckRecord::holds("certificate.verified", rep.passed()));
        }
        Verdict::Unknown(msg) => report.undecided("certificate", msg),
    }
}

fn picard_cmd(job: &Job, report: &mut Report) -> Result<()> {
    let geom = &job.geom;
    let ctx = &job.ctx;
    let gens: Vec<Vec<[f64; 2]>> = geom.picard_generators().iter().map(|w| w.iter().map(|z| [z.re, z.im]).collect()).collect();
    report.data("picard_generators", gens);
    let coords: Vec<Vec<f64>> = (0..job.spec.ambient_dim)
        .map(|i| {
            let col: Vec<C64> = ctx.chi.iter().map(|r| r[i]).collect();
            TwistContext::picard_coordinates(geom, &col)
        })
        .collect();
    report.data("chi_picard_coordinates", coords);
    report.data("in_picard_lattice", ctx.in_picard_lattice(1e-9));
    let n = job.spec.ambient_dim;
    let trivial: Vec<[usize; 2]> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| job.spec.allowed(i, j) && ctx.shift.is_trivial_entry(i, j))
        .map(|(i, j)| [i + 1, j + 1])
        .collect();
    report.data("untwisted_entries", trivial);
    report.data("holonomy_angles", &ctx.theta);
    let cc = holonomy_character_check(ctx)?;
    report.check(CheckRecord::at_most("picard.twist_character", cc.max, cc.tolerance));
    report.checks(suites::picard_checks(geom, &job.spec, job.cfg.seed, job.cfg.trials.max(1))?);
    Ok(())
}

/// Runs `command` on a validated configuration. Module errors are recorded
/// in the report; only configuration problems are returned as errors.
pub fn execute(cfg: &JobConfig, command: Command) -> Result<Report> {
    let mut report = Report::new(command.name());
    report.data("seed", cfg.seed);
    match cfg.group.family() {
        Ok(f) => report.data("group", f.to_string()),
        Err(_) => report.data("group", json!({ "family": cfg.group.family, "rank": cfg.group.rank })),
    }
    if command == Command::CertifyHodge {
        certify_cmd(cfg, &mut report);
        return Ok(report);
    }
    let geom = cfg.geometry().map_err(|e| Error::Config(format!("torus: {e}")))?;
    let spec = cfg.spec().map_err(|e| Error::Config(format!("group: {e}")))?;
    let ctx = cfg.twist(&geom, &spec).map_err(|e| Error::Config(format!("twist: {e}")))?;
    let job = Job { cfg, geom, spec, ctx };
    let run = match command {
        Command::VerifyIdentities => verify_identities(&job, &mut report),
        Command::HodgeDecompose => hodge_decompose_cmd(&job, &mut report),
        Command::Canonicalize => canonicalize_cmd(&job, &mut report),
        Command::Reconstruct => reconstruct_cmd(&job, &mut report),
        Command::Classify => classify_cmd(&job, &mut report),
        Command::Holonomy => holonomy_cmd(&job, &mut report),
        Command::Picard => picard_cmd(&job, &mut report),
        Command::CertifyHodge => unreachable!(),
    };
    if let Err(e) = run {
        report.error(command.name(), &e.to_string());
    }
    Ok(report)
}
