//! Seeded random forms and gauge maps for checks and tests.

use crate::derham::{GaugeFactor, GaugeMap};
use crate::lie::GroupSpec;
use crate::linalg::{self, c, CMat, C64};
use crate::torus::{FrequencyShift, LieForm, TorusGeom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use std::sync::Arc;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn cnum<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random element of `𝔤` supported on entries with `keep(i, j)`.
pub fn random_algebra<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &GroupSpec,
    keep: impl Fn(usize, usize) -> bool,
) -> CMat {
    let coords: Vec<C64> = spec
        .lead_entries()
        .iter()
        .map(|&(i, j)| if keep(i, j) { cnum(rng) } else { C64::from(0.0) })
        .collect();
    spec.from_coordinates(&coords)
}

#[derive(Clone, Copy, Debug)]
pub struct FormSampler {
    /// Largest `|m_l|` of a nonzero mode.
    pub band: i64,
    pub amp: f64,
    pub entries: EntryFilter,
    pub bidegree: Option<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryFilter {
    All,
    Nilpotent,
    Diagonal,
}

impl EntryFilter {
    fn keep(self, i: usize, j: usize) -> bool {
        match self {
            EntryFilter::All => true,
            EntryFilter::Nilpotent => i < j,
            EntryFilter::Diagonal => i == j,
        }
    }
}

impl Default for FormSampler {
    fn default() -> Self {
        FormSampler { band: 1, amp: 0.3, entries: EntryFilter::All, bidegree: None }
    }
}

pub fn random_form<R: Rng + ?Sized>(
    rng: &mut R,
    geom: &Arc<TorusGeom>,
    spec: &Arc<GroupSpec>,
    shift: &Arc<FrequencyShift>,
    degree: usize,
    opts: &FormSampler,
) -> LieForm {
    let mut out = LieForm::zeros(geom.clone(), spec.clone(), shift.clone(), degree);
    let g = geom.g;
    let masks = out.frames().to_vec();
    for (fi, &mask) in masks.iter().enumerate() {
        if let Some(bd) = opts.bidegree {
            if crate::torus::frame::bidegree(g, mask) != bd {
                continue;
            }
        }
        for k in 0..geom.num_modes() {
            if geom.mode(k).iter().any(|x| x.abs() > opts.band) {
                continue;
            }
            let x = random_algebra(rng, spec, |i, j| opts.entries.keep(i, j)) * C64::from(opts.amp);
            out.add_matrix(fi, k, &x);
        }
    }
    out
}

/// Integer character exponents with values in `S`, `|m| ≤ max`.
pub fn random_character<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &GroupSpec,
    dim: usize,
    max: i64,
) -> Vec<Vec<i64>> {
    let n = spec.ambient_dim;
    let mut m = vec![vec![0i64; dim]; n];
    for l in 0..dim {
        loop {
            let mut v = vec![0i64; n];
            for t in &spec.torus_basis {
                let k = rng.gen_range(-max..=max);
                for i in 0..n {
                    v[i] += k * t[(i, i)].re.round() as i64;
                }
            }
            if v.iter().all(|x| x.abs() <= max) {
                for i in 0..n {
                    m[i][l] = v[i];
                }
                break;
            }
        }
    }
    m
}

#[derive(Clone, Copy, Debug)]
pub struct GaugeSampler {
    /// Largest character exponent; 0 disables the character factor.
    pub winding: i64,
    pub constant: bool,
    pub diagonal: bool,
    /// Bound on `sup|F_i − F_j|` for the diagonal exponent; `None` picks one
    /// small enough that `e^F` stays resolved by the band.
    pub diag_amp: Option<f64>,
    /// Band of the `𝔫`-valued exponent; `None` disables it.
    pub nil_band: Option<i64>,
    pub nil_amp: f64,
    /// Band of the forms the gauge will act on, used to size `diag_amp`.
    pub data_band: i64,
}

impl Default for GaugeSampler {
    fn default() -> Self {
        GaugeSampler {
            winding: 1,
            constant: true,
            diagonal: true,
            diag_amp: None,
            nil_band: Some(1),
            nil_amp: 0.3,
            data_band: 1,
        }
    }
}

impl GaugeSampler {
    /// Modes by which products of gauge data and data of `data_band` can
    /// spread: two actions on a quadratic expression.
    pub fn spread(&self) -> i64 {
        2 * self.data_band + 4 * self.winding + 4 * self.nil_band.unwrap_or(0)
    }

    /// Samplers whose products stay inside the cutoff of `geom`.
    pub fn fitted(geom: &TorusGeom) -> Vec<GaugeSampler> {
        let k = geom.cutoff as i64;
        let base = GaugeSampler::default();
        let mut out = Vec::new();
        for (winding, nil) in [(1, Some(0)), (0, Some(1)), (1, Some(1)), (0, None)] {
            for data_band in [1, 0] {
                let s = GaugeSampler { winding, nil_band: nil, data_band, ..base };
                if s.spread() <= k && !out.iter().any(|o: &GaugeSampler| (o.winding, o.nil_band) == (winding, nil)) {
                    out.push(s);
                }
            }
        }
        out
    }

    /// Sampler for a second gauge `h` such that `g h` acting on the same data
    /// stays resolved, `g` drawn from `self`.
    pub fn partner(&self, cutoff: usize) -> GaugeSampler {
        if 2 * self.spread() <= cutoff as i64 {
            return *self;
        }
        let h = GaugeSampler { winding: 0, ..*self };
        let amp = self.diag_amp.unwrap_or_else(|| resolved_exponent(cutoff, self.spread() + h.spread()));
        GaugeSampler { diag_amp: Some(amp), ..h }
    }
}

/// Largest `s` with `s^{k+1}/(k+1)! ≤ 1e-12`, `k = cutoff − margin`: then
/// `e^F` with `sup|F| ≤ s` stays resolved after shifts by up to `margin` modes.
pub fn resolved_exponent(cutoff: usize, margin: i64) -> f64 {
    let k = (cutoff as i64 - margin).max(1) as i32 + 1;
    let fact: f64 = (1..=k).map(f64::from).product();
    (1e-12 * fact).powf(1.0 / f64::from(k))
}

/// Entries of an abelian ideal of `𝔫`: levels at least half the top level.
/// Exponents supported there satisfy `F² = 0`, so `exp F = 1 + F`.
pub fn abelian_entries(spec: &GroupSpec) -> impl Fn(usize, usize) -> bool + '_ {
    let top = spec.max_level();
    move |i, j| i < j && 2 * spec.entry_level(i, j) > top
}

/// `character · constant · exp(diagonal) · exp(nilpotent)`, each factor optional.
pub fn random_gauge<R: Rng + ?Sized>(
    rng: &mut R,
    geom: &Arc<TorusGeom>,
    spec: &Arc<GroupSpec>,
    shift: &Arc<FrequencyShift>,
    opts: &GaugeSampler,
) -> GaugeMap {
    let mut g = GaugeMap::identity(geom.clone(), spec.clone(), shift.clone());
    if opts.winding > 0 {
        let m = random_character(rng, spec, geom.dim(), opts.winding);
        g.push(GaugeFactor::Character(m)).expect("character in S");
    }
    if opts.constant {
        let x = random_algebra(rng, spec, |i, j| shift.is_trivial_entry(i, j)) * C64::from(0.5);
        g.push(GaugeFactor::Constant(linalg::expm(&x))).expect("constant in G");
    }
    if opts.diagonal && spec.rank() > 0 {
        let sup = opts.diag_amp.unwrap_or_else(|| resolved_exponent(geom.cutoff, opts.spread()));
        let sampler = FormSampler { band: 1, amp: 1.0, entries: EntryFilter::Diagonal, bidegree: None };
        let f = random_form(rng, geom, spec, shift, 0, &sampler);
        let l1 = (0..spec.ambient_dim)
            .map(|i| f.slice(0, i, i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        if l1 > 0.0 && sup > 0.0 {
            g.push(GaugeFactor::Exp(f.scale(C64::from(sup / (2.0 * l1))))).expect("diagonal exponent");
        }
    }
    if let Some(band) = opts.nil_band {
        if !spec.nilpotent_basis.is_empty() {
            let keep = abelian_entries(spec);
            let mut f = LieForm::zeros(geom.clone(), spec.clone(), shift.clone(), 0);
            for k in 0..geom.num_modes() {
                if geom.mode(k).iter().any(|x| x.abs() > band) {
                    continue;
                }
                let x = random_algebra(rng, spec, &keep) * C64::from(opts.nil_amp);
                f.add_matrix(0, k, &x);
            }
            g.push(GaugeFactor::Exp(f)).expect("nilpotent exponent");
        }
    }
    g
}
