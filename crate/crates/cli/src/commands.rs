//! One function per subcommand. Each returns both renderings of its result.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use shellkp::kronig1d::{asymptotics_report, band_structure, ground_state_symmetry, AsymptoticsReport};
use shellkp::oracle::{compare_in_gap, GapComparison};
use shellkp::spectral_map::{
    build_spectrum_map, default_anchor, gap_eigenvalues, m_function_ladder, transfer_norm_profile, IntervalKind,
};
use shellkp::welsh::{decade_windows, kepler_trace_with_fallback, phase_unbounded_test, welsh_scan, PhaseTest};
use shellkp::{classify, make_interaction, Channel, Geometry, Interaction, InteractionClass, WelshReport};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{fmt17, opt, to_json, Table};
use crate::Format;

pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub seed: u64,
}

pub struct Rendered {
    pub json: String,
    pub csv: Table,
    pub default_format: Format,
}

fn rendered<S: Serialize>(payload: &S, csv: Table) -> Result<Rendered, CliError> {
    Ok(Rendered {
        json: to_json(payload)?,
        csv,
        default_format: Format::Json,
    })
}

#[derive(Serialize)]
struct BandEntry {
    band_index: usize,
    lower: f64,
    upper: f64,
    gap_to_next: Option<f64>,
}

#[derive(Serialize)]
struct BandsPayload {
    e0: f64,
    class: Option<InteractionClass<f64>>,
    bands: Vec<BandEntry>,
    asymptotics: Option<AsymptoticsReport<f64>>,
}

/// Spectrum intervals (bands joined across closed gaps), at least `want + 1`
/// of them when the spectrum has that many, so the last row has a gap.
fn merged_bands(p: &Interaction, g: &Geometry, want: usize, e_min: Option<f64>, e_max: Option<f64>) -> Result<Vec<[f64; 2]>, CliError> {
    let zone = std::f64::consts::PI / g.spacing;
    let mut top = e_max.unwrap_or(((want + 3) as f64 * zone).powi(2));
    for _ in 0..12 {
        let bs = band_structure(p, g, e_min, top, 4 * (want + 1))?;
        let mut iv = bs.spectrum_intervals();
        // A band cut off at the scan limit has no real upper edge.
        if bs.truncated && iv.len() > 1 {
            iv.pop();
        }
        if e_max.is_some() || iv.len() > want || bs.open_gaps().is_empty() {
            if bs.open_gaps().is_empty() && e_max.is_none() {
                return Ok(vec![[bs.e0, f64::INFINITY]]);
            }
            return Ok(iv);
        }
        top *= 2.0;
    }
    Err(CliError::numerical(format!("could not resolve {want} bands below E = {top}")))
}

pub fn bands(ctx: &Context) -> Result<Rendered, CliError> {
    let p = ctx.cfg.interaction()?;
    let g = ctx.cfg.geometry()?;
    let b = &ctx.cfg.bands;
    let want = b.max_bands.unwrap_or(20);
    if want == 0 {
        return Err(CliError::config("max_bands must be at least 1"));
    }
    let iv = merged_bands(&p, &g, want, b.e_min, b.e_max)?;
    let mut table = Table::new(vec!["band_index", "E_lower", "E_upper", "gap_to_next"]);
    let mut entries = Vec::new();
    for (k, w) in iv.iter().take(want).enumerate() {
        let gap = iv.get(k + 1).map(|n| n[0] - w[1]);
        table.push(vec![k.to_string(), fmt17(w[0]), fmt17(w[1]), opt(gap)]);
        entries.push(BandEntry {
            band_index: k,
            lower: w[0],
            upper: w[1],
            gap_to_next: gap,
        });
    }
    let asymptotics = if want >= 10 && entries.len() > 1 {
        Some(asymptotics_report(&p, &g, want)?)
    } else {
        None
    };
    let payload = BandsPayload {
        e0: iv[0][0],
        class: classify(&p, &g).ok(),
        bands: entries,
        asymptotics,
    };
    Ok(Rendered {
        default_format: Format::Csv,
        ..rendered(&payload, table)?
    })
}

pub fn classify_cmd(ctx: &Context) -> Result<Rendered, CliError> {
    let c = classify(&ctx.cfg.interaction()?, &ctx.cfg.geometry()?)?;
    let mut table = Table::new(vec!["tag", "predicted_asymptote", "mu_exponent"]);
    table.push(vec![format!("{:?}", c.tag), fmt17(c.predicted_asymptote), c.mu_exponent.to_string()]);
    rendered(&c, table)
}

pub fn ground_symmetry(ctx: &Context) -> Result<Rendered, CliError> {
    let r = ground_state_symmetry(&ctx.cfg.interaction()?, &ctx.cfg.geometry()?)?;
    let mut table = Table::new(vec!["e0", "symmetry", "residual"]);
    table.push(vec![fmt17(r.e0), format!("{:?}", r.symmetry), fmt17(r.residual)]);
    rendered(&r, table)
}

pub fn spectrum_map(ctx: &Context) -> Result<Rendered, CliError> {
    let p = ctx.cfg.interaction()?;
    let g = ctx.cfg.geometry()?;
    let nu = ctx.cfg.nu_or(3)?;
    let s = &ctx.cfg.spectrum_map;
    let e_cutoff = match s.e_cutoff {
        Some(e) => e,
        None => {
            let e0 = ground_state_symmetry(&p, &g)?.e0;
            (e0 + 1.0).max((4.0 * std::f64::consts::PI / g.spacing).powi(2))
        }
    };
    let l_range = (s.l_min.unwrap_or(0), s.l_max.unwrap_or(4));
    let map = build_spectrum_map(&p, &g, nu, e_cutoff, l_range, s.r_max.unwrap_or(g.r_max()))?;
    let mut table = Table::new(vec!["lo", "hi", "kind", "growth_rate", "floquet_exponent", "largest_empty"]);
    for (iv, dg) in map.intervals.iter().zip(&map.diagnostics) {
        let kind = match iv.kind {
            IntervalKind::AbsolutelyContinuous => "ac",
            IntervalKind::DensePointCandidate => "dense_point",
        };
        table.push(vec![
            fmt17(iv.lo),
            fmt17(iv.hi),
            kind.into(),
            fmt17(dg.growth_rate),
            fmt17(dg.floquet_exponent),
            opt(dg.largest_empty),
        ]);
    }
    rendered(&map, table)
}

pub fn transfer_norm(ctx: &Context) -> Result<Rendered, CliError> {
    let p = ctx.cfg.interaction()?;
    let g = ctx.cfg.geometry()?;
    let t = &ctx.cfg.transfer_norm;
    let energy = t.energy.ok_or_else(|| CliError::config("transfer-norm needs --energy"))?;
    let ch = Channel::new(ctx.cfg.nu_or(3)?, t.l.unwrap_or(0))?;
    let prof = transfer_norm_profile(
        &ch,
        &p,
        &g,
        energy,
        t.x0.unwrap_or(10.0 * g.spacing),
        t.periods.unwrap_or(g.count_hint),
    )?;
    let mut table = Table::new(vec!["radius", "log_norm"]);
    for (r, n) in prof.radii.iter().zip(&prof.log_norms) {
        table.push(vec![fmt17(*r), fmt17(*n)]);
    }
    rendered(&prof, table)
}

#[derive(Serialize)]
struct GapEigsPayload {
    gap_index: usize,
    channels: BTreeMap<u32, Vec<f64>>,
}

pub fn gap_eigs(ctx: &Context) -> Result<Rendered, CliError> {
    let p = ctx.cfg.interaction()?;
    let g = ctx.cfg.geometry()?;
    let s = &ctx.cfg.gap_eigs;
    let gap_index = s.gap_index.unwrap_or(1);
    let channels = gap_eigenvalues(
        &p,
        &g,
        ctx.cfg.nu_or(3)?,
        gap_index,
        (s.l_min.unwrap_or(0), s.l_max.unwrap_or(10)),
        s.r_max.unwrap_or(g.r_max()),
    )?;
    let mut table = Table::new(vec!["l", "energy"]);
    for (l, eigs) in &channels {
        for e in eigs {
            table.push(vec![l.to_string(), fmt17(*e)]);
        }
    }
    rendered(&GapEigsPayload { gap_index, channels }, table)
}

#[derive(Serialize)]
struct WelshPayload {
    #[serde(flatten)]
    report: WelshReport,
    phase_test: PhaseTest<f64>,
}

pub fn welsh(ctx: &Context) -> Result<Rendered, CliError> {
    let nu = ctx.cfg.nu_or(2)?;
    if nu != 2 {
        return Err(CliError::config(format!(
            "welsh needs nu = 2; for nu = {nu} the centrifugal term is non-negative and there is no discrete spectrum below E0"
        )));
    }
    let p = ctx.cfg.interaction()?;
    let g = ctx.cfg.geometry()?;
    let w = &ctx.cfg.welsh;
    let r_max = w.r_max.unwrap_or(1000.0 * g.spacing);
    let report = welsh_scan(&p, &g, w.n_wanted.unwrap_or(3), r_max)?;
    let phase_test = phase_unbounded_test(&p, &g, &decade_windows(r_max / 1000.0, r_max))?;
    if let Some(path) = &w.trace {
        let tr = kepler_trace_with_fallback(&p, &g, g.offset, r_max)?;
        let mut t = Table::new(vec!["r", "phi", "gamma", "jump"]);
        for i in 0..tr.radii.len() {
            t.push(vec![fmt17(tr.radii[i]), fmt17(tr.phi[i]), fmt17(tr.gamma_phase[i]), fmt17(tr.jumps[i])]);
        }
        std::fs::write(path, t.render()?)?;
    }
    let mut table = Table::new(vec!["index", "energy", "matching_defect"]);
    for (i, (e, m)) in report.eigenvalues_found.iter().zip(&report.matching_defects).enumerate() {
        table.push(vec![i.to_string(), fmt17(*e), fmt17(*m)]);
    }
    rendered(&WelshPayload { report, phase_test }, table)
}

pub fn m_function(ctx: &Context) -> Result<Rendered, CliError> {
    let p = ctx.cfg.interaction()?;
    let g = ctx.cfg.geometry()?;
    let m = &ctx.cfg.m_function;
    let energy = m.energy.ok_or_else(|| CliError::config("m-function needs --energy"))?;
    let ch = Channel::new(ctx.cfg.nu_or(3)?, m.l.unwrap_or(0))?;
    let eps = m.epsilons.clone().unwrap_or_else(|| vec![1e-1, 1e-2, 1e-3, 1e-4]);
    let domain = (m.x0.unwrap_or(default_anchor(&g)), m.r_max.unwrap_or(g.r_max()));
    let ladder = m_function_ladder(&ch, &p, &g, energy, &eps, domain)?;
    let mut table = Table::new(vec!["epsilon", "re_m", "im_m", "abs_m"]);
    for e in &ladder.estimates {
        table.push(vec![fmt17(e.epsilon), fmt17(e.re_m), fmt17(e.im_m), fmt17(e.abs_m)]);
    }
    rendered(&ladder, table)
}

/// A random interaction of the given class: δ, δ′, intermediate, general.
fn random_interaction(rng: &mut ChaCha8Rng, class: usize) -> Interaction {
    let sign = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    match class {
        0 => Interaction::delta_type(rng.gen_range(0.5..3.0) * sign(rng)),
        1 => Interaction::delta_prime_type(rng.gen_range(0.3..1.0) * sign(rng)),
        2 => {
            let g: f64 = rng.gen_range(1.2..2.5);
            make_interaction(rng.gen_range(-1.0..1.0), 0.0, g, 1.0 / g, 0.0).expect("det = 1")
        }
        _ => {
            let b: f64 = rng.gen_range(0.3..1.0) * sign(rng);
            let g: f64 = rng.gen_range(0.5..1.5);
            let d: f64 = rng.gen_range(0.5..1.5);
            make_interaction((g * d - 1.0) / b, b, g, d, 0.0).expect("det = 1")
        }
    }
}

#[derive(Serialize)]
struct OracleCase {
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    nu: u32,
    l: u32,
    cells: usize,
    gap: [f64; 2],
    comparison: GapComparison<f64>,
    agree: bool,
}

#[derive(Serialize)]
struct OraclePayload {
    seed: u64,
    h: f64,
    all_agree: bool,
    cases: Vec<OracleCase>,
}

pub fn oracle_check(ctx: &Context) -> Result<Rendered, CliError> {
    let o = &ctx.cfg.oracle_check;
    let n = o.configs.unwrap_or(5);
    let d = ctx.cfg.geometry()?.spacing;
    let h = o.h.unwrap_or(1.0 / 256.0) * d;
    // Draw every configuration first so the sweep does not depend on scheduling.
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut drawn = Vec::with_capacity(n);
    let mut attempts = 0;
    while drawn.len() < n && attempts < 20 * n.max(1) {
        attempts += 1;
        let p = random_interaction(&mut rng, drawn.len() % 4);
        let nu: u32 = if rng.gen_bool(0.5) { 2 } else { 3 };
        let l: u32 = rng.gen_range(0..3);
        let cells: usize = rng.gen_range(10..15);
        let g = Geometry::new(d)?.with_count_hint(cells);
        let Ok(bs) = band_structure(&p, &g, None, 250.0 / (d * d), 6) else { continue };
        let Some(gap) = bs.gaps.iter().copied().find(|gp| gp[1] - gp[0] >= 0.5 / (d * d)) else { continue };
        drawn.push((p, nu, l, cells, g, gap));
    }
    if drawn.len() < n {
        return Err(CliError::numerical(format!("only {} of {n} random configurations have an open gap", drawn.len())));
    }
    let cases = drawn
        .par_iter()
        .map(|(p, nu, l, cells, g, gap)| {
            let ch = Channel::new(*nu, *l)?;
            let comparison = compare_in_gap(&ch, p, g, *gap, g.r_max(), h)?;
            Ok(OracleCase {
                alpha: p.alpha(),
                beta: p.beta(),
                gamma: p.gamma(),
                delta: p.delta(),
                nu: *nu,
                l: *l,
                cells: *cells,
                gap: *gap,
                agree: comparison.counts_agree(),
                comparison,
            })
        })
        .collect::<Result<Vec<_>, shellkp::SpectralError>>()?;
    let mut table = Table::new(vec![
        "case", "alpha", "beta", "gamma", "delta", "nu", "l", "window_lo", "window_hi", "transfer_count",
        "fd_coarse_count", "fd_fine_count", "max_position_error",
    ]);
    for (i, c) in cases.iter().enumerate() {
        let cmp = &c.comparison;
        table.push(vec![
            i.to_string(),
            fmt17(c.alpha),
            fmt17(c.beta),
            fmt17(c.gamma),
            fmt17(c.delta),
            c.nu.to_string(),
            c.l.to_string(),
            fmt17(cmp.window.0),
            fmt17(cmp.window.1),
            cmp.transfer.len().to_string(),
            cmp.fd_coarse_count.to_string(),
            cmp.fd_fine_count.to_string(),
            opt(cmp.max_position_error),
        ]);
    }
    let payload = OraclePayload {
        seed: ctx.seed,
        h,
        all_agree: cases.iter().all(|c| c.agree),
        cases,
    };
    rendered(&payload, table)
}
