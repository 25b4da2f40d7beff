use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use multidicke::export::{grid_csv, json_document, observables_csv, write_atomic, Num, RunMeta, SweepRow};
use multidicke::model::{lmax, validate as validate_system};
use multidicke::observables::expectations;
use multidicke::phasemap::{
    classify, ehrenfest_probe, locate_crossing, normal_boundary, scan_grid, trace_separatrices, transition_order,
    Axis, CouplingPath, RegionLabel, SeparatrixCurve,
};
use multidicke::quantum::{converge_cutoff, delta_nu, ground_state, DeltaNu, ExactConfig, QuantumGroundResult, SolverConfig};
use multidicke::rwa::{classify_rwa, excitation_weights, rwa_rescale, scan_grid_rwa};
use multidicke::varsurface::minimize;
use multidicke::{AtomicSystem, Pair};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{parse_cutoffs, parse_pairs, parse_ranges, ExactArgs, GridArgs, SweepArgs};
use crate::{load_system, read_system, CliError};

type Result<T> = std::result::Result<T, CliError>;

/// Start cutoff per mode when `--cutoff auto`.
const AUTO_CUTOFF_START: u32 = 4;

#[derive(Serialize)]
struct Hashed<'a, A> {
    command: &'a str,
    system: &'a AtomicSystem,
    args: &'a A,
}

fn run_meta<A: Serialize>(command: &str, system: &AtomicSystem, args: &A, seed: u64) -> Result<RunMeta> {
    Ok(RunMeta::new(command, &Hashed { command, system, args }, seed)?)
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn check_resolution(res: usize) -> Result<()> {
    if res < 2 {
        return Err(config_err(format!("resolution must be at least 2, got {res}")));
    }
    Ok(())
}

fn axes_from(system: &AtomicSystem, axes: &str, range: &str) -> Result<Vec<Axis>> {
    let pairs = parse_pairs(axes)?;
    let ranges = parse_ranges(range, pairs.len())?;
    for &p in &pairs {
        system.transition(p)?;
    }
    Ok(pairs.into_iter().zip(ranges).map(|(p, (lo, hi))| Axis::new(p, lo, hi)).collect())
}

/// `<out stem>.separatrices.json` next to the grid file.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("separatrices.json")
}

/// Separatrices in the coordinates of the listed couplings. For the RWA
/// problem the full problem is traced at half the couplings and mapped back.
fn separatrices(system: &AtomicSystem, axes: &[Axis], res: usize, rwa: bool) -> Result<Vec<SeparatrixCurve>> {
    if !rwa {
        return Ok(trace_separatrices(system, &scan_grid(system, axes, res)?)?);
    }
    let half: Vec<Axis> = axes.iter().map(|a| Axis::new(a.pair, a.lo / 2.0, a.hi / 2.0)).collect();
    let base = rwa_rescale(system);
    let mut curves = trace_separatrices(&base, &scan_grid(&base, &half, res)?)?;
    for c in &mut curves {
        c.points.iter_mut().flatten().for_each(|x| *x *= 2.0);
    }
    Ok(curves)
}

pub fn phase_diagram(a: &GridArgs) -> Result<()> {
    let system = load_system(&a.system.system)?;
    check_resolution(a.res)?;
    let axes = axes_from(&system, &a.axes, &a.range)?;
    let grid = if a.rwa { scan_grid_rwa(&system, &axes, a.res)? } else { scan_grid(&system, &axes, a.res)? };
    let curves = if axes.len() == 2 { separatrices(&system, &axes, a.res, a.rwa)? } else { Vec::new() };

    #[derive(Serialize)]
    struct Sidecar<'a> {
        rwa: bool,
        census: BTreeMap<String, usize>,
        separatrices: &'a [SeparatrixCurve],
    }
    let census = grid.census().into_iter().map(|(l, c)| (l.to_string(), c)).collect();
    let meta = run_meta("phase-diagram", &system, a, a.seed)?;
    let csv = grid_csv(&meta, &grid)?;
    let json = json_document(&meta, &Sidecar { rwa: a.rwa, census, separatrices: &curves })?;
    write_atomic(&a.out, &csv)?;
    write_atomic(&sidecar_path(&a.out), &json)?;
    Ok(())
}

pub fn observables(a: &SweepArgs) -> Result<()> {
    let system = load_system(&a.system.system)?;
    check_resolution(a.res)?;
    let pairs = parse_pairs(&a.axes)?;
    for &p in &pairs {
        system.transition(p)?;
    }
    let path = match *pairs.as_slice() {
        [p] => CouplingPath::Line(p),
        [p, q] => {
            let radius = a.radius.ok_or_else(|| config_err("a two-axis sweep needs --radius"))?;
            if !(radius.is_finite() && radius >= 0.0) {
                return Err(config_err("--radius must be finite and >= 0"));
            }
            CouplingPath::Zeta { a: p, b: q, radius }
        }
        _ => return Err(config_err("observables sweeps take one or two axes")),
    };
    let default_range = if pairs.len() == 1 { "0:2".to_string() } else { format!("0:{}", std::f64::consts::FRAC_PI_2) };
    let (lo, hi) = parse_ranges(a.range.as_deref().unwrap_or(&default_range), 1)?[0];

    // the problem actually solved, and the path parameter mapping onto it
    let (base, solved, scale) = match (&path, a.rwa) {
        (_, false) => (system.clone(), path.clone(), 1.0),
        (CouplingPath::Line(p), true) => (rwa_rescale(&system), CouplingPath::Line(*p), 0.5),
        (CouplingPath::Zeta { a, b, radius }, true) => {
            (rwa_rescale(&system), CouplingPath::Zeta { a: *a, b: *b, radius: radius / 2.0 }, 1.0)
        }
    };
    let ts: Vec<f64> = (0..a.res).map(|i| lo + (hi - lo) * i as f64 / (a.res - 1) as f64).collect();
    let mut rows: Vec<SweepRow> = ts
        .par_iter()
        .map(|&t| -> Result<SweepRow> {
            let shown = path.at(&system, t)?;
            let s = solved.at(&base, t * scale)?;
            Ok(SweepRow {
                t,
                couplings: shown.transitions.iter().map(|tr| tr.mu).collect(),
                observables: expectations(&s, &minimize(&s))?,
                discontinuity: false,
            })
        })
        .collect::<Result<_>>()?;
    for i in 1..rows.len() {
        if rows[i].observables.region != rows[i - 1].observables.region {
            let (tc, _, _) = locate_crossing(&base, &solved, ts[i - 1] * scale, ts[i] * scale)?;
            rows[i].discontinuity = matches!(ehrenfest_probe(&base, &solved, tc, 3), Ok(1));
        }
    }
    let names: Vec<String> = system.pairs().iter().map(Pair::coupling_name).collect();
    let meta = run_meta("observables", &system, a, a.seed)?;
    write_atomic(&a.out, &observables_csv(&meta, &names, &rows)?)?;
    Ok(())
}

/// Systems to solve, in grid order (last axis fastest), and the scanned axes.
fn exact_points(system: &AtomicSystem, a: &ExactArgs) -> Result<(Vec<Axis>, Vec<AtomicSystem>)> {
    let mut base = system.clone();
    if let Some(na) = a.na {
        base.atom_count = na;
    }
    base.ensure_valid()?;
    let Some(axes) = &a.axes else { return Ok((Vec::new(), vec![base])) };
    check_resolution(a.res)?;
    let axes = axes_from(&base, axes, &a.range)?;
    let total = a.res.checked_pow(axes.len() as u32).ok_or_else(|| config_err("grid too large"))?;
    let points = (0..total)
        .map(|mut flat| {
            let mut couplings = vec![(axes[0].pair, 0.0); axes.len()];
            for d in (0..axes.len()).rev() {
                couplings[d] = (axes[d].pair, axes[d].value(flat % a.res, a.res));
                flat /= a.res;
            }
            base.with_couplings(&couplings)
        })
        .collect::<std::result::Result<_, _>>()?;
    Ok((axes, points))
}

fn exact_config(a: &ExactArgs) -> ExactConfig {
    ExactConfig {
        rwa: a.rwa,
        budget: a.budget,
        solver: SolverConfig { seed: a.seed, ..SolverConfig::default() },
        ..ExactConfig::default()
    }
}

fn solve_all(points: &[AtomicSystem], a: &ExactArgs) -> Result<Vec<QuantumGroundResult>> {
    let modes = points[0].transitions.len();
    let cutoffs = parse_cutoffs(&a.cutoff, modes)?;
    if !(a.tol > 0.0 && a.tol.is_finite()) {
        return Err(config_err("--tol must be positive"));
    }
    let config = exact_config(a);
    points
        .par_iter()
        .map(|s| -> Result<QuantumGroundResult> {
            Ok(match &cutoffs {
                Some(c) => ground_state(s, c, &config)?,
                None => converge_cutoff(s, &vec![AUTO_CUTOFF_START; modes], a.tol, &config)?.1,
            })
        })
        .collect()
}

fn warnings(r: &QuantumGroundResult) -> Vec<String> {
    let mut out = Vec::new();
    if !r.truncation_converged {
        out.push(format!("truncation unconverged: boundary weight {:e}", r.boundary_weight));
    }
    out
}

#[derive(Serialize)]
struct ExactPoint {
    #[serde(flatten)]
    result: QuantumGroundResult,
    /// `"A/B" -> (nu_B - nu_A)/(nu_A + nu_B)` for every pair of modes.
    delta_nu: BTreeMap<String, DeltaNu>,
    warnings: Vec<String>,
}

pub fn exact(a: &ExactArgs) -> Result<()> {
    let system = load_system(&a.system.system)?;
    let (_, points) = exact_points(&system, a)?;
    let results = solve_all(&points, a)?;
    let pairs = system.pairs();
    let data: Vec<ExactPoint> = results
        .into_iter()
        .map(|result| {
            let mut dn = BTreeMap::new();
            for (i, &p) in pairs.iter().enumerate() {
                for &q in &pairs[i + 1..] {
                    dn.insert(format!("{p}/{q}"), delta_nu(&result, p, q)?);
                }
            }
            let warnings = warnings(&result);
            Ok(ExactPoint { result, delta_nu: dn, warnings })
        })
        .collect::<Result<_>>()?;

    #[derive(Serialize)]
    struct Doc {
        points: Vec<ExactPoint>,
    }
    let meta = run_meta("exact", &system, a, a.seed)?;
    write_atomic(&a.out, &json_document(&meta, &Doc { points: data })?)?;
    Ok(())
}

#[derive(Serialize)]
struct ComparePoint {
    couplings: BTreeMap<String, f64>,
    e_var: f64,
    e_exact: f64,
    /// `e_var - e_exact`; non-negative up to solver accuracy.
    gap: f64,
    var_label: RegionLabel,
    exact_sector: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_nu: Option<DeltaNu>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels_agree: Option<bool>,
    near_separatrix: bool,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct CompareSummary {
    points: usize,
    min_gap: f64,
    max_gap: f64,
    mean_gap: f64,
    /// Modes `A/B` whose `delta_nu` sign is compared with the labels.
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostic_pair: Option<String>,
    /// Points with a comparable label that are not near a separatrix.
    compared: usize,
    agreement_fraction: Num,
}

/// Cells of a 2-axis grid within `radius` cells of a different variational label.
fn near_separatrix(labels: &[RegionLabel], res: usize, radius: usize) -> Vec<bool> {
    let at = |i: usize, j: usize| labels[i * res + j];
    (0..labels.len())
        .map(|flat| {
            let (i, j) = (flat / res, flat % res);
            let rows = i.saturating_sub(radius)..=(i + radius).min(res - 1);
            rows.into_iter().any(|r| {
                (j.saturating_sub(radius)..=(j + radius).min(res - 1)).any(|c| at(r, c) != at(i, j))
            })
        })
        .collect()
}

/// Cells this close (in grid steps) to a label change are left out of the
/// agreement statistic.
const SEPARATRIX_MARGIN: usize = 2;

pub fn compare(a: &ExactArgs) -> Result<()> {
    let system = load_system(&a.system.system)?;
    let (axes, points) = exact_points(&system, a)?;
    let results = solve_all(&points, a)?;

    let diagnostic = match axes.as_slice() {
        [x, y] => Some((x.pair, y.pair)),
        _ => {
            let pairs = system.pairs();
            (pairs.len() >= 2).then(|| (pairs[0], pairs[1]))
        }
    };
    let variational: Vec<(RegionLabel, f64)> =
        points.iter().map(|s| if a.rwa { classify_rwa(s) } else { classify(s) }).collect();
    let near = if axes.len() == 2 {
        let labels: Vec<RegionLabel> = variational.iter().map(|v| v.0).collect();
        near_separatrix(&labels, a.res, SEPARATRIX_MARGIN)
    } else {
        vec![false; points.len()]
    };

    let mut data = Vec::with_capacity(points.len());
    for ((r, &(label, e_var)), &near) in results.into_iter().zip(&variational).zip(&near) {
        let dn = diagnostic.map(|(p, q)| delta_nu(&r, p, q)).transpose()?;
        let labels_agree = match (diagnostic, dn) {
            (Some((p, q)), Some(DeltaNu::Defined(v))) if label == RegionLabel::S(p) || label == RegionLabel::S(q) => {
                Some((label == RegionLabel::S(p)) == (v < 0.0) && v != 0.0)
            }
            _ => None,
        };
        data.push(ComparePoint {
            couplings: r.couplings.clone(),
            e_var,
            e_exact: r.energy_per_particle,
            gap: e_var - r.energy_per_particle,
            var_label: label,
            exact_sector: r.sector.clone(),
            delta_nu: dn,
            labels_agree,
            near_separatrix: near,
            warnings: warnings(&r),
        });
    }

    let gaps: Vec<f64> = data.iter().map(|p| p.gap).collect();
    let counted: Vec<bool> =
        data.iter().filter(|p| !p.near_separatrix).filter_map(|p| p.labels_agree).collect();
    let summary = CompareSummary {
        points: data.len(),
        min_gap: gaps.iter().copied().fold(f64::INFINITY, f64::min),
        max_gap: gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_gap: gaps.iter().sum::<f64>() / gaps.len() as f64,
        diagnostic_pair: diagnostic.map(|(p, q)| format!("{p}/{q}")),
        compared: counted.len(),
        agreement_fraction: Num(counted.iter().filter(|&&x| x).count() as f64 / counted.len() as f64),
    };

    #[derive(Serialize)]
    struct Doc {
        summary: CompareSummary,
        points: Vec<ComparePoint>,
    }
    let meta = run_meta("compare", &system, a, a.seed)?;
    write_atomic(&a.out, &json_document(&meta, &Doc { summary, points: data })?)?;
    Ok(())
}

/// Human-readable report; an invalid system is a configuration error.
pub fn validate(source: &str) -> Result<String> {
    let system = read_system(source)?;
    let report = validate_system(&system);
    if !report.is_valid() {
        return Err(config_err(format!("invalid system: {report}")));
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "valid: n = {}, {} transitions (l_max = {}), {} atoms",
        system.n,
        system.transitions.len(),
        lmax(system.n)?,
        system.atom_count
    );
    for note in &report.notices {
        let _ = writeln!(out, "notice: {note}");
    }
    for t in &system.transitions {
        let p = t.pair();
        let _ = writeln!(
            out,
            "transition {p}: Omega = {}, mu = {}, N -> S_{}_{} at mu = {:.6} (order {})",
            t.mode_freq,
            t.mu,
            p.j,
            p.k,
            normal_boundary(&system, p)?,
            transition_order(RegionLabel::Normal, RegionLabel::S(p))?
        );
    }
    match excitation_weights(&system) {
        Ok(w) => {
            let _ = writeln!(out, "excitation weights: {:?}", w.lambda);
        }
        Err(e) => {
            let _ = writeln!(out, "excitation weights: {e}");
        }
    }
    let (label, energy) = classify(&system);
    let _ = writeln!(out, "variational ground state: {label}, energy per particle {energy}");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separatrix_margin() {
        use RegionLabel::Normal as N;
        let s = RegionLabel::S(Pair::new(1, 2));
        // 6x6, left three columns N
        let labels: Vec<RegionLabel> = (0..36).map(|f| if f % 6 < 3 { N } else { s }).collect();
        let near = near_separatrix(&labels, 6, 2);
        let cols: Vec<bool> = (0..6).map(|c| near[c]).collect();
        assert_eq!(cols, [false, true, true, true, true, false]);
    }

    #[test]
    fn sidecar_next_to_grid() {
        assert_eq!(sidecar_path(Path::new("out/grid.csv")), PathBuf::from("out/grid.separatrices.json"));
    }
}
