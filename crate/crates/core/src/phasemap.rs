//! Region labels, separatrices, transition orders and grid scans over
//! coupling space.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AtomicSystem, Pair};
use crate::varsurface::{candidate_for, minimize, CandidateKind};

/// Ground-state region: normal or superradiant on a single transition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionLabel {
    Normal,
    S(Pair),
}

impl RegionLabel {
    pub fn pair(&self) -> Option<Pair> {
        match self {
            RegionLabel::Normal => None,
            RegionLabel::S(p) => Some(*p),
        }
    }
}

impl From<CandidateKind> for RegionLabel {
    fn from(kind: CandidateKind) -> Self {
        kind.pair().map_or(RegionLabel::Normal, RegionLabel::S)
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionLabel::Normal => write!(f, "N"),
            RegionLabel::S(p) => write!(f, "S_{}_{}", p.j, p.k),
        }
    }
}

impl FromStr for RegionLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "N" => Ok(RegionLabel::Normal),
            _ => s
                .strip_prefix("S_")
                .ok_or_else(|| Error::InvalidArgument(format!("bad region label '{s}'")))?
                .parse()
                .map(RegionLabel::S),
        }
    }
}

impl Serialize for RegionLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RegionLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Variational label and energy per particle at the system's couplings.
pub fn classify(system: &AtomicSystem) -> (RegionLabel, f64) {
    let m = minimize(system);
    (m.kind.into(), m.energy().unwrap_or(0.0))
}

/// Coupling at which the collective candidate of `pair` reaches energy
/// `level`: `mu = sqrt(Omega) (sqrt(omega_j - level) + sqrt(omega_k - level)) / 2`.
/// `None` when `level > omega_j`.
pub fn coupling_for_energy(system: &AtomicSystem, pair: Pair, level: f64) -> Result<Option<f64>> {
    let t = system.transition(pair)?;
    let lower = system.level(pair.j) - level;
    if lower < 0.0 {
        return Ok(None);
    }
    let upper = system.level(pair.k) - level;
    Ok(Some(t.mode_freq.sqrt() * (lower.sqrt() + upper.sqrt()) / 2.0))
}

/// Critical coupling `mu*` of the N to S(j,k) separatrix: the bifurcation
/// `sqrt(omega_k Omega)/2` for `j = 1`, the Maxwell set
/// `sqrt(Omega)(sqrt(omega_j) + sqrt(omega_k))/2` otherwise.
pub fn normal_boundary(system: &AtomicSystem, pair: Pair) -> Result<f64> {
    Ok(coupling_for_energy(system, pair, 0.0)?.expect("levels are non-negative"))
}

/// Closed-form S(A) to S(B) boundary: the `+` root of
/// `4 mu_A^2 = Omega_A/(8 mu_B^2 Omega_B) ((zeta_j + zeta_k)/2 +- sqrt(zeta_j zeta_k))`
/// with `zeta_i = 16 mu_B^4 + d_B^2 Omega_B^2 + 8 mu_B^2 Omega_B (2 omega_i - omega_j' - omega_k')`.
/// Both signs are returned as `(plus, minus)`; `None` when `zeta_j zeta_k < 0`
/// or `mu_B = 0`.
pub fn zeta_boundary(system: &AtomicSystem, a: Pair, b: Pair, mu_b: f64) -> Result<Option<(f64, f64)>> {
    let ta = system.transition(a)?;
    let tb = system.transition(b)?;
    if mu_b <= 0.0 {
        return Ok(None);
    }
    let (wj2, wk2) = (system.level(b.j), system.level(b.k));
    let m2 = mu_b * mu_b;
    let zeta = |w: f64| {
        16.0 * m2 * m2
            + (wk2 - wj2).powi(2) * tb.mode_freq.powi(2)
            + 8.0 * m2 * tb.mode_freq * (2.0 * w - wk2 - wj2)
    };
    let (zj, zk) = (zeta(system.level(a.j)), zeta(system.level(a.k)));
    if zj < 0.0 || zk < 0.0 {
        return Ok(None);
    }
    let pref = ta.mode_freq / (8.0 * m2 * tb.mode_freq);
    let root = (zj * zk).sqrt();
    let plus = (pref * ((zj + zk) / 2.0 + root) / 4.0).sqrt();
    let minus = (pref * ((zj + zk) / 2.0 - root) / 4.0).max(0.0).sqrt();
    Ok(Some((plus, minus)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryKind {
    NormalCollective,
    CollectiveCollective,
}

/// Sampled separatrix between two regions in the `(mu_A, mu_B)` plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparatrixCurve {
    pub kind: BoundaryKind,
    pub labels: [RegionLabel; 2],
    pub order: u32,
    /// Couplings named by `axes` at each sample.
    pub axes: Vec<Pair>,
    pub points: Vec<Vec<f64>>,
    /// Largest |root - closed form| over the samples, when a closed form applies.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form_deviation: Option<f64>,
}

/// How [`collective_boundary`] samples the separatrix: `mu_A` is solved for
/// inside `solve_range` at every listed value of `mu_B`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub solve_range: (f64, f64),
    pub other_values: Vec<f64>,
    /// Coarse samples used to bracket the root before bisection.
    pub scan_points: usize,
}

impl SweepSpec {
    pub fn new(solve_range: (f64, f64), other_values: Vec<f64>) -> Self {
        SweepSpec { solve_range, other_values, scan_points: 64 }
    }
}

const ROOT_TOL: f64 = 1e-12;

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Energy of the collective candidate of `pair` with its coupling set to `mu`.
fn branch_energy(system: &AtomicSystem, pair: Pair, mu: f64) -> Result<Option<f64>> {
    let mut t = *system.transition(pair)?;
    t.mu = mu;
    Ok(candidate_for(system, &t).energy())
}

/// S(A) to S(B) Maxwell set by bracketed root-finding on `E_A(mu_A) = E_B(mu_B)`.
/// Samples of `mu_B` without a root in range are skipped; the call fails
/// only if no sample has one.
pub fn collective_boundary(
    system: &AtomicSystem,
    a: Pair,
    b: Pair,
    sweep: &SweepSpec,
) -> Result<SeparatrixCurve> {
    if a == b {
        return Err(Error::IdenticalRegions(format!("S_{}_{}", a.j, a.k)));
    }
    system.transition(a)?;
    system.transition(b)?;
    let (lo, hi) = sweep.solve_range;
    if !(lo < hi) || sweep.scan_points < 2 {
        return Err(Error::InvalidArgument("sweep needs lo < hi and >= 2 scan points".into()));
    }

    let mut points = Vec::new();
    let mut deviation: f64 = 0.0;
    for &mu_b in &sweep.other_values {
        let Some(eb) = branch_energy(system, b, mu_b)? else { continue };
        let diff = |mu_a: f64| -> Option<f64> {
            branch_energy(system, a, mu_a).ok().flatten().map(|ea| ea - eb)
        };
        let step = (hi - lo) / (sweep.scan_points - 1) as f64;
        let mut prev: Option<(f64, f64)> = None;
        let mut root = None;
        for i in 0..sweep.scan_points {
            let x = lo + step * i as f64;
            let Some(fx) = diff(x) else { continue };
            if let Some((px, pf)) = prev {
                if (pf <= 0.0) != (fx <= 0.0) {
                    root = Some(bisect(|m| diff(m).unwrap_or(f64::INFINITY), px, x));
                    break;
                }
            }
            prev = Some((x, fx));
        }
        if let Some(mu_a) = root {
            if let Some((plus, _)) = zeta_boundary(system, a, b, mu_b)? {
                deviation = deviation.max((plus - mu_a).abs());
            }
            points.push(vec![mu_a, mu_b]);
        }
    }
    if points.is_empty() {
        return Err(Error::NoRoot);
    }
    let (la, lb) = (RegionLabel::S(a), RegionLabel::S(b));
    Ok(SeparatrixCurve {
        kind: BoundaryKind::CollectiveCollective,
        labels: [la, lb],
        order: transition_order(la, lb)?,
        axes: vec![a, b],
        points,
        closed_form_deviation: Some(deviation),
    })
}

/// Ehrenfest order of the separatrix between two regions.
pub fn transition_order(a: RegionLabel, b: RegionLabel) -> Result<u32> {
    match (a, b) {
        _ if a == b => Err(Error::IdenticalRegions(a.to_string())),
        (RegionLabel::Normal, RegionLabel::S(p)) | (RegionLabel::S(p), RegionLabel::Normal) => {
            Ok(if p.j == 1 { 2 } else { 1 })
        }
        _ => Ok(1),
    }
}

/// One-parameter family of couplings.
#[derive(Clone, Debug, PartialEq)]
pub enum CouplingPath {
    /// `mu_pair = t`, everything else as in the base system.
    Line(Pair),
    /// `mu_a = radius cos t`, `mu_b = radius sin t`.
    Zeta { a: Pair, b: Pair, radius: f64 },
}

impl CouplingPath {
    pub fn at(&self, base: &AtomicSystem, t: f64) -> Result<AtomicSystem> {
        match *self {
            CouplingPath::Line(p) => base.with_couplings(&[(p, t)]),
            CouplingPath::Zeta { a, b, radius } => {
                base.with_couplings(&[(a, radius * t.cos()), (b, radius * t.sin())])
            }
        }
    }

    pub fn label_at(&self, base: &AtomicSystem, t: f64) -> Result<RegionLabel> {
        Ok(classify(&self.at(base, t)?).0)
    }
}

/// Locate the label change between `t_lo` and `t_hi` by bisection on the
/// region label. Fails if both ends carry the same label.
pub fn locate_crossing(
    system: &AtomicSystem,
    path: &CouplingPath,
    mut t_lo: f64,
    mut t_hi: f64,
) -> Result<(f64, RegionLabel, RegionLabel)> {
    let left = path.label_at(system, t_lo)?;
    let right = path.label_at(system, t_hi)?;
    if left == right {
        return Err(Error::NoRoot);
    }
    while t_hi - t_lo > ROOT_TOL * t_hi.abs().max(1.0) {
        let mid = 0.5 * (t_lo + t_hi);
        if path.label_at(system, mid)? == left {
            t_lo = mid;
        } else {
            t_hi = mid;
        }
    }
    Ok((0.5 * (t_lo + t_hi), left, right))
}

const PROBE_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

fn binomial(m: u32, i: u32) -> f64 {
    (0..i).fold(1.0, |acc, r| acc * (m - r) as f64 / (r + 1) as f64)
}

/// One-sided `m`-th derivative estimate, `side = +1` forward, `-1` backward,
/// Richardson-extrapolated over [`PROBE_STEPS`].
fn one_sided_derivative<F: Fn(f64) -> f64>(f: &F, t: f64, m: u32, side: f64) -> f64 {
    let raw: Vec<f64> = PROBE_STEPS
        .iter()
        .map(|&eps| {
            let h = side * eps;
            let sum: f64 = (0..=m)
                .map(|i| {
                    let sign = if (m - i) % 2 == 0 { 1.0 } else { -1.0 };
                    sign * binomial(m, i) * f(t + i as f64 * h)
                })
                .sum();
            sum / h.powi(m as i32)
        })
        .collect();
    // one-sided differences are O(h); halving steps twice
    let r1a = 2.0 * raw[1] - raw[0];
    let r1b = 2.0 * raw[2] - raw[1];
    (4.0 * r1b - r1a) / 3.0
}

/// Lowest derivative order at which the minimum energy along `path` is
/// discontinuous at parameter `t`.
pub fn ehrenfest_probe(system: &AtomicSystem, path: &CouplingPath, t: f64, max_order: u32) -> Result<u32> {
    system.ensure_valid()?;
    path.at(system, t)?;
    let f = |s: f64| path.at(system, s).map(|sys| classify(&sys).1).unwrap_or(f64::NAN);
    for m in 1..=max_order {
        let plus = one_sided_derivative(&f, t, m, 1.0);
        let minus = one_sided_derivative(&f, t, m, -1.0);
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite);
        }
        if (plus - minus).abs() > 1e-3 * plus.abs().max(minus.abs()).max(1.0) {
            return Ok(m);
        }
    }
    Err(Error::NoDiscontinuity(max_order))
}

/// One scanned coupling: `resolution` evenly spaced values from `lo` to `hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub pair: Pair,
    pub lo: f64,
    pub hi: f64,
}

impl Axis {
    pub fn new(pair: Pair, lo: f64, hi: f64) -> Self {
        Axis { pair, lo, hi }
    }

    pub fn value(&self, i: usize, resolution: usize) -> f64 {
        if resolution <= 1 {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (resolution - 1) as f64
        }
    }

    pub fn values(&self, resolution: usize) -> Vec<f64> {
        (0..resolution).map(|i| self.value(i, resolution)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    /// Coupling values in axis order.
    pub couplings: Vec<f64>,
    pub label: RegionLabel,
    pub energy: f64,
}

/// Row-major grid: the last axis varies fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub axes: Vec<Axis>,
    pub resolution: usize,
    pub cells: Vec<PhaseCell>,
}

impl PhaseGrid {
    pub fn labels(&self) -> Vec<RegionLabel> {
        let mut set: Vec<RegionLabel> = self.cells.iter().map(|c| c.label).collect();
        set.sort();
        set.dedup();
        set
    }

    pub fn index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.resolution + i)
    }

    pub fn cell(&self, idx: &[usize]) -> &PhaseCell {
        &self.cells[self.index(idx)]
    }

    /// Counts per label, in label order.
    pub fn census(&self) -> BTreeMap<RegionLabel, usize> {
        let mut out = BTreeMap::new();
        for c in &self.cells {
            *out.entry(c.label).or_insert(0) += 1;
        }
        out
    }
}

fn multi_index(mut flat: usize, dims: usize, resolution: usize) -> Vec<usize> {
    let mut idx = vec![0; dims];
    for d in (0..dims).rev() {
        idx[d] = flat % resolution;
        flat /= resolution;
    }
    idx
}

fn check_axes(system: &AtomicSystem, axes: &[Axis]) -> Result<()> {
    if axes.is_empty() || axes.len() > 3 {
        return Err(Error::InvalidArgument(format!("need 1 to 3 axes, got {}", axes.len())));
    }
    for (i, a) in axes.iter().enumerate() {
        system.transition(a.pair)?;
        if axes[..i].iter().any(|b| b.pair == a.pair) {
            return Err(Error::InvalidArgument(format!("axis {} listed twice", a.pair)));
        }
        if !(a.lo.is_finite() && a.hi.is_finite()) || a.lo < 0.0 || a.hi < 0.0 {
            return Err(Error::InvalidArgument(format!("axis {} needs finite couplings >= 0", a.pair)));
        }
    }
    Ok(())
}

/// Classify every grid point. Output order is fixed by the grid index,
/// independent of scheduling.
pub fn scan_grid(system: &AtomicSystem, axes: &[Axis], resolution: usize) -> Result<PhaseGrid> {
    scan_grid_with(system, axes, resolution, classify)
}

/// [`scan_grid`] with a custom per-cell classifier.
pub fn scan_grid_with<F>(system: &AtomicSystem, axes: &[Axis], resolution: usize, classifier: F) -> Result<PhaseGrid>
where
    F: Fn(&AtomicSystem) -> (RegionLabel, f64) + Sync,
{
    system.ensure_valid()?;
    check_axes(system, axes)?;
    if resolution == 0 {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    let total = resolution
        .checked_pow(axes.len() as u32)
        .ok_or_else(|| Error::InvalidArgument("grid too large".into()))?;
    let cells = (0..total)
        .into_par_iter()
        .map(|flat| {
            let idx = multi_index(flat, axes.len(), resolution);
            let couplings: Vec<f64> = axes.iter().zip(&idx).map(|(a, &i)| a.value(i, resolution)).collect();
            let mut s = system.clone();
            for (a, &mu) in axes.iter().zip(&couplings) {
                s.set_mu(a.pair, mu).expect("axes checked");
            }
            let (label, energy) = classifier(&s);
            PhaseCell { couplings, label, energy }
        })
        .collect();
    Ok(PhaseGrid { axes: axes.to_vec(), resolution, cells })
}

/// Separatrices of a 2-axis grid, traced by bisecting every label change
/// between neighbouring cells along both axes. Points are grouped per
/// label pair and sorted.
pub fn trace_separatrices(system: &AtomicSystem, grid: &PhaseGrid) -> Result<Vec<SeparatrixCurve>> {
    if grid.axes.len() != 2 {
        return Err(Error::InvalidArgument("separatrix tracing needs exactly 2 axes".into()));
    }
    let res = grid.resolution;
    let mut jobs = Vec::new();
    for along in 0..2 {
        let fixed = 1 - along;
        for f in 0..res {
            for i in 0..res.saturating_sub(1) {
                let mut a = [0; 2];
                a[along] = i;
                a[fixed] = f;
                let mut b = a;
                b[along] = i + 1;
                if grid.cell(&a).label != grid.cell(&b).label {
                    jobs.push((along, a, b));
                }
            }
        }
    }
    let found: Vec<(RegionLabel, RegionLabel, Vec<f64>)> = jobs
        .into_par_iter()
        .map(|(along, a, b)| -> Result<_> {
            let fixed = 1 - along;
            let mut base = system.clone();
            base.set_mu(grid.axes[fixed].pair, grid.cell(&a).couplings[fixed])?;
            let path = CouplingPath::Line(grid.axes[along].pair);
            let (t, l, r) = locate_crossing(&base, &path, grid.cell(&a).couplings[along], grid.cell(&b).couplings[along])?;
            let mut point = grid.cell(&a).couplings.clone();
            point[along] = t;
            Ok(if l <= r { (l, r, point) } else { (r, l, point) })
        })
        .collect::<Result<_>>()?;

    let mut groups: BTreeMap<(RegionLabel, RegionLabel), Vec<Vec<f64>>> = BTreeMap::new();
    for (l, r, p) in found {
        groups.entry((l, r)).or_default().push(p);
    }
    groups
        .into_iter()
        .map(|((l, r), mut points)| {
            points.sort_by(|x, y| x.partial_cmp(y).expect("finite couplings"));
            points.dedup();
            Ok(SeparatrixCurve {
                kind: if l == RegionLabel::Normal || r == RegionLabel::Normal {
                    BoundaryKind::NormalCollective
                } else {
                    BoundaryKind::CollectiveCollective
                },
                labels: [l, r],
                order: transition_order(l, r)?,
                axes: grid.axes.iter().map(|a| a.pair).collect(),
                points,
                closed_form_deviation: None,
            })
        })
        .collect()
}
