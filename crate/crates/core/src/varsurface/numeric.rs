//! Brute-force minimization of the reduced energy, independent of the
//! closed forms in `candidates`.
//!
//! The radii are written in hyperspherical form, `rho = tan(a_0) y` with
//! `y` a non-negative unit vector built from `a_1..a_{n-2}`. Every angle
//! lives in a compact box, so the `rho_j -> infinity` branches are reached
//! at the upper face `a_0 = atan(cap)` instead of escaping to infinity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_matter, reduced_energy_unchecked};
use crate::error::{Error, Result};
use crate::model::AtomicSystem;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericOptions {
    /// Stop when the projected gradient (in angle space) has infinity norm below this.
    pub tol: f64,
    /// Largest total matter radius `R_0` explored.
    pub cap: f64,
    /// Random starts in addition to the box center.
    pub random_starts: usize,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for NumericOptions {
    fn default() -> Self {
        NumericOptions { tol: 1e-8, cap: 1e6, random_starts: 7, seed: 0, max_iter: 20_000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NumericMinimum {
    /// `rho_2..rho_n`.
    pub radii: Vec<f64>,
    pub energy: f64,
    pub projected_gradient: f64,
    /// How many starts converged.
    pub converged_starts: usize,
}

struct Problem<'a> {
    system: &'a AtomicSystem,
    upper: Vec<f64>,
}

impl Problem<'_> {
    fn radii(&self, angles: &[f64]) -> Vec<f64> {
        let m = self.system.n - 1;
        let scale = angles[0].tan();
        let mut out = Vec::with_capacity(m);
        let mut running = scale;
        for i in 0..m {
            if i + 1 < m {
                let a = angles[i + 1];
                out.push(running * a.cos());
                running *= a.sin();
            } else {
                out.push(running);
            }
        }
        out.iter_mut().for_each(|r| *r = r.max(0.0));
        out
    }

    fn energy(&self, angles: &[f64]) -> f64 {
        reduced_energy_unchecked(self.system, &self.radii(angles))
    }

    fn gradient(&self, angles: &[f64]) -> Vec<f64> {
        const H: f64 = 1e-7;
        let mut g = vec![0.0; angles.len()];
        let mut x = angles.to_vec();
        for i in 0..angles.len() {
            let lo = (angles[i] - H).max(0.0);
            let hi = (angles[i] + H).min(self.upper[i]);
            x[i] = hi;
            let fp = self.energy(&x);
            x[i] = lo;
            let fm = self.energy(&x);
            x[i] = angles[i];
            g[i] = (fp - fm) / (hi - lo);
        }
        g
    }

    fn project(&self, x: &mut [f64]) {
        for (v, &u) in x.iter_mut().zip(&self.upper) {
            *v = v.clamp(0.0, u);
        }
    }

    fn projected_norm(&self, x: &[f64], g: &[f64]) -> f64 {
        x.iter()
            .zip(g)
            .zip(&self.upper)
            .map(|((&xi, &gi), &u)| {
                if (xi <= 0.0 && gi > 0.0) || (xi >= u && gi < 0.0) {
                    0.0
                } else {
                    gi.abs()
                }
            })
            .fold(0.0, f64::max)
    }

    /// Projected gradient descent with Barzilai-Borwein steps and Armijo
    /// backtracking. Returns the end point and its projected gradient norm.
    fn descend(&self, start: Vec<f64>, opts: &NumericOptions) -> (Vec<f64>, f64, bool) {
        let mut x = start;
        let mut f = self.energy(&x);
        let mut g = self.gradient(&x);
        let mut step = 1.0;
        for _ in 0..opts.max_iter {
            let pg = self.projected_norm(&x, &g);
            if pg < opts.tol {
                return (x, pg, true);
            }
            let mut alpha = step;
            let mut accepted = None;
            for _ in 0..60 {
                let mut trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - alpha * gi).collect();
                self.project(&mut trial);
                let decrease: f64 = g.iter().zip(trial.iter().zip(&x)).map(|(gi, (t, xi))| gi * (t - xi)).sum();
                let ft = self.energy(&trial);
                if ft <= f + 1e-4 * decrease {
                    accepted = Some((trial, ft));
                    break;
                }
                alpha *= 0.5;
            }
            let Some((next, fnext)) = accepted else {
                // finite-difference noise floor
                return (x, pg, pg < 1e3 * opts.tol);
            };
            let gnext = self.gradient(&next);
            let s: Vec<f64> = next.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = gnext.iter().zip(&g).map(|(a, b)| a - b).collect();
            let ss: f64 = s.iter().map(|v| v * v).sum();
            let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
            step = if sy > 1e-300 { (ss / sy).clamp(1e-10, 1e6) } else { 1.0 };
            if ss == 0.0 {
                let pg = self.projected_norm(&next, &gnext);
                return (next, pg, pg < 1e3 * opts.tol);
            }
            x = next;
            f = fnext;
            g = gnext;
        }
        let pg = self.projected_norm(&x, &g);
        (x, pg, pg < opts.tol)
    }
}

/// Global minimum of the reduced energy over `rho_j >= 0`, `R_0 <= cap`,
/// by multistart projected descent. Fails only when no start converges.
pub fn minimize_numeric(system: &AtomicSystem, opts: &NumericOptions) -> Result<NumericMinimum> {
    system.ensure_valid()?;
    if !(opts.cap > 0.0 && opts.cap.is_finite()) || !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("numeric minimizer needs cap > 0 and tol > 0".into()));
    }
    let dim = system.n - 1;
    let mut upper = vec![std::f64::consts::FRAC_PI_2; dim];
    upper[0] = opts.cap.atan();
    let problem = Problem { system, upper };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![problem.upper.iter().map(|u| 0.5 * u).collect::<Vec<f64>>()];
    for _ in 0..opts.random_starts {
        starts.push(problem.upper.iter().map(|&u| rng.gen_range(0.0..u)).collect());
    }

    let mut best: Option<(Vec<f64>, f64, f64)> = None;
    let mut converged = 0;
    let mut worst_residual: f64 = 0.0;
    for start in starts {
        let (x, pg, ok) = problem.descend(start, opts);
        if !ok {
            worst_residual = worst_residual.max(pg);
            continue;
        }
        converged += 1;
        let e = problem.energy(&x);
        if best.as_ref().is_none_or(|b| e < b.1) {
            best = Some((x, e, pg));
        }
    }
    let (x, energy, pg) = best.ok_or(Error::NonConvergence {
        context: "numeric minimization".into(),
        residual: worst_residual,
    })?;
    let radii = problem.radii(&x);
    check_matter(system, &radii)?;
    Ok(NumericMinimum { radii, energy, projected_gradient: pg, converged_starts: converged })
}
