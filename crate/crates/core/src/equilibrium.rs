//! Equilibrium solver: all zeros of the mean-field consistency equation,
//! branch selection across time, and uniqueness diagnostics.
//!
//! For fixed `(t, x, r)` the stopped proportion `u` of an equilibrium must
//! satisfy `1 - u = F_t(g^{-1}(t, x, r, u))`. We work with the gap
//!
//! ```text
//! G(u) = F_t(g^{-1}(t, x, r, u)) - 1 + u,        u in [0, 1],
//! ```
//!
//! which is continuous with `G(0) <= 0 <= G(1)`, so a zero always exists.
//! [`solve_all`] finds every zero on a uniform u-grid: contiguous runs where
//! `|G| <= tol_flat` become flat intervals (a continuum of solutions), sign
//! changes are refined by bisection, and isolated grid points inside the flat
//! tolerance are treated as tangential zeros and refined by golden-section
//! minimization of `|G|`.

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::TimeIndexedCdf;
use crate::error::{EquilibriumError, ModelError};
use crate::grid::MonotonePath;
use crate::model::{AdditiveModel, IntensityModel, RateFunction};

/// Numeric slack when asserting that a selected branch is nondecreasing:
/// roots at adjacent grid times come from independent bisections.
pub const MONOTONE_EPS: f64 = 1e-12;

/// Smallest jump of a selected branch that triggers the right-continuity
/// flagging pass in [`build_curve`].
const JUMP_FLAG_TOL: f64 = 1e-6;

/// Scrubs sub-[`MONOTONE_EPS`] float dips (independent bisections at
/// adjacent grid times) with a running max; a genuine decrease is an error.
fn monotone_clean(values: &[f64]) -> Result<Vec<f64>, EquilibriumError> {
    let mut run = f64::NEG_INFINITY;
    let mut out = Vec::with_capacity(values.len());
    for (k, &v) in values.iter().enumerate() {
        if v < run - MONOTONE_EPS {
            return Err(EquilibriumError::NonMonotoneBranch {
                index: k,
                prev: run,
                next: v,
            });
        }
        run = run.max(v);
        out.push(run);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Number of u-grid cells scanned for sign changes and flat runs.
    pub resolution: usize,
    /// Every reported isolated root satisfies `|G(root)| <= tol_root`.
    pub tol_root: f64,
    /// Grid runs with `|G| <= tol_flat` throughout count as flat intervals.
    pub tol_flat: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            resolution: 4096,
            tol_root: 1e-12,
            tol_flat: 1e-9,
        }
    }
}

impl SolverOptions {
    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution;
        self
    }
}

/// All solutions of the consistency equation at one `(t, x, r)`.
#[derive(Clone, Debug, Serialize)]
pub struct SolutionSet {
    /// Zeros with no neighboring zeros, sorted ascending.
    pub isolated_roots: Vec<f64>,
    /// Maximal u-intervals on which `|G| <= tol_flat` throughout.
    pub flat_intervals: Vec<[f64; 2]>,
}

impl SolutionSet {
    /// Largest solution: right endpoint of the last flat interval or the
    /// last isolated root, whichever is greater.
    pub fn maximal(&self) -> f64 {
        let root = self.isolated_roots.last().copied();
        let flat = self.flat_intervals.last().map(|iv| iv[1]);
        match (root, flat) {
            (Some(a), Some(b)) => a.max(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => unreachable!("solution sets are never empty"),
        }
    }

    pub fn minimal(&self) -> f64 {
        let root = self.isolated_roots.first().copied();
        let flat = self.flat_intervals.first().map(|iv| iv[0]);
        match (root, flat) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => unreachable!("solution sets are never empty"),
        }
    }

    /// Branch candidates for index-based selection: isolated roots plus both
    /// endpoints of every flat interval, sorted ascending.
    pub fn candidates(&self) -> Vec<f64> {
        let mut c: Vec<f64> = self.isolated_roots.clone();
        for iv in &self.flat_intervals {
            c.push(iv[0]);
            c.push(iv[1]);
        }
        c.sort_by(|a, b| a.partial_cmp(b).unwrap());
        c.dedup();
        c
    }

    pub fn is_empty(&self) -> bool {
        self.isolated_roots.is_empty() && self.flat_intervals.is_empty()
    }
}

/// The gap `G(u) = F_t(g^{-1}(t, x, r, u)) - 1 + u` whose zeros are the
/// equilibrium proportions.
pub fn fixed_point_gap(
    cdf: &dyn TimeIndexedCdf,
    model: &dyn IntensityModel,
    t: f64,
    x: &[f64],
    r: f64,
    u: f64,
) -> f64 {
    cdf.eval(t, model.inverse(t, x, r, u)) - 1.0 + u
}

/// Finds every zero of the gap on `[0, 1]` at one `(t, x, r)`.
pub fn solve_all(
    cdf: &dyn TimeIndexedCdf,
    model: &dyn IntensityModel,
    t: f64,
    x: &[f64],
    r: f64,
    opts: &SolverOptions,
) -> Result<SolutionSet, EquilibriumError> {
    if opts.resolution < 64 {
        return Err(EquilibriumError::ResolutionTooLow(opts.resolution));
    }
    if x.len() != model.dim() {
        return Err(EquilibriumError::Model(ModelError::DimensionMismatch {
            expected: model.dim(),
            got: x.len(),
        }));
    }
    let res = opts.resolution;
    let gap = |u: f64| fixed_point_gap(cdf, model, t, x, r, u);

    let us: Vec<f64> = (0..=res).map(|k| k as f64 / res as f64).collect();
    let gs: Vec<f64> = us.iter().map(|&u| gap(u)).collect();

    if gs[0] > opts.tol_root || gs[res] < -opts.tol_root {
        return Err(EquilibriumError::BrokenContract {
            t,
            g0: gs[0],
            g1: gs[res],
        });
    }

    let mut roots: Vec<f64> = Vec::new();
    let mut flats: Vec<[f64; 2]> = Vec::new();
    // consumed[k]: node k belongs to an accepted flat run; skip its brackets
    let mut consumed = vec![false; res + 1];

    // Flat runs first, so a tautological G == 0 reports one interval rather
    // than thousands of roots.
    let mut k = 0;
    while k <= res {
        if gs[k].abs() > opts.tol_flat {
            k += 1;
            continue;
        }
        let start = k;
        while k + 1 <= res && gs[k + 1].abs() <= opts.tol_flat {
            k += 1;
        }
        let end = k;
        k += 1;
        if end > start {
            flats.push([us[start], us[end]]);
            consumed[start..=end].iter_mut().for_each(|c| *c = true);
        } else {
            // single node inside the flat tolerance: a tangential zero
            // candidate; refine and keep it only if it is a genuine zero
            let lo = if start == 0 { 0.0 } else { us[start - 1] };
            let hi = if start == res { 1.0 } else { us[start + 1] };
            let (u_min, g_min) = golden_min_abs(&gap, lo, hi);
            if g_min <= opts.tol_root {
                roots.push(u_min);
            }
        }
    }

    // Transversal roots: bisection on every sign-change cell not covered by
    // a flat run.
    for k in 0..res {
        if consumed[k] || consumed[k + 1] {
            continue;
        }
        if gs[k] * gs[k + 1] < 0.0 {
            let root = bisect(&gap, us[k], us[k + 1], gs[k], opts.tol_root)?;
            roots.push(root);
        }
    }

    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cell = 1.0 / res as f64;
    roots.dedup_by(|a, b| (*a - *b).abs() <= 0.25 * cell);
    roots.retain(|&u| {
        !flats
            .iter()
            .any(|iv| u >= iv[0] - 0.25 * cell && u <= iv[1] + 0.25 * cell)
    });

    let set = SolutionSet {
        isolated_roots: roots,
        flat_intervals: flats,
    };
    debug_assert!(!set.is_empty(), "gap has a zero since G(0) <= 0 <= G(1)");
    if set.is_empty() {
        return Err(EquilibriumError::BrokenContract {
            t,
            g0: gs[0],
            g1: gs[res],
        });
    }
    Ok(set)
}

/// Bisection on a bracketing cell. Shrinks the bracket to float granularity
/// so roots are accurate to ~1e-15 in u, then checks the value tolerance.
fn bisect(
    gap: &impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    g_lo: f64,
    tol_root: f64,
) -> Result<f64, EquilibriumError> {
    // the cell brackets a sign change, so g_lo != 0 and its sign is fixed
    let neg_lo = g_lo < 0.0;
    let (mut best_u, mut best_g) = (lo, g_lo.abs());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = gap(mid);
        if g_mid.abs() < best_g {
            best_u = mid;
            best_g = g_mid.abs();
        }
        if g_mid == 0.0 {
            break;
        }
        if (g_mid < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 {
            break;
        }
    }
    if best_g > tol_root {
        return Err(EquilibriumError::RefinementStalled {
            u: best_u,
            residual: best_g,
        });
    }
    Ok(best_u)
}

/// Golden-section minimization of `|G|` on `[lo, hi]`.
fn golden_min_abs(gap: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let mut fa = gap(a).abs();
    let mut fb = gap(b).abs();
    for _ in 0..120 {
        if hi - lo <= 1e-14 {
            break;
        }
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = gap(a).abs();
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = gap(b).abs();
        }
    }
    let mid = 0.5 * (lo + hi);
    let fm = gap(mid).abs();
    let mut best = (mid, fm);
    for (u, f) in [(a, fa), (b, fb), (lo, gap(lo).abs()), (hi, gap(hi).abs())] {
        if f < best.1 {
            best = (u, f);
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Curves
// ---------------------------------------------------------------------------

/// How to pick one solution per grid time.
#[derive(Clone, Debug)]
pub enum BranchPolicy {
    /// Largest solution; always yields a nondecreasing branch.
    Maximal,
    /// Smallest solution; nondecreasing but may fail right-continuity.
    Minimal,
    /// Start from the k-th candidate at t = 0, then follow by nearest-value
    /// matching (ties toward the smaller u).
    Index(usize),
    /// Caller-supplied path; each value should solve the equation at its
    /// grid time.
    Explicit(MonotonePath),
}

impl BranchPolicy {
    pub fn tag(&self) -> &'static str {
        match self {
            BranchPolicy::Maximal => "maximal",
            BranchPolicy::Minimal => "minimal",
            BranchPolicy::Index(_) => "indexed",
            BranchPolicy::Explicit(_) => "explicit",
        }
    }
}

/// Equilibrium proportion curve along one realized common-noise path.
#[derive(Clone, Debug)]
pub struct EquilibriumCurve {
    x_path: MonotonePath,
    rates: Vec<f64>,
    solutions: Vec<SolutionSet>,
    selected: Vec<f64>,
    residuals: Vec<f64>,
    policy_tag: &'static str,
    /// Grid indices k where the selected branch jumps from t_k to t_{k+1}
    /// and the destination value was already a solution at t_k -- the
    /// discrete signature of a right-continuity failure of the branch.
    jump_flags: Vec<usize>,
}

impl EquilibriumCurve {
    pub fn grid(&self) -> &crate::grid::TimeGrid {
        self.x_path.grid()
    }

    pub fn x_path(&self) -> &MonotonePath {
        &self.x_path
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn solutions(&self) -> &[SolutionSet] {
        &self.solutions
    }

    pub fn selected(&self) -> &[f64] {
        &self.selected
    }

    /// Fixed-point residual `|G(selected)|` per grid point.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn policy_tag(&self) -> &'static str {
        self.policy_tag
    }

    pub fn jump_flags(&self) -> &[usize] {
        &self.jump_flags
    }

    pub fn selected_path(&self) -> MonotonePath {
        let values = monotone_clean(&self.selected).expect("dips were bounded at construction");
        MonotonePath::scalar(self.grid().clone(), values).expect("running max is nondecreasing")
    }

    /// Rebinds the selected branch to an explicit path on the same grid,
    /// keeping the per-point solution sets. Residuals are recomputed.
    pub fn with_selected(
        &self,
        cdf: &dyn TimeIndexedCdf,
        model: &dyn IntensityModel,
        path: &MonotonePath,
    ) -> Result<EquilibriumCurve, EquilibriumError> {
        if path.grid() != self.grid() {
            return Err(EquilibriumError::GridMismatch);
        }
        let selected = path.values().to_vec();
        let residuals = self
            .grid()
            .times()
            .iter()
            .enumerate()
            .map(|(k, &t)| {
                fixed_point_gap(
                    cdf,
                    model,
                    t,
                    self.x_path.row(k),
                    self.rates[k],
                    selected[k],
                )
                .abs()
            })
            .collect();
        Ok(EquilibriumCurve {
            x_path: self.x_path.clone(),
            rates: self.rates.clone(),
            solutions: self.solutions.clone(),
            selected,
            residuals,
            policy_tag: "explicit",
            jump_flags: Vec::new(),
        })
    }
}

/// Solves the equation at every grid point of the common-noise path and
/// selects one branch per the policy. Grid points solve independently in
/// parallel; the monotonicity pass afterwards is sequential, so results do
/// not depend on the worker count.
pub fn build_curve(
    cdf: &dyn TimeIndexedCdf,
    model: &dyn IntensityModel,
    rate: &RateFunction,
    x_path: &MonotonePath,
    policy: BranchPolicy,
    opts: &SolverOptions,
) -> Result<EquilibriumCurve, EquilibriumError> {
    let grid = x_path.grid().clone();
    let rates: Vec<f64> = grid
        .times()
        .iter()
        .enumerate()
        .map(|(k, &t)| rate.eval(t, x_path.row(k)))
        .collect();

    let solutions: Vec<SolutionSet> = grid
        .times()
        .par_iter()
        .enumerate()
        .map(|(k, &t)| solve_all(cdf, model, t, x_path.row(k), rates[k], opts))
        .collect::<Result<_, _>>()?;

    let selected: Vec<f64> = match &policy {
        BranchPolicy::Maximal => solutions.iter().map(|s| s.maximal()).collect(),
        BranchPolicy::Minimal => solutions.iter().map(|s| s.minimal()).collect(),
        BranchPolicy::Index(k0) => {
            let first = solutions[0].candidates();
            if *k0 >= first.len() {
                return Err(EquilibriumError::BranchIndexOutOfRange {
                    index: *k0,
                    available: first.len(),
                    t: grid.t(0),
                });
            }
            let mut prev = first[*k0];
            let mut picked = vec![prev];
            for s in &solutions[1..] {
                // nearest-candidate continuation; ties toward the smaller u
                let next = s
                    .candidates()
                    .into_iter()
                    .min_by(|a, b| {
                        let (da, db) = ((a - prev).abs(), (b - prev).abs());
                        da.partial_cmp(&db).unwrap().then(a.partial_cmp(b).unwrap())
                    })
                    .expect("solution sets are never empty");
                picked.push(next);
                prev = next;
            }
            picked
        }
        BranchPolicy::Explicit(path) => {
            if path.grid() != &grid {
                return Err(EquilibriumError::GridMismatch);
            }
            if path.dim() != 1 {
                return Err(EquilibriumError::Model(ModelError::DimensionMismatch {
                    expected: 1,
                    got: path.dim(),
                }));
            }
            path.values().to_vec()
        }
    };

    for k in 1..selected.len() {
        if selected[k] < selected[k - 1] - MONOTONE_EPS {
            return Err(EquilibriumError::NonMonotoneBranch {
                index: k,
                prev: selected[k - 1],
                next: selected[k],
            });
        }
    }

    let residuals: Vec<f64> = grid
        .times()
        .iter()
        .enumerate()
        .map(|(k, &t)| fixed_point_gap(cdf, model, t, x_path.row(k), rates[k], selected[k]).abs())
        .collect();

    let mut jump_flags = Vec::new();
    for k in 0..selected.len().saturating_sub(1) {
        if selected[k + 1] - selected[k] > JUMP_FLAG_TOL {
            let g_dest = fixed_point_gap(
                cdf,
                model,
                grid.t(k),
                x_path.row(k),
                rates[k],
                selected[k + 1],
            );
            if g_dest.abs() <= opts.tol_flat {
                jump_flags.push(k);
            }
        }
    }

    Ok(EquilibriumCurve {
        x_path: x_path.clone(),
        rates,
        solutions,
        selected,
        residuals,
        policy_tag: policy.tag(),
        jump_flags,
    })
}

// ---------------------------------------------------------------------------
// Randomized switch between branches
// ---------------------------------------------------------------------------

/// Concatenates the minimal branch on `[0, sigma)` with the maximal branch on
/// `[sigma, infinity)`. Both curves must live on the same grid with
/// `max >= min` pointwise; `sigma` must be a grid time. The result is a valid
/// nondecreasing selection that jumps between branches at the switch.
pub fn randomized_switch(
    curve_min: &EquilibriumCurve,
    curve_max: &EquilibriumCurve,
    sigma: f64,
) -> Result<MonotonePath, EquilibriumError> {
    if curve_min.grid() != curve_max.grid() {
        return Err(EquilibriumError::GridMismatch);
    }
    let grid = curve_min.grid().clone();
    for k in 0..grid.len() {
        if curve_max.selected[k] < curve_min.selected[k] - MONOTONE_EPS {
            return Err(EquilibriumError::CurvesOutOfOrder(k));
        }
    }
    let switch_index = if sigma > grid.horizon() {
        grid.len()
    } else {
        grid.times()
            .iter()
            .position(|&t| (t - sigma).abs() <= 1e-12)
            .ok_or(EquilibriumError::SwitchNotOnGrid(sigma))?
    };
    let values: Vec<f64> = (0..grid.len())
        .map(|k| {
            if k < switch_index {
                curve_min.selected[k]
            } else {
                curve_max.selected[k]
            }
        })
        .collect();
    let values = monotone_clean(&values)?;
    MonotonePath::scalar(grid, values).map_err(EquilibriumError::Model)
}

// ---------------------------------------------------------------------------
// Uniqueness diagnostics
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniquenessReport {
    /// Supremum of `c * f_t(r - x - c u)` over the probed u-range.
    pub density_bound: f64,
    /// Whether the bound is below 1, which pins the root locally.
    pub locally_unique: bool,
    /// `1 - density_bound`; positive iff locally unique.
    pub margin: f64,
}

/// Local uniqueness of a root of the additive model: if
/// `c * f_t(r - x - c u) < 1` near the root, the equation's slope in `u`
/// stays positive and the root is locally unique.
pub fn uniqueness_diagnostic(
    cdf: &dyn TimeIndexedCdf,
    model: &AdditiveModel,
    t: f64,
    x: f64,
    r: f64,
    root: f64,
    neighborhood: f64,
) -> Result<UniquenessReport, EquilibriumError> {
    let lo = (root - neighborhood).max(0.0);
    let hi = (root + neighborhood).min(1.0);
    density_report(cdf, model, t, x, r, lo, hi, 256)
}

/// Global version over all of `u in [0, 1]`: a bound below 1 forces exactly
/// one isolated root and no flat intervals.
pub fn global_uniqueness_bound(
    cdf: &dyn TimeIndexedCdf,
    model: &AdditiveModel,
    t: f64,
    x: f64,
    r: f64,
) -> Result<UniquenessReport, EquilibriumError> {
    density_report(cdf, model, t, x, r, 0.0, 1.0, 8192)
}

fn density_report(
    cdf: &dyn TimeIndexedCdf,
    model: &AdditiveModel,
    t: f64,
    x: f64,
    r: f64,
    lo: f64,
    hi: f64,
    samples: usize,
) -> Result<UniquenessReport, EquilibriumError> {
    let c = model.interaction();
    let mut bound: f64 = 0.0;
    for k in 0..=samples {
        let u = lo + (hi - lo) * k as f64 / samples as f64;
        let f = cdf
            .density(t, r - x - c * u)
            .ok_or(EquilibriumError::DensityUnavailable)?;
        bound = bound.max(c * f);
    }
    Ok(UniquenessReport {
        density_bound: bound,
        locally_unique: bound < 1.0,
        margin: 1.0 - bound,
    })
}
