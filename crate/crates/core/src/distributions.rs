//! Time-indexed c.d.f. families for the idiosyncratic signal.
//!
//! A family `F_t(y)` must be continuous and nondecreasing in `y` with limits
//! 0 and 1, and nonincreasing in `t` (the underlying signal only grows).
//! Families are immutable after construction and safe to share across
//! workers. Construction rejects atoms via a probe-based continuity check:
//! any mass concentration above [`ATOM_MASS_TOL`] within a window of width
//! 1e-6 is treated as an atom.
//!
//! Supports must be finite: the solver and the intensity inversion bracket
//! their searches with [`TimeIndexedCdf::support_hint`], so genuinely
//! unbounded signals need a user-chosen truncation.

use std::path::Path;
use std::sync::Arc;

use crate::error::DistributionError;

/// Smallest probability mass the continuity probe treats as an atom when it
/// is concentrated within a y-window of width 1e-6.
pub const ATOM_MASS_TOL: f64 = 5e-3;

const ATOM_WINDOW: f64 = 1e-6;

/// A family of continuous c.d.f.s indexed by time.
pub trait TimeIndexedCdf: Send + Sync {
    /// `F_t(y)`, the probability that the signal at time `t` is at most `y`.
    fn eval(&self, t: f64, y: f64) -> f64;

    /// Generalized inverse `inf { y : F_t(y) >= p }` with `p` clamped to
    /// `[0, 1]`; quantiles clamp to the support. Feeding an independent
    /// uniform variate produces a draw of the signal at time `t`.
    fn sample(&self, t: f64, p: f64) -> f64;

    /// Probability density `f_t(y)` where available. `None` disables the
    /// local-uniqueness diagnostic for this family.
    fn density(&self, t: f64, y: f64) -> Option<f64>;

    /// Interval of `y` on which `F_t` rises from 0 to 1.
    fn support_hint(&self, t: f64) -> (f64, f64);
}

// ---------------------------------------------------------------------------
// Piecewise-linear base distribution
// ---------------------------------------------------------------------------

/// Continuous piecewise-linear c.d.f. on a finite support. Strictly increasing
/// breakpoints make continuity structural; plateaus (zero-density gaps) are
/// allowed.
#[derive(Clone, Debug)]
pub struct PiecewiseLinearCdf {
    xs: Vec<f64>,
    ps: Vec<f64>,
}

impl PiecewiseLinearCdf {
    pub fn new(xs: Vec<f64>, ps: Vec<f64>) -> Result<Self, DistributionError> {
        if xs.len() < 2 || xs.len() != ps.len() {
            return Err(DistributionError::DegenerateGrid {
                what: format!("{} breakpoints / {} values", xs.len(), ps.len()),
                min: 2,
            });
        }
        for w in xs.windows(2) {
            if !(w[1] > w[0]) {
                return Err(DistributionError::DegenerateGrid {
                    what: format!("breakpoints {} and {}", w[0], w[1]),
                    min: 2,
                });
            }
        }
        for (i, w) in ps.windows(2).enumerate() {
            if w[1] < w[0] {
                return Err(DistributionError::NotMonotoneInY {
                    t_index: 0,
                    y_index: i,
                });
            }
        }
        if ps[0] != 0.0 || *ps.last().unwrap() != 1.0 {
            return Err(DistributionError::IncompleteRange {
                t_index: 0,
                lo: ps[0],
                hi: *ps.last().unwrap(),
            });
        }
        Ok(PiecewiseLinearCdf { xs, ps })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= *self.xs.last().unwrap() {
            return 1.0;
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        let w = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.ps[i] + w * (self.ps[i + 1] - self.ps[i])
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        if p <= 0.0 {
            return self.xs[0];
        }
        let i = self.ps.partition_point(|&q| q < p);
        if i == 0 {
            return self.xs[0];
        }
        if i >= self.ps.len() {
            return *self.xs.last().unwrap();
        }
        // ps[i-1] < p <= ps[i], so the segment rises strictly.
        let w = (p - self.ps[i - 1]) / (self.ps[i] - self.ps[i - 1]);
        self.xs[i - 1] + w * (self.xs[i] - self.xs[i - 1])
    }

    pub fn density(&self, x: f64) -> f64 {
        if x < self.xs[0] || x >= *self.xs.last().unwrap() {
            return 0.0;
        }
        let i = self.xs.partition_point(|&v| v <= x).max(1) - 1;
        (self.ps[i + 1] - self.ps[i]) / (self.xs[i + 1] - self.xs[i])
    }

    pub fn support(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }
}

// ---------------------------------------------------------------------------
// Drift: the common deterministic growth a(t)
// ---------------------------------------------------------------------------

/// Nondecreasing time shift `a(t)` with `a(0) = 0`, probed for monotonicity
/// on a fixed grid over `[0, 100]` at construction.
#[derive(Clone)]
pub struct Drift {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Drift {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self, DistributionError> {
        let a0 = f(0.0);
        if a0.abs() > 1e-12 {
            return Err(DistributionError::NonMonotoneDrift(format!(
                "a(0) = {a0}, expected 0"
            )));
        }
        let mut prev_t = 0.0;
        let mut prev_v = a0;
        for t in probe_times() {
            let v = f(t);
            if !v.is_finite() || v < prev_v {
                return Err(DistributionError::NonMonotoneDrift(format!(
                    "a({prev_t}) = {prev_v} but a({t}) = {v}"
                )));
            }
            prev_t = t;
            prev_v = v;
        }
        Ok(Drift { f: Arc::new(f) })
    }

    /// The zero drift; the signal keeps its time-0 distribution.
    pub fn none() -> Self {
        Drift {
            f: Arc::new(|_| 0.0),
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        (self.f)(t)
    }
}

impl std::fmt::Debug for Drift {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Drift(a(1)={})", self.at(1.0))
    }
}

fn probe_times() -> impl Iterator<Item = f64> {
    let fine = (1..=128).map(|k| k as f64 / 128.0);
    let mid = (9..=80).map(|k| k as f64 / 8.0);
    let coarse = (11..=100).map(|k| k as f64);
    fine.chain(mid).chain(coarse)
}

// ---------------------------------------------------------------------------
// Shifted family: Y_t = U + a(t)
// ---------------------------------------------------------------------------

/// Family of a fixed continuous base distribution translated by a
/// nondecreasing drift: `F_t(y) = F_base(y - a(t))`.
#[derive(Clone, Debug)]
pub struct ShiftedFamily {
    base: PiecewiseLinearCdf,
    drift: Drift,
}

impl ShiftedFamily {
    pub fn new(base: PiecewiseLinearCdf, drift: Drift) -> Result<Self, DistributionError> {
        let family = ShiftedFamily { base, drift };
        validate_family(&family, &[0.0, 0.5, 1.0, 2.0])?;
        Ok(family)
    }

    pub fn base(&self) -> &PiecewiseLinearCdf {
        &self.base
    }
}

impl TimeIndexedCdf for ShiftedFamily {
    fn eval(&self, t: f64, y: f64) -> f64 {
        self.base.eval(y - self.drift.at(t))
    }

    fn sample(&self, t: f64, p: f64) -> f64 {
        self.base.quantile(p) + self.drift.at(t)
    }

    fn density(&self, t: f64, y: f64) -> Option<f64> {
        Some(self.base.density(y - self.drift.at(t)))
    }

    fn support_hint(&self, t: f64) -> (f64, f64) {
        let (lo, hi) = self.base.support();
        let a = self.drift.at(t);
        (lo + a, hi + a)
    }
}

/// Signal `U + a(t)` with `U` uniform on `[r - 1, r]`, so that
/// `F_t(y) = clamp(1 + y - a(t) - r, 0, 1)`.
pub fn uniform_shifted_family(r: f64, drift: Drift) -> Result<ShiftedFamily, DistributionError> {
    if !r.is_finite() {
        return Err(DistributionError::InvalidParameter(format!(
            "interest level r = {r}"
        )));
    }
    let base = PiecewiseLinearCdf::new(vec![r - 1.0, r], vec![0.0, 1.0])?;
    ShiftedFamily::new(base, drift)
}

/// Signal `U + a(t)` where `U` puts mass `eps` uniformly on `[0, eps]` and on
/// `[1 - eps, 1]`, and the remaining `1 - 2 eps` uniformly on
/// `[1/2 - eps, 1/2 + eps]`. Requires `0 < eps < 1/4` so the three blocks are
/// disjoint.
pub fn three_mass_family(eps: f64, drift: Drift) -> Result<ShiftedFamily, DistributionError> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(DistributionError::InvalidParameter(format!(
            "eps = {eps}, expected 0 < eps < 1/4"
        )));
    }
    let base = PiecewiseLinearCdf::new(
        vec![0.0, eps, 0.5 - eps, 0.5 + eps, 1.0 - eps, 1.0],
        vec![0.0, eps, eps, 1.0 - eps, 1.0 - eps, 1.0],
    )?;
    ShiftedFamily::new(base, drift)
}

// ---------------------------------------------------------------------------
// Table-backed family
// ---------------------------------------------------------------------------

/// User-supplied family on a rectangular `(t, y)` grid: linear interpolation
/// in `y`, step (cadlag) in `t`. Each row must rise from exactly 0 to exactly
/// 1 so the interpolant is a complete continuous c.d.f.
#[derive(Clone, Debug)]
pub struct TableCdf {
    t_grid: Vec<f64>,
    y_grid: Vec<f64>,
    /// Row-major: `values[i * y_grid.len() + j] = F_{t_i}(y_j)`.
    values: Vec<f64>,
}

impl TableCdf {
    fn row(&self, i: usize) -> &[f64] {
        let m = self.y_grid.len();
        &self.values[i * m..(i + 1) * m]
    }

    fn row_index(&self, t: f64) -> usize {
        match self.t_grid.partition_point(|&s| s <= t) {
            0 => 0,
            p => p - 1,
        }
    }
}

impl TimeIndexedCdf for TableCdf {
    fn eval(&self, t: f64, y: f64) -> f64 {
        let row = self.row(self.row_index(t));
        if y <= self.y_grid[0] {
            return 0.0;
        }
        if y >= *self.y_grid.last().unwrap() {
            return 1.0;
        }
        let j = self.y_grid.partition_point(|&v| v <= y) - 1;
        let w = (y - self.y_grid[j]) / (self.y_grid[j + 1] - self.y_grid[j]);
        row[j] + w * (row[j + 1] - row[j])
    }

    fn sample(&self, t: f64, p: f64) -> f64 {
        let row = self.row(self.row_index(t));
        let p = p.clamp(0.0, 1.0);
        if p <= 0.0 {
            return self.y_grid[0];
        }
        let j = row.partition_point(|&q| q < p);
        if j == 0 {
            return self.y_grid[0];
        }
        if j >= row.len() {
            return *self.y_grid.last().unwrap();
        }
        let w = (p - row[j - 1]) / (row[j] - row[j - 1]);
        self.y_grid[j - 1] + w * (self.y_grid[j] - self.y_grid[j - 1])
    }

    fn density(&self, t: f64, y: f64) -> Option<f64> {
        let row = self.row(self.row_index(t));
        if y < self.y_grid[0] || y >= *self.y_grid.last().unwrap() {
            return Some(0.0);
        }
        let j = self.y_grid.partition_point(|&v| v <= y).max(1) - 1;
        Some((row[j + 1] - row[j]) / (self.y_grid[j + 1] - self.y_grid[j]))
    }

    fn support_hint(&self, _t: f64) -> (f64, f64) {
        (self.y_grid[0], *self.y_grid.last().unwrap())
    }
}

/// Builds a table-backed family, validating monotonicity in both directions
/// and the full 0-to-1 range of every row. Violations name the offending
/// grid indices.
pub fn cdf_from_table(
    t_grid: Vec<f64>,
    y_grid: Vec<f64>,
    values: Vec<f64>,
) -> Result<TableCdf, DistributionError> {
    if t_grid.is_empty() {
        return Err(DistributionError::DegenerateGrid {
            what: "empty t grid".into(),
            min: 1,
        });
    }
    if y_grid.len() < 2 {
        return Err(DistributionError::DegenerateGrid {
            what: format!("{} y columns", y_grid.len()),
            min: 2,
        });
    }
    for w in t_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(DistributionError::DegenerateGrid {
                what: format!("t values {} and {}", w[0], w[1]),
                min: 1,
            });
        }
    }
    for w in y_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(DistributionError::DegenerateGrid {
                what: format!("y values {} and {}", w[0], w[1]),
                min: 2,
            });
        }
    }
    let (n, m) = (t_grid.len(), y_grid.len());
    if values.len() != n * m {
        return Err(DistributionError::DegenerateGrid {
            what: format!("{} values for a {n} x {m} grid", values.len()),
            min: n * m,
        });
    }
    for i in 0..n {
        for j in 0..m {
            let v = values[i * m + j];
            if !(0.0..=1.0).contains(&v) {
                return Err(DistributionError::ValueOutOfRange {
                    t_index: i,
                    y_index: j,
                    value: v,
                });
            }
            if j + 1 < m && values[i * m + j + 1] < v {
                return Err(DistributionError::NotMonotoneInY {
                    t_index: i,
                    y_index: j,
                });
            }
            if i + 1 < n && values[(i + 1) * m + j] > v {
                return Err(DistributionError::NotMonotoneInT {
                    t_index: i,
                    y_index: j,
                });
            }
        }
        let (lo, hi) = (values[i * m], values[i * m + m - 1]);
        if lo != 0.0 || hi != 1.0 {
            return Err(DistributionError::IncompleteRange { t_index: i, lo, hi });
        }
    }
    let table = TableCdf {
        t_grid: t_grid.clone(),
        y_grid,
        values,
    };
    validate_family(&table, &t_grid)?;
    Ok(table)
}

/// Loads a table family from CSV with header `t,y,F`, rows sorted by `(t, y)`.
/// Every time block must list the same y grid.
pub fn cdf_from_csv(path: &Path) -> Result<TableCdf, DistributionError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| DistributionError::Io(e.to_string()))?;
    {
        let headers = reader
            .headers()
            .map_err(|e| DistributionError::Io(e.to_string()))?;
        let got: Vec<&str> = headers.iter().map(str::trim).collect();
        if got != ["t", "y", "F"] {
            return Err(DistributionError::Io(format!(
                "expected header t,y,F, got {}",
                got.join(",")
            )));
        }
    }
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| DistributionError::Io(e.to_string()))?;
        let parse = |idx: usize| -> Result<f64, DistributionError> {
            record
                .get(idx)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| {
                    DistributionError::Io(format!("bad numeric field on data row {}", line + 1))
                })
        };
        rows.push((parse(0)?, parse(1)?, parse(2)?));
    }
    if rows.is_empty() {
        return Err(DistributionError::Io("table has no data rows".into()));
    }

    let mut t_grid: Vec<f64> = Vec::new();
    for &(t, _, _) in &rows {
        if t_grid.last() != Some(&t) {
            t_grid.push(t);
        }
    }
    let m = rows.iter().take_while(|&&(t, _, _)| t == rows[0].0).count();
    if t_grid.len() * m != rows.len() {
        return Err(DistributionError::Io(
            "time blocks have inconsistent lengths".into(),
        ));
    }
    let y_grid: Vec<f64> = rows[..m].iter().map(|&(_, y, _)| y).collect();
    for (i, chunk) in rows.chunks(m).enumerate() {
        for (j, &(_, y, _)) in chunk.iter().enumerate() {
            if y != y_grid[j] {
                return Err(DistributionError::Io(format!(
                    "y grid differs in time block {i} at column {j}"
                )));
            }
        }
    }
    let values = rows.iter().map(|&(_, _, v)| v).collect();
    cdf_from_table(t_grid, y_grid, values)
}

// ---------------------------------------------------------------------------
// Probe-based validation
// ---------------------------------------------------------------------------

/// Probes a family for the contract every construction must satisfy:
/// nondecreasing and atom-free in `y`, nonincreasing in `t`, limits 0 and 1
/// beyond the support hint.
pub fn validate_family(
    cdf: &dyn TimeIndexedCdf,
    t_probes: &[f64],
) -> Result<(), DistributionError> {
    const CELLS: usize = 2048;
    for &t in t_probes {
        let (lo, hi) = cdf.support_hint(t);
        let width = (hi - lo).max(1e-9);
        if cdf.eval(t, lo - 1e-9 * width.max(1.0)) > 1e-12 {
            return Err(DistributionError::InvalidParameter(format!(
                "F_{t} does not vanish left of its support hint"
            )));
        }
        if cdf.eval(t, hi + 1e-9 * width.max(1.0)) < 1.0 - 1e-12 {
            return Err(DistributionError::InvalidParameter(format!(
                "F_{t} does not reach 1 right of its support hint"
            )));
        }
        let mut prev = 0.0;
        for k in 0..=CELLS {
            let y = lo + width * k as f64 / CELLS as f64;
            let v = cdf.eval(t, y);
            if !(0.0..=1.0).contains(&v) {
                return Err(DistributionError::ValueOutOfRange {
                    t_index: 0,
                    y_index: k,
                    value: v,
                });
            }
            if v < prev - 1e-12 {
                return Err(DistributionError::NotMonotoneInY {
                    t_index: 0,
                    y_index: k,
                });
            }
            if k > 0 {
                let cell_lo = lo + width * (k - 1) as f64 / CELLS as f64;
                check_cell_for_atom(cdf, t, cell_lo, y, prev, v)?;
            }
            prev = v;
        }
    }
    // t-monotonicity on probe pairs, sampled across the first probe's support.
    for pair in t_probes.windows(2) {
        let (t0, t1) = (pair[0], pair[1]);
        let (lo, hi) = cdf.support_hint(t0);
        for k in 0..=64 {
            let y = lo + (hi - lo) * k as f64 / 64.0;
            if cdf.eval(t1, y) > cdf.eval(t0, y) + 1e-12 {
                return Err(DistributionError::NotMonotoneInT {
                    t_index: 0,
                    y_index: k,
                });
            }
        }
    }
    Ok(())
}

/// Zooms into a probe cell whose mass exceeds the atom tolerance, halving
/// toward the heavier side until the window is below 1e-6 wide.
fn check_cell_for_atom(
    cdf: &dyn TimeIndexedCdf,
    t: f64,
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
    mut f_hi: f64,
) -> Result<(), DistributionError> {
    while f_hi - f_lo > ATOM_MASS_TOL {
        if hi - lo <= ATOM_WINDOW {
            return Err(DistributionError::AtomDetected {
                y: 0.5 * (lo + hi),
                mass: f_hi - f_lo,
            });
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = cdf.eval(t, mid);
        if f_mid - f_lo >= f_hi - f_mid {
            hi = mid;
            f_hi = f_mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_drift() -> Drift {
        Drift::new(|t| t).unwrap()
    }

    #[test]
    fn uniform_family_matches_closed_form() {
        let fam = uniform_shifted_family(1.0, linear_drift()).unwrap();
        // clamp(1 + y - a(t) - r, 0, 1) at (t, y) = (0.5, 1.0)
        assert!((fam.eval(0.5, 1.0) - 0.5).abs() < 1e-15);
        assert_eq!(fam.eval(0.0, 1.0), 1.0);
        assert!((fam.sample(0.0, 0.25) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn uniform_family_is_linear_with_unit_slope() {
        let fam = uniform_shifted_family(1.0, linear_drift()).unwrap();
        let t = 0.3;
        let (lo, hi) = fam.support_hint(t);
        for k in 0..=100 {
            let y = lo + (hi - lo) * k as f64 / 100.0;
            let expected = (1.0 + y - t - 1.0).clamp(0.0, 1.0);
            assert!(
                (fam.eval(t, y) - expected).abs() <= 1e-12,
                "y={y}: {} vs {}",
                fam.eval(t, y),
                expected
            );
        }
    }

    #[test]
    fn drift_rejects_decreasing_and_offset() {
        assert!(Drift::new(|t| t.sin()).is_err());
        assert!(Drift::new(|_| 1.0).is_err());
        assert!(Drift::new(|t| (0.5 + t).min(2.0) - 0.5).is_ok());
    }

    #[test]
    fn three_mass_block_masses() {
        let eps = 0.1;
        let fam = three_mass_family(eps, Drift::none()).unwrap();
        assert!((fam.eval(0.0, eps) - eps).abs() < 1e-15);
        assert!((fam.eval(0.0, 0.5) - 0.5).abs() < 1e-15);
        assert_eq!(fam.eval(0.0, 1.0), 1.0);
        // middle block density is (1 - 2 eps) / (2 eps)
        let f_mid = fam.density(0.0, 0.5).unwrap();
        assert!((f_mid - (1.0 - 2.0 * eps) / (2.0 * eps)).abs() < 1e-12);
        // gap between blocks has zero density
        assert_eq!(fam.density(0.0, 0.25).unwrap(), 0.0);
    }

    #[test]
    fn three_mass_rejects_bad_eps() {
        assert!(three_mass_family(0.0, Drift::none()).is_err());
        assert!(three_mass_family(0.25, Drift::none()).is_err());
        assert!(three_mass_family(0.3, Drift::none()).is_err());
    }

    #[test]
    fn quantile_round_trip_where_strictly_increasing() {
        let fam = three_mass_family(0.1, linear_drift()).unwrap();
        for t in [0.0, 0.4, 1.3] {
            for k in 1..100 {
                let p = k as f64 / 100.0;
                let y = fam.sample(t, p);
                assert!(
                    (fam.eval(t, y) - p).abs() <= 1e-9,
                    "t={t} p={p}: got {}",
                    fam.eval(t, y)
                );
            }
        }
    }

    #[test]
    fn table_reproduces_uniform_at_nodes() {
        let fam = uniform_shifted_family(1.0, linear_drift()).unwrap();
        let t_grid: Vec<f64> = (0..=4).map(|k| k as f64 / 4.0).collect();
        let y_grid: Vec<f64> = (0..=40).map(|k| k as f64 * 0.05).collect();
        let mut values = Vec::new();
        for &t in &t_grid {
            for &y in &y_grid {
                values.push(fam.eval(t, y));
            }
        }
        let table = cdf_from_table(t_grid.clone(), y_grid.clone(), values).unwrap();
        for &t in &t_grid {
            for &y in &y_grid {
                assert!((table.eval(t, y) - fam.eval(t, y)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn table_rejects_single_column() {
        let err = cdf_from_table(vec![0.0], vec![0.5], vec![1.0]).unwrap_err();
        assert!(matches!(err, DistributionError::DegenerateGrid { .. }));
    }

    #[test]
    fn table_rejects_out_of_range_values() {
        let err = cdf_from_table(vec![0.0], vec![0.0, 1.0], vec![0.0, 1.2]).unwrap_err();
        assert!(matches!(
            err,
            DistributionError::ValueOutOfRange {
                t_index: 0,
                y_index: 1,
                ..
            }
        ));
    }

    #[test]
    fn table_reports_offending_monotonicity_indices() {
        let err = cdf_from_table(
            vec![0.0, 1.0],
            vec![0.0, 0.5, 1.0],
            vec![0.0, 0.6, 1.0, 0.0, 0.7, 1.0],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            DistributionError::NotMonotoneInT {
                t_index: 0,
                y_index: 1
            }
        ));
    }

    #[test]
    fn table_with_atom_is_rejected() {
        // jump of 0.8 between adjacent columns 1e-7 apart: an atom in all but name
        let err = cdf_from_table(
            vec![0.0],
            vec![0.0, 0.5, 0.5 + 1e-7, 1.0],
            vec![0.0, 0.1, 0.9, 1.0],
        )
        .unwrap_err();
        assert!(
            matches!(err, DistributionError::AtomDetected { .. }),
            "{err}"
        );
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("family.csv");
        let mut text = String::from("t,y,F\n");
        for t in [0.0_f64, 0.5] {
            for k in 0..=20 {
                let y = k as f64 * 0.1;
                let v = (y - t).clamp(0.0, 1.0);
                text.push_str(&format!("{t},{y},{v}\n"));
            }
        }
        std::fs::write(&path, text).unwrap();
        let table = cdf_from_csv(&path).unwrap();
        assert!((table.eval(0.5, 1.0) - 0.5).abs() < 1e-12);
        assert_eq!(table.eval(0.0, 1.0), 1.0);
    }
}
