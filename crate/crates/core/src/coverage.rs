//! Spherical-coverage CDFs: solid-angle-weighted distribution of total
//! array gain, percentile extraction, and design comparison tables.
//!
//! The CDF is the discretization of
//! `F(α) = (1/4π)·∫∫ 1(G(θ,φ) ≤ α)·sin(θ) dθ dφ`
//! over the gain map's grid cells: each cell contributes its exact solid
//! angle at its gain value, so `F` is an exact step function with
//! `F(max) = 1` (no binning). Gains are kept linear internally; dB appears
//! only in the exported points, with a floor of -400 dB for zero gain so
//! blocked cells sort deterministically.

use std::io::Write;
use std::sync::Arc;

use crate::beamforming::Scheme;
use crate::error::{Error, Result};
use crate::geometry::SphereGrid;
use crate::scalar::{c, Scalar};

/// Display floor for zero/negligible linear gain, in dB.
pub const DB_FLOOR: f64 = -400.0;

/// Linear gain to dB with the display floor applied.
pub fn gain_to_db<T: Scalar>(linear: T) -> T {
    let floor = c::<T>(DB_FLOOR);
    if linear <= T::zero() {
        return floor;
    }
    (c::<T>(10.0) * linear.log10()).max(floor)
}

/// Per-direction array gain over a grid, split by polarization.
///
/// `total` is the sum of the two polarization gains per the selection
/// diversity metric.
#[derive(Debug, Clone)]
pub struct GainMap<T> {
    grid: Arc<SphereGrid<T>>,
    scheme: Option<Scheme>,
    theta: Vec<T>,
    phi: Vec<T>,
    total: Vec<T>,
}

impl<T: Scalar> GainMap<T> {
    /// Builds a map from per-polarization gains (linear, one per grid
    /// point).
    pub fn new(
        grid: Arc<SphereGrid<T>>,
        scheme: Option<Scheme>,
        theta: Vec<T>,
        phi: Vec<T>,
    ) -> Result<Self> {
        if theta.len() != grid.len() || phi.len() != grid.len() {
            return Err(Error::config("gain vectors must match the grid size"));
        }
        if theta
            .iter()
            .chain(&phi)
            .any(|g| !g.is_finite() || *g < T::zero())
        {
            return Err(Error::config("gains must be finite and nonnegative"));
        }
        let total = theta.iter().zip(&phi).map(|(&t, &p)| t + p).collect();
        Ok(Self {
            grid,
            scheme,
            theta,
            phi,
            total,
        })
    }

    pub fn grid(&self) -> &Arc<SphereGrid<T>> {
        &self.grid
    }

    pub fn scheme(&self) -> Option<Scheme> {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.total.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total.is_empty()
    }

    /// Θ-polarization gains, linear.
    pub fn theta(&self) -> &[T] {
        &self.theta
    }

    /// Φ-polarization gains, linear.
    pub fn phi(&self) -> &[T] {
        &self.phi
    }

    /// Total gain per Eq.-(9)-style polarization sum, linear.
    pub fn total(&self) -> &[T] {
        &self.total
    }

    /// Peak of the total gain map, dBi.
    pub fn peak_total_dbi(&self) -> T {
        gain_to_db(self.total.iter().copied().fold(T::zero(), T::max))
    }

    /// Returns a copy with per-cell linear attenuation applied identically
    /// to both polarizations; factors must lie in [0, 1].
    pub(crate) fn attenuated(&self, factors: &[T]) -> Self {
        debug_assert_eq!(factors.len(), self.len());
        let scale = |v: &[T]| {
            v.iter()
                .zip(factors)
                .map(|(&g, &f)| g * f)
                .collect::<Vec<_>>()
        };
        Self {
            grid: Arc::clone(&self.grid),
            scheme: self.scheme,
            theta: scale(&self.theta),
            phi: scale(&self.phi),
            total: scale(&self.total),
        }
    }
}

/// Labels carried along with a CDF for reporting and compatibility checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CdfMeta {
    pub design: String,
    pub scheme: String,
    pub blockage: String,
    /// What the gain axis measures; comparisons require equal metrics.
    pub metric: String,
}

impl CdfMeta {
    pub fn new(
        design: impl Into<String>,
        scheme: impl Into<String>,
        blockage: impl Into<String>,
    ) -> Self {
        Self {
            design: design.into(),
            scheme: scheme.into(),
            blockage: blockage.into(),
            metric: "gain_dbi".into(),
        }
    }

    pub fn with_metric(mut self, metric: impl Into<String>) -> Self {
        self.metric = metric.into();
        self
    }
}

/// Solid-angle-weighted CDF of a gain map: sorted `(gain_db, fraction)`
/// steps with fractions nondecreasing from the smallest gain's share to 1.
#[derive(Debug, Clone)]
pub struct CoverageCdf<T> {
    points: Vec<(T, T)>,
    pub meta: CdfMeta,
}

/// Reduces a gain map to its spherical-coverage CDF.
pub fn spherical_cdf<T: Scalar>(map: &GainMap<T>, meta: CdfMeta) -> CoverageCdf<T> {
    let weights = map.grid().weights();
    let total_weight: T = map.grid().total_solid_angle();

    let mut cells: Vec<(T, T)> = map
        .total()
        .iter()
        .zip(weights)
        .map(|(&g, &w)| (gain_to_db(g), w))
        .collect();
    cells.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("gains are finite"));

    let mut points: Vec<(T, T)> = Vec::new();
    let mut acc = T::zero();
    for (db, w) in cells {
        acc += w;
        match points.last_mut() {
            Some(last) if last.0 == db => last.1 = acc / total_weight,
            _ => points.push((db, acc / total_weight)),
        }
    }
    if let Some(last) = points.last_mut() {
        last.1 = T::one();
    }
    CoverageCdf { points, meta }
}

impl<T: Scalar> CoverageCdf<T> {
    /// Step points `(gain_db, cumulative fraction)`, sorted by gain.
    pub fn points(&self) -> &[(T, T)] {
        &self.points
    }

    /// Cumulative fraction at gain `g_db` (right-continuous step lookup).
    pub fn fraction_at(&self, g_db: T) -> T {
        let mut out = T::zero();
        for &(db, f) in &self.points {
            if db <= g_db {
                out = f;
            } else {
                break;
            }
        }
        out
    }

    /// Smallest gain (dB) whose cumulative fraction reaches `p`; the p-th
    /// coverage percentile in the CDF-value convention. A "gain exceeded
    /// over x% of the sphere" reading maps to `percentile(1 - x)`.
    pub fn percentile(&self, p: T) -> T {
        debug_assert!(!self.points.is_empty());
        let idx = self.points.partition_point(|&(_, f)| f < p);
        let idx = idx.min(self.points.len() - 1);
        self.points[idx].0
    }

    /// Writes `gain_db,cdf_fraction` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "gain_db,cdf_fraction")?;
        for &(db, f) in &self.points {
            writeln!(out, "{:.6},{:.9}", db, f)?;
        }
        Ok(())
    }
}

/// Per-percentile comparison of two CDFs; `delta_db = a - b`.
#[derive(Debug, Clone)]
pub struct CompareTable<T> {
    pub design_a: String,
    pub design_b: String,
    pub percents: Vec<T>,
    pub a_db: Vec<T>,
    pub b_db: Vec<T>,
    pub delta_db: Vec<T>,
    /// Percentiles at which the sign of the delta flips.
    pub crossovers: Vec<T>,
}

/// Percentiles compared: 5% to 95% in 5% steps.
fn compare_percents<T: Scalar>() -> Vec<T> {
    (1..=19).map(|i| c(i as f64 * 5.0)).collect()
}

/// Compares two CDFs over the standard percentile ladder.
pub fn compare_pair<T: Scalar>(
    a: &CoverageCdf<T>,
    b: &CoverageCdf<T>,
) -> Result<CompareTable<T>> {
    if a.meta.metric != b.meta.metric {
        return Err(Error::Config(format!(
            "cannot compare different metrics '{}' and '{}'",
            a.meta.metric, b.meta.metric
        )));
    }
    let percents = compare_percents::<T>();
    let hundred = c::<T>(100.0);
    let mut a_db = Vec::new();
    let mut b_db = Vec::new();
    let mut delta = Vec::new();
    for &p in &percents {
        let ga = a.percentile(p / hundred);
        let gb = b.percentile(p / hundred);
        a_db.push(ga);
        b_db.push(gb);
        delta.push(ga - gb);
    }
    let mut crossovers = Vec::new();
    let mut last_sign = T::zero();
    for (i, &d) in delta.iter().enumerate() {
        let sign = if d > T::zero() {
            T::one()
        } else if d < T::zero() {
            -T::one()
        } else {
            T::zero()
        };
        if sign != T::zero() {
            if last_sign != T::zero() && sign != last_sign {
                crossovers.push(percents[i]);
            }
            last_sign = sign;
        }
    }
    Ok(CompareTable {
        design_a: a.meta.design.clone(),
        design_b: b.meta.design.clone(),
        percents,
        a_db,
        b_db,
        delta_db: delta,
        crossovers,
    })
}

/// Compares every CDF against the first; needs at least two.
pub fn compare<T: Scalar>(cdfs: &[CoverageCdf<T>]) -> Result<Vec<CompareTable<T>>> {
    if cdfs.len() < 2 {
        return Err(Error::config("compare needs at least two CDFs"));
    }
    cdfs[1..]
        .iter()
        .map(|other| compare_pair(&cdfs[0], other))
        .collect()
}

impl<T: Scalar> CompareTable<T> {
    /// Writes `percentile,design_a_db,design_b_db,delta_db` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "percentile,design_a_db,design_b_db,delta_db")?;
        for i in 0..self.percents.len() {
            writeln!(
                out,
                "{:.0},{:.6},{:.6},{:.6}",
                self.percents[i], self.a_db[i], self.b_db[i], self.delta_db[i]
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_grid;
    use approx::assert_relative_eq;

    fn map_from(f: impl Fn(f64) -> f64) -> GainMap<f64> {
        let grid = Arc::new(make_grid(1.0, 1.0).unwrap());
        let theta: Vec<f64> = grid.points().iter().map(|p| f(p.theta_deg())).collect();
        let phi = vec![0.0; grid.len()];
        GainMap::new(grid, None, theta, phi).unwrap()
    }

    fn meta() -> CdfMeta {
        CdfMeta::new("test", "mrc", "none")
    }

    #[test]
    fn constant_map_is_a_single_step() {
        let map = map_from(|_| 2.0);
        let cdf = spherical_cdf(&map, meta());
        assert_eq!(cdf.points().len(), 1);
        assert_relative_eq!(cdf.points()[0].0, 10.0 * 2.0_f64.log10());
        assert_relative_eq!(cdf.points()[0].1, 1.0);
        for p in [0.01, 0.5, 0.99] {
            assert_relative_eq!(cdf.percentile(p), 10.0 * 2.0_f64.log10());
        }
    }

    #[test]
    fn hemisphere_indicator_map() {
        let map = map_from(|t| if t < 90.0 { 1.0 } else { 0.0 });
        let cdf = spherical_cdf(&map, meta());
        // Half the sphere sits at the floor, half at 0 dB.
        assert_eq!(cdf.points().len(), 2);
        assert_relative_eq!(cdf.points()[0].0, DB_FLOOR);
        assert_relative_eq!(cdf.points()[0].1, 0.5, max_relative = 1e-9);
        assert_relative_eq!(cdf.percentile(0.25), DB_FLOOR);
        assert_relative_eq!(cdf.percentile(0.75), 0.0);
    }

    #[test]
    fn portrait_region_step_fraction() {
        use crate::blockage::BlockageRegion;
        let region = BlockageRegion::portrait();
        let grid = Arc::new(make_grid(1.0, 1.0).unwrap());
        let gains: Vec<f64> = grid
            .points()
            .iter()
            .map(|p| if region.is_blocked(p) { 1e-3 } else { 1.0 })
            .collect();
        let map = GainMap::new(grid.clone(), None, gains, vec![0.0; grid.len()]).unwrap();
        let cdf = spherical_cdf(&map, meta());
        // Jump at the low value equals the region's solid-angle fraction,
        // 21.10% in closed form (21.07% as commonly rounded).
        assert_relative_eq!(cdf.points()[0].1, 0.2110074, epsilon = 1e-4);
        assert!((cdf.points()[0].1 - 0.2107).abs() < 1e-3);
    }

    #[test]
    fn cdf_monotone_and_terminal() {
        let map = map_from(|t| (t / 30.0).sin().abs() + 0.1);
        let cdf = spherical_cdf(&map, meta());
        let pts = cdf.points();
        for w in pts.windows(2) {
            assert!(w[1].0 > w[0].0);
            assert!(w[1].1 >= w[0].1);
        }
        assert_relative_eq!(pts.last().unwrap().1, 1.0);
    }

    #[test]
    fn percentile_nondecreasing() {
        let map = map_from(|t| 1.0 + (t * 0.7).cos().powi(2));
        let cdf = spherical_cdf(&map, meta());
        let mut last = f64::NEG_INFINITY;
        for i in 1..100 {
            let g = cdf.percentile(i as f64 / 100.0);
            assert!(g >= last);
            last = g;
        }
    }

    #[test]
    fn grid_refinement_percentiles_agree() {
        let smooth = |t: f64| 1.0 + 0.5 * (t.to_radians()).sin();
        let make = |step: f64| {
            let grid = Arc::new(make_grid(step, step).unwrap());
            let g: Vec<f64> = grid.points().iter().map(|p| smooth(p.theta_deg())).collect();
            let z = vec![0.0; grid.len()];
            spherical_cdf(&GainMap::new(grid, None, g, z).unwrap(), meta())
        };
        let coarse = make(1.0);
        let fine = make(0.5);
        for p in [0.05, 0.3, 0.5, 0.75, 0.95] {
            assert!((coarse.percentile(p) - fine.percentile(p)).abs() < 0.1);
        }
    }

    #[test]
    fn compare_self_is_zero() {
        let cdf = spherical_cdf(&map_from(|t| 1.0 + t / 180.0), meta());
        let table = compare_pair(&cdf, &cdf).unwrap();
        assert!(table.delta_db.iter().all(|&d| d == 0.0));
        assert!(table.crossovers.is_empty());
    }

    #[test]
    fn compare_uniform_shift() {
        let a = spherical_cdf(&map_from(|t| 1.0 + t / 180.0), meta());
        let shifted = map_from(|t| (1.0 + t / 180.0) * 10.0_f64.powf(0.3));
        let b = spherical_cdf(&shifted, meta());
        let table = compare_pair(&a, &b).unwrap();
        for &d in &table.delta_db {
            assert_relative_eq!(d, -3.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn compare_rejects_mismatched_metrics() {
        let a = spherical_cdf(&map_from(|_| 1.0), meta());
        let b = spherical_cdf(&map_from(|_| 1.0), meta().with_metric("se_bps_hz"));
        assert!(compare_pair(&a, &b).is_err());
    }

    #[test]
    fn csv_export_shape() {
        let cdf = spherical_cdf(&map_from(|t| if t < 90.0 { 1.0 } else { 0.5 }), meta());
        let mut buf = Vec::new();
        cdf.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "gain_db,cdf_fraction");
        assert_eq!(lines.len(), 1 + cdf.points().len());
        assert!(text.ends_with('\n'));
    }
}
