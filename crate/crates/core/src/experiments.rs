//! Monte-Carlo sweeps of the full release protocol over `(m, ε)` grids.

use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{self, OptimalM, PrivacySpec};
use crate::data::{self, IngestSpec, Shape, SyntheticSpec};
use crate::domain::Database;
use crate::error::{Error, Result};
use crate::protocol::{run_release, ReleaseSeeds};
use crate::seed;
use crate::stats::Moments;
use crate::typestats::{joint_type, l2_error, TypeVector};

/// Points in the automatic `m` grid.
pub const AUTO_GRID_POINTS: usize = 24;
/// The automatic grid spans `[m*/AUTO_GRID_SPAN, AUTO_GRID_SPAN · m*]`.
pub const AUTO_GRID_SPAN: f64 = 32.0;
/// Distance between `m*` and the flank points of [`run_optimal_point`].
pub const FLANK_FACTOR: f64 = 8.0;
pub const DEFAULT_TRIALS: usize = 1000;

/// Seed-path tag separating flank-check trials from sweep trials.
const OPTIMAL_TAG: u64 = 0x6f70_7469_6d61_6c00;

/// Where a sweep's database comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DatasetRef {
    /// A directory holding `adult.data`/`adult.test`, or a single Adult file.
    Adult(PathBuf),
    Synthetic(SyntheticSpec),
}

impl DatasetRef {
    pub fn load(&self) -> Result<Database> {
        match self {
            DatasetRef::Adult(path) => {
                let spec = if path.is_dir() {
                    IngestSpec::adult_dir(path)
                } else {
                    IngestSpec::adult(vec![path.clone()])
                };
                Ok(data::ingest_adult(&spec)?.database)
            }
            DatasetRef::Synthetic(spec) => data::gen_synthetic(spec),
        }
    }

    pub fn name(&self) -> String {
        match self {
            DatasetRef::Adult(p) => p.display().to_string(),
            DatasetRef::Synthetic(s) => s.shape.to_string(),
        }
    }
}

/// One entry of an explicit `m` grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MPoint {
    Value(usize),
    /// The bound-minimising `m*` for the point's ε.
    Optimal,
}

impl FromStr for MPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("m*") || s.eq_ignore_ascii_case("mstar") {
            return Ok(MPoint::Optimal);
        }
        match s.parse::<usize>() {
            Ok(m) if m >= 1 => Ok(MPoint::Value(m)),
            _ => Err(Error::Parameter(format!("bad m value {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MGrid {
    /// [`AUTO_GRID_POINTS`] log-spaced points around `m*`.
    Auto,
    Explicit(Vec<MPoint>),
}

impl FromStr for MGrid {
    type Err = Error;

    /// `auto` or a comma-separated list such as `100,m*,5000`.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("auto") {
            return Ok(MGrid::Auto);
        }
        let points = s
            .split(',')
            .map(str::parse)
            .collect::<Result<Vec<MPoint>>>()?;
        if points.is_empty() {
            return Err(Error::Parameter("empty m grid".into()));
        }
        Ok(MGrid::Explicit(points))
    }
}

impl MGrid {
    /// Concrete sample counts for one ε, ascending and deduplicated. May exceed `n`.
    pub fn resolve(&self, n: usize, epsilon: f64, d: usize) -> Result<Vec<usize>> {
        let star = calculus::optimal_m(n, epsilon, d)?;
        let mut ms: Vec<usize> = match self {
            MGrid::Auto => auto_grid(star.real),
            MGrid::Explicit(points) => points
                .iter()
                .map(|p| match p {
                    MPoint::Value(m) => *m,
                    MPoint::Optimal => star.rounded,
                })
                .collect(),
        };
        ms.sort_unstable();
        ms.dedup();
        Ok(ms)
    }
}

/// `m* · span^{2k/(P−1) − 1}` for `k = 0..P`, rounded to at least 1.
pub fn auto_grid(m_star: f64) -> Vec<usize> {
    let last = (AUTO_GRID_POINTS - 1) as f64;
    (0..AUTO_GRID_POINTS)
        .map(|k| {
            let e = 2.0 * k as f64 / last - 1.0;
            (m_star * AUTO_GRID_SPAN.powf(e)).round().max(1.0) as usize
        })
        .collect()
}

/// Ratio between consecutive points of the automatic grid.
pub fn auto_grid_step() -> f64 {
    AUTO_GRID_SPAN.powf(2.0 / (AUTO_GRID_POINTS - 1) as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub epsilons: Vec<f64>,
    pub m_grid: MGrid,
    pub trials: usize,
    pub master_seed: u64,
}

impl ExperimentPlan {
    pub fn new(epsilons: Vec<f64>, m_grid: MGrid, trials: usize, master_seed: u64) -> Self {
        Self {
            epsilons,
            m_grid,
            trials,
            master_seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be at least 1".into()));
        }
        if self.epsilons.is_empty() {
            return Err(Error::Parameter("empty epsilon grid".into()));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(Error::Parameter(format!(
                "epsilon must be positive, got {e}"
            )));
        }
        if matches!(&self.m_grid, MGrid::Explicit(v) if v.is_empty()) {
            return Err(Error::Parameter("empty m grid".into()));
        }
        Ok(())
    }
}

/// One protocol run's outcome.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub m: usize,
    pub epsilon: f64,
    pub gamma: f64,
    pub trial: usize,
    pub l2_error: f64,
}

/// Runs the protocol once and measures `‖T̂ − T‖₂` against the full-population type.
pub fn run_trial(
    db: &Database,
    truth: &TypeVector,
    spec: &PrivacySpec,
    trial: usize,
    run_seed: u64,
) -> Result<TrialResult> {
    let out = run_release(db, spec.m, spec.gamma, ReleaseSeeds::derive(run_seed))?;
    Ok(TrialResult {
        m: spec.m,
        epsilon: spec.epsilon,
        gamma: spec.gamma,
        trial,
        l2_error: l2_error(&out.estimate, truth)?,
    })
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub m: usize,
    pub gamma: f64,
    pub c: f64,
    pub mean_l2: f64,
    pub stderr_l2: f64,
    pub bound: f64,
    pub bound_over_sqrt_d: f64,
    pub tight_bound: f64,
    pub trials: usize,
    /// Standard error above a tenth of the mean.
    #[serde(skip)]
    pub flagged: bool,
}

impl SweepRow {
    fn new(spec: &PrivacySpec, errors: &[f64]) -> Self {
        let mom = Moments::from_slice(errors);
        let bound = spec.utility_bound();
        let stderr = mom.stderr();
        Self {
            epsilon: spec.epsilon,
            m: spec.m,
            gamma: spec.gamma,
            c: spec.condition_number(),
            mean_l2: mom.mean,
            stderr_l2: stderr,
            bound,
            bound_over_sqrt_d: bound / (spec.d as f64).sqrt(),
            tight_bound: spec.tight_bound(),
            trials: errors.len(),
            flagged: stderr > mom.mean / 10.0,
        }
    }
}

/// Column order of the sweep CSV.
pub const CSV_HEADER: [&str; 10] = [
    "epsilon",
    "m",
    "gamma",
    "c",
    "mean_l2",
    "stderr_l2",
    "bound",
    "bound_over_sqrt_d",
    "tight_bound",
    "trials",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// `(ε, m)` points dropped because `m > n`.
    pub skipped: Vec<(f64, usize)>,
}

impl SweepTable {
    /// Rows for one ε, in ascending `m`.
    pub fn rows_for(&self, epsilon: f64) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.epsilon == epsilon).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv(&self.rows, out)
    }
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    w.flush()?;
    Ok(())
}

/// All trials at one point, in trial order.
fn run_point(
    db: &Database,
    truth: &TypeVector,
    spec: &PrivacySpec,
    trials: usize,
    path: [u64; 2],
    master: u64,
) -> Result<SweepRow> {
    let errors = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = seed::derive(master, &[path[0], path[1], t as u64]);
            run_trial(db, truth, spec, t, s).map(|r| r.l2_error)
        })
        .collect::<Result<Vec<f64>>>()?;
    let row = SweepRow::new(spec, &errors);
    if row.flagged {
        log::warn!(
            "eps={} m={}: stderr {:.3e} exceeds a tenth of the mean {:.3e}",
            spec.epsilon,
            spec.m,
            row.stderr_l2,
            row.mean_l2
        );
    }
    Ok(row)
}

/// Runs every `(ε, m)` point of the plan on `db`.
pub fn run_sweep(db: &Database, plan: &ExperimentPlan) -> Result<SweepTable> {
    plan.validate()?;
    let n = db.len();
    let d = db.alphabet().joint_card();
    let truth = joint_type(db)?;
    let mut table = SweepTable::default();
    for (ei, &eps) in plan.epsilons.iter().enumerate() {
        for (mi, m) in plan.m_grid.resolve(n, eps, d)?.into_iter().enumerate() {
            if m > n {
                log::warn!("eps={eps}: skipping m={m} > n={n}");
                table.skipped.push((eps, m));
                continue;
            }
            let spec = PrivacySpec::from_epsilon(n, m, eps, d)?;
            let row = run_point(
                db,
                &truth,
                &spec,
                plan.trials,
                [ei as u64, mi as u64],
                plan.master_seed,
            )?;
            table.rows.push(row);
        }
    }
    Ok(table)
}

/// Errors at `m*` and at the flanks `m*/8`, `8·m*` for one ε.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimalPoint {
    pub epsilon: f64,
    pub m_star: OptimalM,
    pub low: Option<SweepRow>,
    pub center: SweepRow,
    pub high: Option<SweepRow>,
}

impl OptimalPoint {
    /// Smallest flank margin in combined standard errors; `None` if both flanks were skipped.
    pub fn flank_margin_sigmas(&self) -> Option<f64> {
        [&self.low, &self.high]
            .into_iter()
            .flatten()
            .map(|f| {
                let s = (f.stderr_l2.powi(2) + self.center.stderr_l2.powi(2)).sqrt();
                (f.mean_l2 - self.center.mean_l2) / s
            })
            .reduce(f64::min)
    }
}

pub fn run_optimal_point(
    db: &Database,
    epsilons: &[f64],
    trials: usize,
    master_seed: u64,
) -> Result<Vec<OptimalPoint>> {
    ExperimentPlan::new(epsilons.to_vec(), MGrid::Auto, trials, master_seed).validate()?;
    let n = db.len();
    let d = db.alphabet().joint_card();
    let truth = joint_type(db)?;
    let mut out = Vec::with_capacity(epsilons.len());
    for (ei, &eps) in epsilons.iter().enumerate() {
        let star = calculus::optimal_m(n, eps, d)?;
        let mut rows = Vec::with_capacity(3);
        for (j, factor) in [1.0 / FLANK_FACTOR, 1.0, FLANK_FACTOR]
            .into_iter()
            .enumerate()
        {
            let m = ((star.rounded as f64 * factor).round() as usize).max(1);
            if m > n {
                log::warn!("eps={eps}: skipping flank m={m} > n={n}");
                rows.push(None);
                continue;
            }
            let spec = PrivacySpec::from_epsilon(n, m, eps, d)?;
            let path = [OPTIMAL_TAG ^ ei as u64, j as u64];
            rows.push(Some(run_point(
                db,
                &truth,
                &spec,
                trials,
                path,
                master_seed,
            )?));
        }
        let high = rows.pop().flatten();
        let center = rows
            .pop()
            .flatten()
            .ok_or_else(|| Error::Parameter(format!("m* = {} exceeds n = {n}", star.rounded)))?;
        let low = rows.pop().flatten();
        out.push(OptimalPoint {
            epsilon: eps,
            m_star: star,
            low,
            center,
            high,
        });
    }
    Ok(out)
}

/// Convenience for the three synthetic shapes.
pub fn synthetic(shape: Shape, n: usize, d: usize, seed: u64) -> DatasetRef {
    DatasetRef::Synthetic(SyntheticSpec::new(shape, n, d, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_db() -> Database {
        data::gen_synthetic(&SyntheticSpec::new(Shape::Linear, 2000, 6, 11)).unwrap()
    }

    #[test]
    fn auto_grid_brackets_m_star() {
        let g = auto_grid(1000.0);
        assert_eq!(g.len(), AUTO_GRID_POINTS);
        assert_eq!(g[0], 31);
        assert_eq!(g[AUTO_GRID_POINTS - 1], 32000);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!((auto_grid_step() - 32f64.powf(2.0 / 23.0)).abs() < 1e-15);
    }

    #[test]
    fn parse_grids() {
        assert_eq!("auto".parse::<MGrid>().unwrap(), MGrid::Auto);
        assert_eq!(
            "10, m*,30".parse::<MGrid>().unwrap(),
            MGrid::Explicit(vec![MPoint::Value(10), MPoint::Optimal, MPoint::Value(30)])
        );
        assert!("10,0".parse::<MGrid>().is_err());
        assert!("x".parse::<MGrid>().is_err());
    }

    #[test]
    fn m_star_token_resolves() {
        let g = MGrid::Explicit(vec![MPoint::Optimal, MPoint::Value(5)]);
        assert_eq!(g.resolve(45222, 0.1, 24).unwrap(), vec![5, 239]);
    }

    #[test]
    fn oversized_points_are_skipped() {
        let db = small_db();
        let plan = ExperimentPlan::new(vec![0.5], "50,3000".parse().unwrap(), 4, 1);
        let t = run_sweep(&db, &plan).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.skipped, vec![(0.5, 3000)]);
    }

    #[test]
    fn csv_layout() {
        let db = small_db();
        let plan = ExperimentPlan::new(vec![0.5, 1.0], "40,m*".parse().unwrap(), 8, 3);
        let t = run_sweep(&db, &plan).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(lines.count(), 4);
        let r = &t.rows[0];
        assert_eq!(r.trials, 8);
        assert!((r.bound_over_sqrt_d * 6f64.sqrt() - r.bound).abs() < 1e-12);
        assert!((calculus::epsilon_of(2000, r.m, r.gamma).unwrap() - r.epsilon).abs() < 1e-12);
    }

    #[test]
    fn empty_table_still_has_header() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap().trim_end(),
            CSV_HEADER.join(",")
        );
    }

    #[test]
    fn sweeps_are_reproducible() {
        let db = small_db();
        let plan = ExperimentPlan::new(vec![0.1, 1.0], "30,m*,400".parse().unwrap(), 16, 99);
        let csv = |p: &ExperimentPlan| {
            let mut b = Vec::new();
            run_sweep(&db, p).unwrap().write_csv(&mut b).unwrap();
            b
        };
        assert_eq!(csv(&plan), csv(&plan));
        let mut other = plan.clone();
        other.master_seed = 100;
        assert_ne!(csv(&plan), csv(&other));
    }

    #[test]
    fn trials_are_independent_of_scheduling() {
        let db = small_db();
        let truth = joint_type(&db).unwrap();
        let spec = PrivacySpec::from_epsilon(2000, 100, 0.5, 6).unwrap();
        let row = run_point(&db, &truth, &spec, 10, [0, 0], 5).unwrap();
        let serial: Vec<f64> = (0..10)
            .map(|t| {
                let s = seed::derive(5, &[0, 0, t as u64]);
                run_trial(&db, &truth, &spec, t, s).unwrap().l2_error
            })
            .collect();
        assert_eq!(row.mean_l2, Moments::from_slice(&serial).mean);
    }

    #[test]
    fn flagging() {
        let spec = PrivacySpec::from_epsilon(100, 10, 1.0, 4).unwrap();
        assert!(SweepRow::new(&spec, &[0.0, 0.0, 1.0]).flagged);
        assert!(!SweepRow::new(&spec, &[1.0, 1.01, 0.99]).flagged);
    }

    #[test]
    fn bad_plans() {
        let db = small_db();
        assert!(run_sweep(&db, &ExperimentPlan::new(vec![0.5], MGrid::Auto, 0, 1)).is_err());
        assert!(run_sweep(&db, &ExperimentPlan::new(vec![], MGrid::Auto, 1, 1)).is_err());
        assert!(run_sweep(&db, &ExperimentPlan::new(vec![-1.0], MGrid::Auto, 1, 1)).is_err());
    }

    #[test]
    fn optimal_point_flanks() {
        let db = small_db();
        let pts = run_optimal_point(&db, &[1.0], 40, 7).unwrap();
        let p = &pts[0];
        assert_eq!(p.center.m, p.m_star.rounded);
        assert!(p.low.is_some());
        assert!(p.flank_margin_sigmas().unwrap() > 0.0);
    }
}
