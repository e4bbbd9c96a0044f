//! Randomised experiments: parameter sweeps, per-instance result rows in
//! CSV and per-point summaries.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use rayon::prelude::*;

use crate::error::{GenError, SolveError};
use crate::generate::{random_instance, GenParams};
use crate::search::{solve_most_stable, SolveOptions};

pub const CSV_HEADER: &str = "experiment,point,seed,solvable,bp,size,time_ms,nodes";

/// Popularity skew used by every experiment.
pub const DEFAULT_SKEW: f64 = 6.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Residents `x`, with `0.1x` couples, `0.1x` hospitals and `x` posts.
    Exp1,
    /// Couples, with 100 residents, 10 hospitals and 100 posts.
    Exp2,
    /// Hospitals, with 100 residents, 10 couples and 100 posts.
    Exp3,
    /// Exact list length, with 100 residents, 10 couples, 10 hospitals.
    Exp4,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Exp1 => "exp1",
            ExperimentKind::Exp2 => "exp2",
            ExperimentKind::Exp3 => "exp3",
            ExperimentKind::Exp4 => "exp4",
        }
    }

    /// Desk-scale sweep values.
    pub fn default_points(self) -> Vec<usize> {
        match self {
            ExperimentKind::Exp1 => vec![50, 70, 90],
            ExperimentKind::Exp2 => (0..=30).step_by(5).collect(),
            ExperimentKind::Exp3 => (10..=100).step_by(10).collect(),
            ExperimentKind::Exp4 => (2..=6).collect(),
        }
    }

    /// Generator parameters at sweep value `x` before scaling.
    pub fn params_at(self, x: usize) -> GenParams {
        let base = GenParams {
            residents: 100,
            couples: 10,
            hospitals: 10,
            posts: 100,
            min_len: 3,
            max_len: 5,
            skew: DEFAULT_SKEW,
        };
        match self {
            ExperimentKind::Exp1 => {
                GenParams { residents: x, couples: x / 10, hospitals: x / 10, posts: x, ..base }
            }
            ExperimentKind::Exp2 => GenParams { couples: x, ..base },
            ExperimentKind::Exp3 => GenParams { hospitals: x, ..base },
            ExperimentKind::Exp4 => GenParams { min_len: x, max_len: x, ..base },
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exp1" => Ok(ExperimentKind::Exp1),
            "exp2" => Ok(ExperimentKind::Exp2),
            "exp3" => Ok(ExperimentKind::Exp3),
            "exp4" => Ok(ExperimentKind::Exp4),
            _ => Err(GenError::Params(format!("unknown experiment {s:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub points: Vec<usize>,
    pub reps: usize,
    /// Multiplies residents, couples, hospitals and posts.
    pub scale: f64,
    pub seed: u64,
    pub time_limit: Option<Duration>,
}

impl ExperimentSpec {
    pub fn desk(kind: ExperimentKind) -> Self {
        ExperimentSpec {
            kind,
            points: kind.default_points(),
            reps: 200,
            scale: 1.0,
            seed: 1,
            time_limit: Some(Duration::from_secs(60)),
        }
    }

    /// The published sweep: 1000 repetitions, and exp1 up to 150 residents.
    pub fn full(kind: ExperimentKind) -> Self {
        let points = match kind {
            ExperimentKind::Exp1 => (50..=150).step_by(20).collect(),
            _ => kind.default_points(),
        };
        ExperimentSpec { points, reps: 1000, ..Self::desk(kind) }
    }

    pub fn params_at(&self, x: usize) -> GenParams {
        let mut p = self.kind.params_at(x);
        if self.scale != 1.0 {
            let s = |v: usize| ((v as f64) * self.scale).round() as usize;
            p.residents = s(p.residents);
            p.couples = s(p.couples);
            p.hospitals = s(p.hospitals).max(p.max_len);
            p.posts = s(p.posts).max(p.hospitals);
        }
        p
    }

    /// Seed of repetition `rep` at sweep value `point`.
    pub fn instance_seed(&self, point: usize, rep: usize) -> u64 {
        splitmix64(splitmix64(self.seed ^ (point as u64).rotate_left(32)) ^ rep as u64)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub experiment: &'static str,
    pub point: usize,
    pub seed: u64,
    /// False when the time limit stopped the search; bp and size are then
    /// those of the best matching found.
    pub complete: bool,
    pub bp: usize,
    pub size: usize,
    pub time_ms: f64,
    pub nodes: u64,
}

impl ResultRow {
    pub fn solvable(&self) -> bool {
        self.bp == 0
    }

    /// CSV line without the trailing newline.
    pub fn to_csv(&self) -> String {
        let solvable = if !self.complete {
            "unknown"
        } else if self.solvable() {
            "true"
        } else {
            "false"
        };
        format!(
            "{},{},{},{},{},{},{:.3},{}",
            self.experiment, self.point, self.seed, solvable, self.bp, self.size, self.time_ms, self.nodes
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointSummary {
    pub point: usize,
    /// Completed instances, the basis of the means.
    pub completed: usize,
    pub incomplete: usize,
    pub mean_time_ms: f64,
    pub mean_size: f64,
    pub mean_bp: f64,
    pub max_bp: usize,
    pub unsolvable: usize,
}

/// Per-point statistics over completed rows, in first-appearance order.
pub fn summarize(rows: &[ResultRow]) -> Vec<PointSummary> {
    let mut points: Vec<usize> = Vec::new();
    for r in rows {
        if !points.contains(&r.point) {
            points.push(r.point);
        }
    }
    points
        .into_iter()
        .map(|point| {
            let here: Vec<&ResultRow> = rows.iter().filter(|r| r.point == point).collect();
            let done: Vec<&&ResultRow> = here.iter().filter(|r| r.complete).collect();
            let n = done.len();
            let mean = |f: &dyn Fn(&ResultRow) -> f64| {
                if n == 0 {
                    0.0
                } else {
                    done.iter().map(|r| f(r)).sum::<f64>() / n as f64
                }
            };
            PointSummary {
                point,
                completed: n,
                incomplete: here.len() - n,
                mean_time_ms: mean(&|r| r.time_ms),
                mean_size: mean(&|r| r.size as f64),
                mean_bp: mean(&|r| r.bp as f64),
                max_bp: done.iter().map(|r| r.bp).max().unwrap_or(0),
                unsolvable: done.iter().filter(|r| !r.solvable()).count(),
            }
        })
        .collect()
}

/// Aligned text table of summaries.
pub struct SummaryTable<'a>(pub &'a [PointSummary]);

impl fmt::Display for SummaryTable<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>6} {:>6} {:>6} {:>12} {:>10} {:>8} {:>7} {:>10}",
            "point", "done", "timeout", "mean_ms", "mean_size", "mean_bp", "max_bp", "unsolvable"
        )?;
        for s in self.0 {
            writeln!(
                f,
                "{:>6} {:>6} {:>6} {:>12.3} {:>10.2} {:>8.3} {:>7} {:>10}",
                s.point,
                s.completed,
                s.incomplete,
                s.mean_time_ms,
                s.mean_size,
                s.mean_bp,
                s.max_bp,
                s.unsolvable
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Generates and solves every instance in parallel. Rows come back in
/// (point, repetition) order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>, ExperimentError> {
    for &x in &spec.points {
        spec.params_at(x).check()?;
    }
    let jobs: Vec<(usize, usize)> =
        spec.points.iter().flat_map(|&x| (0..spec.reps).map(move |rep| (x, rep))).collect();
    let opts = SolveOptions { time_limit: spec.time_limit, ..Default::default() };
    jobs.par_iter()
        .map(|&(x, rep)| {
            let seed = spec.instance_seed(x, rep);
            let inst = random_instance(&spec.params_at(x), seed)?;
            let sol = solve_most_stable(&inst, &opts)?;
            Ok(ResultRow {
                experiment: spec.kind.name(),
                point: x,
                seed,
                complete: sol.optimal,
                bp: sol.bp_count(),
                size: sol.size,
                time_ms: sol.stats.elapsed.as_secs_f64() * 1000.0,
                nodes: sol.stats.nodes,
            })
        })
        .collect()
}

/// Header plus one line per row.
pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}
