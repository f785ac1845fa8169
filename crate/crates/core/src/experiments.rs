//! Seeded experiment harness: random joints, epsilon sweeps, CSV output and
//! the closed-form chi-square validation run.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::{mechanism_leakage, mechanism_utility, JointDistribution};
use crate::mechanisms::{
    algorithm1, algorithm1_with_baselines, epsilon_grid, example1_joint, example1_theoretical,
    optimal_maxlift_mechanism, MeasureKind, SweepConfig, SweepPoint, EXAMPLE1_MAX_EPSILON,
};

/// Random joints are redrawn while some marginal is below this floor.
pub const MARGINAL_FLOOR: f64 = 1e-3;
pub const MAX_REDRAWS: usize = 10_000;

/// Largest allowed utility gap in the closed-form validation run, in nats.
pub const EXAMPLE1_UTILITY_TOLERANCE: f64 = 1e-3;
const EXAMPLE1_REFINEMENT: usize = 200;
const EXAMPLE1_REFINEMENT_LAST: usize = 2000;
const EXAMPLE1_EPSILON_END: f64 = 0.4;
const EXAMPLE1_DELTA: f64 = 0.05;

pub const MECHANISM_MAX_LIFT: &str = "max_lift";
pub const MECHANISM_ALGORITHM1: &str = "algorithm1";

/// Draws `P_SX` uniformly from the simplex (flat Dirichlet) until both
/// marginals clear [`MARGINAL_FLOOR`].
pub fn generate_joint<R: Rng + ?Sized>(
    s_size: usize,
    x_size: usize,
    rng: &mut R,
) -> Result<JointDistribution> {
    if s_size < 2 || x_size < 2 {
        return Err(Error::Config(format!(
            "alphabet sizes must be at least 2, got {s_size}x{x_size}"
        )));
    }
    for _ in 0..MAX_REDRAWS {
        let raw: Vec<f64> = (0..s_size * x_size).map(|_| rng.sample(Exp1)).collect();
        let total: f64 = raw.iter().sum();
        let rows: Vec<Vec<f64>> = raw
            .chunks(x_size)
            .map(|r| r.iter().map(|v| v / total).collect())
            .collect();
        let Ok(joint) = JointDistribution::from_rows(&rows) else {
            continue;
        };
        if joint
            .p_s()
            .iter()
            .chain(joint.p_x().iter())
            .all(|&p| p >= MARGINAL_FLOOR)
        {
            return Ok(joint);
        }
    }
    Err(Error::RejectionOverflow(MAX_REDRAWS))
}

/// RNG for instance `instance` of a run seeded with `seed`. Each instance
/// gets its own ChaCha stream so results do not depend on scheduling.
pub fn instance_rng(seed: u64, instance: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(instance as u64);
    rng
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub s_size: usize,
    pub x_size: usize,
    pub num_instances: usize,
    pub seed: u64,
    pub sweep: SweepConfig,
    pub kinds: Vec<MeasureKind>,
    pub output_path: PathBuf,
    /// Defaults to `<output stem>_mean.csv` next to the output.
    pub aggregate_path: Option<PathBuf>,
    /// Fill `wall_time_ms`. Off by default so reruns are byte-identical.
    pub record_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            s_size: 4,
            x_size: 7,
            num_instances: 10,
            seed: 1,
            sweep: SweepConfig::uniform(epsilon_grid(0.005, 0.015, 0.17), 5, 100, 0.05, 1.0)
                .expect("default sweep is valid"),
            kinds: MeasureKind::ALL.to_vec(),
            output_path: PathBuf::from("sweep.csv"),
            aggregate_path: None,
            record_timing: false,
        }
    }
}

impl ExperimentConfig {
    /// Parses a flat `key = value` file. Blank lines and `#` comments are
    /// ignored. Unset keys keep their defaults.
    ///
    /// Keys: `s_size`, `x_size`, `num_instances`, `seed`, `epsilons` (comma
    /// list) or `eps_start`/`eps_step`/`eps_stop`, `refinement`,
    /// `refinement_last`, `delta`, `epsilon_end`, `kinds`, `output`,
    /// `aggregate_output`, `record_timing`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut epsilons: Option<Vec<f64>> = None;
        let (mut eps_start, mut eps_step, mut eps_stop) = (0.005, 0.015, 0.17);
        let (mut refinement, mut refinement_last) = (5usize, 100usize);
        let mut delta = cfg.sweep.delta;
        let mut epsilon_end = cfg.sweep.epsilon_end;

        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad =
                |what: &str| Error::Config(format!("line {}: invalid {key}: {what}", lineno + 1));
            match key {
                "s_size" => cfg.s_size = value.parse().map_err(|_| bad(value))?,
                "x_size" => cfg.x_size = value.parse().map_err(|_| bad(value))?,
                "num_instances" => cfg.num_instances = value.parse().map_err(|_| bad(value))?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad(value))?,
                "epsilons" => epsilons = Some(parse_float_list(value).map_err(|_| bad(value))?),
                "eps_start" => eps_start = value.parse().map_err(|_| bad(value))?,
                "eps_step" => eps_step = value.parse().map_err(|_| bad(value))?,
                "eps_stop" => eps_stop = value.parse().map_err(|_| bad(value))?,
                "refinement" => refinement = value.parse().map_err(|_| bad(value))?,
                "refinement_last" => refinement_last = value.parse().map_err(|_| bad(value))?,
                "delta" => delta = value.parse().map_err(|_| bad(value))?,
                "epsilon_end" => epsilon_end = value.parse().map_err(|_| bad(value))?,
                "kinds" => {
                    cfg.kinds = value
                        .split(',')
                        .map(str::parse)
                        .collect::<Result<Vec<MeasureKind>>>()?;
                }
                "output" => cfg.output_path = PathBuf::from(value),
                "aggregate_output" => cfg.aggregate_path = Some(PathBuf::from(value)),
                "record_timing" => cfg.record_timing = value.parse().map_err(|_| bad(value))?,
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }

        let epsilons = epsilons.unwrap_or_else(|| epsilon_grid(eps_start, eps_step, eps_stop));
        cfg.sweep =
            SweepConfig::uniform(epsilons, refinement, refinement_last, delta, epsilon_end)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.s_size < 2 || self.x_size < 2 {
            return Err(Error::Config("s_size and x_size must be at least 2".into()));
        }
        if self.num_instances == 0 {
            return Err(Error::Config("num_instances must be at least 1".into()));
        }
        if self.kinds.is_empty() {
            return Err(Error::Config("no measure kinds selected".into()));
        }
        self.sweep.validate()
    }

    pub fn aggregate_path(&self) -> PathBuf {
        self.aggregate_path.clone().unwrap_or_else(|| {
            let stem = self
                .output_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "sweep".into());
            self.output_path.with_file_name(format!("{stem}_mean.csv"))
        })
    }
}

pub fn parse_float_list(text: &str) -> std::result::Result<Vec<f64>, std::num::ParseFloatError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

/// One CSV row: a mechanism evaluated at one budget on one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub instance_id: usize,
    pub measure: MeasureKind,
    pub mechanism_name: &'static str,
    pub epsilon: f64,
    pub utility_nats: f64,
    pub normalized_utility: f64,
    pub leakage_mi_nats: f64,
    pub max_lift: f64,
    pub log_max_lift: f64,
    pub max_measure: f64,
    pub candidate_count: usize,
    pub wall_time_ms: f64,
}

pub const CSV_HEADER: [&str; 12] = [
    "instance_id",
    "measure",
    "mechanism_name",
    "epsilon",
    "utility_nats",
    "normalized_utility",
    "leakage_mi_nats",
    "max_lift",
    "log_max_lift",
    "max_measure",
    "candidate_count",
    "wall_time_ms",
];

/// 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

impl CsvRow {
    fn new(
        instance_id: usize,
        measure: MeasureKind,
        mechanism_name: &'static str,
        point: &SweepPoint,
        wall_time_ms: f64,
    ) -> Self {
        Self {
            instance_id,
            measure,
            mechanism_name,
            epsilon: point.epsilon,
            utility_nats: point.utility,
            normalized_utility: point.normalized_utility,
            leakage_mi_nats: point.leakage_mi,
            max_lift: point.max_lift,
            log_max_lift: point.max_lift.ln(),
            max_measure: point.max_measure,
            candidate_count: point.candidate_count,
            wall_time_ms,
        }
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.instance_id.to_string(),
            self.measure.name().to_string(),
            self.mechanism_name.to_string(),
            format_float(self.epsilon),
            format_float(self.utility_nats),
            format_float(self.normalized_utility),
            format_float(self.leakage_mi_nats),
            format_float(self.max_lift),
            format_float(self.log_max_lift),
            format_float(self.max_measure),
            self.candidate_count.to_string(),
            format_float(self.wall_time_ms),
        ]
    }
}

/// Per-epsilon means over instances for one (measure, mechanism) pair.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub measure: MeasureKind,
    pub mechanism_name: &'static str,
    pub epsilon: f64,
    pub instances: usize,
    pub mean_utility_nats: f64,
    pub mean_normalized_utility: f64,
    pub mean_leakage_mi_nats: f64,
    pub mean_max_lift: f64,
    pub mean_log_max_lift: f64,
    pub mean_max_measure: f64,
    pub mean_candidate_count: f64,
    pub mean_wall_time_ms: f64,
}

pub const AGGREGATE_HEADER: [&str; 12] = [
    "measure",
    "mechanism_name",
    "epsilon",
    "instances",
    "mean_utility_nats",
    "mean_normalized_utility",
    "mean_leakage_mi_nats",
    "mean_max_lift",
    "mean_log_max_lift",
    "mean_max_measure",
    "mean_candidate_count",
    "mean_wall_time_ms",
];

impl AggregateRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.measure.name().to_string(),
            self.mechanism_name.to_string(),
            format_float(self.epsilon),
            self.instances.to_string(),
            format_float(self.mean_utility_nats),
            format_float(self.mean_normalized_utility),
            format_float(self.mean_leakage_mi_nats),
            format_float(self.mean_max_lift),
            format_float(self.mean_log_max_lift),
            format_float(self.mean_max_measure),
            format_float(self.mean_candidate_count),
            format_float(self.mean_wall_time_ms),
        ]
    }
}

/// Rows for one instance: for each kind, the max-lift mechanism and the
/// heuristic at every budget.
pub fn run_instance(cfg: &ExperimentConfig, instance: usize) -> Result<Vec<CsvRow>> {
    let joint = generate_joint(
        cfg.s_size,
        cfg.x_size,
        &mut instance_rng(cfg.seed, instance),
    )?;
    let mut rows = Vec::new();
    for &kind in &cfg.kinds {
        let mut baselines = Vec::with_capacity(cfg.sweep.epsilons.len());
        let mut baseline_ms = Vec::with_capacity(cfg.sweep.epsilons.len());
        for &eps in &cfg.sweep.epsilons {
            let start = Instant::now();
            baselines.push(optimal_maxlift_mechanism(&joint, eps, kind)?);
            baseline_ms.push(start.elapsed().as_secs_f64() * 1e3);
        }
        let start = Instant::now();
        let points = algorithm1_with_baselines(&joint, kind, &cfg.sweep, &baselines)?;
        // the ladder is shared by all budgets, so its cost is split evenly
        let heuristic_ms = start.elapsed().as_secs_f64() * 1e3 / points.len() as f64;

        for ((base, ms), point) in baselines.iter().zip(&baseline_ms).zip(&points) {
            for (name, p, t) in [
                (MECHANISM_MAX_LIFT, base, *ms),
                (MECHANISM_ALGORITHM1, point, heuristic_ms),
            ] {
                p.check_budget(kind)?;
                let t = if cfg.record_timing { t } else { 0.0 };
                rows.push(CsvRow::new(instance, kind, name, p, t));
            }
        }
    }
    Ok(rows)
}

/// Runs every instance (in parallel) and returns rows in instance order.
pub fn compute_sweep(cfg: &ExperimentConfig) -> Result<Vec<CsvRow>> {
    cfg.validate()?;
    let per_instance: Vec<Vec<CsvRow>> = (0..cfg.num_instances)
        .into_par_iter()
        .map(|i| {
            run_instance(cfg, i).map_err(|e| Error::Instance {
                instance: i,
                seed: cfg.seed,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    Ok(per_instance.into_iter().flatten().collect())
}

/// Arithmetic means per (measure, mechanism, epsilon), in first-seen order.
pub fn aggregate(rows: &[CsvRow]) -> Vec<AggregateRow> {
    let mut out: Vec<AggregateRow> = Vec::new();
    let mut sums: Vec<[f64; 8]> = Vec::new();
    for r in rows {
        let idx = match out.iter().position(|a| {
            a.measure == r.measure && a.mechanism_name == r.mechanism_name && a.epsilon == r.epsilon
        }) {
            Some(i) => i,
            None => {
                out.push(AggregateRow {
                    measure: r.measure,
                    mechanism_name: r.mechanism_name,
                    epsilon: r.epsilon,
                    instances: 0,
                    mean_utility_nats: 0.0,
                    mean_normalized_utility: 0.0,
                    mean_leakage_mi_nats: 0.0,
                    mean_max_lift: 0.0,
                    mean_log_max_lift: 0.0,
                    mean_max_measure: 0.0,
                    mean_candidate_count: 0.0,
                    mean_wall_time_ms: 0.0,
                });
                sums.push([0.0; 8]);
                out.len() - 1
            }
        };
        out[idx].instances += 1;
        let s = &mut sums[idx];
        for (acc, v) in s.iter_mut().zip([
            r.utility_nats,
            r.normalized_utility,
            r.leakage_mi_nats,
            r.max_lift,
            r.log_max_lift,
            r.max_measure,
            r.candidate_count as f64,
            r.wall_time_ms,
        ]) {
            *acc += v;
        }
    }
    for (a, s) in out.iter_mut().zip(&sums) {
        let n = a.instances as f64;
        a.mean_utility_nats = s[0] / n;
        a.mean_normalized_utility = s[1] / n;
        a.mean_leakage_mi_nats = s[2] / n;
        a.mean_max_lift = s[3] / n;
        a.mean_log_max_lift = s[4] / n;
        a.mean_max_measure = s[5] / n;
        a.mean_candidate_count = s[6] / n;
        a.mean_wall_time_ms = s[7] / n;
    }
    out
}

fn write_records<I>(path: &Path, header: &[&str], records: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| Error::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in records {
        w.write_record(&r)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

pub fn write_rows(path: &Path, rows: &[CsvRow]) -> Result<()> {
    write_records(path, &CSV_HEADER, rows.iter().map(CsvRow::record))
}

pub fn write_aggregate(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    write_records(
        path,
        &AGGREGATE_HEADER,
        rows.iter().map(AggregateRow::record),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<CsvRow>,
    pub aggregate: Vec<AggregateRow>,
    pub rows_path: PathBuf,
    pub aggregate_path: PathBuf,
}

/// Computes the sweep and writes the per-instance and aggregate CSV files.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    let rows = compute_sweep(cfg)?;
    let aggregate = aggregate(&rows);
    let aggregate_path = cfg.aggregate_path();
    write_rows(&cfg.output_path, &rows)?;
    write_aggregate(&aggregate_path, &aggregate)?;
    Ok(SweepOutcome {
        rows,
        aggregate,
        rows_path: cfg.output_path.clone(),
        aggregate_path,
    })
}

/// One budget of the closed-form comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct Example1Row {
    pub epsilon: f64,
    pub utility_algorithm1: f64,
    pub utility_theoretical: f64,
    pub max_chi2_algorithm1: f64,
    pub max_chi2_theoretical: f64,
    pub max_lift_algorithm1: f64,
    pub max_lift_theoretical: f64,
}

impl Example1Row {
    pub fn utility_diff(&self) -> f64 {
        (self.utility_algorithm1 - self.utility_theoretical).abs()
    }

    pub fn chi2_diff(&self) -> f64 {
        (self.max_chi2_algorithm1 - self.max_chi2_theoretical).abs()
    }

    pub fn max_lift_diff(&self) -> f64 {
        (self.max_lift_algorithm1 - self.max_lift_theoretical).abs()
    }

    pub fn flagged(&self) -> bool {
        !(self.utility_diff() <= EXAMPLE1_UTILITY_TOLERANCE)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Example1Report {
    pub rows: Vec<Example1Row>,
}

impl Example1Report {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| !r.flagged())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "epsilon",
            "utility_algorithm1",
            "utility_theoretical",
            "utility_abs_diff",
            "max_chi2_algorithm1",
            "max_chi2_theoretical",
            "max_chi2_abs_diff",
            "max_lift_algorithm1",
            "max_lift_theoretical",
            "max_lift_abs_diff",
            "flagged",
        ])?;
        for r in &self.rows {
            w.write_record([
                format_float(r.epsilon),
                format_float(r.utility_algorithm1),
                format_float(r.utility_theoretical),
                format_float(r.utility_diff()),
                format_float(r.max_chi2_algorithm1),
                format_float(r.max_chi2_theoretical),
                format_float(r.chi2_diff()),
                format_float(r.max_lift_algorithm1),
                format_float(r.max_lift_theoretical),
                format_float(r.max_lift_diff()),
                r.flagged().to_string(),
            ])?;
        }
        w.flush().map_err(|source| Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })?;
        Ok(())
    }
}

/// Budgets used when none are given: 0.005, 0.010, ..., 0.070.
pub fn example1_default_grid() -> Vec<f64> {
    epsilon_grid(0.005, 0.005, EXAMPLE1_MAX_EPSILON)
}

/// Runs the chi-square heuristic on the two-symbol fixture and compares it
/// with the closed-form mechanism at every budget.
pub fn validate_example1(eps_grid: &[f64]) -> Result<Example1Report> {
    let mut grid = eps_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if let Some(&bad) = grid
        .iter()
        .find(|&&e| !(e > 0.0 && e <= EXAMPLE1_MAX_EPSILON))
    {
        return Err(Error::OutOfRange {
            name: "epsilon",
            value: bad,
            range: "(0, 0.07]",
        });
    }
    if grid.is_empty() {
        return Err(Error::Config("empty epsilon grid".into()));
    }

    let joint = example1_joint();
    let cfg = SweepConfig::uniform(
        grid.clone(),
        EXAMPLE1_REFINEMENT,
        EXAMPLE1_REFINEMENT_LAST,
        EXAMPLE1_DELTA,
        EXAMPLE1_EPSILON_END,
    )?;
    let points = algorithm1(&joint, MeasureKind::ChiSq, &cfg)?;

    let rows = grid
        .iter()
        .zip(&points)
        .map(|(&eps, p)| {
            let theory = example1_theoretical(eps)?;
            let u = mechanism_utility(&joint, &theory)?;
            let leak = mechanism_leakage(&joint, &theory)?;
            Ok(Example1Row {
                epsilon: eps,
                utility_algorithm1: p.utility,
                utility_theoretical: u.mi_xy,
                max_chi2_algorithm1: p.leakage.max_chi2,
                max_chi2_theoretical: leak.max_chi2,
                max_lift_algorithm1: p.max_lift,
                max_lift_theoretical: leak.max_lift,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Example1Report { rows })
}

/// Row-major, space separated, one row per `s`.
pub fn format_joint(joint: &JointDistribution) -> String {
    let mut out = String::new();
    for row in joint.rows() {
        let line: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_joint(text: &str) -> Result<JointDistribution> {
    let rows = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::Config(format!("not a number: `{t}`")))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    JointDistribution::from_rows(&rows)
}
