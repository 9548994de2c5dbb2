//! Experiment harness: repeated day simulations over instance batches,
//! CSV-backed results, min/avg summary tables and the wall-time scaling fit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};

use crate::io::{apply_cutoff, load_instance, CutoffConfig, RawInstanceFile};
use crate::sim::{run_day, Algorithm, StrategyConfig};

/// A batch of runs: every instance crossed with every configuration, repeated.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub instances: Vec<PathBuf>,
    pub configs: Vec<StrategyConfig>,
    /// Independent repetitions per (instance, config); seeds are base + rep.
    pub repetitions: usize,
    pub base_seed: u64,
    pub output: Option<PathBuf>,
    /// Advisory wall-clock budget per slice, in seconds. Runs that exceed
    /// `deadline x slices` are flagged on stderr but still recorded; result
    /// quality is controlled by evaluation counts, not clocks.
    pub slice_deadline: Option<f64>,
}

impl ExperimentSpec {
    pub fn new(instances: Vec<PathBuf>, configs: Vec<StrategyConfig>) -> Self {
        ExperimentSpec {
            instances,
            configs,
            repetitions: 30,
            base_seed: 0,
            output: None,
            slice_deadline: None,
        }
    }
}

/// One finished run. Failed runs keep their row with `feasible = false` and an
/// infinite cost so a batch never loses track of what was attempted.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub instance: String,
    pub algorithm: Algorithm,
    pub slices: usize,
    pub workers: usize,
    /// Swarm size, or 0 for strategies without a swarm phase.
    pub swarm: usize,
    /// Swarm iterations per slice, or 0 without a swarm phase.
    pub iterations: usize,
    pub repetition: usize,
    pub seed: u64,
    pub cost: f64,
    pub wall_time_s: f64,
    pub feasible: bool,
}

pub const CSV_HEADER: &str =
    "instance,algorithm,slices,workers,swarm,iterations,repetition,seed,cost,wall_time_s,feasible";

/// Swarm columns for a configuration; zeroed when the strategy never runs a
/// swarm so the CSV does not suggest unused parameters mattered.
fn swarm_cells(cfg: &StrategyConfig) -> (usize, usize) {
    match cfg.algorithm {
        Algorithm::Tree | Algorithm::McTree => (0, 0),
        Algorithm::TwoMpso | Algorithm::McTreePso => (cfg.pso.swarm_size, cfg.pso.iterations),
    }
}

/// Runs the whole batch sequentially and returns one row per run, in
/// instance-major, configuration-minor, repetition order. Failures are
/// reported on stderr and recorded as infeasible rows.
pub fn run_batch(
    raws: &[RawInstanceFile],
    configs: &[StrategyConfig],
    repetitions: usize,
    base_seed: u64,
    slice_deadline: Option<f64>,
) -> Vec<ResultRow> {
    assert!(repetitions >= 1, "a batch needs at least one repetition");
    let mut rows = Vec::with_capacity(raws.len() * configs.len() * repetitions);
    for raw in raws {
        for template in configs {
            let instance = apply_cutoff(raw, CutoffConfig { t_co: template.t_co });
            let (swarm, iterations) = swarm_cells(template);
            for rep in 0..repetitions {
                let mut cfg = template.clone();
                cfg.seed = base_seed + rep as u64;
                let started = Instant::now();
                let outcome = run_day(&instance, &cfg);
                let wall_time_s = started.elapsed().as_secs_f64();
                if let Some(deadline) = slice_deadline {
                    let budget = deadline * cfg.time_slices as f64;
                    if wall_time_s > budget {
                        eprintln!(
                            "warning: {} {} rep {rep} took {wall_time_s:.2}s, over its \
                             {budget:.2}s slice budget",
                            raw.name, cfg.algorithm
                        );
                    }
                }
                let (cost, feasible) = match outcome {
                    Ok(day) => (day.cost(), true),
                    Err(e) => {
                        eprintln!("warning: {} {} rep {rep} failed: {e}", raw.name, cfg.algorithm);
                        (f64::INFINITY, false)
                    }
                };
                rows.push(ResultRow {
                    instance: raw.name.clone(),
                    algorithm: cfg.algorithm,
                    slices: cfg.time_slices,
                    workers: cfg.workers,
                    swarm,
                    iterations,
                    repetition: rep,
                    seed: cfg.seed,
                    cost,
                    wall_time_s,
                    feasible,
                });
            }
        }
    }
    rows
}

/// Loads the experiment's instance files, runs the batch, and writes the CSV when an
/// output path is set.
pub fn run_experiment(spec: &ExperimentSpec) -> anyhow::Result<Vec<ResultRow>> {
    let raws: Vec<RawInstanceFile> = spec
        .instances
        .iter()
        .map(|p| load_instance(p).with_context(|| format!("loading {}", p.display())))
        .collect::<anyhow::Result<_>>()?;
    let rows =
        run_batch(&raws, &spec.configs, spec.repetitions, spec.base_seed, spec.slice_deadline);
    if let Some(path) = &spec.output {
        std::fs::write(path, emit_csv(&rows))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(rows)
}

pub fn emit_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.instance,
            r.algorithm,
            r.slices,
            r.workers,
            r.swarm,
            r.iterations,
            r.repetition,
            r.seed,
            r.cost,
            r.wall_time_s,
            r.feasible
        );
    }
    out
}

pub fn parse_csv(text: &str) -> anyhow::Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        Some(h) => bail!("unexpected CSV header: '{h}'"),
        None => bail!("empty CSV"),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            bail!("line {}: expected 11 fields, found {}", i + 2, fields.len());
        }
        let ctx = |what: &str| format!("line {}: bad {what}", i + 2);
        rows.push(ResultRow {
            instance: fields[0].to_string(),
            algorithm: fields[1].parse().map_err(anyhow::Error::msg).with_context(|| ctx("algorithm"))?,
            slices: fields[2].parse().with_context(|| ctx("slices"))?,
            workers: fields[3].parse().with_context(|| ctx("workers"))?,
            swarm: fields[4].parse().with_context(|| ctx("swarm"))?,
            iterations: fields[5].parse().with_context(|| ctx("iterations"))?,
            repetition: fields[6].parse().with_context(|| ctx("repetition"))?,
            seed: fields[7].parse().with_context(|| ctx("seed"))?,
            cost: fields[8].parse().with_context(|| ctx("cost"))?,
            wall_time_s: fields[9].parse().with_context(|| ctx("wall time"))?,
            feasible: fields[10].parse().with_context(|| ctx("feasible"))?,
        });
    }
    Ok(rows)
}

/// Key identifying one configuration column in a summary.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConfigKey {
    pub algorithm_label: String,
    pub slices: usize,
    pub workers: usize,
    pub swarm: usize,
    pub iterations: usize,
}

impl ConfigKey {
    fn of(row: &ResultRow) -> Self {
        ConfigKey {
            algorithm_label: row.algorithm.to_string(),
            slices: row.slices,
            workers: row.workers,
            swarm: row.swarm,
            iterations: row.iterations,
        }
    }

    /// Compact column heading, e.g. `tree 200TSx8P` or `2mpso 40TSx8P 4x28`.
    pub fn label(&self) -> String {
        let mut s = format!("{} {}TSx{}P", self.algorithm_label, self.slices, self.workers);
        if self.swarm > 0 {
            let _ = write!(s, " {}x{}", self.swarm, self.iterations);
        }
        s
    }
}

/// Min/avg statistics for one (instance, configuration) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub instance: String,
    pub config: ConfigKey,
    pub runs: usize,
    pub failures: usize,
    /// Best and mean cost over the feasible runs; `None` when none succeeded.
    pub min: Option<f64>,
    pub avg: Option<f64>,
    pub mean_wall_time_s: f64,
}

/// Groups rows into per-(instance, configuration) statistics, preserving first
/// appearance order of instances and configurations.
pub fn aggregate(rows: &[ResultRow]) -> Vec<Aggregate> {
    let mut order: Vec<(String, ConfigKey)> = Vec::new();
    let mut buckets: BTreeMap<(String, ConfigKey), Vec<&ResultRow>> = BTreeMap::new();
    for row in rows {
        let key = (row.instance.clone(), ConfigKey::of(row));
        if !buckets.contains_key(&key) {
            order.push(key.clone());
        }
        buckets.entry(key).or_default().push(row);
    }
    order
        .into_iter()
        .map(|key| {
            let bucket = &buckets[&key];
            let feasible: Vec<f64> =
                bucket.iter().filter(|r| r.feasible).map(|r| r.cost).collect();
            let min = feasible.iter().copied().fold(f64::INFINITY, f64::min);
            let avg = feasible.iter().sum::<f64>() / feasible.len().max(1) as f64;
            let wall: f64 = bucket.iter().map(|r| r.wall_time_s).sum();
            Aggregate {
                instance: key.0,
                config: key.1,
                runs: bucket.len(),
                failures: bucket.len() - feasible.len(),
                min: (!feasible.is_empty()).then_some(min),
                avg: (!feasible.is_empty()).then_some(avg),
                mean_wall_time_s: wall / bucket.len() as f64,
            }
        })
        .collect()
}

/// Least-squares fit of mean wall time against m^2 ln m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub sizes: usize,
}

/// First run of digits in an instance name; the benchmark convention encodes
/// the client count there (c50, tai75a, f134...).
pub fn instance_size(name: &str) -> Option<usize> {
    let start = name.find(|c: char| c.is_ascii_digit())?;
    let digits: String =
        name[start..].chars().take_while(|c| c.is_ascii_digit()).collect();
    digits.parse().ok()
}

/// Fits mean wall time per instance size to `slope x m^2 ln(m) + intercept`.
/// Only feasible rows count toward the means. Needs two distinct sizes; a
/// perfectly constant response is reported as slope 0 with R^2 = 1.
pub fn fit_scaling(rows: &[ResultRow]) -> anyhow::Result<ScalingFit> {
    let mut by_size: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for row in rows.iter().filter(|r| r.feasible) {
        let m = instance_size(&row.instance)
            .with_context(|| format!("no size digits in instance name '{}'", row.instance))?;
        let e = by_size.entry(m).or_insert((0.0, 0));
        e.0 += row.wall_time_s;
        e.1 += 1;
    }
    if by_size.len() < 2 {
        bail!("scaling fit needs at least two distinct instance sizes, found {}", by_size.len());
    }
    let points: Vec<(f64, f64)> = by_size
        .iter()
        .map(|(&m, &(sum, n))| {
            let m = m as f64;
            (m * m * m.ln(), sum / n as f64)
        })
        .collect();
    let n = points.len() as f64;
    let x_mean = points.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - x_mean).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - x_mean) * (p.1 - y_mean)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_res: f64 =
        points.iter().map(|p| (p.1 - (slope * p.0 + intercept)).powi(2)).sum();
    let ss_tot: f64 = points.iter().map(|p| (p.1 - y_mean).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(ScalingFit { slope, intercept, r_squared, sizes: points.len() })
}

/// Published reference results (min, avg) for the classic benchmark set, keyed
/// by instance and strategy; shown beside measured numbers when names match.
#[rustfmt::skip]
const REFERENCE: [(&str, [(f64, f64); 4]); 22] = [
    // (instance, [tree, mctree, mctree-pso, 2mpso])
    ("c50",     [(673.34, 721.51),   (654.69, 700.49),   (621.27, 677.03),     (566.98, 610.47)]),
    ("c75",     [(1049.07, 1117.71), (1038.80, 1123.43), (998.72, 1066.00),    (927.22, 988.06)]),
    ("c100",    [(1095.82, 1193.98), (1004.15, 1119.42), (979.95, 1066.44),    (930.33, 1038.53)]),
    ("c100b",   [(828.94, 843.07),   (828.94, 836.75),   (823.23, 831.72),     (828.63, 858.75)]),
    ("c120",    [(1072.86, 1106.33), (1078.23, 1109.12), (1068.46, 1100.28),   (1071.20, 1112.88)]),
    ("c150",    [(1318.78, 1463.85), (1269.23, 1399.93), (1223.15, 1323.35),   (1205.80, 1306.79)]),
    ("c199",    [(1644.67, 1824.89), (1571.05, 1702.24), (1533.68, 1601.22),   (1471.16, 1597.98)]),
    ("f71",     [(290.37, 348.80),   (303.49, 333.99),   (288.72, 323.85),     (278.56, 310.31)]),
    ("f134",    [(12730.29, 13501.66), (12719.73, 13474.06), (12134.30, 12473.32), (12377.63, 12746.26)]),
    ("tai75a",  [(1864.10, 2016.29), (1929.44, 2016.40), (1899.17, 1980.37),   (1832.11, 1957.01)]),
    ("tai75b",  [(1578.05, 1631.85), (1523.07, 1655.02), (1515.71, 1582.37),   (1499.58, 1611.63)]),
    ("tai75c",  [(1614.94, 1800.66), (1570.30, 1704.14), (1526.75, 1657.88),   (1555.36, 1642.58)]),
    ("tai75d",  [(1431.89, 1612.26), (1430.75, 1467.25), (1426.39, 1456.08),   (1444.70, 1520.84)]),
    ("tai100a", [(2359.58, 2651.78), (2441.47, 2640.06), (2344.78, 2532.85),   (2311.19, 2467.77)]),
    ("tai100b", [(2324.19, 2475.94), (2297.78, 2446.81), (2221.67, 2344.13),   (2204.54, 2323.27)]),
    ("tai100c", [(1621.59, 1752.83), (1619.81, 1742.85), (1580.00, 1676.72),   (1566.75, 1675.89)]),
    ("tai100d", [(2019.34, 2195.64), (1909.52, 2050.51), (1888.07, 2000.07),   (1789.90, 1960.36)]),
    ("tai150a", [(3599.62, 3839.13), (3555.79, 3711.96), (3607.78, 3763.44),   (3664.12, 3904.32)]),
    ("tai150b", [(3052.73, 3377.34), (3145.64, 3268.63), (3070.44, 3226.49),   (3104.98, 3238.59)]),
    ("tai150c", [(2718.31, 2867.25), (2707.18, 2844.86), (2614.59, 2725.45),   (2734.77, 2874.79)]),
    ("tai150d", [(3194.07, 3419.10), (3100.97, 3352.11), (3081.26, 3200.29),   (3134.93, 3247.68)]),
    ("tai385",  [(29088.27, 31144.04), (31331.32, 33037.53), (31876.05, 33786.47), (30122.29, 32433.18)]),
];

/// Reference (min, avg) for an instance and strategy, if published.
pub fn reference(instance: &str, algorithm: Algorithm) -> Option<(f64, f64)> {
    let idx = match algorithm {
        Algorithm::Tree => 0,
        Algorithm::McTree => 1,
        Algorithm::McTreePso => 2,
        Algorithm::TwoMpso => 3,
    };
    REFERENCE.iter().find(|(n, _)| *n == instance).map(|(_, cols)| cols[idx])
}

const FAIL_MARK: &str = "failed";

fn fmt_cell(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.2}"),
        None => FAIL_MARK.to_string(),
    }
}

/// Renders aggregates as a fixed-width text table: one line per instance, one
/// min/avg column pair per configuration (plus reference pairs where
/// published) and a closing "sum" line per column. Cells with no feasible run
/// show a failure marker and are left out of the sums, which are then starred.
pub fn report(rows: &[ResultRow]) -> String {
    let aggs = aggregate(rows);
    let mut instances: Vec<String> = Vec::new();
    let mut configs: Vec<ConfigKey> = Vec::new();
    for a in &aggs {
        if !instances.contains(&a.instance) {
            instances.push(a.instance.clone());
        }
        if !configs.contains(&a.config) {
            configs.push(a.config.clone());
        }
    }
    let cell = |inst: &str, cfg: &ConfigKey| {
        aggs.iter().find(|a| a.instance == inst && &a.config == cfg)
    };
    let with_refs: Vec<bool> = configs
        .iter()
        .map(|c| {
            let algo: Algorithm = c.algorithm_label.parse().expect("labels round-trip");
            instances.iter().any(|i| reference(i, algo).is_some())
        })
        .collect();

    let name_w = instances.iter().map(|i| i.len()).max().unwrap_or(8).max(8);
    let col_w = 10usize;
    let mut out = String::new();

    let _ = write!(out, "{:<name_w$}", "instance");
    for (c, &refs) in configs.iter().zip(&with_refs) {
        let width = if refs { 4 * col_w } else { 2 * col_w };
        let _ = write!(out, "  {:^width$}", c.label());
    }
    out.push('\n');
    let _ = write!(out, "{:<name_w$}", "");
    for &refs in &with_refs {
        let _ = write!(out, "  {:>col_w$}{:>col_w$}", "min", "avg");
        if refs {
            let _ = write!(out, "{:>col_w$}{:>col_w$}", "ref min", "ref avg");
        }
    }
    out.push('\n');

    let mut sums: Vec<(f64, f64, bool)> = vec![(0.0, 0.0, false); configs.len()];
    let mut ref_sums: Vec<(f64, f64, bool)> = vec![(0.0, 0.0, true); configs.len()];
    for inst in &instances {
        let _ = write!(out, "{inst:<name_w$}");
        for (ci, (cfg, &refs)) in configs.iter().zip(&with_refs).enumerate() {
            let agg = cell(inst, cfg);
            let (min, avg) = agg.map_or((None, None), |a| (a.min, a.avg));
            let _ = write!(out, "  {:>col_w$}{:>col_w$}", fmt_cell(min), fmt_cell(avg));
            match (min, avg) {
                (Some(mn), Some(av)) => {
                    sums[ci].0 += mn;
                    sums[ci].1 += av;
                }
                _ => sums[ci].2 = true,
            }
            if refs {
                let algo: Algorithm = cfg.algorithm_label.parse().expect("labels round-trip");
                match reference(inst, algo) {
                    Some((rm, ra)) => {
                        let _ = write!(out, "{rm:>col_w$.2}{ra:>col_w$.2}");
                        ref_sums[ci] = (ref_sums[ci].0 + rm, ref_sums[ci].1 + ra, ref_sums[ci].2);
                    }
                    None => {
                        let _ = write!(out, "{:>col_w$}{:>col_w$}", "-", "-");
                        ref_sums[ci].2 = false;
                    }
                }
            }
        }
        out.push('\n');
    }

    let _ = write!(out, "{:<name_w$}", "sum");
    for (ci, &refs) in with_refs.iter().enumerate() {
        let star = if sums[ci].2 { "*" } else { "" };
        let _ = write!(
            out,
            "  {:>col_w$}{:>col_w$}",
            format!("{:.2}{star}", sums[ci].0),
            format!("{:.2}{star}", sums[ci].1)
        );
        if refs {
            if ref_sums[ci].2 {
                let _ = write!(out, "{:>col_w$.2}{:>col_w$.2}", ref_sums[ci].0, ref_sums[ci].1);
            } else {
                let _ = write!(out, "{:>col_w$}{:>col_w$}", "-", "-");
            }
        }
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suite;

    fn sample_row(cost: f64, rep: usize) -> ResultRow {
        ResultRow {
            instance: "c50".into(),
            algorithm: Algorithm::Tree,
            slices: 200,
            workers: 8,
            swarm: 0,
            iterations: 0,
            repetition: rep,
            seed: rep as u64,
            cost,
            wall_time_s: 0.25,
            feasible: true,
        }
    }

    #[test]
    fn csv_round_trips() {
        let mut rows = vec![sample_row(612.25, 0), sample_row(640.5, 1)];
        rows.push(ResultRow {
            instance: "tai75a".into(),
            algorithm: Algorithm::TwoMpso,
            slices: 40,
            workers: 8,
            swarm: 4,
            iterations: 28,
            repetition: 2,
            seed: 9,
            cost: f64::INFINITY,
            wall_time_s: 1.5,
            feasible: false,
        });
        // Costs with many digits survive because floats print round-trip.
        rows[0].cost = 612.249_999_999_73;
        let text = emit_csv(&rows);
        assert!(text.starts_with(CSV_HEADER));
        let parsed = parse_csv(&text).unwrap();
        assert_eq!(parsed, rows);
    }

    #[test]
    fn parse_rejects_header_drift() {
        assert!(parse_csv("wrong,header\n").is_err());
        assert!(parse_csv("").is_err());
        let mangled = format!("{CSV_HEADER}\nc50,tree,200,8,0,0,0,0,1.0\n");
        assert!(parse_csv(&mangled).is_err());
    }

    #[test]
    fn a_tiny_batch_produces_one_row_per_run() {
        let raw = suite::raw("c50").unwrap().clone();
        let mut cfg = StrategyConfig::for_algorithm(Algorithm::Tree);
        // Few slices for speed, but enough that every arrival is still seen.
        cfg.time_slices = 8;
        let rows = run_batch(&[raw], &[cfg], 3, 7, None);
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.feasible));
        assert_eq!(rows.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![7, 8, 9]);
        let min = rows.iter().map(|r| r.cost).fold(f64::INFINITY, f64::min);
        let agg = aggregate(&rows);
        assert_eq!(agg.len(), 1);
        assert_eq!(agg[0].min, Some(min));
        assert_eq!(agg[0].runs, 3);
        assert_eq!(agg[0].failures, 0);
    }

    #[test]
    fn duplicate_seeds_duplicate_costs() {
        let raw = suite::raw("c50").unwrap().clone();
        let mut cfg = StrategyConfig::for_algorithm(Algorithm::Tree);
        cfg.time_slices = 2;
        let a = run_batch(&[raw.clone()], &[cfg.clone()], 1, 5, None);
        let b = run_batch(&[raw], &[cfg], 1, 5, None);
        assert_eq!(a[0].cost, b[0].cost);
        assert_eq!(a[0].seed, b[0].seed);
    }

    #[test]
    fn min_never_exceeds_avg() {
        let rows = vec![sample_row(700.0, 0), sample_row(650.0, 1), sample_row(800.0, 2)];
        let agg = aggregate(&rows);
        assert!(agg[0].min.unwrap() <= agg[0].avg.unwrap());
        assert_eq!(agg[0].min, Some(650.0));
        assert!((agg[0].avg.unwrap() - 716.666_666_666_666_6).abs() < 1e-9);
    }

    #[test]
    fn exact_cubic_like_growth_fits_perfectly() {
        let mut rows = Vec::new();
        for (i, m) in [50usize, 75, 100, 150].into_iter().enumerate() {
            let mf = m as f64;
            let mut r = sample_row(100.0, i);
            r.instance = format!("c{m}");
            r.wall_time_s = 3.0 * mf * mf * mf.ln();
            rows.push(r);
        }
        let fit = fit_scaling(&rows).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-9);
        assert!(fit.intercept.abs() < 1e-6);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.sizes, 4);
    }

    #[test]
    fn constant_times_fit_with_zero_slope() {
        let mut rows = Vec::new();
        for (i, m) in [50usize, 100, 199].into_iter().enumerate() {
            let mut r = sample_row(100.0, i);
            r.instance = format!("c{m}");
            r.wall_time_s = 2.5;
            rows.push(r);
        }
        let fit = fit_scaling(&rows).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn one_size_is_not_enough_to_fit() {
        let rows = vec![sample_row(1.0, 0), sample_row(2.0, 1)];
        assert!(fit_scaling(&rows).is_err());
    }

    #[test]
    fn sizes_come_from_the_name_digits() {
        assert_eq!(instance_size("c50"), Some(50));
        assert_eq!(instance_size("tai75a"), Some(75));
        assert_eq!(instance_size("f134"), Some(134));
        assert_eq!(instance_size("tai385"), Some(385));
        assert_eq!(instance_size("depot"), None);
    }

    #[test]
    fn report_sums_match_recomputed_column_arithmetic() {
        let mut rows = Vec::new();
        for (i, (inst, cost)) in
            [("c50", 700.0), ("c50", 720.0), ("c75", 1100.0), ("c75", 1140.0)].iter().enumerate()
        {
            let mut r = sample_row(*cost, i % 2);
            r.instance = inst.to_string();
            rows.push(r);
        }
        let text = report(&rows);
        // Column sums: min 700 + 1100, avg 710 + 1120.
        assert!(text.contains("1800.00"), "{text}");
        assert!(text.contains("1830.00"), "{text}");
        // Reference columns appear for the classic names.
        assert!(text.contains("721.51"), "{text}");
        let sum_line = text.lines().last().unwrap();
        assert!(sum_line.starts_with("sum"));
    }

    #[test]
    fn failed_cells_are_marked_and_skipped_in_sums() {
        let mut rows = vec![sample_row(700.0, 0)];
        let mut bad = sample_row(f64::INFINITY, 0);
        bad.instance = "c75".into();
        bad.feasible = false;
        rows.push(bad);
        let text = report(&rows);
        assert!(text.contains(FAIL_MARK), "{text}");
        assert!(text.contains("700.00*"), "{text}");
        let agg = aggregate(&rows);
        let c75 = agg.iter().find(|a| a.instance == "c75").unwrap();
        assert_eq!(c75.min, None);
        assert_eq!(c75.failures, 1);
    }

    #[test]
    fn reference_lookup_distinguishes_strategies() {
        assert_eq!(reference("c50", Algorithm::McTree), Some((654.69, 700.49)));
        assert_eq!(reference("c100b", Algorithm::McTree), Some((828.94, 836.75)));
        assert_eq!(reference("tai385", Algorithm::Tree), Some((29088.27, 31144.04)));
        assert_eq!(reference("nope", Algorithm::Tree), None);
    }
}
