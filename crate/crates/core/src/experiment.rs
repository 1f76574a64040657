//! Monte Carlo experiment driver.
//!
//! A spec lists sweep points (power levels and cluster size), algorithms and
//! a trial count. Each trial draws a fresh layout and channel from its own
//! random stream; every (trial, point, algorithm) cell is solved
//! independently and the results are aggregated per (algorithm, point).
//!
//! Output files in `output_dir`:
//!
//! * `results.csv`: one row per (algorithm, point), columns
//!   [`RESULTS_HEADER`]. Rows are sorted by algorithm, then point, and the
//!   file holds no timing data, so it is a pure function of spec and seed.
//! * `summary.json`: spec echo, seed, the table with wall times and one
//!   entry per run (see `schemas/summary.schema.json`).
//! * `trace_<id>.csv`: per-run objective history, `id` being
//!   `<algorithm>_p<point>_t<trial>`.
//! * `percentages.csv` (partial-CSI comparison only): columns
//!   [`PERCENT_HEADER`].

use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{
    dlb_slbm, heuristic_clustering, initial_point, saa_slbm, slbm, static_clustering, stochastic_slbm,
    ClusteringConfig, PartialSetup, SlbmConfig, StochConfig,
};
use crate::clustering::Clustering;
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::rates::Problem;
use crate::subsolver::SubsolverConfig;
use crate::surrogates::Family;
use crate::topology::{realize, ChannelSet};
use crate::trace::RunTrace;

/// Purposes of the per-trial random streams. Each (trial, purpose) pair has
/// its own stream, so adding an algorithm never shifts another draw.
pub mod stream {
    pub const CHANNELS: u64 = 0;
    pub const START: u64 = 1;
    pub const OPTIMIZE: u64 = 2;
    pub const EVALUATE: u64 = 3;
    pub const SAA: u64 = 4;
}

/// Generator for one (trial, purpose) pair under a master seed.
pub fn trial_rng(master_seed: u64, trial: u64, purpose: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(trial << 8 | (purpose & 0xff));
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    SinrcSlbm,
    WmmseSlbm,
    /// Link-removal clustering with SINRC-SLBM inside; ignores the point's C.
    Heuristic,
    StochasticSinrc,
    StochasticWmmse,
    Dlb,
    Saa,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Self::SinrcSlbm => "sinrc-slbm",
            Self::WmmseSlbm => "wmmse-slbm",
            Self::Heuristic => "heuristic",
            Self::StochasticSinrc => "stochastic-sinrc",
            Self::StochasticWmmse => "stochastic-wmmse",
            Self::Dlb => "dlb",
            Self::Saa => "saa",
        }
    }

    pub fn is_partial_csi(self) -> bool {
        matches!(self, Self::StochasticSinrc | Self::StochasticWmmse | Self::Dlb | Self::Saa)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Cluster size of a sweep point: a static size `C` (`"cluster": 2`) or the
/// link-removal heuristic (`"cluster": "heuristic"`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClusterChoice {
    #[serde(rename = "heuristic")]
    Heuristic,
    #[serde(untagged)]
    Static(usize),
}

impl fmt::Display for ClusterChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Heuristic => f.write_str("heuristic"),
            Self::Static(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub mbs_power_dbm: f64,
    pub sbs_power_dbm: f64,
    pub cluster: ClusterChoice,
}

fn default_saa_samples() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    /// Layout and channel parameters; `network.seed` is the master seed and
    /// the power fields are overridden per sweep point.
    pub network: NetworkConfig,
    pub sweep: Vec<SweepPoint>,
    pub algorithms: Vec<Algorithm>,
    pub trials: usize,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub slbm: SlbmConfig,
    #[serde(default)]
    pub subsolver: SubsolverConfig,
    #[serde(default)]
    pub stochastic: StochConfig,
    #[serde(default)]
    pub clustering: ClusteringConfig,
    #[serde(default = "default_saa_samples")]
    pub saa_samples: usize,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
    /// Write one `trace_<id>.csv` per run.
    #[serde(default = "yes")]
    pub write_traces: bool,
}

fn yes() -> bool {
    true
}

impl ExperimentSpec {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let spec: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn seed(&self) -> u64 {
        self.network.seed
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.sweep.is_empty() {
            return Err(Error::Config("sweep must contain at least one point".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("at least one algorithm is required".into()));
        }
        self.slbm.validate()?;
        self.subsolver.validate()?;
        self.stochastic.validate()?;
        if self.saa_samples == 0 {
            return Err(Error::Config("saa_samples must be at least 1".into()));
        }
        let links = self.network.n_users_scheduled * self.network.n_sbs;
        if self.clustering.j_delta == 0 || self.clustering.j_delta > links {
            return Err(Error::Config(format!("j_delta must lie in 1..={links}")));
        }
        for p in &self.sweep {
            if !(p.mbs_power_dbm.is_finite() && p.sbs_power_dbm.is_finite()) {
                return Err(Error::Config("sweep powers must be finite".into()));
            }
            match p.cluster {
                ClusterChoice::Static(c) if c == 0 || c > self.network.n_sbs => {
                    return Err(Error::Config(format!("cluster size {c} outside 1..={}", self.network.n_sbs)));
                }
                ClusterChoice::Heuristic if self.algorithms.iter().any(|a| a.is_partial_csi()) => {
                    return Err(Error::Config(
                        "partial-CSI algorithms need a static cluster size at every sweep point".into(),
                    ));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Outcome of one (trial, point, algorithm) cell.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub algorithm: Algorithm,
    pub point: usize,
    pub trial: usize,
    pub result: std::result::Result<RunTrace, String>,
    pub wall_ms: f64,
}

impl RunOutcome {
    pub fn id(&self) -> String {
        format!("{}_p{}_t{}", self.algorithm, self.point, self.trial)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub algorithm: Algorithm,
    pub point: usize,
    pub mbs_power_dbm: f64,
    pub sbs_power_dbm: f64,
    pub cluster: String,
    pub runs: usize,
    pub failed: usize,
    /// Mean weighted sum rate over successful runs, bits/s/Hz.
    pub mean_rate: f64,
    pub std_error: f64,
    pub mean_rate_mbps: f64,
    pub mean_iterations: f64,
    pub mean_wall_ms: f64,
}

pub const RESULTS_HEADER: [&str; 11] = [
    "algorithm",
    "mbs_power_dbm",
    "sbs_power_dbm",
    "cluster",
    "runs",
    "failed",
    "mean_rate",
    "std_error",
    "mean_rate_mbps",
    "mean_iterations",
    "point",
];

#[derive(Debug, Clone)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    /// Every run, sorted by (algorithm, point, trial).
    pub runs: Vec<RunOutcome>,
}

impl ResultTable {
    pub fn row(&self, algorithm: Algorithm, point: usize) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm && r.point == point)
    }

    /// Final objectives of one (algorithm, point) by trial; None for failed runs.
    pub fn objectives(&self, algorithm: Algorithm, point: usize) -> Vec<Option<f64>> {
        self.runs
            .iter()
            .filter(|r| r.algorithm == algorithm && r.point == point)
            .map(|r| r.result.as_ref().ok().map(|t| t.final_objective()))
            .collect()
    }

    pub fn failure_fraction(&self) -> f64 {
        let failed = self.runs.iter().filter(|r| r.result.is_err()).count();
        failed as f64 / self.runs.len().max(1) as f64
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(RESULTS_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.algorithm.to_string(),
                format!("{}", r.mbs_power_dbm),
                format!("{}", r.sbs_power_dbm),
                r.cluster.clone(),
                r.runs.to_string(),
                r.failed.to_string(),
                format!("{:.9e}", r.mean_rate),
                format!("{:.9e}", r.std_error),
                format!("{:.9e}", r.mean_rate_mbps),
                format!("{:.4}", r.mean_iterations),
                r.point.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One trial's channel realization and its derived problem data.
struct Instance {
    channels: ChannelSet,
}

impl Instance {
    fn draw(spec: &ExperimentSpec, trial: usize) -> Result<Self> {
        let mut rng = trial_rng(spec.seed(), trial as u64, stream::CHANNELS);
        let (_, channels) = realize(&spec.network, &mut rng)?;
        Ok(Self { channels })
    }
}

fn network_at(spec: &ExperimentSpec, p: &SweepPoint) -> NetworkConfig {
    NetworkConfig { mbs_power_dbm: p.mbs_power_dbm, sbs_power_dbm: p.sbs_power_dbm, ..spec.network.clone() }
}

/// Solves one cell. Full-CSI runs report the true weighted sum rate;
/// partial-CSI runs report the sample-mean rate over fresh access draws.
fn solve_cell(spec: &ExperimentSpec, inst: &Instance, point: usize, alg: Algorithm, trial: usize) -> Result<RunTrace> {
    let p = &spec.sweep[point];
    let net = network_at(spec, p);
    let budget = net.power_budget();
    let weights = net.weights.clone();
    let seed = spec.seed();
    let t = trial as u64;
    let mut opt_rng = trial_rng(seed, t, stream::OPTIMIZE);
    let ch = inst.channels.clone();
    let d = ch.dims;
    let family = match alg {
        Algorithm::WmmseSlbm | Algorithm::StochasticWmmse => Family::Wmmse,
        _ => Family::Sinrc,
    };
    let slbm_cfg = SlbmConfig { family, ..spec.slbm };

    let heuristic = alg == Algorithm::Heuristic || p.cluster == ClusterChoice::Heuristic;
    if heuristic {
        let problem = Problem::full_csi(ch, Clustering::full(d.users, d.sbs), weights, budget)?;
        let out = heuristic_clustering(&problem, &spec.clustering, &slbm_cfg, &spec.subsolver, &mut opt_rng)?;
        let mut tr = match out.trace {
            Some(tr) => tr,
            None => {
                let pr = problem.with_clustering(out.clustering.clone())?;
                let x = crate::beamformer::BeamformerSet::zeros(d);
                RunTrace {
                    algorithm: String::new(),
                    records: vec![crate::trace::IterRecord { iteration: 0, objective: 0.0, surrogate: 0.0, elapsed_ms: 0.0 }],
                    report: pr.rate_report(&x),
                    x,
                    clustering: out.clustering,
                    stopped_by_tolerance: true,
                    inner_iterations: 0,
                }
            }
        };
        tr.algorithm = if alg == Algorithm::Heuristic { "heuristic".into() } else { format!("heuristic-{family:?}").to_lowercase() };
        return Ok(tr);
    }

    let c = match p.cluster {
        ClusterChoice::Static(c) => c,
        ClusterChoice::Heuristic => unreachable!("handled above"),
    };
    let cl = static_clustering(&ch.large_scale, c)?;
    if !alg.is_partial_csi() {
        let problem = Problem::full_csi(ch, cl, weights, budget)?;
        let x0 = initial_point(&problem, &mut trial_rng(seed, t, stream::START));
        return slbm(&problem, &slbm_cfg, &spec.subsolver, Some(&x0), &mut opt_rng);
    }

    let setup = PartialSetup::new(&ch, cl, weights, budget)?;
    let draws = setup.draws(spec.stochastic.eval_sample_count, &mut trial_rng(seed, t, stream::EVALUATE));
    let eval = setup.sampled(draws)?;
    let x0 = initial_point(&setup.known, &mut trial_rng(seed, t, stream::START));
    match alg {
        Algorithm::StochasticSinrc | Algorithm::StochasticWmmse => {
            let cfg = StochConfig { family, ..spec.stochastic };
            stochastic_slbm(&setup, &eval, &cfg, &spec.subsolver, Some(&x0), &mut opt_rng)
        }
        Algorithm::Dlb => dlb_slbm(&setup, &eval, &slbm_cfg, &spec.subsolver, Some(&x0), &mut opt_rng),
        Algorithm::Saa => {
            let mut saa_rng = trial_rng(seed, t, stream::SAA);
            saa_slbm(&setup, &eval, spec.saa_samples, &slbm_cfg, &spec.subsolver, Some(&x0), &mut saa_rng)
        }
        _ => unreachable!("full-CSI algorithms handled above"),
    }
}

fn run_trial(spec: &ExperimentSpec, trial: usize) -> Vec<RunOutcome> {
    let inst = Instance::draw(spec, trial);
    let mut out = Vec::with_capacity(spec.sweep.len() * spec.algorithms.len());
    for point in 0..spec.sweep.len() {
        for &alg in &spec.algorithms {
            let start = Instant::now();
            let result = match &inst {
                Ok(inst) => solve_cell(spec, inst, point, alg, trial),
                Err(e) => Err(Error::Config(format!("channel draw failed: {e}"))),
            };
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            let result = result.map_err(|e| {
                log::error!("{alg} point {point} trial {trial} failed: {e}");
                e.to_string()
            });
            out.push(RunOutcome { algorithm: alg, point, trial, result, wall_ms });
        }
    }
    out
}

fn aggregate(spec: &ExperimentSpec, runs: &[RunOutcome]) -> Vec<ResultRow> {
    let mut algs = spec.algorithms.clone();
    algs.sort();
    algs.dedup();
    let mut rows = Vec::new();
    for alg in algs {
        for (point, p) in spec.sweep.iter().enumerate() {
            let cell: Vec<&RunOutcome> = runs.iter().filter(|r| r.algorithm == alg && r.point == point).collect();
            let ok: Vec<&RunTrace> = cell.iter().filter_map(|r| r.result.as_ref().ok()).collect();
            let n = ok.len();
            let rates: Vec<f64> = ok.iter().map(|t| t.final_objective()).collect();
            let mean = if n > 0 { rates.iter().sum::<f64>() / n as f64 } else { f64::NAN };
            let std_error = if n > 1 {
                (rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64 / n as f64).sqrt()
            } else {
                0.0
            };
            let mean_iterations = if n > 0 { ok.iter().map(|t| t.iterations() as f64).sum::<f64>() / n as f64 } else { f64::NAN };
            let mean_wall_ms = cell.iter().map(|r| r.wall_ms).sum::<f64>() / cell.len().max(1) as f64;
            let cluster = if alg == Algorithm::Heuristic { "heuristic".to_string() } else { p.cluster.to_string() };
            rows.push(ResultRow {
                algorithm: alg,
                point,
                mbs_power_dbm: p.mbs_power_dbm,
                sbs_power_dbm: p.sbs_power_dbm,
                cluster,
                runs: n,
                failed: cell.len() - n,
                mean_rate: mean,
                std_error,
                mean_rate_mbps: mean * spec.network.bandwidth_hz / 1e6,
                mean_iterations,
                mean_wall_ms,
            });
        }
    }
    rows
}

/// Runs every cell without touching the file system.
pub fn run_cells(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let mut runs: Vec<RunOutcome> =
        pool.install(|| (0..spec.trials).into_par_iter().flat_map_iter(|t| run_trial(spec, t)).collect());
    runs.sort_by(|a, b| (a.algorithm, a.point, a.trial).cmp(&(b.algorithm, b.point, b.trial)));
    let rows = aggregate(spec, &runs);
    Ok(ResultTable { rows, runs })
}

/// Runs the experiment and writes `results.csv`, `summary.json` and the
/// per-run traces into `spec.output_dir`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    let table = run_cells(spec)?;
    write_outputs(spec, &table)?;
    Ok(table)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

pub fn write_outputs(spec: &ExperimentSpec, table: &ResultTable) -> Result<()> {
    let dir = &spec.output_dir;
    std::fs::create_dir_all(dir)?;
    table.write_csv(create(dir, "results.csv")?)?;
    let mut runs = Vec::with_capacity(table.runs.len());
    for r in &table.runs {
        match &r.result {
            Ok(tr) => {
                if spec.write_traces {
                    tr.write_csv(create(dir, &format!("trace_{}.csv", r.id()))?)?;
                }
                let mut s = tr.summary(serde_json::to_value(&spec.sweep[r.point])?, spec.seed());
                s["id"] = r.id().into();
                s["trial"] = r.trial.into();
                s["point"] = r.point.into();
                s["wall_ms"] = r.wall_ms.into();
                runs.push(s);
            }
            Err(e) => runs.push(serde_json::json!({
                "id": r.id(),
                "algorithm": r.algorithm.name(),
                "trial": r.trial,
                "point": r.point,
                "error": e,
            })),
        }
    }
    let summary = serde_json::json!({
        "seed": spec.seed(),
        "spec": spec,
        "rows": table.rows,
        "failure_fraction": table.failure_fraction(),
        "runs": runs,
    });
    serde_json::to_writer_pretty(create(dir, "summary.json")?, &summary)?;
    Ok(())
}

/// Share of the full-CSI SINRC-SLBM rate reached by a partial-CSI algorithm
/// at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PercentRow {
    pub algorithm: Algorithm,
    pub point: usize,
    pub mbs_power_dbm: f64,
    pub sbs_power_dbm: f64,
    pub cluster: String,
    /// None when the baseline mean is not positive.
    pub percentage: Option<f64>,
}

pub const PERCENT_HEADER: [&str; 6] = ["algorithm", "mbs_power_dbm", "sbs_power_dbm", "cluster", "percentage", "point"];

/// Percentages from a finished table: `100 * mean(partial) / mean(baseline)`
/// over the trials where both runs succeeded.
pub fn percentages(spec: &ExperimentSpec, table: &ResultTable) -> Vec<PercentRow> {
    let mut algs: Vec<Algorithm> = spec.algorithms.iter().copied().filter(|a| a.is_partial_csi()).collect();
    algs.sort();
    algs.dedup();
    let mut out = Vec::new();
    for alg in algs {
        for (point, p) in spec.sweep.iter().enumerate() {
            let base = table.objectives(Algorithm::SinrcSlbm, point);
            let part = table.objectives(alg, point);
            let pairs: Vec<(f64, f64)> =
                base.iter().zip(&part).filter_map(|(b, q)| Some(((*b)?, (*q)?))).collect();
            let n = pairs.len() as f64;
            let b = pairs.iter().map(|p| p.0).sum::<f64>() / n;
            let q = pairs.iter().map(|p| p.1).sum::<f64>() / n;
            let percentage = if pairs.is_empty() || !(b > 0.0) {
                log::warn!("{alg} point {point}: baseline mean {b} is not positive, no percentage");
                None
            } else {
                Some(100.0 * q / b)
            };
            out.push(PercentRow {
                algorithm: alg,
                point,
                mbs_power_dbm: p.mbs_power_dbm,
                sbs_power_dbm: p.sbs_power_dbm,
                cluster: p.cluster.to_string(),
                percentage,
            });
        }
    }
    out
}

/// Runs a partial-CSI comparison. The spec must list `sinrc-slbm` (the
/// full-CSI baseline) and at least one partial-CSI algorithm. Writes the
/// usual outputs plus `percentages.csv`.
pub fn compare_partial_csi(spec: &ExperimentSpec) -> Result<(ResultTable, Vec<PercentRow>)> {
    if !spec.algorithms.contains(&Algorithm::SinrcSlbm) {
        return Err(Error::Config("partial-CSI comparison needs the sinrc-slbm baseline".into()));
    }
    if !spec.algorithms.iter().any(|a| a.is_partial_csi()) {
        return Err(Error::Config("partial-CSI comparison needs at least one partial-CSI algorithm".into()));
    }
    let table = run_experiment(spec)?;
    let rows = percentages(spec, &table);
    let mut w = csv::Writer::from_writer(create(&spec.output_dir, "percentages.csv")?);
    w.write_record(PERCENT_HEADER)?;
    for r in &rows {
        w.write_record([
            r.algorithm.to_string(),
            format!("{}", r.mbs_power_dbm),
            format!("{}", r.sbs_power_dbm),
            r.cluster.clone(),
            r.percentage.map_or_else(String::new, |p| format!("{p:.6}")),
            r.point.to_string(),
        ])?;
    }
    w.flush()?;
    Ok((table, rows))
}

/// Named ready-made specs.
pub mod presets {
    use super::*;

    pub const NAMES: [&str; 3] = ["desk", "desk-csi", "reference"];

    fn point(pm: f64, ps: f64, cluster: ClusterChoice) -> SweepPoint {
        SweepPoint { mbs_power_dbm: pm, sbs_power_dbm: ps, cluster }
    }

    fn base(network: NetworkConfig, sweep: Vec<SweepPoint>, algorithms: Vec<Algorithm>, trials: usize) -> ExperimentSpec {
        ExperimentSpec {
            network,
            sweep,
            algorithms,
            trials,
            output_dir: PathBuf::from("out"),
            slbm: SlbmConfig::default(),
            subsolver: SubsolverConfig::default(),
            stochastic: StochConfig::default(),
            clustering: ClusteringConfig::default(),
            saa_samples: default_saa_samples(),
            workers: 0,
            write_traces: true,
        }
    }

    /// Desk scale: both surrogate families and the clustering heuristic over
    /// three MBS power levels, 20 trials.
    pub fn desk() -> ExperimentSpec {
        let sweep = [30.0, 40.0, 50.0].iter().map(|&pm| point(pm, 30.0, ClusterChoice::Static(2))).collect();
        base(
            NetworkConfig::desk_scale(),
            sweep,
            vec![Algorithm::SinrcSlbm, Algorithm::WmmseSlbm, Algorithm::Heuristic],
            20,
        )
    }

    /// Desk-scale partial-CSI comparison over cluster sizes 2, 3 and 4.
    pub fn desk_csi() -> ExperimentSpec {
        let sweep = [2, 3, 4].iter().map(|&c| point(30.0, 30.0, ClusterChoice::Static(c))).collect();
        base(
            NetworkConfig::desk_scale(),
            sweep,
            vec![Algorithm::SinrcSlbm, Algorithm::StochasticSinrc, Algorithm::StochasticWmmse, Algorithm::Dlb, Algorithm::Saa],
            20,
        )
    }

    /// Full-size network (8 SBSs, 3 users, 32 MBS antennas). Slow: expect
    /// minutes per trial.
    pub fn reference() -> ExperimentSpec {
        let sweep = [30.0, 40.0, 50.0].iter().map(|&pm| point(pm, 30.0, ClusterChoice::Static(4))).collect();
        base(NetworkConfig::reference_scale(), sweep, vec![Algorithm::SinrcSlbm, Algorithm::WmmseSlbm], 100)
    }

    pub fn by_name(name: &str) -> Option<ExperimentSpec> {
        match name {
            "desk" => Some(desk()),
            "desk-csi" => Some(desk_csi()),
            "reference" => Some(reference()),
            _ => None,
        }
    }

    /// Whether the preset is a partial-CSI comparison.
    pub fn is_comparison(name: &str) -> bool {
        name == "desk-csi"
    }
}
