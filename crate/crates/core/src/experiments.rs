//! Batch sweeps over `(scheme, k, m)` grids with sampled marked sets.
//!
//! For each `k`, `gamma` mutually non-adjacent marked sets are drawn once and
//! reused by every `(scheme, m)` cell, so differences between cells never
//! come from sampling. Every walk is an independent job; results are
//! reassembled in plan order before aggregation, which makes the output
//! independent of the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::hypercube::{check_degree, sample_non_adjacent_set, MarkedSet};
use crate::par::map_ordered;
use crate::walk::{OracleMode, Walk, WalkConfig};
use crate::weights::WeightScheme;

/// Two mean peak probabilities closer than this count as a tie for
/// [`best_m_table`]; the smaller `m` wins.
pub const BEST_M_TIE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HorizonPolicy {
    /// `ceil(6·√((n+m)·N)) + 100` per walk.
    #[default]
    Default,
    Fixed(usize),
}

impl HorizonPolicy {
    pub fn steps(&self, config: &WalkConfig) -> usize {
        match *self {
            HorizonPolicy::Default => config.default_horizon(),
            HorizonPolicy::Fixed(t) => t,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchPlan {
    pub n: usize,
    #[serde(deserialize_with = "int_list")]
    pub k_range: Vec<usize>,
    #[serde(deserialize_with = "int_list")]
    pub m_range: Vec<usize>,
    pub gamma: usize,
    pub schemes: Vec<WeightScheme>,
    pub oracle: OracleMode,
    #[serde(default = "default_s")]
    pub s: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub horizon: HorizonPolicy,
}

fn default_s() -> usize {
    1
}

/// Accepts `[1, 2, 3]` or an inclusive range string `"1..=30"`.
fn int_list<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<usize>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        List(Vec<usize>),
        Range(String),
    }
    match Repr::deserialize(d)? {
        Repr::List(v) => Ok(v),
        Repr::Range(s) => parse_range(&s).map_err(serde::de::Error::custom),
    }
}

/// Parses `a..=b`, `a..b` (exclusive) or a comma list `a,b,c`.
pub fn parse_range(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse(format!("bad integer range `{s}`"));
    let num = |v: &str| v.trim().parse::<usize>().map_err(|_| bad());
    if let Some((a, b)) = s.split_once("..=") {
        Ok((num(a)?..=num(b)?).collect())
    } else if let Some((a, b)) = s.split_once("..") {
        Ok((num(a)?..num(b)?).collect())
    } else {
        s.split(',').filter(|p| !p.trim().is_empty()).map(num).collect()
    }
}

impl BatchPlan {
    pub fn validate(&self) -> Result<()> {
        check_degree(self.n)?;
        if self.gamma == 0 {
            return Err(Error::config("gamma must be at least 1"));
        }
        if self.k_range.is_empty() || self.m_range.is_empty() || self.schemes.is_empty() {
            return Err(Error::config("k_range, m_range and schemes must be non-empty"));
        }
        if self.k_range.contains(&0) {
            return Err(Error::config("k_range entries must be ≥ 1"));
        }
        for list in [&self.k_range, &self.m_range] {
            let mut sorted = list.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != list.len() {
                return Err(Error::config("k_range and m_range must not repeat values"));
            }
        }
        if let HorizonPolicy::Fixed(0) = self.horizon {
            return Err(Error::config("fixed horizon must be at least one step"));
        }
        for s in &self.schemes {
            s.validate()?;
        }
        Ok(())
    }

    fn config(&self, scheme: WeightScheme, m: usize) -> WalkConfig {
        WalkConfig {
            n: self.n,
            m,
            s: self.s.min(m),
            scheme,
            oracle: self.oracle,
        }
    }
}

/// Seed for sample `index` of the `k`-group, derived only from the plan's
/// master seed so that any subset of the grid can be rerun on its own.
pub fn sample_seed(master_seed: u64, k: usize, index: usize) -> [u8; 32] {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&(k as u64).to_le_bytes());
    seed[16..24].copy_from_slice(&(index as u64).to_le_bytes());
    seed[24..].copy_from_slice(b"mslqw-ms");
    seed
}

/// Sample `index` of the `k`-group on `Q_n` under `master_seed`.
pub fn draw_sample(n: usize, k: usize, master_seed: u64, index: usize) -> Result<MarkedSet> {
    let mut rng = ChaCha8Rng::from_seed(sample_seed(master_seed, k, index));
    sample_non_adjacent_set(n, k, &mut rng)
}

/// The `gamma` marked sets of group `k`.
pub fn draw_samples(plan: &BatchPlan, k: usize) -> Result<Vec<MarkedSet>> {
    (0..plan.gamma)
        .map(|i| draw_sample(plan.n, k, plan.master_seed, i))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub sample: usize,
    pub marked: MarkedSet,
    pub peak_probability: f64,
    pub peak_step: usize,
    pub first_peak_step: usize,
    pub first_peak_probability: f64,
    pub error: Option<String>,
}

/// Aggregates over the `gamma` samples of one `(scheme, k, m)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub scheme: WeightScheme,
    pub k: usize,
    pub m: usize,
    pub mean_peak_probability: f64,
    pub cv_peak_probability: f64,
    pub mean_peak_step: f64,
    pub cv_peak_step: f64,
    pub mean_first_peak_step: f64,
    pub cv_first_peak_step: f64,
    pub mean_first_peak_probability: f64,
    pub gamma_effective: usize,
    /// Set when some mean was zero and its cv was reported as 0.
    pub cv_undefined: bool,
    pub error: Option<String>,
}

impl CellStats {
    pub fn key(&self) -> String {
        cell_key(&self.scheme, self.k, self.m)
    }
}

pub fn cell_key(scheme: &WeightScheme, k: usize, m: usize) -> String {
    format!("{scheme}/{k}/{m}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    #[serde(flatten)]
    pub stats: CellStats,
    pub samples: Vec<SampleRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    pub plan: BatchPlan,
    /// In plan order: schemes, then k, then m.
    pub cells: Vec<CellRecord>,
}

impl BatchResult {
    pub fn cell(&self, scheme: &WeightScheme, k: usize, m: usize) -> Option<&CellRecord> {
        self.cells
            .iter()
            .find(|c| c.stats.scheme == *scheme && c.stats.k == k && c.stats.m == m)
    }

    pub fn has_errors(&self) -> bool {
        self.cells.iter().any(|c| c.stats.error.is_some())
    }
}

struct Job<'a> {
    scheme: WeightScheme,
    k: usize,
    m: usize,
    sample: usize,
    marked: &'a MarkedSet,
}

fn run_job(plan: &BatchPlan, job: &Job<'_>) -> SampleRow {
    let config = plan.config(job.scheme, job.m);
    let outcome = Walk::new(config, job.marked.clone()).and_then(|mut w| w.run(plan.horizon.steps(&config)));
    match outcome {
        Ok(r) => SampleRow {
            sample: job.sample,
            marked: job.marked.clone(),
            peak_probability: r.peak_probability,
            peak_step: r.peak_step,
            first_peak_step: r.first_peak_step,
            first_peak_probability: r.first_peak_probability,
            error: None,
        },
        Err(e) => SampleRow {
            sample: job.sample,
            marked: job.marked.clone(),
            peak_probability: 0.0,
            peak_step: 0,
            first_peak_step: 0,
            first_peak_probability: 0.0,
            error: Some(e.to_string()),
        },
    }
}

/// Run every walk of the plan. `jobs` caps the worker count (see
/// [`crate::par::map_ordered`]); the result does not depend on it.
pub fn run_batch(plan: &BatchPlan, jobs: Option<usize>) -> Result<BatchResult> {
    plan.validate()?;
    let groups: Vec<(usize, Vec<MarkedSet>)> = plan
        .k_range
        .iter()
        .map(|&k| draw_samples(plan, k).map(|s| (k, s)))
        .collect::<Result<_>>()?;

    let mut work = Vec::new();
    for &scheme in &plan.schemes {
        for (k, sets) in &groups {
            for &m in &plan.m_range {
                for (sample, marked) in sets.iter().enumerate() {
                    work.push(Job {
                        scheme,
                        k: *k,
                        m,
                        sample,
                        marked,
                    });
                }
            }
        }
    }
    let rows = map_ordered(&work, jobs, |job| run_job(plan, job));

    let cells = rows
        .chunks(plan.gamma)
        .zip(work.chunks(plan.gamma))
        .map(|(rows, jobs)| aggregate(jobs[0].scheme, jobs[0].k, jobs[0].m, rows.to_vec()))
        .collect();
    Ok(BatchResult {
        plan: plan.clone(),
        cells,
    })
}

fn aggregate(scheme: WeightScheme, k: usize, m: usize, samples: Vec<SampleRow>) -> CellRecord {
    let ok: Vec<&SampleRow> = samples.iter().filter(|r| r.error.is_none()).collect();
    let error = samples.iter().find_map(|r| r.error.clone());
    let column = |f: &dyn Fn(&SampleRow) -> f64| ok.iter().map(|r| f(r)).collect::<Vec<f64>>();
    let mut cv_undefined = false;
    let mut stat = |values: Vec<f64>| -> (f64, f64) {
        if values.is_empty() {
            return (0.0, 0.0);
        }
        let mean = mean(&values);
        if mean == 0.0 {
            cv_undefined = true;
        }
        (mean, coefficient_of_variation(&values).unwrap_or(0.0))
    };
    let (mean_peak_probability, cv_peak_probability) = stat(column(&|r| r.peak_probability));
    let (mean_peak_step, cv_peak_step) = stat(column(&|r| r.peak_step as f64));
    let (mean_first_peak_step, cv_first_peak_step) = stat(column(&|r| r.first_peak_step as f64));
    let (mean_first_peak_probability, _) = stat(column(&|r| r.first_peak_probability));
    CellRecord {
        stats: CellStats {
            scheme,
            k,
            m,
            mean_peak_probability,
            cv_peak_probability,
            mean_peak_step,
            cv_peak_step,
            mean_first_peak_step,
            cv_first_peak_step,
            mean_first_peak_probability,
            gamma_effective: ok.len(),
            cv_undefined,
            error,
        },
        samples,
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation over the mean. A zero mean yields 0.
pub fn coefficient_of_variation(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::config("coefficient of variation of an empty list"));
    }
    if values.iter().all(|&v| v == values[0]) {
        return Ok(0.0);
    }
    let mu = mean(values);
    if mu == 0.0 {
        return Ok(0.0);
    }
    let var = values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / values.len() as f64;
    Ok(var.sqrt() / mu.abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestMRow {
    pub scheme: WeightScheme,
    pub k: usize,
    pub best_m: usize,
    pub peak: f64,
    pub cv: f64,
    pub first_peak_step: f64,
}

/// Per `(scheme, k)`, the `m` with the highest mean peak probability.
pub fn best_m_table(cells: &[CellStats]) -> Vec<BestMRow> {
    let mut rows: Vec<BestMRow> = Vec::new();
    let mut groups: Vec<(WeightScheme, usize)> = Vec::new();
    for c in cells {
        if !groups.iter().any(|&(s, k)| s == c.scheme && k == c.k) {
            groups.push((c.scheme, c.k));
        }
    }
    for (scheme, k) in groups {
        let mut group: Vec<&CellStats> = cells
            .iter()
            .filter(|c| c.scheme == scheme && c.k == k && c.error.is_none())
            .collect();
        if group.is_empty() {
            continue;
        }
        group.sort_by_key(|c| c.m);
        let top = group
            .iter()
            .map(|c| c.mean_peak_probability)
            .fold(f64::NEG_INFINITY, f64::max);
        let best = group
            .iter()
            .find(|c| c.mean_peak_probability >= top - BEST_M_TIE_TOL)
            .expect("group is non-empty");
        rows.push(BestMRow {
            scheme,
            k,
            best_m: best.m,
            peak: best.mean_peak_probability,
            cv: best.cv_peak_probability,
            first_peak_step: best.mean_first_peak_step,
        });
    }
    rows
}

/// Mean peak probabilities of one scheme as a `k × m` grid (plan order).
pub fn surface(result: &BatchResult, scheme: &WeightScheme) -> Vec<(usize, Vec<f64>)> {
    result
        .plan
        .k_range
        .iter()
        .map(|&k| {
            let row = result
                .plan
                .m_range
                .iter()
                .map(|&m| {
                    result
                        .cell(scheme, k, m)
                        .map(|c| c.stats.mean_peak_probability)
                        .unwrap_or(f64::NAN)
                })
                .collect();
            (k, row)
        })
        .collect()
}
