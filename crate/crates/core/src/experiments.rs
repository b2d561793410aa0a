//! Seeded Monte Carlo suites over `G(n, p)`: Betti thresholds, row density,
//! the first-row normal law, diamond-count concentration, and regularity / CM
//! statistics. Every trial is keyed by `(cell, stream)`, so record sets do not
//! depend on how many worker threads run them.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigUint;
use num_integer::binomial;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::betti::{
    betti_nonvanishing, betti_table, big_ratio, first_row, first_row_profile, reisner_is_cm, rho_k, ring_invariants,
    FirstRowMethod, BETTI_VERTEX_LIMIT, NONVANISHING_V_LIMIT,
};
use crate::counts::{count_diamonds, expected_diamond_count_f64, variance_ratio_estimate};
use crate::error::{Error, Result};
use crate::graph::{connected_components, CoupledSample, Graph};
use crate::homology::FieldChar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Threshold,
    Rows,
    Normal,
    Variance,
    RegularityCm,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::Threshold,
        ExperimentKind::Rows,
        ExperimentKind::Normal,
        ExperimentKind::Variance,
        ExperimentKind::RegularityCm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Threshold => "threshold",
            ExperimentKind::Rows => "rows",
            ExperimentKind::Normal => "normal",
            ExperimentKind::Variance => "variance",
            ExperimentKind::RegularityCm => "regularity_cm",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind {s:?}")))
    }
}

/// How each cell's edge probability is derived from `n` and a listed value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PSpec {
    Probabilities(Vec<f64>),
    /// `p = n^{-a}`.
    Exponents(Vec<f64>),
    /// `p = c / n`.
    COverN(Vec<f64>),
    /// `p = c / n²`.
    COverN2(Vec<f64>),
}

impl PSpec {
    pub fn values(&self) -> &[f64] {
        match self {
            PSpec::Probabilities(v) | PSpec::Exponents(v) | PSpec::COverN(v) | PSpec::COverN2(v) => v,
        }
    }

    /// Column name for the listed value.
    pub fn label(&self) -> &'static str {
        match self {
            PSpec::Probabilities(_) => "p_param",
            PSpec::Exponents(_) => "a",
            PSpec::COverN(_) | PSpec::COverN2(_) => "c",
        }
    }

    pub fn probability(&self, n: usize, x: f64) -> f64 {
        let nf = n as f64;
        match self {
            PSpec::Probabilities(_) => x,
            PSpec::Exponents(_) => nf.powf(-x),
            PSpec::COverN(_) => x / nf,
            PSpec::COverN2(_) => x / (nf * nf),
        }
    }
}

/// Which first-row index `i_n` the normal experiment evaluates.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum IPolicy {
    /// `i_n = ⌊n/2⌋`.
    #[default]
    Half,
    /// `i_n = ⌊n/2 + a√n/2⌋` for each listed `a`.
    Offset { a: Vec<f64> },
}

impl IPolicy {
    fn offsets(&self) -> Vec<f64> {
        match self {
            IPolicy::Half => vec![0.0],
            IPolicy::Offset { a } => a.clone(),
        }
    }
}

/// Which part of a statistic a gate compares.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    #[default]
    Value,
    Lower,
    Upper,
}

/// An acceptance range checked under `--assert`. Without `n` or `param` a
/// suite-level statistic of that name is used if present, else every cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gate {
    pub stat: String,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub param: Option<f64>,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
    #[serde(default)]
    pub endpoint: Endpoint,
}

fn default_field_char() -> u32 {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n_list: Vec<usize>,
    pub p_spec: PSpec,
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_field_char")]
    pub field_char: u32,
    /// Permits cells with `p > 1/2`.
    #[serde(default)]
    pub allow_dense: bool,
    #[serde(default)]
    pub s: Option<usize>,
    #[serde(default)]
    pub i: Option<usize>,
    #[serde(default)]
    pub v: Option<usize>,
    #[serde(default)]
    pub k_max: Option<usize>,
    #[serde(default)]
    pub r: Option<usize>,
    #[serde(default)]
    pub i_policy: Option<IPolicy>,
    /// Normal experiment: also record the whole first row of every trial.
    #[serde(default)]
    pub profile: bool,
    #[serde(default)]
    pub gates: Vec<Gate>,
}

/// One `(n, p)` combination of a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub index: usize,
    pub n: usize,
    pub p: f64,
    pub param: f64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn field(&self) -> Result<FieldChar> {
        FieldChar::new(self.field_char).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks the config and lists its cells, `n`-major.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.n_list.is_empty() || self.p_spec.values().is_empty() {
            return Err(Error::Config("n_list and p_spec need at least one value each".into()));
        }
        if self.trials > u32::MAX as usize {
            return Err(Error::Config("too many trials per cell".into()));
        }
        self.field()?;
        let mut cells = Vec::new();
        for &n in &self.n_list {
            if n == 0 {
                return Err(Error::Config("n must be positive".into()));
            }
            for &x in self.p_spec.values() {
                let p = self.p_spec.probability(n, x);
                if !(0.0..=1.0).contains(&p) || p.is_nan() {
                    return Err(Error::Config(format!(
                        "derived p = {p} for n={n}, {}={x}",
                        self.p_spec.label()
                    )));
                }
                if p > 0.5 && !self.allow_dense {
                    return Err(Error::Config(format!(
                        "derived p = {p} exceeds 1/2 for n={n}; set allow_dense to run it"
                    )));
                }
                cells.push(Cell {
                    index: cells.len(),
                    n,
                    p,
                    param: x,
                });
            }
        }
        self.check_kind(&cells)?;
        Ok(cells)
    }

    fn check_kind(&self, cells: &[Cell]) -> Result<()> {
        let n_max = self.n_list.iter().copied().max().unwrap_or(0);
        let need = |field: Option<usize>, name: &str| {
            field.ok_or_else(|| Error::Config(format!("{} needs `{name}`", self.kind)))
        };
        match self.kind {
            ExperimentKind::Threshold => {
                let (i, v) = (need(self.i, "i")?, need(self.v, "v")?);
                if v < i + 2 || v > 2 * i {
                    return Err(Error::Config(format!("need i + 2 <= v <= 2i, got i={i}, v={v}")));
                }
                if v > NONVANISHING_V_LIMIT {
                    return Err(Error::Capacity(format!(
                        "v = {v} exceeds the detection limit {NONVANISHING_V_LIMIT}"
                    )));
                }
            }
            ExperimentKind::Rows | ExperimentKind::RegularityCm => {
                if n_max > BETTI_VERTEX_LIMIT {
                    return Err(Error::Capacity(format!(
                        "n = {n_max} exceeds the Betti table limit {BETTI_VERTEX_LIMIT}"
                    )));
                }
                if self.k_max == Some(0) {
                    return Err(Error::Config("k_max must be at least 1".into()));
                }
            }
            ExperimentKind::Normal => {
                let PSpec::COverN(cs) = &self.p_spec else {
                    return Err(Error::Config("normal needs p_spec c_over_n".into()));
                };
                if cs.iter().any(|&c| c <= 0.0 || c >= 1.0) {
                    return Err(Error::Config("normal needs 0 < c < 1".into()));
                }
                if self.n_list.iter().any(|&n| n < 2) {
                    return Err(Error::Config("normal needs n >= 2".into()));
                }
            }
            ExperimentKind::Variance => {
                let s = need(self.s, "s")?;
                // n p^{s+1/2} must grow along n_list for every listed value.
                let per_n = self.p_spec.values().len();
                for k in 0..per_n {
                    let drive: Vec<f64> = cells
                        .iter()
                        .skip(k)
                        .step_by(per_n)
                        .map(|c| c.n as f64 * c.p.powf(s as f64 + 0.5))
                        .collect();
                    if drive.windows(2).any(|w| w[1] <= w[0]) {
                        return Err(Error::Config(format!(
                            "n p^(s+1/2) does not increase along n_list: {drive:?}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A point estimate with an optional interval and standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Stat {
    pub value: f64,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub se: Option<f64>,
}

impl Stat {
    pub fn exact(value: f64) -> Self {
        Stat {
            value,
            lo: None,
            hi: None,
            se: None,
        }
    }

    /// Sample mean with a normal-approximation 95% interval.
    pub fn mean_of(xs: &[f64]) -> Self {
        let xs = canonical(xs);
        let m = xs.len() as f64;
        if xs.is_empty() {
            return Stat::exact(f64::NAN);
        }
        let mean = xs.iter().sum::<f64>() / m;
        if xs.len() < 2 {
            return Stat::exact(mean);
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
        let se = (var / m).sqrt();
        Stat {
            value: mean,
            lo: Some(mean - Z95 * se),
            hi: Some(mean + Z95 * se),
            se: Some(se),
        }
    }

    /// Proportion `k / m` with its Wilson 95% interval.
    pub fn proportion(k: usize, m: usize) -> Self {
        let (lo, hi) = wilson(k, m);
        let value = if m == 0 { f64::NAN } else { k as f64 / m as f64 };
        Stat {
            value,
            lo: Some(lo),
            hi: Some(hi),
            se: None,
        }
    }

    fn endpoint(&self, e: Endpoint) -> f64 {
        match e {
            Endpoint::Value => self.value,
            Endpoint::Lower => self.lo.unwrap_or(self.value),
            Endpoint::Upper => self.hi.unwrap_or(self.value),
        }
    }
}

const Z95: f64 = 1.959963984540054;

/// Wilson score interval at 95%.
pub fn wilson(k: usize, m: usize) -> (f64, f64) {
    if m == 0 {
        return (0.0, 1.0);
    }
    let (k, m) = (k as f64, m as f64);
    let phat = k / m;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / m;
    let centre = (phat + z2 / (2.0 * m)) / denom;
    let half = Z95 * (phat * (1.0 - phat) / m + z2 / (4.0 * m * m)).sqrt() / denom;
    let lo = if k == 0.0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k == m { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Sorted copy, so float sums do not depend on record order.
fn canonical(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

#[derive(Clone, Debug, Serialize)]
pub struct CellSummary {
    pub n: usize,
    pub p: f64,
    pub param: f64,
    pub trials: usize,
    pub excluded: usize,
    pub stats: BTreeMap<String, Stat>,
}

/// Per-trial rows, kept in canonical `(cell, stream, …)` order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RecordTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RecordTable {
    fn new(header: &[&str]) -> Self {
        RecordTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentSummary {
    pub kind: ExperimentKind,
    pub param_label: String,
    pub cells: Vec<CellSummary>,
    pub suite: BTreeMap<String, f64>,
    #[serde(skip)]
    pub records: RecordTable,
    #[serde(skip)]
    pub profile: Option<RecordTable>,
    pub wall_time_s: f64,
}

impl ExperimentSummary {
    pub fn cell(&self, n: usize, param: f64) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.n == n && c.param == param)
    }

    /// A cell-level statistic, or NaN when absent.
    pub fn stat(&self, n: usize, param: f64, name: &str) -> f64 {
        self.cell(n, param)
            .and_then(|c| c.stats.get(name))
            .map_or(f64::NAN, |s| s.value)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GateOutcome {
    pub gate: Gate,
    pub observed: Vec<f64>,
    pub passed: bool,
}

/// Checks every gate of `cfg`; a gate matching nothing fails.
pub fn evaluate_gates(summary: &ExperimentSummary, gates: &[Gate]) -> Vec<GateOutcome> {
    gates
        .iter()
        .map(|gate| {
            let observed: Vec<f64> = match summary.suite.get(&gate.stat) {
                Some(&v) if gate.n.is_none() && gate.param.is_none() => vec![v],
                _ => summary
                    .cells
                    .iter()
                    .filter(|c| gate.n.is_none_or(|n| n == c.n))
                    .filter(|c| gate.param.is_none_or(|x| (x - c.param).abs() < 1e-12))
                    .filter_map(|c| c.stats.get(&gate.stat))
                    .map(|s| s.endpoint(gate.endpoint))
                    .collect(),
            };
            let passed = !observed.is_empty()
                && observed
                    .iter()
                    .all(|&x| gate.min.is_none_or(|lo| x >= lo) && gate.max.is_none_or(|hi| x <= hi));
            GateOutcome {
                gate: gate.clone(),
                observed,
                passed,
            }
        })
        .collect()
}

/// Stream for trial `t` at the `k`-th size of `n_list`. Cells sharing `n` share
/// streams, so their graphs are nested in `p`.
fn stream_of(k: usize, t: usize) -> u64 {
    (k as u64) << 32 | t as u64
}

fn fmt_f(x: f64) -> String {
    format!("{x}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, fmt_f)
}

/// Cells grouped by `n` in config order.
fn by_size(cfg: &ExperimentConfig, cells: &[Cell]) -> Vec<Vec<Cell>> {
    let per_n = cfg.p_spec.values().len();
    cells.chunks(per_n).map(<[Cell]>::to_vec).collect()
}

/// Runs `work` for every `(size index, trial)` on the current rayon pool,
/// returning results in key order.
fn run_trials<T: Send>(
    cfg: &ExperimentConfig,
    work: impl Fn(usize, usize) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    let trials = cfg.trials;
    (0..cfg.n_list.len() * trials)
        .into_par_iter()
        .map(|key| work(key / trials, key % trials))
        .collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let start = Instant::now();
    let mut summary = match cfg.kind {
        ExperimentKind::Threshold => run_threshold(cfg),
        ExperimentKind::Rows => run_rows(cfg),
        ExperimentKind::Normal => run_normal(cfg),
        ExperimentKind::Variance => run_variance(cfg),
        ExperimentKind::RegularityCm => run_regularity_cm(cfg),
    }?;
    summary.wall_time_s = start.elapsed().as_secs_f64();
    Ok(summary)
}

/// [`run_experiment`] on a dedicated pool of `threads` workers.
pub fn run_experiment_with_threads(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentSummary> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_experiment(cfg))
}

fn summary(cfg: &ExperimentConfig, cells: Vec<CellSummary>, records: RecordTable) -> ExperimentSummary {
    ExperimentSummary {
        kind: cfg.kind,
        param_label: cfg.p_spec.label().into(),
        cells,
        suite: BTreeMap::new(),
        records,
        profile: None,
        wall_time_s: 0.0,
    }
}

fn cell_summary(c: &Cell, trials: usize, excluded: usize) -> CellSummary {
    CellSummary {
        n: c.n,
        p: c.p,
        param: c.param,
        trials,
        excluded,
        stats: BTreeMap::new(),
    }
}

/// `P̂[β_{i,v} ≠ 0]` per cell, plus per-trial monotonicity in `p` under coupling.
pub fn run_threshold(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let cells = cfg.cells()?;
    if cfg.kind != ExperimentKind::Threshold {
        return Err(Error::Config(format!("run_threshold given a {} config", cfg.kind)));
    }
    let (i, v) = (cfg.i.expect("checked"), cfg.v.expect("checked"));
    let field = cfg.field()?;
    let groups = by_size(cfg, &cells);
    // (flags per cell of this n, monotone in p)
    let outcomes = run_trials(cfg, |k, t| {
        let group = &groups[k];
        let coupled = CoupledSample::draw(group[0].n, cfg.seed, stream_of(k, t))?;
        let flags = group
            .iter()
            .map(|c| betti_nonvanishing(&coupled.graph_at(c.p)?, i, v, field))
            .collect::<Result<Vec<bool>>>()?;
        let mut order: Vec<usize> = (0..group.len()).collect();
        order.sort_by(|&a, &b| group[a].p.total_cmp(&group[b].p));
        let monotone = order.windows(2).all(|w| flags[w[0]] <= flags[w[1]]);
        Ok((flags, monotone))
    })?;

    let label = cfg.p_spec.label();
    let mut records = RecordTable::new(&["cell", "n", "p", label, "stream", "nonzero"]);
    let mut nonzero = vec![0usize; cells.len()];
    for c in &cells {
        let k = c.index / groups[0].len();
        let j = c.index % groups[0].len();
        for t in 0..cfg.trials {
            let flag = outcomes[k * cfg.trials + t].0[j];
            nonzero[c.index] += flag as usize;
            records.rows.push(vec![
                c.index.to_string(),
                c.n.to_string(),
                fmt_f(c.p),
                fmt_f(c.param),
                stream_of(k, t).to_string(),
                (flag as u8).to_string(),
            ]);
        }
    }
    let cell_summaries = cells
        .iter()
        .map(|c| {
            let mut s = cell_summary(c, cfg.trials, 0);
            s.stats
                .insert("phat".into(), Stat::proportion(nonzero[c.index], cfg.trials));
            s.stats
                .insert("nonzero_count".into(), Stat::exact(nonzero[c.index] as f64));
            s
        })
        .collect();
    let mut out = summary(cfg, cell_summaries, records);
    let monotone = outcomes.iter().filter(|o| o.1).count();
    out.suite.insert("coupled_trials".into(), outcomes.len() as f64);
    out.suite.insert("monotone_trials".into(), monotone as f64);
    out.suite
        .insert("monotone_fraction".into(), monotone as f64 / outcomes.len() as f64);
    Ok(out)
}

/// Per-cell table of threshold results in the `n,p,a,trials,nonzero_count,phat,wilson_lo,wilson_hi` layout.
pub fn threshold_cells_table(s: &ExperimentSummary) -> RecordTable {
    let mut t = RecordTable::new(&[
        "n",
        "p",
        &s.param_label,
        "trials",
        "nonzero_count",
        "phat",
        "wilson_lo",
        "wilson_hi",
    ]);
    for c in &s.cells {
        let phat = c.stats["phat"];
        t.rows.push(vec![
            c.n.to_string(),
            fmt_f(c.p),
            fmt_f(c.param),
            c.trials.to_string(),
            fmt_f(c.stats["nonzero_count"].value),
            fmt_f(phat.value),
            fmt_opt(phat.lo),
            fmt_opt(phat.hi),
        ]);
    }
    t
}

/// Long-format per-cell table: one line per statistic.
pub fn cells_table(s: &ExperimentSummary) -> RecordTable {
    if s.kind == ExperimentKind::Threshold {
        return threshold_cells_table(s);
    }
    let mut t = RecordTable::new(&[
        "n",
        "p",
        &s.param_label,
        "trials",
        "excluded",
        "stat",
        "value",
        "lo",
        "hi",
        "se",
    ]);
    for c in &s.cells {
        for (name, st) in &c.stats {
            t.rows.push(vec![
                c.n.to_string(),
                fmt_f(c.p),
                fmt_f(c.param),
                c.trials.to_string(),
                c.excluded.to_string(),
                name.clone(),
                fmt_f(st.value),
                fmt_opt(st.lo),
                fmt_opt(st.hi),
                fmt_opt(st.se),
            ]);
        }
    }
    t
}

/// Row densities `ρ_1..ρ_{k_max}` from full Betti tables.
pub fn run_rows(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let cells = cfg.cells()?;
    let k_max = cfg.k_max.unwrap_or(2);
    let field = cfg.field()?;
    let groups = by_size(cfg, &cells);
    let per_n = groups[0].len();
    // per trial: for each cell of this n, (pdim, reg, ρ_1..ρ_kmax)
    let outcomes = run_trials(cfg, |k, t| {
        let group = &groups[k];
        let coupled = CoupledSample::draw(group[0].n, cfg.seed, stream_of(k, t))?;
        group
            .iter()
            .map(|c| {
                let table = betti_table(&coupled.graph_at(c.p)?, field)?;
                let rhos: Vec<(u64, u64)> = (1..=k_max)
                    .map(|kk| {
                        let r = rho_k(&table, kk);
                        (*r.numer(), *r.denom())
                    })
                    .collect();
                Ok((table.pdim(), table.reg(), rhos))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let label = cfg.p_spec.label();
    let mut header = vec![
        "cell".to_string(),
        "n".into(),
        "p".into(),
        label.into(),
        "stream".into(),
        "pdim".into(),
        "reg".into(),
    ];
    header.extend((1..=k_max).map(|kk| format!("rho_{kk}")));
    let mut records = RecordTable {
        header,
        rows: Vec::new(),
    };
    let mut rho_values = vec![vec![Vec::new(); k_max]; cells.len()];
    for c in &cells {
        let (k, j) = (c.index / per_n, c.index % per_n);
        for t in 0..cfg.trials {
            let (pdim, reg, rhos) = &outcomes[k * cfg.trials + t][j];
            let mut row = vec![
                c.index.to_string(),
                c.n.to_string(),
                fmt_f(c.p),
                fmt_f(c.param),
                stream_of(k, t).to_string(),
                pdim.to_string(),
                reg.to_string(),
            ];
            for (kk, &(num, den)) in rhos.iter().enumerate() {
                row.push(format!("{num}/{den}"));
                rho_values[c.index][kk].push(num as f64 / den as f64);
            }
            records.rows.push(row);
        }
    }
    let cell_summaries: Vec<CellSummary> = cells
        .iter()
        .map(|c| {
            let mut s = cell_summary(c, cfg.trials, 0);
            for (kk, values) in rho_values[c.index].iter().enumerate().take(k_max) {
                s.stats.insert(format!("rho_{}", kk + 1), Stat::mean_of(values));
            }
            s
        })
        .collect();
    let mut out = summary(cfg, cell_summaries, records);
    // Trend of mean ρ_1 along n_list for each listed value.
    for j in 0..per_n {
        let means: Vec<Stat> = (0..groups.len())
            .map(|k| out.cells[k * per_n + j].stats["rho_1"])
            .collect();
        let strict = means.windows(2).all(|w| w[1].value >= w[0].value);
        let tolerant = means.windows(2).all(|w| {
            let se = (w[0].se.unwrap_or(0.0).powi(2) + w[1].se.unwrap_or(0.0).powi(2)).sqrt();
            w[1].value >= w[0].value - Z95 * se
        });
        let x = fmt_f(cfg.p_spec.values()[j]);
        out.suite
            .insert(format!("rho_1_nondecreasing[{label}={x}]"), strict as u8 as f64);
        out.suite.insert(
            format!("rho_1_nondecreasing_within_noise[{label}={x}]"),
            tolerant as u8 as f64,
        );
    }
    Ok(out)
}

fn offset_index(n: usize, a: f64) -> usize {
    let i = (n as f64 / 2.0 + a * (n as f64).sqrt() / 2.0).floor();
    (i.max(1.0) as usize).min(n - 1)
}

/// `β_{i,i+1}` per trial against `C n C(n, i)`, `C = (1-c)/2`.
pub fn run_normal(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let cells = cfg.cells()?;
    if cfg.kind != ExperimentKind::Normal {
        return Err(Error::Config(format!("run_normal given a {} config", cfg.kind)));
    }
    let offsets = cfg.i_policy.clone().unwrap_or_default().offsets();
    let groups = by_size(cfg, &cells);
    let per_n = groups[0].len();

    struct Trial {
        // per offset: None when the graph was not clean and too large to enumerate
        betas: Vec<Option<(BigUint, FirstRowMethod)>>,
        profile: Option<Vec<BigUint>>,
    }
    let outcomes = run_trials(cfg, |k, t| {
        let group = &groups[k];
        let n = group[0].n;
        let coupled = CoupledSample::draw(n, cfg.seed, stream_of(k, t))?;
        group
            .iter()
            .map(|c| {
                let g = coupled.graph_at(c.p)?;
                let betas = offsets
                    .iter()
                    .map(|&a| match first_row(&g, offset_index(n, a)) {
                        Ok(b) => Ok(Some(b)),
                        Err(Error::Capacity(_)) => Ok(None),
                        Err(e) => Err(e),
                    })
                    .collect::<Result<Vec<_>>>()?;
                let profile = if cfg.profile {
                    match first_row_profile(&g) {
                        Ok((row, _)) => Some(row),
                        Err(Error::Capacity(_)) => None,
                        Err(e) => return Err(e),
                    }
                } else {
                    None
                };
                Ok(Trial { betas, profile })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut records = RecordTable::new(&[
        "cell",
        "n",
        "c",
        "a",
        "i",
        "trial",
        "beta",
        "ratio",
        "ratio_corrected",
        "normalized",
        "method",
    ]);
    let mut profile_rows = RecordTable::new(&["cell", "n", "c", "trial", "i", "beta"]);
    let mut cell_summaries = Vec::new();
    let (mut excluded_total, mut evaluated_total) = (0usize, 0usize);
    for c in &cells {
        let (k, j) = (c.index / per_n, c.index % per_n);
        let n = c.n;
        let big_c = (1.0 - c.param) / 2.0;
        let corrected = (4.0 - c.param) / 8.0;
        let mut ratios = Vec::new();
        let mut corrected_ratios = Vec::new();
        let mut normalized = vec![Vec::new(); offsets.len()];
        let mut excluded = 0;
        let mut unimodal_mid = 0usize;
        let mut profiled = 0usize;
        for t in 0..cfg.trials {
            let trial = &outcomes[k * cfg.trials + t][j];
            for (oi, &a) in offsets.iter().enumerate() {
                let i = offset_index(n, a);
                evaluated_total += 1;
                let mut row = vec![
                    c.index.to_string(),
                    n.to_string(),
                    fmt_f(c.param),
                    fmt_f(a),
                    i.to_string(),
                    t.to_string(),
                ];
                match &trial.betas[oi] {
                    None => {
                        excluded += 1;
                        row.extend(["", "", "", "", "fallback-failed"].map(String::from));
                    }
                    Some((beta, method)) => {
                        let scale: BigUint = BigUint::from(n) * binomial(BigUint::from(n), BigUint::from(i));
                        let base = big_ratio(beta, &scale);
                        let ratio = base / big_c;
                        let ratio_corr = base / corrected;
                        // β √(2π) / ((1-c) 2^n √n), as a ratio of big integers first.
                        let norm = big_ratio(beta, &(BigUint::from(1u8) << n)) * (2.0 * std::f64::consts::PI).sqrt()
                            / ((1.0 - c.param) * (n as f64).sqrt());
                        if a == 0.0 || offsets.len() == 1 {
                            ratios.push(ratio);
                            corrected_ratios.push(ratio_corr);
                        }
                        normalized[oi].push(norm);
                        row.extend([
                            beta.to_string(),
                            fmt_f(ratio),
                            fmt_f(ratio_corr),
                            fmt_f(norm),
                            match method {
                                FirstRowMethod::ClosedForm => "closed_form".into(),
                                FirstRowMethod::Enumeration => "enumeration".into(),
                            },
                        ]);
                    }
                }
                records.rows.push(row);
            }
            if let Some(profile) = &trial.profile {
                profiled += 1;
                for (idx, beta) in profile.iter().enumerate() {
                    profile_rows.rows.push(vec![
                        c.index.to_string(),
                        n.to_string(),
                        fmt_f(c.param),
                        t.to_string(),
                        (idx + 1).to_string(),
                        beta.to_string(),
                    ]);
                }
                if let Some(peak) = unimodal_peak(profile) {
                    let mid = n / 2;
                    unimodal_mid += (peak == mid || peak == mid + 1) as usize;
                }
            }
        }
        excluded_total += excluded;
        let mut s = cell_summary(c, cfg.trials, excluded);
        s.stats.insert("ratio".into(), Stat::mean_of(&ratios));
        s.stats
            .insert("ratio_corrected".into(), Stat::mean_of(&corrected_ratios));
        for (oi, &a) in offsets.iter().enumerate() {
            let st = Stat::mean_of(&normalized[oi]);
            s.stats.insert(format!("normalized[a={}]", fmt_f(a)), st);
            s.stats.insert(
                format!("normalized_deviation[a={}]", fmt_f(a)),
                Stat::exact((st.value - (-a * a / 2.0).exp()).abs()),
            );
        }
        if cfg.profile {
            s.stats.insert("profiled_trials".into(), Stat::exact(profiled as f64));
            s.stats
                .insert("unimodal_mid_peak".into(), Stat::proportion(unimodal_mid, profiled));
        }
        cell_summaries.push(s);
    }
    let excluded_fraction = excluded_total as f64 / evaluated_total as f64;
    if excluded_fraction >= 0.01 {
        return Err(Error::Capacity(format!(
            "{excluded_total} of {evaluated_total} first-row evaluations fell back and failed"
        )));
    }
    let mut out = summary(cfg, cell_summaries, records);
    out.suite.insert("excluded_fraction".into(), excluded_fraction);
    let max_dev = out
        .cells
        .iter()
        .flat_map(|c| c.stats.iter().filter(|(k, _)| k.starts_with("normalized_deviation")))
        .map(|(_, s)| s.value)
        .fold(0.0, f64::max);
    out.suite.insert("normalized_max_deviation".into(), max_dev);
    if cfg.profile {
        out.profile = Some(profile_rows);
    }
    Ok(out)
}

/// Position (1-based `i`) of the maximum when the sequence rises then falls, ties
/// at the top allowed; `None` otherwise.
pub fn unimodal_peak(row: &[BigUint]) -> Option<usize> {
    let peak = (0..row.len()).max_by(|&a, &b| row[a].cmp(&row[b]).then(b.cmp(&a)))?;
    let rising = row[..=peak].windows(2).all(|w| w[0] <= w[1]);
    let falling = row[peak..].windows(2).all(|w| w[0] >= w[1]);
    (rising && falling).then_some(peak + 1)
}

/// `X_s` per trial: the sample mean against its closed form and `Var/E²`.
pub fn run_variance(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let cells = cfg.cells()?;
    let s = cfg.s.ok_or_else(|| Error::Config("variance needs `s`".into()))?;
    let groups = by_size(cfg, &cells);
    let per_n = groups[0].len();
    let outcomes = run_trials(cfg, |k, t| {
        let group = &groups[k];
        let coupled = CoupledSample::draw(group[0].n, cfg.seed, stream_of(k, t))?;
        group
            .iter()
            .map(|c| Ok(count_diamonds(&coupled.graph_at(c.p)?, s)))
            .collect::<Result<Vec<u64>>>()
    })?;

    let label = cfg.p_spec.label();
    let mut records = RecordTable::new(&["cell", "n", "p", label, "stream", "x_s"]);
    let mut cell_summaries = Vec::new();
    for c in &cells {
        let (k, j) = (c.index / per_n, c.index % per_n);
        let xs: Vec<f64> = (0..cfg.trials)
            .map(|t| outcomes[k * cfg.trials + t][j] as f64)
            .collect();
        for (t, &x) in xs.iter().enumerate() {
            records.rows.push(vec![
                c.index.to_string(),
                c.n.to_string(),
                fmt_f(c.p),
                fmt_f(c.param),
                stream_of(k, t).to_string(),
                fmt_f(x),
            ]);
        }
        let mut sm = cell_summary(c, cfg.trials, 0);
        let mean = Stat::mean_of(&xs);
        let expected = expected_diamond_count_f64(c.n, c.p, s);
        sm.stats.insert("mean".into(), mean);
        sm.stats.insert("expected".into(), Stat::exact(expected));
        let z = mean
            .se
            .filter(|&se| se > 0.0)
            .map_or(if mean.value == expected { 0.0 } else { f64::INFINITY }, |se| {
                (mean.value - expected) / se
            });
        sm.stats.insert("z".into(), Stat::exact(z));
        match variance_ratio_estimate(&canonical(&xs)) {
            Ok(vr) => {
                let se = vr.ratio_se;
                sm.stats.insert(
                    "ratio".into(),
                    Stat {
                        value: vr.ratio,
                        lo: se.map(|e| vr.ratio - Z95 * e),
                        hi: se.map(|e| vr.ratio + Z95 * e),
                        se,
                    },
                );
                sm.stats.insert("variance".into(), Stat::exact(vr.variance));
            }
            Err(Error::ZeroMean) => {
                sm.stats.insert("zero_mean".into(), Stat::exact(1.0));
            }
            Err(e) => return Err(e),
        }
        cell_summaries.push(sm);
    }
    let mut out = summary(cfg, cell_summaries, records);
    for j in 0..per_n {
        let ratios: Vec<f64> = (0..groups.len())
            .filter_map(|k| out.cells[k * per_n + j].stats.get("ratio").map(|s| s.value))
            .collect();
        let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
        let x = fmt_f(cfg.p_spec.values()[j]);
        out.suite
            .insert(format!("ratio_decreasing[{label}={x}]"), decreasing as u8 as f64);
    }
    let max_z = out.cells.iter().map(|c| c.stats["z"].value.abs()).fold(0.0, f64::max);
    out.suite.insert("max_abs_z".into(), max_z);
    Ok(out)
}

fn is_forest(g: &Graph) -> bool {
    g.edge_count() + connected_components(g).count == g.n()
}

/// Regularity, codim/pdim and Cohen–Macaulayness per trial.
pub fn run_regularity_cm(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let cells = cfg.cells()?;
    let field = cfg.field()?;
    let groups = by_size(cfg, &cells);
    let per_n = groups[0].len();
    let outcomes = run_trials(cfg, |k, t| {
        let group = &groups[k];
        let coupled = CoupledSample::draw(group[0].n, cfg.seed, stream_of(k, t))?;
        group
            .iter()
            .map(|c| {
                let g = coupled.graph_at(c.p)?;
                let table = betti_table(&g, field)?;
                Ok((ring_invariants(&g, &table), reisner_is_cm(&g, field)?, is_forest(&g)))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let label = cfg.p_spec.label();
    let mut records = RecordTable::new(&[
        "cell",
        "n",
        "p",
        label,
        "stream",
        "pdim",
        "reg",
        "codim",
        "krull_dim",
        "is_cm",
        "reisner_cm",
        "forest",
        "reg_in_range",
    ]);
    let mut cell_summaries = Vec::new();
    let (mut forest_trials, mut forest_cm, mut disagreements) = (0usize, 0usize, 0usize);
    for c in &cells {
        let (k, j) = (c.index / per_n, c.index % per_n);
        let mut ratios = Vec::new();
        let (mut cm, mut reg_ok, mut forests, mut forests_cm) = (0, 0, 0, 0);
        for t in 0..cfg.trials {
            let (inv, reisner, forest) = &outcomes[k * cfg.trials + t][j];
            let in_range = cfg.r.map(|r| (r + 1..=2 * r).contains(&inv.reg));
            ratios.push(inv.codim_over_pdim());
            cm += inv.is_cm as usize;
            reg_ok += in_range.unwrap_or(false) as usize;
            disagreements += (inv.is_cm != *reisner) as usize;
            if *forest {
                forests += 1;
                forests_cm += inv.is_cm as usize;
            }
            records.rows.push(vec![
                c.index.to_string(),
                c.n.to_string(),
                fmt_f(c.p),
                fmt_f(c.param),
                stream_of(k, t).to_string(),
                inv.pdim.to_string(),
                inv.reg.to_string(),
                inv.codim.to_string(),
                inv.krull_dim.to_string(),
                (inv.is_cm as u8).to_string(),
                (*reisner as u8).to_string(),
                (*forest as u8).to_string(),
                in_range.map_or_else(String::new, |b| (b as u8).to_string()),
            ]);
        }
        forest_trials += forests;
        forest_cm += forests_cm;
        let mut s = cell_summary(c, cfg.trials, 0);
        s.stats.insert("codim_over_pdim".into(), Stat::mean_of(&ratios));
        s.stats.insert("cm_fraction".into(), Stat::proportion(cm, cfg.trials));
        if cfg.r.is_some() {
            s.stats
                .insert("reg_in_range".into(), Stat::proportion(reg_ok, cfg.trials));
        }
        s.stats.insert("forest_trials".into(), Stat::exact(forests as f64));
        s.stats
            .insert("forest_cm".into(), Stat::proportion(forests_cm, forests));
        cell_summaries.push(s);
    }
    let mut out = summary(cfg, cell_summaries, records);
    out.suite.insert("forest_trials".into(), forest_trials as f64);
    out.suite.insert(
        "forest_cm_fraction".into(),
        if forest_trials == 0 {
            f64::NAN
        } else {
            forest_cm as f64 / forest_trials as f64
        },
    );
    out.suite
        .insert("cm_criterion_disagreements".into(), disagreements as f64);
    Ok(out)
}

/// `git describe --always --dirty`, or `"unknown"` outside a work tree.
pub fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}

#[derive(Serialize)]
struct Sidecar<'a> {
    config: &'a ExperimentConfig,
    seed: u64,
    git_describe: String,
    wall_time_s: f64,
    cells: &'a [CellSummary],
    suite: &'a BTreeMap<String, f64>,
    gates: &'a [GateOutcome],
}

/// Files written by [`write_outputs`].
#[derive(Clone, Debug)]
pub struct OutputPaths {
    pub records: PathBuf,
    pub cells: PathBuf,
    pub sidecar: PathBuf,
    pub profile: Option<PathBuf>,
}

/// Writes `<base>.csv` (per-trial records), `<base>.cells.csv`, `<base>.json`,
/// and `<base>.profile.csv` when first-row profiles were recorded.
pub fn write_outputs(
    summary: &ExperimentSummary,
    cfg: &ExperimentConfig,
    gates: &[GateOutcome],
    base: &Path,
) -> Result<OutputPaths> {
    if let Some(dir) = base.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let with = |suffix: &str| {
        let mut s = base.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    let paths = OutputPaths {
        records: with(".csv"),
        cells: with(".cells.csv"),
        sidecar: with(".json"),
        profile: summary.profile.as_ref().map(|_| with(".profile.csv")),
    };
    std::fs::write(&paths.records, summary.records.to_csv()?)?;
    std::fs::write(&paths.cells, cells_table(summary).to_csv()?)?;
    if let (Some(p), Some(t)) = (&paths.profile, &summary.profile) {
        std::fs::write(p, t.to_csv()?)?;
    }
    let sidecar = Sidecar {
        config: cfg,
        seed: cfg.seed,
        git_describe: git_describe(),
        wall_time_s: summary.wall_time_s,
        cells: &summary.cells,
        suite: &summary.suite,
        gates,
    };
    std::fs::write(&paths.sidecar, serde_json::to_string_pretty(&sidecar)? + "\n")?;
    Ok(paths)
}

/// Records sorted by their leading numeric key columns, for order-free comparison.
pub fn canonical_records(t: &RecordTable) -> RecordTable {
    let mut rows = t.rows.clone();
    rows.sort_by(|a, b| {
        let key = |r: &Vec<String>| {
            r.iter()
                .map(|f| f.parse::<f64>().unwrap_or(f64::NAN))
                .collect::<Vec<_>>()
        };
        key(a)
            .iter()
            .zip(key(b).iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.cmp(b))
    });
    RecordTable {
        header: t.header.clone(),
        rows,
    }
}

/// `E[X_s]` over a config's cells, for planning trial counts.
pub fn expected_counts(cfg: &ExperimentConfig, s: usize) -> Result<Vec<f64>> {
    Ok(cfg
        .cells()?
        .iter()
        .map(|c| expected_diamond_count_f64(c.n, c.p, s))
        .collect())
}
