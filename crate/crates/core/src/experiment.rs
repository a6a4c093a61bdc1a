//! Seeded Monte-Carlo campaigns and the CSV/JSON artifacts derived from them.
//!
//! State `i` of a campaign is always drawn from `SeedSpec(base_seed, i)` and results
//! are merged in index order, so every output byte is a function of the
//! configuration alone, independent of the worker count.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::binary_entropy;
use crate::error::{Error, Result};
use crate::measures::{MeasureKind, MeasureSettings};
use crate::monogamy::{verify, MonogamyRecord, PartitionSpec};
use crate::states::{
    dicke, ghz_w, haar_pure, haar_rank2, largest_eig_analytic, reduced_qubit_analytic, GhzwParams,
    QuantumState, SeedSpec, StateRecord,
};

/// Eigenvalues above this count towards the reported rank.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    HaarPure,
    HaarRank2,
    Ghz,
    W,
    Dicke,
    /// Random GHZ+W superposition coefficients, uniform on the unit sphere.
    Ghzw,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Self::HaarPure => "haar-pure",
            Self::HaarRank2 => "haar-rank2",
            Self::Ghz => "ghz",
            Self::W => "w",
            Self::Dicke => "dicke",
            Self::Ghzw => "ghzw",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "haar-pure" | "haar" | "rank1" => Self::HaarPure,
            "haar-rank2" | "rank2" => Self::HaarRank2,
            "ghz" => Self::Ghz,
            "w" => Self::W,
            "dicke" => Self::Dicke,
            "ghzw" | "ghz-w" => Self::Ghzw,
            _ => return Err(Error::InvalidConfig(format!("unknown family `{s}`"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub family: Family,
    pub n_qubits: usize,
    pub count: usize,
    pub base_seed: u64,
    pub measures: Vec<MeasureKind>,
    pub nodal: usize,
    /// Excitation number for the Dicke family; defaults to 1.
    pub dicke_r: Option<usize>,
    pub settings: MeasureSettings,
    /// Worker threads; 0 lets rayon decide. Never affects output.
    pub workers: usize,
}

impl CampaignConfig {
    pub fn new(family: Family, n_qubits: usize, count: usize, base_seed: u64) -> Self {
        Self {
            family,
            n_qubits,
            count,
            base_seed,
            measures: MeasureKind::HISTOGRAM_SET.to_vec(),
            nodal: 0,
            dicke_r: None,
            settings: MeasureSettings::default(),
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 1 {
            return Err(Error::InvalidConfig("count must be >= 1".into()));
        }
        if self.n_qubits < 3 {
            return Err(Error::InvalidConfig(format!(
                "n_qubits must be >= 3, got {}",
                self.n_qubits
            )));
        }
        if self.nodal >= self.n_qubits {
            return Err(Error::InvalidConfig(format!(
                "nodal party {} out of range for {} qubits",
                self.nodal, self.n_qubits
            )));
        }
        if self.measures.is_empty() {
            return Err(Error::InvalidConfig("no measures requested".into()));
        }
        Ok(())
    }
}

/// Zero-padded so that lexicographic order equals index order.
pub fn state_id(family: Family, index: usize, count: usize) -> String {
    let width = count.saturating_sub(1).to_string().len().max(6);
    format!("{}-{:0width$}", family.name(), index)
}

pub fn sample_state(
    family: Family,
    n: usize,
    seed: SeedSpec,
    dicke_r: Option<usize>,
) -> Result<QuantumState> {
    Ok(match family {
        Family::HaarPure => QuantumState::Pure(haar_pure(&vec![2; n], seed)?),
        Family::HaarRank2 => QuantumState::Mixed(haar_rank2(n, seed)?),
        Family::Ghz => QuantumState::Pure(ghz_w(&GhzwParams::ghz(n)?)?),
        Family::W => QuantumState::Pure(ghz_w(&GhzwParams::w(n)?)?),
        Family::Dicke => QuantumState::Pure(dicke(n, dicke_r.unwrap_or(1))?),
        Family::Ghzw => QuantumState::Pure(ghz_w(&GhzwParams::random(n, seed)?)?),
    })
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))
}

/// Samples the campaign's states, labelled with ids and family.
pub fn generate_states(cfg: &CampaignConfig) -> Result<Vec<StateRecord>> {
    cfg.validate()?;
    let pool = thread_pool(cfg.workers)?;
    pool.install(|| {
        (0..cfg.count)
            .into_par_iter()
            .map(|i| {
                let seed = SeedSpec::new(cfg.base_seed, i as u64);
                let state = sample_state(cfg.family, cfg.n_qubits, seed, cfg.dicke_r)?;
                Ok(StateRecord::from_state(&state)
                    .with_labels(state_id(cfg.family, i, cfg.count), cfg.family.name()))
            })
            .collect()
    })
}

/// One output row: a record plus the state's provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub family: String,
    pub rank: usize,
    /// Measurement class behind optimized measures; absent for closed forms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurement_class: Option<String>,
    #[serde(flatten)]
    pub record: MonogamyRecord,
}

/// Scores every state under every measure. Rows come out sorted by state id, then in
/// the order of `measures`.
pub fn score_states(
    states: &[StateRecord],
    measures: &[MeasureKind],
    nodal: usize,
    settings: &MeasureSettings,
    workers: usize,
) -> Result<Vec<ReportRow>> {
    let pool = thread_pool(workers)?;
    let mut scored: Vec<(String, Vec<ReportRow>)> = pool.install(|| {
        states
            .par_iter()
            .enumerate()
            .map(|(i, rec)| {
                let id = rec.id.clone().unwrap_or_else(|| format!("state-{i:06}"));
                let family = rec.family.clone().unwrap_or_else(|| "custom".into());
                let rho = rec.to_state()?.density();
                let rank = rho.rank(RANK_TOL)?;
                let part = PartitionSpec::star(nodal, rho.num_subsystems());
                let rows = verify(&id, &rho, &part, measures, settings)?
                    .into_iter()
                    .map(|record| ReportRow {
                        family: family.clone(),
                        rank,
                        measurement_class: measurement_class(record.measure).map(str::to_string),
                        record,
                    })
                    .collect();
                Ok((id, rows))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    scored.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(scored.into_iter().flat_map(|(_, rows)| rows).collect())
}

pub fn measurement_class(kind: MeasureKind) -> Option<&'static str> {
    match kind {
        MeasureKind::MeasuredMutualInformation | MeasureKind::Discord => {
            Some("rank-1 projective measurement on the nodal qubit")
        }
        MeasureKind::WorkDeficit => Some(
            "projective dephasing of the nodal qubit only; an upper bound on the unrestricted work-deficit",
        ),
        _ => None,
    }
}

pub fn run_campaign(cfg: &CampaignConfig) -> Result<Vec<ReportRow>> {
    let states = generate_states(cfg)?;
    score_states(
        &states,
        &cfg.measures,
        cfg.nodal,
        &cfg.settings,
        cfg.workers,
    )
}

/// 17 significant digits; parses back to the identical `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub const FIXED_COLUMNS_HEAD: [&str; 5] = ["state_id", "family", "rank", "measure", "q_whole"];
pub const FIXED_COLUMNS_TAIL: [&str; 12] = [
    "delta",
    "entropy_a",
    "purity_a",
    "x0",
    "b0",
    "bound_trivial",
    "bound_improved",
    "bound_entropy",
    "pass_entropy",
    "pass_improved",
    "pass_x0",
    "",
];

pub fn csv_header(max_m: usize) -> Vec<String> {
    let mut h: Vec<String> = FIXED_COLUMNS_HEAD.iter().map(|s| s.to_string()).collect();
    h.extend((1..=max_m).map(|k| format!("q_pair_{k}")));
    h.extend(
        FIXED_COLUMNS_TAIL
            .iter()
            .filter(|s| !s.is_empty())
            .map(|s| s.to_string()),
    );
    h
}

pub fn write_records_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let max_m = rows.iter().map(|r| r.record.m()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(max_m))?;
    for row in rows {
        let r = &row.record;
        let mut fields = vec![
            r.state_id.clone(),
            row.family.clone(),
            row.rank.to_string(),
            r.measure.name().to_string(),
            fmt_float(r.q_whole),
        ];
        for k in 0..max_m {
            fields.push(r.q_pairs.get(k).map(|&q| fmt_float(q)).unwrap_or_default());
        }
        fields.extend([
            fmt_float(r.delta),
            fmt_float(r.entropy_a),
            fmt_float(r.purity_a),
            fmt_float(r.x0),
            fmt_float(r.b0),
            fmt_float(r.bound_trivial),
            fmt_float(r.bound_improved),
            fmt_float(r.bound_entropy),
            r.flags.pass_entropy.to_string(),
            r.flags.pass_improved.to_string(),
            r.flags.pass_x0.to_string(),
        ]);
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

pub fn records_csv_string(rows: &[ReportRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_records_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureCounts {
    pub pass_entropy: usize,
    pub pass_improved: usize,
    pub pass_x0: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSummary {
    pub records: usize,
    pub failures: FailureCounts,
    pub min_delta_plus_entropy: f64,
    pub max_x0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub states: usize,
    pub records: usize,
    pub failures: FailureCounts,
    pub all_passed: bool,
    pub per_measure: BTreeMap<String, MeasureSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub summary: ReportSummary,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn new(rows: Vec<ReportRow>) -> Self {
        let mut failures = FailureCounts::default();
        let mut per_measure: BTreeMap<String, MeasureSummary> = BTreeMap::new();
        let mut ids: Vec<&str> = Vec::new();
        for row in &rows {
            let r = &row.record;
            if ids.last() != Some(&r.state_id.as_str()) {
                ids.push(&r.state_id);
            }
            let entry = per_measure
                .entry(r.measure.name().to_string())
                .or_insert_with(|| MeasureSummary {
                    records: 0,
                    failures: FailureCounts::default(),
                    min_delta_plus_entropy: f64::INFINITY,
                    max_x0: f64::NEG_INFINITY,
                });
            entry.records += 1;
            entry.min_delta_plus_entropy = entry.min_delta_plus_entropy.min(r.delta + r.entropy_a);
            entry.max_x0 = entry.max_x0.max(r.x0);
            for counts in [&mut failures, &mut entry.failures] {
                counts.pass_entropy += usize::from(!r.flags.pass_entropy);
                counts.pass_improved += usize::from(!r.flags.pass_improved);
                counts.pass_x0 += usize::from(!r.flags.pass_x0);
            }
        }
        ids.dedup();
        let all_passed = rows.iter().all(|r| r.record.flags.all());
        Self {
            summary: ReportSummary {
                states: ids.len(),
                records: rows.len(),
                failures,
                all_passed,
                per_measure,
            },
            rows,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

type ColumnFn = Box<dyn Fn(&[String]) -> Result<f64>>;

/// A records CSV loaded back for post-processing.
#[derive(Clone, Debug)]
pub struct RecordTable {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl RecordTable {
    pub fn read(path: &Path) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn from_reader<R: std::io::Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.iter().map(str::to_string).collect();
        let rows = rdr
            .records()
            .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<Result<_, _>>()?;
        Ok(Self { headers, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    /// Numeric column values, optionally restricted to one measure. Besides the stored
    /// columns this understands `neg_entropy` (`-entropy_a`) and `delta+entropy_a`.
    pub fn values(&self, column: &str, measure: Option<MeasureKind>) -> Result<Vec<f64>> {
        let measure_idx = self.index("measure").ok();
        let keep = |row: &Vec<String>| match (measure, measure_idx) {
            (Some(m), Some(i)) => row[i].parse::<MeasureKind>().ok() == Some(m),
            (Some(_), None) => false,
            (None, _) => true,
        };
        let derived: ColumnFn = match column {
            "neg_entropy" | "-entropy_a" => {
                let i = self.index("entropy_a")?;
                Box::new(move |row| Ok(-parse_f64(&row[i])?))
            }
            "delta+entropy_a" | "delta_plus_entropy_a" => {
                let d = self.index("delta")?;
                let s = self.index("entropy_a")?;
                Box::new(move |row| Ok(parse_f64(&row[d])? + parse_f64(&row[s])?))
            }
            other => {
                let i = self.index(other)?;
                Box::new(move |row| parse_f64(&row[i]))
            }
        };
        self.rows
            .iter()
            .filter(|r| keep(r))
            .map(|r| derived(r))
            .collect()
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("not a number: `{s}`")))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HistogramSpec {
    pub column: String,
    pub bins: usize,
    /// `None` spans the data.
    pub range: Option<(f64, f64)>,
}

impl HistogramSpec {
    pub fn apply(
        &self,
        table: &RecordTable,
        measure: Option<MeasureKind>,
    ) -> Result<Vec<HistogramBin>> {
        histogram(&table.values(&self.column, measure)?, self.bins, self.range)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub frequency: usize,
}

/// Equal-width bins, left-closed except the last, which also includes its right edge.
pub fn histogram(
    values: &[f64],
    bins: usize,
    range: Option<(f64, f64)>,
) -> Result<Vec<HistogramBin>> {
    if bins == 0 {
        return Err(Error::InvalidConfig("bin count must be >= 1".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig(
            "histogram input contains non-finite values".into(),
        ));
    }
    let (lo, hi) = match range {
        Some((lo, hi)) => {
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                return Err(Error::InvalidConfig(format!(
                    "empty histogram range [{lo}, {hi}]"
                )));
            }
            if let Some(v) = values.iter().find(|&&v| v < lo || v > hi) {
                return Err(Error::InvalidConfig(format!(
                    "value {v} outside histogram range [{lo}, {hi}]"
                )));
            }
            (lo, hi)
        }
        None if values.is_empty() => (0.0, 1.0),
        None => {
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if lo == hi {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        }
    };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = (((v - lo) / width).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(k, frequency)| HistogramBin {
            left: lo + k as f64 * width,
            right: if k + 1 == bins {
                hi
            } else {
                lo + (k + 1) as f64 * width
            },
            frequency,
        })
        .collect())
}

pub fn write_histogram_csv<W: Write>(bins: &[HistogramBin], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_left", "bin_right", "frequency"])?;
    for b in bins {
        w.write_record([
            fmt_float(b.left),
            fmt_float(b.right),
            b.frequency.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn scatter_export(
    table: &RecordTable,
    x: &str,
    y: &str,
    measure: Option<MeasureKind>,
) -> Result<Vec<(f64, f64)>> {
    let xs = table.values(x, measure)?;
    let ys = table.values(y, measure)?;
    Ok(xs.into_iter().zip(ys).collect())
}

pub fn write_scatter_csv<W: Write>(points: &[(f64, f64)], x: &str, y: &str, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([x, y])?;
    for &(a, b) in points {
        w.write_record([fmt_float(a), fmt_float(b)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalyticFamily {
    Ghzw,
    Ghz,
    W,
    Dicke,
}

impl FromStr for AnalyticFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "ghzw" | "ghz-w" => Self::Ghzw,
            "ghz" => Self::Ghz,
            "w" => Self::W,
            "dicke" => Self::Dicke,
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "unknown analytic family `{s}`"
                )))
            }
        })
    }
}

impl AnalyticFamily {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ghzw => "ghzw",
            Self::Ghz => "ghz",
            Self::W => "w",
            Self::Dicke => "dicke",
        }
    }
}

/// Parameter sweep: `name=start:stop:count` or `name=value`, comma separated.
/// Names are `alpha2`, `gamma2` (squared moduli) and `r`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Sweep {
    axes: BTreeMap<String, Vec<f64>>,
}

impl FromStr for Sweep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut axes = BTreeMap::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, spec) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("bad sweep term `{part}`")))?;
            let nums: Vec<f64> = spec.split(':').map(parse_f64).collect::<Result<_>>()?;
            let values = match nums.as_slice() {
                [v] => vec![*v],
                [a, b, n] if *n >= 1.0 && n.fract() == 0.0 => {
                    let n = *n as usize;
                    if n == 1 {
                        vec![*a]
                    } else {
                        (0..n)
                            .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
                            .collect()
                    }
                }
                _ => return Err(Error::InvalidConfig(format!("bad sweep range `{spec}`"))),
            };
            axes.insert(name.trim().to_string(), values);
        }
        Ok(Self { axes })
    }
}

impl Sweep {
    fn get(&self, name: &str) -> Option<&[f64]> {
        self.axes.get(name).map(Vec::as_slice)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticRow {
    pub family: String,
    pub n: usize,
    pub alpha2: Option<f64>,
    pub beta2: Option<f64>,
    pub gamma2: Option<f64>,
    pub r: Option<usize>,
    /// Largest eigenvalue of the single-qubit reduction, closed form.
    pub e: f64,
    pub h_e: f64,
    /// `-(n-2) h(e)`
    pub entropy_bound: f64,
    /// Same eigenvalue from a numeric reduction of the state vector.
    pub e_numeric: f64,
    /// Largest entrywise gap between the closed-form and numeric reduced matrices.
    pub max_abs_diff: f64,
}

fn ghzw_row(family: AnalyticFamily, n: usize, a2: f64, b2: f64, g2: f64) -> Result<AnalyticRow> {
    let p = GhzwParams::real(n, a2.sqrt(), b2.max(0.0).sqrt(), g2.sqrt())?;
    let e = largest_eig_analytic(&p)?;
    let h_e = binary_entropy(e.min(1.0))?;
    let analytic = reduced_qubit_analytic(&p)?;
    let numeric = ghz_w(&p)?.reduced(&[0])?;
    Ok(AnalyticRow {
        family: family.name().into(),
        n,
        alpha2: Some(a2),
        beta2: Some(b2.max(0.0)),
        gamma2: Some(g2),
        r: None,
        e,
        h_e,
        entropy_bound: -(n as f64 - 2.0) * h_e,
        e_numeric: numeric.spectrum()?.largest(),
        max_abs_diff: analytic.matrix().max_abs_diff(numeric.matrix()),
    })
}

pub fn analytic_table(family: AnalyticFamily, n: usize, sweep: &Sweep) -> Result<Vec<AnalyticRow>> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("n must be >= 3, got {n}")));
    }
    let default_grid = |k: usize| {
        (0..k)
            .map(|i| i as f64 / (k - 1) as f64)
            .collect::<Vec<_>>()
    };
    let mut rows = Vec::new();
    match family {
        AnalyticFamily::Ghz => {
            let alphas = sweep
                .get("alpha2")
                .map(<[f64]>::to_vec)
                .unwrap_or_else(|| default_grid(11));
            for a2 in alphas {
                check_unit(a2, "alpha2")?;
                rows.push(ghzw_row(family, n, a2, 1.0 - a2, 0.0)?);
            }
        }
        AnalyticFamily::W => rows.push(ghzw_row(family, n, 0.0, 0.0, 1.0)?),
        AnalyticFamily::Ghzw => {
            let alphas = sweep
                .get("alpha2")
                .map(<[f64]>::to_vec)
                .unwrap_or_else(|| default_grid(6));
            let gammas = sweep
                .get("gamma2")
                .map(<[f64]>::to_vec)
                .unwrap_or_else(|| default_grid(6));
            for &a2 in &alphas {
                check_unit(a2, "alpha2")?;
                for &g2 in &gammas {
                    check_unit(g2, "gamma2")?;
                    let b2 = 1.0 - a2 - g2;
                    if b2 < -1e-12 {
                        continue;
                    }
                    rows.push(ghzw_row(family, n, a2, b2, g2)?);
                }
            }
        }
        AnalyticFamily::Dicke => {
            let rs: Vec<usize> = match sweep.get("r") {
                Some(v) => v.iter().map(|&x| x.round() as usize).collect(),
                None => (1..n).collect(),
            };
            for r in rs {
                let psi = dicke(n, r)?;
                let reduced = psi.reduced(&[0])?;
                let e = r.max(n - r) as f64 / n as f64;
                let h_e = binary_entropy(e)?;
                let exact = crate::tensor::ComplexMatrix::from_real_diagonal(&[
                    (n - r) as f64 / n as f64,
                    r as f64 / n as f64,
                ]);
                rows.push(AnalyticRow {
                    family: family.name().into(),
                    n,
                    alpha2: None,
                    beta2: None,
                    gamma2: None,
                    r: Some(r),
                    e,
                    h_e,
                    entropy_bound: -(n as f64 - 2.0) * h_e,
                    e_numeric: reduced.spectrum()?.largest(),
                    max_abs_diff: exact.max_abs_diff(reduced.matrix()),
                });
            }
        }
    }
    Ok(rows)
}

fn check_unit(x: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!(
            "{name} = {x} outside [0, 1]"
        )));
    }
    Ok(())
}

pub fn write_analytic_csv<W: Write>(rows: &[AnalyticRow], out: W) -> Result<()> {
    let opt = |x: Option<f64>| x.map(fmt_float).unwrap_or_default();
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "family",
        "n",
        "alpha2",
        "beta2",
        "gamma2",
        "r",
        "e",
        "h_e",
        "entropy_bound",
        "e_numeric",
        "max_abs_diff",
    ])?;
    for row in rows {
        w.write_record([
            row.family.clone(),
            row.n.to_string(),
            opt(row.alpha2),
            opt(row.beta2),
            opt(row.gamma2),
            row.r.map(|r| r.to_string()).unwrap_or_default(),
            fmt_float(row.e),
            fmt_float(row.h_e),
            fmt_float(row.entropy_bound),
            fmt_float(row.e_numeric),
            fmt_float(row.max_abs_diff),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bins_of(values: &[f64], n: usize, range: Option<(f64, f64)>) -> Vec<usize> {
        histogram(values, n, range)
            .unwrap()
            .iter()
            .map(|b| b.frequency)
            .collect()
    }

    #[test]
    fn histogram_examples() {
        assert_eq!(
            bins_of(&[0.0, 0.0, 1.0, 1.0], 2, Some((0.0, 1.0))),
            vec![2, 2]
        );
        assert_eq!(bins_of(&[0.3], 1, None), vec![1]);
        assert!(histogram(&[2.0], 2, Some((0.0, 1.0))).is_err());
        assert!(histogram(&[1.0], 0, None).is_err());
        assert!(histogram(&[f64::NAN], 3, None).is_err());
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02e23, 0.0, -0.0, 2.0 / 3.0] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn state_ids_sort_by_index() {
        let ids: Vec<String> = [0, 9, 10, 999_999]
            .iter()
            .map(|&i| state_id(Family::HaarPure, i, 1_000_000))
            .collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
        assert_eq!(state_id(Family::Ghz, 3, 10), "ghz-000003");
        assert!(state_id(Family::W, 5, 10_000_001).ends_with("00000005"));
    }

    #[test]
    fn sweep_parsing() {
        let s: Sweep = "alpha2=0:1:5, gamma2=0.25".parse().unwrap();
        assert_eq!(s.get("alpha2").unwrap(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(s.get("gamma2").unwrap(), &[0.25]);
        assert!("alpha2".parse::<Sweep>().is_err());
        assert!("alpha2=0:1".parse::<Sweep>().is_err());
    }

    #[test]
    fn ghz_table_balanced_point() {
        let sweep: Sweep = "alpha2=0.5".parse().unwrap();
        let rows = analytic_table(AnalyticFamily::Ghz, 6, &sweep).unwrap();
        assert_eq!(rows.len(), 1);
        assert_abs_diff_eq!(rows[0].h_e, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rows[0].entropy_bound, -4.0, epsilon = 1e-12);
    }

    #[test]
    fn w_table_ten_qubits() {
        let rows = analytic_table(AnalyticFamily::W, 10, &Sweep::default()).unwrap();
        assert_abs_diff_eq!(rows[0].e, 0.9, epsilon = 1e-12);
        let h = binary_entropy(0.1).unwrap();
        assert_abs_diff_eq!(rows[0].entropy_bound, -8.0 * h, epsilon = 1e-12);
        assert_abs_diff_eq!(rows[0].e_numeric, 0.9, epsilon = 1e-12);
    }

    #[test]
    fn dicke_half_filling_is_weak() {
        let rows = analytic_table(AnalyticFamily::Dicke, 6, &"r=3".parse().unwrap()).unwrap();
        assert_abs_diff_eq!(rows[0].h_e, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rows[0].entropy_bound, -4.0, epsilon = 1e-12);
    }

    #[test]
    fn ghzw_table_consistency() {
        let rows = analytic_table(AnalyticFamily::Ghzw, 5, &Sweep::default()).unwrap();
        assert_eq!(rows.len(), 21);
        for r in rows {
            assert!(r.max_abs_diff < 1e-12);
            assert_abs_diff_eq!(r.e, r.e_numeric, epsilon = 1e-10);
        }
    }

    fn score(states: &[StateRecord], measures: &[MeasureKind], workers: usize) -> Vec<ReportRow> {
        score_states(states, measures, 0, &MeasureSettings::default(), workers).unwrap()
    }

    fn labelled(state: QuantumState, id: &str) -> StateRecord {
        StateRecord::from_state(&state).with_labels(id, "custom")
    }

    #[test]
    fn ghz_campaign_matches_closed_forms() {
        let mut cfg = CampaignConfig::new(Family::Ghz, 3, 1, 0);
        cfg.measures = vec![
            MeasureKind::Discord,
            MeasureKind::Negativity,
            MeasureKind::MutualInformation,
            MeasureKind::Tangle,
        ];
        let rows = run_campaign(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        // (q_whole, q_pair) after normalization
        let expected = [(1.0, 0.0), (0.5, 0.0), (1.0, 0.5), (1.0, 0.0)];
        for (row, (whole, pair)) in rows.iter().zip(expected) {
            let r = &row.record;
            assert_eq!(row.rank, 1);
            assert_abs_diff_eq!(r.q_whole, whole, epsilon = 1e-9);
            for &q in &r.q_pairs {
                assert_abs_diff_eq!(q, pair, epsilon = 1e-9);
            }
            assert_abs_diff_eq!(r.entropy_a, 1.0, epsilon = 1e-12);
            assert!(r.flags.all(), "{:?}", r.measure);
        }
    }

    #[test]
    fn csv_is_deterministic_across_runs_and_workers() {
        let mut cfg = CampaignConfig::new(Family::HaarRank2, 3, 6, 99);
        cfg.workers = 1;
        let a = records_csv_string(&run_campaign(&cfg).unwrap()).unwrap();
        let b = records_csv_string(&run_campaign(&cfg).unwrap()).unwrap();
        cfg.workers = 3;
        let c = records_csv_string(&run_campaign(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.lines().count(), 1 + 6 * MeasureKind::HISTOGRAM_SET.len());
        assert_eq!(a.lines().next().unwrap(), csv_header(2).join(","));
    }

    #[test]
    fn rows_sorted_by_state_id() {
        let states: Vec<StateRecord> = ["c", "a", "b"]
            .iter()
            .map(|id| {
                labelled(
                    QuantumState::Pure(crate::states::PureState::zero_qubits(3)),
                    id,
                )
            })
            .collect();
        let rows = score(&states, &[MeasureKind::Negativity, MeasureKind::Tangle], 2);
        let ids: Vec<&str> = rows.iter().map(|r| r.record.state_id.as_str()).collect();
        assert_eq!(ids, ["a", "a", "b", "b", "c", "c"]);
    }

    #[test]
    fn haar_discord_never_fails_entropy_bound() {
        let mut cfg = CampaignConfig::new(Family::HaarPure, 3, 1_000, 3);
        cfg.measures = vec![MeasureKind::Discord];
        let rows = run_campaign(&cfg).unwrap();
        assert_eq!(rows.len(), 1_000);
        assert!(rows.iter().all(|r| r.record.flags.pass_entropy));
        let csv = records_csv_string(&rows).unwrap();
        let table = RecordTable::from_reader(csv.as_bytes()).unwrap();
        let h = histogram(&table.values("delta+entropy_a", None).unwrap(), 20, None).unwrap();
        assert!(h[0].left >= 0.0);
        assert_eq!(h.iter().map(|b| b.frequency).sum::<usize>(), 1_000);
    }

    #[test]
    fn scatter_examples_with_tangle() {
        let w = GhzwParams::w(3).unwrap();
        let states = vec![
            labelled(
                QuantumState::Pure(ghz_w(&GhzwParams::ghz(3).unwrap()).unwrap()),
                "1-ghz",
            ),
            labelled(
                QuantumState::Pure(crate::states::PureState::zero_qubits(3)),
                "2-zero",
            ),
            labelled(QuantumState::Pure(ghz_w(&w).unwrap()), "3-w"),
        ];
        let csv = records_csv_string(&score(&states, &[MeasureKind::Tangle], 1)).unwrap();
        let table = RecordTable::from_reader(csv.as_bytes()).unwrap();
        let pts =
            scatter_export(&table, "delta", "neg_entropy", Some(MeasureKind::Tangle)).unwrap();
        let h_third = binary_entropy(1.0 / 3.0).unwrap();
        let expected = [(1.0, -1.0), (0.0, 0.0), (0.0, -h_third)];
        for (&(x, y), (ex, ey)) in pts.iter().zip(expected) {
            assert_abs_diff_eq!(x, ex, epsilon = 1e-9);
            assert_abs_diff_eq!(y, ey, epsilon = 1e-9);
            assert!(x >= y - 1e-9);
        }
        assert!(matches!(
            scatter_export(&table, "delta", "nope", None),
            Err(Error::UnknownColumn(_))
        ));
    }

    #[test]
    fn report_json_round_trips() {
        let states = vec![labelled(
            QuantumState::Mixed(haar_rank2(3, SeedSpec::new(1, 2)).unwrap()),
            "s",
        )];
        let report = Report::new(score(&states, &MeasureKind::HISTOGRAM_SET, 1));
        let back: Report = serde_json::from_str(&report.to_json().unwrap()).unwrap();
        assert_eq!(back, report);
        assert_eq!(report.summary.states, 1);
        assert_eq!(report.summary.records, 6);
        assert_eq!(report.summary.per_measure.len(), 6);
    }

    #[test]
    fn config_validation() {
        let mut cfg = CampaignConfig::new(Family::Ghz, 3, 1, 0);
        assert!(cfg.validate().is_ok());
        cfg.count = 0;
        assert!(cfg.validate().is_err());
        cfg.count = 1;
        cfg.nodal = 3;
        assert!(cfg.validate().is_err());
        cfg.nodal = 0;
        cfg.n_qubits = 2;
        assert!(cfg.validate().is_err());
    }
}
