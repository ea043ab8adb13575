//! Parallel sweeps with a single ordered CSV writer.
//!
//! File layout: a `#schema=...` line, a header, then one row per `(n, trial)`
//! cell sorted by `n` then trial. Numbers are written with 17 significant
//! digits so a parse/re-serialize cycle is byte-exact.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::sync::mpsc;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::trial::{cell_seed, metric_columns, run_trial, PhaseTimings, TrialRecord};
use crate::error::{Error, Result};
use crate::panel::io::format_f64;

/// First line of every trial CSV.
pub const SCHEMA_LINE: &str = "#schema=panel-svd-trials/1";

const LEADING: [&str; 7] = ["n", "m", "trial", "seed", "status", "selected_rank_0", "selected_rank_1"];

/// Column names for `metrics`, framed by the fixed leading columns and the
/// trailing `error` column.
pub fn csv_header(metrics: &[String]) -> Vec<String> {
    LEADING
        .iter()
        .map(|s| s.to_string())
        .chain(metrics.iter().cloned())
        .chain(std::iter::once("error".to_string()))
        .collect()
}

/// A parsed (or freshly produced) trial table.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialTable {
    pub metric_columns: Vec<String>,
    pub records: Vec<TrialRecord>,
}

impl TrialTable {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.is_ok()).count()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = TrialWriter::new(out, &self.metric_columns)?;
        for rec in &self.records {
            writer.write(rec)?;
        }
        writer.finish()
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(buf)
    }

    pub fn from_csv_reader<R: Read>(mut input: R) -> Result<Self> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        Self::from_csv_str(&text)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let (first, body) = text.split_once('\n').unwrap_or((text, ""));
        if first.trim_end_matches('\r') != SCHEMA_LINE {
            return Err(Error::Parse(format!("expected `{SCHEMA_LINE}` on line 1, found `{first}`")));
        }
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
        let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let k = LEADING.len();
        if header.len() < k + 1 || header[..k] != LEADING || header.last().map(String::as_str) != Some("error") {
            return Err(Error::Parse(format!("unexpected header {header:?}")));
        }
        let metric_columns = header[k..header.len() - 1].to_vec();
        let mut records = Vec::new();
        for (line, row) in reader.records().enumerate() {
            let row = row?;
            records.push(parse_row(&row, &metric_columns).map_err(|e| Error::Parse(format!("row {}: {e}", line + 1)))?);
        }
        Ok(Self { metric_columns, records })
    }

    pub fn from_csv_file(path: &Path) -> Result<Self> {
        Self::from_csv_reader(File::open(path)?)
    }
}

fn parse_field<T: std::str::FromStr>(field: &str, name: &str) -> std::result::Result<T, String> {
    field.parse().map_err(|_| format!("column {name}: cannot parse `{field}`"))
}

fn parse_row(row: &csv::StringRecord, metric_columns: &[String]) -> std::result::Result<TrialRecord, String> {
    let get = |i: usize| row.get(i).unwrap_or("");
    let n: usize = parse_field(get(0), "n")?;
    let m: usize = parse_field(get(1), "m")?;
    let trial: usize = parse_field(get(2), "trial")?;
    let seed: u64 = parse_field(get(3), "seed")?;
    let status = get(4);
    let error_idx = LEADING.len() + metric_columns.len();
    match status {
        "ok" => {
            let ranks = (parse_field(get(5), "selected_rank_0")?, parse_field(get(6), "selected_rank_1")?);
            let metrics = metric_columns
                .iter()
                .enumerate()
                .map(|(j, name)| Ok((name.clone(), parse_field::<f64>(get(LEADING.len() + j), name)?)))
                .collect::<std::result::Result<Vec<_>, String>>()?;
            Ok(TrialRecord {
                n,
                m,
                trial,
                seed,
                selected_ranks: Some(ranks),
                metrics,
                error: None,
                timings: PhaseTimings::default(),
            })
        }
        "error" => Ok(TrialRecord::failed(n, m, trial, seed, get(error_idx).to_string())),
        other => Err(format!("unknown status `{other}`")),
    }
}

/// Streams records to CSV in the order given; the caller is responsible for
/// ordering.
pub struct TrialWriter<W: Write> {
    csv: csv::Writer<W>,
    width: usize,
}

impl<W: Write> TrialWriter<W> {
    pub fn new(mut out: W, metric_columns: &[String]) -> Result<Self> {
        writeln!(out, "{SCHEMA_LINE}")?;
        let mut csv = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let header = csv_header(metric_columns);
        csv.write_record(&header)?;
        csv.flush()?;
        Ok(Self {
            csv,
            width: header.len(),
        })
    }

    pub fn write(&mut self, rec: &TrialRecord) -> Result<()> {
        let mut fields = vec![rec.n.to_string(), rec.m.to_string(), rec.trial.to_string(), rec.seed.to_string()];
        match (&rec.error, rec.selected_ranks) {
            (None, Some((s0, s1))) => {
                fields.push("ok".into());
                fields.push(s0.to_string());
                fields.push(s1.to_string());
                fields.extend(rec.metrics.iter().map(|&(_, v)| format_f64(v)));
                fields.push(String::new());
            }
            (error, _) => {
                fields.push("error".into());
                fields.resize(self.width - 1, String::new());
                fields.push(error.clone().unwrap_or_else(|| "missing ranks".into()));
            }
        }
        if fields.len() != self.width {
            return Err(Error::validation(format!(
                "record (n={}, trial={}) has {} fields, header has {}",
                rec.n,
                rec.trial,
                fields.len(),
                self.width
            )));
        }
        self.csv.write_record(&fields)?;
        self.csv.flush()?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.csv.flush()?;
        Ok(())
    }
}

/// Per-phase timing sidecar, kept out of the main CSV so replays compare
/// byte-for-byte.
pub fn write_timings_row<W: Write + ?Sized>(out: &mut W, rec: &TrialRecord) -> Result<()> {
    let t = rec.timings;
    writeln!(
        out,
        "{},{},{},{:.6},{:.6},{:.6}",
        rec.n, rec.m, rec.trial, t.generate, t.estimate, t.diagnose
    )?;
    Ok(())
}

pub const TIMINGS_HEADER: &str = "n,m,trial,generate_s,estimate_s,diagnose_s";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepOptions {
    /// Worker threads; `None` uses every hardware thread.
    pub threads: Option<usize>,
}

/// All `(n, trial)` cells in output order.
pub fn sweep_cells(config: &ExperimentConfig) -> Vec<(usize, usize)> {
    config
        .dimensions
        .n
        .iter()
        .flat_map(|&n| (0..config.replications).map(move |t| (n, t)))
        .collect()
}

/// Fails if two cells would share a derived seed.
pub fn audit_seeds(config: &ExperimentConfig) -> Result<()> {
    let mut seen: HashMap<u64, (usize, usize)> = HashMap::new();
    for (n, t) in sweep_cells(config) {
        let seed = cell_seed(config.base_seed, n, t);
        if let Some((n0, t0)) = seen.insert(seed, (n, t)) {
            return Err(Error::Config(format!(
                "seed collision: cells (n={n0}, trial={t0}) and (n={n}, trial={t}) both derive {seed}"
            )));
        }
    }
    Ok(())
}

/// Runs every cell and streams rows to `out` in `(n, trial)` order as soon as
/// each prefix is complete. Failed cells become `status = error` rows; the
/// sweep continues.
pub fn run_sweep<W: Write>(
    config: &ExperimentConfig,
    out: W,
    mut timings: Option<&mut dyn Write>,
    options: SweepOptions,
) -> Result<TrialTable> {
    config.validate()?;
    audit_seeds(config)?;
    let columns = metric_columns(config);
    let cells = sweep_cells(config);
    let mut writer = TrialWriter::new(out, &columns)?;
    if let Some(t) = timings.as_deref_mut() {
        writeln!(t, "{TIMINGS_HEADER}")?;
    }

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = options.threads {
        builder = builder.num_threads(k.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let (tx, rx) = mpsc::channel::<(usize, TrialRecord)>();
    let mut records = Vec::with_capacity(cells.len());
    let mut write_result: Result<()> = Ok(());
    std::thread::scope(|scope| {
        let cells_ref = &cells;
        scope.spawn(move || {
            pool.install(|| {
                cells_ref.par_iter().enumerate().for_each_with(tx, |tx, (idx, &(n, t))| {
                    let rec = run_trial(config, n, t).unwrap_or_else(|e| {
                        TrialRecord::failed(n, config.m_for(n), t, cell_seed(config.base_seed, n, t), e.to_string())
                    });
                    // The receiver only disappears if writing failed; nothing to do then.
                    let _ = tx.send((idx, rec));
                });
            });
        });

        let mut pending: BTreeMap<usize, TrialRecord> = BTreeMap::new();
        let mut next = 0;
        for (idx, rec) in rx {
            pending.insert(idx, rec);
            while let Some(rec) = pending.remove(&next) {
                if write_result.is_ok() {
                    write_result = writer.write(&rec).and_then(|_| match timings.as_deref_mut() {
                        Some(t) => write_timings_row(t, &rec),
                        None => Ok(()),
                    });
                }
                records.push(rec);
                next += 1;
            }
        }
    });
    write_result?;
    writer.finish()?;
    Ok(TrialTable {
        metric_columns: columns,
        records,
    })
}

/// [`run_sweep`] into a file; timings go to `<path>.timings.csv` when the
/// config asks for them.
pub fn run_sweep_to_path(config: &ExperimentConfig, path: &Path, options: SweepOptions) -> Result<TrialTable> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let out = BufWriter::new(File::create(path)?);
    if config.output.timings {
        let mut sidecar = path.as_os_str().to_owned();
        sidecar.push(".timings.csv");
        let mut t = BufWriter::new(File::create(sidecar)?);
        let table = run_sweep(config, out, Some(&mut t), options)?;
        t.flush()?;
        Ok(table)
    } else {
        run_sweep(config, out, None, options)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::preset;

    fn small(ns: Vec<usize>, reps: usize) -> ExperimentConfig {
        let mut c = preset("row-homogeneous").unwrap();
        c.dimensions.n = ns;
        c.replications = reps;
        c
    }

    #[test]
    fn single_cell_single_row() {
        let c = small(vec![20], 1);
        let mut buf = Vec::new();
        let table = run_sweep(&c, &mut buf, None, SweepOptions::default()).unwrap();
        assert_eq!(table.records.len(), 1);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with(SCHEMA_LINE));
    }

    #[test]
    fn seeds_distinct_and_rows_ordered() {
        let c = small(vec![10, 14, 18], 20);
        let mut buf = Vec::new();
        let table = run_sweep(&c, &mut buf, None, SweepOptions { threads: Some(3) }).unwrap();
        assert_eq!(table.records.len(), 60);
        let mut seeds: Vec<u64> = table.records.iter().map(|r| r.seed).collect();
        let order: Vec<(usize, usize)> = table.records.iter().map(|r| (r.n, r.trial)).collect();
        assert_eq!(order, sweep_cells(&c));
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 60);
    }

    #[test]
    fn round_trip_is_byte_exact() {
        let c = small(vec![12, 16], 3);
        let mut buf = Vec::new();
        run_sweep(&c, &mut buf, None, SweepOptions { threads: Some(2) }).unwrap();
        let table = TrialTable::from_csv_str(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(table.to_csv_bytes().unwrap(), buf);
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let c = small(vec![12, 16], 4);
        let mut one = Vec::new();
        let mut four = Vec::new();
        run_sweep(&c, &mut one, None, SweepOptions { threads: Some(1) }).unwrap();
        run_sweep(&c, &mut four, None, SweepOptions { threads: Some(4) }).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn failed_cells_become_error_rows() {
        let mut c = small(vec![12], 2);
        c.signal.snr_multiplier = Some(120.0);
        let mut buf = Vec::new();
        let table = run_sweep(&c, &mut buf, None, SweepOptions::default()).unwrap();
        assert_eq!(table.failures(), 2);
        let parsed = TrialTable::from_csv_str(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(parsed.records[0].error, table.records[0].error);
        assert_eq!(parsed.to_csv_bytes().unwrap(), buf);
    }

    #[test]
    fn rejects_foreign_files() {
        assert!(TrialTable::from_csv_str("n,m\n1,2\n").is_err());
        let bad = format!("{SCHEMA_LINE}\nn,m,trial,seed,status,selected_rank_0,selected_rank_1,x,error\n1,1,0,5,maybe,,,,\n");
        assert!(TrialTable::from_csv_str(&bad).is_err());
    }
}
