//! TOP500-style benchmark snapshot files.
//!
//! Input is UTF-8 CSV with a header row. Mandatory columns:
//! `name, epoch, workload, cores_total, cores_used, rpeak_flops, rmax_flops`;
//! optional: `clock_hz, perf_ratio`. Column order is free and header names
//! are matched case-insensitively.
//!
//! `rpeak_flops` is the peak of the partition actually used (`cores_used`
//! cores). For HPCG rows run on a fraction of the machine, the derived
//! record carries a corrected efficiency rescaled to the full machine:
//! `(rmax / rpeak) · (cores_total / cores_used)`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{alpha_from_efficiency, AlphaEstimate};
use crate::precision::DualPrecisionMeasurement;

pub const MANDATORY_COLUMNS: [&str; 7] = [
    "name",
    "epoch",
    "workload",
    "cores_total",
    "cores_used",
    "rpeak_flops",
    "rmax_flops",
];
pub const OPTIONAL_COLUMNS: [&str; 2] = ["clock_hz", "perf_ratio"];

/// List edition, year and month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Epoch {
    pub year: u16,
    pub month: u8,
}

impl Epoch {
    pub fn new(year: u16, month: u8) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidParameter(format!(
                "month {month} out of range"
            )));
        }
        Ok(Self { year, month })
    }
}

impl fmt::Display for Epoch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for Epoch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("epoch '{s}' is not YYYY-MM"));
        let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
        let year = y.parse().map_err(|_| bad())?;
        let month = m.parse().map_err(|_| bad())?;
        Epoch::new(year, month).map_err(|_| bad())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Workload {
    Hpl,
    Hpcg,
    HplAi,
    Fp0,
    Other(String),
}

impl fmt::Display for Workload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Workload::Hpl => f.write_str("HPL"),
            Workload::Hpcg => f.write_str("HPCG"),
            Workload::HplAi => f.write_str("HPL-AI"),
            Workload::Fp0 => f.write_str("FP0"),
            Workload::Other(s) => f.write_str(s),
        }
    }
}

impl FromStr for Workload {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.is_empty() {
            return Err(Error::InvalidParameter("empty workload".into()));
        }
        Ok(match t.to_ascii_uppercase().as_str() {
            "HPL" => Workload::Hpl,
            "HPCG" => Workload::Hpcg,
            "HPL-AI" | "HPL_AI" | "HPLAI" | "HPL-MXP" => Workload::HplAi,
            "FP0" => Workload::Fp0,
            _ => Workload::Other(t.to_string()),
        })
    }
}

/// One published benchmark result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemSnapshot {
    pub name: String,
    pub epoch: Epoch,
    pub workload: Workload,
    pub cores_total: u64,
    pub cores_used: u64,
    /// Peak of the `cores_used` partition, flop/s.
    pub r_peak: f64,
    pub r_max: f64,
    pub clock_hz: Option<f64>,
    pub perf_ratio: Option<f64>,
}

impl SystemSnapshot {
    /// Checks the record invariants; the message names the violated one.
    pub fn check(&self) -> std::result::Result<(), String> {
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(format!("rmax_flops must be > 0, got {}", self.r_max));
        }
        if !self.r_peak.is_finite() {
            return Err(format!("rpeak_flops must be finite, got {}", self.r_peak));
        }
        if self.r_max > self.r_peak {
            return Err(format!(
                "rmax_flops ({}) exceeds rpeak_flops ({})",
                self.r_max, self.r_peak
            ));
        }
        if self.cores_used < 1 || self.cores_used > self.cores_total {
            return Err(format!(
                "cores_used ({}) must lie in [1, cores_total = {}]",
                self.cores_used, self.cores_total
            ));
        }
        if let Some(c) = self.clock_hz {
            if !(c > 0.0 && c.is_finite()) {
                return Err(format!("clock_hz must be > 0, got {c}"));
            }
        }
        if let Some(r) = self.perf_ratio {
            if !(r > 0.0 && r.is_finite()) {
                return Err(format!("perf_ratio must be > 0, got {r}"));
            }
        }
        Ok(())
    }

    pub fn efficiency(&self) -> f64 {
        self.r_max / self.r_peak
    }

    /// Peak performance of one used core.
    pub fn p_single(&self) -> f64 {
        self.r_peak / self.cores_used as f64
    }
}

struct Columns {
    index: BTreeMap<&'static str, usize>,
}

impl Columns {
    fn from_header(header: &csv::StringRecord) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, h) in header.iter().enumerate() {
            let h = h.trim().trim_start_matches('\u{feff}').to_ascii_lowercase();
            if let Some(&known) = MANDATORY_COLUMNS
                .iter()
                .chain(OPTIONAL_COLUMNS.iter())
                .find(|c| **c == h)
            {
                index.insert(known, i);
            }
        }
        for col in MANDATORY_COLUMNS {
            if !index.contains_key(col) {
                return Err(Error::Parse {
                    line: 1,
                    column: col.to_string(),
                    message: "mandatory column missing from header".into(),
                });
            }
        }
        Ok(Self { index })
    }

    fn get<'r>(&self, rec: &'r csv::StringRecord, col: &'static str) -> Option<&'r str> {
        self.index
            .get(col)
            .and_then(|&i| rec.get(i))
            .map(str::trim)
            .filter(|s| !s.is_empty())
    }
}

fn field_error(line: u64, column: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column: column.to_string(),
        message: message.into(),
    }
}

fn required<'r>(
    cols: &Columns,
    rec: &'r csv::StringRecord,
    col: &'static str,
    line: u64,
) -> Result<&'r str> {
    cols.get(rec, col)
        .ok_or_else(|| field_error(line, col, "missing mandatory field"))
}

fn parse_field<T: FromStr>(raw: &str, col: &'static str, line: u64) -> Result<T> {
    raw.parse()
        .map_err(|_| field_error(line, col, format!("cannot parse '{raw}'")))
}

/// Integer counts may be written as `7299072` or `7.299072e6`.
fn parse_count(raw: &str, col: &'static str, line: u64) -> Result<u64> {
    if let Ok(v) = raw.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = parse_field(raw, col, line)?;
    if v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(field_error(
            line,
            col,
            format!("'{raw}' is not a whole count"),
        ))
    }
}

/// Reads all snapshot rows; fails on the first malformed or inconsistent row.
pub fn parse_snapshots<R: Read>(input: R) -> Result<Vec<SystemSnapshot>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(input);
    let header = reader.headers().map_err(csv_error)?.clone();
    let cols = Columns::from_header(&header)?;

    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        let name = required(&cols, &rec, "name", line)?.to_string();
        let epoch: Epoch = required(&cols, &rec, "epoch", line)?
            .parse()
            .map_err(|e: Error| field_error(line, "epoch", e.to_string()))?;
        let workload: Workload = required(&cols, &rec, "workload", line)?
            .parse()
            .map_err(|e: Error| field_error(line, "workload", e.to_string()))?;
        let cores_total = parse_count(
            required(&cols, &rec, "cores_total", line)?,
            "cores_total",
            line,
        )?;
        let cores_used = parse_count(
            required(&cols, &rec, "cores_used", line)?,
            "cores_used",
            line,
        )?;
        let r_peak = parse_field(
            required(&cols, &rec, "rpeak_flops", line)?,
            "rpeak_flops",
            line,
        )?;
        let r_max = parse_field(
            required(&cols, &rec, "rmax_flops", line)?,
            "rmax_flops",
            line,
        )?;
        let clock_hz = cols
            .get(&rec, "clock_hz")
            .map(|s| parse_field(s, "clock_hz", line))
            .transpose()?;
        let perf_ratio = cols
            .get(&rec, "perf_ratio")
            .map(|s| parse_field(s, "perf_ratio", line))
            .transpose()?;
        let snap = SystemSnapshot {
            name,
            epoch,
            workload,
            cores_total,
            cores_used,
            r_peak,
            r_max,
            clock_hz,
            perf_ratio,
        };
        snap.check().map_err(|message| Error::Integrity {
            record: format!("{} {} {}", snap.name, snap.epoch, snap.workload),
            line,
            message,
        })?;
        out.push(snap);
    }
    Ok(out)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.kind() {
        csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => field_error(
            line,
            &format!("#{}", len + 1),
            format!("row has {len} fields, header has {expected_len}"),
        ),
        csv::ErrorKind::Utf8 { err, .. } => {
            field_error(line, &format!("#{}", err.field() + 1), "invalid UTF-8")
        }
        _ => field_error(line, "?", e.to_string()),
    }
}

fn opt_to_string(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes snapshots in the input schema; values use shortest round-trip formatting.
pub fn write_snapshots<W: Write>(out: W, snapshots: &[SystemSnapshot]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<&str> = MANDATORY_COLUMNS
        .iter()
        .chain(OPTIONAL_COLUMNS.iter())
        .copied()
        .collect();
    w.write_record(&header).map_err(csv_error)?;
    for s in snapshots {
        w.write_record([
            s.name.clone(),
            s.epoch.to_string(),
            s.workload.to_string(),
            s.cores_total.to_string(),
            s.cores_used.to_string(),
            s.r_peak.to_string(),
            s.r_max.to_string(),
            opt_to_string(s.clock_hz),
            opt_to_string(s.perf_ratio),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// A snapshot together with the quantities derived from it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedRecord {
    pub snapshot: SystemSnapshot,
    pub efficiency: f64,
    /// `None` when α cannot be derived; `note` says why.
    pub alpha: Option<AlphaEstimate>,
    pub corrected_efficiency: Option<f64>,
    pub note: Option<String>,
}

pub fn derive(snapshot: &SystemSnapshot) -> DerivedRecord {
    let efficiency = snapshot.efficiency();
    let (alpha, note) = if snapshot.cores_used < 2 {
        (
            None,
            Some(format!(
                "alpha unavailable: degenerate partition of {} core(s)",
                snapshot.cores_used
            )),
        )
    } else {
        match alpha_from_efficiency(efficiency, snapshot.cores_used) {
            Ok(a) => (Some(a), None),
            Err(e) => (None, Some(format!("alpha unavailable: {e}"))),
        }
    };
    let corrected_efficiency = (snapshot.workload == Workload::Hpcg
        && snapshot.cores_used < snapshot.cores_total)
        .then(|| efficiency * (snapshot.cores_total as f64 / snapshot.cores_used as f64));
    DerivedRecord {
        snapshot: snapshot.clone(),
        efficiency,
        alpha,
        corrected_efficiency,
        note,
    }
}

/// A 64-bit/16-bit benchmark pair matched on machine name and list edition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedMeasurement {
    pub name: String,
    pub epoch: Epoch,
    pub measurement: DualPrecisionMeasurement,
    /// Whether the ratio came from a `perf_ratio` column rather than the two `rmax` values.
    pub ratio_given: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Pairing {
    pub pairs: Vec<PairedMeasurement>,
    /// Human-readable reasons for entries that could not be paired.
    pub unmatched: Vec<String>,
}

type Group<'a> = (Vec<&'a SystemSnapshot>, Vec<&'a SystemSnapshot>);

/// Pairs HPL with HPL-AI entries of the same machine and epoch.
pub fn pair_workloads(records: &[SystemSnapshot]) -> Pairing {
    // (name, epoch) -> (HPL entries, HPL-AI entries)
    let mut groups: BTreeMap<(String, Epoch), Group> = BTreeMap::new();
    for r in records {
        let key = (r.name.clone(), r.epoch);
        match r.workload {
            Workload::Hpl => groups.entry(key).or_default().0.push(r),
            Workload::HplAi => groups.entry(key).or_default().1.push(r),
            _ => {}
        }
    }

    let mut pairing = Pairing::default();
    for ((name, epoch), (hpl, hpl_ai)) in groups {
        let (lo, hi) = match (hpl.as_slice(), hpl_ai.as_slice()) {
            ([lo], [hi]) => (*lo, *hi),
            ([], _) => {
                pairing
                    .unmatched
                    .push(format!("{name} {epoch}: HPL-AI entry without an HPL entry"));
                continue;
            }
            (_, []) => continue,
            _ => {
                pairing.unmatched.push(format!(
                    "{name} {epoch}: ambiguous, several HPL or HPL-AI entries"
                ));
                continue;
            }
        };
        let (perf_ratio, ratio_given) = match hi.perf_ratio {
            Some(r) => (r, true),
            None => (hi.r_max / lo.r_max, false),
        };
        match DualPrecisionMeasurement::new(
            lo.efficiency(),
            hi.efficiency(),
            lo.cores_used,
            perf_ratio,
        ) {
            Ok(measurement) => {
                if hi.cores_used != lo.cores_used {
                    pairing.unmatched.push(format!(
                        "{name} {epoch}: HPL-AI used {} cores, HPL {}; paired on the HPL count",
                        hi.cores_used, lo.cores_used
                    ));
                }
                pairing.pairs.push(PairedMeasurement {
                    name,
                    epoch,
                    measurement,
                    ratio_given,
                });
            }
            Err(e) => pairing.unmatched.push(format!("{name} {epoch}: {e}")),
        }
    }
    pairing
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "name,epoch,workload,cores_total,cores_used,rpeak_flops,rmax_flops\n";

    #[test]
    fn three_rows() {
        let csv = format!(
            "{HEADER}A,2020-06,HPL,100,100,1e12,5e11\nB,2020-11,hpcg,100,10,1e11,1e9\nC,2021-06,HPL-AI,100,100,4e12,3e12\n"
        );
        let recs = parse_snapshots(csv.as_bytes()).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[1].workload, Workload::Hpcg);
        assert_eq!(recs[2].workload, Workload::HplAi);
        assert_eq!(
            recs[0].epoch,
            Epoch {
                year: 2020,
                month: 6
            }
        );
    }

    #[test]
    fn rmax_above_rpeak_is_rejected() {
        let csv = format!("{HEADER}Bad,2020-06,HPL,100,100,1e12,2e12\n");
        match parse_snapshots(csv.as_bytes()) {
            Err(Error::Integrity { record, line, .. }) => {
                assert!(record.starts_with("Bad"));
                assert_eq!(line, 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn diagnostics_name_line_and_column() {
        let csv =
            format!("{HEADER}A,2020-06,HPL,100,100,1e12,5e11\nB,2020-06,HPL,100,,1e12,5e11\n");
        match parse_snapshots(csv.as_bytes()) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(column, "cores_used");
            }
            other => panic!("{other:?}"),
        }
        let csv = format!("{HEADER}A,2020-13,HPL,100,100,1e12,5e11\n");
        assert!(matches!(
            parse_snapshots(csv.as_bytes()),
            Err(Error::Parse { .. })
        ));
        let csv = format!("{HEADER}A,2020-06,HPL,100,100,lots,5e11\n");
        assert!(matches!(
            parse_snapshots(csv.as_bytes()),
            Err(Error::Parse { .. })
        ));
        let csv = format!("{HEADER}A,2020-06,HPL,100,100\n");
        assert!(matches!(
            parse_snapshots(csv.as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        let csv = "name,epoch,workload\nA,2020-06,HPL\n";
        assert!(matches!(
            parse_snapshots(csv.as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn fugaku_row() {
        let csv = format!("{HEADER}Fugaku,2020-06,HPL,7299072,7299072,514.27e15,415.53e15\n");
        let recs = parse_snapshots(csv.as_bytes()).unwrap();
        let d = derive(&recs[0]);
        let oma = d.alpha.unwrap().one_minus_alpha();
        assert!(((oma - 3.25e-8) / 3.25e-8).abs() < 0.02, "{oma}");
        assert!(d.corrected_efficiency.is_none());
    }

    #[test]
    fn hpcg_partition_correction() {
        let s = SystemSnapshot {
            name: "X".into(),
            epoch: Epoch::new(2020, 6).unwrap(),
            workload: Workload::Hpcg,
            cores_total: 1000,
            cores_used: 100,
            r_peak: 1e12,
            r_max: 2e10,
            clock_hz: None,
            perf_ratio: None,
        };
        let d = derive(&s);
        assert!((d.corrected_efficiency.unwrap() - 10.0 * d.efficiency).abs() < 1e-15);

        let full = SystemSnapshot {
            cores_used: 1000,
            ..s.clone()
        };
        assert!(derive(&full).corrected_efficiency.is_none());

        let tiny = SystemSnapshot { cores_used: 1, ..s };
        let d = derive(&tiny);
        assert!(d.alpha.is_none());
        assert!(d.note.is_some());
    }

    #[test]
    fn pairing_ratio() {
        let csv = format!(
            "{HEADER}M,2020-06,HPL,10,10,10,5\nM,2020-06,HPL-AI,10,10,40,15\nN,2020-06,HPL-AI,10,10,40,15\nM,2020-11,HPL,10,10,10,5\nM,2020-11,HPL-AI,10,10,40,5\n"
        );
        let recs = parse_snapshots(csv.as_bytes()).unwrap();
        let p = pair_workloads(&recs);
        assert_eq!(p.pairs.len(), 2);
        assert_eq!(p.pairs[0].measurement.perf_ratio, 3.0);
        assert_eq!(p.pairs[1].measurement.perf_ratio, 1.0);
        assert_eq!(p.unmatched.len(), 1);
        assert!(p.unmatched[0].starts_with("N 2020-06"));
    }

    #[test]
    fn given_ratio_wins() {
        let csv = "name,epoch,workload,cores_total,cores_used,rpeak_flops,rmax_flops,perf_ratio\n\
                   M,2020-06,HPL,10,10,10,5,\nM,2020-06,HPL-AI,10,10,40,15,3.42\n";
        let recs = parse_snapshots(csv.as_bytes()).unwrap();
        let p = pair_workloads(&recs);
        assert_eq!(p.pairs[0].measurement.perf_ratio, 3.42);
        assert!(p.pairs[0].ratio_given);
    }

    #[test]
    fn workload_names() {
        assert_eq!("hpl_ai".parse::<Workload>().unwrap(), Workload::HplAi);
        assert_eq!(
            "Graph500".parse::<Workload>().unwrap(),
            Workload::Other("Graph500".into())
        );
        assert_eq!(Workload::HplAi.to_string(), "HPL-AI");
    }
}
