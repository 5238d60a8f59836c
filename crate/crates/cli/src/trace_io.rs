//! Trace files. CSV carries the rows only; JSON wraps the same rows with a
//! metadata object so a trace can be replayed without extra flags.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use adaprox::{Engine, EvalCounters, IterationRecord, RhoSequence, Termination, Trace};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::{ProblemSpec, SolverSpec, TraceFormat};
use crate::error::{io_err, HarnessError, Result};

pub const CSV_HEADER: &str = "k,elapsed_s,f,F,gradmap_norm,lambda,L_k,l_k,rho,n_grad,n_prox";

/// Who produced a trace and why it stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub solver: String,
    pub seed: u64,
    pub problem: String,
    /// One of `tol`, `max_iters`, `max_seconds`, `stagnation`.
    pub termination: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fstar: Option<f64>,
    /// Enough to rebuild the run for `check`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver_config: Option<SolverSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem_config: Option<ProblemSpec>,
}

/// A trace as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub meta: Option<TraceMeta>,
    pub records: Vec<IterationRecord>,
}

impl TraceFile {
    /// Reassembles a core [`Trace`]; `λ₀` is taken from row 0.
    pub fn into_trace(self, engine: Engine, rho: RhoSequence, termination: Termination) -> Trace {
        Trace {
            engine,
            rho,
            lambda0: self.records.first().map_or(f64::NAN, |r| r.lambda),
            records: self.records,
            termination,
            iterates: None,
        }
    }
}

/// JSON has no NaN or infinities, so those travel as strings.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Real(f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&self.0.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Real(v)),
            Raw::Str(s) => s
                .parse()
                .map(Real)
                .map_err(|_| serde::de::Error::custom(format!("not a number: '{s}'"))),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Row {
    k: usize,
    elapsed_s: Real,
    f: Real,
    #[serde(rename = "F")]
    composite: Real,
    gradmap_norm: Real,
    lambda: Real,
    #[serde(rename = "L_k")]
    upper: Real,
    #[serde(rename = "l_k")]
    lower: Real,
    rho: Real,
    n_grad: u64,
    n_prox: u64,
}

impl From<&IterationRecord> for Row {
    fn from(r: &IterationRecord) -> Self {
        Row {
            k: r.k,
            elapsed_s: Real(r.elapsed_s),
            f: Real(r.f_value),
            composite: Real(r.composite_value),
            gradmap_norm: Real(r.gradmap_norm),
            lambda: Real(r.lambda),
            upper: Real(r.upper_curv),
            lower: Real(r.lower_curv),
            rho: Real(r.rho_used),
            n_grad: r.counters.n_gradient,
            n_prox: r.counters.n_prox,
        }
    }
}

impl From<Row> for IterationRecord {
    fn from(r: Row) -> Self {
        IterationRecord {
            k: r.k,
            f_value: r.f.0,
            composite_value: r.composite.0,
            gradmap_norm: r.gradmap_norm.0,
            lambda: r.lambda.0,
            upper_curv: r.upper.0,
            lower_curv: r.lower.0,
            rho_used: r.rho.0,
            bb_term: None,
            residual: None,
            elapsed_s: r.elapsed_s.0,
            counters: EvalCounters {
                n_value: 0,
                n_gradient: r.n_grad,
                n_prox: r.n_prox,
            },
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonTrace {
    metadata: TraceMeta,
    records: Vec<Row>,
}

/// 17 significant digits, enough to recover every `f64` exactly.
fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(records: &[IterationRecord], mut out: W) -> std::io::Result<()> {
    out.write_all(CSV_HEADER.as_bytes())?;
    out.write_all(b"\n")?;
    for r in records {
        let reals = [
            r.elapsed_s,
            r.f_value,
            r.composite_value,
            r.gradmap_norm,
            r.lambda,
            r.upper_curv,
            r.lower_curv,
            r.rho_used,
        ];
        write!(out, "{}", r.k)?;
        for v in reals {
            write!(out, ",{}", real(v))?;
        }
        writeln!(out, ",{},{}", r.counters.n_gradient, r.counters.n_prox)?;
    }
    out.flush()
}

pub fn write_json<W: Write>(records: &[IterationRecord], meta: &TraceMeta, mut out: W) -> std::io::Result<()> {
    let doc = JsonTrace {
        metadata: meta.clone(),
        records: records.iter().map(Row::from).collect(),
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    out.write_all(b"\n")?;
    out.flush()
}

/// Writes `trace` to `path`. `meta` is only stored by the JSON format.
pub fn write_trace(trace: &Trace, meta: &TraceMeta, format: TraceFormat, path: &Path) -> Result<()> {
    if trace.records.is_empty() {
        return Err(HarnessError::Config("refusing to write an empty trace".into()));
    }
    let file = File::create(path).map_err(io_err(path))?;
    let out = BufWriter::new(file);
    match format {
        TraceFormat::Csv => write_csv(&trace.records, out),
        TraceFormat::Json => write_json(&trace.records, meta, out),
    }
    .map_err(io_err(path))
}

fn trace_err<T>(path: &Path, msg: impl Into<String>) -> Result<T> {
    Err(HarnessError::Trace {
        path: path.to_path_buf(),
        msg: msg.into(),
    })
}

pub fn parse_csv<R: BufRead>(reader: R, path: &Path) -> Result<TraceFile> {
    let mut lines = reader.lines();
    match lines.next() {
        Some(Ok(h)) if h == CSV_HEADER => {}
        Some(Ok(h)) => return trace_err(path, format!("unexpected header '{h}'")),
        Some(Err(e)) => return Err(io_err(path)(e)),
        None => return trace_err(path, "empty file"),
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(io_err(path))?;
        let lineno = i + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return trace_err(path, format!("line {lineno}: expected 11 fields, found {}", fields.len()));
        }
        let k = match fields[0].parse() {
            Ok(k) => k,
            Err(_) => return trace_err(path, format!("line {lineno}: bad row index '{}'", fields[0])),
        };
        let mut reals = [0.0; 8];
        for (slot, tok) in reals.iter_mut().zip(&fields[1..9]) {
            *slot = match tok.parse::<f64>() {
                Ok(v) => v,
                Err(_) => return trace_err(path, format!("line {lineno}: bad number '{tok}'")),
            };
        }
        let count = |tok: &str| -> Result<u64> {
            tok.parse()
                .or_else(|_| trace_err(path, format!("line {lineno}: bad counter '{tok}'")))
        };
        let row = Row {
            k,
            elapsed_s: Real(reals[0]),
            f: Real(reals[1]),
            composite: Real(reals[2]),
            gradmap_norm: Real(reals[3]),
            lambda: Real(reals[4]),
            upper: Real(reals[5]),
            lower: Real(reals[6]),
            rho: Real(reals[7]),
            n_grad: count(fields[9])?,
            n_prox: count(fields[10])?,
        };
        records.push(row.into());
    }
    Ok(TraceFile { meta: None, records })
}

pub fn parse_json<R: BufRead>(reader: R, path: &Path) -> Result<TraceFile> {
    let doc: JsonTrace = serde_json::from_reader(reader).or_else(|e| trace_err(path, e.to_string()))?;
    Ok(TraceFile {
        meta: Some(doc.metadata),
        records: doc.records.into_iter().map(IterationRecord::from).collect(),
    })
}

pub fn read_trace(path: &Path, format: TraceFormat) -> Result<TraceFile> {
    let file = File::open(path).map_err(io_err(path))?;
    let reader = BufReader::new(file);
    let trace = match format {
        TraceFormat::Csv => parse_csv(reader, path)?,
        TraceFormat::Json => parse_json(reader, path)?,
    };
    if trace.records.is_empty() {
        return trace_err(path, "trace has no rows");
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(k: usize) -> IterationRecord {
        IterationRecord {
            k,
            f_value: 0.1 + k as f64 / 3.0,
            composite_value: 1.0 / 7.0,
            gradmap_norm: 2f64.sqrt(),
            lambda: 1e-300,
            upper_curv: if k == 0 { f64::NAN } else { 123456.789 },
            lower_curv: if k == 0 { f64::NAN } else { -0.0 },
            rho_used: 1e10,
            bb_term: None,
            residual: None,
            elapsed_s: 0.25,
            counters: EvalCounters {
                n_value: 0,
                n_gradient: k as u64 + 1,
                n_prox: k as u64 + 1,
            },
        }
    }

    fn same(a: &IterationRecord, b: &IterationRecord) -> bool {
        let bits = |r: &IterationRecord| {
            [
                r.f_value, r.composite_value, r.gradmap_norm, r.lambda, r.upper_curv,
                r.lower_curv, r.rho_used, r.elapsed_s,
            ]
            .map(f64::to_bits)
        };
        a.k == b.k && bits(a) == bits(b) && a.counters == b.counters
    }

    #[test]
    fn one_record_is_two_lines() {
        let mut buf = Vec::new();
        write_csv(&[record(0)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.matches('\n').count(), 2);
        assert!(!text.contains('\r'));
        assert!(text.starts_with(CSV_HEADER));
        let row = text.lines().nth(1).unwrap();
        assert!(row.starts_with("0,2.5000000000000000e-1,"), "{row}");
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let recs: Vec<_> = (0..4).map(record).collect();
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        let back = parse_csv(&buf[..], Path::new("mem")).unwrap();
        assert!(back.records.iter().zip(&recs).all(|(a, b)| same(a, b)));
    }

    #[test]
    fn json_round_trip_keeps_metadata() {
        let recs: Vec<_> = (0..3).map(record).collect();
        let meta = TraceMeta {
            solver: "AdaPGNC-2".into(),
            seed: 4,
            problem: "lasso".into(),
            termination: "stagnation".into(),
            fstar: None,
            solver_config: None,
            problem_config: None,
        };
        let mut buf = Vec::new();
        write_json(&recs, &meta, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("\"termination\": \"stagnation\""));
        let back = parse_json(&buf[..], Path::new("mem")).unwrap();
        assert_eq!(back.meta.unwrap(), meta);
        assert!(back.records.iter().zip(&recs).all(|(a, b)| same(a, b)));
    }

    #[test]
    fn malformed_csv_is_rejected() {
        let p = Path::new("mem");
        assert!(parse_csv("k,f\n".as_bytes(), p).is_err());
        let short = format!("{CSV_HEADER}\n0,1,2\n");
        assert!(parse_csv(short.as_bytes(), p).is_err());
        let word = format!("{CSV_HEADER}\n0,1,2,3,4,x,6,7,8,9,10\n");
        assert!(parse_csv(word.as_bytes(), p).is_err());
    }
}
