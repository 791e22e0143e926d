//! Curve CSV files and summary tables.

use std::io::{Read, Write};

use super::bdrate::{RateCurve, RatePoint};
use super::complexity::aggregate;
use crate::error::{Error, Result};

pub fn write_curve<W: Write>(curve: &RateCurve, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::InvalidConfig(format!("csv: {e}"));
    out.write_record(["rate", "quality"]).map_err(io)?;
    for p in curve.points() {
        out.write_record([format!("{}", p.rate), format!("{}", p.quality)]).map_err(io)?;
    }
    out.flush().map_err(|e| Error::InvalidConfig(format!("csv: {e}")))
}

/// Expects the header `rate,quality`; rows are sorted by rate before the
/// curve is validated.
pub fn read_curve<R: Read>(r: R) -> Result<RateCurve> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(r);
    let bad = |m: String| Error::InvalidCurve(m);
    let header = rdr.headers().map_err(|e| bad(format!("csv: {e}")))?;
    if header.len() != 2 || &header[0] != "rate" || &header[1] != "quality" {
        return Err(bad("expected header `rate,quality`".into()));
    }
    let mut pts = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(format!("csv: {e}")))?;
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("line {}: not a number: {s:?}", i + 2)));
        pts.push(RatePoint { rate: num(&rec[0])?, quality: num(&rec[1])? });
    }
    pts.sort_by(|a, b| a.rate.total_cmp(&b.rate));
    RateCurve::new(pts)
}

/// One row of a BD-rate / complexity summary.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub task: String,
    pub dataset: String,
    /// Percent; `None` when no anchor curve is available.
    pub bd_rate: Option<f64>,
    pub encode_ratio: f64,
    pub decode_ratio: f64,
}

const HEADER: [&str; 5] = ["task", "dataset", "bd_rate", "encode_ratio", "decode_ratio"];

fn cells(r: &ReportRow) -> [String; 5] {
    [
        r.task.clone(),
        r.dataset.clone(),
        r.bd_rate.map_or_else(|| "-".into(), |b| format!("{b:.2}%")),
        format!("{:.2}", r.encode_ratio),
        format!("{:.2}", r.decode_ratio),
    ]
}

/// Equal-weight "Overall" row. BD-rate is averaged over the rows that have one.
pub fn overall(rows: &[ReportRow]) -> Result<ReportRow> {
    let eq = |f: &dyn Fn(&ReportRow) -> f64| aggregate(&rows.iter().map(|r| (f(r), 1.0)).collect::<Vec<_>>());
    let bd: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.bd_rate.map(|b| (b, 1.0))).collect();
    Ok(ReportRow {
        task: "Overall".into(),
        dataset: String::new(),
        bd_rate: if bd.is_empty() { None } else { Some(aggregate(&bd)?) },
        encode_ratio: eq(&|r| r.encode_ratio)?,
        decode_ratio: eq(&|r| r.decode_ratio)?,
    })
}

pub fn render_text(rows: &[ReportRow]) -> String {
    let body: Vec<[String; 5]> = rows.iter().map(cells).collect();
    let mut width = HEADER.map(str::len);
    for r in &body {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |r: &[String]| {
        let mut s = String::new();
        for (i, c) in r.iter().enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            // text columns left, numbers right
            if i < 2 {
                s.push_str(&format!("{c:<w$}", w = width[i]));
            } else {
                s.push_str(&format!("{c:>w$}", w = width[i]));
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(&HEADER.map(String::from));
    out.push_str(&line(&width.map(|w| "-".repeat(w))));
    for r in &body {
        out.push_str(&line(r));
    }
    out
}

pub fn render_csv(rows: &[ReportRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let e = |e: csv::Error| Error::InvalidConfig(format!("csv: {e}"));
    w.write_record(HEADER).map_err(e)?;
    for r in rows {
        w.write_record([
            r.task.clone(),
            r.dataset.clone(),
            r.bd_rate.map_or_else(String::new, |b| format!("{b}")),
            format!("{}", r.encode_ratio),
            format!("{}", r.decode_ratio),
        ])
        .map_err(e)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidConfig(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
