use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use crate::{Error, Result};

pub const TRACE_HEADER: &str = "epoch,loss,J_estimate,J_error,eta_simple,eta_localized,points,event";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    None,
    Resample,
    Refine,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Event::None => "none",
            Event::Resample => "resample",
            Event::Refine => "refine",
        })
    }
}

/// One epoch, evaluated at the parameters entering that epoch's update.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub epoch: usize,
    pub loss: f64,
    pub j_estimate: f64,
    /// `J_ref − J_estimate`.
    pub j_error: f64,
    pub eta_simple: Option<f64>,
    pub eta_localized: Option<f64>,
    pub points: usize,
    pub event: Event,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl Trace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn event_epochs(&self) -> Vec<usize> {
        self.rows.iter().filter(|r| r.event != Event::None).map(|r| r.epoch).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TRACE_HEADER.split(','))?;
        for r in &self.rows {
            w.write_record([
                r.epoch.to_string(),
                num(r.loss),
                num(r.j_estimate),
                num(r.j_error),
                opt(r.eta_simple),
                opt(r.eta_localized),
                r.points.to_string(),
                r.event.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        if header.join(",") != TRACE_HEADER {
            return Err(Error::Config(format!("unexpected trace header '{}'", header.join(","))));
        }
        let parse = |s: &str| -> Result<f64> { s.parse().map_err(|_| Error::Config(format!("bad number '{s}' in trace"))) };
        let parse_opt = |s: &str| -> Result<Option<f64>> { if s.is_empty() { Ok(None) } else { parse(s).map(Some) } };
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let event = match field(7) {
                "none" => Event::None,
                "resample" => Event::Resample,
                "refine" => Event::Refine,
                other => return Err(Error::Config(format!("unknown event '{other}' in trace"))),
            };
            rows.push(TraceRow {
                epoch: field(0).parse().map_err(|_| Error::Config("bad epoch in trace".into()))?,
                loss: parse(field(1))?,
                j_estimate: parse(field(2))?,
                j_error: parse(field(3))?,
                eta_simple: parse_opt(field(4))?,
                eta_localized: parse_opt(field(5))?,
                points: field(6).parse().map_err(|_| Error::Config("bad point count in trace".into()))?,
                event,
            });
        }
        Ok(Trace { rows })
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}
