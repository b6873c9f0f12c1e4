use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{csv_error, Error, Result};

/// Diversity events fired at the end of a generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Events {
    pub twin_removal: bool,
    pub restart: bool,
}

impl Events {
    pub fn is_empty(&self) -> bool {
        !self.twin_removal && !self.restart
    }
}

impl fmt::Display for Events {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.twin_removal, self.restart) {
            (false, false) => Ok(()),
            (true, false) => f.write_str("twin_removal"),
            (false, true) => f.write_str("restart"),
            (true, true) => f.write_str("twin_removal+restart"),
        }
    }
}

impl FromStr for Events {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut events = Events::default();
        for token in s.split('+').filter(|t| !t.is_empty()) {
            match token {
                "twin_removal" => events.twin_removal = true,
                "restart" => events.restart = true,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown trace event {other:?}"
                    )))
                }
            }
        }
        Ok(events)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    /// 0 for the initial population, then 1, 2, ...
    pub generation: usize,
    /// Best LDE among the individuals produced in this generation.
    pub best_lde: f64,
    pub global_best_lde: f64,
    pub events: Events,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    generation: usize,
    best_lde: f64,
    global_best_lde: f64,
    event: String,
}

/// Per-generation search progress.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
}

impl RunTrace {
    pub fn push(&mut self, row: TraceRow) {
        self.rows.push(row);
    }

    pub fn final_lde(&self) -> Option<f64> {
        self.rows.last().map(|r| r.global_best_lde)
    }

    pub fn global_best_at(&self, generation: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.generation == generation)
            .map(|r| r.global_best_lde)
    }

    pub fn is_monotone(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].global_best_lde <= w[0].global_best_lde)
    }

    pub fn count_events(&self) -> (usize, usize) {
        self.rows.iter().fold((0, 0), |(t, r), row| {
            (
                t + row.events.twin_removal as usize,
                r + row.events.restart as usize,
            )
        })
    }

    /// Writes `generation,best_lde,global_best_lde,event`, one row per
    /// generation.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        for r in &self.rows {
            w.serialize(CsvRow {
                generation: r.generation,
                best_lde: r.best_lde,
                global_best_lde: r.global_best_lde,
                event: r.events.to_string(),
            })
            .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(source: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(source);
        let headers = reader.headers().map_err(csv_error)?.clone();
        if headers != vec!["generation", "best_lde", "global_best_lde", "event"] {
            return Err(Error::parse(
                1,
                format!("unexpected trace header {headers:?}"),
            ));
        }
        let mut trace = RunTrace::default();
        for (k, row) in reader.deserialize::<CsvRow>().enumerate() {
            let row = row.map_err(|e| Error::parse(k + 2, e.to_string()))?;
            trace.push(TraceRow {
                generation: row.generation,
                best_lde: row.best_lde,
                global_best_lde: row.global_best_lde,
                events: row
                    .event
                    .parse()
                    .map_err(|e: Error| Error::parse(k + 2, e.to_string()))?,
            });
        }
        Ok(trace)
    }
}
