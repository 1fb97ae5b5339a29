//! Multichannel time series container and its CSV representation.
//!
//! Time stamps are 1-based: sample `t` of a series of length `T` lives at
//! index `t - 1`, and a change point `t` marks the last sample of a segment.
//!
//! CSV layout: one row per time stamp, one column per channel, optionally a
//! final integer column named `is_cp` holding `1` at ground-truth change
//! points. The header row is optional; the `is_cp` column is only recognised
//! through the header.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const CHANGE_POINT_COLUMN: &str = "is_cp";

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    /// Channel-major samples, `channels[i][t - 1]`.
    channels: Vec<Vec<f64>>,
    change_points: Vec<usize>,
}

impl TimeSeries {
    pub fn new(channels: Vec<Vec<f64>>, change_points: Vec<usize>) -> Result<Self> {
        let Some(first) = channels.first() else {
            return Err(Error::InvalidSeries("no channels".into()));
        };
        let len = first.len();
        if len == 0 {
            return Err(Error::InvalidSeries("zero-length series".into()));
        }
        for (i, ch) in channels.iter().enumerate() {
            if ch.len() != len {
                return Err(Error::InvalidSeries(format!(
                    "channel {i} has {} samples, expected {len}",
                    ch.len()
                )));
            }
            if let Some(t) = ch.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidSeries(format!(
                    "non-finite sample in channel {i} at t={}",
                    t + 1
                )));
            }
        }
        for w in change_points.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidSeries(
                    "change points must be strictly increasing".into(),
                ));
            }
        }
        if let (Some(&lo), Some(&hi)) = (change_points.first(), change_points.last()) {
            if lo < 1 || hi > len - 1 {
                return Err(Error::InvalidSeries(format!(
                    "change points must lie in [1, {}]",
                    len - 1
                )));
            }
        }
        Ok(Self {
            channels,
            change_points,
        })
    }

    pub fn univariate(values: Vec<f64>, change_points: Vec<usize>) -> Result<Self> {
        Self::new(vec![values], change_points)
    }

    /// Number of channels `d`.
    pub fn dims(&self) -> usize {
        self.channels.len()
    }

    /// Series length `T`.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn channel(&self, i: usize) -> &[f64] {
        &self.channels[i]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn change_points(&self) -> &[usize] {
        &self.change_points
    }

    /// Same samples with a different ground truth.
    pub fn with_change_points(&self, change_points: Vec<usize>) -> Result<Self> {
        Self::new(self.channels.clone(), change_points)
    }

    pub(crate) fn map_channels<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&[f64]) -> Vec<f64>,
    {
        Self {
            channels: self.channels.iter().map(|c| f(c)).collect(),
            change_points: self.change_points.clone(),
        }
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let reader = BufReader::new(reader);
        let mut columns: Option<usize> = None;
        let mut has_cp_column = false;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut change_points = Vec::new();

        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if columns.is_none() && rows.is_empty() && fields.iter().any(|f| f.parse::<f64>().is_err())
            {
                has_cp_column = fields.last() == Some(&CHANGE_POINT_COLUMN);
                columns = Some(fields.len());
                continue;
            }
            let expected = *columns.get_or_insert(fields.len());
            if fields.len() != expected {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected {expected} fields, found {}", fields.len()),
                });
            }
            let value_count = if has_cp_column { expected - 1 } else { expected };
            let mut row = Vec::with_capacity(value_count);
            for field in &fields[..value_count] {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("cannot parse '{field}' as a number"),
                })?;
                row.push(v);
            }
            if has_cp_column {
                let flag = fields[expected - 1];
                match flag {
                    "0" => {}
                    "1" => change_points.push(rows.len() + 1),
                    other => {
                        return Err(Error::Parse {
                            line: lineno + 1,
                            message: format!("is_cp must be 0 or 1, found '{other}'"),
                        })
                    }
                }
            }
            rows.push(row);
        }

        let width = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || width == 0 {
            return Err(Error::Empty("csv contains no samples"));
        }
        let mut channels = vec![Vec::with_capacity(rows.len()); width];
        for row in rows {
            for (ch, v) in channels.iter_mut().zip(row) {
                ch.push(v);
            }
        }
        Self::new(channels, change_points)
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::read_csv(fs::File::open(path)?)
    }

    /// Writes the series with a header row `x1,…,xd,is_cp`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = (1..=self.dims()).map(|i| format!("x{i}")).collect();
        writeln!(w, "{},{CHANGE_POINT_COLUMN}", header.join(","))?;
        let mut cps = self.change_points.iter().peekable();
        for idx in 0..self.len() {
            let t = idx + 1;
            for ch in &self.channels {
                write!(w, "{},", ch[idx])?;
            }
            let is_cp = if cps.peek() == Some(&&t) {
                cps.next();
                1
            } else {
                0
            };
            writeln!(w, "{is_cp}")?;
        }
        Ok(())
    }
}
