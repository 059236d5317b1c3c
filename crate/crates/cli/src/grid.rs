//! `start:stop:count` grids with both endpoints included.

use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self, String> {
        if !start.is_finite() || !stop.is_finite() {
            return Err(format!("grid endpoints must be finite, got {start}:{stop}"));
        }
        if count == 0 {
            return Err("a grid needs at least one point".into());
        }
        if count == 1 && start != stop {
            return Err(format!("a one-point grid needs equal endpoints, got {start}:{stop}"));
        }
        Ok(Grid { start, stop, count })
    }

    pub fn single(x: f64) -> Self {
        Grid {
            start: x,
            stop: x,
            count: 1,
        }
    }

    /// The grid points; the last one is exactly `stop`.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.stop
                } else {
                    self.start + step * k as f64
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected start:stop:count, got {s:?}");
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        match parts[..] {
            [x] => {
                let x: f64 = x.parse().map_err(|_| bad())?;
                Grid::new(x, x, 1)
            }
            [start, stop, count] => Grid::new(
                start.parse().map_err(|_| bad())?,
                stop.parse().map_err(|_| bad())?,
                count.parse().map_err(|_| bad())?,
            ),
            _ => Err(bad()),
        }
    }
}

impl serde::Serialize for Grid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}
