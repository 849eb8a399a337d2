use std::fmt;
use std::str::FromStr;

/// Inclusive arithmetic grid written `start:stop:step`, or a single value.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.step == 0.0 || self.start == self.stop {
            return vec![self.start];
        }
        // Slack of 1e-9 steps keeps `stop` when the division rounds down.
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }

    pub fn scaled(&self, factor: f64) -> Grid {
        Grid { start: self.start * factor, stop: self.stop * factor, step: self.step * factor }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridError(String);

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for GridError {}

impl FromStr for Grid {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |part: &str| {
            part.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| GridError(format!("`{part}` is not a finite number")))
        };
        let parts: Vec<&str> = s.split(':').collect();
        let grid = match parts.as_slice() {
            [x] => {
                let x = num(x)?;
                Grid { start: x, stop: x, step: 0.0 }
            }
            [a, b, c] => Grid { start: num(a)?, stop: num(b)?, step: num(c)? },
            _ => return Err(GridError(format!("expected start:stop:step or a single value, got `{s}`"))),
        };
        if grid.start != grid.stop && !(grid.step > 0.0 && grid.stop > grid.start) {
            return Err(GridError(format!("grid `{s}` needs stop > start and step > 0")));
        }
        if grid.step > 0.0 && (grid.stop - grid.start) / grid.step > 1e7 {
            return Err(GridError(format!("grid `{s}` has more than 10^7 points")));
        }
        Ok(grid)
    }
}
