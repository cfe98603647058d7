//! `min:max:count[:log]` axis specifications.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub log: bool,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n)
                .map(|i| {
                    let t = i as f64 / (n - 1) as f64;
                    if i == n - 1 {
                        self.max
                    } else if self.log {
                        self.min * (self.max / self.min).powf(t)
                    } else {
                        self.min + (self.max - self.min) * t
                    }
                })
                .collect(),
        }
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(format!("grid '{s}' must look like min:max:count[:log]"));
        }
        let num = |t: &str, what: &str| t.trim().parse::<f64>().map_err(|_| format!("grid '{s}': bad {what} '{t}'"));
        let min = num(parts[0], "min")?;
        let max = num(parts[1], "max")?;
        let count = parts[2].trim().parse::<usize>().map_err(|_| format!("grid '{s}': bad count '{}'", parts[2]))?;
        let log = match parts.get(3).map(|t| t.trim()) {
            None | Some("lin") => false,
            Some("log") => true,
            Some(other) => return Err(format!("grid '{s}': unknown spacing '{other}'")),
        };
        if !min.is_finite() || !max.is_finite() {
            return Err(format!("grid '{s}': bounds must be finite"));
        }
        if log && (min <= 0.0 || max <= 0.0) {
            return Err(format!("grid '{s}': log spacing needs positive bounds"));
        }
        Ok(GridSpec { min, max, count, log })
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.count)?;
        if self.log {
            f.write_str(":log")?;
        }
        Ok(())
    }
}
