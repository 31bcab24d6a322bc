use std::io::Read;
use std::path::Path;

use crate::engine::RunResult;
use crate::error::{Error, Result};

/// Observed `(year, value)` pairs in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoricalSeries {
    pub points: Vec<(f64, f64)>,
}

impl HistoricalSeries {
    pub fn years(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    /// Simulated values of `variable` at the recorded step nearest each year.
    pub fn simulated(&self, result: &RunResult, variable: &str) -> Result<Vec<f64>> {
        if result.series(variable).is_none() {
            return Err(Error::UnknownParameter(variable.to_string()));
        }
        self.points
            .iter()
            .map(|&(year, _)| {
                result.value_at(variable, year).ok_or_else(|| {
                    Error::input(
                        "historical",
                        format!("year {year} is outside the simulated horizon"),
                    )
                })
            })
            .collect()
    }
}

/// Reads a two-column `year,value` CSV. A first row that does not parse as
/// numbers is taken as a header.
pub fn read_historical<R: Read>(reader: R) -> Result<HistoricalSeries> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut points = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        if record.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 columns (year, value), found {}", record.len()),
            });
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(year), Ok(value)) if year.is_finite() && value.is_finite() => {
                points.push((year, value))
            }
            _ if i == 0 => continue,
            _ => {
                return Err(Error::Parse {
                    line,
                    message: format!(
                        "`{}`, `{}` is not a pair of finite numbers",
                        &record[0], &record[1]
                    ),
                })
            }
        }
    }
    if points.len() < 2 {
        return Err(Error::TooShort {
            required: 2,
            got: points.len(),
        });
    }
    Ok(HistoricalSeries { points })
}

pub fn load_historical(path: &Path) -> Result<HistoricalSeries> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_historical(file)
}
