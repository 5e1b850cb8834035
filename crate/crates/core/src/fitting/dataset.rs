use std::io::Read;

use crate::error::{Error, Result};

pub const HEADER: [&str; 2] = ["wavelength_nm", "mu_a_cm1"];
pub const WEIGHT_COLUMN: &str = "weight";

/// One measured sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub lambda: f64,
    pub mu_a: f64,
    pub weight: f64,
}

/// Measured `(λ, μ_a)` pairs, sorted by strictly increasing wavelength.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    points: Vec<Point>,
    pub provenance: String,
}

impl Dataset {
    /// Builds an unweighted dataset. Points may arrive in any order.
    pub fn new(points: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Self::weighted(points.into_iter().map(|(l, m)| (l, m, 1.0)))
    }

    pub fn weighted(points: impl IntoIterator<Item = (f64, f64, f64)>) -> Result<Self> {
        let mut points: Vec<Point> = points
            .into_iter()
            .map(|(lambda, mu_a, weight)| Point { lambda, mu_a, weight })
            .collect();
        for p in &points {
            if !(p.lambda.is_finite() && p.lambda > 0.0) {
                return Err(Error::Dataset(format!("wavelength {} is not a positive number", p.lambda)));
            }
            if !p.mu_a.is_finite() {
                return Err(Error::Dataset(format!("non-finite mu_a at {} nm", p.lambda)));
            }
            if !(p.weight.is_finite() && p.weight > 0.0) {
                return Err(Error::Dataset(format!("weight at {} nm must be > 0", p.lambda)));
            }
        }
        points.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        if let Some(w) = points.windows(2).find(|w| w[0].lambda == w[1].lambda) {
            return Err(Error::Dataset(format!("duplicate wavelength {} nm", w[0].lambda)));
        }
        Ok(Self {
            points,
            provenance: String::new(),
        })
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn lambdas(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.lambda)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.mu_a)
    }

    /// (first, last) wavelength.
    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.points.first()?.lambda, self.points.last()?.lambda))
    }

    /// Multiplies every μ_a by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|p| Point { mu_a: p.mu_a * k, ..*p })
                .collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Reads `wavelength_nm,mu_a_cm1[,weight]` CSV. Lines starting with `#`
    /// are comments; rows need not be sorted.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);

        let header = rdr.headers().map_err(csv_error)?.clone();
        let header_line = rdr.position().line().saturating_sub(1).max(1) as usize;
        let weighted = match header.len() {
            2 => false,
            3 => true,
            n => {
                return Err(Error::Parse {
                    line: header_line,
                    column: n.min(3) + 1,
                    message: format!(
                        "expected header `wavelength_nm,mu_a_cm1[,weight]`, found {n} columns"
                    ),
                })
            }
        };
        let expected: Vec<&str> = if weighted {
            vec![HEADER[0], HEADER[1], WEIGHT_COLUMN]
        } else {
            HEADER.to_vec()
        };
        for (i, (got, want)) in header.iter().zip(&expected).enumerate() {
            if got != *want {
                return Err(Error::Parse {
                    line: header_line,
                    column: i + 1,
                    message: format!("expected header field `{want}`, found `{got}`"),
                });
            }
        }

        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(csv_error)?;
            let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
            if record.len() != header.len() {
                return Err(Error::Parse {
                    line,
                    column: record.len().min(header.len()) + 1,
                    message: format!("expected {} fields, found {}", header.len(), record.len()),
                });
            }
            let field = |i: usize| -> Result<f64> {
                let text = &record[i];
                let v: f64 = text.parse().map_err(|_| Error::Parse {
                    line,
                    column: i + 1,
                    message: format!("`{text}` is not a number"),
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Parse {
                        line,
                        column: i + 1,
                        message: format!("`{text}` is not finite"),
                    })
                }
            };
            let weight = if weighted { field(2)? } else { 1.0 };
            rows.push((field(0)?, field(1)?, weight));
        }
        if rows.is_empty() {
            return Err(Error::Dataset("no data rows".into()));
        }
        Self::weighted(rows)
    }
}

fn csv_error(e: csv::Error) -> Error {
    let (line, column) = match e.position() {
        Some(p) => (p.line() as usize, 0),
        None => (0, 0),
    };
    Error::Parse {
        line,
        column,
        message: e.to_string(),
    }
}
