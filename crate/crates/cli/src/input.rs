use std::path::Path;

use embedlab::{ClassReport, RealMatrix};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

/// Declared class of the input. Checked against the classification; a
/// matrix that does not have the declared class is rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Stochastic,
    Nonnegative,
    Z,
    Intensity,
}

impl Kind {
    pub fn holds(self, report: &ClassReport) -> bool {
        let f = &report.flags;
        match self {
            Kind::Stochastic => f.stochastic,
            Kind::Nonnegative => f.nonnegative,
            Kind::Z => f.z_matrix,
            Kind::Intensity => f.intensity_matrix,
        }
    }
}

/// Echoed verbatim in every report. The format is deliberately left out so
/// that CSV and JSON encodings of one matrix produce the same report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl MatrixFile {
    pub fn read(path: &Path) -> Result<(Self, Format), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Format(format!("cannot read {}: {e}", path.display())))?;
        let format = match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ if text.trim_start().starts_with('{') => Format::Json,
            _ => Format::Csv,
        };
        let file = match format {
            Format::Json => Self::parse_json(&text)?,
            Format::Csv => Self::parse_csv(&text)?,
        };
        file.check_shape()?;
        Ok((file, format))
    }

    pub fn parse_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Format(format!("invalid JSON matrix: {e}")))
    }

    /// Headerless rows of numbers; `#` starts a comment line.
    pub fn parse_csv(text: &str) -> Result<Self, CliError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| CliError::Format(format!("invalid CSV: {e}")))?;
            if record.iter().all(str::is_empty) {
                continue;
            }
            let row = record
                .iter()
                .enumerate()
                .map(|(j, field)| {
                    field.parse::<f64>().map_err(|_| {
                        CliError::Format(format!("row {i}, column {j}: {field:?} is not a number"))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(MatrixFile {
            n: rows.len(),
            rows,
            kind: None,
            name: None,
        })
    }

    fn check_shape(&self) -> Result<(), CliError> {
        if self.n == 0 {
            return Err(CliError::Format("matrix has no entries".into()));
        }
        if self.rows.len() != self.n {
            return Err(CliError::Format(format!(
                "n = {} but {} rows given",
                self.n,
                self.rows.len()
            )));
        }
        if let Some((i, row)) = self.rows.iter().enumerate().find(|(_, r)| r.len() != self.n) {
            return Err(CliError::Format(format!(
                "row {i} has {} entries, expected {}",
                row.len(),
                self.n
            )));
        }
        Ok(())
    }

    pub fn matrix(&self) -> Result<RealMatrix, CliError> {
        self.check_shape()?;
        RealMatrix::from_rows(&self.rows).map_err(|e| CliError::Format(e.to_string()))
    }
}
