//! Risk criteria, their grouping, and the mapping from dataset columns to
//! normalized feature values.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::dataset::{FieldValue, ProjectRecord, Rating};
use super::DataError;

/// Criteria with a column in the PROMISE COCOMO-81 files, in catalog order.
pub const DEFAULT_CRITERIA: [&str; 13] = [
    "SCED", "RELY", "DATA", "SIZE", "CPLX", "TIME", "STOR", "ACAP", "AEXP", "LTEX", "PCAP", "VEXP", "TOOL",
];

/// Whether a higher raw value means more or less risk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskDirection {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Criterion {
    pub code: String,
    pub group: char,
    pub description: String,
    pub direction: RiskDirection,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriteriaGroup {
    pub id: char,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriteriaCatalog {
    groups: Vec<CriteriaGroup>,
    criteria: Vec<Criterion>,
    /// Source rows dropped because their code was already listed elsewhere.
    duplicates: Vec<String>,
}

impl CriteriaCatalog {
    pub fn new(groups: Vec<CriteriaGroup>, criteria: Vec<Criterion>) -> Result<Self, DataError> {
        for (i, c) in criteria.iter().enumerate() {
            if criteria[..i].iter().any(|o| o.code.eq_ignore_ascii_case(&c.code)) {
                return Err(DataError::Config(format!("criterion code {} listed twice", c.code)));
            }
            if !groups.iter().any(|g| g.id == c.group) {
                return Err(DataError::Config(format!(
                    "criterion {} names unknown group {}",
                    c.code, c.group
                )));
            }
        }
        Ok(Self {
            groups,
            criteria,
            duplicates: Vec::new(),
        })
    }

    /// The six-group software risk catalog. Database size appears under both
    /// product and platform risk in the source table; it is kept once, under
    /// product risk, and the second listing is reported in
    /// [`Self::duplicates`].
    pub fn software_risk() -> Self {
        use RiskDirection::{Decreasing as Dec, Increasing as Inc};
        let groups = [
            ('P', "Schedule risk"),
            ('Q', "Product risk"),
            ('R', "Platform risk"),
            ('S', "Personnel risk"),
            ('T', "Process risk"),
            ('U', "Reuse risk"),
        ];
        let criteria = [
            ("SCED", 'P', "Required development schedule", Dec),
            ("RELY", 'Q', "Required software reliability", Inc),
            ("DATA", 'Q', "Database size", Inc),
            ("SIZE", 'Q', "Software size", Inc),
            ("CPLX", 'Q', "Product complexity", Inc),
            ("DOCU", 'Q', "Documentation", Inc),
            ("TIME", 'R', "Execution time constraints", Inc),
            ("STOR", 'R', "Main storage constraints", Inc),
            ("ACAP", 'S', "Analyst capability", Dec),
            ("AEXP", 'S', "Application experience", Dec),
            ("LTEX", 'S', "Language and tool set experience", Dec),
            ("PCAP", 'S', "Programmer capability", Dec),
            ("VEXP", 'S', "Virtual machine experience", Dec),
            ("PCON", 'S', "Personnel continuity", Dec),
            ("TOOL", 'T', "Use of software tools", Dec),
            ("SITE", 'T', "Multisite development", Dec),
            ("PREC", 'T', "Precedentedness", Dec),
            ("FLEX", 'T', "Development flexibility", Dec),
            ("RESL", 'T', "Architecture or risk resolution", Dec),
            ("TEAM", 'T', "Team cohesion", Dec),
            ("PMAT", 'T', "Process maturity", Dec),
            ("INCREMENTS", 'T', "Increment development", Inc),
            ("RUSE", 'U', "Required reusability", Inc),
        ];
        let mut catalog = Self::new(
            groups
                .iter()
                .map(|&(id, name)| CriteriaGroup {
                    id,
                    name: name.into(),
                })
                .collect(),
            criteria
                .iter()
                .map(|&(code, group, description, direction)| Criterion {
                    code: code.into(),
                    group,
                    description: description.into(),
                    direction,
                })
                .collect(),
        )
        .expect("built-in catalog is consistent");
        catalog.duplicates.push("DATA (R)".into());
        catalog
    }

    pub fn groups(&self) -> &[CriteriaGroup] {
        &self.groups
    }

    pub fn criteria(&self) -> &[Criterion] {
        &self.criteria
    }

    pub fn duplicates(&self) -> &[String] {
        &self.duplicates
    }

    pub fn get(&self, code: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.code.eq_ignore_ascii_case(code))
    }

    pub fn codes(&self) -> impl Iterator<Item = &str> {
        self.criteria.iter().map(|c| c.code.as_str())
    }

    /// For each catalog code, the dataset column it resolves to, or `None`
    /// when the code has no mapping or the records lack the column.
    pub fn resolve(
        &self,
        records: &[ProjectRecord],
        config: &MappingConfig,
    ) -> BTreeMap<String, Option<String>> {
        self.criteria
            .iter()
            .map(|c| {
                let column = config
                    .column_for(&c.code)
                    .filter(|col| records.first().is_some_and(|r| r.field(&col.column).is_some()))
                    .map(|col| col.column.clone());
                (c.code.clone(), column)
            })
            .collect()
    }
}

/// Numeric values for the six ordinal levels, very low first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OrdinalLevels {
    pub very_low: f64,
    pub low: f64,
    pub nominal: f64,
    pub high: f64,
    pub very_high: f64,
    pub extra_high: f64,
}

impl Default for OrdinalLevels {
    fn default() -> Self {
        Self {
            very_low: 0.0,
            low: 0.2,
            nominal: 0.4,
            high: 0.6,
            very_high: 0.8,
            extra_high: 1.0,
        }
    }
}

impl OrdinalLevels {
    pub fn value(&self, r: Rating) -> f64 {
        [
            self.very_low,
            self.low,
            self.nominal,
            self.high,
            self.very_high,
            self.extra_high,
        ][r.level()]
    }

    fn validate(&self) -> Result<(), DataError> {
        let v: Vec<f64> = Rating::ALL.iter().map(|&r| self.value(r)).collect();
        if v.iter().any(|x| !(0.0..=1.0).contains(x)) || v.windows(2).any(|w| w[0] > w[1]) {
            return Err(DataError::Config(
                "ordinal levels must be nondecreasing values in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSource {
    pub column: String,
    /// Take the natural log of a numeric column before min-max scaling.
    #[serde(default)]
    pub log: bool,
}

impl ColumnSource {
    pub fn new(column: &str, log: bool) -> Self {
        Self {
            column: column.into(),
            log,
        }
    }
}

/// Which column feeds each criterion, and how ordinal levels become numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MappingConfig {
    pub levels: OrdinalLevels,
    pub columns: BTreeMap<String, ColumnSource>,
}

impl Default for MappingConfig {
    /// Column names of the PROMISE COCOMO-81 files.
    fn default() -> Self {
        let pairs = [
            ("SCED", "sced", false),
            ("RELY", "rely", false),
            ("DATA", "data", false),
            ("SIZE", "equivphyskloc", true),
            ("CPLX", "cplx", false),
            ("TIME", "time", false),
            ("STOR", "stor", false),
            ("ACAP", "acap", false),
            ("AEXP", "aexp", false),
            ("LTEX", "lexp", false),
            ("PCAP", "pcap", false),
            ("VEXP", "vexp", false),
            ("TOOL", "tool", false),
        ];
        Self {
            levels: OrdinalLevels::default(),
            columns: pairs
                .iter()
                .map(|&(code, col, log)| (code.to_string(), ColumnSource::new(col, log)))
                .collect(),
        }
    }
}

impl MappingConfig {
    pub fn column_for(&self, code: &str) -> Option<&ColumnSource> {
        self.columns
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(code))
            .map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Source {
    Ordinal { column: String },
    Numeric { column: String, log: bool, min: f64, max: f64 },
}

/// A mapping fitted to a dataset: numeric columns carry their observed
/// range so that every record maps into `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMapping {
    codes: Vec<String>,
    levels: OrdinalLevels,
    sources: Vec<Source>,
}

impl FeatureMapping {
    /// Resolves `codes` through the catalog and config, and records min/max
    /// of numeric columns over `records`.
    pub fn fit(
        records: &[ProjectRecord],
        catalog: &CriteriaCatalog,
        config: &MappingConfig,
        codes: &[String],
    ) -> Result<Self, DataError> {
        config.levels.validate()?;
        let first = records.first().ok_or(DataError::Empty)?;
        let sources = codes
            .iter()
            .map(|code| {
                if catalog.get(code).is_none() {
                    return Err(DataError::UnmappedCode(format!("{code} is not a catalog criterion")));
                }
                let src = config
                    .column_for(code)
                    .ok_or_else(|| DataError::UnmappedCode(format!("no column mapped for {code}")))?;
                match first.field(&src.column) {
                    None => Err(DataError::UnmappedCode(format!(
                        "{code} maps to column `{}`, which the dataset lacks or is not numeric",
                        src.column
                    ))),
                    Some(FieldValue::Rating(_)) => Ok(Source::Ordinal {
                        column: src.column.clone(),
                    }),
                    Some(FieldValue::Number(_)) => {
                        let values = numeric_column(records, &src.column, src.log)?;
                        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
                        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                        Ok(Source::Numeric {
                            column: src.column.clone(),
                            log: src.log,
                            min,
                            max,
                        })
                    }
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            codes: codes.to_vec(),
            levels: config.levels,
            sources,
        })
    }

    pub fn codes(&self) -> &[String] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

fn transformed(v: f64, log: bool, record: &ProjectRecord, column: &str) -> Result<f64, DataError> {
    if !log {
        return Ok(v);
    }
    if v <= 0.0 {
        return Err(DataError::Malformed {
            line: record.line,
            message: format!("log scaling needs positive `{column}`, got {v}"),
        });
    }
    Ok(v.ln())
}

/// Values of a numeric column, optionally log-transformed. Missing values are
/// an error.
pub fn numeric_column(records: &[ProjectRecord], column: &str, log: bool) -> Result<Vec<f64>, DataError> {
    records
        .iter()
        .map(|r| match r.field(column) {
            Some(FieldValue::Number(Some(v))) => transformed(v, log, r, column),
            Some(FieldValue::Number(None)) => Err(DataError::Missing {
                record: r.id.clone(),
                column: column.to_string(),
            }),
            _ => Err(DataError::UnmappedCode(format!("`{column}` is not a numeric column"))),
        })
        .collect()
}

/// Feature vector of a record, one value in `[0, 1]` per mapped criterion.
///
/// Ordinal levels use the configured spacing; a missing rating counts as
/// nominal. Numeric columns are min-max scaled over the fitted range and
/// clamped; a missing numeric value is an error.
pub fn map_ratings_to_features(record: &ProjectRecord, mapping: &FeatureMapping) -> Result<Vec<f64>, DataError> {
    mapping
        .sources
        .iter()
        .map(|src| match src {
            Source::Ordinal { column } => match record.field(column) {
                Some(FieldValue::Rating(Some(r))) => Ok(mapping.levels.value(r)),
                Some(FieldValue::Rating(None)) => {
                    log::warn!("record {}: `{column}` missing, using nominal", record.id);
                    Ok(mapping.levels.value(Rating::Nominal))
                }
                _ => Err(DataError::UnmappedCode(format!("record {} lacks `{column}`", record.id))),
            },
            Source::Numeric { column, log, min, max } => match record.field(column) {
                Some(FieldValue::Number(Some(v))) => {
                    let v = transformed(v, *log, record, column)?;
                    let width = max - min;
                    Ok(if width > 0.0 {
                        ((v - min) / width).clamp(0.0, 1.0)
                    } else {
                        0.5
                    })
                }
                _ => Err(DataError::Missing {
                    record: record.id.clone(),
                    column: column.clone(),
                }),
            },
        })
        .collect()
}
