//! COCOMO-81 project records from PROMISE-style CSV and ARFF files.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DataError;

/// Columns holding COCOMO ordinal ratings. Names are matched
/// case-insensitively.
pub const RATING_COLUMNS: &[&str] = &[
    "rely", "data", "cplx", "time", "stor", "virt", "turn", "acap", "aexp", "pcap", "vexp", "lexp",
    "modp", "tool", "sced", "docu", "ruse", "pcon", "site", "prec", "flex", "resl", "team", "pmat",
    "ltex",
];

const SIZE_COLUMNS: &[&str] = &["equivphyskloc", "kloc", "size"];
const EFFORT_COLUMNS: &[&str] = &["act_effort", "actual_effort", "effort"];
const ID_COLUMNS: &[&str] = &["recordnumber", "id", "record"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rating {
    VeryLow,
    Low,
    Nominal,
    High,
    VeryHigh,
    ExtraHigh,
}

impl Rating {
    pub const ALL: [Rating; 6] = [
        Rating::VeryLow,
        Rating::Low,
        Rating::Nominal,
        Rating::High,
        Rating::VeryHigh,
        Rating::ExtraHigh,
    ];

    /// Position on the scale, 0 for very low through 5 for extra high.
    pub fn level(self) -> usize {
        self as usize
    }

    pub fn short_code(self) -> &'static str {
        ["vl", "l", "n", "h", "vh", "xh"][self.level()]
    }
}

impl FromStr for Rating {
    type Err = ();

    /// Accepts PROMISE short codes (`vl`, `l`, `n`, `h`, `vh`, `xh`) and the
    /// long forms (`very_low`, `very low`, ...), case-insensitively.
    fn from_str(s: &str) -> Result<Self, ()> {
        let t = s.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        Ok(match t.as_str() {
            "vl" | "very_low" => Rating::VeryLow,
            "l" | "low" => Rating::Low,
            "n" | "nominal" => Rating::Nominal,
            "h" | "high" => Rating::High,
            "vh" | "very_high" => Rating::VeryHigh,
            "xh" | "eh" | "extra_high" => Rating::ExtraHigh,
            _ => return Err(()),
        })
    }
}

impl fmt::Display for Rating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_code())
    }
}

/// One project. `None` marks a missing (`?` or empty) value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectRecord {
    pub id: String,
    /// Ordinal ratings keyed by lower-case column name.
    pub ratings: BTreeMap<String, Option<Rating>>,
    pub size_kloc: Option<f64>,
    /// Actual effort in person-months.
    pub effort: Option<f64>,
    /// Every other column, verbatim.
    pub extras: BTreeMap<String, String>,
    /// 1-based line of the record in its source file.
    pub line: usize,
}

/// A value looked up by column name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldValue {
    Rating(Option<Rating>),
    Number(Option<f64>),
}

impl ProjectRecord {
    /// Looks a column up among ratings, the size and effort columns and
    /// numeric extras. `None` when the record has no such column or the extra
    /// is not numeric.
    pub fn field(&self, column: &str) -> Option<FieldValue> {
        let c = column.to_ascii_lowercase();
        if let Some(r) = self.ratings.get(&c) {
            return Some(FieldValue::Rating(*r));
        }
        if SIZE_COLUMNS.contains(&c.as_str()) {
            return Some(FieldValue::Number(self.size_kloc));
        }
        if EFFORT_COLUMNS.contains(&c.as_str()) {
            return Some(FieldValue::Number(self.effort));
        }
        let raw = self.extras.get(&c)?;
        if is_missing(raw) {
            return Some(FieldValue::Number(None));
        }
        raw.trim().parse().ok().map(|v| FieldValue::Number(Some(v)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    Csv,
    Arff,
}

impl DatasetFormat {
    /// Guesses the format from the file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(DatasetFormat::Csv),
            "arff" => Some(DatasetFormat::Arff),
            _ => None,
        }
    }
}

fn is_missing(v: &str) -> bool {
    let t = v.trim();
    t.is_empty() || t == "?"
}

/// Reads every data row of a CSV or ARFF file.
pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Vec<ProjectRecord>, DataError> {
    let text = fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let records = match format {
        DatasetFormat::Csv => parse_csv(&text)?,
        DatasetFormat::Arff => parse_arff(&text)?,
    };
    if records.is_empty() {
        log::warn!("{} contains no data rows", path.display());
    } else {
        log::info!("loaded {} records from {}", records.len(), path.display());
    }
    Ok(records)
}

pub fn parse_csv(text: &str) -> Result<Vec<ProjectRecord>, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| DataError::Malformed {
            line: 1,
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(DataError::Malformed {
            line: 1,
            message: "missing header row".into(),
        });
    }
    let builder = RecordBuilder::new(&header)?;
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| DataError::Malformed {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let fields: Vec<&str> = row.iter().collect();
        out.push(builder.build(&fields, line, out.len())?);
    }
    Ok(out)
}

pub fn parse_arff(text: &str) -> Result<Vec<ProjectRecord>, DataError> {
    let mut header = Vec::new();
    let mut in_data = false;
    let mut builder = None;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        if !in_data {
            let lower = trimmed.to_ascii_lowercase();
            if lower.starts_with("@attribute") {
                let rest = trimmed["@attribute".len()..].trim();
                let name = attribute_name(rest).ok_or_else(|| DataError::Malformed {
                    line,
                    message: "attribute without a name".into(),
                })?;
                header.push(name);
            } else if lower.starts_with("@data") {
                if header.is_empty() {
                    return Err(DataError::Malformed {
                        line,
                        message: "@data before any @attribute".into(),
                    });
                }
                builder = Some(RecordBuilder::new(&header)?);
                in_data = true;
            } else if !lower.starts_with("@relation") {
                return Err(DataError::Malformed {
                    line,
                    message: format!("unexpected header line `{trimmed}`"),
                });
            }
            continue;
        }
        if trimmed.starts_with('{') {
            return Err(DataError::Malformed {
                line,
                message: "sparse ARFF rows are not supported".into(),
            });
        }
        let fields = split_arff_row(trimmed).map_err(|message| DataError::Malformed { line, message })?;
        let refs: Vec<&str> = fields.iter().map(String::as_str).collect();
        let b = builder.as_ref().expect("set on @data");
        out.push(b.build(&refs, line, out.len())?);
    }
    if !in_data {
        return Err(DataError::Malformed {
            line: text.lines().count(),
            message: "no @data section".into(),
        });
    }
    Ok(out)
}

fn attribute_name(rest: &str) -> Option<String> {
    let mut chars = rest.chars();
    match chars.next()? {
        q @ ('\'' | '"') => {
            let body: String = chars.take_while(|&c| c != q).collect();
            Some(body)
        }
        _ => rest.split_whitespace().next().map(str::to_string),
    }
}

fn split_arff_row(line: &str) -> Result<Vec<String>, String> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut quote = None;
    for c in line.chars() {
        match (quote, c) {
            (Some(q), c) if c == q => quote = None,
            (Some(_), c) => cur.push(c),
            (None, '\'' | '"') => quote = Some(c),
            (None, ',') => fields.push(std::mem::take(&mut cur).trim().to_string()),
            (None, c) => cur.push(c),
        }
    }
    if quote.is_some() {
        return Err("unterminated quote".into());
    }
    fields.push(cur.trim().to_string());
    Ok(fields)
}

enum Role {
    Id,
    Rating(String),
    Size,
    Effort,
    Extra(String),
}

struct RecordBuilder {
    columns: Vec<String>,
    roles: Vec<Role>,
}

impl RecordBuilder {
    fn new(header: &[String]) -> Result<Self, DataError> {
        let columns: Vec<String> = header.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
        for (i, c) in columns.iter().enumerate() {
            if columns[..i].contains(c) {
                return Err(DataError::Malformed {
                    line: 1,
                    message: format!("duplicate column `{c}`"),
                });
            }
        }
        let first_of = |names: &[&str]| columns.iter().position(|c| names.contains(&c.as_str()));
        let (id, size, effort) = (first_of(ID_COLUMNS), first_of(SIZE_COLUMNS), first_of(EFFORT_COLUMNS));
        let roles = columns
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if Some(i) == id {
                    Role::Id
                } else if Some(i) == size {
                    Role::Size
                } else if Some(i) == effort {
                    Role::Effort
                } else if RATING_COLUMNS.contains(&c.as_str()) {
                    Role::Rating(c.clone())
                } else {
                    Role::Extra(c.clone())
                }
            })
            .collect();
        Ok(Self { columns, roles })
    }

    fn build(&self, fields: &[&str], line: usize, index: usize) -> Result<ProjectRecord, DataError> {
        if fields.len() != self.columns.len() {
            return Err(DataError::Malformed {
                line,
                message: format!("expected {} fields, found {}", self.columns.len(), fields.len()),
            });
        }
        let mut rec = ProjectRecord {
            id: (index + 1).to_string(),
            ratings: BTreeMap::new(),
            size_kloc: None,
            effort: None,
            extras: BTreeMap::new(),
            line,
        };
        for ((role, &value), column) in self.roles.iter().zip(fields).zip(&self.columns) {
            let number = || -> Result<Option<f64>, DataError> {
                if is_missing(value) {
                    return Ok(None);
                }
                let v: f64 = value.parse().map_err(|_| DataError::UnknownToken {
                    line,
                    column: column.clone(),
                    token: value.to_string(),
                })?;
                if v.is_finite() {
                    Ok(Some(v))
                } else {
                    Err(DataError::UnknownToken {
                        line,
                        column: column.clone(),
                        token: value.to_string(),
                    })
                }
            };
            match role {
                Role::Id => {
                    if !is_missing(value) {
                        rec.id = value.to_string();
                    }
                }
                Role::Rating(name) => {
                    let rating = if is_missing(value) {
                        None
                    } else {
                        Some(value.parse::<Rating>().map_err(|_| DataError::UnknownToken {
                            line,
                            column: name.clone(),
                            token: value.to_string(),
                        })?)
                    };
                    rec.ratings.insert(name.clone(), rating);
                }
                Role::Size => {
                    rec.size_kloc = number()?;
                    if let Some(s) = rec.size_kloc.filter(|&s| s <= 0.0) {
                        return Err(DataError::Malformed {
                            line,
                            message: format!("size must be positive, got {s}"),
                        });
                    }
                }
                Role::Effort => rec.effort = number()?,
                Role::Extra(name) => {
                    rec.extras.insert(name.clone(), value.to_string());
                }
            }
        }
        Ok(rec)
    }
}
