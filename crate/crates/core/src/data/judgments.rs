//! Respondent judgment files for DEMATEL.
//!
//! ```json
//! { "criteria": ["A", "B"],
//!   "respondents": [ [[0, "High"], [[0.0, 0.25, 0.5], 0]] ] }
//! ```
//!
//! An entry is a scale level (integer), a scale term, or an explicit fuzzy
//! number `[l, m, u]`. A crisp `direct_relation` matrix may replace the
//! respondents. An optional `scale` overrides the default five-level scale.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DataError;
use crate::dematel::JudgmentMatrix;
use crate::fuzzy::{LinguisticScale, TriangularFuzzyNumber};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JudgmentEntry {
    Level(usize),
    Label(String),
    Fuzzy([f64; 3]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgmentsFile {
    pub criteria: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<LinguisticScale<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub respondents: Option<Vec<Vec<Vec<JudgmentEntry>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct_relation: Option<Matrix<f64>>,
}

impl JudgmentsFile {
    /// Resolves every entry to a fuzzy number. A `direct_relation` matrix
    /// becomes a single respondent with crisp entries.
    pub fn resolve(&self, fallback: &LinguisticScale<f64>) -> Result<Vec<JudgmentMatrix<f64>>, DataError> {
        let n = self.criteria.len();
        let bad = |m: String| DataError::Judgment(m);
        let scale = self.scale.as_ref().unwrap_or(fallback);
        let matrices = match (&self.respondents, &self.direct_relation) {
            (Some(_), Some(_)) => return Err(bad("give respondents or direct_relation, not both".into())),
            (None, None) => return Err(bad("no respondent matrices".into())),
            (None, Some(s)) => {
                if s.rows() != n || s.cols() != n {
                    return Err(bad(format!("direct_relation must be {n}x{n}")));
                }
                let m = s
                    .to_rows()
                    .into_iter()
                    .map(|row| {
                        row.into_iter()
                            .map(|v| TriangularFuzzyNumber::crisp(v).map_err(|e| bad(e.to_string())))
                            .collect()
                    })
                    .collect::<Result<_, _>>()?;
                vec![m]
            }
            (Some(resp), None) => resp
                .iter()
                .enumerate()
                .map(|(r, m)| {
                    if m.len() != n || m.iter().any(|row| row.len() != n) {
                        return Err(bad(format!("respondent {r} matrix is not {n}x{n}")));
                    }
                    m.iter()
                        .enumerate()
                        .map(|(i, row)| {
                            row.iter()
                                .enumerate()
                                .map(|(j, e)| {
                                    resolve_entry(e, scale).map_err(|msg| {
                                        bad(format!("respondent {r}, cell ({i}, {j}): {msg}"))
                                    })
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect::<Result<Vec<_>, _>>()?,
        };
        if matrices.is_empty() {
            return Err(bad("no respondent matrices".into()));
        }
        Ok(matrices)
    }
}

fn resolve_entry(
    e: &JudgmentEntry,
    scale: &LinguisticScale<f64>,
) -> Result<TriangularFuzzyNumber<f64>, String> {
    match e {
        JudgmentEntry::Level(k) => scale.tfn_at(*k),
        JudgmentEntry::Label(s) => scale.tfn(s),
        JudgmentEntry::Fuzzy([l, m, u]) => TriangularFuzzyNumber::new(*l, *m, *u),
    }
    .map_err(|e| e.to_string())
}

pub fn load_judgments(path: &Path) -> Result<JudgmentsFile, DataError> {
    let text = fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| DataError::Json {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_entries() {
        let f: JudgmentsFile = serde_json::from_str(
            r#"{"criteria":["A","B"],"respondents":[[[0,"high"],[[0.0,0.25,0.5],0]]]}"#,
        )
        .unwrap();
        let m = f.resolve(&LinguisticScale::dematel_default()).unwrap();
        assert_eq!(m[0][0][1], TriangularFuzzyNumber::new(0.5, 0.75, 1.0).unwrap());
        assert_eq!(m[0][1][0], TriangularFuzzyNumber::new(0.0, 0.25, 0.5).unwrap());
    }

    #[test]
    fn crisp_matrix_and_errors() {
        let f: JudgmentsFile =
            serde_json::from_str(r#"{"criteria":["A","B"],"direct_relation":[[0,2],[1,0]]}"#).unwrap();
        let m = f.resolve(&LinguisticScale::dematel_default()).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0][0][1].modal(), 2.0);
        let scale = LinguisticScale::dematel_default();
        let none: JudgmentsFile = serde_json::from_str(r#"{"criteria":["A"]}"#).unwrap();
        assert!(none.resolve(&scale).is_err());
        let bad: JudgmentsFile =
            serde_json::from_str(r#"{"criteria":["A","B"],"respondents":[[[0,9],[1,0]]]}"#).unwrap();
        let msg = bad.resolve(&scale).unwrap_err().to_string();
        assert!(msg.contains("cell (0, 1)"), "{msg}");
        let ragged: JudgmentsFile =
            serde_json::from_str(r#"{"criteria":["A","B"],"respondents":[[[0,1]]]}"#).unwrap();
        assert!(ragged.resolve(&scale).is_err());
    }
}
