//! Intuitionistic fuzzy TOPSIS.
//!
//! Alternatives are rated per criterion with intuitionistic fuzzy values.
//! After weighting, each alternative's normalized Euclidean distance to the
//! positive and negative ideal solutions gives a closeness coefficient
//! `xi = V- / (V- + V+)`; larger is better.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuzzy::{ifv_multiply, IntuitionisticFuzzyValue};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopsisError {
    #[error("decision matrix has no alternatives or no criteria")]
    Empty,
    #[error("row {row} has {got} entries, expected {expected}")]
    Ragged { row: usize, got: usize, expected: usize },
    #[error("{what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("alternative {index} coincides with both ideal solutions; closeness is undefined")]
    DegenerateAlternative { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionKind {
    /// Larger membership is better.
    #[default]
    Benefit,
    /// Smaller membership is better.
    Cost,
}

/// Alternatives x criteria grid of intuitionistic fuzzy ratings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix<T>", into = "RawMatrix<T>")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct IfDecisionMatrix<T> {
    rows: Vec<Vec<IntuitionisticFuzzyValue<T>>>,
    kinds: Vec<CriterionKind>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
struct RawMatrix<T> {
    criteria_kinds: Vec<CriterionKind>,
    rows: Vec<Vec<IntuitionisticFuzzyValue<T>>>,
}

impl<T: Real> TryFrom<RawMatrix<T>> for IfDecisionMatrix<T> {
    type Error = TopsisError;

    fn try_from(raw: RawMatrix<T>) -> Result<Self, Self::Error> {
        Self::new(raw.rows, raw.criteria_kinds)
    }
}

impl<T: Real> From<IfDecisionMatrix<T>> for RawMatrix<T> {
    fn from(m: IfDecisionMatrix<T>) -> Self {
        RawMatrix {
            criteria_kinds: m.kinds,
            rows: m.rows,
        }
    }
}

impl<T: Real> IfDecisionMatrix<T> {
    pub fn new(
        rows: Vec<Vec<IntuitionisticFuzzyValue<T>>>,
        kinds: Vec<CriterionKind>,
    ) -> Result<Self, TopsisError> {
        if rows.is_empty() || kinds.is_empty() {
            return Err(TopsisError::Empty);
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != kinds.len() {
                return Err(TopsisError::Ragged {
                    row,
                    got: r.len(),
                    expected: kinds.len(),
                });
            }
        }
        Ok(Self { rows, kinds })
    }

    pub fn alternatives(&self) -> usize {
        self.rows.len()
    }

    pub fn criteria(&self) -> usize {
        self.kinds.len()
    }

    pub fn rows(&self) -> &[Vec<IntuitionisticFuzzyValue<T>>] {
        &self.rows
    }

    pub fn kinds(&self) -> &[CriterionKind] {
        &self.kinds
    }

    pub fn get(&self, alternative: usize, criterion: usize) -> IntuitionisticFuzzyValue<T> {
        self.rows[alternative][criterion]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct IdealSolutions<T> {
    pub positive: Vec<IntuitionisticFuzzyValue<T>>,
    pub negative: Vec<IntuitionisticFuzzyValue<T>>,
}

/// Multiplies every cell by its criterion's weight.
pub fn weighted_if_matrix<T: Real>(
    raw: &IfDecisionMatrix<T>,
    weights: &[IntuitionisticFuzzyValue<T>],
) -> Result<IfDecisionMatrix<T>, TopsisError> {
    if weights.len() != raw.criteria() {
        return Err(TopsisError::LengthMismatch {
            what: "criterion weights",
            expected: raw.criteria(),
            got: weights.len(),
        });
    }
    let rows = raw
        .rows
        .iter()
        .map(|r| r.iter().zip(weights).map(|(&c, &w)| ifv_multiply(c, w)).collect())
        .collect();
    Ok(IfDecisionMatrix {
        rows,
        kinds: raw.kinds.clone(),
    })
}

/// Per criterion, the positive ideal takes the largest membership and
/// smallest non-membership (benefit) or the reverse (cost); the negative
/// ideal is the opposite corner.
pub fn ideal_solutions<T: Real>(m: &IfDecisionMatrix<T>) -> IdealSolutions<T> {
    let mut positive = Vec::with_capacity(m.criteria());
    let mut negative = Vec::with_capacity(m.criteria());
    for (j, kind) in m.kinds.iter().enumerate() {
        let col = m.rows.iter().map(|r| r[j]);
        let (mut mu_max, mut mu_min) = (T::neg_infinity(), T::infinity());
        let (mut nu_max, mut nu_min) = (T::neg_infinity(), T::infinity());
        for v in col {
            mu_max = mu_max.max(v.mu());
            mu_min = mu_min.min(v.mu());
            nu_max = nu_max.max(v.nu());
            nu_min = nu_min.min(v.nu());
        }
        // max mu + min nu never exceeds the row attaining max mu, so these
        // corners are valid values.
        let best = IntuitionisticFuzzyValue::new(mu_max, nu_min).expect("valid corner");
        let worst = IntuitionisticFuzzyValue::new(mu_min, nu_max).expect("valid corner");
        match kind {
            CriterionKind::Benefit => {
                positive.push(best);
                negative.push(worst);
            }
            CriterionKind::Cost => {
                positive.push(worst);
                negative.push(best);
            }
        }
    }
    IdealSolutions { positive, negative }
}

fn normalized_euclidean<T: Real>(
    row: &[IntuitionisticFuzzyValue<T>],
    ideal: &[IntuitionisticFuzzyValue<T>],
) -> T {
    let total = row.iter().zip(ideal).fold(T::zero(), |acc, (a, b)| {
        let dm = a.mu() - b.mu();
        let dn = a.nu() - b.nu();
        let dp = a.pi() - b.pi();
        acc + dm * dm + dn * dn + dp * dp
    });
    (total / (T::lit(2.0) * T::from_usize_lossy(row.len()))).sqrt()
}

/// Distances `(V+, V-)` of every alternative to the positive and negative
/// ideals.
pub fn separation_measures<T: Real>(
    m: &IfDecisionMatrix<T>,
    ideals: &IdealSolutions<T>,
) -> Result<(Vec<T>, Vec<T>), TopsisError> {
    for (what, v) in [("positive ideal", &ideals.positive), ("negative ideal", &ideals.negative)] {
        if v.len() != m.criteria() {
            return Err(TopsisError::LengthMismatch {
                what,
                expected: m.criteria(),
                got: v.len(),
            });
        }
    }
    Ok(m.rows
        .iter()
        .map(|r| (normalized_euclidean(r, &ideals.positive), normalized_euclidean(r, &ideals.negative)))
        .unzip())
}

/// `xi_i = V-_i / (V-_i + V+_i)`.
pub fn closeness<T: Real>(vp: &[T], vn: &[T]) -> Result<Vec<T>, TopsisError> {
    if vp.len() != vn.len() {
        return Err(TopsisError::LengthMismatch {
            what: "separation vectors",
            expected: vp.len(),
            got: vn.len(),
        });
    }
    vp.iter()
        .zip(vn)
        .enumerate()
        .map(|(index, (&p, &n))| {
            let d = p + n;
            if d > T::zero() {
                Ok((n / d).max(T::zero()).min(T::one()))
            } else {
                Err(TopsisError::DegenerateAlternative { index })
            }
        })
        .collect()
}

/// Indices by descending closeness; equal values keep ascending index order.
pub fn rank_alternatives<T: Real>(xi: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..xi.len()).collect();
    order.sort_by(|&a, &b| xi[b].partial_cmp(&xi[a]).unwrap_or(std::cmp::Ordering::Equal));
    order
}

/// Groups of alternatives (in rank order) whose closeness values are exactly
/// equal. Only groups of two or more are returned.
pub fn tie_groups<T: Real>(xi: &[T], ranking: &[usize]) -> Vec<Vec<usize>> {
    let mut groups = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for &i in ranking {
        match current.last() {
            Some(&last) if xi[last] == xi[i] => current.push(i),
            _ => {
                if current.len() > 1 {
                    groups.push(std::mem::take(&mut current));
                }
                current = vec![i];
            }
        }
    }
    if current.len() > 1 {
        groups.push(current);
    }
    groups
}

/// Everything computed from one weighted decision matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct TopsisOutcome<T> {
    pub ideals: IdealSolutions<T>,
    pub separation_positive: Vec<T>,
    pub separation_negative: Vec<T>,
    pub closeness: Vec<T>,
    pub ranking: Vec<usize>,
    pub ties: Vec<Vec<usize>>,
    /// True when the two ideals coincide, so no alternative can be told
    /// apart; every closeness is then reported as 0.5.
    pub undiscriminating: bool,
}

/// Ideals, separations, closeness and ranking of an already weighted matrix.
pub fn evaluate<T: Real>(weighted: &IfDecisionMatrix<T>) -> Result<TopsisOutcome<T>, TopsisError> {
    let ideals = ideal_solutions(weighted);
    let (vp, vn) = separation_measures(weighted, &ideals)?;
    let undiscriminating = ideals.positive == ideals.negative;
    let xi = if undiscriminating {
        vec![T::lit(0.5); weighted.alternatives()]
    } else {
        closeness(&vp, &vn)?
    };
    let ranking = rank_alternatives(&xi);
    let ties = tie_groups(&xi, &ranking);
    Ok(TopsisOutcome {
        ideals,
        separation_positive: vp,
        separation_negative: vn,
        closeness: xi,
        ranking,
        ties,
        undiscriminating,
    })
}
