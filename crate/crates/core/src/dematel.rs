//! Fuzzy DEMATEL: respondent judgments to criterion priority weights.
//!
//! Respondent matrices of fuzzy judgments are defuzzified cell by cell into a
//! direct-relation matrix `S`, normalized by its largest row sum into `Q`,
//! expanded into the total-relation matrix `T = Q (I - Q)^-1`, and summarized
//! by row sums `R`, column sums `C`, prominence `R + C` and relation `R - C`.
//! Priority weights are the normalized prominence.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuzzy::{cfcs_defuzzify, FuzzyError, LinguisticScale, TriangularFuzzyNumber};
use crate::linalg::{lu_solve, LinalgError, Matrix};
use crate::scalar::{sum, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DematelError {
    #[error("no respondent matrices supplied")]
    NoResponses,
    #[error("respondent {respondent} matrix is {rows}x{cols}, expected {n}x{n}")]
    ShapeMismatch {
        respondent: usize,
        rows: usize,
        cols: usize,
        n: usize,
    },
    #[error("respondent {respondent}, cell ({row}, {col}): {source}")]
    Judgment {
        respondent: usize,
        row: usize,
        col: usize,
        #[source]
        source: FuzzyError,
    },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("negative direct-relation entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("normalized matrix has spectral radius {radius:.6} >= 1; the total-relation series diverges")]
    Divergent { radius: f64 },
    #[error("I - Q is singular: {0}")]
    Singular(#[from] LinalgError),
}

/// One respondent's `n x n` matrix of fuzzy influence judgments.
pub type JudgmentMatrix<T> = Vec<Vec<TriangularFuzzyNumber<T>>>;

/// Averaged crisp direct-relation matrix `S` (zero diagonal, nonnegative).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct DirectRelationMatrix<T> {
    entries: Matrix<T>,
    respondent_count: usize,
}

impl<T: Real> DirectRelationMatrix<T> {
    /// Wraps a crisp matrix. The diagonal must be zero and entries nonnegative.
    pub fn new(entries: Matrix<T>, respondent_count: usize) -> Result<Self, DematelError> {
        if !entries.is_square() {
            return Err(DematelError::ShapeMismatch {
                respondent: 0,
                rows: entries.rows(),
                cols: entries.cols(),
                n: entries.rows(),
            });
        }
        for i in 0..entries.rows() {
            for j in 0..entries.cols() {
                let v = entries[(i, j)];
                if !(v >= T::zero()) || !v.is_finite() {
                    return Err(DematelError::NegativeEntry {
                        row: i,
                        col: j,
                        value: v.to_f64_lossy(),
                    });
                }
                if i == j && v != T::zero() {
                    return Err(DematelError::Degenerate(format!(
                        "diagonal entry ({i}, {i}) is {v}, expected 0"
                    )));
                }
            }
        }
        Ok(Self {
            entries,
            respondent_count,
        })
    }

    pub fn entries(&self) -> &Matrix<T> {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    pub fn respondent_count(&self) -> usize {
        self.respondent_count
    }
}

/// Full DEMATEL output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct DematelResult<T> {
    pub q: Matrix<T>,
    pub t: Matrix<T>,
    pub r_row: Vec<T>,
    pub c_col: Vec<T>,
    pub prominence: Vec<T>,
    pub relation: Vec<T>,
    pub weights: Vec<T>,
}

/// Defuzzifies respondents' judgments cell by cell with CFCS. The diagonal is
/// forced to zero whatever the respondents entered there.
pub fn aggregate_responses<T: Real>(
    matrices: &[JudgmentMatrix<T>],
) -> Result<DirectRelationMatrix<T>, DematelError> {
    let first = matrices.first().ok_or(DematelError::NoResponses)?;
    let n = first.len();
    for (r, m) in matrices.iter().enumerate() {
        let bad_row = m.iter().find(|row| row.len() != n);
        if m.len() != n || bad_row.is_some() {
            return Err(DematelError::ShapeMismatch {
                respondent: r,
                rows: m.len(),
                cols: bad_row.map_or(n, Vec::len),
                n,
            });
        }
    }
    let mut cell = Vec::with_capacity(matrices.len());
    let mut entries = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            cell.clear();
            cell.extend(matrices.iter().map(|m| m[i][j]));
            entries[(i, j)] = cfcs_defuzzify(&cell).map_err(|source| DematelError::Judgment {
                respondent: 0,
                row: i,
                col: j,
                source,
            })?;
        }
    }
    DirectRelationMatrix::new(entries, matrices.len())
}

/// Resolves linguistic labels against a scale, then aggregates.
pub fn aggregate_linguistic<T: Real>(
    matrices: &[Vec<Vec<String>>],
    scale: &LinguisticScale<T>,
) -> Result<DirectRelationMatrix<T>, DematelError> {
    let resolved = matrices
        .iter()
        .enumerate()
        .map(|(r, m)| {
            m.iter()
                .enumerate()
                .map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(j, label)| {
                            scale.tfn(label).map_err(|source| DematelError::Judgment {
                                respondent: r,
                                row: i,
                                col: j,
                                source,
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    aggregate_responses(&resolved)
}

/// `Q = S / max_i sum_j s_ij`. Returns `(Q, L)` where `L` is the normalizer.
pub fn normalize_direct_matrix<T: Real>(
    s: &DirectRelationMatrix<T>,
) -> Result<(Matrix<T>, T), DematelError> {
    let max_row = s.entries.row_sums().into_iter().fold(T::zero(), T::max);
    if max_row <= T::zero() {
        return Err(DematelError::Degenerate(
            "direct-relation matrix has no positive entry".into(),
        ));
    }
    let l = T::one() / max_row;
    Ok((s.entries.map(|x| x * l), l))
}

/// Spectral radius estimate by repeated squaring: `rho = lim ||Q^k||^(1/k)`.
pub fn spectral_radius<T: Real>(q: &Matrix<T>) -> f64 {
    const SQUARINGS: u32 = 40;
    let n = q.rows();
    let mut m = Matrix::from_fn(n, n, |i, j| q[(i, j)].to_f64_lossy());
    let norm = m.norm_inf();
    if norm == 0.0 || !norm.is_finite() {
        return if norm == 0.0 { 0.0 } else { f64::INFINITY };
    }
    // Invariant: Q^(2^k) = exp(log_scale) * m with ||m|| = 1.
    m = m.map(|x| x / norm);
    let mut log_scale = norm.ln();
    let mut power = 1.0f64;
    for _ in 0..SQUARINGS {
        let sq = m.matmul(&m).expect("square");
        let s = sq.norm_inf();
        if s == 0.0 {
            return 0.0;
        }
        m = sq.map(|x| x / s);
        log_scale = 2.0 * log_scale + s.ln();
        power *= 2.0;
    }
    (log_scale / power).exp()
}

/// `T = Q (I - Q)^-1`, computed by solving `(I - Q) T = Q` (the two factors
/// commute).
pub fn total_relation_matrix<T: Real>(q: &Matrix<T>) -> Result<Matrix<T>, DematelError> {
    if !q.is_square() {
        return Err(DematelError::ShapeMismatch {
            respondent: 0,
            rows: q.rows(),
            cols: q.cols(),
            n: q.rows(),
        });
    }
    let radius = spectral_radius(q);
    if radius >= 1.0 - 1e-12 {
        return Err(DematelError::Divergent { radius });
    }
    let n = q.rows();
    let lhs = Matrix::identity(n).sub(q);
    Ok(lu_solve(&lhs, q)?)
}

/// Row sums `R` and column sums `C` of `T`.
pub fn prominence_relation<T: Real>(t: &Matrix<T>) -> (Vec<T>, Vec<T>) {
    (t.row_sums(), t.col_sums())
}

/// `w_i = (R_i + C_i) / sum_k (R_k + C_k)`.
pub fn priority_weights<T: Real>(r: &[T], c: &[T]) -> Result<Vec<T>, DematelError> {
    if r.len() != c.len() {
        return Err(DematelError::Degenerate(format!(
            "{} row sums but {} column sums",
            r.len(),
            c.len()
        )));
    }
    if r.len() == 1 {
        return Ok(vec![T::one()]);
    }
    let prominence: Vec<T> = r.iter().zip(c).map(|(&a, &b)| a + b).collect();
    let total = sum(&prominence);
    if !(total > T::zero()) {
        return Err(DematelError::Degenerate("total prominence is zero".into()));
    }
    Ok(prominence.into_iter().map(|p| p / total).collect())
}

/// Runs normalization through priority weights on an aggregated matrix.
///
/// A single criterion has nothing to relate to; it receives weight 1 and
/// zero matrices.
pub fn analyze<T: Real>(s: &DirectRelationMatrix<T>) -> Result<DematelResult<T>, DematelError> {
    let n = s.n();
    if n == 0 {
        return Err(DematelError::Degenerate("no criteria".into()));
    }
    let (q, t) = if n == 1 {
        (Matrix::zeros(1, 1), Matrix::zeros(1, 1))
    } else {
        let (q, _) = normalize_direct_matrix(s)?;
        let t = total_relation_matrix(&q)?;
        (q, t)
    };
    let (r_row, c_col) = prominence_relation(&t);
    let weights = priority_weights(&r_row, &c_col)?;
    let prominence = r_row.iter().zip(&c_col).map(|(&a, &b)| a + b).collect();
    let relation = r_row.iter().zip(&c_col).map(|(&a, &b)| a - b).collect();
    Ok(DematelResult {
        q,
        t,
        r_row,
        c_col,
        prominence,
        relation,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: Vec<Vec<f64>>) -> Matrix<f64> {
        Matrix::from_rows(rows).unwrap()
    }

    fn crisp_judgments(rows: &[&[f64]]) -> JudgmentMatrix<f64> {
        rows.iter()
            .map(|r| r.iter().map(|&c| TriangularFuzzyNumber::crisp(c).unwrap()).collect())
            .collect()
    }

    #[test]
    fn crisp_passthrough_and_idempotent_average() {
        let m = crisp_judgments(&[&[0.0, 2.0], &[1.0, 0.0]]);
        let one = aggregate_responses(std::slice::from_ref(&m)).unwrap();
        assert_eq!(one.entries(), &mat(vec![vec![0.0, 2.0], vec![1.0, 0.0]]));
        let two = aggregate_responses(&[m.clone(), m]).unwrap();
        assert_eq!(one.entries(), two.entries());
        assert_eq!(two.respondent_count(), 2);
    }

    #[test]
    fn mixed_responses_land_between_extremes() {
        let scale = LinguisticScale::<f64>::dematel_default();
        let a = vec![
            vec!["No influence".to_string(), "No influence".to_string()],
            vec!["Low".to_string(), "No influence".to_string()],
        ];
        let mut b = a.clone();
        b[0][1] = "Very high".to_string();
        let s = aggregate_linguistic(&[a, b], &scale).unwrap();
        // Span [0, 1]; (0,0,0.25) -> left 0, right 0.2, crisp 0.04/1.2;
        // (0.75,1,1) -> left 0.8, right 1, crisp 1.16/1.2. Mean 0.5.
        let expected = (0.04 / 1.2 + 1.16 / 1.2) / 2.0;
        let v = s.entries()[(0, 1)];
        assert!(v > 0.0 && v < 1.0);
        assert!((v - expected).abs() < 1e-14, "{v} vs {expected}");
    }

    #[test]
    fn aggregate_errors() {
        assert_eq!(aggregate_responses::<f64>(&[]), Err(DematelError::NoResponses));
        let a = crisp_judgments(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let b = crisp_judgments(&[&[0.0]]);
        assert!(matches!(
            aggregate_responses(&[a, b]),
            Err(DematelError::ShapeMismatch { respondent: 1, .. })
        ));
    }

    #[test]
    fn two_by_two_trace() {
        let s = DirectRelationMatrix::new(mat(vec![vec![0.0, 2.0], vec![1.0, 0.0]]), 1).unwrap();
        let (q, l) = normalize_direct_matrix(&s).unwrap();
        assert_eq!(l, 0.5);
        assert_eq!(q, mat(vec![vec![0.0, 1.0], vec![0.5, 0.0]]));
        let t = total_relation_matrix(&q).unwrap();
        assert!(t.max_abs_diff(&mat(vec![vec![1.0, 2.0], vec![1.0, 1.0]])) < 1e-12);
        let (r, c) = prominence_relation(&t);
        assert!((r[0] - 3.0).abs() < 1e-12 && (r[1] - 2.0).abs() < 1e-12);
        assert!((c[0] - 2.0).abs() < 1e-12 && (c[1] - 3.0).abs() < 1e-12);
        let w = priority_weights(&r, &c).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn normalize_edge_cases() {
        let unit = mat(vec![vec![0.0, 1.0], vec![0.5, 0.0]]);
        let s = DirectRelationMatrix::new(unit.clone(), 1).unwrap();
        assert_eq!(normalize_direct_matrix(&s).unwrap().0, unit);
        let zero = DirectRelationMatrix::new(Matrix::<f64>::zeros(2, 2), 1).unwrap();
        assert!(matches!(normalize_direct_matrix(&zero), Err(DematelError::Degenerate(_))));
        assert!(DirectRelationMatrix::new(mat(vec![vec![1.0, 0.0], vec![0.0, 0.0]]), 1).is_err());
        assert!(DirectRelationMatrix::new(mat(vec![vec![0.0, -1.0], vec![0.0, 0.0]]), 1).is_err());
    }

    #[test]
    fn total_relation_edge_cases() {
        let zero = Matrix::<f64>::zeros(3, 3);
        assert_eq!(total_relation_matrix(&zero).unwrap(), zero);
        let swap = mat(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(matches!(total_relation_matrix(&swap), Err(DematelError::Divergent { .. })));
        let big = mat(vec![vec![0.0, 2.0], vec![2.0, 0.0]]);
        assert!(matches!(total_relation_matrix(&big), Err(DematelError::Divergent { .. })));
    }

    #[test]
    fn spectral_radius_known_values() {
        assert_eq!(spectral_radius(&Matrix::<f64>::zeros(2, 2)), 0.0);
        let q = mat(vec![vec![0.0, 1.0], vec![0.5, 0.0]]);
        assert!((spectral_radius(&q) - 0.5f64.sqrt()).abs() < 1e-9);
        let nilpotent = mat(vec![vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert_eq!(spectral_radius(&nilpotent), 0.0);
    }

    #[test]
    fn prominence_and_weights_edge_cases() {
        let (r, c) = prominence_relation(&mat(vec![vec![2.0, 0.0], vec![0.0, 3.0]]));
        assert_eq!(r, vec![2.0, 3.0]);
        assert_eq!(c, vec![2.0, 3.0]);
        let (r, c) = prominence_relation(&Matrix::<f64>::zeros(2, 2));
        assert_eq!((r.clone(), c.clone()), (vec![0.0; 2], vec![0.0; 2]));
        assert!(priority_weights(&r, &c).is_err());
        assert_eq!(priority_weights(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(priority_weights(&[0.0], &[0.0]).unwrap(), vec![1.0]);
    }

    #[test]
    fn single_criterion_analysis() {
        let s = DirectRelationMatrix::new(Matrix::<f64>::zeros(1, 1), 3).unwrap();
        assert_eq!(analyze(&s).unwrap().weights, vec![1.0]);
    }
}
