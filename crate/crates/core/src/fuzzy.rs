//! Triangular fuzzy numbers, linguistic scales, CFCS defuzzification and
//! intuitionistic fuzzy values.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

/// Tolerance used when validating intuitionistic fuzzy values.
pub const IFV_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuzzyError {
    #[error("invalid triangular fuzzy number ({l}, {m}, {u}): need finite l <= m <= u")]
    InvalidTfn { l: f64, m: f64, u: f64 },
    #[error("invalid intuitionistic fuzzy value (mu={mu}, nu={nu}): need mu, nu in [0,1] and mu + nu <= 1")]
    InvalidIfv { mu: f64, nu: f64 },
    #[error("unknown linguistic term {label:?} in scale {scale:?}")]
    UnknownLabel { label: String, scale: String },
    #[error("invalid linguistic scale {scale:?}: {reason}")]
    InvalidScale { scale: String, reason: String },
    #[error("cannot defuzzify an empty list of judgments")]
    EmptyJudgments,
}

/// A triangular fuzzy number `(l, m, u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[T; 3]", into = "[T; 3]")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct TriangularFuzzyNumber<T> {
    l: T,
    m: T,
    u: T,
}

impl<T: Real> TriangularFuzzyNumber<T> {
    pub fn new(l: T, m: T, u: T) -> Result<Self, FuzzyError> {
        let finite = l.is_finite() && m.is_finite() && u.is_finite();
        if !finite || l > m || m > u {
            return Err(FuzzyError::InvalidTfn {
                l: l.to_f64_lossy(),
                m: m.to_f64_lossy(),
                u: u.to_f64_lossy(),
            });
        }
        Ok(Self { l, m, u })
    }

    /// The degenerate number `(c, c, c)`.
    pub fn crisp(c: T) -> Result<Self, FuzzyError> {
        Self::new(c, c, c)
    }

    pub fn lower(&self) -> T {
        self.l
    }

    pub fn modal(&self) -> T {
        self.m
    }

    pub fn upper(&self) -> T {
        self.u
    }

    /// Multiplies every component by a positive factor.
    pub fn scaled(&self, factor: T) -> Result<Self, FuzzyError> {
        Self::new(self.l * factor, self.m * factor, self.u * factor)
    }
}

impl<T: Real> TryFrom<[T; 3]> for TriangularFuzzyNumber<T> {
    type Error = FuzzyError;

    fn try_from([l, m, u]: [T; 3]) -> Result<Self, Self::Error> {
        Self::new(l, m, u)
    }
}

impl<T: Real> From<TriangularFuzzyNumber<T>> for [T; 3] {
    fn from(t: TriangularFuzzyNumber<T>) -> Self {
        [t.l, t.m, t.u]
    }
}

/// An ordered set of linguistic terms, each mapped to a fuzzy number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScale<T>", into = "RawScale<T>")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct LinguisticScale<T> {
    name: String,
    labels: Vec<String>,
    tfns: Vec<TriangularFuzzyNumber<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
struct RawScale<T> {
    name: String,
    terms: Vec<(String, TriangularFuzzyNumber<T>)>,
}

impl<T: Real> TryFrom<RawScale<T>> for LinguisticScale<T> {
    type Error = FuzzyError;

    fn try_from(raw: RawScale<T>) -> Result<Self, Self::Error> {
        let (labels, tfns) = raw.terms.into_iter().unzip();
        Self::new(raw.name, labels, tfns)
    }
}

impl<T: Real> From<LinguisticScale<T>> for RawScale<T> {
    fn from(s: LinguisticScale<T>) -> Self {
        RawScale {
            name: s.name,
            terms: s.labels.into_iter().zip(s.tfns).collect(),
        }
    }
}

impl<T: Real> LinguisticScale<T> {
    pub fn new(
        name: impl Into<String>,
        labels: Vec<String>,
        tfns: Vec<TriangularFuzzyNumber<T>>,
    ) -> Result<Self, FuzzyError> {
        let name = name.into();
        let invalid = |reason: &str| FuzzyError::InvalidScale {
            scale: name.clone(),
            reason: reason.to_string(),
        };
        if labels.len() != tfns.len() {
            return Err(invalid("labels and fuzzy numbers differ in length"));
        }
        if labels.len() < 2 {
            return Err(invalid("a scale needs at least two terms"));
        }
        if tfns.windows(2).any(|w| w[0].modal() >= w[1].modal()) {
            return Err(invalid("modal values must be strictly increasing"));
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(invalid("duplicate term"));
            }
        }
        Ok(Self { name, labels, tfns })
    }

    /// The five-level influence scale used for DEMATEL judgments, indexed
    /// 0 (no influence) through 4 (very high influence).
    pub fn dematel_default() -> Self {
        let q = T::lit(0.25);
        let h = T::lit(0.5);
        let tq = T::lit(0.75);
        let (z, o) = (T::zero(), T::one());
        let terms = [
            ("No influence", [z, z, q]),
            ("Very low", [z, q, h]),
            ("Low", [q, h, tq]),
            ("High", [h, tq, o]),
            ("Very high", [tq, o, o]),
        ];
        let (labels, tfns) = terms
            .into_iter()
            .map(|(label, [l, m, u])| {
                (label.to_string(), TriangularFuzzyNumber { l, m, u })
            })
            .unzip();
        Self::new("dematel-default", labels, tfns).expect("default scale is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Fuzzy number for a term, matched case-insensitively.
    pub fn tfn(&self, label: &str) -> Result<TriangularFuzzyNumber<T>, FuzzyError> {
        self.labels
            .iter()
            .position(|l| l.eq_ignore_ascii_case(label.trim()))
            .map(|i| self.tfns[i])
            .ok_or_else(|| FuzzyError::UnknownLabel {
                label: label.to_string(),
                scale: self.name.clone(),
            })
    }

    /// Fuzzy number for the term at a scale position (0-based).
    pub fn tfn_at(&self, level: usize) -> Result<TriangularFuzzyNumber<T>, FuzzyError> {
        self.tfns
            .get(level)
            .copied()
            .ok_or_else(|| FuzzyError::UnknownLabel {
                label: level.to_string(),
                scale: self.name.clone(),
            })
    }
}

/// Looks up a linguistic term in a scale.
pub fn tfn_from_linguistic<T: Real>(
    label: &str,
    scale: &LinguisticScale<T>,
) -> Result<TriangularFuzzyNumber<T>, FuzzyError> {
    scale.tfn(label)
}

/// Converts fuzzy judgments into a single crisp score (CFCS).
///
/// The judgments are normalized over their common span `[min l, max u]`,
/// turned into left and right normalized scores, combined into a total
/// normalized crisp value, rescaled to the span and averaged.
pub fn cfcs_defuzzify<T: Real>(judgments: &[TriangularFuzzyNumber<T>]) -> Result<T, FuzzyError> {
    if judgments.is_empty() {
        return Err(FuzzyError::EmptyJudgments);
    }
    let lo = judgments.iter().map(|t| t.l).fold(T::infinity(), T::min);
    let hi = judgments.iter().map(|t| t.u).fold(T::neg_infinity(), T::max);
    let span = hi - lo;
    if span <= T::zero() {
        return Ok(lo);
    }
    let one = T::one();
    let total = judgments.iter().fold(T::zero(), |acc, t| {
        let xl = (t.l - lo) / span;
        let xm = (t.m - lo) / span;
        let xu = (t.u - lo) / span;
        let left = xm / (one + xm - xl);
        let right = xu / (one + xu - xm);
        let crisp = (left * (one - left) + right * right) / (one - left + right);
        acc + lo + crisp * span
    });
    let mean = total / T::from_usize_lossy(judgments.len());
    // Guard against rounding pushing the mean a hair outside the span.
    Ok(mean.max(lo).min(hi))
}

/// An intuitionistic fuzzy value: membership `mu`, non-membership `nu` and
/// hesitation `pi = 1 - mu - nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawIfv<T>", into = "RawIfv<T>")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct IntuitionisticFuzzyValue<T> {
    mu: T,
    nu: T,
    pi: T,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
struct RawIfv<T> {
    mu: T,
    nu: T,
    #[serde(default, skip_deserializing)]
    pi: T,
}

impl<T: Real> TryFrom<RawIfv<T>> for IntuitionisticFuzzyValue<T> {
    type Error = FuzzyError;

    fn try_from(raw: RawIfv<T>) -> Result<Self, Self::Error> {
        Self::new(raw.mu, raw.nu)
    }
}

impl<T: Real> From<IntuitionisticFuzzyValue<T>> for RawIfv<T> {
    fn from(v: IntuitionisticFuzzyValue<T>) -> Self {
        RawIfv {
            mu: v.mu,
            nu: v.nu,
            pi: v.pi,
        }
    }
}

impl<T: Real> IntuitionisticFuzzyValue<T> {
    /// Builds a value from membership and non-membership. Components that
    /// overshoot `[0, 1]` or the `mu + nu <= 1` bound by at most
    /// [`IFV_TOLERANCE`] are pulled back onto the boundary.
    pub fn new(mu: T, nu: T) -> Result<Self, FuzzyError> {
        let tol = T::lit(IFV_TOLERANCE);
        let (zero, one) = (T::zero(), T::one());
        let in_range = |x: T| x.is_finite() && x >= -tol && x <= one + tol;
        if !in_range(mu) || !in_range(nu) || mu + nu > one + tol {
            return Err(FuzzyError::InvalidIfv {
                mu: mu.to_f64_lossy(),
                nu: nu.to_f64_lossy(),
            });
        }
        let mu = mu.max(zero).min(one);
        let nu = nu.max(zero).min(one - mu);
        Ok(Self {
            mu,
            nu,
            pi: one - mu - nu,
        })
    }

    /// Lifts a crisp weight `w` in `[0, 1]` to `(w, 1 - w, 0)`.
    pub fn from_crisp(w: T) -> Result<Self, FuzzyError> {
        Self::new(w, T::one() - w)
    }

    /// The multiplicative identity `(1, 0, 0)`.
    pub fn one() -> Self {
        Self {
            mu: T::one(),
            nu: T::zero(),
            pi: T::zero(),
        }
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn nu(&self) -> T {
        self.nu
    }

    pub fn pi(&self) -> T {
        self.pi
    }
}

/// Intuitionistic fuzzy product: memberships multiply, non-memberships
/// combine as a probabilistic sum.
pub fn ifv_multiply<T: Real>(
    a: IntuitionisticFuzzyValue<T>,
    w: IntuitionisticFuzzyValue<T>,
) -> IntuitionisticFuzzyValue<T> {
    let mu = a.mu * w.mu;
    let nu = a.nu + w.nu - a.nu * w.nu;
    IntuitionisticFuzzyValue::new(mu, nu).expect("product of valid values is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type Tfn = TriangularFuzzyNumber<f64>;
    type Ifv = IntuitionisticFuzzyValue<f64>;

    fn tfn(l: f64, m: f64, u: f64) -> Tfn {
        Tfn::new(l, m, u).unwrap()
    }

    #[test]
    fn default_scale_lookups() {
        let scale = LinguisticScale::<f64>::dematel_default();
        assert_eq!(tfn_from_linguistic("No influence", &scale).unwrap(), tfn(0.0, 0.0, 0.25));
        assert_eq!(tfn_from_linguistic("Very high", &scale).unwrap(), tfn(0.75, 1.0, 1.0));
        assert_eq!(scale.tfn_at(2).unwrap(), tfn(0.25, 0.5, 0.75));
        let err = tfn_from_linguistic("Purple", &scale).unwrap_err();
        assert!(err.to_string().contains("Purple"));
        assert!(err.to_string().contains("dematel-default"));
    }

    #[test]
    fn scale_validation() {
        let labels = vec!["a".to_string(), "b".to_string()];
        let same = vec![tfn(0.0, 0.5, 1.0), tfn(0.0, 0.5, 1.0)];
        assert!(LinguisticScale::new("s", labels.clone(), same).is_err());
        assert!(LinguisticScale::new("s", labels[..1].to_vec(), vec![tfn(0.0, 0.0, 0.0)]).is_err());
        assert!(Tfn::new(0.5, 0.2, 1.0).is_err());
        assert!(Tfn::new(0.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn scale_json_round_trip() {
        let scale = LinguisticScale::<f64>::dematel_default();
        let json = serde_json::to_string(&scale).unwrap();
        let back: LinguisticScale<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(scale, back);
    }

    #[test]
    fn cfcs_degenerate_and_symmetric() {
        assert_eq!(cfcs_defuzzify(&[tfn(0.7, 0.7, 0.7)]).unwrap(), 0.7);
        assert!((cfcs_defuzzify(&[tfn(0.0, 0.25, 0.5)]).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(cfcs_defuzzify::<f64>(&[]), Err(FuzzyError::EmptyJudgments));
    }

    #[test]
    fn cfcs_hand_trace_two_judgments() {
        // Span [0, 1]. First judgment: left = 0.25/1.25 = 0.2,
        // right = 0.5/1.25 = 0.4, crisp = (0.16 + 0.16)/1.2 = 4/15.
        // Second: left = 0.75/1.25 = 0.6, right = 1/1.25 = 0.8,
        // crisp = (0.24 + 0.64)/1.2 = 11/15. Mean = 0.5.
        let first = cfcs_defuzzify(&[tfn(0.0, 0.25, 0.5), tfn(0.5, 0.75, 1.0)]).unwrap();
        assert!((first - 0.5).abs() < 1e-15, "{first}");
    }

    #[test]
    fn ifv_product_examples() {
        let a = Ifv::new(0.6, 0.3).unwrap();
        let id = ifv_multiply(a, Ifv::one());
        assert!((id.mu() - 0.6).abs() < 1e-15 && (id.nu() - 0.3).abs() < 1e-15);
        assert!((id.pi() - 0.1).abs() < 1e-12);

        let p = ifv_multiply(a, Ifv::new(0.5, 0.4).unwrap());
        assert!((p.mu() - 0.30).abs() < 1e-12);
        assert!((p.nu() - 0.58).abs() < 1e-12);
        assert!((p.pi() - 0.12).abs() < 1e-12);

        let zero = ifv_multiply(Ifv::new(0.0, 1.0).unwrap(), Ifv::new(0.4, 0.2).unwrap());
        assert_eq!(zero.mu(), 0.0);
        assert_eq!(zero.nu(), 1.0);
    }

    #[test]
    fn ifv_validation() {
        assert!(Ifv::new(0.7, 0.4).is_err());
        assert!(Ifv::new(-0.1, 0.4).is_err());
        assert!(Ifv::new(0.5, 0.5 + 1e-12).is_ok());
        let v: Ifv = serde_json::from_str(r#"{"mu":0.2,"nu":0.3}"#).unwrap();
        assert!((v.pi() - 0.5).abs() < 1e-12);
        assert!(serde_json::from_str::<Ifv>(r#"{"mu":0.8,"nu":0.3}"#).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let scale = LinguisticScale::<f32>::dematel_default();
        let v = cfcs_defuzzify(&[scale.tfn("Very low").unwrap()]).unwrap();
        assert!((v - 0.25f32).abs() < 1e-6);
    }

    fn arb_ifv() -> impl Strategy<Value = Ifv> {
        (0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(a, b)| Ifv::new(a, (1.0 - a) * b).unwrap())
    }

    fn arb_tfn() -> impl Strategy<Value = Tfn> {
        (-5.0..5.0f64, 0.0..3.0f64, 0.0..3.0f64).prop_map(|(l, d1, d2)| tfn(l, l + d1, l + d1 + d2))
    }

    proptest! {
        #[test]
        fn ifv_product_commutes_and_stays_valid(a in arb_ifv(), b in arb_ifv()) {
            let ab = ifv_multiply(a, b);
            let ba = ifv_multiply(b, a);
            prop_assert!((ab.mu() - ba.mu()).abs() < 1e-12);
            prop_assert!((ab.nu() - ba.nu()).abs() < 1e-12);
            for v in [ab, ba] {
                prop_assert!((0.0..=1.0).contains(&v.mu()));
                prop_assert!((0.0..=1.0).contains(&v.nu()));
                prop_assert!(v.mu() + v.nu() <= 1.0 + 1e-9);
                prop_assert!((v.pi() - (1.0 - v.mu() - v.nu())).abs() < 1e-9);
            }
        }

        #[test]
        fn cfcs_stays_within_span(ts in prop::collection::vec(arb_tfn(), 1..8)) {
            let v = cfcs_defuzzify(&ts).unwrap();
            let lo = ts.iter().map(|t| t.lower()).fold(f64::INFINITY, f64::min);
            let hi = ts.iter().map(|t| t.upper()).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(v >= lo && v <= hi);
        }

        #[test]
        fn cfcs_repeated_judgment(t in arb_tfn(), n in 1usize..10) {
            let one = cfcs_defuzzify(&[t]).unwrap();
            let many = cfcs_defuzzify(&vec![t; n]).unwrap();
            prop_assert!((one - many).abs() < 1e-12);
        }
    }
}
