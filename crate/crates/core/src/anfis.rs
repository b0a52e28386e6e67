//! First-order Takagi–Sugeno ANFIS.
//!
//! Each rule has one generalized bell membership per input and a linear
//! consequent. Inputs are min-max normalized with the model's stored spans
//! before evaluation; premises and consequents both act on normalized inputs.
//!
//! Tunable parameters are flattened in a fixed order: for each rule, for each
//! input dimension `(m, l, k)`; then for each rule the consequent
//! coefficients followed by the bias.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{lstsq_min_norm, LinalgError, Matrix};
use crate::scalar::Real;

/// Smallest width or shape exponent a scaled model may carry.
pub const MIN_POSITIVE_PARAM: f64 = 1e-6;

/// Subtractive clustering constants: neighbourhood radius multiplier for
/// potential revision, and the accept/reject potential ratios.
pub const QUASH_FACTOR: f64 = 1.25;
pub const ACCEPT_RATIO: f64 = 0.5;
pub const REJECT_RATIO: f64 = 0.15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnfisError {
    #[error("invalid bell membership (m={m}, l={l}, k={k}): width and shape must be positive and finite")]
    InvalidMembership { m: f64, l: f64, k: f64 },
    #[error("expected {expected} inputs, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("all rule firing strengths vanished for input {inputs:?}")]
    DegenerateActivation { inputs: Vec<f64> },
    #[error("empty data set")]
    EmptyData,
    #[error("cluster radius must be positive, got {0}")]
    InvalidRadius(f64),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("target {index} is zero; MAPE is undefined")]
    ZeroTarget { index: usize },
    #[error("expected {expected} scaling coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Generalized bell `1 / (1 + |(u - m) / l|^(2k))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct BellMembership<T> {
    pub m: T,
    pub l: T,
    pub k: T,
}

impl<T: Real> BellMembership<T> {
    pub fn new(m: T, l: T, k: T) -> Result<Self, AnfisError> {
        let mf = Self { m, l, k };
        mf.validate()?;
        Ok(mf)
    }

    fn validate(&self) -> Result<(), AnfisError> {
        let ok = self.m.is_finite()
            && self.l.is_finite()
            && self.k.is_finite()
            && self.l > T::zero()
            && self.k > T::zero();
        if ok {
            Ok(())
        } else {
            Err(AnfisError::InvalidMembership {
                m: self.m.to_f64_lossy(),
                l: self.l.to_f64_lossy(),
                k: self.k.to_f64_lossy(),
            })
        }
    }

    pub fn degree(&self, u: T) -> T {
        bell_membership(u, self)
    }

    /// `ln` of the degree, stable for inputs far from the centre.
    fn log_degree(&self, u: T) -> T {
        let z = ((u - self.m) / self.l).abs();
        if z == T::zero() {
            return T::zero();
        }
        let e = (T::lit(2.0) * self.k) * z.ln();
        -softplus(e)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus<T: Real>(x: T) -> T {
    if x > T::zero() {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub fn bell_membership<T: Real>(u: T, mf: &BellMembership<T>) -> T {
    let z = ((u - mf.m) / mf.l).abs();
    T::one() / (T::one() + z.powf(T::lit(2.0) * mf.k))
}

/// One fuzzy rule: `IF x_1 is A_1 AND ... THEN y = q . x + s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct AnfisRule<T> {
    pub premises: Vec<BellMembership<T>>,
    /// Coefficients `q` (one per input) followed by the bias `s`.
    pub consequent: Vec<T>,
}

impl<T: Real> AnfisRule<T> {
    pub fn bias(&self) -> T {
        *self.consequent.last().expect("consequent holds the bias")
    }

    /// Consequent output `q . x + s` at a normalized input.
    pub fn consequent_output(&self, x: &[T]) -> T {
        let (q, s) = self.consequent.split_at(self.consequent.len() - 1);
        q.iter().zip(x).fold(s[0], |acc, (&c, &xi)| acc + c * xi)
    }
}

/// Per-dimension span used to map raw inputs into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Span<T> {
    pub min: T,
    pub max: T,
}

impl<T: Real> Span<T> {
    pub fn unit() -> Self {
        Self {
            min: T::zero(),
            max: T::one(),
        }
    }

    pub fn width(&self) -> T {
        self.max - self.min
    }

    pub fn normalize(&self, x: T) -> T {
        (x - self.min) / self.width()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel<T>")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct AnfisModel<T> {
    input_dim: usize,
    rules: Vec<AnfisRule<T>>,
    input_normalization: Vec<Span<T>>,
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
struct RawModel<T> {
    input_dim: usize,
    rules: Vec<AnfisRule<T>>,
    input_normalization: Vec<Span<T>>,
}

impl<T: Real> TryFrom<RawModel<T>> for AnfisModel<T> {
    type Error = AnfisError;

    fn try_from(raw: RawModel<T>) -> Result<Self, Self::Error> {
        Self::new(raw.input_dim, raw.rules, raw.input_normalization)
    }
}

/// Training sample: inputs and target.
pub type Sample<T> = (Vec<T>, T);

/// Rule activations at one input.
#[derive(Debug, Clone, PartialEq)]
pub struct Activation<T> {
    /// Normalized firing strengths; nonnegative and summing to one.
    pub normalized: Vec<T>,
    /// Per-rule consequent outputs.
    pub consequents: Vec<T>,
    pub output: T,
}

impl<T: Real> AnfisModel<T> {
    pub fn new(
        input_dim: usize,
        rules: Vec<AnfisRule<T>>,
        input_normalization: Vec<Span<T>>,
    ) -> Result<Self, AnfisError> {
        let model = Self {
            input_dim,
            rules,
            input_normalization,
        };
        model.validate()?;
        Ok(model)
    }

    /// A model whose inputs are already in `[0, 1]`.
    pub fn with_unit_spans(input_dim: usize, rules: Vec<AnfisRule<T>>) -> Result<Self, AnfisError> {
        Self::new(input_dim, rules, vec![Span::unit(); input_dim])
    }

    fn validate(&self) -> Result<(), AnfisError> {
        let invalid = |msg: String| Err(AnfisError::InvalidModel(msg));
        if self.rules.is_empty() {
            return invalid("a model needs at least one rule".into());
        }
        if self.input_normalization.len() != self.input_dim {
            return invalid(format!(
                "{} normalization spans for {} inputs",
                self.input_normalization.len(),
                self.input_dim
            ));
        }
        if let Some(i) = self
            .input_normalization
            .iter()
            .position(|s| !(s.width() > T::zero()) || !s.width().is_finite())
        {
            return invalid(format!("normalization span {i} is not positive"));
        }
        for (j, rule) in self.rules.iter().enumerate() {
            if rule.premises.len() != self.input_dim {
                return invalid(format!(
                    "rule {j} has {} premises, expected {}",
                    rule.premises.len(),
                    self.input_dim
                ));
            }
            if rule.consequent.len() != self.input_dim + 1 {
                return invalid(format!(
                    "rule {j} has {} consequent parameters, expected {}",
                    rule.consequent.len(),
                    self.input_dim + 1
                ));
            }
            for mf in &rule.premises {
                mf.validate()?;
            }
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn rules(&self) -> &[AnfisRule<T>] {
        &self.rules
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn input_normalization(&self) -> &[Span<T>] {
        &self.input_normalization
    }

    /// Number of entries in the flattened parameter vector.
    pub fn parameter_count(&self) -> usize {
        self.rules.len() * (3 * self.input_dim + self.input_dim + 1)
    }

    pub fn normalize_inputs(&self, inputs: &[T]) -> Result<Vec<T>, AnfisError> {
        if inputs.len() != self.input_dim {
            return Err(AnfisError::DimensionMismatch {
                expected: self.input_dim,
                got: inputs.len(),
            });
        }
        Ok(inputs
            .iter()
            .zip(&self.input_normalization)
            .map(|(&x, span)| span.normalize(x))
            .collect())
    }

    /// Raw firing strengths `w_j = prod_d mu_jd(x_d)` (product t-norm). May
    /// underflow to zero for inputs far from every rule; [`Self::activate`]
    /// works in the log domain instead.
    pub fn firing_strengths(&self, inputs: &[T]) -> Result<Vec<T>, AnfisError> {
        let x = self.normalize_inputs(inputs)?;
        Ok(self
            .rules
            .iter()
            .map(|r| {
                r.premises
                    .iter()
                    .zip(&x)
                    .fold(T::one(), |w, (mf, &xi)| w * mf.degree(xi))
            })
            .collect())
    }

    /// Layers 1–5 at one input.
    pub fn activate(&self, inputs: &[T]) -> Result<Activation<T>, AnfisError> {
        let x = self.normalize_inputs(inputs)?;
        let log_w: Vec<T> = self
            .rules
            .iter()
            .map(|r| {
                r.premises
                    .iter()
                    .zip(&x)
                    .fold(T::zero(), |acc, (mf, &xi)| acc + mf.log_degree(xi))
            })
            .collect();
        let peak = log_w.iter().copied().fold(T::neg_infinity(), T::max);
        if !peak.is_finite() {
            return Err(AnfisError::DegenerateActivation {
                inputs: inputs.iter().map(|v| v.to_f64_lossy()).collect(),
            });
        }
        let shifted: Vec<T> = log_w.iter().map(|&lw| (lw - peak).exp()).collect();
        let total = shifted.iter().fold(T::zero(), |a, &b| a + b);
        let normalized: Vec<T> = shifted.iter().map(|&w| w / total).collect();
        let consequents: Vec<T> = self.rules.iter().map(|r| r.consequent_output(&x)).collect();
        let output = normalized
            .iter()
            .zip(&consequents)
            .fold(T::zero(), |acc, (&w, &f)| acc + w * f);
        if !output.is_finite() {
            return Err(AnfisError::DegenerateActivation {
                inputs: inputs.iter().map(|v| v.to_f64_lossy()).collect(),
            });
        }
        Ok(Activation {
            normalized,
            consequents,
            output,
        })
    }

    /// Model output (risk magnitude) at one input.
    pub fn forward(&self, inputs: &[T]) -> Result<T, AnfisError> {
        Ok(self.activate(inputs)?.output)
    }

    /// Parameters in the documented flattening order.
    /// Derivative of the output with respect to every consequent parameter,
    /// rule by rule in `q_1..q_n, s` order: `w_j * x_d` and `w_j`.
    pub fn consequent_gradient(&self, inputs: &[T]) -> Result<Vec<T>, AnfisError> {
        let act = self.activate(inputs)?;
        let x = self.normalize_inputs(inputs)?;
        let mut grad = Vec::with_capacity((self.input_dim + 1) * self.rules.len());
        for &w in &act.normalized {
            grad.extend(x.iter().map(|&xd| w * xd));
            grad.push(w);
        }
        Ok(grad)
    }

    pub fn flatten_parameters(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for rule in &self.rules {
            for mf in &rule.premises {
                out.extend([mf.m, mf.l, mf.k]);
            }
        }
        for rule in &self.rules {
            out.extend(&rule.consequent);
        }
        out
    }

    pub fn with_consequents(&self, consequents: &[T]) -> Result<Self, AnfisError> {
        let per_rule = self.input_dim + 1;
        if consequents.len() != per_rule * self.rules.len() {
            return Err(AnfisError::CoefficientCount {
                expected: per_rule * self.rules.len(),
                got: consequents.len(),
            });
        }
        let mut model = self.clone();
        for (rule, chunk) in model.rules.iter_mut().zip(consequents.chunks(per_rule)) {
            rule.consequent = chunk.to_vec();
        }
        Ok(model)
    }
}

fn forward_outputs<T: Real>(model: &AnfisModel<T>, data: &[Sample<T>]) -> Result<Vec<T>, AnfisError> {
    data.iter().map(|(x, _)| model.forward(x)).collect()
}

pub fn rmse<T: Real>(model: &AnfisModel<T>, data: &[Sample<T>]) -> Result<T, AnfisError> {
    if data.is_empty() {
        return Err(AnfisError::EmptyData);
    }
    let preds = forward_outputs(model, data)?;
    let sq = preds
        .iter()
        .zip(data)
        .fold(T::zero(), |acc, (&p, (_, y))| acc + (p - *y) * (p - *y));
    Ok((sq / T::from_usize_lossy(data.len())).sqrt())
}

/// Mean absolute percentage error, in percent.
pub fn mape<T: Real>(model: &AnfisModel<T>, data: &[Sample<T>]) -> Result<T, AnfisError> {
    if data.is_empty() {
        return Err(AnfisError::EmptyData);
    }
    if let Some(index) = data.iter().position(|(_, y)| *y == T::zero()) {
        return Err(AnfisError::ZeroTarget { index });
    }
    let preds = forward_outputs(model, data)?;
    let total = preds
        .iter()
        .zip(data)
        .fold(T::zero(), |acc, (&p, (_, y))| acc + ((p - *y) / *y).abs());
    Ok(total / T::from_usize_lossy(data.len()) * T::lit(100.0))
}

fn squared_distance<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
}

/// Subtractive clustering on data already normalized to `[0, 1]`.
///
/// Returns indices into `data` of the selected cluster centres, in selection
/// order.
pub fn subtractive_clustering<T: Real>(data: &[Vec<T>], radius: T) -> Result<Vec<usize>, AnfisError> {
    if data.is_empty() {
        return Err(AnfisError::EmptyData);
    }
    if !(radius > T::zero()) || !radius.is_finite() {
        return Err(AnfisError::InvalidRadius(radius.to_f64_lossy()));
    }
    let alpha = T::lit(4.0) / (radius * radius);
    let rb = radius * T::lit(QUASH_FACTOR);
    let beta = T::lit(4.0) / (rb * rb);
    let mut potential: Vec<T> = data
        .iter()
        .map(|xi| {
            data.iter()
                .fold(T::zero(), |acc, xj| acc + (-alpha * squared_distance(xi, xj)).exp())
        })
        .collect();

    let argmax = |p: &[T]| {
        p.iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
    };
    let (first, first_potential) = argmax(&potential);
    let mut centers = vec![first];
    let accept = T::lit(ACCEPT_RATIO) * first_potential;
    let reject = T::lit(REJECT_RATIO) * first_potential;

    let revise = |potential: &mut [T], center: usize, center_potential: T| {
        for (i, p) in potential.iter_mut().enumerate() {
            *p = *p - center_potential * (-beta * squared_distance(&data[i], &data[center])).exp();
        }
    };
    revise(&mut potential, first, first_potential);

    loop {
        let (candidate, p) = argmax(&potential);
        if p <= T::zero() || p < reject {
            break;
        }
        let accepted = if p > accept {
            true
        } else {
            let d_min = centers
                .iter()
                .map(|&c| squared_distance(&data[candidate], &data[c]).sqrt())
                .fold(T::infinity(), T::min);
            d_min / radius + p / first_potential >= T::one()
        };
        if accepted {
            centers.push(candidate);
            revise(&mut potential, candidate, p);
        } else {
            potential[candidate] = T::zero();
        }
    }
    Ok(centers)
}

/// Per-dimension spans of the training inputs. Constant dimensions get a
/// unit-width span starting at their value.
pub fn input_spans<T: Real>(inputs: &[&[T]]) -> Vec<Span<T>> {
    let dim = inputs.first().map_or(0, |x| x.len());
    (0..dim)
        .map(|d| {
            let lo = inputs.iter().map(|x| x[d]).fold(T::infinity(), T::min);
            let hi = inputs.iter().map(|x| x[d]).fold(T::neg_infinity(), T::max);
            if hi > lo {
                Span { min: lo, max: hi }
            } else {
                Span {
                    min: lo,
                    max: lo + T::one(),
                }
            }
        })
        .collect()
}

/// Builds an initial model: one rule per subtractive-clustering centre, bell
/// centres at the centre coordinates, widths `radius / sqrt(8)` in normalized
/// units (the normalized span is 1), `k = 1`, consequents fitted by least
/// squares.
pub fn init_fis<T: Real>(train: &[Sample<T>], radius: T) -> Result<AnfisModel<T>, AnfisError> {
    let (model, _) = init_fis_with_diagnostics(train, radius)?;
    Ok(model)
}

pub fn init_fis_with_diagnostics<T: Real>(
    train: &[Sample<T>],
    radius: T,
) -> Result<(AnfisModel<T>, FitDiagnostics), AnfisError> {
    if train.is_empty() {
        return Err(AnfisError::EmptyData);
    }
    let dim = train[0].0.len();
    if let Some((x, _)) = train.iter().find(|(x, _)| x.len() != dim) {
        return Err(AnfisError::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    let raw: Vec<&[T]> = train.iter().map(|(x, _)| x.as_slice()).collect();
    let spans = input_spans(&raw);
    let normalized: Vec<Vec<T>> = raw
        .iter()
        .map(|x| x.iter().zip(&spans).map(|(&v, s)| s.normalize(v)).collect())
        .collect();
    let centers = subtractive_clustering(&normalized, radius)?;
    let width = radius / T::lit(8.0).sqrt();
    let rules = centers
        .iter()
        .map(|&c| {
            let premises = normalized[c]
                .iter()
                .map(|&m| BellMembership::new(m, width, T::one()))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(AnfisRule {
                premises,
                consequent: vec![T::zero(); dim + 1],
            })
        })
        .collect::<Result<Vec<_>, AnfisError>>()?;
    let base = AnfisModel::new(dim, rules, spans)?;
    fit_consequents_least_squares(&base, train)
}

/// Outcome flags of a least-squares consequent fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub rank: usize,
    pub unknowns: usize,
    /// The design matrix was rank deficient and the minimum-norm solution was
    /// taken.
    pub rank_deficient: bool,
}

/// Refits every consequent by linear least squares with the premises held
/// fixed. The output is linear in the consequents, so this is the exact
/// minimizer of the squared training error (minimum norm when not unique).
pub fn fit_consequents_least_squares<T: Real>(
    model: &AnfisModel<T>,
    train: &[Sample<T>],
) -> Result<(AnfisModel<T>, FitDiagnostics), AnfisError> {
    if train.is_empty() {
        return Err(AnfisError::EmptyData);
    }
    let unknowns = (model.input_dim + 1) * model.rules.len();
    let mut design = Matrix::zeros(train.len(), unknowns);
    let mut targets = Vec::with_capacity(train.len());
    for (row, (inputs, y)) in train.iter().enumerate() {
        for (col, g) in model.consequent_gradient(inputs)?.into_iter().enumerate() {
            design[(row, col)] = g;
        }
        targets.push(*y);
    }
    let sol = lstsq_min_norm(&design, &targets)?;
    let fitted = model.with_consequents(&sol.solution)?;
    Ok((
        fitted,
        FitDiagnostics {
            rank: sol.rank,
            unknowns,
            rank_deficient: sol.rank_deficient,
        },
    ))
}

/// Number of width/shape parameters clamped by a scaling.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalingDiagnostics {
    pub clamped: usize,
}

/// Multiplies every flattened parameter by its coefficient. Widths and shape
/// exponents that would fall below [`MIN_POSITIVE_PARAM`] are clamped to it.
pub fn apply_parameter_scaling<T: Real>(
    model: &AnfisModel<T>,
    coefficients: &[T],
) -> Result<(AnfisModel<T>, ScalingDiagnostics), AnfisError> {
    let expected = model.parameter_count();
    if coefficients.len() != expected {
        return Err(AnfisError::CoefficientCount {
            expected,
            got: coefficients.len(),
        });
    }
    let floor = T::lit(MIN_POSITIVE_PARAM);
    let mut diag = ScalingDiagnostics::default();
    let mut clamp = |v: T| {
        if v >= floor {
            v
        } else {
            diag.clamped += 1;
            floor
        }
    };
    let mut scaled = model.clone();
    let mut coef = coefficients.iter().copied();
    for rule in &mut scaled.rules {
        for mf in &mut rule.premises {
            let (cm, cl, ck) = (coef.next().unwrap(), coef.next().unwrap(), coef.next().unwrap());
            mf.m = mf.m * cm;
            mf.l = clamp(mf.l * cl);
            mf.k = clamp(mf.k * ck);
        }
    }
    for rule in &mut scaled.rules {
        for c in &mut rule.consequent {
            *c = *c * coef.next().unwrap();
        }
    }
    scaled.validate()?;
    Ok((scaled, diag))
}
