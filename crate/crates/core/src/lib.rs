//! Software project risk evaluation.
//!
//! Expert judgments are weighted with fuzzy DEMATEL, a Takagi–Sugeno ANFIS
//! tuned by an enhanced crow search scores each risk factor, IF-TOPSIS ranks
//! the factors and the weighted scores sum to an overall project risk.
//!
//! The numeric modules are generic over [`scalar::Real`]; the aliases below
//! fix the scalar to `f64`, which is what the pipeline and CLI use.

pub mod anfis;
pub mod bench;
pub mod data;
pub mod dematel;
pub mod ecsa;
pub mod fuzzy;
pub mod linalg;
pub mod pipeline;
pub mod scalar;
pub mod topsis;

pub type Tfn = fuzzy::TriangularFuzzyNumber<f64>;
pub type Ifv = fuzzy::IntuitionisticFuzzyValue<f64>;
pub type LinguisticScale = fuzzy::LinguisticScale<f64>;
pub type Matrix = linalg::Matrix<f64>;
pub type DirectRelationMatrix = dematel::DirectRelationMatrix<f64>;
pub type DematelResult = dematel::DematelResult<f64>;
pub type AnfisModel = anfis::AnfisModel<f64>;
pub type EcsaConfig = ecsa::EcsaConfig<f64>;
pub type OptimizationResult = ecsa::OptimizationResult<f64>;
pub type IfDecisionMatrix = topsis::IfDecisionMatrix<f64>;

pub use pipeline::{run_pipeline, PipelineConfig, PipelineError, RiskReport};
