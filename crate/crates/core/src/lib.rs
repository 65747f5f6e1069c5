//! Stabilizer-formalism tools for studying how conditional mutual
//! information spreads in random Clifford circuits with heralded
//! depolarizing noise.
//!
//! The GF(2) engine ([`pauli`], [`tableau`], [`clipped`]) is exact and
//! scalar-free. Analytic curves and fits in [`analytics`] are generic over
//! [`Real`]; `f64` aliases are exported at the crate root.

pub mod error;
pub mod num;
pub mod pauli;
pub mod region;
pub mod symplectic;
pub mod tableau;
pub mod clipped;
pub mod rng;
pub mod circuits;
pub mod analytics;
pub mod bell;
pub mod dense;
pub mod oracle;

pub use error::{Error, Result};
pub use num::Real;
pub use pauli::{gf2_rank, multiply, symplectic_product, Gf2Basis, Gf2Matrix, Letter, PauliString};
pub use region::Region;
pub use symplectic::{sample_random_clifford, SymplecticMatrix};
pub use tableau::{DepolarizeCase, MeasureCase, Measurement, StabilizerTableau};
pub use clipped::{
    clip, cmi_endpoints, length_deviation_stats, mi_endpoints, sample_random_stabilizer_state,
    validate_clipped, ClippedTableau, LengthStats,
};
pub use circuits::{
    average_realizations, four_block_experiment, heralded_layer, run_coarse_grained, CircuitConfig,
    ErrorConfiguration, Evolution, FourBlockRecord, RealizationRecord, SpreadingField,
};
pub use analytics::{
    analytic_cmi_norm, analytic_rescaled, analytic_xdec, analytic_xdec_rescaled, collapse_curve,
    extract_xdec, k1k2_model, rescale, unrescale, CollapseCurve, CollapsePoint, DecayProfile,
    FitOutcome, RejectReason, XdecOptions,
};

pub type DecayProfileF64 = DecayProfile<f64>;
pub type CollapseCurveF64 = CollapseCurve<f64>;
pub type FitOutcomeF64 = FitOutcome<f64>;
pub type XdecOptionsF64 = XdecOptions<f64>;
pub use bell::{bell_normal_form, distill, find_bell_candidates, verify_distillation, BellPairPlan, Certificate};
pub use dense::{haar_unitary, toy_four_qudit, Channel, DensityMatrix};
pub use oracle::{oracle_suite, OracleReport};
