//! Composite π-pulse sequences for robust z-axis rotation gates.
//!
//! The crate builds pulse sequences that implement `Z(Φ)` while cancelling
//! systematic pulse-strength and off-resonance errors, simulates their
//! SU(2) propagators, checks the toggling-frame cancellation conditions and
//! measures infidelity orders numerically.
//!
//! ```
//! use zpulse::{build, infidelity_order, Axis, BuildParams, FamilyId};
//! use std::f64::consts::PI;
//!
//! let seq = build(FamilyId::S6_221, PI / 2.0, &BuildParams::default()).unwrap();
//! let est = infidelity_order(&seq, Axis::Pse).unwrap();
//! assert_eq!(est.rounded_order, 6);
//! ```

pub mod analysis;
pub mod catalog;
pub mod error;
pub mod pulse;
pub mod su2;
pub mod toggling;

pub use analysis::{
    classify, compare, infidelity_order, infidelity_order_with, scan_grid, Axis, AxisResult,
    Classification, CompareEntry, CompareRow, CorrectedOrder, FitConfig, GridScan, GridSpec,
    OrderEstimate,
};
pub use catalog::{
    antisym_alpha, build, general_family, grouped_polygon_sequence, BuildParams, FamilyId,
    GeneralFamilyParams, GroupingOutcome, GroupingSpec, Shape, Sign,
};
pub use error::{Error, Result};
pub use pulse::{ErrorPoint, Pulse, PulseSequence};
pub use su2::{fidelity, ideal_z, infidelity, perturbed_rotation, rotation, Complex64, Unitary2};
pub use toggling::{
    check_conditions, from_toggling, modified_phases, to_toggling, ConditionReport, PhaseList,
    TogglingPhaseList,
};
