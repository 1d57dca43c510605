//! Simulation and reconstruction toolkit for multicore fibre-Bragg-grating
//! (FBG) shape sensing of curved, organ-like surfaces.
//!
//! The crate covers the full sensing chain for a rail-guided ultrasound-probe
//! scan: a forward optical model from an imposed curvature field to noisy
//! interrogator wavelength frames, the inverse pipeline back to per-grating
//! curvature with batch averaging and outlier rejection, planar shape
//! integration, 3-D probe trajectory planning, scan execution over phantom
//! surfaces, and the error metrology used to characterise the sensing
//! accuracy.
//!
//! # Pipeline
//!
//! ```text
//! curvature field ──► fiber::simulate_sequence ──► wavelength frames
//!                                                        │
//!                     reconstruct::profile_from_sequence ◄┘
//!                                │
//!                shape::integrate_shape ──► shape::shape_to_trajectory
//!                                                        │
//!                              scan::execute_scan ◄──────┘
//!                                │
//!                     analysis::curvature_error_row / render_report
//! ```
//!
//! # Units
//!
//! Lengths along the fibre and in the workspace are millimetres, core radial
//! offsets are micrometres (converted internally), wavelengths are
//! nanometres, and curvature is 1/mm. Every interface states its units in
//! the field or parameter name.
//!
//! All operations are pure functions of their inputs; specs, frames, and
//! profiles are immutable values that are safe to share across threads.
//! Randomness is counter-based: each simulated frame consumes an
//! index-addressed stream derived from one seed, so sequences may be
//! generated in parallel without changing the output.

pub mod analysis;
pub mod csvio;
pub mod fiber;
pub mod materials;
pub mod phantoms;
pub mod reconstruct;
pub mod scan;
pub mod seeds;
pub mod shape;

pub use analysis::{AccuracyProfile, ErrorTable, ErrorTableRow, ReportBundle, ReportInputs};
pub use fiber::{
    bragg_wavelength, simulate_frame, simulate_sequence, strain_at_core,
    wavelength_shift_from_strain, CurvatureField, CurvatureSample, FiberSpec, NoiseModel,
    WavelengthFrame,
};
pub use materials::{builtin_materials, estimate_youngs_modulus, MaterialSpec, StressStrainCurve};
pub use phantoms::{conformity_bias, ConformityParams, PhantomKind, PhantomSpec, RailSpec};
pub use reconstruct::{
    curvature_at_grating, profile_from_sequence, reject_outliers, set_reference, strain_from_shift,
    CurvatureProfile,
};
pub use scan::{compare_scans, execute_scan, ScanReport, ScanScenario, Surface};
pub use shape::{
    integrate_shape, resample, shape_to_trajectory, PlanarShape, Pose, ScanTrajectory,
};
