//! Upper bounds on the intrinsic flat and D-flat distance between the g-ball
//! B_g(0, R) and the flat ball B(0, R).
//!
//! The pipeline fixes the excluded radii around each hole, builds the common
//! subregion W, bounds the distance defect lambda on it, measures the volumes
//! that enter the subregion estimate and compares the result with a
//! closed-form envelope in R and sqrt(eps).

pub mod bound;
pub mod convergence;
pub mod lambda;
pub mod params;
pub mod region;
pub mod volumes;

pub use bound::{extracted_constants, ls_bound, main_bound, ExtractedConstants, FlatDistanceEstimate, LsBound, LsInputs, PipelineOptions};
pub use convergence::{convergence_run, smallest_feasible_eps, ConvergenceRow, ConvergenceTable, SequenceSpec};
pub use lambda::{lambda_estimate, LambdaEstimate};
pub use params::{delta_ir, evaluate_gates, gamma_i_eps, horizon_gammas, params, GateReport, PipelineParams};
pub use region::{m1_containment, region_w, ContainmentReport, WRegion};
pub use volumes::{volume_report, VolumeReport};
