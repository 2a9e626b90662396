//! Metric-level quantities of g = Psi^2 delta: curvature and the constraint
//! equations, areas, volumes, path-length distance bounds and the rescaled
//! annulus pullbacks around each hole.

pub mod annulus;
pub mod area;
pub mod curvature;
pub mod path;
pub mod volume;

pub use annulus::{annulus_pullback, AnnulusMetric, ScaleBranch};
pub use area::{surface_area, AreaEstimate};
pub use curvature::{curvature_at, estimate_kappa, metric_at, verify_constraints, verify_constraints_at, ConstraintReport, CurvatureSample, MetricSample};
pub use path::{distance_upper, PathOptions, PathResult};
pub use volume::{region_volume, shell_volume, Ball, Region, VolumeBudget, VolumeEstimate};
