//! Apparent horizons: the minimal-surface finder and the location, area and
//! mass checks that hold for them.

pub mod checks;
pub mod constants;
pub mod finder;
pub mod monotonicity;

pub use checks::{area_lower_bound, locate_checks, penrose_check, LocateReport, PenroseReport};
pub use constants::{constants, Constants};
pub use finder::{find_horizon, find_outermost, mc_residual, Annulus, HorizonLayout, HorizonOptions, HorizonResult, OutermostReport};
pub use monotonicity::{monotonicity_check, MonotonicityReport};
