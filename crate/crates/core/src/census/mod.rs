//! Certified zero counting for square systems, search radii, deformation
//! paths and complexity reduction.

mod count;
mod path;
mod radius;
mod reduce;
mod system;

pub use count::{
    count_nonsingular_zeros, sample_generic_tilt, sample_regular_value, CensusReport, RegularValue, BOX_BUDGET,
    DEFAULT_MAX_DEPTH, TILT_DET_MIN,
};
pub use path::{
    probe_boundedness, track_path, DeformationPath, PathPoint, PathState, ProbeReport, ProbeStep, StepCount,
    TrackReport, PATH_DET_MIN,
};
pub use radius::{search_radius, solve_item_iii, RadiusReport, DEFAULT_RADIUS};
pub use reduce::{reduce_phi_complexity, DOMAIN_MARGIN};
pub use system::{build_system, Monomial, Params, SquareSystem, SystemFile};
