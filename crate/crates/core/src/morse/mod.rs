//! Component bounds for quantifier-free sets: normalization, single-equation
//! reduction, Milnor tubes and critical-point counts of a height function.

mod formula;
mod pipeline;
mod tube;

pub use formula::{normalize, Atom, AtomSpec, Formula, FormulaFile, FormulaSpec, QFFormula, Rel};
pub use pipeline::{
    component_bound, default_oracle_resolution, gamma_estimate, oracle_components, ComponentReport, GammaReport,
    GammaTrial, MilnorSchedule, PipelineOptions, Stage, StageReport, DELTA0, DELTA_RESAMPLES, LIMIT_ASSUMPTION,
    MAX_REROTATIONS, STAGES,
};
pub use tube::{
    affine_restrict, critical_system, milnor_tube, random_rotation, wilkie_reduce, AffineSubspace, ORTHOGONALITY_TOL,
};
