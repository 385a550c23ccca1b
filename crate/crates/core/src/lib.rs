//! Exact verification engine for affine Yangian and W-algebra identities on
//! depth-truncated vacuum modules.

pub mod loopalg;
pub mod parabolic;
pub mod report;
pub mod scalar;
pub mod series;
pub mod suites;
pub mod vacuum;
pub mod walgebra;
pub mod yangian;

pub use loopalg::{bracket, AlgebraError, GenIndex, Kind, LieElem, Pyramid};
pub use report::{InstanceResult, Report, Status};
pub use scalar::{Exponent, Rat, Scalar};
pub use series::{check_instances, op_eq_on_depth, Instance, Operator, SeriesExpr, SeriesTemplate, Witness};
pub use parabolic::{
    CompatOptions, DeltaWOptions, ExtOptions, ParError, PhiOptions, Side, SplitSpec, TensorExpr, WTerm,
};
pub use suites::{run, CheckParams, Suite, SuiteError};
pub use vacuum::{basis_enum, Context, Engine, Factor, Gen, Monomial, SlotSpec, State};
pub use walgebra::{GammaShift, WError, WKind, WLabel};
pub use yangian::{Coproduct, Derived, GlMap, YangError, YangImage};
