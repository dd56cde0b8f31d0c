//! Linear matrix inequalities on tuples of symmetric matrices.
//!
//! The crate evaluates monic linear pencils `L_A(X) = I + Σ Aᵢ⊗Xᵢ`, decides
//! which kind of extreme point a tuple is in the free spectrahedron
//! `{X : L_A(X) ⪰ 0}`, dilates points to extreme points, and checks exact
//! certificates for matrix extreme points that are not Arveson extreme.

pub mod carath;
pub mod dilation;
pub mod error;
pub mod exact;
pub mod extreme;
pub mod io;
pub mod kernel;
pub mod lab;
pub mod linalg;
pub mod opt;
pub mod projective;
pub mod sym;

pub use carath::{carath_expand, mu_statistics, CarathExpansion, CarathOptions, MuStats};
pub use dilation::{
    dilate_to_extreme, maximal_one_dilation, purify_frozen, purify_full, random_beta, to_boundary,
    DilationMode, DilationOptions, DilationStep, DilationTrace, PurifyMode, PurifyObjective, Target,
    Verdict,
};
pub use error::{Error, Result};
pub use extreme::{
    classify, dilation_subspace, is_irreducible, rank_nullity_counts, DilationSubspace,
    EquationKind, EquationMatrix, ExtremeReport, Flag, RankNullityCounts,
};
pub use exact::{exact_search, verify_certificate, Certificate, RationalTuple, VerificationReport};
pub use io::TupleDocument;
pub use kernel::{delta, lmi_kernel, psd_within_slack, NumericalKernel, ToleranceConfig, ZeroTol};
pub use lab::{run_experiment, ExperimentMode, ExperimentReport, ExperimentSpec};
pub use projective::{
    bounded_pair, degenerate_classify, dehomogenize, homogenize, image_pencil, projective_map_point, spin_disk_map,
    Degeneracy, ProjectiveMap,
};
pub use sym::{
    canonical_shuffle, eval_linear, eval_pencil, ColumnTuple, HomTuple, PencilEvaluation,
    Permutation, SymTuple,
};
