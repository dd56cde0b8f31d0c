//! Exact arithmetic for certificates of matrix extreme points.

pub mod algebraic;
pub mod certificate;
pub mod charpoly;
pub mod matrix;
pub mod poly;
pub mod search;
pub mod surd;
pub mod wild;

pub use algebraic::{sturm_isolate, AlgebraicNumber, AlgebraicRecord, SturmChain};
pub use certificate::{
    g3_certificate, g4_certificate, verify_certificate, Certificate, ClaimCheck, Claims, ParamCertificate,
    RadicalCertificate, VerificationReport,
};
pub use charpoly::{char_poly_param, rational_char_poly, ParamCharPoly};
pub use matrix::{rational_nullspace, rational_solve, ParamTuple, RatMatrix, RationalTuple, Solutions};
pub use poly::{QPoly, Rational, ZPoly};
pub use search::{exact_search, SearchOptions, SearchOutcome, SearchStats};
pub use wild::{wild_disc_candidate, wild_disc_pencil, WildCandidate};
