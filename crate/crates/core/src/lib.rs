//! Exact counting of ultrafriable and friable integers, saddle-point
//! estimators for them, and Dirichlet character diagnostics.
//!
//! An integer is `y`-ultrafriable when no prime power exceeding `y` divides
//! it; the ones coprime to `q` are exactly the divisors of
//! `N_{q,y} = prod_{p <= y, p not dividing q} p^{nu_p}`.

pub mod calibration;
pub mod characters;
pub mod counting;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod primes;
pub mod roots;
pub mod saddle;
pub mod special;

pub use characters::{enumerate_characters, DirichletCharacter};
pub use counting::{
    count_friable, count_friable_progression, count_ultrafriable, count_ultrafriable_residues,
    naive_oracle, CountValue, OracleMode, ResidueCountVector,
};
pub use error::{Error, Result};
pub use estimators::{
    compare, ComparisonRecord, Constants, ErrorBudget, EstimateBreakdown, TheoremTag,
};
pub use primes::{
    classify_regime, modulus_context, tau_n, ModulusContext, PrimePowerTable, RegimeTag,
};
pub use saddle::{solve_alpha, solve_beta, ArithmeticFactors, SaddleKind, SaddleResult};
