//! Exact computation of the Bernoulli convolution attached to the Pisot base
//! β ≈ 1.7549, the real root of β³ = 2β² − β + 1.
//!
//! The crate is organised bottom-up:
//!
//! * [`numberfield`] exact arithmetic and certified comparisons in ℚ(β);
//! * [`parry`] β-expansions, admissible words and β-adic intervals;
//! * [`semigroup`] the 7×7 matrices `A`, `B`, `C`, their products, column
//!   supports, the abstract column graph and the word code `W`;
//! * [`convergence`] normalized products `P_n(ω, V)`, Cauchy moduli over
//!   cylinders and limit supports;
//! * [`measure`] exact values of μ and μ′ on β-adic intervals and the
//!   weak-Gibbs ratio machinery;
//! * [`spectrum`] Lq partition sums, scaling exponents and their Legendre
//!   conjugate;
//! * [`oracle`] a brute-force atom cloud giving rigorous two-sided bounds;
//! * [`verify`] the end-to-end identity suite, and [`cli`] the command line.
//!
//! Heavy enumerations run on rayon when the `parallel` feature is enabled
//! (the default); see [`par::Exec`].

pub mod cli;
pub mod convergence;
pub mod matrix;
pub mod measure;
pub mod numberfield;
pub mod oracle;
pub mod par;
pub mod parry;
pub mod semigroup;
pub mod serial;
pub mod spectrum;
pub mod verify;

pub use matrix::{Matrix7, Vector7};
pub use numberfield::FieldElement;
pub use par::Exec;
pub use parry::{BetaInterval, BinaryWord, Block, BlockWord};
pub use semigroup::{Letter, SupportSet, TernaryWord};
