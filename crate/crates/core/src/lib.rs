//! Decide whether a nonnegative matrix has nonnegative roots of every order
//! and whether a stochastic matrix is the exponential of an intensity matrix.

pub mod classify;
pub mod embed;
pub mod error;
pub mod fixtures;
pub mod numkit;
pub mod structure;

pub use classify::{classify_matrix, ClassFlag, ClassFlags, ClassReport};
pub use embed::{
    check_embeddable, check_strong_inf_divisible, DivisibilityReport, DivisibilityVerdict,
    EmbedOptions, EmbedVerdict, EmbeddabilityReport,
};
pub use error::{Error, Result};
pub use numkit::{RealMatrix, ToleranceConfig};
pub use structure::{frobenius_form, StructureDecomposition};
