//! Embeddability and strong infinite divisibility decisions.
//!
//! Both questions ask for a real logarithm in a sign-constrained class: an
//! intensity matrix for a stochastic `P`, the negative of a Z-matrix for a
//! nonnegative `B`. With distinct eigenvalues every real logarithm is a
//! branch choice per eigenvalue, and eigenvalue bounds on the unknown
//! logarithm leave finitely many branches to check.

mod bound;
mod decide;
mod enumerate;
mod power;

pub use bound::{branch_bound, in_runnenberg_cone, theorem4_width, BoundMode, BranchBound};
pub use decide::{
    check_embeddable, check_embeddable_with, check_strong_inf_divisible,
    check_strong_inf_divisible_with, demonstrate_root, DivisibilityReport, DivisibilityVerdict,
    EmbedOptions, EmbedVerdict, EmbeddabilityReport, FailedCondition, Method, RejectionKind,
    RootDemonstration, TrailingReport, ROOT_RECON_TOL,
};
pub use enumerate::{enumerate_generators, Candidate, GeneratorStream};
pub use power::{
    im_root_approx, im_root_approx_with_ceiling, inverse_m_power_form, power_form_matrix, ImRoot,
    PowerForm, IM_ROOT_CEILING,
};
