//! Dense numerical kernels: eigendecomposition, exponential, logarithms,
//! primary roots and eigenvalue separation.

mod eigen;
mod expm;
mod logm;
mod matrix;
mod perturb;
mod tolerance;

pub use eigen::{eig, eigenvalues, min_gap, spectral_radius, Eigendecomposition, C64};
pub use expm::expm;
pub use logm::{
    branch_log, has_unique_real_log, logm_branch, logm_principal, primary_root, BranchSelection,
};
pub use matrix::{ComplexMatrix, RealMatrix};
pub use perturb::perturb_distinct;
pub use tolerance::ToleranceConfig;
