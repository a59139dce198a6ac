//! Published example matrices used across tests, benches and the CLI docs.

use crate::numkit::{expm, RealMatrix};

/// Intensity matrix with exponential `e1()`.
pub fn z1() -> RealMatrix {
    RealMatrix::from_rows(&[[-2.0, 1.0, 1.0], [0.0, -1.0, 1.0], [0.0, 0.0, 0.0]]).unwrap()
}

/// Intensity matrix with exponential `e2()`.
pub fn z2() -> RealMatrix {
    RealMatrix::from_rows(&[
        [-0.5, 1.0 / 12.0, 5.0 / 12.0],
        [0.0, -3.0, 3.0],
        [0.0, 0.0, 0.0],
    ])
    .unwrap()
}

pub fn e1() -> RealMatrix {
    expm(&z1()).unwrap()
}

pub fn e2() -> RealMatrix {
    expm(&z2()).unwrap()
}

/// `E2 E1`: not embeddable.
pub fn e2_e1() -> RealMatrix {
    e2().matmul(&e1()).unwrap()
}

/// `E1 E2`: embeddable.
pub fn e1_e2() -> RealMatrix {
    e1().matmul(&e2()).unwrap()
}

/// Infinitely divisible upper triangular matrix.
pub fn diagonal_scaling_base() -> RealMatrix {
    RealMatrix::from_rows(&[
        [2.0 / 5.0, 2.0 / 5.0, 1.0 / 5.0],
        [0.0, 0.5, 0.5],
        [0.0, 0.0, 1.0],
    ])
    .unwrap()
}

/// `diagonal_scaling_base() * diag(1, 1, 1/2)`: not infinitely divisible.
pub fn diagonal_scaled_counterexample() -> RealMatrix {
    diagonal_scaling_base()
        .matmul(&RealMatrix::from_diagonal(&[1.0, 1.0, 0.5]))
        .unwrap()
}

/// `[[2, 6/5], [3, 2]]`; it and its transpose are infinitely divisible but
/// their sum has negative determinant.
pub fn sum_example() -> RealMatrix {
    RealMatrix::from_rows(&[[2.0, 6.0 / 5.0], [3.0, 2.0]]).unwrap()
}
