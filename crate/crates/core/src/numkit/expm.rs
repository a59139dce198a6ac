//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants of degree 3, 5, 7, 9 or 13, chosen from the 1-norm.

use nalgebra::DMatrix;

use super::matrix::{norm_one, RealMatrix};
use crate::error::{Error, Result};

const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_230e-1;
const THETA_7: f64 = 9.504_178_996_162_932e-1;
const THETA_9: f64 = 2.097_847_961_257_068;
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

// exp(710) overflows f64
const MAX_NORM: f64 = 1e6;

pub fn expm(a: &RealMatrix) -> Result<RealMatrix> {
    RealMatrix::checked(expm_dense(a.as_matrix())?)
}

pub(crate) fn expm_dense(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let norm = norm_one(a);
    if !norm.is_finite() || norm > MAX_NORM {
        return Err(Error::Overflow);
    }
    let eye = DMatrix::<f64>::identity(n, n);
    if norm == 0.0 {
        return Ok(eye);
    }

    let a2 = a * a;
    let (u, v, squarings) = if norm <= THETA_3 {
        let (u, v) = pade_low(a, &eye, &[&a2], &B3);
        (u, v, 0)
    } else if norm <= THETA_5 {
        let a4 = &a2 * &a2;
        let (u, v) = pade_low(a, &eye, &[&a2, &a4], &B5);
        (u, v, 0)
    } else if norm <= THETA_7 {
        let a4 = &a2 * &a2;
        let a6 = &a4 * &a2;
        let (u, v) = pade_low(a, &eye, &[&a2, &a4, &a6], &B7);
        (u, v, 0)
    } else if norm <= THETA_9 {
        let a4 = &a2 * &a2;
        let a6 = &a4 * &a2;
        let a8 = &a6 * &a2;
        let (u, v) = pade_low(a, &eye, &[&a2, &a4, &a6, &a8], &B9);
        (u, v, 0)
    } else {
        let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
        let scale = 2f64.powi(-s);
        let a1 = a * scale;
        let a2 = &a2 * (scale * scale);
        let a4 = &a2 * &a2;
        let a6 = &a4 * &a2;
        let (u, v) = pade13(&a1, &eye, &a2, &a4, &a6);
        (u, v, s)
    };

    let mut r = solve_pade(&u, &v)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if r.iter().all(|x| x.is_finite()) {
        Ok(r)
    } else {
        Err(Error::Overflow)
    }
}

fn pade_low(
    a: &DMatrix<f64>,
    eye: &DMatrix<f64>,
    powers: &[&DMatrix<f64>],
    b: &[f64],
) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut u = eye * b[1];
    let mut v = eye * b[0];
    for (k, p) in powers.iter().enumerate() {
        u += *p * b[2 * k + 3];
        v += *p * b[2 * k + 2];
    }
    (a * u, v)
}

fn pade13(
    a: &DMatrix<f64>,
    eye: &DMatrix<f64>,
    a2: &DMatrix<f64>,
    a4: &DMatrix<f64>,
    a6: &DMatrix<f64>,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let b = &B13;
    let inner_u = a6 * b[13] + a4 * b[11] + a2 * b[9];
    let u = a * (a6 * &inner_u + a6 * b[7] + a4 * b[5] + a2 * b[3] + eye * b[1]);
    let inner_v = a6 * b[12] + a4 * b[10] + a2 * b[8];
    let v = a6 * &inner_v + a6 * b[6] + a4 * b[4] + a2 * b[2] + eye * b[0];
    (u, v)
}

fn solve_pade(u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let q = v - u;
    let p = v + u;
    q.lu().solve(&p).ok_or(Error::Overflow)
}
