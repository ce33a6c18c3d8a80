use nalgebra::SMatrix;

use super::liouvillian::HermitianBasis;
use super::{DensityMatrix, Liouvillian};
use crate::error::{Error, Result};

type M16 = SMatrix<f64, 16, 16>;

// Padé(13) coefficients and the matching 1-norm bound for scaling and squaring.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn norm1(a: &M16) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub fn expm16(a: &M16) -> M16 {
    let norm = norm1(a);
    let squarings = if norm > THETA13 {
        libm::ceil(libm::log2(norm / THETA13)) as i32
    } else {
        0
    };
    let a = a * libm::pow(2.0, -squarings as f64);
    let b = &PADE13;
    let id = M16::identity();
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let u = a * (a6 * (a6 * b[13] + a4 * b[11] + a2 * b[9]) + a6 * b[7] + a4 * b[5] + a2 * b[3] + id * b[1]);
    let v = a6 * (a6 * b[12] + a4 * b[10] + a2 * b[8]) + a6 * b[6] + a4 * b[4] + a2 * b[2] + id * b[0];
    let mut r = (v - u)
        .lu()
        .solve(&(v + u))
        .expect("Padé denominator is nonsingular for scaled arguments");
    for _ in 0..squarings {
        r = r * r;
    }
    r
}

/// exp(L·t) applied to ρ₀, with t in seconds.
pub fn evolve(rho0: &DensityMatrix, l: &Liouvillian, t: f64) -> Result<DensityMatrix> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", "duration must be finite and >= 0"));
    }
    if t == 0.0 {
        return Ok(*rho0);
    }
    let propagator = expm16(&(l.to_real() * t));
    let x = propagator * HermitianBasis::coordinates(rho0.matrix());
    Ok(DensityMatrix::from_matrix_unchecked(HermitianBasis::matrix(&x)))
}
