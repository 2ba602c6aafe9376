//! Moduli coordinates of quadratic rational maps: the elementary symmetric
//! functions of the three fixed-point multipliers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{conjugate, HomogeneousLift, Mobius};
use crate::arith::ln_abs;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MilnorInvariants {
    #[serde(serialize_with = "ser_rational")]
    pub sigma1: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub sigma2: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub sigma3: BigRational,
    /// Weil height of `[sigma1 : sigma2 : 1]`.
    pub moduli_height: f64,
}

fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

type Mat3 = [[BigRational; 3]; 3];

fn rat(n: &BigInt) -> BigRational {
    BigRational::from_integer(n.clone())
}

/// Multiplication-by-`g` matrix on `Q[z]/(m)` in the basis `1, z, z^2`,
/// where `m = z^3 + m2 z^2 + m1 z + m0` is given by `[m0, m1, m2]`.
fn mult_matrix(g: &[BigRational; 3], m: &[BigRational; 3]) -> Mat3 {
    let mut cols: Vec<[BigRational; 3]> = Vec::with_capacity(3);
    let mut cur = g.clone();
    for _ in 0..3 {
        cols.push(cur.clone());
        // multiply by z and reduce the z^3 term
        let top = cur[2].clone();
        cur = [
            -(&top * &m[0]),
            &cur[0] - &top * &m[1],
            &cur[1] - &top * &m[2],
        ];
    }
    std::array::from_fn(|i| std::array::from_fn(|j| cols[j][i].clone()))
}

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| (0..3).map(|k| &a[i][k] * &b[k][j]).sum())
    })
}

fn det3(a: &Mat3) -> BigRational {
    &a[0][0] * (&a[1][1] * &a[2][2] - &a[1][2] * &a[2][1])
        - &a[0][1] * (&a[1][0] * &a[2][2] - &a[1][2] * &a[2][0])
        + &a[0][2] * (&a[1][0] * &a[2][1] - &a[1][1] * &a[2][0])
}

fn inverse3(a: &Mat3) -> Option<Mat3> {
    let det = det3(a);
    if det.is_zero() {
        return None;
    }
    let c = |i: usize, j: usize| {
        let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
        let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
        &a[r0][c0] * &a[r1][c1] - &a[r0][c1] * &a[r1][c0]
    };
    // inverse = adj / det, adj[i][j] = cofactor[j][i]
    Some(std::array::from_fn(|i| std::array::from_fn(|j| c(j, i) / &det)))
}

/// Weil height of a point of P^n with rational coordinates.
pub(crate) fn rational_point_height(coords: &[BigRational]) -> f64 {
    let l = coords.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let ints: Vec<BigInt> = coords.iter().map(|r| r.numer() * (&l / r.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    let m = ints.iter().map(|c| (c / &g).abs()).max().unwrap_or_default();
    ln_abs(&m)
}

/// `(sigma1, sigma2, sigma3)` of a quadratic map, computed exactly as the
/// characteristic polynomial of multiplication by the multiplier function
/// on the fixed-point algebra.
pub fn milnor_invariants(f: &HomogeneousLift) -> Result<MilnorInvariants> {
    if f.degree() != 2 {
        return Err(Error::UnsupportedDegree(f.degree(), 2));
    }
    // Move infinity off the fixed-point set: conjugate by z -> z/(kz+1).
    let g = [0i64, 1, -1, 2, -2, 3]
        .iter()
        .map(|&k| {
            let phi = Mobius::from_ints(1, 0, k, 1).unwrap();
            conjugate(f, &phi)
        })
        .find(|g| !g.q().coeffs()[2].is_zero())
        .expect("at most three fixed points, so one of six shifts works");

    let a: Vec<BigRational> = g.p().coeffs().iter().map(rat).collect();
    let b: Vec<BigRational> = g.q().coeffs().iter().map(rat).collect();
    // f = N/D, N = a2 z^2 + a1 z + a0, D = b2 z^2 + b1 z + b0.
    // Fixed-point polynomial N - zD = -b2 z^3 + (a2 - b1) z^2 + (a1 - b0) z + a0.
    let lead = -b[2].clone();
    let monic = [
        &a[0] / &lead,
        (&a[1] - &b[0]) / &lead,
        (&a[2] - &b[1]) / &lead,
    ];
    // At a fixed point the multiplier is (N' - z D') / D.
    // N' - zD' = 2 a2 z + a1 - 2 b2 z^2 - b1 z.
    let two = BigRational::from_integer(2.into());
    let numer = [a[1].clone(), &two * &a[2] - &b[1], -(&two * &b[2])];
    let denom = [b[0].clone(), b[1].clone(), b[2].clone()];
    let md = mult_matrix(&denom, &monic);
    let mn = mult_matrix(&numer, &monic);
    let md_inv = inverse3(&md).expect("D is a unit modulo the fixed-point polynomial");
    let lam = mat_mul(&md_inv, &mn);

    let sigma1 = &lam[0][0] + &lam[1][1] + &lam[2][2];
    let minor = |i: usize, j: usize| &lam[i][i] * &lam[j][j] - &lam[i][j] * &lam[j][i];
    let sigma2 = minor(0, 1) + minor(0, 2) + minor(1, 2);
    let sigma3 = det3(&lam);
    let moduli_height =
        rational_point_height(&[sigma1.clone(), sigma2.clone(), BigRational::one()]);
    Ok(MilnorInvariants { sigma1, sigma2, sigma3, moduli_height })
}
