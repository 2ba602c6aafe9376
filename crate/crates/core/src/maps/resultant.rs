//! Sylvester resultant of binary forms via fraction-free elimination.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::BinaryForm;
use crate::error::{Error, Result};

pub type IntMatrix = Vec<Vec<BigInt>>;

/// The 2d x 2d Sylvester matrix. Row `k` of the first block holds the
/// coefficients of `x^(d-1-k) y^k P` and row `d + k` those of
/// `x^(d-1-k) y^k Q`, columns ordered `x^(2d-1), x^(2d-2) y, ..., y^(2d-1)`.
pub fn sylvester_matrix(p: &BinaryForm, q: &BinaryForm) -> Result<IntMatrix> {
    let d = p.degree();
    if q.degree() != d {
        return Err(Error::DegreeMismatch(d, q.degree()));
    }
    if d == 0 {
        return Err(Error::InvalidInput("resultant needs degree >= 1".into()));
    }
    let n = 2 * d;
    let mut m = vec![vec![BigInt::zero(); n]; n];
    for (block, form) in [p, q].into_iter().enumerate() {
        for k in 0..d {
            let row = &mut m[block * d + k];
            for (j, c) in form.coeffs().iter().rev().enumerate() {
                row[k + j] = c.clone();
            }
        }
    }
    Ok(m)
}

/// Determinant by Bareiss fraction-free elimination with row pivoting.
pub fn bareiss_det(mut m: IntMatrix) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::from(1);
    }
    let mut sign = 1i32;
    let mut prev = BigInt::from(1);
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// Homogeneous resultant `Res(P, Q)` as the Sylvester determinant.
pub fn sylvester_resultant(p: &BinaryForm, q: &BinaryForm) -> Result<BigInt> {
    Ok(bareiss_det(sylvester_matrix(p, q)?))
}

fn minor(m: &IntMatrix, row: usize, col: usize) -> IntMatrix {
    m.iter()
        .enumerate()
        .filter(|&(i, _)| i != row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|&(j, _)| j != col)
                .map(|(_, c)| c.clone())
                .collect()
        })
        .collect()
}

/// Coefficients of the cofactor pair `(g, h)` with
/// `g P + h Q = Res(P, Q) x^(2d-1)` (`toward_x = true`) or
/// `... = Res(P, Q) y^(2d-1)`. Entries are signed (2d-1)-minors of the
/// Sylvester matrix; `g` and `h` are listed in row order (descending x power).
pub fn resultant_cofactors(
    p: &BinaryForm,
    q: &BinaryForm,
    toward_x: bool,
) -> Result<(Vec<BigInt>, Vec<BigInt>)> {
    let s = sylvester_matrix(p, q)?;
    let n = s.len();
    let d = n / 2;
    let col = if toward_x { 0 } else { n - 1 };
    let row_of_adj: Vec<BigInt> = (0..n)
        .map(|i| {
            let m = bareiss_det(minor(&s, i, col));
            if (i + col) % 2 == 1 {
                -m
            } else {
                m
            }
        })
        .collect();
    let (g, h) = row_of_adj.split_at(d);
    Ok((g.to_vec(), h.to_vec()))
}

/// `A' = max(|g|_1 + |h|_1)` over the two cofactor pairs. Since
/// `|g(z)| <= |g|_1 ||z||^(d-1)` in the sup norm, every `z` with `||z|| = 1`
/// satisfies `|Res| <= A' ||F(z)||`.
pub fn cofactor_bound(p: &BinaryForm, q: &BinaryForm) -> Result<BigInt> {
    let mut best = BigInt::zero();
    for toward_x in [true, false] {
        let (g, h) = resultant_cofactors(p, q, toward_x)?;
        let l1: BigInt = g.iter().chain(h.iter()).map(|c| c.abs()).sum();
        if l1 > best {
            best = l1;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(c: &[i64]) -> BinaryForm {
        BinaryForm::new(c.iter().map(|&v| BigInt::from(v)).collect()).unwrap()
    }

    /// Cofactor (Laplace) expansion along the first row.
    fn laplace(m: &IntMatrix) -> BigInt {
        let n = m.len();
        if n == 1 {
            return m[0][0].clone();
        }
        (0..n)
            .map(|j| {
                let t = &m[0][j] * laplace(&minor(m, 0, j));
                if j % 2 == 1 {
                    -t
                } else {
                    t
                }
            })
            .sum()
    }

    #[test]
    fn hand_expanded_examples() {
        // x^2, y^2: coeffs[i] multiplies x^i y^(d-i).
        let x2 = form(&[0, 0, 1]);
        let y2 = form(&[1, 0, 0]);
        assert_eq!(sylvester_resultant(&x2, &y2).unwrap(), BigInt::from(1));
        assert_eq!(sylvester_resultant(&x2, &x2).unwrap(), BigInt::from(0));
        let three_x2 = form(&[0, 0, 3]);
        assert_eq!(sylvester_resultant(&three_x2, &y2).unwrap(), BigInt::from(9));
        assert!(matches!(
            sylvester_resultant(&x2, &form(&[1, 1])),
            Err(Error::DegreeMismatch(2, 1))
        ));
    }

    #[test]
    fn bareiss_matches_laplace_for_small_degrees() {
        let samples: [(&[i64], &[i64]); 5] = [
            (&[1, 2, 3], &[-4, 0, 5]),
            (&[0, 7, -1], &[3, 3, 3]),
            (&[2, 0, 0, 1], &[1, -1, 4, 0]),
            (&[5, -3, 2, 9], &[-2, 8, 1, 1]),
            (&[1, 1], &[1, -1]),
        ];
        for (a, b) in samples {
            let (p, q) = (form(a), form(b));
            let s = sylvester_matrix(&p, &q).unwrap();
            assert_eq!(bareiss_det(s.clone()), laplace(&s));
        }
    }

    #[test]
    fn cofactor_identity_holds() {
        let p = form(&[1, -2, 3]);
        let q = form(&[4, 1, -1]);
        let res = sylvester_resultant(&p, &q).unwrap();
        let d = 2;
        for toward_x in [true, false] {
            let (g, h) = resultant_cofactors(&p, &q, toward_x).unwrap();
            // g[k] multiplies x^(d-1-k) y^k; convert to ascending-x storage.
            let g = BinaryForm::new(g.into_iter().rev().collect()).unwrap();
            let h = BinaryForm::new(h.into_iter().rev().collect()).unwrap();
            let lhs = g.mul(&p).add(&h.mul(&q));
            let mut expect = vec![BigInt::zero(); 2 * d];
            if toward_x {
                expect[2 * d - 1] = res.clone();
            } else {
                expect[0] = res.clone();
            }
            assert_eq!(lhs.coeffs(), &expect[..]);
        }
    }
}
