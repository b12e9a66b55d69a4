//! Resultants of binary forms: Sylvester determinant and remainder-sequence routes.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{BinaryForm, PolyError};

/// Above this degree `resultant_forms` switches from the Sylvester
/// determinant to the subresultant route.
pub const BAREISS_MAX_DEGREE: usize = 32;

fn check(a: &BinaryForm, b: &BinaryForm, d: usize) -> Result<(), PolyError> {
    if d == 0 {
        return Err(PolyError::ConstantForms);
    }
    for f in [a, b] {
        if !f.is_zero() && f.degree() != Some(d) {
            return Err(PolyError::DegreeMismatch);
        }
    }
    Ok(())
}

/// The `2d x 2d` Sylvester matrix: `d` shifted rows of `a`, then `d` of `b`,
/// each with coefficients listed from `t1^d` down to `t2^d`.
pub fn sylvester_matrix(a: &BinaryForm, b: &BinaryForm, d: usize) -> Vec<Vec<BigInt>> {
    let n = 2 * d;
    let mut m = vec![vec![BigInt::zero(); n]; n];
    for (block, f) in [a, b].into_iter().enumerate() {
        for i in 0..d {
            for j in 0..=d {
                m[block * d + i][i + j] = f.coeff(d - j);
            }
        }
    }
    m
}

/// Determinant by fraction-free (Bareiss) elimination with row pivoting.
pub fn bareiss_determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    negate = !negate;
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
    if negate {
        -det
    } else {
        det
    }
}

/// Sylvester determinant of two forms of formal degree `d >= 1`.
pub fn resultant_bareiss(a: &BinaryForm, b: &BinaryForm, d: usize) -> Result<BigInt, PolyError> {
    check(a, b, d)?;
    Ok(bareiss_determinant(sylvester_matrix(a, b, d)))
}

fn sign(odd: bool) -> BigInt {
    if odd {
        -BigInt::one()
    } else {
        BigInt::one()
    }
}

/// The same determinant through the univariate subresultant resultant of
/// the dehomogenisations, corrected for a drop in `t1`-degree.
pub fn resultant_subresultant(a: &BinaryForm, b: &BinaryForm, d: usize) -> Result<BigInt, PolyError> {
    check(a, b, d)?;
    if a.is_zero() || b.is_zero() {
        return Ok(BigInt::zero());
    }
    let ua = a.dehomogenize();
    let ub = b.dehomogenize();
    let da = ua.degree().unwrap_or(0);
    let db = ub.degree().unwrap_or(0);
    let r = ua.resultant(&ub);
    Ok(match (da == d, db == d) {
        (true, true) => r,
        (false, false) => BigInt::zero(),
        (false, true) => {
            let k = d - da;
            sign(d * k % 2 == 1) * num_traits::pow(ub.lc(), k) * r
        }
        (true, false) => {
            // Res(a, b) = (-1)^(d^2) Res(b, a), then the case above.
            let k = d - db;
            let swap = (d * d + d * k + da * db) % 2 == 1;
            sign(swap) * num_traits::pow(ua.lc(), k) * r
        }
    })
}

/// Resultant of two degree-`d` forms, choosing the route by size.
pub fn resultant_forms(a: &BinaryForm, b: &BinaryForm, d: usize) -> Result<BigInt, PolyError> {
    if d <= BAREISS_MAX_DEGREE {
        resultant_bareiss(a, b, d)
    } else {
        resultant_subresultant(a, b, d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bf(c: &[i64]) -> BinaryForm {
        BinaryForm::from_i64(c)
    }

    /// Cofactor expansion, independent of elimination.
    fn det_cofactor(m: &[Vec<BigInt>]) -> BigInt {
        let n = m.len();
        if n == 0 {
            return BigInt::one();
        }
        let mut acc = BigInt::zero();
        for j in 0..n {
            if m[0][j].is_zero() {
                continue;
            }
            let minor: Vec<Vec<BigInt>> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, x)| x.clone()).collect())
                .collect();
            let term = &m[0][j] * det_cofactor(&minor);
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    #[test]
    fn frozen_examples() {
        // F_1^+ = (2 t2, t1 + 2 t2) and F_2^+ for lambda = 2.
        let (a1, b1) = (bf(&[2, 0]), bf(&[2, 1]));
        let (a2, b2) = (bf(&[8, 4, 0]), bf(&[8, 8, 3]));
        for route in [resultant_bareiss, resultant_subresultant] {
            assert_eq!(route(&a1, &b1, 1).unwrap(), BigInt::from(-2));
            assert_eq!(route(&a2, &b2, 2).unwrap(), BigInt::from(192));
            assert_eq!(route(&BinaryForm::t1(), &BinaryForm::t1(), 1).unwrap(), BigInt::zero());
        }
        assert_eq!(det_cofactor(&sylvester_matrix(&a1, &b1, 1)), BigInt::from(-2));
        assert_eq!(det_cofactor(&sylvester_matrix(&a2, &b2, 2)), BigInt::from(192));
    }

    #[test]
    fn routes_agree_on_degree_drops() {
        let cases: [(&[i64], &[i64]); 6] = [
            (&[1, 2, 0, 0], &[3, -1, 4, 1]),
            (&[3, -1, 4, 1], &[1, 2, 0, 0]),
            (&[5, 1, 0], &[2, 0, 0]),
            (&[0, 1, 1], &[1, 1, 1]),
            (&[7, 0, 0, 0, 0], &[1, 2, 3, 4, 5]),
            (&[1, 2, 3, 4, 5], &[7, 3, 0, 0, 0]),
        ];
        for (a, b) in cases {
            let (a, b) = (bf(a), bf(b));
            let d = a.degree().unwrap();
            let oracle = det_cofactor(&sylvester_matrix(&a, &b, d));
            assert_eq!(resultant_bareiss(&a, &b, d).unwrap(), oracle);
            assert_eq!(resultant_subresultant(&a, &b, d).unwrap(), oracle, "{a} / {b}");
        }
    }

    #[test]
    fn rejects_bad_degrees() {
        assert_eq!(resultant_bareiss(&bf(&[1]), &bf(&[2]), 0), Err(PolyError::ConstantForms));
        assert_eq!(resultant_bareiss(&bf(&[1, 1]), &bf(&[2, 1, 1]), 1), Err(PolyError::DegreeMismatch));
    }
}
