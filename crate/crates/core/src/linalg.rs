//! Division-free linear algebra over commutative rings, plus inversion of
//! integer matrices modulo prime powers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

/// Minimal commutative ring interface used by the determinant routines.
pub trait RingElem: Clone {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
}

/// Determinant of a square matrix.
///
/// Small matrices use cofactor expansion; larger ones use Berkowitz's
/// algorithm, which needs no division and so keeps p-adic precision intact.
pub fn berkowitz_det<T: RingElem>(m: &[Vec<T>]) -> T {
    let n = m.len();
    assert!(n > 0, "empty matrix");
    match n {
        1 => m[0][0].clone(),
        2 => m[0][0].mul(&m[1][1]).sub(&m[0][1].mul(&m[1][0])),
        3 => {
            let minor = |a: usize, b: usize, c: usize, d: usize| {
                m[1][a].mul(&m[2][b]).sub(&m[1][c].mul(&m[2][d]))
            };
            m[0][0]
                .mul(&minor(1, 2, 2, 1))
                .sub(&m[0][1].mul(&minor(0, 2, 2, 0)))
                .add(&m[0][2].mul(&minor(0, 1, 1, 0)))
        }
        _ => berkowitz(m),
    }
}

fn berkowitz<T: RingElem>(m: &[Vec<T>]) -> T {
    let n = m.len();
    let zero = m[0][0].zero_like();
    let one = m[0][0].one_like();
    // characteristic polynomial coefficients of the leading r x r block
    let mut poly: Vec<T> = vec![one.clone(), m[0][0].neg()];
    for r in 1..n {
        // A = leading r x r block, R = row r (cols < r), C = column r (rows < r)
        let a = m[r][r].clone();
        let row: Vec<T> = (0..r).map(|j| m[r][j].clone()).collect();
        let mut col: Vec<T> = (0..r).map(|i| m[i][r].clone()).collect();
        // Toeplitz column: 1, -a, -R C, -R A C, ...
        let mut toep = vec![one.clone(), a.neg()];
        for _ in 0..r {
            let rc = row.iter().zip(&col).fold(zero.clone(), |s, (x, y)| s.add(&x.mul(y)));
            toep.push(rc.neg());
            col = (0..r)
                .map(|i| (0..r).fold(zero.clone(), |s, j| s.add(&m[i][j].mul(&col[j]))))
                .collect();
        }
        let mut next = vec![zero.clone(); r + 2];
        for (i, slot) in next.iter_mut().enumerate() {
            let mut s = zero.clone();
            for (j, pj) in poly.iter().enumerate() {
                if i >= j && i - j < toep.len() {
                    s = s.add(&toep[i - j].mul(pj));
                }
            }
            *slot = s;
        }
        poly = next;
    }
    let c = poly[n].clone();
    if n % 2 == 0 {
        c
    } else {
        c.neg()
    }
}

/// Inverse of a square integer matrix modulo `m = p^k`, or `None` when the
/// matrix is singular modulo `p`.
pub fn inverse_mod(mat: &[Vec<BigInt>], p: &BigInt, m: &BigInt) -> Option<Vec<Vec<BigInt>>> {
    let n = mat.len();
    let mut a: Vec<Vec<BigInt>> = mat
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<BigInt> = row.iter().map(|x| x.mod_floor(m)).collect();
            r.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_multiple_of(p))?;
        a.swap(col, piv);
        let inv = a[col][col].extended_gcd(m).x.mod_floor(m);
        for x in a[col].iter_mut() {
            *x = (&*x * &inv).mod_floor(m);
        }
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x = (&*x - &f * y).mod_floor(m);
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}
