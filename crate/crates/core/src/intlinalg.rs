//! Exact integer linear algebra over BigInt: extended gcd, row Hermite
//! normal form with tracked unimodular factors, integer kernels, Bareiss
//! determinants, adjugate inverses and Smith invariant factors.

use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};

use crate::error::{NfError, Result};

pub type IMat = Vec<Vec<BigInt>>;

pub fn zeros(r: usize, c: usize) -> IMat {
    vec![vec![BigInt::zero(); c]; r]
}

pub fn identity(n: usize) -> IMat {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = BigInt::one();
    }
    m
}

pub fn from_i64(rows: &[Vec<i64>]) -> IMat {
    rows.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

pub fn matmul(a: &IMat, b: &IMat) -> IMat {
    let (ra, ca) = (a.len(), a[0].len());
    let cb = b[0].len();
    debug_assert_eq!(ca, b.len());
    let mut out = zeros(ra, cb);
    for i in 0..ra {
        for k in 0..ca {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..cb {
                let t = &a[i][k] * &b[k][j];
                out[i][j] += t;
            }
        }
    }
    out
}

pub fn transpose(a: &IMat) -> IMat {
    let (r, c) = (a.len(), a[0].len());
    let mut out = zeros(c, r);
    for i in 0..r {
        for j in 0..c {
            out[j][i] = a[i][j].clone();
        }
    }
    out
}

/// Extended gcd: returns (g, x, y) with g = gcd(a, b) >= 0 and x a + y b = g.
pub fn xgcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut old_r, mut r) = (a.clone(), b.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    let (mut old_t, mut t) = (BigInt::zero(), BigInt::one());
    while !r.is_zero() {
        let q = &old_r / &r;
        let tmp = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, tmp);
        let tmp = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, tmp);
        let tmp = &old_t - &q * &t;
        old_t = std::mem::replace(&mut t, tmp);
    }
    if old_r.is_negative() {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Row Hermite normal form with both unimodular factors: returns
/// (H, U, U_inv, pivots) with U A = H, |det U| = 1 and U_inv = U^-1.
/// H is in row echelon form with nonnegative pivots and reduced entries
/// above each pivot.
pub fn row_hnf_with_inverse(a: &IMat) -> (IMat, IMat, IMat, Vec<usize>) {
    let rows = a.len();
    let cols = if rows > 0 { a[0].len() } else { 0 };
    let mut h = a.clone();
    let mut u = identity(rows);
    let mut uinv = identity(rows);

    // row op helpers keeping uinv = u^-1
    // swap rows i,j: inverse is the same swap applied to uinv columns
    // add q*row j to row i: inverse subtracts q from uinv column entries
    let mut pivots = Vec::new();
    let mut pr = 0usize;
    for pc in 0..cols {
        if pr >= rows {
            break;
        }
        // eliminate below using gcd combinations
        let mut any = false;
        for r in pr..rows {
            if !h[r][pc].is_zero() {
                any = true;
                break;
            }
        }
        if !any {
            continue;
        }
        for r in pr + 1..rows {
            if h[r][pc].is_zero() {
                continue;
            }
            let (g, x, y) = xgcd(&h[pr][pc], &h[r][pc]);
            let (ad, bd) = (&h[pr][pc] / &g, &h[r][pc] / &g);
            // rows (pr, r) <- (x*pr + y*r, -bd*pr + ad*r); det = x*ad + y*bd = 1
            combine_rows(&mut h, pr, r, &x, &y, &(-&bd), &ad);
            combine_rows(&mut u, pr, r, &x, &y, &(-&bd), &ad);
            // inverse of [[x, y], [-bd, ad]] is [[ad, -y], [bd, x]]
            combine_cols(&mut uinv, pr, r, &ad, &bd, &(-&y), &x);
        }
        if h[pr][pc].is_negative() {
            negate_row(&mut h, pr);
            negate_row(&mut u, pr);
            negate_col(&mut uinv, pr);
        }
        // reduce entries above the pivot
        for r in 0..pr {
            if h[r][pc].is_zero() {
                continue;
            }
            let q = h[r][pc].div_floor(&h[pr][pc]);
            if q.is_zero() {
                continue;
            }
            add_multiple_row(&mut h, r, pr, &(-&q));
            add_multiple_row(&mut u, r, pr, &(-&q));
            add_multiple_col(&mut uinv, pr, r, &q);
        }
        pivots.push(pc);
        pr += 1;
    }
    (h, u, uinv, pivots)
}

/// rows (i, j) <- (p*row_i + q*row_j, r*row_i + s*row_j)
fn combine_rows(m: &mut IMat, i: usize, j: usize, p: &BigInt, q: &BigInt, r: &BigInt, s: &BigInt) {
    let cols = m[0].len();
    for c in 0..cols {
        let a = m[i][c].clone();
        let b = m[j][c].clone();
        m[i][c] = p * &a + q * &b;
        m[j][c] = r * &a + s * &b;
    }
}

/// cols (i, j) <- (p*col_i + q*col_j, r*col_i + s*col_j)
fn combine_cols(m: &mut IMat, i: usize, j: usize, p: &BigInt, q: &BigInt, r: &BigInt, s: &BigInt) {
    for row in m.iter_mut() {
        let a = row[i].clone();
        let b = row[j].clone();
        row[i] = p * &a + q * &b;
        row[j] = r * &a + s * &b;
    }
}

fn negate_row(m: &mut IMat, i: usize) {
    for v in m[i].iter_mut() {
        *v = -v.clone();
    }
}

fn negate_col(m: &mut IMat, j: usize) {
    for row in m.iter_mut() {
        row[j] = -row[j].clone();
    }
}

/// row_i += q * row_j
fn add_multiple_row(m: &mut IMat, i: usize, j: usize, q: &BigInt) {
    let cols = m[0].len();
    for c in 0..cols {
        let t = q * &m[j][c];
        m[i][c] += t;
    }
}

/// col_i += q * col_j
fn add_multiple_col(m: &mut IMat, i: usize, j: usize, q: &BigInt) {
    for row in m.iter_mut() {
        let t = q * &row[j];
        row[i] += t;
    }
}

/// Basis of the integer kernel {k in Z^d : A k = 0} for A with g rows, d
/// columns. Rows of the result form a Hermite-reduced lattice basis.
pub fn integer_kernel(a: &IMat) -> IMat {
    let at = transpose(a); // d x g
    let (h, u, _uinv, _piv) = row_hnf_with_inverse(&at);
    // rows of h that are zero correspond to kernel rows of u
    let mut kernel: IMat = Vec::new();
    for (i, row) in h.iter().enumerate() {
        if row.iter().all(|x| x.is_zero()) {
            kernel.push(u[i].clone());
        }
    }
    if kernel.is_empty() {
        return kernel;
    }
    let (kh, _, _, _) = row_hnf_with_inverse(&kernel);
    kh.into_iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .collect()
}

/// Bareiss fraction-free determinant.
pub fn det(a: &IMat) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m = a.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let swap = (k + 1..n).find(|&r| !m[r][k].is_zero());
            match swap {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = &num / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

/// Inverse of a unimodular integer matrix via the adjugate.
pub fn unimodular_inverse(a: &IMat) -> Result<IMat> {
    let n = a.len();
    let d = det(a);
    if d.magnitude() != BigInt::one().magnitude() {
        return Err(NfError::InvalidInput(format!(
            "matrix is not unimodular (determinant {d})"
        )));
    }
    let mut inv = zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // cofactor C_ji for the (i,j) entry of the inverse
            let minor: IMat = (0..n)
                .filter(|&r| r != j)
                .map(|r| {
                    (0..n)
                        .filter(|&c| c != i)
                        .map(|c| a[r][c].clone())
                        .collect()
                })
                .collect();
            let mut cof = det(&minor);
            if (i + j) % 2 == 1 {
                cof = -cof;
            }
            inv[i][j] = cof;
        }
    }
    if d.is_negative() {
        for row in inv.iter_mut() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
        }
    }
    Ok(inv)
}

/// Invariant factors of the Smith normal form (nonzero ones, ascending).
pub fn smith_invariant_factors(a: &IMat) -> Vec<BigInt> {
    let mut m = a.clone();
    let rows = m.len();
    let cols = if rows > 0 { m[0].len() } else { 0 };
    let mut factors = Vec::new();
    let mut top = 0usize;
    while top < rows.min(cols) {
        // find a nonzero pivot
        let mut pivot = None;
        'search: for i in top..rows {
            for j in top..cols {
                if !m[i][j].is_zero() {
                    pivot = Some((i, j));
                    break 'search;
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        m.swap(top, pi);
        for row in m.iter_mut() {
            row.swap(top, pj);
        }
        loop {
            // clear column `top`
            let mut dirty = false;
            for i in top + 1..rows {
                if m[i][top].is_zero() {
                    continue;
                }
                let (g, x, y) = xgcd(&m[top][top], &m[i][top]);
                let (ad, bd) = (&m[top][top] / &g, &m[i][top] / &g);
                combine_rows(&mut m, top, i, &x, &y, &(-&bd), &ad);
                dirty = true;
            }
            // clear row `top`
            for j in top + 1..cols {
                if m[top][j].is_zero() {
                    continue;
                }
                let (g, x, y) = xgcd(&m[top][top], &m[top][j]);
                let (ad, bd) = (&m[top][top] / &g, &m[top][j] / &g);
                // column version of the gcd combination
                let cols_pair = (top, j);
                for row in m.iter_mut() {
                    let a0 = row[cols_pair.0].clone();
                    let b0 = row[cols_pair.1].clone();
                    row[cols_pair.0] = &x * &a0 + &y * &b0;
                    row[cols_pair.1] = -&bd * &a0 + &ad * &b0;
                }
                dirty = true;
            }
            if !dirty {
                break;
            }
        }
        // enforce divisibility of later entries by the pivot
        let mut fixed = true;
        'divis: for i in top + 1..rows {
            for j in top + 1..cols {
                if !(&m[i][j] % &m[top][top]).is_zero() {
                    add_multiple_row(&mut m, top, i, &BigInt::one());
                    fixed = false;
                    break 'divis;
                }
            }
        }
        if fixed {
            factors.push(m[top][top].abs());
            top += 1;
        }
    }
    factors
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i(rows: &[Vec<i64>]) -> IMat {
        from_i64(rows)
    }

    #[test]
    fn xgcd_bezout() {
        let (g, x, y) = xgcd(&BigInt::from(240), &BigInt::from(46));
        assert_eq!(g, BigInt::from(2));
        assert_eq!(x * 240 + y * 46, BigInt::from(2));
    }

    #[test]
    fn hnf_factors_multiply_back() {
        let a = i(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, 4, 16]]);
        let (h, u, uinv, _) = row_hnf_with_inverse(&a);
        assert_eq!(matmul(&u, &a), h);
        assert_eq!(matmul(&u, &uinv), identity(3));
        assert_eq!(det(&u).magnitude(), BigInt::one().magnitude());
    }

    #[test]
    fn kernel_of_simple_relation() {
        // nu = (1, 2): kernel of the 1x2 matrix [1 2] is spanned by (2, -1)
        let a = i(&[vec![1, 2]]);
        let k = integer_kernel(&a);
        assert_eq!(k.len(), 1);
        let v = &k[0];
        assert!(v[0].clone() + 2 * v[1].clone() == BigInt::zero());
        assert!((v[0].magnitude(), v[1].magnitude())
            == (BigInt::from(2).magnitude(), BigInt::from(1).magnitude()));
    }

    #[test]
    fn kernel_rank_and_orthogonality() {
        // all-ones frequency in d = 3: kernel rank 2
        let a = i(&[vec![1, 1, 1]]);
        let k = integer_kernel(&a);
        assert_eq!(k.len(), 2);
        for v in &k {
            let s: BigInt = v.iter().sum();
            assert!(s.is_zero());
        }
    }

    #[test]
    fn determinant_and_inverse() {
        let a = i(&[vec![2, 1], vec![1, 1]]);
        assert_eq!(det(&a), BigInt::one());
        let inv = unimodular_inverse(&a).unwrap();
        assert_eq!(matmul(&a, &inv), identity(2));
    }

    #[test]
    fn smith_detects_nonprimitive_row() {
        let a = i(&[vec![2, 0]]);
        let f = smith_invariant_factors(&a);
        assert_eq!(f, vec![BigInt::from(2)]);
        let b = i(&[vec![2, -1]]);
        assert_eq!(smith_invariant_factors(&b), vec![BigInt::one()]);
    }
}
