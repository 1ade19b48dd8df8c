//! Dense matrix exponential: scaling-and-squaring with a degree-13 Pade core,
//! plus a unitarity-restoring polar step for exponentials of i times a
//! Hermitian matrix. Long conjugation chains must not leak operator norm.

use nalgebra::DMatrix;

use crate::error::{NfError, Result};
use crate::model::C64;

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

fn one_norm(a: &DMatrix<C64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        let s: f64 = a.column(j).iter().map(|z| z.norm()).sum();
        best = best.max(s);
    }
    best
}

/// exp(A) for a general complex dense matrix.
pub fn expm(a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(NfError::InvalidInput("expm requires a square matrix".into()));
    }
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.unscale(2f64.powi(s));
    let id = DMatrix::<C64>::identity(n, n);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let b = &PADE13;
    let u_inner = &a6 * (a6.scale(b[13]) + a4.scale(b[11]) + a2.scale(b[9]))
        + a6.scale(b[7])
        + a4.scale(b[5])
        + a2.scale(b[3])
        + id.scale(b[1]);
    let u = &scaled * u_inner;
    let v = &a6 * (a6.scale(b[12]) + a4.scale(b[10]) + a2.scale(b[8]))
        + a6.scale(b[6])
        + a4.scale(b[4])
        + a2.scale(b[2])
        + id.scale(b[0]);
    let denom = &v - &u;
    let lu = denom.lu();
    let mut e = lu
        .solve(&(&v + &u))
        .ok_or_else(|| NfError::Numerical("singular Pade denominator in expm".into()))?;
    for _ in 0..s {
        e = &e * &e;
    }
    Ok(e)
}

/// exp(i tau X) for Hermitian X, with one polar Newton step to restore
/// unitarity after the Pade evaluation.
pub fn expm_i_hermitian(x: &DMatrix<C64>, tau: f64) -> Result<DMatrix<C64>> {
    let arg = x.map(|z| C64::new(0.0, tau) * z);
    let e = expm(&arg)?;
    polar_unitary_step(&e)
}

/// One Newton step of the polar iteration, U <- (U + U^-H)/2.
pub fn polar_unitary_step(u: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let inv = u
        .clone()
        .try_inverse()
        .ok_or_else(|| NfError::Numerical("singular matrix in polar projection".into()))?;
    Ok((u + inv.adjoint()).scale(0.5))
}

/// Max deviation of U from unitarity, max |(U^H U - I)_ij|.
pub fn unitarity_defect(u: &DMatrix<C64>) -> f64 {
    let n = u.nrows();
    let g = u.adjoint() * u - DMatrix::<C64>::identity(n, n);
    g.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_hermitian(n: usize, seed: u64) -> DMatrix<C64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = DMatrix::<C64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(rng.gen_range(-1.0..1.0), 0.0);
            for j in 0..i {
                let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn expm_diagonal_closed_form() {
        let mut d = DMatrix::<C64>::zeros(3, 3);
        d[(0, 0)] = C64::new(0.3, 0.0);
        d[(1, 1)] = C64::new(-1.2, 0.5);
        d[(2, 2)] = C64::new(7.0, -2.0);
        let e = expm(&d).unwrap();
        for i in 0..3 {
            let want = d[(i, i)].exp();
            assert!((e[(i, i)] - want).norm() < 1e-12 * want.norm());
        }
    }

    #[test]
    fn expm_nilpotent() {
        // exp([[0,1],[0,0]]) = [[1,1],[0,1]]
        let mut a = DMatrix::<C64>::zeros(2, 2);
        a[(0, 1)] = C64::new(1.0, 0.0);
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((e[(0, 1)] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(e[(1, 0)].norm() < 1e-14);
    }

    #[test]
    fn hermitian_exponential_is_unitary() {
        for seed in 0..5u64 {
            let x = random_hermitian(24, seed) * C64::new(3.0, 0.0);
            let u = expm_i_hermitian(&x, 1.7).unwrap();
            assert!(unitarity_defect(&u) < 1e-12, "defect {}", unitarity_defect(&u));
        }
    }

    #[test]
    fn group_property_under_squaring() {
        let x = random_hermitian(16, 42);
        let u1 = expm_i_hermitian(&x, 0.4).unwrap();
        let u2 = expm_i_hermitian(&x, 0.8).unwrap();
        let diff = (&u1 * &u1 - u2).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(diff < 1e-12, "diff {diff}");
    }
}
