//! Exact frequency-lattice arithmetic: resonance modules, unimodular basis
//! completion, the decomposition nu = sum nu~_j v_j and Diophantine constant
//! scans.
//!
//! Frequencies enter only as exact rational combinations of declared
//! generators (1, square roots, the golden ratio, algebraic numbers given by
//! a minimal polynomial). Resonance detection over floats is hopeless; over
//! the generator representation it is integer linear algebra.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, ToPrimitive, Zero};

use crate::error::{NfError, Result};
use crate::intlinalg::{self, IMat};

/// A declared irrational (or rational) generator.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// The rational unit 1.
    One,
    /// sqrt(n) for a positive integer n (need not be squarefree).
    Sqrt(u64),
    /// The golden ratio (1 + sqrt 5)/2.
    GoldenRatio,
    /// Root of the polynomial sum c_i x^i isolated in [lo, hi].
    Algebraic {
        coeffs: Vec<BigRational>,
        lo: BigRational,
        hi: BigRational,
    },
}

impl Generator {
    pub fn parse(s: &str) -> Result<Generator> {
        let t = s.trim();
        if t == "1" {
            return Ok(Generator::One);
        }
        if t == "phi" || t == "golden" {
            return Ok(Generator::GoldenRatio);
        }
        if let Some(rest) = t.strip_prefix("sqrt") {
            let n: u64 = rest
                .parse()
                .map_err(|_| NfError::Config(format!("bad sqrt generator '{t}'")))?;
            if n == 0 {
                return Err(NfError::Config("sqrt0 is not a generator".into()));
            }
            return Ok(Generator::Sqrt(n));
        }
        Err(NfError::Config(format!(
            "unknown generator '{t}' (expected 1, sqrtN, phi)"
        )))
    }

    pub fn label(&self) -> String {
        match self {
            Generator::One => "1".into(),
            Generator::Sqrt(n) => format!("sqrt{n}"),
            Generator::GoldenRatio => "phi".into(),
            Generator::Algebraic { .. } => "algebraic".into(),
        }
    }
}

/// Enclosure of a generator value as scaled integers: value is inside
/// [lo, hi] / 10^digits.
#[derive(Debug, Clone)]
pub struct ScaledInterval {
    pub lo: BigInt,
    pub hi: BigInt,
    pub digits: u32,
}

fn pow10(digits: u32) -> BigInt {
    BigInt::from(10u32).pow(digits)
}

fn isqrt_floor(n: &BigInt) -> BigInt {
    n.sqrt()
}

/// Evaluate one generator to `digits` decimal digits.
pub fn generator_interval(g: &Generator, digits: u32) -> Result<ScaledInterval> {
    let scale = pow10(digits);
    match g {
        Generator::One => Ok(ScaledInterval {
            lo: scale.clone(),
            hi: scale,
            digits,
        }),
        Generator::Sqrt(n) => {
            let target = BigInt::from(*n) * pow10(2 * digits);
            let lo = isqrt_floor(&target);
            let hi = &lo + 1;
            Ok(ScaledInterval { lo, hi, digits })
        }
        Generator::GoldenRatio => {
            let target = BigInt::from(5u32) * pow10(2 * digits);
            let s_lo = isqrt_floor(&target);
            let s_hi: BigInt = &s_lo + 1;
            let sum_lo: BigInt = &scale + s_lo;
            let sum_hi: BigInt = &scale + s_hi;
            let two = BigInt::from(2);
            let lo = sum_lo.div_floor_i(&two);
            let hi = sum_hi.div_ceil_i(&two);
            Ok(ScaledInterval { lo, hi, digits })
        }
        Generator::Algebraic { coeffs, lo, hi } => {
            algebraic_interval(coeffs, lo, hi, digits)
        }
    }
}

fn eval_poly(coeffs: &[BigRational], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Bisection on an isolating interval with exact rational sign evaluation.
fn algebraic_interval(
    coeffs: &[BigRational],
    lo0: &BigRational,
    hi0: &BigRational,
    digits: u32,
) -> Result<ScaledInterval> {
    let flo = eval_poly(coeffs, lo0);
    let fhi = eval_poly(coeffs, hi0);
    if flo.is_zero() {
        return rational_point_interval(lo0, digits);
    }
    if fhi.is_zero() {
        return rational_point_interval(hi0, digits);
    }
    if flo.is_positive() == fhi.is_positive() {
        return Err(NfError::Config(
            "algebraic generator interval does not isolate a sign change".into(),
        ));
    }
    let mut lo = lo0.clone();
    let mut hi = hi0.clone();
    let eps = BigRational::new(BigInt::one(), pow10(digits + 1));
    let lo_negative = flo.is_negative();
    while &hi - &lo > eps {
        let mid = (&lo + &hi) / BigRational::from_integer(BigInt::from(2));
        let fm = eval_poly(coeffs, &mid);
        if fm.is_zero() {
            return rational_point_interval(&mid, digits);
        }
        if fm.is_negative() == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ScaledInterval {
        lo: rational_scaled_floor(&lo, digits),
        hi: rational_scaled_ceil(&hi, digits),
        digits,
    })
}

fn rational_point_interval(x: &BigRational, digits: u32) -> Result<ScaledInterval> {
    Ok(ScaledInterval {
        lo: rational_scaled_floor(x, digits),
        hi: rational_scaled_ceil(x, digits),
        digits,
    })
}

fn rational_scaled_floor(x: &BigRational, digits: u32) -> BigInt {
    (x.numer() * pow10(digits)).div_floor_i(x.denom())
}

fn rational_scaled_ceil(x: &BigRational, digits: u32) -> BigInt {
    (x.numer() * pow10(digits)).div_ceil_i(x.denom())
}

/// Interval enclosure of sum_j q_j g_j for rational q over generator
/// enclosures.
fn combo_interval(q: &[BigRational], gens: &[ScaledInterval]) -> (BigInt, BigInt, u32) {
    let digits = gens.first().map(|g| g.digits).unwrap_or(0);
    let mut lo = BigInt::zero();
    let mut hi = BigInt::zero();
    for (c, g) in q.iter().zip(gens) {
        if c.is_zero() {
            continue;
        }
        let (a, b) = if c.is_positive() {
            (
                (c.numer() * &g.lo).div_floor_i(c.denom()),
                (c.numer() * &g.hi).div_ceil_i(c.denom()),
            )
        } else {
            (
                (c.numer() * &g.hi).div_floor_i(c.denom()),
                (c.numer() * &g.lo).div_ceil_i(c.denom()),
            )
        };
        lo += a;
        hi += b;
    }
    (lo, hi, digits)
}

fn scaled_to_f64(x: &BigInt, digits: u32) -> f64 {
    x.to_f64().unwrap_or(f64::NAN) / 10f64.powi(digits as i32)
}

/// A frequency value as an exact rational combination of the shared
/// generator list.
pub type GenCombo = Vec<BigRational>;

pub fn combo_is_zero(q: &[BigRational]) -> bool {
    q.iter().all(|c| c.is_zero())
}

/// High-precision float view of a combination (enclosure width 10^-40).
pub fn combo_to_f64(q: &[BigRational], gens: &[Generator]) -> Result<f64> {
    let ivs: Vec<ScaledInterval> = gens
        .iter()
        .map(|g| generator_interval(g, 40))
        .collect::<Result<_>>()?;
    let (lo, hi, digits) = combo_interval(q, &ivs);
    Ok((scaled_to_f64(&lo, digits) + scaled_to_f64(&hi, digits)) / 2.0)
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    if let Some((num, den)) = t.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| NfError::Config(format!("bad rational '{t}'")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| NfError::Config(format!("bad rational '{t}'")))?;
        if d.is_zero() {
            return Err(NfError::Config(format!("zero denominator in '{t}'")));
        }
        Ok(BigRational::new(n, d))
    } else {
        let n: BigInt = t
            .parse()
            .map_err(|_| NfError::Config(format!("bad rational '{t}'")))?;
        Ok(BigRational::from_integer(n))
    }
}

/// Exact arithmetic record for a frequency vector nu (and drive omega):
/// resonance lattice, unimodular completion M, decomposition data and the
/// latest Diophantine scan.
#[derive(Debug, Clone)]
pub struct FrequencySystem {
    pub generators: Vec<Generator>,
    /// nu_i as combination rows over the generators (d rows).
    pub nu: Vec<GenCombo>,
    /// Drive frequency combinations (n rows), may be empty.
    pub omega: Vec<GenCombo>,
    /// Basis rows of the resonance lattice M_nu (r x d).
    pub lattice_basis: IMat,
    /// Unimodular matrix with the lattice basis as first rows (d x d).
    pub m_matrix: IMat,
    /// Inverse of m_matrix.
    pub m_inverse: IMat,
    /// nu-tilde combinations (d~ rows), rationally independent components.
    pub nu_tilde: Vec<GenCombo>,
    /// Integer vectors v_j with nu = sum_j nu~_j v_j (d~ rows of length d).
    pub v_vectors: IMat,
}

impl FrequencySystem {
    /// Run the full pipeline: resonance lattice, completion, decomposition.
    pub fn analyze(
        generators: Vec<Generator>,
        nu: Vec<GenCombo>,
        omega: Vec<GenCombo>,
    ) -> Result<FrequencySystem> {
        let d = nu.len();
        if d == 0 {
            return Err(NfError::InvalidInput("empty frequency vector".into()));
        }
        let g = generators.len();
        for row in nu.iter().chain(omega.iter()) {
            if row.len() != g {
                return Err(NfError::InvalidInput(
                    "combination length does not match generator count".into(),
                ));
            }
        }
        let lattice_basis = resonance_lattice(&nu)?;
        let m_matrix = complete_basis(&lattice_basis, d)?;
        let m_inverse = intlinalg::unimodular_inverse(&m_matrix)?;
        let (nu_tilde, v_vectors) = decompose(&m_matrix, &m_inverse, &nu, lattice_basis.len())?;
        Ok(FrequencySystem {
            generators,
            nu,
            omega,
            lattice_basis,
            m_matrix,
            m_inverse,
            nu_tilde,
            v_vectors,
        })
    }

    pub fn d(&self) -> usize {
        self.nu.len()
    }

    pub fn d_tilde(&self) -> usize {
        self.nu_tilde.len()
    }

    pub fn nu_f64(&self) -> Result<Vec<f64>> {
        self.nu
            .iter()
            .map(|q| combo_to_f64(q, &self.generators))
            .collect()
    }

    pub fn nu_tilde_f64(&self) -> Result<Vec<f64>> {
        self.nu_tilde
            .iter()
            .map(|q| combo_to_f64(q, &self.generators))
            .collect()
    }

    pub fn omega_f64(&self) -> Result<Vec<f64>> {
        self.omega
            .iter()
            .map(|q| combo_to_f64(q, &self.generators))
            .collect()
    }

    /// v_j rows as i64 vectors.
    pub fn v_vectors_i64(&self) -> Result<Vec<Vec<i64>>> {
        self.v_vectors
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| {
                        x.to_i64().ok_or_else(|| {
                            NfError::Numerical("resonance vector entry exceeds i64".into())
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// Exact reconstruction check: nu == sum_j nu~_j v_j in the generator
    /// representation.
    pub fn reconstruction_exact(&self) -> bool {
        let g = self.generators.len();
        for i in 0..self.d() {
            for c in 0..g {
                let mut acc = BigRational::zero();
                for (j, v) in self.v_vectors.iter().enumerate() {
                    acc += BigRational::from_integer(v[i].clone()) * &self.nu_tilde[j][c];
                }
                if acc != self.nu[i][c] {
                    return false;
                }
            }
        }
        true
    }

    /// Certify that no integer relation sum l_j nu~_j = 0 with 0 < |l|_1 <=
    /// k_max exists. Exact zero relations mean falsely declared generators.
    pub fn certify_independence(&self, k_max: i64) -> Result<()> {
        let dt = self.d_tilde();
        if dt == 0 {
            return Ok(());
        }
        let mut ivs: Vec<ScaledInterval> = self
            .generators
            .iter()
            .map(|g| generator_interval(g, 40))
            .collect::<Result<_>>()?;
        for l in enumerate_shell_vectors(dt, k_max) {
            let q = combo_linear(&self.nu_tilde, &l);
            if combo_is_zero(&q) {
                return Err(NfError::ResonanceViolation(format!(
                    "exact relation nu~ . {l:?} = 0"
                )));
            }
            // interval refinement to exclude zero
            let mut digits = 40u32;
            loop {
                let (lo, hi, _) = combo_interval(&q, &ivs);
                if lo.is_positive() || hi.is_negative() {
                    break;
                }
                if digits >= 200 {
                    return Err(NfError::ResonanceViolation(format!(
                        "relation nu~ . {l:?} is zero to 200 digits; generators are likely \
                         dependent (precision exhausted)"
                    )));
                }
                digits *= 2;
                ivs = self
                    .generators
                    .iter()
                    .map(|g| generator_interval(g, digits))
                    .collect::<Result<_>>()?;
            }
        }
        Ok(())
    }
}

/// Integer basis of the resonance lattice M_nu = {k : nu . k = 0}, computed
/// exactly as the integer kernel of the transposed coefficient matrix.
pub fn resonance_lattice(nu: &[GenCombo]) -> Result<IMat> {
    let d = nu.len();
    let g = nu[0].len();
    // common denominator per generator column, then integer matrix rows
    // A[j][i] = coefficient of generator j in nu_i, cleared of denominators
    let mut a = intlinalg::zeros(g, d);
    for j in 0..g {
        let mut denom = BigInt::one();
        for row in nu.iter() {
            denom = denom.lcm(row[j].denom());
        }
        for (i, row) in nu.iter().enumerate() {
            a[j][i] = row[j].numer() * (&denom / row[j].denom());
        }
    }
    Ok(intlinalg::integer_kernel(&a))
}

/// Extend a primitive lattice basis to a unimodular d x d matrix whose first
/// rows are the basis.
pub fn complete_basis(basis: &IMat, d: usize) -> Result<IMat> {
    let r = basis.len();
    if r == 0 {
        return Ok(intlinalg::identity(d));
    }
    for row in basis {
        if row.len() != d {
            return Err(NfError::InvalidInput("basis row of wrong length".into()));
        }
    }
    if r > d {
        return Err(NfError::InvalidInput("more basis rows than dimensions".into()));
    }
    // E V = [L | 0] via row HNF of E^T; V = U^T, V^-1 = (U^-1)^T
    let et = intlinalg::transpose(basis);
    let (h, _u, uinv, pivots) = intlinalg::row_hnf_with_inverse(&et);
    if pivots.len() < r {
        return Err(NfError::InvalidInput(
            "basis rows are linearly dependent".into(),
        ));
    }
    // L = (top r rows of h)^T must be unimodular, otherwise the lattice is
    // not primitive and the rows cannot be extended.
    let l: IMat = (0..r)
        .map(|i| (0..r).map(|j| h[i][j].clone()).collect())
        .collect();
    let det_l = intlinalg::det(&l);
    if det_l.abs() != BigInt::one() {
        let factors = intlinalg::smith_invariant_factors(basis);
        let offending = factors
            .iter()
            .find(|f| **f != BigInt::one())
            .cloned()
            .unwrap_or(det_l.abs());
        return Err(NfError::InvalidInput(format!(
            "basis does not span a primitive lattice: invariant factor {offending}"
        )));
    }
    // rows of V^-1 = columns of U^-1; completion rows are r..d
    let mut m = basis.clone();
    for j in r..d {
        let row: Vec<BigInt> = (0..d).map(|i| uinv[i][j].clone()).collect();
        m.push(row);
    }
    let dm = intlinalg::det(&m);
    if dm.abs() != BigInt::one() {
        return Err(NfError::Numerical(format!(
            "basis completion produced determinant {dm}"
        )));
    }
    Ok(m)
}

/// nu-check = M nu; the first r components must vanish exactly; the rest are
/// nu-tilde, and v_j are the trailing columns of M^-1.
fn decompose(
    m: &IMat,
    m_inv: &IMat,
    nu: &[GenCombo],
    r: usize,
) -> Result<(Vec<GenCombo>, IMat)> {
    let d = nu.len();
    let g = nu[0].len();
    let mut nu_check: Vec<GenCombo> = Vec::with_capacity(d);
    for row in m.iter() {
        let mut combo = vec![BigRational::zero(); g];
        for (coef, nu_row) in row.iter().zip(nu) {
            let cr = BigRational::from_integer(coef.clone());
            for (c, v) in combo.iter_mut().zip(nu_row) {
                *c += &cr * v;
            }
        }
        nu_check.push(combo);
    }
    for (i, combo) in nu_check.iter().take(r).enumerate() {
        if !combo_is_zero(combo) {
            return Err(NfError::ResonanceViolation(format!(
                "component {i} of M nu is nonzero; generators were declared independent \
                 but the resonance lattice disagrees"
            )));
        }
    }
    let nu_tilde: Vec<GenCombo> = nu_check[r..].to_vec();
    let v_vectors: IMat = (r..d)
        .map(|j| (0..d).map(|i| m_inv[i][j].clone()).collect())
        .collect();
    Ok((nu_tilde, v_vectors))
}

fn combo_linear(rows: &[GenCombo], l: &[i64]) -> GenCombo {
    let g = rows[0].len();
    let mut out = vec![BigRational::zero(); g];
    for (li, row) in l.iter().zip(rows) {
        if *li == 0 {
            continue;
        }
        let c = BigRational::from_integer(BigInt::from(*li));
        for (o, v) in out.iter_mut().zip(row) {
            *o += &c * v;
        }
    }
    out
}

/// All nonzero integer vectors of dimension `dim` with |l|_1 <= budget,
/// in deterministic lexicographic order.
pub fn enumerate_shell_vectors(dim: usize, budget: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; dim];
    fn rec(cur: &mut Vec<i64>, pos: usize, left: i64, out: &mut Vec<Vec<i64>>) {
        if pos == cur.len() {
            if cur.iter().any(|&x| x != 0) {
                out.push(cur.clone());
            }
            return;
        }
        for v in -left..=left {
            cur[pos] = v;
            rec(cur, pos + 1, left - v.abs(), out);
        }
        cur[pos] = 0;
    }
    rec(&mut cur, 0, budget, &mut out);
    out
}

/// Outcome of one exhaustive Diophantine scan.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DiophantineScan {
    pub kappa: f64,
    pub k_max: i64,
    /// min over the scan set of |omega.k + nu~.l| (|k|+|l|)^kappa
    pub gamma_hat: f64,
    /// (k, l) attaining gamma_hat
    pub gamma_argmin: (Vec<i64>, Vec<i64>),
    /// smallest raw divisor encountered
    pub min_divisor: f64,
    pub min_divisor_argmin: (Vec<i64>, Vec<i64>),
    pub evaluations: usize,
}

/// Exhaustive minimization of |omega.k + nu~.l| (|k|+|l|)^kappa over
/// 0 != (k, l) with |k|_1 + |l|_1 <= k_max. Generator values are evaluated
/// to at least 40 decimal digits; an exact zero divisor is a resonance
/// violation.
pub fn diophantine_scan(
    generators: &[Generator],
    omega: &[GenCombo],
    nu_tilde: &[GenCombo],
    kappa: f64,
    k_max: i64,
) -> Result<DiophantineScan> {
    if kappa <= 0.0 {
        return Err(NfError::InvalidInput("kappa must be positive".into()));
    }
    if k_max < 1 {
        return Err(NfError::InvalidInput("k_max must be >= 1".into()));
    }
    let n = omega.len();
    let dt = nu_tilde.len();
    let mut ivs: Vec<ScaledInterval> = generators
        .iter()
        .map(|g| generator_interval(g, 40))
        .collect::<Result<_>>()?;
    let mut best_score = f64::INFINITY;
    let mut best_pair = (vec![0; n], vec![0; dt]);
    let mut min_div = f64::INFINITY;
    let mut min_pair = (vec![0; n], vec![0; dt]);
    let mut evals = 0usize;
    let all_rows: Vec<&GenCombo> = omega.iter().chain(nu_tilde.iter()).collect();
    for kl in enumerate_shell_vectors(n + dt, k_max) {
        evals += 1;
        let q = combo_linear_refs(&all_rows, &kl);
        let (k_part, l_part) = kl.split_at(n);
        if combo_is_zero(&q) {
            return Err(NfError::ResonanceViolation(format!(
                "exact zero divisor at k = {k_part:?}, l = {l_part:?}"
            )));
        }
        let mut digits = 40u32;
        let value = loop {
            let (lo, hi, dg) = combo_interval(&q, &ivs);
            if lo.is_positive() {
                break (scaled_to_f64(&lo, dg) + scaled_to_f64(&hi, dg)) / 2.0;
            }
            if hi.is_negative() {
                break -(scaled_to_f64(&lo, dg) + scaled_to_f64(&hi, dg)) / 2.0;
            }
            if digits >= 200 {
                return Err(NfError::ResonanceViolation(format!(
                    "divisor at k = {k_part:?}, l = {l_part:?} is zero to 200 digits; \
                     precision exhausted, generators likely dependent"
                )));
            }
            digits *= 2;
            ivs = generators
                .iter()
                .map(|g| generator_interval(g, digits))
                .collect::<Result<_>>()?;
        };
        let weight: i64 = kl.iter().map(|x| x.abs()).sum();
        let score = value * (weight as f64).powf(kappa);
        if score < best_score {
            best_score = score;
            best_pair = canonical_pair(k_part, l_part);
        }
        if value < min_div {
            min_div = value;
            min_pair = canonical_pair(k_part, l_part);
        }
    }
    Ok(DiophantineScan {
        kappa,
        k_max,
        gamma_hat: best_score,
        gamma_argmin: best_pair,
        min_divisor: min_div,
        min_divisor_argmin: min_pair,
        evaluations: evals,
    })
}

/// Sign-normalized representative of a (k, l) pair: the divisor magnitude is
/// symmetric under global sign flip, so report the copy whose first nonzero
/// component is positive.
fn canonical_pair(k: &[i64], l: &[i64]) -> (Vec<i64>, Vec<i64>) {
    let flip = k
        .iter()
        .chain(l.iter())
        .find(|&&x| x != 0)
        .map(|&x| x < 0)
        .unwrap_or(false);
    if flip {
        (
            k.iter().map(|&x| -x).collect(),
            l.iter().map(|&x| -x).collect(),
        )
    } else {
        (k.to_vec(), l.to_vec())
    }
}

fn combo_linear_refs(rows: &[&GenCombo], l: &[i64]) -> GenCombo {
    let g = rows[0].len();
    let mut out = vec![BigRational::zero(); g];
    for (li, row) in l.iter().zip(rows) {
        if *li == 0 {
            continue;
        }
        let c = BigRational::from_integer(BigInt::from(*li));
        for (o, v) in out.iter_mut().zip(row.iter()) {
            *o += &c * v;
        }
    }
    out
}

/// Variant of the scan for the condition |omega.k + m| >= gamma/(1+|k|^kappa)
/// with m ranging over the integers: for each k only the integers nearest to
/// -omega.k can minimize, so the window is derived, not scanned.
pub fn diophantine_scan_re(
    generators: &[Generator],
    omega: &[GenCombo],
    kappa: f64,
    k_max: i64,
) -> Result<DiophantineScan> {
    if kappa <= 0.0 {
        return Err(NfError::InvalidInput("kappa must be positive".into()));
    }
    let n = omega.len();
    let ivs: Vec<ScaledInterval> = generators
        .iter()
        .map(|g| generator_interval(g, 40))
        .collect::<Result<_>>()?;
    let mut best_score = f64::INFINITY;
    let mut best_pair = (vec![0; n], vec![0i64]);
    let mut min_div = f64::INFINITY;
    let mut min_pair = (vec![0; n], vec![0i64]);
    let mut evals = 0usize;
    for k in enumerate_shell_vectors(n, k_max) {
        let q = combo_linear(omega, &k);
        let (lo, hi, dg) = combo_interval(&q, &ivs);
        let wk = (scaled_to_f64(&lo, dg) + scaled_to_f64(&hi, dg)) / 2.0;
        let m0 = (-wk).round() as i64;
        for m in [m0 - 1, m0, m0 + 1] {
            evals += 1;
            let value = (wk + m as f64).abs();
            if value == 0.0 {
                return Err(NfError::ResonanceViolation(format!(
                    "exact zero at k = {k:?}, m = {m}"
                )));
            }
            let norm_k: i64 = k.iter().map(|x| x.abs()).sum();
            let score = value * (1.0 + (norm_k as f64).powf(kappa));
            if score < best_score {
                best_score = score;
                best_pair = canonical_pair(&k, &[m]);
            }
            if value < min_div {
                min_div = value;
                min_pair = canonical_pair(&k, &[m]);
            }
        }
    }
    Ok(DiophantineScan {
        kappa,
        k_max,
        gamma_hat: best_score,
        gamma_argmin: best_pair,
        min_divisor: min_div,
        min_divisor_argmin: min_pair,
        evaluations: evals,
    })
}


/// Disambiguated integer floor/ceil division (the Integer trait methods
/// collide with inherent ones on newer BigInt versions).
trait DivFC {
    fn div_floor_i(&self, other: &Self) -> Self;
    fn div_ceil_i(&self, other: &Self) -> Self;
}

impl DivFC for BigInt {
    fn div_floor_i(&self, other: &Self) -> Self {
        Integer::div_floor(self, other)
    }
    fn div_ceil_i(&self, other: &Self) -> Self {
        Integer::div_ceil(self, other)
    }
}
