//! Concrete realization of the graded operator algebra: dense complex
//! matrices in the K0 eigenbasis carrying a nominal order, with weighted
//! seminorms, commutators, Heisenberg evolution, averaging and Lie
//! conjugation.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{NfError, Result};
use crate::expm;
use crate::model::{SpectralModel, C64};

/// Tolerance used when deciding whether two K0 (or K-tilde) eigenvalues are
/// resonant in averaging operations.
pub const RESONANCE_TOL: f64 = 1e-9;

/// Default Sobolev index grid realizing the abstract seminorm family.
pub const DEFAULT_S_GRID: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];

/// Dense matrix in the K0 eigenbasis with a nominal grading order.
#[derive(Debug, Clone)]
pub struct GradedOperator {
    pub matrix: DMatrix<C64>,
    pub order: f64,
    pub model: Arc<SpectralModel>,
}

/// One weighted seminorm value, norm of diag(lambda^(s-m)) A diag(lambda^-s)
/// restricted to the report block.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct WeightedSeminorm {
    pub m: f64,
    pub s: f64,
    pub value: f64,
}

impl GradedOperator {
    pub fn new(matrix: DMatrix<C64>, order: f64, model: Arc<SpectralModel>) -> Self {
        debug_assert_eq!(matrix.nrows(), model.buffer_dim);
        GradedOperator {
            matrix,
            order,
            model,
        }
    }

    pub fn zeros(model: &Arc<SpectralModel>, order: f64) -> Self {
        let n = model.buffer_dim;
        GradedOperator::new(DMatrix::zeros(n, n), order, model.clone())
    }

    pub fn same_model(&self, other: &GradedOperator) -> bool {
        Arc::ptr_eq(&self.model, &other.model)
    }

    fn require_same_model(&self, other: &GradedOperator, what: &str) -> Result<()> {
        if self.same_model(other) {
            Ok(())
        } else {
            Err(NfError::ModelMismatch(what.into()))
        }
    }

    /// Adjoint; same nominal order.
    pub fn adjoint(&self) -> GradedOperator {
        GradedOperator::new(self.matrix.adjoint(), self.order, self.model.clone())
    }

    /// Max entry modulus of A - A^*.
    pub fn symmetry_defect(&self) -> f64 {
        let d = &self.matrix - self.matrix.adjoint();
        d.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.symmetry_defect() <= tol
    }

    /// Hermitian symmetrization (A + A^*)/2.
    pub fn symmetrized(&self) -> GradedOperator {
        GradedOperator::new(
            (&self.matrix + self.matrix.adjoint()).scale(0.5),
            self.order,
            self.model.clone(),
        )
    }

    pub fn scale(&self, c: C64) -> GradedOperator {
        GradedOperator::new(&self.matrix * c, self.order, self.model.clone())
    }

    pub fn add(&self, other: &GradedOperator) -> Result<GradedOperator> {
        self.require_same_model(other, "operator addition")?;
        Ok(GradedOperator::new(
            &self.matrix + &other.matrix,
            self.order.max(other.order),
            self.model.clone(),
        ))
    }

    pub fn sub(&self, other: &GradedOperator) -> Result<GradedOperator> {
        self.require_same_model(other, "operator subtraction")?;
        Ok(GradedOperator::new(
            &self.matrix - &other.matrix,
            self.order.max(other.order),
            self.model.clone(),
        ))
    }

    /// Product; orders add.
    pub fn mul(&self, other: &GradedOperator) -> Result<GradedOperator> {
        self.require_same_model(other, "operator product")?;
        Ok(GradedOperator::new(
            &self.matrix * &other.matrix,
            self.order + other.order,
            self.model.clone(),
        ))
    }

    pub fn max_entry(&self) -> f64 {
        self.matrix.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// Weighted seminorm via exact singular values of the report block.
    pub fn weighted_norm(&self, m: f64, s: f64) -> f64 {
        weighted_block_norm(&self.matrix, &self.model.k0_eigs, self.model.report_dim, m, s, true)
    }

    /// Weighted seminorm via power iteration; accurate to roughly 1e-6
    /// relative, intended for order scans and boundedness tables.
    pub fn weighted_norm_fast(&self, m: f64, s: f64) -> f64 {
        weighted_block_norm(&self.matrix, &self.model.k0_eigs, self.model.report_dim, m, s, false)
    }

    /// Seminorm table over the default s grid.
    pub fn seminorm_table(&self, m: f64) -> Vec<WeightedSeminorm> {
        DEFAULT_S_GRID
            .iter()
            .map(|&s| WeightedSeminorm {
                m,
                s,
                value: self.weighted_norm(m, s),
            })
            .collect()
    }
}

/// Norm of diag(w^(s-m)) A diag(w^-s) on the leading `report` block.
fn weighted_block_norm(
    a: &DMatrix<C64>,
    lam: &[f64],
    report: usize,
    m: f64,
    s: f64,
    exact: bool,
) -> f64 {
    let r = report.min(a.nrows());
    let mut b = DMatrix::<C64>::zeros(r, r);
    for i in 0..r {
        let wi = lam[i].powf(s - m);
        for j in 0..r {
            let wj = lam[j].powf(-s);
            b[(i, j)] = a[(i, j)] * C64::new(wi * wj, 0.0);
        }
    }
    if exact {
        let sv = b.singular_values();
        sv.iter().fold(0.0f64, |acc, &x| acc.max(x))
    } else {
        top_singular_value(&b)
    }
}

/// Deterministic power iteration on B^H B.
fn top_singular_value(b: &DMatrix<C64>) -> f64 {
    let n = b.ncols();
    if n == 0 {
        return 0.0;
    }
    let bh = b.adjoint();
    let mut v = nalgebra::DVector::<C64>::from_element(n, C64::new(1.0, 0.0));
    // slight deterministic tilt so symmetric sign structure cannot trap the iteration
    for i in 0..n {
        v[i] += C64::new((i as f64) / (n as f64 + 1.0), 0.0);
    }
    let mut sigma = 0.0f64;
    let nv = v.norm();
    if nv == 0.0 {
        return 0.0;
    }
    v /= C64::new(nv, 0.0);
    for _ in 0..300 {
        let w = b * &v;
        let s_new = w.norm();
        if s_new == 0.0 {
            return 0.0;
        }
        let u = &bh * w;
        let un = u.norm();
        if un == 0.0 {
            return s_new;
        }
        v = u.unscale(un);
        if (s_new - sigma).abs() <= 1e-12 * s_new.max(1e-300) {
            return s_new;
        }
        sigma = s_new;
    }
    sigma
}

/// Commutator AB - BA of nominal order m + n - 1.
pub fn commutator(a: &GradedOperator, b: &GradedOperator) -> Result<GradedOperator> {
    if !a.same_model(b) {
        return Err(NfError::ModelMismatch("commutator".into()));
    }
    let m = &a.matrix * &b.matrix - &b.matrix * &a.matrix;
    Ok(GradedOperator::new(
        m,
        a.order + b.order - 1.0,
        a.model.clone(),
    ))
}

/// Heisenberg evolution A(tau) = e^(i tau K0) A e^(-i tau K0): entry (a,b)
/// picks up the phase e^(i tau (lambda_a - lambda_b)). Order preserved.
pub fn heisenberg_evolve(a: &GradedOperator, tau: f64) -> GradedOperator {
    let lam = &a.model.k0_eigs;
    let n = a.matrix.nrows();
    let phases: Vec<C64> = lam.iter().map(|&l| C64::new(0.0, tau * l).exp()).collect();
    let mut m = a.matrix.clone();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] *= phases[i] * phases[j].conj();
        }
    }
    GradedOperator::new(m, a.order, a.model.clone())
}

/// Vector-flow Heisenberg evolution e^(i tau.K) A e^(-i tau.K) with the
/// per-mode eigenvalue tuples.
pub fn heisenberg_evolve_vec(a: &GradedOperator, tau: &[f64]) -> Result<GradedOperator> {
    if tau.len() != a.model.n_modes() {
        return Err(NfError::InvalidInput(format!(
            "flow parameter has {} components, model has {} modes",
            tau.len(),
            a.model.n_modes()
        )));
    }
    let n = a.matrix.nrows();
    let phases: Vec<C64> = a
        .model
        .k_eigs
        .iter()
        .map(|mtuple| {
            let ph: f64 = mtuple.iter().zip(tau).map(|(&mi, &ti)| mi * ti).sum();
            C64::new(0.0, ph).exp()
        })
        .collect();
    let mut m = a.matrix.clone();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] *= phases[i] * phases[j].conj();
        }
    }
    Ok(GradedOperator::new(m, a.order, a.model.clone()))
}

/// Average along the periodic K0 flow: keeps exactly the entries with equal
/// K0 eigenvalues. Requires an integer-shifted spectrum, where this equals
/// the 2 pi flow integral.
pub fn average_k0(a: &GradedOperator) -> Result<GradedOperator> {
    if !a.model.integer_spectrum {
        return Err(NfError::InvalidInput(
            "scalar averaging requires an integer-shifted spectrum; use the entrywise solver path"
                .into(),
        ));
    }
    Ok(average_by(a, |i, j| {
        (a.model.k0_eigs[i] - a.model.k0_eigs[j]).abs() <= RESONANCE_TOL
    }))
}

/// Lattice average: keeps entries whose K-tilde eigenvalue tuples agree
/// componentwise. `ktilde` holds the tuple for each basis index.
pub fn average_lattice(a: &GradedOperator, ktilde: &[Vec<f64>]) -> Result<GradedOperator> {
    if ktilde.len() != a.model.buffer_dim {
        return Err(NfError::InvalidInput(
            "K-tilde table length does not match the buffer dimension".into(),
        ));
    }
    Ok(average_by(a, |i, j| {
        ktilde[i]
            .iter()
            .zip(&ktilde[j])
            .all(|(x, y)| (x - y).abs() <= RESONANCE_TOL)
    }))
}

fn average_by(a: &GradedOperator, resonant: impl Fn(usize, usize) -> bool) -> GradedOperator {
    let n = a.matrix.nrows();
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if resonant(i, j) {
                m[(i, j)] = a.matrix[(i, j)];
            }
        }
    }
    GradedOperator::new(m, a.order, a.model.clone())
}

/// How a Lie conjugation e^(i tau X) A e^(-i tau X) is evaluated.
#[derive(Debug, Clone, Copy)]
pub enum ConjugationMethod {
    /// Unitary matrix exponential (Pade core, polar-corrected).
    Exact,
    /// Truncated commutator expansion with M terms.
    Series(usize),
}

/// Lie conjugation of A by the symmetric generator X.
pub fn lie_conjugate(
    a: &GradedOperator,
    x: &GradedOperator,
    tau: f64,
    method: ConjugationMethod,
) -> Result<GradedOperator> {
    if !a.same_model(x) {
        return Err(NfError::ModelMismatch("lie conjugation".into()));
    }
    let scale = x.max_entry().max(1.0);
    if x.symmetry_defect() > 1e-9 * scale {
        return Err(NfError::InvalidInput(format!(
            "conjugation generator is not symmetric (defect {:.2e})",
            x.symmetry_defect()
        )));
    }
    match method {
        ConjugationMethod::Exact => {
            let u = expm::expm_i_hermitian(&x.matrix, tau)?;
            let m = &u * &a.matrix * u.adjoint();
            Ok(GradedOperator::new(m, a.order, a.model.clone()))
        }
        ConjugationMethod::Series(depth) => {
            if x.order >= 1.0 {
                return Err(NfError::InvalidInput(
                    "series conjugation requires a generator of order < 1".into(),
                ));
            }
            let mut acc = a.matrix.clone();
            let mut term = a.matrix.clone();
            let mut fact = 1.0f64;
            for l in 1..=depth {
                // ad_X(T) = i [X, T]
                term = (&x.matrix * &term - &term * &x.matrix) * C64::new(0.0, 1.0);
                fact *= tau / l as f64;
                acc += term.scale(fact);
            }
            Ok(GradedOperator::new(acc, a.order, a.model.clone()))
        }
    }
}

/// Result of an empirical order scan across truncation sizes.
#[derive(Debug, Clone, serde::Serialize)]
pub struct OrderScan {
    pub sizes: Vec<usize>,
    pub m_grid: Vec<f64>,
    pub s_grid: Vec<f64>,
    /// Smallest admissible order on the grid for each Sobolev index; None
    /// marks an inconclusive row.
    pub per_s: Vec<(f64, Option<f64>)>,
    /// Max over the per-s estimates, None as soon as one row is inconclusive.
    pub estimate: Option<f64>,
}

/// Uniform order grid.
pub fn m_grid(min: f64, max: f64, step: f64) -> Vec<f64> {
    let mut g = Vec::new();
    let mut m = min;
    while m <= max + 1e-12 {
        g.push(m);
        m += step;
    }
    g
}

/// Empirical membership test for "A is of order m": across increasing
/// truncations, the seminorm values at order m must stay bounded. Boundedness
/// means no consecutive jump above a factor 2 and a log-log growth slope of
/// at most half a grid step.
pub fn order_scan_prebuilt(
    family: &[GradedOperator],
    m_grid: &[f64],
    s_grid: &[f64],
) -> Result<OrderScan> {
    if family.len() < 2 {
        return Err(NfError::InvalidInput(
            "order scan needs at least two truncation sizes".into(),
        ));
    }
    let sizes: Vec<usize> = family.iter().map(|a| a.model.report_dim).collect();
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(NfError::InvalidInput(
            "order scan sizes must be strictly increasing".into(),
        ));
    }
    let step = if m_grid.len() > 1 {
        m_grid[1] - m_grid[0]
    } else {
        0.25
    };
    let slope_tol = step / 2.0 + 1e-9;
    let mut per_s = Vec::new();
    for &s in s_grid {
        let mut found: Option<f64> = None;
        for &m in m_grid {
            let vals: Vec<f64> = family.iter().map(|a| a.weighted_norm_fast(m, s)).collect();
            if admissible(&sizes, &vals, slope_tol) {
                found = Some(m);
                break;
            }
        }
        per_s.push((s, found));
    }
    let estimate = per_s
        .iter()
        .map(|&(_, m)| m)
        .collect::<Option<Vec<f64>>>()
        .map(|v| v.into_iter().fold(f64::NEG_INFINITY, f64::max));
    Ok(OrderScan {
        sizes,
        m_grid: m_grid.to_vec(),
        s_grid: s_grid.to_vec(),
        per_s,
        estimate,
    })
}

/// Convenience wrapper that builds the operator at each size.
pub fn order_scan(
    build: impl Fn(usize) -> Result<GradedOperator>,
    sizes: &[usize],
    m_grid: &[f64],
    s_grid: &[f64],
) -> Result<OrderScan> {
    let family: Vec<GradedOperator> = sizes.iter().map(|&n| build(n)).collect::<Result<_>>()?;
    order_scan_prebuilt(&family, m_grid, s_grid)
}

pub(crate) fn admissible(sizes: &[usize], vals: &[f64], slope_tol: f64) -> bool {
    const FLOOR: f64 = 1e-300;
    if vals.iter().all(|&v| v <= FLOOR) {
        return true;
    }
    for w in vals.windows(2) {
        if w[1] > 2.0 * w[0].max(FLOOR) {
            return false;
        }
    }
    // least-squares slope of log value against log size
    let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = vals.iter().map(|&v| v.max(FLOOR).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    slope <= slope_tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_harmonic_model;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_op(model: &Arc<SpectralModel>, order: f64, seed: u64) -> GradedOperator {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = model.buffer_dim;
        let mut m = DMatrix::<C64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        GradedOperator::new(m, order, model.clone())
    }

    fn random_symmetric_op(model: &Arc<SpectralModel>, order: f64, seed: u64) -> GradedOperator {
        random_op(model, order, seed).symmetrized()
    }

    #[test]
    fn functions_of_k0_commute() {
        let model = build_harmonic_model(&[1.0], &[8], 0.5).unwrap();
        let k0 = model.k0();
        let k0sq = model.apply_symbol(|l| l * l, 2.0).unwrap();
        let comm = commutator(&k0, &k0sq).unwrap();
        assert_eq!(comm.max_entry(), 0.0);
        assert!((comm.order - 2.0).abs() < 1e-12);
    }

    #[test]
    fn commutator_with_position_matches_direct_arithmetic() {
        let model = build_harmonic_model(&[1.0], &[8], 0.5).unwrap();
        let k0 = model.k0();
        let x = model.position(0).unwrap();
        let comm = commutator(&k0, &x).unwrap();
        // direct triple-loop oracle for A B - B A
        let n = model.buffer_dim;
        let mut oracle = DMatrix::<C64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut z = C64::new(0.0, 0.0);
                for l in 0..n {
                    z += k0.matrix[(i, l)] * x.matrix[(l, j)]
                        - x.matrix[(i, l)] * k0.matrix[(l, j)];
                }
                oracle[(i, j)] = z;
            }
        }
        for i in 0..n {
            for j in 0..n {
                assert!((comm.matrix[(i, j)] - oracle[(i, j)]).norm() < 1e-12);
                // pattern (lambda_i - lambda_j) x_ij
                let want = x.matrix[(i, j)]
                    * c(model.k0_eigs[i] - model.k0_eigs[j], 0.0);
                assert!((comm.matrix[(i, j)] - want).norm() < 1e-12);
            }
        }
        assert!((comm.order - 0.5).abs() < 1e-12);
    }

    #[test]
    fn commutator_antisymmetry_and_jacobi() {
        let model = build_harmonic_model(&[1.0], &[6], 0.5).unwrap();
        for seed in 0..8u64 {
            let a = random_op(&model, 0.0, 3 * seed);
            let b = random_op(&model, 0.0, 3 * seed + 1);
            let d = random_op(&model, 0.0, 3 * seed + 2);
            let ab = commutator(&a, &b).unwrap();
            let ba = commutator(&b, &a).unwrap();
            assert!(ab.add(&ba).unwrap().max_entry() < 1e-12);
            let j1 = commutator(&a, &commutator(&b, &d).unwrap()).unwrap();
            let j2 = commutator(&b, &commutator(&d, &a).unwrap()).unwrap();
            let j3 = commutator(&d, &commutator(&a, &b).unwrap()).unwrap();
            let total = j1.add(&j2).unwrap().add(&j3).unwrap();
            assert!(total.max_entry() < 1e-12 * 8.0 * (1.0 + a.max_entry().powi(3)));
        }
    }

    #[test]
    fn heisenberg_identity_and_periodicity() {
        let model = build_harmonic_model(&[1.0], &[8], 0.5).unwrap();
        let a = random_op(&model, 0.0, 7);
        let a0 = heisenberg_evolve(&a, 0.0);
        assert!(a.sub(&a0).unwrap().max_entry() == 0.0);
        let a2pi = heisenberg_evolve(&a, 2.0 * std::f64::consts::PI);
        assert!(a.sub(&a2pi).unwrap().max_entry() < 1e-10);
    }

    #[test]
    fn heisenberg_group_law() {
        let model = build_harmonic_model(&[1.0], &[8], 0.5).unwrap();
        let a = random_op(&model, 0.0, 11);
        let lhs = heisenberg_evolve(&heisenberg_evolve(&a, 0.7), 0.9);
        let rhs = heisenberg_evolve(&a, 1.6);
        assert!(lhs.sub(&rhs).unwrap().max_entry() < 1e-12);
    }

    #[test]
    fn heisenberg_preserves_weighted_norms() {
        let model = build_harmonic_model(&[1.0], &[10], 0.5).unwrap();
        let a = random_op(&model, 0.5, 13);
        let at = heisenberg_evolve(&a, 0.4321);
        for &(m, s) in &[(0.0, 0.0), (0.5, 1.0), (1.0, -1.0)] {
            let n0 = a.weighted_norm(m, s);
            let n1 = at.weighted_norm(m, s);
            assert!((n0 - n1).abs() < 1e-8 * n0.max(1.0), "{n0} vs {n1}");
        }
    }

    #[test]
    fn averaging_keeps_diagonal_and_projects() {
        let model = build_harmonic_model(&[1.0], &[8], 0.5).unwrap();
        let d = model.apply_symbol(|l| l.sin(), 0.0).unwrap();
        let avg = average_k0(&d).unwrap();
        assert!(avg.sub(&d).unwrap().max_entry() == 0.0);
        let a = random_op(&model, 0.0, 17);
        let a1 = average_k0(&a).unwrap();
        let a2 = average_k0(&a1).unwrap();
        assert!(a1.sub(&a2).unwrap().max_entry() == 0.0);
        // commutant property
        let k0 = model.k0();
        let comm = commutator(&k0, &a1).unwrap();
        assert!(comm.max_entry() < 1e-12);
    }

    #[test]
    fn average_of_position_vanishes_and_matches_quadrature() {
        let model = build_harmonic_model(&[1.0], &[8], 0.5).unwrap();
        let x = model.position(0).unwrap();
        let avg = average_k0(&x).unwrap();
        assert!(avg.max_entry() < 1e-14);
        // 256-point trapezoid quadrature of the flow integral
        let n = model.buffer_dim;
        let mut quad = DMatrix::<C64>::zeros(n, n);
        let points = 256usize;
        for p in 0..points {
            let tau = 2.0 * std::f64::consts::PI * (p as f64) / (points as f64);
            quad += &heisenberg_evolve(&x, tau).matrix;
        }
        quad /= c(points as f64, 0.0);
        let diff = (&quad - &avg.matrix)
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(diff < 1e-10, "quadrature mismatch {diff}");
    }

    #[test]
    fn lattice_average_nonresonant_is_diagonal() {
        let s2 = 2.0f64.sqrt();
        let model = build_harmonic_model(&[1.0, s2], &[3, 3], 0.5).unwrap();
        let a = random_op(&model, 0.0, 23);
        // nonresonant: v_j = standard basis, K-tilde tuples are the K tuples
        let ktilde = model
            .ktilde_eigs(&[vec![1, 0], vec![0, 1]])
            .unwrap();
        let avg = average_lattice(&a, &ktilde).unwrap();
        for i in 0..model.buffer_dim {
            for j in 0..model.buffer_dim {
                let want = if i == j {
                    a.matrix[(i, j)]
                } else {
                    C64::new(0.0, 0.0)
                };
                assert!((avg.matrix[(i, j)] - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn weighted_norm_identity_and_k0() {
        let model = build_harmonic_model(&[1.0], &[16], 0.5).unwrap();
        let id = model.apply_symbol(|_| 1.0, 0.0).unwrap();
        for &s in &DEFAULT_S_GRID {
            assert!((id.weighted_norm(0.0, s) - 1.0).abs() < 1e-12);
        }
        let k0 = model.k0();
        for &s in &DEFAULT_S_GRID {
            assert!((k0.weighted_norm(1.0, s) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_norm_submultiplicative() {
        let model = build_harmonic_model(&[1.0], &[10], 0.5).unwrap();
        for seed in 0..5u64 {
            let a = random_op(&model, 0.5, 100 + seed);
            let b = random_op(&model, 0.25, 200 + seed);
            let ab = a.mul(&b).unwrap();
            let (m, n, s) = (0.5, 0.25, 1.0);
            let lhs = ab.weighted_norm(m + n, s);
            let rhs = a.weighted_norm(m, s - n) * b.weighted_norm(n, s);
            assert!(
                lhs <= rhs * (1.0 + 1e-10),
                "submultiplicativity violated: {lhs} > {rhs}"
            );
        }
    }

    #[test]
    fn fast_norm_tracks_exact_norm() {
        let model = build_harmonic_model(&[1.0], &[12], 0.5).unwrap();
        for seed in 0..4u64 {
            let a = random_op(&model, 0.0, 300 + seed);
            let e = a.weighted_norm(0.5, 1.0);
            let f = a.weighted_norm_fast(0.5, 1.0);
            assert!((e - f).abs() < 2e-2 * e, "exact {e} fast {f}");
        }
    }

    #[test]
    fn order_scan_recovers_diagonal_orders() {
        let grid = m_grid(-3.0, 3.0, 0.25);
        let s_grid = [0.0, 1.0];
        let scan_k0 = order_scan(
            |n| Ok(build_harmonic_model(&[1.0], &[n], 0.5)?.k0()),
            &[16, 32, 64, 128],
            &grid,
            &s_grid,
        )
        .unwrap();
        assert_eq!(scan_k0.estimate, Some(1.0));
        let scan_inv2 = order_scan(
            |n| {
                build_harmonic_model(&[1.0], &[n], 0.5)?
                    .apply_symbol(|l| l.powi(-2), -2.0)
            },
            &[16, 32, 64, 128],
            &grid,
            &s_grid,
        )
        .unwrap();
        assert_eq!(scan_inv2.estimate, Some(-2.0));
    }

    #[test]
    fn order_scan_position_is_half() {
        let grid = m_grid(-2.0, 2.0, 0.25);
        let scan = order_scan(
            |n| build_harmonic_model(&[1.0], &[n], 0.5)?.position(0),
            &[16, 32, 64, 128],
            &grid,
            &[0.0, 1.0],
        )
        .unwrap();
        let est = scan.estimate.unwrap();
        assert!(est <= 0.5 + 0.25 + 1e-12, "estimate {est}");
        assert!(est >= 0.25, "estimate {est}");
    }

    #[test]
    fn lie_conjugate_identity_and_diagonal_closed_form() {
        let model = build_harmonic_model(&[1.0], &[10], 0.5).unwrap();
        let a = random_op(&model, 0.0, 31);
        let zero = GradedOperator::zeros(&model, 0.0);
        let same = lie_conjugate(&a, &zero, 1.0, ConjugationMethod::Exact).unwrap();
        assert!(a.sub(&same).unwrap().max_entry() < 1e-13);
        // diagonal generator: entries pick up e^(i tau (X_ii - X_jj))
        let x = model.apply_symbol(|l| (l * 0.37).cos(), 0.0).unwrap();
        let tau = 0.83;
        let conj = lie_conjugate(&a, &x, tau, ConjugationMethod::Exact).unwrap();
        for i in 0..model.buffer_dim {
            for j in 0..model.buffer_dim {
                let phase = C64::new(
                    0.0,
                    tau * (x.matrix[(i, i)].re - x.matrix[(j, j)].re),
                )
                .exp();
                let want = a.matrix[(i, j)] * phase;
                assert!((conj.matrix[(i, j)] - want).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn lie_conjugate_series_agrees_with_exact() {
        let model = build_harmonic_model(&[1.0], &[10], 0.5).unwrap();
        let a = random_symmetric_op(&model, 0.0, 37);
        let x = random_symmetric_op(&model, 0.5, 41).scale(c(0.005, 0.0));
        let exact = lie_conjugate(&a, &x, 1.0, ConjugationMethod::Exact).unwrap();
        let series = lie_conjugate(&a, &x, 1.0, ConjugationMethod::Series(8)).unwrap();
        let nrep = model.report_dim;
        let mut diff = 0.0f64;
        for i in 0..nrep {
            for j in 0..nrep {
                diff = diff.max((exact.matrix[(i, j)] - series.matrix[(i, j)]).norm());
            }
        }
        assert!(diff < 1e-8, "series vs exact {diff}");
    }

    #[test]
    fn lie_conjugate_rejects_nonsymmetric() {
        let model = build_harmonic_model(&[1.0], &[6], 0.5).unwrap();
        let a = random_op(&model, 0.0, 43);
        let x = random_op(&model, 0.0, 47);
        assert!(lie_conjugate(&a, &x, 1.0, ConjugationMethod::Exact).is_err());
    }

    #[test]
    fn exact_conjugation_is_isometric() {
        let model = build_harmonic_model(&[1.0], &[12], 0.5).unwrap();
        let x = random_symmetric_op(&model, 0.5, 53);
        let u = expm::expm_i_hermitian(&x.matrix, 1.0).unwrap();
        assert!(expm::unitarity_defect(&u) < 1e-10);
    }

    #[test]
    fn model_mismatch_is_rejected() {
        let m1 = build_harmonic_model(&[1.0], &[6], 0.5).unwrap();
        let m2 = build_harmonic_model(&[1.0], &[6], 0.5).unwrap();
        let a = m1.k0();
        let b = m2.k0();
        assert!(matches!(
            commutator(&a, &b),
            Err(NfError::ModelMismatch(_))
        ));
    }
}
