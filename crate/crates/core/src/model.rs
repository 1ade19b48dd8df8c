//! Finite spectral truncations of the reference operator K0, the commuting
//! family K_1..K_d, the unperturbed Hamiltonian H0 and the Sobolev weights.
//!
//! All algebra downstream is performed on an oversized `buffer_dim` block and
//! only measured on the inner `report_dim` block, because truncation corrupts
//! the top of the spectrum (commutators of banded operators leak outward).

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{NfError, Result};

pub type C64 = num_complex::Complex<f64>;

/// Hard cap on the buffer dimension; a dense complex matrix at this size is
/// already 64 MiB.
pub const MAX_BUFFER_DIM: usize = 2048;

/// Default oversize fraction of the buffer relative to the report block.
pub const DEFAULT_BUFFER_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Harmonic { nu: Vec<f64> },
    Anharmonic { k: u32, l: u32, a: f64 },
    Zoll { dim: u32, mode: MultiplicityMode },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplicityMode {
    /// One basis index per cluster level; keeps growth experiments at desk scale.
    Collapsed,
    /// Explicit degenerate blocks carrying the spherical-harmonic multiplicity.
    Full,
}

/// Smooth classical symbol used for H0 = f(K0) together with the cutoff data
/// entering the homological lift.
#[derive(Debug, Clone)]
pub struct SymbolFunction {
    /// Symbol order mu.
    pub order: f64,
    /// Cutoff threshold R: f'(x) >= 1 is guaranteed on [R, inf).
    pub cutoff_r: f64,
    kind: SymbolKind,
}

#[derive(Debug, Clone)]
enum SymbolKind {
    /// f(x) = x^mu.
    Power,
}

impl SymbolFunction {
    /// Power-law symbol f(x) = x^mu with the smallest admissible cutoff R.
    pub fn power(mu: f64) -> Self {
        // f'(x) = mu x^(mu-1) >= 1 from x = (1/mu)^(1/(mu-1)) upward (mu > 1).
        let r = if mu > 1.0 {
            (1.0 / mu).powf(1.0 / (mu - 1.0))
        } else {
            0.5
        };
        SymbolFunction {
            order: mu,
            cutoff_r: r,
            kind: SymbolKind::Power,
        }
    }

    pub fn with_cutoff(mut self, r: f64) -> Self {
        self.cutoff_r = r;
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            SymbolKind::Power => x.powf(self.order),
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        match self.kind {
            SymbolKind::Power => self.order * x.powf(self.order - 1.0),
        }
    }

    pub fn d2(&self, x: f64) -> f64 {
        match self.kind {
            SymbolKind::Power => self.order * (self.order - 1.0) * x.powf(self.order - 2.0),
        }
    }

    /// Smooth cutoff eta: 1 on [0, R], 0 on [R+1, inf), C-infinity glue from
    /// exp(-1/x) in between. Only values at the eigenvalues enter anywhere.
    pub fn eta(&self, x: f64) -> f64 {
        smooth_step_down(x - self.cutoff_r)
    }
}

/// C-infinity monotone step: 1 for u <= 0, 0 for u >= 1.
fn smooth_step_down(u: f64) -> f64 {
    if u <= 0.0 {
        1.0
    } else if u >= 1.0 {
        0.0
    } else {
        let g = |v: f64| (-1.0 / v).exp();
        g(1.0 - u) / (g(1.0 - u) + g(u))
    }
}

/// Sobolev weight vector: weight_a = lambda_a^r.
#[derive(Debug, Clone)]
pub struct SobolevWeights {
    pub r: f64,
    pub weights: Vec<f64>,
}

/// Eigen-structure of a finite truncation: K0 eigenvalues, per-mode K_j
/// eigenvalue tuples, report/buffer split and the H0 spectrum.
#[derive(Debug)]
pub struct SpectralModel {
    pub kind: ModelKind,
    /// Per-mode report truncation sizes.
    pub mode_dims: Vec<usize>,
    /// K_j eigenvalue tuple at each basis index (buffer ordering).
    pub k_eigs: Vec<Vec<f64>>,
    /// K0 eigenvalue at each basis index.
    pub k0_eigs: Vec<f64>,
    /// H0 eigenvalue at each basis index.
    pub h0_eigs: Vec<f64>,
    pub lambda_shift: Option<f64>,
    pub integer_spectrum: bool,
    pub report_dim: usize,
    pub buffer_dim: usize,
    /// Order of H0 in the graded algebra.
    pub mu: f64,
    /// Symbol f with H0 = f(K0), when the model is of the f(K0) type.
    pub symbol: Option<SymbolFunction>,
    /// Multi-index per basis position (harmonic models only).
    pub multi_indices: Option<Vec<Vec<usize>>>,
    /// Indices whose K0 eigenvalue lies in the top decile of the buffer.
    pub leak_mask: Vec<bool>,
}

impl SpectralModel {
    pub fn n_modes(&self) -> usize {
        self.mode_dims.len()
    }

    fn finish(mut self) -> Result<Arc<Self>> {
        if self.buffer_dim > MAX_BUFFER_DIM {
            return Err(NfError::Capacity(format!(
                "buffer dimension {} exceeds the configured bound {}",
                self.buffer_dim, MAX_BUFFER_DIM
            )));
        }
        if self.buffer_dim < self.report_dim {
            return Err(NfError::InvalidInput(
                "buffer dimension smaller than report dimension".into(),
            ));
        }
        for (a, &l) in self.k0_eigs.iter().enumerate() {
            if !(l > 0.0) {
                return Err(NfError::Numerical(format!(
                    "K0 eigenvalue at index {a} is not positive: {l}"
                )));
            }
        }
        if self.integer_spectrum {
            let shift = self.lambda_shift.ok_or_else(|| {
                NfError::InvalidInput("integer spectrum declared without lambda shift".into())
            })?;
            for &l in &self.k0_eigs {
                let n = l - shift;
                if n < -1e-12 || (n - n.round()).abs() > 1e-12 {
                    return Err(NfError::Numerical(format!(
                        "eigenvalue {l} is not in N + {shift}"
                    )));
                }
            }
        }
        self.leak_mask = leak_mask(&self.k0_eigs);
        Ok(Arc::new(self))
    }

    /// Sobolev weight vector for exponent r over the buffer.
    pub fn sobolev_weights(&self, r: f64) -> SobolevWeights {
        SobolevWeights {
            r,
            weights: self.k0_eigs.iter().map(|&l| l.powf(r)).collect(),
        }
    }

    /// Diagonal operator diag(g(lambda_a)) with the declared order.
    pub fn apply_symbol(
        self: &Arc<Self>,
        g: impl Fn(f64) -> f64,
        order: f64,
    ) -> Result<crate::algebra::GradedOperator> {
        let n = self.buffer_dim;
        let mut m = DMatrix::<C64>::zeros(n, n);
        for a in 0..n {
            let v = g(self.k0_eigs[a]);
            if !v.is_finite() {
                return Err(NfError::Numerical(format!(
                    "symbol evaluates to non-finite value at lambda = {}",
                    self.k0_eigs[a]
                )));
            }
            m[(a, a)] = C64::new(v, 0.0);
        }
        Ok(crate::algebra::GradedOperator::new(m, order, self.clone()))
    }

    /// H0 as a graded operator (diagonal in this basis).
    pub fn h0(self: &Arc<Self>) -> crate::algebra::GradedOperator {
        let n = self.buffer_dim;
        let mut m = DMatrix::<C64>::zeros(n, n);
        for a in 0..n {
            m[(a, a)] = C64::new(self.h0_eigs[a], 0.0);
        }
        crate::algebra::GradedOperator::new(m, self.mu, self.clone())
    }

    /// K0 as a graded operator of order one.
    pub fn k0(self: &Arc<Self>) -> crate::algebra::GradedOperator {
        let n = self.buffer_dim;
        let mut m = DMatrix::<C64>::zeros(n, n);
        for a in 0..n {
            m[(a, a)] = C64::new(self.k0_eigs[a], 0.0);
        }
        crate::algebra::GradedOperator::new(m, 1.0, self.clone())
    }

    /// Position operator on one harmonic mode, entries sqrt((n+1)/2) on the
    /// first off-diagonals. Order 1/2 in the harmonic-oscillator grading.
    pub fn position(self: &Arc<Self>, mode: usize) -> Result<crate::algebra::GradedOperator> {
        let ladder = self.mode_ladder(mode)?;
        let n = self.buffer_dim;
        let mut m = DMatrix::<C64>::zeros(n, n);
        for &(row, col, amp) in &ladder {
            let v = C64::new(amp / std::f64::consts::SQRT_2, 0.0);
            m[(row, col)] += v; // raising part
            m[(col, row)] += v; // lowering part
        }
        Ok(crate::algebra::GradedOperator::new(m, 0.5, self.clone()))
    }

    /// Momentum operator on one harmonic mode: p = (a - a^dagger)/(i sqrt 2).
    pub fn momentum(self: &Arc<Self>, mode: usize) -> Result<crate::algebra::GradedOperator> {
        let ladder = self.mode_ladder(mode)?;
        let n = self.buffer_dim;
        let mut m = DMatrix::<C64>::zeros(n, n);
        for &(row, col, amp) in &ladder {
            let v = C64::new(0.0, amp / std::f64::consts::SQRT_2);
            m[(row, col)] += v;
            m[(col, row)] -= v;
        }
        Ok(crate::algebra::GradedOperator::new(m, 0.5, self.clone()))
    }

    /// Raising operator a^dagger on one harmonic mode (order 1/2, not symmetric).
    pub fn raising(self: &Arc<Self>, mode: usize) -> Result<crate::algebra::GradedOperator> {
        let ladder = self.mode_ladder(mode)?;
        let n = self.buffer_dim;
        let mut m = DMatrix::<C64>::zeros(n, n);
        for &(row, col, amp) in &ladder {
            m[(row, col)] += C64::new(amp, 0.0);
        }
        Ok(crate::algebra::GradedOperator::new(m, 0.5, self.clone()))
    }

    /// Lowering operator a on one harmonic mode.
    pub fn lowering(self: &Arc<Self>, mode: usize) -> Result<crate::algebra::GradedOperator> {
        Ok(self.raising(mode)?.adjoint())
    }

    /// Ladder shift by `steps` levels on a single-ladder model (anharmonic or
    /// collapsed Zoll): entries 1 connecting eigenlevel n to n+steps. Order 0.
    pub fn ladder_shift(self: &Arc<Self>, steps: i64) -> Result<crate::algebra::GradedOperator> {
        if self.n_modes() != 1 || self.multi_indices.is_some() {
            return Err(NfError::InvalidInput(
                "ladder shift is only defined on single-ladder models".into(),
            ));
        }
        let n = self.buffer_dim;
        let mut m = DMatrix::<C64>::zeros(n, n);
        for a in 0..n {
            let b = a as i64 + steps;
            if b >= 0 && (b as usize) < n {
                m[(b as usize, a)] = C64::new(1.0, 0.0);
            }
        }
        Ok(crate::algebra::GradedOperator::new(m, 0.0, self.clone()))
    }

    /// diag(lambda^alpha) of order alpha.
    pub fn k0_power(self: &Arc<Self>, alpha: f64) -> crate::algebra::GradedOperator {
        self.apply_symbol(|l| l.powf(alpha), alpha)
            .expect("positive eigenvalues make powers finite")
    }

    /// (row, col, amplitude) triples of the raising operator on `mode`:
    /// row index has mode occupation one higher, amplitude sqrt(n+1).
    fn mode_ladder(&self, mode: usize) -> Result<Vec<(usize, usize, f64)>> {
        let idx = self.multi_indices.as_ref().ok_or_else(|| {
            NfError::InvalidInput("ladder operators require a harmonic tensor model".into())
        })?;
        if mode >= self.n_modes() {
            return Err(NfError::InvalidInput(format!(
                "mode {mode} out of range (model has {} modes)",
                self.n_modes()
            )));
        }
        // Map multi-index -> position for neighbor lookup.
        let mut table = std::collections::HashMap::new();
        for (pos, a) in idx.iter().enumerate() {
            table.insert(a.clone(), pos);
        }
        let mut out = Vec::new();
        for (pos, a) in idx.iter().enumerate() {
            let mut up = a.clone();
            up[mode] += 1;
            if let Some(&target) = table.get(&up) {
                out.push((target, pos, ((a[mode] + 1) as f64).sqrt()));
            }
        }
        Ok(out)
    }

    /// K-tilde eigenvalue tuples m~_a = (v_j . m_a)_j for integer vectors v_j.
    pub fn ktilde_eigs(&self, vs: &[Vec<i64>]) -> Result<Vec<Vec<f64>>> {
        let d = self.n_modes();
        for v in vs {
            if v.len() != d {
                return Err(NfError::InvalidInput(format!(
                    "resonance vector length {} does not match mode count {d}",
                    v.len()
                )));
            }
        }
        Ok(self
            .k_eigs
            .iter()
            .map(|m| {
                vs.iter()
                    .map(|v| v.iter().zip(m).map(|(&vi, &mi)| vi as f64 * mi).sum())
                    .collect()
            })
            .collect())
    }
}

fn leak_mask(k0_eigs: &[f64]) -> Vec<bool> {
    let mut sorted: Vec<f64> = k0_eigs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let i = ((sorted.len() as f64) * 0.9) as usize;
    let q = sorted[i.min(sorted.len() - 1)];
    k0_eigs.iter().map(|&l| l >= q).collect()
}

/// Tensor product of d harmonic modes: K_j eigenvalue at multi-index a is
/// 2 a_j + 1, K0 = sum_j K_j, H0 = sum_j nu_j K_j.
pub fn build_harmonic_model(
    nu: &[f64],
    per_mode_cutoffs: &[usize],
    buffer_fraction: f64,
) -> Result<Arc<SpectralModel>> {
    if nu.is_empty() || nu.len() != per_mode_cutoffs.len() {
        return Err(NfError::InvalidInput(
            "frequency and cutoff lists must be nonempty and of equal length".into(),
        ));
    }
    if nu.iter().any(|&v| !(v > 0.0)) {
        return Err(NfError::InvalidInput(
            "harmonic frequencies must be positive".into(),
        ));
    }
    if per_mode_cutoffs.iter().any(|&c| c < 2) {
        return Err(NfError::InvalidInput("per-mode cutoffs must be >= 2".into()));
    }
    let d = nu.len();
    let buf_cutoffs: Vec<usize> = per_mode_cutoffs
        .iter()
        .map(|&c| ((c as f64) * (1.0 + buffer_fraction)).ceil() as usize)
        .collect();
    let mut total: usize = 1;
    for &c in &buf_cutoffs {
        total = total.saturating_mul(c);
        if total > MAX_BUFFER_DIM {
            return Err(NfError::Capacity(format!(
                "tensor-product dimension exceeds {MAX_BUFFER_DIM}"
            )));
        }
    }

    // Enumerate the buffer box, report indices first, each group sorted by
    // (K0 eigenvalue, lexicographic multi-index).
    let mut report: Vec<Vec<usize>> = Vec::new();
    let mut outer: Vec<Vec<usize>> = Vec::new();
    let mut idx = vec![0usize; d];
    'enumerate: loop {
        let in_report = idx.iter().zip(per_mode_cutoffs).all(|(&a, &c)| a < c);
        if in_report {
            report.push(idx.clone());
        } else {
            outer.push(idx.clone());
        }
        let mut j = d - 1;
        loop {
            idx[j] += 1;
            if idx[j] < buf_cutoffs[j] {
                break;
            }
            idx[j] = 0;
            if j == 0 {
                break 'enumerate;
            }
            j -= 1;
        }
    }
    let lam = |a: &Vec<usize>| a.iter().map(|&x| (2 * x + 1) as f64).sum::<f64>();
    let key = |a: &Vec<usize>| (lam(a), a.clone());
    report.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
    outer.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
    let report_dim = report.len();
    let mut all = report;
    all.extend(outer);
    let buffer_dim = all.len();

    let k_eigs: Vec<Vec<f64>> = all
        .iter()
        .map(|a| a.iter().map(|&x| (2 * x + 1) as f64).collect())
        .collect();
    let k0_eigs: Vec<f64> = k_eigs.iter().map(|m| m.iter().sum()).collect();
    let h0_eigs: Vec<f64> = k_eigs
        .iter()
        .map(|m| m.iter().zip(nu).map(|(&ki, &ni)| ni * ki).sum())
        .collect();

    SpectralModel {
        kind: ModelKind::Harmonic { nu: nu.to_vec() },
        mode_dims: per_mode_cutoffs.to_vec(),
        k_eigs,
        k0_eigs,
        h0_eigs,
        lambda_shift: Some(d as f64),
        integer_spectrum: true,
        report_dim,
        buffer_dim,
        mu: 1.0,
        symbol: None,
        multi_indices: Some(all),
        leak_mask: Vec::new(),
    }
    .finish()
}

/// Zoll-type cluster model: K0 eigenvalues n + (d-1)/2, H0 = K0^2.
pub fn build_zoll_model(
    d: u32,
    cutoff: usize,
    mode: MultiplicityMode,
    buffer_fraction: f64,
) -> Result<Arc<SpectralModel>> {
    if d < 1 {
        return Err(NfError::InvalidInput("Zoll dimension must be >= 1".into()));
    }
    if cutoff < 2 {
        return Err(NfError::InvalidInput("cutoff must be >= 2".into()));
    }
    if mode == MultiplicityMode::Full && d >= 3 {
        return Err(NfError::Capacity(
            "full multiplicity mode is only supported for d = 1 or d = 2".into(),
        ));
    }
    let n_buf = ((cutoff as f64) * (1.0 + buffer_fraction)).ceil() as usize;
    let shift = (d as f64 - 1.0) / 2.0;
    let mult = |n: usize| -> usize {
        match mode {
            MultiplicityMode::Collapsed => 1,
            MultiplicityMode::Full => match d {
                1 => 2,
                2 => 2 * n + 1,
                _ => unreachable!(),
            },
        }
    };
    let mut k0_eigs = Vec::new();
    let mut report_dim = 0usize;
    for n in 1..=n_buf {
        let l = n as f64 + shift;
        for _ in 0..mult(n) {
            k0_eigs.push(l);
            if n <= cutoff {
                report_dim += 1;
            }
        }
    }
    let buffer_dim = k0_eigs.len();
    if buffer_dim > MAX_BUFFER_DIM {
        return Err(NfError::Capacity(format!(
            "Zoll truncation dimension {buffer_dim} exceeds {MAX_BUFFER_DIM}"
        )));
    }
    let h0_eigs: Vec<f64> = k0_eigs.iter().map(|&l| l * l).collect();
    let k_eigs: Vec<Vec<f64>> = k0_eigs.iter().map(|&l| vec![l]).collect();
    SpectralModel {
        kind: ModelKind::Zoll { dim: d, mode },
        mode_dims: vec![cutoff],
        k_eigs,
        k0_eigs,
        h0_eigs,
        lambda_shift: Some(shift),
        integer_spectrum: true,
        report_dim,
        buffer_dim,
        mu: 2.0,
        symbol: Some(SymbolFunction::power(2.0)),
        multi_indices: None,
        leak_mask: Vec::new(),
    }
    .finish()
}

/// Anharmonic oscillator D^(2l) + a x^(2k): numerically diagonalized in an
/// oversized Hermite basis; K0 eigenvalues are E^((k+l)/(2kl)).
pub fn build_anharmonic_model(
    k: u32,
    l: u32,
    a: f64,
    cutoff: usize,
    buffer_fraction: f64,
) -> Result<Arc<SpectralModel>> {
    if k < 1 || l < 1 {
        return Err(NfError::InvalidInput("k and l must be >= 1".into()));
    }
    if k + l < 3 {
        return Err(NfError::InvalidInput(
            "k + l >= 3 is required (the harmonic case k = l = 1 is excluded)".into(),
        ));
    }
    if !(a > 0.0) {
        return Err(NfError::InvalidInput("coefficient a must be positive".into()));
    }
    if cutoff < 2 {
        return Err(NfError::InvalidInput("cutoff must be >= 2".into()));
    }
    let n_keep = ((cutoff as f64) * (1.0 + buffer_fraction)).ceil() as usize;
    if n_keep > MAX_BUFFER_DIM {
        return Err(NfError::Capacity(format!(
            "anharmonic truncation dimension {n_keep} exceeds {MAX_BUFFER_DIM}"
        )));
    }
    let m_big = (4 * n_keep).max(n_keep + 160);
    let e1 = anharmonic_levels(k, l, a, n_keep, m_big)?;
    // Basis-convergence check against a larger Hermite basis.
    let m_big2 = m_big + (m_big / 4).max(64);
    let e2 = anharmonic_levels(k, l, a, n_keep, m_big2)?;
    for (lvl, (x, y)) in e1.iter().zip(&e2).enumerate() {
        let drift = (x - y).abs() / y.abs().max(1.0);
        if drift > 1e-8 {
            return Err(NfError::Numerical(format!(
                "anharmonic level {lvl} not converged in the Hermite basis (drift {drift:.2e})"
            )));
        }
    }
    let mu = 2.0 * (k as f64) * (l as f64) / ((k + l) as f64);
    let k0_eigs: Vec<f64> = e2.iter().map(|&e| e.powf(1.0 / mu)).collect();
    let k_eigs: Vec<Vec<f64>> = k0_eigs.iter().map(|&x| vec![x]).collect();
    SpectralModel {
        kind: ModelKind::Anharmonic { k, l, a },
        mode_dims: vec![cutoff],
        k_eigs,
        k0_eigs,
        h0_eigs: e2,
        lambda_shift: None,
        integer_spectrum: false,
        report_dim: cutoff,
        buffer_dim: n_keep,
        mu,
        symbol: Some(SymbolFunction::power(mu)),
        multi_indices: None,
        leak_mask: Vec::new(),
    }
    .finish()
}

/// Lowest `n_keep` eigenvalues of D^(2l) + a x^(2k) in an `m_big`-dimensional
/// Hermite basis, ascending, with an eigen-residual guard.
fn anharmonic_levels(k: u32, l: u32, a: f64, n_keep: usize, m_big: usize) -> Result<Vec<f64>> {
    let x = hermite_position(m_big);
    let p2 = hermite_momentum_squared(m_big);
    let x2k = matrix_power(&x, 2 * k as usize);
    let p2l = matrix_power(&p2, l as usize);
    let h = &p2l + &x2k * a;
    let es = nalgebra::SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..m_big).collect();
    order.sort_by(|&i, &j| es.eigenvalues[i].partial_cmp(&es.eigenvalues[j]).unwrap());
    let scale = es.eigenvalues.iter().fold(0.0f64, |m, &e| m.max(e.abs()));
    let mut out = Vec::with_capacity(n_keep);
    for (lvl, &i) in order.iter().take(n_keep).enumerate() {
        let lam = es.eigenvalues[i];
        let v = es.eigenvectors.column(i);
        let resid = (&h * v - v * lam).norm();
        if resid > 1e-9 * scale.max(1.0) {
            return Err(NfError::Numerical(format!(
                "eigen-residual {resid:.2e} at level {lvl} exceeds tolerance"
            )));
        }
        out.push(lam);
    }
    Ok(out)
}

/// Tridiagonal Hermite-basis position matrix, entries sqrt((n+1)/2).
fn hermite_position(n: usize) -> DMatrix<f64> {
    let mut x = DMatrix::<f64>::zeros(n, n);
    for i in 0..n - 1 {
        let v = (((i + 1) as f64) / 2.0).sqrt();
        x[(i, i + 1)] = v;
        x[(i + 1, i)] = v;
    }
    x
}

/// p^2 in the Hermite basis, real symmetric pentadiagonal.
fn hermite_momentum_squared(n: usize) -> DMatrix<f64> {
    // p = i (a^dag - a)/sqrt2 => p^2 = (2 a^dag a + 1 - a^2 - a^dag^2)/2.
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = (2.0 * i as f64 + 1.0) / 2.0;
    }
    for i in 0..n.saturating_sub(2) {
        let v = -((((i + 1) * (i + 2)) as f64).sqrt()) / 2.0;
        m[(i, i + 2)] = v;
        m[(i + 2, i)] = v;
    }
    m
}

fn matrix_power(m: &DMatrix<f64>, p: usize) -> DMatrix<f64> {
    let n = m.nrows();
    let mut acc = DMatrix::<f64>::identity(n, n);
    for _ in 0..p {
        acc = &acc * m;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_ladder_d1() {
        let m = build_harmonic_model(&[1.0], &[4], 0.0).unwrap();
        assert_eq!(m.report_dim, 4);
        assert_eq!(&m.k0_eigs[..4], &[1.0, 3.0, 5.0, 7.0]);
        assert!(m.integer_spectrum);
        assert_eq!(m.lambda_shift, Some(1.0));
    }

    #[test]
    fn harmonic_tensor_d2() {
        let m = build_harmonic_model(&[1.0, 1.0], &[2, 2], 0.0).unwrap();
        let mut tuples: Vec<Vec<f64>> = m.k_eigs.clone();
        tuples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(
            tuples,
            vec![
                vec![1.0, 1.0],
                vec![1.0, 3.0],
                vec![3.0, 1.0],
                vec![3.0, 3.0]
            ]
        );
    }

    #[test]
    fn harmonic_nonresonant_h0() {
        // H0 eigenvalues are nu . (2a+1): direct tensor enumeration.
        let s2 = 2.0f64.sqrt();
        let m = build_harmonic_model(&[1.0, s2], &[2, 2], 0.0).unwrap();
        let mut h0: Vec<f64> = m.h0_eigs.clone();
        h0.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut expect = vec![1.0 + s2, 3.0 + s2, 1.0 + 3.0 * s2, 3.0 + 3.0 * s2];
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, y) in h0.iter().zip(&expect) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn harmonic_rejects_bad_input() {
        assert!(build_harmonic_model(&[-1.0], &[4], 0.5).is_err());
        assert!(build_harmonic_model(&[1.0], &[1], 0.5).is_err());
        // capacity: 50^3 buffer indices with buffer growth exceeds the cap
        assert!(matches!(
            build_harmonic_model(&[1.0, 1.0, 1.0], &[50, 50, 50], 0.5),
            Err(NfError::Capacity(_))
        ));
    }

    #[test]
    fn zoll_collapsed_d2() {
        let m = build_zoll_model(2, 3, MultiplicityMode::Collapsed, 0.0).unwrap();
        assert_eq!(&m.k0_eigs[..3], &[1.5, 2.5, 3.5]);
        // sqrt(n(n+1) + 1/4) = n + 1/2 exactly
        for n in 1..=3usize {
            let direct = ((n * (n + 1)) as f64 + 0.25).sqrt();
            assert!((direct - (n as f64 + 0.5)).abs() < 1e-12);
        }
        // H0 = K0^2 by construction
        for (h, l) in m.h0_eigs.iter().zip(&m.k0_eigs) {
            assert!((h - l * l).abs() < 1e-12);
        }
    }

    #[test]
    fn zoll_full_d1_multiplicity() {
        let m = build_zoll_model(1, 2, MultiplicityMode::Full, 0.0).unwrap();
        assert_eq!(m.report_dim, 4); // levels 1, 2 each doubled
        assert_eq!(&m.k0_eigs[..4], &[1.0, 1.0, 2.0, 2.0]);
    }

    #[test]
    fn zoll_full_d3_rejected() {
        assert!(matches!(
            build_zoll_model(3, 4, MultiplicityMode::Full, 0.5),
            Err(NfError::Capacity(_))
        ));
    }

    #[test]
    fn anharmonic_rejects_k_plus_l_below_3() {
        assert!(build_anharmonic_model(1, 1, 1.0, 16, 0.5).is_err());
    }

    #[test]
    fn anharmonic_mu() {
        let m = build_anharmonic_model(2, 1, 1.0, 12, 0.5).unwrap();
        assert!((m.mu - 4.0 / 3.0).abs() < 1e-12);
        assert!(!m.integer_spectrum);
        // K0 eigenvalues are H eigenvalues to the power 1/mu and increasing.
        for w in m.k0_eigs.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn sobolev_weight_duality() {
        let m = build_harmonic_model(&[1.0], &[8], 0.5).unwrap();
        let w1 = m.sobolev_weights(1.0);
        let wm1 = m.sobolev_weights(-1.0);
        assert_eq!(&w1.weights[..3], &[1.0, 3.0, 5.0]);
        for (a, b) in w1.weights.iter().zip(&wm1.weights) {
            assert_eq!(a * b, 1.0);
        }
        let w0 = m.sobolev_weights(0.0);
        assert!(w0.weights.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn symbol_cutoff_glue() {
        let f = SymbolFunction::power(2.0);
        assert!((f.cutoff_r - 0.5).abs() < 1e-12);
        assert_eq!(f.eta(0.2), 1.0);
        assert_eq!(f.eta(2.0), 0.0);
        let mid = f.eta(1.0);
        assert!(mid > 0.0 && mid < 1.0);
        // monotone on the glue interval
        assert!(f.eta(0.7) > f.eta(0.9));
        assert!((f.d1(3.0) - 6.0).abs() < 1e-12);
        assert!((f.d2(3.0) - 2.0).abs() < 1e-12);
    }
}
