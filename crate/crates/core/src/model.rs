//! Hamiltonians of the vibron model and its spinor realization, the
//! closed-form spectra of the two dynamical-symmetry chains, and dense
//! diagonalization of blocks.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::algebra::{casimir_w2, expr, j2_rotated, Mode, OpExpr};
use crate::basis::{BlockFilter, Convention, FockBasis};
use crate::error::{Error, Result};
use crate::numeric::fmt_f64;
use crate::sparse::{CsrMatrix, SparseOperator, C64};

/// Default largest block handed to the dense eigensolver.
pub const DENSE_CAP: usize = 8192;

/// Divisor of the two-body term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    NMinus1,
    N,
}

impl Normalization {
    pub fn divisor(self, n: u32) -> Result<f64> {
        let d = match self {
            Normalization::NMinus1 => n as f64 - 1.0,
            Normalization::N => n as f64,
        };
        if d <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "N",
                reason: format!("two-body divisor {d} for N = {n}"),
            });
        }
        Ok(d)
    }
}

/// Coefficients of the general algebraic Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChainCoefficients {
    pub e0: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamiltonianKind {
    /// `(1 - gamma) n -/+ gamma W^2 / d`.
    Essential,
    /// `E0 + eps n + alpha n(n+1) + beta l^2 + A W^2`.
    General,
    /// `E0 + eps n + alpha n(n+1) + beta l^2`.
    Chain1,
    /// `E0 + beta l^2 + A W^2`.
    Chain2,
    /// `-((1 - gamma)/gamma) N_0 - J_rot^2 / d`, in units of `c/2`.
    SpinorRotated,
    /// `-alpha N_0`.
    N0Only,
    /// `H_x + H_y`, `H_j = -2 N_j + tau_j^2 + tau_j^dag^2`, mode 0 as a
    /// reservoir.
    LowDepletion,
}

impl HamiltonianKind {
    pub const ALL: [HamiltonianKind; 7] = [
        HamiltonianKind::Essential,
        HamiltonianKind::General,
        HamiltonianKind::Chain1,
        HamiltonianKind::Chain2,
        HamiltonianKind::SpinorRotated,
        HamiltonianKind::N0Only,
        HamiltonianKind::LowDepletion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HamiltonianKind::Essential => "essential",
            HamiltonianKind::General => "general",
            HamiltonianKind::Chain1 => "chain1",
            HamiltonianKind::Chain2 => "chain2",
            HamiltonianKind::SpinorRotated => "spinor_rotated",
            HamiltonianKind::N0Only => "n0_only",
            HamiltonianKind::LowDepletion => "low_depletion",
        }
    }

    /// Divisor convention used when none is given.
    pub fn default_normalization(self) -> Normalization {
        match self {
            HamiltonianKind::SpinorRotated => Normalization::N,
            _ => Normalization::NMinus1,
        }
    }
}

impl fmt::Display for HamiltonianKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HamiltonianKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        HamiltonianKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown hamiltonian kind `{s}`")))
    }
}

/// Model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    gamma: f64,
    n_total: u32,
    /// `None` picks the kind's default.
    pub normalization: Option<Normalization>,
    /// Sign in front of the two-body term of the essential Hamiltonian;
    /// `-1` reproduces the main-text form.
    pub w2_sign: f64,
    pub chain: ChainCoefficients,
    pub alpha_n0: f64,
}

impl ModelParams {
    pub fn new(gamma: f64, n_total: u32) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: format!("gamma must lie in [0,1], got {gamma}"),
            });
        }
        Ok(ModelParams {
            gamma,
            n_total,
            normalization: None,
            w2_sign: -1.0,
            chain: ChainCoefficients::default(),
            alpha_n0: 1.0,
        })
    }

    pub fn with_normalization(mut self, norm: Normalization) -> Self {
        self.normalization = Some(norm);
        self
    }

    pub fn with_chain(mut self, chain: ChainCoefficients) -> Self {
        self.chain = chain;
        self
    }

    pub fn with_w2_sign(mut self, sign: f64) -> Self {
        self.w2_sign = sign.signum();
        self
    }

    pub fn with_alpha_n0(mut self, alpha: f64) -> Self {
        self.alpha_n0 = alpha;
        self
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_total(&self) -> u32 {
        self.n_total
    }

    /// Quadratic Zeeman ratio `q/c = 2(1 - gamma)/gamma`, defined for `gamma > 0`.
    pub fn q_over_c(&self) -> Option<f64> {
        (self.gamma > 0.0).then(|| 2.0 * (1.0 - self.gamma) / self.gamma)
    }

    fn divisor(&self, kind: HamiltonianKind) -> Result<f64> {
        self.normalization
            .unwrap_or(kind.default_normalization())
            .divisor(self.n_total)
    }
}

fn diagonal(basis: &Arc<FockBasis>, f: impl Fn(f64, f64) -> f64) -> Result<SparseOperator> {
    // f(n_vib, l); l is only meaningful in the circular convention
    let circ = basis.convention() == Convention::Circular;
    let diag: Vec<C64> = basis
        .states()
        .iter()
        .map(|o| {
            let nv = (o.first() + o.second()) as f64;
            let l = if circ { o.magnetization() as f64 } else { 0.0 };
            C64::new(f(nv, l), 0.0)
        })
        .collect();
    SparseOperator::new(basis.clone(), basis.clone(), CsrMatrix::from_diagonal(&diag)).into_hermitian()
}

/// `l^2` on any basis; in the Cartesian convention it is built from ladders.
fn l_squared(basis: &Arc<FockBasis>) -> Result<SparseOperator> {
    let l = expr::l();
    (l.clone() * l).build_hermitian(basis)
}

/// Build the Hamiltonian of `kind` on `basis`.
pub fn build(kind: HamiltonianKind, params: &ModelParams, basis: &Arc<FockBasis>) -> Result<SparseOperator> {
    if basis.total_n() != params.n_total {
        return Err(Error::BasisMismatch(format!(
            "basis has N = {}, parameters have N = {}",
            basis.total_n(),
            params.n_total
        )));
    }
    let g = params.gamma;
    let c = params.chain;
    let excitation_basis = matches!(basis.filter(), BlockFilter::Excitations(_));
    if excitation_basis != (kind == HamiltonianKind::LowDepletion) {
        return Err(Error::BasisMismatch(
            "the low-depletion Hamiltonian lives exactly on excitation-filtered bases".into(),
        ));
    }
    match kind {
        HamiltonianKind::Essential => {
            let d = params.divisor(kind)?;
            let n = diagonal(basis, |nv, _| (1.0 - g) * nv)?;
            if g == 0.0 {
                return Ok(n);
            }
            n.add(&casimir_w2(basis)?.scale_real(params.w2_sign * g / d))?.into_hermitian()
        }
        HamiltonianKind::General | HamiltonianKind::Chain1 => {
            let circ = basis.convention() == Convention::Circular;
            let mut h = diagonal(basis, |nv, l| {
                let beta_term = if circ { c.beta * l * l } else { 0.0 };
                c.e0 + c.epsilon * nv + c.alpha * nv * (nv + 1.0) + beta_term
            })?;
            if !circ && c.beta != 0.0 {
                h = h.add(&l_squared(basis)?.scale_real(c.beta))?;
            }
            if kind == HamiltonianKind::General && c.a != 0.0 {
                h = h.add(&casimir_w2(basis)?.scale_real(c.a))?;
            }
            h.into_hermitian()
        }
        HamiltonianKind::Chain2 => {
            let circ = basis.convention() == Convention::Circular;
            let mut h = diagonal(basis, |_, l| c.e0 + if circ { c.beta * l * l } else { 0.0 })?;
            if !circ && c.beta != 0.0 {
                h = h.add(&l_squared(basis)?.scale_real(c.beta))?;
            }
            h.add(&casimir_w2(basis)?.scale_real(c.a))?.into_hermitian()
        }
        HamiltonianKind::SpinorRotated => {
            if g == 0.0 {
                return Err(Error::SpinorAtZeroGamma);
            }
            let d = params.divisor(kind)?;
            let n0 = OpExpr::number(Mode::Zero).build_hermitian(basis)?;
            n0.scale_real(-(1.0 - g) / g)
                .add(&j2_rotated(basis)?.scale_real(-1.0 / d))?
                .into_hermitian()
        }
        HamiltonianKind::N0Only => OpExpr::number(Mode::Zero)
            .build_hermitian(basis)?
            .scale_real(-params.alpha_n0)
            .into_hermitian(),
        HamiltonianKind::LowDepletion => {
            let (hx, hy) = low_depletion_parts(basis)?;
            hx.add(&hy)?.into_hermitian()
        }
    }
}

/// `(H_x, H_y)` on an excitation-filtered Cartesian basis. Mode 0 only
/// absorbs the change in vibron number; no `sqrt(n_0)` factor appears.
/// Each mode is truncated at the filter's cap on its own, so the two
/// pieces commute exactly.
pub fn low_depletion_parts(basis: &Arc<FockBasis>) -> Result<(SparseOperator, SparseOperator)> {
    let BlockFilter::Excitations(cap) = basis.filter() else {
        return Err(Error::BasisMismatch("low-depletion needs an excitation-filtered basis".into()));
    };
    let part = |slot: usize| -> Result<SparseOperator> {
        let mut trips = Vec::new();
        for (j, occ) in basis.states().iter().enumerate() {
            let k = occ.0[slot];
            trips.push((j, j, C64::new(-2.0 * k as f64, 0.0)));
            let mut shifted = |new_k: u32, amp: f64| {
                let mut o = occ.0;
                o[slot] = new_k;
                o[1] = basis.total_n() - o[0] - o[2];
                let i = basis.index_of(&crate::basis::Occupation(o)).expect("within cap");
                trips.push((i, j, C64::new(amp, 0.0)));
            };
            if k >= 2 {
                shifted(k - 2, ((k * (k - 1)) as f64).sqrt());
            }
            if k + 2 <= cap {
                shifted(k + 2, (((k + 1) * (k + 2)) as f64).sqrt());
            }
        }
        SparseOperator::new(
            basis.clone(),
            basis.clone(),
            CsrMatrix::from_triplets(basis.dim(), basis.dim(), trips),
        )
        .into_hermitian()
    };
    Ok((part(0)?, part(2)?))
}

/// Quantum numbers of the two chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainLabel {
    /// `n = 0..=N`, `l = -n, -n+2, ..., n`.
    One { n_total: u32, n: u32, l: i64 },
    /// `v = 0..=N/2`, `|l| <= N - 2v`.
    Two { n_total: u32, v: u32, l: i64 },
}

/// Closed-form chain energy.
pub fn chain_eigenvalue(label: ChainLabel, c: &ChainCoefficients) -> Result<f64> {
    match label {
        ChainLabel::One { n_total, n, l } => {
            if n > n_total || l.abs() > n as i64 || (n as i64 - l).rem_euclid(2) != 0 {
                return Err(Error::QuantumNumbers(format!("chain I: N={n_total} n={n} l={l}")));
            }
            let (n, l) = (n as f64, l as f64);
            Ok(c.e0 + c.epsilon * n + c.alpha * n * (n + 1.0) + c.beta * l * l)
        }
        ChainLabel::Two { n_total, v, l } => {
            if 2 * v > n_total || l.abs() > (n_total - 2 * v) as i64 {
                return Err(Error::QuantumNumbers(format!("chain II: N={n_total} v={v} l={l}")));
            }
            let w = (n_total - 2 * v) as f64;
            Ok(c.e0 + c.beta * (l * l) as f64 + c.a * w * (w + 1.0))
        }
    }
}

/// Chain II energy in the displaced-oscillator form
/// `E0 + A N(N+1) - 4A[(N + 1/2) v - v^2] + beta l^2`.
pub fn chain2_vibrational_form(n_total: u32, v: u32, l: i64, c: &ChainCoefficients) -> f64 {
    let (n, v, l) = (n_total as f64, v as f64, l as f64);
    c.e0 + c.a * n * (n + 1.0) - 4.0 * c.a * ((n + 0.5) * v - v * v) + c.beta * l * l
}

/// Every chain label at `n_total`, optionally restricted to one `l`.
pub fn chain_labels(chain: HamiltonianKind, n_total: u32, l: Option<i64>) -> Result<Vec<ChainLabel>> {
    let keep = |x: i64| l.is_none_or(|l| l == x);
    let mut out = Vec::new();
    match chain {
        HamiltonianKind::Chain1 => {
            for n in 0..=n_total {
                for ll in (-(n as i64)..=n as i64).step_by(2) {
                    if keep(ll) {
                        out.push(ChainLabel::One { n_total, n, l: ll });
                    }
                }
            }
        }
        HamiltonianKind::Chain2 => {
            for v in 0..=n_total / 2 {
                let w = (n_total - 2 * v) as i64;
                for ll in -w..=w {
                    if keep(ll) {
                        out.push(ChainLabel::Two { n_total, v, l: ll });
                    }
                }
            }
        }
        other => {
            return Err(Error::InvalidParameter {
                name: "kind",
                reason: format!("{other} has no closed-form chain spectrum"),
            })
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
enum Vectors {
    Real(DMatrix<f64>),
    Complex(DMatrix<C64>),
}

/// Ascending eigenvalues and orthonormal eigenvectors of a Hermitian block.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    basis: Arc<FockBasis>,
    values: Vec<f64>,
    vectors: Vectors,
}

impl SpectralDecomposition {
    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn is_real(&self) -> bool {
        matches!(self.vectors, Vectors::Real(_))
    }

    /// Real eigenvector matrix (columns), if the operator was real.
    pub fn real_vectors(&self) -> Option<&DMatrix<f64>> {
        match &self.vectors {
            Vectors::Real(v) => Some(v),
            Vectors::Complex(_) => None,
        }
    }

    /// Eigenvector matrix (columns) as complex numbers.
    pub fn complex_vectors(&self) -> DMatrix<C64> {
        match &self.vectors {
            Vectors::Real(v) => v.map(|x| C64::new(x, 0.0)),
            Vectors::Complex(v) => v.clone(),
        }
    }

    pub fn vector(&self, k: usize) -> DVector<C64> {
        match &self.vectors {
            Vectors::Real(v) => v.column(k).map(|x| C64::new(x, 0.0)),
            Vectors::Complex(v) => v.column(k).into_owned(),
        }
    }
}

/// Dense diagonalization with the default cap.
pub fn spectral_decomposition(h: &SparseOperator) -> Result<SpectralDecomposition> {
    spectral_decomposition_capped(h, DENSE_CAP)
}

pub fn spectral_decomposition_capped(h: &SparseOperator, cap: usize) -> Result<SpectralDecomposition> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian(h.hermiticity_error()?));
    }
    let dim = h.domain().dim();
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    let m = h.matrix();
    let (values, vectors) = if m.is_real() {
        let mut dense = DMatrix::<f64>::zeros(dim, dim);
        for (i, j, v) in m.iter() {
            dense[(i, j)] = v.re;
        }
        let eig = SymmetricEigen::new(dense);
        let order = ascending(eig.eigenvalues.as_slice());
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vecs = DMatrix::from_fn(dim, dim, |i, j| eig.eigenvectors[(i, order[j])]);
        (values, Vectors::Real(vecs))
    } else {
        let eig = SymmetricEigen::new(m.to_dense());
        let order = ascending(eig.eigenvalues.as_slice());
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vecs = DMatrix::from_fn(dim, dim, |i, j| eig.eigenvectors[(i, order[j])]);
        (values, Vectors::Complex(vecs))
    };
    Ok(SpectralDecomposition {
        basis: h.domain().clone(),
        values,
        vectors,
    })
}

fn ascending(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    idx
}

/// One column of a spectrum scan: `(E_k - E_0)/N`, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumColumn {
    pub gamma: f64,
    pub levels: Vec<f64>,
}

/// Spectrum of `kind` on the magnetization block `l` for each `gamma`,
/// shifted so the lowest level is zero and divided by `N`. Runs on the
/// ambient rayon pool.
pub fn spectrum_scan(
    kind: HamiltonianKind,
    template: &ModelParams,
    l: i64,
    gammas: &[f64],
) -> Result<Vec<SpectrumColumn>> {
    let n = template.n_total();
    let basis = Arc::new(FockBasis::enumerate(n, Convention::Circular, BlockFilter::FixedL(l))?);
    gammas
        .par_iter()
        .map(|&g| {
            let mut p = ModelParams::new(g, n)?;
            p.normalization = template.normalization;
            p.w2_sign = template.w2_sign;
            p.chain = template.chain;
            p.alpha_n0 = template.alpha_n0;
            let h = build(kind, &p, &basis)?;
            let dec = spectral_decomposition(&h)?;
            let e0 = dec.eigenvalues()[0];
            Ok(SpectrumColumn {
                gamma: g,
                levels: dec.eigenvalues().iter().map(|e| (e - e0) / n as f64).collect(),
            })
        })
        .collect()
}

/// CSV with columns `gamma,level_index,energy_normalized`.
pub fn write_spectrum_csv<W: Write>(columns: &[SpectrumColumn], mut out: W) -> Result<()> {
    writeln!(out, "gamma,level_index,energy_normalized")?;
    for col in columns {
        for (k, e) in col.levels.iter().enumerate() {
            writeln!(out, "{},{},{}", fmt_f64(col.gamma), k, fmt_f64(*e))?;
        }
    }
    Ok(())
}

/// Smallest gap between the two lowest levels over the scan, as
/// `(gamma, gap)`.
pub fn lowest_gap_minimum(columns: &[SpectrumColumn]) -> Option<(f64, f64)> {
    columns
        .iter()
        .filter(|c| c.levels.len() >= 2)
        .map(|c| (c.gamma, c.levels[1] - c.levels[0]))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circ(n: u32) -> Arc<FockBasis> {
        Arc::new(FockBasis::full(n, Convention::Circular))
    }

    #[test]
    fn chain1_spectrum_degeneracies() {
        let c = ChainCoefficients {
            epsilon: 1.0,
            ..Default::default()
        };
        let p = ModelParams::new(0.0, 3).unwrap().with_chain(c);
        let h = build(HamiltonianKind::Chain1, &p, &circ(3)).unwrap();
        let e = spectral_decomposition(&h).unwrap();
        let want = [0.0, 1.0, 1.0, 2.0, 2.0, 2.0, 3.0, 3.0, 3.0, 3.0];
        for (a, b) in e.eigenvalues().iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn chain2_two_bosons() {
        let c = ChainCoefficients {
            a: 1.0,
            ..Default::default()
        };
        let p = ModelParams::new(0.0, 2).unwrap().with_chain(c);
        let h = build(HamiltonianKind::Chain2, &p, &circ(2)).unwrap();
        let e = spectral_decomposition(&h).unwrap();
        let mut distinct: Vec<f64> = e.eigenvalues().to_vec();
        distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        assert_eq!(distinct.len(), 2);
        assert!(distinct[0].abs() < 1e-12 && (distinct[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn chain_formula_values() {
        let c1 = ChainCoefficients {
            epsilon: 1.0,
            alpha: 1.0,
            ..Default::default()
        };
        assert_eq!(chain_eigenvalue(ChainLabel::One { n_total: 4, n: 2, l: 0 }, &c1).unwrap(), 8.0);
        let c2 = ChainCoefficients {
            a: 1.0,
            beta: 1.0,
            ..Default::default()
        };
        assert_eq!(chain_eigenvalue(ChainLabel::Two { n_total: 5, v: 1, l: 2 }, &c2).unwrap(), 16.0);
        assert!(chain_eigenvalue(ChainLabel::One { n_total: 4, n: 2, l: 1 }, &c1).is_err());
        assert!(chain_eigenvalue(ChainLabel::Two { n_total: 5, v: 3, l: 0 }, &c2).is_err());
        assert!(chain_eigenvalue(ChainLabel::Two { n_total: 5, v: 1, l: 4 }, &c2).is_err());
    }

    #[test]
    fn chain2_forms_agree() {
        let c = ChainCoefficients {
            e0: 0.3,
            a: -0.7,
            beta: 0.2,
            ..Default::default()
        };
        for n in 0..=20 {
            for label in chain_labels(HamiltonianKind::Chain2, n, None).unwrap() {
                let ChainLabel::Two { v, l, .. } = label else { unreachable!() };
                let a = chain_eigenvalue(label, &c).unwrap();
                let b = chain2_vibrational_form(n, v, l, &c);
                assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn label_counts_fill_the_space() {
        for n in 0..=12 {
            let d = crate::basis::full_dimension(n);
            assert_eq!(chain_labels(HamiltonianKind::Chain1, n, None).unwrap().len(), d);
            assert_eq!(chain_labels(HamiltonianKind::Chain2, n, None).unwrap().len(), d);
        }
    }

    #[test]
    fn essential_at_zero_gamma_is_vibron_number() {
        let p = ModelParams::new(0.0, 3).unwrap();
        let e = spectral_decomposition(&build(HamiltonianKind::Essential, &p, &circ(3)).unwrap()).unwrap();
        let want = [0.0, 1.0, 1.0, 2.0, 2.0, 2.0, 3.0, 3.0, 3.0, 3.0];
        for (a, b) in e.eigenvalues().iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn n0_only_spectrum() {
        let p = ModelParams::new(0.5, 3).unwrap();
        let e = spectral_decomposition(&build(HamiltonianKind::N0Only, &p, &circ(3)).unwrap()).unwrap();
        let want = [-3.0, -2.0, -2.0, -1.0, -1.0, -1.0, 0.0, 0.0, 0.0, 0.0];
        for (a, b) in e.eigenvalues().iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn spinor_rejects_zero_gamma() {
        let p = ModelParams::new(0.0, 3).unwrap();
        assert_eq!(
            build(HamiltonianKind::SpinorRotated, &p, &circ(3)).unwrap_err(),
            Error::SpinorAtZeroGamma
        );
    }

    #[test]
    fn gamma_out_of_range() {
        let e = ModelParams::new(1.2, 3).unwrap_err();
        assert!(e.to_string().contains("gamma must lie in [0,1]"));
        assert!(ModelParams::new(0.0, 3).unwrap().q_over_c().is_none());
        assert!((ModelParams::new(0.5, 3).unwrap().q_over_c().unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn cap_is_enforced() {
        let p = ModelParams::new(0.5, 6).unwrap();
        let h = build(HamiltonianKind::Essential, &p, &circ(6)).unwrap();
        assert!(matches!(
            spectral_decomposition_capped(&h, 10),
            Err(Error::DimensionCap { dim: 28, cap: 10 })
        ));
    }

    #[test]
    fn residuals_and_orthonormality() {
        let p = ModelParams::new(0.4, 8).unwrap();
        let cart = Arc::new(FockBasis::full(8, Convention::Cartesian));
        for basis in [circ(8), cart] {
            let h = build(HamiltonianKind::SpinorRotated, &p, &basis).unwrap();
            let dec = spectral_decomposition(&h).unwrap();
            let hd = h.matrix().to_dense();
            let v = dec.complex_vectors();
            let norm = hd.norm();
            for k in 0..dec.dim() {
                let r = &hd * v.column(k) - v.column(k) * C64::new(dec.eigenvalues()[k], 0.0);
                assert!(r.norm() < 1e-9 * norm);
            }
            let gram = v.adjoint() * &v;
            assert!((gram - DMatrix::identity(dec.dim(), dec.dim())).norm() < 1e-10);
        }
    }

    #[test]
    fn essential_cartesian_and_circular_spectra_agree() {
        let p = ModelParams::new(0.35, 6).unwrap();
        let a = spectral_decomposition(&build(HamiltonianKind::Essential, &p, &circ(6)).unwrap()).unwrap();
        let cart = Arc::new(FockBasis::full(6, Convention::Cartesian));
        let b = spectral_decomposition(&build(HamiltonianKind::Essential, &p, &cart).unwrap()).unwrap();
        for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for k in HamiltonianKind::ALL {
            assert_eq!(k.name().parse::<HamiltonianKind>().unwrap(), k);
        }
        assert!("bogus".parse::<HamiltonianKind>().is_err());
    }

    #[test]
    fn scan_csv_shape() {
        let p = ModelParams::new(0.0, 10).unwrap();
        let cols = spectrum_scan(HamiltonianKind::Essential, &p, 0, &[0.0, 0.5]).unwrap();
        assert_eq!(cols.len(), 2);
        assert_eq!(cols[0].levels.len(), 6);
        assert!(cols[0].levels[0] == 0.0);
        for (k, e) in cols[0].levels.iter().enumerate() {
            assert!((e - 2.0 * k as f64 / 10.0).abs() < 1e-12);
        }
        let mut buf = Vec::new();
        write_spectrum_csv(&cols, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 13);
        assert!(text.starts_with("gamma,level_index,energy_normalized\n"));
    }
}
