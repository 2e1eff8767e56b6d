//! State preparation: number-projected U(3) coherent states, two-mode
//! spin-coherent states and number states.

use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::sync::Arc;

use nalgebra::DVector;

use crate::basis::{BlockFilter, Convention, FockBasis, Occupation};
use crate::error::{Error, Result};
use crate::numeric::LogFactorial;
use crate::sparse::{SparseOperator, C64};

/// Tolerance on the norm of a constructed state.
pub const NORM_TOL: f64 = 1e-12;

/// Normalized amplitude vector bound to a basis.
#[derive(Debug, Clone)]
pub struct QuantumState {
    basis: Arc<FockBasis>,
    amps: DVector<C64>,
}

impl QuantumState {
    /// Wrap amplitudes that are already normalized.
    pub fn new(basis: Arc<FockBasis>, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::BasisMismatch(format!(
                "{} amplitudes for a basis of dimension {}",
                amps.len(),
                basis.dim()
            )));
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter {
                name: "amplitudes",
                reason: format!("norm {norm} is not 1"),
            });
        }
        Ok(QuantumState { basis, amps })
    }

    /// Normalize and wrap; fails on a zero vector.
    pub fn normalized(basis: Arc<FockBasis>, amps: DVector<C64>) -> Result<Self> {
        let norm = amps.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter {
                name: "amplitudes",
                reason: "cannot normalize a zero vector".into(),
            });
        }
        QuantumState::new(basis, amps.unscale(norm))
    }

    /// Basis state `|occ>`.
    pub fn number_state(basis: Arc<FockBasis>, occ: Occupation) -> Result<Self> {
        let i = basis
            .index_of(&occ)
            .ok_or(Error::ImageOutsideBasis { state: occ.0 })?;
        let mut amps = DVector::zeros(basis.dim());
        amps[i] = C64::new(1.0, 0.0);
        Ok(QuantumState { basis, amps })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amps
    }

    pub fn amplitude(&self, occ: &Occupation) -> C64 {
        self.basis
            .index_of(occ)
            .map(|i| self.amps[i])
            .unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// `<self|other>` for states on the same basis.
    pub fn inner(&self, other: &QuantumState) -> Result<C64> {
        if !self.basis.same_space(&other.basis) {
            return Err(Error::BasisMismatch("inner product across bases".into()));
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// Wrap amplitudes already known to be normalized up to rounding.
    pub(crate) fn from_unchecked(basis: Arc<FockBasis>, amps: DVector<C64>) -> Self {
        QuantumState { basis, amps }
    }

    /// Copy into a larger basis that contains every state of this one.
    pub fn embed(&self, target: &Arc<FockBasis>) -> Result<QuantumState> {
        if !self.basis.is_subset_of(target) {
            return Err(Error::BasisMismatch("embedding target does not contain the basis".into()));
        }
        let mut amps = DVector::zeros(target.dim());
        for (occ, a) in self.basis.states().iter().zip(self.amps.iter()) {
            amps[target.index_of(occ).expect("subset")] = *a;
        }
        Ok(QuantumState {
            basis: target.clone(),
            amps,
        })
    }

    /// Keep only the components inside `target`; fails if more than
    /// `tol` of probability would be discarded.
    pub fn restrict(&self, target: &Arc<FockBasis>, tol: f64) -> Result<QuantumState> {
        if target.total_n() != self.basis.total_n() || target.convention() != self.basis.convention() {
            return Err(Error::BasisMismatch("restriction target has a different space".into()));
        }
        let mut amps = DVector::zeros(target.dim());
        let mut lost = 0.0;
        for (occ, a) in self.basis.states().iter().zip(self.amps.iter()) {
            match target.index_of(occ) {
                Some(i) => amps[i] = *a,
                None => lost += a.norm_sqr(),
            }
        }
        if lost > tol {
            return Err(Error::BlockLeak { leak: lost });
        }
        QuantumState::normalized(target.clone(), amps)
    }

    /// `<psi|A|psi>`.
    pub fn expectation(&self, op: &SparseOperator) -> Result<C64> {
        if !op.domain().same_space(&self.basis) {
            return Err(Error::BasisMismatch("operator domain differs from state basis".into()));
        }
        Ok(op.expectation(self.amps.as_slice()))
    }

    /// CSV dump `index,re,im` with a header naming the basis ordering.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# N={} convention={} filter={:?} ordering=lexicographic(first,zero)",
            self.basis.total_n(),
            self.basis.convention().name(),
            self.basis.filter()
        )?;
        writeln!(out, "index,re,im")?;
        for (i, a) in self.amps.iter().enumerate() {
            writeln!(out, "{},{:.17e},{:.17e}", i, a.re, a.im)?;
        }
        Ok(())
    }

    /// Read a dump written by [`write_csv`](Self::write_csv) against `basis`.
    pub fn read_csv<R: BufRead>(basis: Arc<FockBasis>, input: R) -> Result<Self> {
        let mut amps = DVector::zeros(basis.dim());
        let mut seen = 0usize;
        for line in input.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("index") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!("expected 3 fields, got `{line}`")));
            }
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{e}: `{s}`")));
            let i: usize = fields[0].trim().parse().map_err(|e| Error::Parse(format!("{e}")))?;
            if i >= basis.dim() {
                return Err(Error::Parse(format!("index {i} out of range")));
            }
            amps[i] = C64::new(parse(fields[1])?, parse(fields[2])?);
            seen += 1;
        }
        if seen != basis.dim() {
            return Err(Error::Parse(format!("read {seen} amplitudes, expected {}", basis.dim())));
        }
        QuantumState::new(basis, amps)
    }
}

/// `theta = 2 arctan(x)`.
pub fn theta_of_x(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "x",
            reason: "must be non-negative (use phi = pi for negative displacement)".into(),
        });
    }
    Ok(2.0 * x.atan())
}

/// Number-projected U(3) coherent state on the full Cartesian basis:
/// `(b_c^dag)^N / sqrt(N!) |vac>` with
/// `b_c^dag = (sigma^dag + x tau_x^dag + y tau_y^dag)/sqrt(1 + x^2 + y^2)`.
pub fn coherent3(x: f64, y: f64, n: u32) -> Result<QuantumState> {
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::InvalidParameter {
            name: "x, y",
            reason: "must be finite".into(),
        });
    }
    let basis = Arc::new(FockBasis::full(n, Convention::Cartesian));
    let lf = LogFactorial::new(n as usize);
    let log_norm = -0.5 * (1.0 + x * x + y * y).ln() * n as f64;
    // amplitude of |nx, n0, ny> = sqrt(N! / (nx! n0! ny!)) x^nx y^ny / (1+x^2+y^2)^{N/2}
    let amps = basis
        .states()
        .iter()
        .map(|o| {
            let (nx, n0, ny) = (o.first(), o.zero(), o.second());
            let log_mult = 0.5 * (lf.get(n as usize) - lf.get(nx as usize) - lf.get(n0 as usize) - lf.get(ny as usize));
            signed_power_product(&[(x, nx), (y, ny)], log_mult + log_norm)
        })
        .collect::<Vec<_>>();
    QuantumState::normalized(basis, DVector::from_vec(amps))
}

/// `exp(log_mag) * prod base^exp`, evaluated in log-space.
fn signed_power_product(factors: &[(f64, u32)], log_mag: f64) -> C64 {
    let mut log = log_mag;
    let mut sign = 1.0;
    for &(base, e) in factors {
        if e == 0 {
            continue;
        }
        if base == 0.0 {
            return C64::new(0.0, 0.0);
        }
        log += e as f64 * base.abs().ln();
        if base < 0.0 && e % 2 == 1 {
            sign = -sign;
        }
    }
    C64::new(sign * log.exp(), 0.0)
}

/// Amplitudes of the two-mode spin-coherent state indexed by `n_x`:
/// `sqrt(C(N, n_x)) sin^{n_x}(theta/2) cos^{N-n_x}(theta/2) e^{-i (N - n_x) phi}`.
pub fn spin_coherent_amplitudes(theta: f64, phi: f64, n: u32) -> Vec<C64> {
    let lf = LogFactorial::new(n as usize);
    let (s, c) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    (0..=n)
        .map(|k| {
            let log_binom = 0.5 * lf.binomial(n as usize, k as usize);
            let mag = signed_power_product(&[(s, k), (c, n - k)], log_binom);
            mag * C64::from_polar(1.0, -((n - k) as f64) * phi)
        })
        .collect()
}

/// Spin-coherent state of the x/0 two-mode subspace, embedded in the full
/// Cartesian basis on the states `|n_x, N - n_x, 0>`.
pub fn spin_coherent2(theta: f64, phi: f64, n: u32) -> Result<QuantumState> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::InvalidParameter {
            name: "theta",
            reason: "must lie in [0, pi]".into(),
        });
    }
    let basis = Arc::new(FockBasis::full(n, Convention::Cartesian));
    let mut amps = DVector::zeros(basis.dim());
    for (k, a) in spin_coherent_amplitudes(theta, phi, n).into_iter().enumerate() {
        let k = k as u32;
        amps[basis.index_of(&Occupation::new(k, n - k, 0)).expect("full basis")] = a;
    }
    QuantumState::normalized(basis, amps)
}

/// `|0, N, 0>` on the zero-magnetization block (circular), the quench
/// initial state.
pub fn all_in_zero_block(n: u32) -> Result<QuantumState> {
    let basis = Arc::new(FockBasis::enumerate(n, Convention::Circular, BlockFilter::FixedL(0))?);
    QuantumState::number_state(basis, Occupation::new(0, n, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{expr, su2_subalgebra, Subalgebra};
    use crate::basis::convert_convention;

    #[test]
    fn coherent_at_origin_is_all_in_sigma() {
        let s = coherent3(0.0, 0.0, 7).unwrap();
        assert!((s.amplitude(&Occupation::new(0, 7, 0)).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn coherent_single_boson_expansion() {
        let s = coherent3(1.0, 0.0, 1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitude(&Occupation::new(0, 1, 0)).re - h).abs() < 1e-14);
        assert!((s.amplitude(&Occupation::new(1, 0, 0)).re - h).abs() < 1e-14);
    }

    #[test]
    fn coherent_vibron_number_at_bent_minimum() {
        let r0 = 0.6f64.sqrt();
        let s = coherent3(r0, 0.0, 100).unwrap();
        let nv = (crate::algebra::OpExpr::number(crate::algebra::Mode::X)
            + crate::algebra::OpExpr::number(crate::algebra::Mode::Y))
        .build_hermitian(s.basis())
        .unwrap();
        let mean = s.expectation(&nv).unwrap().re;
        assert!((mean - 37.5).abs() < 1e-9, "{mean}");
    }

    #[test]
    fn theta_of_x_values() {
        assert_eq!(theta_of_x(0.0).unwrap(), 0.0);
        assert!((theta_of_x(1.0).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((theta_of_x(0.6f64.sqrt()).unwrap() - 1.318116).abs() < 1e-6);
        assert!(theta_of_x(-1.0).is_err());
    }

    #[test]
    fn spin_coherent_poles() {
        let n = 9;
        let north = spin_coherent2(0.0, 1.3, n).unwrap();
        assert!((north.amplitude(&Occupation::new(0, n, 0)).norm() - 1.0).abs() < 1e-14);
        let south = spin_coherent2(PI, 0.0, n).unwrap();
        assert!((south.amplitude(&Occupation::new(n, 0, 0)).norm() - 1.0).abs() < 1e-14);
        let [_, _, xz] = su2_subalgebra(Subalgebra::ModeX, north.basis()).unwrap();
        assert!((north.expectation(&xz).unwrap().re - n as f64 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn spin_coherent_bloch_vector() {
        let n = 12;
        for &(theta, phi) in &[(0.3, 0.0), (1.2, 2.0), (2.9, 5.5), (PI / 2.0, PI / 2.0)] {
            let s = spin_coherent2(theta, phi, n).unwrap();
            let [xx, xy, xz] = su2_subalgebra(Subalgebra::ModeX, s.basis()).unwrap();
            let half = n as f64 / 2.0;
            let ex = s.expectation(&xx).unwrap().re;
            let ey = s.expectation(&xy).unwrap().re;
            let ez = s.expectation(&xz).unwrap().re;
            assert!((ex - half * theta.sin() * phi.cos()).abs() < 1e-10);
            assert!((ey - half * theta.sin() * phi.sin()).abs() < 1e-10);
            assert!((ez - half * theta.cos()).abs() < 1e-10);
            assert!((ex * ex + ey * ey + ez * ez - half * half).abs() < 1e-9);
        }
    }

    #[test]
    fn coherent3_agrees_with_spin_coherent_on_y_slice() {
        for n in [1, 4, 15] {
            for x in [0.0, 0.4, 1.0, 2.5] {
                let a = coherent3(x, 0.0, n).unwrap();
                let b = spin_coherent2(theta_of_x(x).unwrap(), 0.0, n).unwrap();
                assert!((a.amplitudes() - b.amplitudes()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn coherent3_has_zero_magnetization() {
        let n = 8;
        let s = coherent3(0.9, 0.0, n).unwrap();
        let circ = Arc::new(FockBasis::full(n, Convention::Circular));
        let c = convert_convention(&s, &circ).unwrap();
        let l = expr::l().build_hermitian(&circ).unwrap();
        assert!(c.expectation(&l).unwrap().norm() < 1e-12);
    }

    #[test]
    fn large_n_binomials_do_not_overflow() {
        let amps = spin_coherent_amplitudes(1.0, 0.0, 3000);
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn csv_round_trip() {
        let s = coherent3(0.7, -0.2, 4).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = QuantumState::read_csv(s.basis().clone(), buf.as_slice()).unwrap();
        assert!((back.amplitudes() - s.amplitudes()).norm() < 1e-15);
    }
}
