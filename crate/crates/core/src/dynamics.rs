//! Exact time evolution by spectral decomposition and the quench
//! observables: covariance of the mode-x spin in the xy plane, optimal
//! squeezing `xi^2`, optimal inverse Fisher information `zeta^2`, and the
//! max-difference witness `max_t (xi^2 - zeta^2)`.
//!
//! Quenches run on the zero-magnetization block. `X_x` and `X_y` move a
//! state into `l = +-1`, so second moments are inner products of those
//! images; the full basis is never materialized.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::algebra::{expr, su2_subalgebra, Subalgebra};
use crate::basis::{BlockFilter, Convention, FockBasis, Occupation};
use crate::error::{Error, Result};
use crate::model::{build, spectral_decomposition, HamiltonianKind, ModelParams, SpectralDecomposition};
use crate::numeric::fmt_f64;
use crate::sparse::SparseOperator;
use crate::states::QuantumState;

/// `|<X_z>|` below `SENTINEL_FRACTION * N` makes `xi^2` infinite.
pub const SENTINEL_FRACTION: f64 = 1e-8;

/// Time points evolved together in one dense product.
const CHUNK: usize = 256;

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() || times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::BadTimeGrid);
    }
    Ok(())
}

/// `n` evenly spaced points on `[0, t_max]`, both ends included.
pub fn uniform_times(t_max: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.0];
    }
    (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
}

/// Propagator `psi(t) = V exp(-i E t) V^dagger psi0` for one initial state.
pub struct Propagator {
    dec: SpectralDecomposition,
    coeffs: DVector<C64>,
}

impl Propagator {
    pub fn new(h: &SparseOperator, psi0: &QuantumState) -> Result<Self> {
        let dec = spectral_decomposition(h)?;
        Self::from_decomposition(dec, psi0)
    }

    pub fn from_decomposition(dec: SpectralDecomposition, psi0: &QuantumState) -> Result<Self> {
        if !dec.basis().same_space(psi0.basis()) {
            return Err(Error::BasisMismatch("initial state is not on the Hamiltonian's block".into()));
        }
        let coeffs = match dec.real_vectors() {
            Some(v) => {
                let re = v.tr_mul(&psi0.amplitudes().map(|a| a.re));
                let im = v.tr_mul(&psi0.amplitudes().map(|a| a.im));
                re.zip_map(&im, C64::new)
            }
            None => dec.complex_vectors().ad_mul(psi0.amplitudes()),
        };
        Ok(Propagator { dec, coeffs })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        self.dec.basis()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.dec.eigenvalues()
    }

    /// Columns `psi(t_k)` for a batch of times.
    pub fn states_at(&self, times: &[f64]) -> DMatrix<C64> {
        let e = self.dec.eigenvalues();
        let dim = e.len();
        let phased = DMatrix::from_fn(dim, times.len(), |k, j| {
            self.coeffs[k] * C64::from_polar(1.0, -e[k] * times[j])
        });
        match self.dec.real_vectors() {
            Some(v) => {
                let re = v * phased.map(|a| a.re);
                let im = v * phased.map(|a| a.im);
                re.zip_map(&im, C64::new)
            }
            None => self.dec.complex_vectors() * phased,
        }
    }
}

/// Exact evolution of `psi0` under `h` at each of `times`.
pub fn evolve(h: &SparseOperator, psi0: &QuantumState, times: &[f64]) -> Result<Vec<QuantumState>> {
    let prop = Propagator::new(h, psi0)?;
    let cols = prop.states_at(times);
    Ok((0..times.len())
        .map(|j| QuantumState::from_unchecked(prop.basis().clone(), cols.column(j).into_owned()))
        .collect())
}

/// Covariance `Sigma_ij = 2 <{X_i, X_j}>/N` of the mode-x spin in the xy
/// plane, with its eigenvalues `lambda_- <= lambda_+` and the eigenvector of
/// each (the optimal directions).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Covariance {
    pub matrix: [[f64; 2]; 2],
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub dir_minus: [f64; 2],
    pub dir_plus: [f64; 2],
}

impl Covariance {
    /// From the second moments `<X_x^2>`, `<X_y^2>` and `Re <X_x X_y>`.
    pub fn from_moments(xx: f64, yy: f64, xy: f64, n: u32) -> Self {
        let s = 4.0 / n as f64;
        let (a, b, c) = (s * xx, s * yy, s * xy);
        let mean = 0.5 * (a + b);
        let rad = (0.25 * (a - b) * (a - b) + c * c).sqrt();
        let (lm, lp) = (mean - rad, mean + rad);
        let dir = |lam: f64| -> [f64; 2] {
            let (u, v) = if c.abs() > 1e-300 {
                (c, lam - a)
            } else if (lam - a).abs() <= (lam - b).abs() {
                (1.0, 0.0)
            } else {
                (0.0, 1.0)
            };
            let r = u.hypot(v);
            [u / r, v / r]
        };
        Covariance {
            matrix: [[a, c], [c, b]],
            lambda_minus: lm,
            lambda_plus: lp,
            dir_minus: dir(lm),
            dir_plus: dir(lp),
        }
    }
}

/// `xi^2_opt = N^2 lambda_- / (4 <X_z>^2)` and `zeta^2_opt = 1/lambda_+`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Criteria {
    pub xi2: f64,
    pub zeta2: f64,
    /// `<X_z>` fell below the sentinel threshold; `xi2` is `+inf`.
    pub sentinel: bool,
}

pub fn criteria_from(cov: &Covariance, xz: f64, n: u32) -> Criteria {
    let nf = n as f64;
    let sentinel = xz.abs() < SENTINEL_FRACTION * nf;
    let xi2 = if sentinel {
        f64::INFINITY
    } else {
        nf * nf * cov.lambda_minus / (4.0 * xz * xz)
    };
    Criteria {
        xi2,
        zeta2: 1.0 / cov.lambda_plus,
        sentinel,
    }
}

/// Operators needed for one time-series row, tabulated once per basis.
pub struct Observables {
    basis: Arc<FockBasis>,
    h: SparseOperator,
    xx: SparseOperator,
    xy: SparseOperator,
    xz: SparseOperator,
    jz: SparseOperator,
}

impl Observables {
    /// On a circular magnetization block or the full Cartesian basis.
    pub fn new(h: SparseOperator) -> Result<Self> {
        let basis = h.domain().clone();
        if matches!(basis.filter(), BlockFilter::Excitations(_)) {
            return Err(Error::BasisMismatch("quench observables need a number-conserving block".into()));
        }
        let [xx, xy, xz_wide] = su2_subalgebra(Subalgebra::ModeX, &basis)?;
        if !xx.codomain().same_space(xy.codomain()) {
            return Err(Error::BasisMismatch("X_x and X_y images differ".into()));
        }
        // X_z couples l to l +- 2; only the diagonal block enters <X_z>
        let xz = xz_wide.restrict(&basis, f64::INFINITY)?;
        let jz = expr::jz().build(&basis, &basis)?;
        Ok(Observables { basis, h, xx, xy, xz, jz })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn hamiltonian(&self) -> &SparseOperator {
        &self.h
    }

    /// Covariance and `<X_z>` of a (normalized) amplitude vector.
    pub fn covariance(&self, psi: &[C64]) -> (Covariance, f64) {
        let n = self.basis.total_n();
        let fx = self.xx.apply(psi);
        let fy = self.xy.apply(psi);
        let dot = |a: &[C64], b: &[C64]| -> C64 { a.iter().zip(b).map(|(u, v)| u.conj() * v).sum() };
        let cov = Covariance::from_moments(dot(&fx, &fx).re, dot(&fy, &fy).re, dot(&fx, &fy).re, n);
        (cov, self.xz.expectation(psi).re)
    }

    pub fn record(&self, t: f64, psi: &[C64]) -> TimeRecord {
        let n = self.basis.total_n();
        let (cov, xz) = self.covariance(psi);
        let crit = criteria_from(&cov, xz, n);
        TimeRecord {
            t,
            xz_mean: xz,
            lambda_minus: cov.lambda_minus,
            lambda_plus: cov.lambda_plus,
            xi2_opt: crit.xi2,
            zeta2_opt: crit.zeta2,
            energy: self.h.expectation(psi).re,
            norm: psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt(),
            jz_mean: self.jz.expectation(psi).re,
            sentinel: crit.sentinel,
        }
    }
}

/// Covariance of any state on a circular block or the full Cartesian basis.
pub fn covariance_xy(psi: &QuantumState) -> Result<(Covariance, f64)> {
    let basis = psi.basis().clone();
    let [xx, xy, xz] = su2_subalgebra(Subalgebra::ModeX, &basis)?;
    let fx = xx.apply(psi.amplitudes().as_slice());
    let fy = xy.apply(psi.amplitudes().as_slice());
    let dot = |a: &[C64], b: &[C64]| -> C64 { a.iter().zip(b).map(|(u, v)| u.conj() * v).sum() };
    let cov = Covariance::from_moments(dot(&fx, &fx).re, dot(&fy, &fy).re, dot(&fx, &fy).re, basis.total_n());
    Ok((cov, xz.expectation(psi.amplitudes().as_slice()).re))
}

pub fn entanglement_criteria(psi: &QuantumState) -> Result<Criteria> {
    let (cov, xz) = covariance_xy(psi)?;
    Ok(criteria_from(&cov, xz, psi.basis().total_n()))
}

/// One row of a quench time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeRecord {
    pub t: f64,
    pub xz_mean: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub xi2_opt: f64,
    pub zeta2_opt: f64,
    pub energy: f64,
    pub norm: f64,
    pub jz_mean: f64,
    pub sentinel: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub n_total: u32,
    pub records: Vec<TimeRecord>,
}

impl TimeSeries {
    pub fn column(&self, f: impl Fn(&TimeRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }

    /// Largest deviation of a column from its value at `t = 0`.
    pub fn drift(&self, f: impl Fn(&TimeRecord) -> f64) -> f64 {
        let first = f(&self.records[0]);
        self.records.iter().map(|r| (f(r) - first).abs()).fold(0.0, f64::max)
    }
}

/// Evolve `psi0` under the observables' Hamiltonian and record every time.
pub fn run_series(obs: &Observables, psi0: &QuantumState, times: &[f64]) -> Result<TimeSeries> {
    check_times(times)?;
    let prop = Propagator::new(obs.hamiltonian(), psi0)?;
    let records = times
        .par_chunks(CHUNK)
        .flat_map_iter(|chunk| {
            let cols = prop.states_at(chunk);
            chunk
                .iter()
                .enumerate()
                .map(|(j, &t)| obs.record(t, cols.column(j).as_slice()))
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(TimeSeries {
        n_total: obs.basis().total_n(),
        records,
    })
}

/// A quench from `|0, N, 0>`.
#[derive(Debug, Clone)]
pub struct QuenchConfig {
    pub params: ModelParams,
    pub kind: HamiltonianKind,
    pub times: Vec<f64>,
}

impl QuenchConfig {
    /// The spinor generator in units of `t0`, sampled uniformly on `[0, t_max]`.
    pub fn spinor(gamma: f64, n: u32, t_max: f64, points: usize) -> Result<Self> {
        Ok(QuenchConfig {
            params: ModelParams::new(gamma, n)?,
            kind: HamiltonianKind::SpinorRotated,
            times: uniform_times(t_max, points),
        })
    }
}

fn zero_block(n: u32) -> Result<Arc<FockBasis>> {
    Ok(Arc::new(FockBasis::enumerate(n, Convention::Circular, BlockFilter::FixedL(0))?))
}

/// Quench on the zero-magnetization block.
pub fn quench(config: &QuenchConfig) -> Result<TimeSeries> {
    check_times(&config.times)?;
    let n = config.params.n_total();
    let basis = zero_block(n)?;
    let h = build(config.kind, &config.params, &basis)?;
    let obs = Observables::new(h)?;
    let psi0 = QuantumState::number_state(basis, Occupation::new(0, n, 0))?;
    run_series(&obs, &psi0, &config.times)
}

/// The same quench on the full Cartesian basis, with every operator built
/// natively there. Only for small `N`; used as an oracle.
pub fn quench_full_basis(config: &QuenchConfig) -> Result<TimeSeries> {
    check_times(&config.times)?;
    let n = config.params.n_total();
    let basis = Arc::new(FockBasis::full(n, Convention::Cartesian));
    let h = build(config.kind, &config.params, &basis)?;
    let obs = Observables::new(h)?;
    let psi0 = QuantumState::number_state(basis, Occupation::new(0, n, 0))?;
    run_series(&obs, &psi0, &config.times)
}

/// `max_t (xi^2 - zeta^2)` over the non-sentinel rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxGap {
    pub value: f64,
    pub t: f64,
    pub sentinel_count: usize,
}

pub fn max_gap(series: &TimeSeries) -> Result<MaxGap> {
    let sentinel_count = series.records.iter().filter(|r| r.sentinel).count();
    series
        .records
        .iter()
        .filter(|r| !r.sentinel)
        .map(|r| (r.xi2_opt - r.zeta2_opt, r.t))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(value, t)| MaxGap {
            value,
            t,
            sentinel_count,
        })
        .ok_or(Error::AllSentinel)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub gamma: f64,
    pub n_total: u32,
    pub max_gap: f64,
    pub sentinel_count: usize,
}

/// `max_gap` of the spinor quench for every `(gamma, N)` pair, on the
/// ambient rayon pool. Rows come out ordered by `N`, then `gamma`.
pub fn sweep(gammas: &[f64], ns: &[u32], times: &[f64]) -> Result<Vec<SweepRow>> {
    check_times(times)?;
    let cells: Vec<(u32, f64)> = ns.iter().flat_map(|&n| gammas.iter().map(move |&g| (n, g))).collect();
    cells
        .par_iter()
        .map(|&(n, g)| {
            let cfg = QuenchConfig {
                params: ModelParams::new(g, n)?,
                kind: HamiltonianKind::SpinorRotated,
                times: times.to_vec(),
            };
            let gap = max_gap(&quench(&cfg)?)?;
            Ok(SweepRow {
                gamma: g,
                n_total: n,
                max_gap: gap.value,
                sentinel_count: gap.sentinel_count,
            })
        })
        .collect()
}

/// CSV `t,Xz_mean,lambda_minus,lambda_plus,xi2_opt,zeta2_opt,energy,norm,Jz_mean,sentinel_flag`.
pub fn write_time_series_csv<W: Write>(series: &TimeSeries, mut out: W) -> Result<()> {
    writeln!(
        out,
        "t,Xz_mean,lambda_minus,lambda_plus,xi2_opt,zeta2_opt,energy,norm,Jz_mean,sentinel_flag"
    )?;
    for r in &series.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(r.t),
            fmt_f64(r.xz_mean),
            fmt_f64(r.lambda_minus),
            fmt_f64(r.lambda_plus),
            fmt_f64(r.xi2_opt),
            fmt_f64(r.zeta2_opt),
            fmt_f64(r.energy),
            fmt_f64(r.norm),
            fmt_f64(r.jz_mean),
            r.sentinel as u8
        )?;
    }
    Ok(())
}

/// CSV `gamma,N,max_gap,sentinel_count`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "gamma,N,max_gap,sentinel_count")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", fmt_f64(r.gamma), r.n_total, fmt_f64(r.max_gap), r.sentinel_count)?;
    }
    Ok(())
}

/// `<N_x>(t)` of the low-depletion generator `-2 N_x + tau_x^2 + tau_x^dag^2`
/// started from the vacuum. The generator sits exactly at the stability
/// boundary, so `X + X^dag` grows linearly and `<N_x> = 4 t^2`.
pub fn low_depletion_nx(t: f64) -> f64 {
    4.0 * t * t
}

/// `<N_x>(t)` when `a0 -> sqrt(N)` is applied to the full quench generator
/// without discarding the Zeeman term. Per mode this leaves
/// `d N_x + tau_x^2 + tau_x^dag^2` with `d = (1 - gamma)/gamma - 2`, and from
/// the vacuum `<N_x> = 4 sinh^2(w t) / w^2`, `w^2 = 4 - d^2`. The growth is
/// polynomial at `gamma = 0.2` and `gamma = 1`, oscillatory below 0.2.
pub fn low_depletion_nx_detuned(t: f64, gamma: f64) -> f64 {
    let d = (1.0 - gamma) / gamma - 2.0;
    let w2 = 4.0 - d * d;
    if w2.abs() < 1e-12 {
        return low_depletion_nx(t);
    }
    let w = w2.abs().sqrt();
    let s = if w2 > 0.0 { (w * t).sinh() } else { (w * t).sin() };
    4.0 * s * s / w2.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::spin_coherent2;

    #[test]
    fn low_depletion_population_matches_truncated_evolution() {
        use crate::algebra::{Mode, OpExpr};
        use crate::model::low_depletion_parts;

        let basis = Arc::new(FockBasis::enumerate(60, Convention::Cartesian, BlockFilter::Excitations(28)).unwrap());
        let (hx, _) = low_depletion_parts(&basis).unwrap();
        let nx = OpExpr::number(Mode::X).build_hermitian(&basis).unwrap();
        let vac = QuantumState::number_state(basis.clone(), Occupation::new(0, 60, 0)).unwrap();
        let times = [0.0, 0.1, 0.2, 0.3];
        for gamma in [0.1, 0.2, 0.3, 0.6, 1.0] {
            let d = (1.0 - gamma) / gamma - 2.0;
            let h = hx.lin_comb(C64::new(1.0, 0.0), &nx, C64::new(d + 2.0, 0.0)).unwrap();
            let states = Propagator::new(&h, &vac).unwrap().states_at(&times);
            for (k, &t) in times.iter().enumerate() {
                let col: Vec<C64> = states.column(k).iter().copied().collect();
                let got = nx.expectation(&col).re;
                assert!((got - low_depletion_nx_detuned(t, gamma)).abs() < 1e-8, "gamma {gamma} t {t}: {got}");
            }
        }
        // the Zeeman term cancels the -2 N_x detuning only at gamma = 1
        assert_eq!(low_depletion_nx_detuned(0.4, 1.0), low_depletion_nx(0.4));
        assert_eq!(low_depletion_nx_detuned(0.4, 0.2), low_depletion_nx(0.4));
    }

    #[test]
    fn bad_time_grids_are_rejected() {
        assert!(check_times(&[]).is_err());
        assert!(check_times(&[0.1, 0.2]).is_err());
        assert!(check_times(&[0.0, 0.2, 0.2]).is_err());
        assert!(check_times(&[0.0, 1.0]).is_ok());
    }

    #[test]
    fn covariance_of_pure_zero_state_is_identity() {
        for n in [1, 4, 9] {
            let basis = zero_block(n).unwrap();
            let psi = QuantumState::number_state(basis, Occupation::new(0, n, 0)).unwrap();
            let (cov, xz) = covariance_xy(&psi).unwrap();
            assert!((cov.matrix[0][0] - 1.0).abs() < 1e-14);
            assert!((cov.matrix[1][1] - 1.0).abs() < 1e-14);
            assert!(cov.matrix[0][1].abs() < 1e-14);
            assert!((cov.matrix[0][0] + cov.matrix[1][1] - 2.0).abs() < 1e-14);
            assert!((xz - n as f64 / 2.0).abs() < 1e-14);
            let c = entanglement_criteria(&psi).unwrap();
            assert!((c.xi2 - 1.0).abs() < 1e-14 && (c.zeta2 - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn covariance_eigen_directions() {
        let c = Covariance::from_moments(1.0, 3.0, 0.5, 4);
        assert!(c.lambda_minus <= c.lambda_plus);
        let m = c.matrix;
        for (lam, d) in [(c.lambda_minus, c.dir_minus), (c.lambda_plus, c.dir_plus)] {
            let r0 = m[0][0] * d[0] + m[0][1] * d[1] - lam * d[0];
            let r1 = m[1][0] * d[0] + m[1][1] * d[1] - lam * d[1];
            assert!(r0.abs() + r1.abs() < 1e-12);
        }
    }

    #[test]
    fn sentinel_gives_infinite_xi() {
        let cov = Covariance::from_moments(1.0, 1.0, 0.0, 10);
        let c = criteria_from(&cov, 1e-9, 10);
        assert!(c.sentinel && c.xi2.is_infinite());
    }

    #[test]
    fn evolution_at_zero_time_is_identity() {
        let p = ModelParams::new(0.4, 6).unwrap();
        let basis = Arc::new(FockBasis::full(6, Convention::Cartesian));
        let h = build(HamiltonianKind::SpinorRotated, &p, &basis).unwrap();
        let psi0 = spin_coherent2(0.7, 1.1, 6).unwrap();
        let out = evolve(&h, &psi0, &[0.0, 0.5]).unwrap();
        assert!((out[0].amplitudes() - psi0.amplitudes()).norm() < 1e-14);
        assert!((out[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn n0_only_evolution_is_a_phase_per_n0() {
        let n = 5;
        let basis = Arc::new(FockBasis::full(n, Convention::Cartesian));
        let p = ModelParams::new(0.0, n).unwrap();
        let h = build(HamiltonianKind::N0Only, &p, &basis).unwrap();
        let psi0 = spin_coherent2(1.0, 0.0, n).unwrap();
        let t = 0.8;
        let out = evolve(&h, &psi0, &[0.0, t]).unwrap();
        for (i, occ) in basis.states().iter().enumerate() {
            let want = psi0.amplitudes()[i] * C64::from_polar(1.0, occ.zero() as f64 * t);
            assert!((out[1].amplitudes()[i] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn quench_t0_row() {
        let cfg = QuenchConfig::spinor(0.3, 40, 5.0, 11).unwrap();
        let s = quench(&cfg).unwrap();
        let r = s.records[0];
        assert!((r.xi2_opt - 1.0).abs() < 1e-12 && (r.zeta2_opt - 1.0).abs() < 1e-12);
        // <0,N,0| H |0,N,0> = -(1-g)/g N - 2N/N
        let want = -(0.7 / 0.3) * 40.0 - 2.0;
        assert!((r.energy - want).abs() < 1e-10);
        for r in &s.records {
            assert!(r.zeta2_opt >= 1.0 / 40.0 - 1e-9);
            assert!(r.zeta2_opt <= r.xi2_opt + 1e-9);
        }
    }

    #[test]
    fn block_and_full_pipelines_agree() {
        let cfg = QuenchConfig::spinor(0.35, 6, 20.0, 41).unwrap();
        let a = quench(&cfg).unwrap();
        let b = quench_full_basis(&cfg).unwrap();
        for (x, y) in a.records.iter().zip(&b.records) {
            assert!((x.xz_mean - y.xz_mean).abs() < 1e-10);
            assert!((x.lambda_minus - y.lambda_minus).abs() < 1e-10);
            assert!((x.lambda_plus - y.lambda_plus).abs() < 1e-10);
            assert!((x.energy - y.energy).abs() < 1e-10);
            assert!(y.jz_mean.abs() < 1e-10);
        }
    }

    #[test]
    fn max_gap_of_identical_curves_is_zero() {
        let rec = |t, v| TimeRecord {
            t,
            xz_mean: 1.0,
            lambda_minus: 1.0,
            lambda_plus: 1.0,
            xi2_opt: v,
            zeta2_opt: v,
            energy: 0.0,
            norm: 1.0,
            jz_mean: 0.0,
            sentinel: false,
        };
        let s = TimeSeries {
            n_total: 2,
            records: vec![rec(0.0, 1.0), rec(1.0, 0.5)],
        };
        assert_eq!(max_gap(&s).unwrap().value, 0.0);
        let mut all = s.clone();
        all.records.iter_mut().for_each(|r| r.sentinel = true);
        assert!(matches!(max_gap(&all), Err(Error::AllSentinel)));
    }

    #[test]
    fn single_cell_sweep_matches_direct_quench() {
        let times = uniform_times(10.0, 101);
        let rows = sweep(&[0.25], &[30], &times).unwrap();
        let cfg = QuenchConfig {
            params: ModelParams::new(0.25, 30).unwrap(),
            kind: HamiltonianKind::SpinorRotated,
            times,
        };
        assert_eq!(rows[0].max_gap, max_gap(&quench(&cfg).unwrap()).unwrap().value);
    }

    #[test]
    fn time_series_csv_header() {
        let cfg = QuenchConfig::spinor(0.3, 4, 1.0, 3).unwrap();
        let mut buf = Vec::new();
        write_time_series_csv(&quench(&cfg).unwrap(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("t,Xz_mean,"));
    }
}
