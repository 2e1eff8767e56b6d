//! Initial-state families and time-resolved snapshots on the full
//! Cartesian basis, the common input of the phase-space pictures.

use std::io::Write;
use std::sync::Arc;

use crate::basis::{convert_convention, project_two_mode, BlockFilter, Convention, FockBasis, Occupation};
use crate::dynamics::{check_times, Propagator};
use crate::error::{Error, Result};
use crate::model::{build, HamiltonianKind, ModelParams};
use crate::numeric::fmt_f64;
use crate::phasespace::quadrature_means_single;
use crate::states::{coherent3, spin_coherent2, QuantumState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    /// `|0, N, 0>`, all atoms in mode 0.
    Pole,
    /// Number-projected U(3) coherent state.
    Coherent { x: f64, y: f64 },
    /// Spin-coherent state of the x/0 subspace.
    SpinCoherent { theta: f64, phi: f64 },
}

impl InitialState {
    pub fn prepare(self, n: u32) -> Result<QuantumState> {
        match self {
            InitialState::Pole => {
                let basis = Arc::new(FockBasis::full(n, Convention::Cartesian));
                QuantumState::number_state(basis, Occupation::new(0, n, 0))
            }
            InitialState::Coherent { x, y } => coherent3(x, y, n),
            InitialState::SpinCoherent { theta, phi } => spin_coherent2(theta, phi, n),
        }
    }
}

/// Re-express a circular state, possibly on a magnetization block, on the
/// full Cartesian basis.
pub fn to_cartesian(state: &QuantumState) -> Result<QuantumState> {
    let src = state.basis();
    if src.convention() == Convention::Cartesian {
        return Ok(state.clone());
    }
    let n = src.total_n();
    let full = Arc::new(FockBasis::full(n, Convention::Circular));
    let embedded = if src.filter() == BlockFilter::Full {
        state.clone()
    } else {
        state.embed(&full)?
    };
    convert_convention(&embedded, &Arc::new(FockBasis::full(n, Convention::Cartesian)))
}

/// States at each of `times` on the full Cartesian basis.
///
/// The pole state under an l-conserving generator is propagated on the
/// zero-magnetization block and converted afterwards, which keeps
/// `N ~ 100` cheap. Everything else runs on the full Cartesian basis.
pub fn snapshots(
    kind: HamiltonianKind,
    params: &ModelParams,
    initial: InitialState,
    times: &[f64],
) -> Result<Vec<QuantumState>> {
    check_times(times)?;
    let n = params.n_total();
    let (basis, psi0) = if initial == InitialState::Pole && kind != HamiltonianKind::LowDepletion {
        let b = Arc::new(FockBasis::enumerate(n, Convention::Circular, BlockFilter::FixedL(0))?);
        let psi = QuantumState::number_state(b.clone(), Occupation::new(0, n, 0))?;
        (b, psi)
    } else {
        let psi = initial.prepare(n)?;
        (psi.basis().clone(), psi)
    };
    let h = build(kind, params, &basis)?;
    let prop = Propagator::new(&h, &psi0)?;
    let cols = prop.states_at(times);
    (0..times.len())
        .map(|k| {
            let s = QuantumState::new(basis.clone(), cols.column(k).into_owned())?;
            to_cartesian(&s)
        })
        .collect()
}

/// Quadrature means of the two-mode projection along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureRecord {
    pub t: f64,
    pub x_mean: f64,
    pub p_mean: f64,
    pub retained_weight: f64,
}

pub fn quadrature_series(
    kind: HamiltonianKind,
    params: &ModelParams,
    initial: InitialState,
    times: &[f64],
) -> Result<Vec<QuadratureRecord>> {
    let states = snapshots(kind, params, initial, times)?;
    times
        .iter()
        .zip(&states)
        .map(|(&t, s)| match project_two_mode(s) {
            Ok(p) => {
                let (x, pm) = quadrature_means_single(&p.amplitudes);
                Ok(QuadratureRecord {
                    t,
                    x_mean: x,
                    p_mean: pm,
                    retained_weight: p.retained_weight,
                })
            }
            Err(Error::SubspaceDepleted) => Ok(QuadratureRecord {
                t,
                x_mean: f64::NAN,
                p_mean: f64::NAN,
                retained_weight: 0.0,
            }),
            Err(e) => Err(e),
        })
        .collect()
}

/// CSV with columns `t,X_mean,P_mean,retained_weight`.
pub fn write_quadrature_csv<W: Write>(rows: &[QuadratureRecord], mut out: W) -> Result<()> {
    writeln!(out, "t,X_mean,P_mean,retained_weight")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(r.t),
            fmt_f64(r.x_mean),
            fmt_f64(r.p_mean),
            fmt_f64(r.retained_weight)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::uniform_times;

    #[test]
    fn block_and_full_snapshots_agree() {
        let params = ModelParams::new(0.4, 6).unwrap();
        let times = uniform_times(3.0, 7);
        let fast = snapshots(HamiltonianKind::SpinorRotated, &params, InitialState::Pole, &times).unwrap();
        let basis = Arc::new(FockBasis::full(6, Convention::Cartesian));
        let h = build(HamiltonianKind::SpinorRotated, &params, &basis).unwrap();
        let psi0 = InitialState::Pole.prepare(6).unwrap();
        let slow = crate::dynamics::evolve(&h, &psi0, &times).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            let overlap = a.inner(b).unwrap().norm();
            assert!((overlap - 1.0).abs() < 1e-10, "{overlap}");
        }
    }

    #[test]
    fn harmonic_quadratures_under_n0() {
        let params = ModelParams::new(0.0, 20).unwrap().with_alpha_n0(1.0);
        let times = uniform_times(2.0 * std::f64::consts::TAU, 41);
        let init = InitialState::SpinCoherent {
            theta: std::f64::consts::FRAC_PI_2,
            phi: 0.0,
        };
        let rows = quadrature_series(HamiltonianKind::N0Only, &params, init, &times).unwrap();
        let x0 = rows[0].x_mean;
        assert!(x0 > 1.0);
        for r in &rows {
            assert!((r.x_mean - x0 * r.t.cos()).abs() < 1e-10);
            assert!((r.p_mean + x0 * r.t.sin()).abs() < 1e-10);
            assert!((r.retained_weight - 1.0).abs() < 1e-12);
        }
    }
}
