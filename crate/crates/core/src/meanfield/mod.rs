//! Classical (large-N) limit: energy densities, the linear/bent transition,
//! stationary points, the canonical flow on the mode-x Bloch sphere, its
//! level sets, and their image in the `(X, P_X)` plane.
//!
//! The flow is `phi' = dh/dz`, `z' = -dh/dphi`, which conserves `h`.

mod contour;
mod flow;

pub use contour::level_set;
pub use flow::{flow_rhs, integrate_flow, StepControl};

use std::f64::consts::{PI, TAU};
use std::io::Write;

use crate::error::{Error, Result};
use crate::numeric::{fmt_f64, golden_max, LogFactorial};

/// Critical control parameter of the linear/bent transition.
pub const GAMMA_C: f64 = 0.2;

/// Point on the mode-x Bloch sphere, `z = cos(theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldPoint {
    pub phi: f64,
    pub z: f64,
}

impl MeanFieldPoint {
    pub fn new(phi: f64, z: f64) -> Result<Self> {
        if !(0.0..TAU).contains(&phi) || !(-1.0..=1.0).contains(&z) {
            return Err(Error::InvalidParameter {
                name: "point",
                reason: format!("(phi, z) = ({phi}, {z}) outside [0, 2pi) x [-1, 1]"),
            });
        }
        Ok(MeanFieldPoint { phi, z })
    }

    /// Wrap `phi` into `[0, 2pi)`.
    pub fn wrapped(phi: f64, z: f64) -> Self {
        MeanFieldPoint {
            phi: phi.rem_euclid(TAU),
            z,
        }
    }

    pub fn theta(&self) -> f64 {
        self.z.clamp(-1.0, 1.0).acos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryKind {
    BelowSeparatrix,
    AboveSeparatrix,
    Separatrix,
}

impl TrajectoryKind {
    pub fn name(self) -> &'static str {
        match self {
            TrajectoryKind::BelowSeparatrix => "below_separatrix",
            TrajectoryKind::AboveSeparatrix => "above_separatrix",
            TrajectoryKind::Separatrix => "separatrix",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<MeanFieldPoint>,
    pub energy: f64,
    pub kind: TrajectoryKind,
}

/// Energy density of the U(3) coherent state at radius `r`.
pub fn energy_density_3mode(r: f64, gamma: f64) -> f64 {
    let r2 = r * r;
    let q = (1.0 - r2) / (1.0 + r2);
    -(1.0 - gamma) / (1.0 + r2) + gamma * q * q
}

/// Minimizing radius: 0 up to `GAMMA_C`, `sqrt((5 gamma - 1)/(3 gamma + 1))` above.
pub fn r_min(gamma: f64) -> f64 {
    if gamma <= GAMMA_C {
        0.0
    } else {
        ((5.0 * gamma - 1.0) / (3.0 * gamma + 1.0)).sqrt()
    }
}

/// `N r^2 / (1 + r^2)`, the vibron number of the coherent state.
pub fn coherent_vibron_number(r: f64, n: u32) -> f64 {
    n as f64 * r * r / (1.0 + r * r)
}

/// Two-mode energy density `-(1-gamma)(1+z)/2 - gamma (1-z^2) cos^2 phi`.
pub fn energy_density_2mode(p: MeanFieldPoint, gamma: f64) -> f64 {
    let c = p.phi.cos();
    -(1.0 - gamma) * 0.5 * (1.0 + p.z) - gamma * (1.0 - p.z * p.z) * c * c
}

/// Global minimum of the two-mode energy density.
pub fn minimum_energy(gamma: f64) -> f64 {
    if gamma <= GAMMA_C {
        -(1.0 - gamma)
    } else {
        -(3.0 * gamma + 1.0).powi(2) / (16.0 * gamma)
    }
}

/// Energy of the separatrix, `-(1 - gamma)`.
pub fn separatrix_energy(gamma: f64) -> f64 {
    -(1.0 - gamma)
}

/// Classify a level relative to the separatrix.
pub fn classify(eta: f64, gamma: f64) -> TrajectoryKind {
    let s = separatrix_energy(gamma);
    if (eta - s).abs() <= 1e-12 {
        TrajectoryKind::Separatrix
    } else if eta < s {
        TrajectoryKind::BelowSeparatrix
    } else {
        TrajectoryKind::AboveSeparatrix
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StationaryKind {
    /// `z = 1`, the all-in-mode-0 pole.
    Pole,
    /// `z = (1/gamma - 1)/4`, `cos(phi) = +-1`: the bent minima.
    BentMinimum,
    /// `cos(phi) = 0` at `gamma = 1`; one representative per meridian.
    Meridian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPoint {
    pub point: MeanFieldPoint,
    pub kind: StationaryKind,
    pub energy: f64,
}

/// Solutions of `(phi', z') = (0, 0)`; empty below `GAMMA_C`.
pub fn stationary_points(gamma: f64) -> Vec<StationaryPoint> {
    let mut out = Vec::new();
    if gamma < GAMMA_C {
        return out;
    }
    let mk = |phi: f64, z: f64, kind| {
        let point = MeanFieldPoint::wrapped(phi, z);
        StationaryPoint {
            point,
            kind,
            energy: energy_density_2mode(point, gamma),
        }
    };
    let c = ((1.0 / gamma - 1.0).sqrt() / 2.0).min(1.0);
    let a = c.acos();
    let mut phis = vec![a, TAU - a, PI - a, PI + a];
    phis.iter_mut().for_each(|p| *p = p.rem_euclid(TAU));
    phis.sort_by(f64::total_cmp);
    phis.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
    for phi in phis {
        out.push(mk(phi, 1.0, StationaryKind::Pole));
    }
    let zb = (1.0 / gamma - 1.0) / 4.0;
    out.push(mk(0.0, zb, StationaryKind::BentMinimum));
    out.push(mk(PI, zb, StationaryKind::BentMinimum));
    if gamma == 1.0 {
        for phi in [0.5 * PI, 1.5 * PI] {
            out.push(mk(phi, 0.0, StationaryKind::Meridian));
        }
    }
    out
}

/// Phase-space radius `tan(theta/2) sum_k sqrt(N-k) c_k^2(theta)` with
/// `c_k^2 = C(N,k) sin^{2k}(theta/2) cos^{2(N-k)}(theta/2)`, in log-space.
pub fn phase_space_radius(theta: f64, n: u32) -> f64 {
    if n == 0 || theta <= 0.0 || theta >= PI {
        return 0.0;
    }
    let (s, c) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    if s <= 0.0 || c <= 0.0 {
        return 0.0;
    }
    let lf = LogFactorial::new(n as usize);
    let (ls, lc) = (s.ln(), c.ln());
    let nn = n as usize;
    (0..nn)
        .map(|k| {
            let e = lf.binomial(nn, k) + (2 * k + 1) as f64 * ls + (2 * (nn - k) - 1) as f64 * lc;
            e.exp() * ((nn - k) as f64).sqrt()
        })
        .sum()
}

/// Argmax of [`phase_space_radius`] over `theta`.
pub fn theta_max(n: u32) -> f64 {
    golden_max(|t| phase_space_radius(t, n), 0.0, PI, 1e-10)
}

/// Map a Bloch-sphere path to `(X, P_X) = R(theta, N) (cos phi, sin phi)`.
/// Only meaningful for `theta` up to about [`theta_max`].
pub fn to_phase_space(points: &[MeanFieldPoint], n: u32) -> Vec<(f64, f64)> {
    points
        .iter()
        .map(|p| {
            let r = phase_space_radius(p.theta(), n);
            (r * p.phi.cos(), r * p.phi.sin())
        })
        .collect()
}

/// Default set of levels for plotting: evenly spaced between the minimum and
/// zero, plus the separatrix when it exists.
pub fn auto_levels(gamma: f64, count: usize) -> Vec<f64> {
    let lo = minimum_energy(gamma);
    let mut out: Vec<f64> = (1..=count)
        .map(|k| lo + (0.0 - lo) * k as f64 / (count + 1) as f64)
        .collect();
    if gamma > GAMMA_C {
        out.push(separatrix_energy(gamma));
    }
    out.sort_by(f64::total_cmp);
    out
}

/// CSV `phi,z,eta,kind,curve`.
pub fn write_trajectories_csv<W: Write>(curves: &[Trajectory], mut out: W) -> Result<()> {
    writeln!(out, "phi,z,eta,kind,curve")?;
    for (k, c) in curves.iter().enumerate() {
        for p in &c.points {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(p.phi),
                fmt_f64(p.z),
                fmt_f64(c.energy),
                c.kind.name(),
                k
            )?;
        }
    }
    Ok(())
}

/// CSV `X,P_X,eta,curve` of trajectories mapped to phase space.
pub fn write_phase_space_csv<W: Write>(curves: &[Trajectory], n: u32, mut out: W) -> Result<()> {
    writeln!(out, "X,P_X,eta,curve")?;
    for (k, c) in curves.iter().enumerate() {
        for (x, p) in to_phase_space(&c.points, n) {
            writeln!(out, "{},{},{},{}", fmt_f64(x), fmt_f64(p), fmt_f64(c.energy), k)?;
        }
    }
    Ok(())
}
