//! Quasiprobability distributions of the mode-x two-mode projection.
//!
//! Quadratures are `X = (a + a^dag)/2` and `P_X = (a - a^dag)/2i` with
//! `[X, P_X] = i/2`, so the vacuum has variance 1/4 and the planar Wigner
//! function is `W(alpha) = (2/pi) Tr[rho D(alpha) Pi D(alpha)^dag]`
//! with `alpha = X + i P_X` and `Pi` the parity.
//!
//! The spherical distribution is the Stratonovich-Weyl function of spin
//! `j = N/2` with `m = (n_0 - n_x)/2`, normalized so that `int W dOmega = 1`.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::basis::project_two_mode;
use crate::error::{Error, Result};
use crate::numeric::{fmt_f64, LogFactorial};
use crate::states::QuantumState;

/// `(<X>, <P_X>)` of a single-mode amplitude vector `psi[n]`, `n <= N`.
pub fn quadrature_means_single(psi: &[C64]) -> (f64, f64) {
    // <a> = sum_n sqrt(n+1) conj(psi_n) psi_{n+1}
    let a: C64 = psi
        .windows(2)
        .enumerate()
        .map(|(n, w)| ((n + 1) as f64).sqrt() * w[0].conj() * w[1])
        .sum();
    (a.re, a.im)
}

/// Quadrature means of a Cartesian state, taken on its renormalized
/// `n_y = 0` slice. Also returns the retained weight.
pub fn quadrature_means(state: &QuantumState) -> Result<((f64, f64), f64)> {
    let proj = project_two_mode(state)?;
    Ok((quadrature_means_single(&proj.amplitudes), proj.retained_weight))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WignerKind {
    Planar,
    Spherical,
}

impl WignerKind {
    pub fn name(self) -> &'static str {
        match self {
            WignerKind::Planar => "planar",
            WignerKind::Spherical => "spherical",
        }
    }
}

/// Inclusive uniform axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub len: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, len: usize) -> Result<Self> {
        if len < 2 || !(max > min) || !min.is_finite() || !max.is_finite() {
            return Err(Error::InvalidParameter {
                name: "axis",
                reason: format!("need len >= 2 and min < max, got [{min}, {max}] x {len}"),
            });
        }
        Ok(Axis { min, max, len })
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.len - 1) as f64
    }

    pub fn at(&self, i: usize) -> f64 {
        self.min + self.step() * i as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.at(i)).collect()
    }

    fn trapezoid(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.len {
            0.5 * self.step()
        } else {
            self.step()
        }
    }
}

/// Default Bloch-sphere sampling, 181 x 361 (one-degree cells).
pub fn default_sphere_axes() -> (Axis, Axis) {
    (
        Axis { min: 0.0, max: PI, len: 181 },
        Axis { min: 0.0, max: TAU, len: 361 },
    )
}

/// Values on a rectangular grid, row-major in `(axis0, axis1)`:
/// `(X, P_X)` for planar grids, `(theta, phi)` for spherical ones.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub kind: WignerKind,
    pub axis0: Axis,
    pub axis1: Axis,
    pub values: Vec<f64>,
    /// Planar step exceeds a quarter of the vacuum width.
    pub coarse: bool,
}

/// Largest planar step that resolves the vacuum (standard deviation 1/2).
pub const PLANAR_STEP_LIMIT: f64 = 0.125;

impl WignerGrid {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axis1.len + j]
    }

    /// Quadrature weight of grid point `(i, j)`, including `sin(theta)`
    /// on the sphere.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let w = self.axis0.trapezoid(i) * self.axis1.trapezoid(j);
        match self.kind {
            WignerKind::Planar => w,
            WignerKind::Spherical => w * self.axis0.at(i).sin(),
        }
    }

    fn weighted_sum(&self, f: impl Fn(usize, usize, f64) -> f64) -> f64 {
        (0..self.axis0.len)
            .flat_map(|i| (0..self.axis1.len).map(move |j| (i, j)))
            .map(|(i, j)| self.weight(i, j) * f(i, j, self.value(i, j)))
            .sum()
    }

    pub fn integral(&self) -> f64 {
        self.weighted_sum(|_, _, w| w)
    }

    /// `int |min(W, 0)|`.
    pub fn negativity_volume(&self) -> f64 {
        self.weighted_sum(|_, _, w| (-w).max(0.0))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Grid indices of the largest value.
    pub fn argmax(&self) -> (usize, usize) {
        let k = (0..self.values.len())
            .max_by(|&a, &b| self.values[a].total_cmp(&self.values[b]))
            .unwrap_or(0);
        (k / self.axis1.len, k % self.axis1.len)
    }

    /// First moments `(int x W, int p W) / int W` of a planar grid.
    pub fn centroid(&self) -> (f64, f64) {
        let z = self.integral();
        let x = self.weighted_sum(|i, _, w| self.axis0.at(i) * w);
        let p = self.weighted_sum(|_, j, w| self.axis1.at(j) * w);
        (x / z, p / z)
    }

    /// Header lines `kind,<kind>`, `axis0,<name>,<min>,<max>,<len>`,
    /// `axis1,...`, then one comma-separated line of values per `axis0` entry.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        self.write_csv_with_meta(&[], out)
    }

    /// As [`WignerGrid::write_csv`], with extra `name,value` lines after the
    /// axis headers.
    pub fn write_csv_with_meta<W: Write>(&self, meta: &[(&str, f64)], mut out: W) -> Result<()> {
        let (a, b) = match self.kind {
            WignerKind::Planar => ("X", "P_X"),
            WignerKind::Spherical => ("theta", "phi"),
        };
        writeln!(out, "kind,{}", self.kind.name())?;
        for (name, ax) in [(a, &self.axis0), (b, &self.axis1)] {
            let tag = if name == a { "axis0" } else { "axis1" };
            writeln!(out, "{tag},{name},{},{},{}", fmt_f64(ax.min), fmt_f64(ax.max), ax.len)?;
        }
        for (name, v) in meta {
            writeln!(out, "{name},{}", fmt_f64(*v))?;
        }
        for i in 0..self.axis0.len {
            let row: Vec<String> = (0..self.axis1.len).map(|j| fmt_f64(self.value(i, j))).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Normalized displacement kernels `f_n^(k)(y) = sqrt(n!/(n+k)!) y^{k/2}
/// e^{-y/2} L_n^(k)(y)` for `n + k < dim`, indexed `[k][n]`. Bounded by 1,
/// so the recurrence never overflows.
fn laguerre_kernels(y: f64, dim: usize, lf: &LogFactorial) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|k| {
            let len = dim - k;
            let mut f = vec![0.0; len];
            let log0 = if y > 0.0 {
                0.5 * k as f64 * y.ln() - 0.5 * y - 0.5 * lf.get(k)
            } else if k == 0 {
                0.0
            } else {
                f64::NEG_INFINITY
            };
            f[0] = log0.exp();
            for n in 0..len.saturating_sub(1) {
                let (nf, kf) = (n as f64, k as f64);
                let prev = if n > 0 { f[n - 1] } else { 0.0 };
                f[n + 1] = ((2.0 * nf + 1.0 + kf - y) * f[n] - (nf * (nf + kf)).sqrt() * prev)
                    / ((nf + 1.0) * (nf + kf + 1.0)).sqrt();
            }
            f
        })
        .collect()
}

fn planar_point(psi: &[C64], x: f64, p: f64, lf: &LogFactorial) -> f64 {
    let dim = psi.len();
    let y = 4.0 * (x * x + p * p);
    let theta = p.atan2(x);
    let f = laguerre_kernels(y, dim, lf);
    let sign = |n: usize| if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut w: f64 = (0..dim).map(|n| psi[n].norm_sqr() * sign(n) * f[0][n]).sum();
    for k in 1..dim {
        let phase = C64::from_polar(1.0, k as f64 * theta);
        let s: C64 = (0..dim - k)
            .map(|n| psi[n] * psi[n + k].conj() * (sign(n) * f[k][n]))
            .sum();
        w += 2.0 * (s * phase).re;
    }
    2.0 / PI * w
}

/// Planar Wigner function of a single-mode pure state on `x_axis x p_axis`.
pub fn wigner_planar(psi: &[C64], x_axis: Axis, p_axis: Axis) -> WignerGrid {
    let lf = LogFactorial::new(psi.len().max(1));
    let values: Vec<f64> = (0..x_axis.len)
        .into_par_iter()
        .flat_map_iter(|i| {
            let x = x_axis.at(i);
            let lf = &lf;
            (0..p_axis.len).map(move |j| planar_point(psi, x, p_axis.at(j), lf))
        })
        .collect();
    WignerGrid {
        kind: WignerKind::Planar,
        axis0: x_axis,
        axis1: p_axis,
        values,
        coarse: x_axis.step() > PLANAR_STEP_LIMIT || p_axis.step() > PLANAR_STEP_LIMIT,
    }
}

/// Planar Wigner function of a Cartesian state's renormalized two-mode
/// projection, with the retained weight.
pub fn wigner_planar_state(state: &QuantumState, x_axis: Axis, p_axis: Axis) -> Result<(WignerGrid, f64)> {
    let proj = project_two_mode(state)?;
    Ok((wigner_planar(&proj.amplitudes, x_axis, p_axis), proj.retained_weight))
}

/// Orthonormal polynomials in `m` on the nodes `m_n = j - n` with uniform
/// weight (Gram polynomials), as rows `g[k][n]`, leading coefficient
/// positive. Lanczos with full reorthogonalization.
fn gram_polynomials(dim: usize) -> Vec<Vec<f64>> {
    let j = (dim - 1) as f64 / 2.0;
    let nodes: Vec<f64> = (0..dim).map(|n| j - n as f64).collect();
    let mut q: Vec<Vec<f64>> = vec![vec![1.0 / (dim as f64).sqrt(); dim]];
    for k in 1..dim {
        let mut v: Vec<f64> = q[k - 1].iter().zip(&nodes).map(|(a, m)| a * m).collect();
        for _ in 0..2 {
            for prev in &q {
                let c: f64 = prev.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(prev).for_each(|(x, p)| *x -= c * p);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        q.push(v);
    }
    q
}

/// Diagonal of the Stratonovich-Weyl kernel at the north pole, indexed by
/// `n = j - m`.
fn sw_pole_kernel(dim: usize) -> Vec<f64> {
    let g = gram_polynomials(dim);
    let pre = ((dim as f64) / (4.0 * PI)).sqrt();
    (0..dim)
        .map(|n| {
            pre * (0..dim)
                .map(|k| ((2 * k + 1) as f64 / (4.0 * PI)).sqrt() * g[k][n])
                .sum::<f64>()
        })
        .collect()
}

/// `exp(-i theta J_y)` factory in the `n = j - m` ordering.
struct YRotation {
    vectors: DMatrix<C64>,
    values: Vec<f64>,
}

impl YRotation {
    fn new(dim: usize) -> Self {
        let j = (dim - 1) as f64 / 2.0;
        // J_+ |m> = sqrt((j-m)(j+m+1)) |m+1>; m+1 sits at index n-1
        let mut jy = DMatrix::<C64>::zeros(dim, dim);
        for n in 1..dim {
            let m = j - n as f64;
            let c = ((j - m) * (j + m + 1.0)).sqrt();
            // J_y = (J_+ - J_-)/2i
            jy[(n - 1, n)] = C64::new(0.0, -0.5 * c);
            jy[(n, n - 1)] = C64::new(0.0, 0.5 * c);
        }
        let eig = SymmetricEigen::new(jy);
        YRotation {
            vectors: eig.eigenvectors,
            values: eig.eigenvalues.iter().copied().collect(),
        }
    }

    /// `exp(i theta J_y)`.
    fn inverse(&self, theta: f64) -> DMatrix<C64> {
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&l| C64::from_polar(1.0, theta * l)),
        ));
        &self.vectors * d * self.vectors.adjoint()
    }
}

/// Spherical Wigner function of a density matrix on the two-mode basis
/// `|n_x>`, `n_x = 0..=N`.
pub fn wigner_sphere_density(rho: &DMatrix<C64>, theta_axis: Axis, phi_axis: Axis) -> Result<WignerGrid> {
    let dim = rho.nrows();
    if dim == 0 || rho.ncols() != dim {
        return Err(Error::InvalidParameter {
            name: "rho",
            reason: "density matrix must be square and non-empty".into(),
        });
    }
    let j = (dim - 1) as f64 / 2.0;
    let kernel = sw_pole_kernel(dim);
    let rot = YRotation::new(dim);
    let values: Vec<f64> = (0..theta_axis.len)
        .into_par_iter()
        .flat_map_iter(|i| {
            let u = rot.inverse(theta_axis.at(i));
            let kernel = &kernel;
            (0..phi_axis.len).map(move |k| {
                // R^dag = exp(i theta J_y) exp(i phi J_z), J_z = j - n
                let phi = phi_axis.at(k);
                let z = DVector::from_iterator(dim, (0..dim).map(|n| C64::from_polar(1.0, phi * (j - n as f64))));
                let r = DMatrix::from_fn(dim, dim, |a, b| u[(a, b)] * z[b]);
                let rotated = &r * rho * r.adjoint();
                (0..dim).map(|n| kernel[n] * rotated[(n, n)].re).sum()
            })
        })
        .collect();
    Ok(WignerGrid {
        kind: WignerKind::Spherical,
        axis0: theta_axis,
        axis1: phi_axis,
        values,
        coarse: false,
    })
}

/// Spherical Wigner function of a pure two-mode state `psi[n_x]`.
pub fn wigner_sphere(psi: &[C64], theta_axis: Axis, phi_axis: Axis) -> Result<WignerGrid> {
    let dim = psi.len();
    if dim == 0 {
        return Err(Error::InvalidParameter {
            name: "psi",
            reason: "empty state".into(),
        });
    }
    let j = (dim - 1) as f64 / 2.0;
    let kernel = sw_pole_kernel(dim);
    let rot = YRotation::new(dim);
    let values: Vec<f64> = (0..theta_axis.len)
        .into_par_iter()
        .flat_map_iter(|i| {
            let u = rot.inverse(theta_axis.at(i));
            let kernel = &kernel;
            (0..phi_axis.len).map(move |k| {
                let phi = phi_axis.at(k);
                let v = DVector::from_iterator(
                    dim,
                    (0..dim).map(|n| psi[n] * C64::from_polar(1.0, phi * (j - n as f64))),
                );
                let w = &u * v;
                (0..dim).map(|n| kernel[n] * w[n].norm_sqr()).sum()
            })
        })
        .collect();
    Ok(WignerGrid {
        kind: WignerKind::Spherical,
        axis0: theta_axis,
        axis1: phi_axis,
        values,
        coarse: false,
    })
}

/// `int |min(W, 0)|` over a grid with its quadrature weights.
pub fn negativity_volume(grid: &WignerGrid) -> f64 {
    grid.negativity_volume()
}
