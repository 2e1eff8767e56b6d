//! Level sets of the two-mode energy density by marching squares on the
//! `(phi, z)` rectangle, periodic in `phi`.

use std::collections::HashMap;
use std::f64::consts::TAU;

use rayon::prelude::*;

use super::{classify, energy_density_2mode, minimum_energy, MeanFieldPoint, Trajectory};
use crate::error::{Error, Result};

/// Grid edge holding a crossing: `(i, j, vertical)`. A horizontal edge joins
/// `(i, j)` to `(i+1, j)`, a vertical one `(i, j)` to `(i, j+1)`.
type EdgeId = (usize, usize, bool);

fn gradient(phi: f64, z: f64, gamma: f64) -> (f64, f64) {
    let (s, c) = phi.sin_cos();
    let dz = -0.5 * (1.0 - gamma) + 2.0 * gamma * z * c * c;
    let dphi = 2.0 * gamma * (1.0 - z * z) * s * c;
    (dphi, dz)
}

/// Newton steps along the gradient onto `h = eta`.
fn project(mut phi: f64, mut z: f64, eta: f64, gamma: f64) -> (f64, f64) {
    for _ in 0..20 {
        let r = energy_density_2mode(MeanFieldPoint { phi, z }, gamma) - eta;
        if r.abs() < 1e-14 {
            break;
        }
        let (gp, gz) = gradient(phi, z, gamma);
        let g2 = gp * gp + gz * gz;
        if g2 < 1e-20 {
            break;
        }
        phi -= r * gp / g2;
        z = (z - r * gz / g2).clamp(-1.0, 1.0);
    }
    (phi.rem_euclid(TAU), z)
}

/// Contours `h = eta` on an `n_phi x n_z` vertex grid.
pub fn level_set(eta: f64, gamma: f64, n_phi: usize, n_z: usize) -> Result<Vec<Trajectory>> {
    if n_phi < 4 || n_z < 3 {
        return Err(Error::InvalidParameter {
            name: "resolution",
            reason: format!("grid {n_phi}x{n_z} is too coarse"),
        });
    }
    let lo = minimum_energy(gamma);
    if !(eta >= lo - 1e-12 && eta <= 1e-12) {
        return Err(Error::InvalidParameter {
            name: "eta",
            reason: format!("must lie in [{lo}, 0], got {eta}"),
        });
    }
    let kind = classify(eta, gamma);
    if eta >= -1e-12 {
        // maximum level: the z = -1 pole line (and, at gamma = 1, the cos(phi) = 0 meridians)
        let line = |f: &dyn Fn(f64) -> MeanFieldPoint| Trajectory {
            points: (0..=n_phi).map(|i| f(i as f64 / n_phi as f64)).collect(),
            energy: 0.0,
            kind,
        };
        let mut out = vec![line(&|s| MeanFieldPoint { phi: (s * TAU) % TAU, z: -1.0 })];
        if gamma == 1.0 {
            for phi in [0.5 * std::f64::consts::PI, 1.5 * std::f64::consts::PI] {
                out.push(line(&|s| MeanFieldPoint { phi, z: -1.0 + 2.0 * s }));
            }
        }
        return Ok(out);
    }

    let phi_at = |i: usize| TAU * (i % n_phi) as f64 / n_phi as f64;
    let z_at = |j: usize| -1.0 + 2.0 * j as f64 / (n_z - 1) as f64;
    let values: Vec<Vec<f64>> = (0..n_z)
        .into_par_iter()
        .map(|j| {
            (0..n_phi)
                .map(|i| energy_density_2mode(MeanFieldPoint { phi: phi_at(i), z: z_at(j) }, gamma))
                .collect()
        })
        .collect();
    let v = |i: usize, j: usize| values[j][i % n_phi];
    let above = |i: usize, j: usize| v(i, j) >= eta;

    let crossing = |e: EdgeId| -> (f64, f64) {
        let (i, j, vertical) = e;
        let (i2, j2) = if vertical { (i, j + 1) } else { (i + 1, j) };
        let (a, b) = (v(i, j), v(i2, j2));
        let t = if a == b { 0.5 } else { ((eta - a) / (b - a)).clamp(0.0, 1.0) };
        let phi = phi_at(i) + if vertical { 0.0 } else { t * TAU / n_phi as f64 };
        let z = z_at(j) + if vertical { t * (z_at(j + 1) - z_at(j)) } else { 0.0 };
        (phi, z)
    };

    // segments between edges of each cell
    let mut segments: Vec<(EdgeId, EdgeId)> = Vec::new();
    for j in 0..n_z - 1 {
        for i in 0..n_phi {
            let ip = (i + 1) % n_phi;
            let bottom: EdgeId = (i, j, false);
            let top: EdgeId = (i, j + 1, false);
            let left: EdgeId = (i, j, true);
            let right: EdgeId = (ip, j, true);
            let code = (above(i, j) as u8)
                | (above(ip, j) as u8) << 1
                | (above(ip, j + 1) as u8) << 2
                | (above(i, j + 1) as u8) << 3;
            let centre_above = 0.25 * (v(i, j) + v(ip, j) + v(ip, j + 1) + v(i, j + 1)) >= eta;
            match code {
                0 | 15 => {}
                1 | 14 => segments.push((left, bottom)),
                2 | 13 => segments.push((bottom, right)),
                3 | 12 => segments.push((left, right)),
                4 | 11 => segments.push((right, top)),
                6 | 9 => segments.push((bottom, top)),
                7 | 8 => segments.push((left, top)),
                5 => {
                    if centre_above {
                        segments.push((left, top));
                        segments.push((bottom, right));
                    } else {
                        segments.push((left, bottom));
                        segments.push((right, top));
                    }
                }
                10 => {
                    if centre_above {
                        segments.push((left, bottom));
                        segments.push((right, top));
                    } else {
                        segments.push((left, top));
                        segments.push((bottom, right));
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    // chain segments sharing an edge into polylines
    let mut by_edge: HashMap<EdgeId, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        by_edge.entry(*a).or_default().push(k);
        by_edge.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut curves = Vec::new();
    let walk = |start_seg: usize, from: EdgeId, used: &mut Vec<bool>| -> Vec<EdgeId> {
        let mut chain = vec![from];
        let mut seg = start_seg;
        let mut at = from;
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let next = if a == at { b } else { a };
            chain.push(next);
            at = next;
            match by_edge[&at].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => break,
            }
        }
        chain
    };
    // open curves start from edges touched by a single segment
    let mut starts: Vec<(EdgeId, usize)> = by_edge
        .iter()
        .filter(|(_, segs)| segs.len() == 1)
        .map(|(e, segs)| (*e, segs[0]))
        .collect();
    starts.sort();
    for (edge, seg) in starts {
        if !used[seg] {
            curves.push(walk(seg, edge, &mut used));
        }
    }
    for seg in 0..segments.len() {
        if !used[seg] {
            curves.push(walk(seg, segments[seg].0, &mut used));
        }
    }

    Ok(curves
        .into_iter()
        .map(|chain| Trajectory {
            points: chain
                .into_iter()
                .map(|e| {
                    let (phi, z) = crossing(e);
                    let (phi, z) = project(phi, z, eta, gamma);
                    MeanFieldPoint { phi, z }
                })
                .collect(),
            energy: eta,
            kind,
        })
        .collect())
}
