//! Execution of a validated run, streaming CSV to a writer.

use std::io::Write;

use vibron_core::basis::project_two_mode;
use vibron_core::dynamics::{quench, sweep, write_sweep_csv, write_time_series_csv, QuenchConfig};
use vibron_core::meanfield::{auto_levels, level_set, write_phase_space_csv, write_trajectories_csv};
use vibron_core::model::{spectrum_scan, write_spectrum_csv, HamiltonianKind};
use vibron_core::phasespace::{wigner_planar, wigner_sphere, WignerKind};
use vibron_core::protocol::{quadrature_series, snapshots, write_quadrature_csv};
use vibron_core::Result;

use crate::config::{Levels, RunConfig};

pub fn execute<W: Write>(run: &RunConfig, out: W) -> Result<()> {
    match run {
        RunConfig::Spectrum(s) => {
            let cols = spectrum_scan(s.kind, &s.params, s.l, &s.gammas)?;
            write_spectrum_csv(&cols, out)
        }
        RunConfig::Meanfield(m) => {
            let levels = match &m.levels {
                Levels::Auto(count) => auto_levels(m.gamma, *count),
                Levels::Explicit(v) => v.clone(),
            };
            let mut curves = Vec::new();
            for eta in levels {
                curves.extend(level_set(eta, m.gamma, m.resolution, m.resolution)?);
            }
            match m.phase_space_n {
                Some(n) => write_phase_space_csv(&curves, n, out),
                None => write_trajectories_csv(&curves, out),
            }
        }
        RunConfig::Coherent(c) => {
            let rows = quadrature_series(c.kind, &c.params, c.initial, &c.times)?;
            write_quadrature_csv(&rows, out)
        }
        RunConfig::Quench(q) => {
            let cfg = QuenchConfig {
                params: q.params.clone(),
                kind: HamiltonianKind::SpinorRotated,
                times: q.times.clone(),
            };
            let series = quench(&cfg)?;
            write_time_series_csv(&series, out)
        }
        RunConfig::Wigner(w) => {
            let times = if w.time == 0.0 { vec![0.0] } else { vec![0.0, w.time] };
            let state = snapshots(w.kind, &w.params, w.initial, &times)?
                .pop()
                .expect("one snapshot per time");
            let proj = project_two_mode(&state)?;
            let (a0, a1) = w.axes;
            let grid = match w.picture {
                WignerKind::Planar => wigner_planar(&proj.amplitudes, a0, a1),
                WignerKind::Spherical => wigner_sphere(&proj.amplitudes, a0, a1)?,
            };
            let meta = [
                ("time", w.time),
                ("retained_weight", proj.retained_weight),
                ("coarse", if grid.coarse { 1.0 } else { 0.0 }),
            ];
            grid.write_csv_with_meta(&meta, out)
        }
        RunConfig::Sweep(s) => {
            let rows = sweep(&s.gammas, &s.ns, &s.times)?;
            write_sweep_csv(&rows, out)
        }
    }
}
