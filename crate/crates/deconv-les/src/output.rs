//! Run outputs: legacy ASCII VTK snapshots, CSV histories and the run
//! manifest. Floats are written with the shortest round-trip formatting, so
//! reading a CSV back recovers the exact values and reruns are byte-stable.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::diag::vertical_profile;
use crate::error::{Error, Result};
use crate::field::{Loc, ScalarField, VelocityField};
use crate::grid::Grid;
use crate::scenario::{RunResult, Scenario, Snapshot};
use crate::stepper::SimState;

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(contents.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Velocity, pressure and the solid mask interpolated to grid nodes, as a
/// legacy ASCII VTK structured grid.
pub fn write_vtk(path: &Path, grid: &Grid, state: &SimState, title: &str) -> Result<()> {
    let (nx, nz) = (grid.nx, grid.nz);
    let npts = (nx + 1) * (nz + 1);
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(s, "{title}");
    s.push_str("ASCII\nDATASET STRUCTURED_GRID\n");
    let _ = writeln!(s, "DIMENSIONS {} {} 1", nx + 1, nz + 1);
    let _ = writeln!(s, "POINTS {npts} double");
    for j in 0..=nz {
        for i in 0..=nx {
            let x = i as f64 * grid.dx;
            let z = -grid.h + j as f64 * grid.dz;
            let _ = writeln!(s, "{x} {z} 0");
        }
    }
    let _ = writeln!(s, "POINT_DATA {npts}");
    s.push_str("VECTORS velocity double\n");
    for j in 0..=nz {
        for i in 0..=nx {
            // average the face values adjacent to the node
            let jl = j.saturating_sub(1).min(nz - 1);
            let jh = j.min(nz - 1);
            let u = 0.5 * (state.vel.u.at(i, jl) + state.vel.u.at(i, jh));
            let il = i.saturating_sub(1).min(nx - 1);
            let ih = i.min(nx - 1);
            let w = 0.5 * (state.vel.w.at(il, j) + state.vel.w.at(ih, j));
            let _ = writeln!(s, "{u} {w} 0");
        }
    }
    s.push_str("SCALARS pressure double 1\nLOOKUP_TABLE default\n");
    for j in 0..=nz {
        for i in 0..=nx {
            let mut acc = 0.0;
            let mut cnt = 0usize;
            for (ci, cj) in neighbors(i, j, nx, nz) {
                if grid.cell_is_fluid(ci, cj) {
                    acc += state.p.at(ci, cj);
                    cnt += 1;
                }
            }
            let p = if cnt > 0 { acc / cnt as f64 } else { 0.0 };
            let _ = writeln!(s, "{p}");
        }
    }
    s.push_str("SCALARS solid double 1\nLOOKUP_TABLE default\n");
    for j in 0..=nz {
        for i in 0..=nx {
            let nb = neighbors(i, j, nx, nz);
            let solid = nb.iter().filter(|&&(ci, cj)| !grid.cell_is_fluid(ci, cj)).count();
            let frac = solid as f64 / nb.len() as f64;
            let _ = writeln!(s, "{frac}");
        }
    }
    write_file(path, &s)
}

fn neighbors(i: usize, j: usize, nx: usize, nz: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(4);
    for ci in [i.wrapping_sub(1), i] {
        for cj in [j.wrapping_sub(1), j] {
            if ci < nx && cj < nz {
                out.push((ci, cj));
            }
        }
    }
    out
}

/// All snapshot fields as `time,field,i,j,value` rows; `field` is one of
/// `u`, `w`, `p`.
pub fn write_fields_csv(path: &Path, grid: &Grid, snapshots: &[Snapshot]) -> Result<()> {
    let mut s = String::from("time,field,i,j,value\n");
    for snap in snapshots {
        let t = snap.state.t;
        let (ni, nj) = snap.state.vel.u.dims();
        for j in 0..nj {
            for i in 0..ni {
                let _ = writeln!(s, "{t},u,{i},{j},{}", snap.state.vel.u.at(i, j));
            }
        }
        let (ni, nj) = snap.state.vel.w.dims();
        for j in 0..nj {
            for i in 0..ni {
                let _ = writeln!(s, "{t},w,{i},{j},{}", snap.state.vel.w.at(i, j));
            }
        }
        for j in 0..grid.nz {
            for i in 0..grid.nx {
                let _ = writeln!(s, "{t},p,{i},{j},{}", snap.state.p.at(i, j));
            }
        }
    }
    write_file(path, &s)
}

/// A field series read back from `fields.csv`.
#[derive(Clone, Debug)]
pub struct FieldSeries {
    pub nx: usize,
    pub nz: usize,
    pub times: Vec<f64>,
    pub velocities: Vec<VelocityField>,
    pub pressures: Vec<ScalarField>,
}

pub fn read_fields_csv(path: &Path) -> Result<FieldSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows: Vec<(f64, u8, usize, usize, f64)> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if ln == 0 {
            if line != "time,field,i,j,value" {
                return Err(Error::Config(format!(
                    "{}: unexpected header {line:?}",
                    path.display()
                )));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let bad = || Error::Config(format!("{}:{}: bad row {line:?}", path.display(), ln + 1));
        let t: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let field = match parts.next().ok_or_else(bad)? {
            "u" => 0u8,
            "w" => 1,
            "p" => 2,
            _ => return Err(bad()),
        };
        let i: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let j: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let v: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if parts.next().is_some() {
            return Err(bad());
        }
        rows.push((t, field, i, j, v));
    }
    // dims from the u block: i runs 0..=nx, j runs 0..nz
    let nx = rows
        .iter()
        .filter(|r| r.1 == 0)
        .map(|r| r.2)
        .max()
        .ok_or_else(|| Error::Config(format!("{}: no velocity rows", path.display())))?;
    let nz = rows.iter().filter(|r| r.1 == 0).map(|r| r.3).max().unwrap() + 1;
    let mut out = FieldSeries {
        nx,
        nz,
        times: Vec::new(),
        velocities: Vec::new(),
        pressures: Vec::new(),
    };
    for (t, field, i, j, v) in rows {
        if out.times.last() != Some(&t) {
            out.times.push(t);
            out.velocities.push(VelocityField::zeros(nx, nz));
            out.pressures.push(ScalarField::zeros(Loc::Center, nx, nz));
        }
        let vel = out.velocities.last_mut().unwrap();
        match field {
            0 => vel.u.set(i, j, v),
            1 => vel.w.set(i, j, v),
            _ => out.pressures.last_mut().unwrap().set(i, j, v),
        }
    }
    Ok(out)
}

/// Vertical profiles at the scenario's probe line, one per snapshot.
pub fn write_profiles_csv(
    path: &Path,
    grid: &Grid,
    snapshots: &[Snapshot],
    x: f64,
) -> Result<()> {
    let mut s = String::from("time,z,u,w\n");
    for snap in snapshots {
        for sample in vertical_profile(grid, &snap.state.vel, x) {
            let _ = writeln!(s, "{},{},{},{}", snap.state.t, sample.z, sample.u, sample.w);
        }
    }
    write_file(path, &s)
}

pub fn write_history_csv(path: &Path, name: &str, rows: &[(f64, f64)]) -> Result<()> {
    let mut s = format!("time,{name}\n");
    for (t, v) in rows {
        let _ = writeln!(s, "{t},{v}");
    }
    write_file(path, &s)
}

/// Write the run manifest: the scenario's own config plus an informational
/// `[run]` table. The manifest parses back to the same scenario.
pub fn write_manifest(path: &Path, sc: &Scenario, finished: bool) -> Result<()> {
    let mut text = sc.to_config_toml();
    text.push_str("\n[run]\n");
    let _ = writeln!(text, "finished = {finished}");
    let _ = writeln!(text, "steps = {}", sc.time.n_steps());
    let tags: Vec<String> = sc.models.iter().map(|m| format!("{:?}", m.tag())).collect();
    let _ = writeln!(text, "model_tags = [{}]", tags.join(", "));
    write_file(path, &text)
}

/// Write one model's outputs under `dir/<model tag>/`.
pub fn write_run_outputs(dir: &Path, sc: &Scenario, grid: &Grid, run: &RunResult) -> Result<()> {
    let sub = dir.join(run.model.tag());
    write_fields_csv(&sub.join("fields.csv"), grid, &run.snapshots)?;
    write_profiles_csv(&sub.join("profiles.csv"), grid, &run.snapshots, sc.profile_x)?;
    write_history_csv(&sub.join("energy.csv"), "energy", &run.energy)?;
    write_history_csv(&sub.join("residual.csv"), "residual", &run.residual)?;
    if let Some(last) = run.snapshots.last() {
        write_vtk(
            &sub.join("final.vtk"),
            grid,
            &last.state,
            &format!("{} {}", sc.name, run.model.tag()),
        )?;
    }
    Ok(())
}
