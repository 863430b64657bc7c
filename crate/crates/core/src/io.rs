//! Artifact files. Tables are CSV; files that must identify their origin
//! start with one JSON header line carrying the spec hash.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::certify::{CertificationReport, SideReport};
use crate::analysis::spread::SpreadingRun;
use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::renorm::WaveProfile;
use crate::solver::{CauchyRun, Field, FreeBoundaryTrace, Grid1D, Trajectory};
use crate::waves::{CompactPtw, PhaseSample, SpreadingVerdict};

fn csv_err(e: csv::Error) -> Error {
    Error::Data(format!("csv: {e}"))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes `rows` as CSV under `columns`, optionally after a JSON header line.
pub fn write_table<W: Write, R: Serialize>(
    mut out: W,
    header: Option<&Value>,
    columns: &[&str],
    rows: impl IntoIterator<Item = R>,
) -> Result<()> {
    if let Some(h) = header {
        serde_json::to_writer(&mut out, h)?;
        out.write_all(b"\n")?;
    }
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(columns).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Splits off the JSON header line and parses the remaining CSV rows.
pub fn read_table<R: Read, T: for<'de> Deserialize<'de>>(
    input: R,
    with_header: bool,
) -> Result<(Value, Vec<T>)> {
    let mut buf = BufReader::new(input);
    let mut header = Value::Null;
    if with_header {
        let mut line = String::new();
        buf.read_line(&mut line)?;
        header = serde_json::from_str(&line)?;
    }
    let mut r = csv::Reader::from_reader(buf);
    let rows = r
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(csv_err)?;
    Ok((header, rows))
}

fn header_hash(h: &Value) -> Result<String> {
    h.get("spec_hash")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| Error::Data("artifact header has no spec_hash".into()))
}

/// Snapshots with the support and one empty cell on each side; the header
/// stores the grid and every snapshot time.
pub fn write_snapshots<W: Write>(
    out: W,
    spec: &ProblemSpec,
    traj: &Trajectory,
    spec_hash: &str,
    extra: Value,
) -> Result<()> {
    let grid = traj
        .snapshots
        .first()
        .map(|f| f.grid)
        .ok_or_else(|| Error::Data("empty trajectory".into()))?;
    let header = json!({
        "grid": grid,
        "spec_hash": spec_hash,
        "times": traj.times(),
        "config": extra,
    });
    let mut rows = Vec::new();
    for f in &traj.snapshots {
        if f.grid != grid {
            return Err(Error::Data("snapshots on different grids".into()));
        }
        if let Some((lo, hi)) = f.support(0.0) {
            for i in lo.saturating_sub(1)..(hi + 2).min(grid.n_cells) {
                rows.push((f.t, grid.x(i), f.u[i], spec.pressure(f.u[i])));
            }
        }
    }
    write_table(out, Some(&header), &["t", "x", "u", "v"], rows)
}

pub fn read_snapshots<R: Read>(input: R) -> Result<(Value, Trajectory)> {
    let (header, rows): (Value, Vec<(f64, f64, f64, f64)>) = read_table(input, true)?;
    let grid: Grid1D = serde_json::from_value(header["grid"].clone())?;
    let times: Vec<f64> = serde_json::from_value(header["times"].clone())?;
    let mut snapshots: Vec<Field> = times.iter().map(|&t| Field::zeros(grid, t)).collect();
    let mut k = 0;
    for (t, x, u, _) in rows {
        while k < snapshots.len() && snapshots[k].t != t {
            k += 1;
        }
        let i = ((x - grid.x0) / grid.dx - 0.5).round();
        if k == snapshots.len() || i < 0.0 || i as usize >= grid.n_cells {
            return Err(Error::Data(format!(
                "snapshot row (t = {t}, x = {x}) does not match the header"
            )));
        }
        snapshots[k].u[i as usize] = u;
    }
    Ok((header, Trajectory { snapshots }))
}

pub fn write_trace<W: Write>(out: W, trace: &FreeBoundaryTrace) -> Result<()> {
    let rows = (0..trace.len()).map(|i| {
        (
            trace.t[i],
            trace.l[i],
            trace.r[i],
            trace.rprime[i],
            trace.darcy_residual[i],
        )
    });
    write_table(
        out,
        None,
        &["t", "l", "r", "rprime", "darcy_residual"],
        rows,
    )
}

/// The pressure slopes are not stored; they come back as NaN.
pub fn read_trace<R: Read>(input: R) -> Result<FreeBoundaryTrace> {
    let (_, rows): (Value, Vec<[f64; 5]>) = read_table(input, false)?;
    let mut tr = FreeBoundaryTrace::default();
    for [t, l, r, rp, d] in rows {
        tr.push_both(t, l, r, f64::NAN, f64::NAN, false);
        tr.rprime.push(rp);
        tr.darcy_residual.push(d);
    }
    Ok(tr)
}

/// A spreading run as `snapshots.csv` plus `trace.csv` in `dir`.
pub fn save_spreading(
    dir: &Path,
    spec: &ProblemSpec,
    sr: &SpreadingRun,
    spec_hash: &str,
    config: Value,
) -> Result<()> {
    let extra = json!({"cells_per_period": sr.cells_per_period, "verdict": sr.verdict, "steps": sr.run.steps, "run": config});
    write_snapshots(
        create(&dir.join("snapshots.csv"))?,
        spec,
        &sr.run.trajectory,
        spec_hash,
        extra,
    )?;
    write_trace(create(&dir.join("trace.csv"))?, &sr.run.trace)
}

/// Inverse of [`save_spreading`], returning the stored spec hash.
pub fn load_spreading(dir: &Path) -> Result<(String, SpreadingRun)> {
    let (header, trajectory) = read_snapshots(File::open(dir.join("snapshots.csv"))?)?;
    let trace = read_trace(File::open(dir.join("trace.csv"))?)?;
    let cfg = &header["config"];
    let cells_per_period = cfg["cells_per_period"].as_u64().ok_or_else(|| {
        Error::Data("snapshot header lacks cells_per_period; not a spreading run".into())
    })? as usize;
    let verdict: SpreadingVerdict = serde_json::from_value(cfg["verdict"].clone())?;
    let steps = cfg["steps"].as_u64().unwrap_or(0);
    let run = CauchyRun {
        trajectory,
        trace,
        steps,
    };
    Ok((
        header_hash(&header)?,
        SpreadingRun {
            run,
            verdict,
            cells_per_period,
        },
    ))
}

/// `wave.csv` (header + `t,x,V`) and `front.csv` (`t,R`). The header holds
/// every scalar field of the profile so that it can be read back.
pub fn save_wave(dir: &Path, w: &WaveProfile, spec_hash: &str) -> Result<()> {
    let mut meta = serde_json::to_value(w)?;
    if let Value::Object(m) = &mut meta {
        for k in ["v", "r_t", "r"] {
            m.remove(k);
        }
    }
    let header = json!({
        "spec_hash": spec_hash,
        "T": w.t_period,
        "c_star": w.c_star,
        "L": w.period,
        "window": [w.x0(), w.right_periods as f64 * w.period],
        "delta_meas": w.delta_meas,
        "profile": meta,
    });
    let n = w.n_cells();
    let rows =
        w.v.iter()
            .enumerate()
            .flat_map(|(k, f)| (0..n).map(move |i| (w.times[k], w.x(i), f[i])));
    write_table(
        create(&dir.join("wave.csv"))?,
        Some(&header),
        &["t", "x", "V"],
        rows,
    )?;
    let front = w.r_t.iter().zip(&w.r).map(|(t, r)| (*t, *r));
    write_table(create(&dir.join("front.csv"))?, None, &["t", "R"], front)
}

pub fn load_wave(dir: &Path) -> Result<(String, WaveProfile)> {
    let (header, rows): (Value, Vec<(f64, f64, f64)>) =
        read_table(File::open(dir.join("wave.csv"))?, true)?;
    let (_, front): (Value, Vec<(f64, f64)>) =
        read_table(File::open(dir.join("front.csv"))?, false)?;
    let mut meta = header["profile"].clone();
    let times: Vec<f64> = serde_json::from_value(meta["times"].clone())?;
    let n = rows.len() / times.len().max(1);
    if n * times.len() != rows.len() {
        return Err(Error::Data("wave.csv rows do not form whole frames".into()));
    }
    let v: Vec<Vec<f64>> = rows
        .chunks(n)
        .map(|c| c.iter().map(|r| r.2).collect())
        .collect();
    meta["v"] = serde_json::to_value(v)?;
    meta["r_t"] = serde_json::to_value(front.iter().map(|r| r.0).collect::<Vec<_>>())?;
    meta["r"] = serde_json::to_value(front.iter().map(|r| r.1).collect::<Vec<_>>())?;
    Ok((header_hash(&header)?, serde_json::from_value(meta)?))
}

pub fn write_profile<W: Write>(out: W, profile: &[PhaseSample]) -> Result<()> {
    write_table(
        out,
        None,
        &["z", "phi", "P", "Pprime"],
        profile.iter().map(|s| (s.z, s.phi, s.p, s.q)),
    )
}

pub fn write_ptw<W: Write>(out: W, w: &CompactPtw) -> Result<()> {
    let rows = w
        .frames
        .iter()
        .zip(&w.times)
        .flat_map(|(f, &t)| w.z.iter().zip(f).map(move |(&z, &v)| (t, z, v)));
    write_table(out, None, &["t", "z", "w"], rows)
}

fn save_side(dir: &Path, s: &SideReport) -> Result<()> {
    let m = &s.midline;
    write_table(
        create(&dir.join("midline.csv"))?,
        None,
        &["t", "error"],
        m.times.iter().zip(&m.errors),
    )?;
    let f = &s.fm;
    write_table(
        create(&dir.join("sup_error.csv"))?,
        None,
        &["t", "sup_error"],
        f.times.iter().zip(&f.sup_error),
    )?;
    let by = s.shift.by_period.iter().enumerate();
    write_table(
        create(&dir.join("shift.csv"))?,
        None,
        &["period", "mean_abs_residual"],
        by,
    )
}

/// `report.json` plus one directory of fitted series per side.
pub fn save_certification(dir: &Path, rep: &CertificationReport, spec_hash: &str) -> Result<()> {
    let mut doc = serde_json::to_value(rep)?;
    for side in ["right", "left"] {
        for (sec, keys) in [
            ("midline", &["times", "errors"][..]),
            ("fm", &["times", "sup_error"][..]),
        ] {
            if let Some(Value::Object(m)) = doc.get_mut(side).and_then(|s| s.get_mut(sec)) {
                for k in keys {
                    m.remove(*k);
                }
            }
        }
    }
    doc["spec_hash"] = json!(spec_hash);
    let mut out = create(&dir.join("report.json"))?;
    serde_json::to_writer_pretty(&mut out, &doc)?;
    out.write_all(b"\n")?;
    save_side(&dir.join("right"), &rep.right)?;
    save_side(&dir.join("left"), &rep.left)
}

/// Writes pretty JSON to `path`, creating parent directories.
pub fn write_json(path: &Path, v: &impl Serialize) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, v)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn create_file(path: &Path) -> Result<BufWriter<File>> {
    create(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DiffusionLaw, Reaction, ReactionKind};

    fn pme() -> ProblemSpec {
        ProblemSpec::new(
            DiffusionLaw::power_law(2.0).unwrap(),
            Reaction::new(ReactionKind::Monostable, "u", "1", 1.0, 0.0, None).unwrap(),
        )
    }

    #[test]
    fn snapshots_round_trip() {
        let spec = pme();
        let g = Grid1D::new(-1.0, 0.125, 16).unwrap();
        let a = Field::from_fn(g, 0.0, |x| (0.25 - x * x).max(0.0));
        let b = Field::from_fn(g, 0.5, |x| (0.5 - x * x).max(0.0) / 3.0);
        let traj = Trajectory {
            snapshots: vec![a, b, Field::zeros(g, 1.0)],
        };
        let mut buf = Vec::new();
        write_snapshots(&mut buf, &spec, &traj, "abc", json!({})).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().nth(1) == Some("t,x,u,v"));
        let (h, back) = read_snapshots(buf.as_slice()).unwrap();
        assert_eq!(header_hash(&h).unwrap(), "abc");
        assert_eq!(back.snapshots.len(), 3);
        for (x, y) in traj.snapshots.iter().zip(&back.snapshots) {
            assert_eq!(x.t, y.t);
            assert_eq!(x.u, y.u);
        }
    }

    #[test]
    fn trace_round_trip_keeps_positions() {
        let mut tr = FreeBoundaryTrace::default();
        for k in 0..20 {
            let t = k as f64 * 0.1;
            tr.push(t, -t, 1.0 + 0.3 * t, -0.3, false);
        }
        tr.finalize(3);
        let mut buf = Vec::new();
        write_trace(&mut buf, &tr).unwrap();
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(back.r, tr.r);
        assert_eq!(back.l, tr.l);
        assert_eq!(back.rprime, tr.rprime);
    }

    #[test]
    fn header_without_hash_is_rejected() {
        assert!(header_hash(&json!({"grid": 1})).is_err());
    }
}
