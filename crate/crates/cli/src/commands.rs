use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use rayon::prelude::*;
use serde_json::{json, Value};
use sharpwave::analysis::{
    certify, plateau_data, run_from_data, LeftInputs, PipelineOptions, SpreadOptions, SpreadingRun,
};
use sharpwave::io;
use sharpwave::model::law::Family;
use sharpwave::model::validate::validate;
use sharpwave::model::ReactionKind;
use sharpwave::numerics::fit::line_fit;
use sharpwave::renorm::{
    build_wave, left_limit, time_monotonicity, verify_periodicity, WaveProfile,
};
use sharpwave::solver::{
    default_start, run_cauchy, solve_periodic_stationary_with, Boundary, Direction, Field,
    FreeBoundaryTrace, Grid1D, SolverConfig, StationaryProfile,
};
use sharpwave::waves::{
    build_compact_ptw, check_spreading_condition, find_compact_subsolution, find_sharp_speed,
    PtwOptions, TwProblem,
};
use sharpwave::{Error, ProblemSpec};

use crate::exit::Failure;
use crate::scenario::Scenario;

const STATIONARY_TOL: f64 = 1e-11;

fn stationary(
    spec: &ProblemSpec,
    cells: usize,
    dir: Direction,
) -> sharpwave::Result<StationaryProfile> {
    solve_periodic_stationary_with(spec, default_start(spec, dir), dir, cells, STATIONARY_TOL)
}

fn base_summary(sc: &Scenario, task: &str) -> Value {
    json!({
        "task": task,
        "name": sc.name,
        "spec_hash": sc.hash(),
        "resolution": sc.resolution,
        "seed": sc.seed,
    })
}

/// Validation report only.
pub fn dry_run(sc: &Scenario, task: &str) -> anyhow::Result<()> {
    let report = validate(&sc.spec);
    println!(
        "{task} (dry run): {} [{}], law {}, spec hash {}",
        sc.name,
        sc.spec.reaction.kind().as_str(),
        report.law,
        sc.hash()
    );
    for c in &report.checks {
        let status = match (c.passed, c.gating) {
            (true, _) => "ok",
            (false, true) => "FAIL",
            (false, false) => "fail (non-gating)",
        };
        println!(
            "  {:<3} {:<40} {status:<18} worst {:.3e} at {}",
            c.group, c.name, c.worst, c.location
        );
    }
    println!("usable: {}", report.usable());
    Ok(())
}

fn barenblatt_data(sc: &Scenario) -> anyhow::Result<Field> {
    let m = match sc.spec.law.family() {
        Family::PowerLaw { m } => m,
        _ => {
            return Err(Failure::Config(
                "Barenblatt data needs diffusion.family = power_law".into(),
            )
            .into())
        }
    };
    let t0 = sc.f64_or("initial.t0", 1.0)?;
    let c = sc.f64_or("initial.C", 1.0)?;
    let x_min = sc.f64_or("domain.x_min", f64::NAN)?;
    let x_max = sc.f64_or("domain.x_max", f64::NAN)?;
    if x_max.partial_cmp(&x_min) != Some(std::cmp::Ordering::Greater) {
        return Err(
            Failure::Config("Barenblatt data needs domain.x_min < domain.x_max".into()).into(),
        );
    }
    let dx = sc.spec.period() / sc.resolution as f64;
    let n = ((x_max - x_min) / dx).round() as usize;
    let grid = Grid1D::new(x_min, dx, n)?;
    // u = t^{-a} (C - k x^2 t^{-2a})_+^{1/(m-1)} with a = 1/(m+1), k = a (m-1) / (2m).
    let a = 1.0 / (m + 1.0);
    let k = a * (m - 1.0) / (2.0 * m);
    Ok(Field::from_fn(grid, t0, |x| {
        t0.powf(-a)
            * (c - k * x * x * t0.powf(-2.0 * a))
                .max(0.0)
                .powf(1.0 / (m - 1.0))
    }))
}

fn solver_config(sc: &Scenario, t_end_default: f64) -> anyhow::Result<SolverConfig> {
    let d = SolverConfig::default();
    let snap = sc.f64_or("solver.snapshot_every", 0.0)?;
    let trace = sc.f64_or("solver.trace_every", 0.0)?;
    Ok(SolverConfig {
        cfl: sc.f64_or("solver.cfl", d.cfl)?,
        t_end: sc.f64_or("solver.t_end", t_end_default)?,
        snapshot_every: (snap > 0.0).then_some(snap),
        trace_every: (trace > 0.0).then_some(trace),
        floor: sc
            .has("solver.floor")
            .then(|| sc.f64_or("solver.floor", 0.0))
            .transpose()?,
        ..d
    })
}

/// Power-law fit of `r(t)` and the mean Darcy residual over `[t_from, t_to]`.
fn front_fit(trace: &FreeBoundaryTrace, t_from: f64, t_to: f64) -> Value {
    let idx: Vec<usize> = (0..trace.len())
        .filter(|&i| trace.t[i] >= t_from && trace.t[i] <= t_to && trace.r[i] > 0.0)
        .collect();
    let lt: Vec<f64> = idx.iter().map(|&i| trace.t[i].ln()).collect();
    let lr: Vec<f64> = idx.iter().map(|&i| trace.r[i].ln()).collect();
    let darcy = idx.iter().map(|&i| trace.darcy_residual[i]).sum::<f64>() / idx.len().max(1) as f64;
    match line_fit(&lt, &lr) {
        Some(f) => {
            json!({"t_from": t_from, "t_to": t_to, "exponent": f.slope, "r2": f.r2, "samples": f.n, "darcy_mean": darcy})
        }
        None => json!({"t_from": t_from, "t_to": t_to, "error": "too few samples"}),
    }
}

fn spread_options(sc: &Scenario) -> anyhow::Result<SpreadOptions> {
    let t_end = sc.f64_or("spreading.t_end", sc.f64_or("solver.t_end", 40.0)?)?;
    let c_hint = sc.f64_or("spreading.c_hint", 1.0)?;
    let mut o = SpreadOptions::for_spec(&sc.spec, t_end, c_hint)?;
    o.snapshot_every = sc.f64_or("spreading.snapshot_every", o.snapshot_every)?;
    o.trace_every = sc.f64_or("spreading.trace_every", o.trace_every)?;
    o.cfl = sc.f64_or("solver.cfl", o.cfl)?;
    o.plateau_periods = sc.usize_or("initial.periods", o.plateau_periods)?;
    o.half_periods = sc.usize_or(
        "spreading.half_periods",
        o.half_periods.max(o.plateau_periods + 4),
    )?;
    Ok(o)
}

/// Plateau data, widening the window until the fronts stay inside it.
fn spreading_run(sc: &Scenario, p0: &StationaryProfile) -> anyhow::Result<SpreadingRun> {
    let mut opts = spread_options(sc)?;
    let amplitude = sc.f64_or("initial.amplitude", 1.0)?;
    for _ in 0..4 {
        let mut u0 = plateau_data(p0, sc.spec.period(), &opts)?;
        u0.u.iter_mut().for_each(|u| *u *= amplitude);
        match run_from_data(&sc.spec, u0, p0.cells(), &opts) {
            Err(Error::WindowTooSmall { .. }) => opts.half_periods *= 2,
            r => return Ok(r?),
        }
    }
    Err(anyhow::anyhow!(
        "fronts left a window of {} periods",
        opts.half_periods
    ))
}

pub fn run(sc: &Scenario) -> anyhow::Result<()> {
    let clock = Instant::now();
    let dir = sc.dir("run")?;
    let kind = sc.str_or("initial.type", "plateau")?;
    let mut summary = base_summary(sc, "run");
    let trace = match kind {
        "barenblatt" => {
            let u0 = barenblatt_data(sc)?;
            let verdict = check_spreading_condition(&sc.spec, &u0).ok();
            let cfg = solver_config(sc, 10.0)?;
            let run = run_cauchy(&sc.spec, u0, &cfg, Boundary::ZERO)?;
            let extra = json!({"solver": sc.doc.get("solver"), "initial": sc.doc.get("initial")});
            io::write_snapshots(
                io::create_file(&dir.join("snapshots.csv"))?,
                &sc.spec,
                &run.trajectory,
                &sc.hash(),
                extra,
            )?;
            io::write_trace(io::create_file(&dir.join("trace.csv"))?, &run.trace)?;
            summary["verdict"] = serde_json::to_value(verdict)?;
            summary["steps"] = json!(run.steps);
            run.trace
        }
        "plateau" => {
            let p0 = stationary(&sc.spec, sc.resolution, Direction::FromBelow)?;
            let sr = spreading_run(sc, &p0)?;
            let cfg =
                json!({"spreading": sc.doc.get("spreading"), "initial": sc.doc.get("initial")});
            io::save_spreading(&dir, &sc.spec, &sr, &sc.hash(), cfg)?;
            summary["verdict"] = serde_json::to_value(sr.verdict)?;
            summary["steps"] = json!(sr.run.steps);
            sr.run.trace
        }
        other => {
            return Err(Failure::Config(format!(
                "unknown initial.type {other:?} (expected barenblatt or plateau)"
            ))
            .into())
        }
    };
    let last = trace.len().checked_sub(1);
    summary["t_end"] = json!(last.map(|i| trace.t[i]));
    summary["final_support"] = json!(last.map(|i| [trace.l[i], trace.r[i]]));
    if sc.has("fit") {
        let t_from = sc.f64_or("fit.t_from", 0.0)?;
        let t_to = sc.f64_or("fit.t_to", f64::INFINITY)?;
        summary["front_fit"] = front_fit(&trace, t_from, t_to);
    }
    io::write_json(&dir.join("summary.json"), &summary)?;
    println!(
        "run: support {} ({:.1}s)",
        summary["final_support"],
        clock.elapsed().as_secs_f64()
    );
    if let Some(e) = summary["front_fit"].get("exponent") {
        println!("run: front exponent {e}");
    }
    Ok(())
}

pub fn stationary_cmd(sc: &Scenario) -> anyhow::Result<()> {
    let dir = sc.dir("stationary")?;
    let lo = stationary(&sc.spec, sc.resolution, Direction::FromBelow)?;
    let hi = stationary(&sc.spec, sc.resolution, Direction::FromAbove)?;
    let dx = sc.spec.period() / sc.resolution as f64;
    let rows = (0..sc.resolution).map(|j| ((j as f64 + 0.5) * dx, lo.p[j], hi.p[j]));
    io::write_table(
        io::create_file(&dir.join("stationary.csv"))?,
        None,
        &["x", "p_min", "p_max"],
        rows,
    )?;
    let mut summary = base_summary(sc, "stationary");
    let gap =
        lo.p.iter()
            .zip(&hi.p)
            .map(|(a, b)| (b - a).abs())
            .fold(0.0, f64::max);
    summary["minimal"] = json!({"residual": lo.residual, "monotone": lo.monotone, "min": lo.p.iter().copied().fold(f64::INFINITY, f64::min), "max": lo.p.iter().copied().fold(f64::NEG_INFINITY, f64::max)});
    summary["maximal"] = json!({"residual": hi.residual, "monotone": hi.monotone});
    summary["max_gap"] = json!(gap);
    io::write_json(&dir.join("summary.json"), &summary)?;
    println!(
        "stationary: residuals {:.1e} / {:.1e}, max |p^0 - p_0| = {gap:.2e}",
        lo.residual, hi.residual
    );
    Ok(())
}

pub fn shoot(sc: &Scenario) -> anyhow::Result<()> {
    let dir = sc.dir("shoot")?;
    let tw = TwProblem::from_spec(&sc.spec);
    let sharp = find_sharp_speed(&tw)?;
    io::write_profile(io::create_file(&dir.join("profile.csv"))?, &sharp.profile)?;
    let mut summary = base_summary(sc, "shoot");
    summary["c_star"] = json!(sharp.c);
    summary["bracket"] = json!(sharp.bracket);
    summary["tail_rate"] = json!(sharp.tail_rate);
    if sc.has("shoot.subsolution_c") {
        let c = sc.f64_or("shoot.subsolution_c", 0.0)?;
        let peak = sc.f64_or(
            "shoot.subsolution_peak",
            0.5 * (sc.spec.reaction.theta() + tw.kappa0),
        )?;
        let sub = find_compact_subsolution(&tw, c, peak)?;
        io::write_profile(io::create_file(&dir.join("subsolution.csv"))?, &sub.profile)?;
        summary["subsolution"] = json!({"c": c, "l": sub.l, "peak": sub.peak, "sigma": sub.sigma});
        if sc.has("shoot.ptw") && c > 0.0 {
            let l = sc.f64_or("shoot.ptw.l", sub.l + 1.0)?;
            let opts = PtwOptions {
                dz: sc.f64_or("shoot.ptw.dz", PtwOptions::default().dz)?,
                ..Default::default()
            };
            let ptw = build_compact_ptw(&sc.spec, c, l, &opts)?;
            io::write_ptw(io::create_file(&dir.join("ptw.csv"))?, &ptw)?;
            summary["ptw"] = json!({"c": c, "l": l, "residual": ptw.residual, "boundary_slope": ptw.boundary_slope});
        }
    }
    io::write_json(&dir.join("summary.json"), &summary)?;
    println!("shoot: sharp speed {:.6}", sharp.c);
    Ok(())
}

fn wave_summary(spec: &ProblemSpec, w: &WaveProfile, p0: &StationaryProfile) -> Value {
    let tail = left_limit(spec, w, p0, 3);
    let (vt_min, vt_bad, vt_total) = time_monotonicity(w, 1e-12 * spec.kappa_hi());
    json!({
        "T": w.t_period,
        "c_star": w.c_star,
        "T_regression": w.t_regression,
        "delta_meas": w.delta_meas,
        "periodicity_residual": verify_periodicity(w),
        "gaps": w.gaps,
        "monotone_excess": w.monotone_excess,
        "tail": match tail {
            Ok(t) => json!({"delta_star": t.fit.delta, "M_star": t.fit.m, "r2": t.fit.r2, "min_gap": t.min_gap, "q_error": t.q_error}),
            Err(e) => json!({"error": e.to_string()}),
        },
        "v_t": {"min": vt_min, "nonpositive": vt_bad, "samples": vt_total},
    })
}

fn extraction(e: Error) -> anyhow::Error {
    match e {
        Error::Config(_) | Error::Expr { .. } => e.into(),
        Error::NotConverged { gaps } => {
            let g: Vec<String> = gaps.iter().map(|g| format!("{g:.3e}")).collect();
            Failure::Extraction(format!(
                "renormalized sequence did not converge; gap history [{}]",
                g.join(", ")
            ))
            .into()
        }
        other => Failure::Extraction(other.to_string()).into(),
    }
}

fn check_wave_kind(spec: &ProblemSpec) -> anyhow::Result<()> {
    if spec.reaction.kind() == ReactionKind::Multistable {
        return Err(Failure::Config(
            "multistable reactions may converge to a terrace of waves; sharp-wave extraction covers monostable, bistable and combustion tags only".into(),
        )
        .into());
    }
    Ok(())
}

/// One wave: extraction, persistence and its summary.
fn wave_into(
    sc: &Scenario,
    spec: &ProblemSpec,
    p0: &StationaryProfile,
    dir: &Path,
) -> anyhow::Result<(WaveProfile, Value)> {
    let (_, w) =
        build_wave(spec, p0, &sc.renorm_config()?, &sc.extract_options()?).map_err(extraction)?;
    io::save_wave(dir, &w, &sc.hash())?;
    Ok((w.clone(), wave_summary(spec, &w, p0)))
}

pub fn wave(sc: &Scenario) -> anyhow::Result<()> {
    check_wave_kind(&sc.spec)?;
    let clock = Instant::now();
    let dir = sc.dir("wave")?;
    let p0 = stationary(&sc.spec, sc.resolution, Direction::FromBelow)?;
    let mirror = sc.spec.mirrored()?;
    let pm = p0.mirrored();
    let (right, left) = rayon::join(
        || wave_into(sc, &sc.spec, &p0, &dir.join("right")),
        || wave_into(sc, &mirror, &pm, &dir.join("left")),
    );
    let (right, left) = (right?, left?);
    let mut summary = base_summary(sc, "wave");
    summary["right"] = right.1;
    summary["left"] = left.1;
    io::write_json(&dir.join("summary.json"), &summary)?;
    println!(
        "wave: c* {:.6} (left {:.6}), T {:.6}, min R' {:.4}, periodicity residual {:.2e} ({:.1}s)",
        right.0.c_star,
        left.0.c_star,
        right.0.t_period,
        right.0.delta_meas,
        summary["right"]["periodicity_residual"]
            .as_f64()
            .unwrap_or(f64::NAN),
        clock.elapsed().as_secs_f64()
    );
    Ok(())
}

fn artifact(sc: &Scenario, key: &str, default: PathBuf) -> anyhow::Result<PathBuf> {
    Ok(match sc.str_or(key, "")? {
        "" => default,
        p => PathBuf::from(p),
    })
}

fn check_hash(what: &str, found: &str, expected: &str) -> anyhow::Result<()> {
    if found != expected {
        return Err(Failure::Hash(format!(
            "{what} has spec hash {found}, the scenario has {expected}"
        ))
        .into());
    }
    Ok(())
}

fn missing(what: &str, dir: &Path, cmd: &str) -> impl FnOnce(Error) -> anyhow::Error {
    let msg = format!(
        "cannot load the {what} from {}; run `sharpwave {cmd}` first",
        dir.display()
    );
    move |e| match e {
        Error::Io(_) => Failure::Config(format!("{msg} ({e})")).into(),
        other => anyhow::Error::from(other).context(msg),
    }
}

pub fn certify_cmd(sc: &Scenario) -> anyhow::Result<()> {
    let clock = Instant::now();
    let wave_dir = artifact(sc, "certify.wave", sc.out.join("wave"))?;
    let run_dir = artifact(sc, "certify.run", sc.out.join("run"))?;
    let (h_right, right) =
        io::load_wave(&wave_dir.join("right")).map_err(missing("wave", &wave_dir, "wave"))?;
    let (h_left, left) =
        io::load_wave(&wave_dir.join("left")).map_err(missing("left wave", &wave_dir, "wave"))?;
    let (h_run, sr) =
        io::load_spreading(&run_dir).map_err(missing("spreading run", &run_dir, "run"))?;
    check_hash("wave", &h_right, &h_left)?;
    check_hash("spreading run", &h_run, &h_right)?;
    check_hash("wave", &h_right, &sc.hash())?;
    let p0 = stationary(&sc.spec, sc.resolution, Direction::FromBelow)?;
    let mirror = sc.spec.mirrored()?;
    let pm = p0.mirrored();
    let d = PipelineOptions::default();
    let opts = PipelineOptions {
        eps0: sc.f64_or("certify.eps0", d.eps0)?,
        midline_fraction: sc.f64_or("certify.midline_fraction", d.midline_fraction)?,
        ..d
    };
    let rep = certify(
        &sc.spec,
        &right,
        LeftInputs {
            spec: &mirror,
            wave: &left,
            p0: &pm,
        },
        &sr,
        &p0,
        &opts,
    )?;
    let dir = sc.dir("certify")?;
    io::save_certification(&dir, &rep, &sc.hash())?;
    let g = rep.gates;
    println!(
        "certify: ratios {} midline {} barriers {} envelope {} shift {} -> {} ({:.1}s)",
        g.ratios,
        g.midline,
        g.barriers,
        g.envelope,
        g.shift,
        if g.all() {
            "all gates green"
        } else {
            "not certified"
        },
        clock.elapsed().as_secs_f64()
    );
    for s in [&rep.right, &rep.left] {
        println!(
            "certify: {:?} delta {:.4} omega1 {:.4} omega2 {:.4} t* {:.4}",
            s.side, s.midline.fit.delta, s.fm.omega1.delta, s.fm.omega2.delta, s.shift.t_star
        );
    }
    Ok(())
}

/// The config document for one sweep point.
fn sweep_point(doc: &Value, axis: &str, value: f64) -> anyhow::Result<Value> {
    let mut d = doc.clone();
    match axis {
        "m" => d["diffusion"]["m"] = json!(value),
        "amplitude" => {
            let l = d["reaction"]["L"].as_f64().unwrap_or(1.0);
            d["reaction"]["kappa"] = json!(format!("1 + {value}*sin(2*pi*x/{l})"));
        }
        "reaction" => {
            let mut used = false;
            for key in ["f", "kappa", "g0"] {
                if let Some(s) = d["reaction"][key].as_str() {
                    if s.contains("{param}") {
                        d["reaction"][key] = json!(s.replace("{param}", &format!("({value})")));
                        used = true;
                    }
                }
            }
            if !used {
                return Err(Failure::Config("sweep axis `reaction` needs a {param} placeholder in reaction.f or reaction.kappa".into()).into());
            }
        }
        other => {
            return Err(Failure::Config(format!(
                "unknown sweep.axis {other:?} (expected m, amplitude or reaction)"
            ))
            .into())
        }
    }
    Ok(d)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn sweep(sc: &Scenario) -> anyhow::Result<()> {
    let axis = sc.str_or("sweep.axis", "")?;
    if axis.is_empty() {
        return Err(Failure::Config("missing key `sweep.axis`".into()).into());
    }
    let values: Vec<f64> = match sc.doc["sweep"]["values"].as_array() {
        Some(a) => a
            .iter()
            .map(|v| {
                v.as_f64()
                    .ok_or_else(|| Failure::Config("sweep.values must be numbers".into()))
            })
            .collect::<Result<_, _>>()?,
        None => return Err(Failure::Config("missing key `sweep.values`".into()).into()),
    };
    if values.is_empty() {
        return Err(Failure::Config("sweep axis is empty".into()).into());
    }
    let docs = values
        .iter()
        .map(|&v| sweep_point(&sc.doc, axis, v))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let dir = sc.dir("sweep")?;
    let rows: Vec<[String; 6]> = docs
        .into_par_iter()
        .zip(values.par_iter())
        .enumerate()
        .map(|(k, (doc, &value))| {
            let point_dir = dir.join(format!("point_{k:03}"));
            let point = || -> anyhow::Result<Value> {
                let psc = Scenario::from_doc(doc, &point_dir, Some(sc.resolution), sc.seed)?;
                check_wave_kind(&psc.spec)?;
                let p0 = stationary(&psc.spec, psc.resolution, Direction::FromBelow)?;
                let (_, s) = wave_into(&psc, &psc.spec, &p0, &point_dir)?;
                io::write_json(&point_dir.join("summary.json"), &s)?;
                Ok(s)
            };
            match point() {
                Ok(s) => [
                    value.to_string(),
                    fmt_opt(s["c_star"].as_f64()),
                    fmt_opt(s["T"].as_f64()),
                    fmt_opt(s["delta_meas"].as_f64()),
                    fmt_opt(s["periodicity_residual"].as_f64()),
                    "ok".to_string(),
                ],
                Err(e) => {
                    eprintln!("sweep: point {axis} = {value} failed: {e:#}");
                    [
                        value.to_string(),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        "failed".to_string(),
                    ]
                }
            }
        })
        .collect();
    let failed = rows.iter().filter(|r| r[5] == "failed").count();
    let columns = [
        "param",
        "cstar",
        "T",
        "deltastar",
        "periodicity_residual",
        "status",
    ];
    io::write_table(
        io::create_file(&dir.join("sweep.csv"))?,
        None,
        &columns,
        &rows,
    )
    .context("writing sweep.csv")?;
    println!("sweep: {} points over {axis}, {failed} failed", rows.len());
    Ok(())
}
