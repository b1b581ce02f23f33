//! Command implementations. Each writes its files into `out` and returns
//! their paths.

use std::path::{Path, PathBuf};

use dsthin_core::dsbounds::bounds_report;
use dsthin_core::pattern::{pattern_grid_fft, predict_samples, PatternGrid};
use dsthin_core::synthesis::{step4_shift_sweep, synthesize as run_synthesis, ShiftMetrics};
use dsthin_core::{to_db, DifferenceSet, Error};

use crate::config::{Excitation, RunConfig};
use crate::csvout::{fmt_db, fmt_e6, fmt_opt, Table};
use crate::report::{to_json, BoundsJson, DiagnosticJson, ResultJson};
use crate::{dsfile, CliError};

/// Relative powers below this are transform rounding residue and count as zero.
const RESIDUE: f64 = 1e-12;

fn norm_db(p: f64, peak: f64) -> String {
    let r = p / peak;
    fmt_db(if r < RESIDUE { f64::NEG_INFINITY } else { to_db(r) })
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn require_ds(ex: Excitation) -> Result<DifferenceSet, CliError> {
    match ex {
        Excitation::Ds(d) => Ok(d),
        Excitation::Grid(_) => Err(CliError::Config("this command needs a difference-set source".into())),
    }
}

/// Build a set from a source string and save it.
pub fn ds_make(source: &str, seed: u64, path: &Path) -> Result<DifferenceSet, CliError> {
    let ds = require_ds(crate::config::parse_source(source, seed)?)?;
    dsfile::save(path, &ds)?;
    Ok(ds)
}

pub fn ds_validate(path: &Path) -> Result<DifferenceSet, CliError> {
    dsfile::load(path)
}

pub fn pattern_csv(pg: &PatternGrid) -> String {
    let peak = pg.peak_value();
    let mut t = Table::new(&["u", "v", "chi", "psi", "p_linear", "p_db_norm", "visible"]);
    for s in pg.samples() {
        t.row([
            fmt_e6(s.direction.u),
            fmt_e6(s.direction.v),
            fmt_e6(s.chi),
            fmt_e6(s.psi),
            fmt_e6(s.value),
            norm_db(s.value, peak),
            s.direction.visible.to_string(),
        ]);
    }
    t.into_string()
}

pub fn predict(rc: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let ex = rc.excitation()?;
    let grid = ex.grid(rc.shift);
    let samples = predict_samples(&grid.autocorrelation(), &rc.element, &rc.cell, rc.steer)?;
    let peak = samples.iter().map(|s| s.power).fold(0.0, f64::max);
    let mut t = Table::new(&["k", "l", "u", "v", "p_linear", "p_db_norm"]);
    for s in &samples {
        t.row([
            s.k.to_string(),
            s.l.to_string(),
            fmt_e6(s.direction.u),
            fmt_e6(s.direction.v),
            fmt_e6(s.power),
            norm_db(s.power, peak),
        ]);
    }
    let mut files = vec![write(out, "samples.csv", &t.into_string())?];
    let pg = pattern_grid_fft(&grid, &rc.cell, &rc.element, rc.oversample, rc.steer)?;
    files.push(write(out, "pattern.csv", &pattern_csv(&pg))?);
    let mut gl = Table::new(&["b", "c", "u", "v", "visible"]);
    for g in rc.cell.grating_lobes(rc.steer, 1) {
        gl.row([
            g.b.to_string(),
            g.c.to_string(),
            fmt_e6(g.direction.u),
            fmt_e6(g.direction.v),
            g.direction.visible.to_string(),
        ]);
    }
    files.push(write(out, "glmap.csv", &gl.into_string())?);
    if let Excitation::Ds(ds) = &ex {
        let desc = ds.descriptors();
        let tb = rc.theta_bar.resolve(&desc, &rc.cell)?;
        let b = bounds_report(&desc, &rc.element, &rc.cell, rc.steer, tb)?;
        files.push(write(out, "bounds.json", &to_json(&BoundsJson::from(&b)))?);
    }
    Ok(files)
}

pub fn sweep_csv(rows: &[ShiftMetrics], footer: Option<[f64; 4]>) -> String {
    let mut t = Table::new(&["sigma", "sigma_x", "sigma_y", "sll_db", "d_db", "bw_deg"]);
    for r in rows {
        t.row([
            r.sigma.to_string(),
            r.sigma_x.to_string(),
            r.sigma_y.to_string(),
            fmt_opt(r.sll_db),
            fmt_opt(r.d_db),
            fmt_opt(r.bw_deg),
        ]);
    }
    let [a, b, c, d] = footer.unwrap_or([f64::NAN; 4]);
    t.comment(&format!(
        "bounds sll_inf_db={} sll_sup_db={} d_inf_db={} bw_sup_deg={}",
        fmt_db(a),
        fmt_db(b),
        fmt_db(c),
        fmt_e6(d)
    ));
    t.into_string()
}

pub fn sweep(rc: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let ds = require_ds(rc.excitation()?)?;
    let sw = step4_shift_sweep(&ds, &rc.cell, &rc.element, rc.steer, &rc.sweep_settings())?;
    let desc = ds.descriptors();
    // bounds are undefined for degenerate sets; the footer then reads nan
    let footer = rc
        .theta_bar
        .resolve(&desc, &rc.cell)
        .and_then(|tb| Ok(bounds_report(&desc, &rc.element, &rc.cell, rc.steer, tb)?))
        .ok()
        .map(|b| [b.sll_inf_db, b.sll_sup_db, b.d_inf_db, b.bw_sup_deg]);
    Ok(vec![write(out, "sweep.csv", &sweep_csv(&sw.rows, footer))?])
}

pub fn synthesize(rc: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let spec = rc.synthesis_spec()?;
    let catalog = rc.catalog()?;
    let r = match run_synthesis(&spec, &catalog) {
        Ok(r) => r,
        Err(Error::Infeasible { trace }) => {
            write(out, "diagnostic.json", &to_json(&DiagnosticJson::new(&trace)))?;
            return Err(Error::Infeasible { trace }.into());
        }
        Err(e) => return Err(e.into()),
    };
    let layout = r.layout();
    let b = &r.bounds;
    let footer = [b.sll_inf_db, b.sll_sup_db, b.d_inf_db, b.bw_sup_deg];
    let pg = pattern_grid_fft(&layout.to_excitations(0, 0), &r.cell, &rc.element, rc.oversample, rc.steer)?;
    Ok(vec![
        write(out, "result.json", &to_json(&ResultJson::new(&r, [rc.steer.u0(), rc.steer.v0()], &rc.element_name)))?,
        write(out, "layout.ds", &dsfile::format(&layout))?,
        write(out, "sweep.csv", &sweep_csv(&r.per_shift, Some(footer)))?,
        write(out, "pattern.csv", &pattern_csv(&pg))?,
    ])
}
