//! Run configuration: a TOML document overlaid by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use dsthin_core::diffsets::{
    brute_force_search, crt_fold, singer_default, twin_prime, DifferenceSet, BRUTE_FORCE_LIMIT,
};
use dsthin_core::dsbounds::ThetaBar;
use dsthin_core::geometry::{Steering, UnitCell};
use dsthin_core::metrics::{MainlobeSpec, MeasureSettings, Quadrature};
use dsthin_core::pattern::{ElementPattern, PowerTable};
use dsthin_core::sequences::{random_thinned, ExcitationGrid};
use dsthin_core::synthesis::{CellBox, MnRange, PatternTarget, SweepSettings, SynthesisSpec, ThetaBarPolicy};
use dsthin_core::Descriptors;

use crate::{dsfile, CliError};

#[derive(Debug, Default, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Excitation source, e.g. `file:set.ds`, `twin-prime:17x19`, `singer:10:31x33`.
    pub source: Option<String>,
    pub shift: Option<[i64; 2]>,
    /// `[d1x, d1y, d2x, d2y]` in wavelengths.
    pub cell: Option<[f64; 4]>,
    pub steer: Option<[f64; 2]>,
    /// `isotropic`, `cosine` or `table:PATH`.
    pub element: Option<String>,
    /// Oversampling of exported pattern grids.
    pub oversample: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    /// `axis-cross[:r]`, `cell[:r]` or `u-radius:r`.
    pub mainlobe: Option<String>,
    /// `[n_theta, n_phi]`.
    pub quadrature: Option<[usize; 2]>,
    pub phi_steps: Option<usize>,
    pub theta_bar: Option<f64>,
    /// Calibrate theta_bar so that D_INF equals this value (dB).
    pub theta_bar_d_inf: Option<f64>,
    pub full_metrics: Option<bool>,
    pub synthesis: SynthesisConfig,
}

#[derive(Debug, Default, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisConfig {
    pub sll_db: Option<f64>,
    pub d_db: Option<f64>,
    pub bw_deg: Option<f64>,
    /// `[u, v, level_db]`.
    pub target: Option<[f64; 3]>,
    /// Source strings; each must name a difference set.
    pub catalog: Vec<String>,
    /// `[d1x_lo, d1x_hi, d1y_lo, d1y_hi, d2x_lo, d2x_hi, d2y_lo, d2y_hi]`.
    pub cell_box: Option<[f64; 8]>,
    pub resolution: Option<f64>,
    /// `[m_lo, m_hi, n_lo, n_hi]`.
    pub mn_range: Option<[i64; 4]>,
    pub epsilon_estimate: Option<f64>,
    pub max_sweeps: Option<usize>,
    pub screen_oversample: Option<usize>,
    pub final_oversample: Option<usize>,
    pub recheck_fraction: Option<f64>,
}

macro_rules! overlay {
    ($dst:expr, $src:expr; $($f:ident),*) => { $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )* };
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.rebase(path.parent().unwrap_or(Path::new("")));
        Ok(cfg)
    }

    // Relative file references are taken relative to the config file.
    fn rebase(&mut self, dir: &Path) {
        let fix = |s: &mut String| {
            for prefix in ["file:", "table:"] {
                if let Some(rest) = s.strip_prefix(prefix) {
                    if Path::new(rest).is_relative() {
                        *s = format!("{prefix}{}", dir.join(rest).display());
                    }
                }
            }
        };
        self.source.iter_mut().for_each(fix);
        self.element.iter_mut().for_each(fix);
        self.synthesis.catalog.iter_mut().for_each(fix);
    }

    /// Fields set in `top` win.
    pub fn overlay(mut self, top: &Config) -> Self {
        overlay!(self, top; source, shift, cell, steer, element, oversample, seed, workers, mainlobe,
            quadrature, phi_steps, theta_bar, theta_bar_d_inf, full_metrics);
        let (s, t) = (&mut self.synthesis, &top.synthesis);
        overlay!(s, t; sll_db, d_db, bw_deg, target, cell_box, resolution, mn_range, epsilon_estimate,
            max_sweeps, screen_oversample, final_oversample, recheck_fraction);
        if !t.catalog.is_empty() {
            s.catalog = t.catalog.clone();
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaBarChoice {
    DefaultRule,
    Value(f64),
    DInf(f64),
}

impl ThetaBarChoice {
    pub fn resolve(&self, desc: &Descriptors, cell: &UnitCell) -> Result<ThetaBar, CliError> {
        Ok(match *self {
            Self::DefaultRule => ThetaBar::default_rule(desc.p, desc.q, cell)?,
            Self::Value(v) => ThetaBar::user(v)?,
            Self::DInf(d) => ThetaBar::calibrated_to_d_inf(desc, d)?,
        })
    }
}

#[derive(Debug, Clone)]
pub enum Excitation {
    Ds(DifferenceSet),
    Grid(ExcitationGrid),
}

impl Excitation {
    pub fn grid(&self, shift: (i64, i64)) -> ExcitationGrid {
        match self {
            Self::Ds(ds) => ds.to_excitations(shift.0, shift.1),
            Self::Grid(g) => g.cyclic_shift(shift.0, shift.1),
        }
    }
}

/// Fully resolved settings shared by all commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: Option<String>,
    pub shift: (i64, i64),
    pub cell: UnitCell,
    pub steer: Steering,
    pub element: ElementPattern,
    pub element_name: String,
    pub oversample: usize,
    pub seed: u64,
    pub workers: Option<usize>,
    pub measure: MeasureSettings,
    pub theta_bar: ThetaBarChoice,
    pub full_metrics: bool,
    pub synthesis: SynthesisConfig,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn dims(s: &str) -> Result<(usize, usize), CliError> {
    let (a, b) = s.split_once('x').ok_or_else(|| config_err(format!("expected PxQ, got `{s}`")))?;
    let p = a.parse().map_err(|_| config_err(format!("bad size `{s}`")))?;
    let q = b.parse().map_err(|_| config_err(format!("bad size `{s}`")))?;
    Ok((p, q))
}

fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, CliError> {
    s.parse().map_err(|_| config_err(format!("bad {what} `{s}`")))
}

/// Resolve a source string into excitations.
pub fn parse_source(spec: &str, seed: u64) -> Result<Excitation, CliError> {
    let parts: Vec<&str> = spec.splitn(2, ':').collect();
    let (kind, rest) = (parts[0], parts.get(1).copied().unwrap_or(""));
    let args: Vec<&str> = if rest.is_empty() { vec![] } else { rest.split(':').collect() };
    let ds = |d: DifferenceSet| Ok(Excitation::Ds(d));
    match (kind, args.as_slice()) {
        ("file", _) if !rest.is_empty() => ds(dsfile::load(Path::new(rest))?),
        ("twin-prime", [pq]) => {
            let (p, q) = dims(pq)?;
            ds(twin_prime(p, q)?)
        }
        ("singer", [m]) => ds(singer_default(num(m, "degree")?)?),
        ("singer", [m, pq]) => {
            let (p, q) = dims(pq)?;
            ds(crt_fold(&singer_default(num(m, "degree")?)?, p, q)?)
        }
        ("brute", [pq, h]) => {
            let (p, q) = dims(pq)?;
            let found = brute_force_search(p, q, num(h, "H")?, 1, BRUTE_FORCE_LIMIT)?;
            match found.into_iter().next() {
                Some(d) => ds(d),
                None => Err(config_err(format!("no difference set for `{spec}`"))),
            }
        }
        ("delta", [pq]) => {
            let (p, q) = dims(pq)?;
            ds(DifferenceSet::new(p, q, vec![(0, 0)])?)
        }
        ("ones", [pq]) => {
            let (p, q) = dims(pq)?;
            Ok(Excitation::Grid(ExcitationGrid::ones(p, q)?))
        }
        ("random", [pq, tau]) => {
            let (p, q) = dims(pq)?;
            Ok(Excitation::Grid(random_thinned(p, q, num(tau, "thinning")?, seed)?))
        }
        _ => Err(config_err(format!("unrecognised source `{spec}`"))),
    }
}

pub fn parse_element(spec: &str) -> Result<ElementPattern, CliError> {
    match spec {
        "isotropic" => Ok(ElementPattern::Isotropic),
        "cosine" => Ok(ElementPattern::CosineY),
        _ => match spec.strip_prefix("table:") {
            Some(path) => load_table(Path::new(path)),
            None => Err(config_err(format!("unrecognised element `{spec}`"))),
        },
    }
}

// `u_min u_max v_min v_max nu nv` followed by nu*nv powers, u fastest.
fn load_table(path: &Path) -> Result<ElementPattern, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut tok = text.lines().filter(|l| !l.trim_start().starts_with('#')).flat_map(str::split_whitespace);
    let mut head = [0.0; 6];
    for h in &mut head {
        *h = num(tok.next().ok_or_else(|| config_err("element table header is short"))?, "table value")?;
    }
    let values = tok.map(|t| num(t, "table value")).collect::<Result<Vec<f64>, _>>()?;
    let table = PowerTable::new((head[0], head[1]), (head[2], head[3]), head[4] as usize, head[5] as usize, values)?;
    Ok(ElementPattern::Tabulated(table))
}

pub fn parse_mainlobe(spec: &str) -> Result<MainlobeSpec, CliError> {
    let (kind, r) = match spec.split_once(':') {
        Some((k, r)) => (k, Some(num::<f64>(r, "mainlobe radius")?)),
        None => (spec, None),
    };
    let ml = match (kind, r) {
        ("axis-cross", r) => MainlobeSpec::AxisCross { radius: r.unwrap_or(1.0) },
        ("cell", r) => MainlobeSpec::ChiPsiCell { radius: r.unwrap_or(1.0) },
        ("u-radius", Some(radius)) => MainlobeSpec::URadius { radius },
        _ => return Err(config_err(format!("unrecognised mainlobe `{spec}`"))),
    };
    ml.check()?;
    Ok(ml)
}

fn check_path(spec: &str) -> Result<(), CliError> {
    for prefix in ["file:", "table:"] {
        if let Some(p) = spec.strip_prefix(prefix) {
            if !Path::new(p).is_file() {
                return Err(config_err(format!("no such file `{p}`")));
            }
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn resolve(cfg: &Config) -> Result<Self, CliError> {
        let [d1x, d1y, d2x, d2y] = cfg.cell.unwrap_or([0.5, 0.0, 0.0, 0.5]);
        let [u0, v0] = cfg.steer.unwrap_or([0.0, 0.0]);
        let element_name = cfg.element.clone().unwrap_or_else(|| "isotropic".into());
        for s in cfg.source.iter().chain(&cfg.synthesis.catalog).chain(std::iter::once(&element_name)) {
            check_path(s)?;
        }
        let oversample = cfg.oversample.unwrap_or(4);
        if !(1..=64).contains(&oversample) {
            return Err(config_err("oversample must lie in 1..=64"));
        }
        if cfg.workers == Some(0) {
            return Err(config_err("workers must be positive"));
        }
        let [n_theta, n_phi] = cfg.quadrature.unwrap_or([512, 1024]);
        if n_theta < 8 || n_phi < 8 {
            return Err(config_err("quadrature needs at least 8 points per axis"));
        }
        let phi_steps = cfg.phi_steps.unwrap_or(36);
        if phi_steps < 36 {
            return Err(config_err("phi_steps must be at least 36"));
        }
        let theta_bar = match (cfg.theta_bar, cfg.theta_bar_d_inf) {
            (Some(_), Some(_)) => return Err(config_err("theta_bar and theta_bar_d_inf are exclusive")),
            (Some(v), None) => ThetaBarChoice::Value(v),
            (None, Some(d)) => ThetaBarChoice::DInf(d),
            (None, None) => ThetaBarChoice::DefaultRule,
        };
        let [sx, sy] = cfg.shift.unwrap_or([0, 0]);
        Ok(Self {
            source: cfg.source.clone(),
            shift: (sx, sy),
            cell: UnitCell::new(d1x, d1y, d2x, d2y)?,
            steer: Steering::new(u0, v0)?,
            element: parse_element(&element_name)?,
            element_name,
            oversample,
            seed: cfg.seed.unwrap_or(0),
            workers: cfg.workers,
            measure: MeasureSettings {
                oversample: cfg.synthesis.final_oversample.unwrap_or(16),
                mainlobe: parse_mainlobe(cfg.mainlobe.as_deref().unwrap_or("axis-cross"))?,
                quadrature: Quadrature { n_theta, n_phi },
                phi_steps,
            },
            theta_bar,
            full_metrics: cfg.full_metrics.unwrap_or(true),
            synthesis: cfg.synthesis.clone(),
        })
    }

    pub fn excitation(&self) -> Result<Excitation, CliError> {
        let spec = self.source.as_deref().ok_or_else(|| config_err("no source given"))?;
        parse_source(spec, self.seed)
    }

    pub fn sweep_settings(&self) -> SweepSettings {
        let s = &self.synthesis;
        SweepSettings {
            screen_oversample: s.screen_oversample.unwrap_or(8),
            final_oversample: self.measure.oversample,
            recheck_fraction: s.recheck_fraction.unwrap_or(0.05),
            mainlobe: self.measure.mainlobe,
            quadrature: self.measure.quadrature,
            phi_steps: self.measure.phi_steps,
            full_metrics: self.full_metrics,
        }
    }

    pub fn catalog(&self) -> Result<Vec<DifferenceSet>, CliError> {
        if self.synthesis.catalog.is_empty() {
            return Err(config_err("synthesis.catalog is empty"));
        }
        self.synthesis
            .catalog
            .iter()
            .map(|s| match parse_source(s, self.seed)? {
                Excitation::Ds(d) => Ok(d),
                Excitation::Grid(_) => Err(config_err(format!("catalog entry `{s}` is not a difference set"))),
            })
            .collect()
    }

    pub fn synthesis_spec(&self) -> Result<SynthesisSpec, CliError> {
        let s = &self.synthesis;
        let need = |v: Option<f64>, k: &str| v.ok_or_else(|| config_err(format!("synthesis.{k} is required")));
        let [u, v, level_db] = s.target.ok_or_else(|| config_err("synthesis.target is required"))?;
        let mut spec = SynthesisSpec::new(
            need(s.sll_db, "sll_db")?,
            need(s.d_db, "d_db")?,
            need(s.bw_deg, "bw_deg")?,
            PatternTarget { u, v, level_db },
        );
        spec.steer = self.steer;
        spec.element = self.element.clone();
        if let Some(b) = s.cell_box {
            spec.cell_box = CellBox {
                d1x: (b[0], b[1]),
                d1y: (b[2], b[3]),
                d2x: (b[4], b[5]),
                d2y: (b[6], b[7]),
                resolution: spec.cell_box.resolution,
            };
        }
        if let Some(r) = s.resolution {
            spec.cell_box.resolution = r;
        }
        spec.mn_range = s.mn_range.map(|[a, b, c, d]| MnRange { m: (a, b), n: (c, d) });
        spec.theta_bar = match self.theta_bar {
            ThetaBarChoice::DefaultRule => ThetaBarPolicy::DefaultRule,
            ThetaBarChoice::Value(v) => ThetaBarPolicy::Fixed(ThetaBar::user(v)?),
            ThetaBarChoice::DInf(_) => {
                return Err(config_err("theta_bar_d_inf needs fixed descriptors; use theta_bar in synthesis"))
            }
        };
        if let Some(e) = s.epsilon_estimate {
            spec.epsilon_estimate = e;
        }
        if let Some(m) = s.max_sweeps {
            spec.max_sweeps = m;
        }
        spec.sweep = self.sweep_settings();
        Ok(spec)
    }
}

pub fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
