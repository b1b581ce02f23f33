//! Measured figures of merit: sidelobe level, directivity, half-power
//! beamwidth and the pattern level along a direction.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::dft::PaddedDft;
use crate::error::{Error, Result};
use crate::geometry::{Direction, Steering, UnitCell};
use crate::math;
use crate::par;
use crate::pattern::{padded_power, pattern_grid_fft, pattern_value, ElementPattern, Geometry, PatternGrid};
use crate::sequences::{amplitude_at, ExcitationGrid};
use crate::to_db;

/// Region around the beam excluded from the sidelobe search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MainlobeSpec {
    /// `|chi| < 2 pi r / P` or `|psi| < 2 pi r / Q` (periodic): the beam and
    /// the two axis strips through it.
    AxisCross { radius: f64 },
    /// `|chi| < 2 pi r / P` and `|psi| < 2 pi r / Q` (periodic).
    ChiPsiCell { radius: f64 },
    /// Disk of the given radius in `(u, v)` around the steering direction.
    URadius { radius: f64 },
}

impl Default for MainlobeSpec {
    fn default() -> Self {
        Self::AxisCross { radius: 1.0 }
    }
}

impl MainlobeSpec {
    pub fn radius(&self) -> f64 {
        match *self {
            Self::AxisCross { radius } | Self::ChiPsiCell { radius } | Self::URadius { radius } => radius,
        }
    }

    pub fn check(&self) -> Result<()> {
        let r = self.radius();
        if r.is_finite() && r > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument("mainlobe radius must be positive"))
        }
    }

    pub fn contains(&self, chi: f64, psi: f64, p: usize, q: usize, dir: Direction, steer: Steering) -> bool {
        let near_chi = |r: f64| math::wrap_pi(chi).abs() < 2.0 * PI * r / p as f64;
        let near_psi = |r: f64| math::wrap_pi(psi).abs() < 2.0 * PI * r / q as f64;
        match *self {
            Self::AxisCross { radius } => near_chi(radius) || near_psi(radius),
            Self::ChiPsiCell { radius } => near_chi(radius) && near_psi(radius),
            Self::URadius { radius } => math::hypot(dir.u - steer.u0, dir.v - steer.v0) < radius,
        }
    }

    fn mask(&self, geo: &Geometry) -> Vec<bool> {
        geo.points.iter().map(|pt| self.contains(pt.chi, pt.psi, geo.p, geo.q, pt.dir, geo.steer)).collect()
    }
}

fn sll_core(geo: &Geometry, af: &[f64], in_ml: &[bool]) -> Result<f64> {
    let (lo, hi) = af.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    if hi - lo <= 1e-9 * hi {
        return Err(Error::FlatPattern);
    }
    let mut peak: Option<(usize, f64)> = None;
    let mut side: Option<(usize, f64)> = None;
    for (i, pt) in geo.points.iter().enumerate() {
        if !pt.dir.visible {
            continue;
        }
        let v = af[pt.node] * pt.pel;
        if peak.map_or(true, |(_, b)| v > b) {
            peak = Some((i, v));
        }
        if !in_ml[i] && side.map_or(true, |(_, b)| v > b) {
            side = Some((i, v));
        }
    }
    let (pi, _) = peak.ok_or(Error::EmptySidelobeRegion)?;
    let (si, _) = side.ok_or(Error::EmptySidelobeRegion)?;
    let pv = geo.refine(af, &geo.points[pi]);
    let sv = geo.refine(af, &geo.points[si]);
    if !(pv > 0.0) {
        return Err(Error::Numeric("zero peak power"));
    }
    Ok(to_db(sv / pv))
}

/// Sidelobe level in dB of an evaluated pattern grid.
pub fn sll(pg: &PatternGrid, ml: &MainlobeSpec) -> Result<f64> {
    ml.check()?;
    sll_core(&pg.geo, &pg.af, &ml.mask(&pg.geo))
}

/// Reusable sidelobe evaluator for many grids sharing size, cell and element.
pub struct SidelobeScanner {
    geo: Geometry,
    mask: Vec<bool>,
    dft: PaddedDft,
}

impl SidelobeScanner {
    pub fn new(
        p: usize,
        q: usize,
        cell: &UnitCell,
        ep: &ElementPattern,
        oversample: usize,
        steer: Steering,
        ml: &MainlobeSpec,
    ) -> Result<Self> {
        ml.check()?;
        let geo = Geometry::build(p, q, oversample, cell, ep, steer)?;
        let mask = ml.mask(&geo);
        Ok(Self { geo, mask, dft: PaddedDft::new(p, q, oversample) })
    }

    pub fn sll(&self, grid: &ExcitationGrid) -> Result<f64> {
        if grid.dims() != (self.geo.p, self.geo.q) {
            return Err(Error::SizeMismatch { expected: self.geo.p * self.geo.q, got: grid.weights().len() });
        }
        sll_core(&self.geo, &padded_power(&self.dft, grid), &self.mask)
    }
}

/// Midpoint tensor rule over the upper hemisphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quadrature {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { n_theta: 512, n_phi: 1024 }
    }
}

impl Quadrature {
    pub fn doubled(&self) -> Self {
        Self { n_theta: 2 * self.n_theta, n_phi: 2 * self.n_phi }
    }

    fn check(&self) -> Result<()> {
        if self.n_theta < 8 || self.n_phi < 8 {
            return Err(Error::InvalidArgument("quadrature needs at least 8x8 nodes"));
        }
        Ok(())
    }

    // (u, v, weight) of every node of row `i`.
    fn row(&self, i: usize) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let dt = 0.5 * PI / self.n_theta as f64;
        let dp = 2.0 * PI / self.n_phi as f64;
        let t = (i as f64 + 0.5) * dt;
        let (st, w) = (math::sin(t), math::sin(t) * dt * dp);
        (0..self.n_phi).map(move |j| {
            let ph = (j as f64 + 0.5) * dp;
            (st * math::cos(ph), st * math::sin(ph), w)
        })
    }
}

fn beam_power(grid: &ExcitationGrid, ep: &ElementPattern, steer: Steering) -> Result<f64> {
    Ok(ep.power(steer.u0, steer.v0)? * grid.coherent_sum().norm_sqr())
}

/// Directivity in dB: `4 pi P(u0, v0)` over the hemisphere integral of `P`.
pub fn directivity(
    grid: &ExcitationGrid,
    cell: &UnitCell,
    ep: &ElementPattern,
    quad: &Quadrature,
    steer: Steering,
) -> Result<f64> {
    quad.check()?;
    let rows: Vec<Result<f64>> = par::map_range(quad.n_theta, |i| {
        let mut acc = 0.0;
        for (u, v, w) in quad.row(i) {
            let (chi, psi) = cell.chi_psi(u, v, steer);
            acc += w * ep.power(u, v)? * amplitude_at(grid, chi, psi).norm_sqr();
        }
        Ok(acc)
    });
    let mut total = 0.0;
    for r in rows {
        total += r?;
    }
    ratio_db(4.0 * PI * beam_power(grid, ep, steer)?, total)
}

fn ratio_db(num: f64, den: f64) -> Result<f64> {
    if !(den > 0.0 && num.is_finite()) {
        return Err(Error::Numeric("vanishing radiated power"));
    }
    Ok(to_db(num / den))
}

/// Directivity evaluator for many grids of one size on one cell: the
/// hemisphere integral is contracted once against every lattice lag, so each
/// grid costs one aperiodic autocorrelation.
pub struct DirectivityKernel {
    p: usize,
    q: usize,
    pel0: f64,
    weights: Vec<Complex64>,
}

impl DirectivityKernel {
    pub fn new(
        p: usize,
        q: usize,
        cell: &UnitCell,
        ep: &ElementPattern,
        quad: &Quadrature,
        steer: Steering,
    ) -> Result<Self> {
        quad.check()?;
        let (w, h) = (2 * p - 1, 2 * q - 1);
        let rows: Vec<Result<Vec<Complex64>>> = par::map_range(quad.n_theta, |i| {
            let mut acc = vec![Complex64::new(0.0, 0.0); w * h];
            let mut zs = vec![Complex64::new(0.0, 0.0); w];
            let mut zt = vec![Complex64::new(0.0, 0.0); h];
            for (u, v, wt) in quad.row(i) {
                let g = wt * ep.power(u, v)?;
                if g == 0.0 {
                    continue;
                }
                let (chi, psi) = cell.chi_psi(u, v, steer);
                for (s, z) in zs.iter_mut().enumerate() {
                    *z = math::cis(chi * (s as f64 - (p as f64 - 1.0))) * g;
                }
                for (t, z) in zt.iter_mut().enumerate() {
                    *z = math::cis(psi * (t as f64 - (q as f64 - 1.0)));
                }
                for (t, b) in zt.iter().enumerate() {
                    let row = &mut acc[w * t..w * (t + 1)];
                    for (dst, a) in row.iter_mut().zip(&zs) {
                        *dst += a * b;
                    }
                }
            }
            Ok(acc)
        });
        let mut weights = vec![Complex64::new(0.0, 0.0); w * h];
        for r in rows {
            for (dst, x) in weights.iter_mut().zip(r?) {
                *dst += x;
            }
        }
        Ok(Self { p, q, pel0: ep.power(steer.u0, steer.v0)?, weights })
    }

    pub fn directivity(&self, grid: &ExcitationGrid) -> Result<f64> {
        if grid.dims() != (self.p, self.q) {
            return Err(Error::SizeMismatch { expected: self.p * self.q, got: grid.weights().len() });
        }
        let lags = grid.linear_autocorrelation();
        let total: f64 = lags.iter().zip(&self.weights).map(|(a, w)| (a * w).re).sum();
        ratio_db(4.0 * PI * self.pel0 * grid.coherent_sum().norm_sqr(), total)
    }
}

// Beam-centred frame: unit vectors along the beam and two transverse axes.
struct BeamFrame {
    b: [f64; 3],
    e1: [f64; 3],
    e2: [f64; 3],
}

impl BeamFrame {
    fn new(steer: Steering) -> Self {
        let (u0, v0) = (steer.u0, steer.v0);
        let s = math::hypot(u0, v0).min(1.0);
        let w0 = math::sqrt((1.0 - s * s).max(0.0));
        let phi0 = if s > 0.0 { math::atan2(v0, u0) } else { 0.0 };
        let (cp, sp) = (math::cos(phi0), math::sin(phi0));
        Self { b: [u0, v0, w0], e1: [w0 * cp, w0 * sp, -s], e2: [-sp, cp, 0.0] }
    }

    fn at(&self, t: f64, phi: f64) -> [f64; 3] {
        let (ct, st) = (math::cos(t), math::sin(t));
        let (cp, sp) = (math::cos(phi), math::sin(phi));
        core::array::from_fn(|i| ct * self.b[i] + st * (cp * self.e1[i] + sp * self.e2[i]))
    }
}

fn aperture_extent(p: usize, q: usize, cell: &UnitCell) -> f64 {
    let (a, b) = (p.saturating_sub(1) as f64, q.saturating_sub(1) as f64);
    let (x1, y1) = cell.position(a, b);
    let (x2, y2) = cell.position(a, -b);
    math::hypot(x1, y1).max(math::hypot(x2, y2))
}

/// Largest half-power beamwidth over `phi_steps` cuts through the beam, in degrees.
pub fn max_hpbw(
    grid: &ExcitationGrid,
    cell: &UnitCell,
    ep: &ElementPattern,
    phi_steps: usize,
    steer: Steering,
) -> Result<f64> {
    Ok(hpbw_cuts(grid, cell, ep, phi_steps, steer)?.into_iter().fold(0.0, f64::max))
}

/// Half-power beamwidth of each cut `phi = pi i / phi_steps`, in degrees.
pub fn hpbw_cuts(
    grid: &ExcitationGrid,
    cell: &UnitCell,
    ep: &ElementPattern,
    phi_steps: usize,
    steer: Steering,
) -> Result<Vec<f64>> {
    if phi_steps < 36 {
        return Err(Error::InvalidArgument("at least 36 cuts are required"));
    }
    let frame = BeamFrame::new(steer);
    let (p, q) = grid.dims();
    let half = 0.5 * beam_power(grid, ep, steer)?;
    if !(half > 0.0) {
        return Err(Error::Numeric("zero beam power"));
    }
    let step = 0.05 / aperture_extent(p, q, cell).max(1.0);
    let power = |t: f64, phi: f64| -> Result<f64> {
        let d = frame.at(t, phi);
        if d[2] < 0.0 {
            return Ok(0.0);
        }
        let (chi, psi) = cell.chi_psi(d[0], d[1], steer);
        Ok(ep.power(d[0], d[1])? * amplitude_at(grid, chi, psi).norm_sqr())
    };
    let crossing = |phi: f64| -> Result<f64> {
        let mut lo = 0.0;
        let mut hi = step;
        loop {
            if hi > 0.5 * PI {
                return Err(Error::BeamNotResolved);
            }
            if power(hi, phi)? < half {
                break;
            }
            lo = hi;
            hi += step;
        }
        while hi - lo > 1e-9 {
            let mid = 0.5 * (lo + hi);
            if power(mid, phi)? < half {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };
    let cuts: Vec<Result<f64>> = par::map_range(phi_steps, |i| {
        let phi = PI * i as f64 / phi_steps as f64;
        Ok((crossing(phi)? + crossing(phi + PI)?).to_degrees())
    });
    cuts.into_iter().collect()
}

/// Pattern level at `(u, v)` relative to the beam, in dB.
pub fn pattern_value_at(
    grid: &ExcitationGrid,
    cell: &UnitCell,
    ep: &ElementPattern,
    u: f64,
    v: f64,
    steer: Steering,
) -> Result<f64> {
    if !Direction::new(u, v).visible {
        return Err(Error::InvisibleDirection { u, v });
    }
    let beam = beam_power(grid, ep, steer)?;
    if !(beam > 0.0) {
        return Err(Error::Numeric("zero beam power"));
    }
    Ok(to_db(pattern_value(grid, cell, ep, u, v, steer)? / beam))
}

/// Settings shared by the measured metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureSettings {
    pub oversample: usize,
    pub mainlobe: MainlobeSpec,
    pub quadrature: Quadrature,
    pub phi_steps: usize,
}

impl Default for MeasureSettings {
    fn default() -> Self {
        Self { oversample: 16, mainlobe: MainlobeSpec::default(), quadrature: Quadrature::default(), phi_steps: 36 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub sll_db: f64,
    pub directivity_db: f64,
    pub bw_max_deg: f64,
    /// Pattern level relative to the beam at each requested direction.
    pub pattern_at: Vec<(Direction, f64)>,
}

pub fn measure(
    grid: &ExcitationGrid,
    cell: &UnitCell,
    ep: &ElementPattern,
    steer: Steering,
    settings: &MeasureSettings,
    directions: &[(f64, f64)],
) -> Result<MetricsReport> {
    let pg = pattern_grid_fft(grid, cell, ep, settings.oversample, steer)?;
    let pattern_at = directions
        .iter()
        .map(|&(u, v)| Ok((Direction::new(u, v), pattern_value_at(grid, cell, ep, u, v, steer)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricsReport {
        sll_db: sll(&pg, &settings.mainlobe)?,
        directivity_db: directivity(grid, cell, ep, &settings.quadrature, steer)?,
        bw_max_deg: max_hpbw(grid, cell, ep, settings.phi_steps, steer)?,
        pattern_at,
    })
}
