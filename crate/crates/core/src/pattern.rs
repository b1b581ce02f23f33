//! Element models, array-factor evaluation, oversampled pattern grids,
//! sample prediction from the autocorrelation, exact interpolation and the
//! random-phase Monte Carlo estimate.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dft::PaddedDft;
use crate::error::{Error, Result};
use crate::geometry::{Direction, Steering, UnitCell};
use crate::math;
use crate::par;
use crate::sequences::{amplitude_at, AutocorrGrid, ExcitationGrid, SpectralSamples};

/// Embedded element power pattern.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ElementPattern {
    #[default]
    Isotropic,
    /// `1 - u^2`, the power of a y-directed short dipole.
    CosineY,
    Tabulated(PowerTable),
}

/// Power samples on a regular `(u, v)` grid with bilinear lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTable {
    u_range: (f64, f64),
    v_range: (f64, f64),
    nu: usize,
    nv: usize,
    values: Vec<f64>,
}

impl PowerTable {
    /// `values[iu + nu*iv]` is the power at `u_range.0 + iu*du`, `v_range.0 + iv*dv`.
    pub fn new(u_range: (f64, f64), v_range: (f64, f64), nu: usize, nv: usize, values: Vec<f64>) -> Result<Self> {
        if nu < 2 || nv < 2 || !(u_range.0 < u_range.1) || !(v_range.0 < v_range.1) {
            return Err(Error::InvalidArgument("table needs at least 2x2 nodes over a positive range"));
        }
        if values.len() != nu * nv {
            return Err(Error::SizeMismatch { expected: nu * nv, got: values.len() });
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument("table powers must be finite and nonnegative"));
        }
        Ok(Self { u_range, v_range, nu, nv, values })
    }

    fn lookup(&self, u: f64, v: f64) -> Result<f64> {
        const TOL: f64 = 1e-12;
        let (u0, u1) = self.u_range;
        let (v0, v1) = self.v_range;
        if !(u >= u0 - TOL && u <= u1 + TOL && v >= v0 - TOL && v <= v1 + TOL) {
            return Err(Error::TabulatedOutOfRange { u, v });
        }
        let fu = ((u - u0) / (u1 - u0) * (self.nu - 1) as f64).clamp(0.0, (self.nu - 1) as f64);
        let fv = ((v - v0) / (v1 - v0) * (self.nv - 1) as f64).clamp(0.0, (self.nv - 1) as f64);
        let iu = (math::floor(fu) as usize).min(self.nu - 2);
        let iv = (math::floor(fv) as usize).min(self.nv - 2);
        let (tu, tv) = (fu - iu as f64, fv - iv as f64);
        let at = |a: usize, b: usize| self.values[a + self.nu * b];
        Ok((1.0 - tu) * (1.0 - tv) * at(iu, iv)
            + tu * (1.0 - tv) * at(iu + 1, iv)
            + (1.0 - tu) * tv * at(iu, iv + 1)
            + tu * tv * at(iu + 1, iv + 1))
    }
}

impl ElementPattern {
    pub fn power(&self, u: f64, v: f64) -> Result<f64> {
        match self {
            Self::Isotropic => Ok(1.0),
            Self::CosineY => Ok((1.0 - u * u).max(0.0)),
            Self::Tabulated(t) => t.lookup(u, v),
        }
    }

    // Used for directions that cannot radiate; a table need not cover them.
    pub(crate) fn power_or_zero(&self, u: f64, v: f64) -> f64 {
        self.power(u, v).unwrap_or(0.0)
    }

    pub(crate) fn power_dir(&self, d: Direction) -> Result<f64> {
        if d.visible {
            self.power(d.u, d.v)
        } else {
            Ok(self.power_or_zero(d.u, d.v))
        }
    }
}

/// Array factor `|sum a_pq exp(+j(p chi + q psi))|^2` at direction `(u, v)`.
pub fn array_factor(grid: &ExcitationGrid, cell: &UnitCell, u: f64, v: f64, steer: Steering) -> f64 {
    let (chi, psi) = cell.chi_psi(u, v, steer);
    amplitude_at(grid, chi, psi).norm_sqr()
}

/// Power pattern `P_el * AF` at direction `(u, v)`.
pub fn pattern_value(
    grid: &ExcitationGrid,
    cell: &UnitCell,
    ep: &ElementPattern,
    u: f64,
    v: f64,
    steer: Steering,
) -> Result<f64> {
    Ok(ep.power_dir(Direction::new(u, v))? * array_factor(grid, cell, u, v, steer))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct GeoPoint {
    pub node: usize,
    pub b: i32,
    pub c: i32,
    pub chi: f64,
    pub psi: f64,
    pub dir: Direction,
    pub pel: f64,
}

/// Directions reached by an `OP x OQ` transform grid: every visible periodic
/// image of every node, plus the base image of nodes with no visible image.
#[derive(Debug, Clone)]
pub(crate) struct Geometry {
    pub p: usize,
    pub q: usize,
    pub oversample: usize,
    pub op: usize,
    pub oq: usize,
    pub cell: UnitCell,
    pub steer: Steering,
    pub ep: ElementPattern,
    pub points: Vec<GeoPoint>,
}

fn centered(k: usize, n: usize) -> i64 {
    if 2 * k < n {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

impl Geometry {
    pub fn build(
        p: usize,
        q: usize,
        oversample: usize,
        cell: &UnitCell,
        ep: &ElementPattern,
        steer: Steering,
    ) -> Result<Self> {
        if oversample == 0 {
            return Err(Error::InvalidArgument("oversampling factor must be at least 1"));
        }
        let (op, oq) = (p * oversample, q * oversample);
        let (wb, wc) = cell.image_window(steer);
        let mut points = Vec::new();
        for l in 0..oq {
            let psi0 = 2.0 * PI * centered(l, oq) as f64 / oq as f64;
            for k in 0..op {
                let chi0 = 2.0 * PI * centered(k, op) as f64 / op as f64;
                let node = k + op * l;
                let mut any = false;
                for b in -wb..=wb {
                    for c in -wc..=wc {
                        let chi = chi0 + 2.0 * PI * b as f64;
                        let psi = psi0 + 2.0 * PI * c as f64;
                        let dir = cell.direction_at(chi, psi, steer);
                        if dir.visible {
                            let pel = ep.power(dir.u, dir.v)?;
                            points.push(GeoPoint { node, b: b as i32, c: c as i32, chi, psi, dir, pel });
                            any = true;
                        }
                    }
                }
                if !any {
                    let dir = cell.direction_at(chi0, psi0, steer);
                    let pel = ep.power_or_zero(dir.u, dir.v);
                    points.push(GeoPoint { node, b: 0, c: 0, chi: chi0, psi: psi0, dir, pel });
                }
            }
        }
        Ok(Self { p, q, oversample, op, oq, cell: *cell, steer, ep: ep.clone(), points })
    }

    /// Pattern value at the grid neighbour `(dk, dl)` of a point, `None` when
    /// the neighbour is not visible.
    pub fn neighbour(&self, af: &[f64], pt: &GeoPoint, dk: i64, dl: i64) -> Option<f64> {
        let k = (pt.node % self.op) as i64;
        let l = (pt.node / self.op) as i64;
        let nk = (k + dk).rem_euclid(self.op as i64) as usize;
        let nl = (l + dl).rem_euclid(self.oq as i64) as usize;
        let chi = pt.chi + 2.0 * PI * dk as f64 / self.op as f64;
        let psi = pt.psi + 2.0 * PI * dl as f64 / self.oq as f64;
        let dir = self.cell.direction_at(chi, psi, self.steer);
        if !dir.visible {
            return None;
        }
        let pel = self.ep.power(dir.u, dir.v).ok()?;
        Some(af[nk + self.op * nl] * pel)
    }

    /// Local quadratic refinement of a grid maximum on its 3x3 neighbourhood.
    pub fn refine(&self, af: &[f64], pt: &GeoPoint) -> f64 {
        let f0 = af[pt.node] * pt.pel;
        let mut f = [[0.0f64; 3]; 3];
        for (i, dk) in (-1i64..=1).enumerate() {
            for (j, dl) in (-1i64..=1).enumerate() {
                match self.neighbour(af, pt, dk, dl) {
                    Some(v) => f[i][j] = v,
                    None => return f0,
                }
            }
        }
        f[1][1] = f0;
        if f.iter().flatten().any(|&v| v > f0) {
            return f0;
        }
        let gx = 0.5 * (f[2][1] - f[0][1]);
        let gy = 0.5 * (f[1][2] - f[1][0]);
        let hxx = f[2][1] - 2.0 * f0 + f[0][1];
        let hyy = f[1][2] - 2.0 * f0 + f[1][0];
        let hxy = 0.25 * (f[2][2] - f[2][0] - f[0][2] + f[0][0]);
        let det = hxx * hyy - hxy * hxy;
        if !(hxx < 0.0 && det > 0.0) {
            return f0;
        }
        let dx = -(hyy * gx - hxy * gy) / det;
        let dy = -(hxx * gy - hxy * gx) / det;
        if dx.abs() > 1.0 || dy.abs() > 1.0 {
            return f0;
        }
        f0.max(f0 + 0.5 * (gx * dx + gy * dy))
    }
}

/// One evaluated direction of a [`PatternGrid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternSample {
    /// Transform-grid node.
    pub k: usize,
    pub l: usize,
    /// Period offset of this image.
    pub b: i32,
    pub c: i32,
    pub chi: f64,
    pub psi: f64,
    pub direction: Direction,
    /// Linear power, element factor included.
    pub value: f64,
}

/// Pattern on an oversampled `(chi, psi)` grid mapped to `(u, v)`.
#[derive(Debug, Clone)]
pub struct PatternGrid {
    pub(crate) geo: Geometry,
    pub(crate) af: Vec<f64>,
    peak: usize,
}

impl PatternGrid {
    pub(crate) fn from_parts(geo: Geometry, af: Vec<f64>) -> Self {
        let mut peak = 0;
        let mut best = f64::NEG_INFINITY;
        for (i, pt) in geo.points.iter().enumerate() {
            let v = af[pt.node] * pt.pel;
            if pt.dir.visible && v > best {
                best = v;
                peak = i;
            }
        }
        Self { geo, af, peak }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.geo.p, self.geo.q)
    }

    pub fn oversample(&self) -> usize {
        self.geo.oversample
    }

    pub fn len(&self) -> usize {
        self.geo.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.geo.points.is_empty()
    }

    pub fn sample(&self, i: usize) -> PatternSample {
        let pt = &self.geo.points[i];
        PatternSample {
            k: pt.node % self.geo.op,
            l: pt.node / self.geo.op,
            b: pt.b,
            c: pt.c,
            chi: pt.chi,
            psi: pt.psi,
            direction: pt.dir,
            value: self.af[pt.node] * pt.pel,
        }
    }

    pub fn samples(&self) -> impl Iterator<Item = PatternSample> + '_ {
        (0..self.len()).map(move |i| self.sample(i))
    }

    /// Largest value over visible directions (grid maximum, unrefined).
    pub fn peak_value(&self) -> f64 {
        let pt = &self.geo.points[self.peak];
        self.af[pt.node] * pt.pel
    }

    pub fn peak_direction(&self) -> Direction {
        self.geo.points[self.peak].dir
    }
}

/// Evaluate the pattern on the `OP x OQ` grid by a zero-padded transform.
pub fn pattern_grid_fft(
    grid: &ExcitationGrid,
    cell: &UnitCell,
    ep: &ElementPattern,
    oversample: usize,
    steer: Steering,
) -> Result<PatternGrid> {
    let (p, q) = grid.dims();
    let geo = Geometry::build(p, q, oversample, cell, ep, steer)?;
    let af = padded_power(&PaddedDft::new(p, q, oversample), grid);
    Ok(PatternGrid::from_parts(geo, af))
}

pub(crate) fn padded_power(dft: &PaddedDft, grid: &ExcitationGrid) -> Vec<f64> {
    dft.forward(grid.weights()).into_iter().map(|c| c.norm_sqr()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedSample {
    pub k: usize,
    pub l: usize,
    pub direction: Direction,
    pub power: f64,
}

/// Pattern at the `P x Q` sample directions from the autocorrelation alone.
pub fn predict_samples(
    acf: &AutocorrGrid,
    ep: &ElementPattern,
    cell: &UnitCell,
    steer: Steering,
) -> Result<Vec<PredictedSample>> {
    let (p, q) = acf.dims();
    let xi = acf.transform();
    let mut out = Vec::with_capacity(p * q);
    for l in 0..q {
        for k in 0..p {
            let direction = cell.sample_direction(p, q, k as i64, l as i64, steer);
            let pel = ep.power_dir(direction)?;
            out.push(PredictedSample { k, l, direction, power: xi[k + p * l] * pel });
        }
    }
    Ok(out)
}

fn dirichlet(x: f64, n: usize) -> f64 {
    let nf = n as f64;
    let s = math::sin(0.5 * x);
    if s.abs() < 1e-8 {
        math::cos(0.5 * x * nf) / math::cos(0.5 * x)
    } else {
        math::sin(0.5 * x * nf) / (nf * s)
    }
}

pub(crate) fn kernel_1d(x: f64, n: usize) -> Complex64 {
    math::cis(0.5 * x * (n as f64 - 1.0)) * dirichlet(x, n)
}

/// Interpolation kernel reconstructing the array factor from its `P x Q` samples.
pub fn interp_kernel(chi: f64, psi: f64, p: usize, q: usize) -> Complex64 {
    kernel_1d(chi, p) * kernel_1d(psi, q)
}

fn kernel_row(x: f64, n: usize) -> Vec<Complex64> {
    (0..n).map(|k| kernel_1d(x - 2.0 * PI * k as f64 / n as f64, n)).collect()
}

fn reconstruct(coef: &[Complex64], kp: &[Complex64], kq: &[Complex64]) -> Complex64 {
    let p = kp.len();
    let mut total = Complex64::new(0.0, 0.0);
    for (l, wq) in kq.iter().enumerate() {
        let mut row = Complex64::new(0.0, 0.0);
        for (k, wp) in kp.iter().enumerate() {
            row += coef[k + p * l] * wp;
        }
        total += row * wq;
    }
    total
}

/// Pattern at any direction from the samples and their phases.
pub fn pattern_interpolated(
    spec: &SpectralSamples,
    ep: &ElementPattern,
    cell: &UnitCell,
    u: f64,
    v: f64,
    steer: Steering,
) -> Result<f64> {
    let (p, q) = spec.dims();
    let (chi, psi) = cell.chi_psi(u, v, steer);
    let coef: Vec<Complex64> =
        (0..q).flat_map(|l| (0..p).map(move |k| (k, l))).map(|(k, l)| spec.coefficient(k, l)).collect();
    let a = reconstruct(&coef, &kernel_row(chi, p), &kernel_row(psi, q)).norm_sqr();
    Ok(a * ep.power_dir(Direction::new(u, v))?)
}

/// Per-direction statistics of the random-phase reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub mean: Vec<f64>,
    pub max: Vec<f64>,
    /// `per_trial[t][i]` is trial `t` at direction `i`.
    pub per_trial: Vec<Vec<f64>>,
}

/// Random-phase estimate of the pattern at `directions` from the autocorrelation.
/// Trial `t` draws its phases from a ChaCha8 stream `t` keyed by `seed`; the
/// beam phase is pinned to zero.
pub fn pattern_mc(
    acf: &AutocorrGrid,
    ep: &ElementPattern,
    cell: &UnitCell,
    steer: Steering,
    directions: &[(f64, f64)],
    seed: u64,
    trials: usize,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required"));
    }
    let (p, q) = acf.dims();
    let amp: Vec<f64> = acf.transform().into_iter().map(|x| math::sqrt(x.max(0.0))).collect();
    let mut kernels = Vec::with_capacity(directions.len());
    let mut pel = Vec::with_capacity(directions.len());
    for &(u, v) in directions {
        let (chi, psi) = cell.chi_psi(u, v, steer);
        kernels.push((kernel_row(chi, p), kernel_row(psi, q)));
        pel.push(ep.power_dir(Direction::new(u, v))?);
    }
    let per_trial: Vec<Vec<f64>> = par::map_range(trials, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let coef: Vec<Complex64> = amp
            .iter()
            .enumerate()
            .map(|(i, &a)| if i == 0 { Complex64::new(a, 0.0) } else { math::cis(rng.random::<f64>() * 2.0 * PI) * a })
            .collect();
        kernels.iter().zip(&pel).map(|((kp, kq), &w)| reconstruct(&coef, kp, kq).norm_sqr() * w).collect()
    });
    let n = directions.len();
    let mut mean = vec![0.0; n];
    let mut max = vec![f64::NEG_INFINITY; n];
    for row in &per_trial {
        for i in 0..n {
            mean[i] += row[i];
            max[i] = max[i].max(row[i]);
        }
    }
    for m in &mut mean {
        *m /= trials as f64;
    }
    Ok(McEstimate { mean, max, per_trial })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::random_thinned;
    use proptest::prelude::*;

    fn direct(grid: &ExcitationGrid, cell: &UnitCell, u: f64, v: f64) -> f64 {
        // textbook element-position sum
        let (p, q) = grid.dims();
        let mut acc = Complex64::new(0.0, 0.0);
        for qi in 0..q {
            for pi in 0..p {
                let (x, y) = cell.position(pi as f64, qi as f64);
                acc += grid.get(pi, qi) * math::cis(2.0 * PI * (x * u + y * v));
            }
        }
        acc.norm_sqr()
    }

    #[test]
    fn element_models() {
        assert_eq!(ElementPattern::Isotropic.power(0.3, 0.9).unwrap(), 1.0);
        assert_eq!(ElementPattern::CosineY.power(0.0, 0.4).unwrap(), 1.0);
        assert_eq!(ElementPattern::CosineY.power(0.5, 0.0).unwrap(), 0.75);
        let t =
            PowerTable::new((-1.0, 1.0), (-1.0, 1.0), 3, 3, vec![0.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        let e = ElementPattern::Tabulated(t);
        assert_eq!(e.power(0.0, 0.0).unwrap(), 2.0);
        assert!((e.power(0.5, 0.0).unwrap() - 1.5).abs() < 1e-15);
        assert!(matches!(e.power(1.2, 0.0), Err(Error::TabulatedOutOfRange { .. })));
        assert!(PowerTable::new((0.0, 1.0), (0.0, 1.0), 2, 2, vec![1.0, -1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn array_factor_cases() {
        let b = Steering::broadside();
        let cell = UnitCell::half_wave();
        let ones = ExcitationGrid::ones(4, 5).unwrap();
        assert!((array_factor(&ones, &cell, 0.0, 0.0, b) - 400.0).abs() < 1e-9);
        let ds = crate::diffsets::twin_prime(11, 13).unwrap().to_excitations(3, 1);
        assert!((array_factor(&ds, &cell, 0.0, 0.0, b) - 5041.0).abs() < 1e-8);
        let skew = UnitCell::new(0.5, 0.0, 0.1, 0.5).unwrap();
        let s = Steering::new(0.1, 0.2).unwrap();
        let g = skew.grating_lobe(1, -1, s);
        let a0 = array_factor(&ds, &skew, 0.1, 0.2, s);
        assert!((array_factor(&ds, &skew, g.u, g.v, s) - a0).abs() <= 1e-9 * a0);
    }

    #[test]
    fn fft_grid_cases() {
        let b = Steering::broadside();
        let cell = UnitCell::half_wave();
        let g = ExcitationGrid::ones(2, 1).unwrap();
        let pg = pattern_grid_fft(&g, &cell, &ElementPattern::Isotropic, 2, b).unwrap();
        let mid = pg.samples().find(|s| s.k == 1 && s.l == 0 && s.b == 0).unwrap();
        assert!((mid.value - 2.0).abs() < 1e-12);

        let g = ExcitationGrid::ones(6, 5).unwrap();
        let pg = pattern_grid_fft(&g, &cell, &ElementPattern::CosineY, 4, b).unwrap();
        assert!((pg.peak_value() - 900.0).abs() < 1e-9);
        assert_eq!((pg.peak_direction().u, pg.peak_direction().v), (0.0, 0.0));

        // O = 1 reproduces the samples
        let ds = crate::diffsets::twin_prime(5, 7).unwrap().to_excitations(1, 2);
        let cell = UnitCell::new(0.5, 0.0, 0.1, 0.5).unwrap();
        let xi = ds.spectral_samples().xi;
        let pg = pattern_grid_fft(&ds, &cell, &ElementPattern::CosineY, 1, b).unwrap();
        for s in pg.samples().filter(|s| s.b == 0 && s.c == 0 && s.direction.visible) {
            let d = s.direction;
            let (c, p) = cell.chi_psi(d.u, d.v, b);
            assert!(math::wrap_pi(c - 2.0 * PI * s.k as f64 / 5.0).abs() < 1e-9);
            assert!(math::wrap_pi(p - 2.0 * PI * s.l as f64 / 7.0).abs() < 1e-9);
            let want = xi[s.k + 5 * s.l] * ElementPattern::CosineY.power(d.u, d.v).unwrap();
            assert!((s.value - want).abs() <= 1e-9 * 289.0);
        }
    }

    #[test]
    fn kernel_cases() {
        assert!((interp_kernel(0.0, 0.0, 7, 9) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        for k in 0..7 {
            for l in 0..9 {
                if k == 0 && l == 0 {
                    continue;
                }
                let z = interp_kernel(2.0 * PI * k as f64 / 7.0, 2.0 * PI * l as f64 / 9.0, 7, 9);
                assert!(z.norm() < 1e-12);
            }
        }
        assert!((interp_kernel(2.0 * PI, 0.0, 7, 9).norm() - 1.0).abs() < 1e-12);
        assert!((interp_kernel(2.0 * PI + 1e-10, 0.0, 8, 9).norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn mc_cases() {
        let cell = UnitCell::new(0.5, 0.0, 0.1, 0.5).unwrap();
        let b = Steering::broadside();
        let acf = crate::diffsets::twin_prime(5, 7).unwrap().to_excitations(0, 0).autocorrelation();
        let dirs = [(0.0, 0.0), (0.31, -0.2), (0.05, 0.6)];
        let est = pattern_mc(&acf, &ElementPattern::CosineY, &cell, b, &dirs, 7, 16).unwrap();
        for row in &est.per_trial {
            assert!((row[0] - 289.0).abs() < 1e-9);
        }
        let again = pattern_mc(&acf, &ElementPattern::CosineY, &cell, b, &dirs, 7, 16).unwrap();
        assert_eq!(est, again);
        let delta = ExcitationGrid::from_binary(5, 7, |p, q| p == 0 && q == 0).unwrap().autocorrelation();
        // flat only on average: sum of |S|^2 over the sample lattice is one
        let est = pattern_mc(&delta, &ElementPattern::Isotropic, &cell, b, &dirs, 1, 2000).unwrap();
        for m in &est.mean {
            assert!((m - 1.0).abs() < 0.15, "{m}");
        }
        let node = cell.sample_direction(5, 7, 2, 3, b);
        let est = pattern_mc(&delta, &ElementPattern::Isotropic, &cell, b, &[(node.u, node.v)], 1, 20).unwrap();
        assert!(est.per_trial.iter().all(|r| (r[0] - 1.0).abs() < 1e-9));
    }

    fn case() -> impl Strategy<Value = (ExcitationGrid, UnitCell, f64, f64)> {
        (1usize..=9, 1usize..=9, 0.25f64..0.9, -0.3f64..0.3, -0.3f64..0.3, 0.25f64..0.9, -1.0f64..1.0, -1.0f64..1.0)
            .prop_flat_map(|(p, q, a, b, c, d, u, v)| {
                proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), p * q).prop_filter_map("cell", move |w| {
                    let cell = UnitCell::new(a, b, c, d).ok()?;
                    let g =
                        ExcitationGrid::new(p, q, w.into_iter().map(|(x, y)| Complex64::new(x, y)).collect()).ok()?;
                    Some((g, cell, u, v))
                })
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn reconstruction_exact((g, cell, u, v) in case()) {
            let b = Steering::broadside();
            let want = direct(&g, &cell, u, v);
            let spec = g.spectral_samples();
            let got = pattern_interpolated(&spec, &ElementPattern::Isotropic, &cell, u, v, b).unwrap();
            let scale = g.energy() * (g.dims().0 * g.dims().1) as f64;
            prop_assert!((got - want).abs() <= 1e-9 * scale.max(want));
            prop_assert!(array_factor(&g, &cell, u, v, b) >= -1e-9 * scale);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn fft_grid_matches_direct(p in 2usize..10, q in 2usize..10, tau in 0.2f64..1.0, seed in any::<u64>(),
                                   u0 in -0.3f64..0.3, v0 in -0.3f64..0.3) {
            let g = random_thinned(p, q, tau, seed).unwrap();
            let cell = UnitCell::new(0.55, 0.05, 0.12, 0.6).unwrap();
            let s = Steering::new(u0, v0).unwrap();
            let ep = ElementPattern::CosineY;
            let pg = pattern_grid_fft(&g, &cell, &ep, 4, s).unwrap();
            for smp in pg.samples() {
                let d = smp.direction;
                let want = array_factor(&g, &cell, d.u, d.v, s) * ep.power_or_zero(d.u, d.v);
                let scale = (g.active_count() * g.active_count()) as f64;
                prop_assert!((smp.value - want).abs() <= 1e-9 * scale);
            }
            prop_assert!(pg.samples().all(|s| s.direction.visible || s.b == 0 && s.c == 0));
        }

        #[test]
        fn predicted_samples_match((g, cell, _u, _v) in case()) {
            let b = Steering::broadside();
            let ep = ElementPattern::CosineY;
            let pred = predict_samples(&g.autocorrelation(), &ep, &cell, b).unwrap();
            for s in pred {
                let want = direct(&g, &cell, s.direction.u, s.direction.v) * ep.power_or_zero(s.direction.u, s.direction.v);
                let scale = g.energy() * (g.dims().0 * g.dims().1) as f64;
                prop_assert!((s.power - want).abs() <= 1e-10 * scale.max(1e-300));
            }
        }
    }
}
