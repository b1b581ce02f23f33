//! Closed-form performance predictions for difference-set layouts.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::dft::PaddedDft;
use crate::diffsets::{Descriptors, DifferenceSet};
use crate::error::{Error, Result};
use crate::geometry::{Steering, UnitCell};
use crate::math;
use crate::metrics::MainlobeSpec;
use crate::pattern::{kernel_1d, ElementPattern};
use crate::to_db;

/// Where a mainlobe radius came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaBarSource {
    /// `asin(1 / sqrt(PQ |nu|))`, the first null of the equivalent uniform aperture.
    DefaultRule,
    User,
    /// Chosen so that `d_inf` equals a given value.
    Calibrated,
}

/// Mainlobe angular radius entering the directivity bound, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaBar {
    value: f64,
    source: ThetaBarSource,
}

impl ThetaBar {
    fn make(value: f64, source: ThetaBarSource) -> Result<Self> {
        if !(value > 0.0 && value < 0.5 * PI) {
            return Err(Error::InvalidArgument("theta bar must lie in (0, pi/2)"));
        }
        Ok(Self { value, source })
    }

    pub fn user(value: f64) -> Result<Self> {
        Self::make(value, ThetaBarSource::User)
    }

    pub fn default_rule(p: usize, q: usize, cell: &UnitCell) -> Result<Self> {
        let area = (p * q) as f64 * cell.nu().abs();
        if area <= 1.0 {
            return Err(Error::InvalidArgument("aperture too small for the default theta bar rule"));
        }
        Self::make(math::asin(1.0 / math::sqrt(area)), ThetaBarSource::DefaultRule)
    }

    /// Invert the directivity bound for the radius giving `d_inf_db`.
    pub fn calibrated_to_d_inf(desc: &Descriptors, d_inf_db: f64) -> Result<Self> {
        desc.check()?;
        if desc.gamma == 0 {
            return Err(Error::InvalidArgument("bound does not depend on theta bar when gamma = 0"));
        }
        let d = crate::from_db(d_inf_db);
        let (n, h, g) = (desc.order() as f64, desc.h as f64, desc.gamma as f64);
        let one_minus_cos = ((2.0 * desc.peak() / d - h) / g + 1.0) / n;
        if !(one_minus_cos > 0.0 && one_minus_cos < 1.0) {
            return Err(Error::InvalidArgument("requested bound not reachable"));
        }
        Self::make(math::acos(1.0 - one_minus_cos), ThetaBarSource::Calibrated)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn source(&self) -> ThetaBarSource {
        self.source
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleLevels {
    /// Beam sample, element factor included.
    pub peak: f64,
    /// Off-beam sample before the element factor, `H - gamma`.
    pub offpeak: f64,
    /// `(H - gamma) / (gamma (PQ - 1) + H)` in dB.
    pub normalized_offpeak_db: f64,
}

pub fn ds_sample_levels(desc: &Descriptors, ep: &ElementPattern, steer: Steering) -> Result<SampleLevels> {
    desc.check()?;
    Ok(SampleLevels {
        peak: ep.power(steer.u0, steer.v0)? * desc.peak(),
        offpeak: desc.offpeak(),
        normalized_offpeak_db: to_db(desc.offpeak() / desc.peak()),
    })
}

/// Largest element power at an off-beam sample direction (or a visible
/// periodic image of one), relative to the beam.
pub fn epsilon(ep: &ElementPattern, cell: &UnitCell, p: usize, q: usize, steer: Steering) -> Result<f64> {
    let pel0 = ep.power(steer.u0, steer.v0)?;
    if !(pel0 > 0.0) {
        return Err(Error::Numeric("element radiates nothing toward the beam"));
    }
    let (wb, wc) = cell.image_window(steer);
    let mut best: Option<f64> = None;
    for l in 0..q {
        for k in 0..p {
            if k == 0 && l == 0 {
                continue;
            }
            for b in -wb..=wb {
                for c in -wc..=wc {
                    let chi = 2.0 * PI * (k as f64 / p as f64 + b as f64);
                    let psi = 2.0 * PI * (l as f64 / q as f64 + c as f64);
                    let d = cell.direction_at(chi, psi, steer);
                    if d.visible {
                        let r = ep.power(d.u, d.v)? / pel0;
                        best = Some(best.map_or(r, |x| x.max(r)));
                    }
                }
            }
        }
    }
    best.ok_or(Error::NoVisibleSamples)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SllBounds {
    pub sll_inf_db: f64,
    pub sll_sup_db: f64,
    /// `0.5 + 1.5 log10(PQ)`.
    pub mc_rhs: f64,
}

pub fn sll_bounds(desc: &Descriptors, epsilon: f64) -> Result<SllBounds> {
    desc.check()?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive"));
    }
    let base = epsilon * desc.offpeak() / desc.peak();
    let mc_rhs = 0.5 + 1.5 * math::log10(desc.order() as f64);
    Ok(SllBounds { sll_inf_db: to_db(base), sll_sup_db: to_db(base * mc_rhs), mc_rhs })
}

fn d_inf_linear(desc: &Descriptors, tb: ThetaBar) -> Result<f64> {
    desc.check()?;
    let (n, h, g) = (desc.order() as f64, desc.h as f64, desc.gamma as f64);
    let den = g * (n * (1.0 - math::cos(tb.value)) - 1.0) + h;
    if !(den > 0.0) {
        return Err(Error::Numeric("directivity bound denominator not positive"));
    }
    Ok(2.0 * desc.peak() / den)
}

/// Lower bound on the directivity, dB.
pub fn d_inf(desc: &Descriptors, tb: ThetaBar) -> Result<f64> {
    Ok(to_db(d_inf_linear(desc, tb)?))
}

/// Upper bound on the largest half-power beamwidth, degrees.
pub fn bw_sup(desc: &Descriptors, tb: ThetaBar) -> Result<f64> {
    Ok((0.886 * math::sqrt(4.0 * PI / d_inf_linear(desc, tb)?)).to_degrees())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidpointEstimate {
    /// Estimated sidelobe level, dB.
    pub sll_db: f64,
    /// Largest normalized kernel power over the mid-points outside the mainlobe,
    /// to be compared with [`SllBounds::mc_rhs`].
    pub mc_lhs: f64,
}

/// Sidelobe level predicted from the pattern at the sample mid-points, using
/// the exact interpolation kernel and the spectral phases of the shifted set.
pub fn sll_midpoint_estimate(
    ds: &DifferenceSet,
    shift: (i64, i64),
    cell: &UnitCell,
    ep: &ElementPattern,
    ml: &MainlobeSpec,
    steer: Steering,
) -> Result<MidpointEstimate> {
    let desc = ds.descriptors();
    let (p, q) = ds.dims();
    if p < 8 || q < 8 {
        return Err(Error::ApertureTooSmall { p, q });
    }
    ml.check()?;
    let pel0 = ep.power(steer.u0, steer.v0)?;
    if !(pel0 > 0.0) {
        return Err(Error::Numeric("element radiates nothing toward the beam"));
    }
    let grid = ds.to_excitations(shift.0, shift.1);
    let spec = PaddedDft::new(p, q, 1).forward(grid.weights());
    let zero = Complex64::new(0.0, 0.0);
    let unit: Vec<Complex64> =
        spec.iter().enumerate().map(|(i, x)| if i == 0 || x.norm() == 0.0 { zero } else { x / x.norm() }).collect();
    let mid = |n: usize, m: usize, k: usize| kernel_1d(2.0 * PI * (m as f64 + 0.5 - k as f64) / n as f64, n);
    // rows[m + P*l] = sum_k K_P(chi_m - chi_k) e^{j eta_kl}
    let mut rows = alloc::vec![zero; p * q];
    for l in 0..q {
        for m in 0..p {
            let mut acc = zero;
            for k in 0..p {
                acc += mid(p, m, k) * unit[k + p * l];
            }
            rows[m + p * l] = acc;
        }
    }
    let kq: Vec<Complex64> = (0..q).flat_map(|n| (0..q).map(move |l| (n, l))).map(|(n, l)| mid(q, n, l)).collect();
    let (wb, wc) = cell.image_window(steer);
    let mut best: Option<(f64, f64)> = None;
    for n in 0..q {
        for m in 0..p {
            let chi = 2.0 * PI * (m as f64 + 0.5) / p as f64;
            let psi = 2.0 * PI * (n as f64 + 0.5) / q as f64;
            let base = cell.direction_at(chi, psi, steer);
            if ml.contains(chi, psi, p, q, base, steer) {
                continue;
            }
            let mut pel: Option<f64> = None;
            for b in -wb..=wb {
                for c in -wc..=wc {
                    let d = cell.direction_at(chi + 2.0 * PI * b as f64, psi + 2.0 * PI * c as f64, steer);
                    if d.visible {
                        let v = ep.power(d.u, d.v)?;
                        pel = Some(pel.map_or(v, |x| x.max(v)));
                    }
                }
            }
            let Some(pel) = pel else { continue };
            let mut acc = zero;
            for l in 0..q {
                acc += rows[m + p * l] * kq[n * q + l];
            }
            let g = acc.norm_sqr();
            let est = desc.offpeak() * g * pel / (pel0 * desc.peak());
            best = Some(best.map_or((est, g), |(e, gg)| (e.max(est), gg.max(g))));
        }
    }
    let (est, g) = best.ok_or(Error::EmptySidelobeRegion)?;
    Ok(MidpointEstimate { sll_db: to_db(est), mc_lhs: g })
}

/// All closed-form predictions for one set of descriptors on one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    pub sll_inf_db: f64,
    pub sll_sup_db: f64,
    pub d_inf_db: f64,
    pub bw_sup_deg: f64,
    pub epsilon: f64,
    /// Beam sample level, element factor included.
    pub peak_level: f64,
    /// Off-beam sample level `H - gamma`.
    pub offpeak_level: f64,
    pub mc_rhs: f64,
    pub theta_bar: ThetaBar,
}

pub fn bounds_report(
    desc: &Descriptors,
    ep: &ElementPattern,
    cell: &UnitCell,
    steer: Steering,
    theta_bar: ThetaBar,
) -> Result<BoundsReport> {
    let eps = epsilon(ep, cell, desc.p, desc.q, steer)?;
    let sb = sll_bounds(desc, eps)?;
    let lv = ds_sample_levels(desc, ep, steer)?;
    Ok(BoundsReport {
        sll_inf_db: sb.sll_inf_db,
        sll_sup_db: sb.sll_sup_db,
        d_inf_db: d_inf(desc, theta_bar)?,
        bw_sup_deg: bw_sup(desc, theta_bar)?,
        epsilon: eps,
        peak_level: lv.peak,
        offpeak_level: lv.offpeak,
        mc_rhs: sb.mc_rhs,
        theta_bar,
    })
}
