//! Lattice cells, steering, and the maps between direction cosines `(u, v)`
//! and the lattice phase variables `(chi, psi)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math;

const NU_TOL: f64 = 1e-9;
const VISIBLE_TOL: f64 = 1e-12;

/// Lattice generator pair `d1`, `d2` in wavelengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitCell {
    d1x: f64,
    d1y: f64,
    d2x: f64,
    d2y: f64,
    nu: f64,
}

impl UnitCell {
    pub fn new(d1x: f64, d1y: f64, d2x: f64, d2y: f64) -> Result<Self> {
        let nu = d1x * d2y - d2x * d1y;
        if !nu.is_finite() || nu.abs() <= NU_TOL {
            return Err(Error::DegenerateLattice { nu });
        }
        Ok(Self { d1x, d1y, d2x, d2y, nu })
    }

    /// Square cell with half-wavelength spacing.
    pub fn half_wave() -> Self {
        Self::new(0.5, 0.0, 0.0, 0.5).expect("constant cell")
    }

    pub fn d1(&self) -> (f64, f64) {
        (self.d1x, self.d1y)
    }

    pub fn d2(&self) -> (f64, f64) {
        (self.d2x, self.d2y)
    }

    /// Signed cell area `d1x*d2y - d2x*d1y` in square wavelengths.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.d1x * s, self.d1y * s, self.d2x * s, self.d2y * s)
    }

    /// Position of lattice point `(p, q)` in wavelengths.
    pub fn position(&self, p: f64, q: f64) -> (f64, f64) {
        (p * self.d1x + q * self.d2x, p * self.d1y + q * self.d2y)
    }

    pub fn chi_psi(&self, u: f64, v: f64, steer: Steering) -> (f64, f64) {
        let du = u - steer.u0;
        let dv = v - steer.v0;
        (2.0 * PI * (self.d1x * du + self.d1y * dv), 2.0 * PI * (self.d2x * du + self.d2y * dv))
    }

    /// Inverse of [`chi_psi`](Self::chi_psi).
    pub fn direction_at(&self, chi: f64, psi: f64, steer: Steering) -> Direction {
        let k = 2.0 * PI * self.nu;
        let du = (self.d2y * chi - self.d1y * psi) / k;
        let dv = (self.d1x * psi - self.d2x * chi) / k;
        Direction::new(steer.u0 + du, steer.v0 + dv)
    }

    /// Direction of the `(k, l)` pattern sample of a `P x Q` aperture.
    pub fn sample_direction(&self, p: usize, q: usize, k: i64, l: i64, steer: Steering) -> Direction {
        self.fractional_sample(p, q, k as f64, l as f64, steer)
    }

    /// Mid-point between samples `(m, n)` and `(m + 1, n + 1)`.
    pub fn mid_direction(&self, p: usize, q: usize, m: i64, n: i64, steer: Steering) -> Direction {
        self.fractional_sample(p, q, m as f64 + 0.5, n as f64 + 0.5, steer)
    }

    fn fractional_sample(&self, p: usize, q: usize, k: f64, l: f64, steer: Steering) -> Direction {
        let (pf, qf) = (p as f64, q as f64);
        let den = pf * qf * self.nu;
        let u = steer.u0 + (k * qf * self.d2y - l * pf * self.d1y) / den;
        let v = steer.v0 + (l * pf * self.d1x - k * qf * self.d2x) / den;
        Direction::new(u, v)
    }

    /// Replica of the beam at lattice period `(b, c)`.
    pub fn grating_lobe(&self, b: i64, c: i64, steer: Steering) -> Direction {
        let (bf, cf) = (b as f64, c as f64);
        let u = steer.u0 + (self.d2y * bf - self.d1y * cf) / self.nu;
        let v = steer.v0 + (self.d1x * cf - self.d2x * bf) / self.nu;
        Direction::new(u, v)
    }

    /// All replicas with `(b, c)` in `[-max_order, max_order]^2` except the beam itself.
    pub fn grating_lobes(&self, steer: Steering, max_order: u32) -> Vec<GratingLobe> {
        let m = max_order as i64;
        let mut out = Vec::new();
        for b in -m..=m {
            for c in -m..=m {
                if b == 0 && c == 0 {
                    continue;
                }
                out.push(GratingLobe { direction: self.grating_lobe(b, c, steer), b, c });
            }
        }
        out
    }

    /// True when every first-order replica lies strictly outside the unit disk.
    pub fn is_gl_free(&self, steer: Steering) -> bool {
        self.grating_lobes(steer, 1).iter().all(|g| {
            let d = g.direction;
            d.u * d.u + d.v * d.v > 1.0
        })
    }

    /// Largest `|b|` and `|c|` for which a replica can reach the visible disk.
    pub(crate) fn image_window(&self, steer: Steering) -> (i64, i64) {
        let reach = 1.0 + math::hypot(steer.u0, steer.v0);
        let d1 = math::hypot(self.d1x, self.d1y);
        let d2 = math::hypot(self.d2x, self.d2y);
        (math::ceil(d1 * reach + 0.5) as i64, math::ceil(d2 * reach + 0.5) as i64)
    }
}

/// Beam pointing direction as direction cosines.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Steering {
    pub(crate) u0: f64,
    pub(crate) v0: f64,
}

impl Steering {
    pub fn new(u0: f64, v0: f64) -> Result<Self> {
        if !(u0.is_finite() && v0.is_finite()) || u0 * u0 + v0 * v0 > 1.0 + VISIBLE_TOL {
            return Err(Error::InvalidSteering { u0, v0 });
        }
        Ok(Self { u0, v0 })
    }

    pub fn broadside() -> Self {
        Self { u0: 0.0, v0: 0.0 }
    }

    /// From polar angles in radians.
    pub fn from_angles(theta: f64, phi: f64) -> Result<Self> {
        let s = math::sin(theta);
        Self::new(s * math::cos(phi), s * math::sin(phi))
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub u: f64,
    pub v: f64,
    pub visible: bool,
}

impl Direction {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v, visible: u * u + v * v <= 1.0 + VISIBLE_TOL }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingLobe {
    pub direction: Direction,
    pub b: i64,
    pub c: i64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn determinants() {
        assert_eq!(UnitCell::new(0.5, 0.0, 0.0, 0.5).unwrap().nu(), 0.25);
        assert!(close(UnitCell::new(0.5, 0.0, 0.1, 0.5).unwrap().nu(), 0.25, 1e-15));
        assert!(close(UnitCell::new(0.47, 0.21, 0.12, 0.61).unwrap().nu(), 0.2615, 1e-12));
        assert!(matches!(UnitCell::new(0.5, 0.5, 1.0, 1.0), Err(Error::DegenerateLattice { .. })));
    }

    #[test]
    fn sample_directions() {
        let b = Steering::broadside();
        let cell = UnitCell::new(0.5, 0.0, 0.1, 0.5).unwrap();
        let d = cell.sample_direction(17, 19, 1, 0, b);
        assert!(close(d.u, 0.1176, 1e-4) && close(d.v, -0.0235, 1e-4));
        let d = cell.sample_direction(17, 19, 0, 0, b);
        assert_eq!((d.u, d.v), (0.0, 0.0));
        let d = UnitCell::half_wave().sample_direction(11, 13, 1, 1, b);
        assert!(close(d.u, 0.1818, 1e-4) && close(d.v, 0.1538, 1e-4));
    }

    #[test]
    fn mid_directions() {
        let cell = UnitCell::new(0.5, 0.0, 0.1, 0.5).unwrap();
        let b = Steering::broadside();
        let d = cell.mid_direction(17, 19, 0, 0, b);
        assert!(close(d.u, 0.0588, 1e-4) && close(d.v, 0.0409, 1e-4));
        let s = Steering::new(0.2, 0.0).unwrap();
        let e = cell.mid_direction(17, 19, 3, 4, s);
        let f = cell.mid_direction(17, 19, 3, 4, b);
        assert!(close(e.u - f.u, 0.2, 1e-15) && close(e.v, f.v, 1e-15));
        let a = cell.sample_direction(17, 19, 3, 4, b);
        let c = cell.sample_direction(17, 19, 4, 5, b);
        assert!(close(f.u, 0.5 * (a.u + c.u), 1e-15));
        assert!(close(f.v, 0.5 * (a.v + c.v), 1e-15));
    }

    #[test]
    fn chi_psi_cases() {
        let b = Steering::broadside();
        let cell = UnitCell::half_wave();
        let (c, p) = cell.chi_psi(1.0, 0.0, b);
        assert!(close(c, PI, 1e-15) && p == 0.0);
        let s = Steering::new(0.3, -0.2).unwrap();
        assert_eq!(cell.chi_psi(0.3, -0.2, s), (0.0, 0.0));
    }

    #[test]
    fn lobes() {
        let b = Steering::broadside();
        for g in UnitCell::half_wave().grating_lobes(b, 2) {
            assert!(close(g.direction.u, 2.0 * g.b as f64, 1e-12));
            assert!(close(g.direction.v, 2.0 * g.c as f64, 1e-12));
        }
        let cell = UnitCell::new(0.5, 0.0, 0.1, 0.5).unwrap();
        let g = cell.grating_lobe(1, 0, b);
        assert!(close(g.u, 2.0, 1e-12) && close(g.v, -0.4, 1e-12) && !g.visible);
        let g = cell.grating_lobe(0, 1, b);
        assert!(close(g.u, 0.0, 1e-12) && close(g.v, 2.0, 1e-12));
        assert_eq!(cell.grating_lobes(b, 1).len(), 8);
    }

    #[test]
    fn gl_free_cases() {
        let b = Steering::broadside();
        assert!(UnitCell::half_wave().is_gl_free(b));
        assert!(!UnitCell::new(1.0, 0.0, 0.0, 1.0).unwrap().is_gl_free(b));
        assert!(UnitCell::new(0.47, 0.21, 0.12, 0.61).unwrap().is_gl_free(b));
    }

    fn cell_strategy() -> impl Strategy<Value = UnitCell> {
        (0.2f64..1.5, -0.6f64..0.6, -0.6f64..0.6, 0.2f64..1.5).prop_filter_map("degenerate", |(a, b, c, d)| {
            let cell = UnitCell::new(a, b, c, d).ok()?;
            (cell.nu().abs() > 0.02).then_some(cell)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn sample_round_trip(cell in cell_strategy(), p in 1usize..=64, q in 1usize..=64,
                             kf in 0.0f64..1.0, lf in 0.0f64..1.0) {
            let k = (kf * p as f64) as i64;
            let l = (lf * q as f64) as i64;
            let d = cell.sample_direction(p, q, k, l, Steering::broadside());
            let (c, s) = cell.chi_psi(d.u, d.v, Steering::broadside());
            prop_assert!(close(c, 2.0 * PI * k as f64 / p as f64, 1e-12));
            prop_assert!(close(s, 2.0 * PI * l as f64 / q as f64, 1e-12));
        }

        #[test]
        fn steering_is_additive(cell in cell_strategy(), k in 0i64..20, l in 0i64..20,
                                u0 in -0.7f64..0.7, v0 in -0.7f64..0.7) {
            let s = Steering::new(u0, v0).unwrap();
            let a = cell.sample_direction(20, 20, k, l, s);
            let b = cell.sample_direction(20, 20, k, l, Steering::broadside());
            prop_assert_eq!(a.u, b.u + u0);
            prop_assert_eq!(a.v, b.v + v0);
        }

        #[test]
        fn scaling_covariance(cell in cell_strategy(), s in 0.5f64..3.0, k in 0i64..16, l in 0i64..16) {
            let b = Steering::broadside();
            let a = cell.sample_direction(16, 16, k, l, b);
            let c = cell.scaled(s).unwrap().sample_direction(16, 16, k, l, b);
            prop_assert!(close(c.u, a.u / s, 1e-12) && close(c.v, a.v / s, 1e-12));
        }

        #[test]
        fn lobes_are_periods(cell in cell_strategy(), u0 in -0.5f64..0.5, v0 in -0.5f64..0.5) {
            let s = Steering::new(u0, v0).unwrap();
            for g in cell.grating_lobes(s, 2) {
                let (c, p) = cell.chi_psi(g.direction.u, g.direction.v, s);
                prop_assert!(close(c, 2.0 * PI * g.b as f64, 1e-9));
                prop_assert!(close(p, 2.0 * PI * g.c as f64, 1e-9));
            }
        }

        #[test]
        fn inverse_map(cell in cell_strategy(), u in -1.0f64..1.0, v in -1.0f64..1.0) {
            let b = Steering::broadside();
            let (c, p) = cell.chi_psi(u, v, b);
            let d = cell.direction_at(c, p, b);
            prop_assert!(close(d.u, u, 1e-12) && close(d.v, v, 1e-12));
        }
    }
}
