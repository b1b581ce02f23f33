//! Excitation grids, circular autocorrelation and spectral samples.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dft::PaddedDft;
use crate::error::{Error, Result};
use crate::math;

/// `P x Q` complex excitations, index `p + P*q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationGrid {
    p: usize,
    q: usize,
    weights: Vec<Complex64>,
}

impl ExcitationGrid {
    pub fn new(p: usize, q: usize, weights: Vec<Complex64>) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidArgument("grid dimensions must be positive"));
        }
        if weights.len() != p * q {
            return Err(Error::SizeMismatch { expected: p * q, got: weights.len() });
        }
        Ok(Self { p, q, weights })
    }

    pub fn from_fn(p: usize, q: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let mut w = Vec::with_capacity(p * q);
        for qi in 0..q {
            for pi in 0..p {
                w.push(f(pi, qi));
            }
        }
        Self::new(p, q, w)
    }

    pub fn from_binary(p: usize, q: usize, mut on: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        Self::from_fn(p, q, |a, b| Complex64::new(if on(a, b) { 1.0 } else { 0.0 }, 0.0))
    }

    pub fn ones(p: usize, q: usize) -> Result<Self> {
        Self::from_binary(p, q, |_, _| true)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn get(&self, p: usize, q: usize) -> Complex64 {
        self.weights[p + self.p * q]
    }

    pub fn is_binary(&self) -> bool {
        self.weights.iter().all(|w| w.im == 0.0 && (w.re == 0.0 || w.re == 1.0))
    }

    pub fn active_count(&self) -> usize {
        self.weights.iter().filter(|w| w.norm_sqr() != 0.0).count()
    }

    pub fn energy(&self) -> f64 {
        self.weights.iter().map(|w| w.norm_sqr()).sum()
    }

    /// Coherent sum of all weights, the array factor amplitude at the beam.
    pub fn coherent_sum(&self) -> Complex64 {
        self.weights.iter().sum()
    }

    /// `output(p, q) = input((p + sx) mod P, (q + sy) mod Q)`.
    pub fn cyclic_shift(&self, sx: i64, sy: i64) -> Self {
        let (p, q) = (self.p, self.q);
        let ox = sx.rem_euclid(p as i64) as usize;
        let oy = sy.rem_euclid(q as i64) as usize;
        let mut w = Vec::with_capacity(p * q);
        for qi in 0..q {
            let src_q = (qi + oy) % q;
            for pi in 0..p {
                w.push(self.weights[(pi + ox) % p + p * src_q]);
            }
        }
        Self { p, q, weights: w }
    }

    /// Circular autocorrelation with the first factor conjugated.
    pub fn autocorrelation(&self) -> AutocorrGrid {
        let (p, q) = (self.p, self.q);
        let mut values = vec![Complex64::new(0.0, 0.0); p * q];
        for qi in 0..q {
            for pi in 0..p {
                let a = self.weights[pi + p * qi];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let ac = a.conj();
                for t in 0..q {
                    let row = p * ((qi + t) % q);
                    for s in 0..p {
                        values[s + p * t] += ac * self.weights[(pi + s) % p + row];
                    }
                }
            }
        }
        AutocorrGrid { p, q, values }
    }

    /// Aperiodic autocorrelation over lags `[-(P-1), P-1] x [-(Q-1), Q-1]`,
    /// index `(s + P - 1) + (2P - 1)(t + Q - 1)`.
    pub fn linear_autocorrelation(&self) -> Vec<Complex64> {
        let (p, q) = (self.p, self.q);
        let w = 2 * p - 1;
        let mut out = vec![Complex64::new(0.0, 0.0); w * (2 * q - 1)];
        let active: Vec<(usize, usize, Complex64)> = (0..q)
            .flat_map(|qi| (0..p).map(move |pi| (pi, qi)))
            .filter_map(|(pi, qi)| {
                let a = self.weights[pi + p * qi];
                (a.norm_sqr() != 0.0).then_some((pi, qi, a))
            })
            .collect();
        for &(p1, q1, a1) in &active {
            let ac = a1.conj();
            for &(p2, q2, a2) in &active {
                let s = p2 + p - 1 - p1;
                let t = q2 + q - 1 - q1;
                out[s + w * t] += ac * a2;
            }
        }
        out
    }

    pub fn spectral_samples(&self) -> SpectralSamples {
        let x = PaddedDft::new(self.p, self.q, 1).forward(&self.weights);
        SpectralSamples {
            p: self.p,
            q: self.q,
            xi: x.iter().map(|c| c.norm_sqr()).collect(),
            eta: x.iter().map(|c| c.arg()).collect(),
        }
    }
}

/// Circular autocorrelation `a_st`, index `s + P*t`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocorrGrid {
    p: usize,
    q: usize,
    values: Vec<Complex64>,
}

impl AutocorrGrid {
    pub fn new(p: usize, q: usize, values: Vec<Complex64>) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidArgument("grid dimensions must be positive"));
        }
        if values.len() != p * q {
            return Err(Error::SizeMismatch { expected: p * q, got: values.len() });
        }
        Ok(Self { p, q, values })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, s: usize, t: usize) -> Complex64 {
        self.values[s + self.p * t]
    }

    /// Pattern samples `xi_kl = sum_st a_st exp(+j 2pi (sk/P + tl/Q))`.
    pub fn transform(&self) -> Vec<f64> {
        PaddedDft::new(self.p, self.q, 1).forward(&self.values).into_iter().map(|c| c.re).collect()
    }
}

/// Samples `xi_kl = |X_kl|^2` and phases `eta_kl = arg X_kl`, index `k + P*l`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSamples {
    p: usize,
    q: usize,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
}

impl SpectralSamples {
    pub fn new(p: usize, q: usize, xi: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        if xi.len() != p * q || eta.len() != p * q {
            return Err(Error::SizeMismatch { expected: p * q, got: xi.len().min(eta.len()) });
        }
        Ok(Self { p, q, xi, eta })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    pub fn coefficient(&self, k: usize, l: usize) -> Complex64 {
        let i = k + self.p * l;
        math::cis(self.eta[i]) * math::sqrt(self.xi[i].max(0.0))
    }
}

/// Binary grid with exactly `round(tau * PQ)` active cells drawn without replacement.
pub fn random_thinned(p: usize, q: usize, tau: f64, seed: u64) -> Result<ExcitationGrid> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidArgument("thinning factor must lie in [0, 1]"));
    }
    let n = p * q;
    let count = math::round(tau * n as f64) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    for i in sample(&mut rng, n, count).into_iter() {
        w[i] = Complex64::new(1.0, 0.0);
    }
    ExcitationGrid::new(p, q, w)
}

/// Direct evaluation of the array-factor amplitude at `(chi, psi)`.
pub(crate) fn amplitude_at(grid: &ExcitationGrid, chi: f64, psi: f64) -> Complex64 {
    let (p, q) = grid.dims();
    let z1 = math::cis(chi);
    let z2 = math::cis(psi);
    let w = grid.weights();
    let mut total = Complex64::new(0.0, 0.0);
    for qi in (0..q).rev() {
        let mut row = Complex64::new(0.0, 0.0);
        for pi in (0..p).rev() {
            row = row * z1 + w[pi + p * qi];
        }
        total = total * z2 + row;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn brute_spectrum(g: &ExcitationGrid, k: usize, l: usize) -> Complex64 {
        let (p, q) = g.dims();
        let mut acc = Complex64::new(0.0, 0.0);
        for qi in 0..q {
            for pi in 0..p {
                let ph = 2.0 * PI * ((pi * k) as f64 / p as f64 + (qi * l) as f64 / q as f64);
                acc += g.get(pi, qi) * math::cis(ph);
            }
        }
        acc
    }

    fn rel(a: f64, b: f64, scale: f64) -> f64 {
        (a - b).abs() / scale.max(1e-300)
    }

    #[test]
    fn trivial_autocorrelations() {
        let a = ExcitationGrid::ones(2, 2).unwrap().autocorrelation();
        assert!(a.values().iter().all(|v| *v == Complex64::new(4.0, 0.0)));
        let d = ExcitationGrid::from_binary(3, 4, |p, q| p == 0 && q == 0).unwrap();
        let a = d.autocorrelation();
        assert_eq!(a.get(0, 0).re, 1.0);
        assert!(a.values().iter().skip(1).all(|v| v.norm() == 0.0));
    }

    #[test]
    fn ones_spectrum() {
        let s = ExcitationGrid::ones(5, 3).unwrap().spectral_samples();
        assert!((s.xi[0] - 225.0).abs() < 1e-9);
        assert!(s.xi.iter().skip(1).all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn shifts() {
        let g = random_thinned(6, 5, 0.5, 3).unwrap();
        assert_eq!(g.cyclic_shift(0, 0), g);
        assert_eq!(g.cyclic_shift(6, 5), g);
        assert_eq!(g.cyclic_shift(-1, 2), g.cyclic_shift(5, 7));
        let s = g.cyclic_shift(2, 3);
        assert_eq!(s.get(0, 0), g.get(2, 3));
        assert_eq!(s.get(4, 4), g.get(0, 2));
    }

    #[test]
    fn random_counts() {
        assert_eq!(random_thinned(11, 13, 1.0, 9).unwrap(), ExcitationGrid::ones(11, 13).unwrap());
        assert_eq!(random_thinned(11, 13, 0.0, 9).unwrap().active_count(), 0);
        let a = random_thinned(11, 13, 0.5, 42).unwrap();
        assert_eq!(a.active_count(), 72);
        assert!(a.is_binary());
        assert_eq!(a, random_thinned(11, 13, 0.5, 42).unwrap());
        assert_ne!(a, random_thinned(11, 13, 0.5, 43).unwrap());
        assert!(random_thinned(3, 3, 1.5, 0).is_err());
    }

    #[test]
    fn linear_acf_center_is_energy() {
        let g = random_thinned(7, 4, 0.5, 1).unwrap();
        let a = g.linear_autocorrelation();
        let center = (7 - 1) + 13 * (4 - 1);
        assert_eq!(a[center].re, g.energy());
        assert_eq!(a.iter().map(|c| c.re).sum::<f64>(), (g.active_count() * g.active_count()) as f64);
    }

    fn complex_grid() -> impl Strategy<Value = ExcitationGrid> {
        (1usize..=12, 1usize..=12).prop_flat_map(|(p, q)| {
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), p * q).prop_map(move |v| {
                ExcitationGrid::new(p, q, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn wiener_khinchin(g in complex_grid()) {
            let (p, q) = g.dims();
            let s = g.spectral_samples();
            let t = g.autocorrelation().transform();
            let scale = s.xi.iter().cloned().fold(0.0, f64::max);
            let mut sum = 0.0;
            for l in 0..q {
                for k in 0..p {
                    let b = brute_spectrum(&g, k, l);
                    let i = k + p * l;
                    prop_assert!(rel(s.xi[i], b.norm_sqr(), scale) < 1e-9);
                    prop_assert!(rel(t[i], b.norm_sqr(), scale) < 1e-9);
                    prop_assert!((s.coefficient(k, l) - b).norm() <= 1e-9 * scale.sqrt().max(1.0));
                    prop_assert!(s.xi[i] >= -1e-9 * scale);
                    sum += s.xi[i];
                }
            }
            let a00 = g.autocorrelation().get(0, 0);
            prop_assert!(rel(sum, (p * q) as f64 * a00.re, sum) < 1e-9);
            prop_assert!(a00.im == 0.0 && (a00.re - g.energy()).abs() < 1e-12 * g.energy().max(1.0));
        }

        #[test]
        fn hermitian_acf(g in complex_grid()) {
            let (p, q) = g.dims();
            let a = g.autocorrelation();
            let scale = a.get(0, 0).re.max(1e-12);
            for t in 0..q {
                for s in 0..p {
                    let m = a.get((p - s) % p, (q - t) % q).conj();
                    prop_assert!((a.get(s, t) - m).norm() <= 1e-12 * scale);
                }
            }
        }

        #[test]
        fn shift_keeps_xi(g in complex_grid(), sx in -20i64..20, sy in -20i64..20) {
            let a = g.spectral_samples();
            let b = g.cyclic_shift(sx, sy).spectral_samples();
            let scale = a.xi.iter().cloned().fold(0.0, f64::max).max(1e-300);
            for (x, y) in a.xi.iter().zip(&b.xi) {
                prop_assert!((x - y).abs() <= 1e-12 * scale);
            }
            let ab = g.autocorrelation();
            let bb = g.cyclic_shift(sx, sy).autocorrelation();
            for (x, y) in ab.values().iter().zip(bb.values()) {
                prop_assert!((x - y).norm() <= 1e-12 * ab.get(0, 0).re.max(1.0));
            }
        }

        #[test]
        fn binary_acf_integers(p in 1usize..16, q in 1usize..16, tau in 0.0f64..1.0, seed in any::<u64>()) {
            let g = random_thinned(p, q, tau, seed).unwrap();
            for v in g.autocorrelation().values() {
                prop_assert!(v.im == 0.0 && v.re >= 0.0 && (v.re - v.re.round()).abs() < 1e-9);
            }
        }
    }
}
