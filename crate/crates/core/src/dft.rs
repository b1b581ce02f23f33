// Zero-padded 2D transform with the positive exponent:
//   out[k + OP*l] = sum_{p,q} x[p + P*q] * exp(+j 2pi (p k / OP + q l / OQ)).

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

pub struct PaddedDft {
    p: usize,
    q: usize,
    op: usize,
    oq: usize,
    #[cfg(feature = "std")]
    rows: std::sync::Arc<dyn rustfft::Fft<f64>>,
    #[cfg(feature = "std")]
    cols: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl PaddedDft {
    pub fn new(p: usize, q: usize, oversample: usize) -> Self {
        let (op, oq) = (p * oversample, q * oversample);
        #[cfg(feature = "std")]
        {
            let mut planner = rustfft::FftPlanner::new();
            // rustfft's inverse transform carries the +j sign and no scaling.
            let rows = planner.plan_fft_inverse(op);
            let cols = planner.plan_fft_inverse(oq);
            Self { p, q, op, oq, rows, cols }
        }
        #[cfg(not(feature = "std"))]
        {
            Self { p, q, op, oq }
        }
    }

    #[cfg(feature = "std")]
    pub fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        let (p, q, op, oq) = (self.p, self.q, self.op, self.oq);
        debug_assert_eq!(x.len(), p * q);
        let zero = Complex64::new(0.0, 0.0);
        let mut stage = vec![zero; op * q];
        for qi in 0..q {
            stage[qi * op..qi * op + p].copy_from_slice(&x[qi * p..(qi + 1) * p]);
        }
        self.rows.process(&mut stage);
        let mut tr = vec![zero; oq * op];
        for qi in 0..q {
            for k in 0..op {
                tr[k * oq + qi] = stage[qi * op + k];
            }
        }
        self.cols.process(&mut tr);
        let mut out = vec![zero; op * oq];
        for k in 0..op {
            for l in 0..oq {
                out[k + op * l] = tr[k * oq + l];
            }
        }
        out
    }

    #[cfg(not(feature = "std"))]
    pub fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        direct(x, self.p, self.q, self.op, self.oq)
    }
}

/// Separable direct evaluation, the fallback without an FFT backend.
#[cfg(any(test, not(feature = "std")))]
pub fn direct(x: &[Complex64], p: usize, q: usize, op: usize, oq: usize) -> Vec<Complex64> {
    use crate::math;
    use core::f64::consts::PI;

    let zero = Complex64::new(0.0, 0.0);
    let tw_r: Vec<Complex64> = (0..op).map(|i| math::cis(2.0 * PI * i as f64 / op as f64)).collect();
    let tw_c: Vec<Complex64> = (0..oq).map(|i| math::cis(2.0 * PI * i as f64 / oq as f64)).collect();
    let mut stage = vec![zero; op * q];
    for qi in 0..q {
        for k in 0..op {
            let mut acc = zero;
            for pi in 0..p {
                acc += x[pi + p * qi] * tw_r[(pi * k) % op];
            }
            stage[qi * op + k] = acc;
        }
    }
    let mut out = vec![zero; op * oq];
    for l in 0..oq {
        for k in 0..op {
            let mut acc = zero;
            for qi in 0..q {
                acc += stage[qi * op + k] * tw_c[(qi * l) % oq];
            }
            out[k + op * l] = acc;
        }
    }
    out
}
