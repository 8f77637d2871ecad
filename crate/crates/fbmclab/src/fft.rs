//! Unitary DFT helpers on top of rustfft.
//!
//! The transceiver uses the normalized N-point DFT/IDFT (scale 1/sqrt(N) in
//! both directions) so the transform sandwich is exactly unitary.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Planned unitary forward/inverse DFT of a fixed length.
#[derive(Clone)]
pub struct UnitaryDft {
    len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl UnitaryDft {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            len,
            fwd: planner.plan_fft_forward(len),
            inv: planner.plan_fft_inverse(len),
            scale: 1.0 / (len as f64).sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place unitary DFT: `X[k] = sum_n x[n] e^{-j2pi kn/N} / sqrt(N)`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.len);
        self.fwd.process(buf);
        for v in buf.iter_mut() {
            *v *= self.scale;
        }
    }

    /// In-place unitary IDFT: `x[n] = sum_k X[k] e^{+j2pi kn/N} / sqrt(N)`.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.len);
        self.inv.process(buf);
        for v in buf.iter_mut() {
            *v *= self.scale;
        }
    }
}

impl std::fmt::Debug for UnitaryDft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("UnitaryDft").field("len", &self.len).finish()
    }
}

/// Length-N vector of the per-subcarrier phase rotation
/// `phi_m[n] = e^{-j pi (n + 2m)/2}`.
///
/// The entries are exact unit values from {1, -j, -1, +j}; no trigonometry,
/// so repeated rotations stay bit-reproducible.
pub fn phase_vector(n_subcarriers: usize, m: usize) -> Vec<Complex64> {
    (0..n_subcarriers)
        .map(|n| quarter_turn((n + 2 * m) % 4))
        .collect()
}

/// `e^{-j pi q / 2}` for integer q.
#[inline]
pub fn quarter_turn(q: usize) -> Complex64 {
    match q % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}
