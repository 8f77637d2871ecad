//! QAM mapping, OQAM branch splitting, and the symbol-grid containers.
//!
//! Gray-coded square constellations with unit average power, scaled by
//! sqrt(symbol_power). Hard-decision demapping breaks exact distance ties
//! toward the lexicographically smallest bit pattern.

use num_complex::Complex64;
use rand::Rng;

use crate::config::Modulation;
use crate::error::FbmcError;
use crate::rng::{rng_for, Domain};
use crate::Result;

/// One block of QAM symbols: an (N * N_t) x M complex grid stored column by
/// column (symbol index m is the column). Entry layout inside a column is
/// subcarrier-major, antenna-minor: index `n * n_tx + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    pub n_subcarriers: usize,
    pub n_tx: usize,
    pub block_len: usize,
    pub data: Vec<Complex64>,
}

impl SymbolGrid {
    pub fn zeros(n_subcarriers: usize, n_tx: usize, block_len: usize) -> Self {
        Self {
            n_subcarriers,
            n_tx,
            block_len,
            data: vec![Complex64::new(0.0, 0.0); n_subcarriers * n_tx * block_len],
        }
    }

    #[inline]
    pub fn column_len(&self) -> usize {
        self.n_subcarriers * self.n_tx
    }

    #[inline]
    pub fn entry(&self, m: usize, n: usize, j: usize) -> Complex64 {
        self.data[m * self.column_len() + n * self.n_tx + j]
    }

    #[inline]
    pub fn entry_mut(&mut self, m: usize, n: usize, j: usize) -> &mut Complex64 {
        let idx = m * self.column_len() + n * self.n_tx + j;
        &mut self.data[idx]
    }

    /// Column m (length N * N_t).
    pub fn symbol(&self, m: usize) -> &[Complex64] {
        let w = self.column_len();
        &self.data[m * w..(m + 1) * w]
    }

    /// The stream-j entries of column m (length N).
    pub fn stream_symbol(&self, m: usize, j: usize) -> Vec<Complex64> {
        (0..self.n_subcarriers).map(|n| self.entry(m, n, j)).collect()
    }

    /// Mean per-entry power.
    pub fn mean_power(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.data.len() as f64
    }
}

/// Real and imaginary branch grids of one SymbolGrid (same shape, real).
#[derive(Debug, Clone, PartialEq)]
pub struct BranchGrid {
    pub n_subcarriers: usize,
    pub n_tx: usize,
    pub block_len: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl BranchGrid {
    #[inline]
    pub fn column_len(&self) -> usize {
        self.n_subcarriers * self.n_tx
    }

    /// Stream-j real-branch entries of column m.
    pub fn stream_re(&self, m: usize, j: usize) -> Vec<f64> {
        let w = self.column_len();
        (0..self.n_subcarriers)
            .map(|n| self.re[m * w + n * self.n_tx + j])
            .collect()
    }

    pub fn stream_im(&self, m: usize, j: usize) -> Vec<f64> {
        let w = self.column_len();
        (0..self.n_subcarriers)
            .map(|n| self.im[m * w + n * self.n_tx + j])
            .collect()
    }

    /// Recombine into the complex grid: S = re + j*im.
    pub fn recombine(&self) -> SymbolGrid {
        SymbolGrid {
            n_subcarriers: self.n_subcarriers,
            n_tx: self.n_tx,
            block_len: self.block_len,
            data: self
                .re
                .iter()
                .zip(&self.im)
                .map(|(&r, &i)| Complex64::new(r, i))
                .collect(),
        }
    }
}

/// Element-wise real/imaginary extraction (the OQAM branch split).
pub fn split_oqam(grid: &SymbolGrid) -> BranchGrid {
    BranchGrid {
        n_subcarriers: grid.n_subcarriers,
        n_tx: grid.n_tx,
        block_len: grid.block_len,
        re: grid.data.iter().map(|z| z.re).collect(),
        im: grid.data.iter().map(|z| z.im).collect(),
    }
}

/// Gray-coded PAM levels per axis, unit-average-power constellation.
/// 2 levels for QPSK, 4 for 16QAM, 8 for 64QAM. `levels[g]` is the amplitude
/// of Gray label g; labels are listed in increasing numeric label order.
fn gray_pam(order: Modulation) -> (&'static [f64], f64) {
    // scale = 1/sqrt(mean square of the raw +-1,+-3,... levels), so the full
    // square constellation has exactly unit average power.
    match order {
        // 1 bit per axis: 0 -> +1, 1 -> -1
        Modulation::Qpsk => (&[1.0, -1.0], std::f64::consts::FRAC_1_SQRT_2),
        // 2 bits per axis, Gray order 00,01,11,10 maps to -3,-1,+1,+3:
        // label b1b0: 00 -> -3, 01 -> -1, 10 -> +3, 11 -> +1
        Modulation::Qam16 => (&[-3.0, -1.0, 3.0, 1.0], 0.31622776601683794), // 1/sqrt(10)
        // 3 bits per axis, Gray sequence 000,001,011,010,110,111,101,100
        // walks -7..+7; stored by numeric label:
        Modulation::Qam64 => (
            &[-7.0, -5.0, -1.0, -3.0, 7.0, 5.0, 1.0, 3.0],
            0.1543033499620919, // 1/sqrt(42)
        ),
    }
}

/// Map a bit sequence onto a SymbolGrid.
///
/// Bit order: consecutive `bits_per_symbol` bits per QAM symbol, first half
/// on the real axis, second half on the imaginary axis; symbols fill the
/// grid in (m, n, j) iteration order.
pub fn map_qam(
    bits: &[u8],
    order: Modulation,
    n_subcarriers: usize,
    n_tx: usize,
    block_len: usize,
    symbol_power: f64,
) -> Result<SymbolGrid> {
    let bps = order.bits_per_symbol();
    let needed = bps * n_subcarriers * n_tx * block_len;
    if bits.len() != needed {
        return Err(FbmcError::BitLength {
            got: bits.len(),
            needed,
            order: order.name(),
        });
    }
    let (levels, scale) = gray_pam(order);
    let axis_bits = bps / 2;
    let amp = scale * symbol_power.sqrt();
    let mut grid = SymbolGrid::zeros(n_subcarriers, n_tx, block_len);
    let mut it = bits.chunks_exact(bps);
    for m in 0..block_len {
        for n in 0..n_subcarriers {
            for j in 0..n_tx {
                let chunk = it.next().expect("length checked above");
                let (re_bits, im_bits) = chunk.split_at(axis_bits);
                let li = bits_to_label(re_bits);
                let lq = bits_to_label(im_bits);
                *grid.entry_mut(m, n, j) =
                    Complex64::new(levels[li] * amp, levels[lq] * amp);
            }
        }
    }
    Ok(grid)
}

#[inline]
fn bits_to_label(bits: &[u8]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | (b as usize & 1))
}

/// Hard-decision nearest-level slicing of one real amplitude.
/// Ties resolve to the lexicographically smallest bit label because labels
/// are scanned in increasing order with a strict improvement test.
fn slice_axis(value: f64, levels: &[f64], amp: f64) -> usize {
    let mut best_label = 0usize;
    let mut best_dist = f64::INFINITY;
    for (label, &level) in levels.iter().enumerate() {
        let d = (value - level * amp).abs();
        if d < best_dist {
            best_dist = d;
            best_label = label;
        }
    }
    best_label
}

/// Slice a complex value to the nearest constellation point.
pub fn slice_symbol(z: Complex64, order: Modulation, symbol_power: f64) -> Complex64 {
    let (levels, scale) = gray_pam(order);
    let amp = scale * symbol_power.sqrt();
    let li = slice_axis(z.re, levels, amp);
    let lq = slice_axis(z.im, levels, amp);
    Complex64::new(levels[li] * amp, levels[lq] * amp)
}

/// Slice one real-axis amplitude to the nearest PAM level (used by the
/// decision-directed compensation sweep).
pub fn slice_axis_value(v: f64, order: Modulation, symbol_power: f64) -> f64 {
    let (levels, scale) = gray_pam(order);
    let amp = scale * symbol_power.sqrt();
    levels[slice_axis(v, levels, amp)] * amp
}

/// Minimum-distance hard demapping back to bits.
pub fn demap_qam(grid: &SymbolGrid, order: Modulation, symbol_power: f64) -> Vec<u8> {
    let (levels, scale) = gray_pam(order);
    let amp = scale * symbol_power.sqrt();
    let bps = order.bits_per_symbol();
    let axis_bits = bps / 2;
    let mut bits = Vec::with_capacity(grid.data.len() * bps);
    for m in 0..grid.block_len {
        for n in 0..grid.n_subcarriers {
            for j in 0..grid.n_tx {
                let z = grid.entry(m, n, j);
                push_label_bits(&mut bits, slice_axis(z.re, levels, amp), axis_bits);
                push_label_bits(&mut bits, slice_axis(z.im, levels, amp), axis_bits);
            }
        }
    }
    bits
}

#[inline]
fn push_label_bits(bits: &mut Vec<u8>, label: usize, width: usize) {
    for k in (0..width).rev() {
        bits.push(((label >> k) & 1) as u8);
    }
}

/// Deterministic random bits keyed by (seed, trial).
pub fn random_bits(count: usize, seed: u64, trial: u64) -> Vec<u8> {
    let mut rng = rng_for(seed, Domain::Bits, trial);
    (0..count).map(|_| rng.gen_range(0..=1u8)).collect()
}

/// Random symbol grid drawn through the bit mapper (keyed by seed/trial).
pub fn random_grid(
    order: Modulation,
    n_subcarriers: usize,
    n_tx: usize,
    block_len: usize,
    symbol_power: f64,
    seed: u64,
    trial: u64,
) -> SymbolGrid {
    let bps = order.bits_per_symbol();
    let bits = random_bits(bps * n_subcarriers * n_tx * block_len, seed, trial);
    map_qam(&bits, order, n_subcarriers, n_tx, block_len, symbol_power)
        .expect("bit count generated to match")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qpsk_corners() {
        let g = map_qam(&[0, 0], Modulation::Qpsk, 1, 1, 1, 1.0).unwrap();
        let z = g.entry(0, 0, 0);
        let e = std::f64::consts::FRAC_1_SQRT_2;
        assert!((z.re - e).abs() < 1e-15 && (z.im - e).abs() < 1e-15);
        let g = map_qam(&[1, 1], Modulation::Qpsk, 1, 1, 1, 1.0).unwrap();
        let z = g.entry(0, 0, 0);
        assert!((z.re + e).abs() < 1e-15 && (z.im + e).abs() < 1e-15);
    }

    #[test]
    fn all_16qam_points_have_unit_mean_power() {
        // enumerate all 16 points through the mapper and average
        let mut total = 0.0;
        for label in 0..16u8 {
            let bits: Vec<u8> = (0..4).rev().map(|k| (label >> k) & 1).collect();
            let g = map_qam(&bits, Modulation::Qam16, 1, 1, 1, 1.0).unwrap();
            total += g.entry(0, 0, 0).norm_sqr();
        }
        assert!((total / 16.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_64qam_points_have_unit_mean_power() {
        let mut total = 0.0;
        for label in 0..64u8 {
            let bits: Vec<u8> = (0..6).rev().map(|k| (label >> k) & 1).collect();
            let g = map_qam(&bits, Modulation::Qam64, 1, 1, 1, 1.0).unwrap();
            total += g.entry(0, 0, 0).norm_sqr();
        }
        assert!((total / 64.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gray_axis_neighbors_differ_in_one_bit() {
        // Walk the PAM levels in amplitude order and check adjacent labels
        // differ in exactly one bit: the Gray property per axis.
        for order in [Modulation::Qam16, Modulation::Qam64] {
            let (levels, _) = gray_pam(order);
            let mut by_amp: Vec<(usize, f64)> =
                levels.iter().cloned().enumerate().map(|(l, a)| (l, a)).collect();
            by_amp.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            for pair in by_amp.windows(2) {
                let diff = (pair[0].0 ^ pair[1].0).count_ones();
                assert_eq!(diff, 1, "{order:?}: labels {pair:?}");
            }
        }
    }

    #[test]
    fn map_demap_roundtrip() {
        for order in [Modulation::Qpsk, Modulation::Qam16, Modulation::Qam64] {
            let n = 8;
            let count = order.bits_per_symbol() * n * 2 * 4;
            let bits = random_bits(count, 7, 3);
            let g = map_qam(&bits, order, n, 2, 4, 2.5).unwrap();
            let back = demap_qam(&g, order, 2.5);
            assert_eq!(bits, back, "{order:?}");
        }
    }

    #[test]
    fn qpsk_noisy_corner_demaps_to_00() {
        let e = std::f64::consts::FRAC_1_SQRT_2;
        let mut g = SymbolGrid::zeros(1, 1, 1);
        *g.entry_mut(0, 0, 0) = Complex64::new(0.9 * e, 1.1 * e);
        assert_eq!(demap_qam(&g, Modulation::Qpsk, 1.0), vec![0, 0]);
    }

    #[test]
    fn exact_midpoint_ties_break_to_smallest_pattern() {
        let g = SymbolGrid::zeros(1, 1, 1); // exactly 0 + 0j
        assert_eq!(demap_qam(&g, Modulation::Qpsk, 1.0), vec![0, 0]);
    }

    #[test]
    fn split_recombine_is_identity() {
        let g = random_grid(Modulation::Qam16, 8, 2, 3, 1.0, 5, 0);
        let b = split_oqam(&g);
        assert_eq!(b.recombine(), g);
    }

    #[test]
    fn split_extracts_parts() {
        let mut g = SymbolGrid::zeros(1, 1, 1);
        *g.entry_mut(0, 0, 0) = Complex64::new(3.0, 4.0);
        let b = split_oqam(&g);
        assert_eq!(b.re[0], 3.0);
        assert_eq!(b.im[0], 4.0);
    }

    #[test]
    fn purely_real_grid_has_zero_imag_branch() {
        let mut g = SymbolGrid::zeros(4, 1, 2);
        for v in g.data.iter_mut() {
            *v = Complex64::new(1.25, 0.0);
        }
        let b = split_oqam(&g);
        assert!(b.im.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn empirical_power_approaches_symbol_power() {
        // >= 1e5 entries, 1% tolerance
        let g = random_grid(Modulation::Qam16, 64, 2, 1000, 2.0, 123, 0);
        assert!(g.data.len() >= 100_000);
        let p = g.mean_power();
        assert!((p - 2.0).abs() / 2.0 < 0.01, "mean power {p}");
    }

    #[test]
    fn equal_seed_identical_grid_distinct_seed_differs() {
        let a = random_grid(Modulation::Qpsk, 16, 2, 4, 1.0, 9, 5);
        let b = random_grid(Modulation::Qpsk, 16, 2, 4, 1.0, 9, 5);
        assert_eq!(a, b);
        let c = random_grid(Modulation::Qpsk, 16, 2, 4, 1.0, 10, 5);
        assert_ne!(a, c);
    }

    #[test]
    fn wrong_bit_count_rejected() {
        let err = map_qam(&[0, 1, 0], Modulation::Qpsk, 1, 1, 1, 1.0);
        assert!(matches!(err, Err(FbmcError::BitLength { .. })));
    }
}
