//! Banded block filter matrices, correlation blocks, truncation-error
//! blocks, and phase-rotated interference kernels.
//!
//! The per-stream synthesis matrix is block-Toeplitz with diagonal N x N
//! blocks: block row r, block column m holds `diag(w_slice[r - m + i_F])`
//! whenever that slice index falls in [0, K). Nothing is ever materialized
//! dense in production paths; a block is fully described by an N-vector and
//! the whole matrix by its K slices. The antenna dimension is a Kronecker
//! product with the identity and is handled by applying the same per-stream
//! operator to each stream.
//!
//! Correlation blocks `G_(m,i) = sum_r W[r-m]^T W[r-i]` are therefore
//! diagonal N-vectors, and the interference kernels
//! `Q_(m,i) = Phi_m^H F G_(m,i) F^H Phi_i` are circulants twisted by an
//! exact quarter-turn phase, built from a single length-N DFT of the block
//! diagonal.

use num_complex::Complex64;

use crate::error::FbmcError;
use crate::fft::{quarter_turn, UnitaryDft};
use crate::linalg::{CMat, RMat};
use crate::prototype::PrototypeFilter;
use crate::Result;

/// Which prototype (I or Q branch) a filter matrix applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    I,
    Q,
}

/// Ordered (analysis, synthesis) branch pair of a correlation or kernel.
/// The first letter is the receive-side filter (transposed factor), the
/// second the transmit-side filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchPair {
    II,
    IQ,
    QQ,
    QI,
}

impl BranchPair {
    pub fn analysis(self) -> Branch {
        match self {
            BranchPair::II | BranchPair::IQ => Branch::I,
            BranchPair::QQ | BranchPair::QI => Branch::Q,
        }
    }

    pub fn synthesis(self) -> Branch {
        match self {
            BranchPair::II | BranchPair::QI => Branch::I,
            BranchPair::IQ | BranchPair::QQ => Branch::Q,
        }
    }
}

/// Banded block-Toeplitz synthesis matrix, stored as its K slice vectors
/// plus the truncation offsets.
#[derive(Debug, Clone)]
pub struct SynthesisMatrix {
    pub n_subcarriers: usize,
    pub overlap: usize,
    pub block_len: usize,
    pub cut_front: usize,
    pub cut_rear: usize,
    slices: Vec<Vec<f64>>,
}

impl SynthesisMatrix {
    pub fn new(
        filter: &PrototypeFilter,
        branch: Branch,
        block_len: usize,
        cut_front: usize,
        cut_rear: usize,
    ) -> Result<Self> {
        if cut_front + cut_rear > filter.overlap - 1 {
            return Err(FbmcError::TruncationTooDeep {
                cut_front,
                cut_rear,
                max: filter.overlap - 1,
            });
        }
        let coeffs = match branch {
            Branch::I => &filter.coeffs,
            Branch::Q => &filter.q_coeffs,
        };
        let slices = coeffs
            .chunks_exact(filter.n_subcarriers)
            .map(|c| c.to_vec())
            .collect();
        Ok(Self {
            n_subcarriers: filter.n_subcarriers,
            overlap: filter.overlap,
            block_len,
            cut_front,
            cut_rear,
            slices,
        })
    }

    /// Kept block rows: K + M - 1 - i_F - i_R.
    pub fn block_rows(&self) -> usize {
        self.overlap + self.block_len - 1 - self.cut_front - self.cut_rear
    }

    pub fn rows(&self) -> usize {
        self.block_rows() * self.n_subcarriers
    }

    pub fn cols(&self) -> usize {
        self.block_len * self.n_subcarriers
    }

    /// Slice index at (block row r, block column m), if inside the band.
    #[inline]
    fn slice_at(&self, r: usize, m: usize) -> Option<&[f64]> {
        let k = (r + self.cut_front).checked_sub(m)?;
        if k < self.overlap {
            Some(&self.slices[k])
        } else {
            None
        }
    }

    /// Apply the matrix to M per-symbol blocks (each length N): the linear
    /// convolution of the per-subchannel signals with the filter, restricted
    /// to the kept rows.
    pub fn synthesize(&self, blocks: &[Vec<Complex64>]) -> Result<Vec<Complex64>> {
        let n = self.n_subcarriers;
        if blocks.len() != self.block_len || blocks.iter().any(|b| b.len() != n) {
            return Err(FbmcError::DimensionMismatch(format!(
                "synthesize expects {} blocks of {} samples",
                self.block_len, n
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows()];
        for r in 0..self.block_rows() {
            let seg = &mut out[r * n..(r + 1) * n];
            for (m, block) in blocks.iter().enumerate() {
                if let Some(w) = self.slice_at(r, m) {
                    for t in 0..n {
                        seg[t] += w[t] * block[t];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Apply the transpose (matched filter): segment the signal into kept
    /// rows and correlate against each symbol's slices.
    pub fn analyze(&self, signal: &[Complex64]) -> Result<Vec<Vec<Complex64>>> {
        let n = self.n_subcarriers;
        if signal.len() != self.rows() {
            return Err(FbmcError::DimensionMismatch(format!(
                "analyze expects {} samples, got {}",
                self.rows(),
                signal.len()
            )));
        }
        let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; self.block_len];
        for r in 0..self.block_rows() {
            let seg = &signal[r * n..(r + 1) * n];
            for (m, block) in out.iter_mut().enumerate() {
                if let Some(w) = self.slice_at(r, m) {
                    for t in 0..n {
                        block[t] += w[t] * seg[t];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Dense materialization. Test oracle only; production paths stay
    /// slice-wise.
    pub fn to_dense(&self) -> RMat {
        let n = self.n_subcarriers;
        let mut dense = RMat::zeros(self.rows(), self.cols());
        for r in 0..self.block_rows() {
            for m in 0..self.block_len {
                if let Some(w) = self.slice_at(r, m) {
                    for t in 0..n {
                        dense[(r * n + t, m * n + t)] = w[t];
                    }
                }
            }
        }
        dense
    }
}

/// M x M grid of diagonal N x N blocks, each stored as its N-vector.
/// `None` marks blocks that are identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGrid {
    pub n_subcarriers: usize,
    pub block_len: usize,
    blocks: Vec<Option<Vec<f64>>>,
}

impl BlockGrid {
    fn empty(n_subcarriers: usize, block_len: usize) -> Self {
        Self {
            n_subcarriers,
            block_len,
            blocks: vec![None; block_len * block_len],
        }
    }

    pub fn block(&self, m: usize, i: usize) -> Option<&[f64]> {
        self.blocks[m * self.block_len + i].as_deref()
    }

    /// Block as a dense diagonal vector, zeros if absent.
    pub fn block_or_zero(&self, m: usize, i: usize) -> Vec<f64> {
        self.block(m, i)
            .map(|b| b.to_vec())
            .unwrap_or_else(|| vec![0.0; self.n_subcarriers])
    }

    fn set(&mut self, m: usize, i: usize, v: Vec<f64>) {
        self.blocks[m * self.block_len + i] = Some(v);
    }

    pub fn frobenius(&self) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .flat_map(|b| b.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// Correlation grid `G = A^T B` of two synthesis matrices sharing
/// (N, M, i_F, i_R). Block (m, i) is diagonal with entries
/// `sum_r w_a[(r-m)N + t] * w_b[(r-i)N + t]` over the kept rows.
pub fn correlation_grid(a: &SynthesisMatrix, b: &SynthesisMatrix) -> Result<BlockGrid> {
    if a.n_subcarriers != b.n_subcarriers
        || a.block_len != b.block_len
        || a.cut_front != b.cut_front
        || a.cut_rear != b.cut_rear
        || a.overlap != b.overlap
    {
        return Err(FbmcError::DimensionMismatch(
            "correlation operands must share (N, M, K, i_F, i_R)".into(),
        ));
    }
    let n = a.n_subcarriers;
    let m_blocks = a.block_len;
    let k = a.overlap;
    let mut grid = BlockGrid::empty(n, m_blocks);
    for m in 0..m_blocks {
        for i in 0..m_blocks {
            if m.abs_diff(i) >= k {
                continue; // outside the band, exactly zero
            }
            let lo = a.cut_front.max(m).max(i);
            let hi = (k + m_blocks - 1 - a.cut_rear).min(m + k).min(i + k);
            if lo >= hi {
                continue;
            }
            let mut acc = vec![0.0f64; n];
            for r in lo..hi {
                let wa = &a.slices[r - m];
                let wb = &b.slices[r - i];
                for t in 0..n {
                    acc[t] += wa[t] * wb[t];
                }
            }
            grid.set(m, i, acc);
        }
    }
    Ok(grid)
}

/// Truncation-error grid: the slice products carried by the removed rows,
/// so that `G_orig = G_trunc + Delta` holds block-wise exactly. The front
/// term comes from rows [0, i_F), the rear term from the last i_R rows of
/// the untruncated matrix.
pub fn delta_grid(
    filter: &PrototypeFilter,
    pair: BranchPair,
    block_len: usize,
    cut_front: usize,
    cut_rear: usize,
) -> Result<BlockGrid> {
    if cut_front + cut_rear > filter.overlap - 1 {
        return Err(FbmcError::TruncationTooDeep {
            cut_front,
            cut_rear,
            max: filter.overlap - 1,
        });
    }
    let n = filter.n_subcarriers;
    let k = filter.overlap;
    let slice_a = |kk: usize| match pair.analysis() {
        Branch::I => filter.slice_i(kk),
        Branch::Q => filter.slice_q(kk),
    };
    let slice_b = |kk: usize| match pair.synthesis() {
        Branch::I => filter.slice_i(kk),
        Branch::Q => filter.slice_q(kk),
    };
    let total_rows = k + block_len - 1;
    let removed: Vec<usize> = (0..cut_front)
        .chain(total_rows - cut_rear..total_rows)
        .collect();
    let mut grid = BlockGrid::empty(n, block_len);
    for m in 0..block_len {
        for i in 0..block_len {
            let mut acc: Option<Vec<f64>> = None;
            for &r in &removed {
                let (ka, kb) = match (r.checked_sub(m), r.checked_sub(i)) {
                    (Some(ka), Some(kb)) if ka < k && kb < k => (ka, kb),
                    _ => continue,
                };
                let acc = acc.get_or_insert_with(|| vec![0.0f64; n]);
                let wa = slice_a(ka);
                let wb = slice_b(kb);
                for t in 0..n {
                    acc[t] += wa[t] * wb[t];
                }
            }
            if let Some(v) = acc {
                grid.set(m, i, v);
            }
        }
    }
    Ok(grid)
}

/// Build all four correlation grids for one scenario.
pub fn correlation_set(
    filter: &PrototypeFilter,
    block_len: usize,
    cut_front: usize,
    cut_rear: usize,
) -> Result<CorrelationSet> {
    let build = |pair: BranchPair| -> Result<BlockGrid> {
        let a = SynthesisMatrix::new(filter, pair.analysis(), block_len, cut_front, cut_rear)?;
        let b = SynthesisMatrix::new(filter, pair.synthesis(), block_len, cut_front, cut_rear)?;
        correlation_grid(&a, &b)
    };
    Ok(CorrelationSet {
        ii: build(BranchPair::II)?,
        iq: build(BranchPair::IQ)?,
        qq: build(BranchPair::QQ)?,
        qi: build(BranchPair::QI)?,
        delta_ii: delta_grid(filter, BranchPair::II, block_len, cut_front, cut_rear)?,
        delta_iq: delta_grid(filter, BranchPair::IQ, block_len, cut_front, cut_rear)?,
        delta_qq: delta_grid(filter, BranchPair::QQ, block_len, cut_front, cut_rear)?,
        delta_qi: delta_grid(filter, BranchPair::QI, block_len, cut_front, cut_rear)?,
    })
}

/// The four correlation grids of a scenario plus their truncation-error
/// twins.
#[derive(Debug, Clone)]
pub struct CorrelationSet {
    pub ii: BlockGrid,
    pub iq: BlockGrid,
    pub qq: BlockGrid,
    pub qi: BlockGrid,
    pub delta_ii: BlockGrid,
    pub delta_iq: BlockGrid,
    pub delta_qq: BlockGrid,
    pub delta_qi: BlockGrid,
}

impl CorrelationSet {
    pub fn grid(&self, pair: BranchPair) -> &BlockGrid {
        match pair {
            BranchPair::II => &self.ii,
            BranchPair::IQ => &self.iq,
            BranchPair::QQ => &self.qq,
            BranchPair::QI => &self.qi,
        }
    }

    pub fn delta(&self, pair: BranchPair) -> &BlockGrid {
        match pair {
            BranchPair::II => &self.delta_ii,
            BranchPair::IQ => &self.delta_iq,
            BranchPair::QQ => &self.delta_qq,
            BranchPair::QI => &self.delta_qi,
        }
    }
}

/// Interference kernel `Q_(m,i) = Phi_m^H F diag(gamma) F^H Phi_i`, with an
/// extra factor j when the transmit side is the Q branch (its phase matrix
/// is j times the I-branch one). The receive-side phase is always the
/// I-branch conjugate; detection takes Re on the I branch and Im on the Q
/// branch.
///
/// Because gamma is diagonal, `F diag(gamma) F^H` is circulant with symbol
/// `DFT(gamma)/N`, and the phase sandwich reduces to an exact quarter-turn
/// twist. Antenna replication (kernel Kronecker identity) stays implicit.
pub fn interference_kernel(
    gamma: &[f64],
    m: usize,
    i: usize,
    pair: BranchPair,
    dft: &UnitaryDft,
) -> CMat {
    let n = gamma.len();
    debug_assert_eq!(dft.len(), n);
    // circulant symbol: Gamma[d] = sum_n gamma[n] e^{-j2pi dn/N} / N
    let mut buf: Vec<Complex64> = gamma.iter().map(|&g| Complex64::new(g, 0.0)).collect();
    dft.forward(&mut buf);
    let scale = 1.0 / (n as f64).sqrt(); // unitary DFT to plain DFT/N
    for z in buf.iter_mut() {
        *z *= scale;
    }
    let sign = if (m + i) % 2 == 0 { 1.0 } else { -1.0 };
    let src_q = matches!(pair.synthesis(), Branch::Q);
    let mut q = CMat::zeros(n, n);
    for p in 0..n {
        for c in 0..n {
            let d = (p + n - c) % n;
            // e^{+j pi (p - c)/2} = conj of quarter_turn(p - c)
            let twist = quarter_turn((p + 4 * n - c) % 4).conj();
            let mut v = buf[d] * twist * sign;
            if src_q {
                v *= Complex64::new(0.0, 1.0);
            }
            q[(p, c)] = v;
        }
    }
    q
}

/// Dense-matrix oracles used by the test suites. None of these run in
/// production paths.
pub mod oracle {
    use super::*;

    /// Dense unitary DFT matrix F[k][n] = e^{-j2pi kn/N} / sqrt(N).
    pub fn dense_dft(n: usize) -> CMat {
        CMat::from_fn(n, n, |k, t| {
            let ang = -2.0 * std::f64::consts::PI * (k as f64) * (t as f64) / n as f64;
            Complex64::new(ang.cos(), ang.sin()) / (n as f64).sqrt()
        })
    }

    /// Dense phase matrix Phi_m = diag(e^{-j pi (n + 2m)/2}).
    pub fn dense_phase(n: usize, m: usize) -> CMat {
        CMat::from_fn(n, n, |r, c| {
            if r == c {
                quarter_turn((r + 2 * m) % 4)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Dense correlation `A^T B` of two synthesis matrices.
    pub fn dense_correlation(a: &SynthesisMatrix, b: &SynthesisMatrix) -> RMat {
        a.to_dense().transpose().matmul(&b.to_dense())
    }

    /// Extract block (m, i) of a dense (M N) x (M N) matrix.
    pub fn dense_block(g: &RMat, m: usize, i: usize, n: usize) -> RMat {
        RMat::from_fn(n, n, |r, c| g[(m * n + r, i * n + c)])
    }

    /// Dense kernel `Phi_m^H F G F^H Phi_i (j if Q source)` from a dense
    /// real block.
    pub fn dense_kernel(g_block: &RMat, m: usize, i: usize, pair: BranchPair) -> CMat {
        let n = g_block.rows;
        let f = dense_dft(n);
        let g = CMat::from_fn(n, n, |r, c| Complex64::new(g_block[(r, c)], 0.0));
        let mut q = dense_phase(n, m)
            .hermitian()
            .matmul(&f)
            .matmul(&g)
            .matmul(&f.hermitian())
            .matmul(&dense_phase(n, i));
        if matches!(pair.synthesis(), Branch::Q) {
            q = q.scale(Complex64::new(0.0, 1.0));
        }
        q
    }
}
