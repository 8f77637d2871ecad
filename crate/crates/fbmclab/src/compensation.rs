//! Truncation-interference compensation.
//!
//! Truncating the synthesis matrix removes slice products from the
//! correlation blocks; the removed part is exactly the delta grid, so the
//! received real-branch symbol reads
//!
//! ```text
//! Re{u_m} = (I - Re{dQ_II[m,m]}) s_re[m]
//!         + sum_{i != m} (eps - Re{dQ_II[m,i]}) s_re[i]
//!         + sum_i       (eps - Re{dQ_IQ[m,i]}) s_im[i]  + noise
//! ```
//!
//! with eps the (small) finite-length orthogonality residual. Compensation
//! adds back the known `Re{dQ}`-weighted estimates of the other symbols and
//! multiplies by `A_m^-1 = (I - Re{dQ_II[m,m]})^-1`; the imaginary branch
//! mirrors this with Im parts. The symbol rooted by the truncation (real
//! m = 0 for even K, imaginary m = M-1 for odd K) must be compensated
//! before any symbol whose kernels reference it, since every other
//! subtraction consumes its estimate.
//!
//! `A_m^-1` colors the residual noise; the SIR/SINR accounting in the
//! analysis module carries that coloring explicitly.

use num_complex::Complex64;

use crate::config::{FbmcConfig, Modulation};
use crate::error::FbmcError;
use crate::fft::UnitaryDft;
use crate::filterbank::{delta_grid, interference_kernel, BlockGrid, BranchPair};
use crate::linalg::RMat;
use crate::prototype::PrototypeFilter;
use crate::qam::{slice_axis_value, BranchGrid, SymbolGrid};
use crate::transceiver::EqualizedGrid;
use crate::Result;

/// Condition-number gate for the self-correction inverses.
pub const MAX_CONDITION: f64 = 1e6;

/// Which branch a schedule step compensates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchSel {
    Real,
    Imag,
}

/// Precomputed compensation operators for one scenario.
#[derive(Debug, Clone)]
pub struct CompensationSet {
    pub n_subcarriers: usize,
    pub block_len: usize,
    pub overlap: usize,
    /// Per-symbol inverse of `I - Re{dQ_II[m,m]}` (None when truncation does
    /// not touch symbol m).
    a_inv_re: Vec<Option<RMat>>,
    /// Per-symbol inverse of `I - Im{dQ_QQ[m,m]}`.
    a_inv_im: Vec<Option<RMat>>,
    /// Reported condition numbers of the two inverses (1.0 when identity).
    pub cond_re: Vec<f64>,
    pub cond_im: Vec<f64>,
    /// Re{dQ_II[m,i]}: real-branch ISI kernels.
    dq_re_ii: Vec<Option<RMat>>,
    /// Re{dQ_IQ[m,i]}: imaginary-branch leakage into the real branch.
    dq_re_iq: Vec<Option<RMat>>,
    /// Im{dQ_QQ[m,i]}.
    dq_im_qq: Vec<Option<RMat>>,
    /// Im{dQ_QI[m,i]}.
    dq_im_qi: Vec<Option<RMat>>,
}

impl CompensationSet {
    fn idx(&self, m: usize, i: usize) -> usize {
        m * self.block_len + i
    }

    pub fn re_self_inv(&self, m: usize) -> Option<&RMat> {
        self.a_inv_re[m].as_ref()
    }

    pub fn im_self_inv(&self, m: usize) -> Option<&RMat> {
        self.a_inv_im[m].as_ref()
    }

    pub fn re_cross_ii(&self, m: usize, i: usize) -> Option<&RMat> {
        self.dq_re_ii[self.idx(m, i)].as_ref()
    }

    pub fn re_cross_iq(&self, m: usize, i: usize) -> Option<&RMat> {
        self.dq_re_iq[self.idx(m, i)].as_ref()
    }

    pub fn im_cross_qq(&self, m: usize, i: usize) -> Option<&RMat> {
        self.dq_im_qq[self.idx(m, i)].as_ref()
    }

    pub fn im_cross_qi(&self, m: usize, i: usize) -> Option<&RMat> {
        self.dq_im_qi[self.idx(m, i)].as_ref()
    }

    /// True when no truncation interference exists at all (identity set).
    pub fn is_identity(&self) -> bool {
        self.a_inv_re.iter().all(Option::is_none)
            && self.a_inv_im.iter().all(Option::is_none)
            && self.dq_re_ii.iter().all(Option::is_none)
            && self.dq_re_iq.iter().all(Option::is_none)
            && self.dq_im_qq.iter().all(Option::is_none)
            && self.dq_im_qi.iter().all(Option::is_none)
    }

    /// The symbol every other compensation depends on: real m = 0 for even
    /// K, imaginary m = M-1 for odd K.
    pub fn root(&self) -> (BranchSel, usize) {
        if self.overlap % 2 == 0 {
            (BranchSel::Real, 0)
        } else {
            (BranchSel::Imag, self.block_len - 1)
        }
    }
}

/// De-truncation inverse of one self-correction matrix.
///
/// With zero noise (or a ZF scenario) this is the plain inverse. When the
/// scenario carries noise and an MMSE equalizer, the near-annihilated
/// directions of A would amplify noise without bound, so the inverse is
/// regularized by the matched-filter noise covariance:
/// `W = A^T (A A^T + sigma^2/delta^2 * Qn)^-1`, which collapses to `A^-1`
/// as the noise vanishes.
fn detruncation_inverse(a: &RMat, noise_cov: &RMat, reg: f64) -> Result<RMat> {
    if reg <= 0.0 {
        return a.inverse();
    }
    let at = a.transpose();
    let gram = a.matmul(&at).add(&noise_cov.scale(reg));
    Ok(at.matmul(&gram.inverse()?))
}

/// Materialize all delta kernels and self-correction inverses once per
/// scenario.
pub fn build_compensation(filter: &PrototypeFilter, config: &FbmcConfig) -> Result<CompensationSet> {
    config.validate()?;
    let n = config.n_subcarriers;
    let m_blocks = config.block_len;
    let dft = UnitaryDft::new(n);
    // truncated self-correlations set the matched-filter noise covariance
    let trunc = crate::filterbank::correlation_set(
        filter,
        m_blocks,
        config.cut_front,
        config.cut_rear,
    )?;
    let reg = match config.equalizer {
        crate::config::Equalizer::Mmse => config.noise_power / config.symbol_power,
        crate::config::Equalizer::Zf => 0.0,
    };
    let deltas = |pair| delta_grid(filter, pair, m_blocks, config.cut_front, config.cut_rear);
    let d_ii = deltas(BranchPair::II)?;
    let d_iq = deltas(BranchPair::IQ)?;
    let d_qq = deltas(BranchPair::QQ)?;
    let d_qi = deltas(BranchPair::QI)?;

    let kernel_part = |g: &BlockGrid, m: usize, i: usize, pair: BranchPair, imag: bool| {
        g.block(m, i).map(|gamma| {
            let q = interference_kernel(gamma, m, i, pair, &dft);
            if imag {
                q.im()
            } else {
                q.re()
            }
        })
    };

    let mut set = CompensationSet {
        n_subcarriers: n,
        block_len: m_blocks,
        overlap: config.overlap,
        a_inv_re: vec![None; m_blocks],
        a_inv_im: vec![None; m_blocks],
        cond_re: vec![1.0; m_blocks],
        cond_im: vec![1.0; m_blocks],
        dq_re_ii: vec![None; m_blocks * m_blocks],
        dq_re_iq: vec![None; m_blocks * m_blocks],
        dq_im_qq: vec![None; m_blocks * m_blocks],
        dq_im_qi: vec![None; m_blocks * m_blocks],
    };

    for m in 0..m_blocks {
        for i in 0..m_blocks {
            let at = m * m_blocks + i;
            if m == i {
                if let Some(re) = kernel_part(&d_ii, m, m, BranchPair::II, false) {
                    let a = RMat::eye(n).sub(&re);
                    let cond = a.cond_1().unwrap_or(f64::INFINITY);
                    if cond > MAX_CONDITION {
                        return Err(FbmcError::IllConditioned {
                            symbol: m,
                            branch: "real",
                            cond,
                        });
                    }
                    set.cond_re[m] = cond;
                    let gamma = trunc.ii.block_or_zero(m, m);
                    let qn = interference_kernel(&gamma, m, m, BranchPair::II, &dft).re();
                    set.a_inv_re[m] = Some(detruncation_inverse(&a, &qn, reg)?);
                }
                if let Some(im) = kernel_part(&d_qq, m, m, BranchPair::QQ, true) {
                    let a = RMat::eye(n).sub(&im);
                    let cond = a.cond_1().unwrap_or(f64::INFINITY);
                    if cond > MAX_CONDITION {
                        return Err(FbmcError::IllConditioned {
                            symbol: m,
                            branch: "imaginary",
                            cond,
                        });
                    }
                    set.cond_im[m] = cond;
                    let gamma = trunc.qq.block_or_zero(m, m);
                    // the j factor cancels in the Q-branch noise covariance
                    let qn = interference_kernel(&gamma, m, m, BranchPair::II, &dft).re();
                    set.a_inv_im[m] = Some(detruncation_inverse(&a, &qn, reg)?);
                }
            } else {
                set.dq_re_ii[at] = kernel_part(&d_ii, m, i, BranchPair::II, false);
                set.dq_im_qq[at] = kernel_part(&d_qq, m, i, BranchPair::QQ, true);
            }
            // cross-branch terms run over all i including i == m
            set.dq_re_iq[at] = kernel_part(&d_iq, m, i, BranchPair::IQ, false);
            set.dq_im_qi[at] = kernel_part(&d_qi, m, i, BranchPair::QI, true);
        }
    }
    Ok(set)
}

/// Current symbol estimates feeding the subtraction terms, with flags
/// tracking which symbols have been compensated so far.
#[derive(Debug, Clone)]
pub struct BlockEstimates {
    pub n_subcarriers: usize,
    pub n_tx: usize,
    pub block_len: usize,
    /// Real-branch estimates per symbol, layout `n * n_tx + j`.
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    pub comp_re: Vec<bool>,
    pub comp_im: Vec<bool>,
}

impl BlockEstimates {
    /// Genie estimates: the true transmitted branches (analysis only).
    pub fn genie(truth: &BranchGrid) -> Self {
        let w = truth.column_len();
        Self {
            n_subcarriers: truth.n_subcarriers,
            n_tx: truth.n_tx,
            block_len: truth.block_len,
            re: (0..truth.block_len)
                .map(|m| truth.re[m * w..(m + 1) * w].to_vec())
                .collect(),
            im: (0..truth.block_len)
                .map(|m| truth.im[m * w..(m + 1) * w].to_vec())
                .collect(),
            comp_re: vec![true; truth.block_len],
            comp_im: vec![true; truth.block_len],
        }
    }

    /// Decision-directed seed: hard-sliced uncompensated equalizer outputs.
    pub fn sliced(u: &EqualizedGrid, modulation: Modulation, symbol_power: f64) -> Self {
        let w = u.n_subcarriers * u.n_tx;
        let re = (0..u.block_len)
            .map(|m| {
                (0..w)
                    .map(|idx| slice_axis_value(u.u_bar[m][idx].re, modulation, symbol_power))
                    .collect()
            })
            .collect();
        let im = (0..u.block_len)
            .map(|m| {
                (0..w)
                    .map(|idx| slice_axis_value(u.u_til[m][idx].im, modulation, symbol_power))
                    .collect()
            })
            .collect();
        Self {
            n_subcarriers: u.n_subcarriers,
            n_tx: u.n_tx,
            block_len: u.block_len,
            re,
            im,
            comp_re: vec![false; u.block_len],
            comp_im: vec![false; u.block_len],
        }
    }
}

fn apply_per_stream(mat: &RMat, vec_in: &[f64], n_tx: usize, acc: &mut [f64], sign: f64) {
    let n = mat.rows;
    for j in 0..n_tx {
        let stream: Vec<f64> = (0..n).map(|t| vec_in[t * n_tx + j]).collect();
        let out = mat.matvec(&stream);
        for t in 0..n {
            acc[t * n_tx + j] += sign * out[t];
        }
    }
}

fn root_satisfied(
    set: &CompensationSet,
    est: &BlockEstimates,
    branch: BranchSel,
    m: usize,
) -> Result<()> {
    let (root_branch, root_m) = set.root();
    if (branch, m) == (root_branch, root_m) {
        return Ok(());
    }
    let references_root = match (branch, root_branch) {
        (BranchSel::Real, BranchSel::Real) => set.re_cross_ii(m, root_m).is_some(),
        (BranchSel::Real, BranchSel::Imag) => set.re_cross_iq(m, root_m).is_some(),
        (BranchSel::Imag, BranchSel::Real) => set.im_cross_qi(m, root_m).is_some(),
        (BranchSel::Imag, BranchSel::Imag) => set.im_cross_qq(m, root_m).is_some(),
    };
    let root_done = match root_branch {
        BranchSel::Real => est.comp_re[root_m],
        BranchSel::Imag => est.comp_im[root_m],
    };
    if references_root && !root_done {
        return Err(FbmcError::OrderingViolation {
            needed: root_m,
            requested: m,
            branch: match root_branch {
                BranchSel::Real => "real",
                BranchSel::Imag => "imaginary",
            },
        });
    }
    Ok(())
}

fn compensate_real_unchecked(
    set: &CompensationSet,
    m: usize,
    u_bar_m: &[Complex64],
    est: &BlockEstimates,
) -> Vec<f64> {
    let n_tx = est.n_tx;
    let mut v: Vec<f64> = u_bar_m.iter().map(|z| z.re).collect();
    for i in 0..set.block_len {
        if i != m {
            if let Some(kmat) = set.re_cross_ii(m, i) {
                apply_per_stream(kmat, &est.re[i], n_tx, &mut v, 1.0);
            }
        }
        if let Some(kmat) = set.re_cross_iq(m, i) {
            apply_per_stream(kmat, &est.im[i], n_tx, &mut v, 1.0);
        }
    }
    match set.re_self_inv(m) {
        Some(inv) => {
            let mut out = vec![0.0; v.len()];
            apply_per_stream(inv, &v, n_tx, &mut out, 1.0);
            out
        }
        None => v,
    }
}

fn compensate_imag_unchecked(
    set: &CompensationSet,
    m: usize,
    u_til_m: &[Complex64],
    est: &BlockEstimates,
) -> Vec<f64> {
    let n_tx = est.n_tx;
    let mut v: Vec<f64> = u_til_m.iter().map(|z| z.im).collect();
    for i in 0..set.block_len {
        if i != m {
            if let Some(kmat) = set.im_cross_qq(m, i) {
                apply_per_stream(kmat, &est.im[i], n_tx, &mut v, 1.0);
            }
        }
        if let Some(kmat) = set.im_cross_qi(m, i) {
            apply_per_stream(kmat, &est.re[i], n_tx, &mut v, 1.0);
        }
    }
    match set.im_self_inv(m) {
        Some(inv) => {
            let mut out = vec![0.0; v.len()];
            apply_per_stream(inv, &v, n_tx, &mut out, 1.0);
            out
        }
        None => v,
    }
}

/// Compensate real-branch symbol m. Requires the root symbol's estimate to
/// be compensated already whenever this symbol's kernels reference it.
pub fn compensate_real(
    set: &CompensationSet,
    m: usize,
    u_bar_m: &[Complex64],
    est: &BlockEstimates,
) -> Result<Vec<f64>> {
    root_satisfied(set, est, BranchSel::Real, m)?;
    Ok(compensate_real_unchecked(set, m, u_bar_m, est))
}

/// Compensate imaginary-branch symbol m (mirror of [`compensate_real`]).
pub fn compensate_imag(
    set: &CompensationSet,
    m: usize,
    u_til_m: &[Complex64],
    est: &BlockEstimates,
) -> Result<Vec<f64>> {
    root_satisfied(set, est, BranchSel::Imag, m)?;
    Ok(compensate_imag_unchecked(set, m, u_til_m, est))
}

/// Default compensation order: the truncation-rooted symbol first, then the
/// rest of its branch, then the other branch. For odd K the whole schedule
/// mirrors (indices run backwards from the far edge).
pub fn default_schedule(overlap: usize, block_len: usize) -> Vec<(BranchSel, usize)> {
    let mut sched = Vec::with_capacity(2 * block_len);
    if overlap % 2 == 0 {
        sched.push((BranchSel::Real, 0));
        sched.extend((1..block_len).map(|m| (BranchSel::Real, m)));
        sched.extend((0..block_len).map(|m| (BranchSel::Imag, m)));
    } else {
        sched.push((BranchSel::Imag, block_len - 1));
        sched.extend((0..block_len - 1).rev().map(|m| (BranchSel::Imag, m)));
        sched.extend((0..block_len).rev().map(|m| (BranchSel::Real, m)));
    }
    sched
}

/// How the subtraction-term estimates are sourced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompensationMode {
    /// True transmitted symbols feed the subtractions (analysis only).
    Genie,
    /// Hard-sliced uncompensated outputs, refreshed after each compensated
    /// symbol (one Gauss-Seidel sweep).
    DecisionDirected,
}

/// Run a compensation schedule over a whole equalized block.
///
/// The schedule hook exists so analyses can measure ordering sensitivity;
/// it bypasses the per-symbol root check. [`compensate_block`] always uses
/// the correct default schedule.
pub fn compensate_block_with_schedule(
    u: &EqualizedGrid,
    set: &CompensationSet,
    schedule: &[(BranchSel, usize)],
    mode: CompensationMode,
    truth: Option<&BranchGrid>,
    modulation: Modulation,
    symbol_power: f64,
) -> Result<SymbolGrid> {
    let mut est = match mode {
        CompensationMode::Genie => {
            let truth = truth.ok_or_else(|| {
                FbmcError::InvalidConfig("genie compensation needs the true symbols".into())
            })?;
            BlockEstimates::genie(truth)
        }
        CompensationMode::DecisionDirected => BlockEstimates::sliced(u, modulation, symbol_power),
    };
    let w = u.n_subcarriers * u.n_tx;
    let mut out_re: Vec<Vec<f64>> = (0..u.block_len)
        .map(|m| u.u_bar[m].iter().map(|z| z.re).collect())
        .collect();
    let mut out_im: Vec<Vec<f64>> = (0..u.block_len)
        .map(|m| u.u_til[m].iter().map(|z| z.im).collect())
        .collect();
    for &(branch, m) in schedule {
        match branch {
            BranchSel::Real => {
                let s = compensate_real_unchecked(set, m, &u.u_bar[m], &est);
                if matches!(mode, CompensationMode::DecisionDirected) {
                    est.re[m] = s
                        .iter()
                        .map(|&v| slice_axis_value(v, modulation, symbol_power))
                        .collect();
                }
                est.comp_re[m] = true;
                out_re[m] = s;
            }
            BranchSel::Imag => {
                let s = compensate_imag_unchecked(set, m, &u.u_til[m], &est);
                if matches!(mode, CompensationMode::DecisionDirected) {
                    est.im[m] = s
                        .iter()
                        .map(|&v| slice_axis_value(v, modulation, symbol_power))
                        .collect();
                }
                est.comp_im[m] = true;
                out_im[m] = s;
            }
        }
    }
    let mut grid = SymbolGrid::zeros(u.n_subcarriers, u.n_tx, u.block_len);
    for m in 0..u.block_len {
        for idx in 0..w {
            let n = idx / u.n_tx;
            let j = idx % u.n_tx;
            *grid.entry_mut(m, n, j) = Complex64::new(out_re[m][idx], out_im[m][idx]);
        }
    }
    Ok(grid)
}

/// Compensate a whole equalized block with the default schedule and combine
/// the two branches into a complex symbol-grid estimate.
pub fn compensate_block(
    u: &EqualizedGrid,
    set: &CompensationSet,
    mode: CompensationMode,
    truth: Option<&BranchGrid>,
    modulation: Modulation,
    symbol_power: f64,
) -> Result<SymbolGrid> {
    let schedule = default_schedule(set.overlap, set.block_len);
    compensate_block_with_schedule(u, set, &schedule, mode, truth, modulation, symbol_power)
}
