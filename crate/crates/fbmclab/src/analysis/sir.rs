//! Deterministic per-symbol SIR and SINR accounting.
//!
//! SIR is a property of the filter bank alone, so it is evaluated
//! analytically from the interference kernels under a flat channel and unit
//! symbol power: the desired coefficient of symbol m is the diagonal of its
//! detected-part self-kernel (Re on the real branch, Im on the imaginary
//! branch), every other coefficient in the same detected part is
//! interference. With the `compensated` flag the kernels are pre-multiplied
//! by the compensation transform `A_m^-1 (Q_trunc + dQ)` before the power
//! accounting, which is what the compensated receiver applies.
//!
//! The SINR extension adds the matched-filter noise gain (including the
//! `A_m^-1` noise coloring in the compensated case) for spectral-efficiency
//! studies.

use serde::Serialize;

use crate::compensation::{build_compensation, CompensationSet};
use crate::config::FbmcConfig;
use crate::fft::UnitaryDft;
use crate::filterbank::{correlation_set, interference_kernel, BranchPair, CorrelationSet};
use crate::linalg::RMat;
use crate::prototype::PrototypeFilter;
use crate::Result;

/// Lower clamp for dB conversions of zero powers.
pub const DB_FLOOR: f64 = -120.0;

/// 10 log10 with the report floor.
pub fn power_db(p: f64) -> f64 {
    if p <= 0.0 {
        DB_FLOOR
    } else {
        (10.0 * p.log10()).max(DB_FLOOR)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SirEntry {
    /// "real" or "imag".
    pub branch: &'static str,
    pub symbol: usize,
    pub signal_db: f64,
    pub interference_db: f64,
    pub sir_db: f64,
    /// Raw linear powers (unit symbol power), kept for downstream SINR use.
    #[serde(skip)]
    pub signal: f64,
    #[serde(skip)]
    pub interference: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SirReport {
    pub n_subcarriers: usize,
    pub block_len: usize,
    pub overlap: usize,
    pub cut_front: usize,
    pub cut_rear: usize,
    pub compensated: bool,
    pub entries: Vec<SirEntry>,
}

impl SirReport {
    pub fn entry(&self, branch: &str, symbol: usize) -> &SirEntry {
        self.entries
            .iter()
            .find(|e| e.branch == branch && e.symbol == symbol)
            .expect("report covers every (branch, symbol)")
    }

    pub fn min_sir_db(&self) -> f64 {
        self.entries.iter().map(|e| e.sir_db).fold(f64::INFINITY, f64::min)
    }

    /// The (branch, symbol) with the lowest SIR.
    pub fn worst(&self) -> (&'static str, usize) {
        let e = self
            .entries
            .iter()
            .min_by(|a, b| a.sir_db.partial_cmp(&b.sir_db).unwrap())
            .expect("non-empty report");
        (e.branch, e.symbol)
    }
}

/// Effective detected-part coefficient matrices for one symbol of one
/// branch: the self matrix plus all cross matrices in detection order.
struct EffectiveKernels {
    self_mat: RMat,
    cross: Vec<RMat>,
}

fn effective_kernels(
    grids: &CorrelationSet,
    orig: &CorrelationSet,
    comp: Option<&CompensationSet>,
    dft: &UnitaryDft,
    m: usize,
    m_blocks: usize,
    imag_branch: bool,
) -> EffectiveKernels {
    let (self_pair, same_pair, cross_pair) = if imag_branch {
        (BranchPair::QQ, BranchPair::QQ, BranchPair::QI)
    } else {
        (BranchPair::II, BranchPair::II, BranchPair::IQ)
    };
    let part = |grid: &CorrelationSet, pair: BranchPair, mm: usize, ii: usize| -> RMat {
        let gamma = grid.grid(pair).block_or_zero(mm, ii);
        let q = interference_kernel(&gamma, mm, ii, pair, dft);
        if imag_branch {
            q.im()
        } else {
            q.re()
        }
    };
    let mut self_mat = part(grids, self_pair, m, m);
    let mut cross = Vec::with_capacity(2 * m_blocks - 1);
    match comp {
        None => {
            for i in 0..m_blocks {
                if i != m {
                    cross.push(part(grids, same_pair, m, i));
                }
                cross.push(part(grids, cross_pair, m, i));
            }
        }
        Some(set) => {
            let a_inv = if imag_branch {
                set.im_self_inv(m)
            } else {
                set.re_self_inv(m)
            };
            // compensated residual coefficients: A^-1 Q_trunc for the self
            // term, A^-1 Q_orig for every subtracted term (the subtraction
            // cancels the truncation part exactly)
            if let Some(inv) = a_inv {
                self_mat = inv.matmul(&self_mat);
            }
            for i in 0..m_blocks {
                if i != m {
                    let mut k = part(orig, same_pair, m, i);
                    if let Some(inv) = a_inv {
                        k = inv.matmul(&k);
                    }
                    cross.push(k);
                }
                let mut k = part(orig, cross_pair, m, i);
                if let Some(inv) = a_inv {
                    k = inv.matmul(&k);
                }
                cross.push(k);
            }
        }
    }
    EffectiveKernels { self_mat, cross }
}

fn kernel_powers(k: &EffectiveKernels) -> (f64, f64) {
    let n = k.self_mat.rows;
    let mut signal = 0.0;
    let mut interference = 0.0;
    for r in 0..n {
        for c in 0..n {
            let v = k.self_mat[(r, c)];
            if r == c {
                signal += v * v;
            } else {
                interference += v * v;
            }
        }
    }
    for mat in &k.cross {
        interference += mat.data.iter().map(|v| v * v).sum::<f64>();
    }
    (signal / n as f64, interference / n as f64)
}

/// Per-symbol, per-branch signal and interference powers of the configured
/// truncation, optionally after compensation.
pub fn sir_table(
    filter: &PrototypeFilter,
    config: &FbmcConfig,
    compensated: bool,
) -> Result<SirReport> {
    config.validate()?;
    let n = config.n_subcarriers;
    let m_blocks = config.block_len;
    let dft = UnitaryDft::new(n);
    let grids = correlation_set(filter, m_blocks, config.cut_front, config.cut_rear)?;
    let orig = correlation_set(filter, m_blocks, 0, 0)?;
    let comp = if compensated {
        Some(build_compensation(filter, config)?)
    } else {
        None
    };
    let mut entries = Vec::with_capacity(2 * m_blocks);
    for m in 0..m_blocks {
        for (imag, branch) in [(false, "real"), (true, "imag")] {
            let eff = effective_kernels(&grids, &orig, comp.as_ref(), &dft, m, m_blocks, imag);
            let (signal, interference) = kernel_powers(&eff);
            entries.push(SirEntry {
                branch,
                symbol: m,
                signal_db: power_db(signal),
                interference_db: power_db(interference),
                sir_db: power_db(signal) - power_db(interference),
                signal,
                interference,
            });
        }
    }
    Ok(SirReport {
        n_subcarriers: n,
        block_len: m_blocks,
        overlap: config.overlap,
        cut_front: config.cut_front,
        cut_rear: config.cut_rear,
        compensated,
        entries,
    })
}

/// Per-symbol complex-symbol SINR under the configured truncation, flat
/// channel, symbol power delta^2 and per-sample noise `noise_power`.
///
/// Both branches' signal and interference powers combine; the noise term is
/// the matched-filter output variance per branch (diag of the truncated
/// self-correlation), colored by `A_m^-1` when compensated.
pub fn sinr_per_symbol(
    filter: &PrototypeFilter,
    config: &FbmcConfig,
    compensated: bool,
    noise_power: f64,
) -> Result<Vec<f64>> {
    config.validate()?;
    let n = config.n_subcarriers;
    let m_blocks = config.block_len;
    let dft = UnitaryDft::new(n);
    let grids = correlation_set(filter, m_blocks, config.cut_front, config.cut_rear)?;
    let orig = correlation_set(filter, m_blocks, 0, 0)?;
    let comp = if compensated {
        // the compensation inverses adapt to the operating noise level
        let mut noisy_cfg = config.clone();
        noisy_cfg.noise_power = noise_power;
        Some(build_compensation(filter, &noisy_cfg)?)
    } else {
        None
    };
    let half_power = config.symbol_power / 2.0;
    let mut out = Vec::with_capacity(m_blocks);
    for m in 0..m_blocks {
        let mut sig = 0.0;
        let mut int = 0.0;
        let mut noise = 0.0;
        for imag in [false, true] {
            let eff = effective_kernels(&grids, &orig, comp.as_ref(), &dft, m, m_blocks, imag);
            let (s, i) = kernel_powers(&eff);
            sig += s * half_power;
            int += i * half_power;
            // matched-filter noise: cov(Re z) = sigma^2/2 Re{Q(G_self)}
            let pair = if imag { BranchPair::QQ } else { BranchPair::II };
            let gamma = grids.grid(pair).block_or_zero(m, m);
            let qn = interference_kernel(&gamma, m, m, pair, &dft).re();
            let a_inv = comp.as_ref().and_then(|set| {
                if imag {
                    set.im_self_inv(m)
                } else {
                    set.re_self_inv(m)
                }
            });
            let var = match a_inv {
                Some(inv) => {
                    let colored = inv.matmul(&qn).matmul(&inv.transpose());
                    (0..n).map(|t| colored[(t, t)]).sum::<f64>() / n as f64
                }
                None => (0..n).map(|t| qn[(t, t)]).sum::<f64>() / n as f64,
            };
            noise += var * noise_power / 2.0;
        }
        out.push(sig / (int + noise).max(f64::MIN_POSITIVE));
    }
    Ok(out)
}
