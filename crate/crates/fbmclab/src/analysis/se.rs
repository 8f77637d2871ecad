//! Spectral-efficiency study.
//!
//! `SE = min(N_t, N_r) * M/(M + alpha) * (1/M) sum_m log2(1 + SINR_m)`
//! where alpha is the per-block tail overhead of the scheme: K-1 when every
//! tail symbol is transmitted, 1 when one front tail is kept, 0 when the
//! tails are cut entirely and compensated at the receiver.
//!
//! Overhead bookkeeping is emitted three ways because they genuinely
//! differ: `eta_eq7 = M/(K+M-1)` (transmit-efficiency of the untruncated
//! output), `eta_alpha = M/(M+alpha)` (the SE prefactor), and
//! `overhead_ratio = alpha/M` (tail symbols per data symbol; this is the
//! accounting under which one kept tail at M=20 costs exactly 5%).

use serde::Serialize;

use crate::analysis::cases::{truncation_case, TruncationCase};
use crate::analysis::sir::sinr_per_symbol;
use crate::config::FbmcConfig;
use crate::prototype::PrototypeFilter;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeScheme {
    UseItAll,
    OneFront,
    CompensateAll,
}

impl SeScheme {
    pub const ALL: [SeScheme; 3] = [
        SeScheme::UseItAll,
        SeScheme::OneFront,
        SeScheme::CompensateAll,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SeScheme::UseItAll => "use_it_all",
            SeScheme::OneFront => "one_front",
            SeScheme::CompensateAll => "compensate_all",
        }
    }

    /// Tail overhead per block.
    pub fn alpha(self, overlap: usize) -> usize {
        match self {
            SeScheme::UseItAll => overlap - 1,
            SeScheme::OneFront => 1,
            SeScheme::CompensateAll => 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SePoint {
    pub scheme: &'static str,
    pub snr_db: f64,
    pub block_len: usize,
    pub alpha: usize,
    /// M / (K + M - 1), the untruncated transmit efficiency.
    pub eta_eq7: f64,
    /// M / (M + alpha), the SE prefactor.
    pub eta_alpha: f64,
    /// alpha / M, tail symbols per data symbol.
    pub overhead_ratio: f64,
    pub se_bits_per_hz: f64,
}

/// The SE formula itself, exact in its inputs.
pub fn se_formula(n_min: usize, block_len: usize, alpha: usize, sinr: &[f64]) -> f64 {
    assert_eq!(sinr.len(), block_len);
    let mean_rate = sinr.iter().map(|&s| (1.0 + s).log2()).sum::<f64>() / block_len as f64;
    n_min as f64 * block_len as f64 / (block_len + alpha) as f64 * mean_rate
}

/// Evaluate the three schemes over an Es/N0 grid (dB). The SINR tables come
/// from the deterministic kernel accounting with the scheme's truncation
/// (compensate-all uses the compensated same-length kernels).
pub fn spectral_efficiency(
    filter: &PrototypeFilter,
    config: &FbmcConfig,
    snr_grid_db: &[f64],
) -> Result<Vec<SePoint>> {
    let n_min = config.n_tx.min(config.n_rx);
    let mut out = Vec::with_capacity(snr_grid_db.len() * SeScheme::ALL.len());
    for scheme in SeScheme::ALL {
        let (case, compensated) = match scheme {
            SeScheme::UseItAll => (TruncationCase::UseItAll, false),
            SeScheme::OneFront => (TruncationCase::OneFront, false),
            SeScheme::CompensateAll => (TruncationCase::SameLength, true),
        };
        let (cf, cr) = truncation_case(config.overlap, case)?;
        let scheme_cfg = config.with_truncation(cf, cr)?;
        let alpha = scheme.alpha(config.overlap);
        for &snr_db in snr_grid_db {
            let sigma2 = config.symbol_power * 10f64.powf(-snr_db / 10.0);
            let sinr = sinr_per_symbol(filter, &scheme_cfg, compensated, sigma2)?;
            out.push(SePoint {
                scheme: scheme.name(),
                snr_db,
                block_len: config.block_len,
                alpha,
                eta_eq7: config.block_len as f64
                    / (config.overlap + config.block_len - 1) as f64,
                eta_alpha: config.block_len as f64 / (config.block_len + alpha) as f64,
                overhead_ratio: alpha as f64 / config.block_len as f64,
                se_bits_per_hz: se_formula(n_min, config.block_len, alpha, &sinr),
            });
        }
    }
    Ok(out)
}
